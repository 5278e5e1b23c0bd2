//! Per-symbol transmission: QPSK mapping, the received samples at every
//! port, and the SINR/SNR quantities derived from them.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_normal, ChannelDrop};
use crate::error::{FamaError, Result};

/// Two Gray-coded bits packed as `(b0 << 1) | b1`. `b0` selects the sign of
/// the imaginary part and `b1` the sign of the real part.
pub type Dibit = u8;

/// Returned in place of `+∞` when an SINR denominator vanishes.
pub const SINR_SATURATED: f64 = f64::MAX;

/// Constellation point of `dibit` at average power `symbol_power`.
///
/// `00 → +1+j`, `01 → −1+j`, `11 → −1−j`, `10 → +1−j`, scaled by `√(σ²/2)`.
pub fn qpsk_point(dibit: Dibit, symbol_power: f64) -> Complex64 {
    let a = (symbol_power / 2.0).sqrt();
    let re = if dibit & 0b01 == 0 { a } else { -a };
    let im = if dibit & 0b10 == 0 { a } else { -a };
    Complex64::new(re, im)
}

/// Nearest constellation point by sign decisions. Zero is treated as
/// positive on both axes.
pub fn qpsk_decide(y: Complex64) -> Dibit {
    let b1 = u8::from(y.re < 0.0);
    let b0 = u8::from(y.im < 0.0);
    (b0 << 1) | b1
}

/// Maps a bit sequence onto QPSK symbols, two bits per symbol.
pub fn modulate_qpsk(bits: &[bool], symbol_power: f64) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(FamaError::OddBitCount(bits.len()));
    }
    if !(symbol_power > 0.0) {
        return Err(FamaError::InvalidParameter(format!(
            "symbol power must be positive, got {symbol_power}"
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|pair| qpsk_point((u8::from(pair[0]) << 1) | u8::from(pair[1]), symbol_power))
        .collect())
}

/// Inverse of [`modulate_qpsk`] by hard decisions.
pub fn demodulate_qpsk(symbols: &[Complex64]) -> Vec<bool> {
    symbols
        .iter()
        .flat_map(|&y| {
            let d = qpsk_decide(y);
            [d & 0b10 != 0, d & 0b01 != 0]
        })
        .collect()
}

/// One symbol instant: `symbols[ū]` is sent from BS antenna `ū`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub dibits: Vec<Dibit>,
    pub symbols: Vec<Complex64>,
    pub symbol_power: f64,
}

impl SymbolBlock {
    pub fn from_dibits(dibits: Vec<Dibit>, symbol_power: f64) -> Self {
        let symbols = dibits.iter().map(|&d| qpsk_point(d, symbol_power)).collect();
        Self {
            dibits,
            symbols,
            symbol_power,
        }
    }

    /// Independent uniform QPSK symbols for `num_users` antennas.
    pub fn random<R: Rng + ?Sized>(num_users: usize, symbol_power: f64, rng: &mut R) -> Self {
        let dibits = (0..num_users).map(|_| rng.random_range(0..4u8)).collect();
        Self::from_dibits(dibits, symbol_power)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Received samples at all `K` ports of one user for one symbol, together
/// with the noise realisation that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PortObservations {
    pub received: Vec<Complex64>,
    pub noise: Vec<Complex64>,
    pub noise_power: f64,
}

impl PortObservations {
    pub fn num_ports(&self) -> usize {
        self.received.len()
    }
}

fn check_block(drop: &ChannelDrop, symbols: &SymbolBlock) -> Result<()> {
    if symbols.len() != drop.num_users() {
        return Err(FamaError::Dimension(format!(
            "{} symbols for {} users",
            symbols.len(),
            drop.num_users()
        )));
    }
    Ok(())
}

/// Inter-user interference `Σ_{ū≠u} g^{(ū,u)}_k s_ū` at every port.
pub fn interference(drop: &ChannelDrop, symbols: &SymbolBlock) -> Result<Vec<Complex64>> {
    check_block(drop, symbols)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); drop.num_ports()];
    for (tx, (row, &s)) in drop.rows().iter().zip(&symbols.symbols).enumerate() {
        if tx == drop.receiver() {
            continue;
        }
        for (a, &g) in acc.iter_mut().zip(row) {
            *a += g * s;
        }
    }
    Ok(acc)
}

/// Received samples for a given noise realisation.
pub fn receive_with_noise(
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    noise: Vec<Complex64>,
    noise_power: f64,
) -> Result<PortObservations> {
    if noise.len() != drop.num_ports() {
        return Err(FamaError::Dimension(format!(
            "{} noise samples for {} ports",
            noise.len(),
            drop.num_ports()
        )));
    }
    let s_u = symbols.symbols[drop.receiver()];
    let received = interference(drop, symbols)?
        .into_iter()
        .zip(drop.desired_gains())
        .zip(&noise)
        .map(|((i, &g), &eta)| g * s_u + i + eta)
        .collect();
    Ok(PortObservations {
        received,
        noise,
        noise_power,
    })
}

/// Received samples with fresh `CN(0, σ_η²)` noise at every port.
pub fn receive<R: Rng + ?Sized>(
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    noise_power: f64,
    rng: &mut R,
) -> Result<PortObservations> {
    if !(noise_power >= 0.0) {
        return Err(FamaError::InvalidParameter(format!(
            "noise power must be nonnegative, got {noise_power}"
        )));
    }
    let sigma = noise_power.sqrt();
    let noise = (0..drop.num_ports())
        .map(|_| complex_normal(rng) * sigma)
        .collect();
    receive_with_noise(drop, symbols, noise, noise_power)
}

/// Instantaneous SINR at every port for the realised symbols and noise.
///
/// A vanishing denominator yields [`SINR_SATURATED`].
pub fn instantaneous_sinr(
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    noise: &[Complex64],
) -> Result<Vec<f64>> {
    if noise.len() != drop.num_ports() {
        return Err(FamaError::Dimension(format!(
            "{} noise samples for {} ports",
            noise.len(),
            drop.num_ports()
        )));
    }
    let signal_power = symbols.symbols[drop.receiver()].norm_sqr();
    Ok(interference(drop, symbols)?
        .into_iter()
        .zip(noise)
        .zip(drop.desired_gains())
        .map(|((i, &eta), g)| {
            let denom = (i + eta).norm_sqr();
            if denom == 0.0 {
                SINR_SATURATED
            } else {
                (g.norm_sqr() * signal_power / denom).min(SINR_SATURATED)
            }
        })
        .collect())
}

/// Average per-port SNR `Γ = Ω σ_s² / σ_η²` (linear).
pub fn average_snr(desired_power: f64, symbol_power: f64, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(FamaError::InvalidParameter(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    Ok(desired_power * symbol_power / noise_power)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
