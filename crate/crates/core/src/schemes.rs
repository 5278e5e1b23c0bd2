//! Receiver schemes operating on one symbol's port observations.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{ChannelDrop, FasGeometry};
use crate::error::{FamaError, Result};
use crate::phy::{self, qpsk_decide, Dibit, PortObservations, SymbolBlock};
use crate::port_select::{shortlist, SelectionConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReceiverScheme {
    /// Shortlist ports, then MRC over the shortlist.
    TurboFrontEnd(SelectionConfig),
    /// MRC over every port.
    AllPortMrc,
    /// Single port of maximum instantaneous SINR, chosen with genie
    /// knowledge of the realised interference and noise.
    FastFamaOracle,
}

/// What one scheme produced for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolOutcome {
    /// MRC output over the ports used (a single port for fast FAMA).
    pub combined: Complex64,
    pub ports: Vec<usize>,
    pub detected: Dibit,
}

/// `Σ_{k∈ports} conj(g_k)/√Ω · r_k`, summed in ascending port order so the
/// result does not depend on how `ports` is ordered.
pub fn mrc_combine(
    observations: &PortObservations,
    desired_gains: &[Complex64],
    ports: &[usize],
    desired_power: f64,
) -> Result<Complex64> {
    if ports.is_empty() {
        return Err(FamaError::EmptyPorts);
    }
    let k = observations.num_ports();
    if desired_gains.len() != k {
        return Err(FamaError::Dimension(format!(
            "{} gains for {k} ports",
            desired_gains.len()
        )));
    }
    let mut order = ports.to_vec();
    order.sort_unstable();
    if order.last().is_some_and(|&p| p >= k) {
        return Err(FamaError::Dimension(format!("port index beyond {k}")));
    }
    let norm = desired_power.sqrt();
    Ok(order.iter().fold(Complex64::new(0.0, 0.0), |acc, &p| {
        acc + desired_gains[p].conj() / norm * observations.received[p]
    }))
}

fn mrc_all_ports(
    observations: &PortObservations,
    desired_gains: &[Complex64],
    desired_power: f64,
) -> Complex64 {
    let norm = desired_power.sqrt();
    desired_gains
        .iter()
        .zip(&observations.received)
        .fold(Complex64::new(0.0, 0.0), |acc, (g, &r)| acc + g.conj() / norm * r)
}

/// Index of the largest value, lowest index on ties.
fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Port maximising the instantaneous SINR for the realised noise.
pub fn fast_fama_select(
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    noise: &[Complex64],
) -> Result<usize> {
    Ok(argmax(&phy::instantaneous_sinr(drop, symbols, noise)?))
}

/// Same choice through `|g_k|² / |I_k + η_k|²`, i.e. with the constant
/// `|s_u|²` dropped.
pub fn fast_fama_select_by_ratio(
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    noise: &[Complex64],
) -> Result<usize> {
    let ratio: Vec<f64> = phy::interference(drop, symbols)?
        .into_iter()
        .zip(noise)
        .zip(drop.desired_gains())
        .map(|((i, &eta), g)| {
            let denom = (i + eta).norm_sqr();
            if denom == 0.0 {
                phy::SINR_SATURATED
            } else {
                (g.norm_sqr() / denom).min(phy::SINR_SATURATED)
            }
        })
        .collect();
    Ok(argmax(&ratio))
}

/// Hard QPSK decision on `y` after derotating by `reference`.
pub fn detect_qpsk(y: Complex64, reference: Complex64) -> Dibit {
    qpsk_decide(y * reference.conj())
}

/// Applies `scheme` to already generated observations.
pub fn process_symbol(
    scheme: &ReceiverScheme,
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    observations: &PortObservations,
    geometry: &FasGeometry,
) -> Result<SymbolOutcome> {
    let gains = drop.desired_gains();
    let omega = drop.powers().desired;
    match scheme {
        ReceiverScheme::TurboFrontEnd(config) => {
            let list = shortlist(observations, gains, symbols.symbol_power, config, geometry)?;
            let combined = mrc_combine(observations, gains, &list.ports, omega)?;
            Ok(SymbolOutcome {
                combined,
                ports: list.ports,
                detected: detect_qpsk(combined, Complex64::new(1.0, 0.0)),
            })
        }
        ReceiverScheme::AllPortMrc => {
            let combined = mrc_all_ports(observations, gains, omega);
            Ok(SymbolOutcome {
                combined,
                ports: (0..gains.len()).collect(),
                detected: detect_qpsk(combined, Complex64::new(1.0, 0.0)),
            })
        }
        ReceiverScheme::FastFamaOracle => {
            let best = fast_fama_select(drop, symbols, &observations.noise)?;
            let combined = mrc_combine(observations, gains, &[best], omega)?;
            Ok(SymbolOutcome {
                combined,
                ports: vec![best],
                detected: detect_qpsk(observations.received[best], gains[best]),
            })
        }
    }
}

/// Generates the observations for one symbol and runs `scheme` on them.
pub fn run_symbol<R: Rng + ?Sized>(
    scheme: &ReceiverScheme,
    drop: &ChannelDrop,
    symbols: &SymbolBlock,
    noise_power: f64,
    geometry: &FasGeometry,
    rng: &mut R,
) -> Result<SymbolOutcome> {
    let observations = phy::receive(drop, symbols, noise_power, rng)?;
    process_symbol(scheme, drop, symbols, &observations, geometry)
}
