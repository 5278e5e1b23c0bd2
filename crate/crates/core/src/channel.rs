//! Spatially correlated channel model of a linear fluid antenna.
//!
//! The `K` ports sit on a uniform grid across an aperture of `W` carrier
//! wavelengths. Port gains are jointly circularly-symmetric complex Gaussian
//! with covariance `Ω·J`, where `J[n,m] = J₀(2π·|n−m|·W/(K−1))`. Rows are
//! drawn as `√Ω·Q·Λ^{1/2}·w` from the eigendecomposition `J = QΛQᵀ`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::bessel::j0;
use crate::error::{FamaError, Result};

/// Eigenpairs with `λ ≤ RANK_TOLERANCE·λ₁` are left out of the colouring
/// matrix used for sampling. They are round-off of a numerically rank
/// deficient `J` and contribute nothing measurable to the covariance.
const RANK_TOLERANCE: f64 = 1e-12;

/// Port count and normalised aperture of a linear fluid antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FasGeometry {
    num_ports: usize,
    aperture: f64,
}

impl FasGeometry {
    pub fn new(num_ports: usize, aperture: f64) -> Result<Self> {
        if num_ports < 2 {
            return Err(FamaError::InvalidGeometry(format!(
                "need at least 2 ports, got {num_ports}"
            )));
        }
        if !(aperture >= 0.0 && aperture.is_finite()) {
            return Err(FamaError::InvalidGeometry(format!(
                "aperture must be finite and nonnegative, got {aperture}"
            )));
        }
        Ok(Self {
            num_ports,
            aperture,
        })
    }

    pub fn num_ports(&self) -> usize {
        self.num_ports
    }

    /// Aperture length in wavelengths.
    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Distance between ports `k` and `l` in wavelengths.
    pub fn port_separation(&self, k: usize, l: usize) -> f64 {
        k.abs_diff(l) as f64 * self.aperture / (self.num_ports - 1) as f64
    }

    /// Correlation between two ports whose indices differ by `lag`.
    pub fn correlation_at_lag(&self, lag: usize) -> f64 {
        j0(2.0 * PI * lag as f64 / (self.num_ports - 1) as f64 * self.aperture)
    }
}

/// The Bessel correlation matrix `J` with its eigendecomposition.
///
/// Immutable once built; share it by reference across sampling workers.
#[derive(Debug, Clone)]
pub struct CorrelationModel {
    geometry: FasGeometry,
    matrix: DMatrix<f64>,
    eigenvectors: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    /// `K × rank` row-major block of `Q·Λ^{1/2}`.
    coloring: Vec<f64>,
    rank: usize,
}

/// Builds `J` for `geometry` and decomposes it.
///
/// Eigenvalues are clamped to `[0, ∞)` and sorted descending; equal
/// eigenvalues keep the solver's column order.
pub fn build_correlation(geometry: FasGeometry) -> Result<CorrelationModel> {
    let k = geometry.num_ports();
    if k < 2 {
        return Err(FamaError::InvalidGeometry(format!(
            "need at least 2 ports, got {k}"
        )));
    }
    // Toeplitz: only K distinct values.
    let by_lag: Vec<f64> = (0..k).map(|lag| geometry.correlation_at_lag(lag)).collect();
    let matrix = DMatrix::from_fn(k, k, |n, m| by_lag[n.abs_diff(m)]);

    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let eigenvectors = DMatrix::from_fn(k, k, |row, col| eig.eigenvectors[(row, order[col])]);

    let cutoff = RANK_TOLERANCE * eigenvalues[0];
    let rank = eigenvalues.iter().take_while(|&&l| l > cutoff).count().max(1);
    let mut coloring = vec![0.0; k * rank];
    for row in 0..k {
        for col in 0..rank {
            coloring[row * rank + col] = eigenvectors[(row, col)] * eigenvalues[col].sqrt();
        }
    }

    Ok(CorrelationModel {
        geometry,
        matrix,
        eigenvectors,
        eigenvalues,
        coloring,
        rank,
    })
}

impl CorrelationModel {
    pub fn geometry(&self) -> FasGeometry {
        self.geometry
    }

    pub fn num_ports(&self) -> usize {
        self.geometry.num_ports()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Clamped eigenvalues, largest first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of eigenpairs retained for sampling.
    pub fn effective_rank(&self) -> usize {
        self.rank
    }

    /// `‖J − QΛQᵀ‖_F / ‖J‖_F` using the clamped eigenvalues.
    pub fn reconstruction_error(&self) -> f64 {
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            &self.eigenvalues,
        ));
        let rebuilt = &self.eigenvectors * lambda * self.eigenvectors.transpose();
        (&self.matrix - rebuilt).norm() / self.matrix.norm()
    }

    /// Draws one channel row `√Ω·Q·Λ^{1/2}·w` with `w ~ CN(0, I)`.
    ///
    /// A zero `power` yields an all-zero row without touching `rng`.
    pub fn sample_row<R: Rng + ?Sized>(&self, power: f64, rng: &mut R) -> Vec<Complex64> {
        let k = self.num_ports();
        if power == 0.0 {
            return vec![Complex64::new(0.0, 0.0); k];
        }
        let w: Vec<Complex64> = (0..self.rank).map(|_| complex_normal(rng)).collect();
        let scale = power.sqrt();
        self.coloring
            .chunks_exact(self.rank)
            .map(|coeffs| {
                let acc = coeffs
                    .iter()
                    .zip(&w)
                    .fold(Complex64::new(0.0, 0.0), |acc, (&c, &wi)| acc + wi * c);
                acc * scale
            })
            .collect()
    }
}

/// One `CN(0, 1)` draw.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Average gains: `desired` is `Ω_{u,u}` for the serving link, `cross`
/// is `Ω_cross` for every interfering link.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinkPowers {
    pub desired: f64,
    pub cross: f64,
}

impl Default for LinkPowers {
    fn default() -> Self {
        Self {
            desired: 1.0,
            cross: 1.0,
        }
    }
}

impl LinkPowers {
    pub fn validate(&self) -> Result<()> {
        if !(self.desired > 0.0 && self.desired.is_finite()) {
            return Err(FamaError::InvalidParameter(format!(
                "desired power must be positive, got {}",
                self.desired
            )));
        }
        if !(self.cross >= 0.0 && self.cross.is_finite()) {
            return Err(FamaError::InvalidParameter(format!(
                "cross power must be nonnegative, got {}",
                self.cross
            )));
        }
        Ok(())
    }

    pub fn for_link(&self, transmitter: usize, receiver: usize) -> f64 {
        if transmitter == receiver {
            self.desired
        } else {
            self.cross
        }
    }
}

/// One block-fading realisation seen by a receiving user: row `ū` holds
/// the gains from BS antenna `ū` to each of the receiver's ports.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDrop {
    receiver: usize,
    gains: Vec<Vec<Complex64>>,
    powers: LinkPowers,
}

impl ChannelDrop {
    pub fn from_rows(
        receiver: usize,
        gains: Vec<Vec<Complex64>>,
        powers: LinkPowers,
    ) -> Result<Self> {
        if receiver >= gains.len() {
            return Err(FamaError::Dimension(format!(
                "receiver {receiver} out of range for {} users",
                gains.len()
            )));
        }
        let k = gains[0].len();
        if gains.iter().any(|row| row.len() != k) {
            return Err(FamaError::Dimension("ragged gain rows".into()));
        }
        Ok(Self {
            receiver,
            gains,
            powers,
        })
    }

    pub fn receiver(&self) -> usize {
        self.receiver
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }

    pub fn num_ports(&self) -> usize {
        self.gains[0].len()
    }

    pub fn powers(&self) -> LinkPowers {
        self.powers
    }

    pub fn row(&self, transmitter: usize) -> &[Complex64] {
        &self.gains[transmitter]
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.gains
    }

    /// Gains of the serving link, `g^{(u,u)}`.
    pub fn desired_gains(&self) -> &[Complex64] {
        &self.gains[self.receiver]
    }
}

/// Samples all `num_users` rows of a drop from one random stream, in
/// transmitter order.
pub fn sample_drop<R: Rng + ?Sized>(
    model: &CorrelationModel,
    num_users: usize,
    receiver: usize,
    powers: LinkPowers,
    rng: &mut R,
) -> Result<ChannelDrop> {
    check_drop_args(num_users, powers)?;
    let gains = (0..num_users)
        .map(|tx| model.sample_row(powers.for_link(tx, receiver), rng))
        .collect();
    ChannelDrop::from_rows(receiver, gains, powers)
}

/// Like [`sample_drop`], but row `ū` is drawn from the stream returned by
/// `stream(ū)`. Used to give every (trial, user) pair its own substream.
pub fn sample_drop_with<R, F>(
    model: &CorrelationModel,
    num_users: usize,
    receiver: usize,
    powers: LinkPowers,
    mut stream: F,
) -> Result<ChannelDrop>
where
    R: Rng,
    F: FnMut(usize) -> R,
{
    check_drop_args(num_users, powers)?;
    let gains = (0..num_users)
        .map(|tx| model.sample_row(powers.for_link(tx, receiver), &mut stream(tx)))
        .collect();
    ChannelDrop::from_rows(receiver, gains, powers)
}

fn check_drop_args(num_users: usize, powers: LinkPowers) -> Result<()> {
    if num_users == 0 {
        return Err(FamaError::InvalidParameter("need at least one user".into()));
    }
    powers.validate()
}
