//! Heuristic port shortlisting.
//!
//! For one symbol, every port's received power is compared with the power
//! the known desired channel predicts. Ports are ranked by the normalised
//! mismatch, weak-desired-gain ports are filtered out with a threshold
//! relative to the strongest port, and the final set is chosen either to
//! maximise the minimum pairwise separation (SDM) or by walking the ranking
//! under a fixed minimum index gap.
//!
//! Port indices are 0-based throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::FasGeometry;
use crate::chi2::noncentral_chi2_cdf_2dof;
use crate::error::{FamaError, Result};
use crate::phy::PortObservations;

/// How the final shortlist is drawn from the filtered ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpacingMode {
    /// Max-min separation over the filtered candidates.
    Sdm,
    /// Greedy walk with a minimum index gap of `⌈d·K⌉`.
    Fixed(f64),
    /// First `k_sel` filtered ports by deviation.
    None,
}

impl SpacingMode {
    pub fn label(&self) -> &'static str {
        match self {
            SpacingMode::Sdm => "sdm",
            SpacingMode::Fixed(_) => "fixed",
            SpacingMode::None => "none",
        }
    }

    pub fn gap_fraction(&self) -> Option<f64> {
        match self {
            SpacingMode::Fixed(d) => Some(*d),
            _ => None,
        }
    }
}

/// Parses `sdm`, `none` or `fixed:D`.
impl std::str::FromStr for SpacingMode {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdm" => Ok(SpacingMode::Sdm),
            "none" => Ok(SpacingMode::None),
            _ => {
                let d = s
                    .strip_prefix("fixed:")
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(|| {
                        FamaError::InvalidParameter(format!(
                            "spacing must be sdm, none or fixed:D, got {s:?}"
                        ))
                    })?;
                Ok(SpacingMode::Fixed(d))
            }
        }
    }
}

/// Size limits below which the SDM problem is solved by enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_candidates: usize,
    pub max_k_sel: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_candidates: 20,
            max_k_sel: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub k_sel: usize,
    pub gamma_th: f64,
    pub spacing: SpacingMode,
    pub exact: ExactLimits,
}

impl SelectionConfig {
    pub fn new(k_sel: usize, gamma_th: f64, spacing: SpacingMode) -> Result<Self> {
        let cfg = Self {
            k_sel,
            gamma_th,
            spacing,
            exact: ExactLimits::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_sel == 0 {
            return Err(FamaError::InvalidParameter("k_sel must be at least 1".into()));
        }
        if !(self.gamma_th > 0.0 && self.gamma_th < 1.0) {
            return Err(FamaError::InvalidParameter(format!(
                "gamma_th must lie in (0, 1), got {}",
                self.gamma_th
            )));
        }
        if let SpacingMode::Fixed(d) = self.spacing {
            if !(d > 0.0 && d < 1.0) {
                return Err(FamaError::InvalidParameter(format!(
                    "spacing fraction must lie in (0, 1), got {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn validate_for(&self, geometry: &FasGeometry) -> Result<()> {
        self.validate()?;
        if self.k_sel > geometry.num_ports() {
            return Err(FamaError::InvalidParameter(format!(
                "k_sel {} exceeds port count {}",
                self.k_sel,
                geometry.num_ports()
            )));
        }
        Ok(())
    }
}

/// Selected ports with their deviation values, in deviation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Shortlist {
    pub ports: Vec<usize>,
    pub deviations: Vec<f64>,
}

impl Shortlist {
    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    fn pick(&self, positions: impl IntoIterator<Item = usize>) -> Shortlist {
        let (ports, deviations) = positions
            .into_iter()
            .map(|p| (self.ports[p], self.deviations[p]))
            .unzip();
        Shortlist { ports, deviations }
    }
}

/// `|g_k|²·σ_s²` at every port.
pub fn predicted_desired_power(desired_gains: &[Complex64], symbol_power: f64) -> Vec<f64> {
    desired_gains
        .iter()
        .map(|g| g.norm_sqr() * symbol_power)
        .collect()
}

/// `| |r_k|² − P_k | / P_k`; ports with `P_k = 0` get `+∞`.
pub fn normalized_deviation(
    received: &[Complex64],
    desired_gains: &[Complex64],
    symbol_power: f64,
) -> Result<Vec<f64>> {
    if received.len() != desired_gains.len() {
        return Err(FamaError::Dimension(format!(
            "{} observations for {} gains",
            received.len(),
            desired_gains.len()
        )));
    }
    Ok(received
        .iter()
        .zip(predicted_desired_power(desired_gains, symbol_power))
        .map(|(r, p)| {
            if p > 0.0 {
                (r.norm_sqr() - p).abs() / p
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

/// Port indices sorted by ascending deviation, ties to the lower index.
pub fn rank_by_deviation(deviations: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..deviations.len()).collect();
    order.sort_by(|&a, &b| deviations[a].total_cmp(&deviations[b]));
    order
}

/// Ports whose desired gain is at least `gamma_th` times the strongest one,
/// in ascending index order.
pub fn candidate_set(desired_gains: &[Complex64], gamma_th: f64) -> Result<Vec<usize>> {
    if desired_gains.is_empty() {
        return Err(FamaError::EmptyPorts);
    }
    let power: Vec<f64> = desired_gains.iter().map(|g| g.norm_sqr()).collect();
    let max = power.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = gamma_th * max;
    Ok(power
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= threshold)
        .map(|(k, _)| k)
        .collect())
}

/// Probability that a port's absolute deviation `||r|² − P|` falls below
/// `delta`, when `r ~ CN(m, σ²)` with `|m|² = P` and `σ²` the
/// interference-plus-noise power.
///
/// `2|r|²/σ²` is noncentral χ² with 2 degrees of freedom and
/// noncentrality `2P/σ²`, so the event has probability
/// `F(2(P+Δ)/σ²) − F(2·max(P−Δ, 0)/σ²)`.
pub fn deviation_probability(
    delta: f64,
    desired_power: f64,
    interference_plus_noise_power: f64,
) -> Result<f64> {
    check_deviation_args(delta, desired_power, interference_plus_noise_power)?;
    let s2 = interference_plus_noise_power;
    let nc = 2.0 * desired_power / s2;
    let hi = noncentral_chi2_cdf_2dof(2.0 * (desired_power + delta) / s2, nc);
    let lo = noncentral_chi2_cdf_2dof(2.0 * (desired_power - delta).max(0.0) / s2, nc);
    Ok((hi - lo).clamp(0.0, 1.0))
}

/// The one-sided tail expression `1 − F(Δ/σ²; 2, P/σ²)` that is commonly
/// quoted as a bound for the same event. Decreasing in `Δ`; kept for
/// comparison with [`deviation_probability`].
pub fn deviation_tail_bound(
    delta: f64,
    desired_power: f64,
    interference_plus_noise_power: f64,
) -> Result<f64> {
    check_deviation_args(delta, desired_power, interference_plus_noise_power)?;
    let s2 = interference_plus_noise_power;
    Ok(1.0 - noncentral_chi2_cdf_2dof(delta / s2, desired_power / s2))
}

fn check_deviation_args(delta: f64, desired: f64, noise: f64) -> Result<()> {
    if !(desired > 0.0 && noise > 0.0) {
        return Err(FamaError::InvalidParameter(format!(
            "powers must be positive (desired {desired}, interference+noise {noise})"
        )));
    }
    if !(delta >= 0.0) {
        return Err(FamaError::InvalidParameter(format!(
            "deviation must be nonnegative, got {delta}"
        )));
    }
    Ok(())
}

/// `σ_I² + σ_η²` with `σ_I² = (U − 1)·σ_s²·Ω_cross`.
pub fn interference_plus_noise_power(
    num_users: usize,
    symbol_power: f64,
    cross_power: f64,
    noise_power: f64,
) -> f64 {
    num_users.saturating_sub(1) as f64 * symbol_power * cross_power + noise_power
}

/// Separation score of a set of ports: the smallest index gap, or 0 when
/// the aperture is zero. Normalised separation is this gap times
/// `W/(K−1)`, so both order subsets identically.
fn min_gap(geometry: &FasGeometry, ports: &mut [usize]) -> usize {
    if ports.len() < 2 {
        return usize::MAX;
    }
    if geometry.aperture() == 0.0 {
        return 0;
    }
    ports.sort_unstable();
    ports.windows(2).map(|w| w[1] - w[0]).min().unwrap()
}

/// Chooses `k_sel` ports from the deviation-ranked candidates maximising
/// the minimum pairwise separation.
///
/// Small instances (per `limits`) are solved exactly: among optimal subsets
/// the one with the smallest sum of ranking positions wins, then the
/// lexicographically first. Larger ones use greedy farthest-point insertion
/// seeded with the lowest and highest candidate index, ties going to the
/// better-ranked port. Fewer candidates than `k_sel` returns them all.
/// The result stays in ranking order.
pub fn sdm_select(
    ranked: &Shortlist,
    k_sel: usize,
    geometry: &FasGeometry,
    limits: ExactLimits,
) -> Result<Shortlist> {
    let n = ranked.len();
    if n == 0 {
        return Err(FamaError::EmptyPorts);
    }
    if k_sel == 0 {
        return Err(FamaError::InvalidParameter("k_sel must be at least 1".into()));
    }
    if n <= k_sel {
        return Ok(ranked.clone());
    }
    if k_sel == 1 {
        return Ok(ranked.pick([0]));
    }
    let positions = if n <= limits.max_candidates && k_sel <= limits.max_k_sel {
        sdm_exact(&ranked.ports, k_sel, geometry)
    } else {
        sdm_greedy(&ranked.ports, k_sel)
    };
    Ok(ranked.pick(positions))
}

fn sdm_exact(ports: &[usize], k_sel: usize, geometry: &FasGeometry) -> Vec<usize> {
    let n = ports.len();
    let mut combo: Vec<usize> = (0..k_sel).collect();
    let mut best = combo.clone();
    let mut best_score = (0usize, usize::MAX);
    let mut first = true;
    let mut scratch = vec![0usize; k_sel];
    loop {
        for (s, &p) in scratch.iter_mut().zip(&combo) {
            *s = ports[p];
        }
        let gap = min_gap(geometry, &mut scratch);
        let rank_sum: usize = combo.iter().sum();
        if first || gap > best_score.0 || (gap == best_score.0 && rank_sum < best_score.1) {
            best_score = (gap, rank_sum);
            best.copy_from_slice(&combo);
            first = false;
        }
        // Next combination in lexicographic order.
        let mut i = k_sel;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if combo[i] < n - k_sel + i {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k_sel {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

fn sdm_greedy(ports: &[usize], k_sel: usize) -> Vec<usize> {
    let n = ports.len();
    let lowest = (0..n).min_by_key(|&p| ports[p]).unwrap();
    let highest = (0..n).max_by_key(|&p| ports[p]).unwrap();
    let mut chosen = vec![false; n];
    let mut dist = vec![usize::MAX; n];
    let mut picked = Vec::with_capacity(k_sel);
    let mut next = Some(lowest);
    while let Some(p) = next {
        chosen[p] = true;
        picked.push(p);
        for q in 0..n {
            dist[q] = dist[q].min(ports[q].abs_diff(ports[p]));
        }
        next = if picked.len() == 1 {
            Some(highest)
        } else if picked.len() < k_sel {
            // First maximum in ranking order wins ties.
            (0..n)
                .filter(|&q| !chosen[q])
                .fold(None, |best: Option<usize>, q| match best {
                    Some(b) if dist[b] >= dist[q] => Some(b),
                    _ => Some(q),
                })
        } else {
            None
        };
    }
    picked.sort_unstable();
    picked
}

/// Index gap enforced by [`fixed_spacing_select`], `⌈d·K⌉`, at least 1.
pub fn fixed_spacing_gap(gap_fraction: f64, geometry: &FasGeometry) -> usize {
    // The small offset keeps e.g. 0.07·100 = 7.000000000000001 at 7.
    ((gap_fraction * geometry.num_ports() as f64 - 1e-9).ceil() as usize).max(1)
}

/// Walks the ranking, keeping a port only if its index is at least
/// `⌈d·K⌉` away from every port kept so far. May return fewer than `k_sel`.
pub fn fixed_spacing_select(
    ranked: &Shortlist,
    k_sel: usize,
    gap_fraction: f64,
    geometry: &FasGeometry,
) -> Result<Shortlist> {
    if !(gap_fraction > 0.0 && gap_fraction < 1.0) {
        return Err(FamaError::InvalidParameter(format!(
            "spacing fraction must lie in (0, 1), got {gap_fraction}"
        )));
    }
    let gap = fixed_spacing_gap(gap_fraction, geometry);
    let mut kept: Vec<usize> = Vec::with_capacity(k_sel);
    for (pos, &port) in ranked.ports.iter().enumerate() {
        if kept.len() == k_sel {
            break;
        }
        if kept
            .iter()
            .all(|&p| ranked.ports[p].abs_diff(port) >= gap)
        {
            kept.push(pos);
        }
    }
    Ok(ranked.pick(kept))
}

/// Full shortlisting for one symbol: predicted power, normalised
/// deviation, ascending ranking, threshold filter, then the configured
/// final selection.
pub fn shortlist(
    observations: &PortObservations,
    desired_gains: &[Complex64],
    symbol_power: f64,
    config: &SelectionConfig,
    geometry: &FasGeometry,
) -> Result<Shortlist> {
    let deviations = normalized_deviation(&observations.received, desired_gains, symbol_power)?;
    let order = rank_by_deviation(&deviations);
    let mut keep = vec![false; desired_gains.len()];
    for k in candidate_set(desired_gains, config.gamma_th)? {
        keep[k] = true;
    }
    let (ports, devs) = order
        .into_iter()
        .filter(|&k| keep[k])
        .map(|k| (k, deviations[k]))
        .unzip();
    let ranked = Shortlist {
        ports,
        deviations: devs,
    };
    match config.spacing {
        SpacingMode::Sdm => sdm_select(&ranked, config.k_sel, geometry, config.exact),
        SpacingMode::Fixed(d) => fixed_spacing_select(&ranked, config.k_sel, d, geometry),
        SpacingMode::None => Ok(ranked.pick(0..config.k_sel.min(ranked.len()))),
    }
}
