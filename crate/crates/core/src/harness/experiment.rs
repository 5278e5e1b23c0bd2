use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_correlation, sample_drop_with, CorrelationModel, FasGeometry, LinkPowers};
use crate::error::{FamaError, Result};
use crate::harness::results::{wilson_interval, CsvSink};
use crate::phy::{db_to_linear, SymbolBlock};
use crate::port_select::{ExactLimits, SelectionConfig, SpacingMode};
use crate::schemes::{run_symbol, ReceiverScheme};
use crate::stream::{substream, MAX_USERS, SYMBOL_LANE};

/// The tagged receiving user. All users are statistically identical.
pub const TAGGED_USER: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeKind {
    Turbo,
    AllPort,
    FastFama,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Turbo => "turbo",
            SchemeKind::AllPort => "allport",
            SchemeKind::FastFama => "fastfama",
        }
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "turbo" => Ok(SchemeKind::Turbo),
            "allport" => Ok(SchemeKind::AllPort),
            "fastfama" => Ok(SchemeKind::FastFama),
            other => Err(FamaError::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

/// One SER measurement point.
///
/// Noise power is pinned by the SNR at unit symbol power,
/// `σ_η² = Ω_{u,u} / Γ`; `symbol_power` only scales the constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub users: usize,
    pub ports: usize,
    pub aperture: f64,
    pub k_sel: usize,
    pub gamma_th: f64,
    pub spacing: SpacingMode,
    pub exact_limits: ExactLimits,
    pub snr_db: f64,
    /// Drops in the first batch; later batches have the same size.
    pub num_trials: u64,
    /// Upper bound on drops after auto-extension. `None` means ten batches.
    pub max_trials: Option<u64>,
    /// Keep adding batches until this many symbol errors are seen.
    pub min_errors: u64,
    pub symbols_per_drop: usize,
    pub symbol_power: f64,
    pub powers: LinkPowers,
    pub seed: u64,
    /// Channel bandwidth ratio; metadata for the learned codec only.
    pub cbr: f64,
    /// Source blocklength before the codec; metadata only.
    pub block_len: usize,
    /// Worker threads; `None` uses all available cores.
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Turbo,
            users: 50,
            ports: 200,
            aperture: 20.0,
            k_sel: 20,
            gamma_th: 0.6,
            spacing: SpacingMode::Sdm,
            exact_limits: ExactLimits::default(),
            snr_db: 10.0,
            num_trials: 10_000,
            max_trials: None,
            min_errors: 100,
            symbols_per_drop: 16,
            symbol_power: 1.0,
            powers: LinkPowers::default(),
            seed: 1,
            cbr: 1.0,
            block_len: 1024,
            workers: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FamaError::InvalidParameter(msg));
        if self.users == 0 || self.users > MAX_USERS {
            return bad(format!("users must be in 1..={MAX_USERS}, got {}", self.users));
        }
        if self.num_trials == 0 {
            return bad("num_trials must be at least 1".into());
        }
        if self.symbols_per_drop == 0 {
            return bad("symbols_per_drop must be at least 1".into());
        }
        if !self.snr_db.is_finite() {
            return bad(format!("snr_db must be finite, got {}", self.snr_db));
        }
        if !(self.symbol_power >= 0.0 && self.symbol_power.is_finite()) {
            return bad(format!("symbol power must be nonnegative, got {}", self.symbol_power));
        }
        if !(self.cbr > 0.0) || self.block_len == 0 {
            return bad("cbr and block_len must be positive".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        self.powers.validate()?;
        let geometry = self.geometry()?;
        if self.scheme == SchemeKind::Turbo {
            self.selection().validate_for(&geometry)?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<FasGeometry> {
        FasGeometry::new(self.ports, self.aperture)
    }

    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig {
            k_sel: self.k_sel,
            gamma_th: self.gamma_th,
            spacing: self.spacing,
            exact: self.exact_limits,
        }
    }

    pub fn receiver(&self) -> ReceiverScheme {
        match self.scheme {
            SchemeKind::Turbo => ReceiverScheme::TurboFrontEnd(self.selection()),
            SchemeKind::AllPort => ReceiverScheme::AllPortMrc,
            SchemeKind::FastFama => ReceiverScheme::FastFamaOracle,
        }
    }

    pub fn noise_power(&self) -> f64 {
        self.powers.desired / db_to_linear(self.snr_db)
    }

    /// Channel uses per codec block, `round(cbr · block_len)`.
    pub fn block_n(&self) -> usize {
        (self.cbr * self.block_len as f64).round().max(1.0) as usize
    }

    /// Number of ports the scheme combines.
    pub fn ports_used(&self) -> usize {
        match self.scheme {
            SchemeKind::Turbo => self.k_sel,
            SchemeKind::AllPort => self.ports,
            SchemeKind::FastFama => 1,
        }
    }

    fn trial_cap(&self) -> u64 {
        self.max_trials
            .unwrap_or(self.num_trials.saturating_mul(10))
            .max(self.num_trials)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerRecord {
    pub config: ExperimentConfig,
    pub trials: u64,
    pub symbol_errors: u64,
    pub symbols_total: u64,
    pub ser: f64,
    /// Wilson 95% interval on `ser`.
    pub ci: (f64, f64),
    pub wall_time_s: f64,
}

impl SerRecord {
    /// Binomial standard error of `ser`.
    pub fn std_error(&self) -> f64 {
        (self.ser * (1.0 - self.ser) / self.symbols_total as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub errors: u64,
    pub symbols: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, rhs: Tally) -> Tally {
        Tally {
            errors: self.errors + rhs.errors,
            symbols: self.symbols + rhs.symbols,
        }
    }
}

/// Shared, read-only state for running trials of one configuration.
pub struct TrialRunner<'a> {
    config: &'a ExperimentConfig,
    model: &'a CorrelationModel,
    scheme: ReceiverScheme,
    noise_power: f64,
}

impl<'a> TrialRunner<'a> {
    pub fn new(config: &'a ExperimentConfig, model: &'a CorrelationModel) -> Self {
        Self {
            config,
            model,
            scheme: config.receiver(),
            noise_power: config.noise_power(),
        }
    }

    /// Symbol errors of drop `trial`. Channel row `ū` comes from lane `ū`,
    /// symbols and noise from the symbol lane, all keyed by `trial`.
    pub fn run_trial(&self, trial: u64) -> Result<Tally> {
        let cfg = self.config;
        let drop = sample_drop_with(self.model, cfg.users, TAGGED_USER, cfg.powers, |tx| {
            substream(cfg.seed, trial, tx as u32)
        })?;
        let geometry = self.model.geometry();
        let mut rng = substream(cfg.seed, trial, SYMBOL_LANE);
        let mut errors = 0;
        for _ in 0..cfg.symbols_per_drop {
            let block = SymbolBlock::random(cfg.users, cfg.symbol_power, &mut rng);
            let out = run_symbol(&self.scheme, &drop, &block, self.noise_power, &geometry, &mut rng)?;
            errors += u64::from(out.detected != block.dibits[TAGGED_USER]);
        }
        Ok(Tally {
            errors,
            symbols: cfg.symbols_per_drop as u64,
        })
    }

    /// Trials `range` in parallel, merged by integer summation.
    pub fn run_range(&self, range: std::ops::Range<u64>) -> Result<Tally> {
        range
            .into_par_iter()
            .map(|t| self.run_trial(t))
            .try_reduce(Tally::default, |a, b| Ok(a + b))
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| FamaError::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs one configuration with an already built correlation model.
pub fn run_with_model(config: &ExperimentConfig, model: &CorrelationModel) -> Result<SerRecord> {
    config.validate()?;
    let start = Instant::now();
    let runner = TrialRunner::new(config, model);
    let cap = config.trial_cap();
    let (trials, tally) = with_pool(config.workers, || -> Result<(u64, Tally)> {
        let mut done = 0;
        let mut tally = Tally::default();
        while done < cap && (done == 0 || tally.errors < config.min_errors) {
            let end = (done + config.num_trials).min(cap);
            tally = tally + runner.run_range(done..end)?;
            done = end;
        }
        Ok((done, tally))
    })??;
    let ser = tally.errors as f64 / tally.symbols as f64;
    Ok(SerRecord {
        config: config.clone(),
        trials,
        symbol_errors: tally.errors,
        symbols_total: tally.symbols,
        ser,
        ci: wilson_interval(tally.errors, tally.symbols),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs one configuration; writes the record to `config.output` if set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SerRecord> {
    config.validate()?;
    let model = build_correlation(config.geometry()?)?;
    let record = run_with_model(config, &model)?;
    if let Some(path) = &config.output {
        let mut sink = CsvSink::create(path)?;
        sink.write(&record)?;
    }
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Users,
    Ports,
    Aperture,
    SpacingD,
    Cbr,
    Blocklength,
}

impl std::str::FromStr for SweepAxis {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "users" => Ok(SweepAxis::Users),
            "ports" => Ok(SweepAxis::Ports),
            "aperture" => Ok(SweepAxis::Aperture),
            "spacing" | "d" => Ok(SweepAxis::SpacingD),
            "cbr" => Ok(SweepAxis::Cbr),
            "blocklength" => Ok(SweepAxis::Blocklength),
            other => Err(FamaError::InvalidParameter(format!("unknown axis {other:?}"))),
        }
    }
}

impl SweepAxis {
    /// `base` with this axis set to `value`.
    pub fn apply(&self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(FamaError::InvalidParameter(format!(
                    "{self:?} needs a positive integer, got {v}"
                )))
            }
        };
        let mut cfg = base.clone();
        match self {
            SweepAxis::Users => cfg.users = count(value)?,
            SweepAxis::Ports => cfg.ports = count(value)?,
            SweepAxis::Aperture => cfg.aperture = value,
            SweepAxis::SpacingD => cfg.spacing = SpacingMode::Fixed(value),
            SweepAxis::Cbr => cfg.cbr = value,
            SweepAxis::Blocklength => cfg.block_len = count(value)?,
        }
        cfg.output = None;
        Ok(cfg)
    }
}

/// One record per value, in order. Records are appended to
/// `base.output` as they complete. Every point reuses `base.seed`.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SerRecord>> {
    if values.is_empty() {
        return Err(FamaError::InvalidParameter("sweep needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| axis.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    for cfg in &configs {
        cfg.validate()?;
    }
    let mut sink = base.output.as_ref().map(CsvSink::create).transpose()?;
    let mut model: Option<CorrelationModel> = None;
    let mut records = Vec::with_capacity(configs.len());
    for cfg in configs {
        let geometry = cfg.geometry()?;
        if model.as_ref().is_none_or(|m| m.geometry() != geometry) {
            model = Some(build_correlation(geometry)?);
        }
        let record = run_with_model(&cfg, model.as_ref().unwrap())?;
        if let Some(sink) = sink.as_mut() {
            sink.write(&record)?;
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scheme: SchemeKind) -> ExperimentConfig {
        ExperimentConfig {
            scheme,
            users: 3,
            ports: 16,
            aperture: 2.0,
            k_sel: 4,
            num_trials: 20,
            max_trials: Some(20),
            symbols_per_drop: 4,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn tally_is_consistent() {
        let rec = run_experiment(&small(SchemeKind::Turbo)).unwrap();
        assert_eq!(rec.trials, 20);
        assert_eq!(rec.symbols_total, 80);
        assert_eq!(rec.ser, rec.symbol_errors as f64 / 80.0);
        assert!(rec.ci.0 <= rec.ser && rec.ser <= rec.ci.1);
    }

    #[test]
    fn per_trial_errors_add_up() {
        let cfg = small(SchemeKind::AllPort);
        let model = build_correlation(cfg.geometry().unwrap()).unwrap();
        let runner = TrialRunner::new(&cfg, &model);
        let split: u64 = (0..20).map(|t| runner.run_trial(t).unwrap().errors).sum();
        assert_eq!(split, runner.run_range(0..20).unwrap().errors);
        assert_eq!(split, run_with_model(&cfg, &model).unwrap().symbol_errors);
    }

    #[test]
    fn auto_extension_stops_at_cap() {
        let mut cfg = small(SchemeKind::FastFama);
        cfg.users = 1;
        cfg.snr_db = 40.0;
        cfg.num_trials = 5;
        cfg.max_trials = Some(15);
        let rec = run_experiment(&cfg).unwrap();
        assert_eq!(rec.trials, 15);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = small(SchemeKind::Turbo);
        cfg.num_trials = 0;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = small(SchemeKind::Turbo);
        cfg.k_sel = 17;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = small(SchemeKind::Turbo);
        cfg.snr_db = f64::NAN;
        assert!(run_experiment(&cfg).is_err());
        assert!(run_sweep(&small(SchemeKind::Turbo), SweepAxis::Users, &[]).is_err());
        assert!(SweepAxis::Users.apply(&cfg, 2.5).is_err());
    }

    #[test]
    fn sweep_axis_parsing_and_application() {
        let base = small(SchemeKind::Turbo);
        assert_eq!("users".parse::<SweepAxis>().unwrap(), SweepAxis::Users);
        assert!("volume".parse::<SweepAxis>().is_err());
        let c = SweepAxis::SpacingD.apply(&base, 0.05).unwrap();
        assert_eq!(c.spacing, SpacingMode::Fixed(0.05));
        let c = SweepAxis::Cbr.apply(&base, 0.5).unwrap();
        assert_eq!(c.block_n(), 512);
        assert_eq!("fastfama".parse::<SchemeKind>().unwrap(), SchemeKind::FastFama);
    }

    #[test]
    fn single_value_sweep() {
        let recs = run_sweep(&small(SchemeKind::Turbo), SweepAxis::Users, &[1.0]).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].config.users, 1);
    }
}
