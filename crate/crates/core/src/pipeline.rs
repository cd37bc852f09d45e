//! End-to-end period estimation.
//!
//! The normalized curve and its densest half-length window are each swept
//! over a grid of kernel sizes. Every sweep yields a CSD whose strongest
//! peaks seed a fine-tuning search that maximises Q on the normalized
//! curve. The candidate with the highest Q wins.

use std::collections::btree_map::{BTreeMap, Entry};
use std::io::Write;
use std::time::{Duration, Instant};

use crate::baselines::{self, FrequencyGrid, PeriodGrid, Statistic};
use crate::error::{Error, Result};
use crate::ip::{
    BinningMode, CandidateOrigin, LatticeTuner, PeriodCandidate, QEvaluator, WindowTag,
};
use crate::kernel::KernelConfig;
use crate::lightcurve::{normalize, select_dense_window, LightCurve};
use crate::slotted::SlotPairs;
use crate::spectral::{csd, extract_peaks};

pub const MIN_SAMPLES: usize = 50;

/// `n` kernel sizes spaced logarithmically over `[lo, hi]`.
pub fn log_sigma_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Kernel size used when scoring seeds with Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TuningSigma {
    /// Every seed is tuned with the kernel size whose CSD produced it.
    Producing,
    /// All seeds share one kernel size.
    Fixed(f64),
}

impl std::fmt::Display for TuningSigma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TuningSigma::Producing => write!(f, "producing"),
            TuningSigma::Fixed(s) => write!(f, "{s}"),
        }
    }
}

impl std::str::FromStr for TuningSigma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "producing" {
            return Ok(TuningSigma::Producing);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(TuningSigma::Fixed)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "tuning sigma must be \"producing\" or a positive number, got {s:?}"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Ascending kernel sizes.
    pub sigma_grid: Vec<f64>,
    pub slot_size: f64,
    /// Largest lag as a fraction of the curve's time span.
    pub max_lag_fraction: f64,
    pub n_peaks: usize,
    pub period_min: f64,
    pub period_max: f64,
    pub oversample: usize,
    pub binning: BinningMode,
    pub tuning_sigma: TuningSigma,
    /// Kernel size for the Q re-ranking of non-correntropy candidates.
    pub ip_sigma: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sigma_grid: log_sigma_grid(0.01, 5.0, 25),
            slot_size: 0.25,
            max_lag_fraction: 0.1,
            n_peaks: 10,
            period_min: 0.2,
            period_max: 200.0,
            oversample: 8,
            binning: BinningMode::default(),
            tuning_sigma: TuningSigma::Fixed(0.5),
            ip_sigma: 0.5,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_grid.is_empty() {
            return Err(Error::InvalidParameter("sigma grid is empty".into()));
        }
        for &s in &self.sigma_grid {
            positive("kernel size", s)?;
        }
        if self.sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("sigma grid must be strictly ascending".into()));
        }
        positive("slot size", self.slot_size)?;
        positive("max lag fraction", self.max_lag_fraction)?;
        positive("period min", self.period_min)?;
        positive("period max", self.period_max)?;
        positive("ip sigma", self.ip_sigma)?;
        if let TuningSigma::Fixed(s) = self.tuning_sigma {
            positive("tuning sigma", s)?;
        }
        if self.period_min >= self.period_max {
            return Err(Error::InvalidParameter(format!(
                "period band [{}, {}] is empty",
                self.period_min, self.period_max
            )));
        }
        if self.n_peaks == 0 {
            return Err(Error::InvalidParameter("n_peaks must be at least 1".into()));
        }
        if self.oversample == 0 {
            return Err(Error::InvalidParameter("oversample must be at least 1".into()));
        }
        self.binning.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    CorrentropyIp,
    CorrelationIp,
    LombScargle,
    LombScargleIp,
    Aov,
    Sllk,
    SllkIp,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::CorrentropyIp,
        Method::CorrelationIp,
        Method::LombScargle,
        Method::LombScargleIp,
        Method::Aov,
        Method::Sllk,
        Method::SllkIp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::CorrentropyIp => "correntropy+ip",
            Method::CorrelationIp => "correlation+ip",
            Method::LombScargle => "ls",
            Method::LombScargleIp => "ls+ip",
            Method::Aov => "aov",
            Method::Sllk => "sllk",
            Method::SllkIp => "sllk+ip",
        }
    }

    pub fn names() -> String {
        Method::ALL.iter().map(Method::as_str).collect::<Vec<_>>().join(", ")
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("unknown method {s:?} (valid: {})", Method::names()))
            })
    }
}

/// One seed and what fine-tuning made of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRecord {
    pub window: WindowTag,
    pub sigma: Option<f64>,
    pub rank: usize,
    pub origin: CandidateOrigin,
    pub seed_period: f64,
    /// Spectral power, or the baseline statistic, at the seed.
    pub strength: f64,
    pub tuned_period: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timing {
    pub preprocessing: Duration,
    pub seeding: Duration,
    pub tuning: Duration,
}

impl Timing {
    pub fn total(&self) -> Duration {
        self.preprocessing + self.seeding + self.tuning
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub curve_id: String,
    pub method: Method,
    pub best: PeriodCandidate,
    /// Deduplicated, best score first.
    pub candidates: Vec<PeriodCandidate>,
    /// Every seed in window, sigma, rank order.
    pub provenance: Vec<SeedRecord>,
    pub n_samples: usize,
    pub n_rejected: usize,
    pub time_span: f64,
    /// Distinct trial periods at which Q was computed.
    pub q_evaluations: usize,
    pub timing: Timing,
}

/// Relative tolerance under which two candidates count as the same period.
pub const DEDUP_TOLERANCE: f64 = 1e-3;

/// Keeps the highest-scoring candidate of every cluster of periods within
/// `DEDUP_TOLERANCE` of each other. Output is sorted best first; ties keep
/// input order.
pub fn dedup_candidates(candidates: &[PeriodCandidate]) -> Vec<PeriodCandidate> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].score.total_cmp(&candidates[a].score).then(a.cmp(&b)));
    let mut kept: Vec<PeriodCandidate> = Vec::new();
    for i in order {
        let c = candidates[i];
        if !kept
            .iter()
            .any(|k| (k.period - c.period).abs() <= DEDUP_TOLERANCE * k.period.max(c.period))
        {
            kept.push(c);
        }
    }
    kept
}

fn check_input(curve: &LightCurve) -> Result<()> {
    if curve.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, at least {MIN_SAMPLES} required",
            curve.len()
        )));
    }
    Ok(())
}

struct Prepared {
    normalized: LightCurve,
    windows: Vec<(WindowTag, LightCurve)>,
    n_rejected: usize,
}

fn prepare(curve: &LightCurve) -> Result<Prepared> {
    check_input(curve)?;
    let normalized = normalize(curve)?;
    let dense = select_dense_window(&normalized);
    Ok(Prepared {
        n_rejected: curve.len() - normalized.len(),
        windows: vec![(WindowTag::Full, normalized.clone()), (WindowTag::DenseHalf, dense)],
        normalized,
    })
}

/// Seeds from the CSD (or the PSD, for `correlation`) of every window and
/// kernel size, in window, sigma, rank order. A window too sparse to fill
/// any lag slot contributes nothing.
fn spectral_seeds(prepared: &Prepared, config: &PipelineConfig, correlation: bool) -> Result<Vec<SeedRecord>> {
    let mut seeds = Vec::new();
    for (tag, window) in &prepared.windows {
        let max_lag = config.max_lag_fraction * window.time_span();
        let pairs = match SlotPairs::new(window.times(), config.slot_size, max_lag) {
            Ok(p) => p,
            Err(Error::InsufficientPairs) => continue,
            Err(e) => return Err(e),
        };
        let sigmas: Vec<Option<f64>> = if correlation {
            vec![None]
        } else {
            config.sigma_grid.iter().map(|&s| Some(s)).collect()
        };
        for sigma in sigmas {
            let series = match sigma {
                Some(s) => pairs.correntropy(window.magnitudes(), &KernelConfig::new(s)?),
                None => pairs.correlation(window.magnitudes()),
            };
            let series = match series {
                Ok(s) => s,
                Err(Error::InsufficientPairs) => continue,
                Err(e) => return Err(e),
            };
            let spectrum = csd(&series, config.oversample)?;
            let peaks = extract_peaks(&spectrum, config.n_peaks, config.period_min, config.period_max);
            for (rank, pk) in peaks.entries.iter().enumerate() {
                seeds.push(SeedRecord {
                    window: *tag,
                    sigma,
                    rank,
                    origin: if correlation {
                        CandidateOrigin::PsdPeak
                    } else {
                        CandidateOrigin::CsdPeak
                    },
                    seed_period: pk.period,
                    strength: pk.power,
                    tuned_period: f64::NAN,
                    score: f64::NAN,
                });
            }
        }
    }
    Ok(seeds)
}

/// Fine-tunes every seed on `curve`; returns the number of Q evaluations.
fn tune_seeds(
    curve: &LightCurve,
    seeds: &mut [SeedRecord],
    tuning: impl Fn(&SeedRecord) -> f64,
    binning: BinningMode,
) -> Result<usize> {
    let mut tuners: BTreeMap<u64, LatticeTuner> = BTreeMap::new();
    for seed in seeds.iter_mut() {
        let sigma = tuning(seed);
        let tuner = match tuners.entry(sigma.to_bits()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(LatticeTuner::new(QEvaluator::new(
                curve,
                KernelConfig::new(sigma)?,
                binning,
            ))),
        };
        let tuned = tuner.tune(&PeriodCandidate::seed(seed.seed_period))?;
        seed.tuned_period = tuned.period;
        seed.score = tuned.score;
    }
    Ok(tuners.values().map(LatticeTuner::evaluations).sum())
}

fn candidate_of(seed: &SeedRecord, tuning_sigma: Option<f64>) -> PeriodCandidate {
    PeriodCandidate {
        period: seed.tuned_period,
        score: seed.score,
        origin: seed.origin,
        kernel_sigma: tuning_sigma.or(seed.sigma),
        window: seed.window,
        rank: Some(seed.rank),
    }
}

fn finish(
    curve: &LightCurve,
    prepared: &Prepared,
    method: Method,
    mut candidates: Vec<PeriodCandidate>,
    provenance: Vec<SeedRecord>,
    q_evaluations: usize,
    timing: Timing,
) -> Result<EstimationReport> {
    candidates.retain(|c| c.score.is_finite());
    let candidates = dedup_candidates(&candidates);
    let best = *candidates.first().ok_or(Error::NoCandidates)?;
    Ok(EstimationReport {
        curve_id: curve.id().to_string(),
        method,
        best,
        candidates,
        provenance,
        n_samples: curve.len(),
        n_rejected: prepared.n_rejected,
        time_span: prepared.normalized.time_span(),
        q_evaluations,
        timing,
    })
}

/// Correntropy-spectrum seeds, fine-tuned with Q.
pub fn estimate_period(curve: &LightCurve, config: &PipelineConfig) -> Result<EstimationReport> {
    estimate_with_method(curve, Method::CorrentropyIp, config)
}

pub fn estimate_with_method(curve: &LightCurve, method: Method, config: &PipelineConfig) -> Result<EstimationReport> {
    config.validate()?;
    let start = Instant::now();
    let prepared = prepare(curve)?;
    let mut timing = Timing {
        preprocessing: start.elapsed(),
        ..Timing::default()
    };

    match method {
        Method::CorrentropyIp | Method::CorrelationIp => {
            let t = Instant::now();
            let correlation = method == Method::CorrelationIp;
            let mut seeds = spectral_seeds(&prepared, config, correlation)?;
            timing.seeding = t.elapsed();
            let t = Instant::now();
            let fixed = match (correlation, config.tuning_sigma) {
                (true, _) => Some(config.ip_sigma),
                (false, TuningSigma::Fixed(s)) => Some(s),
                (false, TuningSigma::Producing) => None,
            };
            let evaluations = tune_seeds(
                &prepared.normalized,
                &mut seeds,
                |s| fixed.or(s.sigma).unwrap_or(config.ip_sigma),
                config.binning,
            )?;
            timing.tuning = t.elapsed();
            let candidates = seeds.iter().map(|s| candidate_of(s, fixed)).collect();
            finish(curve, &prepared, method, candidates, seeds, evaluations, timing)
        }
        Method::LombScargle | Method::Aov | Method::Sllk => {
            let t = Instant::now();
            let seeds = baseline_seeds(&prepared.normalized, method, config, 1)?;
            timing.seeding = t.elapsed();
            let candidates = seeds
                .iter()
                .map(|s| PeriodCandidate {
                    period: s.seed_period,
                    score: s.strength,
                    origin: s.origin,
                    kernel_sigma: None,
                    window: WindowTag::Full,
                    rank: Some(s.rank),
                })
                .collect();
            let seeds = seeds
                .into_iter()
                .map(|s| SeedRecord {
                    tuned_period: s.seed_period,
                    score: s.strength,
                    ..s
                })
                .collect();
            finish(curve, &prepared, method, candidates, seeds, 0, timing)
        }
        Method::LombScargleIp | Method::SllkIp => {
            let t = Instant::now();
            let plain = if method == Method::LombScargleIp {
                Method::LombScargle
            } else {
                Method::Sllk
            };
            let mut seeds = baseline_seeds(&prepared.normalized, plain, config, 10)?;
            timing.seeding = t.elapsed();
            let t = Instant::now();
            let evaluations = tune_seeds(&prepared.normalized, &mut seeds, |_| config.ip_sigma, config.binning)?;
            timing.tuning = t.elapsed();
            let candidates = seeds.iter().map(|s| candidate_of(s, Some(config.ip_sigma))).collect();
            finish(curve, &prepared, method, candidates, seeds, evaluations, timing)
        }
    }
}

/// The `n` best extrema of a baseline statistic over the configured band.
fn baseline_seeds(curve: &LightCurve, method: Method, config: &PipelineConfig, n: usize) -> Result<Vec<SeedRecord>> {
    let span = curve.time_span();
    let (origin, extrema) = match method {
        Method::LombScargle => {
            let grid = FrequencyGrid::for_band(config.period_min, config.period_max, span)?;
            (CandidateOrigin::LsPeak, baselines::lomb_scargle_peaks(curve, &grid, n)?)
        }
        Method::Aov => {
            let grid = PeriodGrid::for_band(config.period_min, config.period_max)?;
            let stat = Statistic::Aov(BinningMode::Fixed(baselines::AOV_DEFAULT_BINS));
            (CandidateOrigin::AovExtremum, baselines::scan_extremum(curve, &grid, stat, n)?)
        }
        Method::Sllk => {
            let grid = PeriodGrid::for_band(config.period_min, config.period_max)?;
            (
                CandidateOrigin::SllkString,
                baselines::scan_extremum(curve, &grid, Statistic::StringLength, n)?,
            )
        }
        _ => unreachable!("not a baseline method"),
    };
    Ok(extrema
        .into_iter()
        .enumerate()
        .map(|(rank, e)| SeedRecord {
            window: WindowTag::Full,
            sigma: None,
            rank,
            origin,
            seed_period: e.period,
            strength: e.value,
            tuned_period: f64::NAN,
            score: f64::NAN,
        })
        .collect())
}

/// Period text with at least 9 significant digits; values that need more
/// keep their shortest exact representation.
pub fn format_period(p: f64) -> String {
    let exact = p.to_string();
    if !p.is_finite() || p == 0.0 {
        return exact;
    }
    let decimals = (8 - p.abs().log10().floor() as i64).max(0) as usize;
    let exact_decimals = exact.split_once('.').map_or(0, |(_, d)| d.len());
    if exact.contains('e') || exact_decimals >= decimals {
        exact
    } else {
        format!("{p:.decimals$}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn opt_rank(v: Option<usize>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

impl EstimationReport {
    /// Key-value header followed by candidate and provenance tables.
    /// Timing is left out so reports of identical runs are identical.
    pub fn write_text<W: Write>(&self, config: &PipelineConfig, mut out: W) -> std::io::Result<()> {
        writeln!(out, "curve: {}", self.curve_id)?;
        writeln!(out, "method: {}", self.method)?;
        writeln!(out, "best_period: {}", format_period(self.best.period))?;
        writeln!(out, "best_score: {}", self.best.score)?;
        writeln!(out, "best_origin: {}", self.best.origin.as_str())?;
        writeln!(out, "best_window: {}", self.best.window.as_str())?;
        writeln!(out, "best_sigma: {}", opt(self.best.kernel_sigma))?;
        writeln!(out, "n_samples: {}", self.n_samples)?;
        writeln!(out, "n_rejected: {}", self.n_rejected)?;
        writeln!(out, "time_span: {}", self.time_span)?;
        writeln!(out, "q_evaluations: {}", self.q_evaluations)?;
        write_config(config, &mut out)?;
        writeln!(out, "[candidates]")?;
        writeln!(out, "period\tscore\torigin\twindow\tsigma\trank")?;
        for c in &self.candidates {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                format_period(c.period),
                c.score,
                c.origin.as_str(),
                c.window.as_str(),
                opt(c.kernel_sigma),
                opt_rank(c.rank)
            )?;
        }
        writeln!(out, "[provenance]")?;
        writeln!(out, "window\tsigma\trank\torigin\tseed_period\tstrength\ttuned_period\tscore")?;
        for s in &self.provenance {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                s.window.as_str(),
                opt(s.sigma),
                s.rank,
                s.origin.as_str(),
                format_period(s.seed_period),
                s.strength,
                format_period(s.tuned_period),
                s.score
            )?;
        }
        Ok(())
    }
}

pub fn write_config<W: Write>(config: &PipelineConfig, mut out: W) -> std::io::Result<()> {
    let grid: Vec<String> = config.sigma_grid.iter().map(|s| s.to_string()).collect();
    writeln!(out, "sigma_grid: {}", grid.join(","))?;
    writeln!(out, "slot_size: {}", config.slot_size)?;
    writeln!(out, "max_lag_fraction: {}", config.max_lag_fraction)?;
    writeln!(out, "n_peaks: {}", config.n_peaks)?;
    writeln!(out, "period_min: {}", config.period_min)?;
    writeln!(out, "period_max: {}", config.period_max)?;
    writeln!(out, "oversample: {}", config.oversample)?;
    writeln!(out, "binning: {}", config.binning)?;
    writeln!(out, "tuning_sigma: {}", config.tuning_sigma)?;
    writeln!(out, "ip_sigma: {}", config.ip_sigma)
}
