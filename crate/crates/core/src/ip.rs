//! Information potential and the folded-curve discrimination metric Q.
//!
//! For a trial period the curve is folded, split into phase bins and scored
//! by the mean squared deviation of each bin's information potential from
//! the information potential of the whole curve. Bins come either from a
//! fixed equal-width grid or from the local optima of a smoothed fold
//! (dynamic binning).

use std::io::Write;

use crate::error::{Error, Result};
use crate::fastmath::gaussian_row_sum;
use crate::kernel::KernelConfig;
use crate::lightcurve::{check_period, fold_order, FoldedCurve, LightCurve};

/// Pairs further apart than this many kernel sizes contribute less than
/// `exp(-72)` of the kernel peak and are skipped.
const KERNEL_CUTOFF: f64 = 12.0;

/// `1/n^2 * sum_i sum_j G(x_i - x_j)` over all ordered pairs, diagonal
/// included.
pub fn information_potential(values: &[f64], config: &KernelConfig) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("information potential of an empty set".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ip_of_sorted(&sorted, config))
}

/// Information potential of values already sorted ascending.
pub(crate) fn ip_of_sorted(sorted: &[f64], config: &KernelConfig) -> f64 {
    let n = sorted.len();
    let cutoff = KERNEL_CUTOFF * config.sigma();
    let scale = config.exponent_scale();
    let mut off_diagonal = 0.0;
    let mut end = 0;
    for i in 0..n {
        let xi = sorted[i];
        while end < n && sorted[end] - xi <= cutoff {
            end += 1;
        }
        if end > i + 1 {
            off_diagonal += gaussian_row_sum(xi, &sorted[i + 1..end], scale);
        }
    }
    config.peak() * (n as f64 + 2.0 * off_diagonal) / (n as f64 * n as f64)
}

/// Circular centred moving average of width `span` over the phase-sorted
/// magnitudes. Spans wider than the fold are clamped to its length.
pub fn smooth_folded(fold: &FoldedCurve, span: usize) -> Vec<f64> {
    let mut out = Vec::new();
    smooth_circular(&fold.magnitudes, span, &mut out);
    out
}

fn smooth_circular(values: &[f64], span: usize, out: &mut Vec<f64>) {
    let n = values.len();
    out.clear();
    if n == 0 {
        return;
    }
    let span = span.clamp(1, n);
    if span == 1 {
        out.extend_from_slice(values);
        return;
    }
    let back = (span - 1) / 2;
    // window for sample i covers i - back ..= i - back + span - 1 (mod n)
    let mut sum: f64 = (0..span).map(|o| values[(o + n - back % n) % n]).sum();
    let scale = 1.0 / span as f64;
    for i in 0..n {
        out.push(sum * scale);
        let leaving = (i + n - back % n) % n;
        let entering = (i + span - back % n + n) % n;
        sum += values[entering] - values[leaving];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicBinningConfig {
    /// Moving-average width in samples.
    pub smoothing_span: usize,
    /// Extrema search window `M` in samples; `None` means `round(N / 10)`,
    /// at least 4.
    pub extrema_window: Option<usize>,
}

impl Default for DynamicBinningConfig {
    fn default() -> Self {
        DynamicBinningConfig {
            smoothing_span: 20,
            extrema_window: None,
        }
    }
}

impl DynamicBinningConfig {
    pub fn window_for(&self, n: usize) -> usize {
        self.extrema_window
            .unwrap_or_else(|| ((n as f64 / 10.0).round() as usize).max(4))
            .max(2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.smoothing_span < 1 {
            return Err(Error::InvalidParameter("smoothing span must be at least 1".into()));
        }
        if matches!(self.extrema_window, Some(m) if m < 2) {
            return Err(Error::InvalidParameter("extrema window must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinningMode {
    Dynamic(DynamicBinningConfig),
    Fixed(usize),
}

impl Default for BinningMode {
    fn default() -> Self {
        BinningMode::Dynamic(DynamicBinningConfig::default())
    }
}

impl BinningMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            BinningMode::Dynamic(cfg) => cfg.validate(),
            BinningMode::Fixed(0) => Err(Error::InvalidParameter("fixed binning needs at least one bin".into())),
            BinningMode::Fixed(_) => Ok(()),
        }
    }
}

impl std::fmt::Display for BinningMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BinningMode::Dynamic(_) => write!(f, "dynamic"),
            BinningMode::Fixed(h) => write!(f, "fixed:{h}"),
        }
    }
}

impl std::str::FromStr for BinningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mode = match s {
            "dynamic" => BinningMode::default(),
            _ => {
                let h = s
                    .strip_prefix("fixed:")
                    .and_then(|h| h.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!("binning must be `dynamic` or `fixed:H`, got {s:?}"))
                    })?;
                BinningMode::Fixed(h)
            }
        };
        mode.validate()?;
        Ok(mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    /// Position in the phase-sorted fold.
    pub index: usize,
    pub phase: f64,
    pub kind: OptimumKind,
}

/// Local maxima and minima of a smoothed fold.
///
/// Windows of `M` samples slide with stride `M / 2` around the (circular)
/// fold. A window's argmax or argmin counts as a candidate unless it sits on
/// the window's first or last sample. When fewer than two optima survive,
/// the global argmax and argmin are returned instead.
pub fn find_local_optima(phases: &[f64], smoothed: &[f64], config: &DynamicBinningConfig) -> Vec<Optimum> {
    let mut out = Vec::new();
    local_optima_into(phases, smoothed, config, &mut out);
    out
}

fn local_optima_into(phases: &[f64], smoothed: &[f64], config: &DynamicBinningConfig, out: &mut Vec<Optimum>) {
    out.clear();
    let n = smoothed.len();
    if n == 0 {
        return;
    }
    let m = config.window_for(n).min(n);
    let stride = (m / 2).max(1);

    let mut start = 0;
    while start < n && m >= 3 {
        let (mut imax, mut imin) = (0, 0);
        let (mut vmax, mut vmin) = (f64::NEG_INFINITY, f64::INFINITY);
        for o in 0..m {
            let v = smoothed[(start + o) % n];
            if v > vmax {
                vmax = v;
                imax = o;
            }
            if v < vmin {
                vmin = v;
                imin = o;
            }
        }
        for (o, kind) in [(imax, OptimumKind::Max), (imin, OptimumKind::Min)] {
            if o == 0 || o == m - 1 {
                continue;
            }
            let index = (start + o) % n;
            if !out.iter().any(|p| p.index == index && p.kind == kind) {
                out.push(Optimum {
                    index,
                    phase: phases[index],
                    kind,
                });
            }
        }
        start += stride;
    }

    if out.len() < 2 {
        out.clear();
        let imax = argbest(smoothed, |a, b| a > b);
        let imin = argbest(smoothed, |a, b| a < b);
        out.push(Optimum {
            index: imax,
            phase: phases[imax],
            kind: OptimumKind::Max,
        });
        if imin != imax {
            out.push(Optimum {
                index: imin,
                phase: phases[imin],
                kind: OptimumKind::Min,
            });
        }
    }
    out.sort_by(|a, b| a.phase.total_cmp(&b.phase).then(a.index.cmp(&b.index)));
}

fn argbest(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// Contiguous phase bins `[boundaries[h], boundaries[h + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPartition {
    pub boundaries: Vec<f64>,
    /// Phases of the optima the bins are centred on (empty for fixed bins).
    pub optima_phases: Vec<f64>,
    pub mode: BinningMode,
}

impl BinPartition {
    pub fn n_bins(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn fixed(h: usize) -> Self {
        let h = h.max(1);
        BinPartition {
            boundaries: (0..=h).map(|i| i as f64 / h as f64).collect(),
            optima_phases: Vec::new(),
            mode: BinningMode::Fixed(h),
        }
    }

    /// Bin index of each phase in a phase-sorted slice.
    pub fn assign_sorted(&self, phases: &[f64]) -> Vec<usize> {
        let mut out = Vec::with_capacity(phases.len());
        let mut h = 0;
        let last = self.n_bins() - 1;
        for &p in phases {
            while h < last && p >= self.boundaries[h + 1] {
                h += 1;
            }
            out.push(h);
        }
        out
    }
}

/// Bin boundaries at the midpoints between consecutive optima, anchored at
/// phases 0 and 1.
pub fn make_partition(optima_phases: &[f64]) -> BinPartition {
    let mut phases = optima_phases.to_vec();
    phases.sort_by(f64::total_cmp);
    let mut boundaries = Vec::with_capacity(phases.len() + 1);
    boundaries.push(0.0);
    boundaries.extend(phases.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    boundaries.push(1.0);
    BinPartition {
        boundaries,
        optima_phases: phases,
        mode: BinningMode::Dynamic(DynamicBinningConfig::default()),
    }
}

/// Partition of a folded curve under the given binning mode.
pub fn partition_fold(fold: &FoldedCurve, mode: &BinningMode) -> BinPartition {
    match mode {
        BinningMode::Fixed(h) => BinPartition::fixed(*h),
        BinningMode::Dynamic(cfg) => {
            let smoothed = smooth_folded(fold, cfg.smoothing_span);
            let optima = find_local_optima(&fold.phases, &smoothed, cfg);
            let phases: Vec<f64> = optima.iter().map(|o| o.phase).collect();
            let mut partition = make_partition(&phases);
            partition.mode = *mode;
            partition
        }
    }
}

/// Folds a curve and groups its magnitudes by phase bin, reusing buffers
/// between calls. Each bin's magnitudes come out sorted ascending.
#[derive(Debug, Clone)]
pub struct FoldBinner {
    times: Vec<f64>,
    magnitudes: Vec<f64>,
    by_magnitude: Vec<usize>,
    mode: BinningMode,
    order: Vec<(f64, u32)>,
    scratch: Vec<(f64, u32)>,
    counts: Vec<u32>,
    sorted_phases: Vec<f64>,
    sorted_mags: Vec<f64>,
    smoothed: Vec<f64>,
    optima: Vec<Optimum>,
    boundaries: Vec<f64>,
    bin_of: Vec<u32>,
    bins: Vec<Vec<f64>>,
}

impl FoldBinner {
    pub fn new(curve: &LightCurve, mode: BinningMode) -> Self {
        let magnitudes = curve.magnitudes().to_vec();
        let mut by_magnitude: Vec<usize> = (0..magnitudes.len()).collect();
        by_magnitude.sort_by(|&a, &b| magnitudes[a].total_cmp(&magnitudes[b]));
        FoldBinner {
            times: curve.times().to_vec(),
            magnitudes,
            by_magnitude,
            mode,
            order: Vec::new(),
            scratch: Vec::new(),
            counts: Vec::new(),
            sorted_phases: Vec::new(),
            sorted_mags: Vec::new(),
            smoothed: Vec::new(),
            optima: Vec::new(),
            boundaries: Vec::new(),
            bin_of: Vec::new(),
            bins: Vec::new(),
        }
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Bins of the fold at `period`; each inner vector is sorted ascending.
    pub fn bin(&mut self, period: f64) -> &[Vec<f64>] {
        let n = self.times.len();
        fold_order(&self.times, period, &mut self.order, &mut self.scratch, &mut self.counts);
        self.sorted_phases.clear();
        self.sorted_phases.extend(self.order.iter().map(|o| o.0));

        self.boundaries.clear();
        match self.mode {
            BinningMode::Fixed(h) => {
                self.boundaries.extend((0..=h).map(|i| i as f64 / h as f64));
            }
            BinningMode::Dynamic(cfg) => {
                self.sorted_mags.clear();
                self.sorted_mags
                    .extend(self.order.iter().map(|o| self.magnitudes[o.1 as usize]));
                smooth_circular(&self.sorted_mags, cfg.smoothing_span, &mut self.smoothed);
                local_optima_into(&self.sorted_phases, &self.smoothed, &cfg, &mut self.optima);
                self.boundaries.push(0.0);
                self.boundaries
                    .extend(self.optima.windows(2).map(|w| 0.5 * (w[0].phase + w[1].phase)));
                self.boundaries.push(1.0);
            }
        }

        let n_bins = self.boundaries.len() - 1;
        self.bin_of.resize(n, 0);
        let mut h = 0;
        for &(phase, idx) in &self.order {
            while h + 1 < n_bins && phase >= self.boundaries[h + 1] {
                h += 1;
            }
            self.bin_of[idx as usize] = h as u32;
        }
        if self.bins.len() < n_bins {
            self.bins.resize_with(n_bins, Vec::new);
        }
        self.bins.truncate(n_bins);
        self.bins.iter_mut().for_each(Vec::clear);
        for &i in &self.by_magnitude {
            self.bins[self.bin_of[i] as usize].push(self.magnitudes[i]);
        }
        &self.bins
    }
}

/// Q from pre-binned sorted magnitudes: mean over bins holding at least two
/// samples of `(IP(bin) - IP(all))^2`.
pub(crate) fn q_from_bins(bins: &[Vec<f64>], config: &KernelConfig, global_ip: f64) -> f64 {
    let mut total = 0.0;
    let mut used = 0usize;
    for bin in bins.iter().filter(|b| b.len() >= 2) {
        let d = ip_of_sorted(bin, config) - global_ip;
        total += d * d;
        used += 1;
    }
    if used == 0 {
        0.0
    } else {
        total / used as f64
    }
}

/// Evaluates Q for one curve and kernel size at many trial periods.
#[derive(Debug, Clone)]
pub struct QEvaluator {
    binner: FoldBinner,
    kernel: KernelConfig,
    global_ip: f64,
}

impl QEvaluator {
    pub fn new(curve: &LightCurve, kernel: KernelConfig, binning: BinningMode) -> Self {
        let binner = FoldBinner::new(curve, binning);
        let mut sorted = binner.magnitudes().to_vec();
        sorted.sort_by(f64::total_cmp);
        let global_ip = ip_of_sorted(&sorted, &kernel);
        QEvaluator {
            binner,
            kernel,
            global_ip,
        }
    }

    pub fn global_ip(&self) -> f64 {
        self.global_ip
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn evaluate(&mut self, period: f64) -> Result<f64> {
        check_period(period)?;
        let bins = self.binner.bin(period);
        Ok(q_from_bins(bins, &self.kernel, self.global_ip))
    }
}

/// Discrimination metric of `curve` folded at `period`.
pub fn q_metric(curve: &LightCurve, period: f64, config: &KernelConfig, binning: &BinningMode) -> Result<f64> {
    QEvaluator::new(curve, *config, *binning).evaluate(period)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrigin {
    CsdPeak,
    PsdPeak,
    LsPeak,
    AovExtremum,
    SllkString,
    Seed,
}

impl CandidateOrigin {
    pub fn as_str(&self) -> &'static str {
        match self {
            CandidateOrigin::CsdPeak => "csd-peak",
            CandidateOrigin::PsdPeak => "psd-peak",
            CandidateOrigin::LsPeak => "ls-peak",
            CandidateOrigin::AovExtremum => "aov-extremum",
            CandidateOrigin::SllkString => "sllk-string",
            CandidateOrigin::Seed => "seed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WindowTag {
    Full,
    DenseHalf,
}

impl WindowTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            WindowTag::Full => "full",
            WindowTag::DenseHalf => "dense-half",
        }
    }
}

/// A trial period with its score and where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodCandidate {
    pub period: f64,
    pub score: f64,
    pub origin: CandidateOrigin,
    pub kernel_sigma: Option<f64>,
    pub window: WindowTag,
    /// Rank of the seed among its source's peaks, 0 = best.
    pub rank: Option<usize>,
}

impl PeriodCandidate {
    pub fn seed(period: f64) -> Self {
        PeriodCandidate {
            period,
            score: 0.0,
            origin: CandidateOrigin::Seed,
            kernel_sigma: None,
            window: WindowTag::Full,
            rank: None,
        }
    }
}

pub const FINE_TUNE_HALF_WIDTH: f64 = 0.5;
pub const FINE_TUNE_STEP: f64 = 1e-3;
pub const FINE_TUNE_MIN_PERIOD: f64 = 0.05;

/// Lattice indices `k` (period `k * FINE_TUNE_STEP`) searched around
/// `seed`: the 1001 lattice points nearest the seed's own +/- 0.5-day
/// window, dropping periods below `max(0.05, seed / 2)`. The lattice is
/// global so searches around nearby seeds share their points; the seed
/// itself is searched as well.
pub fn fine_tune_lattice(seed: f64) -> std::ops::RangeInclusive<i64> {
    let half = (FINE_TUNE_HALF_WIDTH / FINE_TUNE_STEP).round() as i64;
    let centre = (seed / FINE_TUNE_STEP).round() as i64;
    let lower = FINE_TUNE_MIN_PERIOD.max(0.5 * seed);
    let first = ((lower - 1e-12) / FINE_TUNE_STEP).ceil() as i64;
    first.max(centre - half).min(centre)..=centre + half
}

pub fn lattice_period(k: i64) -> f64 {
    k as f64 * FINE_TUNE_STEP
}

pub fn fine_tune_grid(seed: f64) -> Vec<f64> {
    fine_tune_lattice(seed).map(lattice_period).collect()
}

/// Q on the fine-tuning lattice, remembering every value it has computed.
#[derive(Debug, Clone)]
pub struct LatticeTuner {
    eval: QEvaluator,
    memo: std::collections::HashMap<i64, f64>,
}

impl LatticeTuner {
    pub fn new(eval: QEvaluator) -> Self {
        LatticeTuner {
            eval,
            memo: std::collections::HashMap::new(),
        }
    }

    pub fn evaluator(&self) -> &QEvaluator {
        &self.eval
    }

    /// Number of distinct lattice periods evaluated so far.
    pub fn evaluations(&self) -> usize {
        self.memo.len()
    }

    pub fn q_at(&mut self, k: i64) -> Result<f64> {
        if let Some(&q) = self.memo.get(&k) {
            return Ok(q);
        }
        let q = self.eval.evaluate(lattice_period(k))?;
        self.memo.insert(k, q);
        Ok(q)
    }

    /// Best of the seed itself and the lattice points around it; ties go
    /// to the point nearest the seed, then to the shorter period.
    pub fn tune(&mut self, seed: &PeriodCandidate) -> Result<PeriodCandidate> {
        check_period(seed.period)?;
        let mut best = (seed.period, self.eval.evaluate(seed.period)?);
        for k in fine_tune_lattice(seed.period) {
            let (p, q) = (lattice_period(k), self.q_at(k)?);
            if q > best.1 || (q == best.1 && (p - seed.period).abs() < (best.0 - seed.period).abs()) {
                best = (p, q);
            }
        }
        Ok(PeriodCandidate {
            period: best.0,
            score: best.1,
            kernel_sigma: Some(self.eval.kernel.sigma()),
            ..*seed
        })
    }
}

/// Refines a seed period by maximising Q on the 1e-3-day lattice within
/// about 0.5 days of it.
pub fn fine_tune(
    curve: &LightCurve,
    seed: &PeriodCandidate,
    config: &KernelConfig,
    binning: &BinningMode,
) -> Result<PeriodCandidate> {
    LatticeTuner::new(QEvaluator::new(curve, *config, *binning)).tune(seed)
}

/// Diagnostic table of a fold: phase, magnitude, smoothed magnitude and bin.
pub fn write_fold_table<W: Write>(fold: &FoldedCurve, mode: &BinningMode, mut out: W) -> std::io::Result<()> {
    let span = match mode {
        BinningMode::Dynamic(cfg) => cfg.smoothing_span,
        BinningMode::Fixed(_) => 1,
    };
    let smoothed = smooth_folded(fold, span);
    let bins = partition_fold(fold, mode).assign_sorted(&fold.phases);
    writeln!(out, "# period: {}", fold.period)?;
    writeln!(out, "# phase magnitude smoothed bin")?;
    for i in 0..fold.len() {
        writeln!(out, "{} {} {} {}", fold.phases[i], fold.magnitudes[i], smoothed[i], bins[i])?;
    }
    Ok(())
}
