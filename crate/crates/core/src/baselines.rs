//! Classical period searches: Lomb-Scargle, analysis of variance and the
//! Lafler-Kinman string length.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ip::{BinningMode, FoldBinner};
use crate::lightcurve::{check_period, fold_order, LightCurve};
use crate::spectral::{Spectrum, SpectrumKind};
use crate::stats::mean;

pub const DEFAULT_PERIOD_STEP: f64 = 1e-3;
/// LS frequency spacing is `1 / (LS_OVERSAMPLE * span)`.
pub const LS_OVERSAMPLE: f64 = 5.0;

/// Uniform grid in period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodGrid {
    pub min_period: f64,
    pub max_period: f64,
    pub step: f64,
}

impl PeriodGrid {
    pub fn new(min_period: f64, max_period: f64, step: f64) -> Result<Self> {
        if !(min_period > 0.0 && max_period > min_period && max_period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid period range [{min_period}, {max_period}]"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid period step {step}")));
        }
        Ok(PeriodGrid {
            min_period,
            max_period,
            step,
        })
    }

    pub fn for_band(min_period: f64, max_period: f64) -> Result<Self> {
        PeriodGrid::new(min_period, max_period, DEFAULT_PERIOD_STEP)
    }

    pub fn len(&self) -> usize {
        ((self.max_period - self.min_period) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self, i: usize) -> f64 {
        self.min_period + i as f64 * self.step
    }

    pub fn periods(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.period(i))
    }
}

/// Uniform grid in frequency (cycles per day).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub min_frequency: f64,
    pub max_frequency: f64,
    pub step: f64,
}

impl FrequencyGrid {
    pub fn new(min_frequency: f64, max_frequency: f64, step: f64) -> Result<Self> {
        if !(min_frequency > 0.0 && max_frequency > min_frequency && max_frequency.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid frequency range [{min_frequency}, {max_frequency}]"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid frequency step {step}")));
        }
        Ok(FrequencyGrid {
            min_frequency,
            max_frequency,
            step,
        })
    }

    /// Covers periods `[min_period, max_period]` with spacing
    /// `1 / (5 * span)`.
    pub fn for_band(min_period: f64, max_period: f64, span: f64) -> Result<Self> {
        if !(span > 0.0) {
            return Err(Error::InvalidParameter("time span must be positive".into()));
        }
        if !(min_period > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid period range [{min_period}, {max_period}]")));
        }
        FrequencyGrid::new(1.0 / max_period, 1.0 / min_period, 1.0 / (LS_OVERSAMPLE * span))
    }

    pub fn len(&self) -> usize {
        ((self.max_frequency - self.min_frequency) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.min_frequency + i as f64 * self.step
    }
}

// exact trig is recomputed this often to stop the rotation recurrence drifting
const LS_RESYNC: usize = 256;

/// Normalized Lomb-Scargle power with the time-offset form, divided by the
/// sample variance of the magnitudes.
pub fn lomb_scargle(curve: &LightCurve, grid: &FrequencyGrid) -> Result<Spectrum> {
    let t = curve.times();
    let m = mean(curve.magnitudes());
    let x: Vec<f64> = curve.magnitudes().iter().map(|v| v - m).collect();
    let n = x.len();
    let variance = if n > 1 {
        x.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let len = grid.len();
    let frequencies: Vec<f64> = (0..len).map(|i| grid.frequency(i)).collect();
    if variance == 0.0 {
        return Ok(Spectrum {
            frequencies,
            powers: vec![0.0; len],
            kind: SpectrumKind::LombScargle,
            sampling_frequency: None,
        });
    }

    let (dc, ds): (Vec<f64>, Vec<f64>) = t.iter().map(|&ti| (2.0 * PI * grid.step * ti).sin_cos()).map(|(s, c)| (c, s)).unzip();
    let mut c = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut powers = Vec::with_capacity(len);
    for (k, &f) in frequencies.iter().enumerate() {
        if k % LS_RESYNC == 0 {
            for i in 0..n {
                let (si, ci) = (2.0 * PI * f * t[i]).sin_cos();
                c[i] = ci;
                s[i] = si;
            }
        }
        let (mut xc, mut xs, mut cc, mut ss, mut cs) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            xc += x[i] * c[i];
            xs += x[i] * s[i];
            cc += c[i] * c[i];
            ss += s[i] * s[i];
            cs += c[i] * s[i];
        }
        let theta = 0.5 * (2.0 * cs).atan2(cc - ss);
        let (st, ct) = theta.sin_cos();
        let num_c = ct * xc + st * xs;
        let num_s = ct * xs - st * xc;
        let den_c = ct * ct * cc + 2.0 * ct * st * cs + st * st * ss;
        let den_s = ct * ct * ss - 2.0 * ct * st * cs + st * st * cc;
        let tol = 1e-12 * n as f64;
        let mut p = 0.0;
        if den_c > tol {
            p += num_c * num_c / den_c;
        }
        if den_s > tol {
            p += num_s * num_s / den_s;
        }
        powers.push((0.5 * p / variance).max(0.0));

        for i in 0..n {
            let cn = c[i] * dc[i] - s[i] * ds[i];
            s[i] = s[i] * dc[i] + c[i] * ds[i];
            c[i] = cn;
        }
    }
    Ok(Spectrum {
        frequencies,
        powers,
        kind: SpectrumKind::LombScargle,
        sampling_frequency: None,
    })
}

/// A local extremum of a statistic over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub period: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Indices of local extrema of `values` (plateaus report their first
/// point; ends count when they beat their one neighbour), best first, at
/// most `n`. Equal values keep grid order.
pub fn local_extrema(values: &[f64], direction: Direction, n: usize) -> Vec<usize> {
    let better = |a: f64, b: f64| match direction {
        Direction::Maximize => a > b,
        Direction::Minimize => a < b,
    };
    let len = values.len();
    let mut idx: Vec<usize> = (0..len)
        .filter(|&i| {
            let v = values[i];
            let left = i == 0 || better(v, values[i - 1]);
            let mut j = i + 1;
            while j < len && values[j] == v {
                j += 1;
            }
            let right = j == len || better(v, values[j]);
            left && right && (len > 1)
        })
        .collect();
    idx.sort_by(|&a, &b| {
        let ord = values[a].total_cmp(&values[b]);
        let ord = if direction == Direction::Maximize { ord.reverse() } else { ord };
        ord.then(a.cmp(&b))
    });
    idx.truncate(n);
    idx
}

/// The `n` strongest local maxima of the Lomb-Scargle periodogram.
pub fn lomb_scargle_peaks(curve: &LightCurve, grid: &FrequencyGrid, n: usize) -> Result<Vec<Extremum>> {
    let spectrum = lomb_scargle(curve, grid)?;
    Ok(local_extrema(&spectrum.powers, Direction::Maximize, n)
        .into_iter()
        .map(|i| Extremum {
            period: 1.0 / spectrum.frequencies[i],
            value: spectrum.powers[i],
        })
        .collect())
}

/// AoV value; `saturated` marks a perfect fit (zero within-bin variance)
/// reported as `f64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AovValue {
    pub theta: f64,
    pub saturated: bool,
}

pub const AOV_DEFAULT_BINS: usize = 10;

/// Reusable analysis-of-variance evaluator for one curve.
#[derive(Debug, Clone)]
pub struct AovEvaluator {
    binner: FoldBinner,
    grand_mean: f64,
}

impl AovEvaluator {
    pub fn new(curve: &LightCurve, binning: BinningMode) -> Self {
        AovEvaluator {
            grand_mean: mean(curve.magnitudes()),
            binner: FoldBinner::new(curve, binning),
        }
    }

    /// `s1^2 / s2^2` over the non-empty bins of the fold at `period`.
    pub fn evaluate(&mut self, period: f64) -> Result<AovValue> {
        check_period(period)?;
        let grand = self.grand_mean;
        let bins = self.binner.bin(period);
        let n: usize = bins.iter().map(Vec::len).sum();
        let h = bins.iter().filter(|b| !b.is_empty()).count();
        if bins.iter().filter(|b| b.len() >= 2).count() < 2 || n <= h {
            return Err(Error::InsufficientData(format!(
                "AoV at period {period} needs two bins with two samples each"
            )));
        }
        let (mut between, mut within) = (0.0, 0.0);
        for b in bins.iter().filter(|b| !b.is_empty()) {
            let m = mean(b);
            between += b.len() as f64 * (m - grand) * (m - grand);
            within += b.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
        }
        let s1 = between / (h - 1) as f64;
        let s2 = within / (n - h) as f64;
        if s2 <= 0.0 {
            return Ok(AovValue {
                theta: f64::MAX,
                saturated: true,
            });
        }
        Ok(AovValue {
            theta: s1 / s2,
            saturated: false,
        })
    }
}

pub fn aov_statistic(curve: &LightCurve, period: f64, binning: &BinningMode) -> Result<AovValue> {
    AovEvaluator::new(curve, *binning).evaluate(period)
}

/// Reusable string-length evaluator for one curve.
#[derive(Debug, Clone)]
pub struct SllkEvaluator {
    times: Vec<f64>,
    magnitudes: Vec<f64>,
    denominator: f64,
    order: Vec<(f64, u32)>,
    scratch: Vec<(f64, u32)>,
    counts: Vec<u32>,
}

impl SllkEvaluator {
    pub fn new(curve: &LightCurve) -> Result<Self> {
        if curve.len() < 3 {
            return Err(Error::InsufficientData("string length needs at least 3 samples".into()));
        }
        let m = mean(curve.magnitudes());
        let denominator: f64 = curve.magnitudes().iter().map(|x| (x - m) * (x - m)).sum();
        if denominator <= 0.0 {
            return Err(Error::DegenerateCurve("constant magnitudes".into()));
        }
        Ok(SllkEvaluator {
            times: curve.times().to_vec(),
            magnitudes: curve.magnitudes().to_vec(),
            denominator,
            order: Vec::new(),
            scratch: Vec::new(),
            counts: Vec::new(),
        })
    }

    pub fn evaluate(&mut self, period: f64) -> Result<f64> {
        check_period(period)?;
        fold_order(&self.times, period, &mut self.order, &mut self.scratch, &mut self.counts);
        let x = |k: usize| self.magnitudes[self.order[k].1 as usize];
        let n = self.order.len();
        let mut total = 0.0;
        for k in 0..n {
            let d = x((k + 1) % n) - x(k);
            total += d * d;
        }
        Ok(total / self.denominator)
    }
}

/// Lafler-Kinman string length with the wrap-around term, normalized by
/// the total sum of squares.
pub fn sllk_string_length(curve: &LightCurve, period: f64) -> Result<f64> {
    SllkEvaluator::new(curve)?.evaluate(period)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Aov(BinningMode),
    StringLength,
}

impl Statistic {
    /// Good periods maximise AoV and minimise the string length.
    pub fn default_direction(&self) -> Direction {
        match self {
            Statistic::Aov(_) => Direction::Maximize,
            Statistic::StringLength => Direction::Minimize,
        }
    }
}

/// The statistic over every grid period. AoV points that cannot be
/// evaluated (too few filled bins) score the worst possible value.
pub fn scan_statistic(curve: &LightCurve, grid: &PeriodGrid, statistic: Statistic) -> Result<Vec<f64>> {
    match statistic {
        Statistic::Aov(binning) => {
            binning.validate()?;
            let mut eval = AovEvaluator::new(curve, binning);
            Ok(grid
                .periods()
                .map(|p| eval.evaluate(p).map_or(0.0, |v| v.theta))
                .collect())
        }
        Statistic::StringLength => {
            let mut eval = SllkEvaluator::new(curve)?;
            grid.periods().map(|p| eval.evaluate(p)).collect()
        }
    }
}

/// The `n` best local extrema of `statistic` over `grid`, in its default
/// direction.
pub fn scan_extremum(curve: &LightCurve, grid: &PeriodGrid, statistic: Statistic, n: usize) -> Result<Vec<Extremum>> {
    scan_extremum_directed(curve, grid, statistic, statistic.default_direction(), n)
}

pub fn scan_extremum_directed(
    curve: &LightCurve,
    grid: &PeriodGrid,
    statistic: Statistic,
    direction: Direction,
    n: usize,
) -> Result<Vec<Extremum>> {
    let values = scan_statistic(curve, grid, statistic)?;
    Ok(local_extrema(&values, direction, n)
        .into_iter()
        .map(|i| Extremum {
            period: grid.period(i),
            value: values[i],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn irregular_sinusoid(n: usize, period: f64) -> LightCurve {
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.93 + 0.41 * ((i * 13) % 7) as f64).collect();
        let mags = times.iter().map(|t| (2.0 * PI * t / period).sin()).collect();
        LightCurve::from_samples("s", times, mags).unwrap()
    }

    #[test]
    fn grids() {
        let g = PeriodGrid::new(1.0, 2.0, 0.25).unwrap();
        assert_eq!(g.periods().collect::<Vec<_>>(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(PeriodGrid::new(2.0, 1.0, 0.1).is_err());
        assert!(PeriodGrid::new(1.0, 2.0, 0.0).is_err());
        let f = FrequencyGrid::for_band(0.2, 200.0, 1000.0).unwrap();
        assert!((f.frequency(0) - 0.005).abs() < 1e-15);
        assert!((f.step - 2e-4).abs() < 1e-18);
        assert!(f.frequency(f.len() - 1) <= 5.0 + 1e-9);
    }

    #[test]
    fn lomb_scargle_zero_input() {
        let c = LightCurve::from_samples("z", (0..50).map(|i| i as f64).collect(), vec![0.0; 50]).unwrap();
        let s = lomb_scargle(&c, &FrequencyGrid::new(0.01, 0.4, 0.01).unwrap()).unwrap();
        assert!(s.powers.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn lomb_scargle_recurrence_matches_direct() {
        let c = irregular_sinusoid(120, 6.1);
        let grid = FrequencyGrid::new(0.001, 1.0, 0.0007).unwrap();
        let s = lomb_scargle(&c, &grid).unwrap();
        let x: Vec<f64> = {
            let m = mean(c.magnitudes());
            c.magnitudes().iter().map(|v| v - m).collect()
        };
        let var = x.iter().map(|v| v * v).sum::<f64>() / (x.len() - 1) as f64;
        for i in [0, 7, 300, 1000, grid.len() - 1] {
            let w = 2.0 * PI * grid.frequency(i);
            let (s2, c2) = c.times().iter().fold((0.0, 0.0), |a, &t| (a.0 + (2.0 * w * t).sin(), a.1 + (2.0 * w * t).cos()));
            let tau = s2.atan2(c2) / (2.0 * w);
            let (mut xc, mut xs, mut cc, mut ss) = (0.0, 0.0, 0.0, 0.0);
            for (xi, &t) in x.iter().zip(c.times()) {
                let a = w * (t - tau);
                xc += xi * a.cos();
                xs += xi * a.sin();
                cc += a.cos().powi(2);
                ss += a.sin().powi(2);
            }
            let direct = 0.5 * (xc * xc / cc + xs * xs / ss) / var;
            assert!((s.powers[i] - direct).abs() < 1e-9 * direct.max(1.0), "{i}");
        }
    }

    #[test]
    fn lomb_scargle_finds_period() {
        let c = irregular_sinusoid(300, 6.1);
        let grid = FrequencyGrid::for_band(0.5, 50.0, c.time_span()).unwrap();
        let peaks = lomb_scargle_peaks(&c, &grid, 3).unwrap();
        assert!((1.0 / peaks[0].period - 1.0 / 6.1).abs() <= grid.step);
    }

    #[test]
    fn aov_and_sllk_prefer_true_period() {
        let c = irregular_sinusoid(400, 6.1);
        let mut aov = AovEvaluator::new(&c, BinningMode::Fixed(10));
        let mut sllk = SllkEvaluator::new(&c).unwrap();
        let a0 = aov.evaluate(6.1).unwrap().theta;
        let s0 = sllk.evaluate(6.1).unwrap();
        for r in 0..20 {
            let p = 6.1 * (0.55 + 0.041 * r as f64);
            assert!(a0 > aov.evaluate(p).unwrap().theta, "{p}");
            assert!(s0 < sllk.evaluate(p).unwrap(), "{p}");
        }
    }

    #[test]
    fn aov_degenerate_cases() {
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        // step function fitting the bins exactly: zero within-bin variance
        let mags: Vec<f64> = times.iter().map(|&t| if (t % 10.0) < 5.0 { 1.0 } else { -1.0 }).collect();
        let c = LightCurve::from_samples("st", times.clone(), mags).unwrap();
        let v = aov_statistic(&c, 10.0, &BinningMode::Fixed(2)).unwrap();
        assert!(v.saturated);
        assert_eq!(v.theta, f64::MAX);
        // identical bin means
        let mags: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let c = LightCurve::from_samples("eq", times, mags).unwrap();
        let v = aov_statistic(&c, 10.0, &BinningMode::Fixed(2)).unwrap();
        assert_eq!(v.theta, 0.0);
        assert!(!v.saturated);
    }

    #[test]
    fn sllk_rejects_constant_curve() {
        let c = LightCurve::from_samples("c", (0..20).map(|i| i as f64).collect(), vec![2.0; 20]).unwrap();
        assert!(matches!(sllk_string_length(&c, 3.0), Err(Error::DegenerateCurve(_))));
    }

    #[test]
    fn extrema_selection() {
        let v = [3.0, 1.0, 2.0, 0.5, 0.5, 4.0, 5.0];
        assert_eq!(local_extrema(&v, Direction::Maximize, 5), vec![6, 0, 2]);
        assert_eq!(local_extrema(&v, Direction::Minimize, 5), vec![3, 1]);
        assert_eq!(local_extrema(&v, Direction::Maximize, 1), vec![6]);
    }

    #[test]
    fn scan_finds_grid_period() {
        let c = irregular_sinusoid(300, 5.0);
        let grid = PeriodGrid::new(3.0, 7.0, 0.01).unwrap();
        let best = scan_extremum(&c, &grid, Statistic::StringLength, 1).unwrap();
        assert!((best[0].period - 5.0).abs() < 1e-9, "{}", best[0].period);
        let best = scan_extremum(&c, &grid, Statistic::Aov(BinningMode::Fixed(10)), 1).unwrap();
        assert!((best[0].period - 5.0).abs() <= grid.step + 1e-9, "{}", best[0].period);
    }
}
