//! Slotted estimators for irregularly sampled series.
//!
//! Pairs of samples are assigned to lag slots of width `slot_size` centred
//! on `k * slot_size`; each slot value is the average of a pair statistic
//! over the pairs it holds. The Gaussian kernel of the magnitude difference
//! gives slotted correntropy, the plain product gives the slotted
//! autocorrelation.

use std::io::Write;

use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::lightcurve::LightCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Correntropy,
    Correlation,
}

/// Estimator values on the lag grid `k * slot_size`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlottedSeries {
    pub kind: SeriesKind,
    pub slot_size: f64,
    pub max_lag: f64,
    pub values: Vec<f64>,
    /// Number of ordered pairs that fell in each slot. Slots with zero count
    /// hold interpolated values.
    pub counts: Vec<u64>,
}

impl SlottedSeries {
    pub fn n_slots(&self) -> usize {
        self.values.len()
    }

    pub fn lag(&self, k: usize) -> f64 {
        k as f64 * self.slot_size
    }

    /// Two-column `lag value` text.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# lag_days value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{} {}", self.lag(k), v)?;
        }
        Ok(())
    }
}

/// Slot membership test: true iff `|(t_i - t_j) - k * slot_size| < slot_size / 2`.
#[inline]
pub fn slot_indicator(t_i: f64, t_j: f64, k: usize, slot_size: f64) -> bool {
    ((t_i - t_j) - k as f64 * slot_size).abs() < 0.5 * slot_size
}

/// Number of the last slot, `round(max_lag / slot_size)`.
pub fn last_slot(slot_size: f64, max_lag: f64) -> usize {
    (max_lag / slot_size).round() as usize
}

fn check_slotting(slot_size: f64, max_lag: f64) -> Result<()> {
    if !(slot_size > 0.0 && slot_size.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "slot size must be positive, got {slot_size}"
        )));
    }
    if !(max_lag >= slot_size && max_lag.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "maximum lag {max_lag} must be at least the slot size {slot_size}"
        )));
    }
    Ok(())
}

/// Every ordered sample pair `(i, j)` that falls in a slot, with its slot
/// index. Depends only on the sampling times, so one table serves any number
/// of kernel sizes.
#[derive(Debug, Clone)]
pub struct SlotPairs {
    slot_size: f64,
    max_lag: f64,
    n_slots: usize,
    // (slot, i, j), ordered by i then j
    pairs: Vec<(u32, u32, u32)>,
}

impl SlotPairs {
    pub fn new(times: &[f64], slot_size: f64, max_lag: f64) -> Result<Self> {
        check_slotting(slot_size, max_lag)?;
        let last = last_slot(slot_size, max_lag);
        let reach = (last as f64 + 0.5) * slot_size;
        let half = 0.5 * slot_size;
        let mut pairs = Vec::new();
        for (i, &ti) in times.iter().enumerate() {
            // candidate partners: t_i - reach <= t_j <= t_i + half
            let lo = times.partition_point(|&t| t < ti - reach);
            let hi = times.partition_point(|&t| t <= ti + half);
            for (j, &tj) in times.iter().enumerate().take(hi).skip(lo) {
                let nearest = ((ti - tj) / slot_size).round();
                if nearest < -1.0 || nearest > last as f64 + 1.0 {
                    continue;
                }
                let nearest = nearest.max(0.0) as usize;
                let slot = [nearest, nearest.wrapping_sub(1), nearest + 1]
                    .into_iter()
                    .find(|&k| k <= last && slot_indicator(ti, tj, k, slot_size));
                if let Some(k) = slot {
                    pairs.push((k as u32, i as u32, j as u32));
                }
            }
        }
        Ok(SlotPairs {
            slot_size,
            max_lag,
            n_slots: last + 1,
            pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    fn accumulate(&self, kind: SeriesKind, stat: impl Fn(usize, usize) -> f64) -> Result<SlottedSeries> {
        let mut sums = vec![0.0; self.n_slots];
        let mut counts = vec![0u64; self.n_slots];
        for &(k, i, j) in &self.pairs {
            sums[k as usize] += stat(i as usize, j as usize);
            counts[k as usize] += 1;
        }
        let mut values: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
            .collect();
        fill_empty_slots(&mut values, &counts)?;
        Ok(SlottedSeries {
            kind,
            slot_size: self.slot_size,
            max_lag: self.max_lag,
            values,
            counts,
        })
    }

    pub fn correntropy(&self, magnitudes: &[f64], config: &KernelConfig) -> Result<SlottedSeries> {
        self.accumulate(SeriesKind::Correntropy, |i, j| {
            config.eval(magnitudes[i] - magnitudes[j])
        })
    }

    pub fn correlation(&self, magnitudes: &[f64]) -> Result<SlottedSeries> {
        self.accumulate(SeriesKind::Correlation, |i, j| magnitudes[i] * magnitudes[j])
    }
}

/// Replaces values of empty slots by linear interpolation between the
/// nearest populated neighbours, holding the end values constant.
fn fill_empty_slots(values: &mut [f64], counts: &[u64]) -> Result<()> {
    let filled: Vec<usize> = (0..counts.len()).filter(|&k| counts[k] > 0).collect();
    let (&first, &last) = match (filled.first(), filled.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InsufficientPairs),
    };
    let head = values[first];
    values[..first].iter_mut().for_each(|v| *v = head);
    let tail = values[last];
    values[last + 1..].iter_mut().for_each(|v| *v = tail);
    for w in filled.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 2 {
            continue;
        }
        let (va, vb) = (values[a], values[b]);
        for k in a + 1..b {
            let frac = (k - a) as f64 / (b - a) as f64;
            values[k] = va + (vb - va) * frac;
        }
    }
    Ok(())
}

/// Slotted correntropy of a normalised curve.
pub fn slotted_correntropy(
    curve: &LightCurve,
    config: &KernelConfig,
    slot_size: f64,
    max_lag: f64,
) -> Result<SlottedSeries> {
    SlotPairs::new(curve.times(), slot_size, max_lag)?.correntropy(curve.magnitudes(), config)
}

/// Slotted autocorrelation (mean lagged product) of a normalised curve.
pub fn slotted_autocorrelation(curve: &LightCurve, slot_size: f64, max_lag: f64) -> Result<SlottedSeries> {
    SlotPairs::new(curve.times(), slot_size, max_lag)?.correlation(curve.magnitudes())
}

/// Sample-mean correntropy of an evenly sampled sequence:
/// `V[m] = 1/(N-m) * sum_{n=m}^{N-1} G(x_n - x_{n-m})` for `m = 0..N-1`.
pub fn even_correntropy(values: &[f64], config: &KernelConfig) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|m| {
            let sum: f64 = (m..n).map(|i| config.eval(values[i] - values[i - m])).sum();
            sum / (n - m) as f64
        })
        .collect()
}
