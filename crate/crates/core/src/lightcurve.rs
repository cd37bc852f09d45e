//! Light-curve data model, text I/O, preprocessing and phase folding.
//!
//! Files are plain text with one sample per line: `time magnitude error`,
//! separated by whitespace or commas. Lines starting with `#` are comments.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::stats;

/// An irregularly sampled time series: times in days, magnitudes and
/// per-sample magnitude errors.
#[derive(Debug, Clone, PartialEq)]
pub struct LightCurve {
    id: String,
    times: Vec<f64>,
    magnitudes: Vec<f64>,
    errors: Vec<f64>,
}

impl LightCurve {
    /// Builds a curve, checking that times are strictly increasing, all
    /// three columns have the same length (at least 2), values are finite
    /// and errors are non-negative.
    pub fn new(
        id: impl Into<String>,
        times: Vec<f64>,
        magnitudes: Vec<f64>,
        errors: Vec<f64>,
    ) -> Result<Self> {
        let n = times.len();
        if magnitudes.len() != n || errors.len() != n {
            return Err(Error::InvalidCurve(format!(
                "column lengths differ: {} times, {} magnitudes, {} errors",
                n,
                magnitudes.len(),
                errors.len()
            )));
        }
        if n < 2 {
            return Err(Error::InsufficientData(format!("{n} samples, need at least 2")));
        }
        let all_finite = times
            .iter()
            .chain(&magnitudes)
            .chain(&errors)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidCurve("non-finite value".into()));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve(format!(
                "times not strictly increasing at sample {}",
                i + 1
            )));
        }
        if errors.iter().any(|&e| e < 0.0) {
            return Err(Error::InvalidCurve("negative error estimate".into()));
        }
        Ok(LightCurve {
            id: id.into(),
            times,
            magnitudes,
            errors,
        })
    }

    /// Builds a curve with all errors set to zero.
    pub fn from_samples(id: impl Into<String>, times: Vec<f64>, magnitudes: Vec<f64>) -> Result<Self> {
        let errors = vec![0.0; times.len()];
        Self::new(id, times, magnitudes, errors)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_N - t_1` in days.
    pub fn time_span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Same samples translated in time by `offset` days.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        let times = self.times.iter().map(|t| t + offset).collect();
        Self::new(self.id.clone(), times, self.magnitudes.clone(), self.errors.clone())
    }

    /// Same sampling with magnitudes replaced.
    pub fn with_magnitudes(&self, magnitudes: Vec<f64>) -> Result<Self> {
        Self::new(self.id.clone(), self.times.clone(), magnitudes, self.errors.clone())
    }

    fn subset(&self, keep: impl Fn(usize) -> bool) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut t = Vec::new();
        let mut m = Vec::new();
        let mut e = Vec::new();
        for i in (0..self.len()).filter(|&i| keep(i)) {
            t.push(self.times[i]);
            m.push(self.magnitudes[i]);
            e.push(self.errors[i]);
        }
        (t, m, e)
    }

    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        LightCurve {
            id: self.id.clone(),
            times: self.times[range.clone()].to_vec(),
            magnitudes: self.magnitudes[range.clone()].to_vec(),
            errors: self.errors[range].to_vec(),
        }
    }
}

/// Reads a light curve from a text file. The curve id is the file stem.
pub fn load_lightcurve(path: impl AsRef<Path>) -> Result<LightCurve> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_lightcurve(BufReader::new(file), id, path)
}

/// Parses light-curve text from any reader. `origin` is only used in error
/// messages.
pub fn read_lightcurve<R: BufRead>(
    reader: R,
    id: impl Into<String>,
    origin: impl Into<PathBuf>,
) -> Result<LightCurve> {
    let origin = origin.into();
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|source| Error::Io {
            path: origin.clone(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                path: origin,
                line: lineno,
                message: format!("expected 3 columns (time, magnitude, error), found {}", fields.len()),
            });
        }
        let mut parsed = [0.0f64; 3];
        for (slot, (name, field)) in parsed
            .iter_mut()
            .zip(["time", "magnitude", "error"].iter().zip(&fields))
        {
            *slot = match field.parse::<f64>() {
                Ok(v) if v.is_finite() => v,
                _ => {
                    return Err(Error::Parse {
                        path: origin,
                        line: lineno,
                        message: format!("invalid {name} value {field:?}"),
                    })
                }
            };
        }
        if parsed[2] < 0.0 {
            return Err(Error::Parse {
                path: origin,
                line: lineno,
                message: "negative error estimate".into(),
            });
        }
        samples.push((parsed[0], parsed[1], parsed[2]));
    }

    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    // collapse duplicate timestamps: mean magnitude, rms error
    let mut times = Vec::with_capacity(samples.len());
    let mut mags = Vec::with_capacity(samples.len());
    let mut errs = Vec::with_capacity(samples.len());
    let mut i = 0;
    while i < samples.len() {
        let t = samples[i].0;
        let mut j = i;
        let (mut msum, mut esq) = (0.0, 0.0);
        while j < samples.len() && samples[j].0 == t {
            msum += samples[j].1;
            esq += samples[j].2 * samples[j].2;
            j += 1;
        }
        let k = (j - i) as f64;
        times.push(t);
        mags.push(msum / k);
        errs.push((esq / k).sqrt());
        i = j;
    }

    if times.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{}: {} distinct samples, need at least 2",
            origin.display(),
            times.len()
        )));
    }
    LightCurve::new(id, times, mags, errs)
}

/// Writes the curve in the same three-column format it is read from.
/// Values use the shortest representation that round-trips exactly.
pub fn write_lightcurve<W: Write>(curve: &LightCurve, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# id: {}", curve.id)?;
    writeln!(out, "# time magnitude error")?;
    for i in 0..curve.len() {
        writeln!(out, "{} {} {}", curve.times[i], curve.magnitudes[i], curve.errors[i])?;
    }
    Ok(())
}

pub fn save_lightcurve(curve: &LightCurve, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    write_lightcurve(curve, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Rejects samples whose error exceeds mean + 2 sample-std of the error
/// column, then rescales the remaining magnitudes to zero mean and unit
/// sample standard deviation.
pub fn normalize(curve: &LightCurve) -> Result<LightCurve> {
    if curve.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "normalization needs at least 3 samples, got {}",
            curve.len()
        )));
    }
    let (err_mean, err_std) = stats::mean_and_std(&curve.errors);
    let threshold = err_mean + 2.0 * err_std;
    let (times, mags, errs) = curve.subset(|i| curve.errors[i] <= threshold);
    if mags.len() < 2 {
        return Err(Error::DegenerateCurve(format!(
            "{} samples left after error rejection",
            mags.len()
        )));
    }
    let (mean, std) = stats::mean_and_std(&mags);
    if !(std > 0.0) {
        return Err(Error::DegenerateCurve("constant magnitudes".into()));
    }
    let scaled = mags.iter().map(|m| (m - mean) / std).collect();
    LightCurve::new(curve.id.clone(), times, scaled, errs)
}

/// Picks the sub-curve inside a window of half the time span that holds the
/// most samples. Window starts step through `t_1, t_1 + 1, ...` up to
/// `t_1 + T/2`; the earliest start wins ties.
pub fn select_dense_window(curve: &LightCurve) -> LightCurve {
    let span = curve.time_span();
    let width = span / 2.0;
    let t0 = curve.times[0];
    let last_start = t0 + width;

    let mut best: Option<(usize, std::ops::Range<usize>)> = None;
    let mut day = 0u64;
    loop {
        let start = t0 + day as f64;
        if start > last_start {
            break;
        }
        let lo = curve.times.partition_point(|&t| t < start);
        let hi = curve.times.partition_point(|&t| t <= start + width);
        let count = hi - lo;
        if best.as_ref().map_or(true, |(c, _)| count > *c) {
            best = Some((count, lo..hi));
        }
        day += 1;
    }
    match best {
        Some((count, range)) if count >= 2 => curve.slice(range),
        _ => curve.clone(),
    }
}

/// A light curve mapped onto phase for a trial period, sorted by phase.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedCurve {
    pub phases: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Position of each folded sample in the source curve.
    pub source_index: Vec<usize>,
    pub period: f64,
}

impl FoldedCurve {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// `(t mod period) / period`, always in `[0, 1)`.
#[inline]
pub fn phase_of(t: f64, period: f64) -> f64 {
    let cycles = t / period;
    let phase = cycles - cycles.floor();
    if phase >= 1.0 {
        0.0
    } else {
        phase
    }
}

pub(crate) fn check_period(period: f64) -> Result<()> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPeriod(period))
    }
}

/// Folds the curve at `period` and sorts samples by phase. Equal phases keep
/// their time order.
pub fn fold(curve: &LightCurve, period: f64) -> Result<FoldedCurve> {
    check_period(period)?;
    let mut order = Vec::new();
    fold_order(&curve.times, period, &mut order, &mut Vec::new(), &mut Vec::new());
    Ok(FoldedCurve {
        phases: order.iter().map(|p| p.0).collect(),
        magnitudes: order.iter().map(|p| curve.magnitudes[p.1 as usize]).collect(),
        source_index: order.iter().map(|p| p.1 as usize).collect(),
        period,
    })
}

/// Fills `order` with `(phase, sample index)` sorted by phase, equal phases
/// in index order. Bucket pass followed by insertion sort; the scratch
/// vectors are reused between calls.
pub(crate) fn fold_order(
    times: &[f64],
    period: f64,
    order: &mut Vec<(f64, u32)>,
    scratch: &mut Vec<(f64, u32)>,
    counts: &mut Vec<u32>,
) {
    let n = times.len();
    let buckets = n.next_power_of_two();
    counts.clear();
    counts.resize(buckets + 1, 0);
    scratch.clear();
    scratch.extend(times.iter().enumerate().map(|(i, &t)| (phase_of(t, period), i as u32)));
    let bucket_of = |phase: f64| ((phase * buckets as f64) as usize).min(buckets - 1);
    for &(phase, _) in scratch.iter() {
        counts[bucket_of(phase) + 1] += 1;
    }
    for b in 0..buckets {
        counts[b + 1] += counts[b];
    }
    order.clear();
    order.resize(n, (0.0, 0));
    for &item in scratch.iter() {
        let slot = &mut counts[bucket_of(item.0)];
        order[*slot as usize] = item;
        *slot += 1;
    }
    for i in 1..n {
        let item = order[i];
        let mut j = i;
        while j > 0 && order[j - 1].0 > item.0 {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = item;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LightCurve> {
        read_lightcurve(text.as_bytes(), "t", "inline")
    }

    #[test]
    fn parses_two_samples() {
        let c = parse("0.0 10.0 0.01\n1.0 10.5 0.01\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.times(), &[0.0, 1.0]);
        assert_eq!(c.magnitudes(), &[10.0, 10.5]);
    }

    #[test]
    fn sorts_out_of_order_lines_and_accepts_commas() {
        let c = parse("# header\n2.0,3.0,0.1\n\n0.0, 1.0, 0.1\n1.0 2.0 0.1\n").unwrap();
        assert_eq!(c.times(), &[0.0, 1.0, 2.0]);
        assert_eq!(c.magnitudes(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn parse_error_names_the_line() {
        let text = "0 1 0.1\n1 1 0.1\n2 1 0.1\n# c\n4 1 0.1\n5 1 0.1\n6 abc 0.1\n";
        match parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_columns_is_a_parse_error() {
        assert!(matches!(parse("0 1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn duplicate_times_are_merged() {
        let c = parse("0 1 0.3\n0 3 0.4\n1 5 0.1\n").unwrap();
        assert_eq!(c.times(), &[0.0, 1.0]);
        assert_eq!(c.magnitudes()[0], 2.0);
        assert!((c.errors()[0] - (0.125f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn single_sample_is_insufficient() {
        assert!(matches!(parse("0 1 0.1\n0 2 0.1\n"), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn new_rejects_bad_columns() {
        assert!(LightCurve::new("x", vec![0.0, 0.0], vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
        assert!(LightCurve::new("x", vec![0.0, 1.0], vec![1.0], vec![0.0, 0.0]).is_err());
        assert!(LightCurve::new("x", vec![0.0, 1.0], vec![1.0, 2.0], vec![0.0, -1.0]).is_err());
    }

    #[test]
    fn normalize_symmetric_case() {
        let c = LightCurve::new("x", vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
        let n = normalize(&c).unwrap();
        assert_eq!(n.len(), 3);
        for (got, want) in n.magnitudes().iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_drops_large_error_sample() {
        let n = 1000;
        let times: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mags: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut errs = vec![0.01; n];
        errs[n - 1] = 10.0;

        // independent threshold: mean + 2 * sample std, by direct summation
        let mean = errs.iter().sum::<f64>() / n as f64;
        let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n as f64 - 1.0);
        let threshold = mean + 2.0 * var.sqrt();
        assert!(10.0 > threshold && 0.01 <= threshold);

        let c = LightCurve::new("x", times, mags, errs).unwrap();
        let out = normalize(&c).unwrap();
        assert_eq!(out.len(), n - 1);
        assert!(out.errors().iter().all(|&e| e == 0.01));
    }

    #[test]
    fn normalize_constant_is_degenerate() {
        let c = LightCurve::from_samples("x", vec![0.0, 1.0, 2.0, 3.0], vec![5.0; 4]).unwrap();
        assert!(matches!(normalize(&c), Err(Error::DegenerateCurve(_))));
    }

    #[test]
    fn dense_window_uniform_starts_at_first_sample() {
        let times: Vec<f64> = (0..101).map(|i| i as f64).collect();
        let c = LightCurve::from_samples("u", times, (0..101).map(|i| i as f64).collect()).unwrap();
        let w = select_dense_window(&c);
        assert_eq!(w.times()[0], 0.0);
        assert_eq!(w.len(), 51);
    }

    #[test]
    fn dense_window_follows_samples_in_second_half() {
        let mut times = vec![0.0];
        times.extend((0..200).map(|i| 50.0 + i as f64 * 0.25));
        let n = times.len();
        let c = LightCurve::from_samples("s", times, vec![1.0; n]).unwrap();
        // span 99.75, width 49.875: the start at day 49 holds 50.0..=98.75
        let w = select_dense_window(&c);
        assert_eq!(w.times()[0], 50.0);
        assert_eq!(w.len(), 196);
    }

    #[test]
    fn fold_modulo_arithmetic() {
        let c = LightCurve::from_samples("f", vec![0.0, 1.5, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        let f = fold(&c, 1.0).unwrap();
        assert_eq!(f.phases, vec![0.0, 0.0, 0.5]);
        // ties keep time order
        assert_eq!(f.magnitudes, vec![1.0, 3.0, 2.0]);
        assert_eq!(f.source_index, vec![0, 2, 1]);
    }

    #[test]
    fn fold_longer_than_span_preserves_order() {
        let c = LightCurve::from_samples("f", vec![0.2, 0.7, 1.9, 3.0], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let f = fold(&c, c.time_span() + 1.0).unwrap();
        assert_eq!(f.source_index, vec![0, 1, 2, 3]);
        assert!(f.phases.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fold_rejects_nonpositive_period() {
        let c = LightCurve::from_samples("f", vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(fold(&c, 0.0), Err(Error::InvalidPeriod(_))));
        assert!(matches!(fold(&c, -2.0), Err(Error::InvalidPeriod(_))));
    }
}
