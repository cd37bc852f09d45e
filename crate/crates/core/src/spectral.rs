//! Spectra of slotted series and peak extraction.
//!
//! A slotted series is centred, mirrored to negative lags, tapered with a
//! Hamming window and zero-padded before the DFT. Lag zero sits at index 0
//! of the transform buffer and negative lags wrap to the end, so the
//! transform of the even sequence is real up to rounding.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::slotted::{SeriesKind, SlottedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Correntropy spectral density.
    Csd,
    /// Power spectral density of the slotted autocorrelation.
    Psd,
    LombScargle,
}

impl SpectrumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumKind::Csd => "csd",
            SpectrumKind::Psd => "psd",
            SpectrumKind::LombScargle => "lomb-scargle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Cycles per day, strictly increasing.
    pub frequencies: Vec<f64>,
    pub powers: Vec<f64>,
    pub kind: SpectrumKind,
    /// `1 / slot_size` for lag-domain spectra.
    pub sampling_frequency: Option<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Two-column `frequency power` text.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# kind: {}", self.kind.as_str())?;
        writeln!(out, "# frequency_per_day power")?;
        for (f, p) in self.frequencies.iter().zip(&self.powers) {
            writeln!(out, "{f} {p}")?;
        }
        Ok(())
    }
}

/// Hamming coefficient `0.54 - 0.46 cos(2 pi n / (len - 1))`.
pub fn hamming(n: usize, len: usize) -> f64 {
    if len < 2 {
        return 1.0;
    }
    0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos()
}

/// Centred, mirrored and Hamming-tapered lag sequence of length `2K + 1`;
/// element `K + k` holds lag `k * slot_size`.
pub fn center_and_window(series: &SlottedSeries) -> Vec<f64> {
    let k_max = series.values.len() - 1;
    let len = 2 * k_max + 1;
    let mean = series.values.iter().sum::<f64>() / series.values.len() as f64;
    let mut out = vec![0.0; len];
    for (k, v) in series.values.iter().enumerate() {
        // hamming(K +/- k, 2K + 1), written symmetrically in k
        let w = if k_max == 0 {
            1.0
        } else {
            0.54 + 0.46 * (std::f64::consts::PI * k as f64 / k_max as f64).cos()
        };
        let tapered = (v - mean) * w;
        out[k_max + k] = tapered;
        out[k_max - k] = tapered;
    }
    out
}

/// Unclamped DFT of an even lag sequence on the non-negative frequency half.
#[derive(Debug, Clone)]
pub struct LagTransform {
    pub frequencies: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub padded_len: usize,
    pub sampling_frequency: f64,
}

impl LagTransform {
    /// Largest |imaginary part| relative to the largest real power.
    pub fn imag_residue(&self) -> f64 {
        let peak = self.re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let imag = self.im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            imag / peak
        } else {
            imag
        }
    }

    pub fn into_spectrum(self, kind: SpectrumKind) -> Spectrum {
        Spectrum {
            frequencies: self.frequencies,
            powers: self.re.iter().map(|&v| v.max(0.0)).collect(),
            kind,
            sampling_frequency: Some(self.sampling_frequency),
        }
    }
}

/// Zero-padded length: `oversample * len` rounded up to a power of two.
pub fn padded_length(len: usize, oversample: usize) -> usize {
    (oversample * len).next_power_of_two()
}

/// Transforms a symmetric sequence (centre at `len / 2`) sampled every
/// `slot_size` days.
pub fn lag_transform(symmetric: &[f64], slot_size: f64, oversample: usize) -> Result<LagTransform> {
    if oversample < 1 {
        return Err(Error::InvalidParameter("oversample must be at least 1".into()));
    }
    if symmetric.len() % 2 == 0 {
        return Err(Error::InvalidParameter("lag sequence must have odd length".into()));
    }
    let k_max = symmetric.len() / 2;
    let padded = padded_length(symmetric.len(), oversample);
    let mut buf = vec![Complex::new(0.0, 0.0); padded];
    buf[0] = Complex::new(symmetric[k_max], 0.0);
    for k in 1..=k_max {
        buf[k] = Complex::new(symmetric[k_max + k], 0.0);
        buf[padded - k] = Complex::new(symmetric[k_max - k], 0.0);
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);

    let fs = 1.0 / slot_size;
    let half = padded / 2;
    Ok(LagTransform {
        frequencies: (0..=half).map(|i| i as f64 * fs / padded as f64).collect(),
        re: buf[..=half].iter().map(|c| c.re).collect(),
        im: buf[..=half].iter().map(|c| c.im).collect(),
        padded_len: padded,
        sampling_frequency: fs,
    })
}

/// Spectral density of a slotted series: a CSD for correntropy input, a PSD
/// for autocorrelation input. Negative real parts are clamped to zero.
pub fn csd(series: &SlottedSeries, oversample: usize) -> Result<Spectrum> {
    let kind = match series.kind {
        SeriesKind::Correntropy => SpectrumKind::Csd,
        SeriesKind::Correlation => SpectrumKind::Psd,
    };
    Ok(lag_transform(&center_and_window(series), series.slot_size, oversample)?.into_spectrum(kind))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub period: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSet {
    /// Sorted by power, highest first.
    pub entries: Vec<Peak>,
    pub n_requested: usize,
}

/// The `n` highest strict local maxima whose period lies in
/// `[min_period, max_period]`.
pub fn extract_peaks(spectrum: &Spectrum, n: usize, min_period: f64, max_period: f64) -> PeakSet {
    let p = &spectrum.powers;
    let f = &spectrum.frequencies;
    let mut entries: Vec<Peak> = (1..p.len().saturating_sub(1))
        .filter(|&i| f[i] > 0.0 && p[i] > p[i - 1] && p[i] > p[i + 1])
        .map(|i| Peak {
            frequency: f[i],
            period: 1.0 / f[i],
            power: p[i],
        })
        .filter(|pk| pk.period >= min_period && pk.period <= max_period)
        .collect();
    entries.sort_by(|a, b| b.power.total_cmp(&a.power).then(a.frequency.total_cmp(&b.frequency)));
    entries.truncate(n);
    PeakSet {
        entries,
        n_requested: n,
    }
}
