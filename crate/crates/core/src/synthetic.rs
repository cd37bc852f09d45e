//! Synthetic light curves with known periods.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::lightcurve::{phase_of, LightCurve};

/// Gaussian width (in phase) of each eclipse of the eclipsing-binary template.
pub const ECLIPSE_WIDTH: f64 = 0.07;
/// Secondary eclipse depth relative to the primary.
pub const SECONDARY_DEPTH: f64 = 0.5;
/// Fraction of the cycle spent rising in the sawtooth template.
pub const SAWTOOTH_RISE: f64 = 0.15;

const YEAR: f64 = 365.25;
const SEASON_GAP: f64 = 120.0;
const NIGHT: f64 = 8.0 / 24.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Sinusoid,
    /// Two Gaussian dips per cycle at phases 0 and 0.5, the second half as
    /// deep as the first.
    EclipsingBinary,
    /// Fast rise, slow decline.
    Sawtooth,
}

impl Template {
    pub fn as_str(&self) -> &'static str {
        match self {
            Template::Sinusoid => "sinusoid",
            Template::EclipsingBinary => "eclipsing-binary",
            Template::Sawtooth => "sawtooth",
        }
    }

    /// Noise-free shape at `phase` in `[0, 1)`, unit amplitude.
    pub fn shape(&self, phase: f64) -> f64 {
        match self {
            Template::Sinusoid => (2.0 * PI * phase).sin(),
            Template::EclipsingBinary => {
                let dip = |centre: f64| {
                    let mut d = (phase - centre).abs();
                    d = d.min(1.0 - d);
                    (-0.5 * (d / ECLIPSE_WIDTH).powi(2)).exp()
                };
                -(dip(0.0) + SECONDARY_DEPTH * dip(0.5))
            }
            Template::Sawtooth => {
                if phase < SAWTOOTH_RISE {
                    phase / SAWTOOTH_RISE - 0.5
                } else {
                    0.5 - (phase - SAWTOOTH_RISE) / (1.0 - SAWTOOTH_RISE)
                }
            }
        }
    }
}

impl std::str::FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sinusoid" => Ok(Template::Sinusoid),
            "eclipsing-binary" | "eb" => Ok(Template::EclipsingBinary),
            "sawtooth" => Ok(Template::Sawtooth),
            _ => Err(Error::InvalidParameter(format!(
                "unknown template {s:?} (expected sinusoid, eclipsing-binary or sawtooth)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    UniformRandom,
    /// One observation per chosen night, inside an 8-hour window, with a
    /// 120-day gap every year.
    Seasonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub template: Template,
    pub period: f64,
    pub amplitude: f64,
    pub noise_sigma: f64,
    pub n_samples: usize,
    pub time_span: f64,
    pub sampling: Sampling,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_span > 0.0 && self.time_span.is_finite()) {
            return Err(Error::InvalidParameter("time span must be positive".into()));
        }
        if !(self.period > 0.0 && self.period <= self.time_span / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "period {} must lie in (0, span/3 = {}]",
                self.period,
                self.time_span / 3.0
            )));
        }
        if self.n_samples < 50 {
            return Err(Error::InvalidParameter("at least 50 samples required".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter("noise sigma must be non-negative".into()));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!("{}-{}", self.template.as_str(), self.seed)
    }
}

fn observable_nights(span: f64) -> Vec<u32> {
    (0..span.floor() as u32)
        .filter(|&d| (d as f64 + NIGHT) <= span && (d as f64).rem_euclid(YEAR) < YEAR - SEASON_GAP)
        .collect()
}

fn sample_times(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = spec.n_samples;
    let mut times: Vec<f64> = match spec.sampling {
        Sampling::UniformRandom => (0..n).map(|_| rng.gen::<f64>() * spec.time_span).collect(),
        Sampling::Seasonal => {
            let nights = observable_nights(spec.time_span);
            if nights.is_empty() {
                return Err(Error::InvalidParameter("time span holds no observable night".into()));
            }
            // spread observations over distinct nights while there are enough
            let mut chosen: Vec<u32> = if nights.len() >= n {
                sample(rng, nights.len(), n).into_iter().map(|i| nights[i]).collect()
            } else {
                (0..n).map(|_| nights[rng.gen_range(0..nights.len())]).collect()
            };
            chosen.sort_unstable();
            chosen
                .into_iter()
                .map(|d| d as f64 + rng.gen::<f64>() * NIGHT)
                .collect()
        }
    };
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() != n {
        return Err(Error::InsufficientData("duplicate sampling times drawn".into()));
    }
    Ok(times)
}

/// Draws a curve from `spec`. Output is fully determined by the spec,
/// including its seed. Returns the curve and its true period.
pub fn generate(spec: &SyntheticSpec) -> Result<(LightCurve, f64)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let times = sample_times(spec, &mut rng)?;
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let magnitudes: Vec<f64> = times
        .iter()
        .map(|&t| {
            let clean = spec.amplitude * spec.template.shape(phase_of(t, spec.period));
            if spec.noise_sigma > 0.0 {
                clean + noise.sample(&mut rng)
            } else {
                clean
            }
        })
        .collect();
    let errors = vec![spec.noise_sigma; times.len()];
    let curve = LightCurve::new(spec.id(), times, magnitudes, errors)?;
    Ok((curve, spec.period))
}

/// Specs for a batch of curves with periods log-uniform in
/// `[min_period, max_period]`; curve `i` uses seed `base_seed + i`.
pub fn suite(
    template: Template,
    count: usize,
    min_period: f64,
    max_period: f64,
    base: &SyntheticSpec,
    base_seed: u64,
) -> Vec<SyntheticSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed ^ 0x5eed_5eed);
    (0..count)
        .map(|i| {
            let u: f64 = rng.gen();
            let period = (min_period.ln() + u * (max_period.ln() - min_period.ln())).exp();
            SyntheticSpec {
                template,
                period,
                seed: base_seed + i as u64,
                ..base.clone()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(template: Template, sampling: Sampling) -> SyntheticSpec {
        SyntheticSpec {
            template,
            period: 3.7,
            amplitude: 1.0,
            noise_sigma: 0.0,
            n_samples: 300,
            time_span: 900.0,
            sampling,
            seed: 11,
        }
    }

    #[test]
    fn noiseless_sinusoid_matches_template() {
        let s = spec(Template::Sinusoid, Sampling::UniformRandom);
        let (c, p) = generate(&s).unwrap();
        assert_eq!(p, 3.7);
        for (t, m) in c.times().iter().zip(c.magnitudes()) {
            assert!((m - (2.0 * PI * t / 3.7).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_curve() {
        let s = spec(Template::EclipsingBinary, Sampling::Seasonal);
        let a = generate(&s).unwrap().0;
        let b = generate(&s).unwrap().0;
        assert_eq!(a, b);
        let other = generate(&SyntheticSpec { seed: 12, ..s }).unwrap().0;
        assert_ne!(a, other);
    }

    #[test]
    fn seasonal_times_fall_in_night_windows_outside_gap() {
        let s = SyntheticSpec {
            n_samples: 1000,
            time_span: 2700.0,
            ..spec(Template::Sinusoid, Sampling::Seasonal)
        };
        let (c, _) = generate(&s).unwrap();
        assert_eq!(c.len(), 1000);
        for &t in c.times() {
            assert!(t - t.floor() <= NIGHT);
            assert!(t.floor().rem_euclid(YEAR) < YEAR - SEASON_GAP);
            assert!(t <= 2700.0);
        }
    }

    #[test]
    fn eclipse_depths() {
        let t = Template::EclipsingBinary;
        assert!((t.shape(0.0) + 1.0).abs() < 1e-6);
        assert!((t.shape(0.5) + 0.5).abs() < 1e-6);
        assert!(t.shape(0.25).abs() < 5e-3);
    }

    #[test]
    fn spec_validation() {
        let s = spec(Template::Sinusoid, Sampling::UniformRandom);
        assert!(SyntheticSpec { period: 301.0, ..s.clone() }.validate().is_err());
        assert!(SyntheticSpec { n_samples: 49, ..s.clone() }.validate().is_err());
        assert!(SyntheticSpec { noise_sigma: -1.0, ..s }.validate().is_err());
    }

    #[test]
    fn suite_periods_within_bounds() {
        let base = spec(Template::Sinusoid, Sampling::UniformRandom);
        let specs = suite(Template::Sinusoid, 40, 0.5, 100.0, &base, 7);
        assert_eq!(specs.len(), 40);
        assert!(specs.iter().all(|s| s.period >= 0.5 && s.period <= 100.0));
        assert_eq!(specs[3].seed, 10);
    }
}
