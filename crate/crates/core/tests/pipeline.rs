use std::f64::consts::PI;

use slotcorr::baselines::{lomb_scargle_peaks, FrequencyGrid};
use slotcorr::ip::WindowTag;
use slotcorr::lightcurve::phase_of;
use slotcorr::pipeline::log_sigma_grid;
use slotcorr::synthetic::{generate, Sampling, SyntheticSpec, Template};
use slotcorr::*;

fn spec(template: Template, period: f64, noise: f64, sampling: Sampling, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        template,
        period,
        amplitude: 1.0,
        noise_sigma: noise,
        n_samples: 1000,
        time_span: 2700.0,
        sampling,
        seed,
    }
}

fn sinusoid_fixture() -> LightCurve {
    generate(&spec(Template::Sinusoid, 3.7, 0.0, Sampling::UniformRandom, 11)).unwrap().0
}

fn eb_fixture() -> LightCurve {
    generate(&spec(Template::EclipsingBinary, 14.0, 0.1, Sampling::Seasonal, 1)).unwrap().0
}

fn small_config() -> PipelineConfig {
    PipelineConfig {
        sigma_grid: vec![0.1, 0.5, 2.0],
        ..PipelineConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b
}

#[test]
fn noiseless_sinusoid_recovered() {
    let r = estimate_period(&sinusoid_fixture(), &PipelineConfig::default()).unwrap();
    assert!(rel(r.best.period, 3.7) < 0.005, "{}", r.best.period);
    let best = r.candidates.iter().map(|c| c.score).fold(f64::MIN, f64::max);
    assert_eq!(r.best.score, best);
}

#[test]
fn eclipsing_binary_full_period_beats_half() {
    let c = eb_fixture();
    let r = estimate_period(&c, &PipelineConfig::default()).unwrap();
    assert!(rel(r.best.period, 14.0) < 0.005, "{}", r.best.period);
    assert_eq!(classify_period(r.best.period, 14.0), PeriodClass::Hit);

    // Q at the truth beats its half and double on the normalized curve
    let z = normalize(&c).unwrap();
    let k = KernelConfig::new(0.5).unwrap();
    let q = |p| q_metric(&z, p, &k, &BinningMode::default()).unwrap();
    assert!(q(14.0) > q(7.0));
    assert!(q(14.0) > q(28.0));
}

#[test]
fn white_noise_runs_and_scores_low() {
    let noise = generate(&spec(Template::Sinusoid, 5.0, 1.0, Sampling::Seasonal, 4)).unwrap().0;
    let flat = noise.with_magnitudes(
        noise.times().iter().zip(noise.magnitudes()).map(|(&t, &m)| m - (2.0 * PI * phase_of(t, 5.0)).sin()).collect(),
    ).unwrap();
    let cfg = small_config();
    let r = estimate_period(&flat, &cfg).unwrap();
    let sin = estimate_period(&sinusoid_fixture(), &cfg).unwrap();
    let eb = estimate_period(&eb_fixture(), &cfg).unwrap();
    assert!(r.best.score < sin.best.score);
    assert!(r.best.score < eb.best.score);
}

#[test]
fn deterministic_reports() {
    let c = eb_fixture();
    let cfg = small_config();
    let a = estimate_period(&c, &cfg).unwrap();
    let b = estimate_period(&c, &cfg).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.candidates, b.candidates);
    assert_eq!(a.provenance, b.provenance);
    let (mut ta, mut tb) = (Vec::new(), Vec::new());
    a.write_text(&cfg, &mut ta).unwrap();
    b.write_text(&cfg, &mut tb).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn adding_sigma_never_lowers_best_score() {
    let c = generate(&spec(Template::Sinusoid, 23.3, 0.5, Sampling::Seasonal, 9)).unwrap().0;
    let grid = log_sigma_grid(0.01, 5.0, 6);
    let mut last = f64::MIN;
    for n in 1..=grid.len() {
        let cfg = PipelineConfig {
            sigma_grid: grid[..n].to_vec(),
            ..PipelineConfig::default()
        };
        let r = estimate_period(&c, &cfg).unwrap();
        assert!(r.best.score >= last, "{n}: {} < {last}", r.best.score);
        last = r.best.score;
    }
}

#[test]
fn best_inside_band_and_both_windows_in_provenance() {
    let c = eb_fixture();
    let cfg = PipelineConfig {
        period_min: 9.0,
        period_max: 30.0,
        ..small_config()
    };
    let r = estimate_period(&c, &cfg).unwrap();
    assert!(r.best.period >= cfg.period_min && r.best.period <= cfg.period_max);
    assert!(r.provenance.iter().any(|s| s.window == WindowTag::Full));
    assert!(r.provenance.iter().any(|s| s.window == WindowTag::DenseHalf));
    assert!(r.provenance.iter().all(|s| s.seed_period >= 9.0 && s.seed_period <= 30.0));
}

#[test]
fn ls_method_reports_periodogram_peak() {
    let c = sinusoid_fixture();
    let cfg = PipelineConfig::default();
    let r = estimate_with_method(&c, Method::LombScargle, &cfg).unwrap();
    assert_eq!(r.method.to_string(), "ls");
    let z = normalize(&c).unwrap();
    let grid = FrequencyGrid::for_band(cfg.period_min, cfg.period_max, z.time_span()).unwrap();
    let top = lomb_scargle_peaks(&z, &grid, 1).unwrap()[0];
    assert_eq!(r.best.period, top.period);
    assert!(rel(r.best.period, 3.7) < 0.005);
}

/// A sinusoid's sampling and noise with the eclipse template swapped in;
/// the secondary dip is nearly as deep as the primary, so the string
/// length at half the period is the shorter one.
fn near_equal_eclipses() -> LightCurve {
    let (c, p) = generate(&spec(Template::Sinusoid, 14.0, 0.2, Sampling::Seasonal, 7)).unwrap();
    let mags = c
        .times()
        .iter()
        .zip(c.magnitudes())
        .map(|(&t, &m)| {
            let ph = phase_of(t, p);
            let dip = |centre: f64| {
                let d = (ph - centre).abs();
                (-0.5 * (d.min(1.0 - d) / 0.07).powi(2)).exp()
            };
            -(dip(0.0) + 0.95 * dip(0.5)) + (m - (2.0 * PI * ph).sin())
        })
        .collect();
    c.with_magnitudes(mags).unwrap()
}

#[test]
fn ip_reranking_fixes_string_length_half_period() {
    let c = near_equal_eclipses();
    let cfg = PipelineConfig {
        period_min: 2.0,
        period_max: 20.0,
        ..PipelineConfig::default()
    };
    let plain = estimate_with_method(&c, Method::Sllk, &cfg).unwrap();
    let ip = estimate_with_method(&c, Method::SllkIp, &cfg).unwrap();
    assert!(rel(plain.best.period, 7.0) < 0.005, "{}", plain.best.period);
    assert!(rel(ip.best.period, 14.0) < 0.005, "{}", ip.best.period);
    assert_eq!(ip.method.to_string(), "sllk+ip");
}

#[test]
fn correlation_top_peak_is_half_period() {
    let r = estimate_with_method(&eb_fixture(), Method::CorrelationIp, &PipelineConfig::default()).unwrap();
    let top: Vec<f64> = r.provenance.iter().filter(|s| s.rank == 0).map(|s| s.seed_period).collect();
    assert!(!top.is_empty());
    for p in top {
        assert!(rel(p, 7.0) < 0.005, "{p}");
    }
}
