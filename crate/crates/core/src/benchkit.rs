//! Scoring period estimates against known truths, and the synthetic suites
//! used to do it.

use std::io::Write;

use crate::error::Result;
use crate::lightcurve::LightCurve;
use crate::pipeline::{estimate_with_method, format_period, Method, PipelineConfig};
use crate::synthetic::{suite, Sampling, SyntheticSpec, Template};

/// Relative tolerance of a hit, and of a match to a multiple.
pub const HIT_TOLERANCE: f64 = 0.005;
/// Largest integer ratio tested for multiples and submultiples.
pub const MAX_MULTIPLE: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodClass {
    Hit,
    Multiple,
    Miss,
}

impl PeriodClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PeriodClass::Hit => "hit",
            PeriodClass::Multiple => "multiple",
            PeriodClass::Miss => "miss",
        }
    }
}

fn within(estimate: f64, target: f64) -> bool {
    ((estimate - target) / target).abs() < HIT_TOLERANCE
}

/// Hit within 0.5% of the truth; multiple within 0.5% of `n * truth` or
/// `truth / n` for some `n` in `2..=10`; miss otherwise. Non-positive or
/// non-finite estimates are misses.
pub fn classify_period(estimated: f64, truth: f64) -> PeriodClass {
    if !(estimated > 0.0 && estimated.is_finite()) {
        return PeriodClass::Miss;
    }
    if within(estimated, truth) {
        return PeriodClass::Hit;
    }
    let multiple = (2..=MAX_MULTIPLE).any(|n| {
        let n = n as f64;
        within(estimated, n * truth) || within(estimated, truth / n)
    });
    if multiple {
        PeriodClass::Multiple
    } else {
        PeriodClass::Miss
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOutcome {
    pub curve_id: String,
    pub true_period: f64,
    /// `None` when the method failed on this curve.
    pub estimated_period: Option<f64>,
    pub class: PeriodClass,
    pub relative_error: Option<f64>,
    pub error: Option<String>,
}

impl EvaluationOutcome {
    pub fn new(curve_id: &str, true_period: f64, estimated: Result<f64>) -> Self {
        match estimated {
            Ok(p) => EvaluationOutcome {
                curve_id: curve_id.to_string(),
                true_period,
                estimated_period: Some(p),
                class: classify_period(p, true_period),
                relative_error: Some((p - true_period).abs() / true_period),
                error: None,
            },
            Err(e) => EvaluationOutcome {
                curve_id: curve_id.to_string(),
                true_period,
                estimated_period: None,
                class: PeriodClass::Miss,
                relative_error: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Percentages for one method, each rounded to 0.1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub n: usize,
    pub hits: f64,
    pub multiples: f64,
    pub misses: f64,
}

fn percent(count: usize, n: usize) -> f64 {
    (1000.0 * count as f64 / n as f64).round() / 10.0
}

pub fn summarize(method: Method, outcomes: &[EvaluationOutcome]) -> MethodSummary {
    let n = outcomes.len().max(1);
    let count = |c: PeriodClass| outcomes.iter().filter(|o| o.class == c).count();
    MethodSummary {
        method,
        n: outcomes.len(),
        hits: percent(count(PeriodClass::Hit), n),
        multiples: percent(count(PeriodClass::Multiple), n),
        misses: percent(count(PeriodClass::Miss), n),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub summaries: Vec<MethodSummary>,
    /// Per method, in batch order.
    pub outcomes: Vec<(Method, Vec<EvaluationOutcome>)>,
}

/// Runs every method on every curve. Failures count as misses and keep
/// their error message.
pub fn evaluate_batch(
    curves: &[(LightCurve, f64)],
    methods: &[Method],
    config: &PipelineConfig,
) -> Result<BatchResult> {
    if curves.is_empty() {
        return Err(crate::error::Error::InvalidParameter("empty batch".into()));
    }
    config.validate()?;
    let mut summaries = Vec::new();
    let mut outcomes = Vec::new();
    for &method in methods {
        let per_curve: Vec<EvaluationOutcome> = curves
            .iter()
            .map(|(curve, truth)| {
                let estimate = estimate_with_method(curve, method, config).map(|r| r.best.period);
                EvaluationOutcome::new(curve.id(), *truth, estimate)
            })
            .collect();
        summaries.push(summarize(method, &per_curve));
        outcomes.push((method, per_curve));
    }
    Ok(BatchResult { summaries, outcomes })
}

impl BatchResult {
    /// Tab-separated `method hits_pct multiples_pct misses_pct n`.
    pub fn write_table<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "method\thits_pct\tmultiples_pct\tmisses_pct\tn")?;
        for s in &self.summaries {
            writeln!(
                out,
                "{}\t{:.1}\t{:.1}\t{:.1}\t{}",
                s.method, s.hits, s.multiples, s.misses, s.n
            )?;
        }
        Ok(())
    }

    /// Tab-separated per-curve outcomes.
    pub fn write_outcomes<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "method\tcurve\ttrue_period\testimated_period\tclass\trelative_error\terror")?;
        for (method, list) in &self.outcomes {
            for o in list {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    method,
                    o.curve_id,
                    format_period(o.true_period),
                    o.estimated_period.map_or_else(|| "-".to_string(), format_period),
                    o.class.as_str(),
                    o.relative_error.map_or_else(|| "-".to_string(), |e| e.to_string()),
                    o.error.as_deref().unwrap_or("-").replace(['\t', '\n'], " ")
                )?;
            }
        }
        Ok(())
    }
}

pub const SUITE_SEED: u64 = 1000;

fn survey_like(template: Template, noise_sigma: f64) -> SyntheticSpec {
    SyntheticSpec {
        template,
        period: 1.0,
        amplitude: 1.0,
        noise_sigma,
        n_samples: 1000,
        time_span: 2700.0,
        sampling: Sampling::Seasonal,
        seed: 0,
    }
}

/// 50 sinusoids, 1000 seasonal samples over 2700 days, noise 0.2,
/// periods log-uniform in [0.5, 100] days.
pub fn sinusoid_suite() -> Vec<SyntheticSpec> {
    suite(Template::Sinusoid, 50, 0.5, 100.0, &survey_like(Template::Sinusoid, 0.2), SUITE_SEED)
}

/// 30 eclipsing binaries with the same sampling, noise 0.1.
pub fn eclipsing_suite() -> Vec<SyntheticSpec> {
    suite(
        Template::EclipsingBinary,
        30,
        0.5,
        100.0,
        &survey_like(Template::EclipsingBinary, 0.1),
        SUITE_SEED,
    )
}
