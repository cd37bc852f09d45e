//! Period estimation for noisy, unevenly sampled light curves.
//!
//! The main estimator computes slotted correntropy over lag slots, turns it
//! into a correntropy spectral density, and picks among the spectral peaks
//! with an information-potential metric evaluated on the folded curve.
//! Classical baselines (Lomb-Scargle, analysis of variance, Lafler-Kinman
//! string length) and a synthetic benchmark harness are included.

pub mod baselines;
pub mod benchkit;
pub mod error;
mod fastmath;
pub mod ip;
pub mod kernel;
pub mod lightcurve;
pub mod pipeline;
pub mod slotted;
pub mod spectral;
pub mod stats;
pub mod synthetic;

pub use baselines::{aov_statistic, lomb_scargle, scan_extremum, sllk_string_length, FrequencyGrid, PeriodGrid, Statistic};
pub use benchkit::{classify_period, evaluate_batch, EvaluationOutcome, PeriodClass};
pub use error::{Error, Result};
pub use ip::{
    fine_tune, fine_tune_grid, information_potential, q_metric, BinningMode, CandidateOrigin, DynamicBinningConfig,
    LatticeTuner, PeriodCandidate, QEvaluator, WindowTag,
};
pub use kernel::{gaussian_kernel, KernelConfig};
pub use lightcurve::{fold, load_lightcurve, normalize, select_dense_window, FoldedCurve, LightCurve};
pub use pipeline::{estimate_period, estimate_with_method, EstimationReport, Method, PipelineConfig, TuningSigma};
pub use slotted::{even_correntropy, slotted_autocorrelation, slotted_correntropy, SeriesKind, SlottedSeries};
pub use spectral::{csd, extract_peaks, PeakSet, Spectrum, SpectrumKind};
