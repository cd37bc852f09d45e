use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use slotcorr::baselines::{lomb_scargle, scan_statistic};
use slotcorr::benchkit::{eclipsing_suite, sinusoid_suite, BatchResult};
use slotcorr::pipeline::{format_period, log_sigma_grid};
use slotcorr::synthetic::generate;
use slotcorr::{
    csd, evaluate_batch, extract_peaks, load_lightcurve, normalize, select_dense_window, slotted_autocorrelation,
    slotted_correntropy, estimate_with_method, BinningMode, Error, EstimationReport, FrequencyGrid, KernelConfig, LightCurve, Method,
    PeriodGrid, PipelineConfig, Statistic, TuningSigma,
};

#[derive(Parser)]
#[command(name = "slotcorr", version, about = "Period estimation for unevenly sampled light curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the period of each input curve.
    Estimate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "correntropy+ip")]
        method: String,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the slotted series, its spectrum and the spectral peaks of one curve.
    Spectrum {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SpectrumChoice::Csd)]
        kind: SpectrumChoice,
        /// Kernel size for the CSD.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = WindowChoice::Full)]
        window: WindowChoice,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One CSD per kernel size in the sigma grid, plus an index file.
    Sweep {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = WindowChoice::Full)]
        window: WindowChoice,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Hit, multiple and miss rates of several methods on a labelled batch.
    Bench {
        /// Built-in synthetic suite.
        #[arg(long, value_enum, conflicts_with = "data")]
        suite: Option<SuiteChoice>,
        /// Directory of light curves; needs --truth.
        #[arg(long, requires = "truth")]
        data: Option<PathBuf>,
        /// Whitespace-separated `id period` lines.
        #[arg(long, requires = "data")]
        truth: Option<PathBuf>,
        /// Comma-separated method names.
        #[arg(long, default_value = "correntropy+ip")]
        methods: String,
        /// Use only the first N curves.
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// A baseline statistic over the whole period or frequency grid.
    Baseline {
        input: PathBuf,
        #[arg(long, value_enum)]
        statistic: BaselineChoice,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Comma-separated kernel sizes, ascending. Default: 25 log-spaced values in [0.01, 5].
    #[arg(long, value_parser = parse_sigma_grid)]
    sigma_grid: Option<SigmaGrid>,
    #[arg(long, default_value_t = 0.25)]
    slot_size: f64,
    #[arg(long, default_value_t = 0.1)]
    max_lag_fraction: f64,
    #[arg(long, default_value_t = 10)]
    n_peaks: usize,
    #[arg(long, default_value_t = 0.2)]
    period_min: f64,
    #[arg(long, default_value_t = 200.0)]
    period_max: f64,
    #[arg(long, default_value_t = 8)]
    oversample: usize,
    /// `dynamic` or `fixed:H`.
    #[arg(long, default_value = "dynamic")]
    binning: BinningMode,
    /// Kernel size for fine-tuning correntropy seeds: a number, or `producing`.
    #[arg(long, default_value = "0.5")]
    tuning_sigma: TuningSigma,
    /// Kernel size for the Q re-ranking of baseline candidates.
    #[arg(long, default_value_t = 0.5)]
    ip_sigma: f64,
}

#[derive(Clone)]
struct SigmaGrid(Vec<f64>);

fn parse_sigma_grid(s: &str) -> Result<SigmaGrid, String> {
    let values = s
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("sigma grid is empty".into());
    }
    Ok(SigmaGrid(values))
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig, String> {
        let config = PipelineConfig {
            sigma_grid: self
                .sigma_grid
                .as_ref()
                .map_or_else(|| log_sigma_grid(0.01, 5.0, 25), |g| g.0.clone()),
            slot_size: self.slot_size,
            max_lag_fraction: self.max_lag_fraction,
            n_peaks: self.n_peaks,
            period_min: self.period_min,
            period_max: self.period_max,
            oversample: self.oversample,
            binning: self.binning,
            tuning_sigma: self.tuning_sigma,
            ip_sigma: self.ip_sigma,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Directory for every file the command writes.
    #[arg(long, default_value = "slotcorr-out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Kv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Aligned, human-oriented summary.
    Text,
    /// Line-oriented key-value header with tab-separated tables.
    Kv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectrumChoice {
    Csd,
    Psd,
    Ls,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowChoice {
    Full,
    DenseHalf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteChoice {
    Sinusoid,
    Eclipsing,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineChoice {
    Ls,
    Aov,
    Sllk,
}

/// Bad flags or arguments; exit status 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn parse_methods(list: &str) -> anyhow::Result<Vec<Method>> {
    let methods = list
        .split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(|m| m.parse::<Method>().map_err(|e| usage(e.to_string())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(usage(format!("no methods given; valid methods: {}", Method::names())));
    }
    Ok(methods)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn out_dir(output: &OutputArgs) -> anyhow::Result<&Path> {
    fs::create_dir_all(&output.out).with_context(|| format!("cannot create {}", output.out.display()))?;
    Ok(&output.out)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "curve".into(), |s| s.to_string_lossy().into_owned())
}

fn window_of(curve: &LightCurve, window: WindowChoice) -> anyhow::Result<LightCurve> {
    let z = normalize(curve)?;
    Ok(match window {
        WindowChoice::Full => z,
        WindowChoice::DenseHalf => select_dense_window(&z),
    })
}

fn write_human(report: &EstimationReport, out: &mut impl Write) -> std::io::Result<()> {
    let best = &report.best;
    writeln!(out, "Curve {} ({} samples, {} rejected, span {} d)", report.curve_id, report.n_samples, report.n_rejected, report.time_span)?;
    writeln!(out, "Method {}", report.method)?;
    writeln!(out, "Best period {} d, score {}", format_period(best.period), best.score)?;
    writeln!(out)?;
    writeln!(out, "{:>20}  {:>22}  {:<14} {:<11} {:>10}", "period", "score", "origin", "window", "sigma")?;
    for c in &report.candidates {
        writeln!(
            out,
            "{:>20}  {:>22}  {:<14} {:<11} {:>10}",
            format_period(c.period),
            c.score,
            c.origin.as_str(),
            c.window.as_str(),
            c.kernel_sigma.map_or_else(|| "-".into(), |s| s.to_string())
        )?;
    }
    Ok(())
}

fn estimate(inputs: &[PathBuf], method: &str, config: &PipelineConfig, output: &OutputArgs) -> anyhow::Result<bool> {
    let method: Method = method.parse().map_err(|e: Error| usage(e.to_string()))?;
    let mut stems = BTreeSet::new();
    for p in inputs {
        if !stems.insert(file_stem(p)) {
            return Err(usage(format!("two inputs share the file name {:?}", file_stem(p))));
        }
    }
    let dir = out_dir(output)?;
    let ext = match output.format {
        Format::Kv => "report",
        Format::Text => "txt",
    };

    let mut sorted: Vec<&PathBuf> = inputs.iter().collect();
    sorted.sort();
    let mut summary = create(&dir.join("summary.tsv"))?;
    writeln!(summary, "input\tcurve\tmethod\tstatus\tbest_period\tbest_score\tdetail")?;
    let mut all_ok = true;
    for path in sorted {
        let start = Instant::now();
        let result = load_lightcurve(path).and_then(|c| estimate_with_method(&c, method, config));
        match result {
            Ok(report) => {
                let file = dir.join(format!("{}.{ext}", file_stem(path)));
                let mut w = create(&file)?;
                match output.format {
                    Format::Kv => report.write_text(config, &mut w)?,
                    Format::Text => write_human(&report, &mut w)?,
                }
                w.flush()?;
                writeln!(
                    summary,
                    "{}\t{}\t{}\tok\t{}\t{}\t{}",
                    path.display(),
                    report.curve_id,
                    method,
                    format_period(report.best.period),
                    report.best.score,
                    file.file_name().unwrap().to_string_lossy()
                )?;
                eprintln!(
                    "{}: best {} d ({} Q evaluations) in {:.2?}",
                    path.display(),
                    format_period(report.best.period),
                    report.q_evaluations,
                    start.elapsed()
                );
            }
            Err(e) => {
                all_ok = false;
                let detail = e.to_string().replace(['\t', '\n'], " ");
                writeln!(summary, "{}\t{}\t{}\terror\t-\t-\t{}", path.display(), file_stem(path), method, detail)?;
                eprintln!("{}: error: {detail}", path.display());
            }
        }
    }
    summary.flush()?;
    Ok(all_ok)
}

fn spectrum(
    input: &Path,
    kind: SpectrumChoice,
    sigma: f64,
    window: WindowChoice,
    config: &PipelineConfig,
    output: &OutputArgs,
) -> anyhow::Result<bool> {
    let kernel = KernelConfig::new(sigma).map_err(|e| usage(e.to_string()))?;
    let curve = window_of(&load_lightcurve(input)?, window)?;
    let dir = out_dir(output)?;
    let stem = file_stem(input);
    let spec = match kind {
        SpectrumChoice::Ls => {
            let grid = FrequencyGrid::for_band(config.period_min, config.period_max, curve.time_span())?;
            lomb_scargle(&curve, &grid)?
        }
        SpectrumChoice::Csd | SpectrumChoice::Psd => {
            let max_lag = config.max_lag_fraction * curve.time_span();
            let series = match kind {
                SpectrumChoice::Csd => slotted_correntropy(&curve, &kernel, config.slot_size, max_lag)?,
                _ => slotted_autocorrelation(&curve, config.slot_size, max_lag)?,
            };
            let mut w = create(&dir.join(format!("{stem}.slotted.txt")))?;
            series.write_text(&mut w)?;
            w.flush()?;
            csd(&series, config.oversample)?
        }
    };
    let mut w = create(&dir.join(format!("{stem}.{}.txt", spec.kind.as_str())))?;
    spec.write_text(&mut w)?;
    w.flush()?;

    let peaks = extract_peaks(&spec, config.n_peaks, config.period_min, config.period_max);
    let mut w = create(&dir.join(format!("{stem}.peaks.tsv")))?;
    writeln!(w, "rank\tperiod\tfrequency\tpower")?;
    for (i, p) in peaks.entries.iter().enumerate() {
        writeln!(w, "{i}\t{}\t{}\t{}", format_period(p.period), p.frequency, p.power)?;
    }
    w.flush()?;
    Ok(true)
}

fn sweep(input: &Path, window: WindowChoice, config: &PipelineConfig, output: &OutputArgs) -> anyhow::Result<bool> {
    let curve = window_of(&load_lightcurve(input)?, window)?;
    let max_lag = config.max_lag_fraction * curve.time_span();
    let pairs = slotcorr::slotted::SlotPairs::new(curve.times(), config.slot_size, max_lag)?;
    let dir = out_dir(output)?;
    let mut index = create(&dir.join("index.tsv"))?;
    writeln!(index, "file\tsigma")?;
    for (i, &sigma) in config.sigma_grid.iter().enumerate() {
        let series = pairs.correntropy(curve.magnitudes(), &KernelConfig::new(sigma)?)?;
        let spec = csd(&series, config.oversample)?;
        let name = format!("csd_{i:03}.txt");
        let mut w = create(&dir.join(&name))?;
        writeln!(w, "# sigma: {sigma}")?;
        spec.write_text(&mut w)?;
        w.flush()?;
        writeln!(index, "{name}\t{sigma}")?;
    }
    index.flush()?;
    Ok(true)
}

fn read_truth(path: &Path) -> anyhow::Result<BTreeMap<String, f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut truth = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let period = match fields.as_slice() {
            [_, p, ..] => p.parse::<f64>().ok().filter(|p| *p > 0.0 && p.is_finite()),
            _ => None,
        };
        let Some(period) = period else {
            bail!("{}: line {}: expected `id period`", path.display(), i + 1);
        };
        if truth.insert(fields[0].to_string(), period).is_some() {
            bail!("{}: duplicate id {}", path.display(), fields[0]);
        }
    }
    Ok(truth)
}

fn labelled_curves(data: &Path, truth_path: &Path) -> anyhow::Result<Vec<(LightCurve, f64)>> {
    let truth = read_truth(truth_path)?;
    let truth_file = fs::canonicalize(truth_path).ok();
    let mut files: Vec<PathBuf> = fs::read_dir(data)
        .with_context(|| format!("cannot read {}", data.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && fs::canonicalize(p).ok() != truth_file)
        .collect();
    files.sort();
    let mut curves = Vec::new();
    let mut seen = BTreeSet::new();
    for f in files {
        let curve = load_lightcurve(&f)?;
        let id = curve.id().to_string();
        let Some(&period) = truth.get(&id) else {
            bail!("curve {id} ({}) has no entry in {}", f.display(), truth_path.display());
        };
        seen.insert(id);
        curves.push((curve, period));
    }
    if let Some(id) = truth.keys().find(|id| !seen.contains(*id)) {
        bail!("truth id {id} has no light curve in {}", data.display());
    }
    Ok(curves)
}

#[allow(clippy::too_many_arguments)]
fn bench(
    suite: Option<SuiteChoice>,
    data: Option<&Path>,
    truth: Option<&Path>,
    methods: &str,
    count: Option<usize>,
    config: &PipelineConfig,
    output: &OutputArgs,
) -> anyhow::Result<bool> {
    let methods = parse_methods(methods)?;
    let mut curves = match (suite, data, truth) {
        (Some(s), None, None) => {
            let specs = match s {
                SuiteChoice::Sinusoid => sinusoid_suite(),
                SuiteChoice::Eclipsing => eclipsing_suite(),
            };
            specs.iter().map(generate).collect::<slotcorr::Result<Vec<_>>>()?
        }
        (None, Some(d), Some(t)) => labelled_curves(d, t)?,
        _ => return Err(usage("bench needs --suite, or --data with --truth")),
    };
    if let Some(n) = count {
        curves.truncate(n);
    }
    let dir = out_dir(output)?;
    let start = Instant::now();
    let result: BatchResult = evaluate_batch(&curves, &methods, config)?;
    let mut w = create(&dir.join("bench.tsv"))?;
    result.write_table(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join("outcomes.tsv"))?;
    result.write_outcomes(&mut w)?;
    w.flush()?;
    for s in &result.summaries {
        eprintln!("{}: {:.1}% hits, {:.1}% multiples, {:.1}% misses", s.method, s.hits, s.multiples, s.misses);
    }
    eprintln!("{} curves in {:.2?}", curves.len(), start.elapsed());
    Ok(true)
}

fn baseline(input: &Path, statistic: BaselineChoice, config: &PipelineConfig, output: &OutputArgs) -> anyhow::Result<bool> {
    let curve = normalize(&load_lightcurve(input)?)?;
    let dir = out_dir(output)?;
    let stem = file_stem(input);
    let (name, rows): (&str, Vec<(f64, f64)>) = match statistic {
        BaselineChoice::Ls => {
            let grid = FrequencyGrid::for_band(config.period_min, config.period_max, curve.time_span())?;
            let s = lomb_scargle(&curve, &grid)?;
            ("ls", s.frequencies.iter().map(|f| 1.0 / f).zip(s.powers).collect())
        }
        BaselineChoice::Aov | BaselineChoice::Sllk => {
            let grid = PeriodGrid::for_band(config.period_min, config.period_max)?;
            let (name, stat) = match statistic {
                BaselineChoice::Aov => ("aov", Statistic::Aov(BinningMode::Fixed(slotcorr::baselines::AOV_DEFAULT_BINS))),
                _ => ("sllk", Statistic::StringLength),
            };
            (name, grid.periods().zip(scan_statistic(&curve, &grid, stat)?).collect())
        }
    };
    let mut w = create(&dir.join(format!("{stem}.{name}.txt")))?;
    writeln!(w, "# period_days {name}")?;
    for (p, v) in rows {
        writeln!(w, "{} {v}", format_period(p))?;
    }
    w.flush()?;
    Ok(true)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Estimate { inputs, method, pipeline, output } => {
            let config = pipeline.config().map_err(usage)?;
            estimate(&inputs, &method, &config, &output)
        }
        Command::Spectrum { input, kind, sigma, window, pipeline, output } => {
            let config = pipeline.config().map_err(usage)?;
            spectrum(&input, kind, sigma, window, &config, &output)
        }
        Command::Sweep { input, window, pipeline, output } => {
            let config = pipeline.config().map_err(usage)?;
            sweep(&input, window, &config, &output)
        }
        Command::Bench { suite, data, truth, methods, count, pipeline, output } => {
            let config = pipeline.config().map_err(usage)?;
            bench(suite, data.as_deref(), truth.as_deref(), &methods, count, &config, &output)
        }
        Command::Baseline { input, statistic, pipeline, output } => {
            let config = pipeline.config().map_err(usage)?;
            baseline(&input, statistic, &config, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
