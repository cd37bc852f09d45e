use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use slotcorr::lightcurve::save_lightcurve;
use slotcorr::synthetic::{generate, Sampling, SyntheticSpec, Template};

fn slotcorr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slotcorr"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write_curve(dir: &Path, name: &str, period: f64, seed: u64) {
    let spec = SyntheticSpec {
        template: Template::Sinusoid,
        period,
        amplitude: 1.0,
        noise_sigma: 0.2,
        n_samples: 300,
        time_span: 900.0,
        sampling: Sampling::UniformRandom,
        seed,
    };
    let (c, _) = generate(&spec).unwrap();
    save_lightcurve(&c, dir.join(name)).unwrap();
}

const FAST: [&str; 2] = ["--sigma-grid", "0.5"];

#[test]
fn estimate_writes_one_report_and_echoes_method() {
    let dir = tempfile::tempdir().unwrap();
    write_curve(dir.path(), "s.dat", 4.2, 1);
    let out = slotcorr(dir.path(), &["estimate", "s.dat", "--method", "sllk+ip", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("o/s.report")).unwrap();
    assert!(report.contains("method: sllk+ip"));
    let best = report.lines().find_map(|l| l.strip_prefix("best_period: ")).unwrap();
    let digits = best.chars().filter(|c| c.is_ascii_digit()).count();
    assert!(digits >= 9, "{best}");
}

#[test]
fn missing_input_gives_error_record_and_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write_curve(dir.path(), "s.dat", 4.2, 1);
    let mut args = vec!["estimate", "s.dat", "nope.dat", "--out", "o"];
    args.extend(FAST);
    let out = slotcorr(dir.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("o/s.report").exists());
    let summary = fs::read_to_string(dir.path().join("o/summary.tsv")).unwrap();
    assert!(summary.lines().any(|l| l.starts_with("nope.dat\t") && l.contains("\terror\t")));
}

#[test]
fn usage_errors_exit_two_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    write_curve(dir.path(), "s.dat", 4.2, 1);
    for args in [
        vec!["estimate", "s.dat", "--sigma-grid", "", "--out", "o"],
        vec!["estimate", "s.dat", "--sigma-grid", "1,0.5", "--out", "o"],
        vec!["estimate", "s.dat", "--method", "fourier", "--out", "o"],
        vec!["estimate", "s.dat", "--period-min", "-1", "--out", "o"],
        vec!["estimate", "s.dat", "--binning", "fixed:x", "--out", "o"],
        vec!["sweep", "s.dat", "--sigma-grid", ",", "--out", "o"],
        vec!["frobnicate"],
    ] {
        let out = slotcorr(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!dir.path().join("o").exists(), "{args:?}");
    }
    let out = slotcorr(dir.path(), &["bench", "--suite", "sinusoid", "--methods", "ls,fourier", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("correntropy+ip") && msg.contains("sllk+ip"), "{msg}");
}

#[test]
fn sweep_writes_one_file_per_sigma() {
    let dir = tempfile::tempdir().unwrap();
    write_curve(dir.path(), "s.dat", 4.2, 1);
    assert!(slotcorr(dir.path(), &["sweep", "s.dat", "--out", "all"]).status.success());
    let index = fs::read_to_string(dir.path().join("all/index.tsv")).unwrap();
    assert_eq!(index.lines().count(), 26);
    assert_eq!(fs::read_dir(dir.path().join("all")).unwrap().count(), 26);

    assert!(slotcorr(dir.path(), &["sweep", "s.dat", "--sigma-grid", "0.1,1.0", "--out", "two"]).status.success());
    assert_eq!(fs::read_dir(dir.path().join("two")).unwrap().count(), 3);
}

#[test]
fn bench_on_labelled_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    write_curve(&data, "a.dat", 4.2, 1);
    write_curve(&data, "b.dat", 11.5, 2);
    fs::write(dir.path().join("truth.txt"), "# id period\na 4.2\nb 11.5\n").unwrap();
    let mut args = vec!["bench", "--data", "data", "--truth", "truth.txt", "--methods", "correntropy+ip,ls", "--out", "o"];
    args.extend(FAST);
    let out = slotcorr(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("o/bench.tsv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let f: Vec<f64> = row.split('\t').skip(1).take(3).map(|v| v.parse().unwrap()).collect();
        assert!((f.iter().sum::<f64>() - 100.0).abs() <= 0.1 + 1e-9, "{row}");
    }
    let outcomes = fs::read_to_string(dir.path().join("o/outcomes.tsv")).unwrap();
    assert_eq!(outcomes.lines().count(), 5);

    fs::write(dir.path().join("truth.txt"), "a 4.2\nc 11.5\n").unwrap();
    let out = slotcorr(dir.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('b'));
}

#[test]
fn spectrum_and_baseline_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_curve(dir.path(), "s.dat", 4.2, 1);
    assert!(slotcorr(dir.path(), &["spectrum", "s.dat", "--kind", "psd", "--out", "o"]).status.success());
    for f in ["s.slotted.txt", "s.psd.txt", "s.peaks.tsv"] {
        assert!(dir.path().join("o").join(f).exists(), "{f}");
    }
    assert!(slotcorr(dir.path(), &["baseline", "s.dat", "--statistic", "sllk", "--out", "o"]).status.success());
    let text = fs::read_to_string(dir.path().join("o/s.sllk.txt")).unwrap();
    // header plus the 0.2..200 day grid at 1e-3 days
    assert_eq!(text.lines().count(), 1 + 199_801);
}
