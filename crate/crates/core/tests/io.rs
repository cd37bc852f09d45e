use std::io::Cursor;

use slotcorr::lightcurve::{read_lightcurve, save_lightcurve, write_lightcurve};
use slotcorr::*;

fn parse(text: &str) -> Result<LightCurve> {
    read_lightcurve(Cursor::new(text), "t", "inline")
}

#[test]
fn two_line_file() {
    let c = parse("0.0 10.0 0.01\n1.0 10.5 0.01\n").unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c.times(), &[0.0, 1.0]);
    assert_eq!(c.magnitudes(), &[10.0, 10.5]);
}

#[test]
fn unordered_lines_are_sorted() {
    let a = parse("# header\n2.0 3 0.1\n0.0,1,0.1\n1.0\t2\t0.1\n").unwrap();
    assert_eq!(a.times(), &[0.0, 1.0, 2.0]);
    assert_eq!(a.magnitudes(), &[1.0, 2.0, 3.0]);
}

#[test]
fn duplicate_times_collapse() {
    let c = parse("0 1 0.3\n1 2 0.1\n1 4 0.2\n").unwrap();
    assert_eq!(c.times(), &[0.0, 1.0]);
    assert_eq!(c.magnitudes(), &[1.0, 3.0]);
    assert!((c.errors()[1] - (0.025f64).sqrt()).abs() < 1e-15);
}

#[test]
fn bad_magnitude_names_its_line() {
    let text = "# c\n0 1 0.1\n1 1 0.1\n2 1 0.1\n\n3 1 0.1\n4 abc 0.1\n5 1 0.1\n";
    let err = parse(text).unwrap_err();
    match &err {
        Error::Parse { line, .. } => assert_eq!(*line, 7),
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains('7'));
}

#[test]
fn too_few_samples_and_short_lines() {
    assert!(matches!(parse("0 1 0.1\n"), Err(Error::InsufficientData(_))));
    assert!(matches!(parse("0 1 0.1\n1 1 0.1\n2 1\n"), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(load_lightcurve("/nonexistent/x.dat"), Err(Error::Io { .. })));
}

#[test]
fn write_then_read_round_trips() {
    let times: Vec<f64> = (0..200).map(|i| 48000.0 + i as f64 * 1.37 + (i as f64).sqrt() * 1e-7).collect();
    let mags: Vec<f64> = (0..200).map(|i| (i as f64 * 0.7).sin() * 0.123_456_789_012).collect();
    let errs: Vec<f64> = (0..200).map(|i| 0.01 + i as f64 * 1e-5).collect();
    let c = LightCurve::new("rt", times, mags, errs).unwrap();

    let mut buf = Vec::new();
    write_lightcurve(&c, &mut buf).unwrap();
    let back = read_lightcurve(Cursor::new(buf), "rt", "mem").unwrap();
    assert_eq!(back, c);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.dat");
    save_lightcurve(&c, &path).unwrap();
    assert_eq!(load_lightcurve(&path).unwrap(), c);
}

#[test]
fn normalize_examples() {
    let c = LightCurve::new("n", vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
    let z = normalize(&c).unwrap();
    assert_eq!(z.magnitudes(), &[-1.0, 0.0, 1.0]);
    assert_eq!(c.magnitudes(), &[1.0, 2.0, 3.0]);
    let flat = LightCurve::new("f", vec![0.0, 1.0, 2.0], vec![4.0; 3], vec![0.1; 3]).unwrap();
    assert!(matches!(normalize(&flat), Err(Error::DegenerateCurve(_))));
}

#[test]
fn fold_examples() {
    let c = LightCurve::from_samples("f", vec![0.0, 1.5, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
    let f = fold(&c, 1.0).unwrap();
    assert_eq!(f.phases, vec![0.0, 0.0, 0.5]);
    assert!(fold(&c, 0.0).is_err());
    let long = fold(&c, 4.0).unwrap();
    assert_eq!(long.source_index, vec![0, 1, 2]);
}

#[test]
fn dense_window_examples() {
    let even = LightCurve::from_samples("u", (0..100).map(|i| i as f64).collect(), vec![0.0; 100]).unwrap();
    assert_eq!(select_dense_window(&even).times()[0], 0.0);
    let mut t: Vec<f64> = (0..5).map(|i| i as f64 * 10.0).collect();
    t.extend((0..50).map(|i| 50.0 + i as f64));
    let late = LightCurve::from_samples("l", t, vec![0.0; 55]).unwrap();
    let w = select_dense_window(&late);
    // span 99, width 49.5: the best window starts at day 49
    assert_eq!(w.times()[0], 50.0);
    assert_eq!(w.len(), 49);
}
