use polya_core::charfun::{density_fourier, CharFun, DensityOptions};
use polya_core::io::*;
use polya_core::moments::moment_recursion;
use polya_core::params::Composition;
use polya_core::simulate::{run_replicas, SampleKind};
use polya_core::validate_params;
use proptest::prelude::*;

fn csv_roundtrip(t: &Table) -> Table {
    let mut buf = Vec::new();
    write_table(&mut buf, t).unwrap();
    read_table(buf.as_slice()).unwrap()
}

proptest! {
    #[test]
    fn floats_survive_csv(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..50)) {
        let t = Table {
            metadata: vec![("kind".into(), "test".into())],
            header: vec!["x".into()],
            rows: xs.iter().map(|&x| vec![x]).collect(),
        };
        let back = csv_roundtrip(&t);
        prop_assert_eq!(back.column("x").unwrap(), xs);
    }
}

#[test]
fn density_csv_and_json() {
    let p = validate_params(4, 7, 1).unwrap();
    let d = density_fourier(&p, &[-2.0, -0.5, 0.5, 2.0], DensityOptions::default()).unwrap();
    let back = density_from_table(&csv_roundtrip(&density_table(&d))).unwrap();
    assert_eq!(back, d);
    let mut buf = Vec::new();
    write_density(&mut buf, &d, Format::Json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    assert_eq!(v["method"], "fourier");
    assert_eq!(v["x"].as_array().unwrap().len(), 4);
}

#[test]
fn cf_csv_and_json() {
    let p = validate_params(4, 7, 1).unwrap();
    let t = CharFun::new(&p)
        .unwrap()
        .tabulate(&[-1.0, 0.0, 0.5, 3.0], Composition::new(1, 1))
        .unwrap();
    assert_eq!(cf_from_table(&csv_roundtrip(&cf_table(&t))).unwrap(), t);
    let mut buf = Vec::new();
    write_cf(&mut buf, &t, Format::Json).unwrap();
    let back: polya_core::charfun::CfTable = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, t);
}

#[test]
fn moments_csv_columns() {
    let p = validate_params(4, 7, 1).unwrap();
    let m = moment_recursion(&p, 6).unwrap();
    let mut buf = Vec::new();
    write_moments(&mut buf, &m, Format::Csv).unwrap();
    let t = read_table(buf.as_slice()).unwrap();
    assert_eq!(t.meta("order").unwrap(), "6");
    assert_eq!(t.column("a_n").unwrap(), m.a_seq);
    assert_eq!(t.column("b_n").unwrap(), m.b_seq);
    assert_eq!(t.column("n").unwrap(), (0..=6).map(f64::from).collect::<Vec<_>>());
}

#[test]
fn samples_both_formats() {
    let p = validate_params(4, 7, 1).unwrap();
    let s = run_replicas(&p, Composition::new(1, 0), SampleKind::Xi, 50, 20, 3);
    for fmt in [Format::Csv, Format::Json] {
        let mut buf = Vec::new();
        write_samples(&mut buf, &s, fmt).unwrap();
        assert_eq!(read_samples(buf.as_slice()).unwrap(), s);
    }
}
