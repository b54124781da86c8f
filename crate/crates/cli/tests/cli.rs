use polya_core::io::{read_samples_file, read_table};
use std::path::Path;
use std::process::{Command, Output};

fn polya(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polya"))
        .args(args)
        .env("POLYA_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn table(path: &Path) -> polya_core::io::Table {
    read_table(std::fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let o = polya(
            dir.path(),
            &["simulate", "--kind", "wdt", "--replicas", "500", "--steps", "200", "--seed", seed, "-o", path.to_str().unwrap()],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv", "7"), run("b.csv", "7"));
    assert_ne!(run("a.csv", "7"), run("c.csv", "8"));
}

#[test]
fn invalid_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // S = 6 with m = 3 is not a large urn.
    let o = polya(dir.path(), &["moments", "--m", "3", "--S", "6", "--b", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = polya(dir.path(), &["simulate", "--kind", "xi", "--replicas", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mixture_without_samples_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let o = polya(dir.path(), &["density", "--method", "mixture"]);
    assert_eq!(o.status.code(), Some(6));
    let missing = dir.path().join("nope.csv");
    let o = polya(
        dir.path(),
        &["density", "--method", "mixture", "--samples", missing.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn moments_first_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = polya(dir.path(), &["moments", "--order", "10"]);
    assert!(o.status.success());
    let t = table(&dir.path().join("moments_4_7_1.csv"));
    assert_eq!(t.rows.len(), 11);
    assert_eq!(&t.rows[0][..3], &[0.0, 1.0, 1.0]);
    assert!((t.rows[1][1] - 1.0 / 7.0).abs() < 1e-15);
    assert!((t.rows[1][2] + 2.0 / 7.0).abs() < 1e-15);
    assert!(stdout(&o).contains("zero radius"));
}

#[test]
fn charfun_row_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let o = polya(
        dir.path(),
        &["charfun", "--alpha", "2", "--beta", "1", "--min", "-1", "--max", "1", "--count", "5"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&dir.path().join("charfun_4_7_1.csv"));
    assert_eq!(t.rows.len(), 5);
    assert_eq!(t.rows[2], vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    // Conjugate symmetry between x = -1 and x = 1.
    assert_eq!(t.rows[0][1], t.rows[4][1]);
    assert_eq!(t.rows[0][2], -t.rows[4][2]);
}

#[test]
fn fourier_density_reports_integral() {
    let dir = tempfile::tempdir().unwrap();
    let o = polya(dir.path(), &["density", "--count", "100", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("integral over grid")).unwrap();
    let v: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((0.99..1.01).contains(&v), "{v}");
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("density_fourier_4_7_1.json")).unwrap())
            .unwrap();
    assert_eq!(json["x"].as_array().unwrap().len(), 200);
}

#[test]
fn mixture_reads_simulated_samples() {
    let dir = tempfile::tempdir().unwrap();
    let o = polya(
        dir.path(),
        &["simulate", "--kind", "wdt", "--replicas", "2000", "--steps", "300", "--completion", "branching"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let samples = dir.path().join("samples_wdt_4_7_1.csv");
    assert_eq!(read_samples_file(&samples).unwrap().values.len(), 2000);
    let o = polya(
        dir.path(),
        &["density", "--method", "mixture", "--samples", samples.to_str().unwrap(), "--count", "50"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = table(&dir.path().join("density_mixture_4_7_1.csv"));
    assert_eq!(t.meta("method").unwrap(), "mixture");
    assert!(t.column("p").unwrap().iter().all(|p| *p >= 0.0));
}

#[test]
fn quick_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = polya(dir.path(), &["validate", "--quick"]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("validate_4_7_1.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["replicas"], 100_000);
}
