use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use pulsenet_cli::ConfigFile;
use pulsenet_core::{fixtures, CellSpec, FreeDynamics, Interference, InterferenceKind, NetworkSpec, WeightMatrix};

fn pulsenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulsenet")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, spec: NetworkSpec) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, ConfigFile::new(spec).to_json()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_reproduces_net_a_from_degenerate_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen.json");
    let o = pulsenet(&["gen", "--m", "9", "--delta-min", "0.8", "--delta-max", "0.8", "--out", s(&out)]);
    assert!(o.status.success());
    let cfg = ConfigFile::load(&out).unwrap();
    assert_eq!(cfg.network, fixtures::net_a_spec());
}

#[test]
fn gen_gives_up_when_the_hypothesis_is_impossible() {
    let o = pulsenet(&["gen", "--m", "4", "--delta-min", "0.8", "--delta-max", "0.8", "--ensure-hypothesis", "--max-tries", "50"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no sample out of 50"));
}

#[test]
fn gen_core_mode() {
    let o = pulsenet(&["gen", "--m", "12", "--core", "9", "--delta-min", "0.8", "--delta-max", "0.9", "--seed", "3", "--ensure-hypothesis"]);
    assert!(o.status.success());
    let cfg = ConfigFile::parse(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(cfg.network.core, Some((0..9).collect()));
    assert_eq!(cfg.sim.rng_seed, 3);
    let net = cfg.validated().unwrap();
    assert!(pulsenet_core::model::hypothesis_core(&net).unwrap().satisfied);
}

#[test]
fn gen_is_seeded() {
    let args = ["gen", "--m", "10", "--family", "affine", "--theta-min", "0.8", "--rate-min", "0.5", "--rate-max", "2", "--seed", "9"];
    assert_eq!(pulsenet(&args).stdout, pulsenet(&args).stdout);
}

#[test]
fn check_reports_fixture_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", fixtures::net_a_spec());
    let json = dir.path().join("a.report.json");
    let o = pulsenet(&["check", "--config", s(&a), "--out", s(&json)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("large_cooperativity: true margin=0.75 K=2"));
    assert!(text.contains("transitory_time_bound: 1\n"));
    assert!(text.contains("period_bound: 2.25\n"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["similar_cells"]["satisfied"], true);

    let b = write_config(dir.path(), "b.json", fixtures::net_b_spec());
    let o = pulsenet(&["check", "--config", s(&b)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("similar_cells: false"));
    assert!(text.contains("period_bound: 3.857142857142857"));
    assert_eq!(pulsenet(&["check", "--config", s(&b), "--require", "similar-cells"]).status.code(), Some(1));
}

#[test]
fn malformed_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": \"pulsenet/1\", \"network\": 3}").unwrap();
    assert_eq!(pulsenet(&["check", "--config", s(&bad)]).status.code(), Some(2));

    let mut spec = fixtures::net_a_spec();
    spec.cells[0].theta = -1.0;
    spec.weights.set(1, 2, -0.5);
    let invalid = write_config(dir.path(), "invalid.json", spec);
    let o = pulsenet(&["check", "--config", s(&invalid)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("threshold") && err.contains("negative"), "{err}");

    assert_eq!(pulsenet(&["check", "--config", s(&dir.path().join("missing.json"))]).status.code(), Some(2));
    assert_eq!(pulsenet(&["verify"]).status.code(), Some(2));
}

#[test]
fn simulate_then_analyze_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_config(dir.path(), "b.json", fixtures::net_b_spec());
    let trace = dir.path().join("run.csv");
    let o = pulsenet(&["simulate", "--config", s(&b), "--out", s(&trace), "--horizon", "12", "--seed", "5", "--oracle-dt", "1e-4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["oracle"]["within_tolerance"], true);
    assert!(dir.path().join("run.cells.csv").exists());

    let analyze = || pulsenet(&["analyze", "--config", s(&b), "--trace", s(&trace), "--horizon", "12"]);
    let first = analyze();
    assert!(first.status.success());
    assert_eq!(first.stdout, analyze().stdout);
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(report["sync"]["period_p"], 2);
    assert_eq!(report["info"]["h_bits"], 1.0);
    assert_eq!(report["presumed_dead"], serde_json::json!([]));
}

#[test]
fn simulate_requires_a_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", fixtures::net_a_spec());
    let o = pulsenet(&["simulate", "--config", s(&a), "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_flags_a_drained_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = fixtures::uniform_constant(2, 1.0, 1.0, 0.5);
    spec.interferences.push(Interference {
        target: 1,
        kind: InterferenceKind::Differential { delta: 2.0, start: 0.0, end: None },
    });
    let cfg = write_config(dir.path(), "d.json", spec);
    let trace = dir.path().join("d.csv");
    assert!(pulsenet(&["simulate", "--config", s(&cfg), "--out", s(&trace), "--horizon", "10"]).status.success());
    let o = pulsenet(&["analyze", "--config", s(&cfg), "--trace", s(&trace), "--horizon", "10"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["presumed_dead"], serde_json::json!([1]));
    assert!(report["sync"].is_null());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", fixtures::net_a_spec());
    let out = dir.path().join("va.json");
    let o = pulsenet(&["verify", "--config", s(&a), "--n-inits", "50", "--out", s(&out)]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((r["period_p"].clone(), r["h_bits"].clone(), r["passed"].clone()), (1.into(), 0.0.into(), true.into()));

    let b = write_config(dir.path(), "b.json", fixtures::net_b_spec());
    let o = pulsenet(&["verify", "--config", s(&b), "--n-inits", "50"]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((r["period_p"].clone(), r["h_bits"].clone()), (2.into(), 1.0.into()));

    let mut weak = fixtures::net_b_spec();
    weak.weights = WeightMatrix::uniform(16, 0.2);
    let w = write_config(dir.path(), "w.json", weak);
    assert_eq!(pulsenet(&["verify", "--config", s(&w)]).status.code(), Some(1));
    assert_eq!(pulsenet(&["verify", "--config", s(&a), "--horizon", "2"]).status.code(), Some(2));
}

#[test]
fn verify_respects_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.json", fixtures::net_a_spec());
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pulsenet"))
            .args(["verify", "--config", s(&a), "--n-inits", "12"])
            .env("PULSENET_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn sweep_marks_the_weak_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let b = write_config(dir.path(), "b.json", fixtures::net_b_spec());
    let out = dir.path().join("sweep.csv");
    let o = pulsenet(&["sweep", "--config", s(&b), "--delta", "0.2,0.35,0.8", "--n-inits", "10", "--out", s(&out)]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let passed: Vec<&str> = rows.iter().map(|r| &r[col("passed")]).collect();
    assert_eq!(passed, ["false", "true", "true"]);
    assert!(rows[0][col("note")].starts_with("hypothesis fails"));
    assert_eq!(&rows[1][col("p")], "2");
}

fn cell_strategy() -> impl Strategy<Value = CellSpec> {
    let dynamics = prop_oneof![
        (0.1..5.0f64).prop_map(|a| FreeDynamics::ConstantRate { a }),
        (0.1..5.0f64, 0.0..1.0f64).prop_map(|(a, b)| FreeDynamics::AffineInS { a, b }),
        (0.1..5.0f64, 0.0..1.0f64, 0.1..9.0f64, -7.0..7.0f64)
            .prop_map(|(c, amplitude, omega, phi_reset)| FreeDynamics::OscillatoryAux { c, amplitude, omega, phi_reset }),
    ];
    (1e-3..1e3f64, dynamics, 0.0..1.0f64, -10.0..10.0f64).prop_map(|(theta, dynamics, f, aux0)| CellSpec {
        theta,
        dynamics,
        s0: f * theta,
        aux0,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(
        cells in prop::collection::vec(cell_strategy(), 2..6),
        w in prop::collection::vec(0.0..2.0f64, 36),
        horizon in prop::option::of(0.1..1e4f64),
        seed in any::<u64>(),
        core in any::<bool>(),
        hit in prop::option::of((0.0..10.0f64, 1e-3..5.0f64)),
    ) {
        let m = cells.len();
        let rows = (0..m).map(|i| (0..m).map(|j| if i == j { 0.0 } else { w[i * 6 + j] }).collect()).collect();
        let mut spec = NetworkSpec::new(cells, WeightMatrix::from_rows(rows).unwrap());
        if core {
            spec.core = Some(vec![0, 1]);
        }
        if let Some((at, magnitude)) = hit {
            spec.interferences.push(Interference { target: 0, kind: InterferenceKind::Impulsive { magnitude, at } });
            spec.interferences.push(Interference {
                target: 1,
                kind: InterferenceKind::Differential { delta: magnitude, start: at, end: Some(at + 1.0) },
            });
        }
        let mut cfg = ConfigFile::new(spec);
        cfg.sim.horizon = horizon;
        cfg.sim.rng_seed = seed;
        cfg.oracle = horizon.map(|h| pulsenet_cli::config::OracleSection { dt: h * 1e-6 });
        let text = cfg.to_json();
        let back = ConfigFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text);
    }
}
