use std::path::PathBuf;
use std::process::Command;

use lpirl_core::solvers::{Method, SolverConfig};
use lpirl_harness::experiment::{run_experiment, write_tables, ResultRow};
use lpirl_harness::instance::{decode_instance, load_instance, serialize_instance, InstanceError};
use lpirl_harness::trace::read_trace;
use lpirl_harness::{generate_orthonormal_instance, parse_spec, ExperimentSpec, InstanceKind};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn lpirl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpirl"))
}

#[test]
fn hand_written_fixture_loads() {
    let inst = load_instance(&fixture("tiny_2x3.bin")).unwrap();
    assert_eq!(inst.kind, InstanceKind::OrthonormalRows);
    assert_eq!((inst.m(), inst.n(), inst.t, inst.seed, inst.sigma), (2, 3, 1, 42, 0.25));
    assert_eq!(inst.a.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
    assert_eq!(inst.a.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.6, 0.8]);
    assert_eq!(inst.b.as_slice(), &[0.125, -0.6 + 0.25 * -2.0]);
    assert_eq!(inst.planted_x.as_slice(), &[0.0, -1.0, 0.0]);
    let gram = &inst.a * inst.a.transpose();
    assert!((gram - lpirl_core::DMatrix::identity(2, 2)).norm() < 1e-15);
}

#[test]
fn fixture_bytes_survive_a_round_trip() {
    let raw = std::fs::read(fixture("tiny_2x3.bin")).unwrap();
    let inst = decode_instance(&raw).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.bin");
    serialize_instance(&inst, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), raw);
}

#[test]
fn damaged_fixture_errors_are_descriptive() {
    let raw = std::fs::read(fixture("tiny_2x3.bin")).unwrap();
    let e = decode_instance(&raw[..60]).unwrap_err();
    assert!(matches!(e, InstanceError::Truncated { what: "A" }));
    assert_eq!(e.to_string(), "instance file truncated while reading A");
    let mut v2 = raw.clone();
    v2[8..12].copy_from_slice(&2u32.to_le_bytes());
    assert_eq!(decode_instance(&v2).unwrap_err().to_string(), "unsupported instance format version 2, expected 1");
    assert!(load_instance(&fixture("missing.bin")).is_err());
}

#[test]
fn generated_instances_round_trip_through_files() {
    let inst = generate_orthonormal_instance(12, 40, 3, 0.005, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i.bin");
    serialize_instance(&inst, &path).unwrap();
    assert_eq!(load_instance(&path).unwrap(), inst);
}

fn small_spec(out: PathBuf, parallel: bool) -> ExperimentSpec {
    ExperimentSpec {
        sizes: vec![(12, 40), (16, 48)],
        p_values: vec![0.3, 0.7],
        lambda: 3e-3,
        methods: [Method::Type1Prox, Method::Type2Prox, Method::NewIrl1Exact].map(SolverConfig::new).to_vec(),
        seeds: vec![1, 2],
        output_path: out,
        kind: InstanceKind::OrthonormalRows,
        sigma: 0.005,
        t: None,
        warm_start_tol: 1e-6,
        parallel,
    }
}

fn numbers(rows: &[ResultRow]) -> Vec<(usize, usize, u64, String, u64, u64, usize, usize)> {
    rows.iter()
        .map(|r| (r.m, r.n, r.seed, r.method.clone(), r.p.to_bits(), r.objective.to_bits(), r.outer, r.inner))
        .collect()
}

#[test]
fn experiment_rows_are_deterministic_and_parallel_safe() {
    let dir = tempfile::tempdir().unwrap();
    let serial = run_experiment(&small_spec(dir.path().into(), false)).unwrap();
    assert_eq!(serial.len(), 2 * 2 * 2 * 3);
    assert_eq!(numbers(&serial), numbers(&run_experiment(&small_spec(dir.path().into(), false)).unwrap()));
    let mut par = numbers(&run_experiment(&small_spec(dir.path().into(), true)).unwrap());
    let mut ser = numbers(&serial);
    par.sort();
    ser.sort();
    assert_eq!(par, ser);
    for r in &serial {
        assert_eq!(r.status, "converged", "{r:?}");
        assert_eq!(r.t, (r.m as f64 / 5.0).round() as usize);
    }

    let (csv_path, json_path) = write_tables(&serial, dir.path()).unwrap();
    let csv = std::fs::read_to_string(csv_path).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "m,n,p,method,objective,residual,outer,inner,time_s,seed,t,status,error"
    );
    assert_eq!(csv.lines().count(), serial.len() + 1);
    let back: Vec<ResultRow> = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    assert_eq!(numbers(&back), numbers(&serial));
}

#[test]
fn cli_generate_solve_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.bin");
    let trace = dir.path().join("t.json");
    let st = lpirl()
        .args(["generate", "--m", "20", "--n", "64", "--seed", "5", "--out"])
        .arg(&inst)
        .status()
        .unwrap();
    assert!(st.success());
    assert_eq!(load_instance(&inst).unwrap().t, 4);

    let out = lpirl()
        .args(["solve", "--method", "irl1-3", "--p", "0.5", "--lambda", "3e-3", "--tol", "1e-5", "--instance"])
        .arg(&inst)
        .arg("--trace-out")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("status=Converged"));
    let run = read_trace(&trace).unwrap();
    assert_eq!(run.method, Method::NewIrl1Prox);
    assert_eq!(run.termination_tol, 1e-5);

    let out = lpirl().arg("check").arg(&trace).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{text}");

    let out = lpirl().args(["solve", "--p", "0.5", "--instance"]).arg(dir.path().join("nope.bin")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_experiment_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.txt");
    std::fs::write(&spec, "sizes = 12x40\np = 0.5\nlambda = 3e-3\nmethods = irl1-1, irl1-2, irl1-3\nseeds = 3\noutput = ignored\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = lpirl().arg("experiment").arg("--spec").arg(&spec).arg("--out-dir").arg(&out_dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("results.csv").exists() && out_dir.join("results.json").exists());
    assert!(parse_spec(&std::fs::read_to_string(&spec).unwrap()).is_ok());
}

