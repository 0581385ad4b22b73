use std::path::PathBuf;
use std::process::Command;

use num_complex::Complex64;
use serde_json::Value;

use wva_core::params::PhysicalParams;
use wva_core::qubit::QubitState;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn wva(args: &[&str]) -> Out {
    let o = Command::new(env!("CARGO_BIN_EXE_wva"))
        .args(args)
        .output()
        .expect("binary runs");
    Out {
        code: o.status.code().expect("exit code"),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn file(name: &str, text: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn tmp(name: &str) -> String {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join(name)
        .to_string_lossy()
        .into_owned()
}

const DETECTOR: &str = "
[detector]
x_pos = 1.1
l = 1.0
n_atoms = 1000000000
chi = 1.0
delta0 = 0.1
trials = 2000
";

fn qubit_for(target: Complex64, eta: f64) -> String {
    let q = QubitState::for_weak_value(target, eta).unwrap();
    format!(
        "[qubit]\nalpha = {:?}\nbeta = {:?}\ntheta = {:?}\n[postselect]\neta = {eta:?}\n",
        q.alpha(),
        q.beta(),
        q.theta()
    )
}

#[test]
fn default_parameters_validate_with_the_vacuum_splitting() {
    let o = wva(&["validate"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["status"], "pass");
    let g0 = v["g0_over_2pi_hz"].as_f64().unwrap();
    assert!((g0 / 707.1 - 1.0).abs() < 1e-4, "{g0}");
    assert!(o.stderr.contains("g0/2pi = 0.707107 kHz"), "{}", o.stderr);
    let names: Vec<&str> = v["flags"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    for n in [
        "k_delta",
        "coupling_over_detuning",
        "impulse",
        "width_over_xc",
        "g_c",
        "gc2_abs_aw",
    ] {
        assert!(names.contains(&n), "{n} missing");
    }
}

#[test]
fn phase_offset_at_the_edge_fails() {
    let cfg = file("kx0.toml", "[physical]\nk_x0 = 1.57\n");
    let o = wva(&["validate", "--config", &cfg]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.contains("tan/cos singularity"), "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["status"], "fail");
    // the same config is refused by the other subcommands
    assert_eq!(wva(&["run", "--config", &cfg]).code, 1);
}

#[test]
fn amplification_bound_warns() {
    let gc = 0.08;
    let p = PhysicalParams::worked_example().with_gc(gc);
    let target = Complex64::new(0.0, 0.5 / (gc * gc));
    let cfg = file(
        "bound.toml",
        &format!("[physical]\nt = {:?}\n{}", p.t, qubit_for(target, 0.4)),
    );
    let o = wva(&["validate", "--config", &cfg, "--format", "csv"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let line = o
        .stdout
        .lines()
        .find(|l| l.starts_with("gc2_abs_aw"))
        .unwrap();
    assert!(line.contains(",warn,"), "{line}");
    assert!(line.contains("can not be infinitely amplified"));
}

#[test]
fn config_errors_exit_with_two() {
    let bad = file("bad.toml", "[physical]\nlambda = \n");
    let o = wva(&["run", "--config", &bad]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);

    let unknown = file("unknown.toml", "[numerics]\nn_pts = 512\n");
    let o = wva(&["validate", "--config", &unknown]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("n_pts"));

    let norm = file(
        "norm.toml",
        "[qubit]\nalpha = 0.6\nbeta = 0.6\ntheta = 0.0\n",
    );
    let o = wva(&["run", "--config", &norm]);
    assert_eq!(o.code, 2);
    assert!(
        o.stderr.contains("alpha = 0.6") && o.stderr.contains("beta = 0.6"),
        "{}",
        o.stderr
    );

    assert_eq!(wva(&["run", "--config", &tmp("missing.toml")]).code, 2);
    assert_eq!(wva(&["run", "--format", "xml"]).code, 2);
    assert_eq!(wva(&["detect"]).code, 2);
    assert_eq!(wva(&["sweep"]).code, 2);

    let unseeded = file("unseeded.toml", DETECTOR);
    let o = wva(&["detect", "--config", &unseeded]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("seed"));

    let empty = file(
        "empty.toml",
        "[sweep]\nparameter = \"postselect.eta\"\nstart = 0.1\nstop = 0.2\nsteps = 0\n",
    );
    assert_eq!(wva(&["sweep", "--config", &empty]).code, 2);
    let path = file(
        "path.toml",
        "[sweep]\nparameter = \"physical.omega\"\nstart = 0.1\nstop = 0.2\nsteps = 2\n",
    );
    let o = wva(&["sweep", "--config", &path]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("physical.omega"));
}

#[test]
fn dump_config_round_trip_is_bit_identical() {
    let src = file(
        "src.toml",
        &format!(
            "seed = 11\nengine = \"effective\"\n[physical]\nt = 1.234567890123e-4\n{}{DETECTOR}",
            qubit_for(Complex64::new(3.0, 7.0), 0.3)
        ),
    );
    let dumped = tmp("dumped.toml");
    let o = wva(&["run", "--config", &src, "--dump-config", "--out", &dumped]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let again = wva(&["run", "--config", &dumped, "--dump-config"]);
    assert_eq!(again.stdout, std::fs::read_to_string(&dumped).unwrap());
    for cmd in ["run", "detect"] {
        let a = wva(&[cmd, "--config", &src]);
        let b = wva(&[cmd, "--config", &dumped]);
        assert_eq!(a.code, 0, "{}", a.stderr);
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn detect_is_reproducible_per_seed() {
    let cfg = file("detect.toml", DETECTOR);
    let trials = tmp("trials.csv");
    let a = wva(&[
        "detect",
        "--config",
        &cfg,
        "--seed",
        "5",
        "--trials-out",
        &trials,
    ]);
    let b = wva(&["detect", "--config", &cfg, "--seed", "5"]);
    let c = wva(&["detect", "--config", &cfg, "--seed", "6"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["verdict"], "systematic error suppressed");
    let r = &v["report"];
    assert!(
        r["systematic_bias"].as_f64().unwrap().abs()
            <= 3.0 * r["systematic_bias_se"].as_f64().unwrap()
    );
    let dump = std::fs::read_to_string(&trials).unwrap();
    assert_eq!(dump.lines().next(), Some("trial,n1,n2,s_hat"));
    assert_eq!(dump.lines().count(), 2001);
}

const SWEEP_HEADER: &str =
    "index,parameter,value,status,re_aw,im_aw,probability,g0_over_2pi_hz,g_c,\
predicted_p_shift_over_2dp,predicted_x_shift_over_2delta,measured_p_shift_over_2dp,\
measured_x_shift_over_2delta,s_bar,error";

fn table(out: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        SWEEP_HEADER
    );
    r.records().map(|x| x.unwrap()).collect()
}

fn column(rows: &[csv::StringRecord], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn detuning_sweep_lowers_the_vacuum_splitting() {
    let cfg = file(
        "delta.toml",
        &format!(
            "{DETECTOR}[sweep]\nparameter = \"physical.delta_over_2pi\"\nstart = 7.0e4\nstop = 5.6e5\nsteps = 4\nscale = \"log\"\n"
        ),
    );
    let o = wva(&["sweep", "--config", &cfg]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = table(&o.stdout);
    assert_eq!(rows.len(), 4);
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 15);
        assert_eq!(&r[0], k.to_string());
        assert!(r[14].is_empty());
    }
    let g0 = column(&rows, 7);
    assert!(g0.windows(2).all(|w| w[1] < w[0]), "{g0:?}");
    let s = column(&rows, 13);
    assert!(s.iter().all(|v| v.is_finite() && *v > 0.0));

    let j = wva(&["sweep", "--config", &cfg, "--format", "json"]);
    let v: Value = serde_json::from_str(&j.stdout).unwrap();
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(jrows.len(), 4);
    for key in SWEEP_HEADER.split(',') {
        assert!(jrows[0].get(key).is_some(), "{key}");
    }
    assert_eq!(jrows[2]["g0_over_2pi_hz"].as_f64().unwrap(), g0[2]);
}

#[test]
fn phase_sweep_makes_the_weak_value_real() {
    let cfg = file(
        "theta.toml",
        "[sweep]\nparameter = \"qubit.theta\"\nstart = 0.5707963267948966\nstop = 2.5707963267948966\nsteps = 3\n",
    );
    let o = wva(&["sweep", "--config", &cfg]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = table(&o.stdout);
    let im = column(&rows, 5);
    assert!(im[1].abs() < 1e-12, "{im:?}");
    assert!(im[0].abs() > 1e-3 && im[2].abs() > 1e-3);
}

#[test]
fn eta_sweep_through_the_pole_stays_finite() {
    // A = alpha cos(eta) / (beta sin(eta)) crosses -1 near eta = pi - atan(alpha / beta)
    let q = "[qubit]\nalpha = 0.6\nbeta = 0.8\ntheta = 1.5707963267948966\n";
    let pole = std::f64::consts::PI - (0.6f64 / 0.8).atan();
    let cfg = file(
        "eta.toml",
        &format!(
            "{q}[sweep]\nparameter = \"postselect.eta\"\nstart = {:?}\nstop = {:?}\nsteps = 6\n",
            pole - 0.05,
            pole + 0.05
        ),
    );
    let o = wva(&["sweep", "--config", &cfg]);
    let rows = table(&o.stdout);
    let re = column(&rows, 4);
    let p = column(&rows, 6);
    assert!(re.iter().chain(&p).all(|v| v.is_finite()));
    let peak = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let edge = re[0].abs().min(re[5].abs());
    assert!(peak > 2.0 * edge, "{re:?}");
    assert_eq!(o.code, 0, "{}", o.stderr);
}

#[test]
fn failing_rows_carry_an_error() {
    let cfg = file(
        "alpha.toml",
        "[sweep]\nparameter = \"qubit.alpha\"\nstart = 0.3\nstop = 0.5\nsteps = 2\n",
    );
    let o = wva(&["sweep", "--config", &cfg]);
    assert_eq!(o.code, 1);
    let rows = table(&o.stdout);
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r[14].contains("alpha") && r[4].is_empty()));
}

#[test]
fn excited_atom_gets_the_full_kick() {
    let cfg = file(
        "excited.toml",
        "[qubit]\nalpha = 0.0\nbeta = 1.0\ntheta = 0.0\n[postselect]\neta = 0.9\n",
    );
    let o = wva(&["run", "--config", &cfg]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    let gc = v["run"]["couplings"]["g_c"].as_f64().unwrap();
    let p = v["run"]["measured"]["p_shift_over_2dp"].as_f64().unwrap();
    assert!((p + gc).abs() < 1e-8);
    assert_eq!(v["run"]["weak_value"]["re"].as_f64().unwrap(), 1.0);
}

#[test]
fn exact_engine_reports_the_fidelity() {
    let cfg = file("exact.toml", "[numerics]\nn_points = 256\n");
    let o = wva(&["run", "--config", &cfg, "--engine", "exact-linear"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let v: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(v["run"]["engine"], "exact_linearized");
    let f = v["run"]["exact"]["fidelity_with_effective"]
        .as_f64()
        .unwrap();
    assert!(f > 0.95 && f <= 1.0 + 1e-12, "{f}");
    assert!(v["run"]["exact"]["effective_measured"]["x_shift_over_2delta"].is_number());

    let csv = wva(&[
        "run",
        "--config",
        &cfg,
        "--engine",
        "exact-sin",
        "--format",
        "csv",
    ]);
    let rows = table(&csv.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][3], "pass");
}
