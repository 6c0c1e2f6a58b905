//! End-to-end runs of the compiled binary: exit-code contract, report
//! shapes, and CSV determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conjpoint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn index_hyperbolic_minimize_certifies() {
    let cfg = fixture("hyperbolic.ini");
    let out = run(&[
        "index",
        "--config",
        cfg.to_str().unwrap(),
        "--xi",
        "sinh(r)*sinh(ln(2)-r)",
        "--minimize",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("conjugate point: YES"));
}

#[test]
fn index_flat_disc_inconclusive_exit_1() {
    let cfg = fixture("flat_disc.ini");
    let out = run(&[
        "index",
        "--config",
        cfg.to_str().unwrap(),
        "--xi",
        "r*(1-r)",
        "--minimize",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_expression_exit_2_with_position() {
    let cfg = fixture("flat_disc.ini");
    let out = run(&[
        "index",
        "--config",
        cfg.to_str().unwrap(),
        "--xi",
        "sin(",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("position 4"), "{err}");
}

#[test]
fn criteria_isochronal_and_interior_and_origin() {
    let out = run(&[
        "criteria",
        "--config",
        fixture("sphere_rigid.ini").to_str().unwrap(),
        "--which",
        "isochronal",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "criteria",
        "--config",
        fixture("sphere_interior.ini").to_str().unwrap(),
        "--which",
        "interior",
        "--r0",
        "0.7853981634",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("conjugate point: YES"));

    let out = run(&[
        "criteria",
        "--config",
        fixture("origin_example.ini").to_str().unwrap(),
        "--which",
        "origin",
        "--porcelain",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("lhs = 27"), "{text}");
    assert!(text.contains("rhs = 30"), "{text}");
}

#[test]
fn kolmogorov_mbar_all_negative_and_deterministic() {
    let a = run(&["kolmogorov", "-m", "1", "-n", "1", "mbar"]);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# conjpoint"));
    assert_eq!(lines.next().unwrap(), "r,mbar");
    for line in lines {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v < 0.0, "{line}");
    }
    let b = run(&["kolmogorov", "-m", "1", "-n", "1", "mbar"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn kolmogorov_verify_flow() {
    let out = run(&["kolmogorov", "-m", "3", "-n", "2", "verify-flow"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("max flow ODE residual"));
}

#[test]
fn kolmogorov_bad_wavenumber_exit_2() {
    let out = run(&["kolmogorov", "-m", "0", "-n", "1", "mbar"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn torus_builtins_and_file() {
    let out = run(&["torus", "-m", "2", "-n", "2", "--builtin", "22"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("iota = -854 pi^2; conjugate point: YES"));

    let out = run(&["torus", "-m", "5", "-n", "1", "--builtin", "m1"]);
    assert!(stdout(&out).contains("iota = -271/4 pi^2"));

    // the same test function from a file gives the same answer
    let out = run(&[
        "torus",
        "-m",
        "5",
        "-n",
        "1",
        "--zeta",
        fixture("zeta_m1.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("iota = -271/4 pi^2"));

    let out = run(&["torus", "-m", "1", "-n", "1", "--builtin", "m1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("inconclusive"));

    let out = run(&["torus", "-m", "7", "-n", "2", "--builtin", "dmsy", "--porcelain"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("region_member = true"));
}

#[test]
fn surface_report_and_csv() {
    let dir = std::env::temp_dir().join("conjpoint-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("surface.csv");
    let out = run(&[
        "surface",
        "--config",
        fixture("surface_example.ini").to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("det check PASS"), "{text}");
    assert!(text.contains("curl radial PASS"), "{text}");
    assert!(text.contains("conjugate point: YES"), "{text}");
    let written = std::fs::read_to_string(&csv).unwrap();
    assert!(written.starts_with("# conjpoint"));
    assert!(written.lines().nth(1).unwrap().contains("g11"));
    std::fs::remove_file(&csv).ok();
}
