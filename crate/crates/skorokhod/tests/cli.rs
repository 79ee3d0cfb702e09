//! Integration tests of the command-line surface: exit codes, determinism,
//! and document round-trips through the binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use skorokhod::doc::{serialize, FunctionDocument, Payload};
use skorokhod::piecewise::{CadlagFunction, TimeChange};
use skorokhod::turbo::{triangle_family, triangle_limit, Turbofunction};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skorokhod"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skorokhod-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_doc(dir: &Path, file: &str, name: &str, payload: Payload) -> PathBuf {
    let path = dir.join(file);
    fs::write(&path, serialize(&FunctionDocument::new(name, payload))).unwrap();
    path
}

fn step(breaks: &[f64], values: &[f64]) -> CadlagFunction {
    CadlagFunction::step(breaks, values).unwrap()
}

#[test]
fn rho_exact_on_step_pair() {
    let dir = tempdir("rho");
    let a = write_doc(&dir, "a.txt", "a", Payload::Step(step(&[0.5], &[0.0, 1.0])));
    let b = write_doc(&dir, "b.txt", "b", Payload::Step(step(&[0.6], &[0.0, 1.0])));
    let out = run(&["rho", a.to_str().unwrap(), b.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lower 1.000000000000e-1"), "{text}");
    assert!(text.contains("upper 1.000000000000e-1"), "{text}");
    assert!(text.contains("exact true"), "{text}");
    assert!(text.contains("witness"), "{text}");
}

#[test]
fn identical_files_give_zero_width() {
    let dir = tempdir("zero");
    let a = write_doc(&dir, "a.txt", "a", Payload::Step(step(&[0.5], &[0.0, 1.0])));
    let out = run(&["rho", a.to_str().unwrap(), a.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lower 0.000000000000e0"), "{text}");
    assert!(text.contains("upper 0.000000000000e0"), "{text}");
}

#[test]
fn exact_flag_rejects_non_step_input() {
    let dir = tempdir("nonstep");
    let ramp = CadlagFunction::from_points(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
    let a = write_doc(&dir, "ramp.txt", "ramp", Payload::PlCadlag(ramp));
    let out = run(&["rho", a.to_str().unwrap(), a.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn parse_failure_exits_two() {
    let dir = tempdir("parse");
    let bad = dir.join("bad.txt");
    fs::write(&bad, "not a document").unwrap();
    let good = write_doc(&dir, "good.txt", "g", Payload::Step(step(&[0.5], &[0.0, 1.0])));
    let out = run(&["rho", bad.to_str().unwrap(), good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 1"));
}

#[test]
fn unwritable_output_exits_four() {
    let dir = tempdir("io");
    let x = write_doc(
        &dir,
        "x.txt",
        "x",
        Payload::Turbo(triangle_limit()),
    );
    let out = run(&[
        "visualize",
        x.to_str().unwrap(),
        "--svg",
        "/nonexistent-dir/out.svg",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn rho_plus_on_family_pair() {
    let dir = tempdir("rhoplus");
    let a = write_doc(
        &dir,
        "g8.txt",
        "g8",
        Payload::PlCadlag(triangle_family(8.0).unwrap()),
    );
    let b = write_doc(&dir, "limit.txt", "limit", Payload::Turbo(triangle_limit()));
    let out = run(&["rho-plus", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "1e-3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let upper: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("upper "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(upper <= 0.125 + 1e-3, "{upper}");
}

#[test]
fn equiv_exit_codes() {
    let dir = tempdir("equiv");
    let ones = CadlagFunction::constant(1.0);
    let flat =
        TimeChange::new(vec![(0.0, 0.0), (0.25, 0.25), (0.75, 0.25), (1.0, 1.0)]).unwrap();
    let x = write_doc(
        &dir,
        "x.txt",
        "x",
        Payload::Turbo(Turbofunction::new(ones.clone(), flat)),
    );
    let y = write_doc(&dir, "y.txt", "y", Payload::PlCadlag(ones));
    let z = write_doc(&dir, "z.txt", "z", Payload::Step(step(&[], &[0.0])));
    let out = run(&["equiv", x.to_str().unwrap(), y.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("equivalent"));
    let out = run(&["equiv", z.to_str().unwrap(), y.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("not-equivalent"));
}

#[test]
fn demo_rejects_low_sharpness() {
    let dir = tempdir("demo3");
    let out = run(&[
        "demo-triangle",
        "--theta-list",
        "2,4",
        "--outdir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn demo_single_sharpness_succeeds() {
    let dir = tempdir("demo1");
    let out = run(&[
        "demo-triangle",
        "--theta-list",
        "8",
        "--outdir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("pointwise.csv").exists());
    assert!(dir.join("limit.svg").exists());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempdir("det");
    let a = write_doc(
        &dir,
        "g4.txt",
        "g4",
        Payload::PlCadlag(triangle_family(4.0).unwrap()),
    );
    let b = write_doc(
        &dir,
        "g8.txt",
        "g8",
        Payload::PlCadlag(triangle_family(8.0).unwrap()),
    );
    let run1 = run(&["rho", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "1e-4"]);
    let run2 = run(&["rho", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "1e-4"]);
    assert_eq!(run1.stdout, run2.stdout);
    let csv1 = dir.join("v1.csv");
    let csv2 = dir.join("v2.csv");
    let x = write_doc(&dir, "lim.txt", "lim", Payload::Turbo(triangle_limit()));
    run(&["visualize", x.to_str().unwrap(), "--csv", csv1.to_str().unwrap()]);
    run(&["visualize", x.to_str().unwrap(), "--csv", csv2.to_str().unwrap()]);
    assert_eq!(fs::read(csv1).unwrap(), fs::read(csv2).unwrap());
}

#[test]
fn outdir_env_variable_is_honored() {
    let dir = tempdir("env");
    let out = bin()
        .args(["demo-triangle", "--theta-list", "8,16", "--tol", "1e-3"])
        .env("SKOROKHOD_OUTDIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("pairwise_bounds.csv").exists());
}
