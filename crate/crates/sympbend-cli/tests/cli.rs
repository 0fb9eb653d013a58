//! End-to-end tests driving the compiled binary.

use std::process::{Command, Output};

fn sympbend(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sympbend"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const IDENTITY_DATUM: &str = "\
[algebra]
params: 3 -1
mu: 0 1 0 0

[presentation]
generators: g h

[assignment]
g: 1 0 0 0
h: 1 0 0 0

[curve]
word: g
kind: nonseparating
stable: h

[maps]
twist: g, h g
";

#[test]
fn algebra_info_reports_ramification_and_flags() {
    let out = sympbend(&["algebra-info", "3", "-1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("ramification: {2, 3}"));
    assert!(text.contains("division: yes"));
    assert!(text.contains("indefinite: yes"));

    let definite = sympbend(&["algebra-info", "-1", "-1"]);
    assert!(definite.status.success());
    assert!(stdout(&definite).contains("indefinite: no"));
}

#[test]
fn cocycle_verify_runs_the_invariant_suite() {
    let out = sympbend(&["cocycle-verify", "3", "-1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("16/16 cocycle pairs, product identity: pass"));
    assert!(text.contains("fixed algebra dimension: 4"));
    assert!(text.contains("coboundary: yes"));
}

#[test]
fn embed_prints_the_model() {
    let out = sympbend(&["embed", "3", "-1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("algebra: (3, -1)"));
    assert!(text.contains("elementary divisors: 6 6"));
    assert!(text.contains("primitive form:"));
}

#[test]
fn bend_prints_the_bent_images() {
    let out = sympbend(&["bend", "--datum", "bundled", "--height", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("bend element: coordinates"));
    assert!(text.contains("bent generator images:"));
    assert!(text.contains("g:"));
    assert!(text.contains("h:"));
}

#[test]
fn certify_identity_rep_is_proper_and_not_certified() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("identity.datum");
    std::fs::write(&path, IDENTITY_DATUM).unwrap();
    let out = sympbend(&["certify", "--datum", path.to_str().unwrap(), "--sweep-bound", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("5: proper(1)"));
    assert!(text.contains("verdict: not-certified"));
}

#[test]
fn certify_bent_independent_datum_is_dense_certified() {
    let out = sympbend(&[
        "certify",
        "--datum",
        "independent",
        "--height",
        "1",
        "--sweep-bound",
        "13",
        "--emit-json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("5: surjective"));
    assert!(text.contains("verdict: dense-certified"));
    assert!(text.contains("\"verdict\""));
}

#[test]
fn separate_independent_datum_concludes_distinct_orbits() {
    let out = sympbend(&[
        "separate",
        "--datum",
        "independent",
        "--height",
        "1",
        "--prime",
        "5",
        "--aux",
        "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("bend order modulo witness: 10"));
    assert!(text.contains("power-bend reduction equals base reduction at witness: yes"));
    assert!(text.contains("conclusion: distinct orbits"));
}

#[test]
fn pipeline_certificates_are_byte_identical_across_runs() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for dir in [dir1.path(), dir2.path()] {
        let out = sympbend(&[
            "run-pipeline",
            "--config",
            "bundled",
            "--out-dir",
            dir.to_str().unwrap(),
            "--emit-json",
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        assert!(stdout(&out).contains("pipeline complete"));
    }
    for name in ["certificate.txt", "separation.txt", "certificate.json", "separation.json"] {
        let a = std::fs::read(dir1.path().join(name)).unwrap();
        let b = std::fs::read(dir2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn pipeline_stage_failures_use_the_stage_index_as_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let write_config = |name: &str, text: &str| -> String {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_string()
    };

    let definite = write_config(
        "definite.cfg",
        "algebra: -1 -1\norder: standard\nmu: 0 1 0 0\ncopies: 1\ndatum: bundled\n\
         curve: g\nheight: 2\nsweep_bound: 5\nseparation_prime: 5\n",
    );
    let out = sympbend(&["run-pipeline", "--config", &definite, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not indefinite"));

    let no_height = write_config(
        "height0.cfg",
        "algebra: 3 -1\norder: standard\nmu: 0 1 0 0\ncopies: 1\ndatum: bundled\n\
         curve: g\nheight: 0\nsweep_bound: 5\nseparation_prime: 5\n",
    );
    let out = sympbend(&["run-pipeline", "--config", &no_height, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("no bend element at height 0"));

    let bad_config = write_config("bad.cfg", "algebra: 3 -1\n");
    let out = sympbend(&["run-pipeline", "--config", &bad_config, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("missing key"));
}

#[test]
fn pipeline_independent_run_is_dense_certified() {
    let dir = tempfile::tempdir().unwrap();
    let out = sympbend(&[
        "run-pipeline",
        "--config",
        "independent",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("certificate verdict: dense-certified"));
    assert!(text.contains("separation conclusion: distinct orbits"));
    let cert = std::fs::read_to_string(dir.path().join("certificate.txt")).unwrap();
    assert!(cert.contains("verdict: dense-certified"));
}
