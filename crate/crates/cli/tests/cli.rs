use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples_psi").join(name)
}

fn psi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psi"))
        .args(args)
        .env_remove("PSI_SEED")
        .output()
        .expect("binary runs")
}

fn temp_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".psi").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parse_prints_definitions() {
    let out = psi(&["parse", path(&example("p1.psi"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("def P1 = a(x)"), "{text}");
}

#[test]
fn malformed_file_reports_position() {
    let f = temp_file("instance pi\ndef A = a!!b\n");
    let out = psi(&["parse", path(f.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("2:11"), "{err}");
}

#[test]
fn unguarded_replicated_assertion_is_rejected() {
    let f = temp_file("instance assign\ndef A = !(|u := 2|)\n");
    let out = psi(&["parse", path(f.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("guardedness violation"));
}

#[test]
fn nil_has_an_empty_graph() {
    let f = temp_file("instance pi\ndef Z = 0\n");
    let out = psi(&["lts", path(f.path()), "Z", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["edges"].as_array().unwrap().len(), 0);
    assert_eq!(v["states"].as_array().unwrap().len(), 1);
}

#[test]
fn tuple_output_graph_sizes() {
    let file = example("r_tuple.psi");
    let late = json(&psi(&["lts", path(&file), "R", "--term-depth", "2", "--json"]));
    let outs = late["edges"].as_array().unwrap().iter().filter(|e| e["kind"] == "out").count();
    assert!(outs >= 4, "{outs}");
    let sym = json(&psi(&["lts", path(&file), "R", "--term-depth", "2", "--mode", "symbolic", "--json"]));
    assert_eq!(sym["edges"].as_array().unwrap().len(), 1);
    assert!(sym["edges"][0]["constraint"].is_object());
}

#[test]
fn dot_output() {
    let out = psi(&["lts", path(&example("r_tuple.psi")), "R", "--mode", "symbolic", "--dot"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph lts {") && text.contains("s0 -> s1"), "{text}");
}

#[test]
fn golden_verdicts_and_exit_codes() {
    let p1 = psi(&["bisim", path(&example("p1.psi")), "P1", "Q1", "--json"]);
    assert_eq!(p1.status.code(), Some(0));
    assert_eq!(json(&p1)["witness"].as_array().unwrap().len(), 4);

    for mode in ["symbolic", "concrete", "crosscheck"] {
        let out = psi(&["bisim", path(&example("p2.psi")), "P2", "Q2", "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}");
    }

    let rigid = ["--rigid", "b,c,d,x"];
    let p3 = psi(&[&["bisim", path(&example("p3.psi")), "P3", "Q3"][..], &rigid].concat());
    assert_eq!(p3.status.code(), Some(0));

    let swapped = psi(&[&["bisim", path(&example("p3_swapped.psi")), "P3s", "Q3s", "--json"][..], &rigid].concat());
    assert_eq!(swapped.status.code(), Some(1));
    let v = json(&swapped);
    assert_eq!(v["verdict"], "not-bisimilar");
    let steps = v["counterexample"]["steps"].as_array().unwrap();
    assert!(steps.iter().any(|s| s["solution"] == "(dec(x,k)/z, 1)"), "{steps:?}");
}

#[test]
fn identical_agents_are_bisimilar() {
    let f = temp_file("instance pi\ndef A = a(x).x!a.0 | !b!a\n");
    for mode in ["symbolic", "concrete", "crosscheck"] {
        let out = psi(&["bisim", path(f.path()), "A", "A", "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}");
    }
}

#[test]
fn distinct_agents_exit_one() {
    let f = temp_file("instance pi\nnames a b\ndef A = a!b\ndef B = a!a\n");
    for mode in ["symbolic", "concrete"] {
        let out = psi(&["bisim", path(f.path()), "A", "B", "--mode", mode]);
        assert_eq!(out.status.code(), Some(1), "{mode}");
    }
}

#[test]
fn unknown_definition_and_instance_exit_two() {
    let out = psi(&["lts", path(&example("p1.psi")), "Nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(psi(&["check-instance", "bogus"]).status.code(), Some(2));
    assert_eq!(psi(&["bisim"]).status.code(), Some(2));
    assert_eq!(psi(&["lts", path(&example("p1.psi")), "P1", "--mode", "weird"]).status.code(), Some(2));
}

#[test]
fn check_instance_passes_for_shipped_instances() {
    for key in ["pi", "tuple", "assign", "crypto"] {
        let out = psi(&["check-instance", key, "--samples", "100", "--seed", "9", "--json"]);
        assert_eq!(out.status.code(), Some(0), "{key}");
        let v = json(&out);
        assert_eq!(v["seed"], 9);
        assert!(v["laws"].as_array().unwrap().iter().all(|l| l["passed"] == true));
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_psi"))
        .args(["check-instance", "pi", "--samples", "10", "--json"])
        .env("PSI_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 42);
}

#[test]
fn json_output_is_byte_identical() {
    let runs: Vec<Vec<u8>> = (0..2)
        .flat_map(|_| {
            [
                psi(&["bisim", path(&example("p1.psi")), "P1", "Q1", "--json"]).stdout,
                psi(&["lts", path(&example("p1.psi")), "Q1", "--mode", "symbolic", "--json"]).stdout,
                psi(&["check-instance", "crypto", "--samples", "50", "--seed", "3", "--json"]).stdout,
            ]
        })
        .collect();
    assert_eq!(runs[0..3], runs[3..6]);
}
