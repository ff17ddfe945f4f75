// SPDX-License-Identifier: Apache-2.0
//! Runs the `magmec` binary on the core fixtures.

use std::path::PathBuf;
use std::process::Command;

fn fixture(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn magmec(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_magmec"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn graph_text(rel: &str) -> String {
    let g = magmec::parse_pmg(&std::fs::read_to_string(fixture(rel)).unwrap()).unwrap();
    magmec::render_pmg(&g)
}

#[test]
fn mag2eag_gives_the_essential_graph() {
    let (code, out, _) = magmec(&["mag2eag", &fixture("intro/mag.pmg")]);
    assert_eq!(code, 0);
    assert_eq!(out, graph_text("intro/essential.pmg"));
}

#[test]
fn mec_counts() {
    let (code, out, _) = magmec(&["mec", "count", &fixture("intro/mag.pmg")]);
    assert_eq!((code, out.as_str()), (0, "35\n"));
    let (code, out, _) = magmec(&[
        "mec",
        "count",
        &fixture("intro/essential.pmg"),
        "--restrict",
        &fixture("intro/knowledge.txt"),
    ]);
    assert_eq!((code, out.as_str()), (0, "13\n"));
}

#[test]
fn mec_enumerate_lists_every_member() {
    let (code, out, _) = magmec(&["mec", "enumerate", &fixture("intro/restricted.pmg")]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("nodes:").count(), 13);
}

#[test]
fn mec_over_cap_is_a_usage_error() {
    let (code, _, err) = magmec(&["mec", "count", &fixture("intro/mag.pmg"), "--cap", "2"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn addbg_writes_graph_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let (code, out, _) = magmec(&[
        "addbg",
        &fixture("intro/essential.pmg"),
        &fixture("intro/knowledge.txt"),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, graph_text("intro/restricted.pmg"));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!lines.is_empty());
}

#[test]
fn addbg_rejects_inconsistent_knowledge_at_third_piece() {
    let (code, out, err) = magmec(&[
        "addbg",
        &fixture("intro/essential.pmg"),
        &fixture("intro/inconsistent_knowledge.txt"),
    ]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("piece 3"), "{err}");
    assert!(err.contains("D --> A"), "{err}");
}

#[test]
fn verify_verdicts_and_exit_codes() {
    let eag = fixture("intro/essential.pmg");
    let k = fixture("intro/knowledge.txt");
    let (code, out, _) = magmec(&["verify", &eag, &k]);
    assert_eq!((code, out.as_str()), (0, "TRUE\n"));

    for bad in ["intro/sound_incomplete_1.pmg", "intro/sound_incomplete_2.pmg", "intro/unsound.pmg"] {
        let (code, out, _) = magmec(&["verify", &eag, &k, "--graph", &fixture(bad)]);
        assert_eq!(code, 1, "{bad}");
        assert!(out.starts_with("FALSE\n"), "{bad}: {out}");
    }

    let (code, out, _) = magmec(&["verify", &eag, &k, "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], true);
}

#[test]
fn verify_accepts_the_verifier_fixture() {
    let (code, out, _) = magmec(&[
        "verify",
        &fixture("verify/essential.pmg"),
        &fixture("verify/knowledge.txt"),
        "--graph",
        &fixture("verify/expected.pmg"),
    ]);
    assert_eq!((code, out.as_str()), (0, "TRUE\n"));
}

#[test]
fn parse_errors_exit_two() {
    let (code, out, err) = magmec(&["mec", "count", &fixture("intro/knowledge.txt")]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("nodes:"), "{err}");

    let (code, _, _) = magmec(&["verify", &fixture("intro/essential.pmg"), &fixture("intro/mag.pmg")]);
    assert_eq!(code, 2);
    let (code, _, _) = magmec(&["mag2eag", "/no/such/file.pmg"]);
    assert_eq!(code, 2);
    let (code, _, _) = magmec(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn sample_mag_honours_the_request() {
    let g = fixture("intro/restricted.pmg");
    let reference = fixture("intro/essential.pmg");
    for (mark, token) in [("dir", "A --> B"), ("rev", "A <-- B"), ("bidir", "A <-> B")] {
        let (code, out, err) = magmec(&["sample-mag", &g, "--edge", "A,B", "--mark", mark, "--reference", &reference]);
        assert_eq!(code, 0, "{mark}: {err}");
        assert!(out.starts_with("# method: "), "{out}");
        let mag = magmec::parse_pmg(&out).unwrap();
        let rendered = magmec::render_pmg(&mag);
        let flipped = token.replace("A <-- B", "B --> A");
        assert!(rendered.contains(token) || rendered.contains(&flipped), "{mark}: {rendered}");
        assert!(!mag.has_circles());
    }
}

#[test]
fn sample_mag_reports_impossible_requests() {
    // B o-> C carries an arrowhead at C, so C --> B cannot be asked for.
    let (code, _, err) = magmec(&["sample-mag", &fixture("intro/restricted.pmg"), "--edge", "C,B", "--mark", "dir"]);
    assert_eq!(code, 1, "{err}");
    let (code, _, _) = magmec(&["sample-mag", &fixture("intro/restricted.pmg"), "--edge", "B,D", "--mark", "dir"]);
    assert_eq!(code, 2);
}

#[test]
fn simulate_writes_results_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = magmec(&[
        "simulate",
        "--n",
        "6",
        "--p",
        "0.3",
        "--reveal",
        "10,50",
        "--trials",
        "3",
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 3, "{out}");
    let results = std::fs::read_to_string(dir.path().join("results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 6);
    assert!(dir.path().join("summary.csv").exists());

    let (code, _, _) = magmec(&["simulate", "--p", "1.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}
