use std::path::Path;
use std::process::{Command, Output};

fn e8ks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_e8ks"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn verify_passes_and_names_every_check() {
    let o = e8ks(&["verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    for part in [
        "bases: 2025 OK",
        "perRay: 135 OK",
        "degree: 63 OK",
        "saturation: OK",
        "groupOrder: 696729600 OK",
    ] {
        assert!(line.contains(part), "{part} missing from {line}");
    }
}

#[test]
fn verify_lists_profiles() {
    let o = e8ks(&["verify", "--profile-census"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("profiles: 33"));
    assert!(text.contains("CCEEGGGG,15,1"));
    assert!(text.contains("EEFFGGHH,45,3"));
}

#[test]
fn verify_with_corrupted_fixture_fails() {
    let dir = tempfile::tempdir().unwrap();
    let w = std::fs::read_to_string(fixture("w_cycles.txt")).unwrap();
    std::fs::write(
        dir.path().join("w_cycles.txt"),
        w.replace("(1 2 3", "(2 1 3"),
    )
    .unwrap();
    let o = e8ks(&["verify", "--fixture-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("generation:"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed check `generation`"));
}

#[test]
fn search_type2_reports_both_symbols() {
    let o = e8ks(&["search", "type2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["critical"], 44);
    assert_eq!(v["exhaustive"], true);
    let counts: Vec<(String, u64)> = v["symbols"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            (
                s["symbol"].as_str().unwrap().to_string(),
                s["count"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        counts,
        vec![("36_2-9_8".to_string(), 20), ("60_2-15_8".to_string(), 24)]
    );
}

#[test]
fn search_output_is_deterministic() {
    let args = [
        "search",
        "type4",
        "--samples",
        "500",
        "--seed",
        "9",
        "--format",
        "csv",
    ];
    let a = e8ks(&args);
    let b = e8ks(&args);
    assert_eq!(
        a.status.code(),
        Some(3),
        "sampled census is flagged partial"
    );
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn certificates_round_trip_through_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = e8ks(&[
        "search",
        "type1",
        "--out",
        dir.path().to_str().unwrap(),
        "--certificates",
        "1",
    ]);
    assert!(o.status.success());
    assert!(dir.path().join("census.csv").exists());
    let certs: Vec<_> = std::fs::read_dir(dir.path().join("certificates"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(certs.len(), 3);
    for path in certs {
        let original: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let o = e8ks(&["check", path.to_str().unwrap(), "--format", "json"]);
        assert!(o.status.success());
        let checked: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        for field in [
            "bases",
            "basisLabels",
            "parity",
            "symbol",
            "critical",
            "witnesses",
            "gap",
        ] {
            assert_eq!(checked[field], original[field], "{field}");
        }
    }
}

#[test]
fn check_reports_refined_symbol() {
    let o = e8ks(&["check", &fixture("proof_type4_9.txt")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("symbol: 36_2-9_8"));
    assert!(text.contains("refined symbol: 10^2_2 16^1_2-8_6 1_4"));
    assert!(text.contains("critical: yes"));
    assert!(text.contains("noncontextual bound: 7 of 9"));
}

#[test]
fn check_failures_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("single.txt");
    std::fs::write(&single, "1 7 62 66 70 73 107 111\n").unwrap();
    let o = e8ks(&["check", single.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not a parity proof"));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1 2 3 4 5 6 7 8\n").unwrap();
    assert_eq!(
        e8ks(&["check", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        e8ks(&["check", "/nonexistent/proof.txt"]).status.code(),
        Some(2)
    );
    assert_eq!(e8ks(&["search", "type9"]).status.code(), Some(2));
    assert_eq!(e8ks(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        e8ks(&["substructures", "e6", "--i", "1", "--j", "7"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn tiny_node_budget_is_reported() {
    let o = e8ks(&["check", &fixture("proof_type3.txt"), "--node-budget", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn substructures_match_expectations() {
    let o = e8ks(&["substructures", "e7", "--anchor", "40"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("63_15-135_7 (saturated, UNCOLORABLE)"));
    let o = e8ks(&[
        "substructures",
        "kp",
        "--seeds",
        "0,1,2,3,6",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["isKP"], true);
    assert_eq!(v[0]["proofCounts"]["11"], 320);
    assert_eq!(v[0]["proofCounts"]["13"], 640);
    assert_eq!(v[0]["proofCounts"]["15"], 64);
}

#[test]
fn export_shapes() {
    let o = e8ks(&["export", "rays"]);
    assert_eq!(stdout(&o).lines().count(), 121);
    let o = e8ks(&["export", "bases"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2026);
    assert_eq!(text.lines().nth(1), Some("0,0,0,1,7,62,66,70,73,107,111"));
}
