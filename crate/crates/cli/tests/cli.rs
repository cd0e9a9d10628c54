use std::path::PathBuf;
use std::process::Command;

use ambientforge_cli::commands::{self, Normalization, Options};
use ambientforge_cli::fixtures;
use ambientforge_cli::metricfile::{Body, MetricFile};
use ambientforge_cli::report::{ErrorKind, Report};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ambientforge"))
}

fn opts() -> Options {
    Options::default()
}

fn entry<'a>(rep: &'a Report, block: &str, index: &str) -> Option<&'a str> {
    rep.block(block)?
        .entries
        .iter()
        .find(|e| e.index == index)
        .map(|e| e.value.as_str())
}

fn assert_all_pass(rep: &Report) {
    assert!(rep.error.is_none(), "{:?}", rep.error);
    for c in &rep.checks {
        assert_eq!(c.status, "pass", "{}: {:?}", c.name, c.witness);
    }
    assert_eq!(rep.exit_code(), 0);
}

#[test]
fn curvature_of_sig22_reports_the_ricci_tensor() {
    let rep = commands::curvature(None, fixtures::SIG22, &opts());
    assert_all_pass(&rep);
    assert_eq!(entry(&rep, "Ricci", "y1,y1"), Some("-12*x1^2"));
    assert_eq!(entry(&rep, "Ricci", "y1,y2"), Some("24*x1*x2"));
    assert_eq!(entry(&rep, "Ricci", "y2,y2"), Some("-12*x2^2"));
    for b in ["Christoffel", "Riemann", "scalar curvature", "Schouten", "Cotton", "Weyl", "Bach"] {
        assert!(rep.block(b).is_some(), "{}", b);
    }
}

#[test]
fn curvature_of_flat_space_is_zero() {
    let rep = commands::curvature(None, fixtures::FLAT, &opts());
    assert_all_pass(&rep);
    for b in ["Christoffel", "Riemann", "Ricci", "Weyl", "Bach"] {
        assert!(rep.block(b).unwrap().entries.is_empty(), "{}", b);
    }
    assert_eq!(entry(&rep, "scalar curvature", ""), Some("0"));
}

#[test]
fn curvature_of_a_frame_file_includes_frame_ricci() {
    let rep = commands::curvature(None, fixtures::HEISENBERG_SEMIDIRECT, &opts());
    assert_all_pass(&rep);
    assert_eq!(entry(&rep, "frame Ricci", "1bar,1bar"), Some("-1/2"));
}

#[test]
fn malformed_entry_is_an_input_error_with_a_position() {
    let text = "[coordinates]\nx y\n[metric]\ng[x,x] = 1 + \ng[y,y] = 1\n";
    let rep = commands::curvature(Some("bad.metric"), text, &opts());
    let e = rep.error.as_ref().unwrap();
    assert_eq!(e.kind, ErrorKind::Input);
    assert!(e.message.starts_with("line 4, column 13:"), "{}", e.message);
    assert_eq!(rep.exit_code(), 2);
}

#[test]
fn walker_check_on_the_fixture_files() {
    let rep = commands::walker_check(None, &std::fs::read_to_string(fixture("ppwave-odd.metric")).unwrap(), &opts());
    assert_all_pass(&rep);
    assert_eq!(rep.passed("nrw: null Ricci Walker (image of Ric in N)"), Some(true));

    let rep = commands::walker_check(None, fixtures::SIG22, &opts());
    assert!(rep.checks.iter().filter(|c| c.name.starts_with("walker")).all(|c| c.status == "pass"));
    let rc = rep.check("null contraction: N contracted into R vanishes").unwrap();
    assert_eq!(rc.status, "fail");
    assert!(rc.witness.is_some());
    assert_eq!(rep.exit_code(), 1);

    let rep = commands::walker_check(None, fixtures::NON_WALKER, &opts());
    let c = rep.check("walker: null block g_ab = 0").unwrap();
    assert_eq!(c.status, "fail");
    assert_eq!(c.witness.as_deref(), Some("g[v,v] = y"));
    assert_eq!(rep.exit_code(), 1);
}

#[test]
fn walker_check_needs_a_rank() {
    let rep = commands::walker_check(None, fixtures::FLAT, &opts());
    assert_eq!(rep.exit_code(), 2);
    let o = Options { rank: Some(1), ..opts() };
    let rep = commands::walker_check(None, fixtures::FLAT, &o);
    assert_eq!(rep.check("walker: null block g_ab = 0").map(|c| c.status), Some("fail"));
}

#[test]
fn expand_ppwave_odd_matches_the_closed_form() {
    let o = Options { order: Some(4), ..opts() };
    let rep = commands::expand(None, fixtures::PPWAVE_ODD, &o);
    assert_all_pass(&rep);
    assert_eq!(entry(&rep, "g^(1)", "u,u"), Some("-4*u*y3^2 - 2/3*y1^2 - 2/3*y2^2"));
    assert_eq!(entry(&rep, "g^(2)", "u,u"), Some("4*u + 4/3"));
    assert!(rep.block("g^(3)").unwrap().entries.is_empty());
    assert!(rep.checks.iter().any(|c| c.name.starts_with("audit:")));
}

#[test]
fn expand_einstein_matches_the_closed_form() {
    let o = Options { order: Some(3), ..opts() };
    let rep = commands::expand(None, fixtures::EINSTEIN_H3, &o);
    assert_all_pass(&rep);
    // g^(1) = -g and g^(2) = g/4, as in the [ambient] section.
    let file = MetricFile::parse(fixtures::EINSTEIN_H3).unwrap();
    let h = file.ambient_h().unwrap();
    for (k, e2) in [(1, 2), (2, 4)] {
        for (i, c) in ["x", "y", "z"].iter().enumerate() {
            let want = h.get(&[i, i]).coeff(e2, 0).to_string();
            assert_eq!(entry(&rep, &format!("g^({})", k), &format!("{},{}", c, c)), Some(want.as_str()));
        }
    }
    assert!(rep.block("g^(3)").unwrap().entries.is_empty());
}

#[test]
fn expand_past_the_barrier_is_obstructed() {
    let o = Options { order: Some(2), ..opts() };
    let rep = commands::expand(None, fixtures::SIG22, &o);
    let e = rep.error.as_ref().unwrap();
    assert_eq!(e.kind, ErrorKind::Obstructed);
    let ob = &e.values[0];
    assert_eq!(ob.name, "obstruction (paper)");
    assert_eq!(ob.entries[0].value, "-144*x1^2");
    assert_eq!(rep.exit_code(), 1);
    let o = Options { order: Some(2), normalization: Normalization::Canonical, ..opts() };
    let rep = commands::expand(None, fixtures::SIG22, &o);
    assert_eq!(rep.error.as_ref().unwrap().values[0].entries[0].value, "144*x1^2");
}

#[test]
fn expand_continues_with_a_trace_free_choice() {
    let text = "[coordinates]\nv y1 y2 u\nrank = 1\n[metric]\ng[v,u] = 1\ng[y1,y1] = 1\ng[y2,y2] = 1\ng[u,u] = y1^2 - y2^2 + u*y1\n";
    let o = Options { order: Some(4), ..opts() };
    let rep = commands::expand(None, text, &o);
    assert_eq!(rep.error.as_ref().unwrap().kind, ErrorKind::Barrier);
    let o = Options {
        order: Some(4),
        even_choice: Some(("choice".into(), "c[u,u] = u*y1\n".into())),
        ..opts()
    };
    let rep = commands::expand(None, text, &o);
    assert_all_pass(&rep);
    assert_eq!(entry(&rep, "g^(2)", "u,u"), Some("u*y1"));
    // A choice with a trace is rejected as input.
    let o = Options {
        order: Some(4),
        even_choice: Some(("choice".into(), "c[y1,y1] = 1\n".into())),
        ..opts()
    };
    assert_eq!(commands::expand(None, text, &o).exit_code(), 2);
}

#[test]
fn verify_sig22_passes_at_first_order_and_fails_at_second() {
    let o = Options { order: Some(1), ..opts() };
    assert_all_pass(&commands::verify(None, fixtures::SIG22, &o));
    let o = Options { order: Some(2), ..opts() };
    let rep = commands::verify(None, fixtures::SIG22, &o);
    let c = rep.check("residuals: E1 vanishes below rho^2").unwrap();
    assert_eq!(c.status, "fail");
    assert_eq!(c.witness.as_deref(), Some("E1[y1,y1] = (144*x1^2)*rho^1 + O(rho^2)"));
    assert_eq!(rep.passed("direct ambient Ricci agrees with the residuals"), Some(true));
    assert_eq!(rep.exit_code(), 1);
    // With the exact h the ij block of the ambient Ricci tensor is
    // rho(3 rho - 1) O with O = -144 x1^2 dy1^2 + ...
    let v = entry(&rep, "exact ambient Ricci", "y1,y1").unwrap();
    assert!(v.contains("432") && v.contains("144"), "{}", v);
}

#[test]
fn verify_flat_and_closed_forms() {
    assert_all_pass(&commands::verify(None, fixtures::FLAT, &opts()));
    let o = Options { order: Some(6), ..opts() };
    assert_all_pass(&commands::verify(None, fixtures::PPWAVE_ODD, &o));
    assert_all_pass(&commands::verify(None, fixtures::EINSTEIN_H3, &o));
    let rep = commands::verify(None, fixtures::PPWAVE_EVEN, &opts());
    assert_eq!(rep.exit_code(), 2);
}

#[test]
fn every_example_passes() {
    for name in fixtures::EXAMPLES {
        let rep = commands::example(name, &opts());
        assert_all_pass(&rep);
        assert!(rep.checks.len() > 5, "{}", name);
    }
    let rep = commands::example("nope", &opts());
    assert_eq!(rep.exit_code(), 2);
}

#[test]
fn fixtures_parse_into_the_expected_bodies() {
    assert!(matches!(MetricFile::parse(fixtures::SIG22).unwrap().body, Body::Coordinates(_)));
    let f = MetricFile::parse(fixtures::HEISENBERG_SEMIDIRECT).unwrap();
    assert_eq!(f.frame().unwrap().rank(), 1);
}

#[test]
fn reports_are_deterministic() {
    let o = Options { order: Some(2), ..opts() };
    let a = commands::verify(Some("x"), fixtures::SIG22, &o).to_json();
    let b = commands::verify(Some("x"), fixtures::SIG22, &o).to_json();
    assert_eq!(a, b);
    let c = commands::verify(Some("x"), fixtures::SIG22, &Options { order: Some(1), ..opts() });
    assert_ne!(c.inputs.sha256, commands::verify(Some("x"), fixtures::SIG22, &o).inputs.sha256);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema"], "ambientforge-report/1");
    assert_eq!(v["command"], "verify");
    assert_eq!(v["inputs"]["flags"]["order"], "2");
    for c in v["checks"].as_array().unwrap() {
        let status = c["status"].as_str().unwrap();
        assert!(status == "pass" || status == "fail");
        if status == "fail" {
            assert!(c["witness"].is_string());
        }
    }
}

#[test]
fn binary_exit_codes_and_json_output() {
    let out = bin().args(["example", "sig22"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS obstruction = -144"));

    let out = bin()
        .arg("verify")
        .arg(fixture("sig22.metric"))
        .args(["--order", "2", "--json", "-"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["inputs"]["flags"]["order"], "2");

    let out = bin().arg("curvature").arg("/nonexistent/file.metric").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["example", "sig22", "--normalization", "obstruction=bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = std::env::temp_dir().join(format!("ambientforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("report.json");
    let out = bin()
        .arg("walker-check")
        .arg(fixture("ppwave-even.metric"))
        .arg("--json")
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["command"], "walker-check");
    std::fs::remove_dir_all(&dir).unwrap();
}
