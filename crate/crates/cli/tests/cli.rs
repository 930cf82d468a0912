use std::path::PathBuf;
use std::process::{Command, Output};

use gwfo::tree::{format_ball, parse_tree, Ball, NodeId, TreeBuilder};
use serde_json::Value;

fn gwfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwfo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gwfo-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn survival_json() {
    let v = json(&gwfo(&["survival", "--lambda", "2"]));
    let p = v["p"].as_f64().unwrap();
    assert!((1.0 - p - (-2.0 * p).exp()).abs() < 1e-12);
    // 17 significant digits
    let text = stdout(&gwfo(&["survival", "--lambda", "2"]));
    assert!(text.contains("\"p\":7.9681213002002005e-1"), "{text}");
}

#[test]
fn classify_and_expr() {
    let o = gwfo(&[
        "classify",
        "--k",
        "2",
        "--depth",
        "2",
        "--tree",
        "((())()())",
    ]);
    assert_eq!(stdout(&o), "k=2 depth=2\n{1:{1:*},w:{}}\n");
    let o = gwfo(&["expr", "--class", "{}", "--k", "1", "--depth", "1"]);
    assert_eq!(stdout(&o), "exp(-1*x)\n");
}

#[test]
fn class_file_with_header() {
    let dir = scratch("class");
    let file = dir.join("c.txt");
    std::fs::write(&file, "k=2 depth=1\n{1:*}\n").unwrap();
    let v = json(&gwfo(&[
        "prob",
        "--class",
        file.to_str().unwrap(),
        "--lambda",
        "2",
        "--conditional",
        "infinite",
    ]));
    let expected = 2.0 * (-2.0f64).exp();
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(gwfo(&["bogus"]).status.code(), Some(1));
    assert_eq!(gwfo(&["survival"]).status.code(), Some(1));
    assert_eq!(
        gwfo(&["prob", "--class", "{1:*}", "--lambda", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        gwfo(&["classify", "--k", "1", "--depth", "1", "--tree", "(()"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(gwfo(&["survival", "--lambda", "-1"]).status.code(), Some(1));
    assert_eq!(gwfo(&["--help"]).status.code(), Some(0));
}

#[test]
fn mc_reports_are_reproducible() {
    let args = [
        "mc", "classes", "--lambda", "2", "--k", "2", "--depth", "1", "--trials", "2000", "--seed",
        "17",
    ];
    let a = gwfo(&args);
    let b = gwfo(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# "));
    assert_eq!(text.lines().count(), 2 + 3);

    let mut other = args;
    other[11] = "18";
    assert_ne!(gwfo(&other).stdout, a.stdout);
}

#[test]
fn mc_json_and_out_file() {
    let dir = scratch("mc");
    let out = dir.join("decay.json");
    let o = gwfo(&[
        "mc",
        "decay",
        "--lambda",
        "2",
        "--trials",
        "500",
        "--budgets",
        "10,20,40",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["budgets"], serde_json::json!([10, 20, 40]));
    assert!(v["fitted_log_slope"].as_f64().unwrap() < 0.0);

    let o = gwfo(&[
        "mc",
        "conditional",
        "--lambda",
        "2",
        "--k",
        "1",
        "--depth",
        "1",
        "--trials",
        "500",
        "--proxy-depth",
        "8",
        "--format",
        "json",
    ]);
    let rows = json(&o);
    assert_eq!(rows.as_array().unwrap().len(), 4);
}

#[test]
fn simulate_to_files() {
    let dir = scratch("sim");
    let out = dir.join("tree.txt");
    let o = gwfo(&[
        "simulate",
        "--lambda",
        "1.5",
        "--seed",
        "0x2a",
        "--budget",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let tree = parse_tree(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let side: Value =
        serde_json::from_slice(&std::fs::read(dir.join("tree.txt.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 42);
    let draws = side["trace"]["draws"].as_array().unwrap();
    let expanded: u64 = draws.iter().map(|d| d.as_u64().unwrap()).sum();
    assert_eq!(tree.len() as u64, 1 + expanded);
}

#[test]
fn ef_both_games() {
    let v = json(&gwfo(&["ef", "--k", "2", "((())())", "(()(()))"]));
    assert_eq!(v["winner"], "duplicator");
    let v = json(&gwfo(&["ef", "--k", "2", "(())", "((()))"]));
    assert_eq!(v["winner"], "spoiler");
    let v = json(&gwfo(&[
        "ef",
        "--k",
        "1",
        "--ball",
        "--radius",
        "2",
        "--center1",
        "1",
        "--center2",
        "1",
        "((()))",
        "(())",
    ]));
    assert_eq!(v["winner"], "spoiler");
}

#[test]
fn fo_depth_and_eval() {
    let v = json(&gwfo(&[
        "fo",
        "depth",
        "--formula",
        "exists v. forall w. !parent(v, w)",
    ]));
    assert_eq!(v["depth"], 2);
    let v = json(&gwfo(&[
        "fo",
        "eval",
        "--formula",
        "exists v. parent(R, v)",
        "--tree",
        "(())",
    ]));
    assert_eq!(v["value"], true);
    let v = json(&gwfo(&[
        "fo",
        "eval",
        "--dialect",
        "ball",
        "--M",
        "4",
        "--formula",
        "exists v. d(R, v) = 2",
        "--tree",
        "(()())",
        "--center",
        "1",
    ]));
    assert_eq!(v["value"], true);
    assert_eq!(
        gwfo(&["fo", "eval", "--formula", "parent(R, v)", "--tree", "()"])
            .status
            .code(),
        Some(1)
    );
}

/// A path of `r` nodes ending at the center, with `leaves` leaf children
/// under the center.
fn hanging_ball(r: u32, leaves: usize) -> Ball {
    let mut b = TreeBuilder::new();
    let mut v = b.root();
    for _ in 1..r {
        v = b.add_child(v);
    }
    for _ in 0..leaves {
        b.add_child(v);
    }
    Ball::from_parts(b.build(), v, r)
}

fn catalog_dir(name: &str, r: u32) -> PathBuf {
    let dir = scratch(name);
    let cat = dir.join("catalog");
    std::fs::create_dir(&cat).unwrap();
    std::fs::write(cat.join("a.ball"), format_ball(&hanging_ball(r, 0))).unwrap();
    std::fs::write(cat.join("b.ball"), format_ball(&hanging_ball(r, 2))).unwrap();
    dir
}

#[test]
fn christmas_tree_file_and_report() {
    let dir = catalog_dir("xmas1", 9);
    let out = dir.join("tree.txt");
    let o = gwfo(&[
        "christmas",
        "--k",
        "1",
        "--catalog",
        dir.join("catalog").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let v = json(&o);
    assert_eq!(v["point1"]["passed"], true);
    assert_eq!(v["point2"]["passed"], true);
    let t = parse_tree(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["nodes"], t.len());
    for c in v["centers"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|c| c.as_array().unwrap())
    {
        let c = NodeId(c.as_u64().unwrap() as u32);
        assert_eq!(t.distance(t.root(), c), 252);
    }
}

#[test]
fn christmas_validation_failure_exits_two() {
    let dir = catalog_dir("xmas2", 27);
    let out = dir.join("tree.txt");
    let o = gwfo(&[
        "christmas",
        "--k",
        "2",
        "--copies",
        "1",
        "--catalog",
        dir.join("catalog").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["point2"]["passed"], false);
    assert!(out.exists());
}
