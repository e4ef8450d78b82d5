use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rhombikit::docking::{default_rhombic_positions, reference_cell_layout};
use rhombikit::io;
use tempfile::TempDir;

const LINE: &str = r#"{"format_version": 1, "cells": [{"pos": [0,0,0]}, {"pos": [1,1,0]}, {"pos": [2,2,0]}]}"#;
const TRIANGLE: &str = r#"{"format_version": 1, "cells": [{"pos": [0,0,0]}, {"pos": [1,1,0]}, {"pos": [1,0,1], "kind": "active"}]}"#;
const PAIR: &str = r#"{"cells": [{"pos": [0,0,0]}, {"pos": [1,1,0]}]}"#;

fn rhombikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhombikit")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn validate_reports_problems() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "ok.json", LINE);
    let o = rhombikit(&["validate", s(&ok)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3 cells"));

    let dup = write(&dir, "dup.json", r#"{"cells": [{"pos": [0,0,0]}, {"pos": [1,1,0]}, {"pos": [1,1,0]}]}"#);
    let o = rhombikit(&["validate", s(&dup)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("duplicate") && stderr(&o).contains("(1, 1, 0)") && stderr(&o).contains("cells[2]"), "{}", stderr(&o));

    let odd = write(&dir, "odd.json", r#"{"cells": [{"pos": [1,0,0]}]}"#);
    let o = rhombikit(&["validate", s(&odd)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cells[0].pos"));

    let split = write(&dir, "split.json", r#"{"cells": [{"pos": [0,0,0]}, {"pos": [4,0,0]}]}"#);
    assert_eq!(rhombikit(&["validate", s(&split)]).status.code(), Some(1));

    let o = rhombikit(&["validate", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn plan_then_replay() {
    let dir = TempDir::new().unwrap();
    let from = write(&dir, "line.json", LINE);
    let to = write(&dir, "tri.json", TRIANGLE);
    let out = dir.path().join("plan.json");
    let o = rhombikit(&["plan", "--from", s(&from), "--to", s(&to), "--plan-out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("plan: 2 moves"), "{}", stdout(&o));

    let file = io::parse_plan(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.moves.len(), 2);
    file.replay().unwrap();

    let o = rhombikit(&["replay", "--plan", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("goal matched"));

    // Identical inputs give byte-identical output and plan files.
    let out2 = dir.path().join("plan2.json");
    let o2 = rhombikit(&["plan", "--from", s(&from), "--to", s(&to), "--plan-out", s(&out2)]);
    assert_eq!(o.status, o2.status);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());

    // BFS agrees on length.
    let o = rhombikit(&["--json", "plan", "--from", s(&from), "--to", s(&to), "--algorithm", "bfs"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["length"], 2);
}

#[test]
fn tampered_plan_is_rejected() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"start": {"cells": [{"pos": [0,0,0]}, {"pos": [1,1,0]}]},
            "moves": [{"mover": [0,0,0], "substrate": [1,1,0], "from": 0, "to": 1}, {"mover": [5,5,0], "substrate": [4,4,0], "from": 11, "to": 10}]}"#,
    );
    let o = rhombikit(&["replay", "--plan", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("move 2"), "{}", stderr(&o));
}

#[test]
fn planner_exit_codes() {
    let dir = TempDir::new().unwrap();
    let pair = write(&dir, "pair.json", PAIR);
    let line = write(&dir, "line.json", LINE);
    let tri = write(&dir, "tri.json", TRIANGLE);
    assert_eq!(rhombikit(&["plan", "--from", s(&pair), "--to", s(&line)]).status.code(), Some(2));
    assert_eq!(rhombikit(&["plan", "--from", s(&line), "--to", s(&tri), "--max-states", "1"]).status.code(), Some(3));
    // Kinds never change, so a kind-sensitive mismatch is unreachable.
    assert_eq!(rhombikit(&["plan", "--from", s(&line), "--to", s(&tri), "--kind-sensitive"]).status.code(), Some(2));
    assert_eq!(rhombikit(&["plan", "--from", s(&line)]).status.code(), Some(1));
    assert_eq!(rhombikit(&["plan", "--from", s(&line), "--to", s(&tri), "--bogus"]).status.code(), Some(1));
    let o = rhombikit(&["--json", "plan", "--from", s(&pair), "--to", s(&line)]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["exit_code"], 2);
}

#[test]
fn export_two_cells() {
    let dir = TempDir::new().unwrap();
    let pair = write(&dir, "pair.json", PAIR);
    let obj = dir.path().join("pair.obj");
    let o = rhombikit(&["export", "--structure", s(&pair), "--obj", s(&obj)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 22);
    let obj2 = dir.path().join("again.obj");
    rhombikit(&["export", "--structure", s(&pair), "--obj", s(&obj2), "--scale", "1"]);
    assert_eq!(text, std::fs::read_to_string(&obj2).unwrap());
}

#[test]
fn contact_classes() {
    let dir = TempDir::new().unwrap();
    let pair = write(&dir, "pair.json", PAIR);
    let o = rhombikit(&["contact", "--structure", s(&pair), "--rot", "0,0,1,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Point"));
    // A quarter turn about (1,-1,0) brings the (1,1,0) face normal to -z.
    let o = rhombikit(&["--json", "contact", "--structure", s(&pair), "--rot", "1,-1,0,90"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["contact"], "Face");
    assert_eq!(rhombikit(&["contact", "--structure", s(&pair), "--rot", "1,2"]).status.code(), Some(1));
}

#[test]
fn dock_check_layout_and_enumeration() {
    let dir = TempDir::new().unwrap();
    let layout = write(&dir, "layout.json", &io::layout_to_json(&reference_cell_layout()));
    let o = rhombikit(&["dock-check", "--layout", s(&layout)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("genderless: yes (6912 alignments checked)"));

    let positions = write(&dir, "pos.json", &io::positions_to_json(&default_rhombic_positions()));
    let o = rhombikit(&["dock-check", "--enumerate", "--positions", s(&positions), "--symmetry", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "2 valid patterns of 16\nNSSN\nSNNS\n");
    let o = rhombikit(&["dock-check", "--enumerate", "--positions", s(&positions), "--symmetry", "1"]);
    assert_eq!(o.status.code(), Some(1));

    let all_n = layout_text_all_north();
    let bad = write(&dir, "north.json", &all_n);
    let o = rhombikit(&["dock-check", "--layout", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not genderless"));
}

fn layout_text_all_north() -> String {
    let text = io::layout_to_json(&reference_cell_layout());
    text.replace("\"S\"", "\"N\"")
}

#[test]
fn analyze_table() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("trial_id,t,x,y\n");
    for trial in 0..3 {
        for i in 0..=10 {
            csv.push_str(&format!("t{trial},{i},{},0\n", f64::from(i) * f64::from(trial + 1)));
        }
    }
    let trials = write(&dir, "trials.csv", &csv);
    let design = write(&dir, "design.json", &io::design_to_json(&rhombikit::analytics::reference_designs()[3]));
    let o = rhombikit(&["analyze", "--csv", s(&trials), "--design", s(&design)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("| Ratio of passive to active | 2.33 to 1 |"), "{text}");
    assert!(text.contains("| Avg. distance traveled (cm) | 20 +/- 10 SD |"), "{text}");
    assert!(text.contains("| No. of trials | 3 |"));
    let o = rhombikit(&["analyze", "--csv", s(&trials), "--design", s(&design), "--format", "csv"]);
    assert!(stdout(&o).contains("Body weight (g),252"));
    let broken = write(&dir, "broken.csv", "trial_id,t,x,y\na,0,0,0\na,1,oops,0\n");
    let o = rhombikit(&["analyze", "--csv", s(&broken), "--design", s(&design)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn thread_override() {
    let dir = TempDir::new().unwrap();
    let ok = write(&dir, "ok.json", LINE);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_rhombikit"))
            .env("RHOMBIKIT_THREADS", threads)
            .args(["validate", s(&ok)])
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(1));
}
