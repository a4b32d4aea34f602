mod common;

use std::path::Path;
use std::process::{Command, Output};

use nothree::config::parse_config;
use nothree::model::parse_model_text;
use nothree::portfolio::read_runs_csv;

fn nothree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nothree"))
        .args(args)
        .env("NOTHREE_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture(n: usize) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join(format!("fixtures/symmetric/n{n}.txt"))
        .display()
        .to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sizes_small_rows() {
    let o = nothree(&["sizes", "--from", "2", "--to", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "n,direct_vars,reduced_vars,direct_constraints,reduced_constraints\n\
         2,4,1,2,2\n3,9,2,8,3\n4,16,4,14,6\n5,25,6,32,12\n"
    );
}

#[test]
fn solve_three_writes_a_valid_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.txt");
    let o = nothree(&["solve", "--n", "3", "--seed", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).split(") (").count(), 6);
    let file = parse_config(&std::fs::read_to_string(&out).unwrap()).unwrap();
    common::check_configuration(3, &file.points).unwrap();
    let v = nothree(&["verify", "--in", path_str(&out), "--expect-2n"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout(&v), "pass, 6 points\n");
}

#[test]
fn solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let oa = nothree(&["solve", "--n", "14", "--reduced", "--seed", "9", "--out", path_str(&a)]);
    let ob = nothree(&["solve", "--n", "14", "--reduced", "--seed", "9", "--out", path_str(&b)]);
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(stdout(&oa), stdout(&ob));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // Reduced solutions carry their representatives, which expand back to the same points.
    let file = parse_config(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert!(file.reps.is_some());
    let full = dir.path().join("full.txt");
    assert_eq!(nothree(&["expand", "--in", path_str(&a), "--out", path_str(&full)]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&full).unwrap());
}

#[test]
fn solve_timeout_and_unsat_exit_two() {
    let o = nothree(&["solve", "--n", "5", "--reduced", "--out", "/nonexistent/never-written"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("status=unsat"));
}

#[test]
fn verify_fixture_sixty() {
    let o = nothree(&["verify", "--in", &fixture(60), "--expect-2n"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "pass, 120 points\n");
}

#[test]
fn expand_then_verify_every_fixture() {
    let dir = tempfile::tempdir().unwrap();
    for n in [47, 49, 51, 53, 54, 55, 56, 57, 58, 59, 60] {
        let out = dir.path().join(format!("{n}.txt"));
        let e = nothree(&["expand", "--in", &fixture(n), "--out", path_str(&out)]);
        assert_eq!(e.status.code(), Some(0), "{}", stderr(&e));
        let v = nothree(&["verify", "--in", path_str(&out), "--expect-2n"]);
        assert_eq!(stdout(&v), format!("pass, {} points\n", 2 * n));
    }
}

#[test]
fn verify_rejects_collinear() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.txt");
    std::fs::write(&f, "n 4\npoint 0 0\npoint 1 1\npoint 2 2\n").unwrap();
    let o = nothree(&["verify", "--in", path_str(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(stderr(&o).contains("collinear"));
}

#[test]
fn gen_text_model_round_trips_and_solves() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.txt");
    let o = nothree(&["gen", "--n", "8", "--reduced", "--format", "text", "--out", path_str(&model)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&model).unwrap();
    let parsed = parse_model_text(&text).unwrap();
    assert_eq!(parsed, nothree::model::build_reduced(8).unwrap());
    let sol = dir.path().join("s.txt");
    let s = nothree(&["solve", "--model", path_str(&model), "--out", path_str(&sol)]);
    assert_eq!(s.status.code(), Some(0));
    let v = nothree(&["verify", "--in", path_str(&sol), "--expect-2n"]);
    assert_eq!(stdout(&v), "pass, 16 points\n");
}

#[test]
fn gen_opb_header() {
    let o = nothree(&["gen", "--n", "4", "--format", "opb"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("* #variable= 16 #constraint= 14"));
    assert_eq!(text.lines().filter(|l| l.ends_with(';')).count(), 14);
}

#[test]
fn race_record_and_winner_file() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("w.txt");
    let o = nothree(&[
        "race", "--n", "16", "--reduced", "-M", "4", "--seed-base", "3", "--timeout", "30", "--out",
        path_str(&sol),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rec["M"], 4);
    assert_eq!(rec["per_instance"].as_array().unwrap().len(), 4);
    assert!(rec["winner_seed"].is_u64());
    let v = nothree(&["verify", "--in", path_str(&sol), "--expect-2n"]);
    assert_eq!(stdout(&v), "pass, 32 points\n");
}

#[test]
fn cdf_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let o = nothree(&[
        "cdf", "--n", "20", "--reduced", "--runs", "60", "--cutoff", "30", "--seed-base", "0", "--out",
        path_str(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_runs_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().enumerate().all(|(k, r)| r.run_index == k && r.seed == k as u64));
    let f = nothree(&["fit", "--in", path_str(&csv), "-M", "4"]);
    // Either a fit or a one-line diagnostic when the data put t0 below zero.
    match f.status.code() {
        Some(0) => {
            let out = stdout(&f);
            let mut lines = out.lines();
            assert_eq!(lines.next(), Some("t0,t1,mean,t_0.5,t_0.98"));
            let vals: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
            assert!(vals[0] >= 0.0 && vals[1] > 0.0);
            assert!(vals[3] <= vals[2] && vals[2] <= vals[4]);
        }
        Some(1) => assert!(stderr(&f).contains("fit failure")),
        other => panic!("unexpected exit {other:?}"),
    }
}

#[test]
fn fit_on_constructed_runs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let mut text = String::from("run_index,seed,status,elapsed_seconds\n");
    for k in 0..200 {
        // Quantiles of a shifted exponential with t0 = 1 and mean excess 4.
        let u = (k as f64 + 0.5) / 200.0;
        text += &format!("{k},{k},sat,{}\n", 1.0 - 4.0 * (1.0 - u).ln());
    }
    text += "200,200,timeout,50\n";
    std::fs::write(&csv, text).unwrap();
    let f = nothree(&["fit", "--in", path_str(&csv), "-M", "1", "--window-p", "0.9"]);
    assert_eq!(f.status.code(), Some(0), "{}", stderr(&f));
    let out = stdout(&f);
    let vals: Vec<f64> = out.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((vals[0] - 1.0).abs() < 0.2, "{out}");
    assert!((vals[1] - 4.0).abs() < 0.4, "{out}");
}

#[test]
fn stats_and_oracle() {
    let o = nothree(&["stats", "--n", "493"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let log_c: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(log_c < 0.0);
    let o = nothree(&["oracle", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("D(5) = 10\n"));
}

#[test]
fn bad_invocations_exit_one() {
    for args in [
        &["frobnicate"][..],
        &["sizes", "--from", "2"],
        &["solve", "--n", "4", "--colour"],
        &["verify", "--in", "/nonexistent/config.txt"],
        &["gen", "--n", "4", "--format", "dimacs"],
        &["oracle", "--n", "12"],
        &["solve", "--n", "4", "--timeout", "-1"],
    ] {
        let o = nothree(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr(&o).lines().count(), 1, "{args:?}: {}", stderr(&o));
    }
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.txt");
    std::fs::write(&f, "n 4\npoint 0 zero\n").unwrap();
    let o = nothree(&["verify", "--in", path_str(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"));
}
