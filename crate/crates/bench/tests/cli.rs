use std::path::Path;
use std::process::{Command, Output};

use ttr_bench::EvalReport;

fn ttr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttr"))
        .args(args)
        .env_remove("TTR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The value of `key` in a `key=value` line.
fn field(text: &str, key: &str) -> String {
    let prefix = format!("{key}=");
    text.split_whitespace()
        .find_map(|w| w.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

fn error_line(o: &Output) -> String {
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let line = err.lines().last().unwrap_or("").to_string();
    assert!(line.starts_with("error: kind="), "{err}");
    assert!(line.contains(" message="), "{err}");
    line
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn generate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--out", p(dir)];
    args.extend_from_slice(extra);
    stdout(&ttr(&args));
}

#[test]
fn fcfs_on_a_punctual_instance_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--tau2", "0", "--count", "3"]);
    for n in 0..3 {
        let inst = dir.path().join(format!("instance_{n:04}.toml"));
        let sol = dir.path().join("sol.toml");
        let out = stdout(&ttr(&["solve", "--policy", "fcfs", "--instance", p(&inst), "--out", p(&sol)]));
        assert_eq!(field(&out, "objective").parse::<f64>().unwrap(), 0.0);
        let v = stdout(&ttr(&["validate", "--instance", p(&inst), "--solution", p(&sol), "--profile", "strict-milp"]));
        assert_eq!(field(&v, "violations"), "0");
    }
}

#[test]
fn oracle_on_three_by_three_completes() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--stations", "3", "--trains", "3", "--count", "5", "--tau2", "180"]);
    for n in 0..5 {
        let inst = dir.path().join(format!("instance_{n:04}.toml"));
        let out = stdout(&ttr(&["oracle", "--instance", p(&inst)]));
        let leaves: u64 = field(&out, "leaves").parse().unwrap();
        assert!((1..=36).contains(&leaves), "{out}");
        let fcfs = stdout(&ttr(&["solve", "--policy", "fcfs", "--instance", p(&inst)]));
        let o: f64 = field(&out, "objective").parse().unwrap();
        assert!(o <= field(&fcfs, "objective").parse::<f64>().unwrap());
    }
}

#[test]
fn oracle_refuses_beyond_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--stations", "3", "--trains", "3"]);
    let inst = dir.path().join("instance_0000.toml");
    let line = error_line(&ttr(&["oracle", "--instance", p(&inst), "--guard", "5"]));
    assert!(line.starts_with("error: kind=guard "), "{line}");
}

#[test]
fn evaluate_report_matches_its_summary() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    generate(&inst, &["--stations", "4", "--trains", "3", "--count", "6", "--tau2", "180", "--seed", "40"]);
    let report = dir.path().join("report.csv");
    let out = stdout(&ttr(&[
        "evaluate", "--policy", "fcfs", "fsfs", "--instances", p(&inst), "--baseline", "oracle", "--report", p(&report),
        "--threads", "3",
    ]));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("instance,method,objective,wall_ms,feasible,baseline,gap\n"));
    let r = EvalReport::read_csv(text.as_bytes()).unwrap();
    assert_eq!(r.rows.len(), 12);
    assert!(r.rows.iter().all(|row| row.baseline.is_some()));
    for row in r.rows.iter().filter(|row| row.feasible) {
        assert!(row.objective.unwrap() >= row.baseline.unwrap() - 1e-9);
    }
    let fcfs = out.lines().find(|l| l.starts_with("method=fcfs ")).unwrap();
    let s = r.summary("fcfs");
    assert_eq!(field(fcfs, "mean_objective"), format!("{:.2}", s.mean_objective.unwrap()));
    assert_eq!(field(fcfs, "infeasible"), "0");

    let summary = dir.path().join("summary.csv");
    stdout(&ttr(&["plot-data", "--report", p(&report), "--out", p(&summary)]));
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.starts_with("method,instances,infeasible,mean_objective,gap,mean_wall_ms\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn evaluate_reproduces_a_printed_gap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    generate(&inst, &["--tau2", "0"]);
    // punctual instance, so fcfs scores 0 and the gap is undefined
    let base = dir.path().join("base.csv");
    std::fs::write(&base, "instance,objective\ninstance_0000,0\n").unwrap();
    let out = stdout(&ttr(&["evaluate", "--policy", "fcfs", "--instances", p(&inst), "--baseline", p(&base)]));
    assert_eq!(field(&out, "gap_percent"), "0.00");
    let r = EvalReport { rows: vec![ttr_bench::ReportRow::new("x", "m", Some(1064.0), 0.0, Some(336.0))] };
    assert_eq!(format!("{:.2}", r.summary("m").gap.unwrap() * 100.0), "68.42");
}

#[test]
fn train_then_solve_with_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("train.toml");
    std::fs::write(&cfg, "episodes = 4\nhidden = 8\nvalidation_size = 2\neval_every = 2\nstations = 4\ntrains = 3\n").unwrap();
    let ckpt = dir.path().join("stage1.ckpt");
    let out = stdout(&ttr(&["train", "--config", p(&cfg), "--out", p(&ckpt), "--seed", "3"]));
    assert_eq!(field(&out, "episodes"), "4");
    let curve = dir.path().join("stage1.curve.csv");
    let plot = dir.path().join("curve_plot.csv");
    stdout(&ttr(&["plot-data", "--curve", p(&curve), "--out", p(&plot)]));
    assert_eq!(std::fs::read_to_string(&plot).unwrap().lines().count(), 1 + 3);

    let student = dir.path().join("stage2.ckpt");
    stdout(&ttr(&["train", "--config", p(&cfg), "--stage", "2", "--teacher", p(&ckpt), "--out", p(&student)]));
    let missing = error_line(&ttr(&["train", "--config", p(&cfg), "--stage", "2", "--out", p(&student)]));
    assert!(missing.starts_with("error: kind=train "), "{missing}");

    let inst = dir.path().join("inst");
    generate(&inst, &["--stations", "4", "--trains", "3", "--tau2", "180"]);
    let one = inst.join("instance_0000.toml");
    for ls in ["0", "20"] {
        let out = stdout(&ttr(&["solve", "--policy", p(&student), "--instance", p(&one), "--local-search", ls]));
        assert!(field(&out, "method").starts_with("policy:stage2"));
    }
}

#[test]
fn lp_export_and_timetable_series() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--stations", "3", "--trains", "2"]);
    let inst = dir.path().join("instance_0000.toml");
    let lp = dir.path().join("model.lp");
    let out = stdout(&ttr(&["export-lp", "--instance", p(&inst), "--out", p(&lp)]));
    assert_eq!(field(&out, "binaries"), (3 + 2 * 2 * 3).to_string());
    assert!(std::fs::read_to_string(&lp).unwrap().trim_end().ends_with("End"));
    let small_m = error_line(&ttr(&["export-lp", "--instance", p(&inst), "--out", p(&lp), "--big-m", "1"]));
    assert!(small_m.starts_with("error: kind=lp "), "{small_m}");

    let sol = dir.path().join("sol.toml");
    stdout(&ttr(&["solve", "--policy", "fsfs", "--instance", p(&inst), "--out", p(&sol)]));
    let series = dir.path().join("tt.csv");
    stdout(&ttr(&["plot-data", "--solution", p(&sol), "--instance", p(&inst), "--out", p(&series)]));
    let text = std::fs::read_to_string(&series).unwrap();
    assert!(text.starts_with("train,station,planned_arrival,planned_departure,arrival,departure,delay\n"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn bad_input_gives_an_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "num_stations = \"many\"\n").unwrap();
    let line = error_line(&ttr(&["solve", "--policy", "fcfs", "--instance", p(&bad)]));
    assert!(line.starts_with("error: kind=malformed "), "{line}");
    assert_eq!(line.lines().count(), 1);

    let o = ttr(&["solve", "--policy", "fcfs", "--instance", p(&bad), "--colour"]);
    assert!(error_line(&o).starts_with("error: kind=usage "));
    assert_eq!(o.status.code(), Some(2));

    assert!(error_line(&ttr(&["frobnicate"])).starts_with("error: kind=usage "));
    let missing = dir.path().join("nope.toml");
    assert!(error_line(&ttr(&["oracle", "--instance", p(&missing)])).starts_with("error: kind=io "));
    assert!(error_line(&ttr(&["solve", "--policy", "lifo", "--instance", p(&bad)])).starts_with("error: kind=usage "));

    let garbage = dir.path().join("policy.ckpt");
    std::fs::write(&garbage, b"not a checkpoint").unwrap();
    generate(dir.path(), &[]);
    let inst = dir.path().join("instance_0000.toml");
    let line = error_line(&ttr(&["solve", "--policy", p(&garbage), "--instance", p(&inst)]));
    assert!(line.starts_with("error: kind=checkpoint "), "{line}");
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, env: Option<&str>, flag: &[&str]| {
        let out = dir.path().join(sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ttr"));
        cmd.args(["generate", "--out", p(&out)]).args(flag).env_remove("TTR_SEED");
        if let Some(s) = env {
            cmd.env("TTR_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read_to_string(out.join("instance_0000.toml")).unwrap()
    };
    let from_env = run("a", Some("11"), &[]);
    assert_eq!(from_env, run("b", None, &["--seed", "11"]));
    assert_ne!(from_env, run("c", None, &[]));
}
