//! End-to-end tests of the `vecsched` binary: verbs, exit codes and
//! byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vecsched::harness::trace_fixture_dir;

fn vecsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vecsched"))
        .args(args)
        .output()
        .expect("spawn vecsched")
}

fn code(args: &[&str]) -> i32 {
    vecsched(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &Path, seed: &str) -> String {
    let scen = dir.join(format!("scenario_{seed}.txt"));
    let out = vecsched(&[
        "gen",
        "--scenario",
        p(&scen),
        "--seed",
        seed,
        "--n-tasks",
        "60",
        "--n-bs",
        "8",
        "--batches",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    p(&scen).to_string()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["run", "--help"]), 0);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["gen", "--slack", "sloppy"]), 1);
    assert_eq!(code(&["gen", "--hard-ratio", "2-1"]), 1);
    assert_eq!(code(&["gen", "--u-hat-max", "1.5"]), 1);
    assert_eq!(
        code(&["plan", "--figure", "fig5", "--out-dir", "/tmp/never"]),
        1
    );
}

#[test]
fn gen_run_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = gen(tmp.path(), "3");
    // Stdout report.
    let out = vecsched(&["run", "--scenario", &scen, "--policy", "dynamic"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("policy: dynamic_holding") && text.contains("c_total:"));
    // Unknown policy is a usage error; a missing or corrupt scenario is an input error.
    assert_eq!(
        code(&["run", "--scenario", &scen, "--policy", "fastest"]),
        1
    );
    assert_eq!(
        code(&[
            "run",
            "--scenario",
            "/nonexistent/s.txt",
            "--policy",
            "nearest"
        ]),
        2
    );
    let bad = tmp.path().join("bad.txt");
    fs::write(&bad, "this is not a scenario\n").unwrap();
    assert_eq!(
        code(&["run", "--scenario", p(&bad), "--policy", "nearest"]),
        2
    );
    // Config file: a bad key is an input error, a good one changes the run.
    let cfg = tmp.path().join("cfg.txt");
    fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(
        code(&[
            "run",
            "--scenario",
            &scen,
            "--policy",
            "nearest",
            "--config",
            p(&cfg)
        ]),
        2
    );
    fs::write(
        &cfg,
        "# heavier penalties, ratio kept at 100:1\npen_soft = 5\npen_hard = 500\n",
    )
    .unwrap();
    let a = vecsched(&["run", "--scenario", &scen, "--policy", "nearest"]);
    let b = vecsched(&[
        "run",
        "--scenario",
        &scen,
        "--policy",
        "nearest",
        "--config",
        p(&cfg),
    ]);
    assert!(b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn run_out_dir_is_byte_identical_across_processes() {
    let tmp = tempfile::tempdir().unwrap();
    let scen = gen(tmp.path(), "11");
    assert_eq!(
        fs::read(&scen).unwrap(),
        fs::read(gen(&tmp.path().join("again"), "11")).unwrap()
    );
    for policy in ["selfish", "nearest", "dynamic", "baruah"] {
        let (a, b) = (
            tmp.path().join(format!("{policy}_a")),
            tmp.path().join(format!("{policy}_b")),
        );
        for dir in [&a, &b] {
            let out = vecsched(&[
                "run",
                "--scenario",
                &scen,
                "--policy",
                policy,
                "--out-dir",
                p(dir),
            ]);
            assert!(out.status.success());
        }
        for f in ["events.log", "report.txt"] {
            assert_eq!(
                fs::read(a.join(f)).unwrap(),
                fs::read(b.join(f)).unwrap(),
                "{policy} {f}"
            );
        }
    }
}

#[test]
fn plan_plan_file_and_plot_data() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("fig9");
    assert_eq!(
        code(&[
            "plan",
            "--figure",
            "fig9",
            "--repetitions",
            "1",
            "--out-dir",
            p(&first)
        ]),
        0
    );
    for f in ["plan.txt", "detail.csv", "aggregate.csv", "timings.csv"] {
        assert!(first.join(f).is_file(), "{f}");
    }
    // The written plan reproduces the same tables.
    let second = tmp.path().join("fig9_again");
    let plan_file = first.join("plan.txt");
    assert_eq!(
        code(&[
            "plan",
            "--plan-file",
            p(&plan_file),
            "--out-dir",
            p(&second)
        ]),
        0
    );
    for f in ["detail.csv", "aggregate.csv"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
    let detail = fs::read_to_string(first.join("detail.csv")).unwrap();
    assert!(detail.starts_with("axis,value,policy,seed,"), "{detail}");

    let plots = tmp.path().join("plots");
    let out = vecsched(&[
        "plot-data",
        "--table",
        p(&first.join("detail.csv")),
        "--figure",
        "fig9",
        "--out-dir",
        p(&plots),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let series = fs::read_to_string(plots.join("fig9_dynamic_holding.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some("hard_ratio,c_drop"));
    assert_eq!(lines.count(), 3);
    // A table that does not sweep the figure's axis is a usage error.
    assert_eq!(
        code(&[
            "plot-data",
            "--table",
            p(&first.join("detail.csv")),
            "--figure",
            "fig6",
            "--out-dir",
            p(&plots)
        ]),
        1
    );
    assert_eq!(
        code(&[
            "plot-data",
            "--table",
            "/nonexistent.csv",
            "--figure",
            "fig6",
            "--out-dir",
            p(&plots)
        ]),
        2
    );
}

#[test]
fn ingest_golden_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = trace_fixture_dir();
    let mapping = tmp.path().join("mapping.txt");
    fs::write(&mapping, "flag = class\n").unwrap();
    let scen = tmp.path().join("golden.txt");
    let (tasks, locs) = (
        dir.join("golden_tasks.csv"),
        dir.join("golden_locations.csv"),
    );
    let args = [
        "ingest",
        "--tasks",
        p(&tasks),
        "--locations",
        p(&locs),
        "--mapping",
        p(&mapping),
        "--n-tasks",
        "10",
        "--n-bs",
        "3",
        "--t-max",
        "40",
        "--scenario",
        p(&scen),
    ];
    let out = vecsched(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingested 10 tasks"));
    assert_eq!(
        code(&["run", "--scenario", p(&scen), "--policy", "baruah"]),
        0
    );
    // Missing trace file is an input error.
    let mut missing = args;
    missing[2] = "/nonexistent/tasks.csv";
    assert_eq!(code(&missing), 2);
}
