use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const TINY: &str = "WND 1
DIM 2 2 1 1
D 5
N 0.1
LEVELS 3 0 1 2
BP 1 1 1
RX 1 1
RX 2 1
A 1 1 0.9
A 1 2 0.1
A 2 1 0.1
A 2 2 0.9
END
";

fn pfmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfmap"))
        .args(args)
        .output()
        .expect("spawn pfmap")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_presets() {
    let o = pfmap(&["generate", "--preset", "S1", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("WND 1\nDIM 12 100 1 1\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("RX ")).count(), 100);

    let dir = TempDir::new().unwrap();
    let out = dir.path().join("r3.wnd");
    let o = pfmap(&["generate", "--preset", "r3", "-o", s(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1), Some("DIM 27 484 3 4"));
    assert_eq!(text.lines().filter(|l| l.starts_with("BP ")).count(), 4);
}

#[test]
fn generate_explicit_dims_and_errors() {
    let o = pfmap(&[
        "generate",
        "--transmitters",
        "2",
        "--receivers",
        "5",
        "--frequencies",
        "1",
        "--burst-profiles",
        "2",
        "--levels",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("DIM 2 5 1 2\n"));
    assert!(stdout(&o).contains("LEVELS 3 0 0.5 1\n"));

    let o = pfmap(&["generate", "--preset", "X1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown preset 'X1'"));

    let o = pfmap(&["generate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = pfmap(&["solve"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_is_deterministic_and_writes_best_run() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("s1.wnd");
    assert!(
        pfmap(&["generate", "--preset", "S1", "--seed", "2", "-o", s(&inst)])
            .status
            .success()
    );

    let run = |tag: &str, extra: &[&str]| {
        let plan = dir.path().join(format!("{tag}.plan"));
        let log = dir.path().join(format!("{tag}.csv"));
        let mut args = vec![
            "solve",
            s(&inst),
            "--generations",
            "20",
            "--seed",
            "5",
            "-o",
            s(&plan),
            "--log",
            s(&log),
        ];
        args.extend_from_slice(extra);
        let o = pfmap(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        (
            stdout(&o),
            std::fs::read_to_string(plan).unwrap(),
            std::fs::read_to_string(log).unwrap(),
        )
    };
    let a = run("a", &[]);
    let b = run("b", &[]);
    assert_eq!(a, b);
    assert!(a
        .0
        .starts_with("run,seed,covered,revenue,generations\n1,5,"));
    assert!(a.1.starts_with("PLAN 1\nDIM 12 100 1 1\n"));
    assert_eq!(
        a.2.lines().next(),
        Some("generation,best_fitness,mean_fitness")
    );
    assert_eq!(a.2.lines().count(), 22);

    let (out, plan, _) = run("multi", &["--runs", "3"]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(
        rows[1].starts_with("1,5,") && rows[2].starts_with("2,6,") && rows[3].starts_with("3,7,")
    );
    let covered: Vec<usize> = rows[1..4]
        .iter()
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let best = *covered.iter().max().unwrap();
    assert_eq!(rows[4], format!("best,{best}"));
    assert!(plan.contains(&format!("COVERED {best}\n")));

    let timed = dir.path().join("timed.csv");
    let o = pfmap(&[
        "solve",
        s(&inst),
        "--generations",
        "2",
        "--log",
        s(&timed),
        "--timings",
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(timed).unwrap().lines().next(),
        Some("generation,best_fitness,mean_fitness,elapsed_ms")
    );
}

#[test]
fn solve_reaches_oracle_on_tiny_instance() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "tiny.wnd", TINY);
    let o = pfmap(&["oracle", s(&inst)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "optimum 2\nrevenue 2\nenumerated 9\ngenome 1 2\n"
    );

    let plan = dir.path().join("ga.plan");
    let o = pfmap(&["solve", s(&inst), "--generations", "10", "-o", s(&plan)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("best,2\n"));
    let o = pfmap(&["verify", s(&inst), s(&plan)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "ok: 2 receivers served, no violations\n");
}

#[test]
fn solve_rejects_bad_parameters() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "tiny.wnd", TINY);
    let o = pfmap(&["solve", s(&inst), "--generations", "5", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = pfmap(&["solve", s(&inst), "--generations", "5", "--runs", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let broken = write(&dir, "broken.wnd", "WND 1\nDIM 2 2 1\n");
    let o = pfmap(&["solve", s(&broken), "--generations", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn oracle_refuses_large_instances() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("s1.wnd");
    assert!(pfmap(&["generate", "--preset", "S1", "-o", s(&inst)])
        .status
        .success());
    let o = pfmap(&["oracle", s(&inst)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refusing to enumerate 2176782336 power vectors"));

    let tiny = write(&dir, "tiny.wnd", TINY);
    let o = pfmap(&["oracle", s(&tiny), "--max-enum", "8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pfmap(&["oracle", s(&tiny), "--max-enum", "9"]);
    assert!(o.status.success());
}

#[test]
fn export_lp_reports_counts() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("s1.wnd");
    assert!(pfmap(&["generate", "--preset", "S1", "-o", s(&inst)])
        .status
        .success());
    let lp = dir.path().join("s1.lp");
    let o = pfmap(&["export-lp", s(&inst), "-o", s(&lp)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("12 continuous variables\n1200 binary variables\n1200 SIR rows\n100 assignment rows\n12 capacity rows"));
    assert!(std::fs::read_to_string(&lp).unwrap().ends_with("End\n"));

    let tiny = write(&dir, "tiny.wnd", TINY);
    let lp = dir.path().join("tiny.lp");
    let o = pfmap(&["export-lp", s(&tiny), "-o", s(&lp)]);
    assert!(stdout(&o).contains("\n4 SIR rows\n"));

    let o = pfmap(&[
        "export-lp",
        s(&tiny),
        "-o",
        s(&dir.path().join("missing/x.lp")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_tampered_plans() {
    let dir = TempDir::new().unwrap();
    let tight = TINY.replace("D 5", "D 1.5");
    let inst = write(&dir, "tight.wnd", &tight);

    let overloaded = write(
        &dir,
        "overloaded.plan",
        "PLAN 1\nDIM 2 2 1 1\nCOVERED 2\nP 1 1 3\nP 2 1 1\nS 1 1 1 1\nS 2 1 1 1\nEND\n",
    );
    let o = pfmap(&["verify", s(&inst), s(&overloaded)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("capacity violation"), "{}", stdout(&o));

    let silent = write(
        &dir,
        "silent.plan",
        "PLAN 1\nDIM 2 2 1 1\nCOVERED 1\nP 1 1 1\nP 2 1 2\nS 1 1 1 1\nEND\n",
    );
    let o = pfmap(&["verify", s(&inst), s(&silent)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("SIR violation"), "{}", stdout(&o));

    let wrong_dims = write(
        &dir,
        "dims.plan",
        "PLAN 1\nDIM 1 1 1 1\nCOVERED 0\nP 1 1 1\nEND\n",
    );
    let o = pfmap(&["verify", s(&inst), s(&wrong_dims)]);
    assert_eq!(o.status.code(), Some(2));
}
