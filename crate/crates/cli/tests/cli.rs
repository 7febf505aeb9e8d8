use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sumfree"))
}

/// Fresh scratch directory per test.
fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_set(dir: &PathBuf, name: &str, values: &[u64]) -> PathBuf {
    let path = dir.join(name);
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(&path, format!("# test set\n{text}")).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn check_reports_the_smallest_violation() {
    let dir = scratch("check");
    let a = write_set(&dir, "a.txt", &[1, 2, 3, 6]);
    let out = run(&["check", "--k", "2", "--in", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "sum-free=false\nviolation=1 + 1 = 2\n");
    let b = write_set(&dir, "b.txt", &[2, 3]);
    let out = run(&["check", "--k", "3", "--strong", "--in", b.to_str().unwrap()]);
    assert_eq!(stdout(&out), "strongly-sum-free=true\n");
}

#[test]
fn solve_prints_status_line_then_witness() {
    let dir = scratch("solve");
    let a = write_set(&dir, "a.txt", &(1..=9).collect::<Vec<_>>());
    for algo in ["bb", "brute"] {
        let out = run(&["solve", "max", "--k", "2", "--in", a.to_str().unwrap(), "--algo", algo]);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        let mut lines = text.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("size=5 status=optimal nodes="), "{head}");
        assert_eq!(lines.count(), 5);
    }
    let out = run(&["solve", "max", "--k", "2", "--in", a.to_str().unwrap(), "--brute"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn extraction_meets_the_guarantee() {
    let dir = scratch("extract");
    let values = [3, 10, 17, 22, 41, 56, 73, 99, 120];
    let a = write_set(&dir, "a.txt", &values);
    let out = run(&["extract", "erdos", "--k", "2", "--in", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let score: usize = text.lines().find_map(|l| l.strip_prefix("score=")).unwrap().parse().unwrap();
    assert!(score >= 3);
    assert_eq!(text.lines().skip(3).count(), score);
    let sampled = run(&["extract", "erdos", "--k", "2", "--in", a.to_str().unwrap(), "--samples", "200", "--seed", "4"]);
    assert_eq!(code(&sampled), 0);

    let out = run(&["extract", "folner", "--k", "2", "--in", a.to_str().unwrap(), "--grid", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("dilator="));
    let bad = write_set(&dir, "bad.txt", &[1, 2]);
    let out = run(&[
        "extract", "folner", "--k", "2", "--in", a.to_str().unwrap(), "--grid", "2", "--sumfree-subset",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn folner_commands() {
    let out = run(&["folner", "gen", "--grid", "3"]);
    assert_eq!(stdout(&out).lines().count(), 27);
    let out = run(&["folner", "gen", "--grid", "2,3"]);
    assert_eq!(stdout(&out), "1\n2\n3\n4\n6\n9\n12\n18\n36\n");
    let out = run(&["folner", "defect", "--grid", "4", "--a", "3"]);
    assert_eq!(stdout(&out), "defect=1/2 closed_form=1/2 match=true\n");
    let out = run(&["folner", "gen", "--grid", "9"]);
    assert_eq!(code(&out), 3);
    let out = run(&["folner", "gen", "--grid", "2,x"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn periodic_commands_write_payloads() {
    let dir = scratch("periodic");
    let odds = write_set(&dir, "odd.txt", &(1..200).step_by(2).collect::<Vec<_>>());
    let out = run(&["periodic", "hull", "--Q", "2", "--n0", "50", "--in", odds.to_str().unwrap()]);
    assert_eq!(stdout(&out), "hull={1} mod 2\ndensity=1/2\n");

    let pay = dir.join("payload");
    let a = write_set(&dir, "a.txt", &[2, 3, 7, 8, 13, 19]);
    let out = run(&[
        "periodic", "fls-step", "--k", "2", "--Q", "4", "--i", "2", "--eps", "1/10", "--n0", "8", "--ratio", "320",
        "--in", a.to_str().unwrap(), "--out", pay.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("density-drop "));
    let payload: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(pay.join("fls-density-drop.json")).unwrap()).unwrap();
    assert_eq!(payload["index"], 1);
    assert_eq!(payload["ap_start"], "2");

    // schedule too short for k*n0 = 16 terms
    let out = run(&[
        "periodic", "fls-step", "--k", "2", "--Q", "4", "--i", "2", "--eps", "1/10", "--n0", "8", "--schedule",
        "2560,819200", "--in", a.to_str().unwrap(), "--out", pay.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "periodic", "fls-step", "--k", "2", "--Q", "4", "--i", "2", "--eps", "ten", "--n0", "8", "--ratio", "320",
        "--in", a.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn measure_text_format() {
    let out = run(&["measure", "build-mu", "--k", "2", "--Q", "2", "--steps", "2", "--provider", "uniform"]);
    assert_eq!(stdout(&out), "1 1/6\n2 5/6\n");
    let out = run(&["measure", "build-mu", "--k", "2", "--Q", "2", "--steps", "2", "--provider", "nested"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn experiments_are_deterministic() {
    let out = run(&["experiment", "ratio", "--k", "2", "--m-max", "2"]);
    assert_eq!(
        stdout(&out),
        "m,cardinality,max_size,fraction,fraction_decimal,status,solver_nodes,wall_time_ms\n\
         1,1,1,1/1,1.000000,optimal,1,NA\n\
         2,4,2,1/2,0.500000,optimal,5,NA\n"
    );
    let out = run(&["experiment", "defect", "--a", "7", "--m-max", "3"]);
    assert!(stdout(&out).ends_with("2,2/1,2.000000,2/1,true\n3,2/1,2.000000,2/1,true\n"));
    let args = ["experiment", "extract", "--k", "3", "--trials", "12", "--size", "15", "--seed", "9"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains(",false"));
}

#[test]
fn fls_harness_runs_clean() {
    let dir = scratch("fls");
    let out = run(&["experiment", "fls", "--count", "10", "--seed", "3", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("instances=20 falsified=0\n"));
    assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 0);
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = scratch("invalid");
    let zero = dir.join("zero.txt");
    std::fs::write(&zero, "3\n0\n").unwrap();
    assert_eq!(code(&run(&["check", "--k", "2", "--in", zero.to_str().unwrap()])), 2);
    let a = write_set(&dir, "a.txt", &[1]);
    assert_eq!(code(&run(&["check", "--k", "1", "--in", a.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["check", "--k", "2", "--in", dir.join("missing").to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["solve", "max", "--k", "2", "--in", a.to_str().unwrap(), "--timeout", "0"])), 2);
}
