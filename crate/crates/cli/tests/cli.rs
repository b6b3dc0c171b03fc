use std::process::{Command, Output};

fn nusec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nusec"))
        .args(args)
        .env_remove("NUSEC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn result(o: &Output) -> serde_json::Value {
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["result"].clone()
}

#[test]
fn classic_on_uniform_is_near_one_over_e() {
    let o = nusec(&["simulate", "--dist", "uniform", "--policy", "classic", "--n", "1000", "--trials", "100000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let est = result(&o)["estimate"].as_f64().unwrap();
    assert!((est - 0.368).abs() < 0.01, "{est}");
}

#[test]
fn two_point_reverse_has_zero_delta() {
    let o = nusec(&["check", "--dist", "two-point-reverse", "--uiop-k", "2", "--n", "6", "--exact", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(result(&o)["uiop"]["implied_delta"].as_f64(), Some(0.0));
}

#[test]
fn output_is_byte_stable_across_threads() {
    let base = ["simulate", "--n", "200", "--policy", "random-threshold", "--values", "random", "--trials", "5000", "--seed", "11"];
    let one = nusec(&[&base[..], &["--threads", "1"]].concat());
    let two = nusec(&[&base[..], &["--threads", "3"]].concat());
    let again = nusec(&[&base[..], &["--threads", "1"]].concat());
    assert_eq!(one.stdout, again.stdout);
    let strip = |o: &Output| result(o).to_string();
    assert_eq!(strip(&one), strip(&two));
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_nusec"))
        .args(["simulate", "--n", "50", "--trials", "100"])
        .env("NUSEC_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let direct = nusec(&["simulate", "--n", "50", "--trials", "100", "--seed", "5"]);
    assert_eq!(o.stdout, direct.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nusec(&["simulate", "--n", "10"]).status.code(), Some(2), "missing seed");
    assert_eq!(nusec(&["frobnicate"]).status.code(), Some(2));
    let o = nusec(&["simulate", "--dist", "multiset", "--n", "30", "--dist-delta", "1.5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert_eq!(nusec(&["check", "--n", "6", "--seed", "1"]).status.code(), Some(2), "nothing to check");
}

#[test]
fn failed_expectation_exits_one() {
    let o = nusec(&["check", "--dist", "multiset", "--n", "8", "--dist-k", "3", "--uiop-k", "3", "--expect-delta", "0", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(result(&o)["uiop"]["implied_delta"].as_f64().unwrap() > 0.0);
}

#[test]
fn construct_text_round_trips_through_check() {
    let dir = std::env::temp_dir().join(format!("nusec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("dist.txt");
    let f = file.to_str().unwrap();
    let o = nusec(&["construct", "--dist", "two-point-reverse", "--n", "5", "--format", "text", "-o", f, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&file).unwrap().starts_with("n=5 m=2"));
    let c = nusec(&["check", "--dist", "file", "--input", f, "--uiop-k", "2", "--seed", "1"]);
    assert_eq!(result(&c)["uiop"]["implied_delta"].as_f64(), Some(0.0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn csv_has_fixed_columns() {
    let o = nusec(&["lowerbound", "--n", "8", "--k", "1", "--seed", "2", "--format", "csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("key,value\n"));
    assert!(text.lines().any(|l| l.starts_with("experiment.bound,")));
}

#[test]
fn reproduce_writes_results_and_reports_failures() {
    let dir = std::env::temp_dir().join(format!("nusec-repro-{}", std::process::id()));
    let o = nusec(&["reproduce", "--suite", "acceptance", "--criteria", "6,10", "--output-dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2/2 criteria passed"));
    assert!(dir.join("criterion-06.json").exists());
    // the adversary criterion is a known failure
    let o = nusec(&["reproduce", "--criteria", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]  9"));
    std::fs::remove_dir_all(&dir).unwrap();
}
