use std::fs;
use std::process::{Command, Output};

fn dqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqkd")).args(args).output().expect("spawn dqkd")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fig2_rows_are_sorted_with_twelve_digits() {
    let o = dqkd(&["fig2", "--d-list", "7,3,5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "d,detection_probability\n3,0.444444444444\n5,0.640000000000\n7,0.734693877551\n"
    );
}

#[test]
fn fig2_default_covers_odd_prime_powers_up_to_49() {
    let o = dqkd(&["fig2"]);
    let text = stdout(&o);
    let ds: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        ds,
        ["3", "5", "7", "9", "11", "13", "17", "19", "23", "25", "27", "29", "31", "37", "41", "43", "47", "49"]
    );
}

#[test]
fn fig3_hits_known_value_at_one_attack() {
    let ie = 3f64.log2().to_string();
    let o = dqkd(&["fig3", "--d-list", "3", "--max-bits", &ie, "--step", &ie]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.ends_with(",0.692307692308"), "{text}");
    assert!(!text.contains('\r'));
}

#[test]
fn figure_output_is_byte_identical_across_runs() {
    for args in [&["fig2"][..], &["fig3", "--c", "0.3"][..], &["--format", "json", "fig3"][..]] {
        assert_eq!(dqkd(args).stdout, dqkd(args).stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["fig2", "--d-list", "15"][..],
        &["mub-check", "--p", "2"][..],
        &["field-table", "--p", "9"][..],
        &["simulate", "--p", "3", "--eve", "martian"][..],
        &["fig3", "--c", "1.5"][..],
        &["no-such-command"][..],
    ] {
        assert_eq!(dqkd(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn field_table_for_gf9() {
    let o = dqkd(&["field-table", "--p", "3", "--m", "2"]);
    let text = stdout(&o);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 2);
    assert!(blocks[0].starts_with("+,0,1,2,3,4,5,6,7,8\n0,0,1,2,3,4,5,6,7,8\n"));
    assert!(blocks[1].starts_with("*,0,1,2,3,4,5,6,7,8\n0,0,0,0,0,0,0,0,0,0\n1,0,1,2,3,4,5,6,7,8\n"));
    // x·x = x² = -1 = 2 under x² + 1; x has index 3, 2 has index 2
    let row3: Vec<&str> = blocks[1].lines().nth(4).unwrap().split(',').collect();
    assert_eq!(row3[0], "3");
    assert_eq!(row3[4], "2");
}

#[test]
fn field_table_json_reports_irreducible() {
    let o = dqkd(&["--format", "json", "field-table", "--p", "5", "--m", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["irreducible"], serde_json::json!([2, 0, 1]));
    assert_eq!(v["d"], 25);
}

#[test]
fn mub_check_passes() {
    let o = dqkd(&["mub-check", "--p", "3", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("d,p,m,deviation,threshold,pass\n27,3,3,"));
    assert!(text.trim_end().ends_with(",true"));
}

#[test]
fn simulate_writes_summary_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.json");
    let records = dir.path().join("rounds.ndjson");
    let o = dqkd(&[
        "--format", "json", "--seed", "11", "--out", out.to_str().unwrap(),
        "simulate", "--p", "5", "--rounds", "400", "--eve", "controlled-shift",
        "--records", records.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(summary["stats"]["total_rounds"], 400);
    assert_eq!(summary["stats"]["eve_correct_fraction"], 1.0);
    let lines: Vec<serde_json::Value> = fs::read_to_string(&records)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 400);
    assert!(lines.iter().enumerate().all(|(i, r)| r["round_index"] == i as u64));
}

#[test]
fn simulate_is_deterministic_given_seed() {
    let args = ["--seed", "42", "simulate", "--p", "3", "--m", "2", "--rounds", "2000", "--eve", "intercept-resend"];
    let a = dqkd(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, dqkd(&args).stdout);
    let other = dqkd(&["--seed", "43", "simulate", "--p", "3", "--m", "2", "--rounds", "2000", "--eve", "intercept-resend"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn compare_passes_for_each_adversary() {
    for eve in ["none", "intercept-resend", "controlled-shift"] {
        let o = dqkd(&["--seed", "3", "compare", "--p", "3", "--rounds", "20000", "--eve", eve]);
        assert_eq!(o.status.code(), Some(0), "{eve}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.starts_with("d,eve,check,expected,observed,tolerance,pass\n"));
        assert!(text.lines().skip(1).all(|l| l.ends_with(",true")), "{text}");
    }
}
