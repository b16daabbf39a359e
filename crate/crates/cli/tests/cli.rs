use std::fs;
use std::process::{Command, Output};

use qsdc_core::CapacityReport64;
use serde_json::Value;
use tempfile::TempDir;

fn qsdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdc"))
        .args(args)
        .output()
        .expect("spawn qsdc")
}

fn stdout(out: &Output) -> &str {
    assert!(
        out.status.success(),
        "exit {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    std::str::from_utf8(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_decodes_every_trial() {
    let out = qsdc(&["run", "--parties", "3", "--trials", "100", "--seed", "7"]);
    let doc: Value = serde_json::from_str(stdout(&out)).unwrap();
    let transcripts = doc["transcripts"].as_array().unwrap();
    assert_eq!(transcripts.len(), 100);
    for t in transcripts {
        assert_eq!(t["decoded"], t["message"]);
        assert_eq!(t["sender_outcomes"].as_array().unwrap().len(), 3);
        assert!((t["joint_probability"].as_f64().unwrap() - 1.0 / 16.0).abs() < 1e-9);
    }
}

#[test]
fn oversized_party_count_is_refused() {
    for cmd in ["run", "analyze", "consistency", "verify-swap"] {
        let out = qsdc(&[cmd, "--parties", "7"]);
        assert!(!out.status.success(), "{cmd} accepted M=7");
        assert!(
            stderr(&out).contains("--parties 6"),
            "{cmd}: {}",
            stderr(&out)
        );
    }
    assert!(!qsdc(&["run", "--parties", "1"]).status.success());
}

#[test]
fn malformed_scheme_file_leaves_no_output() {
    let dir = TempDir::new().unwrap();
    let scheme = dir.path().join("bad.scheme");
    fs::write(
        &scheme,
        "parties = 2\nleader = 00=I, 01=X, 10=X, 11=Z\nfollower.1 = 0=I, 1=X\n",
    )
    .unwrap();
    let target = dir.path().join("report.json");
    let out = qsdc(&[
        "analyze",
        "--scheme",
        scheme.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("bijection"), "{}", stderr(&out));
    assert!(!target.exists());
}

#[test]
fn scheme_file_drives_every_command() {
    let dir = TempDir::new().unwrap();
    let scheme = dir.path().join("swapped.scheme");
    fs::write(
        &scheme,
        "# leader reversed, follower swapped\nparties = 2\nleader = 00=Z 01=iY 10=X 11=I\nfollower.1 = 0=X, 1=I\n",
    )
    .unwrap();
    let path = scheme.to_str().unwrap();
    let run: Value =
        serde_json::from_str(stdout(&qsdc(&["run", "--scheme", path, "--trials", "40"]))).unwrap();
    for t in run["transcripts"].as_array().unwrap() {
        assert_eq!(t["decoded"], t["message"]);
    }
    let report: Value =
        serde_json::from_str(stdout(&qsdc(&["analyze", "--scheme", path]))).unwrap();
    assert_eq!(report["parties"], 2);
    assert!((report["secret_capacity_bits"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let out = qsdc(&["consistency", "--scheme", path, "--parties", "3"]);
    assert!(!out.status.success());
}

#[test]
fn out_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("nested.json");
    let args = ["analyze", "--parties", "3", "--eve", "secret"];
    let direct = qsdc(&args);
    let mut with_out = args.to_vec();
    let target_str = target.to_str().unwrap();
    with_out.extend(["--out", target_str]);
    let written = qsdc(&with_out);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    assert_eq!(fs::read_to_string(&target).unwrap(), stdout(&direct));
}

#[test]
fn capacity_report_json_roundtrip() {
    let out = qsdc(&[
        "analyze",
        "--parties",
        "4",
        "--eve",
        "secret",
        "--trials",
        "500",
    ]);
    let text = stdout(&out);
    let report: CapacityReport64 = serde_json::from_str(text).unwrap();
    assert_eq!(report.parties, 4);
    assert_eq!(report.consistency_class_size, Some(4));
    assert!(report.eve_secret_scheme_guess_stderr > 0.0);
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn consistency_csv_matches_json() {
    let json: Value =
        serde_json::from_str(stdout(&qsdc(&["consistency", "--parties", "3"]))).unwrap();
    let csv_out = qsdc(&["consistency", "--parties", "3", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(stdout(&csv_out).as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["sender_outcomes", "class_size", "operators", "messages"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let classes = json["classes"].as_array().unwrap();
    assert_eq!(rows.len(), classes.len());
    let join = |v: &Value| {
        v.as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap())
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (row, class) in rows.iter().zip(classes) {
        assert_eq!(row[0], join(&class["sender_outcomes"]));
        assert_eq!(row[1], class["class_size"].to_string());
        assert_eq!(row[2], join(&class["operators"]));
        assert_eq!(row[3], join(&class["messages"]));
    }
}

#[test]
fn verify_swap_single_tuple() {
    let doc: Value = serde_json::from_str(stdout(&qsdc(&[
        "verify-swap",
        "--parties",
        "3",
        "--ops",
        "(iY,X,I)",
    ])))
    .unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["reports"][0]["operators"], "(iY,X,I)");
    let bad = qsdc(&["verify-swap", "--parties", "3", "--ops", "(iY,Z,I)"]);
    assert!(!bad.status.success());
}
