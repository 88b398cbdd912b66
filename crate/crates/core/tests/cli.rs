use std::process::{Command, Output};

fn coreset(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coreset"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn error_line(out: &Output) -> String {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "{text}");
    lines[0].to_owned()
}

#[test]
fn errors_are_one_machine_readable_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = coreset(&["run", "--strategy", "bald"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(error_line(&out).starts_with("error code=usage message=\""));

    let out = coreset(
        &["solve-kcenter", "--data", "missing.bin", "--budget", "2"],
        d,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(error_line(&out).starts_with("error code=io "));

    std::fs::write(d.join("short.bin"), b"CSAL\x01\x00").unwrap();
    let out = coreset(
        &["select", "--data", "short.bin", "--strategy", "random"],
        d,
    );
    assert_eq!(
        error_line(&out),
        "error code=truncated message=\"truncated dataset: expected 24 bytes, found 6\""
    );

    let out = coreset(
        &[
            "bound",
            "--delta",
            "1",
            "--lambda-l",
            "1",
            "--lambda-eta",
            "1",
            "--loss-bound",
            "1",
            "--num-classes",
            "2",
            "--n",
            "10",
            "--gamma",
            "0",
        ],
        d,
    );
    assert!(error_line(&out).starts_with("error code=invalid_argument "));

    let out = coreset(
        &[
            "run",
            "--strategy",
            "random",
            "--seeds",
            "1,1",
            "--per-class",
            "20",
            "--classes",
            "2",
            "--dim",
            "2",
        ],
        d,
    );
    assert!(error_line(&out).starts_with("error code=invalid_argument "));
}

#[test]
fn help_and_success_paths() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = coreset(&["--help"], d);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("solve-kcenter"));

    let out = coreset(
        &[
            "gen-data",
            "--classes",
            "3",
            "--per-class",
            "20",
            "--dim",
            "2",
            "--out",
            "d.csv",
        ],
        d,
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(d.join("d.csv")).unwrap();
    assert!(text.starts_with("f0,f1,label\n"));
    assert_eq!(text.lines().count(), 61);

    let out = coreset(
        &[
            "solve-kcenter",
            "--data",
            "d.csv",
            "--budget",
            "3",
            "--centers",
            "0,5",
            "--max-outliers",
            "0",
        ],
        d,
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,value");
    assert!(lines[1].starts_with("radius,"));
    assert_eq!(lines[2], "optimal,true");
    assert_eq!(lines.iter().filter(|l| l.starts_with("center,")).count(), 5);

    let out = coreset(
        &[
            "bound",
            "--delta",
            "0",
            "--lambda-l",
            "1",
            "--lambda-eta",
            "1",
            "--loss-bound",
            "1",
            "--num-classes",
            "2",
            "--n",
            "2",
            "--gamma",
            "1",
        ],
        d,
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "kind,value\nbound,0\ncover_term,0\nhoeffding_term,0\n"
    );
}
