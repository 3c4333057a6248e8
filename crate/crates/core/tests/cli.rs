use std::path::Path;
use std::process::{Command, Output};

use cvsteer::fock::{coherent_state, write_state_file, MultiModeState, Truncation};
use cvsteer::steering::{noon_dim, noon_state};
use serde_json::Value;

fn cvsteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvsteer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs `args` twice with the same `--out` and returns both sets of bytes for
/// every file the first run created.
fn run_twice(dir: &Path, file: &str, args: &[&str]) -> Vec<(String, Vec<u8>, Vec<u8>)> {
    let out = dir.join(file);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", path_str(&out)]);
    let collect = || -> Vec<(String, Vec<u8>)> {
        let o = cvsteer(&full);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| {
                p.file_name()
                    .unwrap()
                    .to_str()
                    .unwrap()
                    .starts_with(file.split('.').next().unwrap())
            })
            .map(|p| (p.display().to_string(), std::fs::read(&p).unwrap()))
            .collect();
        files.push(("stdout".into(), o.stdout));
        files.sort();
        files
    };
    let first = collect();
    let second = collect();
    assert_eq!(first.len(), second.len());
    first
        .into_iter()
        .zip(second)
        .map(|((n, a), (_, b))| (n, a, b))
        .collect()
}

#[test]
fn every_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let noon = dir.path().join("noon_state.json");
    write_state_file(
        &noon,
        &noon_state(2, noon_dim(2, Truncation::Auto, 0.5)).unwrap(),
    )
    .unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        (
            "fig1.csv",
            vec!["fig1", "--gamma-step", "0.5", "--beta-step", "0.25"],
        ),
        (
            "noon.json",
            vec![
                "noon-scan",
                "--format",
                "json",
                "--alpha-step",
                "0.5",
                "--beta-step",
                "0.25",
            ],
        ),
        (
            "steer.json",
            vec![
                "steer-check",
                "--state",
                path_str(&noon),
                "--alpha",
                "0.5",
                "--beta",
                "0.05",
            ],
        ),
        (
            "mono.csv",
            vec!["monogamy", "--samples", "40", "--seed", "11"],
        ),
        ("key.json", vec!["key-rate", "--violation", "0.9"]),
        ("base.json", vec!["baseline"]),
        (
            "fur.csv",
            vec!["fur-scan", "--gamma-step", "1", "--beta-step", "0.5"],
        ),
    ];
    for (file, args) in runs {
        for (name, a, b) in run_twice(dir.path(), file, &args) {
            assert!(a == b, "{name} differs between runs");
            if name != "stdout" {
                assert!(!a.is_empty(), "{name} is empty");
            }
        }
    }
}

#[test]
fn outputs_embed_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let o = cvsteer(&[
        "fig1",
        "--gamma-step",
        "1",
        "--beta-step",
        "0.5",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let first = text.lines().next().unwrap();
    let meta: Value = serde_json::from_str(first.trim_start_matches("# ")).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["config"]["global"]["dim"], "auto");
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "gamma,even_sup,even_argmax_beta,odd_inf,odd_argmin_beta,in_validity_region"
    );
    assert!(dir.path().join("fig1.gp").exists());

    let json = dir.path().join("noon.json");
    let o = cvsteer(&[
        "noon-scan",
        "--format",
        "json",
        "--alpha-step",
        "0.5",
        "--beta-step",
        "0.25",
        "--out",
        path_str(&json),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let scan: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(scan["meta"]["tool"], "cvsteer");
    assert!(scan["meta"]["dims"].as_array().unwrap().len() == 2);
    assert!(dir.path().join("noon.csv").exists());
}

#[test]
fn steer_check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let noon = dir.path().join("noon.json");
    write_state_file(
        &noon,
        &noon_state(2, noon_dim(2, Truncation::Auto, 0.5)).unwrap(),
    )
    .unwrap();
    let o = cvsteer(&[
        "steer-check",
        "--state",
        path_str(&noon),
        "--alpha",
        "0.5",
        "--beta",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["violated"], true);
    assert_eq!(r["side"], "upper");

    let product = dir.path().join("product.json");
    let s = MultiModeState::product(&[
        coherent_state(1.5, 40).unwrap(),
        coherent_state(-1.2, 40).unwrap(),
    ])
    .unwrap();
    write_state_file(&product, &s).unwrap();
    let o = cvsteer(&[
        "steer-check",
        "--state",
        path_str(&product),
        "--alpha",
        "0.7",
        "--beta",
        "0.6",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(stdout_json(&o)["violated"], false);

    let o = cvsteer(&[
        "steer-check",
        "--state",
        path_str(&noon),
        "--alpha",
        "0",
        "--beta",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema_version\": 1, \"modes\": 2,").unwrap();
    let o = cvsteer(&[
        "steer-check",
        "--state",
        path_str(&bad),
        "--alpha",
        "0.5",
        "--beta",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let missing = dir.path().join("missing.json");
    let o = cvsteer(&[
        "steer-check",
        "--state",
        path_str(&missing),
        "--alpha",
        "0.5",
        "--beta",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = cvsteer(&["noon-scan", "--alpha-start", "0", "--alpha-stop", "0"]);
    assert_eq!(o.status.code(), Some(4));

    assert_eq!(
        cvsteer(&["key-rate", "--delta", "0.3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cvsteer(&["key-rate", "--delta", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(cvsteer(&["--dim", "1", "baseline"]).status.code(), Some(2));
    assert_eq!(cvsteer(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cvsteer(&["--help"]).status.code(), Some(0));
}

#[test]
fn key_rate_and_baseline_records() {
    let r = stdout_json(&cvsteer(&["key-rate", "--delta", "0.25"]));
    assert_eq!(r["rate_lower_bound"], 1.0);
    let r = stdout_json(&cvsteer(&["key-rate", "--violation", "1.0"]));
    assert_eq!(r["delta"], 0.25);
    let b = stdout_json(&cvsteer(&["baseline"]));
    assert!((b["upper"].as_f64().unwrap() - 0.853553).abs() < 1e-6);
}

#[test]
fn noon_scan_summary_for_odd_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n1.csv");
    let o = cvsteer(&[
        "noon-scan",
        "--n",
        "1",
        "--b",
        "odd",
        "--a",
        "even",
        "--alpha-step",
        "0.1",
        "--beta-step",
        "0.05",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary = stdout_json(&o);
    let max = summary["max"]["value"].as_f64().unwrap();
    assert!(max > 0.75 + 1e-4, "max {max}");
    assert!(summary["max"]["margin_over_upper"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["evaluated_cells"], summary["cells"]);
}
