//! Black-box tests of the `trimetric` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trimetric"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn sci_subcommand_reports_fields() {
    let model = demo_dir().join("model_tanh.json");
    let out = run(&["sci", "--model", model.to_str().unwrap()]);
    let json = stdout_json(&out);
    assert!(json["raw_bits"].as_u64().unwrap() > 64);
    assert_eq!(json["log2_n"].as_f64().unwrap(), 16.0);
    let sci = json["sci"].as_f64().unwrap();
    assert!((sci - json["raw_bits"].as_f64().unwrap() / 16.0).abs() < 1e-12);
}

#[test]
fn sci_attach_data_increases_raw_bits() {
    let model = demo_dir().join("model_linear.json");
    let plain = stdout_json(&run(&["sci", "--model", model.to_str().unwrap()]));
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.bin");
    std::fs::write(&data, vec![0xA7u8; 4096]).unwrap();
    let attached = stdout_json(&run(&[
        "sci",
        "--model",
        model.to_str().unwrap(),
        "--attach-data",
        data.to_str().unwrap(),
    ]));
    assert!(attached["raw_bits"].as_u64().unwrap() > plain["raw_bits"].as_u64().unwrap());
}

#[test]
fn leais_subcommand_analytic_and_fd_agree() {
    let model = demo_dir().join("model_tanh.json");
    let analytic = stdout_json(&run(&[
        "leais",
        "--model",
        model.to_str().unwrap(),
        "--samples",
        "8",
        "--seed",
        "3",
    ]));
    let fd = stdout_json(&run(&[
        "leais",
        "--model",
        model.to_str().unwrap(),
        "--samples",
        "8",
        "--seed",
        "3",
        "--fd",
    ]));
    assert_eq!(analytic["mode"], "analytic");
    assert_eq!(fd["mode"], "fd");
    let a = analytic["max"].as_f64().unwrap();
    let f = fd["max"].as_f64().unwrap();
    assert!((a - f).abs() < 1e-4);
}

#[test]
fn leais_map_logistic_value() {
    let out = stdout_json(&run(&[
        "leais-map",
        "--family",
        "logistic",
        "--param",
        "4.0",
        "--x0",
        "0.2",
        "--t",
        "20000",
        "--transient",
        "1000",
    ]));
    let lambda = out["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::LN_2).abs() < 0.02);
}

#[test]
fn leais_map_accepts_negative_slope() {
    let out = stdout_json(&run(&[
        "leais-map",
        "--family",
        "linear",
        "--param",
        "-3.0",
        "--x0",
        "0.5",
        "--t",
        "100",
    ]));
    let lambda = out["lambda"].as_f64().unwrap();
    assert!((lambda - 3.0f64.ln()).abs() < 1e-12);
}

#[test]
fn ner_subcommand_fp_and_epsilon() {
    let game = demo_dir().join("game_prisoners_dilemma.json");
    let out = stdout_json(&run(&[
        "ner",
        "--game",
        game.to_str().unwrap(),
        "--dynamics",
        "fp",
        "--steps",
        "500",
        "--epsilon",
        "0.1",
        "--grid",
        "40",
    ]));
    assert_eq!(out["trajectory_len"].as_u64().unwrap(), 500);
    // Empirical frequencies reach (1/T, 1 - 1/T), distance sqrt(2)/T from D.
    let expected = std::f64::consts::SQRT_2 / 500.0;
    assert!((out["ner_literal"].as_f64().unwrap() - expected).abs() <= 1e-9);
    assert!((out["ner_epsilon"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-12);
}

#[test]
fn ner_subcommand_three_player_game_skips_epsilon() {
    // 2x2x2 game, action 1 strictly dominant for every player; the epsilon
    // variant needs two-player support enumeration so it stays absent.
    let dir = tempfile::tempdir().unwrap();
    let mut payoffs = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for own in [a, b, c] {
                    payoffs.push(own as f64 * 2.0 + 0.1 * (a + b + c) as f64);
                }
            }
        }
    }
    let game_path = dir.path().join("three.json");
    std::fs::write(
        &game_path,
        serde_json::json!({"action_counts": [2, 2, 2], "payoffs": payoffs}).to_string(),
    )
    .unwrap();
    let out = stdout_json(&run(&[
        "ner",
        "--game",
        game_path.to_str().unwrap(),
        "--dynamics",
        "br",
        "--steps",
        "10",
        "--epsilon",
        "0.1",
    ]));
    assert!(out["ner_literal"].as_f64().unwrap() <= 1e-9);
    assert!(out.get("ner_epsilon").is_none());
}

#[test]
fn score_subcommand_writes_csv() {
    let records = demo_dir().join("records.json");
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("scatter.csv");
    let out = run(&[
        "score",
        "--records",
        records.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["records"].as_array().unwrap().len(), 3);
    assert_eq!(json["scatter"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("system_id,x,y,z,distance\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn compress_stats_blob_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.bin");
    std::fs::write(&input, b"TOBEORNOTTOBEORTOBEORNOT").unwrap();
    let blob_path = dir.path().join("out.blob");
    let out = run(&[
        "compress-stats",
        "--input",
        input.to_str().unwrap(),
        "--out",
        blob_path.to_str().unwrap(),
    ]);
    let json = stdout_json(&out);
    assert_eq!(json["original_len"].as_u64().unwrap(), 24);
    assert_eq!(json["payload_bits"].as_u64().unwrap(), 144);
    assert_eq!(json["compressed_size_bits"].as_u64().unwrap(), 208);

    let wire = std::fs::read(&blob_path).unwrap();
    let blob = trimetric::codec::CompressedBlob::from_bytes(&wire).unwrap();
    assert_eq!(
        trimetric::codec::decompress(&blob).unwrap(),
        b"TOBEORNOTTOBEORTOBEORNOT"
    );
}

#[test]
fn report_out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let config = demo_dir().join("config.json");
    let out = run(&[
        "report",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["systems"].as_array().unwrap().len(), 2);
    assert_eq!(report["errors"].as_array().unwrap().len(), 0);
}

#[test]
fn report_partial_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = demo_dir().join("model_linear.json");
    let game = demo_dir().join("game_prisoners_dilemma.json");
    std::fs::copy(model, dir.path().join("model.json")).unwrap();
    std::fs::copy(game, dir.path().join("game.json")).unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
            "systems": [
                {"id": "ok", "model": "model.json", "game": "game.json"},
                {"id": "broken", "model": "missing.json", "game": "game.json"}
            ],
            "weights": {"w1": 0.4, "w2": 0.3, "w3": 0.3}
        }"#,
    )
    .unwrap();
    let out = run(&["report", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["systems"].as_array().unwrap().len(), 1);
    assert_eq!(report["errors"][0]["system_id"], "broken");
}

#[test]
fn config_error_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"systems": [], "weights": {"w1": 1.0, "w2": 0.0, "w3": 0.0}}"#,
    )
    .unwrap();
    let out = run(&["report", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["sci", "--model", "/definitely/not/there.json"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "leais-map",
        "--family",
        "logistic",
        "--param",
        "9.0",
        "--x0",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_report_bytes() {
    let config = demo_dir().join("config.json");
    let run_with_threads = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_trimetric"))
            .args(["report", "--config", config.to_str().unwrap()])
            .env("TRIMETRIC_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        out.stdout
    };
    let single = run_with_threads("1");
    let dual = run_with_threads("2");
    let auto = run_with_threads("0");
    assert_eq!(single, dual);
    assert_eq!(single, auto);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let model = demo_dir().join("model_tanh.json");
    let a = run(&[
        "leais",
        "--model",
        model.to_str().unwrap(),
        "--samples",
        "16",
    ]);
    let b = run(&[
        "leais",
        "--model",
        model.to_str().unwrap(),
        "--samples",
        "16",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // Separate process invocations of the codec produce identical blobs.
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.bin");
    std::fs::write(&input, b"abcabcabcabdabc".repeat(100)).unwrap();
    let blob_a = dir.path().join("a.blob");
    let blob_b = dir.path().join("b.blob");
    let a = run(&[
        "compress-stats",
        "--input",
        input.to_str().unwrap(),
        "--out",
        blob_a.to_str().unwrap(),
    ]);
    let b = run(&[
        "compress-stats",
        "--input",
        input.to_str().unwrap(),
        "--out",
        blob_b.to_str().unwrap(),
    ]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        std::fs::read(&blob_a).unwrap(),
        std::fs::read(&blob_b).unwrap()
    );
}
