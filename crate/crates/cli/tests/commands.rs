mod common;

use common::*;

const SMALL_RUN: &str = "\
input = station.csv
model = FNN, LSTM
mode = univariate
train_end = 2019-03-10
epochs = 5
trials = 3
seed = 11
hidden_fnn = 8, 8
hidden_lstm = 8
";

fn small_run(dir: &std::path::Path, extra: &str) -> std::path::PathBuf {
    sinusoid_csv(dir, "station", 300);
    write_config(dir, &format!("{SMALL_RUN}{extra}"))
}

#[test]
fn ingest_reports_and_fills_gaps() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = sinusoid_csv(tmp.path(), "raw", 40);
    let text = read(&csv);
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // Blank one PM10 cell and one PM2.5 cell.
    lines[5] = lines[5].replacen(&format!(",{}", lines[5].split(',').nth(1).unwrap()), ",", 1);
    let last = lines[9].rfind(',').unwrap();
    lines[9].truncate(last + 1);
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();

    let out_dir = tmp.path().join("out");
    let stdout = aqcast_ok(&["ingest", "--input", &format!("Demo={}", csv.display()), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(stdout.contains("Demo: 40 rows, 12 features, repaired 2"), "{stdout}");
    let clean = out_dir.join("Demo.csv");
    assert!(!read(&clean).lines().any(|l| l.contains(",,") || l.ends_with(',')));
    assert!(out_dir.join("manifest.json").is_file());

    // Ingesting the canonical output again changes nothing.
    let again = tmp.path().join("again");
    let stdout = aqcast_ok(&["ingest", "--input", &format!("Demo={}", clean.display()), "--out-dir", again.to_str().unwrap()]);
    assert!(stdout.contains("repaired 0"), "{stdout}");
    assert_eq!(read(&clean), read(&again.join("Demo.csv")));
}

#[test]
fn ingest_names_the_unknown_column() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = sinusoid_csv(tmp.path(), "raw", 5);
    let text = read(&csv).replacen("PM10", "PM1O", 1);
    std::fs::write(&csv, text).unwrap();
    let out = aqcast(&["ingest", "--input", csv.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PM10") || stderr.contains("PM1O"), "{stderr}");
}

#[test]
fn stats_of_constant_series_has_zero_width() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = save(&frame_from("Flat", 30, |_, _| 42.0), &tmp.path().join("flat.csv"));
    let out_dir = tmp.path().join("out");
    aqcast_ok(&[
        "stats", "--input", csv.to_str().unwrap(), "--from", "2019-01-01", "--to", "2019-01-05",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    let rows = rows(&out_dir.join("stats.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 42.0);
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][5], "15");
}

#[test]
fn stats_covers_every_station() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["stats".to_string()];
    for (k, name) in ["A", "B", "C", "D"].iter().enumerate() {
        let csv = save(&frame_from(name, 30, |_, t| (t + k) as f64), &tmp.path().join(format!("{name}.csv")));
        args.extend(["--input".into(), csv.display().to_string()]);
    }
    let out_dir = tmp.path().join("out");
    args.extend(["--from", "2019-01-01", "--to", "2019-01-03", "--out-dir"].map(String::from));
    args.push(out_dir.display().to_string());
    aqcast_ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(rows(&out_dir.join("stats.csv")).len(), 4);
    assert_eq!(read(&out_dir.join("stats.jsonl")).lines().count(), 4);
    let table = read(&out_dir.join("stats_table.csv"));
    assert_eq!(table.lines().next().unwrap().split(',').count(), 1 + 2 * 4);
}

#[test]
fn correlation_matrix_is_symmetric_with_exact_extremes() {
    let tmp = tempfile::tempdir().unwrap();
    // PM10 duplicates PM2.5, NO is its negation, the rest are unrelated waves.
    let pm25 = |t: usize| (t as f64 * 0.37).sin() * 30.0 + 80.0;
    let frame = frame_from("Corr", 60, |j, t| match j {
        0 | 11 => pm25(t),
        1 => -pm25(t),
        _ => ((t * (j + 2)) as f64 * 0.11).cos() + j as f64,
    });
    let csv = save(&frame, &tmp.path().join("corr.csv"));
    let out_dir = tmp.path().join("out");
    aqcast_ok(&["correlate", "--input", csv.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    let m: Vec<Vec<f64>> = rows(&out_dir.join("correlation_corr.csv"))
        .iter()
        .map(|r| r[1..].iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(m.len(), 12);
    for i in 0..12 {
        assert!((m[i][i] - 1.0).abs() < 1e-12);
        for j in 0..12 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }
    assert!((m[0][11] - 1.0).abs() < 1e-12);
    assert!((m[1][11] + 1.0).abs() < 1e-12);
}

#[test]
fn experiment_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "");
    let out_dir = tmp.path().join("out");
    aqcast_ok(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    for label in ["FNN-univariate-plain", "LSTM-univariate-plain"] {
        let summary = rows(&out_dir.join(format!("summary_{label}.csv")));
        let metrics: Vec<&str> = summary.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(metrics[..3], ["Train", "Test", "Step-1"]);
        assert_eq!(summary.len(), 2 + 10);
        let loss = read(&out_dir.join(format!("loss_{label}.csv")));
        assert_eq!(loss.lines().next().unwrap(), "epoch,trial_11,trial_12,trial_13");
        assert_eq!(loss.lines().count(), 1 + 5);
    }
    assert_eq!(rows(&out_dir.join("table.csv")).len(), 12);
    let manifest: serde_json::Value = serde_json::from_str(&read(&out_dir.join("manifest.json"))).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([11, 12, 13]));
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][1]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn experiment_is_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "strategy = plain, shuffled\n");
    let run = |dir: &str, threads: &str| {
        let out_dir = tmp.path().join(dir);
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_aqcast"))
            .args(["experiment", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()])
            .env("AQCAST_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let serial = run("serial", "1");
    let parallel = run("parallel", "3");
    for name in ["table.csv", "validation.csv", "summary_LSTM-univariate-shuffled.csv", "loss_FNN-univariate-plain.csv"] {
        assert_eq!(read(&serial.join(name)), read(&parallel.join(name)), "{name}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "");
    let out_dir = tmp.path().join("out");
    aqcast_ok(&["experiment", "--seed", "100", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    let loss = read(&out_dir.join("loss_LSTM-univariate-plain.csv"));
    assert!(loss.starts_with("epoch,trial_100,trial_101,trial_102\n"));
}

#[test]
fn seasonal_strategy_without_months_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "strategy = seasonal\n");
    let out = aqcast(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seasonal_months"));
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "epoch = 3\n");
    let out = aqcast(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key `epoch`"));
}

#[test]
fn forecast_trains_and_writes_band() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "");
    std::fs::write(&config, read(&config).replace("model = FNN, LSTM", "model = LSTM")).unwrap();
    let out_dir = tmp.path().join("out");
    aqcast_ok(&["forecast", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    let band = rows(&out_dir.join("forecast.csv"));
    assert_eq!(band.len(), 90);
    // 300 rows from 2019-01-01T00:00 end at 2019-04-10T16:00; the forecast starts 8 hours later.
    assert_eq!(band[0][0], "2019-04-11T00:00");
    assert_eq!(band[89][0], "2019-05-10T16:00");
    for r in &band {
        let (m, lo, hi): (f64, f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(lo <= m && m <= hi && m.is_finite());
    }
    let paths = read(&out_dir.join("forecast_trajectories.csv"));
    assert_eq!(paths.lines().next().unwrap(), "timestamp,trial_11,trial_12,trial_13");
}

#[test]
fn forecast_rejects_multivariate_training() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "");
    std::fs::write(&config, read(&config).replace("model = FNN, LSTM", "model = LSTM").replace("univariate", "multivariate")).unwrap();
    let out = aqcast(&["forecast", "--config", config.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("univariate"));
}

#[test]
fn single_checkpoint_gives_flat_band() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_run(tmp.path(), "save_checkpoints = true\n");
    let out_dir = tmp.path().join("out");
    aqcast_ok(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    let ckpts = out_dir.join("checkpoints/LSTM-univariate-plain");
    assert_eq!(std::fs::read_dir(&ckpts).unwrap().count(), 3);

    let fc = tmp.path().join("fc");
    aqcast_ok(&[
        "forecast", "--checkpoints", ckpts.to_str().unwrap(), "--trials", "1", "--steps", "25",
        "--input", tmp.path().join("station.csv").to_str().unwrap(), "--out-dir", fc.to_str().unwrap(),
    ]);
    let band = rows(&fc.join("forecast.csv"));
    assert_eq!(band.len(), 25);
    assert!(band.iter().all(|r| r[1] == r[2] && r[2] == r[3]));

    let out = aqcast(&["forecast", "--checkpoints", ckpts.to_str().unwrap(), "--trials", "4", "--input", "x.csv"]);
    assert!(!out.status.success());
}

#[test]
fn describe_reports_widths_and_counts() {
    let stdout = aqcast_ok(&["describe"]);
    assert!(stdout.contains("FNN: lookback 5, features 11, horizon 10, input width 55"), "{stdout}");
    assert_eq!(stdout.matches("parameters").count(), 4);
    let uni = aqcast_ok(&["describe", "--model", "LSTM", "--features", "1"]);
    assert!(uni.contains("input width 5"), "{uni}");
}

#[test]
fn single_trial_single_epoch_on_thirty_rows() {
    let tmp = tempfile::tempdir().unwrap();
    sinusoid_csv(tmp.path(), "tiny", 30);
    // 16 windows; the last target of window s sits on row s + 14, so 10 train before row 24.
    let config = write_config(
        tmp.path(),
        "input = tiny.csv\nmodel = LSTM\ntrain_end = 2019-01-09\nepochs = 1\ntrials = 1\nhidden_lstm = 4\n",
    );
    let out_dir = tmp.path().join("out");
    aqcast_ok(&["experiment", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    let summary = rows(&out_dir.join("summary_LSTM-multivariate-plain.csv"));
    assert_eq!(summary.len(), 12);
    for r in &summary {
        assert_eq!(r.len(), 3);
        assert!(r[1].parse::<f64>().unwrap().is_finite());
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn stats_for_an_empty_period_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = sinusoid_csv(tmp.path(), "s", 30);
    let out = aqcast(&[
        "stats", "--input", csv.to_str().unwrap(), "--from", "2021-03-01", "--to", "2021-06-30",
        "--out-dir", tmp.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no PM2.5 samples"));
}

#[test]
fn forecast_without_checkpoints_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = sinusoid_csv(tmp.path(), "s", 30);
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    for dir in [empty, tmp.path().join("absent")] {
        let out = aqcast(&["forecast", "--checkpoints", dir.to_str().unwrap(), "--input", csv.to_str().unwrap(), "--out-dir", tmp.path().to_str().unwrap()]);
        assert!(!out.status.success(), "{}", dir.display());
    }
    assert!(!tmp.path().join("forecast.csv").exists());
}
