#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aqcast_core::station::{eight_hourly, sinusoid_station, write_station_csv, TimeSeriesFrame, STATION_FEATURES};
use chrono::{NaiveDate, NaiveDateTime};

pub fn origin() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2019, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
}

pub fn save(frame: &TimeSeriesFrame, path: &Path) -> PathBuf {
    let file = std::fs::File::create(path).unwrap();
    write_station_csv(frame, file).unwrap();
    path.to_path_buf()
}

pub fn sinusoid_csv(dir: &Path, name: &str, rows: usize) -> PathBuf {
    save(&sinusoid_station(rows, origin()).unwrap(), &dir.join(format!("{name}.csv")))
}

/// Full-schema frame where column `j` is `f(j, t)`.
pub fn frame_from(name: &str, rows: usize, f: impl Fn(usize, usize) -> f64) -> TimeSeriesFrame {
    let columns = STATION_FEATURES
        .iter()
        .enumerate()
        .map(|(j, feature)| (feature.to_string(), (0..rows).map(|t| f(j, t)).collect()))
        .collect();
    TimeSeriesFrame::from_columns(name, eight_hourly(origin(), rows), columns).unwrap()
}

pub fn aqcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqcast")).args(args).output().unwrap()
}

pub fn aqcast_ok(args: &[&str]) -> String {
    let out = aqcast(args);
    assert!(
        out.status.success(),
        "aqcast {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, body).unwrap();
    path
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Parsed CSV rows without the header.
pub fn rows(path: &Path) -> Vec<Vec<String>> {
    read(path).lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}
