use std::io::{Read, Write};

use chrono::NaiveDateTime;

use crate::error::{Error, Result};

/// Timestamp layout used by station files.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M";

/// Column order of a station file, after the leading `timestamp` column.
pub const STATION_FEATURES: [&str; 12] = [
    "PM10", "Benzene", "Toluene", "NH3", "NO", "NO2", "NOx", "WS", "Ozone", "SO2", "CO", "PM2.5",
];

/// The forecast target.
pub const TARGET_FEATURE: &str = "PM2.5";

/// Timestamped multivariate series for a single monitoring station.
///
/// Rows are timestamps and columns are features. Values are stored row-major;
/// `None` marks a missing observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    station: String,
    timestamps: Vec<NaiveDateTime>,
    feature_names: Vec<String>,
    values: Vec<Option<f64>>,
}

impl TimeSeriesFrame {
    pub fn new(
        station: impl Into<String>,
        timestamps: Vec<NaiveDateTime>,
        feature_names: Vec<String>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let cols = feature_names.len();
        if values.len() != timestamps.len() * cols {
            return Err(Error::Shape(format!(
                "expected {}x{} values, got {}",
                timestamps.len(),
                cols,
                values.len()
            )));
        }
        for (i, name) in feature_names.iter().enumerate() {
            if feature_names[..i].contains(name) {
                return Err(Error::Schema(format!("duplicate feature {name}")));
            }
        }
        for (i, pair) in timestamps.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::Ordering { line: i + 3 });
            }
        }
        Ok(Self {
            station: station.into(),
            timestamps,
            feature_names,
            values,
        })
    }

    /// Builds a frame with no missing entries from per-feature columns.
    pub fn from_columns(
        station: impl Into<String>,
        timestamps: Vec<NaiveDateTime>,
        columns: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let rows = timestamps.len();
        if let Some((name, _)) = columns.iter().find(|(_, c)| c.len() != rows) {
            return Err(Error::Shape(format!("column {name} does not have {rows} rows")));
        }
        let mut values = Vec::with_capacity(rows * columns.len());
        for r in 0..rows {
            values.extend(columns.iter().map(|(_, c)| Some(c[r])));
        }
        let names = columns.into_iter().map(|(n, _)| n).collect();
        Self::new(station, timestamps, names, values)
    }

    pub fn station(&self) -> &str {
        &self.station
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn cols(&self) -> usize {
        self.feature_names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols() + col]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn require_feature(&self, name: &str) -> Result<usize> {
        self.feature_index(name)
            .ok_or_else(|| Error::Schema(format!("feature {name} not present")))
    }

    /// Column values with missing entries preserved.
    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Row-major values, failing if anything is missing.
    pub fn dense_values(&self) -> Result<Vec<f64>> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::MissingValues(format!(
                        "row {}, feature {}",
                        i / self.cols(),
                        self.feature_names[i % self.cols()]
                    ))
                })
            })
            .collect()
    }

    /// Rows whose indices fall in `range`, as a new frame.
    pub fn select_rows(&self, range: std::ops::Range<usize>) -> Self {
        let cols = self.cols();
        Self {
            station: self.station.clone(),
            timestamps: self.timestamps[range.clone()].to_vec(),
            feature_names: self.feature_names.clone(),
            values: self.values[range.start * cols..range.end * cols].to_vec(),
        }
    }

    /// Rows with timestamps in `[start, end)`, without the non-empty check.
    pub(crate) fn rows_between(&self, start: NaiveDateTime, end: NaiveDateTime) -> std::ops::Range<usize> {
        let lo = self.timestamps.partition_point(|t| *t < start);
        let hi = self.timestamps.partition_point(|t| *t < end);
        lo..hi.max(lo)
    }

    pub(crate) fn with_values(&self, values: Vec<Option<f64>>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }
}

pub fn parse_timestamp(text: &str) -> Result<NaiveDateTime> {
    NaiveDateTime::parse_from_str(text.trim(), TIMESTAMP_FORMAT)
        .map_err(|e| Error::Parse { line: 0, message: format!("bad timestamp {text:?}: {e}") })
}

pub fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

fn check_header(header: &[&str]) -> Result<()> {
    let expected: Vec<&str> = std::iter::once("timestamp").chain(STATION_FEATURES).collect();
    if header == expected.as_slice() {
        return Ok(());
    }
    if let Some(missing) = expected.iter().find(|c| !header.contains(c)) {
        return Err(Error::Schema(format!("missing column {missing}")));
    }
    if let Some(extra) = header.iter().find(|c| !expected.contains(c)) {
        return Err(Error::Schema(format!("unexpected column {extra}")));
    }
    Err(Error::Schema(format!(
        "columns out of order, expected {}",
        expected.join(",")
    )))
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() || cell == "NA" {
        return Ok(None);
    }
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| Error::Parse {
            line,
            message: format!("column {column}: not a number: {cell:?}"),
        })
}

/// Reads a station CSV file (header `timestamp,PM10,...,PM2.5`).
///
/// Empty cells and `NA` become missing entries. Errors carry 1-based file
/// line numbers.
pub fn parse_station_csv<R: Read>(source: R, station: &str) -> Result<TimeSeriesFrame> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?
        .clone();
    let header: Vec<&str> = header.iter().map(str::trim).collect();
    check_header(&header)?;

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let ts = parse_timestamp(&record[0]).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line, message },
            other => other,
        })?;
        if let Some(prev) = timestamps.last() {
            if ts <= *prev {
                return Err(Error::Ordering { line });
            }
        }
        timestamps.push(ts);
        for (cell, column) in record.iter().skip(1).zip(STATION_FEATURES) {
            values.push(parse_cell(cell, line, column)?);
        }
    }
    TimeSeriesFrame::new(
        station,
        timestamps,
        STATION_FEATURES.iter().map(|s| s.to_string()).collect(),
        values,
    )
}

/// Writes the frame in the station CSV layout. Missing values become empty cells.
pub fn write_station_csv<W: Write>(frame: &TimeSeriesFrame, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec!["timestamp".to_string()];
    header.extend(frame.feature_names().iter().cloned());
    writer.write_record(&header).map_err(io)?;
    for r in 0..frame.rows() {
        let mut row = vec![format_timestamp(&frame.timestamps()[r])];
        row.extend((0..frame.cols()).map(|c| match frame.get(r, c) {
            Some(v) => v.to_string(),
            None => String::new(),
        }));
        writer.write_record(&row).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}
