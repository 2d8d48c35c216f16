//! Sliding-window conversion of a 2-D frame into supervised `(window, target)`
//! pairs, plus the chronological, validation and shuffling partitions.

use std::io::Write;

use chrono::{Datelike, NaiveDateTime};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::station::{TimeSeriesFrame, TARGET_FEATURE};

/// Which columns feed the model inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMode {
    /// Every column except the target.
    Multivariate,
    /// The target's own history only.
    Univariate,
    /// An explicit column list.
    Columns(Vec<String>),
}

impl FeatureMode {
    pub fn input_columns(&self, frame: &TimeSeriesFrame) -> Result<Vec<usize>> {
        let target = frame.require_feature(TARGET_FEATURE)?;
        match self {
            FeatureMode::Multivariate => Ok((0..frame.cols()).filter(|&c| c != target).collect()),
            FeatureMode::Univariate => Ok(vec![target]),
            FeatureMode::Columns(names) => {
                if names.is_empty() {
                    return Err(Error::Config("empty input column list".into()));
                }
                names.iter().map(|n| frame.require_feature(n)).collect()
            }
        }
    }
}

/// `M` windows of `lookback` steps by `features` inputs with `horizon` target
/// values each.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    window_start_indices: Vec<usize>,
    lookback: usize,
    horizon: usize,
    features: usize,
}

impl WindowedDataset {
    pub fn from_parts(
        inputs: Vec<f64>,
        targets: Vec<f64>,
        window_start_indices: Vec<usize>,
        lookback: usize,
        horizon: usize,
        features: usize,
    ) -> Result<Self> {
        let m = window_start_indices.len();
        if inputs.len() != m * lookback * features || targets.len() != m * horizon {
            return Err(Error::Shape(format!(
                "dataset of {m} windows needs {} inputs and {} targets",
                m * lookback * features,
                m * horizon
            )));
        }
        Ok(Self { inputs, targets, window_start_indices, lookback, horizon, features })
    }

    pub fn empty(lookback: usize, horizon: usize, features: usize) -> Self {
        Self {
            inputs: Vec::new(),
            targets: Vec::new(),
            window_start_indices: Vec::new(),
            lookback,
            horizon,
            features,
        }
    }

    pub fn len(&self) -> usize {
        self.window_start_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn window_start_indices(&self) -> &[usize] {
        &self.window_start_indices
    }

    /// Inputs of window `i`, `lookback × features` row-major.
    pub fn input(&self, i: usize) -> &[f64] {
        let size = self.lookback * self.features;
        &self.inputs[i * size..(i + 1) * size]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.horizon..(i + 1) * self.horizon]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Windows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut out = Self::empty(self.lookback, self.horizon, self.features);
        for &i in indices {
            out.push(self.input(i), self.target(i), self.window_start_indices[i]);
        }
        out
    }

    fn push(&mut self, input: &[f64], target: &[f64], start: usize) {
        self.inputs.extend_from_slice(input);
        self.targets.extend_from_slice(target);
        self.window_start_indices.push(start);
    }

    /// Appends `other`'s windows.
    pub fn extend(&mut self, other: &Self) -> Result<()> {
        if (other.lookback, other.horizon, other.features) != (self.lookback, self.horizon, self.features) {
            return Err(Error::Shape("cannot concatenate datasets of different shapes".into()));
        }
        self.inputs.extend_from_slice(&other.inputs);
        self.targets.extend_from_slice(&other.targets);
        self.window_start_indices.extend_from_slice(&other.window_start_indices);
        Ok(())
    }

    /// Debug dump, one `window_index,step,feature,value` line per input element.
    pub fn write_debug_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "window_index,step,feature,value")?;
        for i in 0..self.len() {
            for (k, v) in self.input(i).iter().enumerate() {
                writeln!(sink, "{},{},{},{}", i, k / self.features, k % self.features, v)?;
            }
        }
        Ok(())
    }
}

/// Slides a `lookback`-row window over `frame`; each window's target is the
/// next `horizon` values of PM2.5. Produces `T - lookback - horizon + 1`
/// windows.
pub fn build_windows(
    frame: &TimeSeriesFrame,
    lookback: usize,
    horizon: usize,
    mode: &FeatureMode,
) -> Result<WindowedDataset> {
    if lookback == 0 || horizon == 0 {
        return Err(Error::Shape("lookback and horizon must be positive".into()));
    }
    let rows = frame.rows();
    if rows < lookback + horizon {
        return Err(Error::InsufficientData(format!(
            "{rows} rows cannot hold a window of {lookback} + {horizon}"
        )));
    }
    let columns = mode.input_columns(frame)?;
    let target = frame.require_feature(TARGET_FEATURE)?;
    let values = frame.dense_values()?;
    let cols = frame.cols();
    let count = rows - lookback - horizon + 1;

    let mut out = WindowedDataset::empty(lookback, horizon, columns.len());
    out.inputs.reserve(count * lookback * columns.len());
    out.targets.reserve(count * horizon);
    for start in 0..count {
        for row in start..start + lookback {
            out.inputs.extend(columns.iter().map(|&c| values[row * cols + c]));
        }
        out.targets
            .extend((start + lookback..start + lookback + horizon).map(|row| values[row * cols + target]));
        out.window_start_indices.push(start);
    }
    Ok(out)
}

/// Splits by date: a window is training data iff the timestamp of its last
/// target row is strictly before `boundary`.
pub fn chronological_split(
    dataset: &WindowedDataset,
    frame: &TimeSeriesFrame,
    boundary: NaiveDateTime,
) -> Result<(WindowedDataset, WindowedDataset)> {
    let span = dataset.lookback + dataset.horizon - 1;
    let timestamps = frame.timestamps();
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (i, &start) in dataset.window_start_indices.iter().enumerate() {
        let last = timestamps
            .get(start + span)
            .ok_or_else(|| Error::Shape(format!("window start {start} outside the frame")))?;
        if *last < boundary {
            train.push(i);
        } else {
            holdout.push(i);
        }
    }
    if train.is_empty() || holdout.is_empty() {
        return Err(Error::Split(format!(
            "boundary {boundary} leaves {} training and {} holdout windows",
            train.len(),
            holdout.len()
        )));
    }
    Ok((dataset.select(&train), dataset.select(&holdout)))
}

/// Splits holdout windows 1:1; the chronologically earlier `ceil(M/2)` go to
/// validation.
pub fn halve_for_validation(holdout: &WindowedDataset) -> Result<(WindowedDataset, WindowedDataset)> {
    let m = holdout.len();
    if m < 2 {
        return Err(Error::Split(format!("cannot halve {m} window(s)")));
    }
    let cut = m.div_ceil(2);
    let all: Vec<usize> = (0..m).collect();
    Ok((holdout.select(&all[..cut]), holdout.select(&all[cut..])))
}

/// Uniform index in `0..bound` from one 64-bit draw (multiply-shift).
fn bounded(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    ((rng.next_u64() as u128 * bound as u128) >> 64) as usize
}

/// Fisher–Yates permutation of `0..n` driven by ChaCha8 seeded with `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = bounded(&mut rng, i + 1);
        order.swap(i, j);
    }
    order
}

pub fn shuffle_windows(dataset: &WindowedDataset, seed: u64) -> WindowedDataset {
    dataset.select(&permutation(dataset.len(), seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Plain,
    Shuffled,
    Seasonal,
}

/// How a station frame becomes train / validation / test windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_end: NaiveDateTime,
    pub mode: FeatureMode,
    pub strategy: Strategy,
    /// Inclusive month range, e.g. `(2, 9)` for February to September.
    pub seasonal_months: Option<(u32, u32)>,
    pub shuffle_seed: Option<u64>,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        match self.strategy {
            Strategy::Shuffled if self.shuffle_seed.is_none() => {
                Err(Error::Config("shuffled strategy requires shuffle_seed".into()))
            }
            Strategy::Seasonal => match self.seasonal_months {
                None => Err(Error::Config("seasonal strategy requires seasonal_months".into())),
                Some((a, b)) if !(1..=12).contains(&a) || !(1..=12).contains(&b) || a > b => {
                    Err(Error::Config(format!("invalid seasonal_months {a}-{b}")))
                }
                Some(_) => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// Maximal runs of consecutive rows whose month lies in `months`, one run per
/// year.
pub fn seasonal_segments(frame: &TimeSeriesFrame, months: (u32, u32)) -> Vec<std::ops::Range<usize>> {
    let in_season = |t: &NaiveDateTime| (months.0..=months.1).contains(&t.month());
    let ts = frame.timestamps();
    let mut segments = Vec::new();
    let mut r = 0;
    while r < ts.len() {
        if !in_season(&ts[r]) {
            r += 1;
            continue;
        }
        let start = r;
        while r < ts.len() && in_season(&ts[r]) && ts[r].year() == ts[start].year() {
            r += 1;
        }
        segments.push(start..r);
    }
    segments
}

/// Windows for the seasonal strategy: built per in-season segment so that no
/// window spans the out-of-season gap. Start indices refer to `frame`.
pub fn build_seasonal_windows(
    frame: &TimeSeriesFrame,
    lookback: usize,
    horizon: usize,
    mode: &FeatureMode,
    months: (u32, u32),
) -> Result<WindowedDataset> {
    let features = mode.input_columns(frame)?.len();
    let mut out = WindowedDataset::empty(lookback, horizon, features);
    for segment in seasonal_segments(frame, months) {
        if segment.len() < lookback + horizon {
            continue;
        }
        let mut part = build_windows(&frame.select_rows(segment.clone()), lookback, horizon, mode)?;
        for s in &mut part.window_start_indices {
            *s += segment.start;
        }
        out.extend(&part)?;
    }
    if out.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no in-season segment of months {}-{} holds a full window",
            months.0, months.1
        )));
    }
    Ok(out)
}

/// Windows for `spec`: plain and shuffled use the whole frame, seasonal only
/// the in-season segments. Shuffling is applied during training, not here.
pub fn windows_for(
    frame: &TimeSeriesFrame,
    lookback: usize,
    horizon: usize,
    spec: &SplitSpec,
) -> Result<WindowedDataset> {
    spec.validate()?;
    match (spec.strategy, spec.seasonal_months) {
        (Strategy::Seasonal, Some(months)) => build_seasonal_windows(frame, lookback, horizon, &spec.mode, months),
        _ => build_windows(frame, lookback, horizon, &spec.mode),
    }
}
