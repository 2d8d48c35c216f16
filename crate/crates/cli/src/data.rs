use anyhow::{bail, Context, Result};
use aqcast_core::station::{
    impute_neighbor_median, pearson_matrix, period_stats, write_station_csv, PeriodSummary, DEFAULT_IMPUTE_RADIUS,
    TARGET_FEATURE,
};
use aqcast_core::Error;
use clap::Args;
use serde::Serialize;

use crate::config::parse_instant;
use crate::{load_station, write_output, Cli, RunManifest};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Station CSV, optionally `NAME=PATH`.
    #[arg(long)]
    pub input: String,
    /// Output file name inside the output directory; defaults to `<station>.csv`.
    #[arg(long)]
    pub output: Option<String>,
    /// Neighbours considered on each side when filling a gap.
    #[arg(long, default_value_t = DEFAULT_IMPUTE_RADIUS)]
    pub impute_k: usize,
}

pub fn ingest(cli: &Cli, args: &IngestArgs) -> Result<()> {
    let (frame, path) = load_station(&args.input)?;
    let repaired = frame.missing_count();
    let clean = if repaired > 0 { impute_neighbor_median(&frame, args.impute_k)? } else { frame };
    let name = args.output.clone().unwrap_or_else(|| format!("{}.csv", clean.station()));
    let written = write_output(&cli.out_dir, &name, |w| Ok(write_station_csv(&clean, w)?))?;

    let mut manifest = RunManifest::new("ingest");
    manifest.add_input(&path)?;
    manifest.add_output(&cli.out_dir, &written);
    manifest.write(&cli.out_dir)?;
    println!(
        "{}: {} rows, {} features, repaired {repaired}",
        clean.station(),
        clean.rows(),
        clean.cols()
    );
    println!("wrote {}", written.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Station CSV, optionally `NAME=PATH`; repeat for a multi-station table.
    #[arg(long, required = true)]
    pub input: Vec<String>,
    #[arg(long, default_value = TARGET_FEATURE)]
    pub feature: String,
    /// Period start (date or `YYYY-MM-DDTHH:MM`); repeat together with `--to`.
    #[arg(long, required = true)]
    pub from: Vec<String>,
    /// Period end, inclusive; a bare date covers the whole day.
    #[arg(long, required = true)]
    pub to: Vec<String>,
}

#[derive(Serialize)]
struct StatsLine<'a> {
    period: &'a str,
    #[serde(flatten)]
    summary: &'a PeriodSummary,
}

/// Writes `stats.csv` (one row per station and period), `stats.jsonl`, and
/// `stats_table.csv`: one row per period with a mean and half-width column
/// pair per station.
pub fn stats(cli: &Cli, args: &StatsArgs) -> Result<()> {
    if args.from.len() != args.to.len() {
        bail!("--from and --to must be given the same number of times");
    }
    let mut periods = Vec::new();
    for (from, to) in args.from.iter().zip(&args.to) {
        let start = parse_instant(from, false).with_context(|| format!("bad --from {from:?}"))?;
        let end = parse_instant(to, true).with_context(|| format!("bad --to {to:?}"))?;
        periods.push((format!("{from}..{to}"), start, end));
    }

    let mut manifest = RunManifest::new("stats");
    let mut stations = Vec::new();
    // cells[period][station]
    let mut cells: Vec<Vec<Option<PeriodSummary>>> = vec![Vec::new(); periods.len()];
    for input in &args.input {
        let (frame, path) = load_station(input)?;
        manifest.add_input(&path)?;
        frame.require_feature(&args.feature)?;
        for (p, (label, start, end)) in periods.iter().enumerate() {
            match period_stats(&frame, &args.feature, *start, *end) {
                Ok(s) => cells[p].push(Some(s)),
                Err(Error::Range(msg)) => {
                    eprintln!("warning: {}: {label}: {msg}", frame.station());
                    cells[p].push(None);
                }
                Err(e) => return Err(e.into()),
            }
        }
        stations.push(frame.station().to_string());
    }
    if cells.iter().flatten().all(Option::is_none) {
        bail!("no {} samples in any requested period", args.feature);
    }

    let long = write_output(&cli.out_dir, "stats.csv", |w| {
        writeln!(w, "station,feature,period,mean,half_width_95,sample_count")?;
        for (p, row) in cells.iter().enumerate() {
            for s in row.iter().flatten() {
                writeln!(w, "{},{},{},{},{},{}", s.station, s.feature, periods[p].0, s.mean, s.half_width_95, s.sample_count)?;
            }
        }
        Ok(())
    })?;
    let jsonl = write_output(&cli.out_dir, "stats.jsonl", |w| {
        for (p, row) in cells.iter().enumerate() {
            for s in row.iter().flatten() {
                writeln!(w, "{}", serde_json::to_string(&StatsLine { period: &periods[p].0, summary: s })?)?;
            }
        }
        Ok(())
    })?;
    let table = write_output(&cli.out_dir, "stats_table.csv", |w| {
        write!(w, "period")?;
        for station in &stations {
            write!(w, ",{0} {1} mean,{0} {1} half_width", station, args.feature)?;
        }
        writeln!(w)?;
        for (p, row) in cells.iter().enumerate() {
            write!(w, "{}", periods[p].0)?;
            for cell in row {
                match cell {
                    Some(s) => write!(w, ",{:.2},{:.2}", s.mean, s.half_width_95)?,
                    None => write!(w, ",-,-")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    for path in [&long, &jsonl, &table] {
        manifest.add_output(&cli.out_dir, path);
    }
    manifest.write(&cli.out_dir)?;

    for (p, row) in cells.iter().enumerate() {
        for s in row.iter().flatten() {
            println!("{} {} {}: {:.2} ± {:.2} (n = {})", s.station, s.feature, periods[p].0, s.mean, s.half_width_95, s.sample_count);
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Station CSV, optionally `NAME=PATH`.
    #[arg(long)]
    pub input: String,
    /// Neighbours considered on each side when filling a gap first.
    #[arg(long, default_value_t = DEFAULT_IMPUTE_RADIUS)]
    pub impute_k: usize,
}

#[derive(Serialize)]
struct CorrelationLine<'a> {
    a: &'a str,
    b: &'a str,
    coefficient: Option<f64>,
    undefined: bool,
}

/// Writes `correlation_<station>.csv`, an F×F matrix with empty cells for
/// undefined pairs, and the same entries as JSON lines.
pub fn correlate(cli: &Cli, args: &CorrelateArgs) -> Result<()> {
    let (frame, path) = load_station(&args.input)?;
    let frame = if frame.missing_count() > 0 { impute_neighbor_median(&frame, args.impute_k)? } else { frame };
    let matrix = pearson_matrix(&frame)?;
    let names = &matrix.feature_names;
    let n = matrix.size();
    let station = frame.station();

    let csv = write_output(&cli.out_dir, &format!("correlation_{station}.csv"), |w| {
        writeln!(w, "feature,{}", names.join(","))?;
        for i in 0..n {
            write!(w, "{}", names[i])?;
            for j in 0..n {
                if matrix.is_undefined(i, j) {
                    write!(w, ",")?;
                } else {
                    write!(w, ",{}", matrix.get(i, j))?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    let jsonl = write_output(&cli.out_dir, &format!("correlation_{station}.jsonl"), |w| {
        for i in 0..n {
            for j in 0..n {
                let undefined = matrix.is_undefined(i, j);
                let line = CorrelationLine {
                    a: &names[i],
                    b: &names[j],
                    coefficient: (!undefined).then(|| matrix.get(i, j)),
                    undefined,
                };
                writeln!(w, "{}", serde_json::to_string(&line)?)?;
            }
        }
        Ok(())
    })?;
    let mut manifest = RunManifest::new("correlate");
    manifest.add_input(&path)?;
    manifest.add_output(&cli.out_dir, &csv);
    manifest.add_output(&cli.out_dir, &jsonl);
    manifest.write(&cli.out_dir)?;

    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !matrix.is_undefined(i, j))
        .map(|(i, j)| (matrix.get(i, j), i, j))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("{station}: strongest positive pairs");
    for (r, i, j) in pairs.iter().take(5) {
        println!("  {:>8} – {:<8} {:+.3}", names[*i], names[*j], r);
    }
    Ok(())
}
