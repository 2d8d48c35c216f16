use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use aqcast_core::harness::{forecast_with_uncertainty, prepare_data, run_trials, seed_window};
use aqcast_core::models::{load_model, ModelSpec, TrainedModel, TrainingConfig};
use aqcast_core::station::{format_timestamp, impute_neighbor_median, TARGET_FEATURE};
use aqcast_core::windowing::SplitSpec;
use clap::Args;

use crate::config::{ExperimentConfig, Mode};
use crate::experiment::{execution_from_env, load_config};
use crate::manifest::RunEntry;
use crate::{load_station, write_output, Cli, RunManifest};

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Steps of 8 hours to forecast past the last observation.
    #[arg(long, default_value_t = 90)]
    pub steps: usize,
    /// Number of trained models to aggregate; defaults to the config's `trials`
    /// or every checkpoint found.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Directory of `.ckpt` files from a previous experiment; skips training.
    #[arg(long)]
    pub checkpoints: Option<PathBuf>,
    /// Station CSV supplying the seed window, optionally `NAME=PATH`;
    /// defaults to the config's `input`.
    #[arg(long)]
    pub input: Option<String>,
}

fn load_checkpoints(dir: &Path, limit: Option<usize>) -> Result<(Vec<TrainedModel>, Vec<PathBuf>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "ckpt"));
    paths.sort();
    if paths.is_empty() {
        bail!("no .ckpt files in {}", dir.display());
    }
    if let Some(n) = limit {
        if n == 0 || n > paths.len() {
            bail!("asked for {n} trials but {} has {} checkpoints", dir.display(), paths.len());
        }
        paths.truncate(n);
    }
    let models = paths
        .iter()
        .map(|p| {
            let file = std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            load_model(BufReader::new(file)).with_context(|| format!("loading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((models, paths))
}

fn train_models(cli: &Cli, config: &ExperimentConfig, trials: Option<usize>, manifest: &mut RunManifest) -> Result<Vec<TrainedModel>> {
    let [kind] = config.models[..] else {
        bail!("forecast trains one model kind; config lists {}", config.models.len());
    };
    if config.modes != [Mode::Univariate] {
        bail!("forecast feeds predictions back as input, so the config must set `mode = univariate`");
    }
    let [strategy] = config.strategies[..] else {
        bail!("forecast trains under one strategy; config lists {}", config.strategies.len());
    };
    let input = config.input.clone().ok_or_else(|| anyhow!("config key `input` is required to train"))?;
    let (frame, path) = load_station(&input.display().to_string())?;
    manifest.add_input(&path)?;
    let seed = cli.seed.unwrap_or(config.seed);
    let split = SplitSpec {
        train_end: config.train_end,
        mode: config.feature_mode(Mode::Univariate),
        strategy,
        seasonal_months: config.seasonal_months,
        shuffle_seed: Some(config.shuffle_seed.unwrap_or(seed)),
    };
    let bundle = prepare_data(&frame, config.lookback, config.horizon, &split, config.impute_k)?;
    let spec = ModelSpec::new(kind, config.lookback, bundle.train.features(), config.horizon).with_hidden(config.hidden_for(kind));
    let training = TrainingConfig {
        epochs: config.epochs_for(Mode::Univariate, strategy),
        batch_size: config.batch_size,
        adam: config.adam,
        trials: trials.unwrap_or(config.trials),
        base_seed: seed,
        shuffle_seed: None,
    };
    let run = run_trials(&bundle, &spec, &training, execution_from_env()?)?;
    let s = &run.summary;
    manifest.seeds = s.seeds.clone();
    manifest.diverged = s.diverged;
    manifest.runs.push(RunEntry { label: kind.name().to_string(), seeds: s.seeds.clone(), completed: s.completed, diverged: s.diverged });
    Ok(run.models().cloned().collect())
}

pub fn run(cli: &Cli, args: &ForecastArgs) -> Result<()> {
    let mut manifest = RunManifest::new("forecast");
    let config = match &cli.config {
        Some(_) => {
            let (config, path) = load_config(cli)?;
            manifest.config_path = Some(path.display().to_string());
            manifest.config = config.entries.clone();
            manifest.add_input(&path)?;
            Some(config)
        }
        None => None,
    };

    let models = match (&args.checkpoints, &config) {
        (Some(dir), _) => {
            let (models, paths) = load_checkpoints(dir, args.trials)?;
            for p in &paths {
                manifest.add_input(p)?;
            }
            manifest.seeds = models.iter().map(|m| m.seed).collect();
            models
        }
        (None, Some(config)) => train_models(cli, config, args.trials, &mut manifest)?,
        (None, None) => bail!("forecast needs --checkpoints or --config"),
    };

    let input = match (&args.input, config.as_ref().and_then(|c| c.input.as_ref())) {
        (Some(spec), _) => spec.clone(),
        (None, Some(path)) => path.display().to_string(),
        (None, None) => bail!("no station for the seed window; pass --input"),
    };
    let (frame, path) = load_station(&input)?;
    if !manifest.inputs.iter().any(|i| Path::new(&i.path) == path) {
        manifest.add_input(&path)?;
    }
    let impute_k = config.as_ref().map_or(aqcast_core::station::DEFAULT_IMPUTE_RADIUS, |c| c.impute_k);
    let frame = if frame.missing_count() > 0 { impute_neighbor_median(&frame, impute_k)? } else { frame };
    let last = *frame.timestamps().last().ok_or_else(|| anyhow!("station {} has no rows", frame.station()))?;

    let lookback = models[0].spec.lookback;
    let raw_seed = seed_window(&frame, lookback)?;
    // Every trial was fitted on the same rows, so the first scaler serves all.
    let seed: Vec<f64> = match &models[0].scaler {
        Some(scaler) => {
            let col = scaler.feature_index(TARGET_FEATURE)?;
            raw_seed.iter().map(|&v| scaler.scale_value(col, v)).collect()
        }
        None => raw_seed,
    };
    let result = forecast_with_uncertainty(&models, &seed, args.steps, last)?;

    let band = write_output(&cli.out_dir, "forecast.csv", |w| Ok(result.write_csv(w)?))?;
    let paths = write_output(&cli.out_dir, "forecast_trajectories.csv", |w| {
        write!(w, "timestamp")?;
        for m in &models {
            write!(w, ",trial_{}", m.seed)?;
        }
        writeln!(w)?;
        for (s, t) in result.timestamps.iter().enumerate() {
            write!(w, "{}", format_timestamp(t))?;
            for traj in &result.trajectories {
                write!(w, ",{}", traj[s])?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    manifest.add_output(&cli.out_dir, &band);
    manifest.add_output(&cli.out_dir, &paths);
    manifest.write(&cli.out_dir)?;

    let (m, h) = (result.mean[result.steps() - 1], result.half_width[result.steps() - 1]);
    println!(
        "{}: {} steps from {} over {} trials; final step {m:.2} ± {h:.2}",
        frame.station(),
        result.steps(),
        format_timestamp(&last),
        models.len()
    );
    println!("wrote {}", band.display());
    Ok(())
}
