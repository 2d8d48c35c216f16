use anyhow::{anyhow, Context, Result};
use aqcast_core::harness::{prepare_data, run_trials, Execution, ExperimentRun};
use aqcast_core::models::{save_model, ModelSpec, TrainingConfig};
use aqcast_core::windowing::{SplitSpec, Strategy};

use crate::config::{strategy_name, ExperimentConfig};
use crate::manifest::RunEntry;
use crate::{load_station, write_output, Cli, RunManifest};

/// Environment variable capping the number of concurrently trained trials.
pub const THREADS_ENV: &str = "AQCAST_THREADS";

pub(crate) fn execution_from_env() -> Result<Execution> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(Execution::Parallel(None)),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(anyhow!("{THREADS_ENV} must be a positive integer, got {v:?}")),
            Ok(1) => Ok(Execution::Serial),
            Ok(n) => Ok(Execution::Parallel(Some(n))),
        },
    }
}

pub(crate) fn load_config(cli: &Cli) -> Result<(ExperimentConfig, std::path::PathBuf)> {
    let path = cli.config.clone().ok_or_else(|| anyhow!("this command needs --config"))?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().map(|p| p.to_path_buf()).unwrap_or_default();
    let config = ExperimentConfig::parse(&text, &base).with_context(|| format!("in {}", path.display()))?;
    Ok((config, path))
}

fn write_summary(cli: &Cli, label: &str, run: &ExperimentRun) -> Result<Vec<std::path::PathBuf>> {
    let mut written = vec![write_output(&cli.out_dir, &format!("summary_{label}.csv"), |w| {
        Ok(run.summary.write_csv(w)?)
    })?];
    written.push(write_output(&cli.out_dir, &format!("loss_{label}.csv"), |w| {
        let done: Vec<_> = run.records.iter().filter_map(|r| r.outcome.as_ref().ok().map(|m| (r.seed, m))).collect();
        write!(w, "epoch")?;
        for (seed, _) in &done {
            write!(w, ",trial_{seed}")?;
        }
        writeln!(w)?;
        let epochs = done.iter().map(|(_, m)| m.model.loss_history.len()).max().unwrap_or(0);
        for e in 0..epochs {
            write!(w, "{}", e + 1)?;
            for (_, m) in &done {
                match m.model.loss_history.get(e) {
                    Some(v) => write!(w, ",{v}")?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    })?);
    Ok(written)
}

pub fn run(cli: &Cli) -> Result<()> {
    let (config, config_path) = load_config(cli)?;
    let input = config.input.clone().ok_or_else(|| anyhow!("config key `input` is required for experiment"))?;
    let (frame, input_path) = load_station(&input.display().to_string())?;
    let seed = cli.seed.unwrap_or(config.seed);
    let execution = execution_from_env()?;

    let mut manifest = RunManifest::new("experiment");
    manifest.config_path = Some(config_path.display().to_string());
    manifest.config = config.entries.clone();
    manifest.config.insert("seed".into(), seed.to_string());
    manifest.add_input(&config_path)?;
    manifest.add_input(&input_path)?;

    let mut results: Vec<(String, ExperimentRun)> = Vec::new();
    for &mode in &config.modes {
        for &strategy in &config.strategies {
            let split = SplitSpec {
                train_end: config.train_end,
                mode: config.feature_mode(mode),
                strategy,
                seasonal_months: config.seasonal_months,
                shuffle_seed: (strategy == Strategy::Shuffled).then_some(config.shuffle_seed.unwrap_or(seed)),
            };
            let bundle = prepare_data(&frame, config.lookback, config.horizon, &split, config.impute_k)
                .with_context(|| format!("preparing {} / {} data", mode.name(), strategy_name(strategy)))?;
            for &kind in &config.models {
                let label = format!("{}-{}-{}", kind.name(), mode.name(), strategy_name(strategy));
                let spec = ModelSpec::new(kind, config.lookback, bundle.train.features(), config.horizon)
                    .with_hidden(config.hidden_for(kind));
                let training = TrainingConfig {
                    epochs: config.epochs_for(mode, strategy),
                    batch_size: config.batch_size,
                    adam: config.adam,
                    trials: config.trials,
                    base_seed: seed,
                    shuffle_seed: None,
                };
                let run = run_trials(&bundle, &spec, &training, execution).with_context(|| format!("running {label}"))?;
                let s = &run.summary;
                println!(
                    "{label}: train {:.3} ± {:.3}, test {:.3} ± {:.3} ({} of {} trials, {} diverged, {} epochs)",
                    s.rows[0].mean, s.rows[0].half_width, s.rows[1].mean, s.rows[1].half_width, s.completed, s.trials, s.diverged, training.epochs
                );
                for path in write_summary(cli, &label, &run)? {
                    manifest.add_output(&cli.out_dir, &path);
                }
                if config.save_checkpoints {
                    for record in &run.records {
                        if let Ok(m) = &record.outcome {
                            let name = format!("checkpoints/{label}/trial_{}.ckpt", record.seed);
                            let path = write_output(&cli.out_dir, &name, |w| Ok(save_model(&m.model, w)?))?;
                            manifest.add_output(&cli.out_dir, &path);
                        }
                    }
                }
                manifest.runs.push(RunEntry {
                    label: label.clone(),
                    seeds: s.seeds.clone(),
                    completed: s.completed,
                    diverged: s.diverged,
                });
                manifest.diverged += s.diverged;
                results.push((label, run));
            }
        }
    }
    manifest.seeds = (0..config.trials as u64).map(|k| seed.wrapping_add(k)).collect();

    let table = write_output(&cli.out_dir, "table.csv", |w| {
        write!(w, "metric")?;
        for (label, _) in &results {
            write!(w, ",{label} mean,{label} half_width")?;
        }
        writeln!(w)?;
        let rows = results.first().map(|(_, r)| r.summary.rows.len()).unwrap_or(0);
        for i in 0..rows {
            write!(w, "{}", results[0].1.summary.rows[i].metric)?;
            for (_, run) in &results {
                let row = &run.summary.rows[i];
                write!(w, ",{},{}", row.mean, row.half_width)?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    let validation = write_output(&cli.out_dir, "validation.csv", |w| {
        writeln!(w, "run,mean,half_width")?;
        for (label, run) in &results {
            writeln!(w, "{label},{},{}", run.summary.validation.mean, run.summary.validation.half_width)?;
        }
        Ok(())
    })?;
    manifest.add_output(&cli.out_dir, &table);
    manifest.add_output(&cli.out_dir, &validation);
    let path = manifest.write(&cli.out_dir)?;
    println!("wrote {} and {} other files", path.display(), manifest.outputs.len());
    Ok(())
}
