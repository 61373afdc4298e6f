use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use fockmeas::protocol::DEFAULT_MAX_RESTARTS;
use fockmeas::schedule::SearchSpace;

use crate::config::{parse_config, Mode, RunConfig, Truncation};
use crate::error::{CliError, Result};
use crate::output::write_artifacts;
use crate::presets::{preset_to_dir, PRESETS};
use crate::runner::{run_to_dir, sweep, Manifest};

const UNITS: &str = "\
Units: ħ = 1. Frequencies (g, g_a, g_b, delta) are in units of the ancilla \
transition frequency, ω_e for the qubit protocol and ω_b for the two-mode \
qutrit protocol. Periods and times are in the inverse of that unit.

Exit status: 0 on success, 2 on a configuration error, 3 on a numerical \
failure such as a post-selected branch whose probability vanishes.";

#[derive(Debug, Parser)]
#[command(name = "fockmeas", version, about = "Fock, superposed-Fock and Bell state preparation by repeated ancilla measurement", long_about = None, after_long_help = UNITS, after_help = UNITS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a JSON configuration and write curve.csv and manifest.json.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config's `output`; default `.`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed for trajectories mode.
        #[arg(long)]
        seed: Option<u64>,
        /// Switch to trajectories mode with this many trajectories.
        #[arg(long)]
        trajectories: Option<u64>,
        /// Fock truncation: `K` for one mode or `K_a,K_b` for two.
        #[arg(long)]
        truncation: Option<String>,
    },
    /// Reproduce one figure's data set.
    Preset {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Exhaustive schedule search at a budget of the config's `cycles`.
    Sweep {
        config: PathBuf,
        /// Period multiples `l`, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        ls: Vec<usize>,
        /// Filter lengths `q`, comma separated or a range `a-b`.
        #[arg(long, default_value = "0-10")]
        qs: String,
        /// Coupling-switch points `L` for Bell targets, comma separated.
        #[arg(long, value_delimiter = ',')]
        switch_points: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        truncation: Option<String>,
    },
    /// Print the preset names.
    ListPresets,
}

fn load(path: &PathBuf) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn parse_truncation(text: &str) -> Result<Truncation> {
    let dims: std::result::Result<Vec<usize>, _> = text.split(',').map(|s| s.trim().parse::<usize>()).collect();
    dims.map(Truncation::Fixed)
        .map_err(|e| CliError::schema("--truncation", e.to_string()))
}

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let bad = |e: std::num::ParseIntError| CliError::schema("--qs", e.to_string());
    if let Some((a, b)) = text.split_once('-') {
        let (a, b) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        Ok((a..=b).collect())
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(bad)).collect()
    }
}

/// Applies command-line overrides and re-validates.
pub fn apply_overrides(
    mut config: RunConfig,
    seed: Option<u64>,
    trajectories: Option<u64>,
    truncation: Option<&str>,
) -> Result<RunConfig> {
    if let Some(t) = truncation {
        config.truncation = parse_truncation(t)?;
    }
    match (config.mode, trajectories) {
        (Mode::Trajectories { n_traj, seed: s, max_restarts }, t) => {
            config.mode = Mode::Trajectories {
                n_traj: t.unwrap_or(n_traj),
                seed: seed.unwrap_or(s),
                max_restarts,
            };
        }
        (_, Some(n_traj)) => {
            config.mode = Mode::Trajectories {
                n_traj,
                seed: seed.unwrap_or(0),
                max_restarts: DEFAULT_MAX_RESTARTS,
            };
        }
        (_, None) if seed.is_some() => {
            return Err(CliError::value("--seed", "a seed only applies to trajectories mode"));
        }
        _ => {}
    }
    config.validate()?;
    Ok(config)
}

/// Executes one command and returns the text to print.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            trajectories,
            truncation,
        } => {
            let config = apply_overrides(load(&config)?, seed, trajectories, truncation.as_deref())?;
            let dir = out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("."));
            let manifest = run_to_dir(&config, &dir)?;
            Ok(format!("wrote {} to {}", manifest.artifacts.join(", "), dir.display()))
        }
        Command::Preset { name, out } => {
            let files = preset_to_dir(&name, &out)?;
            Ok(format!("wrote {} files to {}", files.len(), out.display()))
        }
        Command::Sweep {
            config,
            ls,
            qs,
            switch_points,
            out,
            truncation,
        } => {
            let started = Instant::now();
            let config = apply_overrides(load(&config)?, None, None, truncation.as_deref())?;
            let space = SearchSpace {
                ls,
                qs: parse_range(&qs)?,
                switch_points,
            };
            let (artifact, best) = sweep(&config, &space)?;
            let dir = out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("."));
            write_artifacts(&dir, std::slice::from_ref(&artifact))?;
            let summary = format!(
                "best: l={} q={}{} fidelity={} success_prob={}",
                best.l,
                best.q,
                best.switch_after.map(|s| format!(" L={s}")).unwrap_or_default(),
                best.fidelity,
                best.success_prob
            );
            let mut manifest = Manifest::new(Some(config), std::slice::from_ref(&artifact), started);
            manifest.best = Some(best);
            manifest.write(&dir)?;
            Ok(summary)
        }
        Command::ListPresets => Ok(PRESETS
            .iter()
            .map(|(n, d)| format!("{n}\t{d}"))
            .collect::<Vec<_>>()
            .join("\n")),
    }
}
