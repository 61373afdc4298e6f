use std::path::Path;
use std::time::Instant;

use fockmeas::error::Error as CoreError;
use fockmeas::hilbert::PureState;
use fockmeas::metrics::{
    bell_fidelity_closed_form, fock_fidelity_closed_form, fock_success_closed_form,
    superposed_fidelity_closed_form, CurvePoint, FidelityCurve,
};
use fockmeas::protocol::{run_postselected, trajectory_ensemble, CycleSpec, EnsembleSummary};
use fockmeas::schedule::{
    best_candidate, build_schedule, default_truncation, evaluate_candidates, initial_amplitude, prepare,
    simulate_strategy, tau_bell, tau_excited, tau_ground, Couplings, OptimizedStrategy, Prepared,
    SearchSpace, Sign, StrategyKind, TargetSpec,
};
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{csv_table, fmt_sig, write_artifacts, Artifact};

pub const CURVE_FILE: &str = "curve.csv";
pub const TRAJECTORY_FILE: &str = "trajectories.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Aggregate Monte-Carlo statistics of a trajectories-mode run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub n_traj: u64,
    pub seed: u64,
    pub attempts: u64,
    pub accepted_full_runs: u64,
    pub accepted_trajectories: u64,
    pub acceptance_frequency: f64,
    pub success_prob: f64,
    pub binomial_sigma: f64,
    pub cycles_consumed: u64,
    pub mean_final_fidelity: Option<f64>,
    pub min_agreement: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curve: FidelityCurve,
    pub artifacts: Vec<Artifact>,
    pub trajectories: Option<TrajectoryReport>,
}

fn map_core(e: CoreError) -> CliError {
    match e {
        CoreError::TailMassExceeded { .. } | CoreError::TruncationTooLarge { .. } => {
            CliError::value("truncation", e.to_string())
        }
        CoreError::InconsistentStrategy(m) => CliError::schema("strategy", m),
        CoreError::DegenerateTarget(m) => CliError::value("target", m),
        other => CliError::Numerical(other),
    }
}

/// CSV of a fidelity curve: `N,fidelity,success_prob` for Fock targets,
/// `N,fidelity_plus,fidelity_minus,success_prob` otherwise.
pub fn curve_csv(curve: &FidelityCurve) -> String {
    let two = curve.points.first().is_some_and(|p| p.fidelity_minus.is_some());
    let header: &[&str] = if two {
        &["N", "fidelity_plus", "fidelity_minus", "success_prob"]
    } else {
        &["N", "fidelity", "success_prob"]
    };
    let rows = curve.points.iter().map(|p| {
        let mut row = vec![p.cycle.to_string(), fmt_sig(p.fidelity)];
        if let Some(m) = p.fidelity_minus {
            row.push(fmt_sig(m));
        }
        row.push(fmt_sig(p.success));
        row
    });
    csv_table(header, rows)
}

/// Fidelity curve from the closed forms (uniform schedules only).
pub fn closed_form_curve(config: &RunConfig) -> Result<FidelityCurve> {
    let target = config.target_spec()?;
    let dims = match config.truncation_dims() {
        Some(d) => d,
        None => default_truncation(&target).map_err(map_core)?,
    };
    let amp = initial_amplitude(&target).map_err(map_core)?;
    let resonant_only = |what: &str| -> Result<()> {
        if config.params.delta != 0.0 {
            Err(CliError::value("params.delta", format!("closed-form {what} curves assume delta = 0")))
        } else {
            Ok(())
        }
    };
    let cycles = 0..=config.cycles;
    let points = match (target, config.couplings()) {
        (TargetSpec::Fock(n), Couplings::Qubit(p)) => {
            let tau = tau_excited(n, 1, &p).map_err(map_core)?;
            cycles
                .map(|c| CurvePoint {
                    cycle: c,
                    fidelity: fock_fidelity_closed_form(n, c, tau, &p, amp.alpha, dims.0),
                    fidelity_minus: None,
                    success: fock_success_closed_form(c, tau, &p, amp.alpha, dims.0),
                })
                .collect()
        }
        (TargetSpec::Superposed { n, .. }, Couplings::Qubit(p)) => {
            resonant_only("superposed")?;
            let tau = tau_ground(n, 1, &p).map_err(map_core)?;
            cycles
                .map(|c| {
                    let (fp, fm, s) = superposed_fidelity_closed_form(&target, c, tau, &p, amp.alpha, dims.0)
                        .expect("superposed target");
                    CurvePoint { cycle: c, fidelity: fp, fidelity_minus: Some(fm), success: s }
                })
                .collect()
        }
        (TargetSpec::Bell { m, n, .. }, Couplings::Qutrit(p)) => {
            resonant_only("Bell")?;
            let tau = tau_bell(m, n, 1, &p).map_err(map_core)?;
            let beta = amp.beta.expect("two-mode amplitude");
            cycles
                .map(|c| {
                    let (fp, fm, s) = bell_fidelity_closed_form(&target, c, tau, &p, amp.alpha, beta, dims)
                        .expect("bell target");
                    CurvePoint { cycle: c, fidelity: fp, fidelity_minus: Some(fm), success: s }
                })
                .collect()
        }
        _ => unreachable!("couplings follow the target kind"),
    };
    Ok(FidelityCurve { points })
}

fn ensemble<S: PureState>(
    initial: &S,
    schedule: &[CycleSpec],
    target: &S,
    n_traj: u64,
    seed: u64,
    max_restarts: u64,
) -> Result<(EnsembleSummary, f64)> {
    let p = run_postselected(initial, schedule, target).map_err(map_core)?.last().success;
    let e = trajectory_ensemble(initial, schedule, target, n_traj, seed, max_restarts).map_err(map_core)?;
    Ok((e, p))
}

fn trajectory_artifacts(
    config: &RunConfig,
    curve: &FidelityCurve,
    n_traj: u64,
    seed: u64,
    max_restarts: u64,
) -> Result<(Artifact, TrajectoryReport)> {
    let target = config.target_spec()?;
    let schedule = build_schedule(&target, &config.strategy_spec(), &config.couplings()).map_err(map_core)?;
    let which = match config.target.sign() {
        Sign::Plus => 0,
        Sign::Minus => 1,
    };
    let (summary, p) = match prepare(&target, config.truncation_dims()).map_err(map_core)? {
        Prepared::Single { initial, targets } => ensemble(&initial, &schedule, &targets[which.min(targets.len() - 1)], n_traj, seed, max_restarts)?,
        Prepared::TwoMode { initial, targets } => ensemble(&initial, &schedule, &targets[which], n_traj, seed, max_restarts)?,
    };
    let stats = &summary.stats;
    let attempts = stats.attempts.max(1) as f64;
    let mut alive = stats.attempts;
    let mut rows = vec![vec!["0".to_string(), alive.to_string(), "1".to_string(), "1".to_string()]];
    for (i, &failed) in stats.failures_per_cycle.iter().enumerate() {
        alive -= failed;
        rows.push(vec![
            (i + 1).to_string(),
            alive.to_string(),
            fmt_sig(alive as f64 / attempts),
            fmt_sig(curve.points[i + 1].success),
        ]);
    }
    let artifact = Artifact {
        name: TRAJECTORY_FILE.into(),
        contents: csv_table(&["N", "survivors", "empirical_success_prob", "success_prob"], rows),
    };
    let report = TrajectoryReport {
        n_traj,
        seed,
        attempts: stats.attempts,
        accepted_full_runs: stats.accepted_full_runs,
        accepted_trajectories: summary.accepted_trajectories,
        acceptance_frequency: stats.acceptance_frequency(),
        success_prob: p,
        binomial_sigma: (p * (1.0 - p) / attempts).sqrt(),
        cycles_consumed: stats.cycles_consumed,
        mean_final_fidelity: summary.mean_final_fidelity,
        min_agreement: summary.min_agreement,
    };
    Ok((artifact, report))
}

/// Evaluates a configuration in memory.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let target = config.target_spec()?;
    let curve = match config.mode {
        Mode::ClosedForm => closed_form_curve(config)?,
        Mode::Postselected | Mode::Trajectories { .. } => simulate_strategy(
            &target,
            &config.strategy_spec(),
            &config.couplings(),
            config.truncation_dims(),
        )
        .map_err(map_core)?,
    };
    let mut artifacts = vec![Artifact {
        name: CURVE_FILE.into(),
        contents: curve_csv(&curve),
    }];
    let mut trajectories = None;
    if let Mode::Trajectories { n_traj, seed, max_restarts } = config.mode {
        let (a, report) = trajectory_artifacts(config, &curve, n_traj, seed, max_restarts)?;
        artifacts.push(a);
        trajectories = Some(report);
    }
    Ok(RunOutput {
        curve,
        artifacts,
        trajectories,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub wall_time_seconds: f64,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectoryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best: Option<SweepBest>,
}

impl Manifest {
    pub fn new(config: Option<RunConfig>, artifacts: &[Artifact], started: Instant) -> Self {
        let seed = match config.as_ref().map(|c| c.mode) {
            Some(Mode::Trajectories { seed, .. }) => Some(seed),
            _ => None,
        };
        Self {
            version: env!("CARGO_PKG_VERSION"),
            config,
            preset: None,
            seed,
            wall_time_seconds: started.elapsed().as_secs_f64(),
            artifacts: artifacts.iter().map(|a| a.name.clone()).collect(),
            trajectories: None,
            best: None,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_artifacts(
            dir,
            &[Artifact {
                name: MANIFEST_FILE.into(),
                contents: text + "\n",
            }],
        )
    }
}

/// Runs a configuration and writes its CSV files and manifest into `dir`.
pub fn run_to_dir(config: &RunConfig, dir: &Path) -> Result<Manifest> {
    let started = Instant::now();
    let out = run(config)?;
    write_artifacts(dir, &out.artifacts)?;
    let mut manifest = Manifest::new(Some(config.clone()), &out.artifacts, started);
    manifest.trajectories = out.trajectories;
    manifest.write(dir)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepBest {
    pub l: usize,
    pub q: usize,
    pub switch_after: Option<usize>,
    pub fidelity: f64,
    pub success_prob: f64,
}

fn strategy_columns(s: &OptimizedStrategy) -> (usize, usize, Option<usize>) {
    match s.strategy.kind {
        StrategyKind::Uniform => (1, s.strategy.total_cycles, None),
        StrategyKind::Hybrid { l, q } => (l, q, None),
        StrategyKind::HybridTwoMode { l, q, switch_after, .. } => (l, q, Some(switch_after)),
    }
}

/// Scores every strategy of `space` at a budget of `config.cycles` and
/// returns the candidate table plus the winner under the optimizer's
/// tie-break.
pub fn sweep(config: &RunConfig, space: &SearchSpace) -> Result<(Artifact, SweepBest)> {
    config.validate()?;
    let target = config.target_spec()?;
    let couplings = config.couplings();
    let scored = evaluate_candidates(&target, &couplings, config.cycles, space, config.truncation_dims())
        .map_err(map_core)?;
    let best = best_candidate(&scored).expect("evaluate_candidates rejects empty grids");
    let rows = scored.iter().map(|s| {
        let (l, q, sw) = strategy_columns(s);
        vec![
            l.to_string(),
            q.to_string(),
            sw.map(|x| x.to_string()).unwrap_or_default(),
            fmt_sig(s.fidelity),
            fmt_sig(s.success),
        ]
    });
    let artifact = Artifact {
        name: SWEEP_FILE.into(),
        contents: csv_table(&["l", "q", "switch_after", "fidelity", "success_prob"], rows),
    };
    let (l, q, switch_after) = strategy_columns(&best);
    Ok((
        artifact,
        SweepBest {
            l,
            q,
            switch_after,
            fidelity: best.fidelity,
            success_prob: best.success,
        },
    ))
}
