//! Evolution-and-measurement cycles.
//!
//! The post-selected engine follows the branch in which every measurement
//! returns the ancilla's initial level and tracks the cumulative success
//! probability. The stochastic engine samples measurement outcomes and
//! restarts from the initial state whenever a cycle fails.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{fidelity, PureState};
use crate::kernel::{kraus_diagonal, two_mode_kraus, DiagonalKraus, Label, SystemParams, TwoModeKraus, TwoModeParams};

/// Branches with a smaller success probability are treated as dead.
pub const VANISHING_PROBABILITY: f64 = 1e-300;

pub const DEFAULT_MAX_RESTARTS: u64 = 1_000_000;

/// Ancilla and couplings active during one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Two-level ancilla on one mode, prepared and measured in `label`.
    Qubit { label: Label, params: SystemParams },
    /// V-type qutrit on two modes, prepared and measured in its ground level.
    Qutrit(TwoModeParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSpec {
    pub tau: f64,
    pub coupling: Coupling,
}

impl CycleSpec {
    pub fn qubit(tau: f64, label: Label, params: SystemParams) -> Self {
        Self {
            tau,
            coupling: Coupling::Qubit { label, params },
        }
    }

    pub fn qutrit(tau: f64, params: TwoModeParams) -> Self {
        Self {
            tau,
            coupling: Coupling::Qutrit(params),
        }
    }

    /// Kraus operator of this cycle for a state of the given shape.
    pub fn kraus(&self, shape: (usize, usize)) -> Result<Kraus> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cycle period must be positive, got {}",
                self.tau
            )));
        }
        match self.coupling {
            Coupling::Qubit { label, params } => {
                if shape.1 != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: (shape.0, 1),
                        found: shape,
                    });
                }
                Ok(Kraus::Single(kraus_diagonal(label, self.tau, &params, shape.0)))
            }
            Coupling::Qutrit(params) => Ok(Kraus::TwoMode(two_mode_kraus(self.tau, &params, shape))),
        }
    }
}

/// A diagonal cycle operator on one or two modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Kraus {
    Single(DiagonalKraus),
    TwoMode(TwoModeKraus),
}

impl Kraus {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Kraus::Single(k) => (k.coeffs.len(), 1),
            Kraus::TwoMode(k) => k.dims,
        }
    }

    fn coeff(&self, k: usize, kp: usize) -> C64 {
        match self {
            Kraus::Single(v) => v.coeffs[k],
            Kraus::TwoMode(v) => v.coeff(k, kp),
        }
    }

    /// Identity operator, mainly for tests.
    pub fn identity(dims: (usize, usize)) -> Self {
        let one = C64::new(1.0, 0.0);
        if dims.1 == 1 {
            Kraus::Single(DiagonalKraus {
                coeffs: vec![one; dims.0],
                label: Label::Ground,
                tau: 0.0,
            })
        } else {
            Kraus::TwoMode(TwoModeKraus {
                coeffs: vec![one; dims.0 * dims.1],
                dims,
                tau: 0.0,
            })
        }
    }
}

/// Unnormalized post-measurement amplitudes and their squared norm.
fn project(amps: &[C64], shape: (usize, usize), kraus: &Kraus) -> Result<(Vec<C64>, f64)> {
    let kd = kraus.dims();
    let compatible = match kraus {
        Kraus::Single(_) => shape.1 == 1 && kd.0 >= shape.0,
        Kraus::TwoMode(_) => kd.0 >= shape.0 && kd.1 >= shape.1,
    };
    if !compatible {
        return Err(Error::DimensionMismatch {
            expected: shape,
            found: kd,
        });
    }
    let mut out = Vec::with_capacity(amps.len());
    let mut prob = 0.0;
    for k in 0..shape.0 {
        for kp in 0..shape.1 {
            let c = kraus.coeff(k, kp) * amps[k * shape.1 + kp];
            prob += c.norm_sqr();
            out.push(c);
        }
    }
    Ok((out, prob))
}

fn renormalized<S: PureState>(shape: (usize, usize), mut amps: Vec<C64>, prob: f64) -> Result<S> {
    let scale = prob.sqrt();
    amps.iter_mut().for_each(|c| *c /= scale);
    S::from_parts(shape, amps)
}

/// One post-selected cycle: returns the conditional state and the success
/// probability `Σ_k |λ_k|²|c_k|²`.
pub fn apply_cycle<S: PureState>(state: &S, kraus: &Kraus) -> Result<(S, f64)> {
    let shape = state.shape();
    let (amps, prob) = project(state.amplitudes(), shape, kraus)?;
    if !(prob >= VANISHING_PROBABILITY) {
        return Err(Error::VanishingBranch {
            cycle: 0,
            probability: prob,
        });
    }
    Ok((renormalized(shape, amps, prob)?, prob))
}

/// Kraus operators for every cycle of a schedule.
pub fn compile_schedule(schedule: &[CycleSpec], shape: (usize, usize)) -> Result<Vec<Kraus>> {
    schedule.iter().map(|c| c.kraus(shape)).collect()
}

#[derive(Debug, Clone)]
pub struct RecordEntry<S> {
    /// Number of completed cycles `N`.
    pub cycle: usize,
    /// Fidelity to each requested target, in request order.
    pub fidelities: Vec<f64>,
    /// Cumulative success probability `P(N)`.
    pub success: f64,
    pub snapshot: Option<S>,
}

impl<S> RecordEntry<S> {
    pub fn fidelity(&self) -> f64 {
        self.fidelities[0]
    }
}

/// Per-cycle history of a post-selected run, starting with `N = 0`.
#[derive(Debug, Clone)]
pub struct EvolutionRecord<S> {
    pub entries: Vec<RecordEntry<S>>,
    pub final_state: S,
}

impl<S> EvolutionRecord<S> {
    pub fn at(&self, cycle: usize) -> &RecordEntry<S> {
        &self.entries[cycle]
    }

    pub fn last(&self) -> &RecordEntry<S> {
        self.entries.last().expect("record always holds N = 0")
    }

    /// First `N` whose fidelity to target `which` reaches `threshold`.
    pub fn first_reaching(&self, which: usize, threshold: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.fidelities[which] >= threshold)
            .map(|e| e.cycle)
    }
}

pub fn run_postselected<S: PureState>(
    initial: &S,
    schedule: &[CycleSpec],
    target: &S,
) -> Result<EvolutionRecord<S>> {
    run_postselected_multi(initial, schedule, std::slice::from_ref(target), false)
}

/// Post-selected run recording fidelities to several targets and, optionally,
/// the conditional state after every cycle.
pub fn run_postselected_multi<S: PureState>(
    initial: &S,
    schedule: &[CycleSpec],
    targets: &[S],
    snapshots: bool,
) -> Result<EvolutionRecord<S>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("schedule is empty".into()));
    }
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target state given".into()));
    }
    let kraus = compile_schedule(schedule, initial.shape())?;
    let fidelities = |s: &S| -> Result<Vec<f64>> { targets.iter().map(|t| fidelity(s, t)).collect() };

    let mut entries = Vec::with_capacity(schedule.len() + 1);
    entries.push(RecordEntry {
        cycle: 0,
        fidelities: fidelities(initial)?,
        success: 1.0,
        snapshot: snapshots.then(|| initial.clone()),
    });
    let mut state = initial.clone();
    let mut success = 1.0;
    for (i, op) in kraus.iter().enumerate() {
        let (next, p) = apply_cycle(&state, op).map_err(|e| match e {
            Error::VanishingBranch { probability, .. } => Error::VanishingBranch {
                cycle: i + 1,
                probability,
            },
            other => other,
        })?;
        state = next;
        success *= p;
        entries.push(RecordEntry {
            cycle: i + 1,
            fidelities: fidelities(&state)?,
            success,
            snapshot: snapshots.then(|| state.clone()),
        });
    }
    Ok(EvolutionRecord {
        entries,
        final_state: state,
    })
}

/// Bookkeeping of the restart-on-failure process.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrajectoryStats {
    /// Runs started from the initial state, including restarts.
    pub attempts: u64,
    pub accepted_full_runs: u64,
    /// `failures_per_cycle[i]` counts runs that failed at cycle `i + 1`.
    pub failures_per_cycle: Vec<u64>,
    pub cycles_consumed: u64,
}

impl TrajectoryStats {
    pub fn new(n_cycles: usize) -> Self {
        Self {
            failures_per_cycle: vec![0; n_cycles],
            ..Self::default()
        }
    }

    pub fn merge(&mut self, other: &TrajectoryStats) {
        self.attempts += other.attempts;
        self.accepted_full_runs += other.accepted_full_runs;
        self.cycles_consumed += other.cycles_consumed;
        if self.failures_per_cycle.len() < other.failures_per_cycle.len() {
            self.failures_per_cycle.resize(other.failures_per_cycle.len(), 0);
        }
        for (a, b) in self.failures_per_cycle.iter_mut().zip(&other.failures_per_cycle) {
            *a += b;
        }
    }

    pub fn failures(&self) -> u64 {
        self.failures_per_cycle.iter().sum()
    }

    /// Fraction of attempts that completed every cycle.
    pub fn acceptance_frequency(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.accepted_full_runs as f64 / self.attempts as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryOutcome<S> {
    pub accepted: bool,
    pub stats: TrajectoryStats,
    pub final_state: Option<S>,
}

/// Per-trajectory stream: ChaCha8 seeded from `master_seed`, stream `index`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

fn sample_compiled<S: PureState, R: Rng + ?Sized>(
    initial: &S,
    kraus: &[Kraus],
    rng: &mut R,
    max_restarts: u64,
) -> Result<TrajectoryOutcome<S>> {
    let shape = initial.shape();
    let mut stats = TrajectoryStats::new(kraus.len());
    let mut restarts = 0u64;
    'attempt: loop {
        stats.attempts += 1;
        let mut amps = initial.amplitudes().to_vec();
        for (i, op) in kraus.iter().enumerate() {
            stats.cycles_consumed += 1;
            let (next, p) = project(&amps, shape, op)?;
            let u: f64 = rng.random();
            if u < p && p >= VANISHING_PROBABILITY {
                let scale = p.sqrt();
                amps = next.into_iter().map(|c| c / scale).collect();
            } else {
                stats.failures_per_cycle[i] += 1;
                if restarts >= max_restarts {
                    return Ok(TrajectoryOutcome {
                        accepted: false,
                        stats,
                        final_state: None,
                    });
                }
                restarts += 1;
                continue 'attempt;
            }
        }
        stats.accepted_full_runs += 1;
        return Ok(TrajectoryOutcome {
            accepted: true,
            stats,
            final_state: Some(S::from_parts(shape, amps)?),
        });
    }
}

/// Samples measurement outcomes cycle by cycle, restarting from `initial` on
/// any failure, until a full run succeeds or `max_restarts` is exhausted.
pub fn sample_trajectory<S: PureState, R: Rng + ?Sized>(
    initial: &S,
    schedule: &[CycleSpec],
    rng: &mut R,
    max_restarts: u64,
) -> Result<TrajectoryOutcome<S>> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("schedule is empty".into()));
    }
    let kraus = compile_schedule(schedule, initial.shape())?;
    sample_compiled(initial, &kraus, rng, max_restarts)
}

#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub n_traj: u64,
    pub stats: TrajectoryStats,
    /// Trajectories that ended with an accepted run.
    pub accepted_trajectories: u64,
    /// Mean target fidelity over accepted final states.
    pub mean_final_fidelity: Option<f64>,
    /// Smallest overlap `|⟨ψ_post|ψ_traj⟩|²` between an accepted final state
    /// and the deterministic post-selected state.
    pub min_agreement: Option<f64>,
}

/// Runs `n_traj` independent trajectories in parallel. Trajectory `i` uses
/// [`trajectory_rng`]`(master_seed, i)` and results are reduced in index order,
/// so the summary does not depend on thread scheduling.
pub fn trajectory_ensemble<S: PureState>(
    initial: &S,
    schedule: &[CycleSpec],
    target: &S,
    n_traj: u64,
    master_seed: u64,
    max_restarts: u64,
) -> Result<EnsembleSummary> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("schedule is empty".into()));
    }
    let kraus = compile_schedule(schedule, initial.shape())?;
    let reference = run_postselected(initial, schedule, target).ok().map(|r| r.final_state);

    let per_traj: Vec<Result<(TrajectoryStats, Option<(f64, f64)>)>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(master_seed, i);
            let out = sample_compiled(initial, &kraus, &mut rng, max_restarts)?;
            let scores = match (&out.final_state, &reference) {
                (Some(s), Some(r)) => Some((fidelity(s, target)?, fidelity(s, r)?)),
                (Some(s), None) => Some((fidelity(s, target)?, f64::NAN)),
                _ => None,
            };
            Ok((out.stats, scores))
        })
        .collect();

    let mut stats = TrajectoryStats::new(schedule.len());
    let mut accepted = 0u64;
    let mut fid_sum = 0.0;
    let mut min_agreement: Option<f64> = None;
    for item in per_traj {
        let (s, scores) = item?;
        stats.merge(&s);
        if let Some((f, agree)) = scores {
            accepted += 1;
            fid_sum += f;
            if !agree.is_nan() {
                min_agreement = Some(min_agreement.map_or(agree, |m: f64| m.min(agree)));
            }
        }
    }
    Ok(EnsembleSummary {
        n_traj,
        stats,
        accepted_trajectories: accepted,
        mean_final_fidelity: (accepted > 0).then(|| fid_sum / accepted as f64),
        min_agreement,
    })
}
