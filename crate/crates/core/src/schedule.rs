//! Measurement schedules: cycle periods, protected Fock indices, target
//! specifications, strategy families and an exhaustive strategy search.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{auto_truncation, coherent_state, product_state, FockVector, TwoModeState};
use crate::kernel::{rabi_frequency, two_mode_rabi, Label, SystemParams, TwoModeParams};
use crate::metrics::{CurvePoint, FidelityCurve};
use crate::protocol::{run_postselected_multi, CycleSpec};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// State to be prepared. Coefficients are real; their signs are carried by
/// [`Sign`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    /// `|n⟩`
    Fock(usize),
    /// `c_0|0⟩ ± c_n|n⟩`
    Superposed { c0: f64, cn: f64, n: usize, sign: Sign },
    /// `c_00|00⟩ ± c_mn|mn⟩`
    Bell { c00: f64, cmn: f64, m: usize, n: usize, sign: Sign },
}

impl TargetSpec {
    pub fn superposed(c0: f64, cn: f64, n: usize, sign: Sign) -> Result<Self> {
        let t = TargetSpec::Superposed { c0, cn, n, sign };
        t.validate()?;
        Ok(t)
    }

    pub fn bell(c00: f64, cmn: f64, m: usize, n: usize, sign: Sign) -> Result<Self> {
        let t = TargetSpec::Bell { c00, cmn, m, n, sign };
        t.validate()?;
        Ok(t)
    }

    /// `(|0⟩ + |n⟩)/√2`
    pub fn equal_superposition(n: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        TargetSpec::Superposed { c0: h, cn: h, n, sign: Sign::Plus }
    }

    /// `(|00⟩ + |nn⟩)/√2`
    pub fn equal_bell(n: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        TargetSpec::Bell { c00: h, cmn: h, m: n, n, sign: Sign::Plus }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |a: f64, b: f64| -> Result<()> {
            if !(a.is_finite() && b.is_finite()) || (a * a + b * b - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "coefficients ({a}, {b}) are not normalized"
                )));
            }
            if a == 0.0 || b == 0.0 {
                return Err(Error::DegenerateTarget(
                    "both superposition coefficients must be nonzero".into(),
                ));
            }
            Ok(())
        };
        match *self {
            TargetSpec::Fock(_) => Ok(()),
            TargetSpec::Superposed { c0, cn, n, .. } => {
                if n == 0 {
                    return Err(Error::DegenerateTarget("superposition needs n >= 1".into()));
                }
                check(c0, cn)
            }
            TargetSpec::Bell { c00, cmn, m, n, .. } => {
                if m == 0 || n == 0 {
                    return Err(Error::DegenerateTarget("Bell target needs m, n >= 1".into()));
                }
                check(c00, cmn)
            }
        }
    }

    pub fn is_two_mode(&self) -> bool {
        matches!(self, TargetSpec::Bell { .. })
    }

    /// Same target with the relative sign flipped; Fock targets are unchanged.
    pub fn flipped(&self) -> Self {
        let flip = |s: Sign| match s {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        match *self {
            TargetSpec::Fock(n) => TargetSpec::Fock(n),
            TargetSpec::Superposed { c0, cn, n, sign } => TargetSpec::Superposed { c0, cn, n, sign: flip(sign) },
            TargetSpec::Bell { c00, cmn, m, n, sign } => TargetSpec::Bell { c00, cmn, m, n, sign: flip(sign) },
        }
    }
}

/// Couplings for the ancilla that matches a target kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Couplings {
    Qubit(SystemParams),
    Qutrit(TwoModeParams),
}

impl Couplings {
    /// `g = 0.05` for one mode, `g_a/g_b = 0.05/0.03` for two.
    pub fn default_for(target: &TargetSpec) -> Self {
        if target.is_two_mode() {
            Couplings::Qutrit(TwoModeParams::resonant(0.05, 0.03))
        } else {
            Couplings::Qubit(SystemParams::default())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    /// Every cycle at the base period.
    Uniform,
    /// `S_l^(q)`: `q` cycles at the base period, the rest at `l` times it.
    Hybrid { l: usize, q: usize },
    /// `S_l^(q,L)`: couplings switch from `before` to `after` after
    /// `switch_after` cycles, and each segment opens with `q` short cycles.
    HybridTwoMode {
        l: usize,
        q: usize,
        switch_after: usize,
        before: TwoModeParams,
        after: TwoModeParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub total_cycles: usize,
}

impl StrategySpec {
    pub fn uniform(total_cycles: usize) -> Self {
        Self { kind: StrategyKind::Uniform, total_cycles }
    }

    pub fn hybrid(l: usize, q: usize, total_cycles: usize) -> Self {
        Self { kind: StrategyKind::Hybrid { l, q }, total_cycles }
    }

    /// `S_l^(q,L)` that exchanges `g_a` and `g_b` after `L` cycles.
    pub fn hybrid_swap(l: usize, q: usize, switch_after: usize, before: TwoModeParams, total_cycles: usize) -> Self {
        Self {
            kind: StrategyKind::HybridTwoMode {
                l,
                q,
                switch_after,
                before,
                after: before.swapped(),
            },
            total_cycles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.total_cycles;
        if n == 0 {
            return Err(Error::InconsistentStrategy("total cycle count must be at least 1".into()));
        }
        match self.kind {
            StrategyKind::Uniform => Ok(()),
            StrategyKind::Hybrid { l, q } => {
                if l == 0 {
                    return Err(Error::InconsistentStrategy("l must be at least 1".into()));
                }
                if q > n {
                    return Err(Error::InconsistentStrategy(format!("q = {q} exceeds N = {n}")));
                }
                Ok(())
            }
            StrategyKind::HybridTwoMode { l, q, switch_after, .. } => {
                if l == 0 {
                    return Err(Error::InconsistentStrategy("l must be at least 1".into()));
                }
                if !(q <= switch_after && switch_after <= n) {
                    return Err(Error::InconsistentStrategy(format!(
                        "need q <= L <= N, got q = {q}, L = {switch_after}, N = {n}"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn check_l(l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidArgument("period multiple l must be at least 1".into()));
    }
    Ok(())
}

/// `lπ/Ω_n^(e)`; keeps `|e, n⟩` fully protected.
pub fn tau_excited(n: usize, l: usize, params: &SystemParams) -> Result<f64> {
    check_l(l)?;
    Ok(l as f64 * PI / rabi_frequency(Label::Excited, n, params))
}

/// `lπ/Ω_n^(g)`; keeps `|0⟩` and `|n⟩` protected under ground-state cycles.
pub fn tau_ground(n: usize, l: usize, params: &SystemParams) -> Result<f64> {
    check_l(l)?;
    let omega = rabi_frequency(Label::Ground, n, params);
    if omega <= 0.0 {
        return Err(Error::DegenerateTarget(format!(
            "ground-state Rabi frequency vanishes for n = {n}"
        )));
    }
    Ok(l as f64 * PI / omega)
}

/// `lπ/Ω_mn` for the qutrit scheme with the given couplings.
pub fn tau_bell(m: usize, n: usize, l: usize, params: &TwoModeParams) -> Result<f64> {
    check_l(l)?;
    let omega = two_mode_rabi(m, n, params);
    if (m, n) == (0, 0) || omega <= 0.0 {
        return Err(Error::DegenerateTarget(format!(
            "two-mode Rabi frequency vanishes for ({m}, {n})"
        )));
    }
    Ok(l as f64 * PI / omega)
}

/// Fock indices below `trunc_dim` whose coefficient has unit modulus at
/// `τ = l·τ_n` on resonance.
///
/// For `e`: `k + 1 = j²(n + 1)/l²`; for `g`: `k = j²n/l²`, plus the vacuum.
/// Membership is decided in exact integer arithmetic.
pub fn stabilized_indices(n: usize, l: usize, trunc_dim: usize, label: Label) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    if l == 0 {
        return out;
    }
    let l2 = (l * l) as u128;
    let (base, offset) = match label {
        Label::Excited => ((n + 1) as u128, 1u128),
        Label::Ground => {
            if trunc_dim > 0 {
                out.insert(0);
            }
            (n as u128, 0u128)
        }
    };
    if base == 0 {
        return out;
    }
    let limit = trunc_dim as u128 + offset;
    let mut j: u128 = 1;
    loop {
        let num = j * j * base;
        if num / l2 >= limit {
            break;
        }
        if num % l2 == 0 {
            let k = num / l2 - offset;
            out.insert(k as usize);
        }
        j += 1;
    }
    out
}

/// Real positive coherent amplitude(s) of the initial resonator state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialAmplitude {
    pub alpha: f64,
    /// Mode-b amplitude for two-mode targets.
    pub beta: Option<f64>,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

pub fn initial_amplitude(target: &TargetSpec) -> Result<InitialAmplitude> {
    target.validate()?;
    Ok(match *target {
        TargetSpec::Fock(n) => InitialAmplitude { alpha: (n as f64).sqrt(), beta: None },
        TargetSpec::Superposed { c0, cn, n, .. } => {
            // α = (c_n √(n!) / c_0)^{1/n}
            let ln = (cn.abs() / c0.abs()).ln() + 0.5 * ln_factorial(n);
            InitialAmplitude { alpha: (ln / n as f64).exp(), beta: None }
        }
        TargetSpec::Bell { c00, cmn, m, n, .. } => {
            // α = (c_mn m!/c_00)^{1/2m}, β = (c_mn n!/c_00)^{1/2n}
            let ratio = (cmn.abs() / c00.abs()).ln();
            InitialAmplitude {
                alpha: ((ratio + ln_factorial(m)) / (2 * m) as f64).exp(),
                beta: Some(((ratio + ln_factorial(n)) / (2 * n) as f64).exp()),
            }
        }
    })
}

/// Default truncation(s): the coherent tail bound, widened to hold the next
/// protected index above the target.
pub fn default_truncation(target: &TargetSpec) -> Result<(usize, usize)> {
    let amp = initial_amplitude(target)?;
    Ok(match *target {
        TargetSpec::Fock(n) => (auto_truncation(amp.alpha).max(4 * (n + 1) + 1), 1),
        TargetSpec::Superposed { n, .. } => (auto_truncation(amp.alpha).max(4 * n + 2), 1),
        TargetSpec::Bell { m, n, .. } => (
            auto_truncation(amp.alpha).max(4 * m + 2),
            auto_truncation(amp.beta.unwrap_or(0.0)).max(4 * n + 2),
        ),
    })
}

/// Initial coherent state and target state(s) on a common truncation.
///
/// Superposed and Bell targets come with both relative signs, `+` first.
#[derive(Debug, Clone)]
pub enum Prepared {
    Single { initial: FockVector, targets: Vec<FockVector> },
    TwoMode { initial: TwoModeState, targets: Vec<TwoModeState> },
}

pub fn prepare(target: &TargetSpec, trunc: Option<(usize, usize)>) -> Result<Prepared> {
    let dims = match trunc {
        Some(d) => d,
        None => default_truncation(target)?,
    };
    let amp = initial_amplitude(target)?;
    let re = |x: f64| C64::new(x, 0.0);
    Ok(match *target {
        TargetSpec::Fock(n) => Prepared::Single {
            initial: coherent_state(re(amp.alpha), dims.0)?,
            targets: vec![FockVector::basis(n, dims.0)?],
        },
        TargetSpec::Superposed { c0, cn, n, .. } => Prepared::Single {
            initial: coherent_state(re(amp.alpha), dims.0)?,
            targets: vec![
                FockVector::superposition(re(c0.abs()), re(cn.abs()), n, dims.0)?,
                FockVector::superposition(re(c0.abs()), re(-cn.abs()), n, dims.0)?,
            ],
        },
        TargetSpec::Bell { c00, cmn, m, n, .. } => {
            let a = coherent_state(re(amp.alpha), dims.0)?;
            let b = coherent_state(re(amp.beta.unwrap_or(0.0)), dims.1)?;
            Prepared::TwoMode {
                initial: product_state(&a, &b)?,
                targets: vec![
                    TwoModeState::superposition(re(c00.abs()), re(cmn.abs()), m, n, dims)?,
                    TwoModeState::superposition(re(c00.abs()), re(-cmn.abs()), m, n, dims)?,
                ],
            }
        }
    })
}

/// Expands a strategy into its cycle list.
pub fn build_schedule(
    target: &TargetSpec,
    strategy: &StrategySpec,
    couplings: &Couplings,
) -> Result<Vec<CycleSpec>> {
    target.validate()?;
    strategy.validate()?;
    let total = strategy.total_cycles;
    let (l, q) = match strategy.kind {
        StrategyKind::Uniform => (1, total),
        StrategyKind::Hybrid { l, q } => (l, q),
        StrategyKind::HybridTwoMode { l, q, .. } => (l, q),
    };
    let scale = |seg_index: usize| if seg_index <= q { 1.0 } else { l as f64 };

    match (*target, *couplings, strategy.kind) {
        (_, _, StrategyKind::HybridTwoMode { switch_after, before, after, .. }) => {
            let TargetSpec::Bell { m, n, .. } = *target else {
                return Err(Error::InconsistentStrategy(
                    "coupling-switch strategies need a two-mode target".into(),
                ));
            };
            let tau_before = tau_bell(m, n, 1, &before)?;
            let tau_after = tau_bell(m, n, 1, &after)?;
            Ok((1..=total)
                .map(|i| {
                    if i <= switch_after {
                        CycleSpec::qutrit(tau_before * scale(i), before)
                    } else {
                        CycleSpec::qutrit(tau_after * scale(i - switch_after), after)
                    }
                })
                .collect())
        }
        (TargetSpec::Fock(n), Couplings::Qubit(p), _) => {
            let base = tau_excited(n, 1, &p)?;
            Ok((1..=total)
                .map(|i| CycleSpec::qubit(base * scale(i), Label::Excited, p))
                .collect())
        }
        (TargetSpec::Superposed { n, .. }, Couplings::Qubit(p), _) => {
            let base = tau_ground(n, 1, &p)?;
            Ok((1..=total)
                .map(|i| CycleSpec::qubit(base * scale(i), Label::Ground, p))
                .collect())
        }
        (TargetSpec::Bell { m, n, .. }, Couplings::Qutrit(p), _) => {
            let base = tau_bell(m, n, 1, &p)?;
            Ok((1..=total).map(|i| CycleSpec::qutrit(base * scale(i), p)).collect())
        }
        _ => Err(Error::InconsistentStrategy(
            "single-mode targets need qubit couplings and Bell targets need qutrit couplings".into(),
        )),
    }
}

/// Post-selected fidelity and success curve of a strategy, `N = 0..=total`.
pub fn simulate_strategy(
    target: &TargetSpec,
    strategy: &StrategySpec,
    couplings: &Couplings,
    trunc: Option<(usize, usize)>,
) -> Result<FidelityCurve> {
    let schedule = build_schedule(target, strategy, couplings)?;
    let curve = match prepare(target, trunc)? {
        Prepared::Single { initial, targets } => {
            curve_from(run_postselected_multi(&initial, &schedule, &targets, false)?.entries.iter().map(|e| (e.cycle, e.fidelities.clone(), e.success)))
        }
        Prepared::TwoMode { initial, targets } => {
            curve_from(run_postselected_multi(&initial, &schedule, &targets, false)?.entries.iter().map(|e| (e.cycle, e.fidelities.clone(), e.success)))
        }
    };
    Ok(curve)
}

fn curve_from(rows: impl Iterator<Item = (usize, Vec<f64>, f64)>) -> FidelityCurve {
    FidelityCurve {
        points: rows
            .map(|(cycle, f, success)| CurvePoint {
                cycle,
                fidelity: f[0],
                fidelity_minus: f.get(1).copied(),
                success,
            })
            .collect(),
    }
}

/// Grid searched by [`optimize_schedule`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchSpace {
    pub ls: Vec<usize>,
    pub qs: Vec<usize>,
    /// Coupling-switch points `L` (two-mode targets only). Empty means no
    /// switch: plain `S_l^(q)` candidates.
    pub switch_points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedStrategy {
    pub strategy: StrategySpec,
    /// Final fidelity; for superposed and Bell targets the better of the two
    /// relative signs.
    pub fidelity: f64,
    pub success: f64,
}

fn candidate_key(s: &StrategySpec) -> (usize, usize, usize) {
    match s.kind {
        StrategyKind::Uniform => (1, s.total_cycles, s.total_cycles),
        StrategyKind::Hybrid { l, q } => (l, q, 0),
        StrategyKind::HybridTwoMode { l, q, switch_after, .. } => (l, q, switch_after),
    }
}

/// Scores every candidate of the search space by its final fidelity and
/// success probability, in grid order (`l`, then `q`, then `L`).
pub fn evaluate_candidates(
    target: &TargetSpec,
    couplings: &Couplings,
    cycle_budget: usize,
    space: &SearchSpace,
    trunc: Option<(usize, usize)>,
) -> Result<Vec<OptimizedStrategy>> {
    if cycle_budget == 0 {
        return Err(Error::InvalidArgument("cycle budget must be at least 1".into()));
    }
    let mut candidates = Vec::new();
    for &l in &space.ls {
        for &q in space.qs.iter().filter(|&&q| q <= cycle_budget) {
            if space.switch_points.is_empty() {
                candidates.push(StrategySpec::hybrid(l, q, cycle_budget));
            } else {
                let Couplings::Qutrit(before) = couplings else {
                    return Err(Error::InconsistentStrategy(
                        "coupling switches need qutrit couplings".into(),
                    ));
                };
                for &sw in space.switch_points.iter().filter(|&&sw| q <= sw && sw <= cycle_budget) {
                    candidates.push(StrategySpec::hybrid_swap(l, q, sw, *before, cycle_budget));
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("search space is empty".into()));
    }
    candidates
        .par_iter()
        .map(|s| {
            let curve = simulate_strategy(target, s, couplings, trunc)?;
            let last = curve.last();
            Ok(OptimizedStrategy {
                strategy: *s,
                fidelity: last.best(),
                success: last.success,
            })
        })
        .collect()
}

/// Exhaustive search over the strategy family. The winner maximizes the final
/// fidelity; ties go to the higher final success probability, then the
/// smaller `l`, then the smaller `q`, then the smaller `L`.
pub fn optimize_schedule(
    target: &TargetSpec,
    couplings: &Couplings,
    cycle_budget: usize,
    space: &SearchSpace,
    trunc: Option<(usize, usize)>,
) -> Result<OptimizedStrategy> {
    let scored = evaluate_candidates(target, couplings, cycle_budget, space, trunc)?;
    Ok(best_candidate(&scored).expect("candidate list is non-empty"))
}

/// Winner of a scored candidate list under the optimizer's tie-break.
pub fn best_candidate(scored: &[OptimizedStrategy]) -> Option<OptimizedStrategy> {
    let mut best: Option<OptimizedStrategy> = None;
    for cand in scored.iter().cloned() {
        best = Some(match best {
            None => cand,
            Some(cur) => {
                let better = cand
                    .fidelity
                    .total_cmp(&cur.fidelity)
                    .then(cand.success.total_cmp(&cur.success))
                    .then(candidate_key(&cur.strategy).cmp(&candidate_key(&cand.strategy)))
                    .is_gt();
                if better {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    best
}
