//! Closed-form fidelities and success probabilities for uniform schedules.
//!
//! Everything here is computed directly from Poisson weights and reduction
//! factors, without going through the protocol engine, so the two paths can
//! check each other.

use crate::kernel::{SystemParams, TwoModeParams};
use crate::schedule::TargetSpec;

/// One row of a fidelity/success curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub cycle: usize,
    /// Fidelity to the target, or to the `+` branch of a superposed target.
    pub fidelity: f64,
    /// Fidelity to the `−` branch, for superposed and Bell targets.
    pub fidelity_minus: Option<f64>,
    pub success: f64,
}

impl CurvePoint {
    /// `max(F_+, F_−)`: the branch the state currently sits in.
    pub fn best(&self) -> f64 {
        self.fidelity_minus.map_or(self.fidelity, |m| m.max(self.fidelity))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FidelityCurve {
    pub points: Vec<CurvePoint>,
}

impl FidelityCurve {
    pub fn at(&self, cycle: usize) -> &CurvePoint {
        &self.points[cycle]
    }

    pub fn last(&self) -> &CurvePoint {
        self.points.last().expect("curve is non-empty")
    }

    /// First cycle count whose [`CurvePoint::best`] fidelity reaches `threshold`.
    pub fn first_reaching(&self, threshold: f64) -> Option<usize> {
        self.points.iter().find(|p| p.best() >= threshold).map(|p| p.cycle)
    }
}

/// `|α_k|²` for a coherent state of mean photon number `mean`.
fn poisson_weights(mean: f64, trunc_dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(trunc_dim);
    let mut ln_fact = 0.0;
    for k in 0..trunc_dim {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let p = if mean == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (-mean + k as f64 * mean.ln() - ln_fact).exp()
        };
        out.push(p);
    }
    out
}

/// `|λ|² = cos²Ωτ + δ² sin²Ωτ / (4Ω²)`.
fn reduction_factor(omega: f64, tau: f64, delta: f64) -> f64 {
    let c = (omega * tau).cos();
    let s_over = if omega == 0.0 { tau } else { (omega * tau).sin() / omega };
    c * c + 0.25 * delta * delta * s_over * s_over
}

/// `|λ_k^(e)(τ)|^{2N}` for `k < trunc_dim`.
pub fn excited_reduction_profile(tau: f64, params: &SystemParams, cycles: usize, trunc_dim: usize) -> Vec<f64> {
    (0..trunc_dim)
        .map(|k| {
            let omega = (0.25 * params.delta * params.delta + (k + 1) as f64 * params.g * params.g).sqrt();
            reduction_factor(omega, tau, params.delta).powi(cycles as i32)
        })
        .collect()
}

/// `|λ_{kk'}(τ)|^{2N}` on a `dims.0 × dims.1` grid, row-major.
pub fn two_mode_reduction_profile(tau: f64, params: &TwoModeParams, cycles: usize, dims: (usize, usize)) -> Vec<f64> {
    let mut out = Vec::with_capacity(dims.0 * dims.1);
    for k in 0..dims.0 {
        for kp in 0..dims.1 {
            let omega = (0.25 * params.delta * params.delta
                + params.g_a * params.g_a * k as f64
                + params.g_b * params.g_b * kp as f64)
                .sqrt();
            out.push(reduction_factor(omega, tau, params.delta).powi(cycles as i32));
        }
    }
    out
}

/// Fidelity of `|n⟩` after `N` uniform excited-state cycles from `|α⟩`:
/// `|α_n|²|λ_n|^{2N} / Σ_k |α_k|²|λ_k|^{2N}`.
pub fn fock_fidelity_closed_form(
    n: usize,
    cycles: usize,
    tau: f64,
    params: &SystemParams,
    alpha: f64,
    trunc_dim: usize,
) -> f64 {
    let p = poisson_weights(alpha * alpha, trunc_dim);
    let r = excited_reduction_profile(tau, params, cycles, trunc_dim);
    let weighted: Vec<f64> = p.iter().zip(&r).map(|(a, b)| a * b).collect();
    let total: f64 = weighted.iter().sum();
    weighted.get(n).copied().unwrap_or(0.0) / total
}

/// Success probability `P_e(N) = Σ_k p_k |λ_k^(e)|^{2N}`, with `p_k`
/// renormalized over the truncation.
pub fn fock_success_closed_form(cycles: usize, tau: f64, params: &SystemParams, alpha: f64, trunc_dim: usize) -> f64 {
    let p = poisson_weights(alpha * alpha, trunc_dim);
    let norm: f64 = p.iter().sum();
    let r = excited_reduction_profile(tau, params, cycles, trunc_dim);
    p.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / norm
}

/// `(F_+, F_−, P_g)` for `c_0|0⟩ ± c_n|n⟩` after `N` uniform ground-state
/// cycles on resonance:
///
/// ```text
/// F_± = [c_0² p_0 + c_n² p_n cos^{2N}(√n gτ) ± 2 c_0 c_n C_{n0} cos^N(√n gτ)] / P_g(N)
/// P_g(N) = Σ_k p_k cos^{2N}(√k gτ)
/// ```
pub fn superposed_fidelity_closed_form(
    target: &TargetSpec,
    cycles: usize,
    tau: f64,
    params: &SystemParams,
    alpha: f64,
    trunc_dim: usize,
) -> Option<(f64, f64, f64)> {
    let TargetSpec::Superposed { c0, cn, n, .. } = *target else {
        return None;
    };
    let p = poisson_weights(alpha * alpha, trunc_dim);
    let norm: f64 = p.iter().sum();
    let cos_k = |k: usize| ((k as f64).sqrt() * params.g * tau).cos();
    let success: f64 = (0..trunc_dim).map(|k| p[k] * cos_k(k).powi(2 * cycles as i32)).sum();
    let (c0, cn) = (c0.abs(), cn.abs());
    let cn_n = cos_k(n).powi(cycles as i32);
    // C_{n0} = α_n α_0 for real α
    let coherence = (p[n] * p[0]).sqrt();
    let diag = c0 * c0 * p[0] + cn * cn * p[n] * cn_n * cn_n;
    let cross = 2.0 * coherence * c0 * cn * cn_n;
    Some(((diag + cross) / success, (diag - cross) / success, success / norm))
}

/// `(F_+, F_−, P_g)` for `c_00|00⟩ ± c_mn|mn⟩` after `N` uniform qutrit
/// cycles on resonance.
pub fn bell_fidelity_closed_form(
    target: &TargetSpec,
    cycles: usize,
    tau: f64,
    params: &TwoModeParams,
    alpha: f64,
    beta: f64,
    dims: (usize, usize),
) -> Option<(f64, f64, f64)> {
    let TargetSpec::Bell { c00, cmn, m, n, .. } = *target else {
        return None;
    };
    let pa = poisson_weights(alpha * alpha, dims.0);
    let pb = poisson_weights(beta * beta, dims.1);
    let norm: f64 = pa.iter().sum::<f64>() * pb.iter().sum::<f64>();
    let cos_kk = |k: usize, kp: usize| {
        ((params.g_a * params.g_a * k as f64 + params.g_b * params.g_b * kp as f64).sqrt() * tau).cos()
    };
    let mut success = 0.0;
    for k in 0..dims.0 {
        for kp in 0..dims.1 {
            success += pa[k] * pb[kp] * cos_kk(k, kp).powi(2 * cycles as i32);
        }
    }
    let (c00, cmn) = (c00.abs(), cmn.abs());
    let p00 = pa[0] * pb[0];
    let pmn = pa[m] * pb[n];
    let c_n = cos_kk(m, n).powi(cycles as i32);
    let coherence = (p00 * pmn).sqrt();
    let diag = c00 * c00 * p00 + cmn * cmn * pmn * c_n * c_n;
    let cross = 2.0 * coherence * c00 * cmn * c_n;
    Some(((diag + cross) / success, (diag - cross) / success, success / norm))
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// Large-`N` success probability: the initial population of the protected
/// target components, with higher protected residuals neglected.
pub fn asymptotic_success(target: &TargetSpec) -> f64 {
    match *target {
        TargetSpec::Fock(n) => {
            let x = n as f64;
            if n == 0 {
                1.0
            } else {
                (-x + x * x.ln() - ln_factorial(n)).exp()
            }
        }
        TargetSpec::Superposed { c0, cn, n, .. } => {
            let (c0, cn) = (c0.abs(), cn.abs());
            // exp[-(c_n √(n!)/c_0)^{2/n}] / c_0²
            let ln_base = (cn / c0).ln() + 0.5 * ln_factorial(n);
            (-(2.0 * ln_base / n as f64).exp()).exp() / (c0 * c0)
        }
        TargetSpec::Bell { c00, cmn, m, n, .. } => {
            let (c00, cmn) = (c00.abs(), cmn.abs());
            let r = (cmn / c00).ln();
            let mean_a = ((r + ln_factorial(m)) / m as f64).exp();
            let mean_b = ((r + ln_factorial(n)) / n as f64).exp();
            (-mean_a - mean_b).exp() / (c00 * c00)
        }
    }
}
