//! Closed-form Kraus operators of one evolution-and-measurement cycle.
//!
//! Conditioned on finding the ancilla back in its initial level `i`, a cycle
//! of duration `τ` acts on the resonator as the diagonal operator
//! `Σ_k λ_k^(i)(τ)|k⟩⟨k|`. In the rotating frame each `λ` comes from a
//! two-level block of the Jaynes-Cummings ladder:
//!
//! ```text
//! λ_k^(e)(τ) = e^{-iδτ/2} [cos Ω_k^(e)τ - i δ sin(Ω_k^(e)τ)/(2Ω_k^(e))],  Ω_k^(e) = √(δ²/4 + (k+1)g²)
//! λ_k^(g)(τ) = e^{-iδτ/2} [cos Ω_k^(g)τ + i δ sin(Ω_k^(g)τ)/(2Ω_k^(g))],  Ω_k^(g) = √(δ²/4 + k g²)
//! ```
//!
//! The sign of the detuning term differs between the two labels because the
//! detuned level is the measured one for `e` and the partner level for `g`.
//! The two-mode (V-type qutrit) operator has the `g` form with
//! `Ω_{kk'} = √(δ²/4 + g_a²k + g_b²k')`.

use std::fmt;

use num_complex::Complex64 as C64;

/// Which ancilla level is prepared and post-selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Excited,
    Ground,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Excited => write!(f, "e"),
            Label::Ground => write!(f, "g"),
        }
    }
}

/// Qubit-resonator coupling and detuning, in units of the qubit splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub g: f64,
    pub delta: f64,
}

impl SystemParams {
    pub fn resonant(g: f64) -> Self {
        Self { g, delta: 0.0 }
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self { g: 0.05, delta: 0.0 }
    }
}

/// Qutrit couplings to modes a and b with a common detuning `δ_h = δ_e = δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    pub g_a: f64,
    pub g_b: f64,
    pub delta: f64,
}

impl TwoModeParams {
    pub fn resonant(g_a: f64, g_b: f64) -> Self {
        Self { g_a, g_b, delta: 0.0 }
    }

    /// Same detuning with the two couplings exchanged.
    pub fn swapped(self) -> Self {
        Self {
            g_a: self.g_b,
            g_b: self.g_a,
            delta: self.delta,
        }
    }
}

/// Diagonal Kraus operator `V_i(τ)` on one truncated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalKraus {
    pub coeffs: Vec<C64>,
    pub label: Label,
    pub tau: f64,
}

/// Diagonal Kraus operator `Π_g(τ)` on two modes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeKraus {
    pub coeffs: Vec<C64>,
    pub dims: (usize, usize),
    pub tau: f64,
}

impl TwoModeKraus {
    pub fn coeff(&self, k: usize, kp: usize) -> C64 {
        self.coeffs[k * self.dims.1 + kp]
    }
}

/// `sin(x)/x`, with a series below `|x| < 1e-6`.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Two-level block element `e^{-iδτ/2}[cos Ωτ + i s δ sin(Ωτ)/(2Ω)]`, `s = ±1`.
fn block_element(omega: f64, tau: f64, delta: f64, sign: f64) -> C64 {
    let x = omega * tau;
    // sin(Ωτ)/Ω = τ·sinc(Ωτ)
    let core = C64::new(x.cos(), sign * 0.5 * delta * tau * sinc(x));
    C64::from_polar(1.0, -0.5 * delta * tau) * core
}

/// k-photon Rabi frequency of the block containing `|label, k⟩`.
pub fn rabi_frequency(label: Label, k: usize, params: &SystemParams) -> f64 {
    let photons = match label {
        Label::Excited => k + 1,
        Label::Ground => k,
    } as f64;
    (0.25 * params.delta * params.delta + photons * params.g * params.g).sqrt()
}

pub fn reduction_coefficient(label: Label, k: usize, tau: f64, params: &SystemParams) -> C64 {
    let omega = rabi_frequency(label, k, params);
    let sign = match label {
        Label::Excited => -1.0,
        Label::Ground => 1.0,
    };
    block_element(omega, tau, params.delta, sign)
}

pub fn kraus_diagonal(label: Label, tau: f64, params: &SystemParams, trunc_dim: usize) -> DiagonalKraus {
    DiagonalKraus {
        coeffs: (0..trunc_dim)
            .map(|k| reduction_coefficient(label, k, tau, params))
            .collect(),
        label,
        tau,
    }
}

pub fn two_mode_rabi(k: usize, kp: usize, params: &TwoModeParams) -> f64 {
    (0.25 * params.delta * params.delta
        + params.g_a * params.g_a * k as f64
        + params.g_b * params.g_b * kp as f64)
        .sqrt()
}

pub fn two_mode_coefficient(k: usize, kp: usize, tau: f64, params: &TwoModeParams) -> C64 {
    block_element(two_mode_rabi(k, kp, params), tau, params.delta, 1.0)
}

pub fn two_mode_kraus(tau: f64, params: &TwoModeParams, dims: (usize, usize)) -> TwoModeKraus {
    let mut coeffs = Vec::with_capacity(dims.0 * dims.1);
    for k in 0..dims.0 {
        for kp in 0..dims.1 {
            coeffs.push(two_mode_coefficient(k, kp, tau, params));
        }
    }
    TwoModeKraus { coeffs, dims, tau }
}
