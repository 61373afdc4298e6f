//! Truncated Fock-space pure states for one and two bosonic modes.
//!
//! States are stored as flat amplitude vectors. A single mode of truncation
//! `K` has shape `(K, 1)`; a two-mode state of truncations `(Ka, Kb)` is
//! stored row-major so that `|k⟩_a|k'⟩_b` lives at `k * Kb + k'`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest population allowed on the top truncated level of a constructed
/// coherent state.
pub const TAIL_THRESHOLD: f64 = 1e-12;

/// Above this index `ln k!` is accumulated in the log domain.
const LOG_DOMAIN_FROM: usize = 140;

/// Common interface of the pure resonator states used by the protocol engine.
pub trait PureState: Clone + Send + Sync {
    fn amplitudes(&self) -> &[C64];

    /// `(rows, cols)` of the amplitude layout; single modes report `(K, 1)`.
    fn shape(&self) -> (usize, usize);

    /// Builds a state of the same kind from raw amplitudes in the same layout.
    fn from_parts(shape: (usize, usize), amps: Vec<C64>) -> Result<Self>;

    fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    fn inner(&self, other: &Self) -> Result<C64> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(self
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// Pure state of one truncated bosonic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: Vec<C64>,
}

impl FockVector {
    /// Wraps raw amplitudes without normalizing.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidArgument("empty amplitude vector".into()));
        }
        Ok(Self { amps })
    }

    /// Number state `|n⟩` in a space of dimension `trunc_dim`.
    pub fn basis(n: usize, trunc_dim: usize) -> Result<Self> {
        if n >= trunc_dim {
            return Err(Error::InvalidArgument(format!(
                "Fock index {n} outside truncation {trunc_dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); trunc_dim];
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// `c_0|0⟩ + c_n|n⟩`, normalized.
    pub fn superposition(c0: C64, cn: C64, n: usize, trunc_dim: usize) -> Result<Self> {
        if n == 0 || n >= trunc_dim {
            return Err(Error::InvalidArgument(format!(
                "superposition index {n} must lie in 1..{trunc_dim}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); trunc_dim];
        amps[0] = c0;
        amps[n] = cn;
        Self { amps }.normalized()
    }

    pub fn trunc_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amp(&self, k: usize) -> C64 {
        self.amps.get(k).copied().unwrap_or_default()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.amp(k).norm_sqr()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn normalized(mut self) -> Result<Self> {
        normalize(&mut self.amps)?;
        Ok(self)
    }
}

impl PureState for FockVector {
    fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn shape(&self) -> (usize, usize) {
        (self.amps.len(), 1)
    }

    fn from_parts(shape: (usize, usize), amps: Vec<C64>) -> Result<Self> {
        if shape.1 != 1 || shape.0 != amps.len() {
            return Err(Error::DimensionMismatch {
                expected: (amps.len(), 1),
                found: shape,
            });
        }
        Self::from_amplitudes(amps)
    }
}

/// Pure state of two truncated modes in the product basis `|k⟩_a|k'⟩_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    amps: Vec<C64>,
    dims: (usize, usize),
}

impl TwoModeState {
    pub fn from_amplitudes(dims: (usize, usize), amps: Vec<C64>) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.0 * dims.1 != amps.len() {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: (amps.len(), 1),
            });
        }
        Ok(Self { amps, dims })
    }

    /// `c_00|00⟩ + c_mn|mn⟩`, normalized.
    pub fn superposition(
        c00: C64,
        cmn: C64,
        m: usize,
        n: usize,
        dims: (usize, usize),
    ) -> Result<Self> {
        if (m, n) == (0, 0) || m >= dims.0 || n >= dims.1 {
            return Err(Error::InvalidArgument(format!(
                "superposition index ({m},{n}) invalid for truncation {dims:?}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dims.0 * dims.1];
        amps[0] = c00;
        amps[m * dims.1 + n] = cmn;
        let mut state = Self { amps, dims };
        normalize(&mut state.amps)?;
        Ok(state)
    }

    pub fn trunc_dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amp(&self, k: usize, kp: usize) -> C64 {
        if k < self.dims.0 && kp < self.dims.1 {
            self.amps[k * self.dims.1 + kp]
        } else {
            C64::default()
        }
    }

    pub fn population(&self, k: usize, kp: usize) -> f64 {
        self.amp(k, kp).norm_sqr()
    }

    /// Reduced populations of mode a (`which = 0`) or mode b (`which = 1`).
    pub fn marginal(&self, which: usize) -> Vec<f64> {
        let (ka, kb) = self.dims;
        match which {
            0 => (0..ka)
                .map(|k| (0..kb).map(|kp| self.population(k, kp)).sum())
                .collect(),
            _ => (0..kb)
                .map(|kp| (0..ka).map(|k| self.population(k, kp)).sum())
                .collect(),
        }
    }
}

impl PureState for TwoModeState {
    fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    fn shape(&self) -> (usize, usize) {
        self.dims
    }

    fn from_parts(shape: (usize, usize), amps: Vec<C64>) -> Result<Self> {
        Self::from_amplitudes(shape, amps)
    }
}

fn normalize(amps: &mut [C64]) -> Result<()> {
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cannot normalize a state of norm {norm}"
        )));
    }
    amps.iter_mut().for_each(|c| *c /= norm);
    Ok(())
}

/// Truncation that keeps the Poisson tail of `|α⟩` far below
/// [`TAIL_THRESHOLD`]: `ceil(|α|² + 8|α| + 8)`.
pub fn auto_truncation(alpha_abs: f64) -> usize {
    let mean = alpha_abs * alpha_abs;
    (mean + 8.0 * alpha_abs + 8.0).ceil() as usize
}

/// Coherent state `|α⟩` truncated to `trunc_dim` levels.
///
/// Amplitudes `e^{-|α|²/2} α^k / √k!` come from the running product
/// `c_k = c_{k-1} α/√k`; beyond `k = 140` they are evaluated in the log domain.
pub fn coherent_state(alpha: C64, trunc_dim: usize) -> Result<FockVector> {
    if trunc_dim == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite amplitude {alpha}")));
    }
    let mean = alpha.norm_sqr();
    let mut amps = Vec::with_capacity(trunc_dim);
    let mut c = C64::new((-0.5 * mean).exp(), 0.0);
    let log_abs = alpha.norm().ln();
    let phase = alpha.arg();
    let mut ln_fact = 0.0;
    for k in 0..trunc_dim {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        if k <= LOG_DOMAIN_FROM {
            if k > 0 {
                c = c * alpha / (k as f64).sqrt();
            }
            amps.push(c);
        } else if mean == 0.0 {
            amps.push(C64::default());
        } else {
            let ln_mod = -0.5 * mean + k as f64 * log_abs - 0.5 * ln_fact;
            amps.push(C64::from_polar(ln_mod.exp(), phase * k as f64));
        }
    }
    let tail = amps[trunc_dim - 1].norm_sqr();
    if (trunc_dim > 1 || mean > 0.0) && tail >= TAIL_THRESHOLD {
        return Err(Error::TailMassExceeded {
            index: trunc_dim - 1,
            mass: tail,
            threshold: TAIL_THRESHOLD,
        });
    }
    normalize(&mut amps)?;
    Ok(FockVector { amps })
}

/// `|a⟩ ⊗ |b⟩` in the product basis.
pub fn product_state(a: &FockVector, b: &FockVector) -> Result<TwoModeState> {
    let dims = (a.trunc_dim(), b.trunc_dim());
    let mut amps = Vec::with_capacity(dims.0 * dims.1);
    for ca in &a.amps {
        amps.extend(b.amps.iter().map(|cb| ca * cb));
    }
    normalize(&mut amps)?;
    Ok(TwoModeState { amps, dims })
}

/// `|⟨target|state⟩|²`.
pub fn fidelity<S: PureState>(state: &S, target: &S) -> Result<f64> {
    let overlap = target.inner(state)?;
    Ok(overlap.norm_sqr().min(1.0))
}

/// Density matrix of a pure state split into populations and coherences.
///
/// Coherences are produced on demand from the stored amplitudes, so the view
/// costs `O(d)` memory even for two-mode states.
#[derive(Debug, Clone)]
pub struct DensityMatrixView {
    amps: Vec<C64>,
    populations: Vec<f64>,
}

impl DensityMatrixView {
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn population(&self, k: usize) -> f64 {
        self.populations[k]
    }

    /// `C_{kk'} = ⟨k|ρ|k'⟩` for `k ≠ k'`; zero on the diagonal.
    pub fn coherence(&self, k: usize, kp: usize) -> C64 {
        if k == kp {
            C64::default()
        } else {
            self.amps[k] * self.amps[kp].conj()
        }
    }

    /// Full matrix element `⟨k|ρ|k'⟩`.
    pub fn element(&self, k: usize, kp: usize) -> C64 {
        self.amps[k] * self.amps[kp].conj()
    }

    /// `Tr ρ² = Σ p_k² + Σ_{k≠k'} |C_{kk'}|²`.
    pub fn purity(&self) -> f64 {
        let diag: f64 = self.populations.iter().map(|p| p * p).sum();
        let mut off = 0.0;
        for k in 0..self.dim() {
            for kp in 0..self.dim() {
                if k != kp {
                    off += self.coherence(k, kp).norm_sqr();
                }
            }
        }
        diag + off
    }
}

pub fn density_view<S: PureState>(state: &S) -> DensityMatrixView {
    let amps = state.amplitudes().to_vec();
    let populations = amps.iter().map(|c| c.norm_sqr()).collect();
    DensityMatrixView { amps, populations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson(mean: f64, k: u32) -> f64 {
        let mut p = (-mean).exp();
        for j in 1..=k {
            p *= mean / j as f64;
        }
        p
    }

    #[test]
    fn vacuum() {
        let v = coherent_state(C64::new(0.0, 0.0), 8).unwrap();
        assert_eq!(v.amp(0), C64::new(1.0, 0.0));
        assert!(v.amplitudes()[1..].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn poisson_weights() {
        let v = coherent_state(C64::new(5f64.sqrt(), 0.0), 64).unwrap();
        assert!((v.population(5) - 0.175_467).abs() < 1e-6);
        assert!((v.population(5) - poisson(5.0, 5)).abs() < 1e-14);
        let v = coherent_state(C64::new(8f64.sqrt(), 0.0), 64).unwrap();
        assert!((v.population(8) - 0.1396).abs() < 1e-4);
    }

    #[test]
    fn tail_is_an_error() {
        let err = coherent_state(C64::new(3.0, 0.0), 10).unwrap_err();
        assert!(matches!(err, Error::TailMassExceeded { index: 9, .. }));
    }

    #[test]
    fn auto_truncation_passes_tail_check() {
        for i in 0..60 {
            let a = 0.1 * i as f64;
            let k = auto_truncation(a);
            coherent_state(C64::new(a, 0.0), k).unwrap();
        }
    }

    #[test]
    fn log_domain_branch_continuous() {
        let alpha = C64::new(12.0, 0.0);
        let v = coherent_state(alpha, 260).unwrap();
        let r = v.population(141) / v.population(140);
        assert!((r - 144.0 / 141.0).abs() < 1e-10);
    }

    #[test]
    fn product_of_vacua() {
        let vac = FockVector::basis(0, 4).unwrap();
        let s = product_state(&vac, &vac).unwrap();
        assert_eq!(s.amp(0, 0), C64::new(1.0, 0.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_factorizes() {
        let a = coherent_state(C64::new(2f64.sqrt(), 0.0), 20).unwrap();
        let vac = FockVector::basis(0, 5).unwrap();
        let s = product_state(&a, &vac).unwrap();
        for k in 0..20 {
            assert!((s.amp(k, 0) - a.amp(k)).norm() < 1e-15);
            for kp in 1..5 {
                assert_eq!(s.amp(k, kp), C64::default());
            }
        }
    }

    #[test]
    fn fidelity_basics() {
        let two = FockVector::basis(2, 6).unwrap();
        let three = FockVector::basis(3, 6).unwrap();
        assert_eq!(fidelity(&two, &two).unwrap(), 1.0);
        assert_eq!(fidelity(&two, &three).unwrap(), 0.0);
        let coh = coherent_state(C64::new(5f64.sqrt(), 0.0), 40).unwrap();
        let five = FockVector::basis(5, 40).unwrap();
        assert!((fidelity(&coh, &five).unwrap() - poisson(5.0, 5)).abs() < 1e-14);
        let other = FockVector::basis(5, 41).unwrap();
        assert!(matches!(
            fidelity(&coh, &other),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn superposed_view() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = FockVector::superposition(C64::new(h, 0.0), C64::new(h, 0.0), 5, 8).unwrap();
        let view = density_view(&s);
        assert!((view.population(0) - 0.5).abs() < 1e-15);
        assert!((view.population(5) - 0.5).abs() < 1e-15);
        assert!((view.coherence(5, 0) - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(view.coherence(3, 3), C64::default());
        let vac = density_view(&FockVector::basis(0, 3).unwrap());
        assert_eq!(vac.population(0), 1.0);
        assert_eq!(vac.coherence(0, 1), C64::default());
    }
}
