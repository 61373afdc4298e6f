//! Dense propagators `exp(-iH'τ)` for validating the closed-form kernels.
//!
//! The rotating-frame Hamiltonian is assembled as a dense matrix on the full
//! truncated product space and diagonalized numerically. Nothing here uses
//! the block structure that the closed forms rely on.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::kernel::{Label, SystemParams, TwoModeParams};

pub const MAX_QUBIT_TRUNCATION: usize = 200;
pub const MAX_QUTRIT_DIM: usize = 4000;

/// Dense unitary with a basis layout `level * levels_stride + fock_index`.
#[derive(Debug, Clone)]
pub struct DenseUnitary {
    pub matrix: DMatrix<C64>,
    fock_dim: usize,
}

impl DenseUnitary {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Max deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        let n = prod.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).norm());
            }
        }
        worst
    }
}

/// Qubit-resonator propagator on `{g, e} ⊗ {|0⟩..|K-1⟩}`.
#[derive(Debug, Clone)]
pub struct QubitPropagator(pub DenseUnitary);

impl QubitPropagator {
    fn index(&self, level: Label, k: usize) -> usize {
        let q = match level {
            Label::Ground => 0,
            Label::Excited => 1,
        };
        q * self.0.fock_dim + k
    }

    /// `⟨j, k'|U|i, k⟩`.
    pub fn element(&self, out: (Label, usize), inp: (Label, usize)) -> C64 {
        self.0.matrix[(self.index(out.0, out.1), self.index(inp.0, inp.1))]
    }
}

/// Ancilla levels of the V-type qutrit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QutritLevel {
    G,
    E,
    H,
}

/// Qutrit-two-mode propagator on `{g, e, h} ⊗ {|k⟩_a} ⊗ {|k'⟩_b}`.
#[derive(Debug, Clone)]
pub struct QutritPropagator {
    pub unitary: DenseUnitary,
    dims: (usize, usize),
}

impl QutritPropagator {
    fn index(&self, level: QutritLevel, k: usize, kp: usize) -> usize {
        let s = match level {
            QutritLevel::G => 0,
            QutritLevel::E => 1,
            QutritLevel::H => 2,
        };
        s * self.dims.0 * self.dims.1 + k * self.dims.1 + kp
    }

    pub fn element(
        &self,
        out: (QutritLevel, usize, usize),
        inp: (QutritLevel, usize, usize),
    ) -> C64 {
        self.unitary.matrix[(
            self.index(out.0, out.1, out.2),
            self.index(inp.0, inp.1, inp.2),
        )]
    }
}

fn exp_i_hermitian(h: DMatrix<f64>, tau: f64, fock_dim: usize) -> DenseUnitary {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let vecs = eig.eigenvectors;
    // U = V cos(Eτ) Vᵀ − i V sin(Eτ) Vᵀ, as two real products
    let mut vc = vecs.clone();
    let mut vs = vecs.clone();
    for (j, &e) in eig.eigenvalues.iter().enumerate() {
        let (s, c) = (e * tau).sin_cos();
        vc.column_mut(j).scale_mut(c);
        vs.column_mut(j).scale_mut(s);
    }
    let re = &vc * vecs.transpose();
    let im = -(&vs * vecs.transpose());
    let matrix = DMatrix::from_fn(n, n, |i, j| C64::new(re[(i, j)], im[(i, j)]));
    DenseUnitary { matrix, fock_dim }
}

/// `H' = δ|e⟩⟨e| + g(a†|g⟩⟨e| + a|e⟩⟨g|)` on the truncated space.
pub fn jc_hamiltonian(params: &SystemParams, trunc_dim: usize) -> DMatrix<f64> {
    let k_dim = trunc_dim;
    let mut h = DMatrix::<f64>::zeros(2 * k_dim, 2 * k_dim);
    let g_idx = |k: usize| k;
    let e_idx = |k: usize| k_dim + k;
    for k in 0..k_dim {
        h[(e_idx(k), e_idx(k))] = params.delta;
        // a†|g⟩⟨e| maps |e,k⟩ to √(k+1)|g,k+1⟩
        if k + 1 < k_dim {
            let amp = params.g * ((k + 1) as f64).sqrt();
            h[(g_idx(k + 1), e_idx(k))] = amp;
            h[(e_idx(k), g_idx(k + 1))] = amp;
        }
    }
    h
}

pub fn jc_propagator_oracle(
    tau: f64,
    params: &SystemParams,
    trunc_dim: usize,
) -> Result<QubitPropagator> {
    if trunc_dim > MAX_QUBIT_TRUNCATION {
        return Err(Error::TruncationTooLarge {
            dim: trunc_dim,
            limit: MAX_QUBIT_TRUNCATION,
        });
    }
    if trunc_dim == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    let h = jc_hamiltonian(params, trunc_dim);
    Ok(QubitPropagator(exp_i_hermitian(h, tau, trunc_dim)))
}

/// V-type qutrit Hamiltonian:
/// `δ(|h⟩⟨h| + |e⟩⟨e|) + g_a(a†|g⟩⟨h| + h.c.) + g_b(b†|g⟩⟨e| + h.c.)`.
pub fn qutrit_hamiltonian(params: &TwoModeParams, dims: (usize, usize)) -> DMatrix<f64> {
    let (ka, kb) = dims;
    let block = ka * kb;
    let idx = |s: usize, k: usize, kp: usize| s * block + k * kb + kp;
    let mut h = DMatrix::<f64>::zeros(3 * block, 3 * block);
    for k in 0..ka {
        for kp in 0..kb {
            h[(idx(1, k, kp), idx(1, k, kp))] = params.delta;
            h[(idx(2, k, kp), idx(2, k, kp))] = params.delta;
            if k + 1 < ka {
                let amp = params.g_a * ((k + 1) as f64).sqrt();
                h[(idx(0, k + 1, kp), idx(2, k, kp))] = amp;
                h[(idx(2, k, kp), idx(0, k + 1, kp))] = amp;
            }
            if kp + 1 < kb {
                let amp = params.g_b * ((kp + 1) as f64).sqrt();
                h[(idx(0, k, kp + 1), idx(1, k, kp))] = amp;
                h[(idx(1, k, kp), idx(0, k, kp + 1))] = amp;
            }
        }
    }
    h
}

pub fn qutrit_propagator_oracle(
    tau: f64,
    params: &TwoModeParams,
    dims: (usize, usize),
) -> Result<QutritPropagator> {
    let dim = 3 * dims.0 * dims.1;
    if dim > MAX_QUTRIT_DIM {
        return Err(Error::TruncationTooLarge {
            dim,
            limit: MAX_QUTRIT_DIM,
        });
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("truncation must be at least 1".into()));
    }
    let h = qutrit_hamiltonian(params, dims);
    Ok(QutritPropagator {
        unitary: exp_i_hermitian(h, tau, dims.0 * dims.1),
        dims,
    })
}
