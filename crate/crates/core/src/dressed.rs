//! Dressed states of the lossless two-emitter cavity.
//!
//! Rotating the emitter pair into symmetric (bright) and antisymmetric (dark)
//! combinations leaves one effective emitter at Δ_eg + J coupled with √2·g,
//! and a dark emitter at Δ_eg − J that decouples from the field. The bright
//! emitter and the cavity form a Jaynes-Cummings ladder whose manifold `n`
//! splits by Ω̃_n = √(Δ̃_ac² + 8g²n), with Δ̃_ac = Δ_eg − Δ_c + J.
//!
//! [`numeric_ladder`] diagonalizes the untransformed Hamiltonian block by block
//! and serves as the independent check of the closed forms.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Largest manifold index accepted by [`numeric_ladder`].
pub const MAX_MANIFOLD: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransformedModel {
    pub bright_detuning: f64,
    pub dark_detuning: f64,
    pub bright_coupling: f64,
    /// The dark emitter has no cavity coupling; always true for identical emitters.
    pub dark_decoupled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolaritonLevel {
    pub n: usize,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Mixing angle in (0, π); π/2 at Δ̃_ac = 0.
    pub phi_n: f64,
    pub omega_n: f64,
    /// (cos Φ_n/2, sin Φ_n/2): components of |λ+⟩ on |e,n−1⟩ and |g,n⟩.
    pub weights: (f64, f64),
}

/// Identical emitters with a real coupling; returns g.
fn require_degenerate(params: &SystemParams, what: &str) -> Result<f64> {
    if params.delta_eg1 != params.delta_eg2 {
        return Err(Error::Precondition(format!("{what}: delta_eg1 != delta_eg2")));
    }
    if params.g1 != params.g2 {
        return Err(Error::Precondition(format!("{what}: g1 != g2")));
    }
    if params.g1.im != 0.0 {
        return Err(Error::Precondition(format!("{what}: g1 is not real")));
    }
    Ok(params.g1.re)
}

pub fn transform_model(params: &SystemParams) -> Result<TransformedModel> {
    let g = require_degenerate(params, "transform_model")?;
    Ok(TransformedModel {
        bright_detuning: params.delta_eg1 + params.j,
        dark_detuning: params.delta_eg1 - params.j,
        bright_coupling: std::f64::consts::SQRT_2 * g,
        dark_decoupled: true,
    })
}

/// Δ̃_ac = Δ_eg − Δ_c + J.
fn shifted_detuning(params: &SystemParams) -> f64 {
    params.delta_eg1 - params.delta_c + params.j
}

/// Closed-form polariton pair of manifold `n` ≥ 1.
///
/// The mixing angle is `atan2(2g√(2n), Δ̃_ac)`, which keeps |λ+⟩ the upper
/// polariton on both sides of resonance.
pub fn polariton_eigensystem(n: usize, params: &SystemParams) -> Result<PolaritonLevel> {
    if n == 0 {
        return Err(Error::Argument("manifold index must be >= 1".into()));
    }
    let g = require_degenerate(params, "polariton_eigensystem")?;
    let dt = shifted_detuning(params);
    // the sign of g only flips the phase of |g,n⟩
    let coupling = 2.0 * g.abs() * (2.0 * n as f64).sqrt();
    if coupling == 0.0 && dt == 0.0 {
        return Err(Error::DegenerateAngle);
    }
    let omega_n = dt.hypot(coupling);
    let centre = n as f64 * params.delta_c + 0.5 * dt;
    let phi_n = coupling.atan2(dt);
    Ok(PolaritonLevel {
        n,
        lambda_plus: centre + 0.5 * omega_n,
        lambda_minus: centre - 0.5 * omega_n,
        phi_n,
        omega_n,
        weights: ((0.5 * phi_n).cos(), (0.5 * phi_n).sin()),
    })
}

/// Generalized Rabi frequency Ω̃_n.
pub fn rabi_splitting(n: usize, params: &SystemParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("manifold index must be >= 1".into()));
    }
    let g = require_degenerate(params, "rabi_splitting")?;
    let dt = shifted_detuning(params);
    Ok((dt * dt + 8.0 * g * g * n as f64).sqrt())
}

/// Lowest-manifold weights (cos Φ/2, sin Φ/2) that set the relative dip depths.
pub fn transition_weights(params: &SystemParams) -> Result<(f64, f64)> {
    Ok(polariton_eigensystem(1, params)?.weights)
}

/// Bare product state |emitter1 emitter2, photons⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BasisState {
    pub excited1: bool,
    pub excited2: bool,
    pub photons: usize,
}

/// Which emitter configurations enter each manifold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum EmitterSpace {
    /// At most one emitter excited: the weak-excitation subspace in which the
    /// bright/dark reduction is exact.
    #[default]
    SingleExcitation,
    /// Also |e e, n−2⟩ for n ≥ 2: the full two-emitter Hamiltonian.
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifold {
    pub n: usize,
    pub basis: Vec<BasisState>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`; first nonzero component real positive.
    #[serde(skip)]
    pub eigenvectors: DMatrix<Complex64>,
}

fn manifold_basis(n: usize, space: EmitterSpace) -> Vec<BasisState> {
    let s = |excited1, excited2, photons| BasisState {
        excited1,
        excited2,
        photons,
    };
    let mut basis = vec![s(false, false, n)];
    if n >= 1 {
        basis.push(s(true, false, n - 1));
        basis.push(s(false, true, n - 1));
    }
    if n >= 2 && space == EmitterSpace::Full {
        basis.push(s(true, true, n - 2));
    }
    basis
}

/// ⟨bra|H|ket⟩ for the lossless rotating-frame Hamiltonian.
fn hamiltonian_element(p: &SystemParams, bra: &BasisState, ket: &BasisState) -> Complex64 {
    let zero = Complex64::default();
    if bra == ket {
        let mut e = p.delta_c * ket.photons as f64;
        if ket.excited1 {
            e += p.delta_eg1;
        }
        if ket.excited2 {
            e += p.delta_eg2;
        }
        return Complex64::new(e, 0.0);
    }
    // g_j a σ_j†: raises emitter j, removes one photon
    let absorbs = |j: usize, from: &BasisState, to: &BasisState| -> bool {
        let (fj, tj, fo, to_other) = match j {
            1 => (from.excited1, to.excited1, from.excited2, to.excited2),
            _ => (from.excited2, to.excited2, from.excited1, to.excited1),
        };
        !fj && tj && fo == to_other && from.photons == to.photons + 1
    };
    for (j, gj) in [(1, p.g1), (2, p.g2)] {
        if absorbs(j, ket, bra) {
            return gj * (ket.photons as f64).sqrt();
        }
        if absorbs(j, bra, ket) {
            return gj.conj() * (bra.photons as f64).sqrt();
        }
    }
    // J (σ₁†σ₂ + σ₂†σ₁): swaps a single excitation at fixed photon number
    if bra.photons == ket.photons
        && bra.excited1 != bra.excited2
        && ket.excited1 == bra.excited2
        && ket.excited2 == bra.excited1
    {
        return Complex64::new(p.j, 0.0);
    }
    zero
}

/// Assembled Hamiltonian block for manifold `n`.
pub fn manifold_hamiltonian(params: &SystemParams, n: usize, space: EmitterSpace) -> (Vec<BasisState>, DMatrix<Complex64>) {
    let basis = manifold_basis(n, space);
    let dim = basis.len();
    let h = DMatrix::from_fn(dim, dim, |r, c| hamiltonian_element(params, &basis[r], &basis[c]));
    (basis, h)
}

/// Diagonalizes manifolds 1..=`n_max` of the lossless Hamiltonian.
pub fn numeric_ladder(params: &SystemParams, n_max: usize, space: EmitterSpace) -> Result<Vec<Manifold>> {
    if n_max == 0 || n_max > MAX_MANIFOLD {
        return Err(Error::Argument(format!(
            "n_max = {n_max} outside 1..={MAX_MANIFOLD}"
        )));
    }
    (1..=n_max)
        .map(|n| {
            let (basis, h) = manifold_hamiltonian(params, n, space);
            let dev = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if dev > 1e-15 * h.iter().map(|z| z.norm()).fold(1.0, f64::max) {
                return Err(Error::Internal(format!(
                    "manifold {n} Hamiltonian not Hermitian (deviation {dev:e})"
                )));
            }
            let (eigenvalues, eigenvectors) = hermitian_eigen(h);
            Ok(Manifold {
                n,
                basis,
                eigenvalues,
                eigenvectors,
            })
        })
        .collect()
}

/// Sorted eigenpairs with the phase convention of [`Manifold::eigenvectors`].
fn hermitian_eigen(h: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = v.iter().find(|z| z.norm() > 1e-12).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        for r in 0..dim {
            vectors[(r, col)] = v[r] * phase;
        }
    }
    (values, vectors)
}

/// Φ_n at exact resonance.
pub const RESONANT_ANGLE: f64 = FRAC_PI_2;
