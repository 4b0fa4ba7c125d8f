//! Shift-invariance solves, eigenvalue-to-parameter maps and pairing.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, eig, hermitian_eig_desc, inverse, svd, CMat, C64};
use crate::tensor::ComplexTensor;
use crate::SPEED_OF_LIGHT;
#[allow(unused_imports)]
use num_traits::Float;

/// Solver for the invariance equation `E₁ Ψ ≈ E₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InvarianceSolver {
    #[default]
    TotalLeastSquares,
    LeastSquares,
}

/// Pairing condition limit above which the eigenvector basis is not trusted.
pub const PAIRING_CONDITION_LIMIT: f64 = 1e8;

/// Selected subspaces `(E₁, E₂)` of `u_s` along `mode`, each
/// `(rows without the last / first index) × K`.
fn selections(u_s: &ComplexTensor, mode: usize) -> Result<(CMat, CMat)> {
    if u_s.order() != 4 || !(mode == 0 || mode == 2) {
        return Err(Error::InvalidParameter(format!(
            "shift invariance needs an order-4 subspace and mode 0 or 2, got order {} mode {mode}",
            u_s.order()
        )));
    }
    let n = u_s.shape()[mode];
    let k = u_s.shape()[3];
    if n < 2 || k < 1 {
        return Err(Error::InvalidParameter(format!("mode {mode} extent {n} with {k} paths")));
    }
    let e1 = u_s.select(mode, 0..n - 1)?.unfold(3)?.transpose();
    let e2 = u_s.select(mode, 1..n)?.unfold(3)?.transpose();
    Ok((e1, e2))
}

/// `K × K` matrix `Ψ` with `E₁ Ψ ≈ E₂`, whose eigenvalues are the per-path
/// phase steps along `mode` (0: layers, 2: subcarriers).
///
/// The TLS solution takes the eigenvectors `V` of `WᴴW`, `W = [E₁ E₂]`, in
/// descending order and returns `−V₁₂ V₂₂⁻¹`.
pub fn tls_shift_invariance(u_s: &ComplexTensor, mode: usize, solver: InvarianceSolver) -> Result<CMat> {
    let (e1, e2) = selections(u_s, mode)?;
    let k = e1.ncols();
    match solver {
        InvarianceSolver::TotalLeastSquares => {
            let mut w = CMat::zeros(e1.nrows(), 2 * k);
            w.columns_mut(0, k).copy_from(&e1);
            w.columns_mut(k, k).copy_from(&e2);
            let (_, v) = hermitian_eig_desc(&(w.adjoint() * &w))?;
            let v12 = v.view((0, k), (k, k)).into_owned();
            let v22 = v.view((k, k), (k, k)).into_owned();
            let v22_inv = inverse(&v22)
                .map_err(|_| Error::Degenerate("paths share a shift phase (singular TLS block)".into()))?;
            Ok(-(v12 * v22_inv))
        }
        InvarianceSolver::LeastSquares => {
            let (u, s, v) = svd(&e1)?;
            if s.last().is_none_or(|&x| x <= s[0] * 1e-12) {
                return Err(Error::Degenerate("rank-deficient selected subspace".into()));
            }
            let s_inv = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                s.len(),
                s.iter().map(|&x| C64::new(1.0 / x, 0.0)),
            ));
            Ok(v * s_inv * u.adjoint() * e2)
        }
    }
}

/// Elevation from a layer phase step `λ = e^{−j2π f₀ h cos θ / c}`.
///
/// Returns the angle and whether the cosine argument had to be clamped to
/// `[−1, 1]`.
pub fn elevation_from_eig(lambda: C64, f0_hz: f64, layer_spacing_m: f64) -> Result<(f64, bool)> {
    let x = -lambda.arg() * SPEED_OF_LIGHT / (2.0 * PI * f0_hz * layer_spacing_m);
    if !x.is_finite() || x.abs() > 1.0 + 1e-6 {
        return Err(Error::OutOfManifold(x));
    }
    let clamped = x.abs() > 1.0;
    Ok((x.clamp(-1.0, 1.0).acos(), clamped))
}

/// Delay from a subcarrier phase step `λ = e^{−j2π Δ_F τ}`, in `[0, 1/Δ_F)`.
pub fn delay_from_eig(lambda: C64, delta_f_hz: f64) -> f64 {
    let period = 1.0 / delta_f_hz;
    let tau = -lambda.arg() / (2.0 * PI * delta_f_hz);
    let tau = tau - period * (tau / period).floor();
    if tau >= period {
        0.0
    } else {
        tau
    }
}

/// Eigenvalue pairs `(λ_v, λ_f)` for each path.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub pairs: Vec<(C64, C64)>,
    /// Condition number of the shared eigenvector basis.
    pub condition: f64,
    /// The basis was ill-conditioned and greedy matching was used instead.
    pub fallback: bool,
}

/// Pairs the eigenvalues of `Ψ_v` and `Ψ_f` through the eigenvectors of `Ψ_v`:
/// `Ψ_v = E Λ_v E⁻¹`, `λ_f,k = (E⁻¹ Ψ_f E)_kk`.
///
/// When `E` is near-defective, both matrices are diagonalized separately and
/// matched greedily on eigenvector correlation.
pub fn pair_parameters(psi_v: &CMat, psi_f: &CMat) -> Result<Pairing> {
    if psi_v.shape() != psi_f.shape() || !psi_v.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "pairing {:?} with {:?}",
            psi_v.shape(),
            psi_f.shape()
        )));
    }
    let (lv, e) = eig(psi_v)?;
    let condition = condition_number(&e)?;
    if condition <= PAIRING_CONDITION_LIMIT {
        let lf = inverse(&e)? * psi_f * &e;
        let pairs = lv.iter().enumerate().map(|(k, &v)| (v, lf[(k, k)])).collect();
        return Ok(Pairing { pairs, condition, fallback: false });
    }
    let (lf, ef) = eig(psi_f)?;
    let k = lv.len();
    let mut used = alloc::vec![false; k];
    let mut pairs = Vec::with_capacity(k);
    for i in 0..k {
        let best = (0..k)
            .filter(|&j| !used[j])
            .max_by(|&a, &b| {
                let ca = e.column(i).dotc(&ef.column(a)).norm();
                let cb = e.column(i).dotc(&ef.column(b)).norm();
                ca.total_cmp(&cb)
            })
            .ok_or_else(|| Error::Numerical("greedy pairing ran out of candidates".into()))?;
        used[best] = true;
        pairs.push((lv[i], lf[best]));
    }
    Ok(Pairing { pairs, condition, fallback: true })
}
