//! Dense complex linear algebra on top of nalgebra.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Thin SVD `a = U diag(s) Vᴴ` with singular values in descending order.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    if a.is_empty() {
        return Err(Error::InvalidShape(format!("empty {}x{} matrix", a.nrows(), a.ncols())));
    }
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical(format!("SVD of {}x{} did not converge", a.nrows(), a.ncols())))?;
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD returned no U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD returned no V".into()))?;
    Ok((u, svd.singular_values.iter().copied().collect(), v_t.adjoint()))
}

/// Full square unitary `U` of left singular vectors and the singular values,
/// padded with zeros up to the row count.
///
/// Wide inputs are reduced with a QR of the adjoint first, so only a square
/// SVD is ever computed on the row dimension.
pub fn left_singular_full(a: &CMat) -> Result<(CMat, Vec<f64>)> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidShape(format!("empty {m}x{n} matrix")));
    }
    let (u, mut s) = if n > m {
        let r = a.adjoint().qr().r();
        let (u, s, _) = svd(&r.adjoint())?;
        (u, s)
    } else {
        let (u, s, _) = svd(a)?;
        (u, s)
    };
    s.resize(m, 0.0);
    Ok((complete_basis(&u), s))
}

/// Extends orthonormal columns to a square unitary matrix.
///
/// Candidates are the standard basis vectors in index order, each
/// orthogonalized twice against the columns accepted so far.
pub fn complete_basis(q: &CMat) -> CMat {
    let n = q.nrows();
    let mut cols: Vec<CVec> = q.column_iter().map(|c| c.into_owned()).collect();
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut v = CVec::zeros(n);
        v[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v.axpy(-proj, c, C64::new(1.0, 0.0));
            }
        }
        let norm = v.norm();
        if norm > 1e-3 {
            cols.push(v / C64::new(norm, 0.0));
        }
        e += 1;
    }
    CMat::from_columns(&cols)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eig_desc(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical(format!("Hermitian eigensolver failed on {n}x{n}")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Eigenvalues and unit-norm eigenvectors of a general complex square matrix.
///
/// Uses the complex Schur form `A = Q T Qᴴ` and back substitution on the
/// triangular factor.
pub fn eig(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidShape(format!("eig needs a square matrix, got {}x{}", n, a.ncols())));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical(format!("Schur decomposition failed on {n}x{n}")))?;
    let (q, t) = schur.unpack();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = scale * f64::EPSILON;
    let mut vecs = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut v = CVec::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * v[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < tiny {
                d = C64::new(tiny, 0.0);
            }
            v[i] = -acc / d;
        }
        let x = &q * v;
        let norm = x.norm();
        vecs.set_column(k, &(x / C64::new(norm, 0.0)));
    }
    let vals = (0..n).map(|i| t[(i, i)]).collect();
    Ok((vals, vecs))
}

/// Inverse of a square matrix, or a degenerate-geometry error when singular.
pub fn inverse(a: &CMat) -> Result<CMat> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate(format!("singular {}x{} matrix", a.nrows(), a.ncols())))
}

/// 2-norm condition number.
pub fn condition_number(a: &CMat) -> Result<f64> {
    let (_, s, _) = svd(a)?;
    let smin = s.last().copied().unwrap_or(0.0);
    Ok(if smin > 0.0 { s[0] / smin } else { f64::INFINITY })
}

/// Number of singular values above `RANK_TOLERANCE` times the largest.
pub fn numerical_rank(a: &CMat) -> Result<usize> {
    let (_, s) = left_singular_full(a)?;
    Ok(rank_of(&s))
}

/// Rank implied by a descending singular value list.
pub fn rank_of(s: &[f64]) -> usize {
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > RANK_TOLERANCE * smax).count(),
        _ => 0,
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    CVec::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()])
}

/// Frobenius distance between `tᴴt` and the identity.
pub fn unitarity_defect(t: &CMat) -> f64 {
    let g = t.adjoint() * t;
    (g - CMat::identity(t.ncols(), t.ncols())).norm()
}

/// Unit complex exponential `e^{jθ}`.
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat {
        CMat::from_fn(m, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    }

    #[test]
    fn left_singular_full_is_unitary_for_wide_and_tall() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(m, n) in &[(4, 30), (6, 6), (9, 3)] {
            let a = random(&mut rng, m, n);
            let (u, s) = left_singular_full(&a).unwrap();
            assert_eq!(u.shape(), (m, m));
            assert!(unitarity_defect(&u) < 1e-12);
            assert_eq!(s.len(), m);
            assert!(s.windows(2).all(|w| w[0] >= w[1]));
            let (_, s_ref, _) = svd(&a).unwrap();
            for (x, y) in s.iter().zip(&s_ref) {
                assert!((x - y).abs() < 1e-10 * s_ref[0]);
            }
            // Uᴴ A has row norms equal to the singular values.
            let b = u.adjoint() * &a;
            for i in 0..m {
                assert!((b.row(i).norm() - s[i]).abs() < 1e-10 * s[0]);
            }
        }
    }

    #[test]
    fn eig_reconstructs_general_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(&mut rng, 5, 5);
        let (vals, vecs) = eig(&a).unwrap();
        for k in 0..5 {
            let r = &a * vecs.column(k) - vecs.column(k) * vals[k];
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
    }

    #[test]
    fn hermitian_eig_sorted_descending() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(&mut rng, 6, 4);
        let h = &a * a.adjoint();
        let (vals, vecs) = hermitian_eig_desc(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        assert!(unitarity_defect(&vecs) < 1e-12);
        assert!(vals[5].abs() < 1e-10 * vals[0]);
    }

    #[test]
    fn complete_basis_spans_orthogonal_complement() {
        let q = CMat::from_column_slice(3, 1, &[C64::new(1.0, 0.0); 3]) / C64::new(3f64.sqrt(), 0.0);
        let u = complete_basis(&q);
        assert!(unitarity_defect(&u) < 1e-14);
        assert_eq!(u.column(0), q.column(0));
    }

    #[test]
    fn kron_vec_matches_matrix_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random(&mut rng, 3, 1);
        let b = random(&mut rng, 4, 1);
        let k = kron(&a, &b);
        let kv = kron_vec(&a.column(0).into_owned(), &b.column(0).into_owned());
        assert!((k.column(0) - kv).norm() < 1e-15);
    }

    #[test]
    fn rank_of_uses_relative_threshold() {
        assert_eq!(rank_of(&[1.0, 1e-3, 1e-9]), 2);
        assert_eq!(rank_of(&[0.0, 0.0]), 0);
    }
}
