//! Dense small-matrix helpers over `nalgebra` with `Complex64` scalars.
//!
//! Everything here operates on matrices of size at most a few dozen, so
//! plain SVD/LU factorizations are always the right tool.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// (√-1)^n for integer n.
pub fn i_pow(n: u32) -> Complex64 {
    match n % 4 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|x| x.conj())
}

pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|x| x.conj())
}

/// Frobenius norm.
pub fn fnorm(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vnorm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values, descending.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank with a relative cutoff.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None => 0,
        Some(&s0) if s0 == 0.0 => 0,
        Some(&s0) => sv.iter().filter(|&&s| s > rel_tol * s0).count(),
    }
}

/// 2-norm condition number (inf if numerically singular).
pub fn condition_number(m: &CMat) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Orthonormal basis of the (right) nullspace, using the relative cutoff.
///
/// The matrix is zero-padded to at least square shape first: nalgebra's SVD
/// is thin, so a wide matrix would otherwise lose kernel directions.
pub fn nullspace(m: &CMat, rel_tol: f64) -> Vec<CVec> {
    let ncols = m.ncols();
    let work = if m.nrows() < ncols {
        let mut padded = CMat::zeros(ncols, ncols);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let vt = svd.v_t.expect("svd with v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax == 0.0 || s <= rel_tol * smax {
            out.push(vt.row(k).transpose().map(|x| x.conj()));
        }
    }
    out
}

/// Solve `a x = b` by LU with a conditioning guard.
pub fn solve(a: &CMat, b: &CVec, max_cond: f64) -> Result<CVec> {
    let cond = condition_number(a);
    if !cond.is_finite() || cond > max_cond {
        return Err(Error::SingularGram {
            cond,
            max: max_cond,
        });
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Degeneracy("LU solve failed".into()))
}

pub fn inverse(a: &CMat, max_cond: f64) -> Result<CMat> {
    let cond = condition_number(a);
    if !cond.is_finite() || cond > max_cond {
        return Err(Error::SingularGram {
            cond,
            max: max_cond,
        });
    }
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degeneracy("matrix inversion failed".into()))
}

/// Enforce exact Hermitian symmetry, returning the symmetrization residual.
pub fn hermitize(m: &CMat) -> (CMat, f64) {
    let h = (m + m.adjoint()).scale(0.5);
    let resid = fnorm(&(m - &h));
    let scale = fnorm(&h).max(1e-300);
    (h, resid / scale)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let (h, _) = hermitize(m);
    let eig = h.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Generalized eigenvalues of the Hermitian pair (a, b) with b positive
/// definite: the spectrum of b^{-1}a, which is real.
pub fn generalized_hermitian_eigenvalues(a: &CMat, b: &CMat) -> Result<Vec<f64>> {
    let (bh, _) = hermitize(b);
    let chol = bh
        .cholesky()
        .ok_or_else(|| Error::Positivity("right-hand metric is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degeneracy("Cholesky factor not invertible".into()))?;
    let (ah, _) = hermitize(a);
    let mid = &linv * ah * linv.adjoint();
    Ok(hermitian_eigenvalues(&mid))
}

/// exp(M) for a nilpotent (or merely small) matrix by the finite/truncated sum.
/// `max_pow` bounds the number of powers; for nilpotent M of index k pass k.
pub fn exp_nilpotent(m: &CMat, max_pow: usize) -> CMat {
    let n = m.nrows();
    let mut acc = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for j in 1..=max_pow {
        term = (&term * m).scale(1.0 / j as f64);
        if fnorm(&term) == 0.0 {
            break;
        }
        acc += &term;
    }
    acc
}

/// Max |entry| of a matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn vec_from_slice(xs: &[Complex64]) -> CVec {
    CVec::from_column_slice(xs)
}

/// Stack column vectors into a matrix (zero columns allowed).
pub fn mat_from_columns(d: usize, cols: &[CVec]) -> CMat {
    let mut m = CMat::zeros(d, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace_of_projector() {
        let mut m = CMat::zeros(3, 3);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        assert_eq!(rank(&m, 1e-12), 2);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_of_shift_is_unipotent() {
        let mut n = CMat::zeros(3, 3);
        n[(1, 0)] = c(1.0, 0.0);
        n[(2, 1)] = c(1.0, 0.0);
        let e = exp_nilpotent(&n, 3);
        assert!((e[(2, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((e[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn generalized_eigenvalues_identity_pair() {
        let a = CMat::identity(2, 2).scale(3.0);
        let b = CMat::identity(2, 2);
        let ev = generalized_hermitian_eigenvalues(&a, &b).unwrap();
        assert!((ev[0] - 3.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
