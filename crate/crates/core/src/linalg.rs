//! Small dense complex linear-algebra helpers shared by every module.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

use crate::error::{Error, Result};

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(M + Mᴴ) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Cholesky factor of a Hermitian positive-definite matrix.
pub fn cholesky(m: &CMatrix) -> Result<Cholesky<C64, Dyn>> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    // the complex factorization takes complex square roots instead of failing
    let l = chol.l_dirty();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re
    });
    if ok {
        Ok(chol)
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

pub fn hermitian_solve(m: &CMatrix, rhs: &CVector) -> Result<CVector> {
    Ok(cholesky(m)?.solve(rhs))
}

pub fn hermitian_solve_matrix(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    Ok(cholesky(m)?.solve(rhs))
}

/// `xᴴ y`.
#[inline]
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    x.dotc(y)
}

pub fn norm_sq(x: &CVector) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Residual of `x` after orthogonal projection onto the column space of `basis`.
pub fn out_of_span_residual(basis: &CMatrix, x: &CVector) -> f64 {
    let svd = basis.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = smax * 1e-12 * basis.nrows().max(basis.ncols()) as f64;
    let mut proj = CVector::zeros(x.len());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let col = u.column(k).into_owned();
            proj += &col * inner(&col, x);
        }
    }
    (x - proj).norm()
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest absolute entry of `a - b`, for assertions.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_residual_zero_for_member() {
        let b = CMatrix::from_column_slice(3, 2, &[
            c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0),
            c64(0.0, 0.0), c64(0.0, 1.0), c64(0.0, 0.0),
        ]);
        let x = CVector::from_vec(vec![c64(2.0, 1.0), c64(-3.0, 0.5), c64(0.0, 0.0)]);
        assert!(out_of_span_residual(&b, &x) < 1e-14);
        let y = CVector::from_vec(vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        assert!((out_of_span_residual(&b, &y) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0, 0.0), c64(-1.0, 0.0)]));
        assert!(matches!(cholesky(&m), Err(Error::NotPositiveDefinite)));
    }
}
