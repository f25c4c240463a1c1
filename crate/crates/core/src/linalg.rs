//! Dense linear algebra kernels, backed by `faer`.
//!
//! The rest of the crate works with `ndarray`; this module owns all the
//! conversions and the contracts the callers rely on: eigenvalue residuals
//! below `1e-8·‖A‖` and biorthonormal left/right pairs.

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::{c64, Mat};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operators::one_norm;

pub fn to_faer(a: &Array2<C64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_faer(a: &Mat<c64>) -> Array2<C64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Complete eigensystem of a general complex matrix.
///
/// Columns of `right` are the right eigenvectors. Columns of `left` are the
/// matching left eigenvectors, normalized so `left[j]† · right[k] = δ_jk`;
/// they come from the inverse of the right-eigenvector matrix, which is exact
/// biorthonormalization whenever the matrix is diagonalizable.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<C64>,
    pub right: Array2<C64>,
    pub left: Array2<C64>,
    /// `‖A r_k - λ_k r_k‖₂` per pair.
    pub residuals: Vec<f64>,
    /// Largest entry of `residuals`.
    pub max_residual: f64,
    /// Largest deviation of `left† · right` from the identity.
    pub biorthogonality_defect: f64,
    /// Set when the eigenvector basis is numerically singular.
    pub defective: bool,
}

pub fn eig(a: &Array2<C64>) -> Result<EigenPairs> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch("eig needs a square matrix".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParams("non-finite matrix entry".into()));
    }
    let m = to_faer(a);
    let decomp = m.eigen().map_err(|_| Error::EigConvergence(0))?;
    let values: Vec<C64> = decomp.S().column_vector().iter().copied().collect();
    let mut right = decomp.U().to_owned();

    // unit-norm columns: keeps residuals meaningful and the inversion below
    // as well-conditioned as the spectrum allows
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += right[(i, k)].norm_sqr();
        }
        let scale = acc.sqrt();
        if scale > 0.0 {
            let inv_scale = c64::new(1.0 / scale, 0.0);
            for i in 0..n {
                right[(i, k)] *= inv_scale;
            }
        }
    }

    // rows of U⁻¹ are the (conjugated) left eigenvectors
    let lu = right.partial_piv_lu();
    let inv = lu.inverse();
    let mut defective = inv
        .col_iter()
        .any(|col| col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()));

    let mut biorth: f64 = 0.0;
    if !defective {
        let prod = &inv * &right;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                biorth = biorth.max((prod[(i, j)] - expect).norm());
            }
        }
        if biorth > 1e-8 {
            defective = true;
        }
    } else {
        biorth = f64::INFINITY;
    }

    // residual ‖A r_k - λ_k r_k‖₂ per column
    let ar = &m * &right;
    let mut residuals = Vec::with_capacity(n);
    let mut max_residual: f64 = 0.0;
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += (ar[(i, k)] - right[(i, k)] * values[k]).norm_sqr();
        }
        let r = acc.sqrt();
        residuals.push(r);
        max_residual = max_residual.max(r);
    }

    let left = Array2::from_shape_fn((n, n), |(i, j)| inv[(j, i)].conj());
    Ok(EigenPairs {
        values,
        right: from_faer(&right),
        left,
        residuals,
        max_residual,
        biorthogonality_defect: biorth,
        defective,
    })
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eig_hermitian(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let m = to_faer(a);
    let decomp = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::EigConvergence(0))?;
    let values: Vec<f64> = decomp.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, from_faer(&decomp.U().to_owned())))
}

pub fn min_eigenvalue_hermitian(a: &Array2<C64>) -> Result<f64> {
    let (values, _) = eig_hermitian(a)?;
    values
        .into_iter()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        .ok_or_else(|| Error::DimensionMismatch("empty matrix".into()))
}

/// `exp(factor · H)` for Hermitian `H`, via the spectral decomposition.
pub fn hermitian_exponential(h: &Array2<C64>, factor: C64) -> Result<Array2<C64>> {
    let (values, vectors) = eig_hermitian(h)?;
    let n = values.len();
    let mut scaled = vectors.clone();
    for (k, lambda) in values.iter().enumerate() {
        let phase = (factor * C64::new(*lambda, 0.0)).exp();
        for i in 0..n {
            scaled[[i, k]] *= phase;
        }
    }
    Ok(scaled.dot(&crate::operators::dagger(&vectors)))
}

/// Solve `A X = B` by LU with partial pivoting.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let lu = to_faer(a).partial_piv_lu();
    let x = lu.solve(to_faer(b));
    if x.col_iter().any(|col| col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::RankDeficient { expected: 0, found: 1 });
    }
    Ok(from_faer(&x))
}

/// Orthonormal basis of the range of `a`: left singular vectors whose
/// singular value exceeds `rel_tol · σ_max`.
pub fn orthonormal_range(a: &Array2<C64>, rel_tol: f64) -> Result<Array2<C64>> {
    let m = to_faer(a);
    let svd = m.svd().map_err(|_| Error::EigConvergence(0))?;
    let sigma: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().take_while(|s| **s > rel_tol * smax).count();
    let u = svd.U();
    Ok(Array2::from_shape_fn((a.nrows(), rank), |(i, j)| u[(i, j)]))
}

/// Matrix-vector product `A·x` without leaving ndarray.
pub fn matvec(a: &Array2<C64>, x: &Array1<C64>) -> Array1<C64> {
    a.dot(x)
}

/// Relative scale used for zero tests on spectra: `1e-8 · ‖A‖₁`, floored at
/// machine level for the zero matrix.
pub fn zero_threshold(a: &Array2<C64>) -> f64 {
    1e-8 * one_norm(a).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{identity, max_abs_diff};

    fn test_matrix(n: usize) -> Array2<C64> {
        Array2::from_shape_fn((n, n), |(i, j)| {
            C64::new(
                ((i * 3 + j * 7) as f64 * 0.37).sin(),
                ((i as f64) - 1.4 * (j as f64)).cos() * 0.5,
            )
        })
    }

    #[test]
    fn eig_diagonal_matrix() {
        let mut a = Array2::<C64>::zeros((3, 3));
        a[[0, 0]] = C64::new(2.0, 0.0);
        a[[1, 1]] = C64::new(-1.0, 0.5);
        a[[2, 2]] = C64::new(0.0, -3.0);
        let pairs = eig(&a).unwrap();
        let mut got: Vec<_> = pairs.values.clone();
        got.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
        assert!((got[0] - C64::new(-1.0, 0.5)).norm() < 1e-12);
        assert!((got[1] - C64::new(0.0, -3.0)).norm() < 1e-12);
        assert!((got[2] - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(!pairs.defective);
    }

    #[test]
    fn eig_residual_and_trace_identity() {
        let a = test_matrix(16);
        let pairs = eig(&a).unwrap();
        assert!(pairs.max_residual < 1e-8 * one_norm(&a));
        assert!(pairs.biorthogonality_defect < 1e-8);
        let tr: C64 = a.diag().sum();
        let sum: C64 = pairs.values.iter().sum();
        assert!((tr - sum).norm() < 1e-8);
    }

    #[test]
    fn left_pairs_are_adjoint_eigenvectors() {
        let a = test_matrix(8);
        let pairs = eig(&a).unwrap();
        let adj = crate::operators::dagger(&a);
        for k in 0..8 {
            let l = pairs.left.column(k).to_owned();
            let got = adj.dot(&l);
            let expect = l.mapv(|z| z * pairs.values[k].conj());
            let dev: f64 = got
                .iter()
                .zip(expect.iter())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-8, "left eigenvector {k} deviates by {dev:e}");
        }
    }

    #[test]
    fn hermitian_exponential_unitarity() {
        let raw = test_matrix(5);
        let h = (&raw + &crate::operators::dagger(&raw)) * C64::new(0.5, 0.0);
        let u = hermitian_exponential(&h, C64::new(0.0, -0.7)).unwrap();
        let prod = u.dot(&crate::operators::dagger(&u));
        assert!(max_abs_diff(&prod, &identity(5)) < 1e-12);
    }

    #[test]
    fn orthonormal_range_of_projector() {
        // rank-2 projector embedded in 4 dimensions
        let mut p = Array2::<C64>::zeros((4, 4));
        p[[0, 0]] = C64::new(1.0, 0.0);
        p[[2, 2]] = C64::new(1.0, 0.0);
        let v = orthonormal_range(&p, 1e-10).unwrap();
        assert_eq!(v.dim(), (4, 2));
        let gram = crate::operators::dagger(&v).dot(&v);
        assert!(max_abs_diff(&gram, &identity(2)) < 1e-12);
    }
}
