//! Exact-decomposition oracles: cyclic Jacobi eigensolver, SVD built on it,
//! and the exact matrix sign `MatSgn(X) = UVᵀ`.
//!
//! These are the reference implementations the fast production kernels are
//! tested against (and what `probe-ns5` compares NS5 to). They are
//! deliberately simple: the SVD of an m x n matrix goes through a Jacobi
//! eigendecomposition of the small Gram matrix XᵀX, which is plenty at desk
//! scale and keeps the production path SVD-free.

use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// Relative cutoff under which a singular value is treated as zero.
const SV_RANK_CUTOFF: f64 = 1e-14;

fn check_symmetric<T: Scalar>(h: &DenseMatrix<T>) -> Result<()> {
    if h.rows() != h.cols() {
        return Err(CoreError::Precondition(format!(
            "symmetric eigensolver needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let scale = h.max_abs().max(T::one());
    let tol = T::from_f64_const(1e-10) * scale;
    for i in 0..h.rows() {
        for j in (i + 1)..h.cols() {
            if (h[(i, j)] - h[(j, i)]).abs() > tol {
                return Err(CoreError::Precondition(format!(
                    "matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

fn off_diagonal_norm<T: Scalar>(a: &DenseMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvector columns and eigenvalues sorted by descending
/// eigenvalue. Iterates until the off-diagonal Frobenius norm drops below
/// `1e-13 · max(1, ‖H‖_F)`.
pub fn jacobi_eig_sym<T: Scalar>(h: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, Vec<T>)> {
    check_symmetric(h)?;
    let n = h.rows();
    // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
    let half = T::from_f64_const(0.5);
    let mut a = DenseMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)]) * half);
    let mut v: DenseMatrix<T> = DenseMatrix::identity(n);

    let scale = crate::linalg::frobenius_norm(&a).max(T::one());
    let target = T::from_f64_const(1e-13) * scale;

    for _sweep in 0..100 {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= T::from_f64_const(1e-300) {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                let t = {
                    let root = (T::one() + tau * tau).sqrt();
                    if tau >= T::zero() {
                        T::one() / (tau + root)
                    } else {
                        T::one() / (tau - root)
                    }
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;

                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(p, k)] = a[(k, p)];
                        a[(k, q)] = s * akp + c * akq;
                        a[(q, k)] = a[(k, q)];
                    }
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .expect("eigenvalues must be comparable")
    });
    let eigvals: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let eigvecs = DenseMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((eigvecs, eigvals))
}

/// Top-`r` eigenpairs of a symmetric matrix, eigenvalues descending.
pub fn sym_eig_topr<T: Scalar>(
    h: &DenseMatrix<T>,
    r: usize,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    if r == 0 || r > h.rows() {
        return Err(CoreError::Config(format!(
            "sym_eig_topr rank {r} out of range 1..={}",
            h.rows()
        )));
    }
    let (vecs, vals) = jacobi_eig_sym(h)?;
    let top = DenseMatrix::from_fn(h.rows(), r, |i, j| vecs[(i, j)]);
    Ok((top, vals[..r].to_vec()))
}

/// Reduced SVD `X = U · diag(sigma) · Vᵀ` with singular values descending.
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub v: DenseMatrix<T>,
}

/// Reduced SVD via Jacobi eigendecomposition of the smaller Gram matrix.
///
/// Left singular vectors for singular values below `1e-14 · sigma_max` are
/// filled with zeros (those directions are rank-deficient and dropped by
/// [`mat_sgn_exact`]).
pub fn svd<T: Scalar>(x: &DenseMatrix<T>) -> Result<Svd<T>> {
    if x.rows() < x.cols() {
        let t = svd(&x.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let gram = x.tr_matmul(x); // n x n
    let (vecs, vals) = jacobi_eig_sym(&gram)?;
    let n = x.cols();
    let sigma: Vec<T> = vals.iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    let sigma_max = sigma.first().copied().unwrap_or_else(T::zero);
    let cutoff = sigma_max * T::from_f64_const(SV_RANK_CUTOFF);

    let mut u = DenseMatrix::zeros(x.rows(), n);
    let xv = x.matmul(&vecs);
    for j in 0..n {
        if sigma[j] > cutoff {
            let inv = T::one() / sigma[j];
            for i in 0..x.rows() {
                u[(i, j)] = xv[(i, j)] * inv;
            }
        }
    }
    Ok(Svd { u, sigma, v: vecs })
}

/// Singular values of `X`, descending.
pub fn singular_values<T: Scalar>(x: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(x)?.sigma)
}

/// Exact matrix sign `MatSgn(X) = UVᵀ` from the reduced SVD: the orthogonal
/// polar factor of `X`. Directions with `sigma ≤ 1e-14 · sigma_max`
/// contribute nothing, so the output is an exact partial isometry on the
/// numerical row space.
pub fn mat_sgn_exact<T: Scalar>(x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if x.max_abs() == T::zero() {
        return Err(CoreError::Domain(
            "mat_sgn_exact is undefined for the zero matrix".into(),
        ));
    }
    if x.rows() < x.cols() {
        return Ok(mat_sgn_exact(&x.transpose())?.transpose());
    }
    let dec = svd(x)?;
    Ok(dec.u.matmul_tr(&dec.v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, gram_schmidt_qr};
    use crate::rng::SplitMix64;
    use crate::Mat64;

    fn mat(rows: usize, cols: usize, vals: &[f64]) -> Mat64 {
        Mat64::from_vec(rows, cols, vals.to_vec()).unwrap()
    }

    #[test]
    fn jacobi_diagonal_input_sorted_descending() {
        let h = mat(3, 3, &[4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
        let (u, vals) = sym_eig_topr(&h, 1).unwrap();
        assert!((vals[0] - 4.0).abs() < 1e-14);
        assert!((u[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(u[(1, 0)].abs() < 1e-12 && u[(2, 0)].abs() < 1e-12);
    }

    #[test]
    fn jacobi_degenerate_spectrum_satisfies_eigen_equation() {
        let h = Mat64::identity(3);
        let (u, vals) = sym_eig_topr(&h, 2).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        // Only assert HU = U diag(vals): eigenvectors are not unique here.
        let hu = h.matmul(&u);
        let ud = Mat64::from_fn(3, 2, |i, j| u[(i, j)] * vals[j]);
        assert!(frobenius_norm(&hu.sub(&ud)) < 1e-12);
    }

    #[test]
    fn jacobi_random_psd_residual_is_tiny() {
        let g: Mat64 = SplitMix64::new(77).gaussian_matrix(10, 10);
        let h = g.tr_matmul(&g);
        let (u, vals) = sym_eig_topr(&h, 3).unwrap();
        let hu = h.matmul(&u);
        let ud = Mat64::from_fn(10, 3, |i, j| u[(i, j)] * vals[j]);
        assert!(frobenius_norm(&hu.sub(&ud)) < 1e-10);
    }

    #[test]
    fn jacobi_rejects_asymmetric_input() {
        let h = mat(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(jacobi_eig_sym(&h).is_err());
    }

    #[test]
    fn mat_sgn_fixes_orthogonal_input() {
        let q = gram_schmidt_qr(&SplitMix64::new(5).gaussian_matrix(4, 4)).unwrap();
        let s = mat_sgn_exact(&q).unwrap();
        assert!(frobenius_norm(&s.sub(&q)) < 1e-12);
    }

    #[test]
    fn mat_sgn_positive_diagonal_is_identity() {
        let x = mat(2, 2, &[5.0, 0.0, 0.0, 0.1]);
        let s = mat_sgn_exact(&x).unwrap();
        assert!(frobenius_norm(&s.sub(&Mat64::identity(2))) < 1e-13);
    }

    #[test]
    fn mat_sgn_antidiagonal_hand_svd() {
        let x = mat(2, 2, &[0.0, 2.0, -3.0, 0.0]);
        let s = mat_sgn_exact(&x).unwrap();
        let expect = mat(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(frobenius_norm(&s.sub(&expect)) < 1e-13);
    }

    #[test]
    fn mat_sgn_zero_is_domain_error() {
        assert!(mat_sgn_exact(&Mat64::zeros(3, 2)).is_err());
    }

    #[test]
    fn svd_reconstructs_wide_and_tall_inputs() {
        for (rows, cols, seed) in [(6, 4, 21u64), (4, 6, 22)] {
            let x: Mat64 = SplitMix64::new(seed).gaussian_matrix(rows, cols);
            let dec = svd(&x).unwrap();
            let k = dec.sigma.len();
            let us = Mat64::from_fn(rows, k, |i, j| dec.u[(i, j)] * dec.sigma[j]);
            let rec = us.matmul_tr(&dec.v);
            assert!(frobenius_norm(&rec.sub(&x)) < 1e-10);
            for w in dec.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }
}
