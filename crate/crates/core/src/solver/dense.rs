//! Dense LU with partial pivoting, used as a direct reference solver for small
//! systems.

use nalgebra::DMatrix;

use super::{CsrMatrix, SolverError};

/// Largest dimension the dense path accepts.
pub const DENSE_LU_MAX_DIM: usize = 6000;
/// Pivots below this magnitude count as exact singularity.
const PIVOT_FLOOR: f64 = 1e-300;

/// Row-permuted factorization `P A = L U`; `L` has a unit diagonal and both
/// factors share one column-major buffer.
#[derive(Debug, Clone)]
pub struct DenseLu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolverError> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if n > DENSE_LU_MAX_DIM {
            return Err(SolverError::TooLarge {
                n,
                max: DENSE_LU_MAX_DIM,
            });
        }
        Self::factor_dense(a.to_dense())
    }

    pub fn factor_dense(mut lu: DMatrix<f64>) -> Result<Self, SolverError> {
        let n = lu.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut p, mut big) = (k, lu[(k, k)].abs());
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > big {
                    p = i;
                    big = v;
                }
            }
            if big < PIVOT_FLOOR || !big.is_finite() {
                return Err(SolverError::SingularMatrix { column: k });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            // Column-oriented rank-one update keeps memory access contiguous.
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == 0.0 {
                    continue;
                }
                for i in k + 1..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                for i in j + 1..n {
                    x[i] -= self.lu[(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                for i in 0..j {
                    x[i] -= self.lu[(i, j)] * xj;
                }
            }
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, then x = Pᵀ w.
        let mut z = b.to_vec();
        for j in 0..n {
            let s: f64 = (0..j).map(|i| self.lu[(i, j)] * z[i]).sum();
            z[j] = (z[j] - s) / self.lu[(j, j)];
        }
        for j in (0..n).rev() {
            let s: f64 = (j + 1..n).map(|i| self.lu[(i, j)] * z[i]).sum();
            z[j] -= s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        x
    }
}

/// Factor-and-solve with a few steps of iterative refinement in working
/// precision. Returns the solution and `‖b − A x‖ / ‖b‖`.
pub fn dense_lu_solve(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, f64), SolverError> {
    let lu = DenseLu::factor(a)?;
    let bnorm = super::norm2(b);
    let mut x = lu.solve(b);
    let mut res = super::residual_norm(a, &x, b);
    for _ in 0..3 {
        if res <= 1e-15 * bnorm {
            break;
        }
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let dx = lu.solve(&r);
        let cand: Vec<f64> = x.iter().zip(&dx).map(|(p, q)| p + q).collect();
        let cand_res = super::residual_norm(a, &cand, b);
        if cand_res >= res {
            break;
        }
        x = cand;
        res = cand_res;
    }
    let rel = if bnorm > 0.0 { res / bnorm } else { res };
    Ok((x, rel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_by_two() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]));
        let (x, res) = dense_lu_solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert!(res < 1e-15);
    }

    #[test]
    fn identity_and_diagonal() {
        let b: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let (x, _) = dense_lu_solve(&CsrMatrix::identity(10), &b).unwrap();
        assert_eq!(x, b);
        let (x, _) = dense_lu_solve(&CsrMatrix::from_diagonal(&b), &b).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn permutation_needs_pivoting() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        ));
        let (x, _) = dense_lu_solve(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 1.0, 2.0]);
        let lu = DenseLu::factor(&a).unwrap();
        let xt = lu.solve_transpose(&[1.0, 2.0, 3.0]);
        let back = a.mul_transpose_vec(&xt);
        assert_eq!(back, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = CsrMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]));
        assert!(matches!(
            DenseLu::factor(&a),
            Err(SolverError::SingularMatrix { .. })
        ));
    }

    #[test]
    fn matches_nalgebra_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let spd = &m * m.transpose() + DMatrix::identity(n, n) * n as f64;
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let oracle = spd
            .clone()
            .lu()
            .solve(&nalgebra::DVector::from_vec(b.clone()))
            .unwrap();
        let (x, _) = dense_lu_solve(&CsrMatrix::from_dense(&spd), &b).unwrap();
        for (p, q) in x.iter().zip(oracle.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
        let lu = DenseLu::factor(&CsrMatrix::from_dense(&spd)).unwrap();
        let xt = lu.solve_transpose(&b);
        let oracle_t = spd
            .transpose()
            .lu()
            .solve(&nalgebra::DVector::from_vec(b))
            .unwrap();
        for (p, q) in xt.iter().zip(oracle_t.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn too_large_is_rejected() {
        let a = CsrMatrix::identity(DENSE_LU_MAX_DIM + 1);
        assert!(matches!(
            DenseLu::factor(&a),
            Err(SolverError::TooLarge { .. })
        ));
    }
}
