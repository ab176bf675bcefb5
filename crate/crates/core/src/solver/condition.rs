//! 2-norm condition estimate `σ_max / σ_min`.
//!
//! `σ_max` comes from power iteration on `AᵀA`, `σ_min` from inverse iteration
//! on `AᵀA` through a dense LU of `A` and its transpose solve.

use super::dense::DenseLu;
use super::{norm2, CsrMatrix, SolverError};

const POWER_TOL: f64 = 1e-6;
const POWER_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub cond2: f64,
}

/// Fixed, non-symmetric start vector so results are reproducible.
fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    normalize(v).0
}

fn normalize(mut v: Vec<f64>) -> (Vec<f64>, f64) {
    let s = norm2(&v);
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    (v, s)
}

/// Dominant eigenvalue of a symmetric positive semidefinite operator.
fn power_iteration(op: impl Fn(&[f64]) -> Vec<f64>, n: usize) -> f64 {
    let mut v = start_vector(n);
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let (w, s) = normalize(op(&v));
        if s == 0.0 {
            return 0.0;
        }
        let done = (s - lambda).abs() <= POWER_TOL * s;
        lambda = s;
        v = w;
        if done {
            break;
        }
    }
    lambda
}

pub fn condition_estimate(a: &CsrMatrix) -> Result<ConditionEstimate, SolverError> {
    let n = a.nrows();
    let lu = DenseLu::factor(a)?;
    let max_eig = power_iteration(|v| a.mul_transpose_vec(&a.mul_vec(v)), n);
    // (AᵀA)⁻¹ v = A⁻¹ A⁻ᵀ v.
    let inv_max = power_iteration(|v| lu.solve(&lu.solve_transpose(v)), n);
    let sigma_max = max_eig.sqrt();
    let sigma_min = 1.0 / inv_max.sqrt();
    Ok(ConditionEstimate {
        sigma_max,
        sigma_min,
        cond2: sigma_max / sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// One-sided Jacobi SVD, only for checking the estimator.
    fn jacobi_singular_values(mut u: DMatrix<f64>) -> Vec<f64> {
        let n = u.ncols();
        for _ in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = u.column(p).norm_squared();
                    let beta = u.column(q).norm_squared();
                    let gamma = u.column(p).dot(&u.column(q));
                    off = off.max(gamma.abs() / (alpha * beta).sqrt());
                    if gamma == 0.0 {
                        continue;
                    }
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..u.nrows() {
                        let (a, b) = (u[(i, p)], u[(i, q)]);
                        u[(i, p)] = c * a - s * b;
                        u[(i, q)] = s * a + c * b;
                    }
                }
            }
            if off < 1e-15 {
                break;
            }
        }
        (0..n).map(|j| u.column(j).norm()).collect()
    }

    #[test]
    fn identity_and_diagonal() {
        let c = condition_estimate(&CsrMatrix::identity(8)).unwrap();
        assert!((c.cond2 - 1.0).abs() < 1e-9);
        let mut d = vec![1.0; 6];
        d[3] = 10.0;
        let c = condition_estimate(&CsrMatrix::from_diagonal(&d)).unwrap();
        assert!((c.cond2 - 10.0).abs() < 1e-4);
    }

    #[test]
    fn close_to_jacobi_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DMatrix::from_fn(20, 20, |_, _| rng.random_range(-1.0..1.0));
        let sv = jacobi_singular_values(m.clone());
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let c = condition_estimate(&CsrMatrix::from_dense(&m)).unwrap();
        let rel = (c.cond2 - max / min).abs() / (max / min);
        assert!(rel < 0.05, "estimate {} vs {}", c.cond2, max / min);
    }
}
