//! Sparse linear algebra for the saddle-point systems.

pub mod condition;
pub mod csr;
pub mod dense;
pub mod ilu;
pub mod krylov;
pub mod mmio;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use condition::{condition_estimate, ConditionEstimate};
pub use csr::{dot, norm2, residual_norm, CsrMatrix, TripletBuilder};
pub use dense::{dense_lu_solve, DenseLu, DENSE_LU_MAX_DIM};
pub use ilu::Ilu0;
pub use krylov::{bicgstab_solve, gmres_solve, IterativeOptions, Preconditioner};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("preconditioner breakdown: {0}")]
    Breakdown(String),
    #[error("matrix is singular to working precision (column {column})")]
    SingularMatrix { column: usize },
    #[error("dense solve of dimension {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Gmres,
    Bicgstab,
    #[serde(rename = "lu")]
    DenseLu,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Gmres => "gmres",
            Method::Bicgstab => "bicgstab",
            Method::DenseLu => "lu",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` of the returned iterate.
    pub relative_residual: f64,
    pub converged: bool,
    /// ILU(0) broke down and the solve ran unpreconditioned.
    pub preconditioner_fallback: bool,
    /// GMRES: residual estimates per restart cycle. BiCGSTAB: one sequence.
    #[serde(skip)]
    pub residual_history: Vec<Vec<f64>>,
}

/// Dispatches to the requested method. The dense path reports one
/// "iteration" and is converged when its residual meets the tolerance.
pub fn solve(
    a: &CsrMatrix,
    b: &[f64],
    method: Method,
    opts: &IterativeOptions,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    match method {
        Method::Gmres => Ok(gmres_solve(a, b, opts)),
        Method::Bicgstab => Ok(bicgstab_solve(a, b, opts)),
        Method::DenseLu => {
            let (x, rel) = dense_lu_solve(a, b)?;
            let bnorm = norm2(b);
            let target = (opts.rel_tol * bnorm).max(opts.abs_tol);
            Ok((
                x,
                SolveReport {
                    method,
                    iterations: 1,
                    relative_residual: rel,
                    converged: rel * bnorm.max(f64::MIN_POSITIVE) <= target || bnorm == 0.0,
                    preconditioner_fallback: false,
                    residual_history: Vec::new(),
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn convection_diffusion(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.5);
            if i > 0 {
                b.push(i, i - 1, -1.4);
            }
            if i + 1 < n {
                b.push(i, i + 1, -0.6);
            }
            if i + 7 < n {
                b.push(i, i + 7, 0.3);
            }
        }
        b.build()
    }

    #[test]
    fn krylov_methods_solve_nonsymmetric_system() {
        let a = convection_diffusion(200);
        let x_true: Vec<f64> = (0..200).map(|i| (0.1 * i as f64).cos()).collect();
        let b = a.mul_vec(&x_true);
        let opts = IterativeOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            ..IterativeOptions::with_restart(10)
        };
        for pre in [Preconditioner::None, Preconditioner::Ilu0] {
            let o = IterativeOptions {
                preconditioner: pre,
                ..opts
            };
            for (x, rep) in [gmres_solve(&a, &b, &o), bicgstab_solve(&a, &b, &o)] {
                assert!(rep.converged, "{rep:?}");
                assert!(residual_norm(&a, &x, &b) <= 1e-10 * norm2(&b) * 1.0001);
            }
        }
    }

    #[test]
    fn gmres_cycle_residuals_do_not_increase() {
        let a = convection_diffusion(150);
        let b = vec![1.0; 150];
        let o = IterativeOptions {
            preconditioner: Preconditioner::None,
            rel_tol: 1e-12,
            abs_tol: 0.0,
            ..IterativeOptions::with_restart(5)
        };
        let (_, rep) = gmres_solve(&a, &b, &o);
        for cycle in &rep.residual_history {
            for w in cycle.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn zero_rhs_is_trivially_converged() {
        let (x, rep) = gmres_solve(
            &CsrMatrix::identity(4),
            &[0.0; 4],
            &IterativeOptions::default(),
        );
        assert!(rep.converged && rep.iterations == 0 && x == vec![0.0; 4]);
    }

    #[test]
    fn ilu_breakdown_falls_back() {
        let a = CsrMatrix::from_dense(&nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[0.0, 1.0, 1.0, 0.0],
        ));
        let (x, rep) = gmres_solve(&a, &[1.0, 2.0], &IterativeOptions::default());
        assert!(rep.preconditioner_fallback && rep.converged);
        assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let a = convection_diffusion(100);
        let o = IterativeOptions {
            preconditioner: Preconditioner::None,
            max_iter: 3,
            rel_tol: 1e-14,
            ..IterativeOptions::default()
        };
        let (_, rep) = gmres_solve(&a, &vec![1.0; 100], &o);
        assert!(!rep.converged && rep.iterations == 3);
    }
}
