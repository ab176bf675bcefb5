//! Penalty finite element solver for the Stokes equations with slip boundary
//! conditions on smooth curved 2D domains.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: analytic domains, signed distance, orthogonal projection onto
//!   the curved boundary and the boundary-approximation diagnostics.
//! - [`mesh`]: structured disk triangulations, red refinement with boundary
//!   snapping, Triangle-format I/O.
//! - [`quadrature`]: triangle and edge rules.
//! - [`assembly`]: P1/P1 (stabilized) and P1b/P1 spaces, the bilinear forms and
//!   the penalty saddle-point system in its full and reduced-integration forms.
//! - [`solver`]: CSR kernels, ILU(0), restarted GMRES, BiCGSTAB, dense LU and a
//!   2-norm condition estimator.
//! - [`analysis`]: error norms, multiplier recovery, slip diagnostics,
//!   convergence studies and penalty sweeps.

pub mod analysis;
pub mod assembly;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod solver;

/// Point in the plane.
pub type Point = nalgebra::Point2<f64>;
/// Vector in the plane.
pub type Vector = nalgebra::Vector2<f64>;

pub use analysis::{ConvergenceRecord, ErrorReport};
pub use assembly::{
    DofMap, ElementChoice, ElementKind, ManufacturedCase, PenaltyScheme, RotatingDiskCase,
    SaddleSystem,
};
pub use geometry::{ProjectionResult, SmoothDomain};
pub use mesh::Mesh;
pub use solver::{CsrMatrix, SolveReport};
