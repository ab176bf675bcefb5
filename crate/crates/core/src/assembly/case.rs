//! Manufactured solutions with closed-form data.

use std::f64::consts::PI;

use nalgebra::Matrix2;

use super::AssemblyError;
use crate::geometry::SmoothDomain;
use crate::{Point, Vector};

/// Trapezoid nodes for the compatibility integral.
const COMPATIBILITY_NODES: usize = 4096;
const COMPATIBILITY_TOL: f64 = 1e-10;
const PDE_RESIDUAL_TOL: f64 = 1e-8;
const PDE_SAMPLES: usize = 100;

/// `‖u‖_{L²}`, `‖u‖_{H¹}`, `‖p‖_{L²}` on the exact domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceNorms {
    pub l2_velocity: f64,
    pub h1_velocity: f64,
    pub l2_pressure: f64,
}

/// Exact solution of `u − νΔu + ∇p = f`, `div u = 0`, with slip data
/// `u·n = g` and `(I − n⊗n)σn = τ`. All fields are closed-form expressions
/// that also serve as their own extensions off `Γ` and outside `Ω`.
pub trait ManufacturedCase: Send + Sync {
    fn name(&self) -> &str;
    fn nu(&self) -> f64;
    fn velocity(&self, x: &Point) -> Vector;
    /// Row `i` holds `∇u_i`.
    fn velocity_gradient(&self, x: &Point) -> Matrix2<f64>;
    fn velocity_laplacian(&self, x: &Point) -> Vector;
    fn pressure(&self, x: &Point) -> f64;
    fn pressure_gradient(&self, x: &Point) -> Vector;
    fn forcing(&self, x: &Point) -> Vector;
    /// Normal velocity `g`.
    fn normal_data(&self, x: &Point) -> f64;
    /// Tangential traction `τ`.
    fn traction(&self, x: &Point) -> Vector;
    fn reference_norms(&self) -> Option<ReferenceNorms> {
        None
    }

    /// Cauchy stress `−pI + ν(∇u + ∇uᵀ)`.
    fn stress(&self, x: &Point) -> Matrix2<f64> {
        let g = self.velocity_gradient(x);
        (g + g.transpose()) * self.nu() - Matrix2::identity() * self.pressure(x)
    }
}

/// `u = (−y r², x r²)`, `p = 8xy` on the unit disk. The velocity is tangent to
/// every circle around the origin, so `g = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingDiskCase {
    pub nu: f64,
}

impl Default for RotatingDiskCase {
    fn default() -> Self {
        Self { nu: 1.0 }
    }
}

impl ManufacturedCase for RotatingDiskCase {
    fn name(&self) -> &str {
        "rotating_disk"
    }

    fn nu(&self) -> f64 {
        self.nu
    }

    fn velocity(&self, x: &Point) -> Vector {
        let r2 = x.coords.norm_squared();
        Vector::new(-x.y * r2, x.x * r2)
    }

    fn velocity_gradient(&self, x: &Point) -> Matrix2<f64> {
        let (a, b) = (x.x, x.y);
        Matrix2::new(
            -2.0 * a * b,
            -a * a - 3.0 * b * b,
            3.0 * a * a + b * b,
            2.0 * a * b,
        )
    }

    fn velocity_laplacian(&self, x: &Point) -> Vector {
        Vector::new(-8.0 * x.y, 8.0 * x.x)
    }

    fn pressure(&self, x: &Point) -> f64 {
        8.0 * x.x * x.y
    }

    fn pressure_gradient(&self, x: &Point) -> Vector {
        Vector::new(8.0 * x.y, 8.0 * x.x)
    }

    fn forcing(&self, x: &Point) -> Vector {
        let r2 = x.coords.norm_squared();
        let nu = self.nu;
        Vector::new(
            -x.y * r2 + 8.0 * nu * x.y + 8.0 * x.y,
            x.x * r2 - 8.0 * nu * x.x + 8.0 * x.x,
        )
    }

    fn normal_data(&self, _x: &Point) -> f64 {
        0.0
    }

    /// `(I − xxᵀ) σ x`, which on the unit circle is `(I − n⊗n)σn`.
    fn traction(&self, x: &Point) -> Vector {
        let p = x.coords;
        let sn = self.stress(x) * p;
        sn - p * p.dot(&sn)
    }

    fn reference_norms(&self) -> Option<ReferenceNorms> {
        // ∫|u|² = π/4, ∫|∇u|² = 10π/3, ∫p² = 8π/3 on the unit disk.
        Some(ReferenceNorms {
            l2_velocity: (PI / 4.0).sqrt(),
            h1_velocity: (PI / 4.0 + 10.0 * PI / 3.0).sqrt(),
            l2_pressure: (8.0 * PI / 3.0).sqrt(),
        })
    }
}

/// All data and the solution vanish.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroCase;

impl ManufacturedCase for ZeroCase {
    fn name(&self) -> &str {
        "zero"
    }
    fn nu(&self) -> f64 {
        1.0
    }
    fn velocity(&self, _: &Point) -> Vector {
        Vector::zeros()
    }
    fn velocity_gradient(&self, _: &Point) -> Matrix2<f64> {
        Matrix2::zeros()
    }
    fn velocity_laplacian(&self, _: &Point) -> Vector {
        Vector::zeros()
    }
    fn pressure(&self, _: &Point) -> f64 {
        0.0
    }
    fn pressure_gradient(&self, _: &Point) -> Vector {
        Vector::zeros()
    }
    fn forcing(&self, _: &Point) -> Vector {
        Vector::zeros()
    }
    fn normal_data(&self, _: &Point) -> f64 {
        0.0
    }
    fn traction(&self, _: &Point) -> Vector {
        Vector::zeros()
    }
    fn reference_norms(&self) -> Option<ReferenceNorms> {
        Some(ReferenceNorms {
            l2_velocity: 0.0,
            h1_velocity: 0.0,
            l2_pressure: 0.0,
        })
    }
}

/// Checks `∫_Γ g = 0` and the momentum residual at interior sample points.
pub fn validate_case(
    case: &dyn ManufacturedCase,
    domain: &SmoothDomain,
) -> Result<(), AssemblyError> {
    let flux = domain.boundary_integral(|x| case.normal_data(x), COMPATIBILITY_NODES)?;
    if flux.abs() > COMPATIBILITY_TOL {
        return Err(AssemblyError::CaseValidation(format!(
            "boundary flux of g is {flux:e}, expected 0"
        )));
    }
    let center = domain.center();
    for k in 0..PDE_SAMPLES {
        // Golden-angle spiral, scaled towards the boundary point in that direction.
        let t = k as f64 * PI * (3.0 - 5f64.sqrt());
        let s = ((k as f64 + 0.5) / PDE_SAMPLES as f64).sqrt() * 0.95;
        let (boundary, _) = domain
            .boundary_curve(t.rem_euclid(std::f64::consts::TAU))
            .ok_or(crate::geometry::GeometryError::MissingParametrization)?;
        let x = center + (boundary - center) * s;
        let lhs = case.velocity(&x) - case.velocity_laplacian(&x) * case.nu()
            + case.pressure_gradient(&x);
        let residual = (lhs - case.forcing(&x)).norm();
        if residual > PDE_RESIDUAL_TOL {
            return Err(AssemblyError::CaseValidation(format!(
                "momentum residual {residual:e} at ({}, {})",
                x.x, x.y
            )));
        }
        let g = case.velocity_gradient(&x);
        let div = g[(0, 0)] + g[(1, 1)];
        if div.abs() > PDE_RESIDUAL_TOL {
            return Err(AssemblyError::CaseValidation(format!(
                "divergence {div:e} at ({}, {})",
                x.x, x.y
            )));
        }
    }
    Ok(())
}
