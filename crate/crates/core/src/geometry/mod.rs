//! Analytic domain descriptions and curved-boundary machinery.
//!
//! A [`SmoothDomain`] knows its signed distance `d` (negative inside), the
//! orthogonal projection `π` onto its boundary `Γ` and the outward unit normal
//! `n = ∇d`. Every point `x` in the tubular neighborhood `|d(x)| < δ` decomposes
//! uniquely as `x = π(x) + d(x) n(π(x))`.

mod diagnostics;
mod level_set;

pub use diagnostics::{
    boundary_distance_max, normal_defect, projection_injective_on_loop,
    projection_injectivity_check, surface_integral_defect, NormalDefect,
};
pub use level_set::{Circle, Ellipse, LevelSet};

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use thiserror::Error;

use crate::{Point, Vector};

/// Residual tolerance of the level-set projection.
pub const NEWTON_TOL: f64 = 1e-12;
/// Iteration cap of the level-set projection.
pub const NEWTON_MAX_ITER: usize = 50;

/// Distance from `Γ` below which a point counts as lying on the boundary.
pub const ON_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(
        "point at distance {distance:e} lies outside the tubular neighborhood of width {width:e}"
    )]
    OutsideTubularNeighborhood { distance: f64, width: f64 },
    #[error("point at distance {distance:e} is not on the boundary")]
    NotOnBoundary { distance: f64 },
    #[error("domain has no boundary parametrization")]
    MissingParametrization,
}

/// Shape of a [`SmoothDomain`].
#[derive(Clone)]
pub enum DomainKind {
    /// Open disk; the analytic fast path.
    Disk { center: Point, radius: f64 },
    /// `Ω = {φ < 0}` for a level-set function `φ`.
    LevelSet(Arc<dyn LevelSet>),
}

impl fmt::Debug for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Disk { center, radius } => f
                .debug_struct("Disk")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            DomainKind::LevelSet(phi) => f.debug_tuple("LevelSet").field(&phi.name()).finish(),
        }
    }
}

/// Smooth bounded planar domain with its tubular-neighborhood width.
#[derive(Debug, Clone)]
pub struct SmoothDomain {
    kind: DomainKind,
    curvature_bound: f64,
    tube_width: f64,
}

/// Decomposition `x = foot + distance * normal_at_foot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    pub foot: Point,
    pub distance: f64,
    pub normal_at_foot: Vector,
}

impl SmoothDomain {
    /// The unit disk centered at the origin, `δ = 0.9`.
    pub fn unit_disk() -> Self {
        Self::disk(Point::origin(), 1.0)
    }

    /// Disk of the given radius; `δ = 0.9 r`.
    pub fn disk(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "disk radius must be positive");
        Self {
            kind: DomainKind::Disk { center, radius },
            curvature_bound: 1.0 / radius,
            tube_width: 0.9 * radius,
        }
    }

    /// Level-set domain; `δ = 0.5 / curvature_bound`.
    pub fn level_set(phi: Arc<dyn LevelSet>, curvature_bound: f64) -> Self {
        assert!(curvature_bound > 0.0, "curvature bound must be positive");
        Self {
            kind: DomainKind::LevelSet(phi),
            curvature_bound,
            tube_width: 0.5 / curvature_bound,
        }
    }

    /// Overrides the tubular-neighborhood width.
    pub fn with_tube_width(mut self, width: f64) -> Self {
        assert!(width > 0.0);
        self.tube_width = width;
        self
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn curvature_bound(&self) -> f64 {
        self.curvature_bound
    }

    pub fn tube_width(&self) -> f64 {
        self.tube_width
    }

    /// A point whose polar angle sweeps monotonically along `Γ` (star center).
    pub fn center(&self) -> Point {
        match &self.kind {
            DomainKind::Disk { center, .. } => *center,
            DomainKind::LevelSet(phi) => phi.star_center(),
        }
    }

    /// Signed distance `d(x)`, negative inside.
    pub fn signed_distance(&self, x: &Point) -> Result<f64, GeometryError> {
        match &self.kind {
            DomainKind::Disk { center, radius } => Ok((x - center).norm() - radius),
            DomainKind::LevelSet(phi) => newton_projection(phi.as_ref(), x).map(|r| r.distance),
        }
    }

    /// Orthogonal projection onto `Γ`.
    pub fn project(&self, x: &Point) -> Result<ProjectionResult, GeometryError> {
        let result = match &self.kind {
            DomainKind::Disk { center, radius } => {
                let offset = x - center;
                let r = offset.norm();
                let distance = r - radius;
                if distance.abs() >= self.tube_width {
                    return Err(GeometryError::OutsideTubularNeighborhood {
                        distance,
                        width: self.tube_width,
                    });
                }
                let normal = offset / r;
                ProjectionResult {
                    foot: center + normal * *radius,
                    distance,
                    normal_at_foot: normal,
                }
            }
            DomainKind::LevelSet(phi) => newton_projection(phi.as_ref(), x)?,
        };
        if result.distance.abs() >= self.tube_width {
            return Err(GeometryError::OutsideTubularNeighborhood {
                distance: result.distance,
                width: self.tube_width,
            });
        }
        Ok(result)
    }

    /// Gradient of the signed distance, `∇d(x) = n(π(x))`.
    pub fn distance_gradient(&self, x: &Point) -> Result<Vector, GeometryError> {
        self.project(x).map(|r| r.normal_at_foot)
    }

    /// Outward unit normal at a point of `Γ`.
    pub fn outward_normal(&self, x: &Point) -> Result<Vector, GeometryError> {
        let distance = self.signed_distance(x)?;
        if distance.abs() > ON_BOUNDARY_TOL {
            return Err(GeometryError::NotOnBoundary { distance });
        }
        Ok(match &self.kind {
            DomainKind::Disk { center, .. } => (x - center).normalize(),
            DomainKind::LevelSet(phi) => phi.gradient(x).normalize(),
        })
    }

    /// Exact boundary integral `∫_Γ f dγ` via the periodic trapezoid rule on
    /// the boundary parametrization.
    pub fn boundary_integral<F>(&self, f: F, nodes: usize) -> Result<f64, GeometryError>
    where
        F: Fn(&Point) -> f64,
    {
        let dt = std::f64::consts::TAU / nodes as f64;
        let mut sum = 0.0;
        for k in 0..nodes {
            let t = k as f64 * dt;
            let (p, dp) = self
                .boundary_curve(t)
                .ok_or(GeometryError::MissingParametrization)?;
            sum += f(&p) * dp.norm();
        }
        Ok(sum * dt)
    }

    /// Counterclockwise parametrization of `Γ` over `[0, 2π)`: point and
    /// derivative.
    pub fn boundary_curve(&self, t: f64) -> Option<(Point, Vector)> {
        match &self.kind {
            DomainKind::Disk { center, radius } => {
                let (s, c) = t.sin_cos();
                Some((
                    center + Vector::new(c, s) * *radius,
                    Vector::new(-s, c) * *radius,
                ))
            }
            DomainKind::LevelSet(phi) => phi.boundary_curve(t),
        }
    }
}

/// Damped Newton solve of `φ(y) = 0`, `(x − y) × ∇φ(y) = 0`.
fn newton_projection(phi: &dyn LevelSet, x: &Point) -> Result<ProjectionResult, GeometryError> {
    let residual = |y: &Point| -> nalgebra::Vector2<f64> {
        let g = phi.gradient(y);
        let r = x - y;
        nalgebra::Vector2::new(phi.value(y), r.x * g.y - r.y * g.x)
    };

    let g0 = phi.gradient(x);
    let mut y = x - g0 * (phi.value(x) / g0.norm_squared());
    let mut f = residual(&y);
    let mut converged = f.amax() <= NEWTON_TOL;
    let mut iterations = 0;
    while !converged && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let g = phi.gradient(&y);
        let hess = phi.hessian(&y);
        let r = x - y;
        let jac = Matrix2::new(
            g.x,
            g.y,
            -g.y + r.x * hess[(1, 0)] - r.y * hess[(0, 0)],
            g.x + r.x * hess[(1, 1)] - r.y * hess[(0, 1)],
        );
        let Some(step) = jac.lu().solve(&(-f)) else {
            break;
        };
        let mut alpha = 1.0;
        let norm0 = f.norm();
        let mut accepted = false;
        for _ in 0..30 {
            let trial = y + step * alpha;
            let ft = residual(&trial);
            if ft.norm() < norm0 || ft.amax() <= NEWTON_TOL {
                y = trial;
                f = ft;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        converged = f.amax() <= NEWTON_TOL;
    }
    if !converged {
        return Err(GeometryError::NonConvergence {
            iterations,
            residual: f.amax(),
        });
    }
    // One polishing step pushes the residual well below the tolerance so that
    // snapped boundary vertices sit on Γ to rounding.
    let g = phi.gradient(&y);
    let hess = phi.hessian(&y);
    let r = x - y;
    let jac = Matrix2::new(
        g.x,
        g.y,
        -g.y + r.x * hess[(1, 0)] - r.y * hess[(0, 0)],
        g.x + r.x * hess[(1, 1)] - r.y * hess[(0, 1)],
    );
    if let Some(step) = jac.lu().solve(&(-f)) {
        let trial = y + step;
        if residual(&trial).norm() <= f.norm() {
            y = trial;
        }
    }

    let normal = phi.gradient(&y).normalize();
    let offset = x - y;
    let sign = if offset.dot(&normal) < 0.0 { -1.0 } else { 1.0 };
    Ok(ProjectionResult {
        foot: y,
        distance: sign * offset.norm(),
        normal_at_foot: normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_disk_signed_distance() {
        let d = SmoothDomain::unit_disk();
        assert_eq!(d.signed_distance(&Point::new(0.0, 0.0)).unwrap(), -1.0);
        assert_abs_diff_eq!(
            d.signed_distance(&Point::new(0.6, 0.8)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(d.signed_distance(&Point::new(2.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn unit_disk_projection() {
        let d = SmoothDomain::unit_disk();
        let r = d.project(&Point::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(r.foot, Point::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(r.distance, -0.5, epsilon = 1e-15);

        // |d| = 1 exceeds the default width 0.9.
        let err = d.project(&Point::new(0.0, -2.0)).unwrap_err();
        assert!(matches!(
            err,
            GeometryError::OutsideTubularNeighborhood { .. }
        ));
        let wide = SmoothDomain::unit_disk().with_tube_width(1.5);
        let r = wide.project(&Point::new(0.0, -2.0)).unwrap();
        assert_abs_diff_eq!(r.foot, Point::new(0.0, -1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(r.distance, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_disk_normals() {
        let d = SmoothDomain::unit_disk();
        assert_abs_diff_eq!(
            d.outward_normal(&Point::new(1.0, 0.0)).unwrap(),
            Vector::new(1.0, 0.0),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            d.outward_normal(&Point::new(0.6, 0.8)).unwrap(),
            Vector::new(0.6, 0.8),
            epsilon = 1e-15
        );
        assert!(matches!(
            d.outward_normal(&Point::new(0.5, 0.0)),
            Err(GeometryError::NotOnBoundary { .. })
        ));
    }

    /// Nearest point on the ellipse by dense sampling of its parametrization,
    /// sharpened by ternary search inside the winning sample bracket.
    fn brute_force_foot(a: f64, b: f64, x: &Point) -> Point {
        let curve = |t: f64| Point::new(a * t.cos(), b * t.sin());
        let n = 200_000;
        let dt = std::f64::consts::TAU / n as f64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..n {
            let t = k as f64 * dt;
            let dist = (curve(t) - x).norm();
            if dist < best.0 {
                best = (dist, t);
            }
        }
        let (mut lo, mut hi) = (best.1 - dt, best.1 + dt);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if (curve(m1) - x).norm() < (curve(m2) - x).norm() {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        curve(0.5 * (lo + hi))
    }

    #[test]
    fn ellipse_projection_matches_brute_force() {
        let ellipse = Ellipse::new(2.0, 1.0);
        let domain = ellipse.domain().with_tube_width(0.9);
        let x = Point::new(0.0, 0.5);
        let r = domain.project(&x).unwrap();
        let oracle = brute_force_foot(2.0, 1.0, &x);
        assert_abs_diff_eq!(r.foot, oracle, epsilon = 1e-6);
        assert_abs_diff_eq!(r.foot, Point::new(0.0, 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(r.distance, -0.5, epsilon = 1e-12);

        let x = Point::new(1.3, -0.9);
        let r = domain.project(&x).unwrap();
        let oracle = brute_force_foot(2.0, 1.0, &x);
        assert_abs_diff_eq!(r.foot, oracle, epsilon = 1e-5);
    }

    #[test]
    fn ellipse_normal_is_normalized_gradient() {
        let domain = Ellipse::new(2.0, 1.0).domain();
        let n = domain.outward_normal(&Point::new(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(n, Vector::new(0.0, 1.0), epsilon = 1e-14);
        let p = Point::new(2.0 * 0.3f64.cos(), 0.3f64.sin());
        let n = domain.outward_normal(&p).unwrap();
        let g = Vector::new(p.x / 2.0, 2.0 * p.y).normalize();
        assert_abs_diff_eq!(n, g, epsilon = 1e-14);
        assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn boundary_integral_of_unit_disk() {
        let d = SmoothDomain::unit_disk();
        let perimeter = d.boundary_integral(|_| 1.0, 64).unwrap();
        assert_abs_diff_eq!(perimeter, std::f64::consts::TAU, epsilon = 1e-13);
        let x2 = d.boundary_integral(|p| p.x * p.x, 64).unwrap();
        assert_abs_diff_eq!(x2, std::f64::consts::PI, epsilon = 1e-13);
    }
}
