use std::sync::Arc;

use nalgebra::Matrix2;

use super::SmoothDomain;
use crate::{Point, Vector};

/// Scalar field `φ` with `Ω = {φ < 0}` and `∇φ ≠ 0` near `Γ = {φ = 0}`.
pub trait LevelSet: Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Vector;
    fn hessian(&self, x: &Point) -> Matrix2<f64>;

    /// Counterclockwise boundary parametrization over `[0, 2π)`, when known.
    fn boundary_curve(&self, _t: f64) -> Option<(Point, Vector)> {
        None
    }

    /// Point from which `Γ` is star-shaped.
    fn star_center(&self) -> Point {
        Point::origin()
    }
}

/// `φ = |x − c|² − r²`; the level-set twin of [`SmoothDomain::disk`].
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn domain(self) -> SmoothDomain {
        SmoothDomain::level_set(Arc::new(self), 1.0 / self.radius)
            .with_tube_width(0.9 * self.radius)
    }
}

impl LevelSet for Circle {
    fn name(&self) -> &str {
        "circle"
    }

    fn value(&self, x: &Point) -> f64 {
        (x - self.center).norm_squared() - self.radius * self.radius
    }

    fn gradient(&self, x: &Point) -> Vector {
        (x - self.center) * 2.0
    }

    fn hessian(&self, _x: &Point) -> Matrix2<f64> {
        Matrix2::identity() * 2.0
    }

    fn boundary_curve(&self, t: f64) -> Option<(Point, Vector)> {
        let (s, c) = t.sin_cos();
        Some((
            self.center + Vector::new(c, s) * self.radius,
            Vector::new(-s, c) * self.radius,
        ))
    }

    fn star_center(&self) -> Point {
        self.center
    }
}

/// Axis-aligned ellipse `x²/a² + y²/b² − 1`.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub semi_x: f64,
    pub semi_y: f64,
}

impl Ellipse {
    pub fn new(semi_x: f64, semi_y: f64) -> Self {
        assert!(semi_x > 0.0 && semi_y > 0.0);
        Self { semi_x, semi_y }
    }

    /// Maximum curvature, attained at the ends of the major axis.
    pub fn max_curvature(&self) -> f64 {
        let (a, b) = (self.semi_x, self.semi_y);
        (a / (b * b)).max(b / (a * a))
    }

    pub fn domain(self) -> SmoothDomain {
        SmoothDomain::level_set(Arc::new(self), self.max_curvature())
    }
}

impl LevelSet for Ellipse {
    fn name(&self) -> &str {
        "ellipse"
    }

    fn value(&self, x: &Point) -> f64 {
        let (a, b) = (self.semi_x, self.semi_y);
        x.x * x.x / (a * a) + x.y * x.y / (b * b) - 1.0
    }

    fn gradient(&self, x: &Point) -> Vector {
        let (a, b) = (self.semi_x, self.semi_y);
        Vector::new(2.0 * x.x / (a * a), 2.0 * x.y / (b * b))
    }

    fn hessian(&self, _x: &Point) -> Matrix2<f64> {
        let (a, b) = (self.semi_x, self.semi_y);
        Matrix2::new(2.0 / (a * a), 0.0, 0.0, 2.0 / (b * b))
    }

    fn boundary_curve(&self, t: f64) -> Option<(Point, Vector)> {
        let (s, c) = t.sin_cos();
        Some((
            Point::new(self.semi_x * c, self.semi_y * s),
            Vector::new(-self.semi_x * s, self.semi_y * c),
        ))
    }
}
