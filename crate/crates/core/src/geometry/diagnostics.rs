//! How well the polygon `Γ_h` of a fitted mesh approximates `Γ`.

use std::f64::consts::{PI, TAU};

use super::{GeometryError, SmoothDomain};
use crate::mesh::Mesh;
use crate::quadrature::EdgeRule;
use crate::Point;

/// Trapezoid nodes used for the exact boundary integral.
const PARAMETRIC_NODES: usize = 4096;
/// Samples per boundary edge in the injectivity check.
const INJECTIVITY_SAMPLES: usize = 16;

/// Maxima of `|n∘π − n_h|` on `Γ_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalDefect {
    /// Over the two Gauss nodes of every boundary edge.
    pub max_over_edges: f64,
    /// Over the edge midpoints only.
    pub max_at_midpoints: f64,
}

fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    Point::from(a.coords * (1.0 - t) + b.coords * t)
}

pub fn normal_defect(mesh: &Mesh, domain: &SmoothDomain) -> Result<NormalDefect, GeometryError> {
    let gauss = EdgeRule::gauss(2);
    let mut result = NormalDefect {
        max_over_edges: 0.0,
        max_at_midpoints: 0.0,
    };
    for edge in mesh.boundary_edges() {
        let [a, b] = mesh.edge_points(edge);
        let nh = mesh.edge_normal(edge);
        for &t in &gauss.points {
            let n = domain.project(&lerp(&a, &b, t))?.normal_at_foot;
            result.max_over_edges = result.max_over_edges.max((n - nh).norm());
        }
        let n = domain.project(&lerp(&a, &b, 0.5))?.normal_at_foot;
        result.max_at_midpoints = result.max_at_midpoints.max((n - nh).norm());
    }
    Ok(result)
}

/// `|∫_Γ f dγ − ∫_{Γ_h} f∘π dγ_h|`; the first integral uses the boundary
/// parametrization, the second three Gauss nodes per edge.
pub fn surface_integral_defect<F>(
    mesh: &Mesh,
    domain: &SmoothDomain,
    f: F,
) -> Result<f64, GeometryError>
where
    F: Fn(&Point) -> f64,
{
    let exact = domain.boundary_integral(&f, PARAMETRIC_NODES)?;
    let gauss = EdgeRule::gauss(3);
    let mut discrete = 0.0;
    for edge in mesh.boundary_edges() {
        let [a, b] = mesh.edge_points(edge);
        let length = (b - a).norm();
        for (&t, &w) in gauss.points.iter().zip(&gauss.weights) {
            let foot = domain.project(&lerp(&a, &b, t))?.foot;
            discrete += w * length * f(&foot);
        }
    }
    Ok((exact - discrete).abs())
}

/// `max |d(x)|` over the three Gauss nodes of every boundary edge.
pub fn boundary_distance_max(mesh: &Mesh, domain: &SmoothDomain) -> Result<f64, GeometryError> {
    let gauss = EdgeRule::gauss(3);
    let mut worst = 0.0f64;
    for edge in mesh.boundary_edges() {
        let [a, b] = mesh.edge_points(edge);
        for &t in &gauss.points {
            worst = worst.max(domain.signed_distance(&lerp(&a, &b, t))?.abs());
        }
    }
    Ok(worst)
}

/// Whether `π` restricted to `Γ_h` is injective on 16 samples per edge.
pub fn projection_injectivity_check(mesh: &Mesh, domain: &SmoothDomain) -> bool {
    projection_injective_on_loop(domain, &mesh.boundary_loop())
}

/// Same check for an arbitrary closed polygon given as a vertex loop: the
/// polar angles of the projected samples must increase strictly and wind
/// exactly once around the domain center.
pub fn projection_injective_on_loop(domain: &SmoothDomain, polygon: &[Point]) -> bool {
    if polygon.len() < 3 {
        return false;
    }
    let center = domain.center();
    let mut angles = Vec::with_capacity(polygon.len() * INJECTIVITY_SAMPLES);
    for (i, a) in polygon.iter().enumerate() {
        let b = &polygon[(i + 1) % polygon.len()];
        for k in 0..INJECTIVITY_SAMPLES {
            let t = k as f64 / INJECTIVITY_SAMPLES as f64;
            let Ok(proj) = domain.project(&lerp(a, b, t)) else {
                return false;
            };
            let v = proj.foot - center;
            angles.push(v.y.atan2(v.x));
        }
    }
    let mut total = 0.0;
    for i in 0..angles.len() {
        let mut step = angles[(i + 1) % angles.len()] - angles[i];
        if step <= -PI {
            step += TAU;
        } else if step > PI {
            step -= TAU;
        }
        if step <= 0.0 {
            return false;
        }
        total += step;
    }
    (total - TAU).abs() < 1e-9
}
