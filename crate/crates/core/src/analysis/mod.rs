//! Error norms, multiplier recovery, boundary diagnostics and rate studies.

mod study;

use serde::Serialize;
use thiserror::Error;

pub use study::{
    convergence_study, epsilon_sweep, geometry_rates, geometry_study, kappa_slope, mesh_sequence,
    solve_linear, write_convergence_csv, write_geometry_csv, write_sweep_csv, Comparator,
    ConvergenceRecord, EpsRule, GeometryRecord, SolverConfig, StudyConfig, SweepConfig, SweepRow,
};

use crate::assembly::{
    assemble_penalty_data, AssemblyError, DofMap, ElementGeometry, ManufacturedCase, PenaltyScheme,
    ReducedData, SaddleSystem,
};
use crate::geometry::{GeometryError, SmoothDomain};
use crate::mesh::{Mesh, MeshError};
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::solver::{norm2, SolverError};
use crate::{Point, Vector};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

/// Errors of a discrete solution against the exact one on `Ω_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub l2_velocity: f64,
    /// Full H¹ norm, `(‖e‖² + ‖∇e‖²)^{1/2}`.
    pub h1_velocity: f64,
    /// `‖(p̃ + k_h) − p_h‖`.
    pub l2_pressure: f64,
    /// Mean of `p_h − p̃` over `Ω_h`.
    pub k_h: f64,
    /// `max |u_h·n_h|` over two Gauss points per boundary edge.
    pub boundary_penetration: f64,
    /// Mean `|u_h|` over boundary edge midpoints.
    pub boundary_speed: f64,
}

/// Velocity gradient of the discrete field on triangle `t`; row `i` is `∇u_i`.
fn eval_velocity_gradient(
    dofs: &DofMap,
    geo: &ElementGeometry,
    tri: &[usize; 3],
    t: usize,
    u: &[f64],
    l: [f64; 3],
) -> nalgebra::Matrix2<f64> {
    let (_, grads) = geo.velocity_basis(l, dofs.has_bubble());
    let mut g = nalgebra::Matrix2::zeros();
    for (a, grad) in grads.iter().enumerate() {
        let coef = if a < 3 {
            Vector::new(u[dofs.velocity(tri[a], 0)], u[dofs.velocity(tri[a], 1)])
        } else {
            Vector::new(u[dofs.bubble(t, 0)], u[dofs.bubble(t, 1)])
        };
        g += coef * grad.transpose();
    }
    g
}

fn eval_pressure(tri: &[usize; 3], p: &[f64], l: [f64; 3]) -> f64 {
    (0..3).map(|a| p[tri[a]] * l[a]).sum()
}

/// L² and H¹ velocity errors and the shifted L² pressure error, by degree-5
/// quadrature against the closed-form fields. `u` holds the velocity block,
/// `p` the pressure block.
pub fn error_norms(
    mesh: &Mesh,
    dofs: &DofMap,
    u: &[f64],
    p: &[f64],
    case: &dyn ManufacturedCase,
) -> ErrorReport {
    assert_eq!(u.len(), dofs.n_velocity());
    assert_eq!(p.len(), dofs.n_pressure());
    let rule = TriangleRule::with_degree(5);

    let mut mean_shift = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.point(*l);
            mean_shift += w * geo.area * (eval_pressure(tri, p, *l) - case.pressure(&x));
        }
    }
    let k_h = mean_shift / mesh.total_area();

    let (mut l2u, mut h1u, mut l2p) = (0.0, 0.0, 0.0);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.point(*l);
            let w = w * geo.area;
            let eu = case.velocity(&x) - dofs.eval_velocity(mesh, u, t, *l);
            let eg = case.velocity_gradient(&x) - eval_velocity_gradient(dofs, &geo, tri, t, u, *l);
            let ep = case.pressure(&x) + k_h - eval_pressure(tri, p, *l);
            l2u += w * eu.norm_squared();
            h1u += w * eg.norm_squared();
            l2p += w * ep * ep;
        }
    }
    let slip = boundary_slip_report(mesh, dofs, u);
    ErrorReport {
        l2_velocity: l2u.sqrt(),
        h1_velocity: (l2u + h1u).sqrt(),
        l2_pressure: l2p.sqrt(),
        k_h,
        boundary_penetration: slip.penetration,
        boundary_speed: slip.speed,
    }
}

/// Norms of the exact fields on `Ω_h` (errors of the zero solution).
pub fn exact_norms(mesh: &Mesh, dofs: &DofMap, case: &dyn ManufacturedCase) -> ErrorReport {
    error_norms(
        mesh,
        dofs,
        &vec![0.0; dofs.n_velocity()],
        &vec![0.0; dofs.n_pressure()],
        case,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlipReport {
    /// `max |u_h·n_h|` over two Gauss points per boundary edge.
    pub penetration: f64,
    /// Mean `|u_h|` over boundary edge midpoints.
    pub speed: f64,
}

fn edge_trace(dofs: &DofMap, u: &[f64], vertices: [usize; 2], t: f64) -> Vector {
    // Bubbles vanish on edges.
    let va = Vector::new(
        u[dofs.velocity(vertices[0], 0)],
        u[dofs.velocity(vertices[0], 1)],
    );
    let vb = Vector::new(
        u[dofs.velocity(vertices[1], 0)],
        u[dofs.velocity(vertices[1], 1)],
    );
    va * (1.0 - t) + vb * t
}

pub fn boundary_slip_report(mesh: &Mesh, dofs: &DofMap, u: &[f64]) -> SlipReport {
    let gauss = EdgeRule::gauss(2);
    let mut penetration = 0.0f64;
    let mut speed = 0.0;
    let edges = mesh.boundary_edges();
    for edge in edges {
        let n = mesh.edge_normal(edge);
        for &t in &gauss.points {
            penetration = penetration.max(edge_trace(dofs, u, edge.vertices, t).dot(&n).abs());
        }
        speed += edge_trace(dofs, u, edge.vertices, 0.5).norm();
    }
    SlipReport {
        penetration,
        speed: if edges.is_empty() {
            0.0
        } else {
            speed / edges.len() as f64
        },
    }
}

/// Recovered normal multiplier on one boundary edge: values at both endpoints
/// (full scheme) or at the midpoint only (reduced scheme).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMultiplier {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
}

impl EdgeMultiplier {
    /// Value at edge parameter `t`, linear between the sample points.
    pub fn at(&self, t: f64) -> f64 {
        match self.values.as_slice() {
            [v] => *v,
            [a, b] => a * (1.0 - t) + b * t,
            _ => unreachable!("one or two samples per edge"),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `λ_h = (1/ε)(u_h·n_h − g)` per boundary edge, in boundary-edge order.
pub fn recover_lambda(
    mesh: &Mesh,
    dofs: &DofMap,
    u: &[f64],
    case: &dyn ManufacturedCase,
    epsilon: f64,
    scheme: PenaltyScheme,
    reduced_data: ReducedData,
) -> Vec<EdgeMultiplier> {
    mesh.boundary_edges()
        .iter()
        .map(|edge| {
            let [a, b] = mesh.edge_points(edge);
            let n = mesh.edge_normal(edge);
            let points = match scheme {
                PenaltyScheme::Full => vec![0.0, 1.0],
                PenaltyScheme::Reduced => vec![0.5],
            };
            let values = points
                .iter()
                .map(|&t| {
                    let g = match (scheme, reduced_data) {
                        (PenaltyScheme::Reduced, ReducedData::Pointwise) => {
                            case.normal_data(&Point::from(a.coords * (1.0 - t) + b.coords * t))
                        }
                        _ => case.normal_data(&a) * (1.0 - t) + case.normal_data(&b) * t,
                    };
                    (edge_trace(dofs, u, edge.vertices, t).dot(&n) - g) / epsilon
                })
                .collect();
            EdgeMultiplier { points, values }
        })
        .collect()
}

/// Relative residual of `c(λ_h, v·n_h) = (1/ε)(C u − c(g, v·n_h))` over all
/// velocity test functions.
pub fn lambda_identity_residual(
    mesh: &Mesh,
    system: &SaddleSystem,
    u: &[f64],
    lambda: &[EdgeMultiplier],
    case: &dyn ManufacturedCase,
    reduced_data: ReducedData,
) -> f64 {
    let dofs = &system.dofs;
    let rule = system.scheme.edge_rule();
    let mut from_lambda = vec![0.0; dofs.n_velocity()];
    for (edge, lam) in mesh.boundary_edges().iter().zip(lambda) {
        let length = mesh.edge_length(edge);
        let n = mesh.edge_normal(edge);
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let phi = [1.0 - t, t];
            for i in 0..2 {
                for c in 0..2 {
                    from_lambda[dofs.velocity(edge.vertices[i], c)] +=
                        w * length * lam.at(t) * phi[i] * n[c];
                }
            }
        }
    }
    let data = assemble_penalty_data(
        mesh,
        case,
        &system.element,
        system.epsilon,
        system.scheme,
        reduced_data,
    );
    let cu = system.c.mul_vec(u);
    let direct: Vec<f64> = cu
        .iter()
        .zip(&data)
        .map(|(c, d)| c / system.epsilon - d)
        .collect();
    let diff: Vec<f64> = direct
        .iter()
        .zip(&from_lambda)
        .map(|(a, b)| a - b)
        .collect();
    let scale = norm2(&direct);
    if scale == 0.0 {
        norm2(&diff)
    } else {
        norm2(&diff) / scale
    }
}

/// `max_S |mean λ_h(S) − k_h − λ(π(m_S))|` with `λ = −σn·n` of the exact
/// solution.
pub fn lambda_defect(
    mesh: &Mesh,
    domain: &SmoothDomain,
    lambda: &[EdgeMultiplier],
    case: &dyn ManufacturedCase,
    k_h: f64,
) -> Result<f64, GeometryError> {
    let mut worst = 0.0f64;
    for (edge, lam) in mesh.boundary_edges().iter().zip(lambda) {
        let [a, b] = mesh.edge_points(edge);
        let proj = domain.project(&Point::from((a.coords + b.coords) * 0.5))?;
        let n = proj.normal_at_foot;
        let exact = -n.dot(&(case.stress(&proj.foot) * n));
        worst = worst.max((lam.mean() - k_h - exact).abs());
    }
    Ok(worst)
}

/// `log(e_prev/e_cur) / log(h_prev/h_cur)`; NaN when the mesh sizes coincide.
pub fn rate(e_prev: f64, e_cur: f64, h_prev: f64, h_cur: f64) -> f64 {
    if h_prev == h_cur {
        return f64::NAN;
    }
    (e_prev / e_cur).ln() / (h_prev / h_cur).ln()
}

/// Two decimals, `(<0)` for negative rates and `-` when undefined.
pub fn format_rate(r: f64) -> String {
    if r.is_nan() {
        "-".to_string()
    } else if r < 0.0 {
        "(<0)".to_string()
    } else {
        format!("{r:.2}")
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
