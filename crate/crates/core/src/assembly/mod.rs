//! Finite element spaces and the discrete forms of the penalty slip problem.
//!
//! Velocity is continuous piecewise linear, optionally enriched with the cubic
//! bubble `27 λ₁λ₂λ₃` per triangle; pressure is continuous piecewise linear.
//! The assembled saddle matrix is
//!
//! ```text
//! [ A + C/ε   Bᵀ ]
//! [ B        −D  ]
//! ```
//!
//! with `A` from `a_h`, `B_kj = −∫ div φ_j ψ_k`, `C` the boundary penalty on
//! `(u·n_h)(v·n_h)` and `D = ηh²(∇p, ∇q)`.

mod case;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use case::{validate_case, ManufacturedCase, ReferenceNorms, RotatingDiskCase, ZeroCase};

use crate::geometry::GeometryError;
use crate::mesh::Mesh;
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::solver::{CsrMatrix, TripletBuilder};
use crate::{Point, Vector};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("invalid element choice: {0}")]
    InvalidElement(String),
    #[error("penalty parameter must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("manufactured case rejected: {0}")]
    CaseValidation(String),
    #[error("assembled system violates an invariant: {0}")]
    Invariant(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ElementKind {
    /// Equal-order linear pair with pressure stabilization.
    #[default]
    P1,
    /// Linear velocity plus cubic bubble (MINI element).
    P1b,
}

/// Element family and stabilization weight `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementChoice {
    kind: ElementKind,
    eta: f64,
}

impl ElementChoice {
    pub const DEFAULT_ETA: f64 = 0.01;

    /// Stabilized P1/P1; `eta` must be positive.
    pub fn p1(eta: f64) -> Result<Self, AssemblyError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(AssemblyError::InvalidElement(format!(
                "P1/P1 needs a positive stabilization weight, got {eta}"
            )));
        }
        Ok(Self {
            kind: ElementKind::P1,
            eta,
        })
    }

    pub fn p1b() -> Self {
        Self {
            kind: ElementKind::P1b,
            eta: 0.0,
        }
    }

    pub fn new(kind: ElementKind, eta: f64) -> Result<Self, AssemblyError> {
        match kind {
            ElementKind::P1 => Self::p1(eta),
            ElementKind::P1b if eta == 0.0 => Ok(Self::p1b()),
            ElementKind::P1b => Err(AssemblyError::InvalidElement(format!(
                "P1b is unstabilized, eta must be 0, got {eta}"
            ))),
        }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn has_bubble(&self) -> bool {
        self.kind == ElementKind::P1b
    }
}

impl Default for ElementChoice {
    fn default() -> Self {
        Self {
            kind: ElementKind::P1,
            eta: Self::DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyScheme {
    /// Exact integration of the penalty over every boundary edge.
    #[default]
    Full,
    /// One midpoint evaluation per boundary edge.
    Reduced,
}

impl PenaltyScheme {
    /// Edge rule for the penalty form.
    pub fn edge_rule(self) -> EdgeRule {
        match self {
            PenaltyScheme::Full => EdgeRule::gauss(2),
            PenaltyScheme::Reduced => EdgeRule::midpoint(),
        }
    }
}

impl std::fmt::Display for PenaltyScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PenaltyScheme::Full => "full",
            PenaltyScheme::Reduced => "reduced",
        })
    }
}

/// How the reduced scheme samples the normal data `g` at edge midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReducedData {
    /// `g` evaluated at the midpoint.
    #[default]
    Pointwise,
    /// Mean of the vertex values, i.e. the linear interpolant at the midpoint.
    Interpolated,
}

/// Global numbering: `[u_x, u_y per vertex | bubbles per triangle | p per vertex]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    n_vertices: usize,
    n_triangles: usize,
    bubble: bool,
}

impl DofMap {
    pub fn new(mesh: &Mesh, element: &ElementChoice) -> Self {
        Self {
            n_vertices: mesh.n_vertices(),
            n_triangles: mesh.n_triangles(),
            bubble: element.has_bubble(),
        }
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_vertices + if self.bubble { 2 * self.n_triangles } else { 0 }
    }

    pub fn n_pressure(&self) -> usize {
        self.n_vertices
    }

    pub fn n_dof(&self) -> usize {
        self.n_velocity() + self.n_pressure()
    }

    pub fn has_bubble(&self) -> bool {
        self.bubble
    }

    pub fn velocity(&self, vertex: usize, component: usize) -> usize {
        2 * vertex + component
    }

    pub fn bubble(&self, triangle: usize, component: usize) -> usize {
        debug_assert!(self.bubble);
        2 * self.n_vertices + 2 * triangle + component
    }

    pub fn pressure(&self, vertex: usize) -> usize {
        self.n_velocity() + vertex
    }

    /// Scalar velocity basis functions per triangle: 3, or 4 with the bubble.
    pub fn local_basis(&self) -> usize {
        if self.bubble {
            4
        } else {
            3
        }
    }

    /// Global velocity DOFs of triangle `t`, ordered `2·a + c` for local scalar
    /// basis `a` and component `c`.
    pub fn element_velocity_dofs(&self, t: usize, tri: &[usize; 3]) -> Vec<usize> {
        let mut dofs = Vec::with_capacity(2 * self.local_basis());
        for &v in tri {
            dofs.push(self.velocity(v, 0));
            dofs.push(self.velocity(v, 1));
        }
        if self.bubble {
            dofs.push(self.bubble(t, 0));
            dofs.push(self.bubble(t, 1));
        }
        dofs
    }

    /// Velocity value of a global coefficient vector at barycentric point `l`
    /// of triangle `t`.
    pub fn eval_velocity(&self, mesh: &Mesh, u: &[f64], t: usize, l: [f64; 3]) -> Vector {
        let tri = &mesh.triangles()[t];
        let mut v = Vector::zeros();
        for (a, &vertex) in tri.iter().enumerate() {
            v += Vector::new(u[self.velocity(vertex, 0)], u[self.velocity(vertex, 1)]) * l[a];
        }
        if self.bubble {
            let b = 27.0 * l[0] * l[1] * l[2];
            v += Vector::new(u[self.bubble(t, 0)], u[self.bubble(t, 1)]) * b;
        }
        v
    }
}

/// Geometry of one triangle with its barycentric gradients.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub points: [Point; 3],
    pub area: f64,
    pub grads: [Vector; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &Mesh, t: usize) -> Self {
        let points = mesh.triangle_points(t);
        let area = mesh.area(t);
        let grads = std::array::from_fn(|i| {
            let pj = points[(i + 1) % 3];
            let pk = points[(i + 2) % 3];
            Vector::new(pj.y - pk.y, pk.x - pj.x) / (2.0 * area)
        });
        Self {
            points,
            area,
            grads,
        }
    }

    pub fn point(&self, l: [f64; 3]) -> Point {
        Point::from(
            self.points[0].coords * l[0]
                + self.points[1].coords * l[1]
                + self.points[2].coords * l[2],
        )
    }

    /// Values and gradients of the scalar velocity basis at `l`.
    pub fn velocity_basis(&self, l: [f64; 3], bubble: bool) -> (Vec<f64>, Vec<Vector>) {
        let mut values = l.to_vec();
        let mut grads = self.grads.to_vec();
        if bubble {
            values.push(27.0 * l[0] * l[1] * l[2]);
            grads.push(
                (self.grads[0] * (l[1] * l[2])
                    + self.grads[1] * (l[0] * l[2])
                    + self.grads[2] * (l[0] * l[1]))
                    * 27.0,
            );
        }
        (values, grads)
    }
}

fn volume_rule(element: &ElementChoice) -> TriangleRule {
    TriangleRule::with_degree(if element.has_bubble() { 6 } else { 2 })
}

/// `A_ij = a_h(φ_j, φ_i)` over the velocity block.
pub fn assemble_a(mesh: &Mesh, element: &ElementChoice, nu: f64) -> CsrMatrix {
    let dofs = DofMap::new(mesh, element);
    let nb = dofs.local_basis();
    let rule = volume_rule(element);
    let n = dofs.n_velocity();
    let mut builder = TripletBuilder::with_capacity(n, n, mesh.n_triangles() * 4 * nb * nb);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        let global = dofs.element_velocity_dofs(t, tri);
        let mut local = vec![0.0; 4 * nb * nb];
        let m = 2 * nb;
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let (s, g) = geo.velocity_basis(*l, dofs.bubble);
            let w = w * geo.area;
            for i in 0..nb {
                for j in 0..nb {
                    let mass = s[i] * s[j];
                    let stiff = g[i].dot(&g[j]);
                    for c in 0..2 {
                        for d in 0..2 {
                            let mut v = nu * g[i][d] * g[j][c];
                            if c == d {
                                v += mass + nu * stiff;
                            }
                            local[(2 * i + c) * m + 2 * j + d] += w * v;
                        }
                    }
                }
            }
        }
        for (p, &gi) in global.iter().enumerate() {
            for (q, &gj) in global.iter().enumerate() {
                builder.push(gi, gj, local[p * m + q]);
            }
        }
    }
    builder.build()
}

/// `B_kj = −∫ div φ_j ψ_k`, pressure rows by velocity columns.
pub fn assemble_b(mesh: &Mesh, element: &ElementChoice) -> CsrMatrix {
    let dofs = DofMap::new(mesh, element);
    let nb = dofs.local_basis();
    let rule = volume_rule(element);
    let mut builder = TripletBuilder::with_capacity(
        dofs.n_pressure(),
        dofs.n_velocity(),
        mesh.n_triangles() * 6 * nb,
    );
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        let global = dofs.element_velocity_dofs(t, tri);
        let mut local = vec![[0.0; 3]; 2 * nb];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let (_, g) = geo.velocity_basis(*l, dofs.bubble);
            let w = w * geo.area;
            for j in 0..nb {
                for c in 0..2 {
                    for k in 0..3 {
                        local[2 * j + c][k] -= w * g[j][c] * l[k];
                    }
                }
            }
        }
        for (q, &gj) in global.iter().enumerate() {
            for (k, &vertex) in tri.iter().enumerate() {
                builder.push(vertex, gj, local[q][k]);
            }
        }
    }
    builder.build()
}

/// `D = η h² (∇p, ∇q)` on the pressure block. For the bubble element this is
/// an explicit zero diagonal, so the saddle matrix keeps a full diagonal
/// pattern.
pub fn assemble_d(mesh: &Mesh, element: &ElementChoice) -> CsrMatrix {
    let n = mesh.n_vertices();
    if element.has_bubble() || element.eta() == 0.0 {
        return CsrMatrix::from_diagonal(&vec![0.0; n]);
    }
    let scale = element.eta() * mesh.h() * mesh.h();
    let mut builder = TripletBuilder::with_capacity(n, n, 9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        for i in 0..3 {
            for j in 0..3 {
                builder.push(
                    tri[i],
                    tri[j],
                    scale * geo.area * geo.grads[i].dot(&geo.grads[j]),
                );
            }
        }
    }
    builder.build()
}

/// Pressure mass matrix `(ψ_j, ψ_i)`.
pub fn assemble_pressure_mass(mesh: &Mesh) -> CsrMatrix {
    let n = mesh.n_vertices();
    let mut builder = TripletBuilder::with_capacity(n, n, 9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.area(t);
        for i in 0..3 {
            for j in 0..3 {
                let v = if i == j { area / 6.0 } else { area / 12.0 };
                builder.push(tri[i], tri[j], v);
            }
        }
    }
    builder.build()
}

/// Penalty matrix `C_ij = Σ_S Σ_q w_q |S| (φ_j·n_h)(φ_i·n_h)` with the edge rule
/// of the scheme. Bubbles vanish on edges and do not appear.
pub fn assemble_penalty(mesh: &Mesh, element: &ElementChoice, scheme: PenaltyScheme) -> CsrMatrix {
    let dofs = DofMap::new(mesh, element);
    let rule = scheme.edge_rule();
    let n = dofs.n_velocity();
    let mut builder = TripletBuilder::with_capacity(n, n, 16 * mesh.boundary_edges().len());
    for edge in mesh.boundary_edges() {
        let length = mesh.edge_length(edge);
        let normal = mesh.edge_normal(edge);
        let nn = normal * normal.transpose();
        let mut block = [[0.0; 2]; 2];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let phi = [1.0 - t, t];
            for i in 0..2 {
                for j in 0..2 {
                    block[i][j] += w * length * phi[i] * phi[j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        builder.push(
                            dofs.velocity(edge.vertices[i], c),
                            dofs.velocity(edge.vertices[j], d),
                            block[i][j] * nn[(c, d)],
                        );
                    }
                }
            }
        }
    }
    builder.build()
}

/// Velocity right-hand side `(f, v) + (τ, v)_{Γ_h} + (1/ε) c(g, v·n_h)`.
/// The pressure right-hand side is zero.
pub fn assemble_rhs(
    mesh: &Mesh,
    case: &dyn ManufacturedCase,
    element: &ElementChoice,
    epsilon: f64,
    scheme: PenaltyScheme,
    reduced_data: ReducedData,
) -> (Vec<f64>, Vec<f64>) {
    let dofs = DofMap::new(mesh, element);
    let mut rhs = vec![0.0; dofs.n_velocity()];
    let rule = TriangleRule::with_degree(6);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = ElementGeometry::new(mesh, t);
        let global = dofs.element_velocity_dofs(t, tri);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let f = case.forcing(&geo.point(*l));
            let (s, _) = geo.velocity_basis(*l, dofs.bubble);
            for (a, sa) in s.iter().enumerate() {
                for c in 0..2 {
                    rhs[global[2 * a + c]] += w * geo.area * f[c] * sa;
                }
            }
        }
    }

    let gauss3 = EdgeRule::gauss(3);
    for edge in mesh.boundary_edges() {
        let [a, b] = mesh.edge_points(edge);
        let length = mesh.edge_length(edge);
        let at = |t: f64| Point::from(a.coords * (1.0 - t) + b.coords * t);
        let vdofs = edge
            .vertices
            .map(|v| [dofs.velocity(v, 0), dofs.velocity(v, 1)]);
        for (&t, &w) in gauss3.points.iter().zip(&gauss3.weights) {
            let tau = case.traction(&at(t));
            let phi = [1.0 - t, t];
            for i in 0..2 {
                for c in 0..2 {
                    rhs[vdofs[i][c]] += w * length * tau[c] * phi[i];
                }
            }
        }
    }
    let data = assemble_penalty_data(mesh, case, element, epsilon, scheme, reduced_data);
    for (r, d) in rhs.iter_mut().zip(&data) {
        *r += d;
    }
    (rhs, vec![0.0; dofs.n_pressure()])
}

/// Penalty data term `(1/ε) c(g, v·n_h)`: the full scheme integrates the
/// vertex interpolant of `g`, the reduced scheme samples `g` at midpoints as
/// selected by `reduced_data`.
pub fn assemble_penalty_data(
    mesh: &Mesh,
    case: &dyn ManufacturedCase,
    element: &ElementChoice,
    epsilon: f64,
    scheme: PenaltyScheme,
    reduced_data: ReducedData,
) -> Vec<f64> {
    let dofs = DofMap::new(mesh, element);
    let mut data = vec![0.0; dofs.n_velocity()];
    let rule = scheme.edge_rule();
    for edge in mesh.boundary_edges() {
        let [a, b] = mesh.edge_points(edge);
        let length = mesh.edge_length(edge);
        let normal = mesh.edge_normal(edge);
        let (ga, gb) = (case.normal_data(&a), case.normal_data(&b));
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let g = match (scheme, reduced_data) {
                (PenaltyScheme::Reduced, ReducedData::Pointwise) => {
                    case.normal_data(&Point::from(a.coords * (1.0 - t) + b.coords * t))
                }
                _ => ga * (1.0 - t) + gb * t,
            };
            if g == 0.0 {
                continue;
            }
            let phi = [1.0 - t, t];
            for i in 0..2 {
                for c in 0..2 {
                    data[dofs.velocity(edge.vertices[i], c)] +=
                        w * length * g * phi[i] * normal[c] / epsilon;
                }
            }
        }
    }
    data
}

/// Blocks and data of the penalty saddle-point problem.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    pub c: CsrMatrix,
    pub b: CsrMatrix,
    pub d: CsrMatrix,
    pub rhs_velocity: Vec<f64>,
    pub rhs_pressure: Vec<f64>,
    pub epsilon: f64,
    pub scheme: PenaltyScheme,
    pub element: ElementChoice,
    pub dofs: DofMap,
}

impl SaddleSystem {
    /// `A + C/ε`.
    pub fn velocity_block(&self) -> CsrMatrix {
        self.a.add_scaled(&self.c, 1.0 / self.epsilon)
    }

    /// `[[A + C/ε, Bᵀ], [B, −D]]`.
    pub fn matrix(&self) -> CsrMatrix {
        let k = self.velocity_block();
        let bt = self.b.transpose();
        let minus_d = self.d.scaled(-1.0);
        let (nu, np) = (self.dofs.n_velocity(), self.dofs.n_pressure());
        CsrMatrix::from_blocks(
            &[
                vec![Some(&k), Some(&bt)],
                vec![Some(&self.b), Some(&minus_d)],
            ],
            &[nu, np],
            &[nu, np],
        )
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut r = self.rhs_velocity.clone();
        r.extend_from_slice(&self.rhs_pressure);
        r
    }

    pub fn n_dof(&self) -> usize {
        self.dofs.n_dof()
    }

    /// Splits a solution vector into velocity and pressure parts.
    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.dofs.n_velocity())
    }
}

fn check_symmetric(m: &CsrMatrix, name: &str) -> Result<(), AssemblyError> {
    let asym = m.asymmetry();
    let scale = m.max_abs().max(1.0);
    if asym > 1e-13 * scale {
        return Err(AssemblyError::Invariant(format!(
            "{name} is not symmetric (defect {asym:e})"
        )));
    }
    Ok(())
}

pub fn build_saddle_system(
    mesh: &Mesh,
    case: &dyn ManufacturedCase,
    element: &ElementChoice,
    epsilon: f64,
    scheme: PenaltyScheme,
    reduced_data: ReducedData,
) -> Result<SaddleSystem, AssemblyError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(AssemblyError::InvalidEpsilon(epsilon));
    }
    let a = assemble_a(mesh, element, case.nu());
    let c = assemble_penalty(mesh, element, scheme);
    let b = assemble_b(mesh, element);
    let d = assemble_d(mesh, element);
    check_symmetric(&a, "A")?;
    check_symmetric(&c, "C")?;
    check_symmetric(&d, "D")?;
    let dofs = DofMap::new(mesh, element);
    for (i, _, v) in c.iter() {
        if v != 0.0 && (i >= 2 * mesh.n_vertices() || !mesh.is_boundary_vertex(i / 2)) {
            return Err(AssemblyError::Invariant(format!(
                "penalty touches interior DOF {i}"
            )));
        }
    }
    let (rhs_velocity, rhs_pressure) =
        assemble_rhs(mesh, case, element, epsilon, scheme, reduced_data);
    Ok(SaddleSystem {
        a,
        c,
        b,
        d,
        rhs_velocity,
        rhs_pressure,
        epsilon,
        scheme,
        element: *element,
        dofs,
    })
}

/// Stokes system with `u = ũ` imposed at boundary vertices by symmetric
/// elimination. Without a penalty the pressure is determined only up to a
/// constant, so one pressure DOF is fixed to the exact value as well.
#[derive(Debug, Clone)]
pub struct DirichletSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    /// Prescribed value for every constrained DOF.
    pub constrained: Vec<Option<f64>>,
    pub pinned_pressure_vertex: usize,
}

impl DirichletSystem {
    pub fn n_dof(&self) -> usize {
        self.dofs.n_dof()
    }
}

/// Interior vertex closest to the centroid of all vertices.
fn pressure_pin_vertex(mesh: &Mesh) -> usize {
    let n = mesh.n_vertices() as f64;
    let centroid = mesh
        .vertices()
        .iter()
        .fold(Vector::zeros(), |s, p| s + p.coords)
        / n;
    (0..mesh.n_vertices())
        .filter(|&v| !mesh.is_boundary_vertex(v))
        .min_by(|&a, &b| {
            let da = (mesh.vertices()[a].coords - centroid).norm();
            let db = (mesh.vertices()[b].coords - centroid).norm();
            da.total_cmp(&db)
        })
        .unwrap_or(0)
}

pub fn build_dirichlet_system(
    mesh: &Mesh,
    case: &dyn ManufacturedCase,
    element: &ElementChoice,
) -> DirichletSystem {
    let dofs = DofMap::new(mesh, element);
    let a = assemble_a(mesh, element, case.nu());
    let b = assemble_b(mesh, element);
    let d = assemble_d(mesh, element);
    let (nu, np) = (dofs.n_velocity(), dofs.n_pressure());
    let bt = b.transpose();
    let minus_d = d.scaled(-1.0);
    let full = CsrMatrix::from_blocks(
        &[vec![Some(&a), Some(&bt)], vec![Some(&b), Some(&minus_d)]],
        &[nu, np],
        &[nu, np],
    );
    let (rhs_velocity, _) = assemble_rhs(
        mesh,
        case,
        element,
        1.0,
        PenaltyScheme::Full,
        ReducedData::Pointwise,
    );
    let mut rhs = rhs_velocity;
    rhs.extend(std::iter::repeat_n(0.0, np));

    let mut constrained = vec![None; dofs.n_dof()];
    for (v, p) in mesh.vertices().iter().enumerate() {
        if mesh.is_boundary_vertex(v) {
            let u = case.velocity(p);
            constrained[dofs.velocity(v, 0)] = Some(u.x);
            constrained[dofs.velocity(v, 1)] = Some(u.y);
        }
    }
    let pin = pressure_pin_vertex(mesh);
    constrained[dofs.pressure(pin)] = Some(case.pressure(&mesh.vertices()[pin]));

    let n = dofs.n_dof();
    let mut builder = TripletBuilder::with_capacity(n, n, full.nnz());
    for (i, j, v) in full.iter() {
        match (constrained[i], constrained[j]) {
            (None, None) => builder.push(i, j, v),
            (None, Some(value)) => rhs[i] -= v * value,
            _ => {}
        }
    }
    for (i, c) in constrained.iter().enumerate() {
        if let Some(value) = c {
            builder.push(i, i, 1.0);
            rhs[i] = *value;
        }
    }
    DirichletSystem {
        matrix: builder.build(),
        rhs,
        dofs,
        constrained,
        pinned_pressure_vertex: pin,
    }
}
