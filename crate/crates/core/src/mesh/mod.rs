//! Triangulations of smooth domains: structured disk meshes, red refinement
//! with boundary snapping, quality statistics and Triangle-format I/O.
//!
//! A [`Mesh`] is validated on construction: counterclockwise triangles with
//! positive area, conforming edges (shared by at most two triangles), disk
//! topology (`V − E + F = 1`). Fitting to a curved boundary is checked
//! separately with [`Mesh::check_boundary_fit`] since it depends on the domain.

mod io;

pub use io::{export_triangle, import_triangle, read_triangle, write_triangle};

use std::f64::consts::TAU;

use thiserror::Error;

use crate::geometry::{Ellipse, GeometryError, SmoothDomain};
use crate::{Point, Vector};

/// Boundary vertices must satisfy `|d(x)| ≤ BOUNDARY_FIT_TOL`.
pub const BOUNDARY_FIT_TOL: f64 = 1e-12;
/// Refinement fails if the shape-regularity ratio drops below this value.
pub const MIN_REFINED_QUALITY: f64 = 0.10;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("topology error: {0}")]
    Topology(String),
    #[error("parse error in {file} at line {line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("refined mesh quality {quality:.4} is below {threshold}")]
    QualityDegradation { quality: f64, threshold: f64 },
    #[error("boundary vertex {vertex} lies at distance {distance:e} from the boundary")]
    BoundaryFit { vertex: usize, distance: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Edge of `Γ_h`, oriented so that the interior lies to its left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    boundary_edges: Vec<BoundaryEdge>,
    is_boundary_vertex: Vec<bool>,
    markers: Vec<i32>,
    h: f64,
}

/// Summary returned by [`Mesh::stats`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeshStats {
    pub h: f64,
    pub min_quality: f64,
    pub boundary_edge_max: f64,
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub n_boundary_edges: usize,
    pub n_dof_p1: usize,
    pub n_dof_p1b: usize,
}

impl Mesh {
    /// Builds and validates a mesh. Boundary markers default to 1 on boundary
    /// vertices and 0 elsewhere.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::with_markers(vertices, triangles, None)
    }

    pub fn with_markers(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        markers: Option<Vec<i32>>,
    ) -> Result<Self, MeshError> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(MeshError::Topology("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(MeshError::Topology(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Topology(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
            let area = signed_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area.is_nan() || area <= 0.0 {
                return Err(MeshError::Topology(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }

        // (min, max, triangle, directed start) sorted for deterministic order.
        let mut half_edges: Vec<(usize, usize, usize, usize)> =
            Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                half_edges.push((a.min(b), a.max(b), t, a));
            }
        }
        half_edges.sort_unstable();

        let mut edges = Vec::new();
        let mut boundary = Vec::new();
        let mut i = 0;
        while i < half_edges.len() {
            let (a, b, t, start) = half_edges[i];
            let mut j = i + 1;
            while j < half_edges.len() && half_edges[j].0 == a && half_edges[j].1 == b {
                j += 1;
            }
            match j - i {
                1 => {
                    let other = if start == a { b } else { a };
                    boundary.push(BoundaryEdge {
                        vertices: [start, other],
                        triangle: t,
                    });
                }
                2 => {
                    if half_edges[i].3 == half_edges[i + 1].3 {
                        return Err(MeshError::Topology(format!(
                            "edge ({a}, {b}) has inconsistent orientation"
                        )));
                    }
                }
                n => {
                    return Err(MeshError::Topology(format!(
                        "edge ({a}, {b}) is shared by {n} triangles"
                    )));
                }
            }
            edges.push([a, b]);
            i = j;
        }

        let mut used = vec![false; nv];
        for tri in &triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::Topology(format!(
                "vertex {v} belongs to no triangle"
            )));
        }

        let euler = nv as i64 - edges.len() as i64 + triangles.len() as i64;
        if euler != 1 {
            return Err(MeshError::Topology(format!(
                "Euler characteristic V - E + F = {euler}, expected 1 for a disk"
            )));
        }

        let boundary_edges = chain_boundary(boundary)?;
        let mut is_boundary_vertex = vec![false; nv];
        for e in &boundary_edges {
            is_boundary_vertex[e.vertices[0]] = true;
            is_boundary_vertex[e.vertices[1]] = true;
        }

        let markers = match markers {
            Some(m) if m.len() == nv => m,
            Some(m) => {
                return Err(MeshError::Topology(format!(
                    "{} markers for {nv} vertices",
                    m.len()
                )))
            }
            None => is_boundary_vertex.iter().map(|&b| i32::from(b)).collect(),
        };

        let h = edges
            .iter()
            .map(|&[a, b]| (vertices[a] - vertices[b]).norm())
            .fold(0.0, f64::max);

        Ok(Self {
            vertices,
            triangles,
            edges,
            boundary_edges,
            is_boundary_vertex,
            markers,
            h,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// All edges as sorted vertex pairs, in lexicographic order.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Boundary edges, chained into a single counterclockwise loop.
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary_vertex[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.is_boundary_vertex
    }

    pub fn markers(&self) -> &[i32] {
        &self.markers
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Maximum edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(&a, &b, &c)
    }

    /// `|Ω_h|`.
    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.area(t)).sum()
    }

    /// Endpoints of a boundary edge.
    pub fn edge_points(&self, edge: &BoundaryEdge) -> [Point; 2] {
        [
            self.vertices[edge.vertices[0]],
            self.vertices[edge.vertices[1]],
        ]
    }

    /// Outward unit normal `n_h` of a boundary edge.
    pub fn edge_normal(&self, edge: &BoundaryEdge) -> Vector {
        let [a, b] = self.edge_points(edge);
        let t = b - a;
        Vector::new(t.y, -t.x) / t.norm()
    }

    pub fn edge_length(&self, edge: &BoundaryEdge) -> f64 {
        let [a, b] = self.edge_points(edge);
        (b - a).norm()
    }

    /// Boundary polygon `Γ_h` as a counterclockwise vertex loop.
    pub fn boundary_loop(&self) -> Vec<Point> {
        self.boundary_edges
            .iter()
            .map(|e| self.vertices[e.vertices[0]])
            .collect()
    }

    /// Checks hypothesis (H5): boundary vertices lie on `Γ` within `tol`.
    pub fn check_boundary_fit(&self, domain: &SmoothDomain, tol: f64) -> Result<f64, MeshError> {
        let mut worst = 0.0f64;
        for (v, p) in self.vertices.iter().enumerate() {
            if !self.is_boundary_vertex[v] {
                continue;
            }
            let distance = domain.signed_distance(p)?;
            if distance.abs() > tol {
                return Err(MeshError::BoundaryFit {
                    vertex: v,
                    distance,
                });
            }
            worst = worst.max(distance.abs());
        }
        Ok(worst)
    }

    /// Moves every boundary vertex to its projection onto `Γ`; interior
    /// vertices are untouched.
    pub fn snap_boundary(&self, domain: &SmoothDomain) -> Result<Mesh, MeshError> {
        let mut vertices = self.vertices.clone();
        for (v, p) in vertices.iter_mut().enumerate() {
            if self.is_boundary_vertex[v] {
                *p = domain.project(p)?.foot;
            }
        }
        Mesh::with_markers(vertices, self.triangles.clone(), Some(self.markers.clone()))
    }

    pub fn stats(&self) -> MeshStats {
        let min_quality = (0..self.n_triangles())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                triangle_quality(&a, &b, &c)
            })
            .fold(f64::INFINITY, f64::min);
        let boundary_edge_max = self
            .boundary_edges
            .iter()
            .map(|e| self.edge_length(e))
            .fold(0.0, f64::max);
        let nv = self.n_vertices();
        let nt = self.n_triangles();
        MeshStats {
            h: self.h,
            min_quality,
            boundary_edge_max,
            n_vertices: nv,
            n_triangles: nt,
            n_boundary_edges: self.boundary_edges.len(),
            n_dof_p1: 3 * nv,
            n_dof_p1b: 3 * nv + 2 * nt,
        }
    }
}

pub fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Shape-regularity ratio `inradius / diameter`; `1/(2√3)` for an equilateral
/// triangle.
pub fn triangle_quality(a: &Point, b: &Point, c: &Point) -> f64 {
    let lengths = [(b - a).norm(), (c - b).norm(), (a - c).norm()];
    let perimeter: f64 = lengths.iter().sum();
    let inradius = 2.0 * signed_area(a, b, c).abs() / perimeter;
    let diameter = lengths.iter().copied().fold(0.0, f64::max);
    inradius / diameter
}

fn chain_boundary(mut edges: Vec<BoundaryEdge>) -> Result<Vec<BoundaryEdge>, MeshError> {
    if edges.is_empty() {
        return Err(MeshError::Topology("mesh has no boundary".into()));
    }
    edges.sort_by_key(|e| e.vertices);
    let mut next_of = std::collections::BTreeMap::new();
    for (k, e) in edges.iter().enumerate() {
        if next_of.insert(e.vertices[0], k).is_some() {
            return Err(MeshError::Topology(format!(
                "boundary is not a simple loop at vertex {}",
                e.vertices[0]
            )));
        }
    }
    let mut ordered = Vec::with_capacity(edges.len());
    let mut k = 0;
    for _ in 0..edges.len() {
        let e = edges[k];
        ordered.push(e);
        match next_of.get(&e.vertices[1]) {
            Some(&n) => k = n,
            None => {
                return Err(MeshError::Topology(format!(
                    "boundary is open at vertex {}",
                    e.vertices[1]
                )))
            }
        }
    }
    if k != 0 || ordered.len() != edges.len() {
        return Err(MeshError::Topology(
            "boundary consists of more than one loop".into(),
        ));
    }
    Ok(ordered)
}

/// Concentric-ring triangulation of the unit disk: ring `k = 1..=rings` has
/// radius `k / rings` and `6k` equally spaced vertices; `6 rings²` triangles.
pub fn build_disk_mesh(rings: usize) -> Result<Mesh, MeshError> {
    if rings == 0 {
        return Err(MeshError::Topology(
            "a disk mesh needs at least one ring".into(),
        ));
    }
    let m = rings;
    let ring_start = |k: usize| if k == 0 { 0 } else { 1 + 3 * k * (k - 1) };

    let mut vertices = Vec::with_capacity(1 + 3 * m * (m + 1));
    vertices.push(Point::origin());
    for k in 1..=m {
        let n = 6 * k;
        let radius = k as f64 / m as f64;
        for j in 0..n {
            let (s, c) = (TAU * j as f64 / n as f64).sin_cos();
            vertices.push(Point::new(radius * c, radius * s));
        }
    }

    let mut triangles = Vec::with_capacity(6 * m * m);
    for k in 1..=m {
        let inner = |s: usize, j: usize| {
            if k == 1 {
                0
            } else {
                ring_start(k - 1) + (s * (k - 1) + j) % (6 * (k - 1))
            }
        };
        let outer = |s: usize, j: usize| ring_start(k) + (s * k + j) % (6 * k);
        for s in 0..6 {
            for j in 0..k {
                triangles.push([inner(s, j), outer(s, j), outer(s, j + 1)]);
            }
            for j in 0..k - 1 {
                triangles.push([inner(s, j), outer(s, j + 1), inner(s, j + 1)]);
            }
        }
    }
    Mesh::new(vertices, triangles)
}

/// Uniform red refinement: every triangle splits into four, boundary edge
/// midpoints are projected onto `Γ`, interior midpoints stay on their edges.
pub fn refine(mesh: &Mesh, domain: &SmoothDomain) -> Result<Mesh, MeshError> {
    let nv = mesh.n_vertices();
    let mut vertices = mesh.vertices.clone();
    let mut markers = mesh.markers.clone();
    vertices.reserve(mesh.edges.len());

    let mut boundary_marker = std::collections::BTreeMap::new();
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        let marker = if mesh.markers[a] == mesh.markers[b] {
            mesh.markers[a]
        } else {
            mesh.markers[a].max(mesh.markers[b])
        };
        boundary_marker.insert([a.min(b), a.max(b)], marker.max(1));
    }

    for edge in &mesh.edges {
        let [a, b] = *edge;
        let mid = Point::from((mesh.vertices[a].coords + mesh.vertices[b].coords) * 0.5);
        match boundary_marker.get(edge) {
            Some(&marker) => {
                vertices.push(domain.project(&mid)?.foot);
                markers.push(marker);
            }
            None => {
                vertices.push(mid);
                markers.push(0);
            }
        }
    }

    let midpoint = |a: usize, b: usize| -> usize {
        let key = [a.min(b), a.max(b)];
        nv + mesh
            .edges
            .binary_search(&key)
            .expect("every triangle edge is in the edge list")
    };

    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    for &[a, b, c] in &mesh.triangles {
        let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }

    let refined = Mesh::with_markers(vertices, triangles, Some(markers))?;
    let quality = refined.stats().min_quality;
    if quality < MIN_REFINED_QUALITY {
        return Err(MeshError::QualityDegradation {
            quality,
            threshold: MIN_REFINED_QUALITY,
        });
    }
    Ok(refined)
}

/// Applies [`refine`] `times` times.
pub fn refine_n(mesh: &Mesh, domain: &SmoothDomain, times: usize) -> Result<Mesh, MeshError> {
    let mut current = mesh.clone();
    for _ in 0..times {
        current = refine(&current, domain)?;
    }
    Ok(current)
}

/// Maps every vertex through `map` and rebuilds the mesh (same connectivity).
pub fn map_vertices<F>(mesh: &Mesh, map: F) -> Result<Mesh, MeshError>
where
    F: Fn(&Point) -> Point,
{
    Mesh::with_markers(
        mesh.vertices.iter().map(map).collect(),
        mesh.triangles.clone(),
        Some(mesh.markers.clone()),
    )
}

/// Disk mesh stretched to the ellipse with semi-axes `a`, `b`, boundary
/// vertices snapped onto it.
pub fn build_ellipse_mesh(rings: usize, a: f64, b: f64) -> Result<Mesh, MeshError> {
    let disk = build_disk_mesh(rings)?;
    let stretched = map_vertices(&disk, |p| Point::new(a * p.x, b * p.y))?;
    stretched.snap_boundary(&Ellipse::new(a, b).domain())
}
