//! Refinement studies and penalty sweeps.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{error_norms, loglog_slope, rate, AnalysisError, ErrorReport};
use crate::assembly::{
    build_dirichlet_system, build_saddle_system, DofMap, ElementChoice, ManufacturedCase,
    PenaltyScheme, ReducedData,
};
use crate::geometry::SmoothDomain;
use crate::geometry::{
    boundary_distance_max, normal_defect, projection_injectivity_check, surface_integral_defect,
};
use crate::mesh::{refine, Mesh};
use crate::solver::{
    bicgstab_solve, condition_estimate, dense_lu_solve, gmres_solve, CsrMatrix, IterativeOptions,
    Method, Preconditioner, SolveReport, SolverError, DENSE_LU_MAX_DIM,
};

/// How `ε` follows the mesh size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsRule {
    /// `ε = c·h`.
    LinearH(f64),
    /// `ε = c·h²`.
    QuadraticH(f64),
    Fixed(f64),
}

impl EpsRule {
    pub fn epsilon(&self, h: f64) -> f64 {
        match *self {
            EpsRule::LinearH(c) => c * h,
            EpsRule::QuadraticH(c) => c * h * h,
            EpsRule::Fixed(e) => e,
        }
    }
}

impl Default for EpsRule {
    fn default() -> Self {
        EpsRule::QuadraticH(0.1)
    }
}

impl std::fmt::Display for EpsRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpsRule::LinearH(c) => write!(f, "{c}h"),
            EpsRule::QuadraticH(c) => write!(f, "{c}h^2"),
            EpsRule::Fixed(e) => write!(f, "{e:e}"),
        }
    }
}

/// Accepts `0.1h`, `0.1h^2` (or `0.1h2`) and plain numbers.
impl FromStr for EpsRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse = |t: &str| -> Result<f64, String> {
            let t = if t.is_empty() { "1" } else { t };
            let c: f64 = t
                .parse()
                .map_err(|_| format!("invalid coefficient in eps rule {s:?}"))?;
            if c > 0.0 && c.is_finite() {
                Ok(c)
            } else {
                Err(format!("eps rule coefficient must be positive, got {s:?}"))
            }
        };
        if let Some(c) = s.strip_suffix("h^2").or_else(|| s.strip_suffix("h2")) {
            Ok(EpsRule::QuadraticH(parse(c)?))
        } else if let Some(c) = s.strip_suffix('h') {
            Ok(EpsRule::LinearH(parse(c)?))
        } else {
            Ok(EpsRule::Fixed(parse(s)?))
        }
    }
}

/// Which discretization a study runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Penalty(PenaltyScheme),
    /// Velocity prescribed at boundary vertices; no penalty.
    Dirichlet,
}

impl Comparator {
    pub fn label(&self) -> &'static str {
        match self {
            Comparator::Penalty(PenaltyScheme::Full) => "non-reduced",
            Comparator::Penalty(PenaltyScheme::Reduced) => "reduced",
            Comparator::Dirichlet => "dirichlet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: Method,
    pub options: IterativeOptions,
    /// Largest system the dense LU path accepts.
    pub dense_cap: usize,
}

impl SolverConfig {
    /// GMRES(200) with ILU(0) and relative tolerance 1e-8.
    pub fn convergence_default() -> Self {
        Self {
            method: Method::Gmres,
            options: IterativeOptions {
                rel_tol: 1e-8,
                ..IterativeOptions::with_restart(200)
            },
            dense_cap: DENSE_LU_MAX_DIM,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::convergence_default()
    }
}

/// Solves with the configured method; the dense path honours `dense_cap`.
pub fn solve_linear(
    a: &CsrMatrix,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    match cfg.method {
        Method::Gmres => Ok(gmres_solve(a, b, &cfg.options)),
        Method::Bicgstab => Ok(bicgstab_solve(a, b, &cfg.options)),
        Method::DenseLu => {
            if a.nrows() > cfg.dense_cap {
                return Err(SolverError::TooLarge {
                    n: a.nrows(),
                    max: cfg.dense_cap,
                });
            }
            crate::solver::solve(a, b, Method::DenseLu, &cfg.options)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub element: ElementChoice,
    pub eps_rule: EpsRule,
    pub comparator: Comparator,
    pub solver: SolverConfig,
    #[serde(default)]
    pub reduced_data: ReducedData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h: f64,
    pub n_dof: usize,
    /// `None` for the Dirichlet comparator.
    pub epsilon: Option<f64>,
    pub errors: ErrorReport,
    pub solve: SolveReport,
    /// Rates against the previous level; NaN on the first.
    pub rate_l2u: f64,
    pub rate_h1u: f64,
    pub rate_l2p: f64,
}

/// `base` followed by `levels − 1` successive refinements.
pub fn mesh_sequence(
    base: Mesh,
    levels: usize,
    domain: &SmoothDomain,
) -> Result<Vec<Mesh>, AnalysisError> {
    let mut meshes = vec![base];
    for _ in 1..levels {
        let next = refine(meshes.last().unwrap(), domain)?;
        meshes.push(next);
    }
    Ok(meshes)
}

/// Solves on every mesh and records errors and observed rates. A solver that
/// does not converge marks its row rather than aborting the study.
pub fn convergence_study(
    meshes: &[Mesh],
    case: &dyn ManufacturedCase,
    cfg: &StudyConfig,
) -> Result<Vec<ConvergenceRecord>, AnalysisError> {
    let mut records: Vec<ConvergenceRecord> = Vec::with_capacity(meshes.len());
    for (level, mesh) in meshes.iter().enumerate() {
        let h = mesh.h();
        let dofs = DofMap::new(mesh, &cfg.element);
        let (x, solve, epsilon) = match cfg.comparator {
            Comparator::Penalty(scheme) => {
                let eps = cfg.eps_rule.epsilon(h);
                let sys =
                    build_saddle_system(mesh, case, &cfg.element, eps, scheme, cfg.reduced_data)?;
                let (x, rep) = solve_linear(&sys.matrix(), &sys.rhs(), &cfg.solver)?;
                (x, rep, Some(eps))
            }
            Comparator::Dirichlet => {
                let sys = build_dirichlet_system(mesh, case, &cfg.element);
                let (x, rep) = solve_linear(&sys.matrix, &sys.rhs, &cfg.solver)?;
                (x, rep, None)
            }
        };
        let (u, p) = x.split_at(dofs.n_velocity());
        let errors = error_norms(mesh, &dofs, u, p, case);
        let (rate_l2u, rate_h1u, rate_l2p) = match records.last() {
            Some(prev) => (
                rate(prev.errors.l2_velocity, errors.l2_velocity, prev.h, h),
                rate(prev.errors.h1_velocity, errors.h1_velocity, prev.h, h),
                rate(prev.errors.l2_pressure, errors.l2_pressure, prev.h, h),
            ),
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        records.push(ConvergenceRecord {
            level,
            h,
            n_dof: dofs.n_dof(),
            epsilon,
            errors,
            solve,
            rate_l2u,
            rate_h1u,
            rate_l2p,
        });
    }
    Ok(records)
}

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}

/// Columns `level,h,dof,l2u,rate_l2u,h1u,rate_h1u,l2p,rate_l2p,iters,converged`;
/// undefined rates are left empty.
pub fn write_convergence_csv<W: Write>(
    records: &[ConvergenceRecord],
    out: W,
) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "level",
        "h",
        "dof",
        "l2u",
        "rate_l2u",
        "h1u",
        "rate_h1u",
        "l2p",
        "rate_l2p",
        "iters",
        "converged",
    ])?;
    for r in records {
        w.write_record([
            r.level.to_string(),
            fmt_float(r.h),
            r.n_dof.to_string(),
            fmt_float(r.errors.l2_velocity),
            fmt_float(r.rate_l2u),
            fmt_float(r.errors.h1_velocity),
            fmt_float(r.rate_h1u),
            fmt_float(r.errors.l2_pressure),
            fmt_float(r.rate_l2p),
            r.solve.iterations.to_string(),
            r.solve.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub short_restart: usize,
    pub long_restart: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub preconditioner: Preconditioner,
    pub bicgstab_max_iter: usize,
    pub dense_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            short_restart: 30,
            long_restart: 200,
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            preconditioner: Preconditioner::Ilu0,
            bicgstab_max_iter: 1500,
            dense_cap: DENSE_LU_MAX_DIM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    /// Infinite when the matrix is singular to working precision.
    pub cond2: f64,
    pub iters_gmres_r30: usize,
    pub iters_gmres_r200: usize,
    pub iters_bicgstab: usize,
    pub conv_gmres_r30: bool,
    pub conv_gmres_r200: bool,
    pub conv_bicgstab: bool,
    /// `‖b − A x‖ / ‖b‖` of the dense LU solution.
    pub lu_residual: f64,
}

/// One row per `ε` on a fixed mesh: condition estimate, iteration counts of
/// both GMRES restarts and BiCGSTAB, and the dense LU residual.
pub fn epsilon_sweep(
    mesh: &Mesh,
    case: &dyn ManufacturedCase,
    element: &ElementChoice,
    scheme: PenaltyScheme,
    eps_list: &[f64],
    cfg: &SweepConfig,
) -> Result<Vec<SweepRow>, AnalysisError> {
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let sys = build_saddle_system(mesh, case, element, eps, scheme, ReducedData::Pointwise)?;
        let k = sys.matrix();
        if k.nrows() > cfg.dense_cap {
            return Err(SolverError::TooLarge {
                n: k.nrows(),
                max: cfg.dense_cap,
            }
            .into());
        }
        let b = sys.rhs();
        let opts = |restart: usize, max_iter: usize| IterativeOptions {
            restart,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            max_iter,
            preconditioner: cfg.preconditioner,
        };
        let (_, short) = gmres_solve(&k, &b, &opts(cfg.short_restart, 50 * cfg.short_restart));
        let (_, long) = gmres_solve(&k, &b, &opts(cfg.long_restart, 50 * cfg.long_restart));
        let (_, bicg) = bicgstab_solve(&k, &b, &opts(1, cfg.bicgstab_max_iter));
        let cond2 = match condition_estimate(&k) {
            Ok(c) => c.cond2,
            Err(SolverError::SingularMatrix { .. }) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        let lu_residual = match dense_lu_solve(&k, &b) {
            Ok((_, res)) => res,
            Err(SolverError::SingularMatrix { .. }) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        rows.push(SweepRow {
            eps,
            cond2,
            iters_gmres_r30: short.iterations,
            iters_gmres_r200: long.iterations,
            iters_bicgstab: bicg.iterations,
            conv_gmres_r30: short.converged,
            conv_gmres_r200: long.converged,
            conv_bicgstab: bicg.converged,
            lu_residual,
        });
    }
    Ok(rows)
}

/// Log–log slope of `κ₂` against `1/ε` over the three smallest `ε`.
pub fn kappa_slope(rows: &[SweepRow]) -> Option<f64> {
    let mut sorted: Vec<&SweepRow> = rows.iter().filter(|r| r.cond2.is_finite()).collect();
    if sorted.len() < 3 {
        return None;
    }
    sorted.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    let tail = &sorted[..3];
    let x: Vec<f64> = tail.iter().map(|r| 1.0 / r.eps).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.cond2).collect();
    Some(loglog_slope(&x, &y))
}

/// Columns `eps,cond2,iters_gmres_r30,iters_gmres_r200,iters_bicgstab,
/// conv_gmres,conv_bicgstab,lu_residual`; `conv_gmres` is the restart-30 flag.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "eps",
        "cond2",
        "iters_gmres_r30",
        "iters_gmres_r200",
        "iters_bicgstab",
        "conv_gmres",
        "conv_bicgstab",
        "lu_residual",
    ])?;
    for r in rows {
        w.write_record([
            format!("{:e}", r.eps),
            format!("{:e}", r.cond2),
            r.iters_gmres_r30.to_string(),
            r.iters_gmres_r200.to_string(),
            r.iters_bicgstab.to_string(),
            r.conv_gmres_r30.to_string(),
            r.conv_bicgstab.to_string(),
            format!("{:e}", r.lu_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Boundary-approximation diagnostics of one mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryRecord {
    pub level: usize,
    pub h: f64,
    /// `max |d|` over Gauss points of `Γ_h`.
    pub distance_max: f64,
    pub normal_max: f64,
    pub normal_midpoint: f64,
    /// `|∫_Γ 1 − ∫_{Γ_h} 1|`.
    pub surface_defect_one: f64,
    /// Same for `f = x²`.
    pub surface_defect_x2: f64,
    pub injective: bool,
}

pub fn geometry_study(
    meshes: &[Mesh],
    domain: &SmoothDomain,
) -> Result<Vec<GeometryRecord>, AnalysisError> {
    meshes
        .iter()
        .enumerate()
        .map(|(level, mesh)| {
            let normal = normal_defect(mesh, domain)?;
            Ok(GeometryRecord {
                level,
                h: mesh.h(),
                distance_max: boundary_distance_max(mesh, domain)?,
                normal_max: normal.max_over_edges,
                normal_midpoint: normal.max_at_midpoints,
                surface_defect_one: surface_integral_defect(mesh, domain, |_| 1.0)?,
                surface_defect_x2: surface_integral_defect(mesh, domain, |x| x.x * x.x)?,
                injective: projection_injectivity_check(mesh, domain),
            })
        })
        .collect()
}

/// Rate of `field` between consecutive records.
pub fn geometry_rates(
    records: &[GeometryRecord],
    field: impl Fn(&GeometryRecord) -> f64,
) -> Vec<f64> {
    records
        .windows(2)
        .map(|w| rate(field(&w[0]), field(&w[1]), w[0].h, w[1].h))
        .collect()
}

/// Columns `level,h,dist_max,rate_dist,normal_max,rate_normal,normal_mid,
/// rate_normal_mid,surf_one,rate_surf_one,surf_x2,rate_surf_x2,injective`.
pub fn write_geometry_csv<W: Write>(
    records: &[GeometryRecord],
    out: W,
) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "level",
        "h",
        "dist_max",
        "rate_dist",
        "normal_max",
        "rate_normal",
        "normal_mid",
        "rate_normal_mid",
        "surf_one",
        "rate_surf_one",
        "surf_x2",
        "rate_surf_x2",
        "injective",
    ])?;
    for (i, r) in records.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| &records[j]);
        let rr =
            |f: fn(&GeometryRecord) -> f64| prev.map_or(f64::NAN, |p| rate(f(p), f(r), p.h, r.h));
        w.write_record([
            r.level.to_string(),
            fmt_float(r.h),
            fmt_float(r.distance_max),
            fmt_float(rr(|g| g.distance_max)),
            fmt_float(r.normal_max),
            fmt_float(rr(|g| g.normal_max)),
            fmt_float(r.normal_midpoint),
            fmt_float(rr(|g| g.normal_midpoint)),
            fmt_float(r.surface_defect_one),
            fmt_float(rr(|g| g.surface_defect_one)),
            fmt_float(r.surface_defect_x2),
            fmt_float(rr(|g| g.surface_defect_x2)),
            r.injective.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
