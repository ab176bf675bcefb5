//! Run configuration: strict JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use slipstokes_core::analysis::{EpsRule, SolverConfig, SweepConfig};
use slipstokes_core::assembly::{
    ElementChoice, ElementKind, ManufacturedCase, PenaltyScheme, ReducedData, RotatingDiskCase,
    ZeroCase,
};
use slipstokes_core::solver::{IterativeOptions, Method, Preconditioner, DENSE_LU_MAX_DIM};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum ElementArg {
    #[default]
    P1,
    P1b,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Full,
    #[default]
    Reduced,
}

impl From<SchemeArg> for PenaltyScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Full => PenaltyScheme::Full,
            SchemeArg::Reduced => PenaltyScheme::Reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    #[default]
    Gmres,
    Bicgstab,
    Lu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecondArg {
    None,
    #[default]
    Ilu0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataArg {
    #[default]
    Pointwise,
    Interpolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "snake_case")]
pub enum CaseArg {
    /// Rotating flow on the unit disk with `p = 8xy`.
    #[default]
    BuiltinDisk,
    /// All data zero; the exact solution vanishes.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum CompareArg {
    #[default]
    Reduced,
    Full,
    Dirichlet,
    /// Non-reduced, reduced and Dirichlet side by side.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum DomainArg {
    Disk,
    #[default]
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    /// Rings of the built-in disk mesh; each command has its own default.
    pub rings: Option<usize>,
    /// Uniform refinements applied to the base mesh.
    pub refine: usize,
    /// Triangle-format prefix; replaces the built-in mesh.
    pub import: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub method: MethodArg,
    pub restart: Option<usize>,
    pub rel_tol: Option<f64>,
    pub abs_tol: f64,
    pub max_iter: Option<usize>,
    pub preconditioner: PrecondArg,
    pub dense_cap: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: MethodArg::Gmres,
            restart: None,
            rel_tol: None,
            abs_tol: 1e-10,
            max_iter: None,
            preconditioner: PrecondArg::Ilu0,
            dense_cap: DENSE_LU_MAX_DIM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryDomain {
    pub kind: DomainArg,
    pub semi_x: f64,
    pub semi_y: f64,
}

impl Default for GeometryDomain {
    fn default() -> Self {
        Self {
            kind: DomainArg::Ellipse,
            semi_x: 1.5,
            semi_y: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub element: ElementArg,
    pub eta: f64,
    pub scheme: SchemeArg,
    /// `0.1h`, `0.1h^2` or a fixed value such as `1e-6`.
    pub eps: String,
    pub reduced_data: DataArg,
    pub mesh: MeshConfig,
    pub levels: usize,
    pub solver: SolverSection,
    pub case: CaseArg,
    pub nu: f64,
    pub compare: CompareArg,
    /// Penalty values of the sweep; decades 1e2 down to 1e-8 when absent.
    pub eps_list: Option<Vec<f64>>,
    pub geometry_domain: GeometryDomain,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            element: ElementArg::P1,
            eta: ElementChoice::DEFAULT_ETA,
            scheme: SchemeArg::Reduced,
            eps: "0.1h^2".into(),
            reduced_data: DataArg::Pointwise,
            mesh: MeshConfig::default(),
            levels: 4,
            solver: SolverSection::default(),
            case: CaseArg::BuiltinDisk,
            nu: 1.0,
            compare: CompareArg::Reduced,
            eps_list: None,
            geometry_domain: GeometryDomain::default(),
            output: PathBuf::from("out"),
        }
    }
}

/// Flags shared by the run subcommands; each one overrides the config file.
#[derive(Debug, Clone, Args, Default)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub element: Option<ElementArg>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Penalty rule: `0.1h`, `0.1h^2` or a number.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, value_enum)]
    pub reduced_data: Option<DataArg>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rings: Option<u64>,
    #[arg(long)]
    pub refine: Option<usize>,
    /// Triangle-format mesh prefix (`PREFIX.node`, `PREFIX.ele`).
    #[arg(long)]
    pub import: Option<PathBuf>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub restart: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub preconditioner: Option<PrecondArg>,
    #[arg(long)]
    pub dense_cap: Option<usize>,
    #[arg(long, value_enum)]
    pub case: Option<CaseArg>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// File values (or defaults) with the flags applied on top.
    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut c = match &o.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($field:expr, $flag:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(c.element, o.element);
        set!(c.eta, o.eta);
        set!(c.scheme, o.scheme);
        set!(c.eps, o.eps);
        set!(c.reduced_data, o.reduced_data);
        set!(c.mesh.refine, o.refine);
        set!(c.levels, o.levels);
        set!(c.solver.method, o.method);
        set!(c.solver.abs_tol, o.abs_tol);
        set!(c.solver.preconditioner, o.preconditioner);
        set!(c.solver.dense_cap, o.dense_cap);
        set!(c.case, o.case);
        set!(c.nu, o.nu);
        set!(c.output, o.out);
        if let Some(r) = o.rings {
            c.mesh.rings = Some(r as usize);
        }
        if o.import.is_some() {
            c.mesh.import = o.import.clone();
        }
        if o.restart.is_some() {
            c.solver.restart = o.restart;
        }
        if o.rel_tol.is_some() {
            c.solver.rel_tol = o.rel_tol;
        }
        if o.max_iter.is_some() {
            c.solver.max_iter = o.max_iter;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.element_choice()?;
        self.eps_rule()?;
        if self.mesh.rings == Some(0) {
            return Err(CliError::Usage("mesh.rings must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(CliError::Usage("levels must be at least 1".into()));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(CliError::Usage(format!(
                "nu must be nonnegative, got {}",
                self.nu
            )));
        }
        if self.solver.restart == Some(0) {
            return Err(CliError::Usage("solver.restart must be positive".into()));
        }
        if let Some(list) = &self.eps_list {
            if list.is_empty() || list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                return Err(CliError::Usage("eps_list must hold positive values".into()));
            }
        }
        let g = &self.geometry_domain;
        if !(g.semi_x > 0.0 && g.semi_y > 0.0) {
            return Err(CliError::Usage("ellipse semi-axes must be positive".into()));
        }
        Ok(())
    }

    pub fn element_choice(&self) -> Result<ElementChoice, CliError> {
        match self.element {
            ElementArg::P1 => ElementChoice::new(ElementKind::P1, self.eta),
            ElementArg::P1b => Ok(ElementChoice::p1b()),
        }
        .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn eps_rule(&self) -> Result<EpsRule, CliError> {
        self.eps.parse().map_err(CliError::Usage)
    }

    pub fn reduced_data(&self) -> ReducedData {
        match self.reduced_data {
            DataArg::Pointwise => ReducedData::Pointwise,
            DataArg::Interpolated => ReducedData::Interpolated,
        }
    }

    pub fn case(&self) -> Box<dyn ManufacturedCase> {
        match self.case {
            CaseArg::BuiltinDisk => Box::new(RotatingDiskCase { nu: self.nu }),
            CaseArg::Zero => Box::new(ZeroCase),
        }
    }

    /// Solver for single solves and convergence runs: GMRES(200), rel 1e-8.
    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        let restart = s.restart.unwrap_or(200);
        SolverConfig {
            method: match s.method {
                MethodArg::Gmres => Method::Gmres,
                MethodArg::Bicgstab => Method::Bicgstab,
                MethodArg::Lu => Method::DenseLu,
            },
            options: IterativeOptions {
                restart,
                rel_tol: s.rel_tol.unwrap_or(1e-8),
                abs_tol: s.abs_tol,
                max_iter: s.max_iter.unwrap_or(50 * restart),
                preconditioner: self.preconditioner(),
            },
            dense_cap: s.dense_cap,
        }
    }

    /// Sweep solvers: restarts 30 and 200 with rel 1e-6 unless overridden.
    pub fn sweep_config(&self) -> SweepConfig {
        let s = &self.solver;
        SweepConfig {
            rel_tol: s.rel_tol.unwrap_or(1e-6),
            abs_tol: s.abs_tol,
            preconditioner: self.preconditioner(),
            dense_cap: s.dense_cap,
            ..SweepConfig::default()
        }
    }

    fn preconditioner(&self) -> Preconditioner {
        match self.solver.preconditioner {
            PrecondArg::None => Preconditioner::None,
            PrecondArg::Ilu0 => Preconditioner::Ilu0,
        }
    }

    pub fn sweep_eps(&self) -> Vec<f64> {
        self.eps_list
            .clone()
            .unwrap_or_else(|| (-8..=2).rev().map(|k| 10f64.powi(k)).collect())
    }
}
