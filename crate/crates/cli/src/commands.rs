//! Subcommand bodies. Each writes `run.json` first, then its tables.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use slipstokes_core::analysis::{
    boundary_slip_report, convergence_study, epsilon_sweep, error_norms, geometry_study,
    kappa_slope, mesh_sequence, solve_linear, write_convergence_csv, write_geometry_csv,
    write_sweep_csv, Comparator, ConvergenceRecord, StudyConfig,
};
use slipstokes_core::assembly::{build_saddle_system, PenaltyScheme};
use slipstokes_core::geometry::{Ellipse, SmoothDomain};
use slipstokes_core::mesh::{
    build_disk_mesh, build_ellipse_mesh, export_triangle, import_triangle, refine_n, Mesh,
};

use crate::config::{CompareArg, DomainArg, RunConfig};
use crate::report::{convergence_markdown, geometry_markdown, loglog_svg, sweep_markdown, Series};
use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn create_file(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct RunEcho<'a> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
}

/// Creates the output directory and echoes the resolved configuration.
fn start_run(command: &str, cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output).map_err(|e| io_err(&cfg.output, e))?;
    let echo = RunEcho {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&echo).expect("config serializes");
    write_file(&cfg.output.join("run.json"), json + "\n")
}

/// Built-in disk mesh (or an imported one) with `mesh.refine` refinements.
fn load_mesh(cfg: &mut RunConfig, default_rings: usize) -> Result<Mesh, CliError> {
    let disk = SmoothDomain::unit_disk();
    let base = match &cfg.mesh.import {
        Some(prefix) => {
            cfg.mesh.rings = None;
            let mesh = import_triangle(prefix)?;
            mesh.check_boundary_fit(&disk, slipstokes_core::geometry::ON_BOUNDARY_TOL)?;
            mesh
        }
        None => build_disk_mesh(*cfg.mesh.rings.get_or_insert(default_rings))?,
    };
    Ok(refine_n(&base, &disk, cfg.mesh.refine)?)
}

pub fn mesh(rings: usize, refine: usize, out: &Path) -> Result<(), CliError> {
    let disk = SmoothDomain::unit_disk();
    let mesh = refine_n(&build_disk_mesh(rings)?, &disk, refine)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let (node, ele) = export_triangle(&mesh, out)?;
    let stats = mesh.stats();
    println!(
        "{}",
        serde_json::to_string_pretty(&stats).expect("stats serialize")
    );
    println!("wrote {} and {}", node.display(), ele.display());
    Ok(())
}

#[derive(Serialize)]
struct SolveRow {
    h: f64,
    dof: usize,
    eps: f64,
    l2u: f64,
    h1u: f64,
    l2p: f64,
    k_h: f64,
    penetration: f64,
    speed: f64,
    iters: usize,
    converged: bool,
    relative_residual: f64,
}

pub fn solve(mut cfg: RunConfig) -> Result<(), CliError> {
    let mesh = load_mesh(&mut cfg, 8)?;
    start_run("solve", &cfg)?;
    let case = cfg.case();
    let element = cfg.element_choice()?;
    let scheme: PenaltyScheme = cfg.scheme.into();
    let eps = cfg.eps_rule()?.epsilon(mesh.h());
    let sys = build_saddle_system(
        &mesh,
        case.as_ref(),
        &element,
        eps,
        scheme,
        cfg.reduced_data(),
    )?;
    let (x, rep) = solve_linear(&sys.matrix(), &sys.rhs(), &cfg.solver_config())?;
    let (u, p) = sys.split(&x);
    let errors = error_norms(&mesh, &sys.dofs, u, p, case.as_ref());
    let slip = boundary_slip_report(&mesh, &sys.dofs, u);
    let row = SolveRow {
        h: mesh.h(),
        dof: sys.n_dof(),
        eps,
        l2u: errors.l2_velocity,
        h1u: errors.h1_velocity,
        l2p: errors.l2_pressure,
        k_h: errors.k_h,
        penetration: slip.penetration,
        speed: slip.speed,
        iters: rep.iterations,
        converged: rep.converged,
        relative_residual: rep.relative_residual,
    };
    let path = cfg.output.join("solve.csv");
    let mut w = csv::Writer::from_writer(create_file(&path)?);
    w.serialize(&row).map_err(|e| io_err(&path, e))?;
    w.flush().map_err(|e| io_err(&path, e))?;

    let md = format!(
        "# Single solve ({scheme}, eps = {eps:.3e})\n\n| quantity | value |\n|---|---|\n| h | {:.4} |\n| DOF | {} |\n| L2(u) error | {:.4e} |\n| H1(u) error | {:.4e} |\n| L2(p) error | {:.4e} |\n| k_h | {:.4e} |\n| boundary penetration | {:.4e} |\n| boundary speed | {:.4} |\n| {} iterations | {} |\n| converged | {} |\n",
        row.h, row.dof, row.l2u, row.h1u, row.l2p, row.k_h, row.penetration, row.speed, rep.method, row.iters, row.converged
    );
    write_file(&cfg.output.join("report.md"), &md)?;
    print!("{md}");
    if !rep.converged {
        return Err(CliError::NonConvergence(format!(
            "{} stopped at relative residual {:.2e}",
            rep.method, rep.relative_residual
        )));
    }
    Ok(())
}

fn comparators(compare: CompareArg) -> Vec<Comparator> {
    match compare {
        CompareArg::Reduced => vec![Comparator::Penalty(PenaltyScheme::Reduced)],
        CompareArg::Full => vec![Comparator::Penalty(PenaltyScheme::Full)],
        CompareArg::Dirichlet => vec![Comparator::Dirichlet],
        CompareArg::All => vec![
            Comparator::Penalty(PenaltyScheme::Full),
            Comparator::Penalty(PenaltyScheme::Reduced),
            Comparator::Dirichlet,
        ],
    }
}

pub fn convergence(mut cfg: RunConfig) -> Result<(), CliError> {
    if cfg.levels < 2 {
        return Err(CliError::Usage(
            "a convergence study needs at least 2 levels".into(),
        ));
    }
    let base = load_mesh(&mut cfg, 4)?;
    start_run("convergence", &cfg)?;
    let meshes = mesh_sequence(base, cfg.levels, &SmoothDomain::unit_disk())?;
    let case = cfg.case();
    let mut runs: Vec<(&str, Vec<ConvergenceRecord>)> = Vec::new();
    for comparator in comparators(cfg.compare) {
        let study = StudyConfig {
            element: cfg.element_choice()?,
            eps_rule: cfg.eps_rule()?,
            comparator,
            solver: cfg.solver_config(),
            reduced_data: cfg.reduced_data(),
        };
        let recs = convergence_study(&meshes, case.as_ref(), &study)?;
        let path = cfg
            .output
            .join(format!("convergence_{}.csv", comparator.label()));
        write_convergence_csv(&recs, create_file(&path)?)?;
        runs.push((comparator.label(), recs));
    }
    let md = convergence_markdown(&runs);
    write_file(&cfg.output.join("report.md"), &md)?;
    print!("{md}");
    let series: Vec<Series> = runs
        .iter()
        .map(|(label, recs)| Series {
            label: label.to_string(),
            points: recs.iter().map(|r| (r.h, r.errors.h1_velocity)).collect(),
        })
        .collect();
    let svg = loglog_svg(
        &format!("H1 velocity error, eps = {}", cfg.eps),
        "h",
        "H1 error",
        &series,
        Some(1.0),
    );
    write_file(&cfg.output.join("convergence.svg"), svg)?;

    let failed: Vec<String> = runs
        .iter()
        .flat_map(|(label, recs)| {
            recs.iter()
                .filter(|r| !r.solve.converged)
                .map(move |r| format!("{label} level {}", r.level))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "solver did not converge: {}",
            failed.join(", ")
        )))
    }
}

pub fn epsilon_sweep_cmd(mut cfg: RunConfig) -> Result<(), CliError> {
    let mesh = load_mesh(&mut cfg, 6)?;
    if cfg.eps_list.is_none() {
        cfg.eps_list = Some(cfg.sweep_eps());
    }
    start_run("epsilon-sweep", &cfg)?;
    let case = cfg.case();
    let rows = epsilon_sweep(
        &mesh,
        case.as_ref(),
        &cfg.element_choice()?,
        cfg.scheme.into(),
        &cfg.sweep_eps(),
        &cfg.sweep_config(),
    )?;
    write_sweep_csv(&rows, create_file(&cfg.output.join("sweep.csv"))?)?;
    let slope = kappa_slope(&rows);
    let md = sweep_markdown(&rows, slope);
    write_file(&cfg.output.join("report.md"), &md)?;
    print!("{md}");
    let svg = loglog_svg(
        "Condition number against the penalty parameter",
        "eps",
        "cond2",
        &[Series {
            label: "cond2".into(),
            points: rows.iter().map(|r| (r.eps, r.cond2)).collect(),
        }],
        None,
    );
    write_file(&cfg.output.join("sweep.svg"), svg)?;
    match slope {
        Some(k) => println!("kappa2 slope over the three smallest eps: {k:.3}"),
        None => println!("kappa2 slope unavailable (fewer than three finite estimates)"),
    }
    Ok(())
}

pub fn geometry_check(mut cfg: RunConfig) -> Result<(), CliError> {
    let g = cfg.geometry_domain.clone();
    let rings = *cfg.mesh.rings.get_or_insert(4);
    start_run("geometry-check", &cfg)?;
    let (domain, base, name) = match g.kind {
        DomainArg::Disk => (
            SmoothDomain::unit_disk(),
            build_disk_mesh(rings)?,
            "unit disk".to_string(),
        ),
        DomainArg::Ellipse => (
            Ellipse::new(g.semi_x, g.semi_y).domain(),
            build_ellipse_mesh(rings, g.semi_x, g.semi_y)?,
            format!("ellipse {} x {}", g.semi_x, g.semi_y),
        ),
    };
    let base = refine_n(&base, &domain, cfg.mesh.refine)?;
    let meshes = mesh_sequence(base, cfg.levels, &domain)?;
    let recs = geometry_study(&meshes, &domain)?;
    write_geometry_csv(&recs, create_file(&cfg.output.join("geometry.csv"))?)?;
    let md = geometry_markdown(&recs, &name);
    write_file(&cfg.output.join("report.md"), &md)?;
    let mut out = std::io::stdout().lock();
    out.write_all(md.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}
