//! Markdown tables and self-contained SVG log–log charts.

use std::fmt::Write as _;

use slipstokes_core::analysis::{format_rate, ConvergenceRecord, GeometryRecord, SweepRow};

/// Convergence table: one block of error, rate and iterations per comparator.
pub fn convergence_markdown(runs: &[(&str, Vec<ConvergenceRecord>)]) -> String {
    let mut s = String::from("# Convergence of the velocity (H1 error)\n\n| h | DOF |");
    for (label, _) in runs {
        write!(s, " {label} | Rate | Itr |").unwrap();
    }
    s.push_str("\n|---|---|");
    for _ in runs {
        s.push_str("---|---|---|");
    }
    s.push('\n');
    let levels = runs.first().map_or(0, |(_, r)| r.len());
    for l in 0..levels {
        let first = &runs[0].1[l];
        write!(s, "| {:.4} | {} |", first.h, first.n_dof).unwrap();
        for (_, recs) in runs {
            let r = &recs[l];
            let itr = if r.solve.converged {
                r.solve.iterations.to_string()
            } else {
                "(not converged)".to_string()
            };
            write!(
                s,
                " {:.4e} | {} | {itr} |",
                r.errors.h1_velocity,
                format_rate(r.rate_h1u)
            )
            .unwrap();
        }
        s.push('\n');
    }
    s.push_str("\n## L2 velocity and pressure\n\n| h |");
    for (label, _) in runs {
        write!(s, " {label} L2(u) | Rate | L2(p) | Rate |").unwrap();
    }
    s.push_str("\n|---|");
    for _ in runs {
        s.push_str("---|---|---|---|");
    }
    s.push('\n');
    for l in 0..levels {
        write!(s, "| {:.4} |", runs[0].1[l].h).unwrap();
        for (_, recs) in runs {
            let r = &recs[l];
            write!(
                s,
                " {:.4e} | {} | {:.4e} | {} |",
                r.errors.l2_velocity,
                format_rate(r.rate_l2u),
                r.errors.l2_pressure,
                format_rate(r.rate_l2p)
            )
            .unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn sweep_markdown(rows: &[SweepRow], slope: Option<f64>) -> String {
    let mut s = String::from(
        "# Penalty parameter, condition number and iterations\n\n| eps | cond2 | GMRES(30) | GMRES(200) | BiCGSTAB | LU residual |\n|---|---|---|---|---|---|\n",
    );
    let it = |n: usize, ok: bool| {
        if ok {
            n.to_string()
        } else {
            "(not converged)".into()
        }
    };
    for r in rows {
        writeln!(
            s,
            "| {:.0e} | {:.3e} | {} | {} | {} | {:.1e} |",
            r.eps,
            r.cond2,
            it(r.iters_gmres_r30, r.conv_gmres_r30),
            it(r.iters_gmres_r200, r.conv_gmres_r200),
            it(r.iters_bicgstab, r.conv_bicgstab),
            r.lu_residual
        )
        .unwrap();
    }
    if let Some(k) = slope {
        writeln!(
            s,
            "\ncond2 slope against 1/eps over the three smallest eps: {k:.3}"
        )
        .unwrap();
    }
    s
}

pub fn geometry_markdown(recs: &[GeometryRecord], domain: &str) -> String {
    let mut s = format!(
        "# Boundary approximation on the {domain}\n\n| h | max d | Rate | max normal | Rate | midpoint normal | Rate | surface f=1 | Rate | surface f=x^2 | Rate | injective |\n|---|---|---|---|---|---|---|---|---|---|---|---|\n"
    );
    for (i, r) in recs.iter().enumerate() {
        let rate = |f: fn(&GeometryRecord) -> f64| match i {
            0 => "-".to_string(),
            _ => format_rate(slipstokes_core::analysis::rate(
                f(&recs[i - 1]),
                f(r),
                recs[i - 1].h,
                r.h,
            )),
        };
        writeln!(
            s,
            "| {:.4} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {} | {:.3e} | {} | {} |",
            r.h,
            r.distance_max,
            rate(|g| g.distance_max),
            r.normal_max,
            rate(|g| g.normal_max),
            r.normal_midpoint,
            rate(|g| g.normal_midpoint),
            r.surface_defect_one,
            rate(|g| g.surface_defect_one),
            r.surface_defect_x2,
            rate(|g| g.surface_defect_x2),
            r.injective
        )
        .unwrap();
    }
    s
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const W: f64 = 640.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;

/// Log–log chart. `triangle` draws one reference triangle of the given slope
/// below the first series.
pub fn loglog_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    triangle: Option<f64>,
) -> String {
    let finite = |v: f64| v.is_finite() && v > 0.0;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(x, y)| finite(x) && finite(y))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), &(x, y)| {
            (
                a.min(x.log10()),
                b.max(x.log10()),
                c.min(y.log10()),
                d.max(y.log10()),
            )
        },
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // Room for the triangle and a margin.
    let (xm, ym) = (((x1 - x0) * 0.08).max(0.05), ((y1 - y0) * 0.15).max(0.1));
    let (x0, x1, y0, y1) = (x0 - xm, x1 + xm, y0 - ym, y1 + ym);
    let px = |x: f64| PAD + (x.log10() - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" style="font-family:sans-serif;font-size:12px;background:#ffffff">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" style="font-size:15px">{}</text>"#,
        W / 2.0,
        esc(title)
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" style="fill:none;stroke:#333333"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    )
    .unwrap();
    for k in x0.ceil() as i32..=x1.floor() as i32 {
        let x = px(10f64.powi(k));
        writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{PAD}" style="stroke:#dddddd"/>"#,
            H - PAD
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{k}</text>"#,
            H - PAD + 16.0
        )
        .unwrap();
    }
    for k in y0.ceil() as i32..=y1.floor() as i32 {
        let y = py(10f64.powi(k));
        writeln!(
            s,
            r#"<line x1="{PAD}" y1="{y:.1}" x2="{}" y2="{y:.1}" style="stroke:#dddddd"/>"#,
            W - PAD
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{k}</text>"#,
            PAD - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 18.0,
        esc(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    )
    .unwrap();

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = ser
            .points
            .iter()
            .filter(|&&(x, y)| finite(x) && finite(y))
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline points="{}" style="fill:none;stroke:{color};stroke-width:2"/>"#,
            coords.join(" ")
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}" style="fill:{color}">{}</text>"#,
            W - PAD - 150.0,
            PAD + 18.0 + 16.0 * i as f64,
            esc(&ser.label)
        )
        .unwrap();
    }

    if let (Some(slope), Some(first)) = (triangle, series.first()) {
        let good: Vec<(f64, f64)> = first
            .points
            .iter()
            .copied()
            .filter(|&(x, y)| finite(x) && finite(y))
            .collect();
        if good.len() >= 2 {
            // Anchored under the two finest points, one third of a decade below.
            let (xa, ya) = good[good.len() - 1];
            let (xb, _) = good[good.len() - 2];
            let (xa, xb) = (xa.min(xb), xa.max(xb));
            let xa2 = (xa * xb).sqrt();
            let base = ya * 10f64.powf(-0.35);
            let top = base * (xb / xa2).powf(slope);
            writeln!(
                s,
                r#"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" style="fill:none;stroke:#555555;stroke-dasharray:4 2"/>"#,
                px(xa2),
                py(base),
                px(xb),
                py(base),
                px(xb),
                py(top)
            )
            .unwrap();
            writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">{slope}</text>"#,
                px(xb) + 4.0,
                (py(base) + py(top)) / 2.0
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
