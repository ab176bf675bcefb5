use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slipstokes"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = rows[0].iter().position(|c| c == name).unwrap();
    rows[1..].iter().map(|r| r[i].clone()).collect()
}

#[test]
fn mesh_rings_two_has_nineteen_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["mesh", "--rings", "2", "--out", "m"], dir.path());
    assert!(out.status.success());
    let node = std::fs::read_to_string(dir.path().join("m.node")).unwrap();
    assert!(node.starts_with("19 2 0 1"));
    assert_eq!(node.lines().count(), 20);
}

#[test]
fn mesh_refined_once_has_24_triangles() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(
        &["mesh", "--rings", "1", "--refine", "1", "--out", "m"],
        dir.path()
    )
    .status
    .success());
    let ele = std::fs::read_to_string(dir.path().join("m.ele")).unwrap();
    assert!(ele.starts_with("24 3 0"));
}

#[test]
fn zero_rings_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["mesh", "--rings", "0", "--out", "m"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--rings", "0"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn config_errors_exit_two_and_missing_files_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"element": "p1", "colour": 3}"#,
    )
    .unwrap();
    assert_eq!(
        run(&["solve", "--config", "bad.json"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--eps", "abc"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--config", "missing.json"], dir.path())
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        run(&["solve", "--import", "nowhere"], dir.path())
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn solve_reduced_beats_exact_norm_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--rings", "8", "--out", "s"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = csv_rows(&dir.path().join("s/solve.csv"));
    let h1: f64 = column(&rows, "h1u")[0].parse().unwrap();
    assert!(h1 * 10.0 <= 3.355, "{h1}");
    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/run.json")).unwrap())
            .unwrap();
    assert_eq!(echo["command"], "solve");
    assert_eq!(echo["config"]["mesh"]["rings"], 8);
    assert_eq!(echo["config"]["element"], "p1");
}

#[test]
fn zero_case_errors_equal_exact_norms() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(
        &["solve", "--case", "zero", "--rings", "3", "--out", "z"],
        dir.path()
    )
    .status
    .success());
    let rows = csv_rows(&dir.path().join("z/solve.csv"));
    for name in ["l2u", "h1u", "l2p", "speed"] {
        assert_eq!(column(&rows, name)[0].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn non_reduced_tiny_eps_collapses() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "solve", "--rings", "6", "--scheme", "full", "--eps", "1e-8", "--method", "lu", "--out",
        "c",
    ];
    assert!(run(&args, dir.path()).status.success());
    let speed: f64 = column(&csv_rows(&dir.path().join("c/solve.csv")), "speed")[0]
        .parse()
        .unwrap();
    assert!(speed <= 0.3, "{speed}");
}

#[test]
fn non_convergence_exits_three_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "solve",
        "--rings",
        "8",
        "--restart",
        "5",
        "--max-iter",
        "10",
        "--out",
        "n",
    ];
    assert_eq!(run(&args, dir.path()).status.code(), Some(3));
    let rows = csv_rows(&dir.path().join("n/solve.csv"));
    assert_eq!(column(&rows, "converged")[0], "false");
}

#[test]
fn convergence_compare_all() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["convergence", "--compare", "all", "--out", "c"],
        dir.path(),
    );
    assert!(out.status.success());
    let md = std::fs::read_to_string(dir.path().join("c/report.md")).unwrap();
    let header = md.lines().find(|l| l.starts_with("| h | DOF")).unwrap();
    assert_eq!(header.matches("| Rate |").count(), 3);
    for label in ["non-reduced", "reduced", "dirichlet"] {
        assert!(header.contains(label));
        let rows = csv_rows(&dir.path().join(format!("c/convergence_{label}.csv")));
        assert_eq!(rows.len(), 5);
    }
    let rows = csv_rows(&dir.path().join("c/convergence_reduced.csv"));
    for r in column(&rows, "rate_h1u").iter().skip(1) {
        let r: f64 = r.parse().unwrap();
        assert!((0.8..=1.4).contains(&r), "{r}");
    }
    let svg = std::fs::read_to_string(dir.path().join("c/convergence.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    assert_eq!(svg.matches("<polygon").count(), 1);
}

#[test]
fn default_sweep_has_eleven_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["epsilon-sweep", "--out", "e"], dir.path());
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("e/sweep.csv"));
    assert_eq!(rows.len(), 12);
    assert_eq!(
        rows[0].join(","),
        "eps,cond2,iters_gmres_r30,iters_gmres_r200,iters_bicgstab,conv_gmres,conv_bicgstab,lu_residual"
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let slope: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("kappa2 slope over the three smallest eps: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((slope - 2.0).abs() <= 0.3);
    assert!(dir.path().join("e/sweep.svg").exists());
}

#[test]
fn sweep_list_flag_and_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let args = [
            "epsilon-sweep",
            "--rings",
            "3",
            "--eps-list",
            "1,1e-3,1e-6",
            "--out",
            out,
        ];
        assert!(run(&args, dir.path()).status.success());
    }
    let a = std::fs::read(dir.path().join("a/sweep.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/sweep.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(csv_rows(&dir.path().join("a/sweep.csv")).len(), 4);
}

#[test]
fn geometry_check_rates() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(
        &["geometry-check", "--levels", "4", "--out", "g"],
        dir.path()
    )
    .status
    .success());
    let rows = csv_rows(&dir.path().join("g/geometry.csv"));
    let check = |name: &str, lo: f64, hi: f64| {
        for r in column(&rows, name).iter().skip(1) {
            let r: f64 = r.parse().unwrap();
            assert!((lo..=hi).contains(&r), "{name} {r}");
        }
    };
    check("rate_dist", 1.8, 2.2);
    check("rate_normal", 0.8, 1.2);
    check("rate_normal_mid", 1.8, 2.2);
    check("rate_surf_one", 1.8, 2.2);
    check("rate_surf_x2", 1.8, 2.2);
}

#[test]
fn imported_mesh_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["mesh", "--rings", "4", "--out", "m"], dir.path())
        .status
        .success());
    assert!(run(&["solve", "--import", "m", "--out", "i"], dir.path())
        .status
        .success());
    assert!(run(&["solve", "--rings", "4", "--out", "r"], dir.path())
        .status
        .success());
    assert_eq!(
        std::fs::read(dir.path().join("i/solve.csv")).unwrap(),
        std::fs::read(dir.path().join("r/solve.csv")).unwrap()
    );
}
