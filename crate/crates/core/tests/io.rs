use slipstokes_core::analysis::{geometry_study, mesh_sequence, write_geometry_csv};
use slipstokes_core::assembly::{
    build_saddle_system, ElementChoice, PenaltyScheme, ReducedData, RotatingDiskCase,
};
use slipstokes_core::geometry::SmoothDomain;
use slipstokes_core::mesh::{build_disk_mesh, export_triangle, import_triangle, refine_n};
use slipstokes_core::solver::mmio::write_matrix_market;

#[test]
fn triangle_files_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = SmoothDomain::unit_disk();
    let mesh = refine_n(&build_disk_mesh(3).unwrap(), &d, 1).unwrap();
    let prefix = dir.path().join("disk");
    let (node, ele) = export_triangle(&mesh, &prefix).unwrap();
    assert!(node.exists() && ele.exists());
    let back = import_triangle(&prefix).unwrap();
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.triangles(), mesh.triangles());
    assert_eq!(back.markers(), mesh.markers());
    assert!(back.check_boundary_fit(&d, 1e-12).is_ok());
}

#[test]
fn missing_mesh_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(import_triangle(&dir.path().join("nothing")).is_err());
}

#[test]
fn matrix_market_export_counts_entries() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = build_disk_mesh(2).unwrap();
    let sys = build_saddle_system(
        &mesh,
        &RotatingDiskCase::default(),
        &ElementChoice::default(),
        1e-3,
        PenaltyScheme::Reduced,
        ReducedData::Pointwise,
    )
    .unwrap();
    let k = sys.matrix();
    let path = dir.path().join("k.mtx");
    write_matrix_market(&k, &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 2 + k.nnz());
    assert_eq!(
        text.lines().nth(1).unwrap(),
        format!("{0} {0} {1}", k.nrows(), k.nnz())
    );
}

#[test]
fn geometry_csv_has_one_row_per_level() {
    let d = SmoothDomain::unit_disk();
    let meshes = mesh_sequence(build_disk_mesh(2).unwrap(), 3, &d).unwrap();
    let recs = geometry_study(&meshes, &d).unwrap();
    let mut buf = Vec::new();
    write_geometry_csv(&recs, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("level,h,dist_max,rate_dist"));
    assert!(lines[3].ends_with("true"));
}
