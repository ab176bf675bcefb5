//! Shared fixtures for the benchmarks.

use slipstokes_core::assembly::{
    build_saddle_system, ElementChoice, PenaltyScheme, ReducedData, RotatingDiskCase, SaddleSystem,
};
use slipstokes_core::geometry::SmoothDomain;
use slipstokes_core::mesh::{build_disk_mesh, refine_n, Mesh};

/// Disk mesh with `rings` rings refined `times` times.
pub fn disk(rings: usize, times: usize) -> Mesh {
    refine_n(
        &build_disk_mesh(rings).expect("valid ring count"),
        &SmoothDomain::unit_disk(),
        times,
    )
    .expect("refinement succeeds")
}

/// Reduced-scheme system of the rotating-disk case with `ε = 0.1h²`.
pub fn reduced_system(mesh: &Mesh) -> SaddleSystem {
    let eps = 0.1 * mesh.h() * mesh.h();
    build_saddle_system(
        mesh,
        &RotatingDiskCase::default(),
        &ElementChoice::default(),
        eps,
        PenaltyScheme::Reduced,
        ReducedData::Pointwise,
    )
    .expect("assembly succeeds")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let mesh = disk(4, 1);
        assert_eq!(mesh.n_vertices(), 217);
        assert_eq!(reduced_system(&mesh).n_dof(), 651);
    }
}
