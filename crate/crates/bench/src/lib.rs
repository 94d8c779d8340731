//! Shared fixtures for the benchmarks.

use topo_core::{build_mesh, BcPreset, MeshModel};

pub fn mbb(nx: usize, ny: usize) -> MeshModel {
    build_mesh(nx, ny, 1.0, BcPreset::MbbHalf).expect("valid benchmark mesh")
}
