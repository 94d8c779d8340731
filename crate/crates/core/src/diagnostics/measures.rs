use crate::error::{Error, Result};
use crate::mesh::MeshModel;

/// Gray-level indicator `100 * sum 4 rho (1 - rho) / N`: 0 for a 0/1 field,
/// 100 when every density is 0.5.
pub fn discreteness_measure(rho: &[f64]) -> f64 {
    if rho.is_empty() {
        return 0.0;
    }
    100.0 * rho.iter().map(|r| 4.0 * r * (1.0 - r)).sum::<f64>() / rho.len() as f64
}

/// Mean absolute response of the 2x2 kernel `[[1, -1], [-1, 1]] / 4` over all
/// `(nx - 1)(ny - 1)` patches, doubled so that a perfect 0/1 checkerboard scores 1.
/// Uniform fields and one-element stripes score 0.
pub fn checkerboard_index(mesh: &MeshModel, rho: &[f64]) -> Result<f64> {
    if mesh.nx < 2 || mesh.ny < 2 {
        return Err(Error::MeshTooSmall(format!(
            "checkerboard index needs at least 2x2 elements, got {}x{}",
            mesh.nx, mesh.ny
        )));
    }
    if rho.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_elements(),
            got: rho.len(),
        });
    }
    let mut total = 0.0;
    for j in 0..mesh.ny - 1 {
        for i in 0..mesh.nx - 1 {
            let a = rho[mesh.elem_id(i, j)];
            let b = rho[mesh.elem_id(i + 1, j)];
            let c = rho[mesh.elem_id(i, j + 1)];
            let d = rho[mesh.elem_id(i + 1, j + 1)];
            total += (a - b - c + d).abs() / 4.0;
        }
    }
    let patches = ((mesh.nx - 1) * (mesh.ny - 1)) as f64;
    Ok(2.0 * total / patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BcPreset};
    use proptest::prelude::*;

    #[test]
    fn discreteness_values() {
        assert_eq!(discreteness_measure(&[0.0, 1.0, 1.0, 0.0]), 0.0);
        assert_eq!(discreteness_measure(&[0.5; 10]), 100.0);
        assert!((discreteness_measure(&[0.0, 0.5, 1.0, 1.0]) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn checkerboard_patterns() {
        let mesh = build_mesh(6, 4, 1.0, BcPreset::Custom).unwrap();
        let board: Vec<f64> = (0..24).map(|e| ((e % 6 + e / 6) % 2) as f64).collect();
        assert!((checkerboard_index(&mesh, &board).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(checkerboard_index(&mesh, &[0.3; 24]).unwrap(), 0.0);
        let stripes: Vec<f64> = (0..24).map(|e| ((e % 6) % 2) as f64).collect();
        assert_eq!(checkerboard_index(&mesh, &stripes).unwrap(), 0.0);
    }

    #[test]
    fn checkerboard_needs_two_by_two() {
        let mesh = build_mesh(5, 1, 1.0, BcPreset::Custom).unwrap();
        assert!(matches!(
            checkerboard_index(&mesh, &[0.0; 5]),
            Err(Error::MeshTooSmall(_))
        ));
    }

    proptest! {
        #[test]
        fn measures_are_bounded_and_complement_invariant(
            rho in proptest::collection::vec(0.0f64..=1.0, 24)
        ) {
            let mesh = build_mesh(6, 4, 1.0, BcPreset::Custom).unwrap();
            let d = discreteness_measure(&rho);
            prop_assert!((0.0..=100.0).contains(&d));
            let ci = checkerboard_index(&mesh, &rho).unwrap();
            let comp: Vec<f64> = rho.iter().map(|r| 1.0 - r).collect();
            let cc = checkerboard_index(&mesh, &comp).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ci));
            prop_assert!((ci - cc).abs() < 1e-12);
        }
    }
}
