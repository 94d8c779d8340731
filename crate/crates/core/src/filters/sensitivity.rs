use crate::error::{Error, Result};

use super::NeighborhoodTable;

/// Lower bound applied to `rho_e` in the denominator of the sensitivity filter.
pub const SENSITIVITY_DENOMINATOR_FLOOR: f64 = 1e-3;

/// Mesh-aware sensitivity filter:
///
/// `g~_e = sum_i w_e(x_i) rho_i g_i / v_i / ((max(rho_e, 1e-3) / v_e) sum_i w_e(x_i))`.
///
/// The objective value itself is untouched; only the search direction changes.
pub fn filter_sensitivities(
    table: &NeighborhoodTable,
    rho: &[f64],
    volumes: &[f64],
    grad: &[f64],
) -> Result<Vec<f64>> {
    let n = table.len();
    for len in [rho.len(), volumes.len(), grad.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    Ok((0..n)
        .map(|e| {
            let num: f64 = table
                .neighbors(e)
                .map(|(i, w, v)| w * rho[i] * grad[i] / v)
                .sum();
            let den = rho[e].max(SENSITIVITY_DENOMINATOR_FLOOR) / volumes[e] * table.weight_sum(e);
            num / den
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{build_neighborhoods, FilterKind, FilterSpec};
    use crate::mesh::{build_mesh, BcPreset};
    use proptest::prelude::*;

    #[test]
    fn singleton_neighborhood_is_identity() {
        let mesh = build_mesh(4, 3, 1.0, BcPreset::Custom).unwrap();
        let t = build_neighborhoods(&mesh, &FilterSpec::new(FilterKind::Sensitivity, 0.5));
        let rho: Vec<f64> = (0..12).map(|i| 0.05 + 0.07 * i as f64).collect();
        let grad: Vec<f64> = (0..12).map(|i| -1.0 - i as f64 * 0.3).collect();
        let out = filter_sensitivities(&t, &rho, &mesh.elem_volume, &grad).unwrap();
        for (a, b) in out.iter().zip(&grad) {
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs());
        }
    }

    #[test]
    fn uniform_inputs_unchanged() {
        let mesh = build_mesh(6, 4, 1.0, BcPreset::Custom).unwrap();
        let t = build_neighborhoods(&mesh, &FilterSpec::new(FilterKind::Sensitivity, 2.0));
        let out = filter_sensitivities(&t, &[0.4; 24], &mesh.elem_volume, &[-3.0; 24]).unwrap();
        assert!(out.iter().all(|g| (g + 3.0).abs() < 1e-14));
    }

    #[test]
    fn two_element_hand_value() {
        // 2x1 strip, r chosen so the neighbor weight is 0.5 and the own weight 1.5
        let mesh = build_mesh(2, 1, 1.0, BcPreset::Custom).unwrap();
        let t = build_neighborhoods(&mesh, &FilterSpec::new(FilterKind::Sensitivity, 1.5));
        assert_eq!(t.weights(0), &[1.5, 0.5]);
        let out = filter_sensitivities(&t, &[1.0, 0.5], &[1.0, 1.0], &[-2.0, -4.0]).unwrap();
        assert!((out[0] - (-2.0)).abs() < 1e-15);
    }

    #[test]
    fn does_not_mutate_and_checks_lengths() {
        let mesh = build_mesh(2, 1, 1.0, BcPreset::Custom).unwrap();
        let t = build_neighborhoods(&mesh, &FilterSpec::new(FilterKind::Sensitivity, 1.5));
        let grad = vec![-2.0, -4.0];
        let _ = filter_sensitivities(&t, &[1.0, 0.5], &[1.0, 1.0], &grad).unwrap();
        assert_eq!(grad, vec![-2.0, -4.0]);
        assert!(matches!(
            filter_sensitivities(&t, &[1.0], &[1.0, 1.0], &grad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn preserves_sign_for_compliance_gradients(
            rho in proptest::collection::vec(0.0f64..1.0, 24),
            grad in proptest::collection::vec(-10.0f64..0.0, 24),
            r in 0.5f64..3.0,
        ) {
            let mesh = build_mesh(6, 4, 1.0, BcPreset::Custom).unwrap();
            let t = build_neighborhoods(&mesh, &FilterSpec::new(FilterKind::Sensitivity, r));
            let out = filter_sensitivities(&t, &rho, &mesh.elem_volume, &grad).unwrap();
            prop_assert!(out.iter().all(|&g| g <= 0.0));
        }
    }
}
