/// Smoothed Heaviside projection `1 - exp(-beta x) + x exp(-beta)`.
///
/// `beta = 0` returns the input unchanged; large `beta` approaches a step at zero.
pub fn heaviside_project(rho_tilde: &[f64], beta: f64) -> Vec<f64> {
    let tail = (-beta).exp();
    rho_tilde
        .iter()
        .map(|&x| (1.0 - (-beta * x).exp() + x * tail).clamp(0.0, 1.0))
        .collect()
}

/// `d rho_bar / d rho~ = beta exp(-beta x) + exp(-beta)`, always positive.
#[inline]
pub fn heaviside_multiplier(x: f64, beta: f64) -> f64 {
    beta * (-beta * x).exp() + (-beta).exp()
}

pub fn heaviside_chain_rule(rho_tilde: &[f64], beta: f64, grad_projected: &[f64]) -> Vec<f64> {
    rho_tilde
        .iter()
        .zip(grad_projected)
        .map(|(&x, &g)| g * heaviside_multiplier(x, beta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_beta_is_identity() {
        let x: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        assert_eq!(heaviside_project(&x, 0.0), x);
        assert_eq!(heaviside_chain_rule(&x, 0.0, &[2.5; 21]), vec![2.5; 21]);
    }

    #[test]
    fn endpoints_fixed() {
        for beta in [0.0, 0.5, 1.0, 8.0, 64.0, 512.0, 1e3] {
            let y = heaviside_project(&[0.0, 1.0], beta);
            assert_eq!(y[0], 0.0);
            assert!((y[1] - 1.0).abs() <= f64::EPSILON);
            assert_eq!(heaviside_multiplier(0.0, beta), beta + (-beta).exp());
        }
    }

    #[test]
    fn steep_limit() {
        let y = heaviside_project(&[0.3], 1e3);
        assert!((y[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_on_fine_grid() {
        for beta in [0.0, 1.0, 16.0, 512.0] {
            let x: Vec<f64> = (0..1000).map(|i| i as f64 / 999.0).collect();
            let y = heaviside_project(&x, beta);
            assert!(y.windows(2).all(|w| w[1] >= w[0]));
            assert!(y.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    proptest! {
        #[test]
        fn derivative_matches_central_difference(x in 0.01f64..0.99, beta in 0.0f64..20.0) {
            let h = 1e-6;
            let fd = (heaviside_project(&[x + h], beta)[0] - heaviside_project(&[x - h], beta)[0]) / (2.0 * h);
            let an = heaviside_multiplier(x, beta);
            prop_assert!((fd - an).abs() <= 1e-8 * an.max(1.0));
        }
    }
}
