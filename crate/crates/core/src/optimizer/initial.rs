use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};
use crate::material::volume_fraction;

/// Volume-fraction tolerance met by [`random_feasible`].
pub const RANDOM_VOLUME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Every density equal to the target volume fraction.
    Uniform,
    /// Seeded uniform noise rescaled onto the volume constraint.
    Random { seed: u64 },
    /// Warm start from an existing field.
    Field(Vec<f64>),
}

/// Per-element `U(0, 1)` draws from SplitMix64, scaled multiplicatively and clamped
/// to `[0, 1]` repeatedly until the volume fraction is within 1e-9 of `vf_target`.
pub fn random_feasible(volumes: &[f64], vf_target: f64, seed: u64) -> Result<Vec<f64>> {
    if !(vf_target > 0.0 && vf_target <= 1.0) {
        return Err(Error::InvalidDesign(format!(
            "volume fraction {vf_target} outside (0, 1]"
        )));
    }
    if vf_target == 1.0 {
        return Ok(vec![1.0; volumes.len()]);
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut x: Vec<f64> = volumes.iter().map(|_| rng.random::<f64>()).collect();
    for _ in 0..10_000 {
        let v = volume_fraction(&x, volumes);
        if (v - vf_target).abs() <= RANDOM_VOLUME_TOL && v <= vf_target + RANDOM_VOLUME_TOL {
            return Ok(x);
        }
        if v <= 0.0 {
            x.iter_mut().for_each(|r| *r = vf_target);
            continue;
        }
        let scale = vf_target / v;
        x.iter_mut().for_each(|r| *r = (*r * scale).clamp(0.0, 1.0));
    }
    Err(Error::InvalidDesign(
        "random initial guess did not reach the volume target".into(),
    ))
}

pub fn initial_design(guess: &InitialGuess, volumes: &[f64], vf_target: f64) -> Result<Vec<f64>> {
    match guess {
        InitialGuess::Uniform => Ok(vec![vf_target; volumes.len()]),
        InitialGuess::Random { seed } => random_feasible(volumes, vf_target, *seed),
        InitialGuess::Field(rho) => {
            if rho.len() != volumes.len() {
                return Err(Error::DimensionMismatch {
                    expected: volumes.len(),
                    got: rho.len(),
                });
            }
            if rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(Error::InvalidDesign(
                    "warm-start densities outside [0, 1]".into(),
                ));
            }
            Ok(rho.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_guess_is_feasible_and_reproducible() {
        let v = vec![1.0; 1200];
        for vf in [0.05, 0.3, 0.5, 0.9] {
            let a = random_feasible(&v, vf, 42).unwrap();
            assert!((volume_fraction(&a, &v) - vf).abs() <= RANDOM_VOLUME_TOL);
            assert!(a.iter().all(|r| (0.0..=1.0).contains(r)));
            assert_eq!(a, random_feasible(&v, vf, 42).unwrap());
            assert_ne!(a, random_feasible(&v, vf, 43).unwrap());
        }
    }

    #[test]
    fn full_volume_saturates() {
        let v = vec![0.25; 30];
        let x = random_feasible(&v, 1.0, 7).unwrap();
        assert!((volume_fraction(&x, &v) - 1.0).abs() <= RANDOM_VOLUME_TOL);
    }

    #[test]
    fn warm_start_checks() {
        assert!(initial_design(&InitialGuess::Field(vec![0.5; 3]), &[1.0; 4], 0.5).is_err());
        assert!(initial_design(&InitialGuess::Field(vec![1.5; 4]), &[1.0; 4], 0.5).is_err());
        assert_eq!(
            initial_design(&InitialGuess::Uniform, &[1.0; 2], 0.4).unwrap(),
            vec![0.4, 0.4]
        );
    }
}
