use crate::error::{Error, Result};
use crate::material::volume_fraction;

/// Number of bracket doublings (or halvings) tried before giving up.
const MAX_BRACKET_EXPANSIONS: usize = 100;
const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcSettings {
    pub move_limit: f64,
    pub damping: f64,
    /// Accepted distance below the target volume fraction.
    pub bisection_tol: f64,
    /// Initial multiplier search interval `(low, high)`, both positive.
    pub lambda_bracket: (f64, f64),
}

impl Default for OcSettings {
    fn default() -> Self {
        Self {
            move_limit: 0.2,
            damping: 0.5,
            bisection_tol: 1e-9,
            lambda_bracket: (1e-9, 1e9),
        }
    }
}

impl OcSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.move_limit >= 0.0 && self.move_limit <= 1.0) {
            return Err(Error::InvalidSettings(format!(
                "move limit {} outside [0, 1]",
                self.move_limit
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidSettings(format!(
                "damping {} outside (0, 1]",
                self.damping
            )));
        }
        if !(self.bisection_tol > 0.0) {
            return Err(Error::InvalidSettings(
                "bisection tolerance must be positive".into(),
            ));
        }
        let (lo, hi) = self.lambda_bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidSettings(format!(
                "bad multiplier bracket ({lo}, {hi})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcStep {
    pub rho: Vec<f64>,
    /// Volume multiplier of the accepted update.
    pub lambda: f64,
    /// Volume fraction of the accepted update, as measured by the caller's volume map.
    pub volume_fraction: f64,
}

/// Fixed-point candidate for a given multiplier:
/// `rho_e (-g_e / (lambda dV_e))^eta`, clamped to the move-limit box.
pub fn oc_candidate(
    rho: &[f64],
    grad: &[f64],
    vol_grad: &[f64],
    lambda: f64,
    settings: &OcSettings,
) -> Vec<f64> {
    let m = settings.move_limit;
    rho.iter()
        .zip(grad)
        .zip(vol_grad)
        .map(|((&r, &g), &dv)| {
            let ratio = (-g).max(0.0) / (lambda * dv.max(f64::MIN_POSITIVE));
            let lower = (r - m).max(0.0);
            let upper = (r + m).min(1.0);
            (r * ratio.powf(settings.damping)).clamp(lower, upper)
        })
        .collect()
}

/// OC update against an arbitrary (monotone) volume map, used when the constraint
/// acts on filtered densities. `vol_grad` is the derivative of the constrained
/// volume with respect to each design variable.
pub fn oc_update_with<V>(
    rho: &[f64],
    grad: &[f64],
    vol_grad: &[f64],
    volume_of: V,
    vf_target: f64,
    settings: &OcSettings,
) -> Result<OcStep>
where
    V: Fn(&[f64]) -> Result<f64>,
{
    settings.validate()?;
    let n = rho.len();
    for len in [grad.len(), vol_grad.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    if let Some((element, &value)) = grad.iter().enumerate().find(|(_, &g)| g > 0.0) {
        return Err(Error::PositiveGradient { element, value });
    }
    if !(vf_target > 0.0 && vf_target < 1.0 + 1e-15) {
        return Err(Error::InvalidDesign(format!(
            "volume fraction {vf_target} outside (0, 1]"
        )));
    }

    let tol = settings.bisection_tol;
    let eval = |lambda: f64| -> Result<(Vec<f64>, f64)> {
        let x = oc_candidate(rho, grad, vol_grad, lambda, settings);
        let v = volume_of(&x)?;
        Ok((x, v))
    };
    let accept = |x: Vec<f64>, v: f64, lambda: f64| OcStep {
        rho: x,
        lambda,
        volume_fraction: v,
    };

    let (mut lo, mut hi) = settings.lambda_bracket;
    let (mut x_hi, mut v_hi) = eval(hi)?;
    let mut expansions = 0;
    while v_hi > vf_target {
        if expansions == MAX_BRACKET_EXPANSIONS {
            return Err(Error::BracketFailure(expansions));
        }
        lo = hi;
        hi *= 2.0;
        (x_hi, v_hi) = eval(hi)?;
        expansions += 1;
    }
    if v_hi >= vf_target - tol {
        return Ok(accept(x_hi, v_hi, hi));
    }
    let (mut x_lo, mut v_lo) = eval(lo)?;
    expansions = 0;
    while v_lo <= vf_target {
        if v_lo >= vf_target - tol {
            return Ok(accept(x_lo, v_lo, lo));
        }
        if expansions == MAX_BRACKET_EXPANSIONS {
            // even the most generous update stays below the target: the
            // constraint is inactive and the largest admissible step is taken
            return Ok(accept(x_lo, v_lo, lo));
        }
        hi = lo;
        x_hi = x_lo;
        v_hi = v_lo;
        lo *= 0.5;
        (x_lo, v_lo) = eval(lo)?;
        expansions += 1;
    }

    // invariant: v(lo) > target >= v(hi)
    for _ in 0..MAX_BISECTIONS {
        if v_hi >= vf_target - tol || hi / lo - 1.0 <= 4.0 * f64::EPSILON {
            break;
        }
        let mid = (lo * hi).sqrt();
        let (x_mid, v_mid) = eval(mid)?;
        if v_mid > vf_target {
            lo = mid;
        } else {
            hi = mid;
            x_hi = x_mid;
            v_hi = v_mid;
        }
    }
    Ok(accept(x_hi, v_hi, hi))
}

/// OC update with the volume constraint on the design variables themselves,
/// bisecting the multiplier until `sum v_i rho_i / V0` meets `vf_target` from below.
pub fn oc_update(
    rho: &[f64],
    grad: &[f64],
    volumes: &[f64],
    vf_target: f64,
    settings: &OcSettings,
) -> Result<OcStep> {
    if volumes.len() != rho.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.len(),
            got: volumes.len(),
        });
    }
    oc_update_with(
        rho,
        grad,
        volumes,
        |x| Ok(volume_fraction(x, volumes)),
        vf_target,
        settings,
    )
}
