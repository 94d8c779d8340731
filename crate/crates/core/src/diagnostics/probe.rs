//! Sampling probes for convexity-type inequalities along segments between designs.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{compliance, FeModel};
use crate::filters::FilterPipeline;
use crate::material::MaterialLaw;
use crate::mesh::MeshModel;

/// Relative tolerance applied to every probed inequality; FE solves carry residual
/// noise around 1e-10.
pub const PROBE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    /// `f(l x1 + (1 - l) x2) <= l f(x1) + (1 - l) f(x2)`
    Convex,
    /// `f(l x1 + (1 - l) x2) <= max(f(x1), f(x2))`
    Quasiconvex,
    /// Quasiconvex inequality, tested only on pairs with `f(x1) != f(x2)`.
    StrictlyQuasiconvex,
    /// `f` nondecreasing along the ray from `x1` (taken as the minimizer) through `x2`.
    UnimodalRay,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Convex => "convex",
            Property::Quasiconvex => "quasiconvex",
            Property::StrictlyQuasiconvex => "strictly_quasiconvex",
            Property::UnimodalRay => "unimodal_ray",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(Property::Convex),
            "quasiconvex" => Ok(Property::Quasiconvex),
            "strictly_quasiconvex" => Ok(Property::StrictlyQuasiconvex),
            "unimodal_ray" => Ok(Property::UnimodalRay),
            other => Err(Error::Objective(format!(
                "unknown probe property `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub pair: usize,
    pub lambda: f64,
    /// Gap divided by `max(|f(x1)|, |f(x2)|)`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub property: Property,
    pub pairs_tested: usize,
    /// Pairs skipped by the property's precondition (equal values for strict quasiconvexity).
    pub pairs_skipped: usize,
    pub samples: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    /// Largest relative gap seen; `<= tolerance` exactly when there are no violations.
    pub max_gap: f64,
    /// Lowest level `alpha` whose lower level set contains every probed endpoint.
    pub alpha: f64,
}

impl ProbeReport {
    fn empty(property: Property, samples: usize) -> Self {
        Self {
            property,
            pairs_tested: 0,
            pairs_skipped: 0,
            samples,
            tolerance: PROBE_TOLERANCE,
            violations: Vec::new(),
            max_gap: f64::NEG_INFINITY,
            alpha: f64::NEG_INFINITY,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn eval<F>(objective: &F, x: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let v = objective(x).map_err(|e| Error::Objective(e.to_string()))?;
    if !v.is_finite() {
        return Err(Error::Objective(format!("non-finite objective value {v}")));
    }
    Ok(v)
}

fn mix(x1: &[f64], x2: &[f64], lambda: f64) -> Vec<f64> {
    x1.iter()
        .zip(x2)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect()
}

fn probe_into<F>(
    report: &mut ProbeReport,
    pair: usize,
    objective: &F,
    x1: &[f64],
    x2: &[f64],
) -> Result<()>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if x1.len() != x2.len() {
        return Err(Error::DimensionMismatch {
            expected: x1.len(),
            got: x2.len(),
        });
    }
    let f1 = eval(objective, x1)?;
    let f2 = eval(objective, x2)?;
    report.alpha = report.alpha.max(f1.max(f2));
    let scale = {
        let s = f1.abs().max(f2.abs());
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    if report.property == Property::StrictlyQuasiconvex
        && (f1 - f2).abs() <= PROBE_TOLERANCE * scale
    {
        report.pairs_skipped += 1;
        return Ok(());
    }
    report.pairs_tested += 1;
    let samples = report.samples;
    let grid = (1..=samples).map(|k| k as f64 / (samples + 1) as f64);

    let mut record = |lambda: f64, gap: f64| {
        let rel = gap / scale;
        report.max_gap = report.max_gap.max(rel);
        if rel > PROBE_TOLERANCE {
            report.violations.push(Violation {
                pair,
                lambda,
                gap: rel,
            });
        }
    };

    match report.property {
        Property::Convex => {
            for l in grid {
                let v = eval(objective, &mix(x1, x2, l))?;
                record(l, v - (l * f1 + (1.0 - l) * f2));
            }
        }
        Property::Quasiconvex | Property::StrictlyQuasiconvex => {
            for l in grid {
                let v = eval(objective, &mix(x1, x2, l))?;
                record(l, v - f1.max(f2));
            }
        }
        Property::UnimodalRay => {
            // t measures distance from x1 towards x2
            let mut prev = f1;
            for t in grid.chain(std::iter::once(1.0)) {
                let v = if t == 1.0 {
                    f2
                } else {
                    eval(objective, &mix(x1, x2, 1.0 - t))?
                };
                record(t, prev - v);
                prev = v;
            }
        }
    }
    Ok(())
}

/// Tests `property` on `samples` evenly spaced points strictly inside the segment
/// between `x1` and `x2`.
pub fn convexity_probe<F>(
    objective: &F,
    x1: &[f64],
    x2: &[f64],
    property: Property,
    samples: usize,
) -> Result<ProbeReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut report = ProbeReport::empty(property, samples);
    probe_into(&mut report, 0, objective, x1, x2)?;
    Ok(report)
}

/// [`convexity_probe`] over many pairs, merged into one report.
pub fn convexity_probe_pairs<F>(
    objective: &F,
    pairs: &[(Vec<f64>, Vec<f64>)],
    property: Property,
    samples: usize,
) -> Result<ProbeReport>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut report = ProbeReport::empty(property, samples);
    for (k, (x1, x2)) in pairs.iter().enumerate() {
        probe_into(&mut report, k, objective, x1, x2)?;
    }
    Ok(report)
}

/// Compliance of a density field under a fixed material law, optionally routed
/// through a filter pipeline at a fixed Heaviside sharpness.
#[derive(Debug, Clone)]
pub struct ComplianceObjective {
    mesh: MeshModel,
    fe: FeModel,
    law: MaterialLaw,
    filter: Option<(FilterPipeline, f64)>,
}

impl ComplianceObjective {
    pub fn new(mesh: &MeshModel, law: MaterialLaw) -> Result<Self> {
        law.validate()?;
        Ok(Self {
            fe: FeModel::new(mesh, law.nu)?,
            mesh: mesh.clone(),
            law,
            filter: None,
        })
    }

    pub fn with_filter(mut self, pipeline: FilterPipeline, beta: f64) -> Self {
        self.filter = Some((pipeline, beta));
        self
    }

    pub fn evaluate(&self, rho: &[f64]) -> Result<f64> {
        let physical = match &self.filter {
            Some((pipe, beta)) => pipe.forward(rho, *beta)?.physical,
            None => rho.to_vec(),
        };
        let moduli = self.law.interpolate_modulus(&physical);
        let state = self.fe.solve(&self.mesh, &moduli)?;
        Ok(compliance(&state))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_objective_has_no_violations() {
        let a = [0.3, -1.2, 2.0, 0.7];
        let f = |x: &[f64]| -> Result<f64> {
            Ok(a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + 4.0)
        };
        let x1 = [0.1, 0.9, 0.4, 0.0];
        let x2 = [1.0, 0.2, 0.6, 0.5];
        for property in [
            Property::Convex,
            Property::Quasiconvex,
            Property::StrictlyQuasiconvex,
        ] {
            let r = convexity_probe(&f, &x1, &x2, property, 9).unwrap();
            assert!(r.passed(), "{property}");
            assert!(r.max_gap <= r.tolerance);
        }
    }

    #[test]
    fn concave_objective_is_flagged() {
        let f = |x: &[f64]| -> Result<f64> { Ok(-x.iter().map(|v| v * v).sum::<f64>()) };
        let r = convexity_probe(&f, &[0.0, 0.0], &[1.0, 1.0], Property::Convex, 9).unwrap();
        assert_eq!(r.violations.len(), 9);
        assert!(r.max_gap > r.tolerance);
    }

    #[test]
    fn quasiconvex_but_not_convex() {
        // sqrt on [0, 1]: concave but monotone
        let f = |x: &[f64]| -> Result<f64> { Ok(x[0].abs().sqrt()) };
        let conv = convexity_probe(&f, &[0.0], &[1.0], Property::Convex, 9).unwrap();
        let quasi = convexity_probe(&f, &[0.0], &[1.0], Property::Quasiconvex, 9).unwrap();
        assert!(!conv.passed());
        assert!(quasi.passed());
    }

    #[test]
    fn strict_skips_equal_values() {
        let f = |x: &[f64]| -> Result<f64> { Ok(x[0] * x[0]) };
        let r = convexity_probe(&f, &[-1.0], &[1.0], Property::StrictlyQuasiconvex, 5).unwrap();
        assert_eq!(r.pairs_skipped, 1);
        assert_eq!(r.pairs_tested, 0);
    }

    #[test]
    fn unimodal_ray_detects_bump() {
        let bowl = |x: &[f64]| -> Result<f64> { Ok(x[0] * x[0]) };
        let r = convexity_probe(&bowl, &[0.0], &[2.0], Property::UnimodalRay, 9).unwrap();
        assert!(r.passed());
        let bump = |x: &[f64]| -> Result<f64> { Ok((3.0 * x[0]).sin()) };
        let r = convexity_probe(&bump, &[0.0], &[2.0], Property::UnimodalRay, 9).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn objective_errors_propagate() {
        let f = |_: &[f64]| -> Result<f64> { Err(Error::SingularSystem { equation: 0 }) };
        assert!(matches!(
            convexity_probe(&f, &[0.0], &[1.0], Property::Convex, 3),
            Err(Error::Objective(_))
        ));
    }
}
