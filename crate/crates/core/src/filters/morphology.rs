//! Erode and dilate operators built on weighted arithmetic, geometric and harmonic
//! means. Dilate is the complement dual of erode: `dilate(rho) = 1 - erode(1 - rho)`.
//! As `epsilon -> 0` the harmonic erode tends to the neighborhood minimum.

use crate::error::{Error, Result};

use super::{FilterKind, FilterSpec, Mean, NeighborhoodTable};

fn check(table: &NeighborhoodTable, rho: &[f64], spec: &FilterSpec) -> Result<()> {
    if rho.len() != table.len() {
        return Err(Error::DimensionMismatch {
            expected: table.len(),
            got: rho.len(),
        });
    }
    if !matches!(spec.kind, FilterKind::Dilate | FilterKind::Erode) {
        return Err(Error::InvalidFilter(format!(
            "erode/dilate called with filter kind {}",
            spec.kind
        )));
    }
    if spec.mean != Mean::Arithmetic && !(spec.epsilon > 0.0) {
        return Err(Error::InvalidFilter(format!(
            "epsilon {} must be > 0 for the {} mean",
            spec.epsilon, spec.mean
        )));
    }
    Ok(())
}

/// Unclamped erode value of element `e`.
fn erode_at(table: &NeighborhoodTable, x: &[f64], e: usize, mean: Mean, eps: f64) -> f64 {
    let wsum = table.weight_sum(e);
    match mean {
        Mean::Arithmetic => table.neighbors(e).map(|(i, w, _)| w * x[i]).sum::<f64>() / wsum,
        Mean::Geometric => {
            let s: f64 = table
                .neighbors(e)
                .map(|(i, w, _)| w * (x[i] + eps).ln())
                .sum();
            (s / wsum).exp() - eps
        }
        Mean::Harmonic => {
            let s: f64 = table.neighbors(e).map(|(i, w, _)| w / (x[i] + eps)).sum();
            wsum / s - eps
        }
    }
}

/// Partial derivatives of the erode value of `e` with respect to its neighbors,
/// in neighborhood order.
fn erode_partials(
    table: &NeighborhoodTable,
    x: &[f64],
    e: usize,
    mean: Mean,
    eps: f64,
) -> Vec<f64> {
    let wsum = table.weight_sum(e);
    match mean {
        Mean::Arithmetic => table.neighbors(e).map(|(_, w, _)| w / wsum).collect(),
        Mean::Geometric => {
            let g = (erode_at(table, x, e, mean, eps) + eps).max(0.0);
            table
                .neighbors(e)
                .map(|(i, w, _)| g * w / (wsum * (x[i] + eps)))
                .collect()
        }
        Mean::Harmonic => {
            let s: f64 = table.neighbors(e).map(|(i, w, _)| w / (x[i] + eps)).sum();
            table
                .neighbors(e)
                .map(|(i, w, _)| wsum * w / ((x[i] + eps).powi(2) * s * s))
                .collect()
        }
    }
}

/// Applies the erode or dilate operator selected by `spec`; outputs are clamped to `[0, 1]`.
pub fn erode_dilate(table: &NeighborhoodTable, rho: &[f64], spec: &FilterSpec) -> Result<Vec<f64>> {
    check(table, rho, spec)?;
    let eps = spec.epsilon;
    let n = table.len();
    let out = match spec.kind {
        FilterKind::Erode => (0..n)
            .map(|e| erode_at(table, rho, e, spec.mean, eps))
            .collect::<Vec<_>>(),
        _ => {
            let comp: Vec<f64> = rho.iter().map(|r| 1.0 - r).collect();
            (0..n)
                .map(|e| 1.0 - erode_at(table, &comp, e, spec.mean, eps))
                .collect()
        }
    };
    Ok(out.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Pulls a gradient with respect to the eroded/dilated field back to `rho`.
pub fn erode_dilate_chain_rule(
    table: &NeighborhoodTable,
    rho: &[f64],
    spec: &FilterSpec,
    grad_filtered: &[f64],
) -> Result<Vec<f64>> {
    check(table, rho, spec)?;
    if grad_filtered.len() != rho.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.len(),
            got: grad_filtered.len(),
        });
    }
    // d(1 - erode(1 - rho))/d rho_i = erode'(1 - rho)_i
    let x: Vec<f64> = match spec.kind {
        FilterKind::Erode => rho.to_vec(),
        _ => rho.iter().map(|r| 1.0 - r).collect(),
    };
    let mut out = vec![0.0; rho.len()];
    for (e, &g) in grad_filtered.iter().enumerate() {
        let partials = erode_partials(table, &x, e, spec.mean, spec.epsilon);
        for (&i, d) in table.neighbor_ids(e).iter().zip(partials) {
            out[i] += g * d;
        }
    }
    Ok(out)
}
