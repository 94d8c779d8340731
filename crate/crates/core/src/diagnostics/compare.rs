use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fem::{compliance, FeModel};
use crate::material::MaterialLaw;
use crate::mesh::MeshModel;
use crate::optimizer::RunRecord;

use super::{checkerboard_index, discreteness_measure, threshold_project};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub final_compliance: f64,
    /// Compliance of the thresholded 0/1 design from a fresh solve.
    pub threshold_compliance: f64,
    pub discreteness: f64,
    pub checkerboard: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGap {
    pub a: usize,
    pub b: usize,
    pub raw_gap: f64,
    pub threshold_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub gaps: Vec<PairGap>,
}

/// `|a - b| / min(|a|, |b|)`, zero when both are equal.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().min(b.abs())
}

impl ComparisonTable {
    pub fn max_raw_gap(&self) -> f64 {
        self.gaps.iter().map(|g| g.raw_gap).fold(0.0, f64::max)
    }

    pub fn max_threshold_gap(&self) -> f64 {
        self.gaps
            .iter()
            .map(|g| g.threshold_gap)
            .fold(0.0, f64::max)
    }

    /// Two CSV blocks separated by a blank line: per-run rows, then pairwise gaps.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "label,final_compliance,threshold_compliance,discreteness,checkerboard,iterations,converged\n",
        );
        for r in &self.rows {
            let cb = r
                .checkerboard
                .map(|c| format!("{c:.16e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{},{},{}",
                r.label,
                r.final_compliance,
                r.threshold_compliance,
                r.discreteness,
                cb,
                r.iterations,
                r.converged
            );
        }
        out.push_str("\nrun_a,run_b,raw_gap,threshold_gap\n");
        for g in &self.gaps {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e}",
                self.rows[g.a].label, self.rows[g.b].label, g.raw_gap, g.threshold_gap
            );
        }
        out
    }
}

/// Tabulates final and thresholded compliances of runs on the same mesh and volume
/// fraction, with relative gaps for every pair of runs.
pub fn compare_runs(
    mesh: &MeshModel,
    law: &MaterialLaw,
    records: &[RunRecord],
) -> Result<ComparisonTable> {
    let fe = FeModel::new(mesh, law.nu)?;
    let mut rows = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        if rec.nx != mesh.nx || rec.ny != mesh.ny || rec.final_physical.len() != mesh.num_elements()
        {
            return Err(Error::IncompatibleRecords(format!(
                "record {k} is {}x{}, mesh is {}x{}",
                rec.nx, rec.ny, mesh.nx, mesh.ny
            )));
        }
        if rec.vf_target != records[0].vf_target {
            return Err(Error::IncompatibleRecords(format!(
                "record {k} has volume fraction {}, expected {}",
                rec.vf_target, records[0].vf_target
            )));
        }
        let binary = threshold_project(&rec.final_physical, &mesh.elem_volume, rec.vf_target);
        let solved = fe.solve(mesh, &law.interpolate_modulus(&binary))?;
        rows.push(ComparisonRow {
            label: if rec.label.is_empty() {
                format!("run{k}")
            } else {
                rec.label.clone()
            },
            final_compliance: rec.final_compliance,
            threshold_compliance: compliance(&solved),
            discreteness: discreteness_measure(&rec.final_physical),
            checkerboard: checkerboard_index(mesh, &rec.final_physical).ok(),
            iterations: rec.iterations(),
            converged: rec.all_stages_converged(),
        });
    }
    let mut gaps = Vec::new();
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            gaps.push(PairGap {
                a,
                b,
                raw_gap: relative_gap(rows[a].final_compliance, rows[b].final_compliance),
                threshold_gap: relative_gap(
                    rows[a].threshold_compliance,
                    rows[b].threshold_compliance,
                ),
            });
        }
    }
    Ok(ComparisonTable { rows, gaps })
}
