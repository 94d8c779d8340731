use crate::diagnostics::{
    checkerboard_index, descent_direction_check, discreteness_measure, nonnegative_terms,
};
use crate::error::{Error, Result};
use crate::fem::{compliance, FeModel};
use crate::filters::{FilterPipeline, FilterSpec};
use crate::material::{volume_fraction, DesignField, MaterialLaw};
use crate::mesh::MeshModel;

use super::continuation::{continuation_advance, Advance, ContinuationSchedule, StageState};
use super::oc::{oc_update, oc_update_with, OcSettings};

/// One optimizer iteration. Compliance and the descent check refer to the design
/// entering the iteration; volume, change and the field measures refer to the
/// updated design.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub stage: usize,
    pub stage_iteration: usize,
    pub p: f64,
    pub beta: f64,
    pub compliance: f64,
    pub volume_fraction: f64,
    pub max_change: f64,
    pub lambda: f64,
    /// Move limit used for the step; larger than the configured one only when the
    /// volume target was unreachable within it.
    pub move_limit: f64,
    pub descent_dot: f64,
    pub discreteness: f64,
    /// `None` on meshes smaller than 2x2.
    pub checkerboard: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub index: usize,
    pub p: f64,
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub nx: usize,
    pub ny: usize,
    pub vf_target: f64,
    pub history: Vec<IterationRecord>,
    pub stages: Vec<StageSummary>,
    /// Final design variables.
    pub final_design: Vec<f64>,
    /// Final densities seen by the finite element model.
    pub final_physical: Vec<f64>,
    /// Compliance of the final physical field at the last stage's penalization.
    pub final_compliance: f64,
    pub final_p: f64,
    pub final_beta: f64,
}

impl RunRecord {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn all_stages_converged(&self) -> bool {
        self.stages.iter().all(|s| s.converged)
    }

    pub fn descent_violations(&self) -> usize {
        self.history
            .iter()
            .filter(|it| !(it.descent_dot > 0.0))
            .count()
    }

    pub fn max_checkerboard(&self) -> Option<f64> {
        self.history
            .iter()
            .filter_map(|it| it.checkerboard)
            .reduce(f64::max)
    }
}

/// Nested optimization: each iteration solves equilibrium for the current design,
/// filters the sensitivities, checks that the filtered direction is still an ascent
/// direction, and takes one OC step. Stages follow `schedule`; a stage ends when the
/// largest density change falls below the stage tolerance or its iteration cap is hit.
pub fn run_optimization(
    mesh: &MeshModel,
    law: &MaterialLaw,
    field: &DesignField,
    filter: &FilterSpec,
    schedule: &ContinuationSchedule,
    settings: &OcSettings,
) -> Result<RunRecord> {
    law.validate()?;
    schedule.validate()?;
    settings.validate()?;
    let n = mesh.num_elements();
    if field.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: field.len(),
        });
    }
    let fe = FeModel::new(mesh, law.nu)?;
    let pipeline = FilterPipeline::new(mesh, *filter)?;
    let volumes = &mesh.elem_volume;
    let vf = field.vf_target;

    let mut rho = field.values().to_vec();
    let mut history = Vec::new();
    let mut stages = Vec::new();
    let mut stage = schedule
        .stage(0)
        .expect("validated schedule has a first stage");

    loop {
        let stage_law = law.with_penalty(stage.p);
        let beta = stage.beta;
        let mut state = StageState {
            index: stage.index,
            iterations: 0,
            converged: false,
        };
        while continuation_advance(schedule, &state) == Advance::Continue {
            let fwd = pipeline.forward(&rho, beta)?;
            let moduli = stage_law.interpolate_modulus(&fwd.physical);
            let solved = fe.solve(mesh, &moduli)?;
            let c = compliance(&solved);
            let grad_physical = fe.sensitivities(mesh, &stage_law, &fwd.physical, &solved)?;
            if let Some((element, &value)) =
                grad_physical.iter().enumerate().find(|(_, &g)| g > 0.0)
            {
                return Err(Error::PositiveGradient { element, value });
            }
            let direction = pipeline.search_direction(&rho, &fwd, beta, &grad_physical)?;
            let dot = descent_direction_check(&grad_physical, &direction);
            if !(dot > 0.0) {
                return Err(Error::DescentViolation {
                    stage: stage.index,
                    iteration: state.iterations,
                    dot,
                    nonneg_terms: nonnegative_terms(&grad_physical, &direction),
                    terms: n,
                });
            }

            let mut step_settings = *settings;
            let step = loop {
                let attempt = if pipeline.is_identity_map() {
                    oc_update(&rho, &direction, volumes, vf, &step_settings)
                } else {
                    let vol_grad = pipeline.pullback(&rho, &fwd, beta, volumes)?;
                    oc_update_with(
                        &rho,
                        &direction,
                        &vol_grad,
                        |x| {
                            Ok(volume_fraction(
                                &pipeline.forward(x, beta)?.physical,
                                volumes,
                            ))
                        },
                        vf,
                        &step_settings,
                    )
                };
                match attempt {
                    // A projection stage change can push the physical volume above the
                    // target by more than one move-limited step can remove.
                    Err(Error::BracketFailure(_)) if step_settings.move_limit < 1.0 => {
                        step_settings.move_limit = (2.0 * step_settings.move_limit).min(1.0);
                    }
                    other => break other?,
                }
            };

            let max_change = rho
                .iter()
                .zip(&step.rho)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            rho = step.rho;
            let physical = if pipeline.is_identity_map() {
                rho.clone()
            } else {
                pipeline.forward(&rho, beta)?.physical
            };
            history.push(IterationRecord {
                iteration: history.len(),
                stage: stage.index,
                stage_iteration: state.iterations,
                p: stage.p,
                beta,
                compliance: c,
                volume_fraction: step.volume_fraction,
                max_change,
                lambda: step.lambda,
                move_limit: step_settings.move_limit,
                descent_dot: dot,
                discreteness: discreteness_measure(&physical),
                checkerboard: checkerboard_index(mesh, &physical).ok(),
            });
            state.iterations += 1;
            state.converged = max_change < schedule.stage_convergence_tol;
        }
        stages.push(StageSummary {
            index: stage.index,
            p: stage.p,
            beta,
            iterations: state.iterations,
            converged: state.converged,
        });
        match continuation_advance(schedule, &state) {
            Advance::Next(next) => stage = next,
            _ => break,
        }
    }

    let last = stages.last().expect("at least one stage ran");
    let final_law = law.with_penalty(last.p);
    let final_physical = pipeline.forward(&rho, last.beta)?.physical;
    let solved = fe.solve(mesh, &final_law.interpolate_modulus(&final_physical))?;
    Ok(RunRecord {
        label: String::new(),
        nx: mesh.nx,
        ny: mesh.ny,
        vf_target: vf,
        history,
        final_compliance: compliance(&solved),
        final_p: last.p,
        final_beta: last.beta,
        stages,
        final_design: rho,
        final_physical,
    })
}
