use crate::error::{Error, Result};

/// Stage-wise schedule for the penalization exponent and the Heaviside sharpness.
///
/// The p stages run first (at the first beta, if any); the remaining beta stages then
/// run at the final p.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationSchedule {
    pub p_stages: Vec<f64>,
    pub beta_stages: Vec<f64>,
    /// A stage ends once the largest density change drops below this.
    pub stage_convergence_tol: f64,
    pub stage_max_iters: usize,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        Self {
            p_stages: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            beta_stages: Vec::new(),
            stage_convergence_tol: 0.01,
            stage_max_iters: 200,
        }
    }
}

/// Doubling ramp `1, 2, 4, ..., 512`.
pub fn default_beta_ramp() -> Vec<f64> {
    (0..10).map(|k| f64::from(1u32 << k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub index: usize,
    pub p: f64,
    pub beta: f64,
}

impl ContinuationSchedule {
    /// Single-stage schedule at fixed `p`.
    pub fn direct(p: f64) -> Self {
        Self {
            p_stages: vec![p],
            ..Self::default()
        }
    }

    pub fn stepped(p_stages: Vec<f64>) -> Self {
        Self {
            p_stages,
            ..Self::default()
        }
    }

    pub fn with_beta(mut self, beta_stages: Vec<f64>) -> Self {
        self.beta_stages = beta_stages;
        self
    }

    /// Standard beta ramp `1, 2, 4, ..., 512`.
    pub fn with_default_beta(self) -> Self {
        self.with_beta(default_beta_ramp())
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_stages.is_empty() {
            return Err(Error::InvalidSchedule(
                "at least one p stage is required".into(),
            ));
        }
        if self.p_stages.iter().any(|&p| !(p >= 1.0 && p.is_finite())) {
            return Err(Error::InvalidSchedule("every p stage must be >= 1".into()));
        }
        if self.p_stages.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSchedule(
                "p stages must be nondecreasing".into(),
            ));
        }
        if self
            .beta_stages
            .iter()
            .any(|&b| !(b >= 0.0 && b.is_finite()))
        {
            return Err(Error::InvalidSchedule("beta stages must be >= 0".into()));
        }
        if self.beta_stages.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSchedule(
                "beta stages must be nondecreasing".into(),
            ));
        }
        if !(self.stage_convergence_tol > 0.0) || self.stage_max_iters == 0 {
            return Err(Error::InvalidSchedule(
                "stage tolerance and iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn num_stages(&self) -> usize {
        self.p_stages.len() + self.beta_stages.len().saturating_sub(1)
    }

    /// `(p, beta)` of stage `index`. Schedules without beta stages report beta = 0.
    pub fn stage(&self, index: usize) -> Option<Stage> {
        let np = self.p_stages.len();
        let first_beta = self.beta_stages.first().copied().unwrap_or(0.0);
        if index < np {
            Some(Stage {
                index,
                p: self.p_stages[index],
                beta: first_beta,
            })
        } else if index < self.num_stages() {
            Some(Stage {
                index,
                p: *self.p_stages.last()?,
                beta: self.beta_stages[index - np + 1],
            })
        } else {
            None
        }
    }

    pub fn stages(&self) -> Vec<Stage> {
        (0..self.num_stages())
            .filter_map(|k| self.stage(k))
            .collect()
    }
}

/// Progress of the current stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageState {
    pub index: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Advance {
    /// The current stage has neither converged nor hit its cap.
    Continue,
    Next(Stage),
    Terminal,
}

pub fn continuation_advance(schedule: &ContinuationSchedule, state: &StageState) -> Advance {
    if !state.converged && state.iterations < schedule.stage_max_iters {
        return Advance::Continue;
    }
    match schedule.stage(state.index + 1) {
        Some(stage) => Advance::Next(stage),
        None => Advance::Terminal,
    }
}
