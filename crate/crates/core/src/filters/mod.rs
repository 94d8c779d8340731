//! Neighborhood filters: sensitivity filtering, density filtering as an explicit
//! linear map, Heaviside projection and mean-based erode/dilate operators.

mod density;
mod heaviside;
mod morphology;
mod neighborhood;
mod pipeline;
mod sensitivity;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use density::{
    apply_density_filter, build_filter_matrix, density_filter_chain_rule,
    filter_matrix_invertibility_check, FilterMatrix, InvertibilityReport,
};
pub use heaviside::{heaviside_chain_rule, heaviside_multiplier, heaviside_project};
pub use morphology::{erode_dilate, erode_dilate_chain_rule};
pub use neighborhood::{build_neighborhoods, NeighborhoodTable};
pub use pipeline::{FilterPipeline, Forward};
pub use sensitivity::{filter_sensitivities, SENSITIVITY_DENOMINATOR_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    None,
    Sensitivity,
    Density,
    Heaviside,
    Dilate,
    Erode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weighting {
    /// Cone weights `r - |x_i - x_e|`.
    Linear,
    Constant,
}

/// Mean used by the erode/dilate operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mean {
    Arithmetic,
    Geometric,
    Harmonic,
}

macro_rules! string_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $($ty::$variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::InvalidFilter(format!(
                        concat!("unknown ", stringify!($ty), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

string_enum!(FilterKind {
    None => "none",
    Sensitivity => "sensitivity",
    Density => "density",
    Heaviside => "heaviside",
    Dilate => "dilate",
    Erode => "erode",
});
string_enum!(Weighting { Linear => "linear", Constant => "constant" });
string_enum!(Mean {
    Arithmetic => "arithmetic",
    Geometric => "geometric",
    Harmonic => "harmonic",
});

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Radius in length units.
    pub r: f64,
    pub weighting: Weighting,
    /// Initial Heaviside sharpness; continuation replaces it stage by stage.
    pub beta: f64,
    pub mean: Mean,
    pub epsilon: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self {
            kind: FilterKind::None,
            r: 0.0,
            weighting: Weighting::Linear,
            beta: 1.0,
            mean: Mean::Harmonic,
            epsilon: 1e-3,
        }
    }
}

impl FilterSpec {
    pub fn new(kind: FilterKind, r: f64) -> Self {
        Self {
            kind,
            r,
            ..Self::default()
        }
    }

    pub fn with_weighting(self, weighting: Weighting) -> Self {
        Self { weighting, ..self }
    }

    pub fn with_mean(self, mean: Mean, epsilon: f64) -> Self {
        Self {
            mean,
            epsilon,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidFilter(format!(
                "radius {} must be >= 0",
                self.r
            )));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidFilter(format!(
                "beta {} must be >= 0",
                self.beta
            )));
        }
        let morph = matches!(self.kind, FilterKind::Dilate | FilterKind::Erode);
        if morph && self.mean != Mean::Arithmetic && !(self.epsilon > 0.0) {
            return Err(Error::InvalidFilter(format!(
                "epsilon {} must be > 0 for the {} mean",
                self.epsilon, self.mean
            )));
        }
        Ok(())
    }
}
