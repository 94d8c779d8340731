use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use topo_core::diagnostics::{compare_runs, ComparisonTable};

use crate::config::RunConfig;
use crate::run::{execute, write_artifacts, CaseOutcome};
use crate::{write_file, CliError, Result};

pub const COMPARISON_FILE: &str = "comparison.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Seed,
    PStages,
    FilterKind,
    ROverH,
}

impl SweepAxis {
    pub fn key(self) -> &'static str {
        match self {
            SweepAxis::Seed => "initial_guess.seed",
            SweepAxis::PStages => "schedule.p_stages",
            SweepAxis::FilterKind => "filter.kind",
            SweepAxis::ROverH => "filter.r_over_h",
        }
    }

    fn short(self) -> &'static str {
        match self {
            SweepAxis::Seed => "seed",
            SweepAxis::PStages => "p",
            SweepAxis::FilterKind => "filter",
            SweepAxis::ROverH => "r",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        [SweepAxis::Seed, SweepAxis::PStages, SweepAxis::FilterKind, SweepAxis::ROverH]
            .into_iter()
            .find(|a| a.key() == s)
            .ok_or_else(|| {
                CliError::Sweep(format!(
                    "invalid axis `{s}` (expected initial_guess.seed, schedule.p_stages, filter.kind or filter.r_over_h)"
                ))
            })
    }
}

/// Axis values are separated by `;` so that list values such as p schedules can
/// contain commas.
pub fn parse_values(text: &str) -> Vec<String> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|e| CliError::Sweep(format!("seed `{s}`: {e}")))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepArm {
    pub label: String,
    pub config: RunConfig,
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '=') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Cartesian product of axis values and seeds. A non-empty seed list switches every
/// arm to a random initial guess with that seed.
pub fn sweep_arms(
    config: &RunConfig,
    axis: SweepAxis,
    values: &[String],
    seeds: &[u64],
) -> Result<Vec<SweepArm>> {
    if values.is_empty() {
        return Err(CliError::Sweep("no axis values given".into()));
    }
    if axis == SweepAxis::Seed && !seeds.is_empty() {
        return Err(CliError::Sweep(
            "seeds cannot be combined with the initial_guess.seed axis".into(),
        ));
    }
    let seed_slots: Vec<Option<u64>> = if seeds.is_empty() {
        vec![None]
    } else {
        seeds.iter().copied().map(Some).collect()
    };
    let mut arms = Vec::new();
    for value in values {
        let mut base = config.with_value(axis.key(), value)?;
        if axis == SweepAxis::Seed {
            base = base.with_value("initial_guess.mode", "random")?;
        }
        for seed in &seed_slots {
            let mut cfg = base.clone();
            let mut label = format!("{:02}_{}={}", arms.len(), axis.short(), sanitize(value));
            if let Some(s) = seed {
                cfg = cfg
                    .with_value("initial_guess.mode", "random")?
                    .with_value("initial_guess.seed", &s.to_string())?;
                label.push_str(&format!("_seed={s}"));
            }
            cfg.outputs.directory = config.outputs.directory.join(&label);
            arms.push(SweepArm { label, config: cfg });
        }
    }
    Ok(arms)
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub arms: Vec<CaseOutcome>,
    pub table: ComparisonTable,
    pub comparison_path: PathBuf,
}

/// Runs every arm concurrently, writes per-arm artifacts and the comparison table.
pub fn sweep(
    config: &RunConfig,
    axis: SweepAxis,
    values: &[String],
    seeds: &[u64],
) -> Result<SweepOutcome> {
    let arms = sweep_arms(config, axis, values, seeds)?;
    let outcomes: Vec<CaseOutcome> = arms
        .par_iter()
        .map(|arm| {
            let (mesh, record) = execute(&arm.config, &arm.label)?;
            write_artifacts(&arm.config, mesh, record, &arm.config.outputs.directory)
        })
        .collect::<Result<_>>()?;
    let mesh = &outcomes[0].mesh;
    let records: Vec<_> = outcomes.iter().map(|o| o.record.clone()).collect();
    let law = config.material_law(records[0].final_p)?;
    let table = compare_runs(mesh, &law, &records)?;
    let comparison_path = config.outputs.directory.join(COMPARISON_FILE);
    write_file(&comparison_path, table.to_csv().as_bytes())?;
    Ok(SweepOutcome {
        arms: outcomes,
        table,
        comparison_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, InitialMode};

    fn base() -> RunConfig {
        parse_config("mesh.nx = 6\nmesh.ny = 2\nvf_target = 0.5\noutputs.directory = /tmp/sweep\n")
            .unwrap()
    }

    #[test]
    fn axis_names_parse() {
        assert_eq!(
            "filter.r_over_h".parse::<SweepAxis>().unwrap(),
            SweepAxis::ROverH
        );
        assert!("mesh.nx".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn value_and_seed_lists() {
        assert_eq!(parse_values("3; 1,1.5,2,2.5,3"), vec!["3", "1,1.5,2,2.5,3"]);
        assert_eq!(parse_seeds("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seeds("1,-2").is_err());
    }

    #[test]
    fn arms_form_cartesian_product() {
        let values = parse_values("3;1,2,3");
        let arms = sweep_arms(&base(), SweepAxis::PStages, &values, &[4, 5]).unwrap();
        assert_eq!(arms.len(), 4);
        assert_eq!(arms[3].config.schedule.p_stages, vec![1.0, 2.0, 3.0]);
        assert_eq!(arms[3].config.initial_guess.seed, 5);
        assert_eq!(arms[3].config.initial_guess.mode, InitialMode::Random);
        assert_eq!(arms[3].label, "03_p=1_2_3_seed=5");
        assert!(arms[3]
            .config
            .outputs
            .directory
            .ends_with("03_p=1_2_3_seed=5"));
    }

    #[test]
    fn seed_axis_switches_to_random_guesses() {
        let arms = sweep_arms(&base(), SweepAxis::Seed, &parse_values("7;8"), &[]).unwrap();
        assert!(arms
            .iter()
            .all(|a| a.config.initial_guess.mode == InitialMode::Random));
        assert_eq!(arms[1].config.initial_guess.seed, 8);
        assert!(sweep_arms(&base(), SweepAxis::Seed, &parse_values("7"), &[1]).is_err());
    }

    #[test]
    fn invalid_arm_values_are_rejected() {
        assert!(sweep_arms(
            &base(),
            SweepAxis::FilterKind,
            &parse_values("heaviside"),
            &[]
        )
        .is_err());
        assert!(sweep_arms(&base(), SweepAxis::ROverH, &parse_values("-1"), &[]).is_err());
        assert!(sweep_arms(&base(), SweepAxis::ROverH, &[], &[]).is_err());
    }
}
