use std::fmt::Write as _;
use std::path::PathBuf;

use topo_core::diagnostics::{convexity_probe_pairs, ComplianceObjective, ProbeReport, Property};
use topo_core::optimizer::random_feasible;
use topo_core::{run_optimization, ContinuationSchedule, FilterPipeline};

use crate::config::RunConfig;
use crate::run::{build_model, initial_field};
use crate::{write_file, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    pub property: Property,
    pub pairs: usize,
    pub samples: usize,
    /// Penalization of the probed compliance; the first configured stage when unset.
    pub p: Option<f64>,
}

impl ProbeOptions {
    pub fn new(property: Property) -> Self {
        Self {
            property,
            pairs: 20,
            samples: 9,
            p: None,
        }
    }
}

/// Probes compliance along segments between random feasible designs seeded from
/// `initial_guess.seed`. For `unimodal_ray` the first point of every pair is the
/// optimized design at the probed penalization. The report is also written to
/// `outputs.directory/probe_<property>.csv`.
pub fn run_probe(config: &RunConfig, options: &ProbeOptions) -> Result<(ProbeReport, PathBuf)> {
    let mesh = build_model(config)?;
    let p = options.p.unwrap_or(config.schedule.p_stages[0]);
    let law = config.material_law(p)?;
    let beta = config.schedule.beta_stages.last().copied().unwrap_or(1.0);
    let pipeline = FilterPipeline::new(&mesh, config.filter_spec())?;
    let objective = if pipeline.is_identity_map() {
        ComplianceObjective::new(&mesh, law)?
    } else {
        ComplianceObjective::new(&mesh, law)?.with_filter(pipeline, beta)
    };

    let seed = config.initial_guess.seed;
    let draw = |k: u64| random_feasible(&mesh.elem_volume, config.vf_target, seed.wrapping_add(k));
    let anchor = if options.property == Property::UnimodalRay {
        let betas = if config.schedule.beta_stages.is_empty() {
            vec![]
        } else {
            vec![beta]
        };
        let mut schedule = ContinuationSchedule::direct(p).with_beta(betas);
        schedule.stage_convergence_tol = config.schedule.stage_tol;
        schedule.stage_max_iters = config.schedule.stage_max_iters;
        let field = initial_field(config, &mesh)?;
        let record = run_optimization(
            &mesh,
            &law,
            &field,
            &config.filter_spec(),
            &schedule,
            &config.oc_settings(),
        )?;
        Some(record.final_design)
    } else {
        None
    };
    let mut pairs = Vec::with_capacity(options.pairs);
    for k in 0..options.pairs as u64 {
        let x1 = match &anchor {
            Some(x) => x.clone(),
            None => draw(2 * k)?,
        };
        pairs.push((x1, draw(2 * k + 1)?));
    }
    let report = convexity_probe_pairs(
        &|x: &[f64]| objective.evaluate(x),
        &pairs,
        options.property,
        options.samples,
    )?;
    let path = config
        .outputs
        .directory
        .join(format!("probe_{}.csv", options.property));
    write_file(&path, report_csv(&report, p).as_bytes())?;
    Ok((report, path))
}

pub fn report_csv(report: &ProbeReport, p: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "property,{}", report.property);
    let _ = writeln!(out, "p,{p}");
    let _ = writeln!(out, "pairs_tested,{}", report.pairs_tested);
    let _ = writeln!(out, "pairs_skipped,{}", report.pairs_skipped);
    let _ = writeln!(out, "samples,{}", report.samples);
    let _ = writeln!(out, "tolerance,{:e}", report.tolerance);
    let _ = writeln!(out, "max_gap,{:.16e}", report.max_gap);
    let _ = writeln!(out, "alpha,{:.16e}", report.alpha);
    let _ = writeln!(out, "violations,{}", report.violations.len());
    out.push_str("\npair,lambda,gap\n");
    for v in &report.violations {
        let _ = writeln!(out, "{},{:.16e},{:.16e}", v.pair, v.lambda, v.gap);
    }
    out
}
