use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use topo_core::diagnostics::{checkerboard_index, discreteness_measure, threshold_project};
use topo_core::material::volume_fraction;
use topo_core::optimizer::{initial_design, RunRecord};
use topo_core::{
    build_mesh, compliance, run_optimization, DesignField, FeModel, InitialGuess, MeshModel,
};

use crate::config::{InitialMode, RunConfig};
use crate::export::{encode, read_csv_field, DensityGrid};
use crate::{write_file, CliError, Result};

pub const CONFIG_FILE: &str = "config.txt";
pub const HISTORY_FILE: &str = "history.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub mesh: MeshModel,
    pub record: RunRecord,
    /// Thresholded 0/1 version of the final physical field.
    pub threshold: Vec<f64>,
    pub threshold_compliance: f64,
    pub directory: PathBuf,
}

pub fn build_model(config: &RunConfig) -> Result<MeshModel> {
    Ok(build_mesh(
        config.mesh.nx,
        config.mesh.ny,
        config.mesh.h,
        config.mesh.preset,
    )?)
}

pub fn initial_field(config: &RunConfig, mesh: &MeshModel) -> Result<DesignField> {
    let guess = match config.initial_guess.mode {
        InitialMode::Uniform => InitialGuess::Uniform,
        InitialMode::Random => InitialGuess::Random {
            seed: config.initial_guess.seed,
        },
        InitialMode::File => {
            let path = config
                .initial_guess
                .path
                .as_deref()
                .ok_or_else(|| CliError::Format("initial_guess.path is not set".into()))?;
            let grid = read_csv_field(path, config.mesh.h)?;
            if (grid.nx, grid.ny) != (mesh.nx, mesh.ny) {
                return Err(CliError::Format(format!(
                    "{}: field is {}x{}, mesh is {}x{}",
                    path.display(),
                    grid.nx,
                    grid.ny,
                    mesh.nx,
                    mesh.ny
                )));
            }
            InitialGuess::Field(grid.values)
        }
    };
    let rho = initial_design(&guess, &mesh.elem_volume, config.vf_target)?;
    Ok(DesignField::new(rho, config.vf_target)?)
}

/// Runs the optimization described by `config` without writing anything.
pub fn execute(config: &RunConfig, label: &str) -> Result<(MeshModel, RunRecord)> {
    let mesh = build_model(config)?;
    let field = initial_field(config, &mesh)?;
    let law = config.material_law(1.0)?;
    let mut record = run_optimization(
        &mesh,
        &law,
        &field,
        &config.filter_spec(),
        &config.continuation_schedule(),
        &config.oc_settings(),
    )?;
    record.label = label.to_string();
    Ok((mesh, record))
}

/// Runs `config` and writes its artifacts to `outputs.directory`.
pub fn run_case(config: &RunConfig) -> Result<CaseOutcome> {
    let (mesh, record) = execute(config, "run")?;
    write_artifacts(config, mesh, record, &config.outputs.directory)
}

/// Writes the resolved config, final and thresholded densities, iteration history
/// and a summary into `dir`.
pub fn write_artifacts(
    config: &RunConfig,
    mesh: MeshModel,
    record: RunRecord,
    dir: &Path,
) -> Result<CaseOutcome> {
    let threshold = threshold_project(&record.final_physical, &mesh.elem_volume, record.vf_target);
    let law = config.material_law(record.final_p)?;
    let fe = FeModel::new(&mesh, law.nu)?;
    let threshold_compliance = compliance(&fe.solve(&mesh, &law.interpolate_modulus(&threshold))?);

    write_file(
        &dir.join(CONFIG_FILE),
        config.to_document().to_string().as_bytes(),
    )?;
    for (stem, values) in [
        ("density", &record.final_physical),
        ("density_threshold", &threshold),
    ] {
        let grid = DensityGrid::new(mesh.nx, mesh.ny, mesh.h, values.clone())?;
        for &format in &config.outputs.formats {
            write_file(
                &dir.join(format!("{stem}.{format}")),
                &encode(&grid, format),
            )?;
        }
    }
    write_file(&dir.join(HISTORY_FILE), history_csv(&record).as_bytes())?;
    let summary = summary_text(&mesh, &record, &threshold, threshold_compliance);
    write_file(&dir.join(SUMMARY_FILE), summary.as_bytes())?;

    Ok(CaseOutcome {
        mesh,
        record,
        threshold,
        threshold_compliance,
        directory: dir.to_path_buf(),
    })
}

pub fn history_csv(record: &RunRecord) -> String {
    let mut out = String::from(
        "iteration,stage,stage_iteration,p,beta,compliance,volume_fraction,max_change,lambda,move_limit,descent_dot,discreteness,checkerboard\n",
    );
    for it in &record.history {
        let cb = it
            .checkerboard
            .map(|c| format!("{c:.16e}"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{}",
            it.iteration,
            it.stage,
            it.stage_iteration,
            it.p,
            it.beta,
            it.compliance,
            it.volume_fraction,
            it.max_change,
            it.lambda,
            it.move_limit,
            it.descent_dot,
            it.discreteness,
            cb
        );
    }
    out
}

pub fn summary_text(
    mesh: &MeshModel,
    record: &RunRecord,
    threshold: &[f64],
    threshold_compliance: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "label = {}", record.label);
    let _ = writeln!(out, "mesh = {}x{}", record.nx, record.ny);
    let _ = writeln!(out, "vf_target = {}", record.vf_target);
    let _ = writeln!(out, "final_p = {}", record.final_p);
    let _ = writeln!(out, "final_beta = {}", record.final_beta);
    let _ = writeln!(out, "final_compliance = {:.16e}", record.final_compliance);
    let _ = writeln!(out, "threshold_compliance = {threshold_compliance:.16e}");
    let _ = writeln!(
        out,
        "final_volume_fraction = {:.16e}",
        volume_fraction(&record.final_physical, &mesh.elem_volume)
    );
    let _ = writeln!(
        out,
        "threshold_volume_fraction = {:.16e}",
        volume_fraction(threshold, &mesh.elem_volume)
    );
    let _ = writeln!(
        out,
        "discreteness = {:.16e}",
        discreteness_measure(&record.final_physical)
    );
    match checkerboard_index(mesh, &record.final_physical) {
        Ok(c) => {
            let _ = writeln!(out, "checkerboard = {c:.16e}");
        }
        Err(_) => {
            let _ = writeln!(out, "checkerboard = n/a");
        }
    }
    let _ = writeln!(out, "iterations = {}", record.iterations());
    let _ = writeln!(out, "descent_violations = {}", record.descent_violations());
    let _ = writeln!(
        out,
        "all_stages_converged = {}",
        record.all_stages_converged()
    );
    for s in &record.stages {
        let _ = writeln!(
            out,
            "stage.{} = p {} beta {} iterations {} converged {}",
            s.index, s.p, s.beta, s.iterations, s.converged
        );
    }
    out
}
