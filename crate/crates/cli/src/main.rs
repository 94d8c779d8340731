#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use topo_cli::config::{load_config, OutputFormat, RunConfig};
use topo_cli::export::{export_density, read_csv_field};
use topo_cli::sweep::{parse_seeds, parse_values};
use topo_cli::{run_case, run_probe, sweep, ProbeOptions, SweepAxis};
use topo_core::diagnostics::Property;

/// SIMP topology optimization lab.
///
/// Config values can be overridden with environment variables named
/// TOPOLAB_<SECTION>__<KEY>, e.g. TOPOLAB_MESH__NX=120 or TOPOLAB_VF_TARGET=0.4.
#[derive(Debug, Parser)]
#[command(name = "topolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one optimization and write its artifacts.
    Run { config: PathBuf },
    /// Run the Cartesian product of axis values and seeds and compare the results.
    Sweep {
        config: PathBuf,
        /// initial_guess.seed, schedule.p_stages, filter.kind or filter.r_over_h
        #[arg(long)]
        axis: String,
        /// Axis values separated by `;`
        #[arg(long)]
        values: String,
        /// Comma-separated seeds for random initial guesses
        #[arg(long, default_value = "")]
        seeds: String,
    },
    /// Sample a convexity-type property of the compliance along random segments.
    Probe {
        config: PathBuf,
        /// convex, quasiconvex, strictly_quasiconvex or unimodal_ray
        #[arg(long)]
        property: String,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 9)]
        samples: usize,
        /// Penalization exponent; defaults to the first configured p stage
        #[arg(long)]
        p: Option<f64>,
    },
    /// Convert a CSV density field to csv, pgm or vtk.
    Export {
        field: PathBuf,
        #[arg(long)]
        format: String,
        /// Output path; defaults to the field path with the format's extension
        #[arg(long)]
        output: Option<PathBuf>,
        /// Element size written to VTK spacing
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
}

fn config(path: &Path) -> anyhow::Result<RunConfig> {
    load_config(path, std::env::vars()).with_context(|| format!("loading {}", path.display()))
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run { config: path } => {
            let cfg = config(&path)?;
            let start = Instant::now();
            let out = run_case(&cfg)?;
            let r = &out.record;
            println!("final compliance      {:.6e}", r.final_compliance);
            println!("threshold compliance  {:.6e}", out.threshold_compliance);
            println!("iterations            {}", r.iterations());
            for s in r.stages.iter().filter(|s| !s.converged) {
                println!(
                    "stage {} (p {}, beta {}) hit the iteration cap",
                    s.index, s.p, s.beta
                );
            }
            println!("outputs               {}", out.directory.display());
            println!("elapsed               {:.2?}", start.elapsed());
        }
        Command::Sweep {
            config: path,
            axis,
            values,
            seeds,
        } => {
            let cfg = config(&path)?;
            let axis: SweepAxis = axis.parse()?;
            let out = sweep(&cfg, axis, &parse_values(&values), &parse_seeds(&seeds)?)?;
            for row in &out.table.rows {
                println!(
                    "{:<32} c {:.6e}  thresholded {:.6e}  iterations {}{}",
                    row.label,
                    row.final_compliance,
                    row.threshold_compliance,
                    row.iterations,
                    if row.converged { "" } else { " (capped)" }
                );
            }
            println!("max raw gap        {:.4e}", out.table.max_raw_gap());
            println!("max threshold gap  {:.4e}", out.table.max_threshold_gap());
            println!("comparison         {}", out.comparison_path.display());
        }
        Command::Probe {
            config: path,
            property,
            pairs,
            samples,
            p,
        } => {
            let cfg = config(&path)?;
            let property: Property = property.parse()?;
            let options = ProbeOptions {
                property,
                pairs,
                samples,
                p,
            };
            let (report, file) = run_probe(&cfg, &options)?;
            println!(
                "{}: {} pairs tested, {} skipped, {} violations, max gap {:.3e} (tolerance {:e})",
                report.property,
                report.pairs_tested,
                report.pairs_skipped,
                report.violations.len(),
                report.max_gap,
                report.tolerance
            );
            println!("report {}", file.display());
        }
        Command::Export {
            field,
            format,
            output,
            h,
        } => {
            let format: OutputFormat = format.parse().map_err(anyhow::Error::msg)?;
            if !(h > 0.0) {
                bail!("--h must be positive");
            }
            let grid = read_csv_field(&field, h)?;
            let target = output.unwrap_or_else(|| field.with_extension(format.name()));
            if target == field {
                bail!("refusing to overwrite the input field {}", field.display());
            }
            export_density(&grid, format, &target)?;
            println!("{}", target.display());
        }
    }
    Ok(())
}
