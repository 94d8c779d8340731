//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p topo-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use topo_core::diagnostics::{
    checkerboard_index, compare_runs, convexity_probe_pairs, discreteness_measure, relative_gap,
    ComplianceObjective, Property,
};
use topo_core::filters::{
    apply_density_filter, build_filter_matrix, build_neighborhoods, erode_dilate,
    filter_matrix_invertibility_check,
};
use topo_core::optimizer::{initial_design, random_feasible};
use topo_core::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn mbb_60x20() -> MeshModel {
    build_mesh(60, 20, 1.0, BcPreset::MbbHalf).unwrap()
}

fn run(
    mesh: &MeshModel,
    guess: InitialGuess,
    filter: FilterSpec,
    schedule: ContinuationSchedule,
    vf: f64,
    label: &str,
) -> RunRecord {
    let rho = initial_design(&guess, &mesh.elem_volume, vf).unwrap();
    let field = DesignField::new(rho, vf).unwrap();
    let mut r = run_optimization(
        mesh,
        &MaterialLaw::default(),
        &field,
        &filter,
        &schedule,
        &OcSettings::default(),
    )
    .unwrap_or_else(|e| panic!("{label}: {e}"));
    r.label = label.to_string();
    r
}

fn max_pairwise_gap(values: &[f64]) -> f64 {
    let mut g = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            g = g.max(relative_gap(*a, *b));
        }
    }
    g
}

fn sensitivity_filter() -> FilterSpec {
    FilterSpec::new(FilterKind::Sensitivity, 1.5)
}

/// Relaxed-problem uniqueness: p = 1, no filter, four initial guesses.
fn criterion_1(records: &mut Vec<RunRecord>) -> Outcome {
    let start = Instant::now();
    let mesh = mbb_60x20();
    let guesses = [
        ("uniform", InitialGuess::Uniform),
        ("seed1", InitialGuess::Random { seed: 1 }),
        ("seed2", InitialGuess::Random { seed: 2 }),
        ("seed3", InitialGuess::Random { seed: 3 }),
    ];
    let runs: Vec<RunRecord> = guesses
        .into_iter()
        .map(|(label, g)| {
            run(
                &mesh,
                g,
                FilterSpec::default(),
                ContinuationSchedule::direct(1.0),
                0.5,
                label,
            )
        })
        .collect();
    let elapsed = start.elapsed();
    let converged = runs.iter().all(RunRecord::all_stages_converged);
    let c: Vec<f64> = runs.iter().map(|r| r.final_compliance).collect();
    let gap = max_pairwise_gap(&c);
    records.extend(runs);
    outcome(
        converged && gap < 0.01 && elapsed < Duration::from_secs(300),
        format!(
            "compliances {:.4?}, max gap {:.3e} (< 1e-2), all converged {converged}, {elapsed:.1?} (< 5 min)",
            c, gap
        ),
    )
}

/// Relaxed-problem convexity probe on a 12x4 MBB.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mesh = build_mesh(12, 4, 1.0, BcPreset::MbbHalf).unwrap();
    let objective =
        ComplianceObjective::new(&mesh, MaterialLaw::default().with_penalty(1.0)).unwrap();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..20u64)
        .map(|k| {
            (
                random_feasible(&mesh.elem_volume, 0.5, 2 * k + 100).unwrap(),
                random_feasible(&mesh.elem_volume, 0.5, 2 * k + 101).unwrap(),
            )
        })
        .collect();
    let report = convexity_probe_pairs(
        &|x: &[f64]| objective.evaluate(x),
        &pairs,
        Property::Convex,
        9,
    )
    .unwrap();
    let elapsed = start.elapsed();
    outcome(
        report.passed() && report.pairs_tested == 20 && report.tolerance == 1e-9 && elapsed < Duration::from_secs(60),
        format!(
            "{} pairs x {} samples, {} violations at tolerance {:e}, max gap {:.3e}, {elapsed:.1?} (< 1 min)",
            report.pairs_tested,
            report.samples,
            report.violations.len(),
            report.tolerance,
            report.max_gap
        ),
    )
}

/// Local minima of the penalized problem: five random seeds, thresholded designs.
fn criterion_3(records: &mut Vec<RunRecord>) -> Outcome {
    let start = Instant::now();
    let mesh = mbb_60x20();
    let runs: Vec<RunRecord> = (1..=5u64)
        .map(|seed| {
            run(
                &mesh,
                InitialGuess::Random { seed },
                sensitivity_filter(),
                ContinuationSchedule::direct(3.0),
                0.5,
                &format!("seed{seed}"),
            )
        })
        .collect();
    let table = compare_runs(&mesh, &MaterialLaw::default(), &runs).unwrap();
    let elapsed = start.elapsed();
    let thresholded: Vec<f64> = table.rows.iter().map(|r| r.threshold_compliance).collect();
    let gap = table.max_threshold_gap();
    records.extend(runs);
    outcome(
        gap > 0.01 && elapsed < Duration::from_secs(600),
        format!(
            "thresholded compliances {:.3?}, max pairwise gap {:.4e} (> 1e-2), {elapsed:.1?} (< 10 min)",
            thresholded, gap
        ),
    )
}

/// Continuation in p versus a direct p = 3 run from the uniform guess.
fn criterion_4(records: &mut Vec<RunRecord>) -> Outcome {
    let start = Instant::now();
    let mesh = mbb_60x20();
    let direct = run(
        &mesh,
        InitialGuess::Uniform,
        sensitivity_filter(),
        ContinuationSchedule::direct(3.0),
        0.5,
        "direct",
    );
    let stepped = run(
        &mesh,
        InitialGuess::Uniform,
        sensitivity_filter(),
        ContinuationSchedule::stepped(vec![1.0, 1.5, 2.0, 2.5, 3.0]),
        0.5,
        "stepped",
    );
    let elapsed = start.elapsed();
    let ratio = stepped.final_compliance / direct.final_compliance;
    let detail = format!(
        "stepped {:.4} / direct {:.4} = {ratio:.4} (<= 1.05), {elapsed:.1?} (< 10 min)",
        stepped.final_compliance, direct.final_compliance
    );
    records.push(direct);
    records.push(stepped);
    outcome(ratio <= 1.05 && elapsed < Duration::from_secs(600), detail)
}

/// Descent check over every iteration of the runs from criteria 1-4.
fn criterion_5(records: &[RunRecord]) -> Outcome {
    let iterations: usize = records.iter().map(RunRecord::iterations).sum();
    let violations: usize = records.iter().map(RunRecord::descent_violations).sum();
    let min_dot = records
        .iter()
        .flat_map(|r| r.history.iter().map(|it| it.descent_dot))
        .fold(f64::INFINITY, f64::min);
    outcome(
        violations == 0 && iterations > 0,
        format!(
            "{} runs, {iterations} iterations, {violations} violations, smallest dot product {min_dot:.3e}",
            records.len()
        ),
    )
}

/// Checkerboards appear without filtering and are suppressed by the sensitivity filter.
fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mesh = build_mesh(40, 20, 1.0, BcPreset::Cantilever).unwrap();
    let raw = run(
        &mesh,
        InitialGuess::Uniform,
        FilterSpec::default(),
        ContinuationSchedule::direct(3.0),
        0.5,
        "raw",
    );
    let filtered = run(
        &mesh,
        InitialGuess::Uniform,
        sensitivity_filter(),
        ContinuationSchedule::direct(3.0),
        0.5,
        "filtered",
    );
    let elapsed = start.elapsed();
    let peak = raw.max_checkerboard().unwrap();
    let last = checkerboard_index(&mesh, &filtered.final_physical).unwrap();
    outcome(
        peak >= 0.15 && last <= 0.02 && elapsed < Duration::from_secs(300),
        format!(
            "unfiltered peak index {peak:.4} (>= 0.15), filtered final index {last:.4} (<= 0.02), {elapsed:.1?} (< 5 min)"
        ),
    )
}

/// Density-filter matrix: stochastic rows, full rank, and the duplicate-row strip.
fn criterion_7() -> Outcome {
    let mesh = mbb_60x20();
    let a = build_filter_matrix(&build_neighborhoods(
        &mesh,
        &FilterSpec::new(FilterKind::Density, 1.5),
    ));
    let row_err = a
        .row_sums()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    let report = filter_matrix_invertibility_check(&a);

    let strip = build_mesh(2, 1, 1.0, BcPreset::Custom).unwrap();
    let spec = FilterSpec::new(FilterKind::Density, 1.0).with_weighting(Weighting::Constant);
    let degenerate = filter_matrix_invertibility_check(&build_filter_matrix(&build_neighborhoods(
        &strip, &spec,
    )));
    outcome(
        row_err <= 1e-12
            && report.rank == report.size
            && report.invertible
            && degenerate.rank == degenerate.size - 1
            && degenerate.duplicate_rows == vec![(0, 1)],
        format!(
            "max |row sum - 1| {row_err:.1e} (<= 1e-12), rank {}/{} (sigma_min {:.3e}), strip rank {}/{} duplicates {:?}",
            report.rank, report.size, report.min_singular_value, degenerate.rank, degenerate.size, degenerate.duplicate_rows
        ),
    )
}

/// Heaviside limits: beta = 0 is the density filter; beta = 512 makes a converged design discrete.
fn criterion_8() -> Outcome {
    let mesh = mbb_60x20();
    let density = FilterSpec::new(FilterKind::Density, 1.5);
    let heaviside =
        FilterPipeline::new(&mesh, FilterSpec::new(FilterKind::Heaviside, 1.5)).unwrap();
    let a = build_filter_matrix(&build_neighborhoods(&mesh, &density));
    let mut rng = SplitMix64::seed_from_u64(8);
    let rho: Vec<f64> = (0..mesh.num_elements()).map(|_| rng.random()).collect();
    let flat = heaviside.forward(&rho, 0.0).unwrap().physical;
    let reference = apply_density_filter(&a, &rho).unwrap();
    let beta0_err = flat
        .iter()
        .zip(&reference)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let converged = run(
        &mesh,
        InitialGuess::Uniform,
        density,
        ContinuationSchedule::stepped(vec![1.0, 1.5, 2.0, 2.5, 3.0]),
        0.5,
        "density",
    );
    let sharp = heaviside
        .forward(&converged.final_design, 512.0)
        .unwrap()
        .physical;
    let before = discreteness_measure(&converged.final_physical);
    let after = discreteness_measure(&sharp);
    outcome(
        beta0_err <= 1e-15 && after < 5.0 && converged.all_stages_converged(),
        format!(
            "beta=0 max deviation {beta0_err:.1e} (<= 1e-15), converged density design discreteness {before:.2}% -> {after:.2}% at beta=512 (< 5%)"
        ),
    )
}

/// Adjoint gradient of SIMP -> density filter -> Heaviside versus central differences.
fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mesh = build_mesh(6, 4, 1.0, BcPreset::MbbHalf).unwrap();
    let law = MaterialLaw::default();
    let fe = FeModel::new(&mesh, law.nu).unwrap();
    let pipe = FilterPipeline::new(&mesh, FilterSpec::new(FilterKind::Heaviside, 1.5)).unwrap();
    let mut rng = SplitMix64::seed_from_u64(9);
    let rho: Vec<f64> = (0..mesh.num_elements())
        .map(|_| 0.1 + 0.8 * rng.random::<f64>())
        .collect();
    let objective = |x: &[f64], beta: f64| -> f64 {
        let phys = pipe.forward(x, beta).unwrap().physical;
        compliance(&fe.solve(&mesh, &law.interpolate_modulus(&phys)).unwrap())
    };
    let delta = 1e-6;
    let mut worst = 0.0f64;
    for beta in [1.0, 4.0, 8.0] {
        let fwd = pipe.forward(&rho, beta).unwrap();
        let state = fe
            .solve(&mesh, &law.interpolate_modulus(&fwd.physical))
            .unwrap();
        let g_phys = fe
            .sensitivities(&mesh, &law, &fwd.physical, &state)
            .unwrap();
        let grad = pipe.pullback(&rho, &fwd, beta, &g_phys).unwrap();
        for e in 0..rho.len() {
            let mut plus = rho.clone();
            let mut minus = rho.clone();
            plus[e] += delta;
            minus[e] -= delta;
            let fd = (objective(&plus, beta) - objective(&minus, beta)) / (2.0 * delta);
            worst = worst.max((grad[e] - fd).abs() / fd.abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-4 && elapsed < Duration::from_secs(60),
        format!("24 elements x beta {{1, 4, 8}}, worst relative error {worst:.2e} (< 1e-4), {elapsed:.1?} (< 1 min)"),
    )
}

/// Midpoint convexity of every dilate variant, component by component.
fn criterion_10() -> Outcome {
    let mesh = build_mesh(12, 8, 1.0, BcPreset::MbbHalf).unwrap();
    let n = mesh.num_elements();
    let mut rng = SplitMix64::seed_from_u64(10);
    let mut parts = Vec::new();
    let mut total = 0usize;
    for mean in [Mean::Arithmetic, Mean::Geometric, Mean::Harmonic] {
        let spec = FilterSpec::new(FilterKind::Dilate, 1.5).with_mean(mean, 1e-3);
        let table = build_neighborhoods(&mesh, &spec);
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..200 {
            let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let (da, db, dm) = (
                erode_dilate(&table, &a, &spec).unwrap(),
                erode_dilate(&table, &b, &spec).unwrap(),
                erode_dilate(&table, &mid, &spec).unwrap(),
            );
            for e in 0..n {
                let excess = dm[e] - 0.5 * (da[e] + db[e]);
                worst = worst.max(excess);
                if excess > 1e-10 {
                    violations += 1;
                }
            }
        }
        total += violations;
        parts.push(format!("{mean} {violations} (max excess {worst:.1e})"));
    }
    outcome(
        total == 0,
        format!(
            "200 pairs x {n} components, violations: {}",
            parts.join(", ")
        ),
    )
}

#[allow(clippy::vec_init_then_push)]
fn main() -> ExitCode {
    let mut records = Vec::new();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "relaxed-problem uniqueness", criterion_1(&mut records)));
    results.push((2, "relaxed-problem convexity", criterion_2()));
    results.push((3, "penalized local minima", criterion_3(&mut records)));
    results.push((4, "continuation benefit", criterion_4(&mut records)));
    results.push((5, "descent preservation", criterion_5(&records)));
    results.push((
        6,
        "checkerboard demonstration and suppression",
        criterion_6(),
    ));
    results.push((7, "filter-matrix properties", criterion_7()));
    results.push((8, "heaviside limits", criterion_8()));
    results.push((9, "gradient correctness", criterion_9()));
    results.push((10, "dilate convexity", criterion_10()));

    for (id, name, o) in &results {
        println!(
            "[{}] criterion {id:>2}: {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    let failed = results.iter().filter(|(_, _, o)| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
