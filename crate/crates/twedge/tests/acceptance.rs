//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs in a couple of minutes on one core.

use std::process::ExitCode;
use std::time::Instant;

use twedge::checks::{
    flemma_residuals, full_tables, interlacing_errors, lemma_exact, mass_error, monotonicity_violation,
    oracle_error, reduction_errors, sqrt_d2_consistency, suite_lambdas, table_cdf, tail_errors,
};
use twedge::config::TABLE_PERCENTILES;
use twedge_core::distributions::{Beta, DistributionTable, LambdaFamily};
use twedge_core::ensembles::{
    ks_statistic, percentile_table, sample_gaussian, sample_wishart, EnsembleSpec, Model, WishartSpec,
};
use twedge_core::fredholm::DEFAULT_NODES;
use twedge_core::painleve::SolverConfig;

/// Reference proportions for λ1, λ2, λ3 (columns) at `TABLE_PERCENTILES` (rows).
const REFERENCE_100X100: [[f64; 3]; 9] = [
    [0.008, 0.005, 0.004],
    [0.042, 0.033, 0.025],
    [0.090, 0.073, 0.059],
    [0.294, 0.268, 0.235],
    [0.497, 0.477, 0.440],
    [0.699, 0.690, 0.659],
    [0.902, 0.891, 0.901],
    [0.951, 0.948, 0.950],
    [0.992, 0.991, 0.991],
];

const REFERENCE_100X400: [[f64; 3]; 9] = [
    [0.008, 0.006, 0.004],
    [0.042, 0.037, 0.032],
    [0.088, 0.081, 0.066],
    [0.283, 0.267, 0.254],
    [0.485, 0.471, 0.455],
    [0.685, 0.679, 0.669],
    [0.898, 0.894, 0.884],
    [0.947, 0.950, 0.941],
    [0.989, 0.991, 0.989],
];

/// Largest cdf decrease accepted as round-off.
const MONOTONE_SLACK: f64 = 1e-9;

struct Context {
    family: LambdaFamily,
    tables: Vec<DistributionTable>,
}

type Outcome = Result<(bool, String), twedge_core::Error>;

fn within(measured: f64, tolerance: f64) -> bool {
    measured <= tolerance
}

fn oracle(ctx: &Context) -> Outcome {
    let start = Instant::now();
    let err = oracle_error(&ctx.family, DEFAULT_NODES)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((within(err, 5e-6) && secs <= 120.0, format!("max error {err:.3e} (tol 5e-6), {secs:.1} s (limit 120 s)")))
}

fn tails(ctx: &Context) -> Outcome {
    let [q0, q1] = tail_errors(ctx.family.base()?)?;
    Ok((within(q0, 1e-5) && within(q1, 1e-3), format!("q0 rel {q0:.3e} (tol 1e-5), q1 rel {q1:.3e} (tol 1e-3)")))
}

fn reductions(ctx: &Context) -> Outcome {
    let [e1, e4] = reduction_errors(&ctx.family)?;
    Ok((within(e1, 1e-10) && within(e4, 1e-10), format!("D1 {e1:.3e}, D4 {e4:.3e} (tol 1e-10)")))
}

fn interlacing(ctx: &Context) -> Outcome {
    let [a, b] = interlacing_errors(&ctx.tables);
    Ok((within(a, 1e-6) && within(b, 5e-4), format!("m=1 vs 2: {a:.3e} (tol 1e-6), m=2 vs 4: {b:.3e} (tol 5e-4)")))
}

fn beta_one(ctx: &Context) -> &DistributionTable {
    ctx.tables.iter().find(|t| t.beta == Beta::One).expect("beta 1 table")
}

/// Compares proportions against a reference grid; returns the cells outside `tol`.
fn percentile_cells(
    ctx: &Context,
    spec: &WishartSpec,
    reference: &[[f64; 3]; 9],
    tol: f64,
) -> Result<(Vec<String>, f64), twedge_core::Error> {
    let table = beta_one(ctx);
    let batch = sample_wishart(spec)?;
    let ordinates = (1..=3)
        .map(|m| TABLE_PERCENTILES.iter().map(|&p| table.quantile(m, p)).collect())
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    let report = percentile_table(&batch, &ordinates, &TABLE_PERCENTILES)?;
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    for (j, p) in TABLE_PERCENTILES.iter().enumerate() {
        for m in 0..3 {
            let got = report.proportions[m][j];
            let gap = (got - reference[j][m]).abs();
            worst = worst.max(gap);
            if gap > tol {
                misses.push(format!("lambda{} at {p:.2}: {got:.4} vs {:.3}", m + 1, reference[j][m]));
            }
        }
    }
    Ok((misses, worst))
}

fn wishart_table(ctx: &Context) -> Outcome {
    let start = Instant::now();
    let square = WishartSpec { p: 100, n: 100, replicates: 10_000, k: 3, master_seed: 2024 };
    let (miss_a, worst_a) = percentile_cells(ctx, &square, &REFERENCE_100X100, 0.015)?;
    let secs = start.elapsed().as_secs_f64();
    // The wide column is 100 observations of 400 variates.
    let wide = WishartSpec { p: 400, n: 100, replicates: 2_000, k: 3, master_seed: 2024 };
    let (miss_b, worst_b) = percentile_cells(ctx, &wide, &REFERENCE_100X400, 0.03)?;
    let mut detail = format!(
        "100x100: worst gap {worst_a:.4} (tol 0.015) in {secs:.0} s (limit 600 s); 100x400: worst gap {worst_b:.4} (tol 0.03)"
    );
    for m in miss_a.iter().chain(&miss_b) {
        detail.push_str(&format!("; outside: {m}"));
    }
    Ok((miss_a.is_empty() && miss_b.is_empty() && secs <= 600.0, detail))
}

fn goe_edge(ctx: &Context) -> Outcome {
    let table = beta_one(ctx);
    let spec = EnsembleSpec { beta: Beta::One, n: 200, replicates: 10_000, k: 4, master_seed: 2024, model: Model::Tridiagonal };
    let batch = sample_gaussian(&spec)?;
    let ks = (1..=4)
        .map(|m| ks_statistic(&batch.column(m)?, |x| table_cdf(table, m, x)))
        .collect::<Result<Vec<_>, _>>()?;
    let text: Vec<String> = ks.iter().enumerate().map(|(m, d)| format!("m={} {d:.4}", m + 1)).collect();
    Ok((ks.iter().all(|&d| within(d, 0.05)), format!("KS {} (tol 0.05)", text.join(", "))))
}

fn lemmas(ctx: &Context) -> Outcome {
    let exact = lemma_exact(10)?;
    let [r0, r1] = flemma_residuals(&ctx.family)?;
    Ok((
        exact && within(r0, 1e-4) && within(r1, 5e-3),
        format!("exact coefficients j<=10: {exact}; residual n=0 {r0:.3e} (tol 1e-4), n=1 {r1:.3e} (tol 5e-3)"),
    ))
}

fn consistency(ctx: &Context) -> Outcome {
    let fd = sqrt_d2_consistency(&ctx.family)?;
    let mass = mass_error(&ctx.tables)?;
    let drop = monotonicity_violation(&ctx.tables);
    Ok((
        within(fd, 5e-5) && within(mass, 2e-3) && within(drop, MONOTONE_SLACK),
        format!("derivative gap {fd:.3e} (tol 5e-5), mass error {mass:.3e} (tol 2e-3), largest cdf decrease {drop:.1e}"),
    ))
}

fn main() -> ExitCode {
    let config = SolverConfig::default();
    let start = Instant::now();
    let family = LambdaFamily::solve(config, &suite_lambdas(&config)).expect("Painleve family solves");
    let tables = full_tables(&family).expect("tables build");
    println!("setup: {} states and tables in {:.1} s", family.states().len(), start.elapsed().as_secs_f64());
    let ctx = Context { family, tables };
    let criteria: [(&str, fn(&Context) -> Outcome); 8] = [
        ("Painleve determinant vs Fredholm oracle", oracle),
        ("left-tail matching of q0 and q1", tails),
        ("D1 and D4 reductions at lambda = 1", reductions),
        ("interlacing of F4 and F1", interlacing),
        ("Wishart percentile table", wishart_table),
        ("GOE N=200 edge statistics", goe_edge),
        ("lemma recursion and identity", lemmas),
        ("derivative, normalization and monotonicity consistency", consistency),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (passed, detail) = match check(&ctx) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        let status = if passed { "PASS" } else { "FAIL" };
        println!("{status} {name} [{:.1} s]: {detail}", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", 8 - failed, 8);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
