//! The five subcommands. Each returns the files it wrote; progress and
//! summaries go to stdout, cache notices to stderr.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use twedge_core::distributions::{required_lambdas, Beta, DerivativeMethod, DistributionTable, Generator, LambdaFamily};
use twedge_core::ensembles::{
    fnv1a, gaussian_replicate, ks_statistic, percentile_table, wishart_replicate, SampleBatch,
};

use crate::cache::solve_family;
use crate::checks::{suite_lambdas, table_cdf, verify_suite};
use crate::config::{Command, EnsembleKind, Format, RunConfig};
use crate::error::CliError;
use crate::output::{self, Meta, SampleSidecar};

/// Solves (or loads) every λ needed for the given tables, plus `extra`.
fn family(config: &RunConfig, needs: &[(Beta, usize)], extra: &[f64]) -> Result<LambdaFamily, CliError> {
    let mut lambdas = extra.to_vec();
    for &(beta, m_max) in needs {
        lambdas.extend(required_lambdas(&config.solver, &[Generator::recurrence(beta)], m_max - 1));
    }
    lambdas.push(1.0);
    let (family, notices) = solve_family(&config.solver, &lambdas, &config.cache_dir)?;
    for notice in notices {
        eprintln!("{notice}");
    }
    Ok(family)
}

fn tables(config: &RunConfig, needs: &[(Beta, usize)]) -> Result<Vec<DistributionTable>, CliError> {
    let family = family(config, needs, &[])?;
    let built = needs
        .par_iter()
        .map(|&(beta, m)| DistributionTable::build(&family, beta, m, DerivativeMethod::Auto))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(built)
}

fn requested(config: &RunConfig) -> Result<Vec<(Beta, usize)>, CliError> {
    Ok(config.betas()?.into_iter().map(|b| (b, config.m_max)).collect())
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

pub fn tabulate(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let needs = requested(config)?;
    let family = family(config, &needs, &[])?;
    let built = needs
        .par_iter()
        .map(|&(beta, m)| DistributionTable::build(&family, beta, m, DerivativeMethod::Auto))
        .collect::<Result<Vec<_>, _>>()?;
    let meta = Meta::of(config);
    let ext = extension(config.format);
    let mut written = Vec::new();
    for table in &built {
        let text = match config.format {
            Format::Csv => output::table_csv(table, &meta),
            Format::Json => output::table_json(table, &meta, true),
        };
        let path = output::write_file(&config.out, &format!("table_beta{}.{ext}", table.beta.as_u8()), &text)?;
        println!("beta {}: m <= {} on {} points -> {}", table.beta.as_u8(), table.m_max, table.grid.len(), path.display());
        written.push(path);
    }
    let base = family.base()?;
    let text = match config.format {
        Format::Csv => output::state_csv(base, &meta),
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Doc<'a> {
                #[serde(flatten)]
                meta: &'a Meta,
                state: &'a twedge_core::painleve::PainleveState,
            }
            serde_json::to_string_pretty(&Doc { meta: &meta, state: base }).expect("state serializes") + "\n"
        }
    };
    written.push(output::write_file(&config.out, &format!("painleve_state.{ext}"), &text)?);
    Ok(written)
}

pub fn density(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let built = tables(config, &requested(config)?)?;
    let meta = Meta::of(config);
    let ext = extension(config.format);
    let mut written = Vec::new();
    for table in &built {
        for m in 1..=table.m_max {
            println!(
                "beta {} m {}: mass {:.6}, mode {:.2}",
                table.beta.as_u8(),
                m,
                table.pdf_mass(m)?,
                table.mode(m)?
            );
        }
        let text = match config.format {
            Format::Csv => output::density_csv(table, &meta),
            Format::Json => output::table_json(table, &meta, false),
        };
        written.push(output::write_file(&config.out, &format!("density_beta{}.{ext}", table.beta.as_u8()), &text)?);
    }
    Ok(written)
}

/// The table a batch is judged against: Wishart batches follow β = 1.
fn reference_beta(config: &RunConfig) -> Result<Beta, CliError> {
    match config.ensemble {
        EnsembleKind::Wishart => Ok(Beta::One),
        EnsembleKind::Gaussian => Ok(config.betas()?[0]),
    }
}

/// Draws the configured batch in parallel after the budget check.
pub fn draw(config: &RunConfig) -> Result<(SampleBatch, String), CliError> {
    let (describe, indexed) = match config.ensemble {
        EnsembleKind::Gaussian => {
            let spec = config.gaussian_spec(reference_beta(config)?);
            spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
            spec.check_budget(config.work_budget)?;
            let indexed = (0..spec.replicates)
                .into_par_iter()
                .map(|i| gaussian_replicate(&spec, i).map(|v| (i, v)))
                .collect::<Result<Vec<_>, _>>()?;
            (spec.describe(), indexed)
        }
        EnsembleKind::Wishart => {
            let spec = config.wishart_spec();
            spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
            spec.check_budget(config.work_budget)?;
            let indexed = (0..spec.replicates)
                .into_par_iter()
                .map(|i| wishart_replicate(&spec, i).map(|v| (i, v)))
                .collect::<Result<Vec<_>, _>>()?;
            (spec.describe(), indexed)
        }
    };
    let batch = SampleBatch::assemble(fnv1a(&describe), config.replicates, indexed)?;
    Ok((batch, describe))
}

fn ensemble_name(kind: EnsembleKind) -> &'static str {
    match kind {
        EnsembleKind::Gaussian => "gaussian",
        EnsembleKind::Wishart => "wishart",
    }
}

pub fn sample(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (batch, describe) = draw(config)?;
    let beta = reference_beta(config)?;
    let columns = batch.k().min(beta.m_max_cap());
    let table = &tables(config, &[(beta, columns)])?[0];
    let ks = (1..=columns)
        .map(|m| ks_statistic(&batch.column(m)?, |x| table_cdf(table, m, x)))
        .collect::<Result<Vec<_>, _>>()?;
    let meta = Meta::of(config);
    let sidecar = SampleSidecar {
        meta: meta.clone(),
        ensemble: ensemble_name(config.ensemble).into(),
        beta: beta.as_u8(),
        spec: describe,
        spec_hash: batch.spec_hash,
        replicates: batch.replicates(),
        k: batch.k(),
        ties: batch.ties,
        ks: ks.clone(),
    };
    for (m, d) in ks.iter().enumerate() {
        println!("m {}: KS distance to F{}(., {}) = {:.4}", m + 1, beta.as_u8(), m + 1, d);
    }
    if batch.ties > 0 {
        println!("{} replicate(s) with tied eigenvalues", batch.ties);
    }
    let csv = output::write_file(&config.out, "sample.csv", &output::batch_csv(&batch, &meta))?;
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes") + "\n";
    let side = output::write_file(&config.out, "sample.json", &json)?;
    Ok(vec![csv, side])
}

/// Reads a batch and its sidecar as written by [`sample`].
pub fn load_batch(path: &std::path::Path) -> Result<(SampleBatch, SampleSidecar), CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    let side_path = output::sidecar_path(path);
    let side_text = fs::read_to_string(&side_path).map_err(CliError::io(format!("reading {}", side_path.display())))?;
    let sidecar: SampleSidecar = serde_json::from_str(&side_text)
        .map_err(|e| CliError::Config(format!("{}: {e}", side_path.display())))?;
    let rows = output::parse_batch_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let batch = SampleBatch::assemble(sidecar.spec_hash, sidecar.replicates, rows)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if batch.k() != sidecar.k {
        return Err(CliError::Config(format!("{}: column count disagrees with its sidecar", path.display())));
    }
    Ok((batch, sidecar))
}

pub fn compare(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let (batch, beta) = match &config.batch {
        Some(path) => {
            let (batch, sidecar) = load_batch(path)?;
            let beta = Beta::from_u8(sidecar.beta).map_err(|e| CliError::Config(e.to_string()))?;
            match sidecar.ensemble.as_str() {
                "gaussian" => {}
                "wishart" if beta == Beta::One => {}
                "wishart" => return Err(CliError::Config("wishart batches are compared against beta = 1".into())),
                other => return Err(CliError::Config(format!("unknown ensemble {other:?} in sidecar"))),
            }
            (batch, beta)
        }
        None => (draw(config)?.0, reference_beta(config)?),
    };
    if !config.betas()?.contains(&beta) {
        return Err(CliError::Config(format!(
            "batch was drawn for beta = {} but the comparison requests beta {:?}",
            beta.as_u8(),
            config.betas
        )));
    }
    let columns = batch.k().min(beta.m_max_cap());
    let table = &tables(config, &[(beta, columns)])?[0];
    let ordinates = (1..=columns)
        .map(|m| config.percentiles.iter().map(|&p| table.quantile(m, p)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let report = percentile_table(&batch, &ordinates, &config.percentiles)?;
    println!("{:>10} {}", format!("F{}", beta.as_u8()), (1..=columns).map(|m| format!("{:>16}", format!("lambda{m}"))).collect::<String>());
    for (j, p) in report.percentiles.iter().enumerate() {
        let cells: String = (0..columns)
            .map(|m| format!("{:>16}", format!("{:.3} ± {:.3}", report.proportions[m][j], report.std_errors[m][j])))
            .collect();
        println!("{p:>10.2} {cells}");
    }
    let meta = Meta::of(config);
    let text = match config.format {
        Format::Csv => output::percentile_csv(&report, &meta),
        Format::Json => output::percentile_json(&report, &meta),
    };
    Ok(vec![output::write_file(&config.out, &format!("compare.{}", extension(config.format)), &text)?])
}

pub fn verify(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let family = family(config, &[], &suite_lambdas(&config.solver))?;
    let results = verify_suite(&family, config.oracle_nodes, config.tolerance_scale)?;
    for r in &results {
        println!("{}", r.line());
    }
    let meta = Meta::of(config);
    let text = match config.format {
        Format::Csv => output::verify_csv(&results, &meta),
        Format::Json => output::verify_json(&results, &meta),
    };
    let path = output::write_file(&config.out, &format!("verify.{}", extension(config.format)), &text)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(vec![path])
}

pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    match config.command {
        Command::Tabulate => tabulate(config),
        Command::Density => density(config),
        Command::Sample => sample(config),
        Command::Compare => compare(config),
        Command::Verify => verify(config),
    }
}
