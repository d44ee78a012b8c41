//! CSV and JSON renderings of tables, batches and reports. Every file carries
//! the code version, config hash and seed; floats are written with 17
//! significant digits so they read back exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twedge_core::distributions::DistributionTable;
use twedge_core::ensembles::{PercentileTable, SampleBatch};
use twedge_core::painleve::PainleveState;

use crate::config::{RunConfig, CODE_VERSION};
use crate::error::CliError;

/// The provenance triple embedded in every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub code_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    pub fn of(config: &RunConfig) -> Meta {
        Meta { code_version: CODE_VERSION.to_string(), config_hash: config.config_hash(), seed: config.seed }
    }

    fn csv_header(&self, out: &mut String) {
        writeln!(out, "# twedge {}", self.code_version).unwrap();
        writeln!(out, "# config_hash {}", self.config_hash).unwrap();
        writeln!(out, "# seed {}", self.seed).unwrap();
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    let cells: Vec<String> = cells.into_iter().collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

pub fn table_csv(table: &DistributionTable, meta: &Meta) -> String {
    let mut out = String::new();
    meta.csv_header(&mut out);
    writeln!(out, "# beta {}", table.beta.as_u8()).unwrap();
    let m = table.m_max;
    row(&mut out, std::iter::once("s".to_string()).chain((1..=m).map(|k| format!("F{k}"))).chain((1..=m).map(|k| format!("f{k}"))));
    for (i, &s) in table.grid.iter().enumerate() {
        row(
            &mut out,
            std::iter::once(fmt_f64(s))
                .chain(table.cdf.iter().map(|c| fmt_f64(c[i])))
                .chain(table.pdf.iter().map(|c| fmt_f64(c[i]))),
        );
    }
    out
}

pub fn density_csv(table: &DistributionTable, meta: &Meta) -> String {
    let mut out = String::new();
    meta.csv_header(&mut out);
    writeln!(out, "# beta {}", table.beta.as_u8()).unwrap();
    row(&mut out, std::iter::once("s".to_string()).chain((1..=table.m_max).map(|k| format!("f{k}"))));
    for (i, &s) in table.grid.iter().enumerate() {
        row(&mut out, std::iter::once(fmt_f64(s)).chain(table.pdf.iter().map(|c| fmt_f64(c[i]))));
    }
    out
}

#[derive(Serialize)]
struct TableJson<'a> {
    #[serde(flatten)]
    meta: &'a Meta,
    beta: u8,
    m_max: usize,
    s: &'a [f64],
    cdf: &'a [Vec<f64>],
    pdf: &'a [Vec<f64>],
    derivative_error: &'a [f64],
    unconverged_points: usize,
}

pub fn table_json(table: &DistributionTable, meta: &Meta, with_cdf: bool) -> String {
    let doc = TableJson {
        meta,
        beta: table.beta.as_u8(),
        m_max: table.m_max,
        s: &table.grid,
        cdf: if with_cdf { &table.cdf } else { &[] },
        pdf: &table.pdf,
        derivative_error: &table.derivative_error,
        unconverged_points: table.unconverged_points,
    };
    serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
}

/// The state's columns, in the order of the binary cache layout.
pub fn state_csv(state: &PainleveState, meta: &Meta) -> String {
    let mut out = String::new();
    meta.csv_header(&mut out);
    writeln!(out, "# lambda {}", fmt_f64(state.lambda)).unwrap();
    let mut names = vec!["s", "q0", "q0_prime", "I0", "I0_prime", "J0"];
    let mut columns = vec![&state.grid, &state.q0, &state.q0_prime, &state.i0, &state.i0_prime, &state.j0];
    if let Some(fv) = &state.first_variation {
        names.extend(["q1", "q1_prime", "I1", "I1_prime", "J1", "mu1"]);
        columns.extend([&fv.q1, &fv.q1_prime, &fv.i1, &fv.i1_prime, &fv.j1, &fv.mu1]);
    }
    row(&mut out, names.iter().map(|s| s.to_string()));
    for i in 0..state.grid.len() {
        row(&mut out, columns.iter().map(|c| fmt_f64(c[i])));
    }
    out
}

pub fn batch_csv(batch: &SampleBatch, meta: &Meta) -> String {
    let mut out = String::new();
    meta.csv_header(&mut out);
    row(&mut out, std::iter::once("replicate".to_string()).chain((1..=batch.k()).map(|m| format!("lambda{m}"))));
    for (i, v) in batch.values.iter().enumerate() {
        row(&mut out, std::iter::once(i.to_string()).chain(v.iter().map(|&x| fmt_f64(x))));
    }
    out
}

/// Reads the value rows of a batch CSV written by [`batch_csv`].
pub fn parse_batch_csv(text: &str) -> Result<Vec<(usize, Vec<f64>)>, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("missing header")?;
    let k = header.split(',').count().checked_sub(1).filter(|&k| k > 0).ok_or("header has no value columns")?;
    lines
        .enumerate()
        .map(|(line, l)| {
            let mut cells = l.split(',');
            let index = cells.next().and_then(|c| c.parse().ok()).ok_or(format!("row {line}: bad replicate index"))?;
            let values: Vec<f64> = cells.map(|c| c.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("row {line}: {e}"))?;
            if values.len() != k {
                return Err(format!("row {line}: expected {k} values"));
            }
            Ok((index, values))
        })
        .collect()
}

/// JSON sidecar written beside every batch CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    #[serde(flatten)]
    pub meta: Meta,
    pub ensemble: String,
    pub beta: u8,
    pub spec: String,
    pub spec_hash: u64,
    pub replicates: usize,
    pub k: usize,
    pub ties: usize,
    /// Kolmogorov–Smirnov distance of column m against `F_β(·, m)`, where tabulated.
    pub ks: Vec<f64>,
}

pub fn sidecar_path(batch_csv: &Path) -> PathBuf {
    batch_csv.with_extension("json")
}

pub fn percentile_csv(table: &PercentileTable, meta: &Meta) -> String {
    let mut out = String::new();
    meta.csv_header(&mut out);
    let m = table.proportions.len();
    row(
        &mut out,
        std::iter::once("percentile".to_string())
            .chain((1..=m).map(|k| format!("lambda{k}")))
            .chain((1..=m).map(|k| format!("se{k}"))),
    );
    for (j, &p) in table.percentiles.iter().enumerate() {
        row(
            &mut out,
            std::iter::once(fmt_f64(p))
                .chain(table.proportions.iter().map(|c| fmt_f64(c[j])))
                .chain(table.std_errors.iter().map(|c| fmt_f64(c[j]))),
        );
    }
    out
}

pub fn percentile_json(table: &PercentileTable, meta: &Meta) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        meta: &'a Meta,
        #[serde(flatten)]
        table: &'a PercentileTable,
    }
    serde_json::to_string_pretty(&Doc { meta, table }).expect("report serializes") + "\n"
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> CheckResult {
        CheckResult { name: name.into(), measured, tolerance, passed: measured <= tolerance }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {}: measured {:.3e}, tolerance {:.3e}", self.name, self.measured, self.tolerance)
    }
}

pub fn verify_csv(results: &[CheckResult], meta: &Meta) -> String {
    let mut out = String::new();
    meta.csv_header(&mut out);
    row(&mut out, ["check", "measured", "tolerance", "status"].map(String::from));
    for r in results {
        let status = if r.passed { "pass" } else { "fail" };
        row(&mut out, [r.name.clone(), fmt_f64(r.measured), fmt_f64(r.tolerance), status.to_string()]);
    }
    out
}

pub fn verify_json(results: &[CheckResult], meta: &Meta) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        meta: &'a Meta,
        checks: &'a [CheckResult],
    }
    serde_json::to_string_pretty(&Doc { meta, checks: results }).expect("report serializes") + "\n"
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(CliError::io(format!("writing {}", path.display())))?;
    Ok(path)
}
