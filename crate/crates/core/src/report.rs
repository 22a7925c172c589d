//! CSV/JSON artifact emission and table rendering.
//!
//! All writers are deterministic: fixed column orders, fixed float
//! formatting (17 significant digits in CSV, 5 decimals in printed tables),
//! no timestamps. Stage timings, the one inherently non-reproducible
//! quantity, go to their own `timings.json` so every other artifact is
//! byte-identical across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::eigen::Spectrum;
use crate::error::Result;
use crate::fitting::{AnsatzResult, FitResult};
use crate::quasiclassical::ComparisonTable;
use crate::verification::VerificationReport;

/// Full double precision, round-trippable.
pub fn fmt_full(v: f64) -> String {
    format!("{:.17e}", v)
}

pub fn write_eigenvalues_csv(path: &Path, spectrum: &Spectrum) -> Result<()> {
    let mut out = String::from("n,lambda,parity,residual\n");
    for n in 0..spectrum.n_eig() {
        writeln!(
            out,
            "{},{},{},{}",
            n,
            fmt_full(spectrum.lambdas[n]),
            spectrum.parities[n],
            fmt_full(spectrum.residuals[n])
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Columns x, phi0, phi1, ... restricted to |x| <= xmax.
pub fn write_eigenfunctions_csv(path: &Path, spectrum: &Spectrum, xmax: f64) -> Result<()> {
    let mut out = String::from("x");
    for n in 0..spectrum.n_eig() {
        write!(out, ",phi{n}").unwrap();
    }
    out.push('\n');
    let xs = spectrum.config.positions();
    for (i, &x) in xs.iter().enumerate() {
        if x.abs() > xmax {
            continue;
        }
        write!(out, "{}", fmt_full(x)).unwrap();
        for v in &spectrum.vectors {
            write!(out, ",{}", fmt_full(v[i])).unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Wide layout mirroring the published table: one row per pair (2m, 2m+1).
pub fn write_table_csv(path: &Path, table: &ComparisonTable) -> Result<()> {
    let mut out = String::from("m,lambda_2m,lambda_2m+1,qc_2m,qc_2m+1\n");
    for pair in table.rows.chunks(2) {
        let even = &pair[0];
        let m = even.n / 2;
        if let Some(odd) = pair.get(1) {
            writeln!(
                out,
                "{},{},{},{},{}",
                m,
                fmt_full(even.lambda),
                fmt_full(odd.lambda),
                fmt_full(even.lambda_qc),
                fmt_full(odd.lambda_qc)
            )
            .unwrap();
        } else {
            writeln!(out, "{},{},,{},", m, fmt_full(even.lambda), fmt_full(even.lambda_qc))
                .unwrap();
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_table_long_csv(path: &Path, table: &ComparisonTable) -> Result<()> {
    let mut out = String::from("n,lambda,qc,delta\n");
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.n,
            fmt_full(r.lambda),
            fmt_full(r.lambda_qc),
            fmt_full(r.delta)
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Aligned text rendering of the comparison, 5 decimals like the published
/// layout.
pub fn render_table(table: &ComparisonTable) -> String {
    let mut out = String::new();
    writeln!(out, "{:>3} {:>12} {:>12} {:>10} {:>10}", "m", "lambda_2m", "lambda_2m+1", "qc_2m", "qc_2m+1").unwrap();
    for pair in table.rows.chunks(2) {
        let even = &pair[0];
        let m = even.n / 2;
        if let Some(odd) = pair.get(1) {
            writeln!(
                out,
                "{:>3} {:>12.5} {:>12.5} {:>10.4} {:>10.4}",
                m, even.lambda, odd.lambda, even.lambda_qc, odd.lambda_qc
            )
            .unwrap();
        } else {
            writeln!(out, "{:>3} {:>12.5} {:>12} {:>10.4} {:>10}", m, even.lambda, "", even.lambda_qc, "").unwrap();
        }
    }
    out
}

pub fn write_verify_json(path: &Path, report: &VerificationReport) -> Result<()> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Header n,a,b,c,d,rms,max_abs,window; d empty for the two-parameter-prefactor
/// levels.
pub fn write_fits_csv(path: &Path, fits: &[FitResult]) -> Result<()> {
    let mut out = String::from("n,a,b,c,d,rms,max_abs,window\n");
    for f in fits {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            f.n,
            fmt_full(f.params.a),
            fmt_full(f.params.b),
            fmt_full(f.params.c),
            f.params.d.map(fmt_full).unwrap_or_default(),
            fmt_full(f.rms_residual),
            fmt_full(f.max_abs_residual),
            fmt_full(f.window)
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub n_sites: usize,
    pub lambda_c: f64,
    pub lambdas: Vec<f64>,
    pub parities: Vec<String>,
    pub residuals: Vec<f64>,
    pub parity_defects: Vec<f64>,
}

impl SpectrumSummary {
    pub fn of(spectrum: &Spectrum) -> Self {
        Self {
            n_sites: spectrum.config.n_sites,
            lambda_c: spectrum.config.lambda_c,
            lambdas: spectrum.lambdas.clone(),
            parities: spectrum.parities.iter().map(|p| p.to_string()).collect(),
            residuals: spectrum.residuals.clone(),
            parity_defects: spectrum.parity_defects.clone(),
        }
    }
}

/// Aggregate written by the `all` subcommand.
#[derive(Debug, Serialize)]
pub struct FullReport {
    pub spectrum: SpectrumSummary,
    pub physical_energies: Option<Vec<f64>>,
    pub comparison: ComparisonTable,
    pub verification: VerificationReport,
    pub fits: Vec<FitResult>,
    pub ansatz: AnsatzResult,
    pub ansatz_best_a: f64,
    pub thresholds_passed: bool,
}

pub fn write_report_json(path: &Path, report: &FullReport) -> Result<()> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct StageTimings {
    pub stages: Vec<(String, f64)>,
}

pub fn write_timings_json(path: &Path, timings: &StageTimings) -> Result<()> {
    let mut s = serde_json::to_string_pretty(timings)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
