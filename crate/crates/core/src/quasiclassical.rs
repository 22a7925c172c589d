//! Bohr-Sommerfeld spectrum of the dimensionless oscillator and its
//! comparison against the numerical eigenvalues.
//!
//! The phase-space area rule for H = |k| + |x| gives
//! lambda_n^qc = sqrt(pi (n + 1/2)), expected to approach the true
//! eigenvalues from above/below as n grows.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigen::Spectrum;
use crate::error::{Error, Result};

pub fn lambda_qc(n: usize) -> f64 {
    (PI * (n as f64 + 0.5)).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct QcSpectrum {
    pub lambdas_qc: Vec<f64>,
}

impl QcSpectrum {
    /// Levels n = 0..=n_max.
    pub fn up_to(n_max: usize) -> Self {
        Self {
            lambdas_qc: (0..=n_max).map(lambda_qc).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub lambda: f64,
    pub lambda_qc: f64,
    /// Signed difference, quasi-classical minus numerical.
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// |delta| at the top level is smaller than at the ground state.
    pub converging: bool,
}

pub fn compare(spectrum: &Spectrum, qc: &QcSpectrum) -> Result<ComparisonTable> {
    if spectrum.lambdas.len() != qc.lambdas_qc.len() {
        return Err(Error::LengthMismatch {
            expected: spectrum.lambdas.len(),
            got: qc.lambdas_qc.len(),
        });
    }
    let rows: Vec<ComparisonRow> = spectrum
        .lambdas
        .iter()
        .zip(&qc.lambdas_qc)
        .enumerate()
        .map(|(n, (&l, &q))| ComparisonRow {
            n,
            lambda: l,
            lambda_qc: q,
            delta: q - l,
        })
        .collect();
    let converging = match (rows.first(), rows.last()) {
        (Some(first), Some(last)) => last.delta.abs() < first.delta.abs(),
        _ => false,
    };
    Ok(ComparisonTable { rows, converging })
}
