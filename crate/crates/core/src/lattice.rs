//! Lattice discretization of the dimensionless Hamiltonian H = |k| + |x|.
//!
//! The N-site lattice has positions x_i = a (i - (N+1)/2), i = 1..N, with
//! lattice constant a = 2 lambda_c / N. The kinetic term |k| becomes a
//! symmetric Toeplitz matrix built from the Fourier coefficients of |ak|,
//! and the potential |x| a diagonal. The matrix is stored as its first
//! Toeplitz column plus the diagonal; a dense realization and a fast
//! FFT-based matvec (circulant embedding) are both provided.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest N for which a dense matrix may be materialized (N^2 doubles).
pub const DENSE_LIMIT: usize = 6001;

/// Fourier coefficient b_m of |ak| on [-pi, pi]:
/// pi for m = 0, -(4/pi)/m^2 for m odd, 0 for even m >= 2.
pub fn fourier_coeff(m: usize) -> f64 {
    if m == 0 {
        PI
    } else if m % 2 == 1 {
        -(4.0 / PI) / ((m * m) as f64)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub n_sites: usize,
    pub lambda_c: f64,
}

impl LatticeConfig {
    /// Hard error only for even N (x = 0 must be a lattice point); the
    /// regime conditions lambda_c >= 4 and N/lambda_c >= 50 are soft and
    /// reported by [`LatticeConfig::warnings`].
    pub fn new(n_sites: usize, lambda_c: f64) -> Result<Self> {
        if n_sites % 2 == 0 || n_sites < 3 {
            return Err(Error::EvenSites(n_sites));
        }
        if !(lambda_c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda_c must be positive, got {lambda_c}"
            )));
        }
        Ok(Self { n_sites, lambda_c })
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.lambda_c < 4.0 {
            w.push(format!(
                "lambda_c = {} < 4: spectrum only reliable well below the cutoff",
                self.lambda_c
            ));
        }
        if (self.n_sites as f64) / self.lambda_c < 50.0 {
            w.push(format!(
                "N/lambda_c = {:.1} < 50: lattice too coarse for the lambda_c << N regime",
                self.n_sites as f64 / self.lambda_c
            ));
        }
        w
    }

    /// Lattice constant a = 2 lambda_c / N.
    pub fn lattice_constant(&self) -> f64 {
        2.0 * self.lambda_c / self.n_sites as f64
    }

    /// Index of the x = 0 site.
    pub fn center(&self) -> usize {
        (self.n_sites - 1) / 2
    }

    /// Positions x_i, exactly antisymmetric about the center site.
    pub fn positions(&self) -> Vec<f64> {
        let a = self.lattice_constant();
        let c = self.center() as f64;
        (0..self.n_sites).map(|i| a * (i as f64 - c)).collect()
    }

    /// x = 0, a, 2a, ... up to the lattice edge.
    pub fn half_positions(&self) -> Vec<f64> {
        let a = self.lattice_constant();
        (0..=self.center()).map(|m| a * m as f64).collect()
    }

    /// Momentum cutoff pi/a of the lattice Brillouin zone.
    pub fn k_max(&self) -> f64 {
        PI / self.lattice_constant()
    }
}

#[derive(Clone)]
pub struct HamiltonianOperator {
    pub config: LatticeConfig,
    /// t_m = h_{i,i+m} kinetic part: t_0 = (N/2lc)(pi/2), t_m = -(N/2lc)(2/pi)/m^2
    /// for m odd, 0 for even m >= 2.
    pub kinetic_first_column: Vec<f64>,
    /// (2 lambda_c / N) |i - (N+1)/2|, minimum 0 at the center site.
    pub potential_diagonal: Vec<f64>,
    fft_len: usize,
    kernel_spectrum: Vec<Complex64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

/// Builds the lattice Hamiltonian for a configuration.
pub fn build_operator(config: LatticeConfig) -> Result<HamiltonianOperator> {
    // new() re-validates in case the config was constructed literally
    let config = LatticeConfig::new(config.n_sites, config.lambda_c)?;
    let n = config.n_sites;
    let inv_a = 1.0 / config.lattice_constant();
    let kinetic_first_column: Vec<f64> =
        (0..n).map(|m| 0.5 * inv_a * fourier_coeff(m)).collect();
    let a = config.lattice_constant();
    let c = config.center() as f64;
    let potential_diagonal: Vec<f64> =
        (0..n).map(|i| a * (i as f64 - c).abs()).collect();

    // Circulant embedding: kernel of length L >= 2N-1 (next power of two),
    // first column t_0..t_{N-1}, wrapped tail t_{N-1}..t_1, zero padding.
    let fft_len = (2 * n).next_power_of_two();
    let mut kernel = vec![Complex64::new(0.0, 0.0); fft_len];
    for (m, &t) in kinetic_first_column.iter().enumerate() {
        kernel[m] = Complex64::new(t, 0.0);
        if m > 0 {
            kernel[fft_len - m] = Complex64::new(t, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    let fft_fwd = planner.plan_fft_forward(fft_len);
    let fft_inv = planner.plan_fft_inverse(fft_len);
    fft_fwd.process(&mut kernel);

    Ok(HamiltonianOperator {
        config,
        kinetic_first_column,
        potential_diagonal,
        fft_len,
        kernel_spectrum: kernel,
        fft_fwd,
        fft_inv,
    })
}

impl HamiltonianOperator {
    pub fn n(&self) -> usize {
        self.config.n_sites
    }

    /// Materializes the full symmetric matrix. Only for N <= [`DENSE_LIMIT`].
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.n();
        if n > DENSE_LIMIT {
            return Err(Error::DenseLimit {
                n,
                limit: DENSE_LIMIT,
            });
        }
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let d = i.abs_diff(j);
                let mut v = self.kinetic_first_column[d];
                if i == j {
                    v += self.potential_diagonal[i];
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// H . vec via FFT circulant matvec plus diagonal multiply, O(N log N).
    /// Single-threaded with a fixed summation order, so results are
    /// bit-identical run to run.
    pub fn apply(&self, vec: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if vec.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: vec.len(),
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (b, &v) in buf.iter_mut().zip(vec) {
            b.re = v;
        }
        self.fft_fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_spectrum) {
            *b *= k;
        }
        self.fft_inv.process(&mut buf);
        let scale = 1.0 / self.fft_len as f64;
        Ok((0..n)
            .map(|i| buf[i].re * scale + self.potential_diagonal[i] * vec[i])
            .collect())
    }
}

/// phi_tilde(k) ~ (a/sqrt(2 pi)) sum_i vec_i e^{-i k x_i} at the requested
/// k points, by direct summation. Every k must lie inside the Brillouin
/// zone |k| <= pi/a.
pub fn semi_discrete_ft(
    config: &LatticeConfig,
    vec: &[f64],
    k_points: &[f64],
) -> Result<Vec<Complex64>> {
    if vec.len() != config.n_sites {
        return Err(Error::LengthMismatch {
            expected: config.n_sites,
            got: vec.len(),
        });
    }
    let k_max = config.k_max();
    if let Some(&k) = k_points.iter().find(|k| k.abs() > k_max * (1.0 + 1e-12)) {
        return Err(Error::OutsideBrillouinZone { k, k_max });
    }
    let xs = config.positions();
    let pref = config.lattice_constant() / (2.0 * PI).sqrt();
    Ok(k_points
        .iter()
        .map(|&k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &v) in xs.iter().zip(vec) {
                let (s, c) = (-k * x).sin_cos();
                acc += Complex64::new(c * v, s * v);
            }
            pref * acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    X,
    XSquared,
}

/// Riemann sum a * sum over the nonnegative half-lattice, with half weight
/// at x = 0. `values[m]` is the integrand at x = m*a. The weight option
/// multiplies the integrand by x or x^2 first.
pub fn quadrature(config: &LatticeConfig, values: &[f64], weight: Weight) -> f64 {
    let a = config.lattice_constant();
    let mut sum = 0.0;
    for (m, &v) in values.iter().enumerate() {
        let x = a * m as f64;
        let w = match weight {
            Weight::One => 1.0,
            Weight::X => x,
            Weight::XSquared => x * x,
        };
        let term = w * v;
        sum += if m == 0 { 0.5 * term } else { term };
    }
    a * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn fourier_coefficients() {
        assert_eq!(fourier_coeff(0), PI);
        assert_eq!(fourier_coeff(2), 0.0);
        assert_relative_eq!(fourier_coeff(3), -4.0 / (9.0 * PI), max_relative = 1e-15);
        assert_abs_diff_eq!(fourier_coeff(3), -0.141471, epsilon = 1e-6);
    }

    #[test]
    fn fourier_partial_sums_reconstruct_abs_k() {
        // |ak| = b_0/2 + sum b_m cos(m ak); at M = 1e4 the sup error is O(1/M).
        let m_max = 10_000;
        let mut worst: f64 = 0.0;
        for j in 0..=400 {
            let k = -PI + 2.0 * PI * j as f64 / 400.0;
            let mut s = fourier_coeff(0) / 2.0;
            for m in (1..=m_max).step_by(2) {
                s += fourier_coeff(m) * (m as f64 * k).cos();
            }
            worst = worst.max((s - k.abs()).abs());
        }
        assert!(worst <= 2e-4, "sup error {worst}");
    }

    #[test]
    fn rejects_even_n() {
        assert!(LatticeConfig::new(100, 10.0).is_err());
        assert!(LatticeConfig::new(101, 10.0).is_ok());
    }

    #[test]
    fn warnings_for_out_of_regime() {
        let cfg = LatticeConfig::new(101, 3.0).unwrap();
        assert_eq!(cfg.warnings().len(), 2); // lambda_c < 4 and N/lambda_c < 50
        let cfg = LatticeConfig::new(2001, 12.0).unwrap();
        assert!(cfg.warnings().is_empty());
    }

    #[test]
    fn positions_antisymmetric() {
        let cfg = LatticeConfig::new(1001, 7.0).unwrap();
        let xs = cfg.positions();
        for i in 0..xs.len() {
            assert_eq!(xs[i], -xs[xs.len() - 1 - i]);
        }
        assert_eq!(xs[cfg.center()], 0.0);
    }

    #[test]
    fn small_operator_entries() {
        let cfg = LatticeConfig::new(5, 1.0).unwrap();
        let op = build_operator(cfg).unwrap();
        assert_relative_eq!(op.kinetic_first_column[0], 2.5 * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(op.kinetic_first_column[1], -2.5 * 2.0 / PI, max_relative = 1e-15);
        assert_eq!(op.kinetic_first_column[2], 0.0);
        let expect = [0.8, 0.4, 0.0, 0.4, 0.8];
        for (p, e) in op.potential_diagonal.iter().zip(expect) {
            assert_abs_diff_eq!(p, &e, epsilon = 1e-15);
        }
    }

    #[test]
    fn dense_diagonal_and_symmetry() {
        let cfg = LatticeConfig::new(5, 1.0).unwrap();
        let op = build_operator(cfg).unwrap();
        let m = op.to_dense().unwrap();
        let diag = [4.72699, 4.32699, 3.92699, 4.32699, 4.72699];
        for (i, d) in diag.iter().enumerate() {
            assert_abs_diff_eq!(m[(i, i)], *d, epsilon = 1e-5);
        }
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(m[(i, j)], m[(j, i)]); // bit-for-bit
            }
        }
    }

    #[test]
    fn dense_limit_enforced() {
        let cfg = LatticeConfig { n_sites: DENSE_LIMIT + 2, lambda_c: 10.0 };
        let op = build_operator(cfg).unwrap();
        assert!(matches!(op.to_dense(), Err(Error::DenseLimit { .. })));
    }

    #[test]
    fn apply_zero_and_basis_vector() {
        let cfg = LatticeConfig::new(5, 1.0).unwrap();
        let op = build_operator(cfg).unwrap();
        let z = op.apply(&[0.0; 5]).unwrap();
        assert!(z.iter().all(|&v| v.abs() < 1e-14));
        // e_3 hits the x = 0 column, so the potential term vanishes
        let col = op.apply(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let expect = [0.0, -1.59155, 3.92699, -1.59155, 0.0];
        for (c, e) in col.iter().zip(expect) {
            assert_abs_diff_eq!(c, &e, epsilon = 1e-5);
        }
    }

    #[test]
    fn apply_matches_dense_multiply() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cfg = LatticeConfig::new(1001, 10.0).unwrap();
        let op = build_operator(cfg).unwrap();
        let dense = op.to_dense().unwrap();
        let v: Vec<f64> = (0..1001).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = op.apply(&v).unwrap();
        let dv = &dense * nalgebra::DVector::from_column_slice(&v);
        let scale = dv.norm();
        let err: f64 = fast
            .iter()
            .zip(dv.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err / scale <= 1e-12, "relative error {}", err / scale);
    }

    #[test]
    fn apply_length_mismatch() {
        let op = build_operator(LatticeConfig::new(5, 1.0).unwrap()).unwrap();
        assert!(matches!(
            op.apply(&[1.0; 4]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn apply_commutes_with_parity() {
        let cfg = LatticeConfig::new(201, 5.0).unwrap();
        let op = build_operator(cfg).unwrap();
        let v: Vec<f64> = (0..201).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect();
        let pv: Vec<f64> = v.iter().rev().cloned().collect();
        let hv = op.apply(&v).unwrap();
        let hpv = op.apply(&pv).unwrap();
        for (a, b) in hv.iter().rev().zip(&hpv) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn ft_delta_and_even_input() {
        let cfg = LatticeConfig::new(101, 4.0).unwrap();
        let mut delta = vec![0.0; 101];
        delta[cfg.center()] = 1.0;
        let ks = [0.0, 0.7, -3.0];
        let ft = semi_discrete_ft(&cfg, &delta, &ks).unwrap();
        let expect = cfg.lattice_constant() / (2.0 * PI).sqrt();
        for v in &ft {
            assert_abs_diff_eq!(v.re, expect, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
        // even real input has a real transform
        let xs = cfg.positions();
        let even: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        for v in semi_discrete_ft(&cfg, &even, &[0.3, 1.9]).unwrap() {
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ft_of_gaussian_is_gaussian() {
        let cfg = LatticeConfig::new(4001, 16.0).unwrap();
        let xs = cfg.positions();
        let g: Vec<f64> = xs.iter().map(|x| (-x * x / 2.0).exp()).collect();
        let ks: Vec<f64> = (0..=20).map(|i| -2.0 + 0.2 * i as f64).collect();
        let ft = semi_discrete_ft(&cfg, &g, &ks).unwrap();
        for (k, v) in ks.iter().zip(&ft) {
            assert_abs_diff_eq!(v.re, (-k * k / 2.0).exp(), epsilon = 1e-6);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ft_rejects_outside_brillouin_zone() {
        let cfg = LatticeConfig::new(11, 4.0).unwrap();
        let v = vec![1.0; 11];
        assert!(matches!(
            semi_discrete_ft(&cfg, &v, &[cfg.k_max() * 1.01]),
            Err(Error::OutsideBrillouinZone { .. })
        ));
    }

    #[test]
    fn quadrature_constant_and_exponential() {
        let cfg = LatticeConfig::new(5, 1.0).unwrap();
        // half-lattice x = 0, 0.4, 0.8; a (0.5 + 1 + 1) = 1.0
        assert_abs_diff_eq!(quadrature(&cfg, &[1.0, 1.0, 1.0], Weight::One), 1.0, epsilon = 1e-15);

        let cfg = LatticeConfig::new(20001, 20.0).unwrap();
        let vals: Vec<f64> = cfg.half_positions().iter().map(|x| (-x).exp()).collect();
        assert_abs_diff_eq!(quadrature(&cfg, &vals, Weight::One), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn quadrature_weights() {
        let cfg = LatticeConfig::new(20001, 20.0).unwrap();
        let vals: Vec<f64> = cfg.half_positions().iter().map(|x| (-x).exp()).collect();
        // integral of x e^-x = 1, x^2 e^-x = 2
        assert_abs_diff_eq!(quadrature(&cfg, &vals, Weight::X), 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(quadrature(&cfg, &vals, Weight::XSquared), 2.0, epsilon = 1e-4);
    }

    #[test]
    fn potential_range() {
        let cfg = LatticeConfig::new(201, 7.0).unwrap();
        let op = build_operator(cfg).unwrap();
        let hi = cfg.lambda_c * (cfg.n_sites as f64 - 1.0) / cfg.n_sites as f64;
        for &p in &op.potential_diagonal {
            assert!((0.0..=hi + 1e-12).contains(&p));
        }
    }
}
