//! Mechanical checks of the analytic relations the eigenfunctions satisfy:
//! Fourier self-duality phi_tilde_n = (-i)^n phi_n, the 1/x^3 (even) and
//! 1/x^4 (odd) tails with their predicted coefficients, the half-line
//! integral identities, and the residual of the integro-differential
//! eigen-equation written through the Hilbert transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::eigen::{Parity, Spectrum};
use crate::error::{Error, Result};
use crate::lattice::{quadrature, semi_discrete_ft, LatticeConfig, Weight};

/// Tail buffer outside the classically allowed region; the tail windows
/// start at lambda_n + TAIL_BUFFER.
pub const TAIL_BUFFER: f64 = 3.0;

/// Per-level thresholds used by the report pass/fail summary. The continuum
/// relations are exact; these bound the lattice discretization error at the
/// production resolution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thresholds {
    pub duality_residual: f64,
    pub integral_relation_residual: f64,
    pub tail_exponent_slack: f64,
    pub tail_coeff_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            duality_residual: 1e-3,
            integral_relation_residual: 2e-3,
            tail_exponent_slack: 0.3,
            tail_coeff_slack: 0.15,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub n: usize,
    pub parity: Parity,
    pub duality_residual: f64,
    pub tail_exponent: f64,
    pub tail_coeff_ratio: f64,
    pub integral_relation_residual: f64,
    pub hilbert_residual_norm: f64,
    /// Jump of the centered second difference at x = 0 relative to its
    /// neighbors; diagnostic only, no threshold attached.
    pub second_difference_jump: f64,
    pub duality_window: f64,
    pub tail_window: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub n_sites: usize,
    pub lambda_c: f64,
    pub records: Vec<VerificationRecord>,
}

/// ||phi_tilde_n - (-i)^n phi_n||_2 / ||phi_n||_2 over the lattice points
/// with |x_i| <= window_xmax, with phi_tilde evaluated by the semi-discrete
/// transform at those same points.
pub fn check_fourier_duality(spectrum: &Spectrum, n: usize, window_xmax: f64) -> Result<f64> {
    let cfg = &spectrum.config;
    if window_xmax > cfg.k_max() {
        return Err(Error::OutsideBrillouinZone {
            k: window_xmax,
            k_max: cfg.k_max(),
        });
    }
    duality_residual_of(cfg, &spectrum.vectors[n], n, window_xmax)
}

/// Same residual for an arbitrary lattice vector; `n` fixes the (-i)^n phase.
pub fn duality_residual_of(
    cfg: &LatticeConfig,
    vec: &[f64],
    n: usize,
    window_xmax: f64,
) -> Result<f64> {
    let xs = cfg.positions();
    let window: Vec<f64> = xs.iter().cloned().filter(|x| x.abs() <= window_xmax).collect();
    if window.is_empty() {
        return Err(Error::EmptyWindow {
            lo: -window_xmax,
            hi: window_xmax,
        });
    }
    let ft = semi_discrete_ft(cfg, vec, &window)?;
    let phase = match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, f) in window.iter().zip(&ft) {
        // vec at the same position (positions are exact multiples of a)
        let idx = (x / cfg.lattice_constant()).round() as i64 + cfg.center() as i64;
        let v = vec[idx as usize];
        num += (f - phase * v).norm_sqr();
        den += v * v;
    }
    Ok((num / den).sqrt())
}

/// Log-log least-squares tail exponent over [x_lo, x_hi], plus the ratio of
/// the measured leading tail coefficient to the predicted one,
/// C = (-1)^{n/2} sqrt(2/pi) phi_n(0) for even n and
/// C = (-1)^{(n-1)/2} 2 sqrt(2/pi) phi_n'(0) for odd n, with the subleading
/// lambda_n/x correction included in the fit model.
pub fn check_tail(spectrum: &Spectrum, n: usize, x_lo: f64, x_hi: f64) -> Result<(f64, f64)> {
    let cfg = &spectrum.config;
    let lambda = spectrum.lambdas[n];
    let phi = &spectrum.vectors[n];
    let xs = cfg.positions();
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(phi)
        .filter(|(&x, _)| x >= x_lo && x <= x_hi)
        .map(|(&x, &v)| (x, v))
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptyWindow { lo: x_lo, hi: x_hi });
    }
    let usable: Vec<(f64, f64)> = pts.iter().cloned().filter(|(_, v)| v.abs() > 1e-13).collect();
    if usable.len() < 4 {
        return Err(Error::AmplitudeFloor);
    }

    // Leading coefficient: the asymptotic series C x^-p (1 + lambda/x +
    // q/x^2 + ...) converges slowly on reachable windows (the q/x^2 term is
    // still ~15% at x = 12), so the measured coefficient comes from the
    // model g(x) = C + B/x^2 + D/x^3 for g = phi x^p / (1 + lambda/x),
    // which extrapolates the higher orders away instead of averaging them in.
    let p = if n % 2 == 0 { 3 } else { 4 };
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (x, v) in &usable {
        let g = v * x.powi(p) / (1.0 + lambda / x);
        let row = [1.0, 1.0 / (x * x), 1.0 / (x * x * x)];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * g;
        }
    }
    let coef = solve3(&mut a, &mut rhs);
    let measured = coef[0];
    let (q_hat, d_hat) = if measured.abs() > 0.0 {
        (coef[1] / measured, coef[2] / measured)
    } else {
        (0.0, 0.0)
    };

    // exponent: slope of ln|phi| against ln x after dividing out the fitted
    // subleading factor (1 + lambda/x + q/x^2); without the deflation the
    // subleading terms masquerade as extra steepness
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let mut m_used = 0.0;
    for (x, v) in &usable {
        let corr = 1.0 + lambda / x + q_hat / (x * x) + d_hat / (x * x * x);
        if corr <= 0.1 {
            continue;
        }
        let lx = x.ln();
        let ly = (v.abs() / corr).ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        m_used += 1.0;
    }
    let exponent = (m_used * sxy - sx * sy) / (m_used * sxx - sx * sx);
    let predicted = if n % 2 == 0 {
        sign_pow(n / 2) * (2.0 / PI).sqrt() * spectrum.value_at_zero(n)
    } else {
        sign_pow((n - 1) / 2) * 2.0 * (2.0 / PI).sqrt() * spectrum.derivative_at_zero(n)
    };
    Ok((exponent, measured / predicted))
}

/// 3x3 Gaussian elimination with partial pivoting, for the tail normal
/// equations.
fn solve3(a: &mut [[f64; 3]; 3], rhs: &mut [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut out = [0.0; 3];
    for i in (0..3).rev() {
        let mut s = rhs[i];
        for j in i + 1..3 {
            s -= a[i][j] * out[j];
        }
        out[i] = s / a[i][i];
    }
    out
}

fn sign_pow(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Residual of the half-line integral identities. For even n these are
/// int_0^inf (x - lambda) phi dx = 0 and
/// int_0^inf x phi dx = (-1)^{n/2} sqrt(pi/2) lambda phi(0); for odd n the
/// analogues carry an extra factor of x and use phi'(0). Normalized by
/// int_0^inf |phi| max(x, lambda) dx.
pub fn check_integral_relation(spectrum: &Spectrum, n: usize) -> f64 {
    let cfg = &spectrum.config;
    let lambda = spectrum.lambdas[n];
    let c = cfg.center();
    let half: Vec<f64> = spectrum.vectors[n][c..].to_vec();
    integral_relation_residual(cfg, &half, lambda, n, {
        if n % 2 == 0 {
            sign_pow(n / 2) * spectrum.value_at_zero(n)
        } else {
            sign_pow((n - 1) / 2) * spectrum.derivative_at_zero(n)
        }
    })
}

/// Shared core so manufactured (non-eigenstate) inputs can be checked too.
/// `boundary` is (-1)^{n/2} phi(0) for even n, (-1)^{(n-1)/2} phi'(0) for odd.
///
/// The lattice only reaches x = lambda_c, but the integrands carry slow
/// power-law tails whose truncated contribution (~C/lambda_c) would swamp
/// the residual. The known asymptotic form, C (x^-p + lambda x^-(p-1+2)),
/// with the coefficient fixed by the same boundary value the relation
/// itself uses, supplies the analytic remainder from lambda_c to infinity.
pub fn integral_relation_residual(
    cfg: &LatticeConfig,
    half_values: &[f64],
    lambda: f64,
    n: usize,
    boundary: f64,
) -> f64 {
    let target = (PI / 2.0).sqrt() * lambda * boundary;
    let x_edge = cfg.lambda_c;
    // tail moments of x^-p over [x_edge, inf): t(p) = x_edge^(1-p)/(p-1)
    let t = |p: i32| x_edge.powi(1 - p) / f64::from(p - 1);
    let (r1, r2) = if n % 2 == 0 {
        let c_tail = (2.0 / PI).sqrt() * boundary;
        let i0 = quadrature(cfg, half_values, Weight::One) + c_tail * (t(3) + lambda * t(4));
        let i1 = quadrature(cfg, half_values, Weight::X) + c_tail * (t(2) + lambda * t(3));
        ((i1 - lambda * i0).abs(), (i1 - target).abs())
    } else {
        let c_tail = 2.0 * (2.0 / PI).sqrt() * boundary;
        let i1 = quadrature(cfg, half_values, Weight::X) + c_tail * (t(3) + lambda * t(4));
        let i2 = quadrature(cfg, half_values, Weight::XSquared) + c_tail * (t(2) + lambda * t(3));
        ((i2 - lambda * i1).abs(), (i2 - target).abs())
    };
    let a = cfg.lattice_constant();
    let mut norm = 0.0;
    for (m, v) in half_values.iter().enumerate() {
        let x = a * m as f64;
        let term = v.abs() * x.max(lambda);
        norm += if m == 0 { 0.5 * term } else { term };
    }
    norm *= a;
    r1.max(r2) / norm
}

/// Discrete Hilbert transform on the lattice: H[f](x_i) =
/// (1/pi) sum_{j != i} a f_j / (x_i - x_j). Grid-point principal value;
/// the excluded j = i term makes the kernel exactly antisymmetric.
pub fn discrete_hilbert(cfg: &LatticeConfig, f: &[f64]) -> Vec<f64> {
    let xs = cfg.positions();
    let a = cfg.lattice_constant();
    let n = xs.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if j != i {
                acc += f[j] / (xs[i] - xs[j]);
            }
        }
        out[i] = a * acc / PI;
    }
    out
}

/// L2 residual of phi' + (1/pi) PV-int (lambda - |x'|) phi(x') / (x - x') dx'
/// over |x| <= lambda_n + TAIL_BUFFER, relative to ||phi'|| on the same
/// window. The PV sum runs over the full lattice, skipping j = i.
pub fn hilbert_residual(spectrum: &Spectrum, n: usize) -> f64 {
    let cfg = &spectrum.config;
    let lambda = spectrum.lambdas[n];
    let phi = &spectrum.vectors[n];
    let xs = cfg.positions();
    let a = cfg.lattice_constant();
    let nn = xs.len();
    let window: Vec<usize> = (1..nn - 1)
        .filter(|&i| xs[i].abs() <= lambda + TAIL_BUFFER)
        .collect();
    // weight the PV kernel against once
    let weighted: Vec<f64> = xs
        .iter()
        .zip(phi)
        .map(|(&x, &v)| (lambda - x.abs()) * v)
        .collect();
    let mut res2 = 0.0;
    let mut der2 = 0.0;
    for &i in &window {
        let deriv = (phi[i + 1] - phi[i - 1]) / (2.0 * a);
        let mut pv = 0.0;
        for j in 0..nn {
            if j != i {
                pv += weighted[j] / (xs[i] - xs[j]);
            }
        }
        let lhs = deriv + a * pv / PI;
        res2 += lhs * lhs;
        der2 += deriv * deriv;
    }
    (res2 / der2).sqrt()
}

/// Centered second difference at x = 0 minus the average over the
/// neighboring sites, normalized by the largest |d2| within |x| <= 1.
/// A term proportional to |x| in phi_n would make this blow up as the
/// lattice is refined; no threshold is attached.
pub fn second_difference_jump(spectrum: &Spectrum, n: usize) -> f64 {
    let cfg = &spectrum.config;
    let a = cfg.lattice_constant();
    let c = cfg.center();
    let phi = &spectrum.vectors[n];
    let d2 = |i: usize| (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (a * a);
    let jump = d2(c) - 0.5 * (d2(c + 1) + d2(c - 1));
    let span = (1.0 / a) as usize;
    let scale = (c.saturating_sub(span)..=c + span)
        .map(|i| d2(i).abs())
        .fold(0.0_f64, f64::max);
    jump / scale.max(1e-300)
}

/// Default duality window x_max = min(10, lambda_c / 2).
pub fn default_duality_window(cfg: &LatticeConfig) -> f64 {
    (cfg.lambda_c / 2.0).min(10.0)
}

/// Default tail window [lambda_n + 3, 0.8 lambda_c].
pub fn default_tail_window(cfg: &LatticeConfig, lambda_n: f64) -> (f64, f64) {
    (lambda_n + TAIL_BUFFER, 0.8 * cfg.lambda_c)
}

/// Runs all checks for levels 0..n_max (exclusive) with the default windows.
pub fn verify_all(spectrum: &Spectrum, n_max: usize) -> Result<VerificationReport> {
    let cfg = &spectrum.config;
    let mut records = Vec::new();
    for n in 0..n_max.min(spectrum.n_eig()) {
        let dw = default_duality_window(cfg);
        let (lo, hi) = default_tail_window(cfg, spectrum.lambdas[n]);
        let duality = check_fourier_duality(spectrum, n, dw)?;
        let (exponent, ratio) = check_tail(spectrum, n, lo, hi)?;
        let integral = check_integral_relation(spectrum, n);
        let hilbert = hilbert_residual(spectrum, n);
        records.push(VerificationRecord {
            n,
            parity: spectrum.parities[n],
            duality_residual: duality,
            tail_exponent: exponent,
            tail_coeff_ratio: ratio,
            integral_relation_residual: integral,
            hilbert_residual_norm: hilbert,
            second_difference_jump: second_difference_jump(spectrum, n),
            duality_window: dw,
            tail_window: [lo, hi],
        });
    }
    Ok(VerificationReport {
        n_sites: cfg.n_sites,
        lambda_c: cfg.lambda_c,
        records,
    })
}

impl VerificationReport {
    /// True when every record passes the thresholds (tail checks compared
    /// against the parity-appropriate exponent).
    pub fn passes(&self, t: &Thresholds) -> bool {
        self.records.iter().all(|r| {
            let p_expect = if r.n % 2 == 0 { -3.0 } else { -4.0 };
            r.duality_residual <= t.duality_residual
                && r.integral_relation_residual <= t.integral_relation_residual
                && (r.tail_exponent - p_expect).abs() <= t.tail_exponent_slack
                && (r.tail_coeff_ratio - 1.0).abs() <= t.tail_coeff_slack
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{solve_dense, Method, SolveRequest};
    use approx::assert_abs_diff_eq;

    fn desk_spectrum() -> &'static Spectrum {
        use std::sync::OnceLock;
        static SPEC: OnceLock<Spectrum> = OnceLock::new();
        SPEC.get_or_init(|| {
            let mut req = SolveRequest::new(LatticeConfig::new(2001, 12.0).unwrap());
            req.n_eig = 6;
            req.method = Method::Dense;
            solve_dense(&req).unwrap()
        })
    }

    #[test]
    fn gaussian_is_self_dual() {
        let cfg = LatticeConfig::new(4001, 16.0).unwrap();
        let g: Vec<f64> = cfg.positions().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let r = duality_residual_of(&cfg, &g, 0, 6.0).unwrap();
        assert!(r <= 1e-6, "residual {r}");
    }

    #[test]
    fn duality_rejects_window_outside_bz() {
        let spec = {
            let mut req = SolveRequest::new(LatticeConfig::new(51, 4.0).unwrap());
            req.n_eig = 1;
            req.method = Method::Dense;
            solve_dense(&req).unwrap()
        };
        // pi/a is ~20 for N=51, lambda_c=4... use a window beyond it
        let too_far = spec.config.k_max() * 1.5;
        assert!(check_fourier_duality(&spec, 0, too_far).is_err());
    }

    #[test]
    fn eigenfunction_duality_desk_scale() {
        let spec = desk_spectrum();
        for n in 0..4 {
            let r = check_fourier_duality(&spec, n, default_duality_window(&spec.config)).unwrap();
            assert!(r <= 5e-3, "n={n} residual {r}");
        }
    }

    #[test]
    fn tail_exponents_desk_scale() {
        let spec = desk_spectrum();
        // desk scale leaves a short tail window with visible boundary and
        // subleading distortion; the tight bands are checked at full scale
        let (p0, _) = check_tail(&spec, 0, spec.lambdas[0] + 3.0, 0.8 * 12.0).unwrap();
        let (p1, _) = check_tail(&spec, 1, spec.lambdas[1] + 3.0, 0.8 * 12.0).unwrap();
        assert!((p0 + 3.0).abs() <= 0.6, "even exponent {p0}");
        assert!((p1 + 4.0).abs() <= 1.0, "odd exponent {p1}");
    }

    #[test]
    fn tail_window_errors() {
        let spec = desk_spectrum();
        assert!(matches!(
            check_tail(&spec, 0, 50.0, 60.0),
            Err(Error::EmptyWindow { .. })
        ));
    }

    #[test]
    fn integral_relations_desk_scale() {
        let spec = desk_spectrum();
        // residuals shrink like lambda_c^-3; at this desk resolution the odd
        // levels sit near 6e-3, the tight bound is checked at full scale
        for n in 0..4 {
            let r = check_integral_relation(&spec, n);
            assert!(r <= 1e-2, "n={n} residual {r}");
        }
    }

    #[test]
    fn manufactured_violation_is_flagged() {
        // phi = (x - lambda) * bump is orthogonal to nothing the relation
        // demands; the residual must be O(1)
        let cfg = LatticeConfig::new(2001, 12.0).unwrap();
        let lambda = 1.1;
        let half: Vec<f64> = cfg
            .half_positions()
            .iter()
            .map(|&x| (x - lambda) * (-(x - 2.0) * (x - 2.0)).exp())
            .collect();
        let r = integral_relation_residual(&cfg, &half, lambda, 0, half[0]);
        assert!(r > 0.05, "expected O(1) violation, got {r}");
    }

    #[test]
    fn double_hilbert_negates_sech() {
        // H[H[f]] = -f; the discrete error is dominated by the 1/x tail of
        // H[sech] leaving the window, so it shrinks like 1/lambda_c
        let err_at = |n: usize, lc: f64| {
            let cfg = LatticeConfig::new(n, lc).unwrap();
            let f: Vec<f64> = cfg
                .positions()
                .iter()
                .map(|&x| 1.0 / ((PI / 2.0_f64).sqrt() * x).cosh())
                .collect();
            let hh = discrete_hilbert(&cfg, &discrete_hilbert(&cfg, &f));
            let (mut num, mut den) = (0.0, 0.0);
            for ((&x, &fi), &hhi) in cfg.positions().iter().zip(&f).zip(&hh) {
                if x.abs() <= 3.0 {
                    num += (hhi + fi) * (hhi + fi);
                    den += fi * fi;
                }
            }
            (num / den).sqrt()
        };
        let coarse = err_at(1001, 12.0);
        let fine = err_at(2001, 24.0);
        assert!(coarse < 0.1, "coarse {coarse}");
        assert!(fine < 0.65 * coarse, "no tail convergence: {fine} vs {coarse}");
    }

    #[test]
    fn pv_kernel_antisymmetry() {
        // constant against 1/(x_i - x_j) over a symmetric window cancels
        let cfg = LatticeConfig::new(101, 4.0).unwrap();
        let ones = vec![1.0; 101];
        let h = discrete_hilbert(&cfg, &ones);
        assert_abs_diff_eq!(h[cfg.center()], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hilbert_residual_zero_for_zero_vector() {
        let spec = desk_spectrum();
        let mut fake = spec.clone();
        fake.vectors[0] = vec![0.0; fake.config.n_sites];
        // 0/0 guarded: derivative norm is zero, residual numerator too
        let r = hilbert_residual(&fake, 0);
        assert!(r.is_nan() || r == 0.0);
    }

    #[test]
    fn hilbert_residual_finite_desk_scale() {
        let spec = desk_spectrum();
        let r = hilbert_residual(&spec, 0);
        assert!(r.is_finite() && r > 0.0 && r < 0.5, "residual {r}");
    }

    #[test]
    fn report_thresholds_reject_garbage() {
        let spec = desk_spectrum();
        let report = verify_all(&spec, 2).unwrap();
        let mut strict = Thresholds::default();
        strict.duality_residual = 1e-12;
        assert!(!report.passes(&strict));
    }
}
