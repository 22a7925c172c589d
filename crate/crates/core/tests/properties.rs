//! Property tests for the lattice operator and the solver contracts:
//! fast-apply vs dense equality, parity commutation, solver determinism,
//! residual bounds, and the parity of the closed-form fit models.

use bilinosc::eigen::{solve_dense, solve_iterative, Method, SolveRequest};
use bilinosc::fitting::{eval_model, FitParams};
use bilinosc::lattice::{build_operator, LatticeConfig};
use proptest::prelude::*;

fn sweep_config() -> impl Strategy<Value = LatticeConfig> {
    (prop::sample::select(vec![51usize, 201, 1001]), prop::sample::select(vec![4.0f64, 8.0, 12.0]))
        .prop_map(|(n, lc)| LatticeConfig::new(n, lc).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn apply_matches_dense_multiply(cfg in sweep_config(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let op = build_operator(cfg).unwrap();
        let dense = op.to_dense().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = cfg.n_sites;
        for _ in 0..10 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fast = op.apply(&v).unwrap();
            let dv = &dense * nalgebra::DVector::from_column_slice(&v);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..n {
                let d = fast[i] - dv[i];
                num += d * d;
                den += dv[i] * dv[i];
            }
            prop_assert!((num / den).sqrt() <= 1e-12);
        }
    }

    #[test]
    fn apply_commutes_with_parity(cfg in sweep_config(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let op = build_operator(cfg).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = cfg.n_sites;
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pv: Vec<f64> = (0..n).map(|i| v[n - 1 - i]).collect();
        let h_pv = op.apply(&pv).unwrap();
        let hv = op.apply(&v).unwrap();
        let p_hv: Vec<f64> = (0..n).map(|i| hv[n - 1 - i]).collect();
        let scale = hv.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..n {
            prop_assert!((h_pv[i] - p_hv[i]).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn fit_models_have_exact_parity(x in 0.01f64..12.0, a in 0.3f64..3.0, b in 0.1f64..3.0, d in 0.2f64..3.0) {
        for n in 0..4usize {
            let p = FitParams { a, b, c: 0.7, d: if n >= 2 { Some(d) } else { None } };
            let plus = eval_model(n, &p, x);
            let minus = eval_model(n, &p, -x);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((plus - sign * minus).abs() <= 1e-14 * plus.abs().max(1e-300));
        }
    }
}

#[test]
fn dense_and_iterative_agree_across_sweep() {
    // oracle equivalence over the configs large enough to hold 10 levels
    // without the potential cutoff squeezing them together
    for (n, lc) in [(201usize, 8.0f64), (1001, 10.0), (1001, 12.0)] {
        let mut req = SolveRequest::new(LatticeConfig::new(n, lc).unwrap());
        req.n_eig = 10;
        let d = solve_dense(&req).unwrap();
        let it = solve_iterative(&req).unwrap();
        for k in 0..10 {
            assert!(
                (d.lambdas[k] - it.lambdas[k]).abs() <= 1e-9,
                "N={n} lc={lc} k={k}: {} vs {}",
                d.lambdas[k],
                it.lambdas[k]
            );
            let l2: f64 = d.vectors[k]
                .iter()
                .zip(&it.vectors[k])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let norm = d.vectors[k].iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(l2 / norm <= 1e-6, "N={n} lc={lc} k={k}: vector dev {l2}");
        }
    }
}

#[test]
fn residual_bound_and_positivity() {
    for (n, lc, method) in [(801usize, 8.0f64, Method::Dense), (2001, 12.0, Method::Iterative)] {
        let mut req = SolveRequest::new(LatticeConfig::new(n, lc).unwrap());
        req.n_eig = 12;
        req.method = method;
        let s = bilinosc::solve(&req).unwrap();
        for k in 0..12 {
            assert!(s.lambdas[k] > 0.0);
            assert!(s.residuals[k] <= 10.0 * req.tol, "k={k} residual {}", s.residuals[k]);
        }
    }
}

#[test]
fn solver_is_deterministic() {
    let mut req = SolveRequest::new(LatticeConfig::new(2001, 12.0).unwrap());
    req.n_eig = 6;
    req.method = Method::Iterative;
    let a = bilinosc::solve(&req).unwrap();
    let b = bilinosc::solve(&req).unwrap();
    assert_eq!(a.lambdas, b.lambdas);
    assert_eq!(a.vectors, b.vectors);
    assert_eq!(a.residuals, b.residuals);
}

#[test]
fn potential_diagonal_bounds() {
    for (n, lc) in [(51usize, 4.0f64), (201, 8.0), (1001, 12.0)] {
        let op = build_operator(LatticeConfig::new(n, lc).unwrap()).unwrap();
        let hi = lc * (n as f64 - 1.0) / n as f64;
        for &v in &op.potential_diagonal {
            assert!((0.0..=hi + 1e-12).contains(&v));
        }
    }
}
