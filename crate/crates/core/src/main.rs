//! Command-line front end: solve / table / verify / fit / plot / all.
//!
//! Defaults reproduce the production run (N = 20001, lambda_c = 20,
//! 20 eigenpairs, iterative solver). Exit codes: 0 success, 1 validation
//! error, 2 solver failure, 3 threshold failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bilinosc::eigen::{self, Method, SolveRequest, Spectrum};
use bilinosc::error::Error;
use bilinosc::fitting::{self, FitResult};
use bilinosc::lattice::LatticeConfig;
use bilinosc::quasiclassical::{compare, ComparisonTable, QcSpectrum};
use bilinosc::report::{self, FullReport, SpectrumSummary, StageTimings};
use bilinosc::svg::{Curve, LinePlot};
use bilinosc::verification::{self, Thresholds};
use bilinosc::PhysicalScale;

#[derive(Parser)]
#[command(name = "bilinosc", version, about = "Spectrum and eigenfunction toolkit for H = v|p| + F|x|")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the lattice eigenproblem and write eigenvalues/eigenfunctions CSV
    Solve(CommonArgs),
    /// Eigenvalues next to the Bohr-Sommerfeld values (published-table layout)
    Table(CommonArgs),
    /// Check the analytic relations; writes verify.json
    Verify(CommonArgs),
    /// Fit the closed-form eigenfunction models for n = 0..3; writes fits.csv
    Fit(CommonArgs),
    /// Figure data as SVG line plots plus backing CSV
    Plot(CommonArgs),
    /// Full pipeline: solve, table, verify, fit, plot, report.json
    All(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Lattice sites N (odd)
    #[arg(long, default_value_t = 20001)]
    n_sites: usize,
    /// Potential cutoff lambda_c
    #[arg(long, default_value_t = 20.0)]
    lambda_c: f64,
    /// Number of eigenpairs
    #[arg(long, default_value_t = 20)]
    n_eig: usize,
    /// dense | iterative | auto
    #[arg(long, default_value = "iterative")]
    method: String,
    /// Eigensolver residual tolerance
    #[arg(long, default_value_t = eigen::DEFAULT_TOL)]
    tol: f64,
    /// RNG seed for the Lanczos start vector
    #[arg(long, default_value_t = eigen::DEFAULT_SEED)]
    seed: u64,
    /// Plot/export window |x| <= xmax
    #[arg(long, default_value_t = 10.0)]
    xmax: f64,
    /// Directory for artifacts (must exist)
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Dispersion velocity for physical energies E_n = lambda_n sqrt(hbar v F)
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Confining force
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// Multiplies every verification/fit threshold (1 = defaults)
    #[arg(long, default_value_t = 1.0)]
    threshold_scale: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Solve(a) | Command::Table(a) | Command::Verify(a) | Command::Fit(a)
        | Command::Plot(a) | Command::All(a) => a.clone(),
    };
    match run(&cli.command, &args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. }
        | Error::Breakdown(_)
        | Error::FitNonConvergence(_)
        | Error::SingularNormalEquations => 2,
        _ => 1,
    }
}

fn run(cmd: &Command, args: &CommonArgs) -> Result<ExitCode, Error> {
    let req = validate(args)?;
    let scale = PhysicalScale::new(args.v, args.f, args.hbar)?;
    for w in req.config.warnings() {
        eprintln!("warning: {w}");
    }
    // honored trivially: all numerics run single-threaded; the variable is
    // accepted so scripts can set it uniformly across tools
    if let Ok(threads) = std::env::var("BILINOSC_THREADS") {
        if threads.parse::<usize>().map(|t| t == 0).unwrap_or(true) {
            return Err(Error::InvalidConfig(format!(
                "BILINOSC_THREADS must be a positive integer, got {threads:?}"
            )));
        }
    }

    match cmd {
        Command::Solve(_) => {
            let spectrum = eigen::solve(&req)?;
            write_solve_artifacts(args, &spectrum, &scale)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Table(_) => {
            let spectrum = eigen::solve(&req)?;
            cmd_table(args, &spectrum)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(_) => {
            let spectrum = eigen::solve(&req)?;
            let report = verification::verify_all(&spectrum, args.n_eig.min(6))?;
            report::write_verify_json(&args.output_dir.join("verify.json"), &report)?;
            let ok = report.passes(&thresholds(args));
            println!("verify: {}", if ok { "pass" } else { "FAIL" });
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Fit(_) => {
            let spectrum = eigen::solve(&req)?;
            let fits = run_fits(&spectrum)?;
            report::write_fits_csv(&args.output_dir.join("fits.csv"), &fits)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot(_) => {
            let spectrum = eigen::solve(&req)?;
            let fits = run_fits(&spectrum)?;
            cmd_plot(args, &spectrum, &fits)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::All(_) => cmd_all(args, &req, &scale),
    }
}

fn validate(args: &CommonArgs) -> Result<SolveRequest, Error> {
    if !args.output_dir.is_dir() {
        return Err(Error::InvalidConfig(format!(
            "output dir {} does not exist",
            args.output_dir.display()
        )));
    }
    let method = match args.method.as_str() {
        "dense" => Method::Dense,
        "iterative" => Method::Iterative,
        "auto" => Method::Auto,
        other => {
            return Err(Error::InvalidConfig(format!(
                "method must be dense|iterative|auto, got {other}"
            )))
        }
    };
    let config = LatticeConfig::new(args.n_sites, args.lambda_c)?;
    let mut req = SolveRequest::new(config);
    req.n_eig = args.n_eig;
    req.method = method;
    req.tol = args.tol;
    req.seed = args.seed;
    req.validate()?;
    Ok(req)
}

fn thresholds(args: &CommonArgs) -> Thresholds {
    let mut t = Thresholds::default();
    t.duality_residual *= args.threshold_scale;
    t.integral_relation_residual *= args.threshold_scale;
    t.tail_exponent_slack *= args.threshold_scale;
    t.tail_coeff_slack *= args.threshold_scale;
    t
}

fn write_solve_artifacts(
    args: &CommonArgs,
    spectrum: &Spectrum,
    scale: &PhysicalScale,
) -> Result<(), Error> {
    report::write_eigenvalues_csv(&args.output_dir.join("eigenvalues.csv"), spectrum)?;
    report::write_eigenfunctions_csv(
        &args.output_dir.join("eigenfunctions.csv"),
        spectrum,
        args.xmax,
    )?;
    let phys = eigen::to_physical(spectrum, scale);
    for (n, (l, e)) in spectrum.lambdas.iter().zip(&phys.energies).enumerate() {
        if scale == &PhysicalScale::default() {
            println!("lambda_{n} = {l:.5}  ({})", spectrum.parities[n]);
        } else {
            println!(
                "lambda_{n} = {l:.5}  E_{n} = {e:.5}  ({})",
                spectrum.parities[n]
            );
        }
    }
    Ok(())
}

fn comparison_of(spectrum: &Spectrum) -> Result<ComparisonTable, Error> {
    let qc = QcSpectrum::up_to(spectrum.n_eig() - 1);
    compare(spectrum, &qc)
}

fn cmd_table(args: &CommonArgs, spectrum: &Spectrum) -> Result<ComparisonTable, Error> {
    let table = comparison_of(spectrum)?;
    report::write_table_csv(&args.output_dir.join("table1.csv"), &table)?;
    report::write_table_long_csv(&args.output_dir.join("table1_long.csv"), &table)?;
    print!("{}", report::render_table(&table));
    Ok(table)
}

fn run_fits(spectrum: &Spectrum) -> Result<Vec<FitResult>, Error> {
    (0..4.min(spectrum.n_eig()))
        .map(|n| {
            fitting::fit(
                spectrum,
                n,
                fitting::DEFAULT_FIT_WINDOW.min(0.9 * spectrum.config.lambda_c),
                fitting::default_initial_params(n),
            )
        })
        .collect()
}

fn parity_curves(spectrum: &Spectrum, xmax: f64, even: bool) -> Vec<Curve> {
    let xs = spectrum.config.positions();
    (0..spectrum.n_eig())
        .filter(|n| (n % 2 == 0) == even)
        .take(4)
        .map(|n| Curve {
            label: format!("phi{n}"),
            points: xs
                .iter()
                .zip(&spectrum.vectors[n])
                .filter(|(&x, _)| x.abs() <= xmax)
                .map(|(&x, &v)| (x, v))
                .collect(),
            markers: false,
        })
        .collect()
}

fn cmd_plot(args: &CommonArgs, spectrum: &Spectrum, fits: &[FitResult]) -> Result<(), Error> {
    let dir = &args.output_dir;
    let xmax = args.xmax;

    let even = LinePlot {
        title: "Symmetric eigenfunctions".into(),
        x_label: "x".into(),
        y_label: "phi_n(x)".into(),
        curves: parity_curves(spectrum, xmax, true),
    };
    std::fs::write(dir.join("fig_even.svg"), even.render())?;

    let odd = LinePlot {
        title: "Antisymmetric eigenfunctions".into(),
        x_label: "x".into(),
        y_label: "phi_n(x)".into(),
        curves: parity_curves(spectrum, xmax, false),
    };
    std::fs::write(dir.join("fig_odd.svg"), odd.render())?;

    // numeric curves with model-sampled markers on a coarse stride
    let xs = spectrum.config.positions();
    let mut curves = Vec::new();
    for f in fits {
        curves.push(Curve {
            label: format!("phi{}", f.n),
            points: xs
                .iter()
                .zip(&spectrum.vectors[f.n])
                .filter(|(&x, _)| x.abs() <= xmax)
                .map(|(&x, &v)| (x, v))
                .collect(),
            markers: false,
        });
    }
    for f in fits {
        let marker_xs: Vec<f64> = (0..=40)
            .map(|i| -xmax + 2.0 * xmax * i as f64 / 40.0)
            .collect();
        curves.push(Curve {
            label: format!("fit n={}", f.n),
            points: marker_xs
                .iter()
                .map(|&x| (x, fitting::eval_model(f.n, &f.params, x)))
                .collect(),
            markers: true,
        });
    }
    let figfits = LinePlot {
        title: "Eigenfunctions with model fits".into(),
        x_label: "x".into(),
        y_label: "phi_n(x)".into(),
        curves,
    };
    std::fs::write(dir.join("fig_fits.svg"), figfits.render())?;

    report::write_eigenfunctions_csv(&dir.join("fig_curves.csv"), spectrum, xmax)?;
    report::write_fits_csv(&dir.join("fig_fits.csv"), fits)?;
    Ok(())
}

fn cmd_all(args: &CommonArgs, req: &SolveRequest, scale: &PhysicalScale) -> Result<ExitCode, Error> {
    let mut timings = Vec::new();
    let mut stage = |name: &str, t0: Instant| {
        timings.push((name.to_string(), t0.elapsed().as_secs_f64()));
    };

    let t0 = Instant::now();
    let spectrum = eigen::solve(req)?;
    stage("solve", t0);
    write_solve_artifacts(args, &spectrum, scale)?;

    let t0 = Instant::now();
    let table = cmd_table(args, &spectrum)?;
    stage("table", t0);

    let t0 = Instant::now();
    let verification_report = verification::verify_all(&spectrum, args.n_eig.min(6))?;
    report::write_verify_json(&args.output_dir.join("verify.json"), &verification_report)?;
    stage("verify", t0);

    let t0 = Instant::now();
    let fits = run_fits(&spectrum)?;
    report::write_fits_csv(&args.output_dir.join("fits.csv"), &fits)?;
    stage("fit", t0);

    let t0 = Instant::now();
    cmd_plot(args, &spectrum, &fits)?;
    stage("plot", t0);

    // ansatz on a reduced lattice for the scan, the quoted shape on the run's
    // own lattice for the quotient
    let t0 = Instant::now();
    let op = bilinosc::build_operator(req.config)?;
    let ansatz = fitting::ansatz_ground_state(&op, 1.172, Some(&spectrum.vectors[0]))?;
    let scan_cfg = LatticeConfig::new(req.config.n_sites.min(2001), req.config.lambda_c.min(12.0))?;
    let scan_op = bilinosc::build_operator(scan_cfg)?;
    let grid: Vec<f64> = (0..=16).map(|i| 0.8 + 0.05 * i as f64).collect();
    let (best_a, _) = fitting::scan_ansatz(&scan_op, &grid)?;
    stage("ansatz", t0);

    let t = thresholds(args);
    let fit_threshold = 0.02 * args.threshold_scale;
    let passed = verification_report.passes(&t)
        && fits.iter().all(|f| f.max_abs_residual <= fit_threshold)
        && spectrum.residuals.iter().all(|r| *r <= 10.0 * req.tol);

    let full = FullReport {
        spectrum: SpectrumSummary::of(&spectrum),
        physical_energies: if scale == &PhysicalScale::default() {
            None
        } else {
            Some(eigen::to_physical(&spectrum, scale).energies)
        },
        comparison: table,
        verification: verification_report,
        fits,
        ansatz,
        ansatz_best_a: best_a,
        thresholds_passed: passed,
    };
    report::write_report_json(&args.output_dir.join("report.json"), &full)?;
    report::write_timings_json(
        &args.output_dir.join("timings.json"),
        &StageTimings { stages: timings },
    )?;

    println!("thresholds: {}", if passed { "pass" } else { "FAIL" });
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(3) })
}
