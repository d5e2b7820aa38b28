//! `nlscd`: spectra, ground states, action minimizers and the inequality
//! suite from the command line.
//!
//! All quantities are dimensionless; no unit conversion is performed.
//! Exit codes: 0 success, 1 invalid input (the message names the violated
//! hypothesis), 2 solver non-convergence, 3 verification failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use nlscd_core::grid::{self, GreenTable, GridSpec, RadialGrid};
use nlscd_core::solver::{self, GroundStateReport, SolveConfig, SolveError};
use nlscd_core::specfun::{self, GreenParams, SpecFunConfig, SpecFunError};
use nlscd_core::spectral::{self, PhysParams, SpectralError};
use nlscd_core::verify::{self, VerifyConfig, VerifyError};

#[derive(Parser, Debug)]
#[command(name = "nlscd", version, about = "Ground states of the 2D focusing NLS with a Coulomb potential and a point interaction")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Point-interaction eigenvalues below the Coulomb threshold.
    Spectrum(Opts),
    /// Energy minimizer at fixed mass (needs --mu).
    Groundstate(Opts),
    /// Least-action state on the Nehari manifold (needs --omega).
    Actionmin(Opts),
    /// Run the inequality and ordering suite.
    Verify(Opts),
    /// Tabulate the Green function and the two Whittaker kernels as CSV.
    KernelDump(Opts),
}

#[derive(Args, Debug, Default, Clone)]
struct Opts {
    /// Coulomb charge ν (attractive: negative).
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    /// Point-interaction strength α.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Nonlinearity exponent p > 2.
    #[arg(long = "p", allow_negative_numbers = true)]
    p: Option<f64>,
    /// Mass ‖u‖₂² (groundstate).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "omega")]
    mu: Option<f64>,
    /// Frequency ω (actionmin).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Spectral parameter λ of the tabulated kernels (kernel-dump).
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Number of ladder eigenvalues (spectrum).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random samples per family (verify).
    #[arg(long)]
    samples: Option<usize>,
    /// Projected-gradient tolerance of the solver.
    #[arg(long)]
    tol: Option<f64>,
    /// Restrict verify to one check group.
    #[arg(long)]
    only: Option<String>,
    /// Also minimize the action at the extracted multiplier (groundstate).
    #[arg(long)]
    cross_validate: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the profile (or kernel table) CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON file supplying defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Defaults read from `--config`, keyed like the long flags.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    nu: Option<f64>,
    alpha: Option<f64>,
    p: Option<f64>,
    mu: Option<f64>,
    omega: Option<f64>,
    lambda: Option<f64>,
    count: Option<usize>,
    nodes: Option<usize>,
    rmin: Option<f64>,
    rmax: Option<f64>,
    restarts: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    tol: Option<f64>,
    only: Option<String>,
}

enum Failure {
    Invalid(String),
    NotConverged(String),
    VerifyFailed(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::NotConverged(_) => 2,
            Failure::VerifyFailed(_) => 3,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Invalid(format!("i/o error: {e}"))
    }
}

fn from_specfun(e: SpecFunError) -> Failure {
    match e {
        SpecFunError::Quadrature { .. } => Failure::NotConverged(e.to_string()),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn from_spectral(e: SpectralError) -> Failure {
    match e {
        SpectralError::Bracket { .. } => Failure::NotConverged(e.to_string()),
        SpectralError::SpecFun(inner) => from_specfun(inner),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn from_solve(e: SolveError) -> Failure {
    match e {
        SolveError::Preconditioner(_) | SolveError::ChargeCollapse => Failure::NotConverged(e.to_string()),
        SolveError::Spectral(inner) => from_spectral(inner),
        _ => Failure::Invalid(e.to_string()),
    }
}

fn from_verify(e: VerifyError) -> Failure {
    match e {
        VerifyError::Solve(inner) => from_solve(inner),
        VerifyError::Spectral(inner) => from_spectral(inner),
        VerifyError::SpecFun(inner) => from_specfun(inner),
        _ => Failure::Invalid(e.to_string()),
    }
}

/// Flags merged over the config file, with the verb's requirements checked.
struct Resolved {
    opts: Opts,
    grid: GridSpec,
    solve: SolveConfig,
}

fn resolve(mut o: Opts) -> Result<Resolved, Failure> {
    if let Some(path) = &o.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let f: FileConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Invalid(format!("bad config {}: {e}", path.display())))?;
        o.nu = o.nu.or(f.nu);
        o.alpha = o.alpha.or(f.alpha);
        o.p = o.p.or(f.p);
        if o.mu.is_none() && o.omega.is_none() {
            o.mu = f.mu;
            o.omega = f.omega;
        }
        o.lambda = o.lambda.or(f.lambda);
        o.count = o.count.or(f.count);
        o.nodes = o.nodes.or(f.nodes);
        o.rmin = o.rmin.or(f.rmin);
        o.rmax = o.rmax.or(f.rmax);
        o.restarts = o.restarts.or(f.restarts);
        o.seed = o.seed.or(f.seed);
        o.samples = o.samples.or(f.samples);
        o.tol = o.tol.or(f.tol);
        o.only = o.only.or(f.only);
    }
    let base = GridSpec::for_lambda_ref(1.0);
    let grid = GridSpec {
        nodes: o.nodes.unwrap_or(base.nodes),
        r_min: o.rmin.unwrap_or(base.r_min),
        r_max: o.rmax.unwrap_or(base.r_max),
    };
    let mut solve = SolveConfig::default();
    if let Some(r) = o.restarts {
        solve.restarts = r;
    }
    if let Some(s) = o.seed {
        solve.seed = s;
    }
    if let Some(t) = o.tol {
        solve.grad_tol = t;
    }
    solve.validate().map_err(from_solve)?;
    Ok(Resolved { opts: o, grid, solve })
}

fn need(v: Option<f64>, flag: &str, verb: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Invalid(format!("{verb} requires --{flag}")))
}

fn build_grid(spec: GridSpec) -> Result<RadialGrid, Failure> {
    RadialGrid::new(spec).map_err(|e| Failure::Invalid(e.to_string()))
}

fn grid_json(g: &RadialGrid) -> Value {
    let s = g.spec();
    json!({ "nodes": g.len(), "requested_nodes": s.nodes, "r_min": s.r_min, "r_max": s.r_max })
}

fn envelope(verb: &str, params: Value, results: Value, diagnostics: Value, citations: &[&str]) -> Value {
    json!({ "verb": verb, "params": params, "results": results, "diagnostics": diagnostics, "citations": citations })
}

fn emit_json(value: &Value, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Invalid(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn spectrum(r: Resolved) -> Result<(), Failure> {
    let o = &r.opts;
    let nu = need(o.nu, "nu", "spectrum")?;
    let alpha = need(o.alpha, "alpha", "spectrum")?;
    let count = o.count.unwrap_or(6);
    let params = PhysParams::mass(nu, alpha, 3.0, 1.0);
    let cfg = SpecFunConfig::default();
    let rep = spectral::eigenvalue_ladder(&params, count, &cfg).map_err(from_spectral)?;
    let out = envelope(
        "spectrum",
        json!({ "nu": nu, "alpha": alpha, "count": count }),
        json!({ "omega_nu": rep.omega_nu, "ladder": rep.ladder, "friedrichs": rep.friedrichs, "residuals": rep.residuals }),
        json!({ "roots": rep.roots }),
        &["eigenvalues solve α + θ_{-E,ν} = 0; one lies below -ν² and one between consecutive Friedrichs levels"],
    );
    emit_json(&out, o.json.as_deref())
}

fn write_profile(rep: &GroundStateReport, g: &RadialGrid, path: &Path) -> Result<(), Failure> {
    let gp = GreenParams::new(rep.state.lambda, rep.params.nu).map_err(|e| Failure::Invalid(e.to_string()))?;
    let green = GreenTable::new(g, gp, &SpecFunConfig::default()).map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut w = BufWriter::new(File::create(path)?);
    grid::write_profile_csv(&mut w, g, &rep.state, &green)?;
    w.flush()?;
    Ok(())
}

fn diagnostics(rep: &GroundStateReport, g: &RadialGrid) -> Value {
    json!({
        "grid": grid_json(g),
        "residuals": rep.residuals,
        "projected_gradient": rep.projected_gradient,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "descent_monotone": rep.descent_monotone,
        "positive": rep.positive,
        "monotone_profile": rep.monotone_profile,
        "log_slope": rep.log_slope,
        "log_slope_expected": rep.log_slope_expected,
        "restart_values": rep.restart_values,
        "restart_spread": rep.restart_spread(),
    })
}

fn solve_params(r: &Resolved) -> Value {
    json!({ "grid": r.grid, "solver": r.solve })
}

fn finish_solve(rep: &GroundStateReport, g: &RadialGrid, r: &Resolved, out: Value) -> Result<(), Failure> {
    if let Some(path) = &r.opts.csv {
        write_profile(rep, g, path)?;
    }
    emit_json(&out, r.opts.json.as_deref())?;
    if !rep.converged {
        return Err(Failure::NotConverged(format!(
            "solver stopped after {} iterations with projected gradient {:e}",
            rep.iterations, rep.projected_gradient
        )));
    }
    Ok(())
}

fn groundstate(r: Resolved) -> Result<(), Failure> {
    let o = &r.opts;
    let nu = need(o.nu, "nu", "groundstate")?;
    let alpha = need(o.alpha, "alpha", "groundstate")?;
    let p = need(o.p, "p", "groundstate")?;
    let mu = need(o.mu, "mu", "groundstate")?;
    let params = PhysParams::mass(nu, alpha, p, mu);
    solver::validate_mass_problem(&params).map_err(from_solve)?;
    let g = build_grid(r.grid)?;
    let rep = solver::minimize_energy(&g, &params, &r.solve).map_err(from_solve)?;
    let mut diag = diagnostics(&rep, &g);
    let mut citations = vec![
        "for ν < 0 and 2 < p < 4 a ground state exists, is positive, radially nonincreasing and carries a nonzero charge",
        "the ground-state energy lies strictly below the charge-free energy, which is negative",
    ];
    if o.cross_validate {
        let cv = solver::cross_validate(&rep, &g, &r.solve).map_err(from_solve)?;
        diag["cross_validation"] = json!(cv);
        citations.push("a ground state minimizes the action at its own multiplier ω > ω_ν");
    }
    let out = envelope(
        "groundstate",
        json!({ "nu": nu, "alpha": alpha, "p": p, "mu": mu, "numerics": solve_params(&r) }),
        json!({
            "energy": rep.energy,
            "charge_free_energy": rep.restricted_energy,
            "omega": rep.omega,
            "omega_nu": rep.omega_nu,
            "action": rep.action,
            "mass": rep.mass,
            "lp_norm_pow": rep.lp_norm_pow,
            "q": rep.state.q,
            "lambda": rep.state.lambda,
            "form": rep.form,
        }),
        diag,
        &citations,
    );
    finish_solve(&rep, &g, &r, out)
}

fn actionmin(r: Resolved) -> Result<(), Failure> {
    let o = &r.opts;
    let nu = need(o.nu, "nu", "actionmin")?;
    let alpha = need(o.alpha, "alpha", "actionmin")?;
    let p = need(o.p, "p", "actionmin")?;
    let omega = need(o.omega, "omega", "actionmin")?;
    let params = PhysParams::frequency(nu, alpha, p, omega);
    solver::validate_action_problem(&params, &SpecFunConfig::default()).map_err(from_solve)?;
    let g = build_grid(r.grid)?;
    let rep = solver::minimize_action(&g, &params, &r.solve).map_err(from_solve)?;
    let out = envelope(
        "actionmin",
        json!({ "nu": nu, "alpha": alpha, "p": p, "omega": omega, "numerics": solve_params(&r) }),
        json!({
            "action": rep.action,
            "charge_free_action": rep.restricted_action,
            "nehari": rep.nehari,
            "energy": rep.energy,
            "omega_nu": rep.omega_nu,
            "mass": rep.mass,
            "lp_norm_pow": rep.lp_norm_pow,
            "q": rep.state.q,
            "lambda": rep.state.lambda,
            "form": rep.form,
        }),
        diagnostics(&rep, &g),
        &[
            "for ν < 0, p > 2 and ω > ω_ν the least action on the Nehari manifold is attained",
            "the least action lies strictly below the charge-free least action",
        ],
    );
    finish_solve(&rep, &g, &r, out)
}

fn verify_suite(r: Resolved) -> Result<(), Failure> {
    let o = &r.opts;
    let mut cfg = VerifyConfig { solve: r.solve, ..VerifyConfig::default() };
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(n) = o.samples {
        cfg.samples = n;
    }
    if o.nodes.is_some() || o.rmin.is_some() || o.rmax.is_some() {
        cfg.grid = r.grid;
    }
    let rep = verify::run_all(&cfg, o.only.as_deref()).map_err(from_verify)?;
    for s in &rep.summary {
        let status = if s.failed == 0 { "PASS" } else { "FAIL" };
        eprintln!("{status} {:<18} {:>4} checks, {} failed, worst margin {:.3e}", s.name, s.total, s.failed, s.worst_margin);
    }
    let mut citations: Vec<&str> = rep.checks.iter().map(|c| c.citation.as_str()).collect();
    citations.sort_unstable();
    citations.dedup();
    let out = envelope(
        "verify",
        json!({ "seed": cfg.seed, "samples": cfg.samples, "theta_samples": cfg.theta_samples, "only": o.only, "grid": cfg.grid, "solver": cfg.solve }),
        json!({ "all_pass": rep.all_pass, "summary": rep.summary, "checks": rep.checks }),
        json!({ "calibration": rep.calibration }),
        &citations,
    );
    emit_json(&out, o.json.as_deref())?;
    let failed: usize = rep.summary.iter().map(|s| s.failed).sum();
    if failed > 0 {
        return Err(Failure::VerifyFailed(failed));
    }
    Ok(())
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn kernel_dump(r: Resolved) -> Result<(), Failure> {
    let o = &r.opts;
    let nu = need(o.nu, "nu", "kernel-dump")?;
    let lambda = o.lambda.unwrap_or_else(|| 1f64.max(4.0 * nu * nu));
    let gp = GreenParams::new(lambda, nu).map_err(|e| Failure::Invalid(e.to_string()))?;
    let cfg = SpecFunConfig::default();
    let g = build_grid(r.grid)?;
    let mut rows = Vec::with_capacity(g.len());
    for &x in g.nodes() {
        let gv = specfun::green_value(&gp, x, &cfg).map_err(from_specfun)?;
        let phi = specfun::phi_kernel(&gp, x, &cfg).map_err(from_specfun)?;
        let f = specfun::f_kernel(&gp, x, &cfg).map_err(from_specfun)?;
        rows.push(format!("{},{},{},{}", fmt17(x), fmt17(gv), fmt17(phi), fmt17(f)));
    }
    let write_rows = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "r,G,Phi,F")?;
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        w.flush()
    };
    match &o.csv {
        Some(path) => write_rows(&mut BufWriter::new(File::create(path)?))?,
        None => write_rows(&mut io::stdout().lock())?,
    }
    if let Some(path) = &o.json {
        let theta = spectral::theta(lambda, nu, &cfg).map_err(from_spectral)?;
        let wr = specfun::wronskian(&gp, &cfg).map_err(from_specfun)?;
        let out = envelope(
            "kernel-dump",
            json!({ "nu": nu, "lambda": lambda, "grid": r.grid }),
            json!({ "theta": theta, "rows": g.len() }),
            json!({ "wronskian": wr, "grid": grid_json(&g) }),
            &["𝒢 = Γ(a)/(2π) e^{-√λ r} U(a, 1, 2√λ r) with a = 1/2 + ν/(2√λ)"],
        );
        emit_json(&out, Some(path))?;
    }
    Ok(())
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NLSCD_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("NLSCD_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match cli.verb {
        Verb::Spectrum(o) => spectrum(resolve(o)?),
        Verb::Groundstate(o) => groundstate(resolve(o)?),
        Verb::Actionmin(o) => actionmin(resolve(o)?),
        Verb::Verify(o) => verify_suite(resolve(o)?),
        Verb::KernelDump(o) => kernel_dump(resolve(o)?),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors; invalid input is status 1 here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("error: {m}"),
                Failure::NotConverged(m) => eprintln!("not converged: {m}"),
                Failure::VerifyFailed(n) => eprintln!("verification failed: {n} checks"),
            }
            ExitCode::from(f.code())
        }
    }
}
