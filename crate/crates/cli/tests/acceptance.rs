//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Tolerances are the published targets, not tuned to the results.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use nlscd_core::functionals;
use nlscd_core::grid::{DecomposedState, GreenTable, GridSpec, RadialGrid};
use nlscd_core::solver::{self, SolveConfig};
use nlscd_core::specfun::{self, GreenParams, SpecFunConfig};
use nlscd_core::spectral::{self, PhysParams};
use nlscd_core::verify::{self, VerifyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    if e <= limit {
        Ok(e)
    } else {
        Err(format!("took {e:?}, limit {limit:?}"))
    }
}

/// `K₀(x) = ∫₀^∞ e^{-x cosh t} dt` by the trapezoid rule.
fn bessel_k0(x: f64) -> f64 {
    let h = 0.01;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let v = (-x * t.cosh()).exp();
        sum += v;
        if v < 1e-300 || x * t.cosh() > 745.0 {
            break;
        }
        t += h;
    }
    sum * h
}

fn default_grid() -> RadialGrid {
    RadialGrid::new(GridSpec::for_lambda_ref(1.0)).unwrap()
}

fn special_function_fidelity() -> Outcome {
    let t = Instant::now();
    let cfg = SpecFunConfig::default();
    let mut worst = 0.0f64;
    for lambda in [1.0f64, 4.0] {
        let gp = GreenParams::new(lambda, 0.0).map_err(|e| e.to_string())?;
        for i in 0..=400 {
            let r = 1e-3 * 10f64.powf(4.0 * i as f64 / 400.0);
            let g = specfun::green_value(&gp, r, &cfg).map_err(|e| e.to_string())?;
            let oracle = bessel_k0(lambda.sqrt() * r) / (2.0 * PI);
            worst = worst.max(((g - oracle) / oracle).abs());
        }
    }
    let e = within(t, Duration::from_secs(5))?;
    ensure(worst < 1e-8, format!("max rel error {worst:.2e} < 1e-8 ({e:.2?})"))
}

fn friedrichs_ladder() -> Outcome {
    let t = Instant::now();
    let cfg = SpecFunConfig::default();
    let mut worst = 0.0f64;
    for nu in [-0.5f64, -1.0, -2.0] {
        let nu2 = nu * nu;
        let poles = spectral::theta_poles(nu, nu2 / 121.0 * 0.9, nu2 * 1.1, &cfg).map_err(|e| e.to_string())?;
        let mut energies: Vec<f64> = poles.iter().map(|l| -l).collect();
        energies.sort_by(f64::total_cmp);
        if energies.len() != 6 {
            return Err(format!("ν={nu}: found {} poles, expected 6", energies.len()));
        }
        for (n, e) in energies.iter().enumerate() {
            let exact = -nu2 / (1.0 + 2.0 * n as f64).powi(2);
            worst = worst.max((e - exact).abs());
        }
    }
    let e = within(t, Duration::from_secs(5))?;
    ensure(worst < 1e-10, format!("max abs error {worst:.2e} < 1e-10 ({e:.2?})"))
}

fn theta_properties() -> Outcome {
    let t = Instant::now();
    let mut lines = Vec::new();
    for nu in [-0.5, -1.0, -2.0] {
        let rs = verify::check_theta_props(nu, 1000, &SpecFunConfig::default()).map_err(|e| e.to_string())?;
        if let Some(bad) = rs.iter().find(|r| !r.pass) {
            return Err(format!("ν={nu}: {} failed (margin {:e})", bad.name, bad.margin));
        }
        let asym = rs.iter().find(|r| r.name == "theta_asymptote").unwrap();
        lines.push(format!("ν={nu}: |ratio-1|={:.4}", asym.lhs));
    }
    let e = within(t, Duration::from_secs(5))?;
    Ok(format!("monotone, sandwiched, {} ({e:.2?})", lines.join(", ")))
}

fn omega_nu_root() -> Outcome {
    let cfg = SpecFunConfig::default();
    let mut worst_res = 0.0f64;
    for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        for nu in [-0.25f64, -0.5, -1.0, -2.0, -3.0] {
            let root = spectral::solve_omega_nu(&PhysParams::mass(nu, alpha, 3.0, 1.0), &cfg).map_err(|e| e.to_string())?;
            let res = (alpha + spectral::theta(root.lambda, nu, &cfg).map_err(|e| e.to_string())?).abs();
            if !(root.lambda > nu * nu) {
                return Err(format!("α={alpha} ν={nu}: ω_ν = {} ≤ ν²", root.lambda));
            }
            worst_res = worst_res.max(res);
        }
    }
    let mut worst_inv = 0.0f64;
    for (nu, l0) in [(-1.0f64, 1.7), (-0.5, 3.0), (-2.0, 4.5), (-1.0, 100.0)] {
        let alpha = -spectral::theta(l0, nu, &cfg).map_err(|e| e.to_string())?;
        let root = spectral::solve_omega_nu(&PhysParams::mass(nu, alpha, 3.0, 1.0), &cfg).map_err(|e| e.to_string())?;
        worst_inv = worst_inv.max(((root.lambda - l0) / l0).abs());
    }
    ensure(
        worst_res < 1e-12 && worst_inv < 1e-10,
        format!("max |α+θ| {worst_res:.1e} < 1e-12, inverse construction {worst_inv:.1e} < 1e-10"),
    )
}

fn form_invariance() -> Outcome {
    let grid = default_grid();
    let cfg = SpecFunConfig::default();
    let nu = -1.0;
    let omega = 20.0;
    let params = PhysParams::frequency(nu, 0.5, 3.0, omega);
    let table = |l: f64| GreenTable::new(&grid, GreenParams::new(l, nu).unwrap(), &cfg).unwrap();
    let (a, b) = (table(4.0), table(30.0));
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let terms: Vec<(f64, f64, f64)> =
            (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.4..2.0))).collect();
        let mut phi: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| terms.iter().map(|(c, m, s)| c * (-((r - m) / s).powi(2)).exp()).sum())
            .collect();
        *phi.last_mut().unwrap() = 0.0;
        let u = DecomposedState { phi, q: rng.gen_range(-2.0..2.0), lambda: 4.0 };
        let v = u.redecompose(&a, &b);
        let ta = functionals::terms(&grid, &a, &u, &params).map_err(|e| e.to_string())?;
        let tb = functionals::terms(&grid, &b, &v, &params).map_err(|e| e.to_string())?;
        for (x, y) in [
            (ta.form.q_form, tb.form.q_form),
            (ta.energy(), tb.energy()),
            (ta.action(omega), tb.action(omega)),
        ] {
            worst = worst.max(((x - y) / x.abs().max(1e-300)).abs());
        }
    }
    ensure(worst < 1e-6, format!("Q, F, S agree across λ = 4, 30 to {worst:.1e} < 1e-6 on 50 states"))
}

fn inequality_suite() -> Outcome {
    let cfg = VerifyConfig::default();
    let mut parts = Vec::new();
    for name in ["green_norm_bound", "gla2_glap", "modified_gn", "hardy", "theta_props"] {
        let rep = verify::run_all(&cfg, Some(name)).map_err(|e| e.to_string())?;
        let s = &rep.summary[0];
        if s.failed > 0 {
            return Err(format!("{name}: {} of {} failed, worst margin {:e}", s.failed, s.total, s.worst_margin));
        }
        // Non-strict bounds may sit inside quadrature slack; report the margin.
        parts.push(format!("{name} {}/{} min margin {:.1e}", s.total, s.total, s.worst_margin));
    }
    Ok(parts.join("; "))
}

fn ground_state() -> Outcome {
    let t = Instant::now();
    let grid = default_grid();
    let r = solver::minimize_energy(&grid, &PhysParams::mass(-1.0, 0.0, 3.0, 1.0), &SolveConfig::default())
        .map_err(|e| e.to_string())?;
    let e = within(t, Duration::from_secs(60))?;
    let e_h1 = r.restricted_energy.unwrap_or(f64::NAN);
    let slope = ((r.log_slope - r.log_slope_expected) / r.log_slope_expected).abs();
    let p = 3.0;
    let ident = ((2.0 * r.energy - (p - 2.0) / p * r.lp_norm_pow + r.omega * r.mass) / (r.omega * r.mass)).abs();
    let mut bad = Vec::new();
    if !(r.projected_gradient < 1e-6) {
        bad.push(format!("projected gradient {:e}", r.projected_gradient));
    }
    if !r.positive {
        bad.push("not positive".into());
    }
    if !r.monotone_profile {
        bad.push("not nonincreasing".into());
    }
    if !(slope < 0.02) {
        bad.push(format!("log slope off by {slope:.3}"));
    }
    if !(r.residuals.res_pde < 1e-5 && r.residuals.res_bc < 1e-4) {
        bad.push(format!("residuals {:?}", r.residuals));
    }
    if !(e_h1 - r.energy > 1e-4 && -e_h1 > 1e-4) {
        bad.push(format!("ordering F={} E={e_h1}", r.energy));
    }
    if !(ident < 1e-6) {
        bad.push(format!("multiplier identity {ident:e}"));
    }
    let msg = format!(
        "F={:.10} < E={e_h1:.10} < 0, ω={:.6}, pg={:.1e}, res_pde={:.1e}, res_bc={:.1e}, slope {slope:.1e}, identity {ident:.1e} ({e:.2?})",
        r.energy, r.omega, r.projected_gradient, r.residuals.res_pde, r.residuals.res_bc
    );
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{}; {msg}", bad.join(", ")))
    }
}

fn action_minimizer() -> Outcome {
    let grid = default_grid();
    let cfg = SpecFunConfig::default();
    let omega_nu = spectral::solve_omega_nu(&PhysParams::mass(-1.0, 0.0, 3.0, 1.0), &cfg).map_err(|e| e.to_string())?.lambda;
    let mut parts = Vec::new();
    for p in [3.0, 4.0, 5.0] {
        let t = Instant::now();
        let r = solver::minimize_action(&grid, &PhysParams::frequency(-1.0, 0.0, p, 2.0 * omega_nu), &SolveConfig::default())
            .map_err(|e| format!("p={p}: {e}"))?;
        let e = within(t, Duration::from_secs(60)).map_err(|m| format!("p={p}: {m}"))?;
        let d_tilde = r.restricted_action.unwrap_or(f64::NAN);
        let nehari = r.nehari.abs() / r.lp_norm_pow;
        let phi_nonzero = r.state.phi.iter().any(|&v| v != 0.0);
        if !(nehari < 1e-8 && d_tilde - r.action > 0.0 && r.state.q != 0.0 && phi_nonzero) {
            return Err(format!("p={p}: |I|/L={nehari:e} d={} d~={d_tilde} q={}", r.action, r.state.q));
        }
        parts.push(format!("p={p}: d={:.6} < d~={d_tilde:.6}, |I|/L={nehari:.0e} ({e:.2?})", r.action));
    }
    Ok(parts.join("; "))
}

fn cross_validation() -> Outcome {
    let grid = default_grid();
    let cfg = SolveConfig::default();
    let gs = solver::minimize_energy(&grid, &PhysParams::mass(-1.0, 0.0, 3.0, 1.0), &cfg).map_err(|e| e.to_string())?;
    let cv = solver::cross_validate(&gs, &grid, &cfg).map_err(|e| e.to_string())?;
    ensure(
        cv.action_rel_gap < 1e-3 && cv.omega > cv.omega_nu,
        format!(
            "S(u_gs)={:.8} vs d(ω)={:.8}, gap {:.1e} < 1e-3; ω={:.6} > ω_ν={:.6}",
            cv.action_of_ground_state, cv.least_action, cv.action_rel_gap, cv.omega, cv.omega_nu
        ),
    )
}

fn rearrangement() -> Outcome {
    let grid = default_grid();
    let rs = verify::check_rearrangement(&grid, 100, 42).map_err(|e| e.to_string())?;
    let count = |name: &str| {
        let v: Vec<_> = rs.iter().filter(|r| r.name == name).collect();
        (v.iter().filter(|r| r.pass).count(), v.len())
    };
    let (eq, eqn) = count("equimeasurable");
    let (l1, l1n) = count("equimeasurable_l1");
    let (hl, hln) = count("hardy_littlewood");
    let (ps, psn) = count("polya_szego");
    let worst_ps = rs.iter().filter(|r| r.name == "polya_szego").map(|r| r.lhs / (r.rhs / 1.01)).fold(0.0, f64::max);
    ensure(
        eq == eqn && l1 == l1n && hl == hln && ps == psn,
        format!("equimeasurable {eq}/{eqn} (L¹ {l1}/{l1n}), Hardy–Littlewood {hl}/{hln}, Pólya–Szegő {ps}/{psn} (max ratio {worst_ps:.4})"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_nlscd");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [(&str, &[&str]); 4] = [
        ("spectrum", &["spectrum", "--nu", "-1", "--alpha", "0.3"]),
        ("groundstate", &["groundstate", "--nu", "-1", "--alpha", "0", "--p", "3", "--mu", "1", "--nodes", "800"]),
        ("actionmin", &["actionmin", "--nu", "-1", "--alpha", "0", "--p", "3", "--omega", "20", "--nodes", "800"]),
        ("verify", &["verify", "--only", "theta_props"]),
    ];
    for (name, args) in runs {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let json = dir.path().join(format!("{name}{k}.json"));
            let csv = dir.path().join(format!("{name}{k}.csv"));
            let mut cmd = Command::new(bin);
            cmd.args(args).arg("--json").arg(&json);
            if name == "groundstate" || name == "actionmin" {
                cmd.arg("--csv").arg(&csv);
            }
            let status = cmd.output().map_err(|e| e.to_string())?.status;
            if !status.success() {
                return Err(format!("{name} exited with {status}"));
            }
            let j = std::fs::read(&json).map_err(|e| e.to_string())?;
            let c = std::fs::read(&csv).unwrap_or_default();
            outputs.push((j, c));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name}: outputs differ between runs"));
        }
    }
    Ok("spectrum, groundstate, actionmin, verify: byte-identical JSON/CSV across two runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("special-function fidelity", special_function_fidelity),
        ("Friedrichs ladder", friedrichs_ladder),
        ("θ properties", theta_properties),
        ("ω_ν root", omega_nu_root),
        ("form invariance", form_invariance),
        ("inequality suite", inequality_suite),
        ("ground state", ground_state),
        ("action minimizer", action_minimizer),
        ("cross-validation", cross_validation),
        ("rearrangement", rearrangement),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
