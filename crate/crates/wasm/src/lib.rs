//! Browser bindings: Green-function profiles, the θ curve, and a small
//! ground-state solve, all returned as flat `Float64Array`s.

use nlscd_core::grid::{GreenTable, GridSpec, RadialGrid};
use nlscd_core::solver::{self, SolveConfig};
use nlscd_core::specfun::{self, GreenParams, SpecFunConfig};
use nlscd_core::spectral::{self, PhysParams};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `[r₀, 𝒢(r₀), r₁, 𝒢(r₁), …]` on `n` log-spaced radii in `[r_min, r_max]`.
#[wasm_bindgen]
pub fn green_profile(nu: f64, lambda: f64, r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(JsError::new("need 0 < r_min < r_max"));
    }
    let gp = GreenParams::new(lambda, nu).map_err(err)?;
    let cfg = SpecFunConfig::default();
    let mut out = Vec::with_capacity(2 * n);
    for r in log_space(r_min, r_max, n) {
        out.push(r);
        out.push(specfun::green_value(&gp, r, &cfg).map_err(err)?);
    }
    Ok(out)
}

/// `[λ₀, θ(λ₀), …]` for `λ - ν²` log-spaced over `ν²·[10⁻⁶, span]`.
#[wasm_bindgen]
pub fn theta_curve(nu: f64, span: f64, n: usize) -> Result<Vec<f64>, JsError> {
    if !(nu < 0.0) || !(span > 1e-6) {
        return Err(JsError::new("need ν < 0 and span > 1e-6"));
    }
    let cfg = SpecFunConfig::default();
    let nu2 = nu * nu;
    let mut out = Vec::with_capacity(2 * n);
    for t in log_space(1e-6, span, n) {
        let lambda = nu2 * (1.0 + t);
        out.push(lambda);
        out.push(spectral::theta(lambda, nu, &cfg).map_err(err)?);
    }
    Ok(out)
}

/// `ω_ν`, the root of `α + θ(ω, ν) = 0` above `ν²`.
#[wasm_bindgen]
pub fn omega_nu(nu: f64, alpha: f64) -> Result<f64, JsError> {
    let params = PhysParams::mass(nu, alpha, 3.0, 1.0);
    Ok(spectral::solve_omega_nu(&params, &SpecFunConfig::default()).map_err(err)?.lambda)
}

/// Result of a ground-state solve.
#[wasm_bindgen]
pub struct GroundState {
    r: Vec<f64>,
    u: Vec<f64>,
    energy: f64,
    omega: f64,
    q: f64,
    converged: bool,
}

#[wasm_bindgen]
impl GroundState {
    pub fn radii(&self) -> Vec<f64> {
        self.r.clone()
    }
    pub fn profile(&self) -> Vec<f64> {
        self.u.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn energy(&self) -> f64 {
        self.energy
    }
    #[wasm_bindgen(getter)]
    pub fn omega(&self) -> f64 {
        self.omega
    }
    #[wasm_bindgen(getter)]
    pub fn q(&self) -> f64 {
        self.q
    }
    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

/// Mass-constrained ground state on a coarse grid (a few hundred nodes keep
/// the page responsive).
#[wasm_bindgen]
pub fn ground_state(nu: f64, alpha: f64, p: f64, mu: f64, nodes: usize) -> Result<GroundState, JsError> {
    let params = PhysParams::mass(nu, alpha, p, mu);
    solver::validate_mass_problem(&params).map_err(err)?;
    let grid = RadialGrid::new(GridSpec { nodes, ..GridSpec::for_lambda_ref(1.0) }).map_err(err)?;
    let cfg = SolveConfig::default();
    let rep = solver::minimize_energy(&grid, &params, &cfg).map_err(err)?;
    let gp = GreenParams::new(rep.state.lambda, nu).map_err(err)?;
    let green = GreenTable::new(&grid, gp, &cfg.specfun).map_err(err)?;
    Ok(GroundState {
        r: grid.nodes().to_vec(),
        u: rep.state.assemble(&green),
        energy: rep.energy,
        omega: rep.omega,
        q: rep.state.q,
        converged: rep.converged,
    })
}
