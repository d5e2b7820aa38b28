//! Ground states at fixed mass and action minimizers at fixed frequency.
//!
//! Both problems are solved by preconditioned gradient descent with Armijo
//! backtracking. The metric is the Hessian of `½(Q + σ‖·‖²)`, a banded
//! stiffness block for `φ` bordered by one row for `q`, which is factored
//! once per shift and applied through a Schur complement.
//!
//! * Mass mode descends along the projection of the preconditioned gradient
//!   onto the tangent space of `‖u‖₂² = μ` and rescales back onto the
//!   sphere after every step.
//! * Frequency mode descends on `v ↦ S(β(v) v)` where `β(v) v` is the Nehari
//!   projection, which is scale invariant and equals the least action on
//!   the ray through `v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::banded::BandedCholesky;
use crate::functionals::{
    self, el_residual, log_slope, term_gradients, FunctionalError, Residuals, StateGradient, Terms,
};
use crate::grid::{DecomposedState, GreenTable, GridError, RadialGrid};
use crate::specfun::{GreenParams, SpecFunConfig};
use crate::spectral::{self, Mode, PhysParams, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("{0}")]
    Hypothesis(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("preconditioner is not positive definite (shift σ = {0})")]
    Preconditioner(f64),
    #[error("every restart collapsed to a vanishing charge")]
    ChargeCollapse,
}

pub type Result<T> = std::result::Result<T, SolveError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_outer_iters: usize,
    pub step_init: f64,
    pub armijo_c: f64,
    /// Stop when the preconditioned projected-gradient norm drops below this.
    pub grad_tol: f64,
    /// Target for the Euler–Lagrange residual of a converged state.
    pub residual_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub specfun: SpecFunConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 4000,
            step_init: 1.0,
            armijo_c: 1e-4,
            grad_tol: 1e-10,
            residual_tol: 1e-5,
            restarts: 3,
            seed: 42,
            specfun: SpecFunConfig::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let in_range = |x: f64| x > 0.0 && x <= 1e-3;
        if !in_range(self.grad_tol) || !in_range(self.residual_tol) {
            return Err(SolveError::Config("grad_tol and residual_tol must lie in (0, 1e-3]".into()));
        }
        if self.restarts < 3 {
            return Err(SolveError::Config(format!("need at least 3 restarts, got {}", self.restarts)));
        }
        if self.max_outer_iters == 0 || !(self.step_init > 0.0) || !(self.armijo_c > 0.0 && self.armijo_c < 0.5) {
            return Err(SolveError::Config(
                "max_outer_iters > 0, step_init > 0 and 0 < armijo_c < 1/2 are required".into(),
            ));
        }
        self.specfun.validate().map_err(|e| SolveError::Config(e.to_string()))
    }
}

/// Preconditioner `P = Hess ½(Q + σ‖u‖²)` in the unknowns `(φ_0..φ_{n-2}, q)`.
struct Precond {
    chol: BandedCholesky,
    border: Vec<f64>,
    tinv_border: Vec<f64>,
    schur: f64,
    fixed_charge: bool,
}

impl Precond {
    fn new(grid: &RadialGrid, green: &GreenTable, params: &PhysParams, sigma: f64, fixed_charge: bool) -> Result<Self> {
        let n = grid.len() - 1;
        let w = grid.weights();
        let l = grid.line_weights();
        let mut t = grid.stiffness_matrix().truncated(n);
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * PI * params.nu * l[i] + sigma * w[i]).collect();
        t.add_diagonal(&diag);
        let chol = t.cholesky().map_err(|_| SolveError::Preconditioner(sigma))?;
        let lambda = green.lambda();
        let g = green.values();
        let border: Vec<f64> = (0..n).map(|i| (sigma - lambda) * w[i] * g[i]).collect();
        let gwg: f64 = (0..grid.len()).map(|i| w[i] * g[i] * g[i]).sum();
        let corner = (sigma - lambda) * gwg + params.alpha + green.theta();
        let tinv_border = chol.solve(&border);
        let schur = corner - border.iter().zip(&tinv_border).map(|(a, b)| a * b).sum::<f64>();
        if !fixed_charge && !(schur > 0.0) {
            return Err(SolveError::Preconditioner(sigma));
        }
        Ok(Self { chol, border, tinv_border, schur, fixed_charge })
    }

    fn apply(&self, g: &StateGradient) -> StateGradient {
        let n = self.border.len();
        let y = self.chol.solve(&g.dphi[..n]);
        let mut dphi = vec![0.0; n + 1];
        if self.fixed_charge {
            dphi[..n].copy_from_slice(&y);
            return StateGradient { dphi, dq: 0.0 };
        }
        let zq = (g.dq - self.border.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>()) / self.schur;
        for i in 0..n {
            dphi[i] = y[i] - self.tinv_border[i] * zq;
        }
        StateGradient { dphi, dq: zq }
    }
}

fn step(x: &DecomposedState<f64>, d: &StateGradient, tau: f64) -> DecomposedState<f64> {
    DecomposedState {
        phi: x.phi.iter().zip(&d.dphi).map(|(p, v)| p - tau * v).collect(),
        q: x.q - tau * d.dq,
        lambda: x.lambda,
    }
}

fn mask_charge(mut g: StateGradient, fixed_charge: bool) -> StateGradient {
    if fixed_charge {
        g.dq = 0.0;
    }
    g
}

/// Projected-gradient level below which the descent hands over to Newton.
const NEWTON_SWITCH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Problem {
    Mass,
    Action,
}

/// Outcome of one descent run.
#[derive(Debug, Clone)]
struct Run {
    state: DecomposedState<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    monotone: bool,
}

struct Descent<'a> {
    grid: &'a RadialGrid,
    params: PhysParams,
    cfg: &'a SolveConfig,
    omega_nu: f64,
    fixed_charge: bool,
    problem: Problem,
}

impl<'a> Descent<'a> {
    fn table(&self, lambda: f64) -> Result<GreenTable> {
        let gp = GreenParams::new(lambda, self.params.nu).map_err(|e| SolveError::Hypothesis(e.to_string()))?;
        Ok(GreenTable::new(self.grid, gp, &self.cfg.specfun)?)
    }

    fn decomposition_lambda(&self, q: f64, mass: f64) -> f64 {
        let nu = self.params.nu;
        1.0f64.max(4.0 * nu * nu).max(q * q / mass.sqrt().powf(8.0 / self.params.p))
    }

    /// Scale onto the constraint: the mass sphere or the Nehari manifold.
    fn normalize(&self, green: &GreenTable, x: DecomposedState<f64>) -> Result<(DecomposedState<f64>, Terms)> {
        let t = functionals::terms(self.grid, green, &x, &self.params)?;
        let c = match (self.problem, self.params.mode) {
            (Problem::Mass, Mode::Mass { mu }) => (mu / t.mass).sqrt(),
            (Problem::Action, Mode::Frequency { omega }) => functionals::nehari_scale(&t, omega)?,
            _ => unreachable!("mode checked on entry"),
        };
        let y = x.scaled(c);
        let ty = functionals::terms(self.grid, green, &y, &self.params)?;
        Ok((y, ty))
    }

    fn objective(&self, t: &Terms) -> f64 {
        match self.params.mode {
            Mode::Mass { .. } => t.energy(),
            Mode::Frequency { omega } => {
                let p = t.p;
                let a = t.form.q_form + omega * t.mass;
                (p - 2.0) / (2.0 * p) * a.powf(p / (p - 2.0)) * t.lp.powf(-2.0 / (p - 2.0))
            }
        }
    }

    fn shift(&self, t: &Terms) -> f64 {
        match self.params.mode {
            Mode::Mass { .. } => {
                let floor = if self.fixed_charge { self.params.nu * self.params.nu } else { self.omega_nu };
                t.multiplier().max(floor) + 0.25 * floor.max(1.0)
            }
            Mode::Frequency { omega } => omega,
        }
    }

    /// Search direction, its dual norm, and the gradient it came from.
    fn direction(&self, green: &GreenTable, x: &DecomposedState<f64>, pre: &Precond) -> Result<(StateGradient, f64, Terms)> {
        let tg = term_gradients(self.grid, green, x, &self.params)?;
        let t = tg.terms;
        let p = self.params.p;
        match self.params.mode {
            Mode::Mass { .. } => {
                let g = mask_charge(StateGradient::combine(&[(0.5, &tg.form), (-1.0 / p, &tg.lp)]), self.fixed_charge);
                let m = mask_charge(tg.mass.clone(), self.fixed_charge);
                let pg = pre.apply(&g);
                let pm = pre.apply(&m);
                let eta = m.dot(&pg) / m.dot(&pm);
                let d = StateGradient::combine(&[(1.0, &pg), (-eta, &pm)]);
                let r = StateGradient::combine(&[(1.0, &g), (-eta, &m)]);
                let norm = r.dot(&d).abs().sqrt();
                Ok((d, norm, t))
            }
            Mode::Frequency { omega } => {
                let a = t.form.q_form + omega * t.mass;
                let j = self.objective(&t);
                let ga = StateGradient::combine(&[(1.0, &tg.form), (omega, &tg.mass)]);
                let g = mask_charge(
                    StateGradient::combine(&[(j * p / ((p - 2.0) * a), &ga), (-j * 2.0 / ((p - 2.0) * t.lp), &tg.lp)]),
                    self.fixed_charge,
                );
                let d = pre.apply(&g);
                let norm = g.dot(&d).abs().sqrt();
                Ok((d, norm, t))
            }
        }
    }

    /// Euler–Lagrange residual `∇S_ω` (and the mass defect in mass mode),
    /// measured in the dual norm of the node weights.
    fn kkt_residual(&self, green: &GreenTable, x: &DecomposedState<f64>, omega: f64) -> Result<(StateGradient, f64, f64)> {
        let tg = term_gradients(self.grid, green, x, &self.params)?;
        let p = self.params.p;
        let g = mask_charge(
            StateGradient::combine(&[(0.5, &tg.form), (0.5 * omega, &tg.mass), (-1.0 / p, &tg.lp)]),
            self.fixed_charge,
        );
        let defect = match self.params.mode {
            Mode::Mass { mu } => 0.5 * (tg.terms.mass - mu),
            Mode::Frequency { .. } => 0.0,
        };
        let w = self.grid.weights();
        let n = self.grid.len() - 1;
        let norm = ((0..n).map(|i| g.dphi[i] * g.dphi[i] / w[i]).sum::<f64>() + g.dq * g.dq + defect * defect).sqrt();
        Ok((g, defect, norm))
    }

    /// One Newton step for `∇S_ω = 0` (with `‖u‖₂² = μ` in mass mode). The
    /// Hessian is a banded block for `φ` bordered by the charge and the
    /// multiplier.
    fn newton_step(&self, green: &GreenTable, x: &DecomposedState<f64>, omega: f64, g: &StateGradient, defect: f64) -> Result<Option<(StateGradient, f64)>> {
        let grid = self.grid;
        let n = grid.len() - 1;
        let w = grid.weights();
        let l = grid.line_weights();
        let gv = green.values();
        let u = x.assemble(green);
        let p = self.params.p;
        let lambda = x.lambda;
        let curv: Vec<f64> = u.iter().zip(w).map(|(v, wi)| (p - 1.0) * wi * v.abs().powf(p - 2.0)).collect();
        let mut t = grid.stiffness_matrix().truncated(n);
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * PI * self.params.nu * l[i] + omega * w[i] - curv[i]).collect();
        t.add_diagonal(&diag);
        let Ok(fac) = t.ldlt() else { return Ok(None) };

        let mut borders: Vec<Vec<f64>> = Vec::new();
        let mut corner: Vec<Vec<f64>> = Vec::new();
        let mut rhs_tail: Vec<f64> = Vec::new();
        let with_q = !self.fixed_charge;
        let with_w = matches!(self.params.mode, Mode::Mass { .. });
        let wug: f64 = (0..=n).map(|i| w[i] * u[i] * gv[i]).sum();
        if with_q {
            borders.push((0..n).map(|i| (omega - lambda) * w[i] * gv[i] - curv[i] * gv[i]).collect());
            let qq = (0..=n).map(|i| (omega - lambda) * w[i] * gv[i] * gv[i] - curv[i] * gv[i] * gv[i]).sum::<f64>()
                + self.params.alpha
                + green.theta();
            corner.push(vec![qq]);
            rhs_tail.push(-g.dq);
        }
        if with_w {
            borders.push((0..n).map(|i| w[i] * u[i]).collect());
            if with_q {
                corner[0].push(wug);
                corner.push(vec![wug, 0.0]);
            } else {
                corner.push(vec![0.0]);
            }
            rhs_tail.push(-defect);
        }
        let r1: Vec<f64> = g.dphi[..n].iter().map(|v| -v).collect();
        let y0 = fac.solve(&r1);
        let ys: Vec<Vec<f64>> = borders.iter().map(|b| fac.solve(b)).collect();
        let k = borders.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut s = vec![vec![0.0; k]; k];
        let mut rs = vec![0.0; k];
        for a in 0..k {
            for b in 0..k {
                s[a][b] = corner[a][b] - dot(&borders[a], &ys[b]);
            }
            rs[a] = rhs_tail[a] - dot(&borders[a], &y0);
        }
        let z = match k {
            0 => vec![],
            1 => vec![rs[0] / s[0][0]],
            _ => {
                let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
                vec![(rs[0] * s[1][1] - s[0][1] * rs[1]) / det, (s[0][0] * rs[1] - s[1][0] * rs[0]) / det]
            }
        };
        if z.iter().any(|v| !v.is_finite()) {
            return Ok(None);
        }
        let mut dphi = vec![0.0; n + 1];
        for i in 0..n {
            dphi[i] = y0[i] - (0..k).map(|a| ys[a][i] * z[a]).sum::<f64>();
        }
        let dq = if with_q { z[0] } else { 0.0 };
        let domega = if with_w { z[k - 1] } else { 0.0 };
        Ok(Some((StateGradient { dphi, dq }, domega)))
    }

    /// Damped Newton polish. Returns the polished state and multiplier, or
    /// `None` if the iteration does not settle.
    fn polish(&self, green: &GreenTable, x: &DecomposedState<f64>, omega: f64) -> Result<Option<(DecomposedState<f64>, f64)>> {
        let (mut g, mut defect, mut norm) = self.kkt_residual(green, x, omega)?;
        let start = norm;
        let mut x = x.clone();
        let mut omega = omega;
        for _ in 0..40 {
            let Some((d, domega)) = self.newton_step(green, &x, omega, &g, defect)? else { return Ok(None) };
            let mut tau = 1.0;
            let mut improved = false;
            for _ in 0..8 {
                let y = step(&x, &d, -tau);
                let om = omega + tau * domega;
                let (gy, dy, ny) = self.kkt_residual(green, &y, om)?;
                if ny < norm * (1.0 - 1e-4 * tau) {
                    x = y;
                    omega = om;
                    g = gy;
                    defect = dy;
                    norm = ny;
                    improved = true;
                    break;
                }
                tau *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let settled = norm < 1e-3 * start || norm < 1e-11;
        Ok(if settled { Some((x, omega)) } else { None })
    }

    fn run(&self, init: DecomposedState<f64>) -> Result<Run> {
        let mut green = self.table(init.lambda)?;
        let (mut x, mut t) = self.normalize(&green, init)?;
        let mut value = self.objective(&t);
        let mut tau = self.cfg.step_init;
        let mut monotone = true;
        let mut sigma = self.shift(&t);
        let mut pre = Precond::new(self.grid, &green, &self.params, sigma, self.fixed_charge)?;
        let mut grad_norm = f64::INFINITY;
        let mut stalled = 0;
        let mut next_polish = 0;
        for it in 0..self.cfg.max_outer_iters {
            // Keep the decomposition shift in line with the charge.
            if !self.fixed_charge && it % 50 == 0 && it > 0 {
                let want = self.decomposition_lambda(x.q, t.mass);
                if (want / x.lambda - 1.0).abs() > 0.25 {
                    let next = self.table(want)?;
                    x = x.redecompose(&green, &next);
                    green = next;
                    t = functionals::terms(self.grid, &green, &x, &self.params)?;
                    value = self.objective(&t);
                    pre = Precond::new(self.grid, &green, &self.params, self.shift(&t), self.fixed_charge)?;
                }
            }
            let s = self.shift(&t);
            if (s / sigma - 1.0).abs() > 0.05 {
                sigma = s;
                pre = Precond::new(self.grid, &green, &self.params, sigma, self.fixed_charge)?;
            }
            let (d, norm, _) = self.direction(&green, &x, &pre)?;
            grad_norm = norm;
            if norm < self.cfg.grad_tol {
                return Ok(Run { state: x, value, grad_norm, iterations: it, converged: true, monotone });
            }
            if norm < NEWTON_SWITCH && it >= next_polish {
                next_polish = it + 100;
                let omega = match self.params.mode {
                    Mode::Mass { .. } => t.multiplier(),
                    Mode::Frequency { omega } => omega,
                };
                // At λ = ω_ν the boundary value φ(0) = q(α + θ) vanishes, so
                // φ is small near the origin and its rounding does not swamp
                // the strong residual on the finest elements.
                let (pgreen, px, pvalue) = if self.fixed_charge {
                    (green.clone(), x.clone(), value)
                } else {
                    let tb = self.table(self.omega_nu)?;
                    let xb = x.redecompose(&green, &tb);
                    let vb = self.objective(&functionals::terms(self.grid, &tb, &xb, &self.params)?);
                    (tb, xb, vb)
                };
                if let Some((y, _)) = self.polish(&pgreen, &px, omega)? {
                    let ty = functionals::terms(self.grid, &pgreen, &y, &self.params)?;
                    let v = self.objective(&ty);
                    // Only accept the critical point the descent was heading to.
                    if v <= pvalue + 1e-8 * pvalue.abs().max(1.0) {
                        let ppre = Precond::new(self.grid, &pgreen, &self.params, sigma, self.fixed_charge)?;
                        let (_, norm_y, _) = self.direction(&pgreen, &y, &ppre)?;
                        return Ok(Run {
                            state: y,
                            value: v,
                            grad_norm: norm_y,
                            iterations: it,
                            converged: norm_y < self.cfg.grad_tol,
                            monotone,
                        });
                    }
                }
            }
            let mut accepted = false;
            let mut trial_tau = (2.0 * tau).min(self.cfg.step_init * 4.0);
            for _ in 0..60 {
                let cand = step(&x, &d, trial_tau);
                if let Ok((y, ty)) = self.normalize(&green, cand) {
                    let v = self.objective(&ty);
                    if v <= value - self.cfg.armijo_c * trial_tau * norm * norm {
                        if v > value {
                            monotone = false;
                        }
                        x = y;
                        t = ty;
                        value = v;
                        tau = trial_tau;
                        accepted = true;
                        break;
                    }
                }
                trial_tau *= 0.5;
            }
            if !accepted {
                // No decrease is measurable any more.
                stalled += 1;
                if stalled >= 2 {
                    return Ok(Run { state: x, value, grad_norm, iterations: it, converged: false, monotone });
                }
                tau = self.cfg.step_init;
            } else {
                stalled = 0;
            }
        }
        Ok(Run { state: x, value, grad_norm, iterations: self.cfg.max_outer_iters, converged: false, monotone })
    }
}

fn initial_state(grid: &RadialGrid, params: &PhysParams, nu: f64, rng: Option<&mut ChaCha8Rng>, fixed_charge: bool, scfg: &SpecFunConfig) -> Result<DecomposedState<f64>> {
    let mu = params.mu().unwrap_or(1.0);
    let (width, qscale, bump) = match rng {
        Some(rng) => (rng.gen_range(0.6..1.6), rng.gen_range(0.5..1.5), rng.gen_range(-0.2..0.2)),
        None => (1.0, 1.0, 0.0),
    };
    let mut phi: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let s = r / width;
            (-0.5 * s * s).exp() * (1.0 + bump * (-(r - 1.0) * (r - 1.0)).exp())
        })
        .collect();
    *phi.last_mut().unwrap() = 0.0;
    let m = grid.lp_norm_pow(&phi, 2.0);
    let c = (0.5 * mu / m).sqrt();
    phi.iter_mut().for_each(|v| *v *= c);
    let lambda = 1.0f64.max(4.0 * nu * nu);
    let q = if fixed_charge {
        0.0
    } else {
        let gp = GreenParams::new(lambda, nu).map_err(|e| SolveError::Hypothesis(e.to_string()))?;
        let table = GreenTable::new(grid, gp, scfg)?;
        qscale * (0.5 * mu / grid.lp_norm_pow(table.values(), 2.0)).sqrt()
    };
    Ok(DecomposedState { phi, q, lambda })
}

/// Best of several seeded descents (lowest objective, ties by seed order).
fn best_of_restarts(desc: &Descent, cfg: &SolveConfig) -> Result<(Run, Vec<f64>)> {
    let runs: Vec<Result<Run>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
            let init = initial_state(
                desc.grid,
                &desc.params,
                desc.params.nu,
                if k == 0 { None } else { Some(&mut rng) },
                desc.fixed_charge,
                &cfg.specfun,
            )?;
            desc.run(init)
        })
        .collect();
    let mut values = Vec::with_capacity(runs.len());
    let mut best: Option<Run> = None;
    for r in runs {
        let r = r?;
        values.push(r.value);
        if !desc.fixed_charge && r.state.q.abs() < 1e-8 {
            continue;
        }
        if best.as_ref().map_or(true, |b| r.value < b.value) {
            best = Some(r);
        }
    }
    best.map(|b| (b, values)).ok_or(SolveError::ChargeCollapse)
}

/// Minimizer of a restricted (`q = 0`) or full problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub params: PhysParams,
    pub state: DecomposedState<f64>,
    /// `F(u)`.
    pub energy: f64,
    /// Frequency: extracted multiplier in mass mode, the input in frequency mode.
    pub omega: f64,
    /// `S(u)` at `omega`.
    pub action: f64,
    /// `I(u)` at `omega`.
    pub nehari: f64,
    pub mass: f64,
    pub lp_norm_pow: f64,
    pub form: functionals::FormValue,
    pub omega_nu: f64,
    pub residuals: Residuals,
    pub projected_gradient: f64,
    pub iterations: usize,
    pub converged: bool,
    pub descent_monotone: bool,
    pub positive: bool,
    pub monotone_profile: bool,
    /// Fitted coefficient `s` in `u ≈ -s ln r + c` near the origin.
    pub log_slope: f64,
    /// `q / 2π`.
    pub log_slope_expected: f64,
    /// Objective value of every restart, in seed order.
    pub restart_values: Vec<f64>,
    /// `ℰ(μ)`: the least energy among charge-free states of the same mass.
    pub restricted_energy: Option<f64>,
    /// `d̃(ω)`: the least action among charge-free Nehari states.
    pub restricted_action: Option<f64>,
}

impl GroundStateReport {
    pub fn restart_spread(&self) -> f64 {
        let lo = self.restart_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.restart_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo.abs().max(1e-300)
    }
}

fn check_grid(grid: &RadialGrid) -> Result<()> {
    if grid.len() < 3 {
        return Err(SolveError::Config("grid too small".into()));
    }
    Ok(())
}

fn validate_common(params: &PhysParams) -> Result<()> {
    params.validate().map_err(|e| SolveError::Hypothesis(e.to_string()))?;
    if !(params.nu < 0.0) {
        return Err(SolveError::Hypothesis(format!(
            "the solvers need an attractive Coulomb charge ν < 0, got ν = {}",
            params.nu
        )));
    }
    Ok(())
}

/// Rejects inputs outside the hypotheses of the fixed-mass existence result.
pub fn validate_mass_problem(params: &PhysParams) -> Result<()> {
    validate_common(params)?;
    let Mode::Mass { .. } = params.mode else {
        return Err(SolveError::Hypothesis("ground states need a mass μ".into()));
    };
    if !(params.p < 4.0) {
        return Err(SolveError::Hypothesis(format!(
            "mass mode requires 2 < p < 4 (L²-subcritical nonlinearity), got p = {}",
            params.p
        )));
    }
    Ok(())
}

/// Rejects inputs outside the hypotheses of the action existence result.
pub fn validate_action_problem(params: &PhysParams, scfg: &SpecFunConfig) -> Result<f64> {
    validate_common(params)?;
    let Mode::Frequency { omega } = params.mode else {
        return Err(SolveError::Hypothesis("action minimization needs a frequency ω".into()));
    };
    let omega_nu = spectral::solve_omega_nu(params, scfg)?.lambda;
    if !(omega > omega_nu) {
        return Err(SolveError::Hypothesis(format!(
            "action minimizers require ω > ω_ν = {omega_nu:.12}, got ω = {omega}"
        )));
    }
    Ok(omega_nu)
}

fn finish(
    grid: &RadialGrid,
    params: PhysParams,
    omega_nu: f64,
    run: Run,
    restart_values: Vec<f64>,
    scfg: &SpecFunConfig,
) -> Result<GroundStateReport> {
    let mut state = run.state;
    // Gauge: real and q ≥ 0.
    if state.q < 0.0 {
        state = state.scaled(-1.0);
    }
    let gp = GreenParams::new(state.lambda, params.nu).map_err(|e| SolveError::Hypothesis(e.to_string()))?;
    let green = GreenTable::new(grid, gp, scfg)?;
    let t = functionals::terms(grid, &green, &state, &params)?;
    let omega = match params.mode {
        Mode::Mass { .. } => t.multiplier(),
        Mode::Frequency { omega } => omega,
    };
    let residuals = el_residual(grid, &green, &state, &params, omega)?;
    let u = state.assemble(&green);
    // Values below `floor` are rounding noise left by the solve and carry no
    // sign or ordering information.
    let floor = 1e3 * f64::EPSILON * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let positive = u.iter().all(|&v| v > -floor) && u[0] > floor;
    let monotone_profile = u.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-8) + floor);
    Ok(GroundStateReport {
        params,
        energy: t.energy(),
        omega,
        action: t.action(omega),
        nehari: t.nehari(omega),
        mass: t.mass,
        lp_norm_pow: t.lp,
        form: t.form,
        omega_nu,
        residuals,
        projected_gradient: run.grad_norm,
        iterations: run.iterations,
        converged: run.converged,
        descent_monotone: run.monotone,
        positive,
        monotone_profile,
        log_slope: log_slope(grid.nodes(), &u, 20),
        log_slope_expected: state.q / (2.0 * PI),
        restart_values,
        restricted_energy: None,
        restricted_action: None,
        state,
    })
}

fn solve(grid: &RadialGrid, params: &PhysParams, cfg: &SolveConfig, omega_nu: f64, fixed_charge: bool) -> Result<GroundStateReport> {
    let problem = match params.mode {
        Mode::Mass { .. } => Problem::Mass,
        Mode::Frequency { .. } => Problem::Action,
    };
    let desc = Descent { grid, params: *params, cfg, omega_nu, fixed_charge, problem };
    let (run, values) = best_of_restarts(&desc, cfg)?;
    finish(grid, *params, omega_nu, run, values, &cfg.specfun)
}

/// Least energy among charge-free states (`q = 0`) of the given mass.
pub fn minimize_energy_charge_free(grid: &RadialGrid, params: &PhysParams, cfg: &SolveConfig) -> Result<GroundStateReport> {
    validate_mass_problem(params)?;
    cfg.validate()?;
    check_grid(grid)?;
    let omega_nu = spectral::solve_omega_nu(params, &cfg.specfun)?.lambda;
    solve(grid, params, cfg, omega_nu, true)
}

/// Least action among charge-free Nehari states at the given frequency.
pub fn minimize_action_charge_free(grid: &RadialGrid, params: &PhysParams, cfg: &SolveConfig) -> Result<GroundStateReport> {
    validate_common(params)?;
    cfg.validate()?;
    check_grid(grid)?;
    let Mode::Frequency { omega } = params.mode else {
        return Err(SolveError::Hypothesis("action minimization needs a frequency ω".into()));
    };
    if !(omega > params.nu * params.nu) {
        return Err(SolveError::Hypothesis(format!(
            "charge-free action minimizers require ω > ν² = {}, got ω = {omega}",
            params.nu * params.nu
        )));
    }
    let omega_nu = spectral::solve_omega_nu(params, &cfg.specfun)?.lambda;
    solve(grid, params, cfg, omega_nu, true)
}

/// Ground state at fixed mass, with the charge-free comparison energy.
pub fn minimize_energy(grid: &RadialGrid, params: &PhysParams, cfg: &SolveConfig) -> Result<GroundStateReport> {
    validate_mass_problem(params)?;
    cfg.validate()?;
    check_grid(grid)?;
    let omega_nu = spectral::solve_omega_nu(params, &cfg.specfun)?.lambda;
    let mut rep = solve(grid, params, cfg, omega_nu, false)?;
    rep.restricted_energy = Some(solve(grid, params, cfg, omega_nu, true)?.energy);
    Ok(rep)
}

/// Action minimizer at fixed frequency, with the charge-free comparison.
pub fn minimize_action(grid: &RadialGrid, params: &PhysParams, cfg: &SolveConfig) -> Result<GroundStateReport> {
    let omega_nu = validate_action_problem(params, &cfg.specfun)?;
    cfg.validate()?;
    check_grid(grid)?;
    let mut rep = solve(grid, params, cfg, omega_nu, false)?;
    rep.restricted_action = Some(solve(grid, params, cfg, omega_nu, true)?.action);
    Ok(rep)
}

/// Consistency between a mass ground state and the action minimizer at its
/// multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub omega: f64,
    pub omega_nu: f64,
    /// `S(u_gs)` at `omega`.
    pub action_of_ground_state: f64,
    /// `d(ω)` from an independent action minimization.
    pub least_action: f64,
    pub action_rel_gap: f64,
    /// `(‖u‖_p^p - Q(u)) / μ` recomputed from the ground state.
    pub multiplier_recomputed: f64,
    pub multiplier_rel_gap: f64,
    pub pass: bool,
}

pub fn cross_validate(gs: &GroundStateReport, grid: &RadialGrid, cfg: &SolveConfig) -> Result<CrossValidation> {
    let Mode::Mass { mu } = gs.params.mode else {
        return Err(SolveError::Hypothesis("cross-validation starts from a mass ground state".into()));
    };
    let omega = gs.omega;
    let freq = PhysParams { mode: Mode::Frequency { omega }, ..gs.params };
    let gp = GreenParams::new(gs.state.lambda, gs.params.nu).map_err(|e| SolveError::Hypothesis(e.to_string()))?;
    let green = GreenTable::new(grid, gp, &cfg.specfun)?;
    let t = functionals::terms(grid, &green, &gs.state, &freq)?;
    let recomputed = (t.lp - t.form.q_form) / mu;
    let action_gs = t.action(omega);
    let am = minimize_action(grid, &freq, cfg)?;
    let action_rel_gap = (action_gs - am.action).abs() / am.action.abs();
    let multiplier_rel_gap = (recomputed - omega).abs() / omega.abs();
    Ok(CrossValidation {
        omega,
        omega_nu: gs.omega_nu,
        action_of_ground_state: action_gs,
        least_action: am.action,
        action_rel_gap,
        multiplier_recomputed: recomputed,
        multiplier_rel_gap,
        pass: action_rel_gap < 1e-3 && multiplier_rel_gap < 1e-6 && omega > gs.omega_nu,
    })
}
