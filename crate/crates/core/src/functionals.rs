//! The quadratic form, energy, action and Nehari functionals on states
//! `u = φ + q 𝒢_{λ,ν}`, their gradients, and Euler–Lagrange residuals.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::grid::{Amplitude, DecomposedState, GreenTable, GridError, RadialGrid};
use crate::spectral::{boundary_coefficients, Mode, PhysParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("green table is for ν = {table}, parameters have ν = {params}")]
    ChargeMismatch { table: f64, params: f64 },
    #[error("{0}")]
    Mode(String),
    #[error("Q(u) + ω‖u‖₂² = {0} is not positive; no Nehari projection exists")]
    NonPositiveQuadratic(f64),
    #[error("‖u‖_p vanishes; no Nehari projection exists")]
    ZeroState,
}

pub type Result<T> = std::result::Result<T, FunctionalError>;

/// `Q(u) = ‖∇φ‖² + ν‖|x|^{-1/2}φ‖² + λ(‖φ‖² - ‖u‖²) + (α + θ)|q|²`,
/// kept term by term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub q_form: f64,
    pub kinetic: f64,
    pub coulomb: f64,
    pub shift_term: f64,
    pub point_term: f64,
}

fn check<T: Amplitude>(green: &GreenTable, u: &DecomposedState<T>, params: &PhysParams) -> Result<()> {
    u.check_table(green)?;
    if green.params().nu() != params.nu {
        return Err(FunctionalError::ChargeMismatch { table: green.params().nu(), params: params.nu });
    }
    Ok(())
}

fn form_from_parts<T: Amplitude>(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<T>,
    params: &PhysParams,
    mass_u: f64,
) -> FormValue {
    let kinetic = grid.grad_norm_sq(&u.phi);
    let coulomb = params.nu * grid.coulomb_term(&u.phi);
    let shift_term = u.lambda * (grid.lp_norm_pow(&u.phi, 2.0) - mass_u);
    let point_term = (params.alpha + green.theta()) * u.q.norm_sqr();
    FormValue {
        q_form: kinetic + coulomb + shift_term + point_term,
        kinetic,
        coulomb,
        shift_term,
        point_term,
    }
}

pub fn q_form<T: Amplitude>(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<T>,
    params: &PhysParams,
) -> Result<FormValue> {
    check(green, u, params)?;
    let mass = grid.lp_norm_pow(&u.assemble(green), 2.0);
    Ok(form_from_parts(grid, green, u, params, mass))
}

/// Everything the functionals are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terms {
    pub form: FormValue,
    /// `‖u‖₂²`
    pub mass: f64,
    /// `‖u‖_p^p`
    pub lp: f64,
    pub p: f64,
}

impl Terms {
    pub fn energy(&self) -> f64 {
        0.5 * self.form.q_form - self.lp / self.p
    }

    pub fn action(&self, omega: f64) -> f64 {
        self.energy() + 0.5 * omega * self.mass
    }

    pub fn nehari(&self, omega: f64) -> f64 {
        self.form.q_form + omega * self.mass - self.lp
    }

    /// `ω = (‖u‖_p^p - Q(u)) / ‖u‖₂²`.
    pub fn multiplier(&self) -> f64 {
        (self.lp - self.form.q_form) / self.mass
    }
}

pub fn terms<T: Amplitude>(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<T>,
    params: &PhysParams,
) -> Result<Terms> {
    check(green, u, params)?;
    let full = u.assemble(green);
    let mass = grid.lp_norm_pow(&full, 2.0);
    let lp = grid.lp_norm_pow(&full, params.p);
    Ok(Terms { form: form_from_parts(grid, green, u, params, mass), mass, lp, p: params.p })
}

fn frequency(params: &PhysParams) -> Result<f64> {
    match params.mode {
        Mode::Frequency { omega } => Ok(omega),
        Mode::Mass { .. } => Err(FunctionalError::Mode(
            "the action and Nehari functionals need a frequency ω".into(),
        )),
    }
}

/// `F(u) = ½ Q(u) - ‖u‖_p^p / p`.
pub fn energy<T: Amplitude>(grid: &RadialGrid, green: &GreenTable, u: &DecomposedState<T>, params: &PhysParams) -> Result<f64> {
    Ok(terms(grid, green, u, params)?.energy())
}

/// `S(u) = F(u) + (ω/2) ‖u‖₂²`.
pub fn action<T: Amplitude>(grid: &RadialGrid, green: &GreenTable, u: &DecomposedState<T>, params: &PhysParams) -> Result<f64> {
    let omega = frequency(params)?;
    Ok(terms(grid, green, u, params)?.action(omega))
}

/// `I(u) = Q(u) + ω ‖u‖₂² - ‖u‖_p^p`.
pub fn nehari<T: Amplitude>(grid: &RadialGrid, green: &GreenTable, u: &DecomposedState<T>, params: &PhysParams) -> Result<f64> {
    let omega = frequency(params)?;
    Ok(terms(grid, green, u, params)?.nehari(omega))
}

/// The scaling `β` with `I(β u) = 0`, and `β u`.
pub fn nehari_project<T: Amplitude>(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<T>,
    params: &PhysParams,
) -> Result<(f64, DecomposedState<T>)> {
    let omega = frequency(params)?;
    let t = terms(grid, green, u, params)?;
    let beta = nehari_scale(&t, omega)?;
    Ok((beta, u.scaled(beta)))
}

pub fn nehari_scale(t: &Terms, omega: f64) -> Result<f64> {
    let quad = t.form.q_form + omega * t.mass;
    if !(t.lp > 0.0) {
        return Err(FunctionalError::ZeroState);
    }
    if !(quad > 0.0) {
        return Err(FunctionalError::NonPositiveQuadratic(quad));
    }
    Ok((quad / t.lp).powf(1.0 / (t.p - 2.0)))
}

/// Gradient with respect to the node values of `φ` and the charge `q`. The
/// outermost node is held at zero, so its component is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGradient {
    pub dphi: Vec<f64>,
    pub dq: f64,
}

impl StateGradient {
    fn zeros(n: usize) -> Self {
        Self { dphi: vec![0.0; n], dq: 0.0 }
    }

    pub fn dot(&self, other: &StateGradient) -> f64 {
        self.dphi.iter().zip(&other.dphi).map(|(a, b)| a * b).sum::<f64>() + self.dq * other.dq
    }

    pub fn combine(parts: &[(f64, &StateGradient)]) -> Self {
        let n = parts[0].1.dphi.len();
        let mut out = Self::zeros(n);
        for (c, g) in parts {
            for (o, v) in out.dphi.iter_mut().zip(&g.dphi) {
                *o += c * v;
            }
            out.dq += c * g.dq;
        }
        out
    }
}

/// Gradients of `Q`, `‖u‖_p^p` and `‖u‖₂²` for a real state.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGradients {
    pub terms: Terms,
    pub form: StateGradient,
    pub lp: StateGradient,
    pub mass: StateGradient,
}

pub fn term_gradients(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<f64>,
    params: &PhysParams,
) -> Result<TermGradients> {
    let t = terms(grid, green, u, params)?;
    let n = grid.len();
    let full = u.assemble(green);
    let w = grid.weights();
    let l = grid.line_weights();
    let g = green.values();
    let lambda = u.lambda;
    let p = params.p;
    let a_phi = grid.stiffness_mul(&u.phi);

    let mut form = StateGradient::zeros(n);
    let mut lp = StateGradient::zeros(n);
    let mut mass = StateGradient::zeros(n);
    for i in 0..n - 1 {
        form.dphi[i] = 2.0 * a_phi[i] + 4.0 * PI * params.nu * l[i] * u.phi[i] + 2.0 * lambda * w[i] * (u.phi[i] - full[i]);
        lp.dphi[i] = p * w[i] * full[i].abs().powf(p - 2.0) * full[i];
        mass.dphi[i] = 2.0 * w[i] * full[i];
    }
    let (mut wug, mut wlg) = (0.0, 0.0);
    for i in 0..n {
        wug += w[i] * full[i] * g[i];
        wlg += w[i] * full[i].abs().powf(p - 2.0) * full[i] * g[i];
    }
    form.dq = -2.0 * lambda * wug + 2.0 * (params.alpha + green.theta()) * u.q;
    lp.dq = p * wlg;
    mass.dq = 2.0 * wug;
    Ok(TermGradients { terms: t, form, lp, mass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    Energy,
    Action { omega: f64 },
}

/// First variation of `F` (or `S` at frequency `ω`).
pub fn gradient(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<f64>,
    params: &PhysParams,
    mode: GradientMode,
) -> Result<StateGradient> {
    let tg = term_gradients(grid, green, u, params)?;
    let mut parts = vec![(0.5, &tg.form), (-1.0 / params.p, &tg.lp)];
    if let GradientMode::Action { omega } = mode {
        parts.push((0.5 * omega, &tg.mass));
    }
    Ok(StateGradient::combine(&parts))
}

/// Strong-form residuals of the Euler–Lagrange system at frequency `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖-Δφ + ν φ/r + ω φ + (ω - λ) q 𝒢 - |u|^{p-2} u‖₂ / ‖u‖₂` over interior nodes.
    pub res_pde: f64,
    /// `|φ(0) - q (α + θ)| / max(1, |q|)`.
    pub res_bc: f64,
    /// Extrapolated `φ(0)`.
    pub phi0: f64,
}

pub fn el_residual(
    grid: &RadialGrid,
    green: &GreenTable,
    u: &DecomposedState<f64>,
    params: &PhysParams,
    omega: f64,
) -> Result<Residuals> {
    let g = gradient(grid, green, u, params, GradientMode::Action { omega })?;
    let w = grid.weights();
    let n = grid.len();
    let mut sum = 0.0;
    for i in 1..n - 1 {
        let r = g.dphi[i] / w[i];
        sum += w[i] * r * r;
    }
    let norm = grid.lp_norm(&u.assemble(green), 2.0);
    let phi0 = extrapolate_origin(grid.nodes(), &u.phi, 10);
    let target = u.q * (params.alpha + green.theta());
    Ok(Residuals {
        res_pde: sum.sqrt() / norm,
        res_bc: (phi0 - target).abs() / u.q.abs().max(1.0),
        phi0,
    })
}

/// Intercept of the least-squares line through the first `count` points.
pub fn extrapolate_origin(r: &[f64], v: &[f64], count: usize) -> f64 {
    let n = count.min(r.len()) as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n as usize {
        sx += r[i];
        sy += v[i];
        sxx += r[i] * r[i];
        sxy += r[i] * v[i];
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (sy - slope * sx) / n
}

/// Coefficients of the logarithmic branch of `u` near the origin:
/// `u ≈ -s ln r + c`, fitted on the first `count` nodes. For a state with
/// charge `q` the slope `s` approaches `q / 2π`.
pub fn log_slope(r: &[f64], u: &[f64], count: usize) -> f64 {
    // √r-weighted data turn the fit into the boundary-coefficient fit.
    let scaled: Vec<f64> = r.iter().zip(u).take(count).map(|(x, v)| x.sqrt() * v).collect();
    boundary_coefficients(r, &scaled, count, 0.0).0
}
