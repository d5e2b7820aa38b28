//! Special functions behind the Coulomb Green's function.
//!
//! Everything here is specialised to the confluent hypergeometric functions
//! with second parameter `b = 1`, which is the only case the radial problem
//! needs. The Tricomi function is evaluated through its Laplace-type integral
//!
//! ```text
//! Γ(a) U(a, 1, z) = ∫₀^∞ e^{-z t} t^{a-1} (1+t)^{-a} dt
//! ```
//!
//! with the substitution `t = s^{1/a}` removing the endpoint singularity,
//! and through its asymptotic series once `z` is large.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::grid::RadialGrid;
use crate::quad;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("pole of the {function} function at x = {x}")]
    Pole { function: &'static str, x: f64 },
    #[error("{0}")]
    Domain(String),
    #[error("argument z = {z} exceeds the exponent budget {budget}")]
    Overflow { z: f64, budget: f64 },
    #[error("quadrature for {what} did not converge (estimated error {error:e})")]
    Quadrature { what: &'static str, error: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecFunConfig {
    pub rel_tol: f64,
    pub quad_max_subdiv: usize,
    pub asympt_switch_radius: f64,
    /// Largest `z` for which `e^z`-sized intermediates are formed.
    pub exponent_budget: f64,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            quad_max_subdiv: 400,
            asympt_switch_radius: 30.0,
            exponent_budget: 650.0,
        }
    }
}

impl SpecFunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(SpecFunError::Config(format!(
                "rel_tol must lie in (0, 1e-6], got {}",
                self.rel_tol
            )));
        }
        if self.quad_max_subdiv < 16 {
            return Err(SpecFunError::Config(format!(
                "quad_max_subdiv must be at least 16, got {}",
                self.quad_max_subdiv
            )));
        }
        if !(self.asympt_switch_radius > 0.0) || !(self.exponent_budget > 0.0) {
            return Err(SpecFunError::Config(
                "switch radius and exponent budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_lanczos(x: f64) -> f64 {
    // valid for x >= 0.5
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Gamma function for real arguments, with reflection below 1/2.
pub fn gamma(x: f64, _cfg: &SpecFunConfig) -> Result<f64> {
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if is_nonpositive_integer(x) {
        return Err(SpecFunError::Pole { function: "gamma", x });
    }
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma_lanczos(1.0 - x)));
    }
    if x > 171.6 {
        return Ok(f64::INFINITY);
    }
    // Exact recursion keeps integers and half-integers clean for small x.
    if x < 1.5 {
        return Ok(gamma_lanczos(x));
    }
    let mut y = x;
    let mut scale = 1.0;
    while y >= 2.5 && y < 20.0 {
        y -= 1.0;
        scale *= y;
    }
    Ok(scale * gamma_lanczos(y))
}

// B_{2k} / (2k) for k = 1..8
const DIGAMMA_ASYMP: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// Digamma function ψ = Γ'/Γ via upward recurrence and the Stirling series.
pub fn digamma(x: f64, _cfg: &SpecFunConfig) -> Result<f64> {
    if x.is_nan() {
        return Ok(f64::NAN);
    }
    if is_nonpositive_integer(x) {
        return Err(SpecFunError::Pole { function: "digamma", x });
    }
    if x < 0.0 {
        // ψ(x) = ψ(1-x) - π cot(πx)
        let reflected = digamma_positive(1.0 - x);
        return Ok(reflected - PI / (PI * x).tan());
    }
    Ok(digamma_positive(x))
}

fn digamma_positive(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_ASYMP {
        series += c * pow;
        pow *= inv2;
    }
    shift + x.ln() - 0.5 / x - series
}

/// Kummer's function `M(a, 1, z)` by its ascending series.
pub fn kummer_m(a: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(a > 0.0) {
        return Err(SpecFunError::Domain(format!("kummer_m requires a > 0, got {a}")));
    }
    if !(z >= 0.0) {
        return Err(SpecFunError::Domain(format!("kummer_m requires z >= 0, got {z}")));
    }
    if z > cfg.exponent_budget {
        return Err(SpecFunError::Overflow { z, budget: cfg.exponent_budget });
    }
    Ok(kummer_series(a, z, cfg.rel_tol))
}

fn kummer_series(a: f64, z: f64, tol: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= (a + k) * z / ((k + 1.0) * (k + 1.0));
        sum += term;
        k += 1.0;
        if k > z && term.abs() <= 0.01 * tol * sum.abs() {
            break;
        }
        if k > 100_000.0 {
            break;
        }
    }
    sum
}

/// `e^{-z} M(a, 1, z)`, finite for every `z >= 0`.
pub fn kummer_m_scaled(a: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(a > 0.0) || !(z >= 0.0) {
        return Err(SpecFunError::Domain(format!(
            "kummer_m_scaled requires a > 0 and z >= 0, got a = {a}, z = {z}"
        )));
    }
    if z <= cfg.exponent_budget {
        return Ok((-z).exp() * kummer_series(a, z, cfg.rel_tol));
    }
    // e^{-z} M(a,1,z) ~ z^{a-1}/Γ(a) Σ ((1-a)_k)² / (k! z^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        let next = term * (1.0 - a + k) * (1.0 - a + k) / ((k + 1.0) * z);
        if next.abs() > term.abs() {
            return Err(SpecFunError::Overflow { z, budget: cfg.exponent_budget });
        }
        term = next;
        sum += term;
        k += 1.0;
        if term.abs() <= cfg.rel_tol * sum.abs() {
            break;
        }
    }
    Ok(z.powf(a - 1.0) / gamma(a, cfg)? * sum)
}

/// `Γ(a) U(a, 1, z)` for `a > 0`, `z > 0`.
pub fn gamma_times_tricomi(a: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(a > 0.0) {
        return Err(SpecFunError::Domain(format!("tricomi_u requires a > 0, got {a}")));
    }
    if !(z > 0.0) {
        return Err(SpecFunError::Domain(format!("tricomi_u requires z > 0, got {z}")));
    }
    if z >= cfg.asympt_switch_radius {
        if let Some(u) = tricomi_asymptotic(a, z, cfg.rel_tol) {
            return Ok(gamma(a, cfg)? * u);
        }
    }
    tricomi_integral(a, z, cfg)
}

/// Tricomi's function `U(a, 1, z)` for `a > 0`, `z > 0`.
pub fn tricomi_u(a: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(a > 0.0) || !(z > 0.0) {
        return Err(SpecFunError::Domain(format!(
            "tricomi_u requires a > 0 and z > 0, got a = {a}, z = {z}"
        )));
    }
    if z >= cfg.asympt_switch_radius {
        if let Some(u) = tricomi_asymptotic(a, z, cfg.rel_tol) {
            return Ok(u);
        }
    }
    Ok(tricomi_integral(a, z, cfg)? / gamma(a, cfg)?)
}

/// `U(a,1,z) ~ z^{-a} Σ ((a)_k)² / k! (-1/z)^k`; `None` if the series
/// starts diverging before reaching the tolerance.
fn tricomi_asymptotic(a: f64, z: f64, tol: f64) -> Option<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        let next = -term * (a + k) * (a + k) / ((k + 1.0) * z);
        if next.abs() >= term.abs() && k > 0.0 {
            return None;
        }
        term = next;
        sum += term;
        k += 1.0;
        if term.abs() <= tol * sum.abs() {
            return Some(z.powf(-a) * sum);
        }
        if k > 200.0 {
            return None;
        }
    }
}

fn tricomi_integral(a: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    // With t = s^{1/a} and s = e^y:
    //   Γ(a)U(a,1,z) = (1/a) ∫ exp(-z e^{y/a}) (1 + e^{-y/a})^{-a} dy   (y > 0)
    //                + (1/a) ∫ exp(-z e^{y/a}) (1 + e^{y/a})^{-a} e^{y} dy (y < 0)
    let inv_a = 1.0 / a;
    let integrand = |y: f64| -> f64 {
        let t = (y * inv_a).exp();
        let zt = z * t;
        if zt > 745.0 {
            return 0.0;
        }
        if y > 0.0 {
            (-zt).exp() * (1.0 + 1.0 / t).powf(-a)
        } else {
            (-zt).exp() * (1.0 + t).powf(-a) * y.exp()
        }
    };
    let y_min = -40.0;
    let y_max = (a * (745.0 / z).ln()).max(1.0);
    let mut breaks = vec![y_min, -10.0, -2.0, 0.0];
    // The y > 0 part is ≈ 1 until the double-exponential cut near a ln(1/z).
    let knee = a * (1.0 / z).ln();
    if knee > 1.0 && knee < y_max {
        breaks.push(0.5 * knee);
        breaks.push(knee);
    }
    breaks.push(y_max);
    breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
    breaks.dedup();
    let res = quad::integrate_breakpoints(
        integrand,
        &breaks,
        cfg.rel_tol,
        0.0,
        cfg.quad_max_subdiv,
    );
    if !res.converged && res.error > 1e3 * cfg.rel_tol * res.value.abs() {
        return Err(SpecFunError::Quadrature { what: "tricomi_u", error: res.error });
    }
    Ok(res.value * inv_a)
}

/// `Γ(a) U(a, 1, z)` for any `a` that is not a nonpositive integer.
///
/// For `a <= 0` the value is carried down from `a + m > 0` by the
/// three-term recurrence `U(a-1) = (2a - 1 + z) U(a) - a² U(a+1)`, which is
/// the stable direction for the minimal solution `U`.
pub fn gamma_times_tricomi_any(a: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if a > 0.0 {
        return gamma_times_tricomi(a, z, cfg);
    }
    if is_nonpositive_integer(a) {
        return Err(SpecFunError::Pole { function: "gamma", x: a });
    }
    let m = (-a).floor() as i64 + 1;
    let top = a + m as f64;
    let mut u_hi = tricomi_u(top + 1.0, z, cfg)?;
    let mut u = tricomi_u(top, z, cfg)?;
    let mut cur = top;
    for _ in 0..m {
        let next = (2.0 * cur - 1.0 + z) * u - cur * cur * u_hi;
        u_hi = u;
        u = next;
        cur -= 1.0;
    }
    Ok(gamma(a, cfg)? * u)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("inadmissible Green parameters: {0}")]
pub struct GreenParamError(pub String);

/// Spectral shift `λ` and Coulomb charge `ν`, with `a = 1/2 + ν/(2√λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    lambda: f64,
    nu: f64,
}

impl GreenParams {
    /// Requires `λ > 0` and `a > 0` (for `ν < 0` this is `λ > ν²`).
    pub fn new(lambda: f64, nu: f64) -> std::result::Result<Self, GreenParamError> {
        let gp = Self { lambda, nu };
        if !(lambda > 0.0) || !lambda.is_finite() || !nu.is_finite() {
            return Err(GreenParamError(format!("need 0 < λ < ∞, got λ = {lambda}")));
        }
        if !(gp.a() > 0.0) {
            return Err(GreenParamError(format!(
                "need 1/2 + ν/(2√λ) > 0 (λ > ν² for ν < 0), got λ = {lambda}, ν = {nu}"
            )));
        }
        Ok(gp)
    }

    /// Parameters of a bound-state kernel `Φ_{ν,λ}` below the Coulomb
    /// threshold: only the digamma/Gamma poles are excluded.
    pub fn bound_state(lambda: f64, nu: f64) -> std::result::Result<Self, GreenParamError> {
        let gp = Self { lambda, nu };
        if !(lambda > 0.0) {
            return Err(GreenParamError(format!("need λ > 0, got {lambda}")));
        }
        if is_nonpositive_integer(gp.a()) {
            return Err(GreenParamError(format!(
                "λ = {lambda} sits on a Friedrichs pole for ν = {nu}"
            )));
        }
        Ok(gp)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn sqrt_lambda(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn a(&self) -> f64 {
        0.5 + self.nu / (2.0 * self.lambda.sqrt())
    }
}

/// `𝒢_{λ,ν}(r) = Γ(a)/(2π) e^{-√λ r} U(a, 1, 2√λ r)`.
pub fn green_value(gp: &GreenParams, r: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(SpecFunError::Domain(format!("green_value requires r > 0, got {r}")));
    }
    let sl = gp.sqrt_lambda();
    let gu = gamma_times_tricomi(gp.a(), 2.0 * sl * r, cfg)?;
    Ok(gu * (-sl * r).exp() / (2.0 * PI))
}

/// The constant in `𝒢(r) = -(1/2π)(ln r + c) + o(1)`, i.e.
/// `c = ψ(a) + 2γ + ln(2√λ)`.
pub fn green_log_constant(gp: &GreenParams, cfg: &SpecFunConfig) -> Result<f64> {
    Ok(digamma(gp.a(), cfg)? + 2.0 * EULER_GAMMA + (2.0 * gp.sqrt_lambda()).ln())
}

/// Square-integrable Whittaker solution
/// `Φ(r) = Γ(a)/√(2π) √r e^{-√λ r} U(a, 1, 2√λ r) = √(2πr) 𝒢(r)`.
/// Accepts bound-state parameters with `a < 0`.
pub fn phi_kernel(gp: &GreenParams, r: f64, cfg: &SpecFunConfig) -> Result<f64> {
    Ok(phi_kernel_scaled(gp, r, cfg)? * (-gp.sqrt_lambda() * r).exp())
}

/// `Φ(r) e^{√λ r}`.
pub fn phi_kernel_scaled(gp: &GreenParams, r: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(SpecFunError::Domain(format!("phi_kernel requires r > 0, got {r}")));
    }
    let gu = gamma_times_tricomi_any(gp.a(), 2.0 * gp.sqrt_lambda() * r, cfg)?;
    Ok(gu * r.sqrt() / (2.0 * PI).sqrt())
}

/// Growing Whittaker solution
/// `F(r) = √(2π)/Γ(a)² √r e^{-√λ r} M(a, 1, 2√λ r)`.
pub fn f_kernel(gp: &GreenParams, r: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(SpecFunError::Domain(format!("f_kernel requires r > 0, got {r}")));
    }
    let z = 2.0 * gp.sqrt_lambda() * r;
    let m = kummer_m(gp.a(), z, cfg)?;
    let g = gamma(gp.a(), cfg)?;
    Ok((2.0 * PI).sqrt() / (g * g) * r.sqrt() * (-0.5 * z).exp() * m)
}

/// `F(r) e^{-√λ r}`, bounded by a power of `r`.
pub fn f_kernel_scaled(gp: &GreenParams, r: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(SpecFunError::Domain(format!("f_kernel requires r > 0, got {r}")));
    }
    let z = 2.0 * gp.sqrt_lambda() * r;
    let g = gamma(gp.a(), cfg)?;
    Ok((2.0 * PI).sqrt() / (g * g) * r.sqrt() * kummer_m_scaled(gp.a(), z, cfg)?)
}

/// `Φ F' - Φ' F`, constant in `r`. With `F` normalised by `Γ(a)²` it equals
/// `1/Γ(a)²`.
pub fn wronskian(gp: &GreenParams, cfg: &SpecFunConfig) -> Result<f64> {
    let g = gamma(gp.a(), cfg)?;
    Ok(1.0 / (g * g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenNorm {
    /// `‖𝒢‖_s^s = 2π ∫₀^{R} 𝒢^s r dr`.
    pub value: f64,
    pub error_estimate: f64,
    /// Estimated share of the mass beyond the grid radius.
    pub tail_fraction: f64,
    /// Share of the value carried by the outermost grid element.
    pub last_panel_fraction: f64,
    pub tail_warning: bool,
}

/// `‖𝒢_{λ,ν}‖_s^s` by adaptive quadrature over the grid's element panels,
/// including the disk inside the first node and an estimate of the tail
/// beyond the grid radius.
pub fn green_norm(
    gp: &GreenParams,
    s: f64,
    grid: &RadialGrid,
    cfg: &SpecFunConfig,
) -> Result<GreenNorm> {
    if !(s > 1.0) {
        return Err(SpecFunError::Domain(format!("green_norm requires s > 1, got {s}")));
    }
    let r0 = grid.r_min();
    let r_max = grid.r_max();
    let err_cell = std::cell::Cell::new(None);
    let integrand = |r: f64| -> f64 {
        match green_value(gp, r, cfg) {
            Ok(g) => 2.0 * PI * g.abs().powf(s) * r,
            Err(e) => {
                err_cell.set(Some(e));
                0.0
            }
        }
    };
    // Inner disk on a logarithmic scale: r = r0 e^{-y}.
    let disk = quad::integrate(
        |y: f64| {
            let r = r0 * (-y).exp();
            integrand(r) * r
        },
        0.0,
        80.0,
        cfg.rel_tol,
        0.0,
        cfg.quad_max_subdiv,
    );
    let breaks = grid.element_boundaries();
    let body = quad::integrate_breakpoints(
        &integrand,
        &breaks,
        cfg.rel_tol,
        0.0,
        cfg.quad_max_subdiv.max(4 * breaks.len()),
    );
    if let Some(e) = err_cell.take() {
        return Err(e);
    }
    let value = disk.value + body.value;
    let n = breaks.len();
    let last = quad::integrate(
        &integrand,
        breaks[n - 2],
        breaks[n - 1],
        cfg.rel_tol,
        0.0,
        cfg.quad_max_subdiv,
    );
    // ∫_R^∞ e^{-s√λ r} r dr-type tail, scaled from the integrand at R.
    let decay = s * gp.sqrt_lambda();
    let tail = integrand(r_max) / decay;
    let tail_fraction = if value > 0.0 { tail / value } else { 0.0 };
    let last_panel_fraction = if value > 0.0 { last.value / value } else { 0.0 };
    Ok(GreenNorm {
        value,
        error_estimate: disk.error + body.error,
        tail_fraction,
        last_panel_fraction,
        tail_warning: last_panel_fraction > cfg.rel_tol.max(1e-12) || tail_fraction > cfg.rel_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SpecFunConfig {
        SpecFunConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_known_values() {
        let c = cfg();
        assert!(rel(gamma(0.5, &c).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.0, &c).unwrap(), 1.0) < 1e-14);
        // Γ(2.5) = 1.5 · 0.5 · Γ(0.5)
        assert!(rel(gamma(2.5, &c).unwrap(), 0.75 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(6.0, &c).unwrap(), 120.0) < 1e-14);
        // Γ(-0.5) = -2√π
        assert!(rel(gamma(-0.5, &c).unwrap(), -2.0 * PI.sqrt()) < 1e-13);
    }

    #[test]
    fn gamma_poles_are_errors() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma(x, &cfg()), Err(SpecFunError::Pole { .. })));
            assert!(matches!(digamma(x, &cfg()), Err(SpecFunError::Pole { .. })));
        }
    }

    #[test]
    fn digamma_half_and_one() {
        let c = cfg();
        let half = -2.0 * std::f64::consts::LN_2 - EULER_GAMMA;
        assert!((digamma(0.5, &c).unwrap() - half).abs() < 1e-14);
        assert!((digamma(1.0, &c).unwrap() + EULER_GAMMA).abs() < 1e-14);
    }

    #[test]
    fn digamma_recurrence() {
        let c = cfg();
        for &x in &[0.013, 0.4, 1.7, 3.3, 25.0, -0.3, -2.75] {
            let d = digamma(x + 1.0, &c).unwrap() - digamma(x, &c).unwrap();
            assert!((d - 1.0 / x).abs() < 1e-12 * (1.0 / x).abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn digamma_series_oracle() {
        // ψ(x) = -γ + Σ_{k≥0} (1/(k+1) - 1/(k+x)), tail ~ (x-1)/K bounded by
        // the Euler–Maclaurin remainder (x-1)/(K + x) - ...
        let x = 3.7;
        let kmax = 2_000_000usize;
        let mut s = 0.0;
        for k in (0..kmax).rev() {
            let k = k as f64;
            s += 1.0 / (k + 1.0) - 1.0 / (k + x);
        }
        // tail Σ_{k≥K} (x-1)/((k+1)(k+x)) ≈ (x-1)/(K + (x+1)/2)
        let tail = (x - 1.0) / (kmax as f64 + 0.5 * (x + 1.0));
        let oracle = -EULER_GAMMA + s + tail;
        assert!((digamma(x, &cfg()).unwrap() - oracle).abs() < 1e-11);
    }

    #[test]
    fn kummer_identities() {
        let c = cfg();
        assert_eq!(kummer_m(0.3, 0.0, &c).unwrap(), 1.0);
        for z in [0.1, 2.0, 17.0, 80.0] {
            assert!(rel(kummer_m(1.0, z, &c).unwrap(), z.exp()) < 1e-13);
            assert!(rel(kummer_m_scaled(1.0, z, &c).unwrap(), 1.0) < 1e-13);
        }
        assert!(matches!(kummer_m(0.5, 1e4, &c), Err(SpecFunError::Overflow { .. })));
    }

    #[test]
    fn kummer_exact_rational_oracle() {
        // 200-term series in exact rational arithmetic for a = 3/4, z = 2.
        use num_rational_free::Frac;
        let mut term = Frac::new(1, 1);
        let mut sum = Frac::new(1, 1);
        for k in 0..200i64 {
            term = term.mul(Frac::new(3 + 4 * k, 4)).mul(Frac::new(2, (k + 1) * (k + 1)));
            sum = sum.add(term);
            term = term.reduce_to_f64_safe();
            sum = sum.reduce_to_f64_safe();
        }
        let oracle = sum.to_f64();
        assert!(rel(kummer_m(0.75, 2.0, &cfg()).unwrap(), oracle) < 1e-14);
    }

    /// Tiny big-free fraction helper: keeps numerator/denominator as f64 pairs
    /// with exact small-integer arithmetic until they are collapsed.
    mod num_rational_free {
        #[derive(Clone, Copy)]
        pub struct Frac(f64, f64);
        impl Frac {
            pub fn new(n: i64, d: i64) -> Self {
                Frac(n as f64, d as f64)
            }
            pub fn mul(self, o: Frac) -> Frac {
                Frac(self.0 * o.0, self.1 * o.1)
            }
            pub fn add(self, o: Frac) -> Frac {
                Frac(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
            }
            pub fn reduce_to_f64_safe(self) -> Frac {
                Frac(self.0 / self.1, 1.0)
            }
            pub fn to_f64(self) -> f64 {
                self.0 / self.1
            }
        }
    }

    #[test]
    fn tricomi_integral_matches_asymptotic_region() {
        let c = cfg();
        let mut compared = 0;
        for &a in &[0.1, 0.37, 0.5, 0.9, 1.6] {
            for &z in &[31.0, 45.0, 90.0] {
                let Some(asym) = tricomi_asymptotic(a, z, 1e-14) else {
                    continue;
                };
                compared += 1;
                let integ = tricomi_integral(a, z, &c).unwrap() / gamma(a, &c).unwrap();
                assert!(rel(integ, asym) < 1e-11, "a={a} z={z}: {integ} vs {asym}");
            }
        }
        assert!(compared >= 10);
    }

    #[test]
    fn tricomi_a_equal_one() {
        // U(1, 1, z) = e^z E₁(z); at z = 1, e·E₁(1) = 0.596347362323194...
        let u = tricomi_u(1.0, 1.0, &cfg()).unwrap();
        assert!(rel(u, 0.596_347_362_323_194_1) < 1e-13, "{u}");
    }

    #[test]
    fn tricomi_recurrence_branch_matches_direct() {
        let c = cfg();
        // The three-term recurrence must reproduce directly evaluated U.
        let (a, z) = (0.3, 1.7);
        let u0 = tricomi_u(a, z, &c).unwrap();
        let u1 = tricomi_u(a + 1.0, z, &c).unwrap();
        let u2 = tricomi_u(a + 2.0, z, &c).unwrap();
        // U(a) = (2(a+1) - 1 + z) U(a+1) - (a+1)² U(a+2)
        let rec = (2.0 * (a + 1.0) - 1.0 + z) * u1 - (a + 1.0) * (a + 1.0) * u2;
        assert!(rel(rec, u0) < 1e-12);
    }

    #[test]
    fn tricomi_domain_errors() {
        assert!(tricomi_u(0.0, 1.0, &cfg()).is_err());
        assert!(tricomi_u(0.5, 0.0, &cfg()).is_err());
        assert!(tricomi_u(-0.5, 1.0, &cfg()).is_err());
    }

    #[test]
    fn green_small_r_constant() {
        let c = cfg();
        for &(lambda, nu) in &[(1.0, 0.0), (4.0, -1.0), (2.0, 0.7), (1.2, -1.0)] {
            let gp = GreenParams::new(lambda, nu).unwrap();
            let k = green_log_constant(&gp, &c).unwrap();
            let r = 1e-7;
            let g = green_value(&gp, r, &c).unwrap();
            let lead = -(r.ln() + k) / (2.0 * PI);
            // remainder is O(r ln r)
            assert!((g - lead).abs() < 1e-5, "λ={lambda} ν={nu}: {g} vs {lead}");
        }
    }

    #[test]
    fn green_params_admissibility() {
        assert!(GreenParams::new(1.0, -1.0).is_err());
        assert!(GreenParams::new(1.01, -1.0).is_ok());
        assert!(GreenParams::new(0.0, 0.5).is_err());
        assert!(GreenParams::bound_state(1.0 / 9.0, -1.0).is_err());
        assert!(GreenParams::bound_state(0.2, -1.0).is_ok());
    }

    #[test]
    fn phi_is_sqrt_two_pi_r_times_green() {
        let c = cfg();
        let gp = GreenParams::new(3.0, -1.2).unwrap();
        for r in [1e-4, 0.3, 2.0, 7.5] {
            let phi = phi_kernel(&gp, r, &c).unwrap();
            let g = green_value(&gp, r, &c).unwrap();
            assert!(rel(phi, (2.0 * PI * r).sqrt() * g) < 1e-13);
        }
    }

    #[test]
    fn f_kernel_small_r_coefficient() {
        let c = cfg();
        let gp = GreenParams::new(2.0, -0.8).unwrap();
        let g = gamma(gp.a(), &c).unwrap();
        let r: f64 = 1e-6;
        let f = f_kernel(&gp, r, &c).unwrap();
        let lead = (2.0 * PI).sqrt() / (g * g) * r.sqrt() * (1.0 + gp.nu() * r);
        assert!(rel(f, lead) < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(SpecFunConfig::default().validate().is_ok());
        let bad = SpecFunConfig { rel_tol: 1e-3, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SpecFunConfig { quad_max_subdiv: 4, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
