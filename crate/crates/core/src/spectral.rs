//! The spectral function `θ_{λ,ν}`, the point-interaction eigenvalues it
//! determines, and the two-point resolvent of the radial Coulomb operator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::grid::{RadialGrid, DEGREE};
use crate::specfun::{self, GreenParams, SpecFunConfig, SpecFunError, EULER_GAMMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("{0}")]
    Domain(String),
    #[error("could not bracket a root of α + θ on ({lo}, {hi})")]
    Bracket { lo: f64, hi: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("invalid parameters: {0}")]
    Params(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Mass { mu: f64 },
    Frequency { omega: f64 },
}

/// Problem constants: Coulomb charge `ν`, point-interaction strength `α`,
/// nonlinearity exponent `p` and either the mass `μ` or the frequency `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub nu: f64,
    pub alpha: f64,
    pub p: f64,
    pub mode: Mode,
}

impl PhysParams {
    pub fn mass(nu: f64, alpha: f64, p: f64, mu: f64) -> Self {
        Self { nu, alpha, p, mode: Mode::Mass { mu } }
    }

    pub fn frequency(nu: f64, alpha: f64, p: f64, omega: f64) -> Self {
        Self { nu, alpha, p, mode: Mode::Frequency { omega } }
    }

    /// Checks shared by every mode: finite data and `p > 2`.
    pub fn validate(&self) -> Result<()> {
        if !self.nu.is_finite() || !self.alpha.is_finite() || !self.p.is_finite() {
            return Err(SpectralError::Params("ν, α and p must be finite".into()));
        }
        if !(self.p > 2.0) {
            return Err(SpectralError::Params(format!(
                "the nonlinearity needs p > 2, got p = {}",
                self.p
            )));
        }
        match self.mode {
            Mode::Mass { mu } if !(mu > 0.0 && mu.is_finite()) => Err(SpectralError::Params(format!(
                "the mass must be positive, got μ = {mu}"
            ))),
            Mode::Frequency { omega } if !omega.is_finite() => {
                Err(SpectralError::Params("the frequency must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn mu(&self) -> Option<f64> {
        match self.mode {
            Mode::Mass { mu } => Some(mu),
            Mode::Frequency { .. } => None,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match self.mode {
            Mode::Frequency { omega } => Some(omega),
            Mode::Mass { .. } => None,
        }
    }
}

/// `θ_{λ,ν} = (1/2π)(ψ(½ + ν/(2√λ)) + 2γ + ln 2√λ)`.
///
/// Below the Coulomb threshold the digamma function is continued through
/// its poles; exactly at a pole the value is `-∞`, the limit from larger λ.
pub fn theta(lambda: f64, nu: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(SpectralError::Domain(format!("θ needs λ > 0, got {lambda}")));
    }
    let a = 0.5 + nu / (2.0 * lambda.sqrt());
    match specfun::digamma(a, cfg) {
        Ok(psi) => Ok((psi + 2.0 * EULER_GAMMA + (2.0 * lambda.sqrt()).ln()) / (2.0 * PI)),
        Err(SpecFunError::Pole { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e.into()),
    }
}

/// Elementary bounds `lower ≤ θ_{λ,ν} ≤ upper` for `ν < 0`, `λ > ν²`.
pub fn theta_bounds(lambda: f64, nu: f64) -> Result<(f64, f64)> {
    if !(nu < 0.0) {
        return Err(SpectralError::Domain(format!("θ bounds need ν < 0, got {nu}")));
    }
    if !(lambda > nu * nu) {
        return Err(SpectralError::Domain(format!(
            "θ bounds need λ > ν² = {}, got {lambda}",
            nu * nu
        )));
    }
    let s = lambda.sqrt();
    let d = s + nu;
    let base = d.ln() + 2.0 * EULER_GAMMA;
    Ok(((base - 2.0 * s / d) / (2.0 * PI), (base - s / d) / (2.0 * PI)))
}

/// Root diagnostics for one eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootInfo {
    pub lambda: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Brent's method on `[a, b]` with `f(a) f(b) < 0`.
fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64, ftol: f64) -> (f64, f64, usize) {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for it in 1..=300 {
        if fb == 0.0 || (b - a).abs() <= xtol && fb.abs() < ftol {
            return (b, fb, it);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let between = if lo < b { s > lo && s < b } else { s > b && s < lo };
        let bisect = !between
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < xtol)
            || (!mflag && (c - d).abs() < xtol)
            || !s.is_finite();
        if bisect {
            s = 0.5 * (a + b);
        }
        mflag = bisect;
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    (b, fb, 300)
}

const ROOT_FTOL: f64 = 1e-12;

fn root_in(alpha: f64, nu: f64, lo: f64, hi: f64, cfg: &SpecFunConfig) -> Result<RootInfo> {
    let f = |l: f64| alpha + theta(l, nu, cfg).unwrap_or(f64::NAN);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(SpectralError::Bracket { lo, hi });
    }
    let xtol = 1e-15 * hi.max(1.0);
    let (root, res, iterations) = brent(f, lo, hi, xtol, ROOT_FTOL);
    Ok(RootInfo { lambda: root, residual: res.abs(), bracket: (lo, hi), iterations })
}

/// `ω_ν`: the unique `λ > ν²` (or `λ > 0` when `ν = 0`) with `α + θ_{λ,ν} = 0`.
pub fn solve_omega_nu(params: &PhysParams, cfg: &SpecFunConfig) -> Result<RootInfo> {
    let (nu, alpha) = (params.nu, params.alpha);
    if !(nu <= 0.0) || !alpha.is_finite() {
        return Err(SpectralError::Domain(format!(
            "ω_ν is defined for an attractive charge ν < 0, got ν = {nu}"
        )));
    }
    let base = nu * nu;
    let f = |l: f64| alpha + theta(l, nu, cfg).unwrap_or(f64::NAN);
    let scale = base.max(1.0);
    let mut off = 0.1 * scale;
    while f(base + off) >= 0.0 {
        off *= 1e-3;
        if base + off <= base || off < 1e-300 {
            return Err(SpectralError::Bracket { lo: base, hi: base + 0.1 * scale });
        }
    }
    let lo = base + off;
    let mut hi = 2.0 * scale;
    while f(hi) <= 0.0 {
        hi *= 4.0;
        if !hi.is_finite() {
            return Err(SpectralError::Bracket { lo, hi });
        }
    }
    let lo = if lo < hi { lo } else { base + off.min(0.5 * (hi - base)) };
    root_in(alpha, nu, lo, hi, cfg)
}

/// `E_n = -ν²/(2n+1)²`, `n = 0..=n_max`.
pub fn friedrichs_eigenvalues(nu: f64, n_max: usize) -> Vec<f64> {
    (0..=n_max)
        .map(|n| {
            let d = 2.0 * n as f64 + 1.0;
            -nu * nu / (d * d)
        })
        .collect()
}

/// Locate the poles of `λ ↦ θ_{λ,ν}` in `[lo, hi]` without using their
/// closed form: scan a fine logarithmic grid for decreases of θ (it only
/// decreases across a pole) and bisect each one.
pub fn theta_poles(nu: f64, lo: f64, hi: f64, cfg: &SpecFunConfig) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(SpectralError::Domain(format!("need 0 < lo < hi, got {lo}, {hi}")));
    }
    let samples = ((hi / lo).ln() / 1e-3).ceil() as usize + 1;
    let lam = |i: usize| lo * ((hi / lo).ln() * i as f64 / (samples - 1) as f64).exp();
    let th = |l: f64| theta(l, nu, cfg).unwrap_or(f64::NAN);
    let vals: Vec<f64> = (0..samples).into_par_iter().map(|i| th(lam(i))).collect();
    let mut poles = Vec::new();
    for i in 0..samples - 1 {
        if !(vals[i] > vals[i + 1]) {
            continue;
        }
        // θ(L) > θ(R) keeps the left-branch and right-branch value ranges
        // disjoint, so the branch of the midpoint is known from its value.
        let (mut l, mut r) = (lam(i), lam(i + 1));
        let (tl, _) = (vals[i], vals[i + 1]);
        let mut tl = tl;
        for _ in 0..200 {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            let tm = th(m);
            if tm >= tl {
                l = m;
                tl = tm;
            } else {
                r = m;
            }
        }
        poles.push(0.5 * (l + r));
    }
    Ok(poles)
}

/// Spectrum of the point-interaction Coulomb Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub omega_nu: f64,
    /// Negative eigenvalues `E_0 = -ω_ν < E_1 < …`.
    pub ladder: Vec<f64>,
    pub friedrichs: Vec<f64>,
    pub residuals: Vec<f64>,
    pub roots: Vec<RootInfo>,
}

/// The `count` lowest eigenvalues: `-ω_ν` followed by one root of
/// `α + θ_{-E,ν} = 0` between each pair of consecutive Friedrichs levels.
pub fn eigenvalue_ladder(params: &PhysParams, count: usize, cfg: &SpecFunConfig) -> Result<SpectralReport> {
    let nu = params.nu;
    if !(nu < 0.0) {
        return Err(SpectralError::Domain(format!("the ladder needs ν < 0, got ν = {nu}")));
    }
    if count == 0 {
        return Err(SpectralError::Domain("count must be at least 1".into()));
    }
    let first = solve_omega_nu(params, cfg)?;
    let fr = friedrichs_eigenvalues(nu, count);
    let rest: Vec<Result<RootInfo>> = (1..count)
        .into_par_iter()
        .map(|n| {
            let right = -fr[n - 1];
            let left = -fr[n];
            let mut off = 1e-9;
            loop {
                let lo = left * (1.0 + off);
                let hi = right * (1.0 - off);
                match root_in(params.alpha, nu, lo, hi, cfg) {
                    Err(SpectralError::Bracket { .. }) if off > 1e-15 => off *= 1e-2,
                    other => return other,
                }
            }
        })
        .collect();
    let mut roots = vec![first];
    for r in rest {
        roots.push(r?);
    }
    Ok(SpectralReport {
        omega_nu: first.lambda,
        ladder: roots.iter().map(|r| -r.lambda).collect(),
        friedrichs: fr[..count].to_vec(),
        residuals: roots.iter().map(|r| r.residual).collect(),
        roots,
    })
}

/// Least-squares fit `g(r) ≈ -g₀ √r ln r (1 + ν r) + g₁ √r` on the first
/// `count` nodes. The `ν r` factor is the correction the Coulomb term forces
/// on the logarithmic branch; without it the fitted `g₁` inherits an error of
/// order `ν r ln² r`.
pub fn boundary_coefficients(r: &[f64], g: &[f64], count: usize, nu: f64) -> (f64, f64) {
    let n = count.min(r.len()).min(g.len());
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let x1 = -r[i].sqrt() * r[i].ln() * (1.0 + nu * r[i]);
        let x2 = r[i].sqrt();
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * g[i];
        b2 += x2 * g[i];
    }
    let det = s11 * s22 - s12 * s12;
    ((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// `q[k][j] = ∫_{-1}^{ξ_k} ℓ_j`, the cumulative integration matrix of the
/// Lobatto interpolant on one reference element.
fn cumulative_matrix(xi: &[f64]) -> Vec<Vec<f64>> {
    let m = xi.len();
    let (gx, gw) = gauss_legendre(m);
    let lagrange = |j: usize, t: f64| {
        let mut l = 1.0;
        for k in 0..m {
            if k != j {
                l *= (t - xi[k]) / (xi[j] - xi[k]);
            }
        }
        l
    };
    (0..m)
        .map(|k| {
            let half = 0.5 * (xi[k] + 1.0);
            (0..m)
                .map(|j| {
                    gx.iter()
                        .zip(&gw)
                        .map(|(&x, &w)| w * half * lagrange(j, -1.0 + half * (x + 1.0)))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `(R g)(r) = (1/W)[Φ(r) ∫₀^r F g + F(r) ∫_r^∞ Φ g]` on the grid, for a
/// half-line function `g` given at the nodes (integrals in `dr`).
///
/// `Φ` and `F` are carried in exponentially rescaled form and the running
/// integrals are damped by `e^{-√λ |r - ρ|}`, so nothing overflows at large
/// radius.
pub fn resolvent_apply(gp: &GreenParams, g: &[f64], grid: &RadialGrid, cfg: &SpecFunConfig) -> Result<Vec<f64>> {
    let n = grid.len();
    if g.len() != n {
        return Err(SpectralError::Domain(format!("expected {n} values, got {}", g.len())));
    }
    let r = grid.nodes();
    let sl = gp.sqrt_lambda();
    let phi_s: Vec<f64> = r
        .par_iter()
        .map(|&x| specfun::phi_kernel_scaled(gp, x, cfg))
        .collect::<std::result::Result<_, _>>()?;
    let f_s: Vec<f64> = r
        .par_iter()
        .map(|&x| specfun::f_kernel_scaled(gp, x, cfg))
        .collect::<std::result::Result<_, _>>()?;
    let w = specfun::wronskian(gp, cfg)?;

    // Reference element nodes from the grid itself.
    let bounds = grid.element_boundaries();
    let n_elem = bounds.len() - 1;
    let xi: Vec<f64> = (0..=DEGREE)
        .map(|k| 2.0 * (r[k] - bounds[0]) / (bounds[1] - bounds[0]) - 1.0)
        .collect();
    let q = cumulative_matrix(&xi);

    // Inner disk (0, r_0): F g ~ r there.
    let mut left = vec![0.0; n];
    left[0] = 0.5 * r[0] * f_s[0] * g[0];
    for e in 0..n_elem {
        let a = bounds[e];
        let jac = 0.5 * (bounds[e + 1] - a);
        let base = e * DEGREE;
        let start = left[base];
        let vals: Vec<f64> = (0..=DEGREE)
            .map(|j| f_s[base + j] * (sl * (r[base + j] - a)).exp() * g[base + j])
            .collect();
        for k in 1..=DEGREE {
            let inc: f64 = (0..=DEGREE).map(|j| q[k][j] * vals[j]).sum::<f64>() * jac;
            left[base + k] = (-sl * (r[base + k] - a)).exp() * (start + inc);
        }
    }
    let mut right = vec![0.0; n];
    for e in (0..n_elem).rev() {
        let b = bounds[e + 1];
        let jac = 0.5 * (b - bounds[e]);
        let base = e * DEGREE;
        let end = right[base + DEGREE];
        let vals: Vec<f64> = (0..=DEGREE)
            .map(|j| phi_s[base + j] * (sl * (b - r[base + j])).exp() * g[base + j])
            .collect();
        let total: f64 = (0..=DEGREE).map(|j| q[DEGREE][j] * vals[j]).sum();
        for k in 0..DEGREE {
            let upto: f64 = (0..=DEGREE).map(|j| q[k][j] * vals[j]).sum();
            right[base + k] = (-sl * (b - r[base + k])).exp() * (end + (total - upto) * jac);
        }
    }
    Ok((0..n).map(|i| (phi_s[i] * left[i] + f_s[i] * right[i]) / w).collect())
}
