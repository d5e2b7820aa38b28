//! Radial spectral-element grid.
//!
//! The half-line `[r_min, R_max]` is cut into elements that are geometric
//! near the origin (to resolve `ln r`) and uniform further out. Each element
//! carries the degree-8 Gauss–Lobatto–Legendre nodes, so node values define a
//! continuous piecewise polynomial. The disk `r < r_min` is assigned to the
//! first node.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::io::{self, Write};
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

use crate::banded::BandedSpd;
use crate::specfun::{self, GreenParams, SpecFunConfig, SpecFunError};

pub const DEGREE: usize = 8;

/// Scalar type of profile values.
pub trait Amplitude:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn is_finite(self) -> bool;
    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Amplitude for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Amplitude for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Spec(String),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
    #[error("rearrangement needs nonnegative data, node {index} has {value}")]
    Negative { index: usize, value: f64 },
    #[error("green table is for λ = {table}, state uses λ = {state}")]
    LambdaMismatch { table: f64, state: f64 },
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("{0}")]
    Params(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Requested node count; rounded up to `8 E + 1` for `E` elements.
    pub nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl GridSpec {
    pub const DEFAULT_NODES: usize = 2000;
    pub const DEFAULT_R_MIN: f64 = 1e-6;

    /// Default grid for a problem whose slowest decay rate is `√λ_ref`.
    pub fn for_lambda_ref(lambda_ref: f64) -> Self {
        Self {
            nodes: Self::DEFAULT_NODES,
            r_min: Self::DEFAULT_R_MIN,
            r_max: 40.0 / lambda_ref.max(1.0).sqrt(),
        }
    }
}

/// Gauss–Lobatto–Legendre nodes, weights and differentiation matrix on
/// `[-1, 1]`.
#[derive(Debug, Clone)]
struct Lobatto {
    x: Vec<f64>,
    w: Vec<f64>,
    // d[k * (n + 1) + j] = ℓ_j'(x_k)
    d: Vec<f64>,
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    // (P_n(x), P_{n-1}(x))
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

impl Lobatto {
    fn new(n: usize) -> Self {
        let m = n + 1;
        let mut x = vec![0.0; m];
        for (j, xj) in x.iter_mut().enumerate() {
            let mut t = -(PI * j as f64 / n as f64).cos();
            if j > 0 && j < n {
                for _ in 0..100 {
                    let (p, pm) = legendre_pair(n, t);
                    let dt = (t * p - pm) / ((n + 1) as f64 * p);
                    t -= dt;
                    if dt.abs() < 1e-16 {
                        break;
                    }
                }
            }
            *xj = t;
        }
        // symmetrize
        for j in 0..m / 2 {
            let s = 0.5 * (x[n - j] - x[j]);
            x[j] = -s;
            x[n - j] = s;
        }
        if m % 2 == 1 {
            x[n / 2] = 0.0;
        }
        let nn = (n * (n + 1)) as f64;
        let pn: Vec<f64> = x.iter().map(|&t| legendre_pair(n, t).0).collect();
        let w = pn.iter().map(|p| 2.0 / (nn * p * p)).collect();
        let mut d = vec![0.0; m * m];
        for k in 0..m {
            for j in 0..m {
                d[k * m + j] = if k != j {
                    pn[k] / (pn[j] * (x[k] - x[j]))
                } else if k == 0 {
                    -nn / 4.0
                } else if k == n {
                    nn / 4.0
                } else {
                    0.0
                };
            }
        }
        Self { x, w, d }
    }
}

/// Nodes and quadrature weights realizing `2π ∫₀^{R_max} f(r) r dr`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    r: Vec<f64>,
    w: Vec<f64>,
    line_w: Vec<f64>,
    bounds: Vec<f64>,
    jac: Vec<f64>,
    gll: Lobatto,
}

impl RadialGrid {
    pub fn new(spec: GridSpec) -> Result<Self, GridError> {
        let GridSpec { nodes, r_min, r_max } = spec;
        if nodes < 2 * DEGREE + 1 {
            return Err(GridError::Spec(format!("need at least {} nodes, got {nodes}", 2 * DEGREE + 1)));
        }
        if !(r_min > 0.0) || !r_max.is_finite() {
            return Err(GridError::Spec(format!("need 0 < r_min and finite R_max, got {r_min}, {r_max}")));
        }
        if r_min > 1e-5 * r_max {
            return Err(GridError::Spec(format!(
                "r_min = {r_min} must not exceed 1e-5 · R_max = {}",
                1e-5 * r_max
            )));
        }
        let n_elem = (nodes - 1).div_ceil(DEGREE);
        let r_split = (1.0f64).min(r_max / 4.0).max((r_min * r_max).sqrt());
        let log_span = (r_split / r_min).ln();
        let outer_span = r_max - r_split;
        // Balance the width of the last geometric element against the uniform ones.
        let balanced = (n_elem as f64 * log_span * r_split / (log_span * r_split + outer_span)).round() as usize;
        let min_inner = (log_span / 1.5f64.ln()).ceil() as usize;
        let n_in = balanced.max(min_inner);
        if n_in + 1 > n_elem {
            return Err(GridError::Spec(format!(
                "{nodes} nodes are too few for r_min = {r_min}, R_max = {r_max}"
            )));
        }
        let n_out = n_elem - n_in;
        let mut bounds = Vec::with_capacity(n_elem + 1);
        for k in 0..=n_in {
            bounds.push(r_min * (log_span * k as f64 / n_in as f64).exp());
        }
        bounds[n_in] = r_split;
        let h = outer_span / n_out as f64;
        for k in 1..=n_out {
            bounds.push(r_split + h * k as f64);
        }
        bounds[n_elem] = r_max;

        let gll = Lobatto::new(DEGREE);
        let n = n_elem * DEGREE + 1;
        let mut r = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut line_w = vec![0.0; n];
        let mut jac = Vec::with_capacity(n_elem);
        for e in 0..n_elem {
            let (a, b) = (bounds[e], bounds[e + 1]);
            let j = 0.5 * (b - a);
            jac.push(j);
            for k in 0..=DEGREE {
                let idx = e * DEGREE + k;
                let x = if k == 0 {
                    a
                } else if k == DEGREE {
                    b
                } else {
                    a + j * (1.0 + gll.x[k])
                };
                r[idx] = x;
                w[idx] += 2.0 * PI * x * j * gll.w[k];
                line_w[idx] += j * gll.w[k];
            }
        }
        w[0] += PI * r_min * r_min;
        line_w[0] += r_min;
        Ok(Self {
            spec: GridSpec { nodes: n, r_min, r_max },
            r,
            w,
            line_w,
            bounds,
            jac,
            gll,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Weights for `∫₀^{R_max} f(r) dr`.
    pub fn line_weights(&self) -> &[f64] {
        &self.line_w
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn element_boundaries(&self) -> Vec<f64> {
        self.bounds.clone()
    }

    pub fn element_count(&self) -> usize {
        self.jac.len()
    }

    fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len != self.len() {
            Err(GridError::Length { expected: self.len(), got: len })
        } else {
            Ok(())
        }
    }

    /// `2π ∫ f r dr`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.w.iter().zip(f).map(|(w, f)| w * f).sum()
    }

    pub fn integrate_with<T: Amplitude, F: Fn(T) -> f64>(&self, v: &[T], f: F) -> f64 {
        self.w.iter().zip(v).map(|(w, &x)| w * f(x)).sum()
    }

    /// `‖v‖_p^p`.
    pub fn lp_norm_pow<T: Amplitude>(&self, v: &[T], p: f64) -> f64 {
        if p == 2.0 {
            self.integrate_with(v, |x| x.norm_sqr())
        } else {
            self.integrate_with(v, |x| x.abs().powf(p))
        }
    }

    pub fn lp_norm<T: Amplitude>(&self, v: &[T], p: f64) -> f64 {
        self.lp_norm_pow(v, p).powf(1.0 / p)
    }

    /// `2π ∫ |φ'|² r dr` of the piecewise polynomial interpolant.
    pub fn grad_norm_sq<T: Amplitude>(&self, v: &[T]) -> f64 {
        let m = DEGREE + 1;
        let mut total = 0.0;
        for (e, &j) in self.jac.iter().enumerate() {
            let base = e * DEGREE;
            for k in 0..m {
                let mut dv = T::zero();
                for jj in 0..m {
                    dv = dv + v[base + jj] * self.gll.d[k * m + jj];
                }
                let x = self.r[base + k];
                total += 2.0 * PI * x * self.gll.w[k] * dv.norm_sqr() / j;
            }
        }
        total
    }

    /// The symmetric matrix `A` with `grad_norm_sq(v) = vᵀ A v`.
    pub fn stiffness_matrix(&self) -> BandedSpd {
        let m = DEGREE + 1;
        let mut a = BandedSpd::zeros(self.len(), DEGREE);
        for (e, &j) in self.jac.iter().enumerate() {
            let base = e * DEGREE;
            for k in 0..m {
                let c = 2.0 * PI * self.r[base + k] * self.gll.w[k] / j;
                for p in 0..m {
                    let dkp = self.gll.d[k * m + p];
                    if dkp == 0.0 {
                        continue;
                    }
                    for q in 0..=p {
                        a.add(base + p, base + q, c * dkp * self.gll.d[k * m + q]);
                    }
                }
            }
        }
        a
    }

    /// `A v`, i.e. half the gradient of `grad_norm_sq`.
    pub fn stiffness_mul(&self, v: &[f64]) -> Vec<f64> {
        let m = DEGREE + 1;
        let mut out = vec![0.0; self.len()];
        let mut dv = [0.0; DEGREE + 1];
        for (e, &j) in self.jac.iter().enumerate() {
            let base = e * DEGREE;
            for (k, dvk) in dv.iter_mut().enumerate() {
                *dvk = (0..m).map(|q| self.gll.d[k * m + q] * v[base + q]).sum::<f64>()
                    * 2.0
                    * PI
                    * self.r[base + k]
                    * self.gll.w[k]
                    / j;
            }
            for p in 0..m {
                out[base + p] += (0..m).map(|k| self.gll.d[k * m + p] * dv[k]).sum::<f64>();
            }
        }
        out
    }

    /// Derivative of the interpolant at the nodes (averaged across element
    /// interfaces).
    pub fn derivative(&self, v: &[f64]) -> Vec<f64> {
        let m = DEGREE + 1;
        let mut out = vec![0.0; self.len()];
        let mut count = vec![0u8; self.len()];
        for (e, &j) in self.jac.iter().enumerate() {
            let base = e * DEGREE;
            for k in 0..m {
                let d: f64 = (0..m).map(|q| self.gll.d[k * m + q] * v[base + q]).sum();
                out[base + k] += d / j;
                count[base + k] += 1;
            }
        }
        for (o, c) in out.iter_mut().zip(count) {
            *o /= c as f64;
        }
        out
    }

    /// `2π ∫ |φ|² dr = ‖|x|^{-1/2} φ‖₂²`.
    pub fn coulomb_term<T: Amplitude>(&self, v: &[T]) -> f64 {
        2.0 * PI * self.line_w.iter().zip(v).map(|(l, x)| l * x.norm_sqr()).sum::<f64>()
    }

    /// Value of the interpolant at `r` (clamped to the grid).
    pub fn interpolate(&self, v: &[f64], r: f64) -> f64 {
        if r <= self.r_min() {
            return v[0];
        }
        if r >= self.r_max() {
            return v[self.len() - 1];
        }
        let e = match self.bounds.binary_search_by(|b| b.partial_cmp(&r).unwrap()) {
            Ok(i) => return v[i * DEGREE],
            Err(i) => i - 1,
        };
        let xi = (r - self.bounds[e]) / self.jac[e] - 1.0;
        let base = e * DEGREE;
        // Lagrange basis on the reference nodes.
        let mut acc = 0.0;
        for j in 0..=DEGREE {
            let mut l = 1.0;
            for k in 0..=DEGREE {
                if k != j {
                    l *= (xi - self.gll.x[k]) / (self.gll.x[j] - self.gll.x[k]);
                }
            }
            acc += l * v[base + j];
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    H1Component,
    GreenComponent,
    Generic,
}

/// Values of a radial profile at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction<T: Amplitude = f64> {
    values: Vec<T>,
    kind: Smoothness,
}

impl<T: Amplitude> RadialFunction<T> {
    pub fn new(grid: &RadialGrid, values: Vec<T>, kind: Smoothness) -> Result<Self, GridError> {
        grid.check_len(values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        if kind == Smoothness::H1Component && !grid.grad_norm_sq(&values).is_finite() {
            return Err(GridError::NonFinite(0));
        }
        Ok(Self { values, kind })
    }

    pub fn from_fn(grid: &RadialGrid, kind: Smoothness, f: impl Fn(f64) -> T) -> Result<Self, GridError> {
        Self::new(grid, grid.nodes().iter().map(|&r| f(r)).collect(), kind)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn kind(&self) -> Smoothness {
        self.kind
    }
}

/// `𝒢_{λ,ν}` sampled on the grid together with `θ_{λ,ν}`.
#[derive(Debug, Clone)]
pub struct GreenTable {
    params: GreenParams,
    values: Vec<f64>,
    theta: f64,
}

impl GreenTable {
    pub fn new(grid: &RadialGrid, params: GreenParams, cfg: &SpecFunConfig) -> Result<Self, GridError> {
        let values = grid
            .nodes()
            .par_iter()
            .map(|&r| specfun::green_value(&params, r, cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let theta = specfun::green_log_constant(&params, cfg)? / (2.0 * PI);
        Ok(Self { params, values, theta })
    }

    pub fn params(&self) -> GreenParams {
        self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// `u = φ + q 𝒢_{λ,ν}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposedState<T: Amplitude = f64> {
    pub phi: Vec<T>,
    pub q: T,
    pub lambda: f64,
}

impl<T: Amplitude> DecomposedState<T> {
    pub fn new(grid: &RadialGrid, phi: RadialFunction<T>, q: T, lambda: f64, nu: f64) -> Result<Self, GridError> {
        GreenParams::new(lambda, nu).map_err(|e| GridError::Params(e.to_string()))?;
        grid.check_len(phi.values.len())?;
        if !q.is_finite() {
            return Err(GridError::Params("charge q must be finite".into()));
        }
        Ok(Self { phi: phi.values, q, lambda })
    }

    pub fn check_table(&self, green: &GreenTable) -> Result<(), GridError> {
        if green.lambda() != self.lambda {
            return Err(GridError::LambdaMismatch { table: green.lambda(), state: self.lambda });
        }
        Ok(())
    }

    /// Node values of `u`. The table must belong to `self.lambda`.
    pub fn assemble(&self, green: &GreenTable) -> Vec<T> {
        debug_assert_eq!(green.lambda(), self.lambda);
        self.phi
            .iter()
            .zip(green.values())
            .map(|(&p, &g)| p + self.q * g)
            .collect()
    }

    /// The same `u` written against `other`:
    /// `φ' = φ + q (𝒢_λ - 𝒢_λ')`.
    pub fn redecompose(&self, from: &GreenTable, to: &GreenTable) -> Self {
        let phi = self
            .phi
            .iter()
            .zip(from.values().iter().zip(to.values()))
            .map(|(&p, (&g, &h))| p + self.q * (g - h))
            .collect();
        Self { phi, q: self.q, lambda: to.lambda() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            phi: self.phi.iter().map(|&p| p * c).collect(),
            q: self.q * c,
            lambda: self.lambda,
        }
    }
}

/// Symmetric decreasing rearrangement of nonnegative node data.
///
/// The data are read as a step function in the measure variable, sorted
/// into decreasing order (ties by node order), and each node receives the
/// average of the sorted profile over its own measure cell. The `L¹` norm is
/// preserved exactly, nonincreasing data are returned unchanged, and the
/// distribution functions agree up to one cell.
pub fn rearrange(grid: &RadialGrid, f: &[f64]) -> Result<Vec<f64>, GridError> {
    grid.check_len(f.len())?;
    if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(GridError::Negative { index, value });
    }
    let w = grid.weights();
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[b].partial_cmp(&f[a]).unwrap());
    let mut out = vec![0.0; f.len()];
    // Cell j is [c_lo, c_hi] in grid order; sorted piece k is [s_lo, s_hi].
    // The last cell and the last piece are open-ended so that rounding in
    // the two running sums cannot leave measure unassigned.
    let n = f.len();
    let inf = f64::INFINITY;
    let mut k = 0usize;
    let mut s_lo: f64 = 0.0;
    let mut s_hi = if n == 1 { inf } else { w[order[0]] };
    let mut c_lo: f64 = 0.0;
    for j in 0..n {
        let c_hi = if j + 1 == n { inf } else { c_lo + w[j] };
        let mut num = 0.0;
        let mut den = 0.0;
        let mut pieces = 0usize;
        let mut single = 0.0;
        loop {
            let lo = s_lo.max(c_lo);
            let hi = s_hi.min(c_hi);
            let overlap = if hi.is_infinite() {
                (c_lo + w[j]).max(s_lo + w[order[k]]) - lo
            } else {
                hi - lo
            };
            if overlap > 0.0 {
                num += overlap * f[order[k]];
                den += overlap;
                pieces += 1;
                single = f[order[k]];
            }
            if s_hi <= c_hi && k + 1 < n {
                k += 1;
                s_lo = s_hi;
                s_hi = if k + 1 == n { inf } else { s_hi + w[order[k]] };
            } else {
                break;
            }
        }
        out[j] = match pieces {
            0 => f[order[k]],
            1 => single,
            _ => num / den,
        };
        c_lo = c_hi;
    }
    for j in 1..out.len() {
        if out[j] > out[j - 1] {
            out[j] = out[j - 1];
        }
    }
    Ok(out)
}

pub fn rearrange_function(grid: &RadialGrid, f: &RadialFunction<f64>) -> Result<RadialFunction<f64>, GridError> {
    Ok(RadialFunction { values: rearrange(grid, f.values())?, kind: f.kind() })
}

/// Measure of `{f > t}`.
pub fn distribution(grid: &RadialGrid, f: &[f64], t: f64) -> f64 {
    grid.weights().iter().zip(f).filter(|(_, &v)| v > t).map(|(w, _)| w).sum()
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Profile CSV with header `r,phi,green,u`.
pub fn write_profile_csv<W: Write>(
    out: &mut W,
    grid: &RadialGrid,
    state: &DecomposedState<f64>,
    green: &GreenTable,
) -> io::Result<()> {
    writeln!(out, "r,phi,green,u")?;
    let u = state.assemble(green);
    for i in 0..grid.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt17(grid.nodes()[i]),
            fmt17(state.phi[i]),
            fmt17(green.values()[i]),
            fmt17(u[i])
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::new(GridSpec::for_lambda_ref(1.0)).unwrap()
    }

    #[test]
    fn lobatto_rule_is_exact_to_degree_15() {
        let g = Lobatto::new(DEGREE);
        for k in 0..=15 {
            let s: f64 = g.x.iter().zip(&g.w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn node_count_rounds_up() {
        let g = grid();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.spec().nodes, 2001);
        assert!(g.r_min() <= 1e-5 * g.r_max());
        assert!(g.nodes().windows(2).all(|p| p[1] > p[0]));
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn area_and_polynomials() {
        let g = grid();
        let rm = g.r_max();
        let one = vec![1.0; g.len()];
        assert!((g.integrate(&one) / (PI * rm * rm) - 1.0).abs() < 1e-13);
        for k in 1..=2 {
            let f: Vec<f64> = g.nodes().iter().map(|r| r.powi(k)).collect();
            let exact = 2.0 * PI * rm.powi(k + 2) / (k as f64 + 2.0);
            assert!((g.integrate(&f) / exact - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_norms() {
        let g = grid();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        assert!((g.lp_norm_pow(&f, 2.0) - PI / 2.0).abs() < 1e-12);
        let h: Vec<f64> = g.nodes().iter().map(|r| (-r * r / 2.0).exp()).collect();
        assert!((g.grad_norm_sq(&h) - PI).abs() < 1e-11);
        let e: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        assert!((g.coulomb_term(&e) - PI).abs() < 1e-10);
    }

    #[test]
    fn stiffness_matrix_matches_quadratic_form() {
        let g = RadialGrid::new(GridSpec { nodes: 400, r_min: 1e-6, r_max: 20.0 }).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|r| (1.0 + r).recip() * (-r).exp()).collect();
        let a = g.stiffness_matrix();
        let av = a.mul_vec(&v);
        let av2 = g.stiffness_mul(&v);
        let q: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        assert!((q - g.grad_norm_sq(&v)).abs() < 1e-10 * q, "{q} {}", g.grad_norm_sq(&v));
        for (x, y) in av.iter().zip(&av2) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_data() {
        let g = grid();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        for r in [0.013, 0.5, 1.7, 3.1] {
            assert!((g.interpolate(&f, r) - (-r * r).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn rearrange_keeps_decreasing_data() {
        let g = grid();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r).exp()).collect();
        assert_eq!(rearrange(&g, &f).unwrap(), f);
    }

    #[test]
    fn rearrange_rejects_negative() {
        let g = grid();
        let mut f = vec![1.0; g.len()];
        f[7] = -1e-3;
        assert!(matches!(rearrange(&g, &f), Err(GridError::Negative { index: 7, .. })));
    }

    #[test]
    fn rearrange_ring_to_bump() {
        let g = grid();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-(r - 3.0) * (r - 3.0)).exp()).collect();
        let s = rearrange(&g, &f).unwrap();
        assert!(s.windows(2).all(|p| p[1] <= p[0]));
        let l1 = g.integrate(&f);
        assert!((g.integrate(&s) - l1).abs() < 1e-12 * l1);
        assert_eq!(rearrange(&g, &s).unwrap(), s);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = RadialGrid::new(GridSpec { nodes: 400, r_min: 1e-6, r_max: 10.0 }).unwrap();
        let gp = GreenParams::new(4.0, -1.0).unwrap();
        let table = GreenTable::new(&g, gp, &SpecFunConfig::default()).unwrap();
        let st = DecomposedState { phi: vec![0.0; g.len()], q: 1.0, lambda: 4.0 };
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &g, &st, &table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,phi,green,u"));
        assert_eq!(lines.count(), g.len());
    }
}
