#![allow(dead_code)]

use nlscd_core::grid::{GridSpec, RadialGrid};
use nlscd_core::specfun::SpecFunConfig;

/// `K₀(x) = ∫₀^∞ e^{-x cosh t} dt` by the trapezoid rule, which converges
/// geometrically for this analytic, doubly exponentially decaying integrand.
pub fn bessel_k0(x: f64) -> f64 {
    let h: f64 = 0.01;
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

/// `Γ(a) U(a, 1, z)` from its Laplace integral after `t = s^{1/a}`, with a
/// fixed-panel three-point Gauss–Legendre rule.
pub fn gamma_u_bruteforce(a: f64, z: f64, panels: usize) -> f64 {
    let s_max = (745.0 / z).powf(a);
    let h = s_max / panels as f64;
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let f = |s: f64| {
        let t = s.powf(1.0 / a);
        (-z * t).exp() * (1.0 + t).powf(-a) / a
    };
    let mut sum = 0.0;
    for i in 0..panels {
        let c = (i as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(&weights) {
            sum += w * f(c + 0.5 * h * x);
        }
    }
    sum * 0.5 * h
}

pub fn cfg() -> SpecFunConfig {
    SpecFunConfig::default()
}

pub fn default_grid() -> RadialGrid {
    RadialGrid::new(GridSpec::for_lambda_ref(1.0)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Smooth random profile: a sum of Gaussians with random centres, widths
/// and amplitudes, pinned to zero at the outer radius.
pub fn random_phi(grid: &RadialGrid, rng: &mut impl rand::Rng, scale: f64) -> Vec<f64> {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-1.0..1.0) * scale, rng.gen_range(0.0..2.0), rng.gen_range(0.4..2.0)))
        .collect();
    let mut v: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| terms.iter().map(|(a, c, s)| a * (-((r - c) / s).powi(2)).exp()).sum())
        .collect();
    *v.last_mut().unwrap() = 0.0;
    v
}
