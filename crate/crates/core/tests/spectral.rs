mod common;

use common::*;
use nlscd_core::grid::{GridSpec, RadialGrid};
use nlscd_core::specfun::{self, GreenParams};
use nlscd_core::spectral::*;

#[test]
fn resolvent_inverts_the_radial_operator() {
    let c = cfg();
    let grid = RadialGrid::new(GridSpec { nodes: 2000, r_min: 1e-6, r_max: 20.0 }).unwrap();
    for &(lambda, nu) in &[(4.0, -1.0), (2.0, 0.5), (1.2, -1.0)] {
        let gp = GreenParams::new(lambda, nu).unwrap();
        // h = r^{5/2} e^{-r²} and g = (-d² - 1/(4r²) + ν/r + λ) h in closed form.
        let h: Vec<f64> = grid.nodes().iter().map(|&r| r.powf(2.5) * (-r * r).exp()).collect();
        let g: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| {
                (-r * r).exp()
                    * (-4.0 * r.sqrt() + nu * r.powf(1.5) + (12.0 + lambda) * r.powf(2.5) - 4.0 * r.powf(4.5))
            })
            .collect();
        let rg = resolvent_apply(&gp, &g, &grid, &c).unwrap();
        let err = rg.iter().zip(&h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "λ={lambda} ν={nu}: {err:e}");
    }
}

#[test]
fn resolvent_small_r_asymptotics() {
    let c = cfg();
    let grid = default_grid();
    let gp = GreenParams::new(4.0, -1.0).unwrap();
    let phi: Vec<f64> = grid.nodes().iter().map(|&r| specfun::phi_kernel(&gp, r, &c).unwrap()).collect();
    let norm_sq: f64 = grid.line_weights().iter().zip(&phi).map(|(l, p)| l * p * p).sum();
    let psi = resolvent_apply(&gp, &phi, &grid, &c).unwrap();
    for i in 0..5 {
        let r = grid.nodes()[i];
        let ratio = psi[i] / ((2.0 * std::f64::consts::PI * r).sqrt() * norm_sq);
        assert!((ratio - 1.0).abs() < 0.01, "r={r}: {ratio}");
    }
    let zero = resolvent_apply(&gp, &vec![0.0; grid.len()], &grid, &c).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
}

#[test]
fn ladder_eigenfunctions_satisfy_boundary_condition() {
    let c = cfg();
    let grid = default_grid();
    for &(nu, alpha) in &[(-1.0, 0.0), (-1.0, 0.4), (-2.0, -0.3), (-0.5, 1.0)] {
        let rep = eigenvalue_ladder(&PhysParams::mass(nu, alpha, 3.0, 1.0), 4, &c).unwrap();
        for &e in &rep.ladder {
            let gp = GreenParams::bound_state(-e, nu).unwrap();
            let g: Vec<f64> = grid.nodes()[..20]
                .iter()
                .map(|&r| specfun::phi_kernel(&gp, r, &c).unwrap())
                .collect();
            let (g0, g1) = boundary_coefficients(grid.nodes(), &g, 20, nu);
            let target = 2.0 * std::f64::consts::PI * alpha * g0;
            let scale = g0.abs().max(g1.abs());
            assert!((g1 - target).abs() < 1e-4 * scale, "ν={nu} α={alpha} E={e}: {g1} vs {target}");
        }
    }
}

#[test]
fn ladder_against_dense_sign_scan() {
    let c = cfg();
    let (nu, alpha) = (-1.0, 0.2);
    let rep = eigenvalue_ladder(&PhysParams::mass(nu, alpha, 3.0, 1.0), 5, &c).unwrap();
    // Sign changes from - to + of α + θ along increasing λ are the roots.
    let n = 200_000;
    let (lo, hi) = (0.01f64, 100.0f64);
    let mut roots = Vec::new();
    let mut prev = (lo, alpha + theta(lo, nu, &c).unwrap());
    for i in 1..=n {
        let l = lo * (hi / lo).powf(i as f64 / n as f64);
        let f = alpha + theta(l, nu, &c).unwrap();
        if prev.1 < 0.0 && f > 0.0 {
            roots.push(0.5 * (prev.0 + l));
        }
        prev = (l, f);
    }
    roots.reverse();
    for (k, &e) in rep.ladder.iter().enumerate() {
        assert!(rel(-e, roots[k]) < 1e-4, "k={k}: {} vs {}", -e, roots[k]);
    }
}

#[test]
fn omega_decreases_with_alpha() {
    let c = cfg();
    let mut prev = f64::INFINITY;
    for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let w = solve_omega_nu(&PhysParams::mass(-1.0, alpha, 3.0, 1.0), &c).unwrap().lambda;
        assert!(w > 1.0 && w < prev);
        prev = w;
    }
}

#[test]
fn friedrichs_closed_form() {
    let l = friedrichs_eigenvalues(-1.0, 2);
    assert_eq!(l, vec![-1.0, -1.0 / 9.0, -1.0 / 25.0]);
    assert!(friedrichs_eigenvalues(-1e-9, 3).iter().all(|e| e.abs() < 1e-17));
}
