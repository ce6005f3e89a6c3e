use super::gaussian::{fast_norm_sq, gaussian_split};
use super::*;
use crate::pulse::{gaussian_angular_factor, pulse_extent, thermal_lineshape};
use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx() -> PhysicalContext {
    PhysicalContext::new(5777.0).unwrap()
}

fn tau_grid(ctx: &PhysicalContext) -> Vec<f64> {
    let _ = ctx;
    (0..50).map(|i| 10e-15 * i as f64 / 49.0).collect()
}

#[test]
fn orientation_weights_are_a_third() {
    for axis in Axis::ALL {
        for w in orientation_weights(axis) {
            assert_relative_eq!(w, 1.0 / 3.0, max_relative = 1e-13);
        }
    }
}

#[test]
fn thermal_split_sums_to_angular_norm() {
    for ups in [Upsilon::Exponential { kappa: 20.0 }, Upsilon::PowerLaw { q: 7.0 }] {
        let (a, b) = thermal_split(&ups);
        assert_relative_eq!(a + b, ups.angular_norm(), max_relative = 1e-12);
    }
}

#[test]
fn weight_invariants() {
    let c = ctx();
    let w = WeightSpec::thermal_matching(&c, 1.0).unwrap();
    w.validate().unwrap();
    assert_relative_eq!(w.total_weight() * w.cal_v(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(w.p_const() * w.alpha_sq(), matching_product(&c), max_relative = 1e-14);
    assert_relative_eq!(stated_product(&c) / matching_product(&c), 16.0, max_relative = 1e-14);
    let u = WeightSpec::unit_trace(2.0).unwrap();
    u.validate().unwrap();
    assert_relative_eq!(u.total_weight(), 1.0, max_relative = 1e-14);
    let g = WeightSpec::gaussian(vec![1.0, 2.0, 4.0], vec![0.0, 3.0, 1.0], 1.0).unwrap();
    g.validate().unwrap();
    assert_relative_eq!(g.total_weight(), DIRECTION_MEASURE * 5.5, max_relative = 1e-14);
    assert!(WeightSpec::gaussian(vec![1.0, 2.0], vec![1.0, -1.0], 1.0).is_err());
    assert!(WeightSpec::gaussian(vec![2.0, 1.0], vec![1.0, 1.0], 1.0).is_err());
    assert!(WeightSpec::thermal(-1.0, 1.0).is_err());
}

#[test]
fn thermal_mixture_matches_thermal_light() {
    let c = ctx();
    let taus = tau_grid(&c);
    let mut curves = Vec::new();
    for ups in [Upsilon::Exponential { kappa: 20.0 }, Upsilon::PowerLaw { q: 40.0 }] {
        let fam = PulseFamily::thermal(&c, ups).unwrap();
        let w = WeightSpec::thermal_matching(&c, 1.0).unwrap();
        let rep = simulation_residual(&fam, &w, &taus, Axis::Z).unwrap();
        assert!(rep.residual < 1e-10, "{}", rep.residual);
        assert!(rep.spectral_residual < 1e-10);
        curves.push(rep.g1_imp);
    }
    for (a, b) in curves[0].iter().zip(&curves[1]) {
        assert!((a - b).norm() <= 1e-10 * curves[0][0].norm());
    }
}

#[test]
fn stated_product_overshoots_sixteenfold() {
    let c = ctx();
    let fam = PulseFamily::thermal(&c, Upsilon::default()).unwrap();
    let w = WeightSpec::thermal_stated(&c, 1.0).unwrap();
    let g = g1_improper(&fam, &w, 0.0, Axis::X).unwrap();
    assert_relative_eq!(g.re / g1_temporal(&c, 0.0).re, 16.0, max_relative = 1e-10);
    let rep = simulation_residual(&fam, &w, &tau_grid(&c), Axis::X).unwrap();
    assert_relative_eq!(rep.residual, 15.0, max_relative = 1e-10);
}

#[test]
fn broken_weights_give_order_one_residual() {
    let c = ctx();
    let fam = PulseFamily::thermal(&c, Upsilon::default()).unwrap();
    let w = WeightSpec::thermal_matching(&c, 1.0).unwrap().scaled(2.0).unwrap();
    let rep = simulation_residual(&fam, &w, &tau_grid(&c), Axis::X).unwrap();
    assert_relative_eq!(rep.residual, 1.0, max_relative = 1e-10);
}

#[test]
fn improper_g1_algebra() {
    let c = ctx();
    let fam = PulseFamily::thermal(&c, Upsilon::default()).unwrap();
    let w = WeightSpec::thermal_matching(&c, 1.0).unwrap();
    let w2 = w.with_alpha_sq(2.0).unwrap();
    let half = w.scaled(0.5).unwrap();
    for &t in &[0.0, 0.7e-15, 3e-15] {
        let a = g1_improper(&fam, &w, t, Axis::Y).unwrap();
        assert_eq!(g1_improper(&fam, &w2, t, Axis::Y).unwrap(), a * 2.0);
        let m = g1_improper(&fam, &w, -t, Axis::Y).unwrap();
        assert!((m - a.conj()).norm() <= 1e-15 * a.norm());
        // Two half-density components add up to the whole.
        let h = g1_improper(&fam, &half, t, Axis::Y).unwrap();
        assert!((h + h - a).norm() <= 1e-14 * a.norm());
    }
    assert!(g1_improper(&fam, &WeightSpec::unit_trace(1.0).unwrap(), 0.0, Axis::X).is_err());
}

#[test]
fn gaussian_split_matches_angular_factor() {
    for &(k, k0, s) in &[(1.0, 1.2, 0.3), (2.8, 2.8, 1e-3), (0.1, 3.0, 2.0), (5.0, 4.9, 0.05)] {
        let (a, b) = gaussian_split(k, k0, s);
        assert_relative_eq!(a + b, gaussian_angular_factor(k, k0, s), max_relative = 1e-12);
    }
    // Brute-force split at moderate width.
    let (k, k0, s) = (1.5, 1.0, 0.8);
    let f = |x: f64, p: f64| (-(k * k + k0 * k0 - 2.0 * k * k0 * x) / (s * s)).exp() * p;
    let ia = Integrator::new(0.0, 1e-14).integrate(|x| f(x, x * x), -1.0, 1.0).unwrap().value;
    let ib = Integrator::new(0.0, 1e-14).integrate(|x| f(x, 1.0 - x * x), -1.0, 1.0).unwrap().value;
    let (a, b) = gaussian_split(k, k0, s);
    assert_relative_eq!(a, 2.0 * PI * ia, max_relative = 1e-12);
    assert_relative_eq!(b, PI * ib, max_relative = 1e-12);
}

#[test]
fn fast_norm_matches_adaptive() {
    for &(k0, s) in &[(2.8, 1e-3), (2.8, 0.13), (0.05, 1.3), (10.0, 2.0)] {
        let fam = PulseFamily::gaussian(&ctx(), s / ctx().length_scale()).unwrap();
        assert_relative_eq!(fast_norm_sq(k0, s), fam.norm_sq(k0), max_relative = 1e-10);
    }
}

#[test]
fn narrow_kernel_columns_are_hats() {
    // σ → 0: Kⱼ(k) → hⱼ(k)/(3k⁴).
    let grid = [1.0, 1.5, 2.0, 3.0];
    let kern = GaussianKernel::new(1e-4, &grid, Axis::X).unwrap();
    let mut row = vec![0.0; 4];
    for &k in &[1.2, 1.75, 2.4] {
        kern.row(k, &mut row);
        let j = grid.iter().rposition(|&g| g <= k).unwrap();
        let s = (k - grid[j]) / (grid[j + 1] - grid[j]);
        let k4 = 3.0 * k.powi(4);
        assert_relative_eq!(row[j] * k4, 1.0 - s, max_relative = 1e-5);
        assert_relative_eq!(row[j + 1] * k4, s, max_relative = 1e-5);
    }
}

fn brute_nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    // Best residual over all supports whose unconstrained solution is positive.
    let n = a.ncols();
    let mut best = b.norm();
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sub = a.select_columns(&cols);
        let svd = sub.clone().svd(true, true);
        let y = svd.solve(b, 1e-14).unwrap();
        if y.iter().all(|&v| v >= 0.0) {
            best = best.min((&sub * y - b).norm());
        }
    }
    best
}

#[test]
fn nnls_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let a = DMatrix::from_fn(12, 6, |_, _| rng.random::<f64>() - 0.3);
        let b = DVector::from_fn(12, |_, _| rng.random::<f64>() - 0.5);
        let sol = nnls(&a, &b, 1e-13).unwrap();
        assert!(sol.x.iter().all(|&v| v >= 0.0));
        assert!((sol.residual_norm - brute_nnls(&a, &b)).abs() < 1e-10);
        assert!(kkt_violation(&a, &b, &sol.x) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn nnls_satisfies_kkt(seed in 0u64..10_000, rows in 5usize..30, cols in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() - 0.5);
        let b = DVector::from_fn(rows, |_, _| rng.random::<f64>() - 0.5);
        let sol = nnls(&a, &b, 1e-13).unwrap();
        prop_assert!(kkt_violation(&a, &b, &sol.x) < 1e-9);
    }
}

#[test]
fn narrow_gaussians_fit_the_thermal_spectrum() {
    let c = ctx();
    let l = c.length_scale();
    // 1/(cσ) = 1 ps.
    let sigma = 1.0 / (crate::units::C * 1e-12);
    let fit = solve_gaussian_weights(&c, sigma, &GaussianFitOptions::default()).unwrap();
    assert!(fit.residual < 1e-3, "{}", fit.residual);
    assert!(fit.kkt_violation < 1e-8, "{}", fit.kkt_violation);
    // p(k₀) → k₀² n̄(k₀)/(8π⁴) in dimensionless units.
    for (k0, p) in fit.k0_grid.iter().zip(&fit.p_of_k0) {
        let x = k0 * l;
        if (0.5..8.0).contains(&x) {
            let expect = x * x * crate::specfun::bose_occupation(x) / (8.0 * PI.powi(4));
            assert_relative_eq!(p * l * l, expect, max_relative = 0.02);
        }
    }
    // The fitted mixture reproduces the thermal G¹ at zero delay.
    let fam = PulseFamily::gaussian(&c, sigma).unwrap();
    let w = fit.weights().unwrap();
    let g = g1_improper(&fam, &w, 0.0, Axis::X).unwrap();
    assert_relative_eq!(g.re, g1_temporal(&c, 0.0).re, max_relative = 2e-3);
}

#[test]
fn broadband_gaussians_cannot_fit() {
    let c = ctx();
    let sigma = 1.0 / (crate::units::C * 0.3e-15);
    let fit = solve_gaussian_weights(&c, sigma, &GaussianFitOptions::default()).unwrap();
    assert!(fit.residual > 0.1, "{}", fit.residual);
    assert!(fit.kkt_violation < 1e-8);
}

#[test]
fn unit_trace_mixture_fades_with_volume() {
    let c = ctx();
    let fam = PulseFamily::thermal(&c, Upsilon::default()).unwrap();
    let ext = pulse_extent(&fam, 0.0).unwrap();
    let w = WeightSpec::unit_trace(1.0).unwrap();
    let omegas: Vec<f64> = [10.0, 20.0, 50.0, 100.0].iter().map(|s: &f64| (s * ext).powi(3)).collect();
    let curve = unit_trace_scaling(&fam, &w, &omegas).unwrap();
    assert!((curve.log_slope() + 1.0).abs() < 0.01);
    let c0 = curve.compensated[0];
    assert!(curve.compensated.iter().all(|v| (v / c0 - 1.0).abs() < 0.01));
    // Below the pulse size the decay is slower.
    let small: Vec<f64> = [0.05, 0.1].iter().map(|s: &f64| (s * ext).powi(3)).collect();
    let s = unit_trace_scaling(&fam, &w, &small).unwrap();
    assert!(s.log_slope() > -0.99);
    let _ = thermal_lineshape(1.0);
}
