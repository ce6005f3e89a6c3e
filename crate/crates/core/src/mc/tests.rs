use super::*;
use crate::mixture::{g1_improper, WeightSpec};
use crate::pulse::{pulse_extent, Upsilon};
use crate::quad::composite_gauss_legendre;
use crate::thermal::g1_temporal;
use crate::units::PhysicalContext;

fn ctx() -> PhysicalContext {
    PhysicalContext::new(5777.0).unwrap()
}

fn thermal() -> PulseFamily {
    PulseFamily::thermal(&ctx(), Upsilon::default()).unwrap()
}

const BLOB: GaussianBlob = GaussianBlob {
    amplitude: 2.0,
    width: 1.0,
};

#[test]
fn boxes() {
    let b = SamplingBox::cube(8.0).unwrap();
    assert_eq!(b.half, [1.0; 3]);
    assert!(b.contains([0.9, -0.9, 1.0]) && !b.contains([1.1, 0.0, 0.0]));
    let p = SamplingBox::around_pair(4.0, 1.0).unwrap();
    assert!((p.volume() - 6.0 * 2.0 * 2.0).abs() < 1e-12);
    assert!((p.max_distance([0.0; 3]) - (25.0f64 + 1.0 + 1.0).sqrt()).abs() < 1e-12);
    assert!(SamplingBox::cube(-1.0).is_err());
}

#[test]
fn batches_are_reproducible_and_inside() {
    let b = SamplingBox::new([1.0, 2.0, 3.0], [0.5, 1.0, 2.0]).unwrap();
    let a = SampleBatch::draw(&b, 3000, 9);
    let c = SampleBatch::draw(&b, 3000, 9);
    assert_eq!(a, c);
    assert_eq!(a.draws.len(), 3000);
    assert!(a.draws.iter().all(|p| b.contains(p.r0)));
    assert_ne!(a.draws[0], SampleBatch::draw(&b, 3000, 10).draws[0]);
    // m̂ isotropic: mean of cos θ near zero.
    let mz = a.draws.iter().map(|p| p.m_hat[2]).sum::<f64>() / 3000.0;
    assert!(mz.abs() < 4.0 / (3.0f64 * 3000.0).sqrt());
}

#[test]
fn toy_g1_is_unbiased() {
    let region = SamplingBox::cube(1000.0).unwrap();
    let expect = BLOB.intensity_integral() / region.volume();
    for &n in &[1000, 10_000] {
        for seed in 0..4 {
            for axis in Axis::ALL {
                let e = mc_g1(&BLOB, &BLOB, &region, [0.0; 3], axis, n, &Stratification::none(), seed);
                assert!((e.mean.re - expect).abs() < 3.0 * e.std_error, "n={n} seed={seed}: {} vs {expect} ± {}", e.mean.re, e.std_error);
                assert_eq!(e.mean.im, 0.0);
            }
        }
    }
}

#[test]
fn toy_g2_at_zero_separation() {
    let region = SamplingBox::cube(216.0).unwrap();
    let expect = BLOB.fourth_moment_integral() / region.volume();
    for &n in &[1000, 10_000] {
        for strat in [Stratification::along_x(10), Stratification { cells: [4, 4, 4], pilot: 8 }] {
            let e = mc_g2(&BLOB, &region, 0.0, Axis::Z, n, &strat, 3);
            assert!((e.mean - expect).abs() < 3.0 * e.std_error, "{} vs {expect} ± {}", e.mean, e.std_error);
        }
    }
}

#[test]
fn errors_shrink_as_inverse_root_n() {
    let region = SamplingBox::cube(1000.0).unwrap();
    let a = mc_g1(&BLOB, &BLOB, &region, [0.0; 3], Axis::X, 4000, &Stratification::none(), 1);
    let b = mc_g1(&BLOB, &BLOB, &region, [0.0; 3], Axis::X, 16_000, &Stratification::none(), 1);
    let r = a.std_error / b.std_error;
    assert!(r > 1.6 && r < 2.4, "{r}");
}

#[test]
fn neyman_allocation_beats_plain_sampling() {
    let region = SamplingBox::cube(1000.0).unwrap();
    let expect = BLOB.intensity_integral() / region.volume();
    let plain = mc_g1(&BLOB, &BLOB, &region, [0.0; 3], Axis::X, 20_000, &Stratification::none(), 4);
    let strat = Stratification { cells: [5, 5, 5], pilot: 16 };
    let s = mc_g1(&BLOB, &BLOB, &region, [0.0; 3], Axis::X, 20_000, &strat, 4);
    assert!(s.std_error < 0.5 * plain.std_error);
    assert!((s.mean.re - expect).abs() < 3.0 * s.std_error);
    assert!(s.n.abs_diff(20_000) < 1000, "{}", s.n);
}

#[test]
fn seeds_fix_estimates() {
    let region = SamplingBox::cube(1000.0).unwrap();
    let strat = Stratification::along_x(8).with_pilot(16);
    let a = mc_g2(&BLOB, &region, 0.5, Axis::Y, 5000, &strat, 42);
    let b = mc_g2(&BLOB, &region, 0.5, Axis::Y, 5000, &strat, 42);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}

#[test]
fn zero_amplitude_gives_zero() {
    let c = ctx();
    let w = WeightSpec::unit_trace(0.0).unwrap();
    let region = SamplingBox::cube((10.0 * c.length_scale()).powi(3)).unwrap();
    let e = estimate_g1_mix(&thermal(), &w, &region, [0.0; 3], 0.0, Axis::X, 200, 1).unwrap();
    assert_eq!(e.mean, Complex64::new(0.0, 0.0));
    assert_eq!(e.std_error, 0.0);
    let gauss = PulseFamily::gaussian(&c, 1e6).unwrap();
    assert!(estimate_g1_mix(&gauss, &w, &region, [0.0; 3], 0.0, Axis::X, 200, 1).is_err());
}

#[test]
fn improper_g1_matches_analytic_value() {
    let c = ctx();
    let l = c.length_scale();
    let fam = thermal();
    let w = WeightSpec::thermal_matching(&c, 1.0).unwrap();
    let region = SamplingBox::cube((24.0 * l).powi(3)).unwrap();
    let e = estimate_g1_mix(&fam, &w, &region, [0.0; 3], 0.0, Axis::X, 200_000, 7).unwrap();
    let exact = g1_improper(&fam, &w, 0.0, Axis::X).unwrap();
    assert!((e.mean - exact).norm() < 3.0 * e.std_error, "{} vs {exact} ± {}", e.mean, e.std_error);
    assert!(e.std_error < 0.05 * exact.re);
    assert!((exact.re / g1_temporal(&c, 0.0).re - 1.0).abs() < 1e-10);
}

#[test]
fn improper_g1_matches_at_delays() {
    let c = ctx();
    let l = c.length_scale();
    let fam = thermal();
    let w = WeightSpec::thermal_matching(&c, 1.0).unwrap();
    let region = SamplingBox::cube((20.0 * l).powi(3)).unwrap();
    let mut rng = chunk_rng(99, 0);
    let mut misses = 0;
    for j in 0..10 {
        let tau = rng.random::<f64>() * 2e-15;
        let e = estimate_g1_mix(&fam, &w, &region, [0.0; 3], tau, Axis::Y, 50_000, 100 + j).unwrap();
        let exact = g1_improper(&fam, &w, tau, Axis::Y).unwrap();
        // Complex error: allow 3σ per component.
        if (e.mean - exact).norm() > 3.0 * e.std_error {
            misses += 1;
        }
    }
    assert!(misses <= 1, "{misses} of 10 outside 3σ");
}

#[test]
fn unit_trace_g1_halves_with_volume() {
    let c = ctx();
    let l = c.length_scale();
    let fam = thermal();
    let w = WeightSpec::unit_trace(1.0).unwrap();
    let v = (20.0 * l).powi(3);
    let a = estimate_g1_mix(&fam, &w, &SamplingBox::cube(v).unwrap(), [0.0; 3], 0.0, Axis::Z, 100_000, 5).unwrap();
    let b = estimate_g1_mix(&fam, &w, &SamplingBox::cube(2.0 * v).unwrap(), [0.0; 3], 0.0, Axis::Z, 100_000, 6).unwrap();
    let ratio = b.mean.re / a.mean.re;
    let err = ratio * ((a.std_error / a.mean.re).powi(2) + (b.std_error / b.mean.re).powi(2)).sqrt();
    assert!((ratio - 0.5).abs() < 3.0 * err, "{ratio} ± {err}");
}

/// ∫d³r ⟨|ℰᵢ|⁴⟩ over orientations by deterministic quadrature, using
/// ⟨|u·v|⁴⟩ = (2|v|⁴ + |v·v|²)/15 for a random unit u.
fn fourth_moment(env: &dyn Envelope, r_max: f64) -> f64 {
    let edges: Vec<f64> = (0..=(r_max / 0.25) as usize).map(|i| 0.25 * i as f64).collect();
    let (rx, rw) = composite_gauss_legendre(&edges, 8);
    let (cx, cw) = composite_gauss_legendre(&[-1.0, 0.0, 0.9, 0.99, 1.0], 24);
    let nphi = 16;
    let mut s = 0.0;
    for (&r, &wr) in rx.iter().zip(&rw) {
        for (&c, &wc) in cx.iter().zip(&cw) {
            let g = env.gradient(r, c);
            let n2 = env.norm().powi(2);
            for j in 0..nphi {
                let sp = (2.0 * PI * j as f64 / nphi as f64).sin();
                let v2 = n2 * (g.par.norm_sqr() + g.perp.norm_sqr() * sp * sp);
                let vv = (g.par * g.par + g.perp * g.perp * (sp * sp)) * n2;
                s += wr * wc * (2.0 * PI / nphi as f64) * r * r * (2.0 * v2 * v2 + vv.norm_sqr()) / 15.0;
            }
        }
    }
    s
}

#[test]
fn fourth_moment_quadrature_matches_blob() {
    assert!((fourth_moment(&BLOB, 10.0) / BLOB.fourth_moment_integral() - 1.0).abs() < 1e-9);
}

#[test]
fn g2_at_contact_matches_quadrature() {
    let c = ctx();
    let l = c.length_scale();
    let fam = thermal();
    let w = WeightSpec::unit_trace(1.0).unwrap();
    let region = SamplingBox::cube((16.0 * l).powi(3)).unwrap();
    let e = estimate_g2_mix(&fam, &w, &region, 0.0, Axis::X, 200_000, 16, 11).unwrap();
    let table = shared_table(&fam, 0.0).unwrap();
    let e4 = c.field_unit().powi(4);
    // The box is 16 βħc on a side, so the quadrature sphere of radius 8
    // misses only the corners, where |ℰ|⁴ is negligible.
    let expect = fourth_moment(&*table, 8.0) * e4 * l.powi(3) / region.volume();
    assert!((e.mean - expect).abs() < 3.0 * e.std_error, "{} vs {expect} ± {}", e.mean, e.std_error);
}

#[test]
fn g2_falls_with_separation() {
    let c = ctx();
    let l = c.length_scale();
    let fam = thermal();
    let ext = pulse_extent(&fam, 0.0).unwrap();
    let w = WeightSpec::thermal_matching(&c, 1.0).unwrap();
    let mut prev = f64::INFINITY;
    let mut prev_err = 0.0;
    for k in 1..=3 {
        let sep = k as f64 * ext;
        let region = SamplingBox::around_pair(sep, 12.0 * l).unwrap();
        let e = estimate_g2_mix(&fam, &w, &region, sep, Axis::X, 100_000, 32, k).unwrap();
        assert!(e.mean < prev + 3.0 * (e.std_error + prev_err), "{k}: {} after {prev}", e.mean);
        prev = e.mean;
        prev_err = e.std_error;
    }
}
