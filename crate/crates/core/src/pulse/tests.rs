use super::*;
use crate::quad::gauss_legendre;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx() -> PhysicalContext {
    PhysicalContext::new(5777.0).unwrap()
}

fn thermal() -> PulseFamily {
    PulseFamily::thermal(&ctx(), Upsilon::default()).unwrap()
}

// Brute-force Σ_λ∫d³k |k × n̂|² S² in the pulse frame (m̂ = z, n̂ = x).
fn norm_3d(family: &PulseFamily, k0: f64, k_lo: f64, k_hi: f64, x_breaks: &[f64]) -> f64 {
    let (kx, kw) = composite_gauss_legendre(&[k_lo, 0.5 * (k_lo + k_hi), k_hi], 60);
    let (cx, cw) = composite_gauss_legendre(x_breaks, 24);
    let (px, pw) = gauss_legendre(16);
    let mut s = 0.0;
    for (&k, &wk) in kx.iter().zip(&kw) {
        for (&c, &wc) in cx.iter().zip(&cw) {
            let st = (1.0 - c * c).sqrt();
            let sp = family.spectral(k, c, k0);
            for (&p, &wp) in px.iter().zip(&pw) {
                let phi = PI * (p + 1.0);
                let kv = [k * st * phi.cos(), k * st * phi.sin(), k * c];
                let v = cross(kv, [1.0, 0.0, 0.0]);
                s += wk * wc * wp * PI * k * k * dot(v, v) * sp * sp;
            }
        }
    }
    s
}

#[test]
fn angular_norms_match_closed_forms() {
    let kappa: f64 = 20.0;
    let a = Upsilon::Exponential { kappa }.angular_norm();
    assert_relative_eq!(a, PI * gaussian_angular_j(2.0 * kappa), max_relative = 1e-12);
    let q = 40.0;
    let tq = 2.0 * q;
    let exact = PI * 2.0 * (2.0 / (tq + 1.0) - 4.0 / (tq + 2.0) + 4.0 / (tq + 3.0));
    assert_relative_eq!(Upsilon::PowerLaw { q }.angular_norm(), exact, max_relative = 1e-12);
}

#[test]
fn gaussian_angular_j_against_quadrature() {
    for &a in &[0.0, 1e-3, 0.5, 1.999, 2.0, 2.001, 7.0, 60.0] {
        let f = |x: f64| (1.0 + x * x) * (-a * (1.0 - x)).exp();
        let q = Integrator::new(0.0, 1e-14).integrate(f, -1.0, 1.0).unwrap().value;
        assert_relative_eq!(gaussian_angular_j(a), q, max_relative = 1e-12);
    }
}

#[test]
fn thermal_normalization_matches_3d_quadrature() {
    for ups in [Upsilon::Exponential { kappa: 20.0 }, Upsilon::PowerLaw { q: 40.0 }] {
        let fam = PulseFamily::thermal(&ctx(), ups).unwrap();
        // The radial integrand k⁴l² = k²/(eᵏ−1) is resolved on [0, 60].
        let s = norm_3d(&fam, 0.0, 0.0, 60.0, &ups.breakpoints());
        assert_relative_eq!(s * fam.norm_sq(0.0), 1.0, max_relative = 1e-8);
    }
    assert_relative_eq!(2.0 * ZETA3, crate::specfun::bose_moment(2, 0.0).unwrap().re, max_relative = 1e-13);
}

#[test]
fn gaussian_normalization_matches_3d_quadrature() {
    let fam = PulseFamily::gaussian(&ctx(), 3.3e3).unwrap();
    let sigma = fam.sigma().unwrap();
    assert!(sigma < 2e-3);
    let k0 = 2.8;
    let w = sigma * sigma / (k0 * k0);
    let mut breaks: Vec<f64> = graded_breaks(w).into_iter().filter(|&b| b > 1.0 - 60.0 * w).collect();
    breaks.insert(0, 1.0 - 60.0 * w);
    let s = norm_3d(&fam, k0, k0 - 12.0 * sigma, k0 + 12.0 * sigma, &breaks);
    assert_relative_eq!(s * fam.norm_sq(k0), 1.0, max_relative = 1e-8);
    assert_relative_eq!(fam.duration_s().unwrap(), 1.0 / (crate::units::C * 3.3e3), max_relative = 1e-14);
}

#[test]
fn normalization_does_not_depend_on_direction() {
    // Lab-frame quadrature with a tilted m̂: same result as the m̂ = z frame.
    let fam = thermal();
    let m = {
        let v = [0.3, -0.5, 0.8];
        let n = norm(v);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let p = PulseParams::new(0.0, m, 0.7, [0.0; 3]).unwrap();
    let (cx, cw) = composite_gauss_legendre(&(0..=40).map(|i| -1.0 + i as f64 * 0.05).collect::<Vec<_>>(), 16);
    let nphi = 256;
    let mut ang = 0.0;
    for (&c, &wc) in cx.iter().zip(&cw) {
        let st = (1.0 - c * c).sqrt();
        for j in 0..nphi {
            let phi = 2.0 * PI * j as f64 / nphi as f64;
            let kh = [st * phi.cos(), st * phi.sin(), c];
            let v = cross(kh, p.n_hat);
            let u = fam.upsilon().unwrap().eval(dot(kh, p.m_hat));
            ang += wc * 2.0 * PI / nphi as f64 * dot(v, v) * u * u;
        }
    }
    assert_relative_eq!(ang, fam.angular_norm(), max_relative = 1e-7);
}

#[test]
fn params_are_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let m = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let p = PulseParams::new(1.0, m, rng.random::<f64>() * 6.0, [0.0; 3]).unwrap();
        assert!((norm(p.n_hat) - 1.0).abs() < 1e-12);
        assert!(dot(p.n_hat, p.m_hat).abs() < 1e-12);
        let q = PulseParams::from_vectors(1.0, p.m_hat, p.n_hat, [0.0; 3]).unwrap();
        assert!((q.psi - p.psi).sin().abs() < 1e-12 && (q.psi - p.psi).cos() > 0.0);
    }
    assert!(PulseParams::from_vectors(1.0, [0.0, 0.0, 1.0], [0.0, 0.6, 0.8], [0.0; 3]).is_err());
}

#[test]
fn legendre_expansion_reproduces_spread() {
    for ups in [Upsilon::Exponential { kappa: 20.0 }, Upsilon::PowerLaw { q: 40.0 }] {
        let v = table::legendre_coefficients(&ups);
        let mut p = vec![0.0; v.len()];
        let mut dp = vec![0.0; v.len()];
        for &x in &[-0.9, 0.0, 0.7, 0.95, 1.0] {
            crate::specfun::legendre_seq(v.len() - 1, x, &mut p, &mut dp);
            let s: f64 = v.iter().zip(&p).map(|(a, b)| a * b).sum();
            assert!((s - ups.eval(x)).abs() < 1e-12, "{ups:?} x={x}");
        }
    }
    let v = table::legendre_coefficients(&Upsilon::PowerLaw { q: 40.0 });
    assert!(v[41..].iter().all(|x| x.abs() < 1e-12 * v[0]));
}

#[test]
fn table_matches_direct_quadrature() {
    let fam = thermal();
    let table = table::shared_table(&fam, 0.0).unwrap();
    let direct = DirectEnvelope::new(fam, 0.0, 0.0);
    let peak = table.gradient(0.0, 1.0).par.norm();
    for &(r, c) in &[(0.0, 1.0), (0.3, 0.2), (1.0, 0.9), (1.37, -0.4), (2.5, 0.99), (4.0, 0.6), (7.3, 0.97)] {
        let a = table.gradient(r, c);
        let b = direct.gradient_checked(r, c).unwrap();
        assert!((a.par - b.par).norm() < 1e-6 * peak, "r={r} c={c}: {:?} vs {:?}", a.par, b.par);
        assert!((a.perp - b.perp).norm() < 1e-6 * peak, "r={r} c={c}: {:?} vs {:?}", a.perp, b.perp);
    }
}

#[test]
fn table_at_nonzero_time_matches_direct() {
    let fam = thermal();
    let opts = TableOptions {
        r_max: 6.0,
        ..TableOptions::default()
    };
    let table = PartialWaveTable::build(&fam, 1.5, &opts).unwrap();
    let direct = DirectEnvelope::new(fam, 0.0, 1.5);
    let peak = table.gradient(0.0, 1.0).par.norm();
    for &(r, c) in &[(0.0, 1.0), (1.5, 0.99), (2.2, -0.3)] {
        let a = table.gradient(r, c);
        let b = direct.gradient_checked(r, c).unwrap();
        assert!((a.par - b.par).norm() < 1e-6 * peak);
        assert!((a.perp - b.perp).norm() < 1e-6 * peak);
    }
}

#[test]
fn envelope_has_no_polarization_component() {
    let fam = thermal();
    let table = table::shared_table(&fam, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let m = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let p = PulseParams::new(0.0, m, rng.random::<f64>() * 6.0, [0.0; 3]).unwrap();
        let d = [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0];
        let e = table.field(d, &p.frame());
        let along: Complex64 = (0..3).map(|i| e[i] * p.n_hat[i]).sum();
        let size = e.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(along.norm() <= 1e-10 * size.max(1e-300));
    }
}

#[test]
fn field_envelope_translation_and_polarization() {
    let c = ctx();
    let fam = thermal().with_alpha(Complex64::new(0.6, -0.8));
    let l = c.length_scale();
    let p = PulseParams::new(0.0, [0.0, 1.0, 1.0], 0.4, [0.5 * l, 0.0, 0.25 * l]).unwrap();
    let r = [l, 0.5 * l, 0.0];
    let a = field_envelope(&fam, &p, r, 0.0).unwrap();
    let shift = [0.25 * l, -l, 2.0 * l];
    let p2 = PulseParams { r0: [p.r0[0] + shift[0], p.r0[1] + shift[1], p.r0[2] + shift[2]], ..p };
    let b = field_envelope(&fam, &p2, [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]], 0.0).unwrap();
    for i in 0..3 {
        assert!((a.value[i] - b.value[i]).norm() <= 1e-12 * a.intensity().sqrt());
    }
    let along: Complex64 = (0..3).map(|i| a.value[i] * p.n_hat[i]).sum();
    assert!(along.norm() < 1e-10 * a.intensity().sqrt());
    assert!(field_envelope(&PulseFamily::gaussian(&c, 1e5).unwrap(), &p, r, 0.0).is_err());
}

#[test]
fn peak_gradient_matches_monte_carlo_integration() {
    // ∇Φ(0) = ∫d³k i k √k S: sample (k, x, φ) uniformly and average.
    let fam = thermal();
    let table = table::shared_table(&fam, 0.0).unwrap();
    let g = table.gradient(0.0, 1.0);
    let ups = fam.upsilon().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 400_000;
    let (kmax, vol) = (40.0, 40.0 * 2.0 * 2.0 * PI);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let k: f64 = rng.random::<f64>() * kmax;
        let x: f64 = 1.0 - 2.0 * rng.random::<f64>();
        // z component of i k √k S k², imaginary part
        let v = k * k * k.sqrt() * thermal_lineshape(k) * ups.eval(x) * k * x;
        s += v;
        s2 += v * v;
    }
    let mean = s / n as f64 * vol;
    let se = ((s2 / n as f64 - (s / n as f64).powi(2)) / n as f64).sqrt() * vol;
    assert!(g.par.re.abs() < 1e-12 * g.par.im.abs());
    assert!((g.par.im - mean).abs() < 3.0 * se, "{} vs {mean} ± {se}", g.par.im);
    assert!(g.perp.norm() < 1e-12 * g.par.norm());
}

#[test]
fn profile_total_matches_parseval() {
    let fam = thermal();
    let prof = IsotropicProfile::for_family(&fam, 0.0, &ProfileOptions::default()).unwrap();
    assert_relative_eq!(prof.total(), (2.0 * PI).powi(3) * thermal_mean_k(), max_relative = 1e-10);
    assert_relative_eq!(prof.profile_total(), prof.total(), max_relative = 1e-4);
    let p = prof.tail_exponent().unwrap();
    assert!(p > 5.5 && p < 6.2, "tail exponent {p}");
}

#[test]
fn thermal_extent() {
    let c = ctx();
    let fam = thermal();
    let e99 = pulse_extent(&fam, 0.0).unwrap();
    assert!(e99 > 2.9e-6 && e99 < 3.3e-6, "{e99}");
    let e50 = pulse_extent_quantile(&fam, 0.0, 0.5).unwrap();
    assert!(e50 > 0.4e-6 && e50 < 0.48e-6, "{e50}");
    // |α|² is a prefactor only.
    let scaled = pulse_extent(&fam.with_alpha(Complex64::new(3.0, 1.0)), 0.0).unwrap();
    assert_eq!(scaled, e99);
    // Localization: intensity well below the peak at ten extents.
    let prof = IsotropicProfile::for_family(&fam, 0.0, &ProfileOptions::default()).unwrap();
    let r10 = 10.0 * e99 / c.length_scale();
    let i = prof.radii().iter().position(|&r| r >= r10.min(63.0)).unwrap();
    assert!(prof.t_bar()[i] < 1e-4 * prof.t_bar()[0]);
}

#[test]
fn gaussian_extent_scales_inversely_with_sigma() {
    let c = ctx();
    let l = c.length_scale();
    let k0 = 2.8 / l;
    let opts = ProfileOptions {
        theta_nodes: 12,
        direct_points: 41,
    };
    let ext = |s: f64| {
        let fam = PulseFamily::gaussian(&c, s / l).unwrap();
        IsotropicProfile::for_family(&fam, k0 * l, &opts).unwrap().radius_quantile(0.99)
    };
    let a = ext(0.5);
    let b = ext(0.25);
    assert_relative_eq!(b / a, 2.0, max_relative = 0.05);
}

#[test]
fn mu_grows_and_saturates() {
    let c = ctx();
    let fam = thermal();
    let l = c.length_scale();
    let ext = pulse_extent(&fam, 0.0).unwrap();
    let mut prev = 0.0;
    for side in [0.5, 1.0, 2.0, 4.0, 10.0] {
        let mu = mu_integral_averaged(&fam, 0.0, (side * ext).powi(3)).unwrap();
        assert!(mu >= prev);
        prev = mu;
    }
    let big = (10.0 * ext).powi(3);
    let r = mu_integral_averaged(&fam, 0.0, big).unwrap() / mu_integral_averaged(&fam, 0.0, 8.0 * big).unwrap();
    assert!(r > 0.99, "{r}");
    // Oriented μ summed over components against the Parseval total.
    let p = PulseParams::new(0.0, [0.2, 0.3, 0.9], 1.1, [0.0; 3]).unwrap();
    let mu = mu_integral(&fam, &p, [0.0; 3], (40.0 * l).powi(3)).unwrap();
    let total = fam.total_energy_integral(0.0);
    let s = mu.iter().sum::<f64>();
    assert!(s < total && s > 0.998 * total, "{s} vs {total}");
    let mono = mu_integral(&fam, &p, [0.0; 3], (4.0 * l).powi(3)).unwrap();
    for i in 0..3 {
        assert!(mono[i] <= mu[i]);
    }
}
