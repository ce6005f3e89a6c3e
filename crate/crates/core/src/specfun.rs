//! Bose–Einstein moment integrals and a few special values.
//!
//! The central object is
//!
//! ```text
//! B_n(u) = ∫_0^∞ xⁿ e^{-ixu} / (eˣ - 1) dx = Σ_{m≥1} n! / (m + iu)^{n+1}
//! ```
//!
//! evaluated from the series with an Euler–Maclaurin tail. A contour
//! quadrature is kept alongside as an independent check.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quad::Integrator;

/// Apéry's constant ζ(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_2;

pub fn zeta3() -> f64 {
    ZETA3
}

/// ∫_0^∞ x³/(eˣ−1) dx.
pub const PI4_OVER_15: f64 = PI * PI * PI * PI / 15.0;

// Explicit terms before the Euler–Maclaurin tail takes over.
const EXPLICIT_TERMS: u32 = 40;

// B_2, B_4, ..., B_16 divided by (2j)!.
const BERNOULLI_OVER_FACT: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

/// Largest moment order accepted. The tail expansion loses accuracy for
/// orders much beyond this at the fixed explicit-term count.
pub const MAX_ORDER: u32 = 12;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Occupation number 1/(eˣ−1).
pub fn bose_occupation(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// B_n(u) from the series. Accurate to a few ulps times the number of terms.
///
/// Returns an accuracy error if the first omitted tail term is not
/// negligible, which only happens for orders above [`MAX_ORDER`].
pub fn bose_moment(n: u32, u: f64) -> Result<Complex64> {
    if n < 1 {
        return domain(format!("Bose moment order must be at least 1, got {n}"));
    }
    if !u.is_finite() {
        return domain(format!("Bose moment argument must be finite, got {u}"));
    }
    let (value, tail_err) = series(n, u.abs());
    if tail_err > 1e-13 * value.norm() {
        return Err(Error::Accuracy {
            context: "Bose moment series",
            estimate: value.norm(),
            error: tail_err,
        });
    }
    Ok(if u < 0.0 { value.conj() } else { value })
}

/// Series evaluation for `u ≥ 0`, returning the value and the size of the
/// first omitted Euler–Maclaurin term.
fn series(n: u32, u: f64) -> (Complex64, f64) {
    let nf = factorial(n);
    let p = (n + 1) as i32;
    let mut sum = Complex64::new(0.0, 0.0);
    // Sum small terms first.
    for m in (1..EXPLICIT_TERMS).rev() {
        sum += nf * Complex64::new(m as f64, u).powi(-p);
    }
    let z = Complex64::new(EXPLICIT_TERMS as f64, u);
    let zinv = z.inv();
    let zn = zinv.powi(n as i32);
    let mut tail = factorial(n - 1) * zn + 0.5 * nf * zn * zinv;
    let zinv2 = zinv * zinv;
    let mut zpow = zn * zinv2;
    let last = BERNOULLI_OVER_FACT.len() - 1;
    for (j, b) in BERNOULLI_OVER_FACT[..last].iter().enumerate() {
        let order = n + 2 * (j as u32 + 1) - 1;
        tail += b * factorial(order) * zpow;
        zpow *= zinv2;
    }
    let order = n + 2 * (last as u32 + 1) - 1;
    let omitted = (BERNOULLI_OVER_FACT[last] * factorial(order) * zpow).norm();
    (sum + tail, omitted)
}

/// Independent evaluation of B_n(u) by adaptive quadrature.
///
/// For u ≠ 0 the half-line is rotated to the ray x = y·e^{-iπ/4·sgn u}, on
/// which the oscillating factor becomes exponentially decaying. The rotation
/// is legitimate because the integrand has no poles in the swept sector and
/// decays on the closing arc.
pub fn bose_moment_quadrature(n: u32, u: f64) -> Result<Complex64> {
    if n < 1 {
        return domain(format!("Bose moment order must be at least 1, got {n}"));
    }
    let theta = if u == 0.0 { 0.0 } else { PI / 4.0 };
    let s = u.signum();
    let rot = Complex64::from_polar(1.0, -theta * s);
    let decay = theta.cos() + u.abs() * theta.sin();
    let nf = n as f64;
    let mut ymax = 40.0 / decay;
    while nf * ymax.ln() - decay * ymax > -55.0 {
        ymax *= 1.5;
    }
    let f = |y: f64| {
        let x = rot * y;
        let num = x.powi(n as i32) * (Complex64::new(0.0, -u) * x).exp();
        num / expm1_complex(x) * rot
    };
    let mut breaks = vec![0.0];
    let mut b = 1.0 / decay;
    while b < ymax {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(ymax);
    let est = Integrator::new(0.0, 1e-13)
        .with_max_intervals(4000)
        .integrate_lenient(&f, &breaks);
    Ok(est.value)
}

/// eᶻ − 1 without cancellation for small |z|.
pub fn expm1_complex(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// Spherical Bessel functions j_0(x), ..., j_{lmax}(x) for x ≥ 0.
///
/// Upward recurrence is stable while l < x; below that the sequence is
/// generated by Miller's downward recurrence and normalised against j_0.
pub fn spherical_bessel_seq(lmax: usize, x: f64, out: &mut [f64]) {
    let out = &mut out[..=lmax];
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if x < 1e-3 {
        // Leading two terms of the power series: ample at this size.
        let mut lead = 1.0;
        for (l, o) in out.iter_mut().enumerate() {
            if l > 0 {
                lead *= x / (2 * l + 1) as f64;
            }
            *o = lead * (1.0 - x * x / (2.0 * (2 * l + 3) as f64));
        }
        return;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if lmax == 0 {
        out[0] = j0;
        return;
    }
    let j1 = s / (x * x) - c / x;
    if (lmax as f64) <= x {
        out[0] = j0;
        out[1] = j1;
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        }
        return;
    }
    // Upward while safe, downward for the rest.
    let lup = (x.floor() as usize).min(lmax);
    let start = lmax + 20 + (40.0 * (lmax as f64 + 1.0)).sqrt() as usize;
    let mut f_next = 0.0;
    let mut f = 1e-300;
    let mut l = start;
    loop {
        if l <= lmax {
            out[l] = f;
        }
        if l == 0 {
            break;
        }
        let f_prev = (2 * l + 1) as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        l -= 1;
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            for o in out.iter_mut().skip(l + 1) {
                *o *= 1e-250;
            }
        }
    }
    // Normalise against whichever of j0, j1 is better conditioned.
    let norm = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
    for o in out.iter_mut() {
        *o *= norm;
    }
    if lup >= 1 {
        out[0] = j0;
        out[1] = j1;
        for l in 1..lup.min(lmax) {
            out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        }
    }
}

/// j_0(z) − j_1(z)/z, the transverse kernel of the equal-time thermal
/// correlation tensor.
pub fn transverse_kernel(z: f64) -> f64 {
    if z < 0.5 {
        // Σ (−1)^k z^{2k} [1/(2k+1)! − 2(k+1)/(2k+3)!]
        let z2 = z * z;
        let mut term_a = 1.0; // z^{2k}/(2k+1)!
        let mut sum = 0.0;
        for k in 0..10 {
            let kf = k as f64;
            let b = term_a * 2.0 * (kf + 1.0) / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            sum += term_a - b;
            term_a *= -z2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        }
        sum
    } else {
        let (s, c) = z.sin_cos();
        s / z - (s / (z * z) - c / z) / z
    }
}

/// 2 j_1(z)/z, the longitudinal kernel.
pub fn longitudinal_kernel(z: f64) -> f64 {
    if z < 0.5 {
        let z2 = z * z;
        let mut term = 1.0 / 3.0;
        let mut sum = 0.0;
        for k in 0..10 {
            let kf = k as f64;
            sum += term;
            // ratio of consecutive 2(k+1)/(2k+3)! terms, with alternating sign
            term *= -z2 * (kf + 2.0) / ((kf + 1.0) * (2.0 * kf + 4.0) * (2.0 * kf + 5.0));
        }
        2.0 * sum
    } else {
        let (s, c) = z.sin_cos();
        2.0 * (s / (z * z) - c / z) / z
    }
}

/// Legendre polynomials P_0..P_lmax and their derivatives at c.
pub fn legendre_seq(lmax: usize, c: f64, p: &mut [f64], dp: &mut [f64]) {
    p[0] = 1.0;
    dp[0] = 0.0;
    if lmax == 0 {
        return;
    }
    p[1] = c;
    dp[1] = 1.0;
    for l in 1..lmax {
        let lf = l as f64;
        p[l + 1] = ((2.0 * lf + 1.0) * c * p[l] - lf * p[l - 1]) / (lf + 1.0);
        // P'_{l+1} = P'_{l-1} + (2l+1) P_l
        dp[l + 1] = dp[l - 1] + (2.0 * lf + 1.0) * p[l];
    }
}
