//! Envelope gradient by direct two-dimensional quadrature over |k| and
//! k̂·m̂, using the azimuthal symmetry about m̂ to do the third integral in
//! closed form (Bessel J₀, J₁).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{graded_breaks, Envelope, FamilyKind, Gradient, PulseFamily};
use crate::error::{Error, Result};
use crate::quad::{composite_gauss_legendre, gauss_legendre, Integrator};

#[derive(Debug, Clone)]
pub struct DirectEnvelope {
    family: PulseFamily,
    k0: f64,
    t: f64,
    norm: f64,
    rel_tol: f64,
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
}

const INNER_ORDER: usize = 12;

impl DirectEnvelope {
    /// Envelope of `family` with dimensionless central wavenumber `k0` at
    /// dimensionless time `t`.
    pub fn new(family: PulseFamily, k0: f64, t: f64) -> Self {
        let (gl_x, gl_w) = gauss_legendre(INNER_ORDER);
        Self {
            norm: family.norm_sq(k0).sqrt(),
            family,
            k0,
            t,
            rel_tol: 1e-9,
            gl_x,
            gl_w,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn k_range(&self) -> (f64, f64) {
        match self.family.kind() {
            FamilyKind::ThermalLineshape { .. } => (0.0, 70.0),
            FamilyKind::GaussianLineshape { sigma } => ((self.k0 - 12.0 * sigma).max(0.0), self.k0 + 12.0 * sigma),
        }
    }

    /// Peak width in x = k̂·m̂ and lower cut-off of the x range at wavenumber k.
    fn x_window(&self, k: f64) -> (f64, f64) {
        match self.family.kind() {
            FamilyKind::ThermalLineshape { upsilon } => (upsilon.width(), -1.0),
            FamilyKind::GaussianLineshape { sigma } => {
                let w = (sigma * sigma / (k * self.k0).max(1e-300)).min(2.0);
                (w, (1.0 - 45.0 * w).max(-1.0))
            }
        }
    }

    /// The x integrals at fixed k: [∫ S·ix·e^{ikzx}J₀(kρs) dx, −∫ S·s·e^{ikzx}J₁(kρs) dx].
    fn inner(&self, k: f64, z: f64, rho: f64) -> [Complex64; 2] {
        let (width, lo) = self.x_window(k);
        let breaks: Vec<f64> = graded_breaks(width).into_iter().filter(|&b| b > lo).collect();
        let mut edges = Vec::with_capacity(breaks.len() + 1);
        edges.push(lo);
        edges.extend(breaks);
        // Limit the phase change across a panel.
        let freq = k * (z.abs() + rho);
        let max_w = if freq > 0.0 { 2.0 / freq } else { f64::INFINITY };
        let mut acc = [Complex64::new(0.0, 0.0); 2];
        for p in edges.windows(2) {
            let len = p[1] - p[0];
            let n = (len / max_w).ceil().max(1.0) as usize;
            let h = len / n as f64;
            for j in 0..n {
                let a = p[0] + j as f64 * h;
                let c = a + 0.5 * h;
                for (xi, wi) in self.gl_x.iter().zip(&self.gl_w) {
                    let x = c + 0.5 * h * xi;
                    let w = 0.5 * h * wi * self.family.spectral(k, x, self.k0);
                    if w == 0.0 {
                        continue;
                    }
                    let s = (1.0 - x * x).max(0.0).sqrt();
                    let ph = Complex64::from_polar(1.0, k * z * x);
                    let arg = k * rho * s;
                    acc[0] += ph * Complex64::new(0.0, w * x * libm::j0(arg));
                    acc[1] -= ph * (w * s * libm::j1(arg));
                }
            }
        }
        acc
    }

    fn radial_weight(&self, k: f64) -> f64 {
        match self.family.kind() {
            // k^{7/2} l(k) without the υ part, which lives in `spectral`.
            FamilyKind::ThermalLineshape { .. } => k.powf(3.5),
            FamilyKind::GaussianLineshape { .. } => k.powf(3.5),
        }
    }

    fn integrate(&self, z: f64, rho: f64, abs_tol: f64) -> (Gradient, f64) {
        let (lo, hi) = self.k_range();
        let freq = z.abs() + rho + self.t.abs();
        let step = match self.family.kind() {
            FamilyKind::ThermalLineshape { .. } => 2.0,
            FamilyKind::GaussianLineshape { sigma } => sigma,
        };
        let step = if freq > 0.0 { step.min(PI / freq) } else { step };
        let mut breaks = vec![lo];
        let mut b = lo + step;
        while b < hi {
            breaks.push(b);
            b += step;
        }
        breaks.push(hi);
        let f = |k: f64| {
            if k == 0.0 {
                return [Complex64::new(0.0, 0.0); 2];
            }
            let w = 2.0 * PI * self.radial_weight(k);
            let ph = Complex64::from_polar(w, -k * self.t);
            let v = self.inner(k, z, rho);
            [v[0] * ph, v[1] * ph]
        };
        let est = Integrator::new(abs_tol, self.rel_tol)
            .with_max_intervals(breaks.len() * 6 + 400)
            .integrate_lenient(&f, &breaks);
        (
            Gradient {
                par: est.value[0],
                perp: est.value[1],
            },
            est.error,
        )
    }

    /// A size against which absolute errors are judged: the gradient's
    /// magnitude bound with all phases aligned.
    fn scale(&self) -> f64 {
        let (lo, hi) = self.k_range();
        let (kx, kw) = composite_gauss_legendre(&[lo, 0.5 * (lo + hi), hi], 40);
        kx.iter()
            .zip(&kw)
            .map(|(&k, &w)| {
                let (width, xlo) = self.x_window(k);
                let mut edges = vec![xlo];
                edges.extend(graded_breaks(width).into_iter().filter(|&b| b > xlo));
                let (xx, xw) = composite_gauss_legendre(&edges, 10);
                let inner: f64 = xx.iter().zip(&xw).map(|(&x, &v)| v * self.family.spectral(k, x, self.k0)).sum();
                w * 2.0 * PI * self.radial_weight(k) * inner
            })
            .sum()
    }

    /// Gradient at distance r and polar cosine `cos_theta`, with an error if
    /// the quadrature misses its tolerance.
    pub fn gradient_checked(&self, r: f64, cos_theta: f64) -> Result<Gradient> {
        let ct = cos_theta.clamp(-1.0, 1.0);
        let z = r * ct;
        let rho = r * (1.0 - ct * ct).sqrt();
        let scale = self.scale();
        let abs_tol = 1e-11 * scale;
        let (g, err) = self.integrate(z, rho, abs_tol);
        let size = g.par.norm().max(g.perp.norm());
        if err > abs_tol.max(self.rel_tol * size) * 10.0 {
            return Err(Error::Accuracy {
                context: "envelope quadrature",
                estimate: size,
                error: err,
            });
        }
        Ok(g)
    }
}

impl Envelope for DirectEnvelope {
    fn gradient(&self, r: f64, cos_theta: f64) -> Gradient {
        let ct = cos_theta.clamp(-1.0, 1.0);
        let z = r * ct;
        let rho = r * (1.0 - ct * ct).sqrt();
        self.integrate(z, rho, 1e-11 * self.scale()).0
    }

    fn reach(&self) -> f64 {
        f64::INFINITY
    }

    fn norm(&self) -> f64 {
        self.norm
    }
}
