//! Orientation-averaged intensity profiles and the localization integrals
//! built on them.
//!
//! Averaging |ℰᵢ|² over pulse orientations (m̂ isotropic, Ψ uniform) leaves
//! an isotropic tensor, so for a displacement along the unit vector u
//!
//! ```text
//! ⟨|ℰᵢ|²⟩ = uᵢ² L̄(r) + (1 − uᵢ²)(T̄(r) − L̄(r))/2
//! ```
//!
//! with T̄ the averaged total intensity and L̄ the averaged intensity of the
//! component along u.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::table::PartialWaveTable;
use super::{DirectEnvelope, Envelope, FamilyKind, Frame, PulseFamily, Vec3};
use crate::error::Result;
use crate::quad::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Gauss–Legendre nodes in cos θ for the orientation average.
    pub theta_nodes: usize,
    /// Radial grid points for profiles computed by direct quadrature.
    pub direct_points: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            theta_nodes: 64,
            direct_points: 81,
        }
    }
}

/// T̄(r), L̄(r) and their cumulative radial moments ∫₀ʳ r′² (·) dr′, in
/// units of (field unit)²·|α|², with a power-law continuation beyond the
/// last grid point.
#[derive(Debug, Clone)]
pub struct IsotropicProfile {
    r: Vec<f64>,
    t_bar: Vec<f64>,
    l_bar: Vec<f64>,
    cum_t: Vec<f64>,
    cum_l: Vec<f64>,
    /// Exponent p of the tail T̄, L̄ ∝ r^{−p}; `None` when the profile is
    /// taken to vanish beyond the grid.
    tail_exponent: Option<f64>,
    /// ∫|ℰ|² d³r from Parseval's theorem.
    total: f64,
}

fn averages(env: &dyn Envelope, r: f64, ct: &[f64], cw: &[f64]) -> (f64, f64) {
    let n2 = env.norm() * env.norm();
    let mut t = 0.0;
    let mut l = 0.0;
    for (&c, &w) in ct.iter().zip(cw) {
        let g = env.gradient(r, c);
        let s = (1.0 - c * c).sqrt();
        t += w * (g.par.norm_sqr() + 0.5 * g.perp.norm_sqr());
        l += w * 0.5 * (g.par * s - g.perp * c).norm_sqr();
    }
    (0.5 * n2 * t, 0.5 * n2 * l)
}

impl IsotropicProfile {
    pub fn for_family(family: &PulseFamily, k0: f64, opts: &ProfileOptions) -> Result<Self> {
        match family.kind() {
            FamilyKind::ThermalLineshape { .. } => {
                let table = super::table::shared_table(family, k0)?;
                Ok(Self::from_table_with(&table, opts))
            }
            FamilyKind::GaussianLineshape { sigma } => {
                let env = DirectEnvelope::new(*family, k0, 0.0).with_rel_tol(1e-7);
                let r_max = 6.0 / sigma;
                let n = opts.direct_points.max(3);
                let r: Vec<f64> = (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect();
                let total = (2.0 * PI).powi(3) * family.mean_k(k0);
                Ok(Self::from_envelope(&env, r, opts, total))
            }
        }
    }

    pub(crate) fn from_table(table: &PartialWaveTable) -> Self {
        Self::from_table_with(table, &ProfileOptions::default())
    }

    fn from_table_with(table: &PartialWaveTable, opts: &ProfileOptions) -> Self {
        let reach = table.reach();
        let dr = 0.05;
        let n = (reach / dr).floor() as usize + 1;
        let r: Vec<f64> = (0..n).map(|i| i as f64 * dr).collect();
        let mean_k = crate::specfun::PI4_OVER_15 / (2.0 * crate::specfun::ZETA3);
        let total = (2.0 * PI).powi(3) * mean_k;
        let mut p = Self::from_envelope(table, r, opts, total);
        p.fit_tail();
        p
    }

    fn from_envelope(env: &dyn Envelope, r: Vec<f64>, opts: &ProfileOptions, total: f64) -> Self {
        let (ct, cw) = gauss_legendre(opts.theta_nodes);
        let vals: Vec<(f64, f64)> = r.par_iter().map(|&ri| averages(env, ri, &ct, &cw)).collect();
        let t_bar: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let l_bar: Vec<f64> = vals.iter().map(|v| v.1).collect();
        // Cumulative moments by Hermite-corrected trapezoid: the integrand
        // r²f and its derivative at the nodes give a fourth-order rule.
        let cum = |f: &[f64]| {
            let g: Vec<f64> = r.iter().zip(f).map(|(r, f)| r * r * f).collect();
            let dg = derivative(&r, &g);
            let mut c = vec![0.0; r.len()];
            for i in 1..r.len() {
                let h = r[i] - r[i - 1];
                c[i] = c[i - 1] + 0.5 * h * (g[i] + g[i - 1]) + h * h / 12.0 * (dg[i - 1] - dg[i]);
            }
            c
        };
        let cum_t = cum(&t_bar);
        let cum_l = cum(&l_bar);
        Self {
            r,
            t_bar,
            l_bar,
            cum_t,
            cum_l,
            tail_exponent: None,
            total,
        }
    }

    /// Fits T̄ ∝ r^{−p} on the outer quarter of the grid.
    fn fit_tail(&mut self) {
        let n = self.r.len();
        let start = 3 * n / 4;
        let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in start..n {
            if self.t_bar[i] <= 0.0 {
                continue;
            }
            let x = self.r[i].ln();
            let y = self.t_bar[i].ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1.0;
        }
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let p = -slope;
        self.tail_exponent = (p > 3.5).then_some(p);
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn t_bar(&self) -> &[f64] {
        &self.t_bar
    }

    pub fn l_bar(&self) -> &[f64] {
        &self.l_bar
    }

    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Parseval value of ∫|ℰ|² d³r.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// 4π∫₀^∞ r² T̄ dr from the profile itself (grid plus tail).
    pub fn profile_total(&self) -> f64 {
        4.0 * PI * self.cumulative(f64::INFINITY).0
    }

    /// (∫₀ʳ r′²T̄, ∫₀ʳ r′²L̄).
    pub fn cumulative(&self, r: f64) -> (f64, f64) {
        let n = self.r.len();
        let last = self.r[n - 1];
        if r >= last {
            let (ct, cl) = (self.cum_t[n - 1], self.cum_l[n - 1]);
            return match self.tail_exponent {
                Some(p) => {
                    // ∫_last^r r²·f(last)(r/last)^{−p}
                    let frac = if r.is_finite() { 1.0 - (r / last).powf(3.0 - p) } else { 1.0 };
                    let k = last.powi(3) / (p - 3.0) * frac;
                    (ct + self.t_bar[n - 1] * k, cl + self.l_bar[n - 1] * k)
                }
                None => (ct, cl),
            };
        }
        if r <= 0.0 {
            return (0.0, 0.0);
        }
        let i = match self.r.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => return (self.cum_t[i], self.cum_l[i]),
            Err(i) => i - 1,
        };
        let h = self.r[i + 1] - self.r[i];
        let s = (r - self.r[i]) / h;
        let herm = |c: &[f64], f: &[f64]| {
            let g0 = self.r[i] * self.r[i] * f[i];
            let g1 = self.r[i + 1] * self.r[i + 1] * f[i + 1];
            let s2 = s * s;
            let s3 = s2 * s;
            c[i] * (2.0 * s3 - 3.0 * s2 + 1.0)
                + g0 * h * (s3 - 2.0 * s2 + s)
                + c[i + 1] * (-2.0 * s3 + 3.0 * s2)
                + g1 * h * (s3 - s2)
        };
        (herm(&self.cum_t, &self.t_bar), herm(&self.cum_l, &self.l_bar))
    }

    /// Radius holding the fraction q of the Parseval total.
    pub fn radius_quantile(&self, q: f64) -> f64 {
        let target = q * self.total / (4.0 * PI);
        let n = self.r.len();
        if self.cum_t[n - 1] < target {
            let Some(p) = self.tail_exponent else {
                return f64::INFINITY;
            };
            let last = self.r[n - 1];
            let k = last.powi(3) / (p - 3.0);
            let frac = (target - self.cum_t[n - 1]) / (self.t_bar[n - 1] * k);
            if frac >= 1.0 {
                return f64::INFINITY;
            }
            return last * (1.0 - frac).powf(1.0 / (3.0 - p));
        }
        let i = self.cum_t.partition_point(|&c| c < target);
        let (mut lo, mut hi) = (self.r[i.saturating_sub(1)], self.r[i]);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid).0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Orientation-averaged μᵢ for a detector at the centre of a cube of
    /// half-side `half` (units of βħc). Dimensionless, as the profile.
    pub fn mu_cube(&self, half: f64) -> f64 {
        let (x, w) = gauss_legendre(48);
        let f = |r: f64, c: f64| {
            let (ct, cl) = self.cumulative(r);
            c * c * cl + (1.0 - c * c) * 0.5 * (ct - cl)
        };
        let mut perp = 0.0;
        let mut par = 0.0;
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                let (pu, pv) = (u * half, v * half);
                let r = (pu * pu + pv * pv + half * half).sqrt();
                let jac = wu * wv * half * half * half / (r * r * r);
                perp += jac * f(r, half / r);
                par += jac * f(r, pv / r);
            }
        }
        2.0 * perp + 4.0 * par
    }
}

fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        return d;
    }
    for i in 1..n - 1 {
        let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
        d[i] = (y[i + 1] * h0 * h0 - y[i - 1] * h1 * h1 + y[i] * (h1 * h1 - h0 * h0)) / (h0 * h1 * (h0 + h1));
    }
    let h = x[1] - x[0];
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    let h = x[n - 1] - x[n - 2];
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    d
}

/// μᵢ for one pulse orientation and a detector at `det` (units of βħc)
/// inside the cube of half-side `half` centred at the origin.
pub(crate) fn mu_oriented(env: &dyn Envelope, profile: &IsotropicProfile, frame: &Frame, det: Vec3, half: f64) -> [f64; 3] {
    let (x, w) = gauss_legendre(32);
    let reach = env.reach();
    // Radial rule: Gauss–Legendre panels of width ≤ 0.4.
    let (gx, gw) = gauss_legendre(8);
    let ray = |dir: Vec3, len: f64| -> [f64; 3] {
        let inner = len.min(reach);
        let panels = (inner / 0.4).ceil().max(1.0) as usize;
        let h = inner / panels as f64;
        let mut acc = [0.0; 3];
        for p in 0..panels {
            let c = (p as f64 + 0.5) * h;
            for (xi, wi) in gx.iter().zip(&gw) {
                let rho = c + 0.5 * h * xi;
                // Field at r − r₀ = −ρ·dir.
                let e = env.field([-rho * dir[0], -rho * dir[1], -rho * dir[2]], frame);
                let wt = 0.5 * h * wi * rho * rho;
                for i in 0..3 {
                    acc[i] += wt * e[i].norm_sqr();
                }
            }
        }
        if len > inner {
            // Orientation-averaged continuation past the table.
            let (t0, l0) = profile.cumulative(inner);
            let (t1, l1) = profile.cumulative(len);
            let (dt, dl) = (t1 - t0, l1 - l0);
            for i in 0..3 {
                let c = dir[i];
                acc[i] += c * c * dl + (1.0 - c * c) * 0.5 * (dt - dl);
            }
        }
        acc
    };
    let faces: Vec<(usize, f64)> = (0..3).flat_map(|a| [(a, -1.0), (a, 1.0)]).collect();
    let parts: Vec<[f64; 3]> = faces
        .par_iter()
        .map(|&(axis, sign)| {
            let plane = sign * half - det[axis];
            let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut acc = [0.0; 3];
            for (&u, &wu) in x.iter().zip(&w) {
                for (&v, &wv) in x.iter().zip(&w) {
                    let mut p = [0.0; 3];
                    p[axis] = plane;
                    p[a1] = u * half - det[a1];
                    p[a2] = v * half - det[a2];
                    let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    let dir = [p[0] / len, p[1] / len, p[2] / len];
                    let jac = wu * wv * half * half * plane.abs() / (len * len * len);
                    let r = ray(dir, len);
                    for i in 0..3 {
                        acc[i] += jac * r[i];
                    }
                }
            }
            acc
        })
        .collect();
    let mut mu = [0.0; 3];
    for p in parts {
        for i in 0..3 {
            mu[i] += p[i];
        }
    }
    mu
}
