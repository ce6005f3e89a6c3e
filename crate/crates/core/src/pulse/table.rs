//! Partial-wave tabulation of thermal-lineshape envelopes.
//!
//! For S(k) = l(k) υ(k̂·m̂) the potential Φ(r) = ∫d³k √k S e^{ik·r − ikt}
//! separates into
//!
//! ```text
//! Φ(r, θ) = Σ_l 4π iˡ v_l P_l(cos θ) R_l(r),
//! v_l = (2l+1)/2 ∫υ P_l,   R_l(r) = ∫ k^{5/2} l(k) e^{−ikt} j_l(kr) dk,
//! ```
//!
//! with θ measured from m̂. The table stores R_l′ and R_l/r together with
//! their r-derivatives on a uniform grid and interpolates with cubic
//! Hermite polynomials.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use super::profile::IsotropicProfile;
use super::{Envelope, FamilyKind, Gradient, PulseFamily, Upsilon};
use crate::error::{domain, Result};
use crate::quad::{composite_gauss_legendre, gauss_legendre};
use crate::specfun::{legendre_seq, spherical_bessel_seq};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    /// Largest tabulated radius, units of βħc.
    pub r_max: f64,
    /// Grid spacing in r.
    pub dr: f64,
    /// Upper limit of the k integral.
    pub k_max: f64,
    /// Gauss–Legendre order per k panel.
    pub order: usize,
    /// Largest k panel width; panels are also kept below `phase / (r + |t|)`.
    pub max_panel: f64,
    pub phase: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            r_max: 64.0,
            dr: 0.05,
            k_max: 70.0,
            order: 8,
            max_panel: 0.5,
            phase: 2.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PartialWaveTable {
    coef: Vec<Complex64>,
    lmax: usize,
    dr: f64,
    n: usize,
    /// Per grid point and l: [R′, R″, R/r, (R/r)′].
    data: Vec<[Complex64; 4]>,
    norm: f64,
    t: f64,
    upsilon: Upsilon,
}

/// Legendre coefficients v_l = (2l+1)/2 ∫υ P_l of a direction spread,
/// truncated once they fall below 1e-14 of the largest.
pub fn legendre_coefficients(upsilon: &Upsilon) -> Vec<f64> {
    let lcap = 200;
    let mut edges = upsilon.breakpoints();
    // Panels no wider than 0.1 so that high-order P_l are resolved.
    let mut fine = vec![edges[0]];
    for p in edges.windows(2) {
        let n = ((p[1] - p[0]) / 0.1).ceil().max(1.0) as usize;
        for j in 1..=n {
            fine.push(p[0] + (p[1] - p[0]) * j as f64 / n as f64);
        }
    }
    edges = fine;
    let (x, w) = composite_gauss_legendre(&edges, 24);
    let mut v = vec![0.0; lcap + 1];
    let mut p = vec![0.0; lcap + 1];
    let mut dp = vec![0.0; lcap + 1];
    for (&x, &w) in x.iter().zip(&w) {
        let u = w * upsilon.eval(x);
        legendre_seq(lcap, x, &mut p, &mut dp);
        for l in 0..=lcap {
            v[l] += u * p[l];
        }
    }
    for (l, vl) in v.iter_mut().enumerate() {
        *vl *= (2 * l + 1) as f64 / 2.0;
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let last = v.iter().rposition(|x| x.abs() > 1e-14 * vmax).unwrap_or(0);
    v.truncate(last + 1);
    v
}

// Power-series pieces of j_l at small z: returns (j_l/z, j_l′, j_l″, j_l′/z − j_l/z²).
fn small_z(l: usize, z: f64) -> [f64; 4] {
    let mut a = 1.0;
    for i in 1..=l {
        a /= (2 * i + 1) as f64;
    }
    let mut out = [0.0; 4];
    for m in 0..5 {
        let e = (l + 2 * m) as i32;
        let ef = e as f64;
        let zp = |k: i32| if k == 0 { 1.0 } else if z == 0.0 { 0.0 } else { z.powi(k) };
        if e >= 1 {
            out[0] += a * zp(e - 1);
            out[1] += a * ef * zp(e - 1);
        }
        if e >= 2 {
            out[2] += a * ef * (ef - 1.0) * zp(e - 2);
            out[3] += a * (ef - 1.0) * zp(e - 2);
        }
        a *= -1.0 / ((2 * (m + 1)) as f64 * (2 * l + 2 * m + 3) as f64);
    }
    out
}

impl PartialWaveTable {
    /// Builds the table for a thermal-lineshape family at dimensionless time t.
    pub fn build(family: &PulseFamily, t: f64, opts: &TableOptions) -> Result<Self> {
        let FamilyKind::ThermalLineshape { upsilon } = family.kind() else {
            return domain("partial-wave tables need the thermal lineshape");
        };
        if !(opts.r_max > 0.0 && opts.dr > 0.0 && opts.order >= 2) {
            return domain("invalid table options");
        }
        let v = legendre_coefficients(&upsilon);
        let lmax = v.len() - 1;
        let coef: Vec<Complex64> = v
            .iter()
            .enumerate()
            .map(|(l, &vl)| 4.0 * std::f64::consts::PI * vl * Complex64::i().powi(l as i32))
            .collect();
        let n = (opts.r_max / opts.dr).ceil() as usize + 1;
        let dr = opts.dr;
        let (gx, gw) = gauss_legendre(opts.order);
        let rows: Vec<Vec<[Complex64; 4]>> = (0..n)
            .into_par_iter()
            .map(|i| Self::row(i as f64 * dr, t, lmax, opts, &gx, &gw))
            .collect();
        let data = rows.into_iter().flatten().collect();
        Ok(Self {
            coef,
            lmax,
            dr,
            n,
            data,
            norm: family.norm_sq(0.0).sqrt(),
            t,
            upsilon,
        })
    }

    fn row(r: f64, t: f64, lmax: usize, opts: &TableOptions, gx: &[f64], gw: &[f64]) -> Vec<[Complex64; 4]> {
        let freq = r + t.abs();
        let width = if freq > 0.0 { opts.max_panel.min(opts.phase / freq) } else { opts.max_panel };
        let panels = (opts.k_max / width).ceil() as usize;
        let h = opts.k_max / panels as f64;
        let mut acc = vec![[Complex64::new(0.0, 0.0); 4]; lmax + 1];
        let mut j = vec![0.0; lmax + 2];
        for p in 0..panels {
            let c = (p as f64 + 0.5) * h;
            for (xi, wi) in gx.iter().zip(gw) {
                let k = c + 0.5 * h * xi;
                // k^{5/2} l(k) = k^{3/2}/√(eᵏ−1)
                let g = k * (k / k.exp_m1()).sqrt();
                let w = Complex64::from_polar(0.5 * h * wi * g, -k * t);
                let z = k * r;
                if z < 0.02 {
                    for l in 0..=lmax {
                        let s = small_z(l, z);
                        let e = &mut acc[l];
                        e[0] += w * (k * s[1]);
                        e[1] += w * (k * k * s[2]);
                        e[2] += w * (k * s[0]);
                        e[3] += w * (k * k * s[3]);
                    }
                    continue;
                }
                spherical_bessel_seq(lmax + 1, z, &mut j);
                let zi = 1.0 / z;
                for l in 0..=lmax {
                    let lf = l as f64;
                    let jl = j[l];
                    let d1 = lf * zi * jl - j[l + 1];
                    let d2 = -2.0 * zi * d1 - (1.0 - lf * (lf + 1.0) * zi * zi) * jl;
                    let e = &mut acc[l];
                    e[0] += w * (k * d1);
                    e[1] += w * (k * k * d2);
                    e[2] += w * (k * jl * zi);
                    e[3] += w * (k * k * (d1 * zi - jl * zi * zi));
                }
            }
        }
        // l = 0 terms of R/r are never used (they multiply P₀′ = 0).
        acc[0][2] = Complex64::new(0.0, 0.0);
        acc[0][3] = Complex64::new(0.0, 0.0);
        acc
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn upsilon(&self) -> Upsilon {
        self.upsilon
    }

    /// Interpolated [R_l′(r), R_l(r)/r].
    fn radial(&self, l: usize, cell: usize, s: f64) -> [Complex64; 2] {
        let a = &self.data[cell * (self.lmax + 1) + l];
        let b = &self.data[(cell + 1) * (self.lmax + 1) + l];
        let h = self.dr;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        [
            a[0] * h00 + a[1] * (h10 * h) + b[0] * h01 + b[1] * (h11 * h),
            a[2] * h00 + a[3] * (h10 * h) + b[2] * h01 + b[3] * (h11 * h),
        ]
    }

    pub fn profile(&self) -> IsotropicProfile {
        IsotropicProfile::from_table(self)
    }
}

impl Envelope for PartialWaveTable {
    fn gradient(&self, r: f64, cos_theta: f64) -> Gradient {
        let zero = Complex64::new(0.0, 0.0);
        if !(r <= self.reach()) {
            return Gradient { par: zero, perp: zero };
        }
        let x = r / self.dr;
        let cell = (x.floor() as usize).min(self.n - 2);
        let s = x - cell as f64;
        let ct = cos_theta.clamp(-1.0, 1.0);
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let mut p = [0.0; 256];
        let mut dp = [0.0; 256];
        legendre_seq(self.lmax, ct, &mut p, &mut dp);
        let mut d_r = zero;
        let mut d_th = zero;
        for l in 0..=self.lmax {
            let rad = self.radial(l, cell, s);
            let c = self.coef[l];
            d_r += c * rad[0] * p[l];
            d_th -= c * rad[1] * (st * dp[l]);
        }
        Gradient {
            par: d_r * ct - d_th * st,
            perp: d_r * st + d_th * ct,
        }
    }

    fn reach(&self) -> f64 {
        (self.n - 1) as f64 * self.dr
    }

    fn norm(&self) -> f64 {
        self.norm
    }
}

/// Memoized t = 0 tables with default options, keyed by direction spread.
pub(crate) fn shared_table(family: &PulseFamily, _k0: f64) -> Result<Arc<PartialWaveTable>> {
    shared_table_at(family, 0.0, TableOptions::default().r_max)
}

/// Memoized tables at dimensionless time `t` reaching at least `r_max`.
pub(crate) fn shared_table_at(family: &PulseFamily, t: f64, r_max: f64) -> Result<Arc<PartialWaveTable>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<PartialWaveTable>>>> = OnceLock::new();
    let FamilyKind::ThermalLineshape { upsilon } = family.kind() else {
        return domain("partial-wave tables need the thermal lineshape");
    };
    let key = format!("{upsilon:?}/{:x}/{:x}", t.to_bits(), r_max.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let opts = TableOptions {
        r_max,
        ..TableOptions::default()
    };
    let table = Arc::new(PartialWaveTable::build(family, t, &opts)?);
    cache
        .lock()
        .expect("table cache poisoned")
        .entry(key)
        .or_insert(table.clone());
    Ok(table)
}
