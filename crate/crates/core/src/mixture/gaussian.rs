//! Mixtures of Gaussian-lineshape pulses: the linear map from the weight
//! density p(k₀) to the radial spectral density of G¹, and its
//! non-negative fit to the thermal spectrum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::nnls::{kkt_violation, nnls};
use super::{orientation_weights, WeightSpec};
use crate::error::{domain, Error, Result};
use crate::pulse::gaussian_angular_j;
use crate::quad::{composite_gauss_legendre, gauss_legendre};
use crate::specfun::bose_occupation;
use crate::thermal::Axis;
use crate::units::PhysicalContext;

/// (2π)³ · 8π²: Parseval factor times the measure of the direction law.
pub(crate) const MIXTURE_FACTOR: f64 = 64.0 * PI * PI * PI * PI * PI;

/// Radial spectral density of the thermal G¹ᵢᵢ in units of the squared field
/// unit: (8π/3) k³ n̄(k).
pub fn thermal_spectral_density(k: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    8.0 * PI / 3.0 * k * k * k * bose_occupation(k)
}

/// Angular integrals of exp(−|k − k₀m̂|²/σ²) against the squared local
/// components of k̂ × n̂ in the pulse frame: (2π∫x²…, π∫(1−x²)…).
pub(crate) fn gaussian_split(k: f64, k0: f64, sigma: f64) -> (f64, f64) {
    let d = (k - k0) / sigma;
    let e = (-d * d).exp();
    if e == 0.0 {
        return (0.0, 0.0);
    }
    let a = 2.0 * k * k0 / (sigma * sigma);
    let i0 = if a < 1e-8 { 2.0 - 2.0 * a } else { -(-2.0 * a).exp_m1() / a };
    let i2 = gaussian_angular_j(a) - i0;
    (2.0 * PI * e * i2, PI * e * (i0 - i2))
}

/// 𝒩̃² of a Gaussian family from a fixed Gauss–Legendre rule.
pub(crate) fn fast_norm_sq(k0: f64, sigma: f64) -> f64 {
    let lo = (k0 - 10.0 * sigma).max(0.0);
    let hi = k0 + 10.0 * sigma;
    let edges: Vec<f64> = (0..=8).map(|i| lo + (hi - lo) * i as f64 / 8.0).collect();
    let (x, w) = composite_gauss_legendre(&edges, 12);
    let m: f64 = x
        .iter()
        .zip(&w)
        .map(|(&k, &w)| {
            let (a, b) = gaussian_split(k, k0, sigma);
            w * k.powi(4) * (a + b)
        })
        .sum();
    1.0 / m
}

const NODE_LIMIT: usize = 20_000_000;

/// Hat-function discretization of p(k₀) with the k₀ integral done by
/// quadrature. Column j of the kernel is ∫dk₀ hⱼ(k₀) 𝒩̃²(k₀) T(k, k₀), where
/// T is the orientation-averaged transverse angular integral.
#[derive(Debug, Clone)]
pub struct GaussianKernel {
    sigma: f64,
    grid: Vec<f64>,
    nodes: Vec<f64>,
    node_weights: Vec<f64>,
    interval: Vec<usize>,
    orient: [f64; 2],
}

impl GaussianKernel {
    /// `grid` holds the dimensionless hat centres, strictly increasing.
    pub fn new(sigma: f64, grid: &[f64], axis: Axis) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return domain(format!("σ must be positive, got {sigma}"));
        }
        if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] >= 0.0) {
            return domain("k₀ grid must be non-negative and strictly increasing");
        }
        let (gx, gw) = gauss_legendre(6);
        let counts: Vec<usize> = grid.windows(2).map(|w| ((w[1] - w[0]) / (0.5 * sigma)).ceil() as usize).collect();
        let total: usize = counts.iter().sum::<usize>() * gx.len();
        if total > NODE_LIMIT {
            return Err(Error::Dimension(format!(
                "σ = {sigma:e} needs {total} quadrature nodes on this k₀ grid"
            )));
        }
        let mut nodes = Vec::with_capacity(total);
        let mut raw_w = Vec::with_capacity(total);
        let mut interval = Vec::with_capacity(total);
        for (j, w) in grid.windows(2).enumerate() {
            let h = (w[1] - w[0]) / counts[j] as f64;
            for p in 0..counts[j] {
                let c = w[0] + (p as f64 + 0.5) * h;
                for (x, wt) in gx.iter().zip(&gw) {
                    nodes.push(c + 0.5 * h * x);
                    raw_w.push(0.5 * h * wt);
                    interval.push(j);
                }
            }
        }
        let node_weights: Vec<f64> = nodes
            .par_iter()
            .zip(raw_w.par_iter())
            .map(|(&k0, &w)| w * fast_norm_sq(k0, sigma))
            .collect();
        let ow = orientation_weights(axis);
        Ok(Self {
            sigma,
            grid: grid.to_vec(),
            nodes,
            node_weights,
            interval,
            orient: [ow[1], ow[2]],
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Range of k outside which every column vanishes.
    pub fn support(&self) -> (f64, f64) {
        let w = 14.0 * self.sigma;
        ((self.grid[0] - w).max(0.0), self.grid[self.grid.len() - 1] + w)
    }

    /// All column values at wavenumber k, accumulated into `out`.
    pub fn row(&self, k: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let w = 14.0 * self.sigma;
        let lo = self.nodes.partition_point(|&x| x < k - w);
        let hi = self.nodes.partition_point(|&x| x <= k + w);
        for n in lo..hi {
            let k0 = self.nodes[n];
            let (a, b) = gaussian_split(k, k0, self.sigma);
            let t = self.node_weights[n] * (self.orient[0] * a + self.orient[1] * b);
            let j = self.interval[n];
            let s = (k0 - self.grid[j]) / (self.grid[j + 1] - self.grid[j]);
            out[j] += t * (1.0 - s);
            out[j + 1] += t * s;
        }
    }

    /// Spectral density Σⱼ pⱼ (2π)³8π² k⁵ Kⱼ(k) for hat coefficients `p`
    /// (dimensionless, |α|² = 1), in units of the squared field unit.
    pub fn density(&self, p: &[f64], k: f64) -> f64 {
        let mut row = vec![0.0; self.grid.len()];
        self.row(k, &mut row);
        MIXTURE_FACTOR * k.powi(5) * row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Grid choices for [`solve_gaussian_weights`], dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFitOptions {
    pub k0_min: f64,
    pub k0_max: f64,
    pub k0_points: usize,
    /// Rows per k₀ interval in the least-squares system.
    pub row_refine: usize,
}

impl Default for GaussianFitOptions {
    fn default() -> Self {
        Self {
            k0_min: 0.01,
            k0_max: 20.0,
            k0_points: 200,
            row_refine: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussianFit {
    pub sigma_per_m: f64,
    /// Central wavenumbers, 1/m.
    pub k0_grid: Vec<f64>,
    /// p(k₀) at the grid points for |α|² = 1, 1/m².
    pub p_of_k0: Vec<f64>,
    /// Relative L² mismatch of the spectral densities over the row grid.
    pub residual: f64,
    /// Largest KKT violation of the column-normalized problem.
    pub kkt_violation: f64,
    pub iterations: usize,
}

impl GaussianFit {
    pub fn weights(&self) -> Result<WeightSpec> {
        WeightSpec::gaussian(self.k0_grid.clone(), self.p_of_k0.clone(), 1.0)
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Fits non-negative weights p(k₀) so that a Gaussian-family trace-improper
/// mixture reproduces the thermal spectral density.
pub fn solve_gaussian_weights(ctx: &PhysicalContext, sigma_per_m: f64, opts: &GaussianFitOptions) -> Result<GaussianFit> {
    if !(opts.k0_min > 0.0 && opts.k0_max > opts.k0_min && opts.k0_points >= 3 && opts.row_refine >= 1) {
        return domain("invalid Gaussian fit grid");
    }
    let l = ctx.length_scale();
    let sigma = sigma_per_m * l;
    let grid = log_grid(opts.k0_min, opts.k0_max, opts.k0_points);
    let kernel = GaussianKernel::new(sigma, &grid, Axis::X)?;
    let rows = log_grid(opts.k0_min, opts.k0_max, (opts.k0_points - 1) * opts.row_refine + 1);
    let nr = rows.len();
    let nc = grid.len();
    // Trapezoid weights so that the row norm approximates the L² norm in k.
    let rw: Vec<f64> = (0..nr)
        .map(|i| {
            let left = if i > 0 { rows[i] - rows[i - 1] } else { 0.0 };
            let right = if i + 1 < nr { rows[i + 1] - rows[i] } else { 0.0 };
            (0.5 * (left + right)).sqrt()
        })
        .collect();
    let data: Vec<Vec<f64>> = rows
        .par_iter()
        .zip(rw.par_iter())
        .map(|(&k, &w)| {
            let mut r = vec![0.0; nc];
            kernel.row(k, &mut r);
            let f = w * MIXTURE_FACTOR * k.powi(5);
            r.iter_mut().for_each(|v| *v *= f);
            r
        })
        .collect();
    let mut a = DMatrix::from_fn(nr, nc, |i, j| data[i][j]);
    let b = DVector::from_fn(nr, |i, _| rw[i] * thermal_spectral_density(rows[i]));
    let bn = b.norm();
    let b = b / bn;
    let mut scale = vec![0.0; nc];
    for j in 0..nc {
        let n = a.column(j).norm();
        scale[j] = n;
        if n > 0.0 {
            a.column_mut(j).scale_mut(1.0 / n);
        }
    }
    let sol = nnls(&a, &b, 1e-12)?;
    let kkt = kkt_violation(&a, &b, &sol.x);
    let p: Vec<f64> = (0..nc)
        .map(|j| if scale[j] > 0.0 { sol.x[j] * bn / scale[j] / (l * l) } else { 0.0 })
        .collect();
    Ok(GaussianFit {
        sigma_per_m,
        k0_grid: grid.iter().map(|k| k / l).collect(),
        p_of_k0: p,
        residual: sol.residual_norm,
        kkt_violation: kkt,
        iterations: sol.iterations,
    })
}
