//! Monte Carlo estimates of mixture correlation functions.
//!
//! Every mixture member is a coherent state, so G¹ and G² of the mixture are
//! weighted averages of products of classical envelopes. Pulse centres are
//! drawn uniformly in a box, m̂ isotropically and Ψ uniformly. Samples are
//! generated in fixed-size chunks, each with its own ChaCha8 stream, so the
//! result depends only on the seed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::mixture::{WeightKind, WeightSpec};
use crate::pulse::{shared_table, shared_table_at, Envelope, FamilyKind, Gradient, PulseFamily, PulseParams, Vec3};
use crate::thermal::Axis;

const CHUNK: usize = 1024;

/// Axis-aligned sampling box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingBox {
    pub center: Vec3,
    pub half: Vec3,
}

impl SamplingBox {
    pub fn new(center: Vec3, half: Vec3) -> Result<Self> {
        if half.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return domain("box half-sides must be positive");
        }
        Ok(Self { center, half })
    }

    /// Cube of volume Ω centred at the origin.
    pub fn cube(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return domain(format!("volume must be positive, got {omega}"));
        }
        let h = 0.5 * omega.cbrt();
        Self::new([0.0; 3], [h; 3])
    }

    /// Box holding detectors at the origin and at `sep`·x̂ with `margin` of
    /// room on every side.
    pub fn around_pair(sep: f64, margin: f64) -> Result<Self> {
        if !(sep >= 0.0 && margin > 0.0) {
            return domain("separation must be ≥ 0 and margin > 0");
        }
        Self::new([0.5 * sep, 0.0, 0.0], [0.5 * sep + margin, margin, margin])
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half[0] * self.half[1] * self.half[2]
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| (p[i] - self.center[i]).abs() <= self.half[i])
    }

    fn scaled(&self, f: f64) -> Self {
        Self {
            center: self.center.map(|c| c * f),
            half: self.half.map(|h| h * f),
        }
    }

    /// Largest distance from `p` to a point of the box.
    pub fn max_distance(&self, p: Vec3) -> f64 {
        (0..3)
            .map(|i| {
                let d = (p[i] - self.center[i]).abs() + self.half[i];
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Draws one set of pulse parameters with r₀ uniform in the box, restricted
/// to x ∈ [x_lo, x_hi] when a slab is given.
fn draw<R: Rng>(rng: &mut R, region: &SamplingBox, slab: Option<(f64, f64)>) -> PulseParams {
    let mut r0 = [0.0; 3];
    for (i, r) in r0.iter_mut().enumerate() {
        let (lo, hi) = match (i, slab) {
            (0, Some(s)) => s,
            _ => (region.center[i] - region.half[i], region.center[i] + region.half[i]),
        };
        *r = lo + (hi - lo) * rng.random::<f64>();
    }
    let c: f64 = 1.0 - 2.0 * rng.random::<f64>();
    let phi = 2.0 * PI * rng.random::<f64>();
    let s = (1.0 - c * c).max(0.0).sqrt();
    let psi = 2.0 * PI * rng.random::<f64>();
    PulseParams::new(0.0, [s * phi.cos(), s * phi.sin(), c], psi, r0).expect("unit vector")
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A reproducible list of pulse draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub seed: u64,
    pub n_samples: usize,
    pub draws: Vec<PulseParams>,
}

impl SampleBatch {
    /// `n` draws with r₀ uniform in `region`, reproducible from `seed`.
    pub fn draw(region: &SamplingBox, n: usize, seed: u64) -> Self {
        let chunks = n.div_ceil(CHUNK);
        let draws = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = chunk_rng(seed, c as u64);
                let m = CHUNK.min(n - c * CHUNK);
                (0..m).map(move |_| draw(&mut rng, region, None)).collect::<Vec<_>>()
            })
            .collect();
        Self {
            seed,
            n_samples: n,
            draws,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError<T> {
    pub mean: T,
    pub std_error: f64,
    pub n: usize,
}

impl<T: Copy + std::ops::Mul<f64, Output = T>> EstimateWithError<T> {
    fn scaled(self, f: f64) -> Self {
        Self {
            mean: self.mean * f,
            std_error: self.std_error * f.abs(),
            n: self.n,
        }
    }
}

impl EstimateWithError<f64> {
    /// One-sided upper confidence bound mean + z·σ.
    pub fn upper_bound(&self, z: f64) -> f64 {
        self.mean + z * self.std_error
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: Complex64,
    sum_sq: f64,
    n: usize,
}

impl Moments {
    fn push(&mut self, v: Complex64) {
        self.sum += v;
        self.sum_sq += v.norm_sqr();
        self.n += 1;
    }

    fn merge(mut self, o: Moments) -> Moments {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.n += o.n;
        self
    }

    fn mean(&self) -> Complex64 {
        self.sum / self.n.max(1) as f64
    }

    /// Sample variance of one draw, E|z − m|².
    fn variance(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 2 {
            return 0.0;
        }
        ((self.sum_sq / n - self.mean().norm_sqr()) * n / (n - 1.0)).max(0.0)
    }
}

/// Partition of the sampling box into equal cells, with samples allocated
/// either evenly or in proportion to per-cell standard deviations measured
/// on a separate pilot run (Neyman allocation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stratification {
    pub cells: [usize; 3],
    /// Pilot draws per cell; 0 selects even allocation.
    pub pilot: usize,
}

impl Stratification {
    /// Plain uniform sampling.
    pub fn none() -> Self {
        Self { cells: [1, 1, 1], pilot: 0 }
    }

    /// Equal slabs along x with even allocation.
    pub fn along_x(slabs: usize) -> Self {
        Self {
            cells: [slabs.max(1), 1, 1],
            pilot: 0,
        }
    }

    pub fn with_pilot(mut self, pilot: usize) -> Self {
        self.pilot = pilot;
        self
    }

    fn count(&self) -> usize {
        self.cells.iter().product()
    }

    fn cell_box(&self, region: &SamplingBox, h: usize) -> SamplingBox {
        let idx = [h % self.cells[0], (h / self.cells[0]) % self.cells[1], h / (self.cells[0] * self.cells[1])];
        let mut center = [0.0; 3];
        let mut half = [0.0; 3];
        for i in 0..3 {
            half[i] = region.half[i] / self.cells[i] as f64;
            center[i] = region.center[i] - region.half[i] + (2 * idx[i] + 1) as f64 * half[i];
        }
        SamplingBox { center, half }
    }
}

/// Runs `counts[h]` draws in every cell `h`, in chunks with independent
/// streams tagged by `phase`.
fn sample_cells<F>(region: &SamplingBox, strat: &Stratification, counts: &[usize], seed: u64, phase: u64, f: &F) -> Vec<Moments>
where
    F: Fn(&PulseParams) -> Complex64 + Sync,
{
    let jobs: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(h, &n)| (0..n.div_ceil(CHUNK)).map(move |c| (h, c)))
        .collect();
    let parts: Vec<(usize, Moments)> = jobs
        .par_iter()
        .map(|&(h, c)| {
            let cell = strat.cell_box(region, h);
            let stream = (phase << 56) | ((h as u64) << 28) | c as u64;
            let mut rng = chunk_rng(seed, stream);
            let mut m = Moments::default();
            for _ in 0..CHUNK.min(counts[h] - c * CHUNK) {
                m.push(f(&draw(&mut rng, &cell, None)));
            }
            (h, m)
        })
        .collect();
    let mut out = vec![Moments::default(); counts.len()];
    for (h, m) in parts {
        out[h] = out[h].merge(m);
    }
    out
}

/// Stratified estimate of the uniform average of `f` over the box.
fn stratified_mean<F>(region: &SamplingBox, strat: &Stratification, n: usize, seed: u64, f: F) -> EstimateWithError<Complex64>
where
    F: Fn(&PulseParams) -> Complex64 + Sync,
{
    let cells = strat.count();
    let even = |total: usize| -> Vec<usize> { (0..cells).map(|h| total / cells + usize::from(h < total % cells)).collect() };
    let pilot_total = strat.pilot * cells;
    let counts = if strat.pilot == 0 || pilot_total >= n {
        even(n)
    } else {
        let pilot = sample_cells(region, strat, &vec![strat.pilot; cells], seed, 1, &f);
        let sd: Vec<f64> = pilot.iter().map(|m| m.variance().sqrt()).collect();
        let total: f64 = sd.iter().sum();
        let rest = n - pilot_total;
        if total > 0.0 {
            sd.iter().map(|s| ((rest as f64 * s / total).round() as usize).max(2)).collect()
        } else {
            even(rest)
        }
    };
    let main = sample_cells(region, strat, &counts, seed, 0, &f);
    let w = 1.0 / cells as f64;
    let mut mean = Complex64::new(0.0, 0.0);
    let mut var = 0.0;
    for m in &main {
        if m.n == 0 {
            continue;
        }
        mean += m.mean() * w;
        var += w * w * m.variance() / m.n as f64;
    }
    let used = main.iter().map(|m| m.n).sum::<usize>() + if strat.pilot == 0 || pilot_total >= n { 0 } else { pilot_total };
    EstimateWithError {
        mean,
        std_error: var.sqrt(),
        n: used,
    }
}

/// MC mean of (ℰᵢ(r, 0))* ℰᵢ(r, τ) over pulse centres uniform in `region`,
/// with all lengths in the envelopes' units. `env_tau` is the envelope at
/// time τ.
#[allow(clippy::too_many_arguments)]
pub fn mc_g1(
    env0: &dyn Envelope,
    env_tau: &dyn Envelope,
    region: &SamplingBox,
    r: Vec3,
    axis: Axis,
    n: usize,
    strat: &Stratification,
    seed: u64,
) -> EstimateWithError<Complex64> {
    let i = axis.index();
    stratified_mean(region, strat, n, seed, |p| {
        let d = [r[0] - p.r0[0], r[1] - p.r0[1], r[2] - p.r0[2]];
        let f = p.frame();
        env0.field(d, &f)[i].conj() * env_tau.field(d, &f)[i]
    })
}

/// MC mean of |ℰᵢ(0)|²|ℰᵢ(sep·x̂)|² over pulse centres uniform in `region`.
pub fn mc_g2(env: &dyn Envelope, region: &SamplingBox, sep: f64, axis: Axis, n: usize, strat: &Stratification, seed: u64) -> EstimateWithError<f64> {
    let i = axis.index();
    let e = stratified_mean(region, strat, n, seed, |p| {
        let f = p.frame();
        let a = env.field([-p.r0[0], -p.r0[1], -p.r0[2]], &f)[i].norm_sqr();
        let b = env.field([sep - p.r0[0], -p.r0[1], -p.r0[2]], &f)[i].norm_sqr();
        Complex64::new(a * b, 0.0)
    });
    EstimateWithError {
        mean: e.mean.re,
        std_error: e.std_error,
        n: e.n,
    }
}

/// Factor turning a uniform average over the box into the mixture value.
fn density_factor(weights: &WeightSpec, volume: f64) -> f64 {
    match weights.kind() {
        WeightKind::UnitTrace => weights.total_weight(),
        WeightKind::TraceImproper => volume * weights.total_weight(),
    }
}

fn check_family(family: &PulseFamily) -> Result<()> {
    match family.kind() {
        FamilyKind::ThermalLineshape { .. } => Ok(()),
        FamilyKind::GaussianLineshape { .. } => domain("Monte Carlo estimates need a tabulated (thermal-lineshape) family"),
    }
}

/// MC estimate of G¹ᵢᵢ(r, 0; r, τ) in (V/m)² for pulses centred in `region`
/// (metres), stratified on an 8×8×8 grid with Neyman allocation. Beyond the
/// table reach envelopes are taken as zero.
#[allow(clippy::too_many_arguments)]
pub fn estimate_g1_mix(
    family: &PulseFamily,
    weights: &WeightSpec,
    region: &SamplingBox,
    r_m: Vec3,
    tau_s: f64,
    axis: Axis,
    n: usize,
    seed: u64,
) -> Result<EstimateWithError<Complex64>> {
    check_family(family)?;
    if n < 100 {
        return domain("at least 100 samples are required");
    }
    let ctx = family.context();
    let l = ctx.length_scale();
    let reg = region.scaled(1.0 / l);
    let r = r_m.map(|v| v / l);
    let t = tau_s / ctx.time_scale();
    let env0 = shared_table(family, 0.0)?;
    let env_t = if t == 0.0 {
        env0.clone()
    } else {
        let reach = (reg.max_distance(r) + 1.0).min(64.0).ceil();
        shared_table_at(family, t, reach)?
    };
    let strat = Stratification {
        cells: [8, 8, 8],
        pilot: 16,
    };
    let est = mc_g1(&*env0, &*env_t, &reg, r, axis, n, &strat, seed);
    let e2 = ctx.field_unit().powi(2);
    Ok(est.scaled(weights.alpha_sq() * e2 * density_factor(weights, region.volume())))
}

/// MC estimate of G²ᵢᵢ for detectors at the origin and at `sep_m`·x̂, in
/// (V/m)⁴, stratified in `strata` slabs along x with Neyman allocation.
#[allow(clippy::too_many_arguments)]
pub fn estimate_g2_mix(
    family: &PulseFamily,
    weights: &WeightSpec,
    region: &SamplingBox,
    sep_m: f64,
    axis: Axis,
    n: usize,
    strata: usize,
    seed: u64,
) -> Result<EstimateWithError<f64>> {
    check_family(family)?;
    if n < 100 {
        return domain("at least 100 samples are required");
    }
    if !(sep_m >= 0.0) {
        return domain("separation must be non-negative");
    }
    let ctx = family.context();
    let l = ctx.length_scale();
    let env = shared_table(family, 0.0)?;
    let strat = Stratification::along_x(strata).with_pilot(32);
    let est = mc_g2(&*env, &region.scaled(1.0 / l), sep_m / l, axis, n, &strat, seed);
    let e4 = ctx.field_unit().powi(4);
    Ok(est.scaled(weights.alpha_sq().powi(2) * e4 * density_factor(weights, region.volume())))
}

/// Toy envelope with potential Φ = exp(−r²/2w²), so that ℰ = A ∇Φ × n̂ has
/// closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBlob {
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianBlob {
    /// ∫|ℰᵢ|² d³r averaged over orientations: A²π^{3/2}w/3.
    pub fn intensity_integral(&self) -> f64 {
        self.amplitude.powi(2) * PI.powf(1.5) * self.width / 3.0
    }

    /// ∫|ℰᵢ|⁴ d³r averaged over orientations: A⁴(π/2)^{3/2}/(10w).
    pub fn fourth_moment_integral(&self) -> f64 {
        self.amplitude.powi(4) * (0.5 * PI).powf(1.5) / (10.0 * self.width)
    }
}

impl Envelope for GaussianBlob {
    fn gradient(&self, r: f64, cos_theta: f64) -> Gradient {
        let w2 = self.width * self.width;
        let phi = (-0.5 * r * r / w2).exp();
        let st = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        Gradient {
            par: Complex64::new(-r * cos_theta / w2 * phi, 0.0),
            perp: Complex64::new(-r * st / w2 * phi, 0.0),
        }
    }

    fn reach(&self) -> f64 {
        f64::INFINITY
    }

    fn norm(&self) -> f64 {
        self.amplitude
    }
}

#[cfg(test)]
mod tests;
