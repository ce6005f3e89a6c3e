//! Mixtures of coherent pulses.
//!
//! A trace-improper mixture ∫ds∫d³r₀ p̄(s)|αf⟩⟨αf| has, at equal space points,
//!
//! ```text
//! G¹ᵢᵢ(τ) = |α|² ∫ds p̄(s) (2π)³ 𝒩̃² ∫d³k k S(k)² |(k × n̂)ᵢ|² e^{−ikτ}
//! ```
//!
//! after the r₀ integral collapses the double k integral. The direction law
//! is isotropic in m̂ and uniform in Ψ, so ∫ds covers a measure of 8π².

mod gaussian;
mod nnls;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use gaussian::{
    solve_gaussian_weights, thermal_spectral_density, GaussianFit, GaussianFitOptions, GaussianKernel,
};
pub use nnls::{kkt_violation, nnls, NnlsSolution};

use crate::error::{domain, Result};
use crate::pulse::{graded_breaks, mu_integral_averaged, FamilyKind, PulseFamily, PulseParams, Upsilon};
use crate::quad::{composite_gauss_legendre, gauss_legendre, Integrator};
use crate::specfun::{bose_moment, ZETA3};
use crate::thermal::{g1_temporal, Axis};
use crate::units::PhysicalContext;

/// Measure of the direction law, ∫dm̂∫dΨ.
pub const DIRECTION_MEASURE: f64 = 8.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightKind {
    /// 𝔭(s)/Ω with ∫ds 𝔭 = 1 over a finite volume Ω.
    UnitTrace,
    /// p̄(s) with ∫ds p̄ = 1/𝒱 over all space.
    TraceImproper,
}

/// Weights of a pulse mixture. Directions are always isotropic in m̂ and
/// uniform in Ψ; the mixture uses `alpha_sq` for |α|².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSpec {
    kind: WeightKind,
    /// Central wavenumbers, 1/m (Gaussian families).
    k0_grid: Vec<f64>,
    /// p(k₀) at `k0_grid`, linear in between, 1/m² (trace-improper) or m
    /// (unit-trace).
    p_of_k0: Vec<f64>,
    /// Constant weight per unit direction measure, 1/m³ (thermal,
    /// trace-improper) or dimensionless (unit-trace).
    p_const: f64,
    /// 𝒱 in m³ (trace-improper).
    cal_v: f64,
    alpha_sq: f64,
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

fn check_alpha(alpha_sq: f64) -> Result<()> {
    if !(alpha_sq >= 0.0 && alpha_sq.is_finite()) {
        return domain(format!("|α|² must be non-negative, got {alpha_sq}"));
    }
    Ok(())
}

impl WeightSpec {
    /// Trace-improper weights for thermal-lineshape families with constant
    /// p (1/m³).
    pub fn thermal(p_per_m3: f64, alpha_sq: f64) -> Result<Self> {
        check_alpha(alpha_sq)?;
        if !(p_per_m3 > 0.0 && p_per_m3.is_finite()) {
            return domain(format!("p must be positive, got {p_per_m3}"));
        }
        Ok(Self {
            kind: WeightKind::TraceImproper,
            k0_grid: Vec::new(),
            p_of_k0: Vec::new(),
            p_const: p_per_m3,
            cal_v: 1.0 / (DIRECTION_MEASURE * p_per_m3),
            alpha_sq,
        })
    }

    /// Thermal weights with p|α|² = [`matching_product`].
    pub fn thermal_matching(ctx: &PhysicalContext, alpha_sq: f64) -> Result<Self> {
        if !(alpha_sq > 0.0) {
            return domain("|α|² must be positive to fix p");
        }
        Self::thermal(matching_product(ctx) / alpha_sq, alpha_sq)
    }

    /// Thermal weights with p|α|² = [`stated_product`].
    pub fn thermal_stated(ctx: &PhysicalContext, alpha_sq: f64) -> Result<Self> {
        if !(alpha_sq > 0.0) {
            return domain("|α|² must be positive to fix p");
        }
        Self::thermal(stated_product(ctx) / alpha_sq, alpha_sq)
    }

    /// Trace-improper weights for Gaussian families: p(k₀) in 1/m² on a
    /// strictly increasing grid of central wavenumbers in 1/m.
    pub fn gaussian(k0_grid: Vec<f64>, p_of_k0: Vec<f64>, alpha_sq: f64) -> Result<Self> {
        check_alpha(alpha_sq)?;
        if k0_grid.len() != p_of_k0.len() || k0_grid.len() < 2 {
            return domain("k₀ grid and weights must have equal length ≥ 2");
        }
        if k0_grid.windows(2).any(|w| !(w[1] > w[0])) || !(k0_grid[0] > 0.0) {
            return domain("k₀ grid must be positive and strictly increasing");
        }
        if p_of_k0.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return domain("weights must be non-negative");
        }
        let total = DIRECTION_MEASURE * trapezoid(&k0_grid, &p_of_k0);
        if !(total > 0.0) {
            return domain("weights integrate to zero");
        }
        Ok(Self {
            kind: WeightKind::TraceImproper,
            k0_grid,
            p_of_k0,
            p_const: 0.0,
            cal_v: 1.0 / total,
            alpha_sq,
        })
    }

    /// Unit-trace weights 𝔭 = 1/(8π²) over directions, for thermal-lineshape
    /// families.
    pub fn unit_trace(alpha_sq: f64) -> Result<Self> {
        check_alpha(alpha_sq)?;
        Ok(Self {
            kind: WeightKind::UnitTrace,
            k0_grid: Vec::new(),
            p_of_k0: Vec::new(),
            p_const: 1.0 / DIRECTION_MEASURE,
            cal_v: f64::NAN,
            alpha_sq,
        })
    }

    /// Unit-trace weights for a Gaussian family with a single central
    /// wavenumber (1/m).
    pub fn unit_trace_at(k0_per_m: f64, alpha_sq: f64) -> Result<Self> {
        if !(k0_per_m > 0.0 && k0_per_m.is_finite()) {
            return domain("central wavenumber must be positive");
        }
        let mut w = Self::unit_trace(alpha_sq)?;
        w.k0_grid = vec![k0_per_m];
        Ok(w)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn p_const(&self) -> f64 {
        self.p_const
    }

    pub fn k0_grid(&self) -> &[f64] {
        &self.k0_grid
    }

    pub fn p_of_k0(&self) -> &[f64] {
        &self.p_of_k0
    }

    /// 𝒱 in m³ (NaN for unit-trace weights).
    pub fn cal_v(&self) -> f64 {
        self.cal_v
    }

    /// ∫ds of the weight: 1 for unit-trace, 1/𝒱 for trace-improper.
    pub fn total_weight(&self) -> f64 {
        if self.p_of_k0.is_empty() {
            DIRECTION_MEASURE * self.p_const
        } else {
            DIRECTION_MEASURE * trapezoid(&self.k0_grid, &self.p_of_k0)
        }
    }

    /// Checks the normalization invariant to 1e-10.
    pub fn validate(&self) -> Result<()> {
        let target = match self.kind {
            WeightKind::UnitTrace => 1.0,
            WeightKind::TraceImproper => 1.0 / self.cal_v,
        };
        let t = self.total_weight();
        if !((t - target).abs() <= 1e-10 * target) {
            return domain(format!("weights integrate to {t:e}, expected {target:e}"));
        }
        Ok(())
    }

    /// The same weights with p multiplied by `f`; 𝒱 follows.
    pub fn scaled(&self, f: f64) -> Result<Self> {
        if !(f > 0.0 && f.is_finite()) {
            return domain("scale factor must be positive");
        }
        let mut w = self.clone();
        w.p_const *= f;
        w.p_of_k0.iter_mut().for_each(|p| *p *= f);
        if w.kind == WeightKind::TraceImproper {
            w.cal_v /= f;
        }
        Ok(w)
    }

    pub fn with_alpha_sq(&self, alpha_sq: f64) -> Result<Self> {
        check_alpha(alpha_sq)?;
        let mut w = self.clone();
        w.alpha_sq = alpha_sq;
        Ok(w)
    }
}

/// p|α|² = ζ(3)/(4π⁴(βħc)³) in 1/m³: the product for which a thermal-lineshape
/// trace-improper mixture reproduces the thermal G¹ at equal points.
pub fn matching_product(ctx: &PhysicalContext) -> f64 {
    ZETA3 / (4.0 * PI.powi(4) * ctx.length_scale().powi(3))
}

/// p|α|² = 4ζ(3)/(π⁴(βħc)³) in 1/m³, the value usually quoted alongside the
/// lineshape l(k) = 1/(k√(e^{βħck} − 1)). Sixteen times [`matching_product`].
pub fn stated_product(ctx: &PhysicalContext) -> f64 {
    4.0 * ZETA3 / (PI.powi(4) * ctx.length_scale().powi(3))
}

/// Averages of (x′ᵢ)², (y′ᵢ)², (z′ᵢ)² over the direction law, where
/// x′ = n̂, y′ = m̂ × n̂, z′ = m̂ and i is a world axis; by quadrature over
/// the sphere of m̂ and the circle of Ψ.
pub fn orientation_weights(axis: Axis) -> [f64; 3] {
    let (cx, cw) = gauss_legendre(6);
    let nphi = 8;
    let i = axis.index();
    let mut acc = [0.0; 3];
    for (&c, &w) in cx.iter().zip(&cw) {
        let s = (1.0 - c * c).sqrt();
        for a in 0..nphi {
            let phi = 2.0 * PI * (a as f64 + 0.5) / nphi as f64;
            let m = [s * phi.cos(), s * phi.sin(), c];
            for b in 0..nphi {
                let psi = 2.0 * PI * b as f64 / nphi as f64;
                let p = PulseParams::new(0.0, m, psi, [0.0; 3]).expect("unit vector");
                let f = p.frame();
                let dw = w * (2.0 * PI / nphi as f64) * (2.0 * PI / nphi as f64);
                for (ax, slot) in f.axes.iter().zip(acc.iter_mut()) {
                    *slot += dw * ax[i] * ax[i];
                }
            }
        }
    }
    acc.map(|v| v / DIRECTION_MEASURE)
}

/// Local angular integrals of υ² against the squared components of k̂ × n̂:
/// (2π∫υ²x² dx, π∫υ²(1−x²) dx). Their sum is the angular norm A.
pub fn thermal_split(upsilon: &Upsilon) -> (f64, f64) {
    let mut edges = vec![-1.0];
    edges.extend(graded_breaks(upsilon.width()).into_iter().filter(|&b| b > -1.0));
    let (x, w) = composite_gauss_legendre(&edges, 20);
    let mut a = 0.0;
    let mut b = 0.0;
    for (&x, &w) in x.iter().zip(&w) {
        let u = upsilon.eval(x);
        a += w * u * u * x * x;
        b += w * u * u * (1.0 - x * x);
    }
    (2.0 * PI * a, PI * b)
}

/// Equal-point diagonal G¹ᵢᵢ(τ) of a trace-improper mixture, in (V/m)².
pub fn g1_improper(family: &PulseFamily, weights: &WeightSpec, tau_s: f64, axis: Axis) -> Result<Complex64> {
    if weights.kind != WeightKind::TraceImproper {
        return domain("g1_improper needs trace-improper weights");
    }
    let ctx = family.context();
    let l = ctx.length_scale();
    let e2 = ctx.field_unit().powi(2);
    let u = tau_s / ctx.time_scale();
    let ow = orientation_weights(axis);
    match family.kind() {
        FamilyKind::ThermalLineshape { upsilon } => {
            if !weights.p_of_k0.is_empty() {
                return domain("thermal families take constant weights");
            }
            let (a, b) = thermal_split(&upsilon);
            let p = weights.p_const * l.powi(3);
            let radial = bose_moment(3, u)?;
            let f = weights.alpha_sq
                * p
                * DIRECTION_MEASURE
                * (2.0 * PI).powi(3)
                * family.norm_sq(0.0)
                * (ow[1] * a + ow[2] * b);
            Ok(radial * (f * e2))
        }
        FamilyKind::GaussianLineshape { sigma } => {
            if weights.p_of_k0.is_empty() {
                return domain("Gaussian families need k₀-dependent weights");
            }
            let grid: Vec<f64> = weights.k0_grid.iter().map(|k| k * l).collect();
            let p: Vec<f64> = weights.p_of_k0.iter().map(|p| p * l * l).collect();
            let kernel = GaussianKernel::new(sigma, &grid, axis)?;
            let (lo, hi) = kernel.support();
            let step = if u != 0.0 { (PI / u.abs()).min(0.25) } else { 0.25 };
            let mut breaks = vec![lo];
            let mut b = lo + step;
            while b < hi {
                breaks.push(b);
                b += step;
            }
            breaks.push(hi);
            breaks.extend(grid.iter().copied().filter(|&g| g > lo && g < hi));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let f = |k: f64| Complex64::from_polar(kernel.density(&p, k), -k * u);
            let est = Integrator::new(1e-14, 1e-10)
                .with_max_intervals(breaks.len() * 8 + 2000)
                .integrate_lenient(&f, &breaks);
            Ok(est.value * (weights.alpha_sq * e2))
        }
    }
}

/// Radial spectral density of a trace-improper mixture's G¹ᵢᵢ at
/// dimensionless k, in units of the squared field unit.
pub fn improper_spectral_density(family: &PulseFamily, weights: &WeightSpec, k: f64, axis: Axis) -> Result<f64> {
    let g0 = g1_improper(family, weights, 0.0, axis)?.re;
    match family.kind() {
        FamilyKind::ThermalLineshape { .. } => {
            let ctx = family.context();
            let th0 = g1_temporal(ctx, 0.0).re;
            Ok(g0 / th0 * thermal_spectral_density(k))
        }
        FamilyKind::GaussianLineshape { sigma } => {
            let l = family.context().length_scale();
            let grid: Vec<f64> = weights.k0_grid.iter().map(|k| k * l).collect();
            let p: Vec<f64> = weights.p_of_k0.iter().map(|p| p * l * l).collect();
            let kernel = GaussianKernel::new(sigma, &grid, axis)?;
            Ok(weights.alpha_sq * kernel.density(&p, k))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    /// ‖G¹_imp − G¹_th‖₂/‖G¹_th‖₂ over the τ grid.
    pub residual: f64,
    /// Relative L² mismatch of the radial spectral densities over k ∈ (0, 40].
    pub spectral_residual: f64,
    pub tau_grid: Vec<f64>,
    pub g1_imp: Vec<Complex64>,
    pub g1_th: Vec<Complex64>,
}

/// Compares a trace-improper mixture with thermal light on a delay grid (s).
pub fn simulation_residual(family: &PulseFamily, weights: &WeightSpec, tau_grid: &[f64], axis: Axis) -> Result<SimulationReport> {
    if tau_grid.is_empty() {
        return domain("τ grid must not be empty");
    }
    let ctx = family.context();
    let mut g1_imp = Vec::with_capacity(tau_grid.len());
    let mut g1_th = Vec::with_capacity(tau_grid.len());
    let (mut num, mut den) = (0.0, 0.0);
    for &t in tau_grid {
        let a = g1_improper(family, weights, t, axis)?;
        let b = g1_temporal(ctx, t);
        num += (a - b).norm_sqr();
        den += b.norm_sqr();
        g1_imp.push(a);
        g1_th.push(b);
    }
    let spectral_residual = spectral_mismatch(family, weights, axis)?;
    Ok(SimulationReport {
        residual: (num / den).sqrt(),
        spectral_residual,
        tau_grid: tau_grid.to_vec(),
        g1_imp,
        g1_th,
    })
}

fn spectral_mismatch(family: &PulseFamily, weights: &WeightSpec, axis: Axis) -> Result<f64> {
    let edges: Vec<f64> = (0..=160).map(|i| 0.25 * i as f64).collect();
    let (k, w) = composite_gauss_legendre(&edges, 8);
    let (mut num, mut den) = (0.0, 0.0);
    match family.kind() {
        FamilyKind::ThermalLineshape { .. } => {
            let ratio = improper_spectral_density(family, weights, 1.0, axis)? / thermal_spectral_density(1.0);
            for (&k, &w) in k.iter().zip(&w) {
                let t = thermal_spectral_density(k);
                num += w * ((ratio - 1.0) * t).powi(2);
                den += w * t * t;
            }
        }
        FamilyKind::GaussianLineshape { sigma } => {
            let l = family.context().length_scale();
            let grid: Vec<f64> = weights.k0_grid.iter().map(|k| k * l).collect();
            let p: Vec<f64> = weights.p_of_k0.iter().map(|p| p * l * l).collect();
            let kernel = GaussianKernel::new(sigma, &grid, axis)?;
            for (&k, &w) in k.iter().zip(&w) {
                let t = thermal_spectral_density(k);
                let s = weights.alpha_sq * kernel.density(&p, k);
                num += w * (s - t).powi(2);
                den += w * t * t;
            }
        }
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingCurve {
    /// Cube volumes, m³.
    pub omega: Vec<f64>,
    /// G¹_mix(0,0; 0,0) at fixed |α|², (V/m)².
    pub g1_mix: Vec<f64>,
    /// The same with |α|² ∝ Ω, anchored at the first volume.
    pub compensated: Vec<f64>,
}

impl ScalingCurve {
    /// Least-squares slope of log G¹_mix against log Ω.
    pub fn log_slope(&self) -> f64 {
        log_log_slope(&self.omega, &self.g1_mix)
    }
}

pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// G¹_mix at the centre of cubes of volume Ω for a unit-trace mixture:
/// (1/Ω)∫ds 𝔭(s) μᵢ(0, s, Ω).
pub fn unit_trace_scaling(family: &PulseFamily, weights: &WeightSpec, omega_list: &[f64]) -> Result<ScalingCurve> {
    if weights.kind != WeightKind::UnitTrace {
        return domain("unit_trace_scaling needs unit-trace weights");
    }
    if omega_list.is_empty() || omega_list.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("volumes must be strictly increasing");
    }
    let k0 = match family.kind() {
        FamilyKind::ThermalLineshape { .. } => 0.0,
        FamilyKind::GaussianLineshape { .. } => match weights.k0_grid.as_slice() {
            [k0] => *k0,
            _ => return domain("unit-trace Gaussian weights need a single k₀"),
        },
    };
    let unit = family.with_alpha(Complex64::new(1.0, 0.0));
    let mut g1 = Vec::with_capacity(omega_list.len());
    for &omega in omega_list {
        let mu = mu_integral_averaged(&unit, k0, omega)?;
        g1.push(weights.alpha_sq * weights.total_weight() * mu / omega);
    }
    let compensated = omega_list.iter().zip(&g1).map(|(o, g)| g * o / omega_list[0]).collect();
    Ok(ScalingCurve {
        omega: omega_list.to_vec(),
        g1_mix: g1,
        compensated,
    })
}

#[cfg(test)]
mod tests;
