//! Correlation functions of blackbody radiation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::quad::Integrator;
use crate::specfun::{bose_moment, bose_occupation, longitudinal_kernel, transverse_kernel, PI4_OVER_15};
use crate::units::{PhysicalContext, C, EPSILON0, HBAR};

/// A 3×3 block of first-order correlations Gᵢⱼ in SI units (V²/m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationTensor {
    pub values: [[Complex64; 3]; 3],
}

impl CorrelationTensor {
    pub fn diagonal(&self, i: Axis) -> Complex64 {
        self.values[i.index()][i.index()]
    }

    pub fn trace(&self) -> Complex64 {
        (0..3).map(|i| self.values[i][i]).sum()
    }

    /// The tensor for the swapped argument pair, G†.
    pub fn adjoint(&self) -> Self {
        let mut values = self.values;
        for (i, row) in values.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.values[j][i].conj();
            }
        }
        Self { values }
    }
}

/// Cartesian component label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> [f64; 3] {
        let mut e = [0.0; 3];
        e[self.index()] = 1.0;
        e
    }
}

/// Equal-time second-order correlation G²ᵢᵢᵢᵢ at separation R along axis i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Value {
    /// (V/m)⁴
    pub value: f64,
    /// The large-separation limit G¹ᵢᵢ(0)², same units.
    pub asymptote: f64,
    pub separation_m: f64,
    pub component: Axis,
}

impl G2Value {
    pub fn normalized(&self) -> f64 {
        self.value / self.asymptote
    }
}

/// ħc/(6π²ε₀(βħc)⁴): the prefactor turning B₃ into G¹ᵢᵢ.
fn temporal_prefactor(ctx: &PhysicalContext) -> f64 {
    HBAR * C / (6.0 * PI * PI * EPSILON0 * ctx.length_scale().powi(4))
}

/// ħc/(4π²ε₀(βħc)⁴): prefactor of the transverse and longitudinal
/// radial integrals in the spatial tensor.
fn spatial_prefactor(ctx: &PhysicalContext) -> f64 {
    HBAR * C / (4.0 * PI * PI * EPSILON0 * ctx.length_scale().powi(4))
}

/// π²/(90 ε₀ β⁴ (ħc)³), the equal-point value of G¹ᵢᵢ written out directly.
pub fn g1_zero_closed_form(ctx: &PhysicalContext) -> f64 {
    let beta = ctx.beta();
    PI * PI / (90.0 * EPSILON0 * beta.powi(4) * (HBAR * C).powi(3))
}

/// Diagonal element of the thermal G¹ at equal space points with time
/// delay `tau_s` seconds.
pub fn g1_temporal(ctx: &PhysicalContext, tau_s: f64) -> Complex64 {
    let u = tau_s / ctx.time_scale();
    temporal_prefactor(ctx) * bose_moment(3, u).expect("order 3 is always valid")
}

/// Dimensionless transverse and longitudinal radial integrals at ρ = R/(βħc).
///
/// I_T = ∫x³ n̄(x) [j₀(xρ) − j₁(xρ)/(xρ)] dx,  I_L = ∫x³ n̄(x) 2j₁(xρ)/(xρ) dx.
///
/// Beyond ρ = 50 the closed-form sums are used instead of quadrature; they
/// are free of cancellation there and the quadrature would need thousands of
/// panels.
pub fn spatial_radial_integrals(rho: f64) -> (f64, f64) {
    let rho = rho.abs();
    if rho > 50.0 {
        return spatial_radial_closed_form(rho);
    }
    let xmax = 64.0;
    let f = |x: f64| {
        if x == 0.0 {
            return [0.0, 0.0];
        }
        let w = x * x * x * bose_occupation(x);
        let z = x * rho;
        [w * transverse_kernel(z), w * longitudinal_kernel(z)]
    };
    let mut breaks = vec![0.0];
    // One panel per half period of the kernels, at most a few thousand.
    let step = if rho > 0.0 { (PI / rho).min(2.0) } else { 2.0 };
    let mut b = step;
    while b < xmax {
        breaks.push(b);
        b += step;
    }
    breaks.push(xmax);
    let scale = PI4_OVER_15;
    let est = Integrator::new(1e-15 * scale, 1e-12)
        .with_max_intervals(breaks.len() * 8 + 200)
        .integrate_lenient(&f, &breaks);
    (est.value[0], est.value[1])
}

/// Closed forms of the radial integrals, obtained by summing the Bose series
/// term by term against the Bessel kernels. Loses accuracy to cancellation
/// for small ρ.
pub fn spatial_radial_closed_form(rho: f64) -> (f64, f64) {
    let a = PI * rho;
    let coth = 1.0 / a.tanh();
    let csch2 = 1.0 / a.sinh().powi(2);
    let il = PI * coth / rho.powi(3) - 2.0 / rho.powi(4) + PI * PI * csch2 / (rho * rho);
    let h = 0.5 * PI * coth - 0.5 / rho;
    let dh = 0.5 / (rho * rho) - 0.5 * PI * PI * csch2;
    let it = (1.0 / rho.powi(3) - PI.powi(3) * csch2 * coth) / rho - h / rho.powi(3) + dh / (rho * rho);
    (it, il)
}

/// Equal-time spatial tensor Gᵢⱼ(r, t; r + R, t) for separation `r_m` (metres).
pub fn g1_spatial_tensor(ctx: &PhysicalContext, r_m: [f64; 3]) -> CorrelationTensor {
    let norm = (r_m[0] * r_m[0] + r_m[1] * r_m[1] + r_m[2] * r_m[2]).sqrt();
    let rho = norm / ctx.length_scale();
    let (it, il) = spatial_radial_integrals(rho);
    let pref = spatial_prefactor(ctx);
    let rhat = if norm > 0.0 {
        [r_m[0] / norm, r_m[1] / norm, r_m[2] / norm]
    } else {
        [0.0; 3]
    };
    let mut values = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, row) in values.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            *v = Complex64::new(pref * (it * delta + (il - it) * rhat[i] * rhat[j]), 0.0);
        }
    }
    CorrelationTensor { values }
}

/// G²ᵢᵢᵢᵢ at separation `r_m` ≥ 0 along axis `i`, via Gaussian moment
/// factorization: G² = Gᵢᵢ(0)² + |Gᵢᵢ(R êᵢ)|².
pub fn g2_equal_time(ctx: &PhysicalContext, r_m: f64, i: Axis) -> Result<G2Value> {
    if !(r_m >= 0.0) || !r_m.is_finite() {
        return domain(format!("separation must be finite and non-negative, got {r_m}"));
    }
    let g0 = g1_temporal(ctx, 0.0).re;
    let mut sep = [0.0; 3];
    sep[i.index()] = r_m;
    let g_r = g1_spatial_tensor(ctx, sep).diagonal(i);
    Ok(G2Value {
        value: g0 * g0 + g_r.norm_sqr(),
        asymptote: g0 * g0,
        separation_m: r_m,
        component: i,
    })
}

/// τ_c/(βħ) = ∫|B₃(u)|² du / B₃(0)², a temperature-independent number.
pub fn coherence_time_dimensionless() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let f = |u: f64| bose_moment(3, u).expect("order 3 is always valid").norm_sqr();
        let cut = 400.0;
        let breaks: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, cut].to_vec();
        let body = Integrator::new(0.0, 1e-11)
            .integrate_lenient(&f, &breaks)
            .value;
        // |B₃(u)|² → 4/u⁶ with relative corrections O(1/u²).
        let tail = 4.0 / (5.0 * cut.powi(5));
        2.0 * (body + tail) / (PI4_OVER_15 * PI4_OVER_15)
    })
}

/// Equivalent-width coherence time ∫|g¹(τ)|² dτ in seconds.
pub fn coherence_time(ctx: &PhysicalContext) -> f64 {
    coherence_time_dimensionless() * ctx.time_scale()
}
