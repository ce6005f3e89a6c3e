//! Coherent pulse families, their classical envelopes and localization.
//!
//! A family assigns each parameter set s = {k₀, m̂, n̂} the mode function
//!
//! ```text
//! K(s, kλ) = 𝒩 S(k) e*_{kλ}·(k × n̂)
//! ```
//!
//! with S either a Gaussian about k₀m̂ or a thermal lineshape l(k) times a
//! direction spread υ(k̂·m̂). Internally wavenumbers are in units of 1/(βħc)
//! and positions in units of βħc.

mod direct;
mod profile;
mod table;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

pub use direct::DirectEnvelope;
pub use profile::{IsotropicProfile, ProfileOptions};
pub use table::{PartialWaveTable, TableOptions};
pub(crate) use table::{shared_table, shared_table_at};

use crate::error::{domain, Result};
use crate::quad::{composite_gauss_legendre, Integrator};
use crate::specfun::{bose_occupation, PI4_OVER_15, ZETA3};
use crate::units::PhysicalContext;

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Angular spread υ(x) of a thermal-lineshape pulse about its nominal
/// direction, x = k̂·m̂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub enum Upsilon {
    /// exp(κ(x − 1)), κ > 0.
    Exponential { kappa: f64 },
    /// ((1 + x)/2)^q, q > 0.
    PowerLaw { q: f64 },
}

impl Default for Upsilon {
    fn default() -> Self {
        Upsilon::Exponential { kappa: 20.0 }
    }
}

impl Upsilon {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Upsilon::Exponential { kappa } if !(kappa > 0.0 && kappa <= 500.0) => {
                domain(format!("exponential spread needs 0 < κ ≤ 500, got {kappa}"))
            }
            Upsilon::PowerLaw { q } if !(q > 0.0 && q <= 500.0) => {
                domain(format!("power-law spread needs 0 < q ≤ 500, got {q}"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Upsilon::Exponential { kappa } => (kappa * (x - 1.0)).exp(),
            Upsilon::PowerLaw { q } => (0.5 * (1.0 + x)).max(0.0).powf(q),
        }
    }

    /// Rough angular width 1 − x at which υ has dropped by e.
    pub fn width(&self) -> f64 {
        match *self {
            Upsilon::Exponential { kappa } => (1.0 / kappa).min(2.0),
            Upsilon::PowerLaw { q } => (2.0 * (1.0 - (-1.0 / q).exp())).min(2.0),
        }
    }

    /// Breakpoints on [−1, 1] graded toward the peak at x = 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        graded_breaks(self.width())
    }

    /// A = π ∫ υ²(x)(1 + x²) dx, the angular part of the normalization.
    pub fn angular_norm(&self) -> f64 {
        let (x, w) = composite_gauss_legendre(&self.breakpoints(), 20);
        PI * x
            .iter()
            .zip(&w)
            .map(|(&x, &w)| {
                let u = self.eval(x);
                w * u * u * (1.0 + x * x)
            })
            .sum::<f64>()
    }
}

/// Breakpoints on [−1, 1] with panels doubling in width away from x = 1.
pub(crate) fn graded_breaks(width: f64) -> Vec<f64> {
    let mut b = vec![1.0];
    let mut d = 0.25 * width;
    while 1.0 - d > -1.0 {
        b.push(1.0 - d);
        d *= 2.0;
    }
    b.push(-1.0);
    b.reverse();
    b
}

/// J(a) = ∫_{-1}^{1} (1 + x²) e^{−a(1−x)} dx.
pub fn gaussian_angular_j(a: f64) -> f64 {
    if a < 2.0 {
        // e^{−a} Σ_{n even} aⁿ/n! · 2(1/(n+1) + 1/(n+3))
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut n = 0.0;
        loop {
            let add = term * 2.0 * (1.0 / (n + 1.0) + 1.0 / (n + 3.0));
            sum += add;
            if add < 1e-18 * sum {
                break;
            }
            term *= a * a / ((n + 1.0) * (n + 2.0));
            n += 2.0;
        }
        (-a).exp() * sum
    } else {
        let e = (-2.0 * a).exp();
        let (a1, a2, a3) = (1.0 / a, 1.0 / (a * a), 1.0 / (a * a * a));
        (1.0 - e) * a1 + (a1 - 2.0 * a2 + 2.0 * a3) - e * (a1 + 2.0 * a2 + 2.0 * a3)
    }
}

/// Angular integral of a Gaussian family's |L|² against the transverse
/// projector: A_G(k, k₀) = ∫dΩ (1 − (k̂·n̂)²) e^{−|k − k₀m̂|²/σ²}.
pub fn gaussian_angular_factor(k: f64, k0: f64, sigma: f64) -> f64 {
    let d = (k - k0) / sigma;
    PI * (-d * d).exp() * gaussian_angular_j(2.0 * k * k0 / (sigma * sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FamilyKind {
    /// L(k, k₀) = exp(−|k − k₀m̂|²/2σ²), σ in units of 1/(βħc).
    GaussianLineshape { sigma: f64 },
    /// l(k) υ(k̂·m̂) with l(k) = 1/(k√(e^{k} − 1)).
    ThermalLineshape { upsilon: Upsilon },
}

/// A normalized pulse family bound to a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseFamily {
    kind: FamilyKind,
    alpha: Complex64,
    context: PhysicalContext,
    /// Angular normalization A (thermal kind only).
    angular_norm: f64,
}

impl PulseFamily {
    pub fn gaussian(ctx: &PhysicalContext, sigma_per_m: f64) -> Result<Self> {
        if !(sigma_per_m > 0.0 && sigma_per_m.is_finite()) {
            return domain(format!("Gaussian width must be positive, got {sigma_per_m}"));
        }
        Ok(Self {
            kind: FamilyKind::GaussianLineshape {
                sigma: sigma_per_m * ctx.length_scale(),
            },
            alpha: Complex64::new(1.0, 0.0),
            context: *ctx,
            angular_norm: f64::NAN,
        })
    }

    /// Gaussian family specified by its duration 1/(cσ) in seconds.
    pub fn gaussian_with_duration(ctx: &PhysicalContext, duration_s: f64) -> Result<Self> {
        if !(duration_s > 0.0 && duration_s.is_finite()) {
            return domain(format!("duration must be positive, got {duration_s}"));
        }
        Self::gaussian(ctx, 1.0 / (crate::units::C * duration_s))
    }

    pub fn thermal(ctx: &PhysicalContext, upsilon: Upsilon) -> Result<Self> {
        upsilon.validate()?;
        Ok(Self {
            kind: FamilyKind::ThermalLineshape { upsilon },
            alpha: Complex64::new(1.0, 0.0),
            context: *ctx,
            angular_norm: upsilon.angular_norm(),
        })
    }

    pub fn with_alpha(mut self, alpha: Complex64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn context(&self) -> &PhysicalContext {
        &self.context
    }

    /// Dimensionless σ (Gaussian kind).
    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::GaussianLineshape { sigma } => Some(sigma),
            FamilyKind::ThermalLineshape { .. } => None,
        }
    }

    pub fn upsilon(&self) -> Option<Upsilon> {
        match self.kind {
            FamilyKind::ThermalLineshape { upsilon } => Some(upsilon),
            FamilyKind::GaussianLineshape { .. } => None,
        }
    }

    /// Pulse duration 1/(cσ) in seconds (Gaussian kind).
    pub fn duration_s(&self) -> Option<f64> {
        self.sigma().map(|s| self.context.time_scale() / s)
    }

    /// Angular normalization A = π∫υ²(1+x²)dx (thermal kind).
    pub fn angular_norm(&self) -> f64 {
        self.angular_norm
    }

    /// Dimensionless 𝒩̃² such that Σ_λ∫d³k |K|² = 1. For the Gaussian kind
    /// `k0` is the dimensionless central wavenumber; it is ignored otherwise.
    pub fn norm_sq(&self, k0: f64) -> f64 {
        match self.kind {
            FamilyKind::ThermalLineshape { .. } => 1.0 / (2.0 * ZETA3 * self.angular_norm),
            FamilyKind::GaussianLineshape { sigma } => 1.0 / gaussian_radial_moment(k0, sigma, 4),
        }
    }

    /// 𝒩 in SI units, m^{3/2} for the thermal kind and m^{5/2} for the
    /// Gaussian kind.
    pub fn norm_si(&self, k0: f64) -> f64 {
        let l = self.context.length_scale();
        let p = match self.kind {
            FamilyKind::ThermalLineshape { .. } => 1.5,
            FamilyKind::GaussianLineshape { .. } => 2.5,
        };
        self.norm_sq(k0).sqrt() * l.powf(p)
    }

    /// Spectral amplitude S(k, x) with x = k̂·m̂ (dimensionless, without 𝒩).
    pub fn spectral(&self, k: f64, x: f64, k0: f64) -> f64 {
        match self.kind {
            FamilyKind::ThermalLineshape { upsilon } => thermal_lineshape(k) * upsilon.eval(x),
            FamilyKind::GaussianLineshape { sigma } => {
                let q = k * k + k0 * k0 - 2.0 * k * k0 * x;
                (-0.5 * q.max(0.0) / (sigma * sigma)).exp()
            }
        }
    }

    /// Mean wavenumber ⟨k⟩ = 𝒩̃² Σ_λ∫d³k k |K̃|², dimensionless.
    pub fn mean_k(&self, k0: f64) -> f64 {
        match self.kind {
            FamilyKind::ThermalLineshape { .. } => PI4_OVER_15 / (2.0 * ZETA3),
            FamilyKind::GaussianLineshape { sigma } => {
                gaussian_radial_moment(k0, sigma, 5) / gaussian_radial_moment(k0, sigma, 4)
            }
        }
    }

    /// ∫|ℰ(r, t)|² d³r in (V/m)²·m³; independent of t and of the pulse
    /// orientation.
    pub fn total_energy_integral(&self, k0: f64) -> f64 {
        let l = self.context.length_scale();
        let e = self.context.field_unit();
        (2.0 * PI).powi(3) * self.alpha.norm_sqr() * self.mean_k(k0) * e * e * l.powi(3)
    }
}

/// l(k) = 1/(k√(eᵏ − 1)).
pub fn thermal_lineshape(k: f64) -> f64 {
    1.0 / (k * k.exp_m1().sqrt())
}

/// ∫_0^∞ kⁿ A_G(k, k₀) dk.
pub(crate) fn gaussian_radial_moment(k0: f64, sigma: f64, n: i32) -> f64 {
    let lo = (k0 - 14.0 * sigma).max(0.0);
    let hi = k0 + 14.0 * sigma;
    let panels = 28;
    let breaks: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
    Integrator::new(0.0, 1e-13)
        .integrate_lenient(&|k: f64| k.powi(n) * gaussian_angular_factor(k, k0, sigma), &breaks)
        .value
}

/// Thermal-family ⟨k⟩ check value: ∫x³n̄ / ∫x²n̄.
pub fn thermal_mean_k() -> f64 {
    let num = Integrator::default()
        .integrate_lenient(&|x: f64| if x > 0.0 { x * x * x * bose_occupation(x) } else { 0.0 }, &[0.0, 5.0, 20.0, 80.0])
        .value;
    num / (2.0 * ZETA3)
}

/// Orientation and position of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseParams {
    /// Central wavenumber in 1/m (Gaussian kind; ignored otherwise).
    pub k0: f64,
    pub m_hat: Vec3,
    pub n_hat: Vec3,
    /// Angle of n̂ in the plane ⊥ m̂, measured from [`reference_perpendicular`].
    pub psi: f64,
    /// Nominal position in metres.
    pub r0: Vec3,
}

/// A fixed unit vector ⊥ m̂ from which Ψ is measured.
pub fn reference_perpendicular(m: Vec3) -> Vec3 {
    let trial = if m[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let p = cross(cross(m, trial), m);
    let n = norm(p);
    [p[0] / n, p[1] / n, p[2] / n]
}

impl PulseParams {
    /// Builds parameters from a propagation direction and the angle Ψ.
    pub fn new(k0: f64, m_hat: Vec3, psi: f64, r0: Vec3) -> Result<Self> {
        let nm = norm(m_hat);
        if !(nm > 0.0 && nm.is_finite()) {
            return domain("propagation direction must be a non-zero vector");
        }
        let m = [m_hat[0] / nm, m_hat[1] / nm, m_hat[2] / nm];
        let e1 = reference_perpendicular(m);
        let e2 = cross(m, e1);
        let (s, c) = psi.sin_cos();
        let n = [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]];
        Ok(Self { k0, m_hat: m, n_hat: n, psi, r0 })
    }

    /// Builds parameters from explicit unit vectors, which must be
    /// orthonormal to 1e-12.
    pub fn from_vectors(k0: f64, m_hat: Vec3, n_hat: Vec3, r0: Vec3) -> Result<Self> {
        if (norm(m_hat) - 1.0).abs() > 1e-12 || (norm(n_hat) - 1.0).abs() > 1e-12 {
            return domain("m̂ and n̂ must be unit vectors");
        }
        if dot(m_hat, n_hat).abs() > 1e-12 {
            return domain("n̂ must be perpendicular to m̂");
        }
        let e1 = reference_perpendicular(m_hat);
        let e2 = cross(m_hat, e1);
        let psi = dot(n_hat, e2).atan2(dot(n_hat, e1));
        Ok(Self { k0, m_hat, n_hat, psi, r0 })
    }

    pub fn frame(&self) -> Frame {
        Frame::new(self.m_hat, self.n_hat)
    }
}

/// Orthonormal pulse frame: x′ = n̂, y′ = m̂ × n̂, z′ = m̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub axes: [Vec3; 3],
}

impl Frame {
    pub fn new(m: Vec3, n: Vec3) -> Self {
        Self {
            axes: [n, cross(m, n), m],
        }
    }

    pub fn identity() -> Self {
        Self {
            axes: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn to_local(&self, v: Vec3) -> Vec3 {
        [dot(self.axes[0], v), dot(self.axes[1], v), dot(self.axes[2], v)]
    }

    pub fn to_world<T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>>(&self, v: [T; 3]) -> [T; 3] {
        let a = &self.axes;
        [
            v[0] * a[0][0] + v[1] * a[1][0] + v[2] * a[2][0],
            v[0] * a[0][1] + v[1] * a[1][1] + v[2] * a[2][1],
            v[0] * a[0][2] + v[1] * a[1][2] + v[2] * a[2][2],
        ]
    }
}

/// The two gradient components of the scalar potential Φ of an azimuthally
/// symmetric pulse: ∇Φ = Φ_∥ m̂ + Φ_⊥ ρ̂_⊥.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradient {
    pub par: Complex64,
    pub perp: Complex64,
}

/// Envelope in the pulse frame from the potential gradient at azimuth φ:
/// ∇Φ × n̂ = Φ_∥ ŷ′ − Φ_⊥ sin φ ẑ′.
pub fn frame_field(g: Gradient, sin_phi: f64) -> [Complex64; 3] {
    [Complex64::new(0.0, 0.0), g.par, -g.perp * sin_phi]
}

/// Source of dimensionless envelope fields, in units of the family's field
/// unit times α𝒩̃. Implementations are azimuthally symmetric about m̂.
pub trait Envelope: Send + Sync {
    /// Gradient of Φ at distance r from the centre, polar angle θ from m̂,
    /// both in the pulse frame, at the table's fixed time.
    fn gradient(&self, r: f64, cos_theta: f64) -> Gradient;

    /// Largest r at which [`gradient`](Self::gradient) is valid.
    fn reach(&self) -> f64;

    /// Prefactor 𝒩̃ applied to the gradient.
    fn norm(&self) -> f64;

    /// Field at a displacement `d` given in the pulse frame.
    fn local_field(&self, d: Vec3) -> [Complex64; 3] {
        let r = norm(d);
        let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let (ct, sin_phi) = if r > 0.0 {
            (d[2] / r, if rho > 0.0 { d[1] / rho } else { 0.0 })
        } else {
            (1.0, 0.0)
        };
        let g = self.gradient(r, ct);
        let f = frame_field(g, sin_phi);
        let n = self.norm();
        [f[0] * n, f[1] * n, f[2] * n]
    }

    /// Field at world displacement `d` from the centre of a pulse with the
    /// given frame, in world components.
    fn field(&self, d: Vec3, frame: &Frame) -> [Complex64; 3] {
        frame.to_world(self.local_field(frame.to_local(d)))
    }
}

/// Classical envelope ℰ(r, t) of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldEnvelope {
    /// V/m, world components.
    pub value: [Complex64; 3],
}

impl FieldEnvelope {
    pub fn intensity(&self) -> f64 {
        self.value.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Evaluates ℰ^{(r₀ s)}(r, t) by direct quadrature over (k, k̂·m̂).
pub fn field_envelope(family: &PulseFamily, params: &PulseParams, r_m: Vec3, t_s: f64) -> Result<FieldEnvelope> {
    let ctx = family.context();
    let l = ctx.length_scale();
    let k0 = params.k0 * l;
    if matches!(family.kind(), FamilyKind::GaussianLineshape { .. }) && !(k0 > 0.0) {
        return domain("Gaussian pulses need a positive central wavenumber");
    }
    let d = [(r_m[0] - params.r0[0]) / l, (r_m[1] - params.r0[1]) / l, (r_m[2] - params.r0[2]) / l];
    let env = DirectEnvelope::new(*family, k0, t_s / ctx.time_scale());
    let frame = params.frame();
    let local = frame.to_local(d);
    let r = norm(local);
    let ct = if r > 0.0 { local[2] / r } else { 1.0 };
    let g = env.gradient_checked(r, ct)?;
    let rho = (local[0] * local[0] + local[1] * local[1]).sqrt();
    let sin_phi = if rho > 0.0 { local[1] / rho } else { 0.0 };
    let f = frame_field(g, sin_phi);
    let scale = family.alpha() * family.norm_sq(k0).sqrt() * ctx.field_unit();
    let world = frame.to_world(f);
    Ok(FieldEnvelope {
        value: [world[0] * scale, world[1] * scale, world[2] * scale],
    })
}

/// Radius in metres of the sphere about r₀ holding 99% of ∫|ℰ(r, 0)|² d³r.
pub fn pulse_extent(family: &PulseFamily, k0_per_m: f64) -> Result<f64> {
    pulse_extent_quantile(family, k0_per_m, 0.99)
}

/// Radius holding the fraction `q` of the pulse's integrated intensity.
pub fn pulse_extent_quantile(family: &PulseFamily, k0_per_m: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("quantile must lie in (0, 1), got {q}"));
    }
    let l = family.context().length_scale();
    let profile = IsotropicProfile::for_family(family, k0_per_m * l, &ProfileOptions::default())?;
    Ok(profile.radius_quantile(q) * l)
}

/// μᵢ(r, s, Ω) = ∫_Ω |ℰᵢ(r; r₀)|² d³r₀ over the cube of volume Ω (m³)
/// centred at the origin, for the orientation in `params` (r₀ ignored).
/// Returns the three components in (V/m)²·m³.
pub fn mu_integral(family: &PulseFamily, params: &PulseParams, r_m: Vec3, omega_m3: f64) -> Result<[f64; 3]> {
    if !(omega_m3 > 0.0 && omega_m3.is_finite()) {
        return domain(format!("volume must be positive, got {omega_m3}"));
    }
    let table = table::shared_table(family, params.k0 * family.context().length_scale())?;
    let profile = table.profile();
    let l = family.context().length_scale();
    let half = 0.5 * omega_m3.cbrt() / l;
    let r = [r_m[0] / l, r_m[1] / l, r_m[2] / l];
    let mu = profile::mu_oriented(&*table, &profile, &params.frame(), r, half);
    let e = family.context().field_unit();
    let scale = family.alpha().norm_sqr() * e * e * l.powi(3);
    Ok([mu[0] * scale, mu[1] * scale, mu[2] * scale])
}

/// Orientation-averaged μᵢ for a detector at the centre of the cube of
/// volume Ω, in (V/m)²·m³ (same for every i).
pub fn mu_integral_averaged(family: &PulseFamily, k0_per_m: f64, omega_m3: f64) -> Result<f64> {
    if !(omega_m3 > 0.0 && omega_m3.is_finite()) {
        return domain(format!("volume must be positive, got {omega_m3}"));
    }
    let l = family.context().length_scale();
    let profile = IsotropicProfile::for_family(family, k0_per_m * l, &ProfileOptions::default())?;
    let half = 0.5 * omega_m3.cbrt() / l;
    let e = family.context().field_unit();
    Ok(profile.mu_cube(half) * family.alpha().norm_sqr() * e * e * l.powi(3))
}

#[cfg(test)]
mod tests;
