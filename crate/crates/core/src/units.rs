//! Physical constants, temperature, and the dimensionless scaling used
//! throughout the crate.
//!
//! Every internal computation works with the dimensionless wavenumber
//! `x = βħck`, lengths in units of `βħc` and times in units of `βħ`.
//! SI quantities only appear at the API boundary.

use serde::Serialize;

use crate::error::{domain, Result};

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s (exact).
pub const C: f64 = 299_792_458.0;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Vacuum permittivity, F/m (CODATA 2018).
pub const EPSILON0: f64 = 8.854_187_812_8e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalContext {
    temperature_k: f64,
    beta: f64,
}

impl PhysicalContext {
    pub fn new(temperature_k: f64) -> Result<Self> {
        if !(temperature_k.is_finite() && temperature_k > 0.0) {
            return domain(format!("temperature must be positive, got {temperature_k}"));
        }
        Ok(Self {
            temperature_k,
            beta: 1.0 / (K_B * temperature_k),
        })
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    /// `1/(k_B T)` in 1/J.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        HBAR
    }

    pub fn c(&self) -> f64 {
        C
    }

    pub fn epsilon0(&self) -> f64 {
        EPSILON0
    }

    /// `βħc` in metres.
    pub fn length_scale(&self) -> f64 {
        self.beta * HBAR * C
    }

    /// `βħ` in seconds.
    pub fn time_scale(&self) -> f64 {
        self.beta * HBAR
    }

    /// Wavenumber in 1/m to `x = βħck`.
    pub fn to_dimensionless_k(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0) || !k.is_finite() {
            return domain(format!("wavenumber must be non-negative, got {k}"));
        }
        Ok(k * self.length_scale())
    }

    pub fn from_dimensionless_k(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return domain(format!("dimensionless wavenumber must be non-negative, got {x}"));
        }
        Ok(x / self.length_scale())
    }

    /// Field scale `sqrt(ħc/(16π³ε₀)) / (βħc)²` in V/m. A pulse envelope
    /// computed in dimensionless units is multiplied by this to give SI.
    pub fn field_unit(&self) -> f64 {
        let l = self.length_scale();
        (HBAR * C / (16.0 * std::f64::consts::PI.powi(3) * EPSILON0)).sqrt() / (l * l)
    }

    /// Intensity scale `ħc/(16π³ε₀(βħc)⁴)` in V²/m², the square of
    /// [`field_unit`](Self::field_unit).
    pub fn intensity_unit(&self) -> f64 {
        let l = self.length_scale();
        HBAR * C / (16.0 * std::f64::consts::PI.powi(3) * EPSILON0 * l.powi(4))
    }
}
