//! Run configuration: a TOML file with one table per experiment, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
    #[error("invalid value for {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid<T>(key: &'static str, reason: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid {
        key,
        reason: reason.into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub temperature_k: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub fig1: Fig1,
    #[serde(rename = "simcond-thermal")]
    pub simcond_thermal: SimcondThermal,
    #[serde(rename = "gaussian-scan")]
    pub gaussian_scan: GaussianScan,
    pub scaling: Scaling,
    #[serde(rename = "g2-contrast")]
    pub g2_contrast: G2Contrast,
    #[serde(rename = "fock-demo")]
    pub fock_demo: FockDemo,
    #[serde(rename = "coherence-time")]
    pub coherence_time: CoherenceTime,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            temperature_k: 5777.0,
            seed: 1,
            output_dir: PathBuf::from("out"),
            fig1: Fig1::default(),
            simcond_thermal: SimcondThermal::default(),
            gaussian_scan: GaussianScan::default(),
            scaling: Scaling::default(),
            g2_contrast: G2Contrast::default(),
            fock_demo: FockDemo::default(),
            coherence_time: CoherenceTime::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1 {
    pub rmax_um: f64,
    pub points: usize,
    /// Separation beyond which G²/asymptote must stay within `flat_tolerance` of 1.
    pub flat_from_um: f64,
    pub flat_tolerance: f64,
    pub start_tolerance: f64,
}

impl Default for Fig1 {
    fn default() -> Self {
        Self {
            rmax_um: 2.0,
            points: 200,
            flat_from_um: 0.4,
            flat_tolerance: 0.01,
            start_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Constant {
    /// p|α|² = ζ(3)/(4π⁴L³), the value that reproduces the thermal G¹.
    Matching,
    /// p|α|² = 4ζ(3)/(π⁴L³) as printed.
    Stated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimcondThermal {
    pub tau_max_fs: f64,
    pub points: usize,
    pub tolerance: f64,
    /// Constant the pass/fail check is applied to; both are always tabulated.
    pub constant: Constant,
    pub kappa: f64,
    pub q: f64,
}

impl Default for SimcondThermal {
    fn default() -> Self {
        Self {
            tau_max_fs: 10.0,
            points: 50,
            tolerance: 1e-6,
            constant: Constant::Matching,
            kappa: 20.0,
            q: 40.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianScan {
    /// Pulse durations 1/(cσ), seconds, increasing.
    pub durations_s: Vec<f64>,
    /// Durations at or above this must fit below `feasible_tolerance`.
    pub feasible_from_s: f64,
    pub feasible_tolerance: f64,
    /// Durations at or below this must leave a residual above `infeasible_threshold`.
    pub infeasible_to_s: f64,
    pub infeasible_threshold: f64,
    pub k0_points: usize,
}

impl Default for GaussianScan {
    fn default() -> Self {
        Self {
            durations_s: vec![10e-15, 100e-15, 1e-12, 10e-12],
            feasible_from_s: 1e-12,
            feasible_tolerance: 1e-3,
            infeasible_to_s: 10e-15,
            infeasible_threshold: 0.1,
            k0_points: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scaling {
    /// Cube sides in units of the pulse extent, increasing.
    pub extents: Vec<f64>,
    pub slope_tolerance: f64,
    pub flat_tolerance: f64,
}

impl Default for Scaling {
    fn default() -> Self {
        Self {
            extents: vec![10.0, 20.0, 35.0, 50.0, 70.0, 100.0],
            slope_tolerance: 0.01,
            flat_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct G2Contrast {
    /// Detector separations in units of the pulse extent, increasing.
    pub extents: Vec<f64>,
    pub samples: usize,
    pub g1_samples: usize,
    pub strata: usize,
    /// Box margin around the detectors, units of βħc.
    pub margin: f64,
    pub g1_tolerance: f64,
    pub contrast_limit: f64,
    /// Separation (in extents) at which the contrast limit is checked.
    pub check_at: f64,
}

impl Default for G2Contrast {
    fn default() -> Self {
        Self {
            extents: vec![1.0, 2.0, 5.0],
            samples: 100_000,
            g1_samples: 1_000_000,
            strata: 64,
            margin: 12.0,
            g1_tolerance: 0.05,
            contrast_limit: 0.01,
            check_at: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockDemo {
    pub cutoff: u32,
    pub alpha: f64,
    pub samples: usize,
    pub box_side_um: f64,
    pub thermal_cutoff: u32,
    pub tolerance: f64,
}

impl Default for FockDemo {
    fn default() -> Self {
        Self {
            cutoff: 2,
            alpha: 0.8,
            samples: 10_000,
            box_side_um: 2.5,
            thermal_cutoff: 6,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceTime {
    pub temperatures_k: Vec<f64>,
    pub range_fs: [f64; 2],
    pub scaling_tolerance: f64,
}

impl Default for CoherenceTime {
    fn default() -> Self {
        Self {
            temperatures_k: vec![3000.0, 5777.0, 10000.0],
            range_fs: [1.0, 1.6],
            scaling_tolerance: 1e-9,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source: Box::new(source),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("temperature_k", self.temperature_k)?;
        let f = &self.fig1;
        positive("fig1.rmax_um", f.rmax_um)?;
        positive("fig1.flat_tolerance", f.flat_tolerance)?;
        positive("fig1.start_tolerance", f.start_tolerance)?;
        if f.points < 2 {
            return invalid("fig1.points", "need at least two points");
        }
        let s = &self.simcond_thermal;
        positive("simcond-thermal.tau_max_fs", s.tau_max_fs)?;
        positive("simcond-thermal.tolerance", s.tolerance)?;
        positive("simcond-thermal.kappa", s.kappa)?;
        positive("simcond-thermal.q", s.q)?;
        if s.points < 2 {
            return invalid("simcond-thermal.points", "need at least two points");
        }
        let g = &self.gaussian_scan;
        increasing("gaussian-scan.durations_s", &g.durations_s)?;
        positive("gaussian-scan.feasible_tolerance", g.feasible_tolerance)?;
        positive("gaussian-scan.infeasible_threshold", g.infeasible_threshold)?;
        positive("gaussian-scan.feasible_from_s", g.feasible_from_s)?;
        positive("gaussian-scan.infeasible_to_s", g.infeasible_to_s)?;
        if g.k0_points < 3 {
            return invalid("gaussian-scan.k0_points", "need at least three points");
        }
        let c = &self.scaling;
        increasing("scaling.extents", &c.extents)?;
        if c.extents.len() < 2 {
            return invalid("scaling.extents", "need at least two volumes");
        }
        positive("scaling.slope_tolerance", c.slope_tolerance)?;
        positive("scaling.flat_tolerance", c.flat_tolerance)?;
        let g2 = &self.g2_contrast;
        increasing("g2-contrast.extents", &g2.extents)?;
        positive("g2-contrast.margin", g2.margin)?;
        positive("g2-contrast.g1_tolerance", g2.g1_tolerance)?;
        positive("g2-contrast.contrast_limit", g2.contrast_limit)?;
        if g2.samples < 100 || g2.g1_samples < 100 || g2.strata == 0 {
            return invalid("g2-contrast.samples", "need at least 100 samples and one stratum");
        }
        if !g2.extents.contains(&g2.check_at) {
            return invalid("g2-contrast.check_at", "must be one of the listed extents");
        }
        let d = &self.fock_demo;
        positive("fock-demo.alpha", d.alpha)?;
        positive("fock-demo.box_side_um", d.box_side_um)?;
        positive("fock-demo.tolerance", d.tolerance)?;
        if d.cutoff < 2 {
            return invalid("fock-demo.cutoff", "the demo element needs two photons in one mode");
        }
        if d.samples < 2 || d.thermal_cutoff < 1 {
            return invalid("fock-demo.samples", "need at least two samples and a thermal cutoff of one");
        }
        let t = &self.coherence_time;
        increasing("coherence-time.temperatures_k", &t.temperatures_k)?;
        positive("coherence-time.scaling_tolerance", t.scaling_tolerance)?;
        if !(t.range_fs[0] > 0.0 && t.range_fs[1] > t.range_fs[0]) {
            return invalid("coherence-time.range_fs", "need 0 < low < high");
        }
        Ok(())
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(key, format!("must be positive, got {v}"))
    }
}

fn increasing(key: &'static str, v: &[f64]) -> Result<(), ConfigError> {
    if v.is_empty() {
        return invalid(key, "must not be empty");
    }
    if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) || v.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid(key, "must be positive and strictly increasing");
    }
    Ok(())
}

/// Parses a duration such as `10fs`, `1ps`, `2.5e-14` (seconds) or `3 ns`.
pub fn parse_duration(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let split = t.find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E').unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let v: f64 = num.trim().parse().map_err(|_| format!("bad duration '{s}'"))?;
    let scale = match unit.trim() {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" | "µs" => 1e-6,
        "ns" => 1e-9,
        "ps" => 1e-12,
        "fs" => 1e-15,
        "as" => 1e-18,
        u => return Err(format!("unknown time unit '{u}' in '{s}'")),
    };
    Ok(v * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations() {
        let close = |s: &str, v: f64| (parse_duration(s).unwrap() / v - 1.0).abs() < 1e-15;
        assert!(close("10fs", 10e-15));
        assert!(close("1ps", 1e-12));
        assert!(close("2.5e-14", 2.5e-14));
        assert!(close("3 ns", 3e-9));
        assert!(parse_duration("3 yr").is_err());
        assert!(parse_duration("fast").is_err());
    }

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = Config::default();
        c.validate().unwrap();
        let text = toml::to_string(&c).unwrap();
        let back: Config = toml::from_str(&text).unwrap();
        assert_eq!(back.gaussian_scan.durations_s, c.gaussian_scan.durations_s);
    }

    #[test]
    fn bad_values_are_caught() {
        let mut c = Config::default();
        c.scaling.extents = vec![10.0, 5.0];
        assert!(c.validate().is_err());
        let mut c = Config::default();
        c.fig1.flat_tolerance = 0.0;
        assert!(c.validate().is_err());
        assert!(toml::from_str::<Config>("[fig1]\nrmax = 3.0\n").is_err());
        assert!(toml::from_str::<Config>("[nope]\n").is_err());
    }
}
