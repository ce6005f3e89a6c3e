//! `thermolight <experiment>`: runs one experiment and writes its CSV table,
//! structured report and, for curves, an SVG plot.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod config;
mod experiments;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_duration, Config, Constant};
use experiments::Experiment;
use report::Meta;

#[derive(Debug, Parser)]
#[command(name = "thermolight", version, about = "Thermal-light correlations and coherent-pulse mixtures")]
struct Cli {
    /// TOML file with top-level settings and one table per experiment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Temperature in kelvin.
    #[arg(long = "T", global = true, value_name = "KELVIN")]
    temperature: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized equal-time G² against detector separation.
    Fig1 {
        #[arg(long)]
        rmax_um: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Separation (µm) beyond which the curve must be flat.
        #[arg(long)]
        flat_from_um: Option<f64>,
    },
    /// Simulation-condition residual of the thermal-lineshape mixture.
    SimcondThermal {
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        tau_max_fs: Option<f64>,
        /// Constant the pass/fail check applies to.
        #[arg(long, value_enum)]
        constant: Option<Constant>,
    },
    /// Non-negative Gaussian-mixture fits across pulse durations.
    GaussianScan {
        /// Comma-separated durations 1/(cσ), e.g. 10fs,100fs,1ps,10ps.
        #[arg(long, value_delimiter = ',', value_parser = parse_duration)]
        durations: Option<Vec<f64>>,
    },
    /// G¹ of a unit-trace mixture against box volume.
    Scaling {
        /// Comma-separated box sides in pulse extents.
        #[arg(long, value_delimiter = ',')]
        extents: Option<Vec<f64>>,
    },
    /// Monte Carlo G² of the trace-improper mixture at separated detectors.
    G2Contrast {
        /// Comma-separated separations in pulse extents.
        #[arg(long, value_delimiter = ',')]
        extents: Option<Vec<f64>>,
        #[arg(long)]
        check_at: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        g1_samples: Option<usize>,
        #[arg(long)]
        strata: Option<usize>,
    },
    /// Discrete-mode density matrices of phase ensembles and of thermal light.
    FockDemo {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Coherence time and its temperature scaling.
    CoherenceTime {
        /// Comma-separated temperatures in kelvin.
        #[arg(long, value_delimiter = ',')]
        temperatures: Option<Vec<f64>>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Cli {
    fn resolve(self) -> Result<(Experiment, Config), config::ConfigError> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        set(&mut cfg.temperature_k, self.temperature);
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.output_dir, self.out);
        let exp = match self.command {
            Command::Fig1 {
                rmax_um,
                points,
                flat_from_um,
            } => {
                set(&mut cfg.fig1.rmax_um, rmax_um);
                set(&mut cfg.fig1.points, points);
                set(&mut cfg.fig1.flat_from_um, flat_from_um);
                Experiment::Fig1
            }
            Command::SimcondThermal {
                points,
                tau_max_fs,
                constant,
            } => {
                set(&mut cfg.simcond_thermal.points, points);
                set(&mut cfg.simcond_thermal.tau_max_fs, tau_max_fs);
                set(&mut cfg.simcond_thermal.constant, constant);
                Experiment::SimcondThermal
            }
            Command::GaussianScan { durations } => {
                set(&mut cfg.gaussian_scan.durations_s, durations);
                Experiment::GaussianScan
            }
            Command::Scaling { extents } => {
                set(&mut cfg.scaling.extents, extents);
                Experiment::Scaling
            }
            Command::G2Contrast {
                extents,
                check_at,
                samples,
                g1_samples,
                strata,
            } => {
                let g = &mut cfg.g2_contrast;
                set(&mut g.extents, extents);
                set(&mut g.check_at, check_at);
                set(&mut g.samples, samples);
                set(&mut g.g1_samples, g1_samples);
                set(&mut g.strata, strata);
                Experiment::G2Contrast
            }
            Command::FockDemo { samples, cutoff, alpha } => {
                set(&mut cfg.fock_demo.samples, samples);
                set(&mut cfg.fock_demo.cutoff, cutoff);
                set(&mut cfg.fock_demo.alpha, alpha);
                Experiment::FockDemo
            }
            Command::CoherenceTime { temperatures } => {
                set(&mut cfg.coherence_time.temperatures_k, temperatures);
                Experiment::CoherenceTime
            }
        };
        cfg.validate()?;
        Ok((exp, cfg))
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, cfg) = match cli.resolve() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let artifact = match experiments::run(exp, &cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error in {}: {e}", exp.name());
            let code = match e {
                thermolight::Error::Domain(_) | thermolight::Error::Dimension(_) => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            };
            return ExitCode::from(code);
        }
    };
    let meta = Meta {
        temperature_k: cfg.temperature_k,
        seed: cfg.seed,
        git: env!("THERMOLIGHT_GIT_DESCRIBE"),
        version: env!("CARGO_PKG_VERSION"),
    };
    let paths = match report::write_all(&cfg.output_dir, &artifact, &meta) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", cfg.output_dir.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    for c in &artifact.checks {
        let tag = match c.pass {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "info",
        };
        if c.pass.is_some() {
            println!("[{tag}] {}: {:e} (expected {})", c.name, c.value, c.expected);
        } else {
            println!("[{tag}] {}: {:e}", c.name, c.value);
        }
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    if artifact.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
