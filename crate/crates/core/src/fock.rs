//! Density matrices of mixtures of generalized coherent states on a finite
//! set of plane-wave modes, in the spectral-Fock basis.
//!
//! Each member of a mixture is a product of single-mode coherent states with
//! amplitudes α F_{kλ}. Its Fock amplitudes are evaluated in log space so
//! that large occupations do not overflow the factorials.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specfun::bose_occupation;
use crate::units::PhysicalContext;

/// Largest Hilbert dimension accepted by the builders.
pub const MAX_DIMENSION: usize = 1_000_000;

/// Largest dimension for which [`DensityMatrix::to_dense`] is allowed.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn sign(self) -> i32 {
        match self {
            Helicity::Plus => 1,
            Helicity::Minus => -1,
        }
    }
}

/// A plane-wave mode: integer lattice vector and helicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Mode {
    pub k: [i32; 3],
    pub helicity: Helicity,
}

impl Mode {
    pub fn new(k: [i32; 3], helicity: Helicity) -> Self {
        Self { k, helicity }
    }
}

/// Modes of a periodic box of volume V, each truncated at `cutoff` photons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSet {
    modes: Vec<Mode>,
    volume: f64,
    cutoff: u32,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>, volume: f64, cutoff: u32) -> Result<Self> {
        if modes.is_empty() {
            return domain("mode set is empty");
        }
        if !(volume > 0.0 && volume.is_finite()) {
            return domain(format!("quantization volume must be positive, got {volume}"));
        }
        if cutoff < 1 {
            return domain("photon cutoff must be at least 1");
        }
        for (i, m) in modes.iter().enumerate() {
            if m.k == [0; 3] {
                return domain("the k = 0 mode carries no field");
            }
            if modes[..i].contains(m) {
                return domain(format!("duplicate mode {m:?}"));
            }
        }
        Ok(Self { modes, volume, cutoff })
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Result<Self> {
        Self::new(self.modes.clone(), self.volume, cutoff)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Box side V^{1/3}, metres.
    pub fn side(&self) -> f64 {
        self.volume.cbrt()
    }

    /// Physical wavevector of mode `i`, 1/m.
    pub fn wavevector(&self, i: usize) -> [f64; 3] {
        let s = 2.0 * PI / self.side();
        self.modes[i].k.map(|c| c as f64 * s)
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        self.wavevector(i).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// (cutoff + 1)^modes, or an error above [`MAX_DIMENSION`].
    pub fn dimension(&self) -> Result<usize> {
        let base = self.cutoff as usize + 1;
        let mut d: usize = 1;
        for _ in &self.modes {
            d = d.checked_mul(base).filter(|&d| d <= MAX_DIMENSION).ok_or_else(|| {
                Error::Dimension(format!(
                    "{} modes with cutoff {} exceed the limit of {MAX_DIMENSION} states",
                    self.modes.len(),
                    self.cutoff
                ))
            })?;
        }
        Ok(d)
    }

    /// Fock state with the given basis index (mode 0 varies fastest).
    pub fn state(&self, mut index: usize) -> FockState {
        let base = self.cutoff as usize + 1;
        let mut n = Vec::with_capacity(self.modes.len());
        for _ in &self.modes {
            n.push((index % base) as u32);
            index /= base;
        }
        FockState(n)
    }

    /// Basis index of `n`, if it lies inside the truncated space.
    pub fn index(&self, n: &FockState) -> Option<usize> {
        if n.0.len() != self.modes.len() || n.0.iter().any(|&c| c > self.cutoff) {
            return None;
        }
        let base = self.cutoff as usize + 1;
        Some(n.0.iter().rev().fold(0, |acc, &c| acc * base + c as usize))
    }
}

/// Photon numbers per mode, in the order of the mode set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FockState(pub Vec<u32>);

impl FockState {
    pub fn total(&self) -> i64 {
        self.0.iter().map(|&n| n as i64).sum()
    }
}

impl From<&[u32]> for FockState {
    fn from(v: &[u32]) -> Self {
        FockState(v.to_vec())
    }
}

/// How the mode phases of a pulse are tied together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhaseLaw {
    Free,
    /// arg(α F_{kλ}) = a + b·k with b in metres.
    Linear { a: f64, b: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretePulse {
    alpha: Complex64,
    spectrum: Vec<Complex64>,
    phase_law: PhaseLaw,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

impl DiscretePulse {
    pub fn new(modes: &ModeSet, alpha: Complex64, spectrum: Vec<Complex64>, phase_law: PhaseLaw) -> Result<Self> {
        if spectrum.len() != modes.len() {
            return Err(Error::Dimension(format!("{} spectral values for {} modes", spectrum.len(), modes.len())));
        }
        let norm: f64 = spectrum.iter().map(|f| f.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("spectrum is not normalized: Σ|F|² = {norm}"));
        }
        if let PhaseLaw::Linear { a, b } = phase_law {
            for (i, f) in spectrum.iter().enumerate() {
                let z = alpha * f;
                if z.norm() == 0.0 {
                    continue;
                }
                let k = modes.wavevector(i);
                let want = a + b[0] * k[0] + b[1] * k[1] + b[2] * k[2];
                if wrap(z.arg() - want).abs() > 1e-12 * want.abs().max(1.0) {
                    return domain(format!("mode {i} breaks the linear phase law"));
                }
            }
        }
        Ok(Self {
            alpha,
            spectrum,
            phase_law,
        })
    }

    /// Pulse with real α = `alpha_abs`, |F| = `magnitudes` (normalized here) and
    /// phases a + b·k.
    pub fn linear(modes: &ModeSet, alpha_abs: f64, magnitudes: &[f64], a: f64, b: [f64; 3]) -> Result<Self> {
        let mags = normalized(magnitudes)?;
        let spectrum = (0..modes.len().min(mags.len()))
            .map(|i| {
                let k = modes.wavevector(i);
                Complex64::from_polar(mags[i], a + b[0] * k[0] + b[1] * k[1] + b[2] * k[2])
            })
            .collect();
        Self::new(modes, Complex64::new(alpha_abs, 0.0), spectrum, PhaseLaw::Linear { a, b })
    }

    /// Pulse with real α = `alpha_abs` and arbitrary per-mode phases.
    pub fn free(modes: &ModeSet, alpha_abs: f64, magnitudes: &[f64], phases: &[f64]) -> Result<Self> {
        let mags = normalized(magnitudes)?;
        if phases.len() != mags.len() {
            return Err(Error::Dimension("one phase per mode is required".into()));
        }
        let spectrum = mags.iter().zip(phases).map(|(&m, &p)| Complex64::from_polar(m, p)).collect();
        Self::new(modes, Complex64::new(alpha_abs, 0.0), spectrum, PhaseLaw::Free)
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn phase_law(&self) -> PhaseLaw {
        self.phase_law
    }

    /// Mode amplitudes α F_{kλ}.
    fn amplitudes(&self) -> Vec<Complex64> {
        self.spectrum.iter().map(|f| self.alpha * f).collect()
    }

    /// ⟨n|ψ⟩ for this pulse.
    pub fn amplitude(&self, n: &FockState) -> Complex64 {
        fock_amplitude(self.alpha.norm_sqr(), &self.amplitudes(), n)
    }
}

fn normalized(m: &[f64]) -> Result<Vec<f64>> {
    if m.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return domain("spectral magnitudes must be finite and non-negative");
    }
    let s = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s == 0.0 {
        return domain("spectral magnitudes are all zero");
    }
    Ok(m.iter().map(|x| x / s).collect())
}

fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// e^{−|α|²/2} Π (αF)^n / √n!, with the magnitude built from logarithms.
fn fock_amplitude(alpha_sq: f64, z: &[Complex64], n: &FockState) -> Complex64 {
    let mut ln_mag = -0.5 * alpha_sq;
    let mut phase = 0.0;
    for (zk, &nk) in z.iter().zip(&n.0) {
        if nk == 0 {
            continue;
        }
        let r = zk.norm();
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        ln_mag += nk as f64 * r.ln() - 0.5 * ln_factorial(nk);
        phase += nk as f64 * zk.arg();
    }
    Complex64::from_polar(ln_mag.exp(), phase)
}

/// B_{nm;σ} = p e^{−|α|²} Π |αF|^{n+m} / √(n! m!).
pub fn b_factor(pulse: &DiscretePulse, prob: f64, n: &FockState, m: &FockState) -> f64 {
    let z = pulse.amplitudes();
    prob * fock_amplitude(pulse.alpha.norm_sqr(), &z, n).norm() * fock_amplitude(pulse.alpha.norm_sqr(), &z, m).norm()
}

/// A weighted set of pulses.
pub type Ensemble = Vec<(DiscretePulse, f64)>;

fn check_probabilities(pulses: &[(DiscretePulse, f64)]) -> Result<()> {
    if pulses.is_empty() {
        return domain("empty ensemble");
    }
    if pulses.iter().any(|(_, p)| !(*p >= 0.0 && p.is_finite())) {
        return domain("probabilities must be non-negative");
    }
    let s: f64 = pulses.iter().map(|(_, p)| p).sum();
    if (s - 1.0).abs() > 1e-10 {
        return domain(format!("probabilities sum to {s}, not 1"));
    }
    Ok(())
}

/// ρ_nm of the mixture for one element, without building the matrix.
pub fn mixture_element(pulses: &[(DiscretePulse, f64)], n: &FockState, m: &FockState) -> Complex64 {
    let terms: Vec<Complex64> = pulses
        .par_iter()
        .map(|(p, w)| {
            let z = p.amplitudes();
            let a2 = p.alpha.norm_sqr();
            fock_amplitude(a2, &z, n) * fock_amplitude(a2, &z, m).conj() * *w
        })
        .collect();
    terms.iter().sum()
}

/// Σ_σ B_{nm;σ}: the value of ρ_nm when every phase factor is one.
pub fn b_sum(pulses: &[(DiscretePulse, f64)], n: &FockState, m: &FockState) -> f64 {
    pulses.iter().map(|(p, w)| b_factor(p, *w, n, m)).sum()
}

/// Element of an equal-weight sampled ensemble with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledElement {
    pub value: Complex64,
    pub std_error: f64,
    pub n: usize,
}

/// ρ_nm with the spread of the per-pulse terms, for ensembles drawn at random.
pub fn sampled_element(pulses: &[(DiscretePulse, f64)], n: &FockState, m: &FockState) -> SampledElement {
    let terms: Vec<(Complex64, f64)> = pulses
        .par_iter()
        .map(|(p, w)| {
            let z = p.amplitudes();
            let a2 = p.alpha.norm_sqr();
            (fock_amplitude(a2, &z, n) * fock_amplitude(a2, &z, m).conj(), *w)
        })
        .collect();
    let value: Complex64 = terms.iter().map(|(t, w)| t * w).sum();
    let wsum: f64 = terms.iter().map(|(_, w)| w).sum();
    let mean = value / wsum;
    let n_s = terms.len() as f64;
    let ss: f64 = terms.iter().map(|(t, w)| w * w * (t - mean).norm_sqr()).sum();
    SampledElement {
        value,
        std_error: (ss * n_s / (n_s - 1.0).max(1.0)).sqrt(),
        n: terms.len(),
    }
}

/// Sparse Hermitian matrix over the truncated Fock basis of a mode set.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    modes: ModeSet,
    elements: HashMap<(usize, usize), Complex64>,
}

impl DensityMatrix {
    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn dimension(&self) -> usize {
        self.modes.dimension().expect("checked at construction")
    }

    /// Number of stored (non-zero) elements.
    pub fn stored(&self) -> usize {
        self.elements.len()
    }

    pub fn get(&self, n: &FockState, m: &FockState) -> Complex64 {
        match (self.modes.index(n), self.modes.index(m)) {
            (Some(i), Some(j)) => self.at(i, j),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.elements.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dimension()).map(|i| self.at(i, i).re).sum()
    }

    /// Probability lost to the photon cutoff, 1 − tr ρ.
    pub fn truncation_mass(&self) -> f64 {
        1.0 - self.trace()
    }

    /// Mean photon number of mode `k`.
    pub fn mean_occupation(&self, k: usize) -> f64 {
        (0..self.dimension()).map(|i| self.modes.state(i).0[k] as f64 * self.at(i, i).re).sum::<f64>()
    }

    /// Stored elements as (row state, column state, value).
    pub fn iter(&self) -> impl Iterator<Item = (FockState, FockState, Complex64)> + '_ {
        self.elements.iter().map(|(&(i, j), &v)| (self.modes.state(i), self.modes.state(j), v))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.elements
            .iter()
            .map(|(&(i, j), v)| (v - self.at(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let d = self.dimension();
        if d > DENSE_LIMIT {
            return Err(Error::Dimension(format!("dense form limited to {DENSE_LIMIT} states, have {d}")));
        }
        let mut m = DMatrix::zeros(d, d);
        for (&(i, j), &v) in &self.elements {
            m[(i, j)] = v;
        }
        Ok(m)
    }

    /// Smallest eigenvalue of the dense Hermitian form.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let m = self.to_dense()?;
        Ok(m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Options for [`build_rho_mixture`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuildOptions {
    /// Per-pulse contributions |c_n c_m| below this are not stored.
    pub drop_below: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { drop_below: 1e-16 }
    }
}

const PULSE_CHUNK: usize = 64;

fn accumulate(acc: &mut HashMap<(usize, usize), Complex64>, pulse: &DiscretePulse, w: f64, states: &[FockState], drop_below: f64) {
    let z = pulse.amplitudes();
    let a2 = pulse.alpha.norm_sqr();
    let c: Vec<Complex64> = states.iter().map(|s| fock_amplitude(a2, &z, s)).collect();
    let cmax = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if cmax == 0.0 || w == 0.0 {
        return;
    }
    let keep: Vec<usize> = (0..c.len()).filter(|&i| c[i].norm() * cmax >= drop_below).collect();
    for &i in &keep {
        for &j in &keep {
            let v = c[i] * c[j].conj();
            if v.norm() >= drop_below {
                *acc.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += v * w;
            }
        }
    }
}

/// ρ = Σ_σ p_σ |ψ_σ⟩⟨ψ_σ| restricted to the truncated Fock space.
pub fn build_rho_mixture(modes: &ModeSet, pulses: &[(DiscretePulse, f64)], opts: &BuildOptions) -> Result<DensityMatrix> {
    let d = modes.dimension()?;
    check_probabilities(pulses)?;
    if let Some((p, _)) = pulses.iter().find(|(p, _)| p.spectrum.len() != modes.len()) {
        return Err(Error::Dimension(format!("pulse has {} modes, set has {}", p.spectrum.len(), modes.len())));
    }
    let states: Vec<FockState> = (0..d).map(|i| modes.state(i)).collect();
    // Fixed chunks merged in order keep the summation order, and hence the
    // result, independent of the thread count.
    let partial: Vec<HashMap<(usize, usize), Complex64>> = pulses
        .par_chunks(PULSE_CHUNK)
        .map(|chunk| {
            let mut acc = HashMap::new();
            for (pulse, w) in chunk {
                accumulate(&mut acc, pulse, *w, &states, opts.drop_below);
            }
            acc
        })
        .collect();
    let mut elements = HashMap::new();
    for part in partial {
        let mut keys: Vec<_> = part.into_iter().collect();
        keys.sort_unstable_by_key(|(k, _)| *k);
        for (k, v) in keys {
            *elements.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
        }
    }
    Ok(DensityMatrix {
        modes: modes.clone(),
        elements,
    })
}

/// Off-diagonal elements (upper triangle, i < j) with |ρ_nm| above the
/// tolerance. Every such pair has n ≠ m in at least one mode.
pub fn coherence_scan(rho: &DensityMatrix, tolerance: f64) -> Vec<(FockState, FockState)> {
    let mut out: Vec<(usize, usize)> = rho
        .elements
        .iter()
        .filter(|(&(i, j), v)| i < j && v.norm() > tolerance)
        .map(|(&k, _)| k)
        .collect();
    out.sort_unstable();
    out.into_iter().map(|(i, j)| (rho.modes.state(i), rho.modes.state(j))).collect()
}

/// Bose–Einstein density matrix together with the mass removed by the cutoff.
#[derive(Debug, Clone)]
pub struct ThermalRho {
    pub rho: DensityMatrix,
    /// 1 − Π_k (1 − q_k^{cutoff+1}) with q = n̄/(1 + n̄).
    pub truncation_mass: f64,
    /// n̄ per mode.
    pub occupations: Vec<f64>,
}

/// Product of per-mode geometric distributions, truncated at `cutoff` and
/// renormalized.
pub fn thermal_rho_dis(modes: &ModeSet, ctx: &PhysicalContext, cutoff: u32) -> Result<ThermalRho> {
    let modes = modes.with_cutoff(cutoff)?;
    let d = modes.dimension()?;
    let l = ctx.length_scale();
    let occupations: Vec<f64> = (0..modes.len()).map(|i| bose_occupation(modes.wavenumber(i) * l)).collect();
    let mut kept = 1.0;
    let per_mode: Vec<Vec<f64>> = occupations
        .iter()
        .map(|&nb| {
            let q = nb / (1.0 + nb);
            let raw: Vec<f64> = (0..=cutoff).map(|n| q.powi(n as i32) / (1.0 + nb)).collect();
            let s: f64 = raw.iter().sum();
            kept *= s;
            raw.into_iter().map(|p| p / s).collect()
        })
        .collect();
    let elements = (0..d)
        .filter_map(|i| {
            let n = modes.state(i);
            let p: f64 = n.0.iter().zip(&per_mode).map(|(&nk, pk)| pk[nk as usize]).product();
            (p > 0.0).then_some(((i, i), Complex64::new(p, 0.0)))
        })
        .collect();
    Ok(ThermalRho {
        rho: DensityMatrix { modes, elements },
        truncation_mass: 1.0 - kept,
        occupations,
    })
}

/// Deterministic linear-phase ensemble: a on Mₐ equally spaced points of
/// [0, 2π) and b on a grid of the box [0, V^{1/3})³, with grid sizes large
/// enough that every phase sum reachable inside the cutoff averages to zero
/// unless it vanishes identically.
pub fn linear_phase_grid(modes: &ModeSet, alpha_abs: f64, magnitudes: &[f64]) -> Result<Ensemble> {
    let c = modes.cutoff() as i64;
    let m_a = (modes.len() as i64 * c + 1) as usize;
    let m_b: Vec<usize> = (0..3)
        .map(|ax| {
            let reach: i64 = modes.modes().iter().map(|m| m.k[ax].unsigned_abs() as i64).sum::<i64>() * c;
            if reach == 0 {
                1
            } else {
                (reach + 1) as usize
            }
        })
        .collect();
    let count = m_a * m_b.iter().product::<usize>();
    if count > 1_000_000 {
        return Err(Error::Dimension(format!("linear-phase grid would hold {count} pulses")));
    }
    let side = modes.side();
    let w = 1.0 / count as f64;
    let mut out = Vec::with_capacity(count);
    for ia in 0..m_a {
        let a = 2.0 * PI * ia as f64 / m_a as f64;
        for ix in 0..m_b[0] {
            for iy in 0..m_b[1] {
                for iz in 0..m_b[2] {
                    let b = [
                        side * ix as f64 / m_b[0] as f64,
                        side * iy as f64 / m_b[1] as f64,
                        side * iz as f64 / m_b[2] as f64,
                    ];
                    out.push((DiscretePulse::linear(modes, alpha_abs, magnitudes, a, b)?, w));
                }
            }
        }
    }
    Ok(out)
}

/// `n` equal-weight linear-phase pulses with a uniform on [0, 2π) and b
/// uniform on [0, V^{1/3})³.
pub fn linear_phase_sample(modes: &ModeSet, alpha_abs: f64, magnitudes: &[f64], n: usize, seed: u64) -> Result<Ensemble> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = modes.side();
    (0..n)
        .map(|_| {
            let a = 2.0 * PI * rng.random::<f64>();
            let b = [0; 3].map(|_: i32| side * rng.random::<f64>());
            Ok((DiscretePulse::linear(modes, alpha_abs, magnitudes, a, b)?, 1.0 / n as f64))
        })
        .collect()
}

/// `n` equal-weight pulses whose mode phases are independent and uniform.
pub fn free_phase_sample(modes: &ModeSet, alpha_abs: f64, magnitudes: &[f64], n: usize, seed: u64) -> Result<Ensemble> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let phases: Vec<f64> = (0..modes.len()).map(|_| 2.0 * PI * rng.random::<f64>()).collect();
            Ok((DiscretePulse::free(modes, alpha_abs, magnitudes, &phases)?, 1.0 / n as f64))
        })
        .collect()
}

/// Σ_{kλ}(n − m) and Σ_{kλ} k (n − m) for a pair of Fock states.
pub fn phase_sums(modes: &ModeSet, n: &FockState, m: &FockState) -> (i64, [i64; 3]) {
    let mut s = 0;
    let mut v = [0i64; 3];
    for (i, mode) in modes.modes().iter().enumerate() {
        let d = n.0[i] as i64 - m.0[i] as i64;
        s += d;
        for ax in 0..3 {
            v[ax] += mode.k[ax] as i64 * d;
        }
    }
    (s, v)
}

/// Census of off-diagonal elements against the two sum rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelectionCensus {
    /// Above tolerance and satisfying both rules.
    pub surviving: usize,
    /// Above tolerance while breaking a rule.
    pub violating: usize,
    /// Below tolerance although both rules hold.
    pub allowed_but_small: usize,
    /// Below tolerance and breaking a rule.
    pub suppressed: usize,
}

impl SelectionCensus {
    /// No survivor breaks a rule and at least one allowed element survives.
    pub fn holds(&self) -> bool {
        self.violating == 0 && self.surviving > 0
    }
}

/// Classifies every off-diagonal pair of the basis (upper triangle).
pub fn linear_phase_selection_rules(rho: &DensityMatrix, tolerance: f64) -> SelectionCensus {
    let d = rho.dimension();
    let modes = &rho.modes;
    let states: Vec<FockState> = (0..d).map(|i| modes.state(i)).collect();
    let mut c = SelectionCensus {
        surviving: 0,
        violating: 0,
        allowed_but_small: 0,
        suppressed: 0,
    };
    for i in 0..d {
        for j in i + 1..d {
            let (s, v) = phase_sums(modes, &states[i], &states[j]);
            let allowed = s == 0 && v == [0; 3];
            let big = rho.at(i, j).norm() > tolerance;
            match (allowed, big) {
                (true, true) => c.surviving += 1,
                (false, true) => c.violating += 1,
                (true, false) => c.allowed_but_small += 1,
                (false, false) => c.suppressed += 1,
            }
        }
    }
    c
}
