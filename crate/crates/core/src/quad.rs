//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre rules.
//!
//! The adaptive integrator is a globally adaptive bisection scheme in the
//! style of QUADPACK's QAG with the 21-point Kronrod rule. It is generic over
//! the integrand's value type so that several related integrals (real,
//! complex, or small arrays of either) can share one set of abscissae.

// Node and weight tables are quoted to more digits than f64 holds.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: a vector space over `f64` with a norm.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, factor: f64) -> Self;
    fn norm(&self) -> f64;

    fn sub(self, other: Self) -> Self {
        self.add(other.scale(-1.0))
    }
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl<T: QuadValue, const N: usize> QuadValue for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a = a.add(b);
        }
        self
    }
    fn scale(mut self, factor: f64) -> Self {
        for a in self.iter_mut() {
            *a = a.scale(factor);
        }
        self
    }
    fn norm(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_452_801,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One application of the 21-point Gauss–Kronrod rule on `[a, b]`.
/// Returns the Kronrod estimate and the Kronrod–Gauss difference norm.
pub fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc.scale(WGK[10]);
    let mut gauss = T::zero();
    for j in 0..10 {
        let x = half * XGK[j];
        let s = f(center - x).add(f(center + x));
        kronrod = kronrod.add(s.scale(WGK[j]));
        if j % 2 == 1 {
            gauss = gauss.add(s.scale(WG[j / 2]));
        }
    }
    let kronrod = kronrod.scale(half);
    let gauss = gauss.scale(half);
    let err = kronrod.sub(gauss).norm();
    (kronrod, err)
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

struct Interval<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Interval<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Interval<T> {}
impl<T> PartialOrd for Interval<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Interval<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl Integrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }

    pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> Result<Estimate<T>> {
        self.integrate_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]`, starting from the panels
    /// given by consecutive breakpoints.
    pub fn integrate_breaks<T: QuadValue, F: Fn(f64) -> T>(
        &self,
        f: F,
        points: &[f64],
    ) -> Result<Estimate<T>> {
        let est = self.integrate_lenient(&f, points);
        let target = self.abs_tol.max(self.rel_tol * est.value.norm());
        if est.error <= target {
            Ok(est)
        } else {
            Err(Error::Accuracy {
                context: "adaptive quadrature",
                estimate: est.value.norm(),
                error: est.error,
            })
        }
    }

    /// Like [`integrate_breaks`](Self::integrate_breaks) but always returns
    /// the best estimate reached, whether or not the tolerance was met.
    pub fn integrate_lenient<T: QuadValue, F: Fn(f64) -> T>(&self, f: &F, points: &[f64]) -> Estimate<T> {
        let mut heap = BinaryHeap::new();
        let mut total = T::zero();
        let mut total_err = 0.0;
        for w in points.windows(2) {
            if w[1] == w[0] {
                continue;
            }
            let (value, error) = gk21(f, w[0], w[1]);
            total = total.add(value);
            total_err += error;
            heap.push(Interval {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
        while heap.len() < self.max_intervals {
            let target = self.abs_tol.max(self.rel_tol * total.norm());
            if total_err <= target {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // Interval can no longer be split in floating point.
                heap.push(worst);
                break;
            }
            let (v1, e1) = gk21(f, worst.a, mid);
            let (v2, e2) = gk21(f, mid, worst.b);
            total = total.sub(worst.value).add(v1).add(v2);
            total_err += e1 + e2 - worst.error;
            heap.push(Interval {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Interval {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }
        // Re-sum to shed accumulated rounding from the running updates.
        let mut value = T::zero();
        let mut error = 0.0;
        for iv in heap.iter() {
            value = value.add(iv.value);
            error += iv.error;
        }
        Estimate { value, error }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite Gauss–Legendre rule: `order` nodes on each panel between
/// consecutive breakpoints. Returns flattened `(nodes, weights)`.
pub fn composite_gauss_legendre(points: &[f64], order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * points.len().saturating_sub(1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for p in points.windows(2) {
        let c = 0.5 * (p[0] + p[1]);
        let h = 0.5 * (p[1] - p[0]);
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + h * xi);
            weights.push(h * wi);
        }
    }
    (nodes, weights)
}
