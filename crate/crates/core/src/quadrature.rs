//! Gauss–Legendre rules and weighted sums.
//!
//! Rules on the reference interval `[-1, 1]` are generated once per order by Newton
//! iteration on the Legendre recurrence and cached for the lifetime of the process.
//! Rules on other intervals are affine images of the cached reference rule.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Order used for every moment integral in the library.
pub const DEFAULT_ORDER: usize = 24;

/// Paired abscissas and weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    /// Builds a rule from raw parts, checking ordering and positivity.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, interval: (f64, f64)) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidArgument("nodes and weights must be non-empty and paired".into()));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        Ok(Self { nodes, weights, interval })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

struct Reference {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn reference(n: usize) -> Arc<Reference> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Reference>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(legendre_roots(n))).clone()
}

/// Roots of P_n and the matching weights on [-1, 1], ascending.
fn legendre_roots(n: usize) -> Reference {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi's estimate of the i-th largest root.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
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
    Reference { nodes, weights }
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

/// `n`-point Gauss–Legendre rule on `[lo, hi]`.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
    }
    let r = reference(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let nodes = r.nodes.iter().map(|&x| mid + half * x).collect();
    let weights = r.weights.iter().map(|&w| half * w).collect();
    Ok(QuadratureRule { nodes, weights, interval: (lo, hi) })
}

/// Σ wᵢ f(xᵢ), failing on the first non-finite integrand value.
pub fn integrate<F: FnMut(f64) -> f64>(rule: &QuadratureRule, mut f: F) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in rule.iter() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { node: x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Allocation-free Gauss–Legendre sum over `[lo, hi]` for hot loops.
///
/// An empty or reversed interval sums to zero.
#[inline]
pub(crate) fn gl_sum<F: FnMut(f64) -> f64>(n: usize, lo: f64, hi: f64, mut f: F) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    let r = reference(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Visits the mapped nodes and weights of the `n`-point rule on `[lo, hi]`.
#[inline]
pub(crate) fn gl_for_each<F: FnMut(f64, f64)>(n: usize, lo: f64, hi: f64, mut f: F) {
    if !(hi > lo) {
        return;
    }
    let r = reference(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    for (&x, &w) in r.nodes.iter().zip(&r.weights) {
        f(mid + half * x, w * half);
    }
}

/// Gauss–Legendre sum on panels graded geometrically towards `lo`.
///
/// Integrands with a pole just left of a positive `lo` (negative-order moments) lose
/// accuracy on a single panel; splitting at `lo·4ᵏ` keeps every panel at the same
/// relative distance from the pole.
pub(crate) fn gl_graded<F: FnMut(f64) -> f64>(n: usize, lo: f64, hi: f64, mut f: F) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    if !(lo > 0.0) || hi <= 4.0 * lo {
        return gl_sum(n, lo, hi, f);
    }
    let mut acc = 0.0;
    let mut a = lo;
    while a < hi {
        let b = (4.0 * a).min(hi);
        acc += gl_sum(n, a, b, &mut f);
        a = b;
    }
    acc
}
