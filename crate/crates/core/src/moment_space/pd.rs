//! Product-difference inversion of integer moment sequences.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

use super::ExponentBasis;

/// Recurrence coefficients at or below this value end the usable part of the sequence.
const ALPHA_FLOOR: f64 = 1e-13;
/// Coefficients below this value cannot come from roundoff on a realizable sequence.
const ALPHA_NEGATIVE: f64 = -1e-10;

/// Gauss rule recovered from a moment sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussInversion {
    pub rule: QuadratureRule,
    /// Number of nodes the full sequence asked for.
    pub requested_nodes: usize,
}

impl GaussInversion {
    /// True when the sequence sat too close to the moment-space boundary and fewer
    /// nodes (matching fewer moments) were returned.
    pub fn is_reduced(&self) -> bool {
        self.rule.len() < self.requested_nodes
    }

    /// Number of leading input moments the rule reproduces.
    pub fn matched_moments(&self) -> usize {
        2 * self.rule.len()
    }
}

/// Gauss quadrature whose nodes and weights reproduce `2n` integer moments of a
/// measure supported in `interval`.
///
/// The moments are first transferred to `[0, 1]` and normalized by the zeroth one;
/// the recurrence coefficients of that sequence are the ζ-values of its canonical
/// moments, so they must lie in `[0, 1]`.
pub fn pd_inversion(moments: &[f64], interval: (f64, f64)) -> Result<GaussInversion> {
    let (lo, hi) = interval;
    if moments.is_empty() || moments.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "product-difference inversion needs an even, non-zero number of moments (got {})",
            moments.len()
        )));
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("invalid interval [{lo}, {hi}]")));
    }
    let mu0 = moments[0];
    if !(mu0 > 0.0) || moments.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotRealizable(format!("zeroth moment {mu0} is not positive")));
    }
    let n = moments.len() / 2;
    let unit = to_unit_interval(moments, lo, hi);
    let mut alpha = pd_coefficients(&unit);

    // alpha[k] is ζ_k; a zero ζ_{2m} leaves m nodes and a zero ζ_{2m+1} leaves m+1,
    // one of them at the lower end of the support.
    let mut usable = n;
    for k in 1..alpha.len() {
        let a = alpha[k];
        if !a.is_finite() || a < ALPHA_NEGATIVE || a > 1.0 + 1e-10 {
            return Err(Error::NotRealizable(format!("recurrence coefficient ζ{k} = {a:e} outside [0, 1]")));
        }
        if a <= ALPHA_FLOOR {
            alpha[k] = 0.0;
            usable = k.div_ceil(2).max(1);
            break;
        }
    }
    if usable < n {
        log::debug!("product-difference inversion reduced from {n} to {usable} nodes");
    }

    let (nodes, weights) = jacobi_rule(&alpha, usable);
    if nodes.iter().any(|&y| !(-1e-9..=1.0 + 1e-9).contains(&y)) {
        return Err(Error::NotRealizable(format!("recovered node outside the support: {nodes:?}")));
    }
    let scale = hi - lo;
    let mut mapped: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&y, &w)| (lo + scale * y.clamp(0.0, 1.0), w * mu0))
        .collect();
    mapped.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Nodes collapsing onto each other only happen at the boundary; merge them.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(mapped.len());
    for (x, w) in mapped {
        match merged.last_mut() {
            Some(last) if x - last.0 <= 1e-14 * scale => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    if merged.iter().any(|&(_, w)| !(w > 0.0)) {
        return Err(Error::NotRealizable("non-positive quadrature weight".into()));
    }
    let (nodes, weights): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
    let rule = QuadratureRule::new(nodes, weights, (lo, hi))?;
    Ok(GaussInversion { rule, requested_nodes: n })
}

/// Moments of the image measure under `y = (x - lo)/(hi - lo)`, normalized by μ₀.
fn to_unit_interval(moments: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let len = moments.len();
    let scale = hi - lo;
    let mut out = vec![0.0; len];
    for (k, slot) in out.iter_mut().enumerate() {
        // ∫ ((x - lo)/scale)^k = Σ_j C(k,j) (-lo)^{k-j} μ_j / scale^k
        let mut binom = 1.0;
        let mut acc = 0.0;
        for j in (0..=k).rev() {
            acc += binom * (-lo).powi((k - j) as i32) * moments[j];
            // C(k, j-1) = C(k, j) * j / (k - j + 1)
            binom = binom * j as f64 / (k - j + 1) as f64;
        }
        *slot = acc / scale.powi(k as i32) / moments[0];
    }
    out[0] = 1.0;
    out
}

/// Recurrence coefficients α₁…α_{2n} (stored 0-based) of a normalized sequence.
fn pd_coefficients(mu: &[f64]) -> Vec<f64> {
    let len = mu.len();
    // p[j][i]: column j, row i (both 0-based) of Gordon's table.
    let cols = len + 1;
    let mut p = vec![vec![0.0; len + 1]; cols];
    p[0][0] = 1.0;
    for i in 0..len {
        p[1][i] = if i % 2 == 0 { mu[i] } else { -mu[i] };
    }
    for j in 2..cols {
        let rows = len + 1 - j;
        for i in 0..rows {
            p[j][i] = p[j - 1][0] * p[j - 2][i + 1] - p[j - 2][0] * p[j - 1][i + 1];
        }
    }
    let mut alpha = vec![0.0; len];
    for i in 1..len {
        alpha[i] = p[i + 1][0] / (p[i][0] * p[i - 1][0]);
    }
    alpha
}

/// Nodes (on [0,1]) and normalized weights from the first `n` levels of the recurrence.
fn jacobi_rule(alpha: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![alpha[1]], vec![1.0]);
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = alpha[2 * i + 1] + alpha[2 * i];
        if i + 1 < n {
            let b = -(alpha[2 * i + 2] * alpha[2 * i + 1]).max(0.0).sqrt();
            jac[(i, i + 1)] = b;
            jac[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let nodes = eig.eigenvalues.iter().copied().collect();
    let weights = (0..n).map(|j| eig.eigenvectors[(0, j)].powi(2)).collect();
    (nodes, weights)
}

/// Discrete measure matching positive- and negative-order moments of a size distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalRepresentation {
    /// Sizes `S_j`, ascending.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Exponents whose moments the nodes reproduce.
    pub matched_orders: Vec<f64>,
    /// Set when the inversion fell back to fewer nodes.
    pub reduced: bool,
}

impl PrincipalRepresentation {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_j S_j^q.
    pub fn moment(&self, order: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * s.powf(order)).sum()
    }
}

/// Lower principal representation of fractional moments extended by negative orders.
///
/// `m_pos` holds `m_0, m_{1/2}, m_1, m_{3/2}` on `[s_min, 1]` and `m_neg[a-1] = m_{-a/2}`
/// for `a = 1..=2 n_neg`.
pub fn lower_principal_rep_fractional(
    m_pos: [f64; 4],
    m_neg: &[f64],
    n_neg: usize,
    s_min: f64,
) -> Result<PrincipalRepresentation> {
    lower_principal_rep(ExponentBasis::Fractional, m_pos, m_neg, n_neg, s_min)
}

/// Lower principal representation for either basis.
///
/// In the variable `x` where the basis is polynomial (`x = √S` for fractional moments,
/// `x = S` for integer ones) the sequence `x^{-2n_neg} μ̃(x)` has integer moments
/// `c̃_k = m_{(k - 2n_neg)·step}`. Its Gauss rule `(x_j, w'_j)` maps back to sizes
/// `S_j = S(x_j)` and weights `w_j = w'_j x_j^{2 n_neg}`.
pub fn lower_principal_rep(
    basis: ExponentBasis,
    m_pos: [f64; 4],
    m_neg: &[f64],
    n_neg: usize,
    s_min: f64,
) -> Result<PrincipalRepresentation> {
    if m_neg.len() != 2 * n_neg {
        return Err(Error::InvalidArgument(format!(
            "expected {} negative-order moments, got {}",
            2 * n_neg,
            m_neg.len()
        )));
    }
    if n_neg > 0 && !(s_min > 0.0) {
        return Err(Error::SingularIntegral { order: -basis.step() });
    }
    if !(0.0..1.0).contains(&s_min) {
        return Err(Error::InvalidArgument(format!("lower support bound {s_min} outside [0, 1)")));
    }
    let shift = 2 * n_neg;
    let mut seq = Vec::with_capacity(shift + 4);
    for k in 0..shift {
        seq.push(m_neg[shift - k - 1]);
    }
    seq.extend_from_slice(&m_pos);

    let lo = basis.var_of(s_min);
    let inv = pd_inversion(&seq, (lo, 1.0))?;
    let mut nodes = Vec::with_capacity(inv.rule.len());
    let mut weights = Vec::with_capacity(inv.rule.len());
    for (x, w) in inv.rule.iter() {
        nodes.push(basis.size_of(x));
        weights.push(w * x.powi(shift as i32));
    }
    let step = basis.step();
    let matched_orders = (0..inv.matched_moments()).map(|k| (k as f64 - shift as f64) * step).collect();
    Ok(PrincipalRepresentation { nodes, weights, matched_orders, reduced: inv.is_reduced() })
}
