//! Linear reconstruction of `m₀`, the canonical moments and the velocity in a cell.
//!
//! Every stage writes a cell-averaged moment as `avg(α(x) + β(x) p(x))` where `α`
//! and `β` only involve the stages already resolved. With `p(x) = p̄ + D (x - xᵢ)`
//! the constraint reads `p̄ = a + b D` with `a = (M - avg α) / avg β` and
//! `b = -avg(β ξ) / avg β`, and the limited slope is then a function of `a`, `b`.

use crate::drag::CellState;
use crate::moment_space::{canonical_moments, canonical_to_moments};

/// Below this relative size a stage denominator is treated as zero.
const DEGENERATE: f64 = 1e-13;

/// Four-point Gauss–Legendre rule on `[-1, 1]`; exact up to degree 7, which covers
/// every product met in the reconstruction and the fluxes (degree ≤ 6).
pub(crate) struct Gl4 {
    pub x: [f64; 4],
    pub w: [f64; 4],
}

impl Gl4 {
    pub fn new() -> Self {
        let rule = crate::quadrature::gauss_legendre(4, -1.0, 1.0).expect("four-point rule");
        let mut x = [0.0; 4];
        let mut w = [0.0; 4];
        for (k, (xn, wn)) in rule.iter().enumerate() {
            x[k] = xn;
            w[k] = wn;
        }
        Self { x, w }
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    #[inline]
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.x.iter().zip(&self.w).map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

/// `½ (sgn(b - a) + sgn(c - b))`: ±1 on monotone triples, 0 at extrema.
pub fn slope_phi(a: f64, b: f64, c: f64) -> f64 {
    let sgn = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    0.5 * (sgn(b - a) + sgn(c - b))
}

/// Linear profiles in one cell, in the local coordinate `ξ = x - xᵢ ∈ [-Δx/2, Δx/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellReconstruction {
    pub m0: f64,
    pub dm0: f64,
    /// `p̄₁, p̄₂, p̄₃`.
    pub p: [f64; 3],
    pub dp: [f64; 3],
    /// `ū, v̄`.
    pub u: [f64; 2],
    pub du: [f64; 2],
    /// Cell-average moments used as is when the cell is reconstructed as a constant
    /// (vacuum, boundary of the moment space, or a failed stage).
    pub constant: Option<[f64; 4]>,
    pub(crate) surface_index: usize,
}

impl CellReconstruction {
    /// First-order (piecewise constant) reconstruction of a cell.
    pub fn constant(c: &CellState) -> Self {
        Self {
            m0: c.moments.m0(),
            dm0: 0.0,
            p: [0.0; 3],
            dp: [0.0; 3],
            u: c.velocity,
            du: [0.0; 2],
            constant: Some(c.moments.values),
            surface_index: c.moments.basis.surface_index(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant.is_some()
    }

    #[inline]
    pub fn canonical_at(&self, xi: f64) -> [f64; 3] {
        [0, 1, 2].map(|k| self.p[k] + self.dp[k] * xi)
    }

    #[inline]
    pub fn moments_at(&self, xi: f64) -> [f64; 4] {
        match self.constant {
            Some(m) => m,
            None => canonical_to_moments(self.m0 + self.dm0 * xi, self.canonical_at(xi)),
        }
    }

    #[inline]
    pub fn velocity_at(&self, xi: f64) -> [f64; 2] {
        [self.u[0] + self.du[0] * xi, self.u[1] + self.du[1] * xi]
    }

    /// Moments and momentum at `ξ`, as the six transported components.
    #[inline]
    pub fn state_at(&self, xi: f64) -> [f64; 6] {
        let m = self.moments_at(xi);
        let u = self.velocity_at(xi);
        let s = m[self.surface_index];
        [m[0], m[1], m[2], m[3], s * u[0], s * u[1]]
    }
}

/// Cell data the reconstruction needs from a neighbour.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Summary {
    pub m0: f64,
    pub p: Option<[f64; 3]>,
    pub u: [f64; 2],
}

impl Summary {
    pub fn of(c: &CellState, vacuum: f64) -> Self {
        let p = if c.moments.m0() > vacuum { canonical_moments(&c.moments).ok() } else { None };
        Self { m0: c.moments.m0(), p, u: c.velocity }
    }
}

/// Moment expression of stage `k` (1..=3) split as `α + β p_k` from the lower stages.
#[inline]
fn stage_terms(k: usize, m0: f64, p: &[f64; 3]) -> (f64, f64) {
    let [p1, p2, _] = *p;
    match k {
        1 => (0.0, m0),
        2 => (m0 * p1 * p1, m0 * p1 * (1.0 - p1)),
        _ => {
            let inner = (1.0 - p1) * p2 + p1;
            (m0 * p1 * inner * inner, m0 * p1 * (1.0 - p1) * (1.0 - p2) * p2)
        }
    }
}

/// Limited slope for a variable whose bar value is `a + b D`.
///
/// The endpoint values stay between the neighbouring averages; differences of the
/// wrong sign give a zero slope.
#[inline]
fn limited(phi: f64, prev: f64, a: f64, next: f64, b: f64, dx: f64, cap: f64) -> f64 {
    if phi == 0.0 {
        return 0.0;
    }
    let (dr, dl) = (dx + 2.0 * b, dx - 2.0 * b);
    if !(dr > 0.0 && dl > 0.0) {
        return 0.0;
    }
    let right = phi * (next - a) / dr;
    let left = phi * (a - prev) / dl;
    let mag = right.min(left).min(cap);
    if mag > 0.0 {
        phi * mag
    } else {
        0.0
    }
}

/// Second-order reconstruction of `cur` from its neighbours.
///
/// Stages are solved in the order m₀, p₁, p₂, p₃, (u, v). A stage with a vanishing
/// denominator keeps a zero slope; a bar value outside `[0, 1]` drops the whole cell
/// back to the constant reconstruction.
pub(crate) fn reconstruct(
    prev: &Summary,
    cur_state: &CellState,
    cur: &Summary,
    next: &Summary,
    dx: f64,
    dt: f64,
    gl: &Gl4,
) -> CellReconstruction {
    let mut r = CellReconstruction::constant(cur_state);
    let Some(pc) = cur.p else {
        let s = cur_state.moments.surface();
        velocity_stage(&mut r, prev, cur, next, s, dx, dt, gl);
        return r;
    };
    let m = cur_state.moments.values;
    let m0 = m[0];
    let h = 0.5 * dx;

    let phi0 = slope_phi(prev.m0, m0, next.m0);
    let dm0 = if phi0 == 0.0 {
        0.0
    } else {
        phi0 * ((next.m0 - m0).abs().min((m0 - prev.m0).abs()).min(2.0 * m0)) / dx
    };

    let mut p = pc;
    let mut dp = [0.0; 3];
    let neighbours = match (prev.p, next.p) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    };
    for k in 1..=3 {
        // Averages of α, β and β ξ over the cell with the stages < k resolved.
        let (mut abar, mut bbar, mut gamma) = (0.0, 0.0, 0.0);
        for (xi, w) in gl.mapped(-h, h) {
            let pk = [0, 1, 2].map(|j| p[j] + dp[j] * xi);
            let (al, be) = stage_terms(k, m0 + dm0 * xi, &pk);
            abar += w * al;
            bbar += w * be;
            gamma += w * be * xi;
        }
        abar /= dx;
        bbar /= dx;
        gamma /= dx;
        if !(bbar > DEGENERATE * m0) {
            // p_k does not influence the moments here; keep the cell value, flat.
            p[k - 1] = pc[k - 1];
            continue;
        }
        let a = (m[k] - abar) / bbar;
        let b = -gamma / bbar;
        let d = match neighbours {
            Some((pp, pn)) => {
                let phi = slope_phi(pp[k - 1], pc[k - 1], pn[k - 1]);
                limited(phi, pp[k - 1], a, pn[k - 1], b, dx, f64::INFINITY)
            }
            None => 0.0,
        };
        let bar = a + b * d;
        let ends = [bar - d * h, bar + d * h];
        if !(0.0..=1.0).contains(&bar) || ends.iter().any(|e| !(0.0..=1.0).contains(e)) {
            log::trace!("stage p{k} out of range (bar = {bar}); constant reconstruction");
            let mut flat = CellReconstruction::constant(cur_state);
            velocity_stage(&mut flat, prev, cur, next, cur_state.moments.surface(), dx, dt, gl);
            return flat;
        }
        p[k - 1] = bar;
        dp[k - 1] = d;
    }
    r.m0 = m0;
    r.dm0 = dm0;
    r.p = p;
    r.dp = dp;
    r.constant = None;
    velocity_stage(&mut r, prev, cur, next, cur_state.moments.surface(), dx, dt, gl);
    r
}

/// Velocity bars and slopes, weighted by the reconstructed surface moment.
#[allow(clippy::too_many_arguments)]
fn velocity_stage(
    r: &mut CellReconstruction,
    prev: &Summary,
    cur: &Summary,
    next: &Summary,
    surface: f64,
    dx: f64,
    dt: f64,
    gl: &Gl4,
) {
    r.u = cur.u;
    r.du = [0.0; 2];
    if !(surface > 0.0) {
        return;
    }
    let h = 0.5 * dx;
    let mut gamma = 0.0;
    if !r.is_constant() {
        for (xi, w) in gl.mapped(-h, h) {
            gamma += w * r.moments_at(xi)[r.surface_index] * xi;
        }
        gamma /= dx;
    }
    let b = -gamma / surface;
    let cap = if dt > 0.0 { 1.0 / dt } else { f64::INFINITY };
    for d in 0..2 {
        let phi = slope_phi(prev.u[d], cur.u[d], next.u[d]);
        let slope = limited(phi, prev.u[d], cur.u[d], next.u[d], b, dx, cap);
        r.du[d] = slope;
        r.u[d] = cur.u[d] + b * slope;
    }
}
