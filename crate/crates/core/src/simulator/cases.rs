//! Initial data and analytic references of the built-in cases.

use std::f64::consts::PI;

use crate::drag::CellState;
use crate::moment_space::{ExponentBasis, MomentVector};
use crate::quadrature::{gl_for_each, gl_sum, DEFAULT_ORDER};

/// Multipliers of the smooth 0D initial density.
pub const SMOOTH_LAMBDAS: [f64; 4] = [1.25, -8.75, 10.0, 20.0];
/// Support of the discontinuous 0D initial density (`n = 1` there).
pub const SQUARE_SUPPORT: (f64, f64) = (0.1, 0.6);
/// Size support of the 2D spray.
pub const TG_SIZES: (f64, f64) = (0.25, 0.75);
pub const TG_CENTER: [f64; 2] = [0.15, 0.15];
pub const TG_RADIUS: f64 = 0.1;

const CELL_POINTS: usize = 8;

/// `∫_lo^hi S^q dS` for each exponent of the basis.
pub fn indicator_moments(basis: ExponentBasis, lo: f64, hi: f64) -> [f64; 4] {
    basis.exponents().map(|q| (hi.powf(q + 1.0) - lo.powf(q + 1.0)) / (q + 1.0))
}

/// Steady Taylor-Green gas velocity on the unit square.
pub fn taylor_green_gas(x: f64, y: f64) -> [f64; 2] {
    let (a, b) = (2.0 * PI * x, 2.0 * PI * y);
    [a.sin() * b.cos(), -a.cos() * b.sin()]
}

/// Size moments of `exp(-(√S - c)² / 0.3)` on `(0, 1)`, integrated in `r = √S`.
fn transport1d_size_moments(basis: ExponentBasis, x0: f64) -> [f64; 4] {
    let c = 0.5 * (1.0 - x0);
    let exps = basis.exponents();
    let mut acc = [0.0; 4];
    gl_for_each(DEFAULT_ORDER, 0.0, 1.0, |r, w| {
        let g = w * 2.0 * r * (-(r - c).powi(2) / 0.3).exp();
        for (slot, &q) in acc.iter_mut().zip(&exps) {
            *slot += g * r.powf(2.0 * q);
        }
    });
    acc
}

/// Exact moments and velocity of the 1D accuracy case at `(x, t)`, for `t < 1`.
///
/// Droplets left of `x = 0.5` move with `u = 0.5 - x₀` and all reach `x = 0.5` at
/// `t = 1`; the rest are at rest.
pub fn transport1d_point(basis: ExponentBasis, x: f64, t: f64) -> ([f64; 4], f64) {
    let (x0, jac) = if x < 0.5 { ((x - 0.5 * t) / (1.0 - t), 1.0 / (1.0 - t)) } else { (x, 1.0) };
    let u = if x0 < 0.5 { 0.5 - x0 } else { 0.0 };
    let n = 10.0 * (-(x0 - 0.25).powi(2) / 0.01).exp() * jac;
    (transport1d_size_moments(basis, x0).map(|v| v * n), u)
}

/// Cell average of the exact 1D solution over `[a, b]`; the kink at `x = 0.5` is a
/// panel boundary.
pub fn transport1d_cell(basis: ExponentBasis, a: f64, b: f64, t: f64) -> CellState {
    let mut panels = vec![(a, b)];
    if a < 0.5 && b > 0.5 {
        panels = vec![(a, 0.5), (0.5, b)];
    }
    let si = basis.surface_index();
    let (mut m, mut mom) = ([0.0; 4], 0.0);
    for (lo, hi) in panels {
        gl_for_each(CELL_POINTS, lo, hi, |x, w| {
            let (v, u) = transport1d_point(basis, x, t);
            for k in 0..4 {
                m[k] += w * v[k];
            }
            mom += w * v[si] * u;
        });
    }
    let h = b - a;
    let moments = MomentVector::new(basis, m.map(|v| v / h));
    let mut c = CellState::new(moments, [0.0; 2], [0.0; 2]);
    c.momentum = [mom / h, 0.0];
    c.sync_velocity(0.0);
    c
}

/// Cells of the 1D accuracy case on `[0, 1]` at time `t`.
pub fn transport1d_cells(basis: ExponentBasis, nx: usize, t: f64) -> Vec<CellState> {
    let dx = 1.0 / nx as f64;
    (0..nx).map(|i| transport1d_cell(basis, i as f64 * dx, (i + 1) as f64 * dx, t)).collect()
}

/// Two Gaussian packets of uniform size distribution moving toward each other.
pub fn crossing1d_cells(basis: ExponentBasis, nx: usize) -> Vec<CellState> {
    let dx = 1.0 / nx as f64;
    let sizes = indicator_moments(basis, 0.0, 1.0);
    let si = basis.surface_index();
    (0..nx)
        .map(|i| {
            let (a, b) = (i as f64 * dx, (i + 1) as f64 * dx);
            let g = |xc: f64| gl_sum(CELL_POINTS, a, b, |x| (-(x - xc).powi(2) / 0.01).exp()) / dx;
            let (g1, g2) = (g(0.25), g(0.75));
            let moments = MomentVector::new(basis, sizes.map(|v| v * (g1 + g2)));
            let mut c = CellState::new(moments, [0.0; 2], [0.0; 2]);
            c.momentum = [0.5 * sizes[si] * (g1 - g2), 0.0];
            c.sync_velocity(0.0);
            c
        })
        .collect()
}

/// Spatial factor of the 2D spray, cut off at `√2 r` from the center.
fn tg_blob(x: f64, y: f64) -> f64 {
    let d2 = (x - TG_CENTER[0]).powi(2) + (y - TG_CENTER[1]).powi(2);
    if d2 < 2.0 * TG_RADIUS * TG_RADIUS {
        (-d2 / (TG_RADIUS * TG_RADIUS)).exp()
    } else {
        0.0
    }
}

/// Initial 2D grid, row-major, droplets moving with the gas.
pub fn taylor_green_cells(basis: ExponentBasis, nx: usize, ny: usize) -> Vec<CellState> {
    let (dx, dy) = (1.0 / nx as f64, 1.0 / ny as f64);
    let sizes = indicator_moments(basis, TG_SIZES.0, TG_SIZES.1);
    (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let (x0, y0) = (i as f64 * dx, j as f64 * dy);
            let mut avg = 0.0;
            gl_for_each(CELL_POINTS, x0, x0 + dx, |x, wx| {
                gl_for_each(CELL_POINTS, y0, y0 + dy, |y, wy| avg += wx * wy * tg_blob(x, y));
            });
            avg /= dx * dy;
            let gas = taylor_green_gas(x0 + 0.5 * dx, y0 + 0.5 * dy);
            CellState::new(MomentVector::new(basis, sizes.map(|v| v * avg)), gas, gas)
        })
        .collect()
}
