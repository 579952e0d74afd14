//! Kinetic finite-volume transport of moments and momentum.
//!
//! Droplets in a cell all move with the local velocity, so the amount crossing an
//! interface during `Δt` is the integral of the reconstructed state over the part of
//! the cell whose trajectories reach the interface. The first-order scheme uses
//! constant profiles, the second-order one the limited linear profiles of
//! [`reconstruct`]. Two-dimensional problems are split direction by direction.

mod reconstruct;
mod split;

pub use reconstruct::{slope_phi, CellReconstruction};
pub use split::{split_step_2d, Grid2D, Splitting};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drag::CellState;
use crate::error::{Error, Result};
use reconstruct::{reconstruct, Gl4, Summary};

/// Number of ghost cells on each side.
pub const GHOSTS: usize = 2;

/// Spatial order of the transport scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    First,
    Second,
}

impl TryFrom<u8> for Order {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(format!("transport order must be 1 or 2, got {v}")),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        match o {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

/// Ghost-cell policy at the ends of a line of cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Zero-gradient copies of the edge cells.
    Outflow,
    /// Given ghost states, ordered from the outside in on the left (`x₋₂, x₋₁`) and
    /// from the inside out on the right (`xₙ, xₙ₊₁`).
    Prescribed { left: [CellState; 2], right: [CellState; 2] },
}

/// A line of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub cells: Vec<CellState>,
    pub dx: f64,
    pub boundary: Boundary,
    /// Cells with `m₀` at or below this value get a zero velocity after an update.
    pub vacuum_threshold: f64,
}

impl Field1D {
    pub fn new(cells: Vec<CellState>, dx: f64, boundary: Boundary) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidArgument(format!("cell width must be positive, got {dx}")));
        }
        if cells.is_empty() {
            return Err(Error::InvalidArgument("a field needs at least one cell".into()));
        }
        Ok(Self { cells, dx, boundary, vacuum_threshold: 0.0 })
    }

    pub fn with_vacuum_threshold(mut self, threshold: f64) -> Self {
        self.vacuum_threshold = threshold;
        self
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells with `GHOSTS` ghost layers on each side.
    pub fn padded(&self) -> Vec<CellState> {
        pad(&self.cells, &self.boundary)
    }

    /// Sum of each transported component over the cells (times `Δx`).
    pub fn totals(&self) -> [f64; 6] {
        let mut t = [0.0; 6];
        for c in &self.cells {
            for k in 0..4 {
                t[k] += c.moments.values[k] * self.dx;
            }
            t[4] += c.momentum[0] * self.dx;
            t[5] += c.momentum[1] * self.dx;
        }
        t
    }
}

fn pad(cells: &[CellState], boundary: &Boundary) -> Vec<CellState> {
    let n = cells.len();
    let mut out = Vec::with_capacity(n + 2 * GHOSTS);
    match boundary {
        Boundary::Periodic => {
            out.extend((0..GHOSTS).map(|g| cells[(n * GHOSTS + g - GHOSTS) % n]));
            out.extend_from_slice(cells);
            out.extend((0..GHOSTS).map(|g| cells[g % n]));
        }
        Boundary::Outflow => {
            out.extend(std::iter::repeat(cells[0]).take(GHOSTS));
            out.extend_from_slice(cells);
            out.extend(std::iter::repeat(cells[n - 1]).take(GHOSTS));
        }
        Boundary::Prescribed { left, right } => {
            out.extend_from_slice(left);
            out.extend_from_slice(cells);
            out.extend_from_slice(right);
        }
    }
    out
}

/// Courant number `Δt max|u| / Δx` along `axis`.
pub fn courant(cells: &[CellState], dx: f64, dt: f64, axis: usize) -> f64 {
    let umax = cells.iter().map(|c| c.velocity[axis].abs()).fold(0.0, f64::max);
    dt * umax / dx
}

/// The six transported components of a cell.
#[inline]
fn components(c: &CellState) -> [f64; 6] {
    let m = c.moments.values;
    [m[0], m[1], m[2], m[3], c.momentum[0], c.momentum[1]]
}

/// Upwind kinetic flux at the interface between two constant cells, along x.
pub fn flux_order1(left: &CellState, right: &CellState) -> [f64; 6] {
    flux_order1_axis(left, right, 0)
}

fn flux_order1_axis(left: &CellState, right: &CellState, axis: usize) -> [f64; 6] {
    let (l, r) = (components(left), components(right));
    let (ul, ur) = (left.velocity[axis].max(0.0), right.velocity[axis].min(0.0));
    [0, 1, 2, 3, 4, 5].map(|k| l[k] * ul + r[k] * ur)
}

/// Part `[lo, hi]` of a cell (local coordinates) whose trajectories cross its right
/// (`right = true`) or left edge within `dt`.
#[inline]
fn departure(r: &CellReconstruction, h: f64, dt: f64, axis: usize, right: bool) -> Option<(f64, f64)> {
    let (ubar, du) = (r.u[axis], r.du[axis]);
    let c = 1.0 + dt * du;
    // ξ + dt (ū + Du ξ) crosses ±h: ξ c > h - dt ū (right) or ξ c < -h - dt ū (left).
    let target = if right { h - dt * ubar } else { -h - dt * ubar };
    if c <= 0.0 {
        let all = if right { 0.0 > target } else { 0.0 < target };
        return all.then_some((-h, h));
    }
    let edge = target / c;
    let (lo, hi) = if right { (edge.max(-h), h) } else { (-h, edge.min(h)) };
    (hi > lo).then_some((lo, hi))
}

#[inline]
fn integrate_state(r: &CellReconstruction, lo: f64, hi: f64, gl: &Gl4) -> [f64; 6] {
    let mut acc = [0.0; 6];
    for (xi, w) in gl.mapped(lo, hi) {
        let s = r.state_at(xi);
        for k in 0..6 {
            acc[k] += w * s[k];
        }
    }
    acc
}

/// Amount moved across the interface between reconstructions `l` and `r` during `dt`.
fn transfer(l: &CellReconstruction, r: &CellReconstruction, dx: f64, dt: f64, axis: usize, gl: &Gl4) -> [f64; 6] {
    let h = 0.5 * dx;
    let mut t = [0.0; 6];
    if let Some((lo, hi)) = departure(l, h, dt, axis, true) {
        let f = integrate_state(l, lo, hi, gl);
        for k in 0..6 {
            t[k] += f[k];
        }
    }
    if let Some((lo, hi)) = departure(r, h, dt, axis, false) {
        let f = integrate_state(r, lo, hi, gl);
        for k in 0..6 {
            t[k] -= f[k];
        }
    }
    t
}

/// Reconstructions of the padded cells `1..len-1` (one ghost layer stays available on each side).
fn reconstruct_all(
    padded: &[CellState],
    dx: f64,
    dt: f64,
    order: Order,
    vacuum: f64,
    gl: &Gl4,
) -> Vec<CellReconstruction> {
    match order {
        Order::First => padded[1..padded.len() - 1].iter().map(CellReconstruction::constant).collect(),
        Order::Second => {
            let summaries: Vec<Summary> = padded.iter().map(|c| Summary::of(c, vacuum)).collect();
            (1..padded.len() - 1)
                .map(|i| reconstruct(&summaries[i - 1], &padded[i], &summaries[i], &summaries[i + 1], dx, dt, gl))
                .collect()
        }
    }
}

/// Reconstruction of cell `i` of a field with its ghost cells.
pub fn reconstruct_cell(i: usize, field: &Field1D, dt: f64) -> Result<CellReconstruction> {
    if i >= field.len() {
        return Err(Error::InvalidArgument(format!("cell {i} out of range for {} cells", field.len())));
    }
    let padded = field.padded();
    let gl = Gl4::new();
    let k = i + GHOSTS;
    let s: Vec<Summary> = padded[k - 1..=k + 1].iter().map(|c| Summary::of(c, field.vacuum_threshold)).collect();
    Ok(reconstruct(&s[0], &padded[k], &s[1], &s[2], field.dx, dt, &gl))
}

/// Second-order flux at interface `i + ½` (between cells `i` and `i + 1`, which may be
/// a ghost cell), along x.
pub fn flux_order2(i: usize, field: &Field1D, dt: f64) -> Result<[f64; 6]> {
    if i >= field.len() {
        return Err(Error::InvalidArgument(format!("interface {i}+1/2 out of range for {} cells", field.len())));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let padded = field.padded();
    let gl = Gl4::new();
    let window = &padded[i + 1..i + 1 + 2 + 2];
    let rec = reconstruct_all(window, field.dx, dt, Order::Second, field.vacuum_threshold, &gl);
    let t = transfer(&rec[0], &rec[1], field.dx, dt, 0, &gl);
    Ok(t.map(|v| v / dt))
}

/// One conservative update of a line of cells along `axis` (0 for x, 1 for y).
pub(crate) fn advance_line(
    cells: &[CellState],
    boundary: &Boundary,
    dx: f64,
    dt: f64,
    order: Order,
    axis: usize,
    vacuum: f64,
    gl: &Gl4,
) -> Vec<CellState> {
    let n = cells.len();
    let padded = pad(cells, boundary);
    // rec[j] is padded cell j + 1, i.e. physical cell j - 1.
    let rec = reconstruct_all(&padded, dx, dt, order, vacuum, gl);
    let transfers: Vec<[f64; 6]> = (0..=n)
        .map(|j| match order {
            Order::First => flux_order1_axis(&padded[j + 1], &padded[j + 2], axis).map(|f| f * dt),
            Order::Second => transfer(&rec[j], &rec[j + 1], dx, dt, axis, gl),
        })
        .collect();
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut u = components(c);
            for k in 0..6 {
                u[k] -= (transfers[i + 1][k] - transfers[i][k]) / dx;
            }
            let moments = crate::moment_space::MomentVector { values: [u[0], u[1], u[2], u[3]], ..c.moments };
            let mut out = CellState { moments, momentum: [u[4], u[5]], velocity: c.velocity, gas_velocity: c.gas_velocity };
            out.sync_velocity(vacuum);
            out
        })
        .collect()
}

/// Advances a line of cells by `dt` along x.
pub fn advance_1d(field: &Field1D, dt: f64, order: Order) -> Result<Field1D> {
    advance_1d_axis(field, dt, order, 0)
}

/// Advances a line of cells by `dt`, transporting with velocity component `axis`.
pub fn advance_1d_axis(field: &Field1D, dt: f64, order: Order, axis: usize) -> Result<Field1D> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be non-negative, got {dt}")));
    }
    let c = courant(&field.cells, field.dx, dt, axis);
    if c > 1.0 {
        return Err(Error::Cfl { courant: c });
    }
    let gl = Gl4::new();
    let cells = advance_line(&field.cells, &field.boundary, field.dx, dt, order, axis, field.vacuum_threshold, &gl);
    Ok(Field1D { cells, ..field.clone() })
}

/// Advances several independent lines in parallel.
pub(crate) fn advance_lines(
    lines: &mut [Vec<CellState>],
    boundary: &Boundary,
    dx: f64,
    dt: f64,
    order: Order,
    axis: usize,
    vacuum: f64,
) {
    let gl = Gl4::new();
    lines.par_iter_mut().for_each(|line| {
        *line = advance_line(line, boundary, dx, dt, order, axis, vacuum, &gl);
    });
}
