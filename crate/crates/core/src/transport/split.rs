use serde::{Deserialize, Serialize};

use super::{advance_lines, courant, Boundary, Order};
use crate::drag::CellState;
use crate::error::{Error, Result};

/// Order of the directional sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    /// X(Δt/2), Y(Δt), X(Δt/2).
    Strang,
    /// X(Δt), Y(Δt).
    LieXy,
    /// Y(Δt), X(Δt).
    LieYx,
}

/// Row-major grid of cells, `cells[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub cells: Vec<CellState>,
    pub boundary_x: Boundary,
    pub boundary_y: Boundary,
    pub vacuum_threshold: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, cells: Vec<CellState>, boundary: Boundary) -> Result<Self> {
        if nx == 0 || ny == 0 || cells.len() != nx * ny {
            return Err(Error::InvalidArgument(format!("{} cells do not fill a {nx}x{ny} grid", cells.len())));
        }
        if !(dx > 0.0 && dy > 0.0) {
            return Err(Error::InvalidArgument(format!("cell sizes must be positive, got {dx}, {dy}")));
        }
        if matches!(boundary, Boundary::Prescribed { .. }) {
            return Err(Error::InvalidArgument("prescribed ghost cells are only supported in 1D".into()));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            cells,
            boundary_x: boundary.clone(),
            boundary_y: boundary,
            vacuum_threshold: 0.0,
        })
    }

    pub fn with_vacuum_threshold(mut self, threshold: f64) -> Self {
        self.vacuum_threshold = threshold;
        self
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell(&self, i: usize, j: usize) -> &CellState {
        &self.cells[self.index(i, j)]
    }

    /// Cell-center coordinates on `[0, nx dx] × [0, ny dy]`.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    /// Largest directional Courant number for a step `dt`.
    pub fn courant(&self, dt: f64) -> f64 {
        courant(&self.cells, self.dx, dt, 0).max(courant(&self.cells, self.dy, dt, 1))
    }

    fn sweep(&mut self, dt: f64, order: Order, axis: usize) {
        let (nx, ny) = (self.nx, self.ny);
        if axis == 0 {
            let mut rows: Vec<Vec<CellState>> = self.cells.chunks(nx).map(|r| r.to_vec()).collect();
            advance_lines(&mut rows, &self.boundary_x, self.dx, dt, order, 0, self.vacuum_threshold);
            for (j, row) in rows.into_iter().enumerate() {
                self.cells[j * nx..(j + 1) * nx].copy_from_slice(&row);
            }
        } else {
            let mut cols: Vec<Vec<CellState>> =
                (0..nx).map(|i| (0..ny).map(|j| self.cells[j * nx + i]).collect()).collect();
            advance_lines(&mut cols, &self.boundary_y, self.dy, dt, order, 1, self.vacuum_threshold);
            for (i, col) in cols.into_iter().enumerate() {
                for (j, c) in col.into_iter().enumerate() {
                    self.cells[j * nx + i] = c;
                }
            }
        }
    }
}

/// One dimensionally split transport step of the whole grid.
pub fn split_step_2d(grid: &Grid2D, dt: f64, order: Order, splitting: Splitting) -> Result<Grid2D> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be non-negative, got {dt}")));
    }
    let c = grid.courant(dt);
    if c > 1.0 {
        return Err(Error::Cfl { courant: c });
    }
    let mut g = grid.clone();
    match splitting {
        Splitting::Strang => {
            g.sweep(0.5 * dt, order, 0);
            g.sweep(dt, order, 1);
            g.sweep(0.5 * dt, order, 0);
        }
        Splitting::LieXy => {
            g.sweep(dt, order, 0);
            g.sweep(dt, order, 1);
        }
        Splitting::LieYx => {
            g.sweep(dt, order, 1);
            g.sweep(dt, order, 0);
        }
    }
    Ok(g)
}
