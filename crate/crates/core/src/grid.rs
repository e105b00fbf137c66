//! Uniform 1-D mesh and the evolving two-lane state.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Uniform cell-centred mesh on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{x_min}, {x_max}]")));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!("x_max ({x_max}) must exceed x_min ({x_min})")));
        }
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n_cells}")));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        Ok(Self { x_min, x_max, n_cells, dx })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx
    }

    /// Left edge of cell `j`; `interface(n_cells)` is the right end of the domain.
    pub fn interface(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.cell_center(j)).collect()
    }

    /// Same geometry up to rounding in the bounds.
    pub fn matches(&self, other: &Grid) -> bool {
        self.n_cells == other.n_cells
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.length()
            && (self.x_max - other.x_max).abs() <= 1e-12 * self.length()
    }
}

/// Cell averages of both lane densities at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneState {
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
    pub t: f64,
}

impl LaneState {
    pub fn new(rho1: Vec<f64>, rho2: Vec<f64>, t: f64) -> Result<Self> {
        if rho1.len() != rho2.len() {
            return Err(Error::LengthMismatch { expected: rho1.len(), found: rho2.len() });
        }
        Ok(Self { rho1, rho2, t })
    }

    pub fn uniform(n_cells: usize, c1: f64, c2: f64) -> Self {
        Self { rho1: alloc::vec![c1; n_cells], rho2: alloc::vec![c2; n_cells], t: 0.0 }
    }

    pub fn n_cells(&self) -> usize {
        self.rho1.len()
    }

    pub fn lane(&self, lane: usize) -> &[f64] {
        match lane {
            0 => &self.rho1,
            _ => &self.rho2,
        }
    }

    pub fn check_len(&self, grid: &Grid) -> Result<()> {
        for lane in [&self.rho1, &self.rho2] {
            if lane.len() != grid.n_cells() {
                return Err(Error::LengthMismatch { expected: grid.n_cells(), found: lane.len() });
            }
        }
        Ok(())
    }

    /// Fails on the first cell outside `[-tol, rho_max + tol]`.
    pub fn check_bounds(&self, rho_max: [f64; 2], tol: f64) -> Result<()> {
        for (lane, (values, cap)) in [&self.rho1, &self.rho2].into_iter().zip(rho_max).enumerate() {
            for (cell, &value) in values.iter().enumerate() {
                if !(value >= -tol && value <= cap + tol) {
                    return Err(Error::BoundViolation { lane: lane + 1, cell, value, t: self.t });
                }
            }
        }
        Ok(())
    }

    /// Combined mass `sum_j (rho1[j] + rho2[j]) * dx`.
    pub fn total_mass(&self, dx: f64) -> f64 {
        let s1: f64 = self.rho1.iter().sum();
        let s2: f64 = self.rho2.iter().sum();
        (s1 + s2) * dx
    }
}
