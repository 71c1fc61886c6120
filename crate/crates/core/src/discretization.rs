//! Uniform grids and the complex-scaled sinc-DVR Hamiltonian.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PotentialSpec, ScalingAngle, UnitSystem};

pub const MIN_GRID_POINTS: usize = 64;

/// Uniform grid symmetric about the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Position of node `i`. Nodes are placed as `(i − (n−1)/2)·dx` so that
    /// `x(i) == -x(mirror(i))` holds bit-exactly.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * (self.n_points - 1) as f64) * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the node at −x(i).
    pub fn mirror(&self, i: usize) -> usize {
        self.n_points - 1 - i
    }
}

pub fn build_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid> {
    let symmetric = x_min.is_finite()
        && x_max.is_finite()
        && x_min < 0.0
        && x_max > 0.0
        && (x_min + x_max).abs() <= 1e-12 * x_max;
    if !symmetric {
        return Err(Error::AsymmetricDomain { x_min, x_max });
    }
    if n_points < MIN_GRID_POINTS {
        return Err(Error::TooFewPoints {
            got: n_points,
            min: MIN_GRID_POINTS,
        });
    }
    Ok(Grid {
        x_min: -x_max,
        x_max,
        n_points,
    })
}

/// Sinc-DVR kinetic energy matrix (ħ²/m)·[π²/(6dx²) on the diagonal,
/// (−1)^{i−j}/(dx²(i−j)²) off it], which is p²/2m in atomic units.
pub fn kinetic_entry(i: usize, j: usize, dx: f64) -> f64 {
    let scale = UnitSystem::HBAR * UnitSystem::HBAR / UnitSystem::MASS;
    if i == j {
        scale * PI * PI / (6.0 * dx * dx)
    } else {
        let k = i as f64 - j as f64;
        scale * alternating_sign(i, j) / (dx * dx * k * k)
    }
}

/// Sinc-DVR first-derivative matrix, antisymmetric: (−1)^{i−j}/(dx(i−j)).
pub fn derivative_entry(i: usize, j: usize, dx: f64) -> f64 {
    if i == j {
        0.0
    } else {
        let k = i as f64 - j as f64;
        alternating_sign(i, j) / (dx * k)
    }
}

fn alternating_sign(i: usize, j: usize) -> f64 {
    if (i + j).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn kinetic_matrix(grid: &Grid) -> Mat<f64> {
    let dx = grid.dx();
    Mat::from_fn(grid.n_points, grid.n_points, |i, j| kinetic_entry(i, j, dx))
}

/// p̂²e^{−2iθ}/2m + V(x·e^{iθ}) on a real grid.
#[derive(Debug, Clone)]
pub struct ScaledHamiltonian {
    pub matrix: Mat<Complex64>,
    pub theta: ScalingAngle,
    pub grid: Grid,
    pub potential: PotentialSpec,
}

impl ScaledHamiltonian {
    pub fn dim(&self) -> usize {
        self.grid.n_points
    }

    /// Largest |H_ij − H_ji| relative to the largest |H_ij|.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut scale = 0.0f64;
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(self.matrix[(i, j)].norm());
                if j > i {
                    defect = defect.max((self.matrix[(i, j)] - self.matrix[(j, i)]).norm());
                }
            }
        }
        defect / scale
    }
}

pub fn scaled_potential(grid: &Grid, potential: &PotentialSpec, theta: ScalingAngle) -> Result<Vec<Complex64>> {
    let eta = theta.eta();
    (0..grid.n_points)
        .map(|i| {
            let x = grid.x(i);
            let v = potential.eval(eta * x);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::PotentialNotEvaluable { x })
            }
        })
        .collect()
}

pub fn assemble(grid: &Grid, potential: &PotentialSpec, theta: ScalingAngle) -> Result<ScaledHamiltonian> {
    let diag = scaled_potential(grid, potential, theta)?;
    let rot = Complex64::from_polar(1.0, -2.0 * theta.radians());
    let dx = grid.dx();
    let matrix = Mat::from_fn(grid.n_points, grid.n_points, |i, j| {
        let t = rot * kinetic_entry(i, j, dx);
        if i == j {
            t + diag[i]
        } else {
            t
        }
    });
    Ok(ScaledHamiltonian {
        matrix,
        theta,
        grid: *grid,
        potential: *potential,
    })
}
