//! c-product transition dipoles along the rotated contour.

use faer::Mat;
use num_complex::Complex64;

use crate::discretization::{derivative_entry, Grid};
use crate::error::{Error, Result};
use crate::model::{complex_frequency, ScalingAngle, UnitSystem};
use crate::spectral::{EigenState, Spectrum};

/// Dipoles d, complex frequencies f and products Z = d²f for every ordered
/// pair of states of one spectrum. Row = initial state, column = final.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    pub d: Mat<Complex64>,
    pub f: Mat<Complex64>,
    pub z: Mat<Complex64>,
}

impl TransitionTable {
    pub fn len(&self) -> usize {
        self.d.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row_z(&self, n: usize) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.z[(n, k)]).collect()
    }
}

fn check_len(state: &EigenState, grid: &Grid) -> Result<()> {
    if state.wavefunction.len() != grid.n_points() {
        return Err(Error::GridMismatch {
            got: state.wavefunction.len(),
            expected: grid.n_points(),
        });
    }
    Ok(())
}

/// d_ab = q·e^{iθ}·Σ_i u_a(x_i)·x_i·u_b(x_i)·dx, the contour integral
/// q∫ψ_a(ξ) ξ ψ_b(ξ) dξ along ξ = x·e^{iθ}.
pub fn dipole_element(a: &EigenState, b: &EigenState, grid: &Grid, theta: ScalingAngle) -> Result<Complex64> {
    check_len(a, grid)?;
    check_len(b, grid)?;
    let sum: Complex64 = a
        .wavefunction
        .iter()
        .zip(&b.wavefunction)
        .enumerate()
        .map(|(i, (ua, ub))| ua * ub * grid.x(i))
        .sum();
    Ok(sum * theta.eta() * (grid.dx() * UnitSystem::CHARGE))
}

/// Momentum element p_ab = (u_b| p̂e^{−iθ} |u_a) with the sinc-DVR derivative.
pub fn momentum_element(a: &EigenState, b: &EigenState, grid: &Grid, theta: ScalingAngle) -> Result<Complex64> {
    check_len(a, grid)?;
    check_len(b, grid)?;
    let n = grid.n_points();
    let dx = grid.dx();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut du = Complex64::new(0.0, 0.0);
        for j in 0..n {
            du += a.wavefunction[j] * derivative_entry(i, j, dx);
        }
        acc += b.wavefunction[i] * du;
    }
    let minus_i_hbar = Complex64::new(0.0, -UnitSystem::HBAR);
    Ok(acc * minus_i_hbar * theta.eta().conj() * dx)
}

/// Relative residual of p_ab = −i(m/qħ)·f_ab·d_ab, normalized by max(|p_ab|, ε).
/// Returns 0 for a state paired with itself.
pub fn momentum_consistency(a: &EigenState, b: &EigenState, grid: &Grid, theta: ScalingAngle) -> Result<f64> {
    if a.index == b.index && a.wavefunction == b.wavefunction {
        check_len(a, grid)?;
        return Ok(0.0);
    }
    let p = momentum_element(a, b, grid, theta)?;
    let d = dipole_element(a, b, grid, theta)?;
    let f = complex_frequency(a.energy, b.energy);
    let factor = Complex64::new(0.0, -UnitSystem::MASS / (UnitSystem::CHARGE * UnitSystem::HBAR));
    let rhs = factor * f * d;
    Ok((p - rhs).norm() / p.norm().max(1e-300))
}

pub fn build_table(spectrum: &Spectrum) -> TransitionTable {
    let grid = &spectrum.grid;
    let n = spectrum.len();
    let npts = grid.n_points();
    let u = Mat::from_fn(npts, n, |i, k| spectrum.states[k].wavefunction[i]);
    let xu = Mat::from_fn(npts, n, |i, k| spectrum.states[k].wavefunction[i] * grid.x(i));
    let scale = spectrum.theta.eta() * (grid.dx() * UnitSystem::CHARGE);
    let raw = u.transpose() * &xu;
    // Symmetrize so d_nm == d_mn holds bit-exactly.
    let d = Mat::from_fn(n, n, |a, b| (raw[(a, b)] + raw[(b, a)]) * 0.5 * scale);
    let f = Mat::from_fn(n, n, |a, b| complex_frequency(spectrum.states[a].energy, spectrum.states[b].energy));
    let z = Mat::from_fn(n, n, |a, b| d[(a, b)] * d[(a, b)] * f[(a, b)]);
    TransitionTable { d, f, z }
}
