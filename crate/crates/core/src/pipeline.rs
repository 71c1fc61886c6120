//! Assemble → diagonalize → transition table, bundled with the settings a
//! full run needs.

use serde::{Deserialize, Serialize};

use crate::discretization::{assemble, build_grid, Grid};
use crate::emission::{total_rate, total_shift, DecayBreakdown, EmissionParams, ShiftBreakdown};
use crate::error::Result;
use crate::model::{PotentialSpec, ScalingAngle, UnitSystem};
use crate::spectral::{diagonalize, Spectrum, Tolerances};
use crate::transition::{build_table, TransitionTable};

/// Default half-width of the box for the double-barrier well. The third
/// resonance has a long tail along the rotated ray, so the box is much wider
/// than the potential itself.
pub const DEFAULT_X_MAX: f64 = 160.0;
pub const DEFAULT_N_POINTS: usize = 801;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub potential: PotentialSpec,
    pub grid: Grid,
    pub emission: EmissionParams,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub spectrum: Spectrum,
    pub table: TransitionTable,
}

impl Solved {
    pub fn rate(&self, ordinal: usize, params: &EmissionParams) -> Result<DecayBreakdown> {
        total_rate(ordinal, &self.spectrum, &self.table, params)
    }

    pub fn shift(&self, ordinal: usize, params: &EmissionParams) -> Result<ShiftBreakdown> {
        total_shift(ordinal, &self.spectrum, &self.table, params)
    }
}

impl Pipeline {
    pub fn new(potential: PotentialSpec, grid: Grid) -> Self {
        Self {
            potential,
            grid,
            emission: EmissionParams::default(),
            tolerances: Tolerances::default(),
        }
    }

    /// The double-barrier well on the default grid.
    pub fn double_barrier() -> Self {
        let grid = build_grid(-DEFAULT_X_MAX, DEFAULT_X_MAX, DEFAULT_N_POINTS).expect("default grid is valid");
        Self::new(PotentialSpec::double_barrier(), grid)
    }

    pub fn with_units(mut self, units: UnitSystem) -> Self {
        self.emission.units = units;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = grid;
        self
    }

    pub fn spectrum(&self, theta: ScalingAngle) -> Result<Spectrum> {
        let h = assemble(&self.grid, &self.potential, theta)?;
        diagonalize(&h, &self.tolerances)
    }

    pub fn solve(&self, theta: ScalingAngle) -> Result<Solved> {
        let spectrum = self.spectrum(theta)?;
        let table = build_table(&spectrum);
        Ok(Solved { spectrum, table })
    }
}
