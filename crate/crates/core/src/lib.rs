//! Spontaneous-emission rates and radiative shifts of resonance states in
//! one-dimensional potentials, computed with complex scaling.
//!
//! The pipeline is: [`discretization::assemble`] the rotated Hamiltonian on a
//! sinc-DVR grid, [`spectral::diagonalize`] it into bound, resonance and
//! rotated-continuum states, build c-product dipoles with
//! [`transition::build_table`], then sum partial rates and shifts with
//! [`emission::total_rate`] and [`emission::total_shift`].
//!
//! ```no_run
//! use cs_emission::{Pipeline, ScalingAngle};
//!
//! let pipeline = Pipeline::double_barrier();
//! let solved = pipeline.solve(ScalingAngle::new(0.15)?)?;
//! let gamma = solved.rate(3, &pipeline.emission)?;
//! println!("{:.6e}", gamma.total);
//! # Ok::<(), cs_emission::Error>(())
//! ```

pub mod discretization;
pub mod emission;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod spectral;
pub mod transition;
pub mod validation;

pub use discretization::{assemble, build_grid, Grid, ScaledHamiltonian};
pub use emission::{arg_neg, partial_rate, partial_shift, total_rate, total_shift, DecayBreakdown, EmissionParams, ShiftBreakdown};
pub use error::{Error, Result};
pub use model::{complex_frequency, ComplexEnergy, PotentialSpec, ScalingAngle, UnitSystem, C_LIGHT_AU};
pub use pipeline::{Pipeline, Solved};
pub use spectral::{diagonalize, EigenState, Parity, Spectrum, StateKind, Tolerances};
pub use transition::{build_table, TransitionTable};
