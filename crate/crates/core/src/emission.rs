//! Spontaneous-emission decay rates and radiative shifts of discrete states.
//!
//! For an initial state n and every final state n' the partial rate is
//!
//! ```text
//! Δγ_nn' = −1/(2πc) · [Im Z·ln(|f|/Ω) + Re Z·arg(−f)]
//! Δ_nn'  =  1/(4πc) · [Re Z·ln(|f|/Ω) − Im Z·arg(−f)]
//! ```
//!
//! with Z = d²f, Ω the frequency cutoff (mc²/ħ = c² by default) and the
//! branch arg(−f) = Arg(f) − π. Finals labeled continuum are the quadrature
//! nodes of the rotated-continuum integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UnitSystem;
use crate::spectral::{EigenState, Spectrum, StateKind};
use crate::transition::TransitionTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionParams {
    pub units: UnitSystem,
    /// Overrides the Compton cutoff c².
    pub cutoff_sq: Option<f64>,
}

impl EmissionParams {
    pub fn new(units: UnitSystem) -> Self {
        Self { units, cutoff_sq: None }
    }

    pub fn with_cutoff(mut self, cutoff_sq: f64) -> Self {
        self.cutoff_sq = Some(cutoff_sq);
        self
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff_sq.unwrap_or_else(|| self.units.compton_frequency())
    }

    pub fn c(&self) -> f64 {
        self.units.c_light()
    }
}

impl Default for EmissionParams {
    fn default() -> Self {
        Self::new(UnitSystem::default())
    }
}

/// Arg(f) − π, with Arg the principal argument in (−π, π]. Range (−2π, 0].
pub fn arg_neg(f: Complex64) -> Result<f64> {
    if f.re == 0.0 && f.im == 0.0 {
        return Err(Error::ZeroArgument);
    }
    let mut arg = f.im.atan2(f.re);
    // atan2(-0.0, x<0) = -π, outside the principal range
    if arg == -PI {
        arg = PI;
    }
    Ok(arg - PI)
}

/// Partial decay rate for one transition. A vanishing frequency (the
/// self-transition) contributes nothing.
pub fn partial_rate(z: Complex64, f: Complex64, c: f64, cutoff_sq: f64) -> f64 {
    match arg_neg(f) {
        Ok(phase) => -(z.im * (f.norm() / cutoff_sq).ln() + z.re * phase) / (2.0 * PI * c),
        Err(_) => 0.0,
    }
}

/// Partial radiative energy shift for one transition.
pub fn partial_shift(z: Complex64, f: Complex64, c: f64, cutoff_sq: f64) -> f64 {
    match arg_neg(f) {
        Ok(phase) => (z.re * (f.norm() / cutoff_sq).ln() - z.im * phase) / (4.0 * PI * c),
        Err(_) => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialRate {
    pub final_index: usize,
    pub kind: StateKind,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulativePoint {
    /// Number of discrete finals (initial state excluded) summed so far.
    pub n_states_included: usize,
    pub final_index: usize,
    pub cumulative_rate: f64,
    pub cumulative_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBreakdown {
    pub initial_index: usize,
    pub initial_ordinal: usize,
    pub partials: Vec<PartialRate>,
    pub discrete_sum: f64,
    pub continuum_sum: f64,
    pub total: f64,
    pub cumulative: Vec<CumulativePoint>,
}

impl DecayBreakdown {
    pub fn partial(&self, final_index: usize) -> Option<f64> {
        self.partials.iter().find(|p| p.final_index == final_index).map(|p| p.rate)
    }

    /// Share of the total reproduced by the first `k` discrete finals,
    /// 1 − |1 − S_k/γ|. Partial sums oscillate around γ, so overshoot and
    /// undershoot count alike.
    pub fn captured_fraction(&self, k: usize) -> Option<f64> {
        let point = self.cumulative.get(k.checked_sub(1)?)?;
        Some(1.0 - (1.0 - point.cumulative_fraction).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialShift {
    pub final_index: usize,
    pub kind: StateKind,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftBreakdown {
    pub initial_index: usize,
    pub initial_ordinal: usize,
    pub partials: Vec<PartialShift>,
    pub total: f64,
    pub cutoff: f64,
}

/// Smallest θ that exposes a resonance with energy ħω − iΓ/2.
pub fn exposure_angle(state: &EigenState) -> f64 {
    let (omega, gamma) = (state.energy.omega(), state.energy.gamma());
    if gamma <= 0.0 || omega <= 0.0 {
        0.0
    } else {
        0.5 * (gamma / (2.0 * UnitSystem::HBAR * omega)).atan()
    }
}

/// Validate the emitter: `ordinal` must name a discrete state that the
/// spectrum's θ exposes.
pub fn emitter(ordinal: usize, spectrum: &Spectrum) -> Result<&EigenState> {
    let state = spectrum.discrete(ordinal)?;
    if state.kind == StateKind::Resonance {
        let required = exposure_angle(state);
        if spectrum.theta.radians() <= required {
            return Err(Error::ThetaTooSmall {
                state: ordinal,
                theta: spectrum.theta.radians(),
                required,
            });
        }
    }
    Ok(state)
}

pub fn total_rate(
    ordinal: usize,
    spectrum: &Spectrum,
    table: &TransitionTable,
    params: &EmissionParams,
) -> Result<DecayBreakdown> {
    let n = emitter(ordinal, spectrum)?.index;
    let (c, cutoff) = (params.c(), params.cutoff());

    let partials: Vec<PartialRate> = spectrum
        .states
        .iter()
        .map(|s| PartialRate {
            final_index: s.index,
            kind: s.kind,
            rate: if s.index == n {
                0.0
            } else {
                partial_rate(table.z[(n, s.index)], table.f[(n, s.index)], c, cutoff)
            },
        })
        .collect();

    let discrete_sum: f64 = partials.iter().filter(|p| p.kind.is_discrete()).map(|p| p.rate).sum();
    let continuum_sum: f64 = partials.iter().filter(|p| !p.kind.is_discrete()).map(|p| p.rate).sum();
    let total = discrete_sum + continuum_sum;

    let mut running = 0.0;
    let cumulative = partials
        .iter()
        .filter(|p| p.kind.is_discrete() && p.final_index != n)
        .enumerate()
        .map(|(k, p)| {
            running += p.rate;
            CumulativePoint {
                n_states_included: k + 1,
                final_index: p.final_index,
                cumulative_rate: running,
                cumulative_fraction: running / total,
            }
        })
        .collect();

    Ok(DecayBreakdown {
        initial_index: n,
        initial_ordinal: ordinal,
        partials,
        discrete_sum,
        continuum_sum,
        total,
        cumulative,
    })
}

pub fn total_shift(
    ordinal: usize,
    spectrum: &Spectrum,
    table: &TransitionTable,
    params: &EmissionParams,
) -> Result<ShiftBreakdown> {
    let n = emitter(ordinal, spectrum)?.index;
    let (c, cutoff) = (params.c(), params.cutoff());
    let partials: Vec<PartialShift> = spectrum
        .states
        .iter()
        .map(|s| PartialShift {
            final_index: s.index,
            kind: s.kind,
            shift: if s.index == n {
                0.0
            } else {
                partial_shift(table.z[(n, s.index)], table.f[(n, s.index)], c, cutoff)
            },
        })
        .collect();
    let total = partials.iter().map(|p| p.shift).sum();
    Ok(ShiftBreakdown {
        initial_index: n,
        initial_ordinal: ordinal,
        partials,
        total,
        cutoff,
    })
}

/// Golden-rule rate Σ_{n'<n} ω_nn'·|d_nn'|²/(2c) over lower bound states of
/// a θ = 0 spectrum.
pub fn hermitian_rate(
    ordinal: usize,
    spectrum: &Spectrum,
    table: &TransitionTable,
    params: &EmissionParams,
) -> Result<f64> {
    if !spectrum.theta.is_hermitian() {
        return Err(Error::StateNotBound(ordinal));
    }
    let state = spectrum.discrete(ordinal).map_err(|_| Error::StateNotBound(ordinal))?;
    if state.kind != StateKind::Bound {
        return Err(Error::StateNotBound(ordinal));
    }
    let n = state.index;
    Ok(spectrum
        .states
        .iter()
        .take(n)
        .filter(|s| s.kind == StateKind::Bound)
        .map(|s| table.f[(n, s.index)].re * table.d[(n, s.index)].norm_sqr() / (2.0 * params.c()))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_grid};
    use crate::model::{PotentialSpec, ScalingAngle};
    use crate::spectral::{diagonalize, Tolerances};
    use crate::transition::build_table;
    use proptest::prelude::*;

    const C: f64 = 137.035999;

    #[test]
    fn branch_values() {
        assert_eq!(arg_neg(Complex64::new(1.0, 0.0)).unwrap(), -PI);
        assert_eq!(arg_neg(Complex64::new(-1.0, 0.0)).unwrap(), 0.0);
        assert_eq!(arg_neg(Complex64::new(-1.0, -0.0)).unwrap(), 0.0);
        let v = arg_neg(Complex64::new(1.0, -0.1)).unwrap();
        assert!((v - (-(0.1f64).atan() - PI)).abs() < 1e-15);
        assert!((v + 0.09967 + PI).abs() < 1e-5);
        assert_eq!(arg_neg(Complex64::new(0.0, 0.0)), Err(Error::ZeroArgument));
    }

    #[test]
    fn hermitian_downward_rate() {
        let (omega, d) = (0.8, 1.3);
        let z = Complex64::new(omega * d * d, 0.0);
        let got = partial_rate(z, Complex64::new(omega, 0.0), C, C * C);
        let want = omega * d * d / (2.0 * C);
        assert!((got - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn hermitian_upward_rate_vanishes() {
        let (omega, d) = (-0.8, 1.3);
        let z = Complex64::new(omega * d * d, 0.0);
        assert_eq!(partial_rate(z, Complex64::new(omega, 0.0), C, C * C), 0.0);
    }

    #[test]
    fn zero_z_contributes_nothing() {
        let f = Complex64::new(0.3, -0.02);
        assert_eq!(partial_rate(Complex64::new(0.0, 0.0), f, C, C * C), 0.0);
        assert_eq!(partial_shift(Complex64::new(0.0, 0.0), f, C, C * C), 0.0);
        assert_eq!(partial_rate(Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0), C, C * C), 0.0);
    }

    #[test]
    fn hermitian_shift_matches_bethe_form() {
        let (omega, d): (f64, f64) = (-0.6, 0.9);
        let z = Complex64::new(d * d * omega, 0.0);
        let got = partial_shift(z, Complex64::new(omega, 0.0), C, C * C);
        let bethe = d * d * omega * (omega.abs() / (C * C)).ln() / (4.0 * PI * C);
        assert!((got - bethe).abs() <= 1e-14 * bethe.abs());
    }

    proptest! {
        #[test]
        fn real_z_real_f_reduces_to_golden_rule(omega in 1e-3f64..10.0, d in -5.0f64..5.0) {
            let z = Complex64::new(omega * d * d, 0.0);
            let got = partial_rate(z, Complex64::new(omega, 0.0), C, C * C);
            prop_assert!((got - omega * d * d / (2.0 * C)).abs() <= 1e-14 * (omega * d * d / (2.0 * C)).max(1e-300));
        }

        #[test]
        fn arg_neg_range(re in -10.0f64..10.0, im in -10.0f64..10.0) {
            prop_assume!(re != 0.0 || im != 0.0);
            let v = arg_neg(Complex64::new(re, im)).unwrap();
            prop_assert!(v > -2.0 * PI && v <= 0.0);
        }
    }

    fn spectrum(potential: PotentialSpec, x_max: f64, n: usize, theta: f64) -> (Spectrum, TransitionTable) {
        let g = build_grid(-x_max, x_max, n).unwrap();
        let h = assemble(&g, &potential, ScalingAngle::new(theta).unwrap()).unwrap();
        let sp = diagonalize(&h, &Tolerances::default()).unwrap();
        let t = build_table(&sp);
        (sp, t)
    }

    #[test]
    fn harmonic_first_excited_rate() {
        let (sp, t) = spectrum(PotentialSpec::Harmonic { omega0: 1.0 }, 12.0, 121, 0.0);
        let p = EmissionParams::default();
        let herm = hermitian_rate(1, &sp, &t, &p).unwrap();
        let want = 1.0 / (4.0 * C);
        assert!((herm - want).abs() < 1e-6 * want, "{herm}");
        assert!((want - 1.8243e-3).abs() < 1e-7);
        assert_eq!(hermitian_rate(0, &sp, &t, &p).unwrap(), 0.0);
        // full-basis rate of a bound emitter at θ = 0 is the same number
        let full = total_rate(1, &sp, &t, &p).unwrap();
        assert!((full.total - herm).abs() < 1e-12);
        assert_eq!(full.continuum_sum, 0.0);
    }

    #[test]
    fn hermitian_rate_rejects_scaled_or_unbound() {
        let (sp, t) = spectrum(PotentialSpec::double_barrier(), 40.0, 201, 0.15);
        let p = EmissionParams::default();
        assert_eq!(hermitian_rate(1, &sp, &t, &p), Err(Error::StateNotBound(1)));
        let (sp, t) = spectrum(PotentialSpec::double_barrier(), 40.0, 201, 0.0);
        assert_eq!(hermitian_rate(2, &sp, &t, &p), Err(Error::StateNotBound(2)));
    }

    #[test]
    fn total_is_partition_sum_and_cumulative_is_ordered() {
        let (sp, t) = spectrum(PotentialSpec::double_barrier(), 60.0, 241, 0.15);
        let b = total_rate(3, &sp, &t, &EmissionParams::default()).unwrap();
        assert_eq!(b.total, b.discrete_sum + b.continuum_sum);
        assert_eq!(b.partial(b.initial_index), Some(0.0));
        assert_eq!(b.cumulative.len(), sp.n_discrete - 1);
        assert!(b.cumulative.windows(2).all(|w| w[0].final_index < w[1].final_index));
        assert!(b.total > 0.0);
    }

    #[test]
    fn ground_state_does_not_decay_at_any_theta() {
        for theta in [0.02, 0.05, 0.1, 0.15] {
            let (sp, t) = spectrum(PotentialSpec::double_barrier(), 60.0, 241, theta);
            let b = total_rate(0, &sp, &t, &EmissionParams::default()).unwrap();
            assert!(b.total.abs() < 1e-9, "theta {theta}: {}", b.total);
        }
    }

    #[test]
    fn zero_dipoles_give_zero_shift() {
        let (sp, mut t) = spectrum(PotentialSpec::double_barrier(), 40.0, 121, 0.15);
        t.z = faer::Mat::zeros(t.len(), t.len());
        let s = total_shift(2, &sp, &t, &EmissionParams::default()).unwrap();
        assert_eq!(s.total, 0.0);
    }

    #[test]
    fn emitter_must_be_discrete_and_exposed() {
        let (sp, t) = spectrum(PotentialSpec::double_barrier(), 40.0, 121, 0.15);
        let p = EmissionParams::default();
        assert_eq!(total_rate(sp.n_discrete, &sp, &t, &p).unwrap_err(), Error::StateNotDiscrete(sp.n_discrete));
        let res = sp.discrete(2).unwrap();
        assert!(exposure_angle(res) > 0.0 && exposure_angle(res) < 0.15);
    }
}
