//! Consistency checks that do not trust the main pipeline: dipole sum rule,
//! θ-independence of observables, a real-symmetric Hermitian oracle and
//! cross-grid pole comparison.

use faer::{Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{kinetic_matrix, Grid};
use crate::emission::{exposure_angle, EmissionParams};
use crate::error::{Error, Result};
use crate::model::{ComplexEnergy, PotentialSpec, ScalingAngle};
use crate::pipeline::{Pipeline, Solved};
use crate::spectral::{Parity, Spectrum, StateKind};
use crate::transition::TransitionTable;

pub const TRK_REFERENCE: f64 = -0.5;

/// Energy up to which a sinc-DVR grid represents states faithfully, a quarter
/// of the largest kinetic energy π²/(2dx²) it can carry.
pub fn resolved_energy(grid: &Grid) -> f64 {
    std::f64::consts::PI.powi(2) / (8.0 * grid.dx() * grid.dx())
}

/// Discrete states worth checking. With a continuum threshold the discrete
/// set is finite and all of it counts; a confining potential makes every grid
/// state discrete, and only those below `limit` are physical.
pub fn checked_discrete(spectrum: &Spectrum, limit: f64) -> Vec<usize> {
    let confining = spectrum.potential.continuum_threshold().is_none();
    spectrum
        .states
        .iter()
        .filter(|s| s.kind.is_discrete() && (!confining || s.energy.norm() < limit))
        .map(|s| s.index)
        .collect()
}

/// Σ_{n'} f_nn'·d²_nn' over every state of the basis, for the discrete state
/// with the given ordinal.
pub fn trk_sum(ordinal: usize, spectrum: &Spectrum, table: &TransitionTable) -> Result<Complex64> {
    Ok(trk_sum_at(spectrum.discrete(ordinal)?.index, table))
}

/// The same sum for any state, by its position in the spectrum.
pub fn trk_sum_at(index: usize, table: &TransitionTable) -> Complex64 {
    (0..table.len()).map(|k| table.z[(index, k)]).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumRuleReport {
    pub per_initial: Vec<(usize, Complex64)>,
    pub reference: f64,
    pub max_abs_error: f64,
}

pub fn sum_rule_report(spectrum: &Spectrum, table: &TransitionTable, ordinals: &[usize]) -> Result<SumRuleReport> {
    let per_initial = ordinals
        .iter()
        .map(|&n| Ok((n, trk_sum(n, spectrum, table)?)))
        .collect::<Result<Vec<_>>>()?;
    let max_abs_error = per_initial
        .iter()
        .map(|(_, c)| (c - TRK_REFERENCE).norm())
        .fold(0.0, f64::max);
    Ok(SumRuleReport {
        per_initial,
        reference: TRK_REFERENCE,
        max_abs_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    TotalRate,
    TotalShift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaScan {
    pub observable: Observable,
    pub ordinal: usize,
    pub thetas: Vec<f64>,
    pub energies: Vec<ComplexEnergy>,
    pub values: Vec<f64>,
    pub max_rel_deviation: f64,
}

/// Follow one emitter through spectra computed at different θ. The emitter
/// is the discrete state `ordinal` of the spectrum with the largest θ; in the
/// others it is found again by parity and nearest energy, so resonances
/// exposed only at larger θ do not shift the labeling. Returns the local
/// discrete ordinal in each spectrum.
pub fn track_emitter(spectra: &[&Spectrum], ordinal: usize, match_radius: f64) -> Result<Vec<usize>> {
    let widest = spectra
        .iter()
        .max_by(|a, b| a.theta.radians().total_cmp(&b.theta.radians()))
        .ok_or(Error::TooFewThetas(0))?;
    let target = widest.discrete(ordinal)?;
    let required = exposure_angle(target);
    let exposed = |theta: f64| target.kind != StateKind::Resonance || theta > required;
    if let Some(low) = spectra.iter().find(|sp| !exposed(sp.theta.radians())) {
        return Err(Error::ThetaTooSmall {
            state: ordinal,
            theta: low.theta.radians(),
            required,
        });
    }
    spectra
        .iter()
        .map(|sp| {
            let found = sp
                .states
                .iter()
                .filter(|s| s.kind.is_discrete() && s.parity == target.parity)
                .min_by(|a, b| dist(a.energy, target.energy).total_cmp(&dist(b.energy, target.energy)))
                .filter(|s| dist(s.energy, target.energy) < match_radius)
                .ok_or(Error::StateNotDiscrete(ordinal))?;
            Ok(sp.discrete_ordinal_of(found.index).expect("state is discrete"))
        })
        .collect()
}

/// Evaluate an observable of one emitter on already solved θ points.
pub fn scan_solved(
    solved: &[Solved],
    observable: Observable,
    ordinal: usize,
    params: &EmissionParams,
    match_radius: f64,
) -> Result<ThetaScan> {
    let spectra: Vec<&Spectrum> = solved.iter().map(|s| &s.spectrum).collect();
    let local = track_emitter(&spectra, ordinal, match_radius)?;
    let values = solved
        .iter()
        .zip(&local)
        .map(|(s, &k)| match observable {
            Observable::TotalRate => s.rate(k, params).map(|b| b.total),
            Observable::TotalShift => s.shift(k, params).map(|b| b.total),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ThetaScan {
        observable,
        ordinal,
        thetas: spectra.iter().map(|s| s.theta.radians()).collect(),
        energies: spectra.iter().zip(&local).map(|(s, &k)| s.discrete(k).map(|e| e.energy)).collect::<Result<_>>()?,
        max_rel_deviation: max_pairwise_relative(&values),
        values,
    })
}

/// Recompute the full pipeline at every θ and evaluate the observable of one
/// emitter (see [`track_emitter`]).
pub fn theta_scan(pipeline: &Pipeline, observable: Observable, ordinal: usize, thetas: &[f64]) -> Result<ThetaScan> {
    let angles = thetas.iter().map(|&t| ScalingAngle::new(t)).collect::<Result<Vec<_>>>()?;
    let widest = angles
        .iter()
        .copied()
        .max_by(|a, b| a.radians().total_cmp(&b.radians()))
        .ok_or(Error::TooFewThetas(0))?;
    // fail on the exposure precondition before paying for every solve
    let reference = pipeline.spectrum(widest)?;
    let target = reference.discrete(ordinal)?;
    let required = exposure_angle(target);
    let exposed = |theta: f64| target.kind != StateKind::Resonance || theta > required;
    if let Some(low) = angles.iter().find(|a| !exposed(a.radians())) {
        return Err(Error::ThetaTooSmall {
            state: ordinal,
            theta: low.radians(),
            required,
        });
    }
    let solved = angles.par_iter().map(|&t| pipeline.solve(t)).collect::<Result<Vec<_>>>()?;
    scan_solved(&solved, observable, ordinal, &pipeline.emission, pipeline.tolerances.match_radius)
}

/// max_{i,j} |v_i − v_j| / max(|v_i|, |v_j|).
pub fn max_pairwise_relative(values: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    worst
}

fn dist(a: ComplexEnergy, b: ComplexEnergy) -> f64 {
    (a.re - b.re).hypot(a.im - b.im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianOracle {
    pub energy: f64,
    pub rate: f64,
    pub shift: f64,
}

/// Golden-rule rate and Bethe-regularized shift of the `n`-th bound state,
/// computed from a real symmetric eigensolve that shares nothing with the
/// complex-scaled path except the kinetic matrix entries.
pub fn hermitian_oracle(potential: &PotentialSpec, grid: &Grid, n: usize, params: &EmissionParams) -> Result<HermitianOracle> {
    let npts = grid.n_points();
    let dx = grid.dx();
    let t = kinetic_matrix(grid);
    let h = Mat::from_fn(npts, npts, |i, j| {
        if i == j {
            t[(i, j)] + potential.eval_real(grid.x(i))
        } else {
            t[(i, j)]
        }
    });
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let energies: Vec<f64> = (0..npts).map(|k| s[k]).collect();

    let threshold = potential.continuum_threshold().unwrap_or(f64::INFINITY);
    if n >= npts || energies[n] >= threshold {
        return Err(Error::StateNotBound(n));
    }

    // Orthonormal columns have Σ u² = 1; rescale to Σ ψ² dx = 1.
    let norm = dx.sqrt().recip();
    let dipole = |a: usize, b: usize| -> f64 { (0..npts).map(|i| u[(i, a)] * grid.x(i) * u[(i, b)]).sum::<f64>() * norm * norm * dx };

    let c = params.c();
    let cutoff = params.cutoff();
    let mut rate = 0.0;
    let mut shift = 0.0;
    for k in 0..npts {
        if k == n {
            continue;
        }
        let omega = energies[n] - energies[k];
        let d2 = dipole(n, k).powi(2);
        if k < n && omega > 0.0 {
            rate += omega * d2 / (2.0 * c);
        }
        if omega != 0.0 {
            shift += d2 * omega * (omega.abs() / cutoff).ln() / (4.0 * std::f64::consts::PI * c);
        }
    }
    Ok(HermitianOracle {
        energy: energies[n],
        rate,
        shift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleDelta {
    pub kind: StateKind,
    pub parity: Parity,
    pub energy_a: ComplexEnergy,
    pub energy_b: ComplexEnergy,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossGridReport {
    pub grid_a: Grid,
    pub grid_b: Grid,
    pub poles: Vec<PoleDelta>,
    pub max_delta: f64,
}

/// Compare the discrete states of two independently discretized spectra,
/// pairing poles by parity and nearest energy. See [`checked_discrete`].
pub fn compare_spectra(a: &Spectrum, b: &Spectrum) -> Result<CrossGridReport> {
    let limit = resolved_energy(&a.grid).min(resolved_energy(&b.grid));
    let (ia, ib) = (checked_discrete(a, limit), checked_discrete(b, limit));
    if ia.len() != ib.len() {
        return Err(Error::PoleCountMismatch(ia.len(), ib.len()));
    }
    let mut poles = Vec::with_capacity(ia.len());
    for sa in ia.iter().map(|&k| &a.states[k]) {
        let sb = ib
            .iter()
            .map(|&k| &b.states[k])
            .filter(|s| s.kind == sa.kind && (sa.parity == Parity::None || s.parity == sa.parity))
            .min_by(|x, y| dist(x.energy, sa.energy).total_cmp(&dist(y.energy, sa.energy)))
            .ok_or(Error::PoleCountMismatch(ia.len(), ib.len()))?;
        poles.push(PoleDelta {
            kind: sa.kind,
            parity: sa.parity,
            energy_a: sa.energy,
            energy_b: sb.energy,
            delta: dist(sa.energy, sb.energy),
        });
    }
    let max_delta = poles.iter().map(|p| p.delta).fold(0.0, f64::max);
    Ok(CrossGridReport {
        grid_a: a.grid,
        grid_b: b.grid,
        poles,
        max_delta,
    })
}

pub fn cross_discretization_check(
    potential: &PotentialSpec,
    theta: ScalingAngle,
    grid_a: &Grid,
    grid_b: &Grid,
) -> Result<CrossGridReport> {
    let (a, b) = rayon::join(
        || Pipeline::new(*potential, *grid_a).spectrum(theta),
        || Pipeline::new(*potential, *grid_b).spectrum(theta),
    );
    compare_spectra(&a?, &b?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSensitivity {
    pub factor: f64,
    pub total_rel_change: f64,
    pub max_partial_rel_change: f64,
}

/// Rescale the cutoff by `factor` and compare totals and partials of γ_n.
pub fn cutoff_sensitivity(
    ordinal: usize,
    spectrum: &Spectrum,
    table: &TransitionTable,
    params: &EmissionParams,
    factor: f64,
) -> Result<CutoffSensitivity> {
    let base = crate::emission::total_rate(ordinal, spectrum, table, params)?;
    let scaled_params = params.with_cutoff(params.cutoff() * factor);
    let scaled = crate::emission::total_rate(ordinal, spectrum, table, &scaled_params)?;
    let max_partial_rel_change = base
        .partials
        .iter()
        .zip(&scaled.partials)
        .filter(|(p, _)| p.rate.abs() > 1e-14)
        .map(|(p, q)| ((p.rate - q.rate) / p.rate).abs())
        .fold(0.0, f64::max);
    Ok(CutoffSensitivity {
        factor,
        total_rel_change: ((scaled.total - base.total) / base.total).abs(),
        max_partial_rel_change,
    })
}

/// Largest |Δγ_nn'| over final states sharing the emitter's parity.
pub fn same_parity_leakage(ordinal: usize, spectrum: &Spectrum, breakdown: &crate::emission::DecayBreakdown) -> Result<f64> {
    let parity = spectrum.discrete(ordinal)?.parity;
    Ok(breakdown
        .partials
        .iter()
        .filter(|p| p.final_index != breakdown.initial_index && spectrum.states[p.final_index].parity == parity)
        .map(|p| p.rate.abs())
        .fold(0.0, f64::max))
}
