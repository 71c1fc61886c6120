//! Diagonalization of the scaled Hamiltonian and classification of its
//! spectrum into bound states, resonance poles and rotated continuum.
//!
//! Eigenvectors are normalized with the c-product (ψ|ψ) = Σ ψ_i² dx, no
//! complex conjugation. For even potentials the matrix is block-diagonalized
//! by parity first; this halves the dimension of each dense solve and gives
//! eigenvectors of exact parity.

use std::cmp::Ordering;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{assemble, Grid, ScaledHamiltonian};
use crate::error::{Error, Result};
use crate::model::{ComplexEnergy, PotentialSpec, ScalingAngle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Bound,
    Resonance,
    Continuum,
}

impl StateKind {
    pub fn is_discrete(self) -> bool {
        !matches!(self, StateKind::Continuum)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Bound => "bound",
            StateKind::Resonance => "resonance",
            StateKind::Continuum => "continuum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }
}

/// Thresholds used to label and track eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// |Im E| below this counts as real (a.u.).
    pub bound: f64,
    /// Minimum angular distance above the 2θ ray for a resonance (rad).
    pub ray: f64,
    /// States closer than this to E = 0 are never called resonances (a.u.).
    pub ray_min_modulus: f64,
    /// Parity defect threshold, relative to Σ|ψ|² dx.
    pub parity: f64,
    /// Maximum θ-drift of a confirmed pole (a.u.).
    pub stationarity: f64,
    /// Search radius when continuing a pole to the next θ (a.u.).
    pub match_radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            bound: 1e-7,
            ray: 0.02,
            ray_min_modulus: 1e-6,
            parity: 1e-6,
            stationarity: 1e-6,
            match_radius: 1e-3,
        }
    }
}

/// How the dense eigenproblem is split before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenStrategy {
    /// Even/odd blocks when the potential is even, full matrix otherwise.
    #[default]
    Auto,
    /// Always solve the full matrix.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenState {
    /// Exactly real for bound states.
    pub energy: ComplexEnergy,
    /// c-normalized, scaled representation u(x_i) = e^{iθ/2}ψ(x_i e^{iθ}).
    pub wavefunction: Vec<Complex64>,
    pub kind: StateKind,
    pub parity: Parity,
    pub index: usize,
}

impl EigenState {
    pub fn c_norm(&self, dx: f64) -> Complex64 {
        self.wavefunction.iter().map(|u| u * u).sum::<Complex64>() * dx
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub states: Vec<EigenState>,
    pub theta: ScalingAngle,
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub n_bound: usize,
    pub n_resonance: usize,
    pub n_discrete: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Positions in `states` of the bound and resonance states, by ascending Re E.
    pub fn discrete_indices(&self) -> Vec<usize> {
        self.states
            .iter()
            .filter(|s| s.kind.is_discrete())
            .map(|s| s.index)
            .collect()
    }

    /// The `ordinal`-th discrete state (0 = lowest Re E).
    pub fn discrete(&self, ordinal: usize) -> Result<&EigenState> {
        self.states
            .iter()
            .filter(|s| s.kind.is_discrete())
            .nth(ordinal)
            .ok_or(Error::StateNotDiscrete(ordinal))
    }

    pub fn discrete_ordinal_of(&self, index: usize) -> Option<usize> {
        self.discrete_indices().iter().position(|&i| i == index)
    }

    pub fn energies(&self) -> Vec<ComplexEnergy> {
        self.states.iter().map(|s| s.energy).collect()
    }

    /// max over states of ‖H·v − E·v‖ / ‖v‖.
    pub fn max_residual(&self, h: &ScaledHamiltonian) -> f64 {
        let n = h.dim();
        self.states
            .par_iter()
            .map(|s| {
                let v = &s.wavefunction;
                let e = s.energy.as_complex();
                let mut num = 0.0;
                for i in 0..n {
                    let acc: Complex64 = v.iter().enumerate().map(|(j, vj)| h.matrix[(i, j)] * vj).sum();
                    num += (acc - e * v[i]).norm_sqr();
                }
                let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                (num / den).sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// max_ij |Σ_n u_n(x_i) u_n(x_j) dx − δ_ij|.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.grid.n_points();
        let dx = self.grid.dx();
        let u = Mat::from_fn(n, self.len(), |i, k| self.states[k].wavefunction[i]);
        let outer = &u * u.transpose();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((outer[(i, j)] * dx - target).norm());
            }
        }
        worst
    }
}

/// Label a single eigenvalue.
pub fn classify_energy(
    energy: ComplexEnergy,
    theta: ScalingAngle,
    threshold: Option<f64>,
    tol: &Tolerances,
) -> StateKind {
    let real = energy.im.abs() < tol.bound;
    match threshold {
        None if real => StateKind::Bound,
        None => StateKind::Continuum,
        Some(t) if real && energy.re < t => StateKind::Bound,
        Some(_) => {
            let off_ray = energy.arg() - theta.continuum_ray_angle();
            if !theta.is_hermitian()
                && energy.im < -tol.bound
                && energy.norm() > tol.ray_min_modulus
                && off_ray > tol.ray
            {
                StateKind::Resonance
            } else {
                StateKind::Continuum
            }
        }
    }
}

pub fn classify(
    energies: &[ComplexEnergy],
    theta: ScalingAngle,
    threshold: Option<f64>,
    tol: &Tolerances,
) -> Vec<StateKind> {
    energies
        .iter()
        .map(|&e| classify_energy(e, theta, threshold, tol))
        .collect()
}

/// Even if ψ(x) ≈ ψ(−x), odd if ψ(x) ≈ −ψ(−x), relative to Σ|ψ|² dx.
pub fn parity_of(wavefunction: &[Complex64], grid: &Grid, tol_parity: f64) -> Parity {
    let dx = grid.dx();
    let mut sym = 0.0;
    let mut anti = 0.0;
    let mut total = 0.0;
    for (i, u) in wavefunction.iter().enumerate() {
        let m = wavefunction[grid.mirror(i)];
        sym += (u - m).norm_sqr();
        anti += (u + m).norm_sqr();
        total += u.norm_sqr();
    }
    let scale = total * dx;
    if sym * dx < tol_parity * scale {
        Parity::Even
    } else if anti * dx < tol_parity * scale {
        Parity::Odd
    } else {
        Parity::None
    }
}

pub fn diagonalize(h: &ScaledHamiltonian, tol: &Tolerances) -> Result<Spectrum> {
    diagonalize_with(h, tol, EigenStrategy::Auto)
}

pub fn diagonalize_with(h: &ScaledHamiltonian, tol: &Tolerances, strategy: EigenStrategy) -> Result<Spectrum> {
    let grid = h.grid;
    let raw = match strategy {
        EigenStrategy::Auto if h.potential.is_even() => solve_by_parity(h)?,
        _ => solve_dense(h.matrix.as_ref())?,
    };

    let dx = grid.dx();
    let mut pairs = Vec::with_capacity(raw.len());
    for (k, (e, mut v)) in raw.into_iter().enumerate() {
        c_normalize(&mut v, dx).map_err(|norm| Error::DegenerateNormalization { index: k, norm })?;
        pairs.push((e, v));
    }
    pairs.sort_by(|a, b| cmp_energy(a.0, b.0));

    let threshold = h.potential.continuum_threshold();
    let states: Vec<EigenState> = pairs
        .into_iter()
        .enumerate()
        .map(|(index, (e, wavefunction))| {
            let raw = ComplexEnergy::from(e);
            let kind = classify_energy(raw, h.theta, threshold, tol);
            // Bound energies are real; round-off left in Im E would put upward
            // bound-to-bound frequencies on either side of the arg(−f) cut.
            let energy = match kind {
                StateKind::Bound => ComplexEnergy::new(raw.re, 0.0),
                _ => raw,
            };
            EigenState {
                kind,
                parity: parity_of(&wavefunction, &grid, tol.parity),
                energy,
                wavefunction,
                index,
            }
        })
        .collect();

    let n_bound = states.iter().filter(|s| s.kind == StateKind::Bound).count();
    let n_resonance = states.iter().filter(|s| s.kind == StateKind::Resonance).count();
    Ok(Spectrum {
        states,
        theta: h.theta,
        grid,
        potential: h.potential,
        n_bound,
        n_resonance,
        n_discrete: n_bound + n_resonance,
    })
}

fn cmp_energy(a: Complex64, b: Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Scale so that Σ v² dx = 1, then fix the sign so the largest entry has
/// positive real part. Returns |Σ v² dx| on failure.
fn c_normalize(v: &mut [Complex64], dx: f64) -> std::result::Result<(), f64> {
    let s: Complex64 = v.iter().map(|z| z * z).sum::<Complex64>() * dx;
    let mag2: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    // negated so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(s.norm() > 1e-10 * mag2) {
        return Err(s.norm());
    }
    let inv = s.sqrt().inv();
    v.iter_mut().for_each(|z| *z *= inv);

    let mut lead = v[0];
    for z in v.iter() {
        if z.norm() > lead.norm() {
            lead = *z;
        }
    }
    if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
        v.iter_mut().for_each(|z| *z = -*z);
    }
    Ok(())
}

fn solve_dense(m: faer::MatRef<'_, Complex64>) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let evd = m
        .eigen()
        .map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let out = (0..m.nrows())
        .map(|k| {
            let e = s[k];
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(Error::EigensolverFailure(format!("non-finite eigenvalue {e}")));
            }
            Ok((e, (0..m.nrows()).map(|i| u[(i, k)]).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out)
}

/// Columns of the real orthogonal map from the parity-adapted basis back to
/// grid nodes. Each column touches at most two nodes.
fn parity_columns(n: usize, even: bool) -> Vec<Vec<(usize, f64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if even { s } else { -s };
    let half = n / 2;
    let mut cols = Vec::new();
    if n % 2 == 1 {
        if even {
            cols.push(vec![(half, 1.0)]);
        }
        for k in 1..=half {
            cols.push(vec![(half + k, s), (half - k, sign)]);
        }
    } else {
        for k in 0..half {
            cols.push(vec![(half + k, s), (half - 1 - k, sign)]);
        }
    }
    cols
}

fn solve_by_parity(h: &ScaledHamiltonian) -> Result<Vec<(Complex64, Vec<Complex64>)>> {
    let n = h.dim();
    let blocks = [true, false];
    let solved = blocks
        .par_iter()
        .map(|&even| {
            let cols = parity_columns(n, even);
            let block = Mat::from_fn(cols.len(), cols.len(), |k, l| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(i, a) in &cols[k] {
                    for &(j, b) in &cols[l] {
                        acc += h.matrix[(i, j)] * (a * b);
                    }
                }
                acc
            });
            let reduced = solve_dense(block.as_ref())?;
            Ok(reduced
                .into_iter()
                .map(|(e, v)| {
                    let mut full = vec![Complex64::new(0.0, 0.0); n];
                    for (k, col) in cols.iter().enumerate() {
                        for &(i, a) in col {
                            full[i] += v[k] * a;
                        }
                    }
                    (e, full)
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(solved.into_iter().flatten().collect())
}

/// One pole followed across the θ list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleTrajectory {
    pub kind: StateKind,
    pub parity: Parity,
    pub energies: Vec<ComplexEnergy>,
    /// max_k |E(θ_{k+1}) − E(θ_k)|
    pub drift: f64,
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub thetas: Vec<f64>,
    pub poles: Vec<PoleTrajectory>,
    /// Median arg E of the continuum-labeled states at each θ.
    pub continuum_median_arg: Vec<Option<f64>>,
}

/// Diagonalize at every θ and follow the discrete states found at the first θ
/// by nearest-neighbour continuation within the same parity sector.
pub fn theta_trajectory(
    grid: &Grid,
    potential: &PotentialSpec,
    thetas: &[f64],
    tol: &Tolerances,
) -> Result<TrajectoryReport> {
    if thetas.len() < 3 {
        return Err(Error::TooFewThetas(thetas.len()));
    }
    if thetas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnsortedThetas);
    }
    let angles = thetas
        .iter()
        .map(|&t| ScalingAngle::new(t))
        .collect::<Result<Vec<_>>>()?;
    let spectra = angles
        .par_iter()
        .map(|&theta| {
            let h = assemble(grid, potential, theta)?;
            diagonalize(&h, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    trajectories_from_spectra(&spectra, tol)
}

pub fn trajectories_from_spectra(spectra: &[Spectrum], tol: &Tolerances) -> Result<TrajectoryReport> {
    if spectra.len() < 3 {
        return Err(Error::TooFewThetas(spectra.len()));
    }
    let first = &spectra[0];
    let mut poles = Vec::new();
    for start in first.states.iter().filter(|s| s.kind.is_discrete()) {
        let mut energies = vec![start.energy];
        let mut drift = 0.0f64;
        let mut lost = false;
        for next in &spectra[1..] {
            let prev = *energies.last().unwrap();
            let candidates: Vec<&EigenState> = next
                .states
                .iter()
                .filter(|s| start.parity == Parity::None || s.parity == start.parity)
                .filter(|s| distance(s.energy, prev) < tol.match_radius)
                .collect();
            let chosen = match candidates.len() {
                0 => {
                    lost = true;
                    next.states
                        .iter()
                        .min_by(|a, b| distance(a.energy, prev).total_cmp(&distance(b.energy, prev)))
                        .map(|s| s.energy)
                        .unwrap_or(prev)
                }
                1 => candidates[0].energy,
                _ => {
                    return Err(Error::TrajectoryAmbiguity {
                        re: prev.re,
                        im: prev.im,
                        theta: next.theta.radians(),
                    })
                }
            };
            drift = drift.max(distance(chosen, prev));
            energies.push(chosen);
        }
        poles.push(PoleTrajectory {
            kind: start.kind,
            parity: start.parity,
            energies,
            drift,
            confirmed: !lost && drift < tol.stationarity,
        });
    }
    let continuum_median_arg = spectra
        .iter()
        .map(|sp| {
            let mut args: Vec<f64> = sp
                .states
                .iter()
                .filter(|s| s.kind == StateKind::Continuum && s.energy.norm() > tol.ray_min_modulus)
                .map(|s| s.energy.arg())
                .collect();
            args.sort_by(f64::total_cmp);
            args.get(args.len() / 2).copied()
        })
        .collect();
    Ok(TrajectoryReport {
        thetas: spectra.iter().map(|s| s.theta.radians()).collect(),
        poles,
        continuum_median_arg,
    })
}

fn distance(a: ComplexEnergy, b: ComplexEnergy) -> f64 {
    (a.re - b.re).hypot(a.im - b.im)
}
