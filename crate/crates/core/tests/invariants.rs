use cs_emission::validation::{cutoff_sensitivity, trk_sum_at};
use cs_emission::{
    assemble, build_grid, diagonalize, EmissionParams, Pipeline, PotentialSpec, ScalingAngle, StateKind, Tolerances,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn angle(t: f64) -> ScalingAngle {
    ScalingAngle::new(t).unwrap()
}

fn harmonic(omega0: f64) -> Pipeline {
    Pipeline::new(PotentialSpec::Harmonic { omega0 }, build_grid(-12.0, 12.0, 121).unwrap())
}

fn small_well(a: f64, b: f64, w: f64) -> Pipeline {
    Pipeline::new(PotentialSpec::GaussianWell { a, b, w }, build_grid(-30.0, 30.0, 151).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_complex_symmetric(theta in 0.0f64..0.6, n in 64usize..140, half in 5.0f64..40.0) {
        let grid = build_grid(-half, half, n).unwrap();
        let h = assemble(&grid, &PotentialSpec::double_barrier(), angle(theta)).unwrap();
        prop_assert_eq!(h.symmetry_defect(), 0.0);
    }

    #[test]
    fn eigenvectors_are_c_orthonormal(theta in 0.0f64..0.4) {
        let p = small_well(0.5, -2.1, 0.1);
        let sp = p.spectrum(angle(theta)).unwrap();
        let dx = p.grid.dx();
        for &i in sp.discrete_indices().iter().take(4) {
            for &j in sp.discrete_indices().iter().take(4) {
                let overlap: Complex64 = sp.states[i]
                    .wavefunction
                    .iter()
                    .zip(&sp.states[j].wavefunction)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
                    * dx;
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((overlap - want).norm() < 1e-9, "<{}|{}> = {}", i, j, overlap);
            }
        }
    }

    #[test]
    fn oscillator_rate_is_frequency_independent(omega0 in 0.6f64..2.0) {
        let p = harmonic(omega0);
        let solved = p.solve(ScalingAngle::HERMITIAN).unwrap();
        let rate = solved.rate(1, &p.emission).unwrap().total;
        let want = 1.0 / (4.0 * p.emission.c());
        prop_assert!(((rate - want) / want).abs() < 1e-8, "{} vs {}", rate, want);
    }

    #[test]
    fn sum_rule_holds_for_any_well(a in 0.1f64..1.0, b in -3.0f64..-0.5, w in 0.05f64..0.3, theta in 0.0f64..0.3) {
        let p = small_well(a, b, w);
        let solved = p.solve(angle(theta)).unwrap();
        let bound: Vec<usize> = solved.spectrum.states.iter().filter(|s| s.kind == StateKind::Bound).map(|s| s.index).collect();
        prop_assume!(!bound.is_empty());
        for index in bound {
            let c = trk_sum_at(index, &solved.table);
            prop_assert!((c + 0.5).norm() < 1e-5, "state {}: {}", index, c);
        }
    }

    #[test]
    fn ground_state_is_stable(theta in 0.05f64..0.4) {
        let p = small_well(0.5, -2.1, 0.1);
        let solved = p.solve(angle(theta)).unwrap();
        let g = solved.rate(0, &p.emission).unwrap();
        prop_assert!(g.total.abs() < 1e-12, "{}", g.total);
    }

    #[test]
    fn total_rate_ignores_the_cutoff(factor in 0.01f64..100.0) {
        let p = small_well(0.5, -2.1, 0.1);
        let solved = p.solve(angle(0.2)).unwrap();
        let c = cutoff_sensitivity(1, &solved.spectrum, &solved.table, &p.emission, factor).unwrap();
        prop_assert!(c.total_rel_change < 1e-9, "{}", c.total_rel_change);
    }
}

#[test]
fn parity_alternates_through_the_discrete_states() {
    let sp = Pipeline::double_barrier().spectrum(angle(0.15)).unwrap();
    let parities: Vec<_> = sp.discrete_indices().iter().map(|&k| sp.states[k].parity).collect();
    for pair in parities.windows(2) {
        assert_ne!(pair[0], pair[1]);
    }
}

#[test]
fn resonance_width_grows_with_energy() {
    let sp = Pipeline::double_barrier().spectrum(angle(0.15)).unwrap();
    let widths: Vec<f64> = sp
        .states
        .iter()
        .filter(|s| s.kind == StateKind::Resonance)
        .map(|s| -s.energy.im)
        .collect();
    assert!(widths.len() >= 3);
    assert!(widths.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn bound_emitter_decays_only_to_the_ground_state() {
    let p = Pipeline::double_barrier();
    let solved = p.solve(angle(0.15)).unwrap();
    let g = solved.rate(1, &p.emission).unwrap();
    let ground = solved.spectrum.discrete(0).unwrap().index;
    let to_ground = g.partial(ground).unwrap();
    assert!(((g.total - to_ground) / g.total).abs() < 1e-10);
    assert!((g.total - 1.818638262294e-3).abs() < 1e-14);
}

#[test]
fn rates_scale_as_inverse_light_speed() {
    let base = Pipeline::double_barrier();
    let solved = base.solve(angle(0.15)).unwrap();
    let slow = EmissionParams::new(cs_emission::UnitSystem::new(base.emission.c() / 2.0).unwrap())
        .with_cutoff(base.emission.cutoff());
    let a = solved.rate(3, &base.emission).unwrap().total;
    let b = solved.rate(3, &slow).unwrap().total;
    assert!((b / a - 2.0).abs() < 1e-12);
}

#[test]
fn rotated_continuum_is_a_ray() {
    let tol = Tolerances::default();
    let h = assemble(&Pipeline::double_barrier().grid, &PotentialSpec::double_barrier(), angle(0.15)).unwrap();
    let sp = diagonalize(&h, &tol).unwrap();
    let mut args: Vec<f64> = sp
        .states
        .iter()
        .filter(|s| s.kind == StateKind::Continuum && s.energy.norm() > 0.5)
        .map(|s| s.energy.arg())
        .collect();
    args.sort_by(f64::total_cmp);
    let median = args[args.len() / 2];
    assert!((median + 0.3).abs() < 1e-2, "{median}");
}
