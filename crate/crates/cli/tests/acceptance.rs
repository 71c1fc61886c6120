//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cs_emission::discretization::{assemble, build_grid, Grid};
use cs_emission::spectral::{diagonalize_with, trajectories_from_spectra, EigenStrategy};
use cs_emission::validation::{
    compare_spectra, cutoff_sensitivity, hermitian_oracle, same_parity_leakage, theta_scan, trk_sum, trk_sum_at,
    Observable,
};
use cs_emission::{
    arg_neg, Pipeline, PotentialSpec, ScalingAngle, Solved, StateKind, Tolerances,
};
use num_complex::Complex64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn angle(t: f64) -> ScalingAngle {
    ScalingAngle::new(t).unwrap()
}

fn alt_grid() -> Grid {
    build_grid(-200.0, 200.0, 1101).unwrap()
}

struct Shared {
    pipeline: Pipeline,
    at_015: Solved,
}

fn spectrum_structure(s: &Shared) -> Outcome {
    let sp = &s.at_015.spectrum;
    let hermitian = s.pipeline.spectrum(ScalingAngle::HERMITIAN).unwrap();
    let bound: Vec<f64> = sp.states.iter().filter(|x| x.kind == StateKind::Bound).map(|x| x.energy.re).collect();
    let reference: Vec<f64> = hermitian.states.iter().filter(|x| x.kind == StateKind::Bound).map(|x| x.energy.re).collect();
    let max_bound_delta = bound.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    // the resonances must sit off the rotated continuum ray
    let ray = sp.theta.continuum_ray_angle();
    let off_ray = sp
        .states
        .iter()
        .filter(|x| x.kind == StateKind::Resonance)
        .all(|x| x.energy.arg() - ray > Tolerances::default().ray && x.energy.im < 0.0);

    let h = assemble(&s.pipeline.grid, &s.pipeline.potential, angle(0.15)).unwrap();
    let start = Instant::now();
    let full = diagonalize_with(&h, &Tolerances::default(), EigenStrategy::Full).unwrap();
    let seconds = start.elapsed().as_secs_f64();

    let passed = sp.n_bound == 2
        && bound.len() == reference.len()
        && sp.n_resonance >= 3
        && off_ray
        && max_bound_delta < 1e-8
        && seconds < 30.0
        && full.n_bound == 2;
    outcome(
        passed,
        format!(
            "{} bound, {} resonances off the ray; bound vs theta=0 max |dE| = {:.2e}; full {}-point eigensolve {:.2} s",
            sp.n_bound,
            sp.n_resonance,
            max_bound_delta,
            h.dim(),
            seconds
        ),
    )
}

fn pole_stability(s: &Shared) -> Outcome {
    let thetas = [0.10, 0.15, 0.20];
    let solve_on = |grid: Grid| {
        let p = s.pipeline.with_grid(grid);
        thetas.iter().map(|&t| p.spectrum(angle(t)).unwrap()).collect::<Vec<_>>()
    };
    let (a, b) = rayon::join(|| solve_on(s.pipeline.grid), || solve_on(alt_grid()));

    let tol = Tolerances::default();
    let mut worst_drift = 0.0f64;
    let mut worst_cross = 0.0f64;
    let mut rotation_ok = true;
    for spectra in [&a, &b] {
        let report = trajectories_from_spectra(spectra, &tol).unwrap();
        for pole in report.poles.iter().filter(|p| p.kind == StateKind::Resonance).take(3) {
            let e0 = pole.energies[1];
            for e in &pole.energies {
                worst_drift = worst_drift.max((e.re - e0.re).hypot(e.im - e0.im));
            }
        }
        for (median, theta) in report.continuum_median_arg.iter().zip(thetas) {
            rotation_ok &= median.is_some_and(|m| (m + 2.0 * theta).abs() < 0.02);
        }
    }
    for (sa, sb) in a.iter().zip(&b) {
        let r = compare_spectra(sa, sb).unwrap();
        for p in r.poles.iter().filter(|p| p.kind == StateKind::Resonance).take(3) {
            worst_cross = worst_cross.max(p.delta);
        }
    }
    outcome(
        worst_drift < 1e-6 && worst_cross < 1e-6 && rotation_ok,
        format!(
            "first 3 resonances: max theta drift {:.2e}, max cross-grid delta {:.2e} (grids 801 pts on [-160,160] and 1101 on [-200,200]); continuum follows -2theta: {}",
            worst_drift, worst_cross, rotation_ok
        ),
    )
}

fn milestones(s: &Shared) -> Outcome {
    let solved = s.pipeline.solve(angle(0.6)).unwrap();
    let b = solved.rate(3, &s.pipeline.emission).unwrap();
    let targets = [(8, 99.57, 0.1), (10, 99.975, 0.02), (12, 99.996, 0.01)];
    let mut passed = solved.spectrum.n_discrete >= 13;
    let mut parts = Vec::new();
    for (k, want, tol) in targets {
        let raw = b.cumulative.get(k - 1).map(|p| 100.0 * p.cumulative_fraction);
        let captured = b.captured_fraction(k).map(|c| 100.0 * c);
        match (raw, captured) {
            (Some(raw), Some(c)) => {
                passed &= (c - want).abs() <= tol;
                parts.push(format!("k={k}: {c:.4}% (target {want} +/- {tol}; raw S_k/gamma {raw:.4}%)"));
            }
            _ => {
                passed = false;
                parts.push(format!("k={k}: not enough discrete states"));
            }
        }
    }
    outcome(passed, format!("theta=0.6, {} discrete states; {}", solved.spectrum.n_discrete, parts.join("; ")))
}

fn hermitian_reduction() -> Outcome {
    let grid = build_grid(-12.0, 12.0, 121).unwrap();
    let p = Pipeline::new(PotentialSpec::Harmonic { omega0: 1.0 }, grid);
    let solved = p.solve(ScalingAngle::HERMITIAN).unwrap();
    let rate = cs_emission::emission::hermitian_rate(1, &solved.spectrum, &solved.table, &p.emission).unwrap();
    let full = solved.rate(1, &p.emission).unwrap().total;
    let oracle = hermitian_oracle(&p.potential, &grid, 1, &p.emission).unwrap().rate;
    let want = 1.0 / (4.0 * p.emission.c());
    let worst = [rate, full, oracle].iter().map(|r| ((r - want) / want).abs()).fold(0.0, f64::max);
    outcome(
        worst < 1e-6,
        format!("gamma(1->0) = {rate:.10e}, analytic 1/(4c) = {want:.10e}, max rel error {worst:.2e}"),
    )
}

fn sum_rule(s: &Shared) -> Outcome {
    let harmonic = Pipeline::new(PotentialSpec::Harmonic { omega0: 1.0 }, build_grid(-12.0, 12.0, 121).unwrap());
    let mut worst = 0.0f64;
    let mut per = Vec::new();
    for (name, p) in [("well", s.pipeline), ("harmonic", harmonic)] {
        for theta in [0.0, 0.15] {
            let solved = if name == "well" && theta == 0.15 {
                s.at_015.clone()
            } else {
                p.solve(angle(theta)).unwrap()
            };
            let mut local = 0.0f64;
            for n in 0..4 {
                // discrete ordinal where four discrete states exist, state index otherwise
                let c = if solved.spectrum.n_discrete >= 4 {
                    trk_sum(n, &solved.spectrum, &solved.table).unwrap()
                } else {
                    trk_sum_at(n, &solved.table)
                };
                local = local.max((c - Complex64::new(-0.5, 0.0)).norm());
            }
            worst = worst.max(local);
            per.push(format!("{name}@{theta}: {local:.1e}"));
        }
    }
    outcome(worst < 1e-5, format!("max |C_n + 1/2| over n=0..3 = {worst:.2e} ({})", per.join(", ")))
}

fn theta_independence(s: &Shared) -> Outcome {
    let thetas = [0.12, 0.15, 0.18];
    let rate = theta_scan(&s.pipeline, Observable::TotalRate, 3, &thetas).unwrap();
    let shift = theta_scan(&s.pipeline, Observable::TotalShift, 3, &thetas).unwrap();
    outcome(
        rate.max_rel_deviation < 1e-3 && shift.max_rel_deviation < 1e-3,
        format!(
            "gamma_3 = {:.10e} (spread {:.2e}), shift = {:.10e} (spread {:.2e})",
            rate.values[1], rate.max_rel_deviation, shift.values[1], shift.max_rel_deviation
        ),
    )
}

fn cutoff_independence(s: &Shared) -> Outcome {
    let c = cutoff_sensitivity(3, &s.at_015.spectrum, &s.at_015.table, &s.pipeline.emission, 10.0).unwrap();
    outcome(
        c.total_rel_change < 1e-6 && c.max_partial_rel_change > 1e-3,
        format!(
            "cutoff x10: total changes by {:.2e}, largest partial by {:.2e}",
            c.total_rel_change, c.max_partial_rel_change
        ),
    )
}

fn parity_selection(s: &Shared) -> Outcome {
    let b = s.at_015.rate(3, &s.pipeline.emission).unwrap();
    let leak = same_parity_leakage(3, &s.at_015.spectrum, &b).unwrap();
    outcome(leak < 1e-12, format!("max |partial rate| into same-parity finals = {leak:.2e}"))
}

fn branch() -> Outcome {
    let plus = arg_neg(Complex64::new(1.0, 0.0)).unwrap();
    let minus = arg_neg(Complex64::new(-1.0, 0.0)).unwrap();
    let minus_neg_zero = arg_neg(Complex64::new(-1.0, -0.0)).unwrap();
    outcome(
        plus == -std::f64::consts::PI && minus == 0.0 && minus_neg_zero == 0.0,
        format!("arg_neg(+1) = {plus}, arg_neg(-1) = {minus}, arg_neg(-1 - 0i) = {minus_neg_zero}"),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_cs-emission");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/theta_scan.conf");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        for cmd in ["spectrum", "rates", "scan-theta"] {
            let status = Command::new(bin)
                .args([cmd, "--config"])
                .arg(&config)
                .arg("--out")
                .arg(dir.path())
                .env_remove("CS_EMISSION_OUT_DIR")
                .output()
                .unwrap()
                .status;
            if !status.success() {
                return outcome(false, format!("`{cmd}` exited with {status}"));
            }
        }
    }
    let (a, b) = (read_tree(dirs[0].path()), read_tree(dirs[1].path()));
    let identical = !a.is_empty() && a == b;
    outcome(identical, format!("{} files from spectrum, rates and scan-theta compared byte for byte", a.len()))
}

fn main() {
    let pipeline = Pipeline::double_barrier();
    let shared = Shared {
        at_015: pipeline.solve(angle(0.15)).unwrap(),
        pipeline,
    };

    type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("1 spectrum structure", Box::new(|| spectrum_structure(&shared))),
        ("2 pole stability", Box::new(|| pole_stability(&shared))),
        ("3 convergence milestones", Box::new(|| milestones(&shared))),
        ("4 hermitian reduction", Box::new(hermitian_reduction)),
        ("5 sum rule", Box::new(|| sum_rule(&shared))),
        ("6 theta independence", Box::new(|| theta_independence(&shared))),
        ("7 cutoff independence", Box::new(|| cutoff_independence(&shared))),
        ("8 parity selection", Box::new(|| parity_selection(&shared))),
        ("9 branch", Box::new(branch)),
        ("10 determinism", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
