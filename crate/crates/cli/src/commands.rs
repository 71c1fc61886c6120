use std::path::{Path, PathBuf};
use std::time::Instant;

use cs_emission::spectral::{trajectories_from_spectra, StateKind};
use cs_emission::validation::{
    checked_discrete, compare_spectra, cutoff_sensitivity, resolved_energy, hermitian_oracle, same_parity_leakage, scan_solved,
    sum_rule_report, track_emitter, Observable,
};
use cs_emission::{ScalingAngle, Solved};
use rayon::prelude::*;

use crate::config::{RunConfig, Settings};
use crate::output::{self, Written};
use crate::report::{Check, OracleComparison, RunResult, SpectrumRecord, ThetaSummary, Timing, ValidationReport};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Rates,
    Validate,
    ScanTheta,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Rates => "rates",
            Command::Validate => "validate",
            Command::ScanTheta => "scan-theta",
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// False only when `validate` found a failing check.
    pub passed: bool,
}

pub fn execute(command: Command, settings: &Settings, timing: bool) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut ctx = Ctx {
        run: &settings.run,
        dir: settings.output.dir.clone(),
        json: settings.output.formats.json,
        csv: settings.output.formats.csv,
        timing: timing.then_some(start),
        out: Written::default(),
    };
    let passed = match command {
        Command::Spectrum => ctx.spectrum().map(|_| true)?,
        Command::Rates => ctx.rates().map(|_| true)?,
        Command::Validate => ctx.validate()?,
        Command::ScanTheta => ctx.scan_theta().map(|_| true)?,
    };
    Ok(Outcome {
        files: ctx.out.0,
        passed,
    })
}

struct Ctx<'a> {
    run: &'a RunConfig,
    dir: PathBuf,
    json: bool,
    csv: bool,
    timing: Option<Instant>,
    out: Written,
}

impl Ctx<'_> {
    fn result(&self, command: Command) -> RunResult {
        RunResult::new(command.name(), self.run)
    }

    fn finish(&self, mut r: RunResult) -> RunResult {
        r.timing = self.timing.map(|t| Timing {
            wall_seconds: t.elapsed().as_secs_f64(),
        });
        r
    }

    fn solve_all(&self) -> Result<Vec<Solved>, CliError> {
        let pipeline = self.run.pipeline();
        Ok(self
            .run
            .angles()
            .par_iter()
            .map(|&t| pipeline.solve(t))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Per-θ files go to a subdirectory when more than one θ is configured.
    fn theta_dir(&self, theta: f64) -> PathBuf {
        if self.run.theta.len() == 1 {
            self.dir.clone()
        } else {
            self.dir.join(format!("theta_{theta}"))
        }
    }

    fn spectrum(&mut self) -> Result<(), CliError> {
        for solved in self.solve_all()? {
            let sp = &solved.spectrum;
            let dir = self.theta_dir(sp.theta.radians());
            if self.json {
                let mut r = self.result(Command::Spectrum);
                r.spectrum = Some(SpectrumRecord::from(sp));
                let r = self.finish(r);
                self.out.json(dir.join("spectrum.json"), &r)?;
            }
            if self.csv {
                self.out.csv(dir.join("spectrum.csv"), &["index", "re_E", "im_E", "kind", "parity"], output::spectrum_rows(sp))?;
                self.out.csv(
                    dir.join("rays.csv"),
                    &["ray", "state_index", "origin_re", "origin_im", "angle"],
                    output::ray_rows(sp),
                )?;
                let (header, rows) = output::wavefunction_table(sp);
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                self.out.csv(dir.join("wavefunctions.csv"), &header, rows)?;
            }
        }
        Ok(())
    }

    fn rates(&mut self) -> Result<(), CliError> {
        let ordinal = self.run.require_initial_state()?;
        let solved = self.solve_all()?;
        let params = self.run.emission();
        let radius = self.run.tolerances.match_radius;
        let local = if solved.len() == 1 {
            vec![ordinal]
        } else {
            track_emitter(&solved.iter().map(|s| &s.spectrum).collect::<Vec<_>>(), ordinal, radius)?
        };

        for (s, &k) in solved.iter().zip(&local) {
            let decay = s.rate(k, &params)?;
            let shift = s.shift(k, &params)?;
            let dir = self.theta_dir(s.spectrum.theta.radians());
            if self.json {
                let mut r = self.result(Command::Rates);
                r.spectrum = Some(SpectrumRecord::from(&s.spectrum));
                r.decay = Some(decay.clone());
                r.shift = Some(shift.clone());
                let r = self.finish(r);
                self.out.json(dir.join("rates.json"), &r)?;
            }
            if self.csv {
                self.out.csv(
                    dir.join("convergence.csv"),
                    &["n_states_included", "cumulative_rate", "cumulative_fraction"],
                    output::convergence_rows(&decay),
                )?;
                self.out.csv(
                    dir.join("partials.csv"),
                    &["final_index", "kind", "parity", "re_E", "im_E", "rate", "shift"],
                    output::partial_rows(&s.spectrum, &decay, &shift),
                )?;
            }
        }

        if solved.len() > 1 && self.json {
            let summary = ThetaSummary {
                rate: scan_solved(&solved, Observable::TotalRate, ordinal, &params, radius)?,
                shift: scan_solved(&solved, Observable::TotalShift, ordinal, &params, radius)?,
            };
            let mut r = self.result(Command::Rates);
            r.theta_scan = Some(summary);
            let r = self.finish(r);
            self.out.json(self.dir.join("theta_scan.json"), &r)?;
        }
        Ok(())
    }

    fn scan_theta(&mut self) -> Result<(), CliError> {
        let solved = self.solve_all()?;
        let spectra: Vec<_> = solved.into_iter().map(|s| s.spectrum).collect();
        let report = trajectories_from_spectra(&spectra, &self.run.tolerances)?;
        if self.json {
            let mut r = self.result(Command::ScanTheta);
            r.trajectories = Some(report.clone());
            let r = self.finish(r);
            self.out.json(self.dir.join("trajectories.json"), &r)?;
        }
        if self.csv {
            self.out.csv(
                self.dir.join("trajectories.csv"),
                &["pole", "kind", "parity", "theta", "re_E", "im_E", "confirmed"],
                output::trajectory_rows(&report),
            )?;
        }
        Ok(())
    }

    fn validate(&mut self) -> Result<bool, CliError> {
        let report = validate(self.run)?;
        let passed = report.all_passed;
        let mut r = self.result(Command::Validate);
        r.validation = Some(report);
        let r = self.finish(r);
        // the report is always written as JSON; it is the command's product
        self.out.json(self.dir.join("validate.json"), &r)?;
        Ok(passed)
    }
}

fn check(name: &str, passed: bool, value: Option<f64>, tolerance: Option<f64>, detail: impl Into<String>) -> Check {
    Check {
        name: name.to_string(),
        passed,
        value,
        tolerance,
        detail: detail.into(),
    }
}

/// Relative difference, with `floor` as the smallest denominator.
fn rel(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Run every consistency check at the first configured θ. Numerical failures
/// inside a check are reported as a failed check, not as an error.
pub fn validate(run: &RunConfig) -> Result<ValidationReport, CliError> {
    let ordinal = run.require_initial_state()?;
    let v = &run.validation;
    let pipeline = run.pipeline();
    let params = run.emission();
    let theta = run.angles()[0];
    let base = pipeline.solve(theta)?;
    let sp = &base.spectrum;
    let mut rep = ValidationReport::default();

    // units and the perturbative regime
    let units = run.units();
    rep.checks.push(check(
        "units",
        units.is_relativistically_sound(),
        Some(units.c_light()),
        Some(1.0),
        "atomic units need c > 1",
    ));
    match base.rate(ordinal, &params) {
        Ok(decay) => {
            let ground = sp.discrete(0).map(|s| s.energy.re).unwrap_or(0.0);
            let omega = sp.discrete(ordinal).map(|s| s.energy.re).unwrap_or(0.0) - ground;
            let ratio = if omega > 0.0 { decay.total.abs() / omega } else { 0.0 };
            rep.checks.push(check(
                "perturbative_regime",
                ratio < 1e-2,
                Some(ratio),
                Some(1e-2),
                "total rate relative to the transition frequency to the ground state",
            ));
            let leak = same_parity_leakage(ordinal, sp, &decay)?;
            rep.checks.push(check(
                "parity_selection",
                leak < v.parity_tol,
                Some(leak),
                Some(v.parity_tol),
                "largest same-parity partial rate",
            ));
        }
        Err(e) => rep.checks.push(check("emitter", false, None, None, e.to_string())),
    }

    // dipole sum rule for every discrete state the grid resolves
    let ordinals: Vec<usize> = checked_discrete(sp, resolved_energy(&sp.grid))
        .into_iter()
        .filter_map(|k| sp.discrete_ordinal_of(k))
        .collect();
    let sum = sum_rule_report(sp, &base.table, &ordinals)?;
    rep.checks.push(check(
        "sum_rule",
        sum.max_abs_error < v.sum_rule_tol,
        Some(sum.max_abs_error),
        Some(v.sum_rule_tol),
        format!("{} discrete states against -1/2", ordinals.len()),
    ));
    rep.sum_rule = Some(sum);

    // θ-independence of the observables
    let thetas = run.scan_thetas();
    let scan = thetas
        .par_iter()
        .map(|&t| pipeline.solve(ScalingAngle::new(t)?))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|solved| {
            let r = scan_solved(&solved, Observable::TotalRate, ordinal, &params, run.tolerances.match_radius)?;
            let s = scan_solved(&solved, Observable::TotalShift, ordinal, &params, run.tolerances.match_radius)?;
            Ok((r, s))
        });
    match scan {
        Ok((r, s)) => {
            for (name, sc) in [("theta_independence_rate", &r), ("theta_independence_shift", &s)] {
                rep.checks.push(check(
                    name,
                    sc.max_rel_deviation < v.theta_scan_tol,
                    Some(sc.max_rel_deviation),
                    Some(v.theta_scan_tol),
                    format!("theta in {:?}", sc.thetas),
                ));
            }
            rep.rate_scan = Some(r);
            rep.shift_scan = Some(s);
        }
        Err(e) => rep.checks.push(check("theta_independence", false, None, None, e.to_string())),
    }

    // independent Hermitian path for every bound emitter
    let bound: Vec<usize> = checked_discrete(sp, resolved_energy(&sp.grid))
        .into_iter()
        .filter(|&k| sp.states[k].kind == StateKind::Bound)
        .filter_map(|k| sp.discrete_ordinal_of(k))
        .collect();
    let compared = bound
        .iter()
        .map(|&k| {
            let o = hermitian_oracle(&run.potential, &pipeline.grid, k, &params)?;
            Ok((k, o, base.rate(k, &params)?.total, base.shift(k, &params)?.total))
        })
        .collect::<Result<Vec<_>, cs_emission::Error>>();
    rep.checks.push(match compared {
        Ok(rows) => {
            // the ground state has no decay channel; its rate is compared
            // against the largest rate in the set rather than against zero
            let rate_scale = rows.iter().map(|r| r.1.rate.abs()).fold(0.0, f64::max) * 1e-6;
            let shift_scale = rows.iter().map(|r| r.1.shift.abs()).fold(0.0, f64::max) * 1e-6;
            rep.oracle = rows
                .into_iter()
                .map(|(k, o, rate, shift)| OracleComparison {
                    ordinal: k,
                    oracle: o,
                    rate,
                    shift,
                    rate_rel_error: rel(rate, o.rate, rate_scale),
                    shift_rel_error: rel(shift, o.shift, shift_scale),
                })
                .collect();
            let worst = rep.oracle.iter().map(|c| c.rate_rel_error.max(c.shift_rel_error)).fold(0.0, f64::max);
            check(
                "hermitian_oracle",
                worst < v.oracle_tol,
                Some(worst),
                Some(v.oracle_tol),
                format!("{} bound emitters, rate and shift", bound.len()),
            )
        }
        Err(e) => check("hermitian_oracle", false, None, Some(v.oracle_tol), e.to_string()),
    });

    // a second, independent discretization
    let alt = run.alt_grid();
    let cross = alt
        .build()
        .map_err(|e| e.to_string())
        .and_then(|g| pipeline.with_grid(g).spectrum(theta).map_err(|e| e.to_string()))
        .and_then(|other| compare_spectra(sp, &other).map_err(|e| e.to_string()));
    match cross {
        Ok(c) => {
            rep.checks.push(check(
                "cross_discretization",
                c.max_delta < v.cross_grid_tol,
                Some(c.max_delta),
                Some(v.cross_grid_tol),
                format!("alt grid [{}, {}] with {} points", alt.x_min, alt.x_max, alt.n_points),
            ));
            rep.cross_grid = Some(c);
        }
        Err(e) => rep.checks.push(check("cross_discretization", false, None, Some(v.cross_grid_tol), e)),
    }

    // the cutoff drops out of the total but not out of the partials
    match cutoff_sensitivity(ordinal, sp, &base.table, &params, v.cutoff_factor) {
        Ok(c) => {
            rep.checks.push(check(
                "cutoff_independence",
                c.total_rel_change < v.cutoff_tol,
                Some(c.total_rel_change),
                Some(v.cutoff_tol),
                format!("cutoff x{}; largest partial change {:e}", c.factor, c.max_partial_rel_change),
            ));
            rep.cutoff = Some(c);
        }
        Err(e) => rep.checks.push(check("cutoff_independence", false, None, Some(v.cutoff_tol), e.to_string())),
    }

    rep.all_passed = rep.checks.iter().all(|c| c.passed);
    Ok(rep)
}

pub fn describe(files: &[PathBuf], root: &Path) -> String {
    files
        .iter()
        .map(|f| f.strip_prefix(root).unwrap_or(f).display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
