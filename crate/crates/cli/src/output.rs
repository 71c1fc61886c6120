//! JSON and CSV writers. Floats in CSV use 17 significant digits; JSON uses
//! the shortest representation that parses back to the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use cs_emission::emission::DecayBreakdown;
use cs_emission::spectral::TrajectoryReport;
use cs_emission::{ShiftBreakdown, Spectrum};
use serde::Serialize;

use crate::CliError;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Default)]
pub struct Written(pub Vec<PathBuf>);

impl Written {
    pub fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        write(&path, text.as_bytes())?;
        self.0.push(path);
        Ok(())
    }

    pub fn csv(&mut self, path: PathBuf, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        write(&path, &bytes)?;
        self.0.push(path);
        Ok(())
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn spectrum_rows(sp: &Spectrum) -> Vec<Vec<String>> {
    sp.states
        .iter()
        .map(|s| {
            vec![
                s.index.to_string(),
                float(s.energy.re),
                float(s.energy.im),
                s.kind.as_str().to_string(),
                s.parity.as_str().to_string(),
            ]
        })
        .collect()
}

/// The rotated electronic continuum starts at E = 0; each discrete state
/// carries its own photonic continuum E_n + ħω·e^{−2iθ}.
pub fn ray_rows(sp: &Spectrum) -> Vec<Vec<String>> {
    let angle = float(sp.theta.continuum_ray_angle());
    let mut rows = vec![vec![
        "electronic".to_string(),
        String::new(),
        float(0.0),
        float(0.0),
        angle.clone(),
    ]];
    for s in sp.states.iter().filter(|s| s.kind.is_discrete()) {
        rows.push(vec![
            "photonic".to_string(),
            s.index.to_string(),
            float(s.energy.re),
            float(s.energy.im),
            angle.clone(),
        ]);
    }
    rows
}

/// Potential on the real axis and the discrete wavefunctions, one column
/// pair per discrete state.
pub fn wavefunction_table(sp: &Spectrum) -> (Vec<String>, Vec<Vec<String>>) {
    let discrete = sp.discrete_indices();
    let mut header = vec!["x".to_string(), "v".to_string()];
    for k in &discrete {
        header.push(format!("re_psi_{k}"));
        header.push(format!("im_psi_{k}"));
    }
    let rows = (0..sp.grid.n_points())
        .map(|i| {
            let x = sp.grid.x(i);
            let mut row = vec![float(x), float(sp.potential.eval_real(x))];
            for &k in &discrete {
                let u = sp.states[k].wavefunction[i];
                row.push(float(u.re));
                row.push(float(u.im));
            }
            row
        })
        .collect();
    (header, rows)
}

pub fn convergence_rows(b: &DecayBreakdown) -> Vec<Vec<String>> {
    b.cumulative
        .iter()
        .map(|p| vec![p.n_states_included.to_string(), float(p.cumulative_rate), float(p.cumulative_fraction)])
        .collect()
}

pub fn partial_rows(sp: &Spectrum, b: &DecayBreakdown, s: &ShiftBreakdown) -> Vec<Vec<String>> {
    b.partials
        .iter()
        .zip(&s.partials)
        .map(|(r, sh)| {
            let st = &sp.states[r.final_index];
            vec![
                r.final_index.to_string(),
                st.kind.as_str().to_string(),
                st.parity.as_str().to_string(),
                float(st.energy.re),
                float(st.energy.im),
                float(r.rate),
                float(sh.shift),
            ]
        })
        .collect()
}

pub fn trajectory_rows(t: &TrajectoryReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (p, pole) in t.poles.iter().enumerate() {
        for (theta, e) in t.thetas.iter().zip(&pole.energies) {
            rows.push(vec![
                p.to_string(),
                pole.kind.as_str().to_string(),
                pole.parity.as_str().to_string(),
                float(*theta),
                float(e.re),
                float(e.im),
                pole.confirmed.to_string(),
            ]);
        }
    }
    rows
}
