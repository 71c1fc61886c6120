//! Spectrum, decay rate and shift of the second resonance of the
//! double-barrier well on the default grid.

use cs_emission::{Pipeline, ScalingAngle, StateKind};

fn main() -> cs_emission::Result<()> {
    let pipeline = Pipeline::double_barrier();
    let solved = pipeline.solve(ScalingAngle::new(0.15)?)?;

    for (ordinal, &k) in solved.spectrum.discrete_indices().iter().enumerate() {
        let s = &solved.spectrum.states[k];
        let kind = if s.kind == StateKind::Bound { "bound" } else { "resonance" };
        println!("{ordinal}: {:>+.10} {:>+.10}i  {kind} {}", s.energy.re, s.energy.im, s.parity.as_str());
    }

    let rate = solved.rate(3, &pipeline.emission)?;
    let shift = solved.shift(3, &pipeline.emission)?;
    println!("gamma = {:.12e}  (discrete {:.6e}, continuum {:.6e})", rate.total, rate.discrete_sum, rate.continuum_sum);
    println!("shift = {:.12e}", shift.total);
    Ok(())
}
