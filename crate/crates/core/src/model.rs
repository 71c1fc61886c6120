//! Domain types shared across the crate. Everything is in atomic units:
//! ħ = m = q = 1, energies in Hartree, lengths in bohr.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in atomic units (inverse fine-structure constant).
pub const C_LIGHT_AU: f64 = 137.035999;

/// Unit conventions. ħ, m and q are fixed to 1; only c is adjustable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    c_light: f64,
}

impl UnitSystem {
    pub const HBAR: f64 = 1.0;
    pub const MASS: f64 = 1.0;
    pub const CHARGE: f64 = 1.0;

    /// Accepts any finite positive c. Values `<= 1` are representable so the
    /// literal "c = 1/137" reading can be run, but [`is_relativistically_sound`]
    /// reports them.
    ///
    /// [`is_relativistically_sound`]: UnitSystem::is_relativistically_sound
    pub fn new(c_light: f64) -> Result<Self> {
        if !c_light.is_finite() || c_light <= 0.0 {
            return Err(Error::InvalidUnits(c_light));
        }
        Ok(Self { c_light })
    }

    pub fn c_light(&self) -> f64 {
        self.c_light
    }

    /// Compton cutoff frequency mc²/ħ (c² in a.u.).
    pub fn compton_frequency(&self) -> f64 {
        Self::MASS * self.c_light * self.c_light / Self::HBAR
    }

    /// Atomic units require c > 1 (c = 1/α).
    pub fn is_relativistically_sound(&self) -> bool {
        self.c_light > 1.0
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { c_light: C_LIGHT_AU }
    }
}

/// Complex energy E = ħω − iΓ/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub re: f64,
    pub im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn from_omega_gamma(omega: f64, gamma: f64) -> Self {
        Self {
            re: omega * UnitSystem::HBAR,
            im: -0.5 * gamma,
        }
    }

    pub fn omega(&self) -> f64 {
        self.re / UnitSystem::HBAR
    }

    /// Width Γ = −2 Im E.
    pub fn gamma(&self) -> f64 {
        -2.0 * self.im
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Principal argument of E in (−π, π].
    pub fn arg(&self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl From<Complex64> for ComplexEnergy {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Complex transition frequency f_nm = (E_n − E_m)/ħ = ω_nm − i(Γ_n − Γ_m)/2.
pub fn complex_frequency(e_n: ComplexEnergy, e_m: ComplexEnergy) -> Complex64 {
    Complex64::new(
        (e_n.re - e_m.re) / UnitSystem::HBAR,
        (e_n.im - e_m.im) / UnitSystem::HBAR,
    )
}

/// Analytic 1D potentials, evaluable along the rotated ray x·e^{iθ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    /// V(x) = (a·x² + b)·exp(−w·x²)
    GaussianWell { a: f64, b: f64, w: f64 },
    /// V(x) = ½·ω₀²·x²
    Harmonic { omega0: f64 },
}

impl PotentialSpec {
    /// The double-barrier well used throughout the examples and tests.
    pub const fn double_barrier() -> Self {
        PotentialSpec::GaussianWell {
            a: 0.5,
            b: -2.1,
            w: 0.1,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            PotentialSpec::GaussianWell { a, b, w } => {
                let z2 = z * z;
                (z2 * a + b) * (-(z2 * w)).exp()
            }
            PotentialSpec::Harmonic { omega0 } => z * z * (0.5 * omega0 * omega0),
        }
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval(Complex64::new(x, 0.0)).re
    }

    /// Energy above which the spectrum is continuous, or `None` for confining
    /// potentials whose spectrum is purely discrete.
    pub fn continuum_threshold(&self) -> Option<f64> {
        match self {
            PotentialSpec::GaussianWell { .. } => Some(0.0),
            PotentialSpec::Harmonic { .. } => None,
        }
    }

    /// V(−x) = V(x).
    pub fn is_even(&self) -> bool {
        true
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PotentialSpec::GaussianWell { .. } => "gaussian-well",
            PotentialSpec::Harmonic { .. } => "harmonic",
        }
    }
}

/// Complex-scaling angle θ, clockwise, restricted to [0, π/4).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ScalingAngle(f64);

impl ScalingAngle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_4).contains(&theta) {
            return Err(Error::InvalidTheta(theta));
        }
        Ok(Self(theta))
    }

    pub const HERMITIAN: ScalingAngle = ScalingAngle(0.0);

    pub fn radians(self) -> f64 {
        self.0
    }

    /// η = e^{iθ}
    pub fn eta(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }

    /// Angle of the rotated continuum ray, arg E = −2θ.
    pub fn continuum_ray_angle(self) -> f64 {
        -2.0 * self.0
    }

    pub fn is_hermitian(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for ScalingAngle {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ScalingAngle> for f64 {
    fn from(t: ScalingAngle) -> f64 {
        t.0
    }
}
