//! Two-level Raman pulse dynamics, Gaussian beam profile, and the
//! ballistically expanding atom cloud.
//!
//! Everything here is a closed-form expression; the ensemble averaging over
//! the cloud lives in [`crate::quadrature`] and [`crate::interferometer`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Boltzmann constant, exact SI value (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Mass of a rubidium-87 atom (kg).
pub const RB87_MASS: f64 = 1.44316e-25;

/// Amplitude pair (c1, c2) of the effective two-level atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl TwoLevelState {
    /// All population in the lower eigenstate: (1, 0).
    pub fn ground() -> Self {
        Self {
            c1: Complex64::new(1.0, 0.0),
            c2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    /// |c1|^2 + |c2|^2; unity for any physical state.
    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// Transition probability |c2|^2.
    pub fn excited_population(&self) -> f64 {
        self.c2.norm_sqr()
    }
}

/// Unitary transfer matrix of a single Raman pulse,
/// `[[a, -i b], [-i b*, a*]]`.
///
/// The family is closed under products, Hermitian conjugation, and carries
/// the full pulse information: `|b|^2` is the transition probability from
/// either eigenstate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTransfer {
    a: Complex64,
    b: Complex64,
}

impl PulseTransfer {
    /// Transfer matrix for a square pulse of effective Rabi frequency
    /// `omega_eff`, duration `tau`, two-photon detuning `delta`, firing
    /// time `t0`, and laser phase `phi` (all angles in radians, times in
    /// seconds, frequencies in rad/s).
    ///
    /// With `omega_r = sqrt(omega_eff^2 + delta^2)`:
    ///
    /// ```text
    /// a = cos(omega_r tau / 2) - i (delta/omega_r) sin(omega_r tau / 2)
    /// b = exp(i (delta t0 + phi)) (omega_eff/omega_r) sin(omega_r tau / 2)
    /// ```
    ///
    /// The degenerate case `omega_r = 0` returns the identity (no coupling,
    /// no rotating-frame evolution).
    pub fn new(omega_eff: f64, tau: f64, delta: f64, t0: f64, phi: f64) -> Result<Self> {
        if tau < 0.0 {
            return Err(Error::domain(format!(
                "pulse duration must be >= 0, got {tau}"
            )));
        }
        if omega_eff < 0.0 {
            return Err(Error::domain(format!(
                "effective Rabi frequency must be >= 0, got {omega_eff}"
            )));
        }
        let omega_r = omega_eff.hypot(delta);
        if omega_r == 0.0 {
            return Ok(Self::identity());
        }
        let sin_alpha = delta / omega_r;
        let cos_alpha = omega_eff / omega_r;
        let (sin_half, cos_half) = (omega_r * tau / 2.0).sin_cos();
        let a = Complex64::new(cos_half, -sin_alpha * sin_half);
        let b = Complex64::from_polar(cos_alpha * sin_half, delta * t0 + phi);
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Matrix-vector product.
    pub fn apply(&self, s: &TwoLevelState) -> TwoLevelState {
        let i = Complex64::i();
        TwoLevelState {
            c1: self.a * s.c1 - i * self.b * s.c2,
            c2: -i * self.b.conj() * s.c1 + self.a.conj() * s.c2,
        }
    }

    /// Hermitian conjugate; undoes the pulse.
    pub fn dagger(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Matrix product `self * rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            a: self.a * rhs.a - self.b * rhs.b.conj(),
            b: self.a * rhs.b + self.b * rhs.a.conj(),
        }
    }

    /// Population transferred out of the initial eigenstate, |b|^2.
    pub fn transition_probability(&self) -> f64 {
        self.b.norm_sqr()
    }

    /// |a|^2 + |b|^2; unity for a unitary matrix.
    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
}

/// Laser parameters from which the peak two-photon Rabi frequency can be
/// derived. Only used at construction time; the simulation itself depends
/// on `omega_max` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Natural linewidth of the transition (rad/s).
    pub gamma_nat: f64,
    /// Saturation intensity (W/m^2).
    pub i_sat: f64,
    /// Total beam power (W).
    pub p0: f64,
    /// Single-photon detuning from the intermediate state (rad/s).
    /// Distinct from the two-photon detuning of [`PulseTransfer::new`].
    pub detuning_single: f64,
}

/// Gaussian Raman beam with 1/e^2-parameter width `w`,
/// intensity profile `exp(-r^2 / 2 w^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanBeam {
    width: f64,
    omega_max: f64,
}

impl RamanBeam {
    pub fn new(width: f64, omega_max: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::domain(format!(
                "beam width must be > 0, got {width}"
            )));
        }
        if omega_max <= 0.0 {
            return Err(Error::domain(format!(
                "peak Rabi frequency must be > 0, got {omega_max}"
            )));
        }
        Ok(Self { width, omega_max })
    }

    /// Peak Rabi frequency from laser parameters:
    /// `omega_max = gamma^2 / (2 I_s delta) * P0 / (pi w^2)`.
    pub fn from_laser(laser: &LaserParams, width: f64) -> Result<Self> {
        if laser.gamma_nat <= 0.0
            || laser.i_sat <= 0.0
            || laser.p0 <= 0.0
            || laser.detuning_single <= 0.0
        {
            return Err(Error::domain(
                "laser parameters must all be > 0 to derive omega_max".to_string(),
            ));
        }
        let omega_max = laser.gamma_nat.powi(2) / (2.0 * laser.i_sat * laser.detuning_single)
            * laser.p0
            / (std::f64::consts::PI * width * width);
        Self::new(width, omega_max)
    }

    /// Width parameter `w` (m).
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Rabi frequency on the beam axis (rad/s).
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// `omega_max * exp(-r^2 / 2 w^2)` at radial distance `r` from the axis.
    pub fn effective_rabi(&self, r: f64) -> Result<f64> {
        if r < 0.0 {
            return Err(Error::domain(format!(
                "radial distance must be >= 0, got {r}"
            )));
        }
        Ok(self.omega_max * (-r * r / (2.0 * self.width * self.width)).exp())
    }

    /// Nominal pi-pulse duration `pi / omega_max` for an atom on axis.
    pub fn tau_pi(&self) -> f64 {
        std::f64::consts::PI / self.omega_max
    }
}

/// Thermally expanding atomic cloud with 1/e Gaussian width
/// `sigma(t) = sqrt(sigma0^2 + sigma_v^2 t^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomCloud {
    sigma0: f64,
    temperature: f64,
    mass: f64,
}

impl AtomCloud {
    pub fn new(sigma0: f64, temperature: f64, mass: f64) -> Result<Self> {
        if sigma0 <= 0.0 {
            return Err(Error::domain(format!(
                "initial cloud width must be > 0, got {sigma0}"
            )));
        }
        if temperature < 0.0 {
            return Err(Error::domain(format!(
                "temperature must be >= 0, got {temperature}"
            )));
        }
        if mass <= 0.0 {
            return Err(Error::domain(format!("atom mass must be > 0, got {mass}")));
        }
        Ok(Self {
            sigma0,
            temperature,
            mass,
        })
    }

    /// Rubidium-87 cloud.
    pub fn rb87(sigma0: f64, temperature: f64) -> Result<Self> {
        Self::new(sigma0, temperature, RB87_MASS)
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Thermal velocity spread per axis, `sqrt(k_B T / M)` (m/s).
    pub fn velocity_width(&self) -> f64 {
        (BOLTZMANN * self.temperature / self.mass).sqrt()
    }

    /// Cloud width after free flight time `t`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::domain(format!("flight time must be >= 0, got {t}")));
        }
        let sv = self.velocity_width();
        Ok(self.sigma0.hypot(sv * t))
    }
}

/// Diameter ratio of Raman beam to atomic cloud, `s = w / sigma(t)`.
/// The single dimensionless control of ensemble pulse fidelity.
pub fn diameter_ratio(beam: &RamanBeam, cloud: &AtomCloud, t: f64) -> Result<f64> {
    Ok(beam.width() / cloud.sigma(t)?)
}
