//! Physical parameters of the resonator, the ion ensemble and the
//! environment, plus the mechanical and spectroscopic constants derived from
//! them.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR, TWO_PI};
use crate::coupling::ProbeSpec;
use crate::error::{Error, Result};

/// Single-clamped cantilever. `x` runs across the thickness, `z` along the
/// beam axis from the clamped end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantileverSpec {
    pub length_m: f64,
    pub thickness_m: f64,
    pub width_m: f64,
    pub youngs_modulus_pa: f64,
    pub effective_mass_kg: f64,
    pub mode_frequency_hz: f64,
}

impl CantileverSpec {
    pub fn validate(&self) -> Result<()> {
        positive("cantilever.length_m", self.length_m)?;
        positive("cantilever.thickness_m", self.thickness_m)?;
        positive("cantilever.width_m", self.width_m)?;
        positive("cantilever.youngs_modulus_pa", self.youngs_modulus_pa)?;
        positive("cantilever.effective_mass_kg", self.effective_mass_kg)?;
        positive("cantilever.mode_frequency_hz", self.mode_frequency_hz)?;
        if self.thickness_m > self.length_m {
            return Err(Error::InvalidSpec {
                field: "cantilever.thickness_m",
                reason: format!(
                    "thickness {} m exceeds length {} m (thin-beam model)",
                    self.thickness_m, self.length_m
                ),
            });
        }
        Ok(())
    }

    pub fn half_thickness_m(&self) -> f64 {
        0.5 * self.thickness_m
    }
}

/// Optical transition and doping of the ion ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonEnsembleSpec {
    pub wavelength_m: f64,
    /// Homogeneous linewidth, rad/s.
    pub linewidth_rad_s: f64,
    /// Signed; only the magnitude enters `k`.
    pub strain_sensitivity_hz_per_pa: f64,
    pub zeeman_sensitivity_hz_per_t: f64,
    pub ion_density_m3: f64,
    pub inhomogeneous_width_hz: f64,
}

impl IonEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        positive("ions.wavelength_m", self.wavelength_m)?;
        positive("ions.linewidth_rad_s", self.linewidth_rad_s)?;
        finite("ions.strain_sensitivity_hz_per_pa", self.strain_sensitivity_hz_per_pa)?;
        positive("ions.zeeman_sensitivity_hz_per_t", self.zeeman_sensitivity_hz_per_t)?;
        non_negative("ions.ion_density_m3", self.ion_density_m3)?;
        positive("ions.inhomogeneous_width_hz", self.inhomogeneous_width_hz)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub temperature_k: f64,
    pub optical_power_limit_w: f64,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        non_negative("environment.temperature_k", self.temperature_k)?;
        positive("environment.optical_power_limit_w", self.optical_power_limit_w)?;
        Ok(())
    }
}

/// Mechanical constants of the fundamental mode at the environment temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicsDerived {
    pub angular_frequency_rad_s: f64,
    pub effective_mass_kg: f64,
    /// `m_eff * omega_M^2`, N/m.
    pub spring_constant_n_per_m: f64,
    /// Ground-state rms amplitude `sqrt(hbar / (2 m omega))`.
    pub x_zpf_m: f64,
    /// Classical equipartition amplitude `sqrt(k_B T / (m omega^2))`.
    pub x_thermal_m: f64,
    /// Quantum rms amplitude `x_zpf * sqrt(2 n + 1)`.
    pub x_rms_m: f64,
    pub mean_occupancy: f64,
}

/// Bose-Einstein occupancy of a mode at `angular_frequency` and `temperature_k`.
pub fn mean_occupancy(angular_frequency: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 0.0;
    }
    let x = HBAR * angular_frequency / (BOLTZMANN * temperature_k);
    1.0 / x.exp_m1()
}

pub fn derive_mechanics(c: &CantileverSpec, env: &Environment) -> MechanicsDerived {
    let omega = TWO_PI * c.mode_frequency_hz;
    let m = c.effective_mass_kg;
    let spring = m * omega * omega;
    let x_zpf = (HBAR / (2.0 * m * omega)).sqrt();
    let x_thermal = (BOLTZMANN * env.temperature_k / spring).sqrt();
    let occupancy = mean_occupancy(omega, env.temperature_k);
    MechanicsDerived {
        angular_frequency_rad_s: omega,
        effective_mass_kg: m,
        spring_constant_n_per_m: spring,
        x_zpf_m: x_zpf,
        x_thermal_m: x_thermal,
        x_rms_m: x_zpf * (2.0 * occupancy + 1.0).sqrt(),
        mean_occupancy: occupancy,
    }
}

/// Strain-induced shift per unit ion height and unit tip displacement, Hz/m^2.
///
/// Tip-loaded Euler-Bernoulli beam: the curvature at the clamp is `3X/L^2`,
/// so an ion at height `x` sees strain `3xX/L^2`, stress `E` times that, and
/// a frequency shift `|s|` times the stress.
pub fn strain_coupling_k(c: &CantileverSpec, ions: &IonEnsembleSpec) -> f64 {
    3.0 * c.youngs_modulus_pa * ions.strain_sensitivity_hz_per_pa.abs()
        / (c.length_m * c.length_m)
}

/// Ions per unit detuning and unit height inside the probe footprint,
/// `(Hz m)^-1`.
///
/// The footprint is the full crystal width times the beam extent along the
/// beam axis; the inhomogeneous distribution is taken flat over
/// `inhomogeneous_width_hz`.
pub fn ion_spectral_density(
    ions: &IonEnsembleSpec,
    beam: &ProbeSpec,
    c: &CantileverSpec,
) -> Result<f64> {
    let bz = beam.beam_extent_m;
    if bz > c.length_m {
        return Err(Error::BeamOverfill {
            axis: "z (beam axis)",
            beam_m: bz,
            crystal_m: c.length_m,
        });
    }
    let across = beam.cross_section_m2 / bz;
    // 1 ppm slack so that A = w * b_z exactly is not rejected by rounding.
    if across > c.width_m * (1.0 + 1e-6) {
        return Err(Error::BeamOverfill {
            axis: "y (width)",
            beam_m: across,
            crystal_m: c.width_m,
        });
    }
    Ok(ions.ion_density_m3 * c.width_m * bz / ions.inhomogeneous_width_hz)
}

pub(crate) fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}

pub(crate) fn non_negative(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field,
            reason: format!("must be finite and >= 0, got {v}"),
        })
    }
}

pub(crate) fn finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field,
            reason: format!("must be finite, got {v}"),
        })
    }
}

/// Parameter set of the worked example: a 100 x 10 x 10 um^3 Y2SiO5
/// cantilever doped with 0.1 % Eu3+, probed at 580 nm.
pub mod worked_example {
    use super::*;

    pub fn cantilever() -> CantileverSpec {
        CantileverSpec {
            length_m: 100e-6,
            thickness_m: 10e-6,
            width_m: 10e-6,
            youngs_modulus_pa: 135e9,
            effective_mass_kg: 1.1e-11,
            mode_frequency_hz: 890e3,
        }
    }

    pub fn ions() -> IonEnsembleSpec {
        IonEnsembleSpec {
            wavelength_m: 580e-9,
            linewidth_rad_s: TWO_PI * 122.0,
            strain_sensitivity_hz_per_pa: -211.4,
            // 3.8 kHz/G
            zeeman_sensitivity_hz_per_t: 3.8e7,
            // 0.1 % of the 1.87e28 m^-3 yttrium sites
            ion_density_m3: 1.87e25,
            inhomogeneous_width_hz: 1.4e9,
        }
    }

    pub fn environment() -> Environment {
        Environment {
            temperature_k: 3.0,
            optical_power_limit_w: 3e-3,
        }
    }

    pub fn probe() -> ProbeSpec {
        ProbeSpec {
            wavelength_m: 580e-9,
            power_w: 1e-3,
            cross_section_m2: 100e-12,
            beam_extent_m: 10e-6,
        }
    }
}
