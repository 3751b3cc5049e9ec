//! Detection budget: photon flux, hole lifetime under probing, shot-noise
//! phase resolution, mechanical sideband phases and the stability the probe
//! and burn lasers need.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::coupling::{CouplingResult, ProbeSpec};
use crate::error::{Error, Result};
use crate::holeburn::BurnSpec;
use crate::model::MechanicsDerived;

/// Figures quoted for the worked example, used only for side-by-side
/// comparison in reports.
pub mod quoted {
    pub const X_DISP_M: f64 = 0.4e-12;
    pub const CARRIER_PHASE_RAD: f64 = 0.2e-3;
    pub const OVERBURN_TIME_S: f64 = 16e-3;
    pub const THERMAL_PHASE_RAD: f64 = 0.11e-3;
    pub const ZEROPOINT_PHASE_RAD: f64 = 0.4e-6;
    pub const RADIATION_PRESSURE_M: f64 = 20e-15;
    pub const EDGE_ZPF_SHIFT_HZ: f64 = 37.0;
    pub const X_ZPF_M: f64 = 1e-15;
    pub const SHOT_NOISE_LONG_RAD: f64 = 0.45e-6;
    pub const SHOT_NOISE_SHORT_RAD: f64 = 14e-6;
    /// Integration time behind [`SHOT_NOISE_SHORT_RAD`].
    pub const SHOT_NOISE_SHORT_TIME_S: f64 = 25e-6;
    pub const POWER_STABILITY: f64 = 1e-4;
    pub const RELATIVE_EXCESS_30MK: f64 = 1e-3;
}

/// `P / (hbar omega_0)`.
pub fn photon_rate(probe: &ProbeSpec) -> f64 {
    probe.photon_rate()
}

/// Time before probing burns the hole away, `4 pi / Gamma`.
pub fn overburn_time(linewidth_rad_s: f64) -> Result<f64> {
    crate::model::positive("ions.linewidth_rad_s", linewidth_rad_s)?;
    Ok(4.0 * PI / linewidth_rad_s)
}

/// Unit-SNR phase resolution `1 / sqrt(N)` for the photons collected in
/// `integration_time_s`.
pub fn shot_noise_phase(probe: &ProbeSpec, integration_time_s: f64) -> Result<f64> {
    crate::model::positive("integration_time_s", integration_time_s)?;
    let photons = probe.power_w * integration_time_s / (HBAR * probe.angular_frequency());
    Ok(1.0 / photons.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionBudget {
    pub photon_rate_per_s: f64,
    pub overburn_time_s: f64,
    pub integration_time_s: f64,
    pub shot_noise_phase_rad: f64,
}

/// Integration time defaults to the overburn time.
pub fn detection_budget(
    probe: &ProbeSpec,
    linewidth_rad_s: f64,
    integration_time_s: Option<f64>,
) -> Result<DetectionBudget> {
    let tau = overburn_time(linewidth_rad_s)?;
    let t = integration_time_s.unwrap_or(tau);
    Ok(DetectionBudget {
        photon_rate_per_s: photon_rate(probe),
        overburn_time_s: tau,
        integration_time_s: t,
        shot_noise_phase_rad: shot_noise_phase(probe, t)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotNoiseComparison {
    pub long_computed_rad: f64,
    pub long_quoted_rad: f64,
    pub long_ratio: f64,
    pub short_computed_rad: f64,
    pub short_quoted_rad: f64,
    pub short_ratio: f64,
    /// `|long_ratio - short_ratio| / max`: an unexplained constant factor
    /// would leave this near zero.
    pub ratio_spread: f64,
}

/// Shot-noise phase at the overburn time and at 25 us against the quoted
/// figures, as quoted / computed ratios.
pub fn shot_noise_comparison(probe: &ProbeSpec, linewidth_rad_s: f64) -> Result<ShotNoiseComparison> {
    let long = shot_noise_phase(probe, overburn_time(linewidth_rad_s)?)?;
    let short = shot_noise_phase(probe, quoted::SHOT_NOISE_SHORT_TIME_S)?;
    let long_ratio = quoted::SHOT_NOISE_LONG_RAD / long;
    let short_ratio = quoted::SHOT_NOISE_SHORT_RAD / short;
    Ok(ShotNoiseComparison {
        long_computed_rad: long,
        long_quoted_rad: quoted::SHOT_NOISE_LONG_RAD,
        long_ratio,
        short_computed_rad: short,
        short_quoted_rad: quoted::SHOT_NOISE_SHORT_RAD,
        short_ratio,
        ratio_spread: (long_ratio - short_ratio).abs() / long_ratio.max(short_ratio),
    })
}

/// How the rms amplitude behind the thermal sideband is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandConvention {
    /// `x_zpf sqrt(2 n + 1)`, tends to `x_zpf` at zero temperature.
    #[default]
    Quantum,
    /// Equipartition, `sqrt(kB T / (m omega^2))`.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandReport {
    pub temperature_k: f64,
    pub convention: SidebandConvention,
    pub thermal_phase_rad: f64,
    pub zeropoint_phase_rad: f64,
    /// Quantum rms amplitude, `x_zpf sqrt(2 n + 1)`.
    pub total_phase_rad: f64,
    /// `x_zpf sqrt(2 n)`, the amplitude without the zero-point part.
    pub classical_phase_rad: f64,
    /// `total / classical - 1`; undefined at zero occupancy.
    pub relative_excess: Option<f64>,
}

/// Integrated sideband phase `|dV/dX| x omega_0 / P` for the relevant rms
/// amplitudes `x`. `mech` fixes the temperature through its occupancy.
pub fn sideband_phases(
    dvdx0_j_per_m: f64,
    probe: &ProbeSpec,
    mech: &MechanicsDerived,
    temperature_k: f64,
    convention: SidebandConvention,
) -> SidebandReport {
    let scale = dvdx0_j_per_m.abs() * probe.angular_frequency() / probe.power_w;
    let n = mech.mean_occupancy;
    let zpf = mech.x_zpf_m;
    let total = zpf * (2.0 * n + 1.0).sqrt();
    let classical = zpf * (2.0 * n).sqrt();
    let thermal = match convention {
        SidebandConvention::Quantum => total,
        SidebandConvention::Classical => mech.x_thermal_m,
    };
    SidebandReport {
        temperature_k,
        convention,
        thermal_phase_rad: scale * thermal,
        zeropoint_phase_rad: scale * zpf,
        total_phase_rad: scale * total,
        classical_phase_rad: scale * classical,
        relative_excess: (n > 0.0).then(|| total / classical - 1.0),
    }
}

/// Static tip displacement from reflecting the probe off the cantilever,
/// `(2 P / c) / (m omega^2)`.
pub fn radiation_pressure_displacement(probe: &ProbeSpec, mech: &MechanicsDerived) -> f64 {
    2.0 * probe.power_w / SPEED_OF_LIGHT / mech.spring_constant_n_per_m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRequirements {
    /// Fractional probe power stability keeping the static displacement
    /// noise below `x_zpf`. `None` when there is no static displacement.
    pub power_stability: Option<f64>,
    /// Shift of the outermost ions for a zero-point tip displacement.
    pub edge_zpf_shift_hz: f64,
    /// Burn laser linewidth needed to resolve that shift.
    pub laser_linewidth_bound_hz: f64,
}

pub fn stability_requirements(
    coupling: &CouplingResult,
    burn: &BurnSpec,
    mech: &MechanicsDerived,
) -> StabilityRequirements {
    let shift = burn.strain_k_hz_per_m2 * burn.half_thickness() * mech.x_zpf_m;
    StabilityRequirements {
        power_stability: (coupling.x_disp_m != 0.0).then(|| mech.x_zpf_m / coupling.x_disp_m.abs()),
        edge_zpf_shift_hz: shift,
        laser_linewidth_bound_hz: shift / 10.0,
    }
}

/// Computed value next to a quoted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub unit: String,
    pub computed: f64,
    pub quoted: f64,
    /// `computed / quoted`.
    pub ratio: f64,
    /// `|computed - quoted| / |quoted|`.
    pub relative_deviation: f64,
}

impl Comparison {
    pub fn new(name: &str, unit: &str, computed: f64, quoted: f64) -> Result<Comparison> {
        if quoted == 0.0 || !quoted.is_finite() {
            return Err(Error::Validation(format!("quoted value for {name} must be finite and nonzero")));
        }
        Ok(Comparison {
            name: name.to_string(),
            unit: unit.to_string(),
            computed,
            quoted,
            ratio: computed / quoted,
            relative_deviation: (computed - quoted).abs() / quoted.abs(),
        })
    }
}
