//! Dispersive interaction energy `V(X)` between the probe and the ions outside
//! the functionalized hole, its slope at `X = 0`, the resulting static
//! displacement of the resonator and the optical phase on the carrier.
//!
//! `V(X)` is available three ways:
//!
//! * [`DispersiveMedium::v_numeric`]: quadrature over the thickness of the
//!   exact per-height log ratio, no expansion in `X`.
//! * [`DispersiveMedium::v_closed`]: the first-order-in-`X` closed form,
//!   including the Brownian smear.
//! * [`DispersiveMedium::v_lowt`]: its leading term in `g gradB0 e / (6D)`
//!   with the smear neglected.
//!
//! Ions at `x` outside the hole contribute `sigma0 I / d` each, where `d` is
//! their detuning once the tip is displaced by `X`. Integrated over
//! `d in (-inf, left(x) + kxX] U [right(x) + kxX, inf)` the two improper
//! integrals diverge separately; their sum is the finite
//! `ln(|left + kxX| / (right + kxX))`, which is what gets integrated over `x`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, SPEED_OF_LIGHT, TWO_PI};
use crate::error::{Error, Result};
use crate::holeburn::{self, BurnSpec};
use crate::model::{positive, MechanicsDerived};
use crate::quadrature;
use crate::tolerances::{
    DEGENERACY_RTOL, DISPERSIVE_RATIO_MIN, FD_EDGE_SHIFT_FRACTION, QUADRATURE_MAX_INTERVALS,
    QUADRATURE_RTOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub wavelength_m: f64,
    pub power_w: f64,
    pub cross_section_m2: f64,
    /// Extent of the beam footprint along the cantilever axis.
    pub beam_extent_m: f64,
}

impl ProbeSpec {
    pub fn validate(&self) -> Result<()> {
        positive("probe.wavelength_m", self.wavelength_m)?;
        crate::model::non_negative("probe.power_w", self.power_w)?;
        positive("probe.cross_section_m2", self.cross_section_m2)?;
        positive("probe.beam_extent_m", self.beam_extent_m)?;
        Ok(())
    }

    pub fn intensity(&self) -> f64 {
        self.power_w / self.cross_section_m2
    }

    /// `omega_0 = 2 pi c / lambda`.
    pub fn angular_frequency(&self) -> f64 {
        TWO_PI * SPEED_OF_LIGHT / self.wavelength_m
    }

    /// Photons per second through the cross section, `I A / (hbar omega_0)`.
    pub fn photon_rate(&self) -> f64 {
        self.intensity() * self.cross_section_m2 / (HBAR * self.angular_frequency())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Numeric,
    Closed,
    LowT,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Numeric, Method::Closed, Method::LowT];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Numeric => "numeric",
            Method::Closed => "closed",
            Method::LowT => "lowt",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "numeric" => Ok(Method::Numeric),
            "closed" => Ok(Method::Closed),
            "lowt" => Ok(Method::LowT),
            other => Err(Error::Validation(format!("unknown method `{other}`"))),
        }
    }
}

/// What [`DispersiveMedium::v_closed_with`] does at `|g gradB0| = k Xburn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Degeneracy {
    #[default]
    Refuse,
    /// Evaluate the algebraically equivalent form that stays finite there.
    AnalyticLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub method: Method,
    /// Tip displacement at which `v_j` and the carrier phase are evaluated.
    pub displacement_m: f64,
    pub v_j: f64,
    pub dvdx0_j_per_m: f64,
    pub x_disp_m: f64,
    pub carrier_phase_rad: f64,
}

/// `sigma_0 = lambda^3 Gamma / (16 pi^2 c)`.
pub fn sigma0(wavelength_m: f64, linewidth_rad_s: f64) -> f64 {
    wavelength_m.powi(3) * linewidth_rad_s / (16.0 * PI * PI * SPEED_OF_LIGHT)
}

/// `|2 pi d| / Gamma`; large values mean the dispersive formulas apply.
pub fn dispersive_ratio(detuning_hz: f64, linewidth_rad_s: f64) -> f64 {
    (TWO_PI * detuning_hz).abs() / linewidth_rad_s
}

fn check_detuning(detuning_hz: f64, linewidth_rad_s: f64) -> Result<()> {
    if detuning_hz == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let ratio = dispersive_ratio(detuning_hz, linewidth_rad_s);
    if ratio < DISPERSIVE_RATIO_MIN {
        log::warn!("|2 pi d|/Gamma = {ratio:.3e}: outside the dispersive regime");
    }
    Ok(())
}

/// Phase imprinted on the probe by one ion at detuning `detuning_hz`.
pub fn per_ion_phase(detuning_hz: f64, probe: &ProbeSpec, linewidth_rad_s: f64) -> Result<f64> {
    check_detuning(detuning_hz, linewidth_rad_s)?;
    Ok(-probe.wavelength_m.powi(2) * linewidth_rad_s
        / (8.0 * PI * probe.cross_section_m2)
        / detuning_hz)
}

/// AC Stark shift of one ion, J.
pub fn per_ion_stark(detuning_hz: f64, probe: &ProbeSpec, linewidth_rad_s: f64) -> Result<f64> {
    check_detuning(detuning_hz, linewidth_rad_s)?;
    Ok(sigma0(probe.wavelength_m, linewidth_rad_s) * probe.intensity() / detuning_hz)
}

/// `X_disp = -dV/dX|_0 / (m omega_M^2)`.
pub fn static_displacement(dvdx0_j_per_m: f64, mech: &MechanicsDerived) -> f64 {
    -dvdx0_j_per_m / mech.spring_constant_n_per_m
}

/// Phase on the carrier, `V omega_0 / (I A)`.
pub fn carrier_phase(v_j: f64, probe: &ProbeSpec) -> f64 {
    v_j * probe.angular_frequency() / (probe.intensity() * probe.cross_section_m2)
}

/// `(y - ln(1 + y)) / y^2`, finite through `y = 0`.
fn log_remainder(y: f64) -> f64 {
    if y.abs() < 1e-3 {
        // alternating series, truncation below 1e-19
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 0..6 {
            sum += term / (n as f64 + 2.0);
            term *= -y;
        }
        sum
    } else {
        (y - y.ln_1p()) / (y * y)
    }
}

/// Everything `V(X)` depends on: the burnt hole, the ion spectral density
/// `n` in `(Hz m)^-1`, the probe and the homogeneous linewidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveMedium {
    pub burn: BurnSpec,
    pub spectral_density: f64,
    pub probe: ProbeSpec,
    pub linewidth_rad_s: f64,
}

impl DispersiveMedium {
    /// `n sigma_0 I`, J m^-1 (per unit height, per unit log-ratio).
    pub fn prefactor(&self) -> f64 {
        self.spectral_density
            * sigma0(self.probe.wavelength_m, self.linewidth_rad_s)
            * self.probe.intensity()
    }

    /// Small parameter of the numeric-vs-closed comparison, `k (e/2) |X| / D`.
    pub fn displacement_parameter(&self, x_tip_m: f64) -> f64 {
        self.burn.strain_k_hz_per_m2 * self.burn.half_thickness() * x_tip_m.abs()
            / self.burn.half_width_hz
    }

    /// Small parameter of the closed-vs-low-T comparison, `|g gradB0| e / (6D)`.
    pub fn gradient_parameter(&self) -> f64 {
        self.burn.zeeman_slope().abs() * self.burn.thickness_m / (6.0 * self.burn.half_width_hz)
    }

    fn check_carrier_clear(&self, x_tip_m: f64) -> Result<()> {
        let h = self.burn.half_thickness();
        // edges are affine on each half: the extremes sit at -h, 0, h
        for x in [-h, 0.0, h] {
            let shift = self.burn.strain_k_hz_per_m2 * x * x_tip_m;
            let e = holeburn::hole_edges(x, &self.burn)?.shifted(shift);
            if e.left_hz >= 0.0 {
                return Err(Error::EdgeTouchesCarrier {
                    x_m: x,
                    edge_hz: e.left_hz,
                });
            }
            if e.right_hz <= 0.0 {
                return Err(Error::EdgeTouchesCarrier {
                    x_m: x,
                    edge_hz: e.right_hz,
                });
            }
        }
        Ok(())
    }

    /// `V(X)` by adaptive quadrature of the per-height log ratio.
    pub fn v_numeric(&self, x_tip_m: f64) -> Result<f64> {
        self.check_carrier_clear(x_tip_m)?;
        let b = self.burn;
        let k = b.strain_k_hz_per_m2;
        let integrand = |x: f64| {
            let e = holeburn::raw_edges(x, &b);
            let shift = k * x * x_tip_m;
            let above = e.right_hz + shift;
            // ln(-(left + kxX)/above) = ln1p(diff/above), with the
            // difference formed before the ratio to keep small X accurate
            let diff = -(e.left_hz + e.right_hz) - 2.0 * shift;
            (diff / above).ln_1p()
        };
        let h = b.half_thickness();
        // |x| has a kink at 0, so the halves are integrated separately
        let lower = quadrature::integrate(integrand, -h, 0.0, QUADRATURE_RTOL, QUADRATURE_MAX_INTERVALS)?;
        let upper = quadrature::integrate(integrand, 0.0, h, QUADRATURE_RTOL, QUADRATURE_MAX_INTERVALS)?;
        Ok(self.prefactor() * (lower.value + upper.value))
    }

    /// `V(X)` with the inhomogeneous line truncated to a band of full width
    /// `inhomogeneous_width_hz` centered `band_offset_hz` away from `nu0`.
    ///
    /// The truncation adds an `X`-independent constant to [`Self::v_numeric`].
    pub fn v_numeric_truncated(
        &self,
        x_tip_m: f64,
        band_offset_hz: f64,
        inhomogeneous_width_hz: f64,
    ) -> Result<f64> {
        let half_band = 0.5 * inhomogeneous_width_hz;
        let reach = 3.0 * self.burn.half_width_hz
            + (self.burn.zeeman_slope().abs() + self.burn.smear_slope())
                * self.burn.half_thickness()
            + self.burn.strain_k_hz_per_m2 * self.burn.half_thickness() * x_tip_m.abs();
        if band_offset_hz - half_band >= -reach || band_offset_hz + half_band <= reach {
            return Err(Error::InvalidSpec {
                field: "ions.inhomogeneous_width_hz",
                reason: format!(
                    "band [{}, {}] Hz does not enclose the hole (+-{reach} Hz)",
                    band_offset_hz - half_band,
                    band_offset_hz + half_band
                ),
            });
        }
        let tails = ((half_band + band_offset_hz) / (half_band - band_offset_hz)).ln();
        Ok(self.v_numeric(x_tip_m)? + self.prefactor() * self.burn.thickness_m * tails)
    }

    /// `dV/dX` of the first-order closed form, J/m.
    pub fn closed_slope(&self, degeneracy: Degeneracy) -> Result<f64> {
        let b = self.burn;
        let a = b.zeeman_slope();
        let s = b.smear_slope();
        if a == 0.0 {
            // hole symmetric in x: no linear response
            return Ok(0.0);
        }
        let e = b.thickness_m;
        let d = b.half_width_hz;
        let y_plus = (a + s) * e / (6.0 * d);
        let y_minus = (-a + s) * e / (6.0 * d);
        for y in [y_plus, y_minus] {
            if 1.0 + y <= 0.0 {
                return Err(Error::LogDomain { argument: 1.0 + y });
            }
        }
        let degenerate = (a.abs() - s).abs() < DEGENERACY_RTOL * a.abs();
        let bracket = match (degenerate, degeneracy) {
            (true, Degeneracy::Refuse) => {
                return Err(Error::GradientSmearDegenerate {
                    zeeman_slope_hz_per_m: a,
                    smear_slope_hz_per_m: s,
                })
            }
            (true, Degeneracy::AnalyticLimit) => {
                let h = b.half_thickness();
                h * h / (3.0 * d) * (log_remainder(y_plus) - log_remainder(y_minus))
            }
            (false, _) => {
                a * e / (a * a - s * s) - 3.0 * d / (a + s).powi(2) * y_plus.ln_1p()
                    + 3.0 * d / (s - a).powi(2) * y_minus.ln_1p()
            }
        };
        Ok(2.0 * b.strain_k_hz_per_m2 * self.prefactor() * bracket)
    }

    /// Same quantity as [`Self::closed_slope`] through the cancellation-free
    /// rearrangement used for the degenerate limit, valid everywhere.
    pub fn closed_slope_stable(&self) -> Result<f64> {
        let b = self.burn;
        let a = b.zeeman_slope();
        let s = b.smear_slope();
        let d = b.half_width_hz;
        let h = b.half_thickness();
        let y_plus = (a + s) * h / (3.0 * d);
        let y_minus = (-a + s) * h / (3.0 * d);
        for y in [y_plus, y_minus] {
            if 1.0 + y <= 0.0 {
                return Err(Error::LogDomain { argument: 1.0 + y });
            }
        }
        let bracket = h * h / (3.0 * d) * (log_remainder(y_plus) - log_remainder(y_minus));
        Ok(2.0 * b.strain_k_hz_per_m2 * self.prefactor() * bracket)
    }

    pub fn v_closed(&self, x_tip_m: f64) -> Result<f64> {
        self.v_closed_with(x_tip_m, Degeneracy::Refuse)
    }

    pub fn v_closed_with(&self, x_tip_m: f64, degeneracy: Degeneracy) -> Result<f64> {
        Ok(self.closed_slope(degeneracy)? * x_tip_m)
    }

    /// `dV/dX` in the low-temperature limit, `-k n sigma0 I g gradB0 e^3 / (54 D^2)`.
    pub fn lowt_slope(&self) -> f64 {
        let b = self.burn;
        -b.strain_k_hz_per_m2 * self.prefactor() * b.zeeman_slope() * b.thickness_m.powi(3)
            / (54.0 * b.half_width_hz * b.half_width_hz)
    }

    pub fn v_lowt(&self, x_tip_m: f64) -> f64 {
        self.lowt_slope() * x_tip_m
    }

    pub fn v(&self, method: Method, x_tip_m: f64) -> Result<f64> {
        match method {
            Method::Numeric => self.v_numeric(x_tip_m),
            Method::Closed => self.v_closed(x_tip_m),
            Method::LowT => Ok(self.v_lowt(x_tip_m)),
        }
    }

    /// Tip displacement used for the numeric central difference.
    pub fn fd_step(&self) -> f64 {
        FD_EDGE_SHIFT_FRACTION * self.burn.half_width_hz
            / (self.burn.strain_k_hz_per_m2 * self.burn.half_thickness())
    }

    /// Central difference of [`Self::v_numeric`] with tip step `step_m`.
    pub fn numeric_slope_with_step(&self, step_m: f64) -> Result<f64> {
        let up = self.v_numeric(step_m)?;
        let down = self.v_numeric(-step_m)?;
        Ok((up - down) / (2.0 * step_m))
    }

    pub fn dvdx0(&self, method: Method) -> Result<f64> {
        match method {
            Method::Numeric => {
                if self.burn.strain_k_hz_per_m2 == 0.0 {
                    return Ok(0.0);
                }
                self.numeric_slope_with_step(self.fd_step())
            }
            Method::Closed => self.closed_slope(Degeneracy::Refuse),
            Method::LowT => Ok(self.lowt_slope()),
        }
    }

    /// Full chain for one method. `at_displacement_m` defaults to `X_disp`.
    pub fn evaluate(
        &self,
        method: Method,
        mech: &MechanicsDerived,
        at_displacement_m: Option<f64>,
    ) -> Result<CouplingResult> {
        let slope = self.dvdx0(method)?;
        let x_disp = static_displacement(slope, mech);
        let x_eval = at_displacement_m.unwrap_or(x_disp);
        let v = self.v(method, x_eval)?;
        Ok(CouplingResult {
            method,
            displacement_m: x_eval,
            v_j: v,
            dvdx0_j_per_m: slope,
            x_disp_m: x_disp,
            carrier_phase_rad: carrier_phase(v, &self.probe),
        })
    }
}
