//! Two-step functionalized hole burning and the resulting hole geometry.
//!
//! Step one burns `[nu0 - D, nu0 + 3D]` with the bias gradient `+gradB0`
//! applied, step two burns `[nu0 - 3D, nu0 + D]` with `-gradB0`. Once the
//! gradient is removed, an ion at height `x` with intrinsic detuning `d0` is
//! dark iff `left(x) <= d0 <= right(x)`, where
//!
//! ```text
//! left(x)  = -3D + g gradB0 x - k Xburn |x|
//! right(x) =  3D - g gradB0 x + k Xburn |x|
//! ```
//!
//! and `Xburn` is the rms Brownian excursion of the tip while burning. All
//! detunings here are in Hz relative to `nu0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{finite, non_negative, positive};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurnSpec {
    /// Origin of all detunings; may be 0.
    pub center_frequency_hz: f64,
    pub half_width_hz: f64,
    /// Signed; the sign selects which face ends up with the narrower hole.
    pub bias_gradient_t_per_m: f64,
    pub smear_amplitude_m: f64,
    pub zeeman_sensitivity_hz_per_t: f64,
    pub strain_k_hz_per_m2: f64,
    pub thickness_m: f64,
}

impl BurnSpec {
    /// `g gradB0`, Hz/m.
    pub fn zeeman_slope(&self) -> f64 {
        self.zeeman_sensitivity_hz_per_t * self.bias_gradient_t_per_m
    }

    /// `k Xburn`, Hz/m.
    pub fn smear_slope(&self) -> f64 {
        self.strain_k_hz_per_m2 * self.smear_amplitude_m
    }

    pub fn half_thickness(&self) -> f64 {
        0.5 * self.thickness_m
    }

    pub fn validate(&self) -> Result<()> {
        finite("burn.center_frequency_hz", self.center_frequency_hz)?;
        positive("burn.delta_hz", self.half_width_hz)?;
        finite("burn.bias_gradient_t_per_m", self.bias_gradient_t_per_m)?;
        non_negative("burn.smear_amplitude_m", self.smear_amplitude_m)?;
        non_negative("burn.zeeman_sensitivity_hz_per_t", self.zeeman_sensitivity_hz_per_t)?;
        non_negative("burn.strain_k_hz_per_m2", self.strain_k_hz_per_m2)?;
        positive("burn.thickness_m", self.thickness_m)?;

        let edge_zeeman = self.zeeman_slope().abs() * self.half_thickness();
        if edge_zeeman > self.half_width_hz {
            return Err(Error::InvalidSpec {
                field: "burn.delta_hz",
                reason: format!(
                    "half width {} Hz is below the Zeeman spread g*(e/2)*|gradB0| = {} Hz",
                    self.half_width_hz, edge_zeeman
                ),
            });
        }
        // The edges are affine on each half, so checking the faces suffices.
        let h = self.half_thickness();
        for x in [-h, h] {
            hole_edges(x, self)?;
        }
        Ok(())
    }
}

/// One burn pass: the gradient applied and the absolute laser scan interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurnStep {
    pub gradient_t_per_m: f64,
    pub scan_hz: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleEdges {
    pub left_hz: f64,
    pub right_hz: f64,
}

impl HoleEdges {
    pub fn contains(&self, detuning_hz: f64) -> bool {
        self.left_hz <= detuning_hz && detuning_hz <= self.right_hz
    }

    pub fn shifted(&self, by_hz: f64) -> HoleEdges {
        HoleEdges {
            left_hz: self.left_hz + by_hz,
            right_hz: self.right_hz + by_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleSample {
    pub x_m: f64,
    pub left_hz: f64,
    pub right_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleProfile {
    pub samples: Vec<HoleSample>,
}

pub fn burn_schedule(b: &BurnSpec) -> [BurnStep; 2] {
    let nu0 = b.center_frequency_hz;
    let d = b.half_width_hz;
    [
        BurnStep {
            gradient_t_per_m: b.bias_gradient_t_per_m,
            scan_hz: [nu0 - d, nu0 + 3.0 * d],
        },
        BurnStep {
            gradient_t_per_m: -b.bias_gradient_t_per_m,
            scan_hz: [nu0 - 3.0 * d, nu0 + d],
        },
    ]
}

fn check_height(x: f64, b: &BurnSpec) -> Result<()> {
    let h = b.half_thickness();
    if !x.is_finite() || x.abs() > h * (1.0 + 1e-12) {
        return Err(Error::InvalidSpec {
            field: "x",
            reason: format!("height {x} m outside [-{h}, {h}] m"),
        });
    }
    Ok(())
}

/// Hole edges at height `x` after both burn steps.
///
/// `left` is computed as the exact floating-point negation of `right`, which
/// the downstream log-ratio integrand relies on for its cancellation.
pub fn hole_edges(x: f64, b: &BurnSpec) -> Result<HoleEdges> {
    check_height(x, b)?;
    let HoleEdges {
        left_hz: left,
        right_hz: right,
    } = raw_edges(x, b);
    if left >= right {
        return Err(Error::EdgeCrossing {
            x_m: x,
            left_hz: left,
            right_hz: right,
        });
    }
    Ok(HoleEdges {
        left_hz: left,
        right_hz: right,
    })
}

/// Edge formulas without the height and crossing checks; used inside
/// quadrature loops after the caller has validated the whole thickness.
pub(crate) fn raw_edges(x: f64, b: &BurnSpec) -> HoleEdges {
    let three_d = 3.0 * b.half_width_hz;
    let right = (three_d - b.zeeman_slope() * x) + b.smear_slope() * x.abs();
    let left = (-three_d + b.zeeman_slope() * x) - b.smear_slope() * x.abs();
    HoleEdges {
        left_hz: left,
        right_hz: right,
    }
}

/// Whether an ion at height `x` with intrinsic detuning `d0` (Hz, relative to
/// `nu0`) was transferred to a dark state.
pub fn is_dark(x: f64, d0: f64, b: &BurnSpec) -> Result<bool> {
    Ok(hole_edges(x, b)?.contains(d0))
}

/// Edges across the thickness with the cantilever bent by `tip_displacement_m`.
pub fn hole_profile(b: &BurnSpec, tip_displacement_m: f64, n_samples: usize) -> Result<HoleProfile> {
    if n_samples < 2 {
        return Err(Error::InvalidSpec {
            field: "n_samples",
            reason: format!("need at least 2 samples, got {n_samples}"),
        });
    }
    let h = b.half_thickness();
    let step = b.thickness_m / (n_samples - 1) as f64;
    let samples = (0..n_samples)
        .map(|i| {
            let x = if i + 1 == n_samples { h } else { -h + i as f64 * step };
            let shift = b.strain_k_hz_per_m2 * x * tip_displacement_m;
            let e = hole_edges(x, b)?.shifted(shift);
            Ok(HoleSample {
                x_m: x,
                left_hz: e.left_hz,
                right_hz: e.right_hz,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HoleProfile { samples })
}

/// How far the bias gradient is from matching the half width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientMatching {
    /// `g |gradB0| e / 2`: Zeeman shift of the face ions while burning.
    pub face_shift_hz: f64,
    /// `face_shift / D`; 1 is the matched optimum.
    pub ratio: f64,
    /// `D <= g |gradB0| e`.
    pub within_full_thickness_bound: bool,
}

pub fn gradient_matching(b: &BurnSpec) -> GradientMatching {
    let face = b.zeeman_slope().abs() * b.half_thickness();
    GradientMatching {
        face_shift_hz: face,
        ratio: face / b.half_width_hz,
        within_full_thickness_bound: b.half_width_hz <= 2.0 * face,
    }
}
