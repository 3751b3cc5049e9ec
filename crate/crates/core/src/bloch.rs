//! Weakly driven two-level coherence under a sinusoidally modulated detuning.
//!
//! With the ground state population pinned to one, the optical coherence
//! obeys the linear equation
//!
//! ```text
//! d rho/dt = (i delta_r(t) - Gamma/2) rho + i Omega/2,
//! delta_r(t) = delta_r + eps cos(omega_M t).
//! ```
//!
//! This module works in rad/s throughout; [`hz_to_rad_per_s`] is the only
//! conversion from the Hz detunings used elsewhere in the crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::tolerances::{
    MIN_STEPS_PER_PERIOD, PERIODIC_RESIDUAL_RTOL, PSS_INVARIANCE_COEFFICIENT, REGIME_PASS,
    REGIME_WARN, TRANSIENT_LIFETIMES, TRANSIENT_MIN_PERIODS,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn hz_to_rad_per_s(hz: f64) -> f64 {
    TWO_PI * hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelDrive {
    pub rabi_rad_s: f64,
    pub detuning_rad_s: f64,
    pub decay_rad_s: f64,
    pub modulation_rad_s: f64,
    pub mech_frequency_rad_s: f64,
}

impl TwoLevelDrive {
    pub fn validate(&self) -> Result<()> {
        crate::model::positive("bloch.decay_rad_s", self.decay_rad_s)?;
        crate::model::finite("bloch.rabi_rad_s", self.rabi_rad_s)?;
        crate::model::finite("bloch.modulation_rad_s", self.modulation_rad_s)?;
        crate::model::positive("bloch.mech_frequency_rad_s", self.mech_frequency_rad_s)?;
        if !self.detuning_rad_s.is_finite() || self.detuning_rad_s == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(())
    }

    /// `delta_bar = delta_r + i Gamma/2`.
    pub fn delta_bar(&self) -> Complex64 {
        Complex64::new(self.detuning_rad_s, 0.5 * self.decay_rad_s)
    }

    pub fn mech_period(&self) -> f64 {
        TWO_PI / self.mech_frequency_rad_s
    }

    pub fn detuning_at(&self, t: f64) -> f64 {
        self.detuning_rad_s + self.modulation_rad_s * (self.mech_frequency_rad_s * t).cos()
    }

    /// `|Omega / delta_r|`, the weak-excitation parameter.
    pub fn excitation_ratio(&self) -> f64 {
        (self.rabi_rad_s / self.detuning_rad_s).abs()
    }
}

/// `(i Omega/2) / (Gamma/2 - i delta_r)`.
pub fn steady_state_coherence(d: &TwoLevelDrive) -> Complex64 {
    (0.5 * I * d.rabi_rad_s) / Complex64::new(0.5 * d.decay_rad_s, -d.detuning_rad_s)
}

/// Large-detuning value `-Omega / (2 delta_r)`.
pub fn dispersive_coherence(d: &TwoLevelDrive) -> f64 {
    -d.rabi_rad_s / (2.0 * d.detuning_rad_s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateComparison {
    pub exact: Complex64,
    pub dispersive: f64,
    /// `|exact - dispersive| / |exact|`.
    pub relative_error: f64,
}

pub fn steady_state_comparison(d: &TwoLevelDrive) -> SteadyStateComparison {
    let exact = steady_state_coherence(d);
    let approx = dispersive_coherence(d);
    SteadyStateComparison {
        exact,
        dispersive: approx,
        relative_error: (exact - approx).norm() / exact.norm(),
    }
}

/// Which constant term the periodic steady state is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A0Form {
    /// `-Omega/(2 delta_r)`: drops `Gamma` from the constant term.
    #[default]
    FirstOrder,
    /// The unmodulated steady state, keeping `Gamma`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PssCoefficients {
    pub a0: Complex64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
}

fn a0(d: &TwoLevelDrive, form: A0Form) -> Complex64 {
    match form {
        A0Form::FirstOrder => Complex64::from(dispersive_coherence(d)),
        A0Form::Exact => steady_state_coherence(d),
    }
}

pub fn pss_coefficients(d: &TwoLevelDrive) -> PssCoefficients {
    pss_coefficients_with(d, A0Form::FirstOrder)
}

/// Fourier coefficients of `a0 + a+ e^{i w t} + a- e^{-i w t}` to first order
/// in the modulation depth.
pub fn pss_coefficients_with(d: &TwoLevelDrive, form: A0Form) -> PssCoefficients {
    let a0 = a0(d, form);
    let w = d.mech_frequency_rad_s;
    let db = d.delta_bar();
    let half_eps = 0.5 * d.modulation_rad_s;
    PssCoefficients {
        a0,
        a_plus: half_eps / (w - db) * a0,
        a_minus: -half_eps / (w + db) * a0,
    }
}

impl PssCoefficients {
    pub fn at(&self, t: f64, mech_frequency_rad_s: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, mech_frequency_rad_s * t);
        self.a0 + self.a_plus * phase + self.a_minus * phase.conj()
    }
}

/// Periodic steady state in closed form,
/// `a0 [1 + eps (delta_bar cos wt + i w sin wt) / (w^2 - delta_bar^2)]`.
pub fn pss_coherence(t: f64, d: &TwoLevelDrive) -> Complex64 {
    pss_coherence_with(t, d, A0Form::FirstOrder)
}

pub fn pss_coherence_with(t: f64, d: &TwoLevelDrive, form: A0Form) -> Complex64 {
    let w = d.mech_frequency_rad_s;
    let db = d.delta_bar();
    let eps = d.modulation_rad_s;
    let denom = w * w - db * db;
    let (s, c) = (w * t).sin_cos();
    a0(d, form) * (1.0 + eps * db * c / denom + I * eps * w * s / denom)
}

/// Instantaneous steady state `-Omega / (2 delta_r(t))`.
pub fn adiabatic_coherence(t: f64, d: &TwoLevelDrive) -> Complex64 {
    Complex64::from(-d.rabi_rad_s / (2.0 * d.detuning_at(t)))
}

/// First order in `eps` of [`adiabatic_coherence`]:
/// `-Omega/(2 delta_r) [1 - eps cos(wt) / delta_r]`.
pub fn adiabatic_coherence_linear(t: f64, d: &TwoLevelDrive) -> Complex64 {
    let c = (d.mech_frequency_rad_s * t).cos();
    Complex64::from(dispersive_coherence(d) * (1.0 - d.modulation_rad_s * c / d.detuning_rad_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticDeviation {
    /// `max_t |pss - adiabatic| / |a0|`.
    pub relative: f64,
    /// Same for the first-order adiabatic form.
    pub relative_linear: f64,
    /// Mismatch of the oscillating parts, relative to the adiabatic
    /// oscillation amplitude. O(1) once the coherence stops following.
    pub modulation_mismatch: f64,
}

/// Compare the periodic steady state with adiabatic following over one period.
pub fn adiabatic_deviation(d: &TwoLevelDrive, samples: usize) -> AdiabaticDeviation {
    let period = d.mech_period();
    let a0 = dispersive_coherence(d).abs();
    let mut full: f64 = 0.0;
    let mut linear: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut swing: f64 = 0.0;
    let base = Complex64::from(dispersive_coherence(d));
    for i in 0..samples {
        let t = period * i as f64 / samples as f64;
        let pss = pss_coherence(t, d);
        full = full.max((pss - adiabatic_coherence(t, d)).norm());
        let lin = adiabatic_coherence_linear(t, d);
        linear = linear.max((pss - lin).norm());
        mismatch = mismatch.max(((pss - base) - (lin - base)).norm());
        swing = swing.max((lin - base).norm());
    }
    AdiabaticDeviation {
        relative: full / a0,
        relative_linear: linear / a0,
        modulation_mismatch: if swing > 0.0 { mismatch / swing } else { 0.0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `rho = 0`; transients must decay before the periodicity test.
    #[default]
    Ground,
    /// Start on the analytic periodic steady state (exact `a0`) and check
    /// that the trajectory stays on it.
    PeriodicSteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    pub t_end_s: f64,
    /// Steps per period of the fastest timescale among `omega_M`,
    /// `|delta_r| + |eps|` and `Gamma/2`.
    pub steps_per_period: usize,
    pub initial: InitialState,
    /// Keep every `stride`-th step in the returned trajectory.
    pub stride: usize,
    /// Only keep samples at or after this time.
    pub record_after_s: f64,
    /// Overrides the default acceptance threshold of the final check.
    pub tolerance: Option<f64>,
}

impl IntegrationOptions {
    pub fn new(t_end_s: f64, steps_per_period: usize) -> Self {
        IntegrationOptions {
            t_end_s,
            steps_per_period,
            initial: InitialState::Ground,
            stride: 1,
            record_after_s: 0.0,
            tolerance: None,
        }
    }

    /// Keep only the last `periods` mechanical periods of `d`.
    pub fn recording_last_periods(mut self, d: &TwoLevelDrive, periods: f64) -> Self {
        self.record_after_s = (self.t_end_s - periods * d.mech_period()).max(0.0);
        self
    }

    pub fn starting_on_pss(mut self) -> Self {
        self.initial = InitialState::PeriodicSteadyState;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub coherence: Vec<Complex64>,
    pub step_s: f64,
    /// Ground start: `max |rho(t) - rho(t - T_M)| / |a0|` over the final
    /// mechanical period. Steady-state start: `max |rho - rho_pss| / |a0|`.
    pub residual: f64,
    pub tolerance: f64,
}

/// Default run length when starting from the ground state: long enough for
/// `exp(-Gamma t / 2)` to fall well below the periodicity threshold.
pub fn transient_time(d: &TwoLevelDrive) -> f64 {
    (TRANSIENT_LIFETIMES / d.decay_rad_s).max(TRANSIENT_MIN_PERIODS * d.mech_period())
}

fn rhs(d: &TwoLevelDrive, t: f64, rho: Complex64) -> Complex64 {
    Complex64::new(-0.5 * d.decay_rad_s, d.detuning_at(t)) * rho + 0.5 * I * d.rabi_rad_s
}

fn rk4_step(d: &TwoLevelDrive, t: f64, rho: Complex64, dt: f64) -> Complex64 {
    let k1 = rhs(d, t, rho);
    let k2 = rhs(d, t + 0.5 * dt, rho + 0.5 * dt * k1);
    let k3 = rhs(d, t + 0.5 * dt, rho + 0.5 * dt * k2);
    let k4 = rhs(d, t + dt, rho + dt * k3);
    rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Step size: the fastest timescale resolved by `steps_per_period`, then
/// shrunk so that one mechanical period is a whole number of steps.
pub fn step_size(d: &TwoLevelDrive, steps_per_period: usize) -> (f64, usize) {
    let fastest = d
        .mech_frequency_rad_s
        .max(d.detuning_rad_s.abs() + d.modulation_rad_s.abs())
        .max(0.5 * d.decay_rad_s);
    let target = TWO_PI / (fastest * steps_per_period as f64);
    let per_period = (d.mech_period() / target).ceil().max(1.0) as usize;
    (d.mech_period() / per_period as f64, per_period)
}

/// Fixed-step classical Runge-Kutta integration of the coherence equation.
pub fn integrate_bloch(d: &TwoLevelDrive, opts: &IntegrationOptions) -> Result<Trajectory> {
    d.validate()?;
    if opts.steps_per_period < MIN_STEPS_PER_PERIOD {
        return Err(Error::Validation(format!(
            "steps_per_period {} below the minimum {MIN_STEPS_PER_PERIOD}",
            opts.steps_per_period
        )));
    }
    if !(opts.t_end_s >= 2.0 * d.mech_period()) {
        return Err(Error::Validation(format!(
            "t_end {} s shorter than two mechanical periods ({} s)",
            opts.t_end_s,
            2.0 * d.mech_period()
        )));
    }
    let (dt, per_period) = step_size(d, opts.steps_per_period);
    let steps = (opts.t_end_s / dt).round() as usize;
    let stride = opts.stride.max(1);

    let scale = steady_state_coherence(d).norm();
    let normalise = |x: f64| if scale > 0.0 { x / scale } else { x };
    let eps_ratio = d.modulation_rad_s / d.delta_bar().norm();
    let tolerance = opts.tolerance.unwrap_or(match opts.initial {
        InitialState::Ground => PERIODIC_RESIDUAL_RTOL,
        InitialState::PeriodicSteadyState => {
            PSS_INVARIANCE_COEFFICIENT * eps_ratio * eps_ratio + PERIODIC_RESIDUAL_RTOL
        }
    });

    let mut rho = match opts.initial {
        InitialState::Ground => Complex64::new(0.0, 0.0),
        InitialState::PeriodicSteadyState => pss_coherence_with(0.0, d, A0Form::Exact),
    };
    let first_kept = ((opts.record_after_s / dt).ceil().max(0.0) as usize).min(steps);
    let kept = (steps - first_kept) / stride + 2;
    let mut times = Vec::with_capacity(kept);
    let mut coherence = Vec::with_capacity(kept);
    if first_kept == 0 {
        times.push(0.0);
        coherence.push(rho);
    }

    // last mechanical period, for the periodicity residual
    let mut ring = vec![rho; per_period];
    let mut residual: f64 = 0.0;

    for i in 1..=steps {
        let t_prev = (i - 1) as f64 * dt;
        rho = rk4_step(d, t_prev, rho, dt);
        let t = i as f64 * dt;
        match opts.initial {
            InitialState::Ground => {
                if i + per_period > steps && i >= per_period {
                    residual = residual.max((rho - ring[i % per_period]).norm());
                }
            }
            InitialState::PeriodicSteadyState => {
                residual = residual.max((rho - pss_coherence_with(t, d, A0Form::Exact)).norm());
            }
        }
        ring[i % per_period] = rho;
        if i >= first_kept && ((i - first_kept) % stride == 0 || i == steps) {
            times.push(t);
            coherence.push(rho);
        }
    }
    let residual = normalise(residual);
    if !(residual <= tolerance) {
        return Err(Error::NonConvergent {
            residual,
            tolerance,
        });
    }
    Ok(Trajectory {
        times,
        coherence,
        step_s: dt,
        residual,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl Verdict {
    pub fn for_ratio(r: f64) -> Verdict {
        if r < REGIME_PASS {
            Verdict::Pass
        } else if r < REGIME_WARN {
            Verdict::Warn
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRatio {
    pub value: f64,
    pub verdict: Verdict,
}

impl RegimeRatio {
    fn new(value: f64) -> Self {
        RegimeRatio {
            value,
            verdict: Verdict::for_ratio(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeDiagnostics {
    /// `omega_M^2 / |delta_bar|^2`: adiabatic following.
    pub adiabatic: RegimeRatio,
    /// `Gamma / |delta_r|`: dispersive (far-detuned) regime.
    pub linewidth: RegimeRatio,
    /// `|Omega / delta_r|`: weak excitation.
    pub excitation: RegimeRatio,
}

impl RegimeDiagnostics {
    /// One message per ratio that does not pass.
    pub fn warnings(&self) -> Vec<String> {
        [
            ("omega_M^2/|delta_bar|^2 (adiabatic following)", self.adiabatic),
            ("Gamma/|delta_r| (dispersive regime)", self.linewidth),
            ("|Omega/delta_r| (weak excitation)", self.excitation),
        ]
        .into_iter()
        .filter(|(_, r)| r.verdict != Verdict::Pass)
        .map(|(name, r)| format!("regime {}: {name} = {:.3e}", verdict_word(r.verdict), r.value))
        .collect()
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Warn => "warn",
        Verdict::Fail => "fail",
    }
}

pub fn regime_check(d: &TwoLevelDrive) -> RegimeDiagnostics {
    RegimeDiagnostics {
        adiabatic: RegimeRatio::new(d.mech_frequency_rad_s.powi(2) / d.delta_bar().norm_sqr()),
        linewidth: RegimeRatio::new(d.decay_rad_s / d.detuning_rad_s.abs()),
        excitation: RegimeRatio::new(d.excitation_ratio()),
    }
}
