//! Numerical tolerances and regime thresholds shared across modules.
//!
//! Every threshold used by the library or by its validation suites is defined
//! here. Nothing else in the crate should carry a bare tolerance literal.

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Relative tolerance of the adaptive quadrature behind `V_numeric`.
pub const QUADRATURE_RTOL: f64 = 1e-10;

/// Hard cap on the number of subintervals the adaptive quadrature may create.
pub const QUADRATURE_MAX_INTERVALS: usize = 4096;

// ---------------------------------------------------------------------------
// Coupling
// ---------------------------------------------------------------------------

/// `| |g gradB| - k Xburn |` below this fraction of `|g gradB|` is treated as
/// the degenerate point of the closed form.
pub const DEGENERACY_RTOL: f64 = 1e-6;

/// Finite-difference displacement for `dV/dX` with the numeric method,
/// expressed as the edge shift `k (e/2) X_h` relative to the half width.
pub const FD_EDGE_SHIFT_FRACTION: f64 = 1e-4;

/// Agreement expected between the three `dV/dX` methods on the worked example.
pub const METHOD_AGREEMENT_RTOL: f64 = 1e-3;

/// Coefficient `C` in the Taylor-error bounds `C * (small parameter)^2` that
/// relate the numeric, closed and low-temperature evaluations.
pub const TAYLOR_BOUND_COEFFICIENT: f64 = 10.0;

/// Below this `|2 pi delta| / Gamma` ratio the per-ion dispersive formulas are
/// outside their regime and a warning is logged.
pub const DISPERSIVE_RATIO_MIN: f64 = 100.0;

// ---------------------------------------------------------------------------
// Bloch dynamics
// ---------------------------------------------------------------------------

/// Periodicity residual, relative to `|a0|`, accepted as "transients damped".
pub const PERIODIC_RESIDUAL_RTOL: f64 = 1e-8;

/// Minimum number of integrator steps per period of the fastest timescale.
pub const MIN_STEPS_PER_PERIOD: usize = 100;

/// Transient window in units of the coherence lifetime `1/Gamma`.
pub const TRANSIENT_LIFETIMES: f64 = 40.0;

/// Transient window lower bound in mechanical periods.
pub const TRANSIENT_MIN_PERIODS: f64 = 50.0;

/// Coefficient of `(eps/|delta_bar|)^2` used as the invariance tolerance when
/// the integrator starts on the analytic periodic steady state.
pub const PSS_INVARIANCE_COEFFICIENT: f64 = 10.0;

/// Regime ratios below this pass.
pub const REGIME_PASS: f64 = 0.1;
/// Regime ratios below this warn; at or above it they fail.
pub const REGIME_WARN: f64 = 0.5;
