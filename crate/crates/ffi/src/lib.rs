//! C ABI over `optomech`.
//!
//! Scenarios live behind an opaque `OmScenario` handle. Every call returns an
//! `OmStatus`; on failure `om_last_error` holds the message for the calling
//! thread until the next failing call. Strings handed out by the library are
//! freed with `om_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use optomech::bloch;
use optomech::cli::config::{self, Scenario, ScenarioConfig};
use optomech::cli::report;
use optomech::coupling::Method;
use optomech::error::ErrorKind;
use optomech::holeburn;
use optomech::observables::{self, SidebandConvention};
use optomech::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Physics = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// Values accepted by the `method` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmMethod {
    Numeric = 0,
    Closed = 1,
    LowT = 2,
}

/// Opaque scenario handle.
pub struct OmScenario {
    config: ScenarioConfig,
    scenario: Scenario,
}

impl OmScenario {
    fn new(config: ScenarioConfig) -> Result<OmScenario, Error> {
        let scenario = config.scenario()?;
        Ok(OmScenario { config, scenario })
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OmCouplingResult {
    pub displacement_m: f64,
    pub v_j: f64,
    pub dvdx0_j_per_m: f64,
    pub x_disp_m: f64,
    pub carrier_phase_rad: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OmHoleEdges {
    pub left_hz: f64,
    pub right_hz: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OmDetectionBudget {
    pub photon_rate_per_s: f64,
    pub overburn_time_s: f64,
    pub integration_time_s: f64,
    pub shot_noise_phase_rad: f64,
}

/// `relative_excess` is NaN at zero occupancy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OmSidebands {
    pub thermal_phase_rad: f64,
    pub zeropoint_phase_rad: f64,
    pub total_phase_rad: f64,
    pub classical_phase_rad: f64,
    pub relative_excess: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(OmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match e.kind() {
            ErrorKind::Config => OmStatus::Config,
            ErrorKind::Physics => OmStatus::Physics,
            ErrorKind::Numerical => OmStatus::Numerical,
            ErrorKind::Io => OmStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            OmStatus::Panic
        }
    }
}

unsafe fn scenario<'a>(s: *const OmScenario) -> Result<&'a OmScenario, Failure> {
    s.as_ref().ok_or_else(|| null("scenario"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null("output pointer"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(OmStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

fn method(m: i32) -> Result<Method, Failure> {
    match m {
        0 => Ok(Method::Numeric),
        1 => Ok(Method::Closed),
        2 => Ok(Method::LowT),
        _ => Err(Failure(OmStatus::InvalidArgument, format!("unknown method {m}"))),
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn om_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a `key = value` scenario text.
///
/// # Safety
/// `cfg` must be a NUL-terminated string and `out_scenario` writable.
#[no_mangle]
pub unsafe extern "C" fn om_scenario_from_cfg(cfg: *const c_char, out_scenario: *mut *mut OmScenario) -> OmStatus {
    guard(|| {
        let slot = out(out_scenario)?;
        let handle = OmScenario::new(config::parse_config(text(cfg, "cfg")?)?)?;
        *slot = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// The bundled worked example.
///
/// # Safety
/// `out_scenario` must be writable.
#[no_mangle]
pub unsafe extern "C" fn om_scenario_paper_example(out_scenario: *mut *mut OmScenario) -> OmStatus {
    guard(|| {
        let slot = out(out_scenario)?;
        *slot = Box::into_raw(Box::new(OmScenario::new(config::paper_example())?));
        Ok(())
    })
}

/// Override one key. The handle is unchanged when the result is invalid.
///
/// # Safety
/// `s` must come from this library and `key` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn om_scenario_set(s: *mut OmScenario, key: *const c_char, value: f64) -> OmStatus {
    guard(|| {
        let handle = s.as_mut().ok_or_else(|| null("scenario"))?;
        let mut cfg = handle.config.clone();
        cfg.set(text(key, "key")?, value)?;
        *handle = OmScenario::new(cfg)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn om_scenario_free(s: *mut OmScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `V`, `dV/dX` at 0, static displacement and carrier phase. A non-finite
/// `displacement_m` evaluates `V` at the static displacement.
///
/// # Safety
/// `s` must come from this library and `result` be writable.
#[no_mangle]
pub unsafe extern "C" fn om_coupling(
    s: *const OmScenario,
    method_id: i32,
    displacement_m: f64,
    result: *mut OmCouplingResult,
) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let slot = out(result)?;
        let x = displacement_m.is_finite().then_some(displacement_m);
        let r = h.scenario.medium.evaluate(method(method_id)?, &h.scenario.mechanics, x)?;
        *slot = OmCouplingResult {
            displacement_m: r.displacement_m,
            v_j: r.v_j,
            dvdx0_j_per_m: r.dvdx0_j_per_m,
            x_disp_m: r.x_disp_m,
            carrier_phase_rad: r.carrier_phase_rad,
        };
        Ok(())
    })
}

/// Interaction energy `V(X)` in joules.
///
/// # Safety
/// `s` must come from this library and `v_j` be writable.
#[no_mangle]
pub unsafe extern "C" fn om_interaction_energy(
    s: *const OmScenario,
    method_id: i32,
    tip_displacement_m: f64,
    v_j: *mut f64,
) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let slot = out(v_j)?;
        *slot = h.scenario.medium.v(method(method_id)?, tip_displacement_m)?;
        Ok(())
    })
}

/// Hole edges at height `x_m` with the tip displaced by `tip_displacement_m`.
///
/// # Safety
/// `s` must come from this library and `edges` be writable.
#[no_mangle]
pub unsafe extern "C" fn om_hole_edges(
    s: *const OmScenario,
    x_m: f64,
    tip_displacement_m: f64,
    edges: *mut OmHoleEdges,
) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let slot = out(edges)?;
        let b = &h.scenario.burn;
        let e = holeburn::hole_edges(x_m, b)?.shifted(b.strain_k_hz_per_m2 * x_m * tip_displacement_m);
        *slot = OmHoleEdges {
            left_hz: e.left_hz,
            right_hz: e.right_hz,
        };
        Ok(())
    })
}

/// Photon rate, overburn time and shot-noise phase. A non-finite
/// `integration_time_s` integrates for the overburn time.
///
/// # Safety
/// `s` must come from this library and `budget` be writable.
#[no_mangle]
pub unsafe extern "C" fn om_detection_budget(
    s: *const OmScenario,
    integration_time_s: f64,
    budget: *mut OmDetectionBudget,
) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let slot = out(budget)?;
        let t = integration_time_s.is_finite().then_some(integration_time_s);
        let b = observables::detection_budget(&h.scenario.probe, h.scenario.ions.linewidth_rad_s, t)?;
        *slot = OmDetectionBudget {
            photon_rate_per_s: b.photon_rate_per_s,
            overburn_time_s: b.overburn_time_s,
            integration_time_s: b.integration_time_s,
            shot_noise_phase_rad: b.shot_noise_phase_rad,
        };
        Ok(())
    })
}

/// Sideband phases at the scenario temperature, using `dV/dX` from `method_id`.
///
/// # Safety
/// `s` must come from this library and `sidebands` be writable.
#[no_mangle]
pub unsafe extern "C" fn om_sideband_phases(
    s: *const OmScenario,
    method_id: i32,
    sidebands: *mut OmSidebands,
) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let slot = out(sidebands)?;
        let sc = &h.scenario;
        let slope = sc.medium.dvdx0(method(method_id)?)?;
        let r = observables::sideband_phases(
            slope,
            &sc.probe,
            &sc.mechanics,
            sc.environment.temperature_k,
            SidebandConvention::Quantum,
        );
        *slot = OmSidebands {
            thermal_phase_rad: r.thermal_phase_rad,
            zeropoint_phase_rad: r.zeropoint_phase_rad,
            total_phase_rad: r.total_phase_rad,
            classical_phase_rad: r.classical_phase_rad,
            relative_excess: r.relative_excess.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Periodic steady-state coherence at time `t_s` for the scenario drive.
///
/// # Safety
/// `s` must come from this library; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn om_pss_coherence(s: *const OmScenario, t_s: f64, re: *mut f64, im: *mut f64) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let (re, im) = (out(re)?, out(im)?);
        h.scenario.drive.validate()?;
        let rho = bloch::pss_coherence(t_s, &h.scenario.drive);
        *re = rho.re;
        *im = rho.im;
        Ok(())
    })
}

/// Full JSON report for all methods; free with `om_string_free`.
///
/// # Safety
/// `s` must come from this library and `json` be writable.
#[no_mangle]
pub unsafe extern "C" fn om_report_json(s: *const OmScenario, json: *mut *mut c_char) -> OmStatus {
    guard(|| {
        let h = scenario(s)?;
        let slot = out(json)?;
        let body = report::render_json(&report::build_report(&h.config, &Method::ALL)?)?;
        let c = CString::new(body).map_err(|e| Failure(OmStatus::InvalidArgument, e.to_string()))?;
        *slot = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn om_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}
