//! JSON report of the full chain for one scenario.

use serde_json::{json, Map, Value};

use super::config::{Fallback, Scenario, ScenarioConfig, Source, KEYS};
use crate::bloch;
use crate::coupling::{self, CouplingResult, Method};
use crate::error::{Error, Result};
use crate::holeburn;
use crate::model::{derive_mechanics, Environment};
use crate::observables::{self, quoted, Comparison, SidebandConvention};

/// `{value, unit, source}`.
pub fn quantity(value: f64, unit: &str, source: &str) -> Value {
    json!({ "value": value, "unit": unit, "source": source })
}

fn derived(value: f64, unit: &str) -> Value {
    quantity(value, unit, "derived")
}

/// Ordered, duplicate-free warning list.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Warnings(Vec<String>);

impl Warnings {
    pub fn push(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.0.contains(&w) {
            self.0.push(w);
        }
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }
}

/// Echo of every input, explicit or defaulted, with derived defaults
/// resolved to the value actually used.
pub fn inputs_json(cfg: &ScenarioConfig, s: &Scenario) -> Value {
    let mut m = Map::new();
    for def in KEYS {
        let resolved = cfg.get(def.key).or_else(|| resolved_default(def.key, s));
        let Some(v) = resolved else { continue };
        let source = match (cfg.source(def.key), def.fallback) {
            (Source::Config, _) => "config",
            (Source::Default, Fallback::Derived(_)) => "default (derived)",
            (Source::Default, _) => "default",
        };
        m.insert(def.key.to_string(), quantity(v, def.unit, source));
    }
    Value::Object(m)
}

fn resolved_default(key: &str, s: &Scenario) -> Option<f64> {
    let hz = |rad: f64| rad / crate::constants::TWO_PI;
    Some(match key {
        "probe.wavelength_m" => s.probe.wavelength_m,
        "coupling.integration_time_s" => observables::overburn_time(s.ions.linewidth_rad_s).ok()?,
        "bloch.detuning_hz" => hz(s.drive.detuning_rad_s),
        "bloch.modulation_hz" => hz(s.drive.modulation_rad_s),
        "bloch.mech_frequency_hz" => hz(s.drive.mech_frequency_rad_s),
        "bloch.linewidth_hz" => hz(s.drive.decay_rad_s),
        "bloch.duration_s" => s.bloch.duration_s,
        _ => return None,
    })
}

pub fn coupling_json(r: &CouplingResult) -> Value {
    json!({
        "displacement_m": derived(r.displacement_m, "m"),
        "v_j": derived(r.v_j, "J"),
        "dvdx0_j_per_m": derived(r.dvdx0_j_per_m, "J/m"),
        "x_disp_m": derived(r.x_disp_m, "m"),
        "carrier_phase_rad": derived(r.carrier_phase_rad, "rad"),
    })
}

/// Evaluate each method, keeping per-method failures as values.
pub fn evaluate_methods(s: &Scenario, methods: &[Method]) -> Vec<(Method, Result<CouplingResult>)> {
    methods
        .iter()
        .map(|&m| (m, s.medium.evaluate(m, &s.mechanics, s.displacement_m)))
        .collect()
}

/// The result the detection budget is built on: the first of closed,
/// numeric, low-T that was requested and succeeded.
pub fn headline(results: &[(Method, Result<CouplingResult>)]) -> Option<CouplingResult> {
    [Method::Closed, Method::Numeric, Method::LowT]
        .into_iter()
        .find_map(|m| results.iter().find(|(r, _)| *r == m).and_then(|(_, r)| r.as_ref().ok().copied()))
}

/// Full report for a scenario.
pub fn build_report(cfg: &ScenarioConfig, methods: &[Method]) -> Result<Value> {
    let s = cfg.scenario()?;
    let mut warnings = Warnings::default();
    let probe = &s.probe;
    let mech = &s.mechanics;

    if probe.power_w > s.environment.optical_power_limit_w {
        warnings.push(format!(
            "probe power {} W exceeds the optical power limit {} W",
            probe.power_w, s.environment.optical_power_limit_w
        ));
    }
    let matching = holeburn::gradient_matching(&s.burn);
    if !matching.within_full_thickness_bound {
        warnings.push(format!(
            "bias gradient below the matched optimum: g|gradB0|e = {} Hz < half width {} Hz",
            2.0 * matching.face_shift_hz,
            s.burn.half_width_hz
        ));
    }
    let ratio = coupling::dispersive_ratio(3.0 * s.burn.half_width_hz, s.ions.linewidth_rad_s);
    if ratio < crate::tolerances::DISPERSIVE_RATIO_MIN {
        warnings.push(format!("hole edge only {ratio:.1} linewidths from the carrier"));
    }

    let results = evaluate_methods(&s, methods);
    let mut coupling_map = Map::new();
    for (m, r) in &results {
        let v = match r {
            Ok(r) => coupling_json(r),
            Err(e) => {
                warnings.push(format!("{} method failed: {e}", m.as_str()));
                json!({ "error": e.to_string() })
            }
        };
        coupling_map.insert(m.as_str().to_string(), v);
    }
    let head = match headline(&results) {
        Some(h) => h,
        None => {
            return Err(results
                .into_iter()
                .find_map(|(_, r)| r.err())
                .unwrap_or_else(|| Error::Validation("no coupling method selected".into())))
        }
    };

    let budget = observables::detection_budget(probe, s.ions.linewidth_rad_s, s.integration_time_s)?;
    let sidebands = observables::sideband_phases(
        head.dvdx0_j_per_m,
        probe,
        mech,
        s.environment.temperature_k,
        SidebandConvention::Quantum,
    );
    let cold = derive_mechanics(
        &s.cantilever,
        &Environment {
            temperature_k: 30e-3,
            ..s.environment
        },
    );
    let cold_sidebands =
        observables::sideband_phases(head.dvdx0_j_per_m, probe, &cold, 30e-3, SidebandConvention::Quantum);
    let radiation = observables::radiation_pressure_displacement(probe, mech);
    let stability = observables::stability_requirements(&head, &s.burn, mech);
    let shot = observables::shot_noise_comparison(probe, s.ions.linewidth_rad_s)?;
    let regime = bloch::regime_check(&s.drive);
    for w in regime.warnings() {
        warnings.push(w);
    }

    let mut comparison = vec![
        Comparison::new("x_disp_m", "m", head.x_disp_m.abs(), quoted::X_DISP_M)?,
        Comparison::new("carrier_phase_rad", "rad", head.carrier_phase_rad.abs(), quoted::CARRIER_PHASE_RAD)?,
        Comparison::new("overburn_time_s", "s", budget.overburn_time_s, quoted::OVERBURN_TIME_S)?,
        Comparison::new("thermal_phase_rad", "rad", sidebands.thermal_phase_rad, quoted::THERMAL_PHASE_RAD)?,
        Comparison::new("zeropoint_phase_rad", "rad", sidebands.zeropoint_phase_rad, quoted::ZEROPOINT_PHASE_RAD)?,
        Comparison::new("radiation_pressure_displacement_m", "m", radiation, quoted::RADIATION_PRESSURE_M)?,
        Comparison::new("edge_zpf_shift_hz", "Hz", stability.edge_zpf_shift_hz, quoted::EDGE_ZPF_SHIFT_HZ)?,
        Comparison::new("x_zpf_m", "m", mech.x_zpf_m, quoted::X_ZPF_M)?,
        Comparison::new("shot_noise_phase_overburn_rad", "rad", shot.long_computed_rad, shot.long_quoted_rad)?,
        Comparison::new("shot_noise_phase_25us_rad", "rad", shot.short_computed_rad, shot.short_quoted_rad)?,
    ];
    if let Some(p) = stability.power_stability {
        comparison.push(Comparison::new("power_stability", "1", p, quoted::POWER_STABILITY)?);
    }
    if let Some(e) = cold_sidebands.relative_excess {
        comparison.push(Comparison::new("relative_excess_30mk", "1", e, quoted::RELATIVE_EXCESS_30MK)?);
    }

    let opt = |v: Option<f64>, unit: &str| v.map_or(Value::Null, |v| derived(v, unit));

    Ok(json!({
        "header": { "generator": "optomech", "version": env!("CARGO_PKG_VERSION") },
        "inputs": inputs_json(cfg, &s),
        "derived": {
            "angular_frequency_rad_s": derived(mech.angular_frequency_rad_s, "rad/s"),
            "spring_constant_n_per_m": derived(mech.spring_constant_n_per_m, "N/m"),
            "x_zpf_m": derived(mech.x_zpf_m, "m"),
            "x_thermal_m": derived(mech.x_thermal_m, "m"),
            "x_rms_m": derived(mech.x_rms_m, "m"),
            "mean_occupancy": derived(mech.mean_occupancy, "1"),
            "strain_coupling_hz_per_m2": derived(s.burn.strain_k_hz_per_m2, "Hz/m^2"),
            "ion_spectral_density_per_hz_m": derived(s.medium.spectral_density, "1/(Hz m)"),
            "cross_section_sigma0_m2": derived(coupling::sigma0(s.ions.wavelength_m, s.ions.linewidth_rad_s), "m^2"),
            "intensity_w_per_m2": derived(probe.intensity(), "W/m^2"),
            "optical_angular_frequency_rad_s": derived(probe.angular_frequency(), "rad/s"),
            "gradient_parameter": derived(s.medium.gradient_parameter(), "1"),
            "face_zeeman_shift_hz": derived(matching.face_shift_hz, "Hz"),
            "gradient_matching_ratio": derived(matching.ratio, "1"),
        },
        "coupling": {
            "headline_method": head.method.as_str(),
            "methods": Value::Object(coupling_map),
        },
        "detection": {
            "photon_rate_per_s": derived(budget.photon_rate_per_s, "1/s"),
            "overburn_time_s": derived(budget.overburn_time_s, "s"),
            "integration_time_s": derived(budget.integration_time_s, "s"),
            "shot_noise_phase_rad": derived(budget.shot_noise_phase_rad, "rad"),
            "shot_noise_quoted_ratio_overburn": derived(shot.long_ratio, "1"),
            "shot_noise_quoted_ratio_25us": derived(shot.short_ratio, "1"),
            "shot_noise_ratio_spread": derived(shot.ratio_spread, "1"),
        },
        "sidebands": {
            "temperature_k": derived(sidebands.temperature_k, "K"),
            "convention": "quantum",
            "thermal_phase_rad": derived(sidebands.thermal_phase_rad, "rad"),
            "zeropoint_phase_rad": derived(sidebands.zeropoint_phase_rad, "rad"),
            "total_phase_rad": derived(sidebands.total_phase_rad, "rad"),
            "classical_phase_rad": derived(sidebands.classical_phase_rad, "rad"),
            "relative_excess": opt(sidebands.relative_excess, "1"),
            "relative_excess_30mk": opt(cold_sidebands.relative_excess, "1"),
        },
        "radiation_pressure_displacement_m": derived(radiation, "m"),
        "stability": {
            "power_stability": opt(stability.power_stability, "1"),
            "edge_zpf_shift_hz": derived(stability.edge_zpf_shift_hz, "Hz"),
            "laser_linewidth_bound_hz": derived(stability.laser_linewidth_bound_hz, "Hz"),
        },
        "regime": serde_json::to_value(regime)?,
        "comparison": serde_json::to_value(&comparison)?,
        "warnings": warnings.into_vec(),
    }))
}

/// The report as pretty-printed JSON with sorted keys and a final newline.
pub fn render_json(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Flatten a report into `path,value,unit` CSV rows.
pub fn render_csv(v: &Value) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "value", "unit", "source"])?;
    flatten(v, String::new(), &mut w)?;
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))
}

fn flatten(v: &Value, path: String, w: &mut csv::Writer<Vec<u8>>) -> Result<()> {
    match v {
        Value::Object(m) if m.contains_key("value") && m.contains_key("unit") => {
            let cell = |k: &str| match &m[k] {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let source = m.get("source").map_or(String::new(), |_| cell("source"));
            w.write_record([path, cell("value"), cell("unit"), source])?;
        }
        Value::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(x, p, w)?;
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, format!("{path}[{i}]"), w)?;
            }
        }
        Value::String(s) => w.write_record([path, s.clone(), String::new(), String::new()])?,
        other => w.write_record([path, other.to_string(), String::new(), String::new()])?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::paper_example;

    fn report() -> Value {
        build_report(&paper_example(), &Method::ALL).unwrap()
    }

    #[test]
    fn every_number_carries_a_unit() {
        fn walk(v: &Value, path: &str) {
            match v {
                Value::Object(m) if m.contains_key("value") => {
                    assert!(m["unit"].is_string(), "{path}");
                    assert!(m["source"].is_string(), "{path}");
                }
                Value::Object(m) => {
                    for (k, x) in m {
                        if k == "comparison" || k == "regime" || k == "header" {
                            continue;
                        }
                        walk(x, &format!("{path}.{k}"));
                    }
                }
                Value::Number(_) => panic!("bare number at {path}"),
                _ => {}
            }
        }
        walk(&report(), "");
    }

    #[test]
    fn defaulted_inputs_are_flagged() {
        let r = report();
        assert_eq!(r["inputs"]["ions.inhomogeneous_width_hz"]["source"], "default");
        assert_eq!(r["inputs"]["probe.cross_section_m2"]["source"], "default");
        assert_eq!(r["inputs"]["probe.wavelength_m"]["source"], "default (derived)");
        assert_eq!(r["inputs"]["probe.power_w"]["source"], "config");
        assert!(r["inputs"].get("coupling.displacement_m").is_none());
    }

    #[test]
    fn report_is_byte_stable() {
        let a = render_json(&report()).unwrap();
        let b = render_json(&report()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn headline_values_of_example() {
        let r = report();
        assert_eq!(r["coupling"]["headline_method"], "closed");
        let tau = r["detection"]["overburn_time_s"]["value"].as_f64().unwrap();
        assert!((tau - 16.39e-3).abs() < 1e-5);
        let x = r["coupling"]["methods"]["closed"]["x_disp_m"]["value"].as_f64().unwrap();
        assert!((0.2e-12..0.8e-12).contains(&x));
        let rp = r["radiation_pressure_displacement_m"]["value"].as_f64().unwrap();
        assert!((rp - 19.4e-15).abs() < 0.1e-15);
        // the example gradient is five times short of the matched optimum
        let w = r["warnings"].as_array().unwrap();
        assert_eq!(w.len(), 1, "{w:?}");
        assert!(w[0].as_str().unwrap().contains("matched optimum"));
    }

    #[test]
    fn warnings_are_unique() {
        let mut cfg = paper_example();
        cfg.set("probe.power_w", 5e-3).unwrap();
        cfg.set("bloch.mech_frequency_hz", 3e6).unwrap();
        let r = build_report(&cfg, &Method::ALL).unwrap();
        let w: Vec<&str> = r["warnings"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
        assert_eq!(w.iter().filter(|s| s.contains("power limit")).count(), 1);
        assert_eq!(w.iter().filter(|s| s.contains("adiabatic")).count(), 1);
        let mut sorted = w.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), w.len());
    }

    #[test]
    fn csv_flattening_has_one_row_per_quantity() {
        let text = render_csv(&report()).unwrap();
        assert!(text.starts_with("path,value,unit,source\n"));
        assert!(text.lines().any(|l| l.starts_with("detection.overburn_time_s,")));
    }
}
