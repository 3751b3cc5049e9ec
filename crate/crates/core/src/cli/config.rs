//! Flat `key = value` scenario files.
//!
//! One SI value per line, keys carry their unit as a suffix, `#` starts a
//! comment. Unknown and repeated keys are errors. Keys without a default
//! must be present; everything else falls back to the table in [`KEYS`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bloch::{self, TwoLevelDrive};
use crate::constants::TWO_PI;
use crate::coupling::{DispersiveMedium, ProbeSpec};
use crate::error::{Error, Result};
use crate::holeburn::BurnSpec;
use crate::model::{
    derive_mechanics, ion_spectral_density, strain_coupling_k, CantileverSpec, Environment,
    IonEnsembleSpec, MechanicsDerived,
};

/// Fallback for a key absent from the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fallback {
    Required,
    Value(f64),
    /// Computed from other keys when the scenario is built.
    Derived(&'static str),
    /// Absent means "not used".
    Unset,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyDef {
    pub key: &'static str,
    pub unit: &'static str,
    pub fallback: Fallback,
}

const fn key(key: &'static str, unit: &'static str, fallback: Fallback) -> KeyDef {
    KeyDef { key, unit, fallback }
}

use Fallback::{Derived, Required, Unset, Value};

/// Every recognized key, in the order used when writing files back out.
pub const KEYS: &[KeyDef] = &[
    key("cantilever.length_m", "m", Required),
    key("cantilever.thickness_m", "m", Required),
    key("cantilever.width_m", "m", Required),
    key("cantilever.youngs_modulus_pa", "Pa", Required),
    key("cantilever.effective_mass_kg", "kg", Required),
    key("cantilever.mode_frequency_hz", "Hz", Required),
    key("ions.wavelength_m", "m", Required),
    key("ions.linewidth_hz", "Hz", Required),
    key("ions.strain_sensitivity_hz_per_pa", "Hz/Pa", Required),
    key("ions.zeeman_sensitivity_hz_per_t", "Hz/T", Required),
    key("ions.ion_density_m3", "m^-3", Required),
    key("ions.inhomogeneous_width_hz", "Hz", Value(1.4e9)),
    key("burn.delta_hz", "Hz", Required),
    key("burn.bias_gradient_t_per_m", "T/m", Required),
    key("burn.center_frequency_hz", "Hz", Value(0.0)),
    key("burn.smear_amplitude_m", "m", Value(0.0)),
    key("probe.power_w", "W", Required),
    key("probe.wavelength_m", "m", Derived("ions.wavelength_m")),
    key("probe.cross_section_m2", "m^2", Value(100e-12)),
    key("probe.beam_extent_m", "m", Value(10e-6)),
    key("environment.temperature_k", "K", Required),
    key("environment.optical_power_limit_w", "W", Value(3e-3)),
    key("coupling.displacement_m", "m", Unset),
    key("coupling.integration_time_s", "s", Derived("4 pi / linewidth")),
    key("bloch.rabi_rad_s", "rad/s", Value(1e3)),
    key("bloch.detuning_hz", "Hz", Derived("3 * burn.delta_hz")),
    key("bloch.modulation_hz", "Hz", Derived("k (e/2) x_zpf")),
    key("bloch.mech_frequency_hz", "Hz", Derived("cantilever.mode_frequency_hz")),
    key("bloch.linewidth_hz", "Hz", Derived("ions.linewidth_hz")),
    key("bloch.steps_per_period", "1", Value(200.0)),
    key("bloch.start_on_pss", "1", Value(0.0)),
    key("bloch.duration_s", "s", Derived("transient time, or 10 periods on the steady state")),
    key("bloch.record_periods", "1", Value(5.0)),
];

pub fn key_def(name: &str) -> Option<&'static KeyDef> {
    KEYS.iter().find(|k| k.key == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Config,
    Default,
}

/// Values given explicitly in a scenario file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioConfig {
    explicit: BTreeMap<&'static str, f64>,
}

/// Parse and validate a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                key: content.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        let parse_err = |reason: String| Error::Parse {
            line,
            key: k.to_string(),
            reason,
        };
        let def = key_def(k).ok_or_else(|| parse_err("unknown key".into()))?;
        let value: f64 = v
            .parse()
            .map_err(|_| parse_err(format!("`{v}` is not a number")))?;
        if !value.is_finite() {
            return Err(parse_err(format!("`{v}` is not finite")));
        }
        if cfg.explicit.insert(def.key, value).is_some() {
            return Err(parse_err("key given twice".into()));
        }
    }
    cfg.scenario()?;
    Ok(cfg)
}

impl ScenarioConfig {
    /// Explicit value or static default. Derived defaults resolve to `None`.
    pub fn get(&self, name: &str) -> Option<f64> {
        let def = key_def(name)?;
        self.explicit.get(def.key).copied().or(match def.fallback {
            Value(v) => Some(v),
            _ => None,
        })
    }

    pub fn source(&self, name: &str) -> Source {
        if self.explicit.contains_key(name) {
            Source::Config
        } else {
            Source::Default
        }
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let def = key_def(name).ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        if !value.is_finite() {
            return Err(Error::InvalidSpec {
                field: def.key,
                reason: format!("must be finite, got {value}"),
            });
        }
        self.explicit.insert(def.key, value);
        Ok(())
    }

    /// Apply `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| Error::Parse {
                line: 0,
                key: o.clone(),
                reason: "override must be `key=value`".into(),
            })?;
            let value: f64 = v.trim().parse().map_err(|_| Error::Parse {
                line: 0,
                key: k.trim().to_string(),
                reason: format!("`{}` is not a number", v.trim()),
            })?;
            self.set(k.trim(), value)?;
        }
        Ok(())
    }

    /// Normalized file text: explicit keys only, table order, round-trip
    /// float formatting.
    pub fn to_cfg_string(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for def in KEYS {
            let Some(v) = self.explicit.get(def.key) else { continue };
            let s = def.key.split('.').next().unwrap_or("");
            if s != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = s;
            }
            let _ = writeln!(out, "{} = {:?}", def.key, v);
        }
        out
    }

    fn require(&self, name: &'static str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::Validation(format!("missing required key `{name}`")))
    }

    /// Typed, validated scenario.
    pub fn scenario(&self) -> Result<Scenario> {
        let missing: Vec<&str> = KEYS
            .iter()
            .filter(|d| d.fallback == Required && !self.explicit.contains_key(d.key))
            .map(|d| d.key)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Validation(format!(
                "missing required keys: {}",
                missing.join(", ")
            )));
        }
        let r = |k| self.require(k);
        let cantilever = CantileverSpec {
            length_m: r("cantilever.length_m")?,
            thickness_m: r("cantilever.thickness_m")?,
            width_m: r("cantilever.width_m")?,
            youngs_modulus_pa: r("cantilever.youngs_modulus_pa")?,
            effective_mass_kg: r("cantilever.effective_mass_kg")?,
            mode_frequency_hz: r("cantilever.mode_frequency_hz")?,
        };
        cantilever.validate()?;
        let ions = IonEnsembleSpec {
            wavelength_m: r("ions.wavelength_m")?,
            linewidth_rad_s: TWO_PI * r("ions.linewidth_hz")?,
            strain_sensitivity_hz_per_pa: r("ions.strain_sensitivity_hz_per_pa")?,
            zeeman_sensitivity_hz_per_t: r("ions.zeeman_sensitivity_hz_per_t")?,
            ion_density_m3: r("ions.ion_density_m3")?,
            inhomogeneous_width_hz: r("ions.inhomogeneous_width_hz")?,
        };
        ions.validate()?;
        let environment = Environment {
            temperature_k: r("environment.temperature_k")?,
            optical_power_limit_w: r("environment.optical_power_limit_w")?,
        };
        environment.validate()?;
        let probe = ProbeSpec {
            wavelength_m: self.get("probe.wavelength_m").unwrap_or(ions.wavelength_m),
            power_w: r("probe.power_w")?,
            cross_section_m2: r("probe.cross_section_m2")?,
            beam_extent_m: r("probe.beam_extent_m")?,
        };
        probe.validate()?;
        let k = strain_coupling_k(&cantilever, &ions);
        let burn = BurnSpec {
            center_frequency_hz: r("burn.center_frequency_hz")?,
            half_width_hz: r("burn.delta_hz")?,
            bias_gradient_t_per_m: r("burn.bias_gradient_t_per_m")?,
            smear_amplitude_m: r("burn.smear_amplitude_m")?,
            zeeman_sensitivity_hz_per_t: ions.zeeman_sensitivity_hz_per_t,
            strain_k_hz_per_m2: k,
            thickness_m: cantilever.thickness_m,
        };
        burn.validate()?;
        let medium = DispersiveMedium {
            burn,
            spectral_density: ion_spectral_density(&ions, &probe, &cantilever)?,
            probe,
            linewidth_rad_s: ions.linewidth_rad_s,
        };
        let mechanics = derive_mechanics(&cantilever, &environment);

        let displacement_m = self.get("coupling.displacement_m");
        let integration_time_s = self.get("coupling.integration_time_s");
        if let Some(t) = integration_time_s {
            crate::model::positive("coupling.integration_time_s", t)?;
        }

        let drive = TwoLevelDrive {
            rabi_rad_s: r("bloch.rabi_rad_s")?,
            detuning_rad_s: bloch::hz_to_rad_per_s(
                self.get("bloch.detuning_hz").unwrap_or(3.0 * burn.half_width_hz),
            ),
            decay_rad_s: self
                .get("bloch.linewidth_hz")
                .map(bloch::hz_to_rad_per_s)
                .unwrap_or(ions.linewidth_rad_s),
            modulation_rad_s: bloch::hz_to_rad_per_s(
                self.get("bloch.modulation_hz")
                    .unwrap_or(k * burn.half_thickness() * mechanics.x_zpf_m),
            ),
            mech_frequency_rad_s: bloch::hz_to_rad_per_s(
                self.get("bloch.mech_frequency_hz")
                    .unwrap_or(cantilever.mode_frequency_hz),
            ),
        };
        drive.validate()?;
        let steps = r("bloch.steps_per_period")?;
        let start_on_pss = match r("bloch.start_on_pss")? {
            v if v == 0.0 => false,
            v if v == 1.0 => true,
            v => {
                return Err(Error::InvalidSpec {
                    field: "bloch.start_on_pss",
                    reason: format!("must be 0 or 1, got {v}"),
                })
            }
        };
        if steps.fract() != 0.0 || steps < 1.0 {
            return Err(Error::InvalidSpec {
                field: "bloch.steps_per_period",
                reason: format!("must be a positive integer, got {steps}"),
            });
        }
        let record_periods = r("bloch.record_periods")?;
        crate::model::positive("bloch.record_periods", record_periods)?;
        let duration_s = self.get("bloch.duration_s").unwrap_or(if start_on_pss {
            10.0 * drive.mech_period()
        } else {
            bloch::transient_time(&drive)
        });
        crate::model::positive("bloch.duration_s", duration_s)?;

        Ok(Scenario {
            cantilever,
            ions,
            environment,
            probe,
            burn,
            medium,
            mechanics,
            displacement_m,
            integration_time_s,
            drive,
            bloch: BlochRun {
                steps_per_period: steps as usize,
                start_on_pss,
                duration_s,
                record_periods,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochRun {
    pub steps_per_period: usize,
    pub start_on_pss: bool,
    pub duration_s: f64,
    pub record_periods: f64,
}

/// Everything a run needs, built from a [`ScenarioConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub cantilever: CantileverSpec,
    pub ions: IonEnsembleSpec,
    pub environment: Environment,
    pub probe: ProbeSpec,
    pub burn: BurnSpec,
    pub medium: DispersiveMedium,
    pub mechanics: MechanicsDerived,
    pub displacement_m: Option<f64>,
    pub integration_time_s: Option<f64>,
    pub drive: TwoLevelDrive,
    pub bloch: BlochRun,
}

/// The bundled worked-example scenario file.
pub const PAPER_EXAMPLE_CFG: &str = include_str!("../../data/paper_example.cfg");

pub fn paper_example() -> ScenarioConfig {
    parse_config(PAPER_EXAMPLE_CFG).expect("bundled scenario is valid")
}
