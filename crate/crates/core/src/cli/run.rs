//! Scenario runs behind the subcommands: coupling table, hole profile,
//! Bloch trace and parameter sweeps.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{key_def, ScenarioConfig};
use super::report::{coupling_json, evaluate_methods, headline, quantity};
use crate::bloch::{self, AdiabaticDeviation, IntegrationOptions, RegimeDiagnostics};
use crate::coupling::{CouplingResult, Method};
use crate::error::{Error, Result};
use crate::holeburn::{self, BurnSpec};
use crate::observables::{self, SidebandConvention};

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Coupling results for the selected methods. Any method failing fails the run.
pub fn coupling(cfg: &ScenarioConfig, methods: &[Method]) -> Result<Vec<CouplingResult>> {
    let s = cfg.scenario()?;
    evaluate_methods(&s, methods).into_iter().map(|(_, r)| r).collect()
}

pub fn coupling_to_json(results: &[CouplingResult]) -> Value {
    let mut m = Map::new();
    for r in results {
        m.insert(r.method.as_str().to_string(), coupling_json(r));
    }
    Value::Object(m)
}

pub fn coupling_to_csv(results: &[CouplingResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "displacement_m", "v_j", "dvdx0_j_per_m", "x_disp_m", "carrier_phase_rad"])?;
    for r in results {
        w.write_record([
            r.method.as_str().to_string(),
            num(r.displacement_m),
            num(r.v_j),
            num(r.dvdx0_j_per_m),
            num(r.x_disp_m),
            num(r.carrier_phase_rad),
        ])?;
    }
    csv_string(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoleRow {
    pub x_m: f64,
    pub ell_l_hz: f64,
    pub ell_r_hz: f64,
    pub ell_l_unbent_hz: f64,
    pub ell_r_unbent_hz: f64,
}

/// Hole edges across the thickness at tip displacement `x_tip_m`, with the
/// unbent edges alongside.
pub fn render_hole(cfg: &ScenarioConfig, x_tip_m: f64, samples: usize) -> Result<Vec<HoleRow>> {
    let s = cfg.scenario()?;
    hole_rows(&s.burn, x_tip_m, samples)
}

pub fn hole_rows(burn: &BurnSpec, x_tip_m: f64, samples: usize) -> Result<Vec<HoleRow>> {
    let bent = holeburn::hole_profile(burn, x_tip_m, samples)?;
    let flat = holeburn::hole_profile(burn, 0.0, samples)?;
    Ok(bent
        .samples
        .iter()
        .zip(&flat.samples)
        .map(|(b, f)| HoleRow {
            x_m: b.x_m,
            ell_l_hz: b.left_hz,
            ell_r_hz: b.right_hz,
            ell_l_unbent_hz: f.left_hz,
            ell_r_unbent_hz: f.right_hz,
        })
        .collect())
}

pub fn hole_to_csv(rows: &[HoleRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x_m", "ell_l_hz", "ell_r_hz", "ell_l_unbent_hz", "ell_r_unbent_hz"])?;
    for r in rows {
        w.write_record([num(r.x_m), num(r.ell_l_hz), num(r.ell_r_hz), num(r.ell_l_unbent_hz), num(r.ell_r_unbent_hz)])?;
    }
    csv_string(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub rho: (f64, f64),
    pub pss: (f64, f64),
    pub adiabatic: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochSummary {
    pub step_s: f64,
    pub samples: usize,
    /// Periodicity residual (ground start) or distance from the steady state
    /// (steady-state start), relative to `|a0|`.
    pub residual: f64,
    pub tolerance: f64,
    /// `max |rho - pss| / |a0|` over the recorded window.
    pub max_pss_deviation: f64,
    /// `max |rho - adiabatic| / |a0|` over the recorded window.
    pub max_adiabatic_deviation: f64,
    pub adiabatic: AdiabaticDeviation,
    pub regime: RegimeDiagnostics,
    pub warnings: Vec<String>,
}

/// Integrate the coherence and compare it with the periodic steady state and
/// adiabatic following over the last `bloch.record_periods` periods.
pub fn bloch_trace(cfg: &ScenarioConfig) -> Result<(Vec<TraceRow>, BlochSummary)> {
    let s = cfg.scenario()?;
    let d = s.drive;
    let mut opts = IntegrationOptions::new(s.bloch.duration_s, s.bloch.steps_per_period)
        .recording_last_periods(&d, s.bloch.record_periods);
    if s.bloch.start_on_pss {
        opts = opts.starting_on_pss();
    }
    let traj = bloch::integrate_bloch(&d, &opts)?;
    let scale = bloch::steady_state_coherence(&d).norm();
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let mut pss_dev: f64 = 0.0;
    let mut ad_dev: f64 = 0.0;
    let rows: Vec<TraceRow> = traj
        .times
        .iter()
        .zip(&traj.coherence)
        .map(|(&t, &rho)| {
            let pss = bloch::pss_coherence_with(t, &d, bloch::A0Form::Exact);
            let ad = bloch::adiabatic_coherence(t, &d);
            pss_dev = pss_dev.max((rho - pss).norm());
            ad_dev = ad_dev.max((rho - ad).norm());
            TraceRow {
                t_s: t,
                rho: (rho.re, rho.im),
                pss: (pss.re, pss.im),
                adiabatic: (ad.re, ad.im),
            }
        })
        .collect();
    let regime = bloch::regime_check(&d);
    let summary = BlochSummary {
        step_s: traj.step_s,
        samples: rows.len(),
        residual: traj.residual,
        tolerance: traj.tolerance,
        max_pss_deviation: rel(pss_dev),
        max_adiabatic_deviation: rel(ad_dev),
        adiabatic: bloch::adiabatic_deviation(&d, 256),
        warnings: regime.warnings(),
        regime,
    };
    Ok((rows, summary))
}

pub fn trace_to_csv(rows: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_s", "re_rho", "im_rho", "re_pss", "im_pss", "re_adiabatic", "im_adiabatic"])?;
    for r in rows {
        w.write_record([
            num(r.t_s),
            num(r.rho.0),
            num(r.rho.1),
            num(r.pss.0),
            num(r.pss.1),
            num(r.adiabatic.0),
            num(r.adiabatic.1),
        ])?;
    }
    csv_string(w)
}

/// One sweep row: the swept value and either outputs or an error message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub cells: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
}

const METHOD_COLUMNS: [&str; 5] = ["displacement_m", "v_j", "dvdx0_j_per_m", "x_disp_m", "carrier_phase_rad"];
const BUDGET_COLUMNS: [&str; 4] = [
    "overburn_time_s",
    "shot_noise_phase_rad",
    "thermal_phase_rad",
    "zeropoint_phase_rad",
];

/// Re-run the chain with `parameter` set to each value in turn. Rows are
/// independent and computed in parallel; output order follows `values`.
pub fn sweep(cfg: &ScenarioConfig, parameter: &str, values: &[f64], methods: &[Method]) -> Result<Sweep> {
    if key_def(parameter).is_none() {
        return Err(Error::UnknownParameter(parameter.to_string()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Validation(format!("sweep value {v} is not finite")));
    }
    let mut columns = Vec::new();
    for m in methods {
        for c in METHOD_COLUMNS {
            columns.push(format!("{c}_{}", m.as_str()));
        }
    }
    columns.extend(BUDGET_COLUMNS.iter().map(|c| c.to_string()));

    let rows = values
        .par_iter()
        .map(|&value| sweep_row(cfg, parameter, value, methods, columns.len()))
        .collect();
    Ok(Sweep {
        parameter: parameter.to_string(),
        columns,
        rows,
    })
}

fn sweep_row(cfg: &ScenarioConfig, parameter: &str, value: f64, methods: &[Method], width: usize) -> SweepRow {
    let failed = |e: Error| SweepRow {
        value,
        cells: vec![None; width],
        error: Some(e.to_string()),
    };
    let mut cfg = cfg.clone();
    if let Err(e) = cfg.set(parameter, value) {
        return failed(e);
    }
    let s = match cfg.scenario() {
        Ok(s) => s,
        Err(e) => return failed(e),
    };
    let results = evaluate_methods(&s, methods);
    let mut cells = Vec::with_capacity(width);
    let mut errors = Vec::new();
    for (m, r) in &results {
        match r {
            Ok(r) => cells.extend([r.displacement_m, r.v_j, r.dvdx0_j_per_m, r.x_disp_m, r.carrier_phase_rad].map(Some)),
            Err(e) => {
                cells.extend([None; 5]);
                errors.push(format!("{}: {e}", m.as_str()));
            }
        }
    }
    match observables::detection_budget(&s.probe, s.ions.linewidth_rad_s, s.integration_time_s) {
        Ok(b) => cells.extend([Some(b.overburn_time_s), Some(b.shot_noise_phase_rad)]),
        Err(e) => {
            cells.extend([None, None]);
            errors.push(e.to_string());
        }
    }
    match headline(&results) {
        Some(h) => {
            let sb = observables::sideband_phases(
                h.dvdx0_j_per_m,
                &s.probe,
                &s.mechanics,
                s.environment.temperature_k,
                SidebandConvention::Quantum,
            );
            cells.extend([Some(sb.thermal_phase_rad), Some(sb.zeropoint_phase_rad)]);
        }
        None => cells.extend([None, None]),
    }
    SweepRow {
        value,
        cells,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    }
}

impl Sweep {
    /// Value of `column` in each row.
    pub fn column(&self, column: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == column)?;
        Some(self.rows.iter().map(|r| r.cells[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.parameter.clone()];
        header.extend(self.columns.iter().cloned());
        header.push("error".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![num(r.value)];
            rec.extend(r.cells.iter().map(|c| c.map(num).unwrap_or_default()));
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        csv_string(w)
    }

    pub fn to_json(&self) -> Value {
        let unit = key_def(&self.parameter).map_or("", |d| d.unit);
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert(self.parameter.clone(), quantity(r.value, unit, "sweep"));
                for (c, v) in self.columns.iter().zip(&r.cells) {
                    m.insert(c.clone(), v.map_or(Value::Null, Value::from));
                }
                m.insert("error".into(), r.error.clone().map_or(Value::Null, Value::from));
                Value::Object(m)
            })
            .collect();
        json!({ "parameter": self.parameter, "rows": rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::paper_example;
    use approx::assert_relative_eq;

    #[test]
    fn lowt_slope_is_linear_in_gradient() {
        let sw = sweep(&paper_example(), "burn.bias_gradient_t_per_m", &[0.0, 530.0, 1060.0], &[Method::LowT]).unwrap();
        let col: Vec<f64> = sw.column("dvdx0_j_per_m_lowt").unwrap().into_iter().map(Option::unwrap).collect();
        assert_eq!(col[0], 0.0);
        assert_relative_eq!(col[2], 2.0 * col[1], max_relative = 1e-12);
    }

    #[test]
    fn lowt_slope_scales_as_inverse_square_half_width() {
        let sw = sweep(&paper_example(), "burn.delta_hz", &[1e6, 2e6, 4e6], &[Method::LowT]).unwrap();
        let col: Vec<f64> = sw.column("dvdx0_j_per_m_lowt").unwrap().into_iter().map(Option::unwrap).collect();
        assert_relative_eq!(col[0] / col[1], 4.0, max_relative = 1e-12);
        assert_relative_eq!(col[1] / col[2], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn numeric_response_is_antisymmetric_in_displacement() {
        let xs = [-2e-12, -1e-12, 0.0, 1e-12, 2e-12];
        let sw = sweep(&paper_example(), "coupling.displacement_m", &xs, &[Method::Numeric]).unwrap();
        let v: Vec<f64> = sw.column("v_j_numeric").unwrap().into_iter().map(Option::unwrap).collect();
        assert_eq!(v[2], 0.0);
        assert_relative_eq!(v[0], -v[4], max_relative = 1e-12);
        assert_relative_eq!(v[1], -v[3], max_relative = 1e-12);
    }

    #[test]
    fn bad_rows_do_not_abort_the_sweep() {
        let sw = sweep(&paper_example(), "burn.delta_hz", &[1e6, -1e6, 2e6], &Method::ALL).unwrap();
        assert!(sw.rows[0].error.is_none());
        assert!(sw.rows[1].error.as_deref().unwrap().contains("burn.delta_hz"));
        assert!(sw.rows[1].cells.iter().all(Option::is_none));
        assert!(sw.rows[2].error.is_none());
        let csv = sw.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().next().unwrap().ends_with(",error"));
    }

    #[test]
    fn unknown_parameter() {
        assert_eq!(
            sweep(&paper_example(), "burn.nothing", &[1.0], &Method::ALL),
            Err(Error::UnknownParameter("burn.nothing".into()))
        );
    }

    #[test]
    fn flat_hole_without_gradient_or_smear() {
        let mut cfg = paper_example();
        cfg.set("burn.bias_gradient_t_per_m", 0.0).unwrap();
        let rows = render_hole(&cfg, 0.0, 11).unwrap();
        for r in &rows {
            assert_eq!(r.ell_l_hz, -3e6);
            assert_eq!(r.ell_r_hz, 3e6);
        }
    }

    #[test]
    fn example_hole_edges_at_faces() {
        let cfg = paper_example();
        let s = cfg.scenario().unwrap();
        let rows = render_hole(&cfg, 0.0, 21).unwrap();
        let h = s.burn.half_thickness();
        let first = rows.first().unwrap();
        let last = rows.last().unwrap();
        assert_eq!(first.x_m, -h);
        assert_eq!(last.x_m, h);
        let e = holeburn::hole_edges(h, &s.burn).unwrap();
        assert_eq!((last.ell_l_hz, last.ell_r_hz), (e.left_hz, e.right_hz));
        // g gradB0 h = 3.8e7 * 530 * 5e-6
        assert_relative_eq!(first.ell_r_hz - 3e6, 100.7e3, max_relative = 1e-9);
    }

    #[test]
    fn bent_hole_is_asymmetric() {
        let rows = render_hole(&paper_example(), 1e-12, 21).unwrap();
        let (a, b) = (rows.first().unwrap(), rows.last().unwrap());
        assert!((a.ell_r_hz - a.ell_r_unbent_hz) < 0.0);
        assert!((b.ell_r_hz - b.ell_r_unbent_hz) > 0.0);
        assert!(hole_to_csv(&rows).unwrap().starts_with("x_m,ell_l_hz,ell_r_hz,ell_l_unbent_hz,ell_r_unbent_hz\n"));
    }

    fn fast_bloch(cfg: &mut ScenarioConfig) {
        cfg.set("bloch.detuning_hz", 1e4).unwrap();
        cfg.set("bloch.linewidth_hz", 10.0).unwrap();
        cfg.set("bloch.mech_frequency_hz", 1e2).unwrap();
        cfg.set("bloch.modulation_hz", 10.0).unwrap();
        cfg.set("bloch.start_on_pss", 1.0).unwrap();
    }

    #[test]
    fn unmodulated_trace_has_constant_references() {
        let mut cfg = paper_example();
        fast_bloch(&mut cfg);
        cfg.set("bloch.modulation_hz", 0.0).unwrap();
        let (rows, summary) = bloch_trace(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.pss == rows[0].pss && r.adiabatic == rows[0].adiabatic));
        assert!(summary.max_pss_deviation < 1e-10);
    }

    #[test]
    fn adiabatic_trace_summary() {
        let mut cfg = paper_example();
        fast_bloch(&mut cfg);
        let (rows, summary) = bloch_trace(&cfg).unwrap();
        assert!(rows.len() > 100);
        assert!(summary.max_adiabatic_deviation < 1e-3, "{summary:?}");
        assert!(summary.warnings.is_empty());
        assert!(trace_to_csv(&rows).unwrap().starts_with("t_s,re_rho,im_rho,re_pss,im_pss,re_adiabatic,im_adiabatic\n"));
    }

    #[test]
    fn fast_modulation_is_flagged() {
        let mut cfg = paper_example();
        fast_bloch(&mut cfg);
        cfg.set("bloch.mech_frequency_hz", 1e5).unwrap();
        let (_, summary) = bloch_trace(&cfg).unwrap();
        assert!(summary.adiabatic.modulation_mismatch > 0.5);
        assert!(summary.warnings.iter().any(|w| w.contains("adiabatic")));
    }
}
