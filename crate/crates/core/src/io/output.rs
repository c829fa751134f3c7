//! Run artifacts: `timeseries.csv`, `final_curve.csv` and `summary.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::curve::{mean_curvature, reconstruct, ReconstructedCurve};
use crate::diagnostics::{
    dedt_residuals, fit_decay, h_identity_check, invariant_report, linear_energy_rate, DecayFit,
    InvariantReport, RunRecord, TerminalStatus,
};
use crate::error::{Error, Result};
use crate::flow::run;
use crate::io::config::{InitialData, RunConfig};

pub const TIMESERIES_HEADER: &str =
    "t,E,h,winding_integral,constraint_integral,k_sup,sup_deviation,kss_l2sq,closure_defect";
pub const CURVE_HEADER: &str = "s,x,y,theta,k";

/// Rows whose speed norm is below this fraction of the run's largest are
/// skipped by the dE/dt residual; there the identity is pure roundoff.
const DEDT_RESOLVED_FRACTION: f64 = 1e-12;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Every `stride`-th row plus the final one.
pub fn timeseries_csv(record: &RunRecord, stride: usize) -> String {
    let mut out = String::from(TIMESERIES_HEADER);
    out.push('\n');
    let last = record.rows.len().saturating_sub(1);
    for (i, r) in record.rows.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let closure = r.closure_defect.map_or_else(String::new, num);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.t),
            num(r.energy),
            num(r.h),
            num(r.winding_integral),
            num(r.constraint_integral),
            num(r.k_sup),
            num(r.sup_deviation),
            num(r.kss_l2sq),
            closure
        );
    }
    out
}

/// Starting point and heading that place an exact circle at the origin.
fn canonical_frame(record: &RunRecord) -> ([f64; 2], f64) {
    let kbar = mean_curvature(&record.final_profile);
    ([1.0 / kbar, 0.0], std::f64::consts::FRAC_PI_2)
}

pub fn final_curve(record: &RunRecord) -> ReconstructedCurve {
    let (base, angle) = canonical_frame(record);
    reconstruct(&record.final_profile, base, angle)
}

/// `N + 1` rows; the last repeats the first station at `s = L0`.
pub fn final_curve_csv(record: &RunRecord, curve: &ReconstructedCurve) -> String {
    let p = &record.final_profile;
    let k = p.k().samples();
    let spacing = p.k().spacing();
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for (j, (pt, theta)) in curve.points.iter().zip(&curve.theta).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(j as f64 * spacing),
            num(pt[0]),
            num(pt[1]),
            num(*theta),
            num(k[j % k.len()])
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub closure_defect: f64,
    pub best_fit_center: [f64; 2],
    pub best_fit_radius: f64,
    pub target_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub config: Value,
    pub status: TerminalStatus,
    pub steps: usize,
    pub t_final: f64,
    pub report: InvariantReport,
    pub decay_fit: Option<DecayFit>,
    pub decay_fit_error: Option<String>,
    /// Slowest linearized rate among the perturbed modes.
    pub linearized_rate: Option<f64>,
    pub h_identity_initial: f64,
    pub h_identity_final: f64,
    pub dedt_max_residual: Option<f64>,
    pub final_curve: CurveSummary,
    pub passed: bool,
    pub failed_monitors: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub record: RunRecord,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }
}

fn linearized_rate(cfg: &RunConfig) -> Option<f64> {
    match &cfg.initial {
        InitialData::PerturbedCircle { modes } => modes
            .iter()
            .filter(|m| m.amplitude != 0.0 && m.m as i64 != cfg.omega.abs())
            .map(|m| linear_energy_rate(cfg.length, cfg.omega, m.m))
            .min_by(f64::total_cmp),
        _ => None,
    }
}

/// Largest dE/dt residual over rows where the speed is resolved.
pub fn dedt_max_residual(record: &RunRecord) -> Option<f64> {
    let g_max = record.rows.iter().map(|r| r.g_l2sq).fold(0.0, f64::max);
    let floor = DEDT_RESOLVED_FRACTION * g_max;
    let resolved: Vec<f64> = dedt_residuals(record)
        .into_iter()
        .zip(record.rows.iter().skip(1))
        .filter(|(_, row)| row.g_l2sq > floor)
        .map(|((_, r), _)| r)
        .collect();
    (!resolved.is_empty()).then(|| resolved.iter().copied().fold(0.0, f64::max))
}

pub fn summarize(
    cfg: &RunConfig,
    record: &RunRecord,
    curve: &ReconstructedCurve,
) -> Result<RunSummary> {
    let report = invariant_report(record, &cfg.tolerances);
    let (decay_fit, decay_fit_error) = match fit_decay(record, cfg.decay_window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let initial = cfg.initial_profile()?;
    let failed_monitors: Vec<String> = report.failed_hard().into_iter().map(String::from).collect();
    let last = record.final_row().expect("runs record at least one row");
    Ok(RunSummary {
        name: cfg.name.clone(),
        config: cfg.to_json_value(),
        status: record.status.clone(),
        steps: record.rows.len() - 1,
        t_final: last.t,
        passed: report.passed,
        report,
        decay_fit,
        decay_fit_error,
        linearized_rate: linearized_rate(cfg),
        h_identity_initial: h_identity_check(&initial),
        h_identity_final: h_identity_check(&record.final_profile),
        dedt_max_residual: dedt_max_residual(record),
        final_curve: CurveSummary {
            closure_defect: curve.closure_defect,
            best_fit_center: curve.best_fit_center,
            best_fit_radius: curve.best_fit_radius,
            target_radius: 1.0 / mean_curvature(&record.final_profile).abs(),
        },
        failed_monitors,
    })
}

/// Writes through a sibling temp file so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Runs one configuration and writes its artifacts into `out_dir`.
///
/// `summary.json` is written last, so it exists only if every other
/// artifact was written.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    let initial = cfg.initial_profile()?;
    let record = run(initial, &cfg.integrator)?;
    let curve = final_curve(&record);
    let summary = summarize(cfg, &record, &curve)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_atomic(
        &out_dir.join("timeseries.csv"),
        &timeseries_csv(&record, cfg.output_stride),
    )?;
    write_atomic(
        &out_dir.join("final_curve.csv"),
        &final_curve_csv(&record, &curve),
    )?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    write_atomic(&out_dir.join("summary.json"), &json)?;

    Ok(RunOutcome {
        summary,
        record,
        out_dir: out_dir.to_path_buf(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::presets::preset;

    fn short_circle() -> RunConfig {
        let mut c = preset("circle").unwrap();
        c.integrator.stop.t_max = 0.01;
        c.output_stride = 10;
        c.integrator.closure_stride = 10;
        c
    }

    #[test]
    fn artifacts_have_expected_shape() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = short_circle();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        assert!(out.passed());
        assert_eq!(out.summary.status, TerminalStatus::Stationary);

        let ts = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
        let lines: Vec<&str> = ts.lines().collect();
        assert_eq!(lines[0], TIMESERIES_HEADER);
        // 101 rows at stride 10
        assert_eq!(lines.len(), 1 + 11);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 9));
        assert!(lines[1..].iter().all(|l| !l.ends_with(',')));

        let curve = fs::read_to_string(dir.path().join("final_curve.csv")).unwrap();
        let lines: Vec<&str> = curve.lines().collect();
        assert_eq!(lines[0], CURVE_HEADER);
        assert_eq!(lines.len(), 1 + cfg.n + 1);
        let xy: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert!((xy[1] - 1.0).abs() < 1e-12 && xy[2].abs() < 1e-12);

        let summary: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["passed"], Value::Bool(true));
        assert_eq!(summary["status"]["kind"], "stationary");
        assert!((summary["final_curve"]["best_fit_radius"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unwritable_output_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let target = blocker.join("out");
        let err = run_experiment(&short_circle(), &target).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(!target.join("summary.json").exists());
    }
}
