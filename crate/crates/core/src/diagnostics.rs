//! Per-run measurements: the monitored time series, exponential-decay fits,
//! the two identity cross-checks and the invariant summary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::curve::CurvatureProfile;
use crate::error::{Error, Result};
use crate::flow::{constraint_h, constraint_h_from_speed, rhs, speed_g, IntegratorConfig};
use crate::grid::{integrate, Spectrum};

/// Absolute floor of the relative residual in [`dedt_identity_check`].
pub const RESIDUAL_FLOOR: f64 = 1e-14;

/// Monitored quantities at one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub energy: f64,
    pub h: f64,
    /// `integral k ds`, equal to `2 pi omega` in the continuum.
    pub winding_integral: f64,
    /// `integral k (G + h) ds`.
    pub constraint_integral: f64,
    pub k_sup: f64,
    pub sup_deviation: f64,
    pub kss_l2sq: f64,
    /// Only filled on sampled steps.
    pub closure_defect: Option<f64>,
    /// `integral G^2 ds`.
    pub g_l2sq: f64,
    /// `h * integral G ds`.
    pub h_g_integral: f64,
}

impl Row {
    /// Right-hand side of `dE/dt = -integral G^2 - h integral G`.
    pub fn energy_rate(&self) -> f64 {
        -self.g_l2sq - self.h_g_integral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminalStatus {
    /// Energy fell below the configured tolerance.
    Converged,
    /// Reached `t_max` without the energy ever leaving round-off level.
    Stationary,
    /// Reached `t_max`.
    TimeLimit,
    Blowup {
        t: f64,
        k_sup: f64,
    },
    Aborted {
        t: f64,
        reason: String,
    },
}

impl TerminalStatus {
    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            TerminalStatus::Blowup { .. } | TerminalStatus::Aborted { .. }
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            TerminalStatus::Converged => "converged",
            TerminalStatus::Stationary => "stationary",
            TerminalStatus::TimeLimit => "time_limit",
            TerminalStatus::Blowup { .. } => "blowup",
            TerminalStatus::Aborted { .. } => "aborted",
        }
    }
}

/// Full time series of one run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub length: f64,
    pub omega: i64,
    pub n: usize,
    pub integrator: IntegratorConfig,
    pub rows: Vec<Row>,
    pub status: TerminalStatus,
    /// Profile at the last recorded row.
    pub final_profile: CurvatureProfile,
}

impl RunRecord {
    pub fn initial_energy(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.energy)
    }

    pub fn final_row(&self) -> Option<&Row> {
        self.rows.last()
    }
}

/// Least-squares line through `(t, ln E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `-slope`, in inverse time units.
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Fits `E(t) ~ exp(intercept - rate t)` over `window`.
///
/// `None` uses the middle half of the recorded time span.
pub fn fit_decay(record: &RunRecord, window: Option<(f64, f64)>) -> Result<DecayFit> {
    let series: Vec<(f64, f64)> = record.rows.iter().map(|r| (r.t, r.energy)).collect();
    fit_decay_series(&series, window)
}

pub fn fit_decay_series(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let (t0, t1) = match (window, series.first(), series.last()) {
        (Some(w), _, _) => w,
        (None, Some(a), Some(b)) => {
            let span = b.0 - a.0;
            (a.0 + 0.25 * span, a.0 + 0.75 * span)
        }
        _ => return Err(Error::EmptyWindow),
    };
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= t0 && *t <= t1)
        .collect();
    if pts.len() < 2 {
        return Err(Error::EmptyWindow);
    }
    if let Some(&(t, energy)) = pts.iter().find(|(_, e)| e.is_nan() || *e <= 0.0) {
        return Err(Error::NonPositiveEnergy { t, energy });
    }

    let m = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, e) in &pts {
        let (dt, dy) = (t - mean_t, e.ln() - mean_y);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::EmptyWindow);
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sty * sty / (stt * syy)).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        rate: -slope,
        intercept,
        r_squared,
        window: (t0, t1),
        samples: pts.len(),
    })
}

/// Relative mismatch between the centered difference of the stored energies
/// around `row` and the identity `-integral G^2 - h integral G` at `row`.
pub fn dedt_identity_check(prev: &Row, row: &Row, next: &Row) -> f64 {
    let measured = (next.energy - prev.energy) / (next.t - prev.t);
    (measured - row.energy_rate()).abs() / row.g_l2sq.abs().max(RESIDUAL_FLOOR)
}

/// [`dedt_identity_check`] at every interior row, as `(t, residual)`.
pub fn dedt_residuals(record: &RunRecord) -> Vec<(f64, f64)> {
    record
        .rows
        .windows(3)
        .map(|w| (w[1].t, dedt_identity_check(&w[0], &w[1], &w[2])))
        .collect()
}

/// `|h_formula - (-(1 / 2 pi omega) integral k G ds)|`.
pub fn h_identity_check(p: &CurvatureProfile) -> f64 {
    let g = speed_g(p, false).expect("finite profile has a finite speed");
    (constraint_h(p) - constraint_h_from_speed(p, &g)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub winding: f64,
    pub constraint: f64,
    pub monotone_slack: f64,
    /// Runs starting at or below this energy get the small-energy monitors.
    pub smallness_energy: f64,
    pub bound_slack: f64,
    pub closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            winding: 1e-8,
            constraint: 1e-10,
            monotone_slack: 1e-12,
            smallness_energy: 1e-2,
            bound_slack: 1e-10,
            closure: 1e-6,
        }
    }
}

/// One pass/fail line. Hard monitors decide the run's exit status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub hard: bool,
    pub passed: bool,
}

impl Monitor {
    fn at_most(name: &str, value: f64, threshold: f64, hard: bool) -> Self {
        Monitor {
            name: name.to_string(),
            value,
            threshold,
            hard,
            passed: value <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub small_energy: bool,
    pub max_winding_drift: f64,
    pub max_constraint_integral: f64,
    pub max_k_sup: f64,
    pub max_kss_l2sq: f64,
    pub max_abs_h: f64,
    pub max_closure_defect: f64,
    pub final_sup_deviation: f64,
    pub final_closure_defect: f64,
    pub monitors: Vec<Monitor>,
    pub passed: bool,
}

impl InvariantReport {
    pub fn failed_hard(&self) -> Vec<&str> {
        self.monitors
            .iter()
            .filter(|m| m.hard && !m.passed)
            .map(|m| m.name.as_str())
            .collect()
    }

    pub fn monitor(&self, name: &str) -> Option<&Monitor> {
        self.monitors.iter().find(|m| m.name == name)
    }
}

fn fold_max(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

/// Summarises the drift and bound monitors of a run.
///
/// # Panics
/// On an empty record.
pub fn invariant_report(record: &RunRecord, tol: &Tolerances) -> InvariantReport {
    assert!(!record.rows.is_empty(), "empty run record");
    let rows = &record.rows;
    let length = record.length;
    let omega = record.omega as f64;
    let two_pi_omega = 2.0 * PI * omega;
    let first = rows[0];
    let last = *rows.last().unwrap();
    let small_energy = first.energy <= tol.smallness_energy;

    let max_winding_drift = fold_max(
        rows.iter()
            .map(|r| (r.winding_integral - two_pi_omega).abs()),
    );
    let max_constraint_integral = fold_max(rows.iter().map(|r| r.constraint_integral.abs()));
    let max_k_sup = fold_max(rows.iter().map(|r| r.k_sup));
    let max_kss_l2sq = fold_max(rows.iter().map(|r| r.kss_l2sq));
    let max_abs_h = fold_max(rows.iter().map(|r| r.h.abs()));
    let max_closure_defect = fold_max(rows.iter().filter_map(|r| r.closure_defect)).max(0.0);

    let max_increase = rows
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(0.0, f64::max);
    let max_dissipation = fold_max(rows.iter().map(Row::energy_rate));
    let ksup_excess =
        fold_max(rows.iter().map(|r| {
            length * r.k_sup - (length.powi(3) * 2.0 * r.energy).sqrt() - two_pi_omega.abs()
        }));
    let psw_excess = fold_max(
        rows.iter()
            .map(|r| r.sup_deviation.powi(2) - length / (2.0 * PI) * 2.0 * r.energy),
    );
    // stated linear-in-E0 curvature bound, kept as an informational monitor
    let kbound = 2.0 * length.sqrt() * first.energy + two_pi_omega.abs() / length;
    let kbound_excess = fold_max(rows.iter().map(|r| r.k_sup - kbound));

    let status_ok = !record.status.is_failure();
    let monitors = vec![
        Monitor::at_most("winding_drift", max_winding_drift, tol.winding, true),
        Monitor::at_most(
            "constraint_integral",
            max_constraint_integral,
            tol.constraint,
            true,
        ),
        Monitor::at_most(
            "energy_monotone",
            max_increase,
            tol.monotone_slack,
            small_energy,
        ),
        Monitor::at_most("dissipation_sign", max_dissipation, 0.0, small_energy),
        Monitor::at_most("ksup_bound", ksup_excess, tol.bound_slack, true),
        Monitor::at_most("sup_deviation_bound", psw_excess, tol.bound_slack, true),
        Monitor::at_most("kbound_initial_energy", kbound_excess, 0.0, false),
        Monitor::at_most("closure_defect", max_closure_defect, tol.closure, false),
        Monitor {
            name: "terminal_status".to_string(),
            value: if status_ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            hard: true,
            passed: status_ok,
        },
    ];
    let passed = monitors.iter().all(|m| !m.hard || m.passed);
    InvariantReport {
        steps: rows.len() - 1,
        initial_energy: first.energy,
        final_energy: last.energy,
        small_energy,
        max_winding_drift,
        max_constraint_integral,
        max_k_sup,
        max_kss_l2sq,
        max_abs_h,
        max_closure_defect,
        final_sup_deviation: last.sup_deviation,
        final_closure_defect: last.closure_defect.unwrap_or(f64::NAN),
        monitors,
        passed,
    }
}

/// `integral k_{s^l}^2 ds`; `l = 0` is the plain `L2` norm squared.
pub fn derivative_l2sq(p: &CurvatureProfile, l: u32) -> f64 {
    let d = if l == 0 {
        p.k().clone()
    } else {
        Spectrum::new(p.k()).deriv_grid(l)
    };
    integrate(&d.mul(&d))
}

/// `d/dt integral k_{s^l}^2 ds = 2 integral k_{s^l} (k_t)_{s^l} ds` along the flow.
pub fn derivative_l2sq_rate(p: &CurvatureProfile, l: u32) -> Result<f64> {
    let kt = rhs(p)?;
    let (d, dt) = if l == 0 {
        (p.k().clone(), kt)
    } else {
        (
            Spectrum::new(p.k()).deriv_grid(l),
            Spectrum::new(&kt).deriv_grid(l),
        )
    };
    Ok(2.0 * integrate(&d.mul(&dt)))
}

/// Linearized decay rate of `E` for a single mode `m` about the circle,
/// `2 q^2 (q^2 - kbar^2)^2` with `q = 2 pi m / L0`.
pub fn linear_energy_rate(length: f64, omega: i64, m: u32) -> f64 {
    let q = 2.0 * PI * m as f64 / length;
    let kbar = 2.0 * PI * omega as f64 / length;
    -2.0 * crate::flow::linear_symbol(q, kbar)
}
