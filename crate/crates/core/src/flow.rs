//! Time evolution of the curvature profile under the length-constrained flow.
//!
//! The state is the curvature `k(s, t)` on a fixed arclength grid. With
//! normal speed `F = G + h` the curvature obeys
//!
//! ```text
//! k_t = F_ss + k^2 F + T k_s,    T(s) = integral_0^s k F ds'
//! ```
//!
//! where the `T k_s` term is the tangential redistribution that keeps the
//! parametrization proportional to arclength. `T` is periodic exactly when
//! `integral k F ds = 0`, which is what the nonlocal term `h` enforces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{reconstruct, sup_deviation, CurvatureProfile};
use crate::diagnostics::{Row, RunRecord, TerminalStatus};
use crate::error::{Error, Result};
use crate::grid::{antideriv, integrate, GridFunction, Spectrum};

/// A run whose energy never exceeds this is reported as stationary.
pub const STATIONARY_ENERGY: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImexEuler,
    ImexBdf2,
    ExplicitRk4,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImexEuler => "imex_euler",
            Scheme::ImexBdf2 => "imex_bdf2",
            Scheme::ExplicitRk4 => "explicit_rk4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "imex_euler" => Some(Scheme::ImexEuler),
            "imex_bdf2" => Some(Scheme::ImexBdf2),
            "explicit_rk4" => Some(Scheme::ExplicitRk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    pub t_max: f64,
    /// Stop with `Converged` once `E <= energy_tol`.
    pub energy_tol: Option<f64>,
    /// Cap on `max |k|`; `None` means `1e3 * kbar`.
    pub blowup_cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub dealias: bool,
    pub stop: StopCriteria,
    /// Reconstruct the curve (for the closure monitor) every this many steps.
    pub closure_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::ImexBdf2,
            dt: 1e-4,
            dealias: false,
            stop: StopCriteria {
                t_max: 1.0,
                energy_tol: None,
                blowup_cap: None,
            },
            closure_stride: 100,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidIntegrator("dt"));
        }
        if !(self.stop.t_max.is_finite() && self.stop.t_max >= 0.0) {
            return Err(Error::InvalidIntegrator("t_max"));
        }
        if let Some(cap) = self.stop.blowup_cap {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::InvalidIntegrator("blowup_cap"));
            }
        }
        if let Some(tol) = self.stop.energy_tol {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(Error::InvalidIntegrator("energy_tol"));
            }
        }
        if self.closure_stride == 0 {
            return Err(Error::InvalidIntegrator("closure_stride"));
        }
        Ok(())
    }

    pub fn blowup_cap_for(&self, p: &CurvatureProfile) -> f64 {
        self.stop
            .blowup_cap
            .unwrap_or_else(|| 1e3 * p.target_curvature().abs())
    }
}

/// Everything the right-hand side needs, evaluated at one profile.
#[derive(Debug, Clone)]
pub struct FlowTerms {
    pub ks: GridFunction,
    pub kss: GridFunction,
    /// Speed of the unconstrained flow, `k_s4 + k^2 k_ss - k k_s^2 / 2`.
    pub g: GridFunction,
    pub h: f64,
    /// `G + h`.
    pub f: GridFunction,
    pub tangential: GridFunction,
    /// `integral k F ds`; zero in the continuum.
    pub constraint_integral: f64,
    pub rhs: GridFunction,
}

fn assemble_g(
    k: &GridFunction,
    ks: &GridFunction,
    kss: &GridFunction,
    ks4: &GridFunction,
) -> GridFunction {
    let (kv, ks, kss, ks4) = (k.samples(), ks.samples(), kss.samples(), ks4.samples());
    let g = (0..kv.len())
        .map(|j| ks4[j] + kv[j] * kv[j] * kss[j] - 0.5 * kv[j] * ks[j] * ks[j])
        .collect();
    GridFunction::from_raw(g, k.domain_length())
}

fn check_finite(f: &GridFunction) -> Result<()> {
    match f.samples().iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `h = (1 / 2 pi omega) (-integral k_ss^2 + 7/2 integral k_s^2 k^2)`.
fn h_from_parts(p: &CurvatureProfile, ks: &GridFunction, kss: &GridFunction) -> f64 {
    let k = p.k().samples();
    let kss_sq = integrate(&kss.mul(kss));
    let mixed = ks
        .samples()
        .iter()
        .zip(k)
        .map(|(a, b)| a * a * b * b)
        .sum::<f64>()
        * ks.spacing();
    (-kss_sq + 3.5 * mixed) / (2.0 * PI * p.omega() as f64)
}

fn speed_from_spectrum(
    p: &CurvatureProfile,
    spec: &Spectrum,
    dealias: bool,
) -> (GridFunction, GridFunction, GridFunction) {
    let ks = spec.deriv_grid(1);
    let kss = spec.deriv_grid(2);
    let ks4 = spec.deriv_grid(4);
    let mut g = assemble_g(p.k(), &ks, &kss, &ks4);
    if dealias {
        g = Spectrum::new(&g).truncated().into_grid();
    }
    (ks, kss, g)
}

/// Speed `G = k_s4 + k^2 k_ss - k k_s^2 / 2` of the unconstrained flow.
pub fn speed_g(p: &CurvatureProfile, dealias: bool) -> Result<GridFunction> {
    let (_, _, g) = speed_from_spectrum(p, &Spectrum::new(p.k()), dealias);
    check_finite(&g)?;
    Ok(g)
}

/// The nonlocal term from its lower-derivative form.
pub fn constraint_h(p: &CurvatureProfile) -> f64 {
    let spec = Spectrum::new(p.k());
    h_from_parts(p, &spec.deriv_grid(1), &spec.deriv_grid(2))
}

/// The nonlocal term in its `-(1 / 2 pi omega) integral k G ds` form.
pub fn constraint_h_from_speed(p: &CurvatureProfile, g: &GridFunction) -> f64 {
    -integrate(&p.k().mul(g)) / (2.0 * PI * p.omega() as f64)
}

/// `T(s) = integral_0^s k F ds'`; fails with `MeanNotZero` when `F` does not
/// satisfy the length constraint.
pub fn tangential_t(p: &CurvatureProfile, f: &GridFunction) -> Result<GridFunction> {
    if !f.same_grid(p.k()) {
        return Err(Error::GridMismatch);
    }
    antideriv(&p.k().mul(f))
}

/// Evaluates `G`, `h`, `T` and the full right-hand side at `p`.
pub fn flow_terms(p: &CurvatureProfile, dealias: bool) -> Result<FlowTerms> {
    let spec = Spectrum::new(p.k());
    let (ks, kss, g) = speed_from_spectrum(p, &spec, dealias);
    check_finite(&g)?;
    let h = h_from_parts(p, &ks, &kss);
    let f = g.offset(h);
    let kf = p.k().mul(&f);
    let constraint_integral = integrate(&kf);
    let tangential = antideriv(&kf)?;
    let fss = Spectrum::new(&f).deriv_grid(2);

    let k = p.k().samples();
    let rhs: Vec<f64> = (0..p.n())
        .map(|j| {
            fss.samples()[j]
                + k[j] * k[j] * f.samples()[j]
                + tangential.samples()[j] * ks.samples()[j]
        })
        .collect();
    let rhs = GridFunction::from_raw(rhs, p.length());
    check_finite(&rhs)?;
    Ok(FlowTerms {
        ks,
        kss,
        g,
        h,
        f,
        tangential,
        constraint_integral,
        rhs,
    })
}

/// `dk/dt` at `p`.
pub fn rhs(p: &CurvatureProfile) -> Result<GridFunction> {
    Ok(flow_terms(p, false)?.rhs)
}

/// Fourier symbol of the linearization at the circle,
/// `d6 + 2 kbar^2 d4 + kbar^4 d2  ->  -q^2 (q^2 - kbar^2)^2`.
pub fn linear_symbol(q: f64, kbar: f64) -> f64 {
    let q2 = q * q;
    -q2 * (q2 - kbar * kbar).powi(2)
}

/// Stored explicit data from the previous BDF2 step.
#[derive(Debug, Clone)]
struct ImexHistory {
    k_hat: Vec<Complex64>,
    n_hat: Vec<Complex64>,
    dt: f64,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub profile: CurvatureProfile,
    pub t: f64,
    /// Nonlocal term at `profile`.
    pub h: f64,
    pub step_index: u64,
    history: Option<ImexHistory>,
}

impl FlowState {
    pub fn new(profile: CurvatureProfile) -> Self {
        let h = constraint_h(&profile);
        FlowState {
            profile,
            t: 0.0,
            h,
            step_index: 0,
            history: None,
        }
    }
}

/// Advances one step of size `cfg.dt`.
pub fn step(state: &FlowState, cfg: &IntegratorConfig) -> Result<FlowState> {
    cfg.validate()?;
    let terms = flow_terms(&state.profile, cfg.dealias)?;
    advance(state, cfg, &terms)
}

/// Like [`step`], reusing terms already evaluated at `state.profile`.
pub(crate) fn advance(
    state: &FlowState,
    cfg: &IntegratorConfig,
    terms: &FlowTerms,
) -> Result<FlowState> {
    let p = &state.profile;
    let dt = cfg.dt;
    let t_new = state.t + dt;
    let (k_new, history) = match cfg.scheme {
        Scheme::ExplicitRk4 => (rk4(p, cfg, terms)?, None),
        Scheme::ImexEuler | Scheme::ImexBdf2 => {
            let kbar = p.target_curvature();
            // sub-noise modes are invisible to the derivatives in `rhs`;
            // dropping them here keeps the implicit and explicit parts consistent
            let k_spec = Spectrum::new(p.k()).denoised();
            let r_spec = Spectrum::new(&terms.rhs);
            let mu: Vec<f64> = (0..k_spec.len())
                .map(|j| linear_symbol(k_spec.wavenumber(j), kbar))
                .collect();
            let n_hat: Vec<Complex64> = r_spec
                .coeffs()
                .iter()
                .zip(k_spec.coeffs())
                .zip(&mu)
                .map(|((r, k), m)| r - k * *m)
                .collect();
            let prev = match (cfg.scheme, &state.history) {
                (Scheme::ImexBdf2, Some(hist)) if hist.dt == dt => Some(hist),
                _ => None,
            };
            let coeffs: Vec<Complex64> = match prev {
                None => k_spec
                    .coeffs()
                    .iter()
                    .zip(&n_hat)
                    .zip(&mu)
                    .map(|((k, nl), m)| (k + nl * dt) / (1.0 - dt * m))
                    .collect(),
                Some(hist) => (0..mu.len())
                    .map(|j| {
                        let explicit = k_spec.coeffs()[j] * 2.0 - hist.k_hat[j] * 0.5
                            + (n_hat[j] * 2.0 - hist.n_hat[j]) * dt;
                        explicit / (1.5 - dt * mu[j])
                    })
                    .collect(),
            };
            let history = (cfg.scheme == Scheme::ImexBdf2).then(|| ImexHistory {
                k_hat: k_spec.coeffs().to_vec(),
                n_hat,
                dt,
            });
            (
                Spectrum::from_coeffs(coeffs, p.length()).into_grid(),
                history,
            )
        }
    };

    let k_sup = k_new.max_abs();
    if !k_new.is_finite() || k_sup > cfg.blowup_cap_for(p) {
        return Err(Error::Blowup { t: t_new, k_sup });
    }
    let profile = p.with_k(k_new)?;
    let h = constraint_h(&profile);
    Ok(FlowState {
        profile,
        t: t_new,
        h,
        step_index: state.step_index + 1,
        history,
    })
}

fn rk4(p: &CurvatureProfile, cfg: &IntegratorConfig, terms: &FlowTerms) -> Result<GridFunction> {
    let dt = cfg.dt;
    let stage = |k: GridFunction| -> Result<GridFunction> {
        check_finite(&k)?;
        let q = CurvatureProfile::from_parts_unchecked(k, p.omega());
        Ok(flow_terms(&q, cfg.dealias)?.rhs)
    };
    let k0 = p.k();
    let r1 = terms.rhs.clone();
    let r2 = stage(k0.add(&r1.scale(0.5 * dt)))?;
    let r3 = stage(k0.add(&r2.scale(0.5 * dt)))?;
    let r4 = stage(k0.add(&r3.scale(dt)))?;
    let incr = r1
        .add(&r2.scale(2.0))
        .add(&r3.scale(2.0))
        .add(&r4)
        .scale(dt / 6.0);
    Ok(k0.add(&incr))
}

fn make_row(state: &FlowState, terms: &FlowTerms, with_closure: bool) -> Row {
    let p = &state.profile;
    let spacing = p.k().spacing();
    let ks_sq: f64 = terms.ks.samples().iter().map(|x| x * x).sum::<f64>() * spacing;
    let kss_sq: f64 = terms.kss.samples().iter().map(|x| x * x).sum::<f64>() * spacing;
    let g_sq: f64 = terms.g.samples().iter().map(|x| x * x).sum::<f64>() * spacing;
    Row {
        t: state.t,
        energy: 0.5 * ks_sq,
        h: terms.h,
        winding_integral: integrate(p.k()),
        constraint_integral: terms.constraint_integral,
        k_sup: p.k().max_abs(),
        sup_deviation: sup_deviation(p),
        kss_l2sq: kss_sq,
        closure_defect: with_closure.then(|| reconstruct(p, [0.0, 0.0], 0.0).closure_defect),
        g_l2sq: g_sq,
        h_g_integral: terms.h * integrate(&terms.g),
    }
}

/// Evolves `initial` until `t_max`, `energy_tol`, or a failure.
///
/// Every step contributes one row; failures end the run with a terminal
/// status instead of an error.
pub fn run(initial: CurvatureProfile, cfg: &IntegratorConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let target_steps = (cfg.stop.t_max / cfg.dt - 1e-9).ceil().max(0.0) as u64;
    let mut state = FlowState::new(initial.clone());
    let mut rows: Vec<Row> = Vec::new();
    let mut final_state = state.clone();

    let status = loop {
        let terms = match flow_terms(&state.profile, cfg.dealias) {
            Ok(t) => t,
            Err(e) => break status_from_error(e, state.t),
        };
        let sample = state.step_index.is_multiple_of(cfg.closure_stride as u64);
        let row = make_row(&state, &terms, sample);
        let energy = row.energy;
        rows.push(row);
        final_state = state.clone();

        if let Some(tol) = cfg.stop.energy_tol {
            if energy <= tol {
                break TerminalStatus::Converged;
            }
        }
        if state.step_index >= target_steps {
            let max_e = rows.iter().map(|r| r.energy).fold(0.0, f64::max);
            break if max_e <= STATIONARY_ENERGY {
                TerminalStatus::Stationary
            } else {
                TerminalStatus::TimeLimit
            };
        }
        state = match advance(&state, cfg, &terms) {
            Ok(s) => s,
            Err(e) => break status_from_error(e, state.t + cfg.dt),
        };
    };

    if let Some(last) = rows.last_mut() {
        if last.closure_defect.is_none() {
            last.closure_defect =
                Some(reconstruct(&final_state.profile, [0.0, 0.0], 0.0).closure_defect);
        }
    }

    Ok(RunRecord {
        length: initial.length(),
        omega: initial.omega(),
        n: initial.n(),
        integrator: *cfg,
        rows,
        status,
        final_profile: final_state.profile,
    })
}

fn status_from_error(e: Error, t: f64) -> TerminalStatus {
    match e {
        Error::Blowup { t, k_sup } => TerminalStatus::Blowup { t, k_sup },
        Error::NonFinite { .. } => TerminalStatus::Blowup {
            t,
            k_sup: f64::INFINITY,
        },
        other => TerminalStatus::Aborted {
            t,
            reason: other.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_circle, make_perturbed_circle, Mode};
    use approx::assert_abs_diff_eq;

    const TAU: f64 = 2.0 * PI;

    fn perturbed(eps: f64, m: u32, n: usize) -> CurvatureProfile {
        make_perturbed_circle(TAU, 1, n, &[Mode::new(m, eps, 0.0)]).unwrap()
    }

    #[test]
    fn circle_is_a_fixed_point() {
        for omega in [1, 2, -1] {
            let c = make_circle(TAU, omega, 64).unwrap();
            assert!(speed_g(&c, false).unwrap().max_abs() <= 1e-12);
            assert!(constraint_h(&c).abs() <= 1e-13);
            assert!(rhs(&c).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn speed_at_origin_matches_closed_form() {
        let eps = 0.1;
        let g = speed_g(&perturbed(eps, 2, 256), false).unwrap();
        let want = 12.0 * eps - 8.0 * eps * eps - 4.0 * eps.powi(3);
        assert_abs_diff_eq!(g.samples()[0], want, epsilon = 1e-10);
        assert_abs_diff_eq!(want, 1.116, epsilon = 1e-12);
    }

    #[test]
    fn speed_linearizes_to_fourth_order_operator() {
        let eps = 1e-6;
        for (q, kbar, omega, length) in [(3.0_f64, 1.0, 1, TAU), (2.0, 2.0, 2, TAU)] {
            let n = 64;
            let p =
                make_perturbed_circle(length, omega, n, &[Mode::new(q as u32, eps, 0.0)]).unwrap();
            let g = speed_g(&p, false).unwrap();
            let lin = (q.powi(4) - kbar * kbar * q * q) * eps;
            for (s, v) in p.k().nodes().zip(g.samples()) {
                assert!((v - lin * (q * s).cos()).abs() <= 1e-10 * lin.abs().max(1.0));
            }
        }
    }

    #[test]
    fn h_closed_form_and_alternate_form() {
        let eps = 0.1;
        let p = perturbed(eps, 2, 256);
        let h = constraint_h(&p);
        assert_abs_diff_eq!(h, -eps * eps + 1.75 * eps.powi(4), epsilon = 1e-12);
        assert_abs_diff_eq!(h, -0.009825, epsilon = 1e-12);
        let g = speed_g(&p, false).unwrap();
        assert!((constraint_h_from_speed(&p, &g) - h).abs() <= 1e-10);
    }

    #[test]
    fn tangential_term_examples() {
        let c = make_circle(TAU, 1, 32).unwrap();
        let zero = GridFunction::constant(32, TAU, 0.0).unwrap();
        assert_eq!(tangential_t(&c, &zero).unwrap().max_abs(), 0.0);

        let p = perturbed(0.1, 2, 256);
        let terms = flow_terms(&p, false).unwrap();
        assert!(terms.constraint_integral.abs() <= 1e-10);

        // Oracle: Fourier series of kF is a trigonometric polynomial of degree 6
        // in s (modes 2, 4, 6); its primitive is taken term by term from
        // coefficients computed by exact quadrature on a fine grid.
        let eps: f64 = 0.1;
        let kf = |s: f64| {
            let k = 1.0 + eps * (2.0 * s).cos();
            let ks = -2.0 * eps * (2.0 * s).sin();
            let kss = -4.0 * eps * (2.0 * s).cos();
            let ks4 = 16.0 * eps * (2.0 * s).cos();
            let g = ks4 + k * k * kss - 0.5 * k * ks * ks;
            k * (g + (-eps * eps + 1.75 * eps.powi(4)))
        };
        let fine = 64;
        let mut prim = vec![0.0; 256];
        for m in 1..=8 {
            let (mut a, mut b) = (0.0, 0.0);
            for i in 0..fine {
                let s = TAU * i as f64 / fine as f64;
                a += kf(s) * (m as f64 * s).cos();
                b += kf(s) * (m as f64 * s).sin();
            }
            a *= 2.0 / fine as f64;
            b *= 2.0 / fine as f64;
            for (j, out) in prim.iter_mut().enumerate() {
                let s = TAU * j as f64 / 256.0;
                let mf = m as f64;
                *out += a * (mf * s).sin() / mf + b * (1.0 - (mf * s).cos()) / mf;
            }
        }
        for (got, want) in terms.tangential.samples().iter().zip(&prim) {
            assert!((got - want).abs() <= 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn broken_constraint_is_reported() {
        let p = perturbed(0.1, 2, 64);
        let g = speed_g(&p, false).unwrap();
        assert!(matches!(
            tangential_t(&p, &g.offset(0.5)),
            Err(Error::MeanNotZero { .. })
        ));
    }

    #[test]
    fn linearized_rhs_eigenvalue() {
        let eps = 1e-6;
        for q in [2u32, 3, 4] {
            let p = perturbed(eps, q, 64);
            let r = rhs(&p).unwrap();
            let qf = q as f64;
            let lambda = linear_symbol(qf, 1.0);
            assert_abs_diff_eq!(lambda, -qf * qf * (qf * qf - 1.0).powi(2), epsilon = 1e-9);
            let scale = (eps * lambda).abs();
            for (s, v) in p.k().nodes().zip(r.samples()) {
                assert!((v - eps * lambda * (qf * s).cos()).abs() <= 1e-3 * scale);
            }
        }
    }

    #[test]
    fn rhs_conserves_winding() {
        let p = make_perturbed_circle(
            TAU,
            1,
            128,
            &[
                Mode::new(2, 0.05, 0.3),
                Mode::new(3, 0.02, 1.0),
                Mode::new(5, 0.01, 2.0),
            ],
        )
        .unwrap();
        assert!(integrate(&rhs(&p).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn every_scheme_keeps_the_circle() {
        let c = make_circle(TAU, 1, 32).unwrap();
        for scheme in [Scheme::ImexEuler, Scheme::ImexBdf2, Scheme::ExplicitRk4] {
            let cfg = IntegratorConfig {
                scheme,
                dt: if scheme == Scheme::ExplicitRk4 {
                    1e-7
                } else {
                    1e-4
                },
                ..Default::default()
            };
            let mut s = FlowState::new(c.clone());
            for _ in 0..200 {
                s = step(&s, &cfg).unwrap();
            }
            assert!(crate::curve::sup_deviation(&s.profile) <= 1e-12);
        }
    }

    #[test]
    fn blowup_cap_triggers() {
        let p = make_perturbed_circle(TAU, 1, 64, &[Mode::new(2, 0.5, 0.0)]).unwrap();
        let cfg = IntegratorConfig {
            stop: StopCriteria {
                t_max: 1.0,
                energy_tol: None,
                blowup_cap: Some(1.2),
            },
            ..Default::default()
        };
        assert!(matches!(
            step(&FlowState::new(p), &cfg),
            Err(Error::Blowup { .. })
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = IntegratorConfig {
            dt: 0.0,
            ..Default::default()
        };
        let s = FlowState::new(make_circle(TAU, 1, 32).unwrap());
        assert!(matches!(
            step(&s, &cfg),
            Err(Error::InvalidIntegrator("dt"))
        ));
    }

    #[test]
    fn run_from_circle_is_stationary() {
        let cfg = IntegratorConfig {
            stop: StopCriteria {
                t_max: 0.05,
                energy_tol: None,
                blowup_cap: None,
            },
            ..Default::default()
        };
        let rec = run(make_circle(TAU, 1, 64).unwrap(), &cfg).unwrap();
        assert_eq!(rec.status, TerminalStatus::Stationary);
        assert_eq!(rec.rows.len(), 501);
        assert!(rec.rows.iter().all(|r| r.energy <= 1e-20));
    }
}
