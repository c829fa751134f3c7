//! Randomized checks of the periodic-function inequalities behind the
//! convergence argument, and empirical fits of their unspecified constants.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{energy, ks_l2sq, make_perturbed_circle, CurvatureProfile, Mode};
use crate::error::{Error, Result};
use crate::flow::speed_g;
use crate::grid::{integrate, GridFunction, Spectrum, MEAN_ZERO_TOL};

/// Absolute slack for the inequalities with explicit constants.
pub const INEQ_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum AmplitudeLaw {
    /// Each mode amplitude uniform on `[0, a_max)`.
    Uniform { a_max: f64 },
    /// Mode `m` amplitude uniform on `[0, a_max * m^-power)`.
    Decaying { a_max: f64, power: f64 },
}

/// Seeded generator of perturbed-circle curvature profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSampler {
    pub seed: u64,
    /// Lowest perturbed mode; 1 includes the translation-like mode.
    pub min_mode: u32,
    pub max_mode: u32,
    pub amplitude_law: AmplitudeLaw,
    pub length: f64,
    pub omega: i64,
    pub n: usize,
}

impl ProfileSampler {
    pub fn new(seed: u64, max_mode: u32, amplitude_law: AmplitudeLaw) -> Self {
        ProfileSampler {
            seed,
            min_mode: 1,
            max_mode,
            amplitude_law,
            length: 2.0 * PI,
            omega: 1,
            n: 128,
        }
    }

    /// The first `count` profiles of this sampler's sequence.
    pub fn profiles(&self, count: usize) -> Result<Vec<CurvatureProfile>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let modes: Vec<Mode> = (self.min_mode..=self.max_mode)
                    .map(|m| {
                        let cap = match self.amplitude_law {
                            AmplitudeLaw::Uniform { a_max } => a_max,
                            AmplitudeLaw::Decaying { a_max, power } => {
                                a_max * (m as f64).powf(-power)
                            }
                        };
                        let amplitude = cap * rng.gen::<f64>();
                        let phase = 2.0 * PI * rng.gen::<f64>();
                        Mode::new(m, amplitude, phase)
                    })
                    .collect();
                make_perturbed_circle(self.length, self.omega, self.n, &modes)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFitReport {
    pub inequality: String,
    pub samples: usize,
    /// Largest observed `lhs / rhs` (smallest for lower bounds).
    pub worst_ratio: f64,
    pub fitted_constant: f64,
    /// Second constant of two-constant inequalities.
    pub paired_constant: Option<f64>,
    pub violations: usize,
}

/// Both sides of the two mean-zero periodic inequalities
/// `integral f^2 <= (P^2 / 4 pi^2) integral f'^2` and
/// `max f^2 <= (P / 2 pi) integral f'^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PswSides {
    pub lhs_l2: f64,
    pub rhs_l2: f64,
    pub lhs_sup: f64,
    pub rhs_sup: f64,
}

pub fn check_psw(f: &GridFunction) -> Result<PswSides> {
    let period = f.domain_length();
    let integral = integrate(f);
    let tolerance = MEAN_ZERO_TOL * (1.0 + f.max_abs() * period);
    if integral.abs() > tolerance {
        return Err(Error::MeanNotZero {
            integral,
            tolerance,
        });
    }
    let df = Spectrum::new(f).deriv_grid(1);
    let df_sq = integrate(&df.mul(&df));
    Ok(PswSides {
        lhs_l2: integrate(&f.mul(f)),
        rhs_l2: period * period / (4.0 * PI * PI) * df_sq,
        lhs_sup: f.max_abs().powi(2),
        rhs_sup: period / (2.0 * PI) * df_sq,
    })
}

/// `(L max|k|, sqrt(L^3 integral k_s^2) + 2 pi |omega|)`.
pub fn check_ksup(p: &CurvatureProfile) -> (f64, f64) {
    let length = p.length();
    let lhs = length * p.k().max_abs();
    let rhs = (length.powi(3) * ks_l2sq(p)).sqrt() + 2.0 * PI * (p.omega() as f64).abs();
    (lhs, rhs)
}

fn ratio_report(name: &str, pairs: &[(f64, f64)], scale: f64) -> ConstantFitReport {
    let worst_ratio = pairs
        .iter()
        .filter(|(_, r)| *r > 0.0)
        .map(|(l, r)| l / r)
        .fold(0.0, f64::max);
    ConstantFitReport {
        inequality: name.to_string(),
        samples: pairs.len(),
        worst_ratio,
        fitted_constant: worst_ratio * scale,
        paired_constant: None,
        violations: pairs.iter().filter(|(l, r)| *l > r + INEQ_SLACK).count(),
    }
}

/// Runs both PSW inequalities on `k - kbar` of every sampled profile.
///
/// The fitted constants are the smallest that fit the sample, in the same
/// units as `P^2 / 4 pi^2` and `P / 2 pi`.
pub fn psw_suite(sampler: &ProfileSampler, n_samples: usize) -> Result<[ConstantFitReport; 2]> {
    let profiles = sampler.profiles(n_samples)?;
    let sides: Vec<PswSides> = profiles
        .par_iter()
        .map(|p| check_psw(&p.k().offset(-p.target_curvature())))
        .collect::<Result<_>>()?;
    let period = sampler.length;
    let l2: Vec<(f64, f64)> = sides.iter().map(|s| (s.lhs_l2, s.rhs_l2)).collect();
    let sup: Vec<(f64, f64)> = sides.iter().map(|s| (s.lhs_sup, s.rhs_sup)).collect();
    Ok([
        ratio_report("psw_l2", &l2, period * period / (4.0 * PI * PI)),
        ratio_report("psw_sup", &sup, period / (2.0 * PI)),
    ])
}

pub fn ksup_suite(sampler: &ProfileSampler, n_samples: usize) -> Result<ConstantFitReport> {
    let profiles = sampler.profiles(n_samples)?;
    let pairs: Vec<(f64, f64)> = profiles.par_iter().map(check_ksup).collect();
    Ok(ratio_report("ksup", &pairs, 1.0))
}

/// `(integral G^2, integral k_s4^2, E)` for one profile.
pub fn g2_quantities(p: &CurvatureProfile) -> (f64, f64, f64) {
    let g = speed_g(p, false).expect("finite profile has a finite speed");
    let ks4 = Spectrum::new(p.k()).deriv_grid(4);
    (integrate(&g.mul(&g)), integrate(&ks4.mul(&ks4)), energy(p))
}

/// Empirical constants for `integral G^2 >= c_w integral k_s4^2 - c E^2 (1 + E^3)`.
///
/// `fitted_constant` is the largest `c_w` that holds with `c = 0`;
/// `paired_constant` is the smallest `c` that makes `c_w = 1` hold.
pub fn empirical_g2_study(sampler: &ProfileSampler, n_samples: usize) -> Result<ConstantFitReport> {
    if n_samples < 100 {
        return Err(Error::TooFewSamples {
            min: 100,
            got: n_samples,
        });
    }
    let profiles = sampler.profiles(n_samples)?;
    let triples: Vec<(f64, f64, f64)> = profiles.par_iter().map(g2_quantities).collect();
    let c_omega = triples
        .iter()
        .filter(|t| t.1 > 0.0)
        .map(|(g2, a, _)| g2 / a)
        .fold(f64::INFINITY, f64::min);
    let c_pair = triples
        .iter()
        .filter(|t| t.2 > 0.0)
        .map(|(g2, a, e)| (a - g2) / (e * e * (1.0 + e.powi(3))))
        .fold(0.0, f64::max);
    let c_omega = if c_omega.is_finite() { c_omega } else { 0.0 };
    Ok(ConstantFitReport {
        inequality: "g2_lower_bound".to_string(),
        samples: triples.len(),
        worst_ratio: c_omega,
        fitted_constant: c_omega,
        paired_constant: Some(c_pair),
        violations: 0,
    })
}

/// Product of curvature derivatives `k_{s^i1} * ... * k_{s^in}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub orders: Vec<u32>,
}

impl Monomial {
    pub fn new(orders: Vec<u32>) -> Self {
        Monomial { orders }
    }

    /// Number of factors.
    pub fn factors(&self) -> usize {
        self.orders.len()
    }

    /// Total number of derivatives.
    pub fn derivatives(&self) -> u32 {
        self.orders.iter().sum()
    }

    /// Interpolation exponent `p = (m + n/2 - 1) / l`.
    pub fn exponent(&self, l: u32) -> f64 {
        (self.derivatives() as f64 + 0.5 * self.factors() as f64 - 1.0) / l as f64
    }

    pub fn evaluate(&self, p: &CurvatureProfile) -> GridFunction {
        let spec = Spectrum::new(p.k());
        let mut out = GridFunction::constant(p.n(), p.length(), 1.0).expect("valid grid");
        for &order in &self.orders {
            let factor = if order == 0 {
                p.k().clone()
            } else {
                spec.deriv_grid(order)
            };
            out = out.mul(&factor);
        }
        out
    }
}

/// Scale-invariant Sobolev norm `sum_{i <= l} L^{i + 1/2} ||k_{s^i}||_2`.
pub fn scaled_sobolev_norm(p: &CurvatureProfile, l: u32) -> f64 {
    let spec = Spectrum::new(p.k());
    let length = p.length();
    (0..=l)
        .map(|i| {
            let d = if i == 0 {
                p.k().clone()
            } else {
                spec.deriv_grid(i)
            };
            length.powf(i as f64 + 0.5) * integrate(&d.mul(&d)).sqrt()
        })
        .sum()
}

/// `(integral |P|, L^(1-m-n) ||k||_2^(n-p) ||k||_{l,2}^p)` for one profile.
pub fn interpolation_sides(p: &CurvatureProfile, term: &Monomial, l: u32) -> (f64, f64) {
    let n = term.factors() as f64;
    let m = term.derivatives() as f64;
    let expo = term.exponent(l);
    let lhs = integrate(&term.evaluate(p).map(f64::abs));
    let norm0 = scaled_sobolev_norm(p, 0);
    let norm_l = scaled_sobolev_norm(p, l);
    let rhs = p.length().powf(1.0 - m - n) * norm0.powf(n - expo) * norm_l.powf(expo);
    (lhs, rhs)
}

/// Worst observed ratio of [`interpolation_sides`]; an estimate of the constant.
pub fn interpolation_report(
    sampler: &ProfileSampler,
    term: &Monomial,
    l: u32,
    n_samples: usize,
) -> Result<ConstantFitReport> {
    if l == 0 {
        return Err(Error::InvalidMonomial("l must be at least 1".into()));
    }
    if term.factors() < 2 {
        return Err(Error::InvalidMonomial("need at least two factors".into()));
    }
    if let Some(&bad) = term.orders.iter().find(|&&o| o + 1 > l) {
        return Err(Error::InvalidMonomial(format!(
            "derivative order {bad} exceeds l - 1 = {}",
            l - 1
        )));
    }
    let p = term.exponent(l);
    if p >= 2.0 {
        return Err(Error::RegimeViolation { p });
    }
    if n_samples == 0 {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let profiles = sampler.profiles(n_samples)?;
    let pairs: Vec<(f64, f64)> = profiles
        .par_iter()
        .map(|q| interpolation_sides(q, term, l))
        .collect();
    let mut report = ratio_report(&format!("interpolation{:?}_l{l}", term.orders), &pairs, 1.0);
    report.violations = 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::make_circle;
    use approx::assert_abs_diff_eq;

    const TAU: f64 = 2.0 * PI;

    #[test]
    fn psw_single_harmonic_equality() {
        for period in [TAU, 3.0, 10.0] {
            let f = GridFunction::from_fn(64, period, |s| (2.0 * PI * s / period).sin()).unwrap();
            let sides = check_psw(&f).unwrap();
            assert!((sides.lhs_l2 - sides.rhs_l2).abs() <= 1e-10);
        }
    }

    #[test]
    fn psw_two_harmonic_ratio() {
        let f = GridFunction::from_fn(64, TAU, |s| s.sin() + 0.3 * (3.0 * s).sin()).unwrap();
        let sides = check_psw(&f).unwrap();
        // Parseval: integral f^2 = pi (1 + 0.09), integral f'^2 = pi (1 + 0.81)
        assert_abs_diff_eq!(sides.lhs_l2 / sides.rhs_l2, 1.09 / 1.81, epsilon = 1e-12);
        assert!(sides.lhs_sup <= sides.rhs_sup);
    }

    #[test]
    fn psw_rejects_nonzero_mean() {
        let one = GridFunction::constant(32, TAU, 1.0).unwrap();
        assert!(matches!(check_psw(&one), Err(Error::MeanNotZero { .. })));
    }

    #[test]
    fn ksup_examples() {
        for omega in [1, 2, 3] {
            let (l, r) = check_ksup(&make_circle(TAU, omega, 64).unwrap());
            assert_abs_diff_eq!(l, 2.0 * PI * omega as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(r, 2.0 * PI * omega as f64, epsilon = 1e-12);
        }
        let p = make_perturbed_circle(TAU, 1, 256, &[Mode::new(2, 0.1, 0.0)]).unwrap();
        let (l, r) = check_ksup(&p);
        assert_abs_diff_eq!(l, TAU * 1.1, epsilon = 1e-12);
        let want = (TAU.powi(3) * 0.04 * PI).sqrt() + TAU;
        assert_abs_diff_eq!(r, want, epsilon = 1e-10);
        assert!(l < r);
    }

    #[test]
    fn sampler_is_reproducible() {
        let s = ProfileSampler::new(
            7,
            8,
            AmplitudeLaw::Decaying {
                a_max: 0.3,
                power: 1.0,
            },
        );
        assert_eq!(s.profiles(5).unwrap(), s.profiles(5).unwrap());
        let other = ProfileSampler {
            seed: 8,
            ..s.clone()
        };
        assert_ne!(s.profiles(1).unwrap(), other.profiles(1).unwrap());
    }

    #[test]
    fn g2_quantities_on_circle_and_single_mode() {
        let (g2, a, e) = g2_quantities(&make_circle(TAU, 1, 64).unwrap());
        assert!(g2 <= 1e-24 && a <= 1e-24 && e <= 1e-24);
        for q in [2u32, 3, 5] {
            let p = make_perturbed_circle(TAU, 1, 64, &[Mode::new(q, 1e-5, 0.0)]).unwrap();
            let (g2, a, _) = g2_quantities(&p);
            let qf = q as f64;
            let want = (1.0 - 1.0 / (qf * qf)).powi(2);
            assert!((g2 / a - want).abs() <= 1e-3 * want);
        }
    }

    #[test]
    fn g2_study_needs_samples() {
        let s = ProfileSampler::new(1, 4, AmplitudeLaw::Uniform { a_max: 0.1 });
        assert!(matches!(
            empirical_g2_study(&s, 10),
            Err(Error::TooFewSamples { .. })
        ));
        let a = empirical_g2_study(&s, 100).unwrap();
        let b = empirical_g2_study(&s, 100).unwrap();
        assert_eq!(a, b);
        assert!(a.fitted_constant > 0.0);
    }

    #[test]
    fn interpolation_examples() {
        let term = Monomial::new(vec![0, 1, 1]);
        assert_abs_diff_eq!(term.exponent(2), 1.25, epsilon = 1e-15);
        let c = make_circle(TAU, 1, 64).unwrap();
        let (lhs, rhs) = interpolation_sides(&c, &term, 2);
        assert!(lhs <= 1e-24);
        assert!(rhs > 0.0);

        // integral |1 + 0.1 cos 2s| * 0.04 sin^2 2s ds = 0.04 pi
        let p = make_perturbed_circle(TAU, 1, 128, &[Mode::new(2, 0.1, 0.0)]).unwrap();
        let (lhs, rhs) = interpolation_sides(&p, &term, 2);
        assert_abs_diff_eq!(lhs, 0.04 * PI, epsilon = 1e-12);
        assert!((lhs / rhs).is_finite() && lhs / rhs > 0.0);
    }

    #[test]
    fn interpolation_regime_errors() {
        let s = ProfileSampler::new(3, 4, AmplitudeLaw::Uniform { a_max: 0.1 });
        // m + n/2 = 4 + 1 = 5 >= 2 l + 1 = 5
        let err = interpolation_report(&s, &Monomial::new(vec![2, 2]), 2, 10);
        assert!(matches!(err, Err(Error::InvalidMonomial(_))));
        let err = interpolation_report(&s, &Monomial::new(vec![1, 1, 1, 1, 1, 1]), 2, 10);
        assert!(matches!(err, Err(Error::RegimeViolation { .. })));
        let a = interpolation_report(&s, &Monomial::new(vec![0, 1, 1]), 2, 20).unwrap();
        let b = interpolation_report(&s, &Monomial::new(vec![0, 1, 1]), 2, 20).unwrap();
        assert_eq!(a, b);
    }
}
