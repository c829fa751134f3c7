//! Closed planar curves described by their arclength curvature.
//!
//! The length `L0` is the domain length of the curvature grid and never
//! changes; position is recovered on demand with [`reconstruct`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{deriv, integrate, primitive_unchecked, GridFunction, Spectrum};

/// Allowed gap between `integrate(k) / 2pi` and the stored winding number.
pub const WINDING_TOL: f64 = 1e-6;

/// One cosine term `amplitude * cos(2 pi m s / L0 + phase)` of a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub m: u32,
    pub amplitude: f64,
    pub phase: f64,
}

impl Mode {
    pub fn new(m: u32, amplitude: f64, phase: f64) -> Self {
        Mode {
            m,
            amplitude,
            phase,
        }
    }
}

/// Curvature samples of a closed curve with fixed length and winding number.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    k: GridFunction,
    omega: i64,
}

impl CurvatureProfile {
    /// Checks `omega != 0` and Gauss-Bonnet consistency of `k` with `omega`.
    pub fn new(k: GridFunction, omega: i64) -> Result<Self> {
        if omega == 0 {
            return Err(Error::ZeroWinding);
        }
        let measured = integrate(&k) / (2.0 * PI);
        if (measured - omega as f64).abs() > WINDING_TOL {
            return Err(Error::WindingMismatch {
                expected: omega,
                measured,
            });
        }
        Ok(CurvatureProfile { k, omega })
    }

    pub(crate) fn from_parts_unchecked(k: GridFunction, omega: i64) -> Self {
        CurvatureProfile { k, omega }
    }

    pub fn k(&self) -> &GridFunction {
        &self.k
    }

    pub fn omega(&self) -> i64 {
        self.omega
    }

    pub fn length(&self) -> f64 {
        self.k.domain_length()
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// `2 pi omega / L0`, fixed for the lifetime of the profile.
    pub fn target_curvature(&self) -> f64 {
        2.0 * PI * self.omega as f64 / self.length()
    }

    /// Replaces the curvature samples, keeping length and winding.
    pub fn with_k(&self, k: GridFunction) -> Result<Self> {
        if !k.same_grid(&self.k) {
            return Err(Error::GridMismatch);
        }
        CurvatureProfile::new(k, self.omega)
    }
}

/// The `omega`-fold circle of length `length`: `k == 2 pi omega / length`.
pub fn make_circle(length: f64, omega: i64, n: usize) -> Result<CurvatureProfile> {
    if omega == 0 {
        return Err(Error::ZeroWinding);
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidLength(length));
    }
    let kbar = 2.0 * PI * omega as f64 / length;
    CurvatureProfile::new(GridFunction::constant(n, length, kbar)?, omega)
}

/// Circle curvature plus mean-zero cosine modes.
pub fn make_perturbed_circle(
    length: f64,
    omega: i64,
    n: usize,
    modes: &[Mode],
) -> Result<CurvatureProfile> {
    if let Some(bad) = modes.iter().find(|m| m.m == 0) {
        return Err(Error::InvalidMode(bad.m as i64));
    }
    let circle = make_circle(length, omega, n)?;
    let kbar = circle.target_curvature();
    let k = GridFunction::from_fn(n, length, |s| {
        kbar + modes
            .iter()
            .map(|md| md.amplitude * (2.0 * PI * md.m as f64 * s / length + md.phase).cos())
            .sum::<f64>()
    })?;
    CurvatureProfile::new(k, omega)
}

/// Total turning divided by `2 pi`.
pub fn winding(p: &CurvatureProfile) -> f64 {
    integrate(&p.k) / (2.0 * PI)
}

/// `E = 1/2 * integral of k_s^2`.
pub fn energy(p: &CurvatureProfile) -> f64 {
    0.5 * ks_l2sq(p)
}

/// `integral of k_s^2`.
pub fn ks_l2sq(p: &CurvatureProfile) -> f64 {
    let ks = Spectrum::new(&p.k).deriv_grid(1);
    integrate(&ks.mul(&ks))
}

pub fn mean_curvature(p: &CurvatureProfile) -> f64 {
    integrate(&p.k) / p.length()
}

/// `max |k - kbar|` over the nodes, with `kbar = 2 pi omega / L0`.
pub fn sup_deviation(p: &CurvatureProfile) -> f64 {
    let kbar = p.target_curvature();
    p.k.samples()
        .iter()
        .fold(0.0, |m: f64, &x| m.max((x - kbar).abs()))
}

/// Planar curve rebuilt from a curvature profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedCurve {
    /// `N + 1` positions at `s_j = j L0 / N`, the last one at `s = L0`.
    pub points: Vec<[f64; 2]>,
    /// Tangent angle at the same `N + 1` stations.
    pub theta: Vec<f64>,
    pub closure_defect: f64,
    pub best_fit_center: [f64; 2],
    pub best_fit_radius: f64,
}

impl ReconstructedCurve {
    pub fn total_turning(&self) -> f64 {
        self.theta[self.theta.len() - 1] - self.theta[0]
    }
}

/// Integrates `theta_s = k` and `gamma_s = (cos theta, sin theta)` spectrally.
pub fn reconstruct(
    p: &CurvatureProfile,
    base_point: [f64; 2],
    base_angle: f64,
) -> ReconstructedCurve {
    let n = p.n();
    let length = p.length();
    let h = length / n as f64;
    let kbar = mean_curvature(p);

    let wiggle = primitive_unchecked(&Spectrum::new(&p.k));
    let mut theta: Vec<f64> = wiggle
        .samples()
        .iter()
        .enumerate()
        .map(|(j, w)| base_angle + kbar * j as f64 * h + w)
        .collect();
    theta.push(base_angle + kbar * length);

    let tx = GridFunction::from_raw(theta[..n].iter().map(|t| t.cos()).collect(), length);
    let ty = GridFunction::from_raw(theta[..n].iter().map(|t| t.sin()).collect(), length);
    let mean_x = integrate(&tx) / length;
    let mean_y = integrate(&ty) / length;
    let px = primitive_unchecked(&Spectrum::new(&tx));
    let py = primitive_unchecked(&Spectrum::new(&ty));

    let mut points: Vec<[f64; 2]> = (0..n)
        .map(|j| {
            let s = j as f64 * h;
            [
                base_point[0] + mean_x * s + px.samples()[j],
                base_point[1] + mean_y * s + py.samples()[j],
            ]
        })
        .collect();
    points.push([
        base_point[0] + mean_x * length,
        base_point[1] + mean_y * length,
    ]);

    let closure_defect = mean_x.hypot(mean_y) * length;
    let (best_fit_center, best_fit_radius) = fit_circle(&points[..n]);
    ReconstructedCurve {
        points,
        theta,
        closure_defect,
        best_fit_center,
        best_fit_radius,
    }
}

/// Algebraic (Kasa) circle fit: least squares on `x^2 + y^2 + D x + E y + F = 0`.
pub fn fit_circle(points: &[[f64; 2]]) -> ([f64; 2], f64) {
    let m = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / m;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / m;

    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for p in points {
        let (x, y) = (p[0] - cx, p[1] - cy);
        let row = [x, y, 1.0];
        let rhs = -(x * x + y * y);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let [d, e, f] = solve3(ata, atb);
    let (ux, uy) = (-0.5 * d, -0.5 * e);
    let radius = (ux * ux + uy * uy - f).max(0.0).sqrt();
    ([cx + ux, cy + uy], radius)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *dst -= factor * src;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// `integral of k_ss^2`.
pub fn kss_l2sq(p: &CurvatureProfile) -> f64 {
    let kss = deriv(&p.k, 2).expect("profile samples are finite");
    integrate(&kss.mul(&kss))
}
