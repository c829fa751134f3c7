//! Periodic spectral calculus on uniform grids.
//!
//! A [`GridFunction`] holds samples of a real periodic function at the nodes
//! `s_j = j L / N`. Derivatives and primitives act on the trigonometric
//! interpolant of those samples, so every operation here is exact (to
//! round-off) for band-limited input.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Smallest node count accepted by [`GridFunction::new`].
pub const MIN_NODES: usize = 16;

/// Relative tolerance for the mean-zero precondition of [`antideriv`].
pub const MEAN_ZERO_TOL: f64 = 1e-10;

/// Coefficients below this fraction of the largest one are treated as FFT
/// round-off and dropped before differentiating. Without this, the `q^4`
/// factor of a fourth derivative turns 1e-16 noise into 1e-7 errors at
/// `N = 256`.
pub const NOISE_FLOOR: f64 = 1e-14;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_forward(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf
}

fn fft_inverse(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(&mut coeffs);
    let scale = 1.0 / n as f64;
    coeffs.into_iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber index of FFT slot `j`; the Nyquist slot maps to `+n/2`.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// N uniform samples of a real periodic function on `[0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
    length: f64,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>, length: f64) -> Result<Self> {
        let n = samples.len();
        if n < MIN_NODES || !n.is_multiple_of(2) {
            return Err(Error::InvalidNodeCount { n, min: MIN_NODES });
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidLength(length));
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GridFunction { samples, length })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(n: usize, length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = length / n as f64;
        Self::new((0..n).map(|j| f(j as f64 * h)).collect(), length)
    }

    pub fn constant(n: usize, length: f64, value: f64) -> Result<Self> {
        Self::new(vec![value; n], length)
    }

    /// Builds without validation; callers guarantee the grid invariants.
    pub(crate) fn from_raw(samples: Vec<f64>, length: f64) -> Self {
        debug_assert!(samples.len() >= MIN_NODES && samples.len().is_multiple_of(2));
        GridFunction { samples, length }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn domain_length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.samples.len() as f64
    }

    /// Node positions `s_j = j L / N`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        (0..self.len()).map(move |j| j as f64 * h)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|x| x.is_finite())
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len() && self.length == other.length
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        Self::from_raw(self.samples.iter().map(|&x| f(x)).collect(), self.length)
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert!(self.same_grid(other), "grid mismatch");
        Self::from_raw(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            self.length,
        )
    }

    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|x| c * x)
    }

    pub fn offset(&self, c: f64) -> GridFunction {
        self.map(|x| x + c)
    }
}

/// Discrete Fourier coefficients of a [`GridFunction`].
///
/// Computing the transform once and reading several derivatives off it is
/// what the flow engine does on every step.
#[derive(Debug, Clone)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
    length: f64,
}

impl Spectrum {
    pub fn new(f: &GridFunction) -> Self {
        Spectrum {
            coeffs: fft_forward(&f.samples),
            length: f.length,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn domain_length(&self) -> f64 {
        self.length
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn from_coeffs(coeffs: Vec<Complex64>, length: f64) -> Self {
        Spectrum { coeffs, length }
    }

    /// Angular wavenumber `2 pi j / L` of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * mode_index(j, self.len()) as f64 / self.length
    }

    /// Multiplies every coefficient by `symbol(wavenumber)`.
    pub fn apply(&self, symbol: impl Fn(f64) -> f64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * symbol(self.wavenumber(j)))
            .collect();
        Spectrum::from_coeffs(coeffs, self.length)
    }

    /// Zeroes the modes under [`NOISE_FLOOR`] relative to the largest.
    pub fn denoised(&self) -> Spectrum {
        let floor = NOISE_FLOOR * self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.norm() < floor {
                    Complex64::new(0.0, 0.0)
                } else {
                    *c
                }
            })
            .collect();
        Spectrum::from_coeffs(coeffs, self.length)
    }

    /// Order-`order` derivative in coefficient space, applied to
    /// [`Spectrum::denoised`]. Order 0 is the identity.
    pub fn derivative(&self, order: u32) -> Spectrum {
        if order == 0 {
            return self.clone();
        }
        let n = self.len();
        let clean = self.denoised();
        let unit = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let coeffs = clean
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if order % 2 == 1 && j == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * unit * self.wavenumber(j).powi(order as i32)
                }
            })
            .collect();
        Spectrum::from_coeffs(coeffs, self.length)
    }

    /// Zeroes every mode with `|index| > N/3`.
    pub fn truncated(&self) -> Spectrum {
        let n = self.len();
        let cutoff = (n / 3) as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if mode_index(j, n).abs() > cutoff {
                    Complex64::new(0.0, 0.0)
                } else {
                    c
                }
            })
            .collect();
        Spectrum::from_coeffs(coeffs, self.length)
    }

    pub fn to_grid(&self) -> GridFunction {
        GridFunction::from_raw(fft_inverse(self.coeffs.clone()), self.length)
    }

    pub fn into_grid(self) -> GridFunction {
        let length = self.length;
        GridFunction::from_raw(fft_inverse(self.coeffs), length)
    }

    /// Spectral derivative evaluated back on the grid.
    pub fn deriv_grid(&self, order: u32) -> GridFunction {
        self.derivative(order).into_grid()
    }
}

/// Spectral derivative of order `order >= 1`. Odd orders drop the Nyquist mode.
pub fn deriv(f: &GridFunction, order: u32) -> Result<GridFunction> {
    if order == 0 {
        return Err(Error::ZeroOrder);
    }
    if let Some(index) = f.samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(Spectrum::new(f).deriv_grid(order))
}

/// Periodic rectangle rule, `(L/N) * sum`.
pub fn integrate(f: &GridFunction) -> f64 {
    f.spacing() * f.samples.iter().sum::<f64>()
}

/// Periodic primitive `F` with `F(0) = 0` and `F' = f`.
///
/// Fails with [`Error::MeanNotZero`] unless
/// `|integrate(f)| <= MEAN_ZERO_TOL * (1 + max|f| * L)`.
pub fn antideriv(f: &GridFunction) -> Result<GridFunction> {
    let integral = integrate(f);
    let tolerance = MEAN_ZERO_TOL * (1.0 + f.max_abs() * f.length);
    if integral.abs() > tolerance || !integral.is_finite() {
        return Err(Error::MeanNotZero {
            integral,
            tolerance,
        });
    }
    Ok(primitive_unchecked(&Spectrum::new(f)))
}

/// Primitive of the non-constant part of a spectrum, pinned to zero at `s = 0`.
pub(crate) fn primitive_unchecked(spec: &Spectrum) -> GridFunction {
    let n = spec.len();
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            if j == 0 || j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                c / Complex64::new(0.0, spec.wavenumber(j))
            }
        })
        .collect();
    let mut samples = fft_inverse(coeffs);
    let base = samples[0];
    for x in &mut samples {
        *x -= base;
    }
    GridFunction::from_raw(samples, spec.length)
}

/// Two-thirds rule: zero every mode with `|index| > N/3`.
pub fn dealias(f: &GridFunction) -> GridFunction {
    Spectrum::new(f).truncated().into_grid()
}
