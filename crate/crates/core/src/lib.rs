//! Simulator for the length-constrained ideal flow of closed planar curves,
//! written in terms of the curvature as a function of arclength.
//!
//! The state is a [`curve::CurvatureProfile`] sampled on a uniform periodic
//! grid. [`flow`] evolves it with pseudo-spectral derivatives and IMEX time
//! stepping, [`diagnostics`] checks the conserved and monotone quantities of
//! each run, and [`ineq`] probes the functional inequalities behind the
//! stability argument on seeded random profiles.
//!
//! ```
//! use idealflow::curve::{energy, make_perturbed_circle, Mode};
//! use idealflow::flow::{run, IntegratorConfig};
//!
//! let p = make_perturbed_circle(std::f64::consts::TAU, 1, 64, &[Mode::new(2, 1e-3, 0.0)]).unwrap();
//! let mut cfg = IntegratorConfig::default();
//! cfg.stop.t_max = 0.01;
//! let record = run(p.clone(), &cfg).unwrap();
//! assert!(record.final_row().unwrap().energy < energy(&p));
//! ```

pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod grid;
pub mod ineq;
pub mod io;

pub use curve::{make_circle, make_perturbed_circle, CurvatureProfile, Mode};
pub use error::{Error, Result};
pub use flow::{run, IntegratorConfig, Scheme};
pub use grid::GridFunction;
pub use io::config::{parse_config, RunConfig};
