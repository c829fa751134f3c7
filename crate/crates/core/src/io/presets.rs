//! Named run configurations.

use std::f64::consts::PI;

use crate::curve::Mode;
use crate::diagnostics::Tolerances;
use crate::flow::{IntegratorConfig, Scheme, StopCriteria};
use crate::io::config::{InitialData, RunConfig};

pub const PRESETS: &[(&str, &str)] = &[
    (
        "theorem1-demo",
        "unit circle plus a small mode-2 bump, run to E < 1e-16",
    ),
    (
        "circle",
        "unperturbed unit circle, a fixed point of the flow",
    ),
    (
        "conservation",
        "mode-2 bump of size 0.05 for checking the conserved quantities",
    ),
    (
        "identity-check",
        "the conservation run at dt = 1e-5 for the dE/dt identity",
    ),
    ("decay-m3", "mode-3 bump, measures the linear decay rate"),
    ("decay-m4", "mode-4 bump, measures the linear decay rate"),
    ("attractor-w2", "doubly covered circle with a mode-3 bump"),
    ("attractor-4pi", "circle of length 4 pi with a mode-3 bump"),
    (
        "blowup-stress",
        "large bump with a tight blow-up cap, expected to stop early",
    ),
];

fn bump(name: &str, m: u32, eps: f64) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        initial: InitialData::PerturbedCircle {
            modes: vec![Mode::new(m, eps, 0.0)],
        },
        length: 2.0 * PI,
        omega: 1,
        n: 256,
        integrator: IntegratorConfig {
            scheme: Scheme::ImexBdf2,
            dt: 1e-4,
            dealias: false,
            stop: StopCriteria {
                t_max: 1.0,
                energy_tol: Some(1e-16),
                blowup_cap: None,
            },
            closure_stride: 100,
        },
        output_stride: 100,
        tolerances: Tolerances::default(),
        decay_window: None,
        out_dir: None,
        seed: 0,
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let cfg = match name {
        "theorem1-demo" => bump(name, 2, 1e-3),
        "circle" => {
            let mut c = bump(name, 2, 0.0);
            c.initial = InitialData::Circle;
            c.n = 128;
            c.integrator.stop.energy_tol = None;
            c
        }
        "conservation" => {
            let mut c = bump(name, 2, 0.05);
            c.integrator.stop.t_max = 0.2;
            c.integrator.stop.energy_tol = None;
            c.output_stride = 10;
            c.integrator.closure_stride = 10;
            c
        }
        "identity-check" => {
            let mut c = bump(name, 2, 0.05);
            c.integrator.dt = 1e-5;
            c.integrator.stop.t_max = 0.02;
            c.integrator.stop.energy_tol = None;
            c.output_stride = 10;
            c.integrator.closure_stride = 10;
            c
        }
        "decay-m3" => {
            let mut c = bump(name, 3, 1e-3);
            c.integrator.dt = 1e-5;
            c.integrator.stop.t_max = 0.1;
            c
        }
        "decay-m4" => {
            let mut c = bump(name, 4, 1e-3);
            c.integrator.dt = 1e-5;
            c.integrator.stop.t_max = 0.02;
            c.output_stride = 10;
            c.integrator.closure_stride = 10;
            c
        }
        "attractor-w2" => {
            let mut c = bump(name, 3, 1e-3);
            c.omega = 2;
            c
        }
        "attractor-4pi" => {
            let mut c = bump(name, 3, 1e-3);
            c.length = 4.0 * PI;
            c.integrator.dt = 1e-3;
            c.integrator.stop.t_max = 4.0;
            c
        }
        "blowup-stress" => {
            let mut c = bump(name, 3, 0.9);
            c.n = 64;
            c.integrator.dt = 1e-3;
            c.integrator.stop.t_max = 0.1;
            c.integrator.stop.energy_tol = None;
            c.integrator.stop.blowup_cap = Some(1.5);
            c.output_stride = 1;
            c.integrator.closure_stride = 1;
            c
        }
        _ => return None,
    };
    Some(cfg)
}
