use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use idealflow::error::{Error, Result};
use idealflow::ineq::{
    empirical_g2_study, interpolation_report, ksup_suite, psw_suite, AmplitudeLaw,
    ConstantFitReport, Monomial, ProfileSampler,
};
use idealflow::io::batch::{parse_batch, run_batch};
use idealflow::io::config::{config_from_value, parse_config, RunConfig};
use idealflow::io::output::{run_experiment, write_atomic};
use idealflow::io::presets::{preset, PRESETS};

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_IO_OR_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "idealflow",
    version,
    about = "Length-constrained ideal flow of closed planar curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its artifacts.
    Run {
        /// JSON configuration file.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Named preset instead of a file.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory; overrides the config's out_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for random initial data.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a JSON array of configurations in parallel.
    Batch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
    },
    /// Sample random profiles and test the functional inequalities.
    Ineq {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 16)]
        max_mode: u32,
        #[arg(long, default_value_t = 0.05)]
        amplitude: f64,
        /// Directory for ineq_report.json; printed to stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED_CHECK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO_OR_CONFIG)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_run_config(config: Option<PathBuf>, preset_name: Option<String>) -> Result<RunConfig> {
    match (config, preset_name) {
        (Some(path), _) => parse_config(&read(&path)?),
        (None, Some(name)) => config_from_value(&serde_json::json!({ "preset": name })),
        (None, None) => config_from_value(&serde_json::json!({ "preset": "theorem1-demo" })),
    }
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            config,
            preset,
            out,
            seed,
        } => {
            let mut cfg = load_run_config(config, preset)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let outcome = run_experiment(&cfg, &out)?;
            let s = &outcome.summary;
            println!(
                "{}: {} after {} steps, t = {:.6}, E = {:.3e}",
                s.name,
                s.status.label(),
                s.steps,
                s.t_final,
                s.report.final_energy
            );
            if let (Some(fit), Some(lin)) = (s.decay_fit, s.linearized_rate) {
                println!("decay rate {:.6} (linearized {:.6})", fit.rate, lin);
            }
            for m in &s.report.monitors {
                println!(
                    "  {:<24} {:>12.4e} <= {:<10.3e} {}{}",
                    m.name,
                    m.value,
                    m.threshold,
                    if m.passed { "ok" } else { "FAIL" },
                    if m.hard { "" } else { " (soft)" }
                );
            }
            println!("artifacts in {}", out.display());
            if !outcome.passed() {
                eprintln!("failed monitors: {}", s.failed_monitors.join(", "));
            }
            Ok(outcome.passed())
        }
        Command::Batch {
            config,
            out,
            parallelism,
        } => {
            let configs = parse_batch(&read(&config)?)?;
            let report = run_batch(&configs, &out, parallelism)?;
            print!("{}", report.to_csv());
            let errored = report.entries.iter().filter(|e| e.error.is_some()).count();
            if errored > 0 {
                return Err(Error::BatchRuns(errored));
            }
            Ok(report.all_passed())
        }
        Command::Ineq {
            seed,
            samples,
            max_mode,
            amplitude,
            out,
        } => {
            let sampler = ProfileSampler::new(
                seed,
                max_mode,
                AmplitudeLaw::Decaying {
                    a_max: amplitude,
                    power: 1.0,
                },
            );
            let report = IneqReport::build(&sampler, samples)?;
            let json = serde_json::to_string_pretty(&report)? + "\n";
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    write_atomic(&dir.join("ineq_report.json"), &json)?;
                }
                None => print!("{json}"),
            }
            for r in report.all() {
                eprintln!(
                    "{:<28} worst ratio {:.6}, {} violations",
                    r.inequality, r.worst_ratio, r.violations
                );
            }
            Ok(report.explicit_constant_violations() == 0)
        }
        Command::Presets => {
            for (name, about) in PRESETS {
                println!("{name:<16} {about}");
            }
            if let Some(c) = preset("theorem1-demo") {
                println!("\nexample configuration:\n{}", c.to_json());
            }
            Ok(true)
        }
    }
}

#[derive(Serialize)]
struct IneqReport {
    sampler: ProfileSampler,
    psw: Vec<ConstantFitReport>,
    ksup: ConstantFitReport,
    g2: Option<ConstantFitReport>,
    interpolation: ConstantFitReport,
}

impl IneqReport {
    fn build(sampler: &ProfileSampler, samples: usize) -> Result<Self> {
        let [l2, sup] = psw_suite(sampler, samples)?;
        let g2 = match empirical_g2_study(sampler, samples) {
            Ok(r) => Some(r),
            Err(Error::TooFewSamples { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(IneqReport {
            sampler: sampler.clone(),
            psw: vec![l2, sup],
            ksup: ksup_suite(sampler, samples)?,
            g2,
            interpolation: interpolation_report(
                sampler,
                &Monomial::new(vec![0, 1, 1]),
                2,
                samples,
            )?,
        })
    }

    fn all(&self) -> Vec<&ConstantFitReport> {
        let mut v: Vec<&ConstantFitReport> = self.psw.iter().collect();
        v.push(&self.ksup);
        v.extend(self.g2.iter());
        v.push(&self.interpolation);
        v
    }

    /// Violations of the inequalities whose constants are known exactly.
    fn explicit_constant_violations(&self) -> usize {
        self.psw.iter().map(|r| r.violations).sum::<usize>() + self.ksup.violations
    }
}
