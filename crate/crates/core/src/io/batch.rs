//! Parallel batches of independent runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::config::{config_from_value, RunConfig};
use crate::io::output::{run_experiment, write_atomic};

#[derive(Debug, Clone, PartialEq)]
pub struct BatchEntry {
    pub index: usize,
    pub name: String,
    pub out_dir: PathBuf,
    pub status: String,
    pub passed: bool,
    pub steps: usize,
    pub final_energy: f64,
    pub decay_rate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub entries: Vec<BatchEntry>,
}

impl BatchReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    /// True if some run could not even start or write its output.
    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|e| e.error.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("index,name,status,passed,steps,final_energy,decay_rate,error\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.16e},{},{}",
                e.index,
                csv_field(&e.name),
                e.status,
                e.passed,
                e.steps,
                e.final_energy,
                e.decay_rate
                    .map_or_else(String::new, |r| format!("{r:.16e}")),
                csv_field(e.error.as_deref().unwrap_or(""))
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses a JSON array of run configurations (or `{"runs": [...]}`).
pub fn parse_batch(text: &str) -> Result<Vec<RunConfig>> {
    let value: Value = serde_json::from_str(text)?;
    let items = match &value {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("runs") {
            Some(Value::Array(a)) => a,
            _ => {
                return Err(Error::Config(vec![
                    crate::io::config::ConfigError::MissingRequired("runs".into()),
                ]))
            }
        },
        _ => {
            return Err(Error::Config(vec![
                crate::io::config::ConfigError::WrongType {
                    key: "<document>".into(),
                    expected: "an array of run configurations",
                },
            ]))
        }
    };
    items.iter().map(config_from_value).collect()
}

/// Runs every configuration on a pool of `parallelism` threads.
///
/// Run `i` writes into `out_root/run_{i:03}`. Results are in input order and
/// independent of the thread count; `batch_summary.csv` lists them.
pub fn run_batch(
    configs: &[RunConfig],
    out_root: &Path,
    parallelism: usize,
) -> Result<BatchReport> {
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    let entries: Vec<BatchEntry> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, cfg)| {
                let out_dir = out_root.join(format!("run_{index:03}"));
                match run_experiment(cfg, &out_dir) {
                    Ok(o) => BatchEntry {
                        index,
                        name: cfg.name.clone(),
                        out_dir,
                        status: o.summary.status.label().to_string(),
                        passed: o.passed(),
                        steps: o.summary.steps,
                        final_energy: o.summary.report.final_energy,
                        decay_rate: o.summary.decay_fit.map(|f| f.rate),
                        error: None,
                    },
                    Err(e) => BatchEntry {
                        index,
                        name: cfg.name.clone(),
                        out_dir,
                        status: "error".to_string(),
                        passed: false,
                        steps: 0,
                        final_energy: f64::NAN,
                        decay_rate: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    });
    let report = BatchReport { entries };
    write_atomic(&out_root.join("batch_summary.csv"), &report.to_csv())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::presets::preset;

    fn small(eps: f64) -> RunConfig {
        let mut c = preset("conservation").unwrap();
        c.n = 32;
        c.integrator.stop.t_max = 0.005;
        if let crate::io::config::InitialData::PerturbedCircle { modes } = &mut c.initial {
            modes[0].amplitude = eps;
        }
        c
    }

    #[test]
    fn batch_is_deterministic_across_thread_counts() {
        let configs = vec![small(0.01), small(0.02), small(0.03)];
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run_batch(&configs, a.path(), 1).unwrap();
        let rb = run_batch(&configs, b.path(), 3).unwrap();
        assert_eq!(ra.to_csv(), rb.to_csv());
        for i in 0..3 {
            let name = format!("run_{i:03}/timeseries.csv");
            assert_eq!(
                std::fs::read(a.path().join(&name)).unwrap(),
                std::fs::read(b.path().join(&name)).unwrap()
            );
        }
        assert!(a.path().join("batch_summary.csv").exists());
    }

    #[test]
    fn parse_batch_accepts_both_shapes() {
        let list = parse_batch(r#"[{"preset": "circle"}, {"preset": "theorem1-demo"}]"#).unwrap();
        assert_eq!(list.len(), 2);
        let wrapped = parse_batch(r#"{"runs": [{"preset": "circle"}]}"#).unwrap();
        assert_eq!(wrapped[0].name, "circle");
        assert!(parse_batch(r#"{"runs": 3}"#).is_err());
    }
}
