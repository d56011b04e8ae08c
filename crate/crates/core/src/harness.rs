//! Timing harness for the two yield algorithms over lattice and file
//! instances.
//!
//! Every trial draws a fresh initial marking and goal, and both algorithms
//! see the same sequence of trials. Only the solve calls are timed.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{CpnError, Result};
use crate::generators::{lattice_net, rng, sample_start};
use crate::io::parse_net;
use crate::milp::{milp_max, MilpMaxOptions};
use crate::net::{Cpn, Marking};
use crate::rational::Rational;
use crate::reach::ReachMode;
use crate::yield_search::{default_epsilon, max_yield_binsearch, BisectOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Binsearch,
    Milp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Binsearch => "binsearch",
            Algorithm::Milp => "milp",
        }
    }
}

fn default_fraction() -> Rational {
    Rational::new(1, 10)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceSpec {
    Lattice {
        rows: usize,
        cols: usize,
        #[serde(default = "default_fraction")]
        resource_fraction: Rational,
    },
    /// A net file. With `resource_fraction`, trials resample the marking
    /// and goal like lattices do; otherwise the file's marking is used with
    /// a random (or the given) goal place.
    File {
        path: PathBuf,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        resource_fraction: Option<Rational>,
        #[serde(default)]
        goal: Option<String>,
    },
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Binsearch, Algorithm::Milp]
}

fn default_repetitions() -> usize {
    100
}

fn default_cap() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub instances: Vec<InstanceSpec>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: Rational,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub seed: u64,
    /// Reachability mode of the bisection runs.
    #[serde(default)]
    pub mode: ReachMode,
    /// Run distinct instances on distinct threads.
    #[serde(default)]
    pub parallel: bool,
}

impl BenchConfig {
    /// Parses a TOML config; relative file paths are resolved against
    /// `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut config: BenchConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| {
                    let before = &text[..s.start];
                    (
                        before.matches('\n').count() + 1,
                        s.start - before.rfind('\n').map_or(0, |i| i + 1) + 1,
                    )
                })
                .unwrap_or((0, 0));
            CpnError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        if let Some(base) = base {
            for inst in &mut config.instances {
                if let InstanceSpec::File { path, .. } = inst {
                    if path.is_relative() {
                        *path = base.join(&*path);
                    }
                }
            }
        }
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(CpnError::Input("repetitions must be at least 1".into()));
        }
        if !self.epsilon.is_positive() {
            return Err(CpnError::Input("epsilon must be positive".into()));
        }
        if self.cap == 0 {
            return Err(CpnError::Input("cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: String,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub resource_fraction: String,
    pub repetitions: usize,
    pub mean_seconds: f64,
    /// Solve time per at-least reachability call (bisection only).
    pub mean_alr_call_seconds: Option<f64>,
    /// Mean number of exclusion cuts (MILP only).
    pub cuts_mean: Option<f64>,
}

struct Loaded {
    label: String,
    dims: (Option<usize>, Option<usize>),
    fraction: Option<Rational>,
    net: Cpn,
    m0: Marking,
    goal: Option<usize>,
}

fn load(spec: &InstanceSpec) -> Result<Loaded> {
    match spec {
        InstanceSpec::Lattice {
            rows,
            cols,
            resource_fraction,
        } => Ok(Loaded {
            label: format!("{rows}x{cols}"),
            dims: (Some(*rows), Some(*cols)),
            fraction: Some(resource_fraction.clone()),
            m0: Marking::zeros(rows * cols),
            net: lattice_net(*rows, *cols)?,
            goal: None,
        }),
        InstanceSpec::File {
            path,
            name,
            resource_fraction,
            goal,
        } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CpnError::Input(format!("cannot read instance {}: {e}", path.display())))?;
            let (net, m0) = parse_net(&text)?;
            let goal = goal.as_deref().map(|g| net.place_index(g)).transpose()?;
            Ok(Loaded {
                label: name.clone().unwrap_or_else(|| net.name().to_string()),
                dims: (None, None),
                fraction: resource_fraction.clone(),
                net,
                m0,
                goal,
            })
        }
    }
}

/// Runs every instance and algorithm of `config`.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let loaded = config.instances.iter().map(load).collect::<Result<Vec<_>>>()?;
    let run = |(i, inst): (usize, &Loaded)| run_instance(config, inst, config.seed.wrapping_add(i as u64));
    let per_instance: Vec<Result<Vec<BenchRow>>> = if config.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = loaded.iter().enumerate().map(|x| s.spawn(move || run(x))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("bench thread panicked"))
                .collect()
        })
    } else {
        loaded.iter().enumerate().map(run).collect()
    };
    Ok(per_instance
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect())
}

fn run_instance(config: &BenchConfig, inst: &Loaded, seed: u64) -> Result<Vec<BenchRow>> {
    let mut rng = rng(seed);
    let mut trials = Vec::with_capacity(config.repetitions);
    for _ in 0..config.repetitions {
        let (m0, random_goal) = match &inst.fraction {
            Some(f) => sample_start(&inst.net, f, &mut rng)?,
            None => {
                let (_, g) = sample_start(&inst.net, &Rational::one(), &mut rng)?;
                (inst.m0.clone(), g)
            }
        };
        trials.push((m0, inst.goal.unwrap_or(random_goal)));
    }

    let bisect = BisectOptions {
        epsilon: config.epsilon.clone(),
        reach: config.mode.into(),
    };
    let milp = MilpMaxOptions {
        cap: config.cap,
        ..MilpMaxOptions::default()
    };
    let reps = config.repetitions as f64;
    let mut rows = Vec::new();
    for &alg in &config.algorithms {
        let mut total = Duration::ZERO;
        let mut per_call = 0.0;
        let mut cuts = 0usize;
        for (m0, goal) in &trials {
            let start = Instant::now();
            let res = match alg {
                Algorithm::Binsearch => max_yield_binsearch(&inst.net, m0, *goal, &bisect)?,
                Algorithm::Milp => milp_max(&inst.net, m0, *goal, &milp)?,
            };
            let elapsed = start.elapsed();
            total += elapsed;
            if res.queries > 0 {
                per_call += elapsed.as_secs_f64() / res.queries as f64;
            }
            cuts += res.cuts;
        }
        rows.push(BenchRow {
            instance: inst.label.clone(),
            algorithm: alg.name().into(),
            rows: inst.dims.0,
            cols: inst.dims.1,
            resource_fraction: inst.fraction.as_ref().map(ToString::to_string).unwrap_or_default(),
            repetitions: config.repetitions,
            mean_seconds: total.as_secs_f64() / reps,
            mean_alr_call_seconds: (alg == Algorithm::Binsearch).then_some(per_call / reps),
            cuts_mean: (alg == Algorithm::Milp).then_some(cuts as f64 / reps),
        });
    }
    Ok(rows)
}

/// Writes rows as CSV with times in seconds to five decimals.
pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CpnError::Input(format!("cannot write CSV: {e}"));
    w.write_record([
        "instance",
        "algorithm",
        "rows",
        "cols",
        "resource_fraction",
        "repetitions",
        "mean_seconds",
        "mean_alr_call_seconds",
        "cuts_mean",
    ])
    .map_err(io)?;
    let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.instance.clone(),
            r.algorithm.clone(),
            opt(r.rows),
            opt(r.cols),
            r.resource_fraction.clone(),
            r.repetitions.to_string(),
            format!("{:.5}", r.mean_seconds),
            r.mean_alr_call_seconds.map(|x| format!("{x:.5}")).unwrap_or_default(),
            r.cuts_mean.map(|x| format!("{x:.2}")).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| CpnError::Input(format!("cannot write CSV: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_with_defaults() {
        let text = r#"
repetitions = 2
seed = 7

[[instances]]
kind = "lattice"
rows = 3
cols = 3

[[instances]]
kind = "file"
path = "nets/x.json"
resource_fraction = "1/2"
"#;
        let config = BenchConfig::from_toml(text, Some(Path::new("/data"))).unwrap();
        assert_eq!(config.algorithms, default_algorithms());
        assert_eq!(config.cap, 400);
        assert_eq!(config.epsilon, default_epsilon());
        assert_eq!(
            config.instances[0],
            InstanceSpec::Lattice {
                rows: 3,
                cols: 3,
                resource_fraction: Rational::new(1, 10)
            }
        );
        match &config.instances[1] {
            InstanceSpec::File { path, .. } => assert_eq!(path, Path::new("/data/nets/x.json")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            BenchConfig::from_toml("repetitions = \"x\"\ninstances = []", None),
            Err(CpnError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn small_lattice_rows() {
        let config = BenchConfig {
            instances: vec![InstanceSpec::Lattice {
                rows: 3,
                cols: 3,
                resource_fraction: Rational::new(1, 10),
            }],
            algorithms: default_algorithms(),
            repetitions: 1,
            epsilon: default_epsilon(),
            cap: 400,
            seed: 1,
            mode: ReachMode::Finite,
            parallel: false,
        };
        let rows = run_bench(&config).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].algorithm, "binsearch");
        assert!(rows[0].cuts_mean.is_none());
        assert!(rows[1].mean_alr_call_seconds.is_none());
        assert!(rows.iter().all(|r| r.mean_seconds > 0.0 && r.repetitions == 1));
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("instance,algorithm,rows,cols,resource_fraction"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let config = BenchConfig::from_toml(
            "[[instances]]\nkind = \"file\"\npath = \"/nonexistent/net.json\"\n",
            None,
        )
        .unwrap();
        assert!(matches!(run_bench(&config), Err(CpnError::Input(_))));
    }

    #[test]
    fn trials_are_reproducible() {
        let config = BenchConfig::from_toml(
            "repetitions = 3\nalgorithms = [\"milp\"]\n[[instances]]\nkind = \"lattice\"\nrows = 2\ncols = 3\n",
            None,
        )
        .unwrap();
        let a = run_bench(&config).unwrap();
        let b = run_bench(&config).unwrap();
        assert_eq!(a[0].cuts_mean, b[0].cuts_mean);
    }
}
