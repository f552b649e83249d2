//! Experiment runner: generator x algorithm matrices measured against the
//! offline optimum, written out as CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::adversary::{line_chase, line_trap, GeneratorSpec};
use crate::error::{Error, Result};
use crate::model::RatioReport;
use crate::online::{run, Algorithm};
use crate::opt::solve_optimal;

pub const CSV_HEADER: [&str; 8] = [
    "family",
    "params",
    "algorithm",
    "cost_alg",
    "cost_opt",
    "ratio",
    "bound",
    "within_bound",
];

fn default_tolerance() -> f64 {
    1e-9
}

fn one() -> usize {
    1
}

/// A batch of runs, read from JSON.
///
/// ```json
/// {"tolerance": 1e-9,
///  "runs": [{"generator": {"family": "spider"}, "vary": {"k": [2, 3], "s": [1, 2]},
///            "algorithms": ["optimal-fill"]}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub runs: Vec<ExperimentRun>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Report path, relative to the working directory.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRun {
    /// Generator fields; `vary` entries are merged over these.
    pub generator: Value,
    /// Cartesian product of parameter values.
    #[serde(default)]
    pub vary: BTreeMap<String, Vec<Value>>,
    pub algorithms: Vec<String>,
    /// Only seeded families repeat; repetition `i` uses `seed + i`.
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.jobs()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Expands every run into concrete (generator, algorithms) jobs.
    pub fn jobs(&self) -> Result<Vec<(GeneratorSpec, Vec<Algorithm>)>> {
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(
                "tolerance must be non-negative".into(),
            ));
        }
        let mut jobs = Vec::new();
        for run in &self.runs {
            let algorithms = run
                .algorithms
                .iter()
                .map(|a| a.parse())
                .collect::<Result<Vec<Algorithm>>>()?;
            if algorithms.is_empty() {
                return Err(Error::InvalidArgument("run lists no algorithms".into()));
            }
            for spec in expand(&run.generator, &run.vary)? {
                let reps = if spec.is_seeded() { run.repetitions } else { 1 };
                for i in 0..reps {
                    let spec = if spec.is_seeded() {
                        spec.with_seed(run.seed.wrapping_add(i as u64))
                    } else {
                        spec.clone()
                    };
                    jobs.push((spec, algorithms.clone()));
                }
            }
        }
        Ok(jobs)
    }
}

fn expand(base: &Value, vary: &BTreeMap<String, Vec<Value>>) -> Result<Vec<GeneratorSpec>> {
    let Value::Object(base) = base else {
        return Err(Error::InvalidArgument(
            "generator must be a JSON object".into(),
        ));
    };
    let mut combos = vec![base.clone()];
    for (key, values) in vary {
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("vary.{key} is empty")));
        }
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.insert(key.clone(), v.clone());
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|c| {
            let family = c
                .get("family")
                .and_then(Value::as_str)
                .unwrap_or("?")
                .to_string();
            serde_json::from_value(Value::Object(c))
                .map_err(|e| Error::UnknownFamily(format!("{family}: {e}")))
        })
        .collect()
}

/// One report line.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Measured {
        report: RatioReport,
        within_bound: Option<bool>,
    },
    Skipped {
        family: String,
        params: String,
        algorithm: String,
        reason: String,
    },
}

impl Row {
    pub fn key(&self) -> (&str, &str, &str) {
        match self {
            Row::Measured { report, .. } => (&report.family, &report.params, &report.algorithm),
            Row::Skipped {
                family,
                params,
                algorithm,
                ..
            } => (family, params, algorithm),
        }
    }

    pub fn violates(&self) -> bool {
        matches!(
            self,
            Row::Measured {
                within_bound: Some(false),
                ..
            }
        )
    }

    fn fields(&self) -> [String; 8] {
        let (family, params, algorithm) = self.key();
        let (family, params, algorithm) = (
            family.to_string(),
            params.to_string(),
            algorithm.to_string(),
        );
        match self {
            Row::Measured {
                report,
                within_bound,
            } => [
                family,
                params,
                algorithm,
                report.cost_alg.to_string(),
                report.cost_opt.to_string(),
                report.ratio.map_or("undef".into(), |r| r.to_string()),
                report.bound.map_or(String::new(), |b| b.to_string()),
                within_bound.map_or("n/a".into(), |b| b.to_string()),
            ],
            Row::Skipped { .. } => [
                family,
                params,
                algorithm,
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "skipped".into(),
            ],
        }
    }
}

/// Measures every algorithm on one generated instance.
pub fn measure(spec: &GeneratorSpec, algorithms: &[Algorithm], tolerance: f64) -> Result<Vec<Row>> {
    let instance = spec.generate()?;
    let opt = solve_optimal(&instance.space, &instance.facilities, &instance.customers)?;
    let mut rows = Vec::with_capacity(algorithms.len());
    for &alg in algorithms {
        if !alg.supports(&instance.space) {
            rows.push(Row::Skipped {
                family: spec.family().into(),
                params: spec.params(),
                algorithm: alg.name().into(),
                reason: format!(
                    "{} does not run on {} spaces",
                    alg.name(),
                    instance.space.kind()
                ),
            });
            continue;
        }
        let trace = run(alg, &instance)?;
        let report = RatioReport::new(
            spec.family(),
            spec.params(),
            alg.name(),
            trace.total_cost(),
            opt.total_cost,
            spec.bound(alg, &instance),
        );
        let within_bound = report.within_bound(tolerance);
        rows.push(Row::Measured {
            report,
            within_bound,
        });
    }
    Ok(rows)
}

/// Runs every job, on `jobs` worker threads when given, and returns rows in
/// canonical (family, params, algorithm) order.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<Row>> {
    let work = config.jobs()?;
    let tol = config.tolerance;
    let go = || {
        work.par_iter()
            .map(|(spec, algs)| {
                measure(spec, algs, tol).map_err(|e| Error::InvalidInstance(format!("{spec}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
    };
    let nested = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(go)?,
        None => go()?,
    };
    let mut rows: Vec<Row> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv(rows: &[Row]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Worst ratio an algorithm reaches on the adversarial line families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineProbe {
    pub algorithm: String,
    pub max_ratio: f64,
    pub witness: String,
    pub threshold: f64,
    pub exceeds: bool,
}

impl LineProbe {
    /// Empirical observation only; a finite sweep proves nothing about the
    /// algorithm's true competitive ratio.
    pub fn summary(&self) -> String {
        format!(
            "evidence only: {} reaches ratio {:.4} on {} ({} {})",
            self.algorithm,
            self.max_ratio,
            self.witness,
            if self.exceeds { "above" } else { "not above" },
            self.threshold
        )
    }
}

/// Chases each algorithm on line chases with odd `m` up to `max_m` and on
/// one-sided traps up to `max_k`, and reports the worst ratio seen.
pub fn line_probe(
    algorithm: Algorithm,
    max_m: usize,
    max_k: usize,
    threshold: f64,
) -> Result<LineProbe> {
    let mut specs: Vec<(String, crate::model::Instance)> = Vec::new();
    for m in (3..=max_m).step_by(2) {
        specs.push((format!("line-chase m={m}"), line_chase(m, algorithm)?));
    }
    for k in 1..=max_k {
        specs.push((format!("line-trap k={k}"), line_trap(k, 1e-3, algorithm)?));
    }
    let mut best = (0.0f64, String::new());
    for (name, inst) in specs {
        let alg = run(algorithm, &inst)?.total_cost();
        let opt = solve_optimal(&inst.space, &inst.facilities, &inst.customers)?.total_cost;
        if opt > 0.0 && alg / opt > best.0 {
            best = (alg / opt, name);
        }
    }
    Ok(LineProbe {
        algorithm: algorithm.name().into(),
        max_ratio: best.0,
        witness: best.1,
        threshold,
        exceeds: best.0 > threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn plane_chain_row() {
        let c = config(
            r#"{"runs":[{"generator":{"family":"plane-chain","n":4,"p":1.0},"algorithms":["voronoi"]}]}"#,
        );
        let rows = run_experiment(&c, None).unwrap();
        let Row::Measured {
            report,
            within_bound,
        } = &rows[0]
        else {
            panic!()
        };
        assert!((report.ratio.unwrap() - 7.0).abs() < 1e-9);
        assert_eq!(report.bound, Some(7.0));
        assert_eq!(*within_bound, Some(true));
    }

    #[test]
    fn bounds_attached() {
        let c = config(
            r#"{"runs":[{"generator":{"family":"grid-greedy-chase","r":4,"c":4},"algorithms":["greedy"]},
                        {"generator":{"family":"spider","k":4,"s":3},"algorithms":["optimal-fill"]}]}"#,
        );
        let rows = run_experiment(&c, Some(2)).unwrap();
        let bounds: Vec<_> = rows
            .iter()
            .map(|r| match r {
                Row::Measured { report, .. } => report.bound,
                _ => None,
            })
            .collect();
        assert_eq!(bounds, vec![Some(24.0), Some(8.0)]);
        assert!(!rows.iter().any(Row::violates));
    }

    #[test]
    fn voronoi_off_plane_is_skipped() {
        let c = config(
            r#"{"runs":[{"generator":{"family":"spider","k":3,"s":2},"algorithms":["voronoi","greedy"]}]}"#,
        );
        let rows = run_experiment(&c, None).unwrap();
        assert!(matches!(rows[1], Row::Skipped { .. }));
        assert!(to_csv(&rows).unwrap().contains("skipped"));
    }

    #[test]
    fn vary_and_order() {
        let c = config(
            r#"{"runs":[{"generator":{"family":"spider"},"vary":{"k":[3,2],"s":[2,1]},"algorithms":["optimal-fill","greedy"]}]}"#,
        );
        let rows = run_experiment(&c, Some(3)).unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<_> = rows.iter().map(|r| r.key()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(
            to_csv(&rows).unwrap(),
            to_csv(&run_experiment(&c, Some(1)).unwrap()).unwrap()
        );
    }

    #[test]
    fn seeded_repetitions() {
        let c = config(
            r#"{"runs":[{"generator":{"family":"random","space":"grid","facilities":4,"customers":4},
                          "algorithms":["greedy"],"repetitions":3,"seed":7}]}"#,
        );
        let rows = run_experiment(&c, None).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].key().1.ends_with("seed=7"));
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_json(
            r#"{"runs":[{"generator":{"family":"nope"},"algorithms":["greedy"]}]}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"runs":[{"generator":{"family":"path","m":5},"algorithms":["best"]}]}"#
        )
        .is_err());
        assert!(ExperimentConfig::from_json(r#"{"runs":[],"extra":1}"#).is_err());
    }

    #[test]
    fn undefined_ratio() {
        let rows = measure(
            &GeneratorSpec::Path { m: 3 }.with_seed(0),
            &[Algorithm::Greedy],
            0.0,
        )
        .unwrap();
        let csv = to_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 2);
        let r = RatioReport::new("x", "", "greedy", 0.0, 0.0, Some(1.0));
        assert_eq!(
            Row::Measured {
                within_bound: r.within_bound(0.0),
                report: r
            }
            .fields()[5],
            "undef"
        );
    }
}
