use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use ofa_core::adversary::GeneratorSpec;
use ofa_core::cowpath::{sweep_ratio, symmetric_bridges, Side};
use ofa_core::harness::{self, ExperimentConfig, Row};
use ofa_core::model::{Diagnostic, RatioReport};
use ofa_core::{run, solve_optimal, Algorithm, Instance};

#[derive(Parser)]
#[command(
    name = "ofa",
    version,
    about = "Online facility assignment experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run algorithms on one instance and print a CSV report.
    Run {
        #[command(flatten)]
        gen: GenArgs,
        /// Instance JSON file instead of a generator.
        #[arg(long, conflicts_with = "family")]
        instance: Option<PathBuf>,
        #[arg(long = "alg", required = true)]
        algorithms: Vec<String>,
        /// Ratio bound to check, overriding the family's own.
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and print a CSV report.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Replaces the seed of every run.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linear search on a line.
    Cowpath {
        #[command(subcommand)]
        command: CowCommand,
    },
    /// Check an instance file.
    Validate { instance: PathBuf },
}

#[derive(Subcommand)]
enum CowCommand {
    /// Doubling search over bridges at both signs of min, min+step, ..., max.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        min: f64,
        #[arg(long, default_value_t = 4096.0)]
        max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        base: f64,
        #[arg(long, default_value_t = 2.0)]
        multiplier: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Right)]
        first_side: SideArg,
        /// Fail when any ratio exceeds this.
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst ratios of the online algorithms on adversarial line families.
    Probe {
        #[arg(long, default_value_t = 15)]
        max_m: usize,
        #[arg(long, default_value_t = 8)]
        max_k: usize,
        #[arg(long, default_value_t = 9.001)]
        threshold: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

/// Generator selection; only the flags the family uses are read.
#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    c: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    offset: Option<f64>,
    #[arg(long)]
    gap: Option<f64>,
    /// Algorithm the adversary chases.
    #[arg(long)]
    chase: Option<String>,
    #[arg(long)]
    space: Option<String>,
    #[arg(long)]
    facilities: Option<usize>,
    #[arg(long)]
    customers: Option<usize>,
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl GenArgs {
    fn spec(&self) -> Result<GeneratorSpec, String> {
        let family = self.family.as_ref().ok_or("--family is required")?;
        let mut obj = Map::new();
        obj.insert("family".into(), family.clone().into());
        let mut put = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                obj.insert(key.into(), v);
            }
        };
        put("r", self.r.map(Value::from));
        put("c", self.c.map(Value::from));
        put("l", self.l.map(Value::from));
        put("n", self.n.map(Value::from));
        put("k", self.k.map(Value::from));
        put("s", self.s.map(Value::from));
        put("m", self.m.map(Value::from));
        put("p", self.p.map(Value::from));
        put("offset", self.offset.map(Value::from));
        put("gap", self.gap.map(Value::from));
        put("chase", self.chase.clone().map(Value::from));
        put("space", self.space.clone().map(Value::from));
        put("facilities", self.facilities.map(Value::from));
        put("customers", self.customers.map(Value::from));
        put("capacity", self.capacity.map(Value::from));
        put("seed", self.seed.map(Value::from));
        serde_json::from_value(Value::Object(obj)).map_err(|e| format!("family {family}: {e}"))
    }
}

enum Failure {
    /// A measured ratio broke its bound.
    Bound(String),
    Input(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn check_rows(rows: &[Row]) -> Result<(), Failure> {
    for row in rows {
        if let Row::Skipped {
            family,
            params,
            algorithm,
            reason,
        } = row
        {
            eprintln!("skipped {family}[{params}] {algorithm}: {reason}");
        }
    }
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.violates())
        .map(|r| {
            let (f, p, a) = r.key();
            format!("{f}[{p}] {a}")
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Bound(format!(
            "bound violated: {}",
            bad.join(", ")
        )))
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { gen, out } => {
            let instance = gen.spec()?.generate()?;
            let mut w = output(&out)?;
            writeln!(w, "{}", instance.to_json()?)?;
        }
        Command::Run {
            gen,
            instance,
            algorithms,
            bound,
            tolerance,
            out,
        } => {
            let algorithms = algorithms
                .iter()
                .map(|a| a.parse())
                .collect::<Result<Vec<Algorithm>, _>>()?;
            let rows = match instance {
                Some(path) => {
                    let inst = Instance::load(&path)?;
                    let name = path
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    measure_file(&inst, &name, &algorithms, bound, tolerance)?
                }
                None => {
                    let mut rows = harness::measure(&gen.spec()?, &algorithms, tolerance)?;
                    if let Some(b) = bound {
                        for row in &mut rows {
                            if let Row::Measured {
                                report,
                                within_bound,
                            } = row
                            {
                                report.bound = Some(b);
                                *within_bound = report.within_bound(tolerance);
                            }
                        }
                    }
                    rows
                }
            };
            harness::write_csv(&rows, output(&out)?)?;
            check_rows(&rows)?;
        }
        Command::Sweep {
            config,
            jobs,
            seed,
            tolerance,
            out,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                config.runs.iter_mut().for_each(|r| r.seed = seed);
            }
            if let Some(t) = tolerance {
                config.tolerance = t;
            }
            let rows = harness::run_experiment(&config, jobs)?;
            let out = out.or_else(|| config.output.as_ref().map(PathBuf::from));
            harness::write_csv(&rows, output(&out)?)?;
            check_rows(&rows)?;
        }
        Command::Cowpath { command } => cowpath(command)?,
        Command::Validate { instance } => {
            let inst = Instance::load(&instance)?;
            let diags: Vec<Diagnostic> = inst.diagnostics();
            for d in &diags {
                eprintln!("{d}");
            }
            if !diags.is_empty() {
                return Err(Failure::Input(format!(
                    "{}: {} problem(s)",
                    instance.display(),
                    diags.len()
                )));
            }
            let wd = match inst.is_well_distributed() {
                Ok(b) => b.to_string(),
                Err(_) => "n/a".into(),
            };
            println!(
                "ok: {} space, {} facilities, capacity {}, {} customers, well-distributed {wd}",
                inst.space.kind(),
                inst.facilities.len(),
                inst.total_capacity(),
                inst.customers.len()
            );
        }
    }
    Ok(())
}

fn measure_file(
    inst: &Instance,
    name: &str,
    algorithms: &[Algorithm],
    bound: Option<f64>,
    tolerance: f64,
) -> Result<Vec<Row>, Failure> {
    inst.validate()?;
    let opt = solve_optimal(&inst.space, &inst.facilities, &inst.customers)?;
    let mut rows = Vec::new();
    for &alg in algorithms {
        if !alg.supports(&inst.space) {
            rows.push(Row::Skipped {
                family: "instance".into(),
                params: name.into(),
                algorithm: alg.name().into(),
                reason: format!("needs a plane space, got {}", inst.space.kind()),
            });
            continue;
        }
        let cost = run(alg, inst)?.total_cost();
        let report = RatioReport::new("instance", name, alg.name(), cost, opt.total_cost, bound);
        let within_bound = report.within_bound(tolerance);
        rows.push(Row::Measured {
            report,
            within_bound,
        });
    }
    Ok(rows)
}

fn cowpath(command: CowCommand) -> Result<(), Failure> {
    match command {
        CowCommand::Sweep {
            min,
            max,
            step,
            base,
            multiplier,
            first_side,
            bound,
            jobs,
            out,
        } => {
            let side = match first_side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let bridges = symmetric_bridges(min, max, step)?;
            let sweep = || sweep_ratio(&bridges, side, base, multiplier);
            let result = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()?
                    .install(sweep)?,
                None => sweep()?,
            };
            let mut w = csv::Writer::from_writer(output(&out)?);
            w.write_record(["bridge", "total", "ratio"])?;
            for run in &result.runs {
                w.write_record([
                    run.bridge.to_string(),
                    run.total.to_string(),
                    run.ratio().to_string(),
                ])?;
            }
            w.flush()?;
            eprintln!("max ratio {} at bridge {}", result.max_ratio, result.argmax);
            if let Some(b) = bound {
                if result.max_ratio > b {
                    return Err(Failure::Bound(format!(
                        "ratio {} exceeds {b}",
                        result.max_ratio
                    )));
                }
            }
        }
        CowCommand::Probe {
            max_m,
            max_k,
            threshold,
        } => {
            for alg in [Algorithm::Greedy, Algorithm::OptimalFill] {
                println!(
                    "{}",
                    harness::line_probe(alg, max_m, max_k, threshold)?.summary()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Bound(msg)) | Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
