use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use interval_greedy::distribution::{mixture_density, Method};
use interval_greedy::greedy::DEFAULT_NODE_BUDGET;
use interval_greedy::strong::{certify, ExactSolver};
use interval_greedy::validation::{replay_validate, ReplayOptions};
use interval_greedy::{
    classical_greedy, enumerate, DensityModel, EnumerateError, EnumerateOptions, Instance,
    InstanceError, Scenario, SolutionSet, WeightLaw,
};
use serde::Serialize;
use serde_json::{json, Value};

/// Greedy solutions of set cover and spanning tree problems with interval
/// weights.
#[derive(Parser)]
#[command(name = "igreedy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate every ordered solution the greedy algorithm can return.
    Enumerate(Common),
    /// Enumerate with solution probabilities.
    Probs(Common),
    /// Distribution of the objective value.
    Distribution(Common),
    /// Certify a solution as strong, weak-only or neither.
    StrongCheck {
        #[command(flatten)]
        common: Common,
        /// Comma-separated element ids.
        #[arg(long, value_delimiter = ',', required = true)]
        solution: Vec<usize>,
    },
    /// Replay sampled scenarios against the enumeration.
    Validate(Common),
    /// Run the classical greedy algorithm on one scenario.
    Classical {
        #[command(flatten)]
        common: Common,
        /// Comma-separated weights; the interval midpoints by default.
        #[arg(long, value_delimiter = ',')]
        scenario: Option<Vec<f64>>,
    },
}

#[derive(Args, Clone, Serialize)]
struct Common {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Density JSON file, or inline JSON. Uniform when absent.
    #[arg(long)]
    density: Option<String>,
    /// Prune branches whose probability falls below this value.
    #[arg(long, default_value_t = 0.0, value_parser = parse_threshold)]
    threshold: f64,
    /// Maximum number of search nodes.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET, value_parser = parse_budget)]
    budget: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Explore branches in parallel.
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("threshold must lie in [0, 1), got {v}"))
    }
}

fn parse_budget(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("budget must be at least 1".to_string())
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Enumerate(_) => "enumerate",
            Command::Probs(_) => "probs",
            Command::Distribution(_) => "distribution",
            Command::StrongCheck { .. } => "strong-check",
            Command::Validate(_) => "validate",
            Command::Classical { .. } => "classical",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Enumerate(c)
            | Command::Probs(c)
            | Command::Distribution(c)
            | Command::Validate(c) => c,
            Command::StrongCheck { common, .. } | Command::Classical { common, .. } => common,
        }
    }

    fn config(&self) -> Value {
        let mut config = serde_json::to_value(self.common()).expect("config serializes");
        match self {
            Command::StrongCheck { solution, .. } => config["solution"] = json!(solution),
            Command::Classical { scenario, .. } => config["scenario"] = json!(scenario),
            _ => {}
        }
        config
    }
}

struct Outcome {
    result: Value,
    csv: Option<Vec<Vec<String>>>,
    passed: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            csv: None,
            passed: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let common = cli.command.common();
    let text = fs::read_to_string(&common.instance)
        .with_context(|| format!("cannot read {}", common.instance.display()))?;
    let instance =
        Instance::from_json(&text).map_err(|e| anyhow!("{}: {e}", common.instance.display()))?;
    let outcome = match &instance {
        Instance::Scp(p) => execute(p, &cli.command)?,
        Instance::Mst(p) => execute(p, &cli.command)?,
    };

    let body = match common.format {
        Format::Json => {
            let mut report = json!({
                "tool": "igreedy",
                "version": env!("CARGO_PKG_VERSION"),
                "command": cli.command.name(),
                "config": cli.command.config(),
                "result": outcome.result,
            });
            round_numbers(&mut report);
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let rows = outcome
                .csv
                .ok_or_else(|| anyhow!("{} has no CSV output", cli.command.name()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.write_record(row)?;
            }
            w.into_inner()?
        }
    };
    write_output(common.out.as_deref(), &body)?;
    Ok(outcome.passed)
}

fn write_output(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("cannot write {}", p.display())),
        None => match std::io::stdout().write_all(body) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => Ok(other?),
        },
    }
}

fn load_density(common: &Common) -> Result<DensityModel> {
    let Some(spec) = &common.density else {
        return Ok(DensityModel::uniform());
    };
    let (text, origin) = if spec.trim_start().starts_with('{') {
        (spec.clone(), "--density".to_string())
    } else {
        let text =
            fs::read_to_string(spec).with_context(|| format!("cannot read density file {spec}"))?;
        (text, spec.clone())
    };
    DensityModel::from_json(&text).map_err(|e| anyhow!("{origin}: {e}"))
}

fn enumerate_checked<P: ExactSolver>(p: &P, options: &EnumerateOptions) -> Result<SolutionSet> {
    enumerate(p, options).map_err(|e| match e {
        EnumerateError::BudgetExceeded { budget, partial } => anyhow!(
            "node budget of {budget} exhausted after {} solutions; raise --budget or --threshold",
            partial.len()
        ),
        other => anyhow!(other),
    })
}

fn execute<P: ExactSolver>(p: &P, command: &Command) -> Result<Outcome> {
    let common = command.common();
    let model = load_density(common)?;
    let law = WeightLaw::preferred(&model, p.weights())?;
    let options = |law: Option<WeightLaw>, threshold: f64| EnumerateOptions {
        threshold,
        law,
        node_budget: common.budget,
        parallel: common.parallel,
    };

    match command {
        Command::Enumerate(_) => {
            if common.threshold > 0.0 {
                bail!("--threshold needs probabilities; use the probs command");
            }
            let set = enumerate_checked(p, &options(None, 0.0))?;
            Ok(Outcome::ok(set_value(&set)))
        }
        Command::Probs(_) => {
            let set = enumerate_checked(p, &options(Some(law), common.threshold))?;
            let rows = std::iter::once(header(&["order", "probability", "weight_lo", "weight_hi"]))
                .chain(set.solutions.iter().map(|s| {
                    vec![
                        join(&s.order),
                        num(s.probability.unwrap_or(f64::NAN)),
                        num(s.weight.lo()),
                        num(s.weight.hi()),
                    ]
                }))
                .collect();
            Ok(Outcome {
                result: set_value(&set),
                csv: Some(rows),
                passed: true,
            })
        }
        Command::Distribution(_) => {
            let set = enumerate_checked(p, &options(Some(law.clone()), common.threshold))?;
            let d = mixture_density(&set, &law, p.weights(), Method::Auto)?;
            let rows = std::iter::once(header(&["point", "density", "cdf"]))
                .chain(
                    d.grid
                        .points
                        .iter()
                        .zip(&d.grid.density)
                        .zip(&d.grid.cdf)
                        .map(|((t, f), c)| vec![num(*t), num(*f), num(*c)]),
                )
                .collect();
            Ok(Outcome {
                result: serde_json::to_value(&d)?,
                csv: Some(rows),
                passed: true,
            })
        }
        Command::StrongCheck { solution, .. } => {
            let c = certify(p, solution)?;
            Ok(Outcome::ok(serde_json::to_value(&c)?))
        }
        Command::Validate(_) => {
            if common.samples == 0 {
                bail!("--samples must be at least 1");
            }
            let set = enumerate_checked(p, &options(Some(law.clone()), 0.0))?;
            let audit_ratio = !matches!(
                p.exact_optimum(&Scenario::lower(p.weights())),
                Err(InstanceError::TooLarge { .. })
            );
            let replay = ReplayOptions {
                samples: common.samples,
                seed: common.seed,
                audit_ratio,
            };
            let r = replay_validate(p, &set, &law, &replay)?;
            let rows = std::iter::once(header(&[
                "order",
                "probability",
                "frequency",
                "deviation",
                "z",
            ]))
            .chain(r.frequency_deviations.iter().map(|d| {
                vec![
                    join(&d.order),
                    num(d.probability),
                    num(d.frequency),
                    num(d.deviation),
                    num(d.z),
                ]
            }))
            .collect();
            let passed = r.passed();
            if !passed {
                eprintln!(
                    "validation failed: {} unexplained greedy outputs, {} ratio violations",
                    r.missing_from_enumeration.len(),
                    r.ratio_violations
                );
            }
            Ok(Outcome {
                result: serde_json::to_value(&r)?,
                csv: Some(rows),
                passed,
            })
        }
        Command::Classical { scenario, .. } => {
            let w = match scenario {
                Some(values) => Scenario::new(values.clone(), p.weights())?,
                None => Scenario::midpoint(p.weights()),
            };
            let run = classical_greedy(p, &w)?;
            Ok(Outcome::ok(json!({
                "scenario": w,
                "order": run.order,
                "value": run.weight.lo(),
            })))
        }
    }
}

fn set_value(set: &SolutionSet) -> Value {
    json!({
        "count": set.len(),
        "total_probability": set.total_probability(),
        "solutions": set.solutions,
        "groups": set.groups,
    })
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn join(ids: &[usize]) -> String {
    ids.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Rounds to 12 significant digits.
fn round12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn num(v: f64) -> String {
    round12(v).to_string()
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round12)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}
