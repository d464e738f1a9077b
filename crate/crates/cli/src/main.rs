use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use stconv::classify::{classify, ClassifyConfig, Corpus, Outcome, Property};
use stconv::density::{density_profile, density_verdict, Decision, DensityVerdict, Target};
use stconv::parse;
use stconv::stanalysis::{
    default_probes, st_bounded, st_cauchy, st_converges, Settings, StVerdict, CLASSIFICATION_HORIZON,
    CLASSIFICATION_TOLERANCE, DEFAULT_EPSILON_GRID,
};
use stconv::suite::{Status, Suite, SuiteConfig, THEOREM_IDS};
use stconv::Error;

const DENSITY_HORIZON: u64 = 1_000_000;
const DENSITY_TOLERANCE: f64 = 0.01;

#[derive(Parser, Debug)]
#[command(name = "stconv", version, about = "Finite-horizon statistical convergence and operator classification")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Horizon N; defaults to 10^6 for `density` and 10^5 otherwise.
    #[arg(long, global = true, env = "STCONV_HORIZON")]
    horizon: Option<u64>,
    /// Density tolerance; defaults to 0.01 for `density` and 0.1 otherwise.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// ε-grid, comma separated.
    #[arg(long, global = true)]
    eps: Option<String>,
    /// Checkpoint schedule, `geometric(b)` or `linear(s)`.
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
    /// Exit with status 1 unless the decision matches.
    #[arg(long, global = true, value_enum)]
    expect: Option<Expect>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density profile and verdict of an index set.
    Density {
        #[arg(long)]
        set: String,
        /// `zero` or an exact fraction `p/q`; defaults to the analytic density, else zero.
        #[arg(long)]
        target: Option<String>,
    },
    /// Statistical convergence of a sequence to a candidate limit.
    Converge {
        #[arg(long)]
        sequence: String,
        #[arg(long)]
        candidate: String,
    },
    /// Statistical boundedness of a sequence.
    Bounded {
        #[arg(long)]
        sequence: String,
        /// Bound probes, comma separated; doubling up to N/64 by default.
        #[arg(long)]
        probes: Option<String>,
    },
    /// Statistical Cauchy test of a sequence.
    Cauchy {
        #[arg(long)]
        sequence: String,
    },
    /// Classifies an operator or transform against the default corpus.
    Classify {
        #[arg(long)]
        operator: String,
        #[arg(long)]
        property: String,
        #[arg(long)]
        probes: Option<String>,
    },
    /// Runs the structural checks.
    Suite {
        /// Restrict to the named checks.
        #[arg(long = "check")]
        checks: Vec<String>,
        /// Fix the dimension of the random matrices.
        #[arg(long)]
        matrix_dim: Option<usize>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Expect {
    Confirmed,
    Refuted,
    Inconclusive,
    Consistent,
}

impl Expect {
    fn matches_decision(self, d: Decision) -> bool {
        matches!(
            (self, d),
            (Expect::Confirmed, Decision::Confirmed)
                | (Expect::Refuted, Decision::Refuted)
                | (Expect::Inconclusive, Decision::Inconclusive)
        )
    }

    fn matches_outcome(self, o: Outcome) -> bool {
        matches!(
            (self, o),
            (Expect::Confirmed | Expect::Consistent, Outcome::Consistent)
                | (Expect::Refuted, Outcome::Refuted)
                | (Expect::Inconclusive, Outcome::Inconclusive)
        )
    }
}

/// A finished command: the report plus whether it met `--expect`.
struct Run {
    report: Value,
    rows: Vec<Vec<String>>,
    header: Vec<&'static str>,
    ok: bool,
}

#[derive(Debug)]
enum Failure {
    Input(Error),
    Runtime(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::UnknownTheorem(_) => Failure::Input(e),
            other => Failure::Runtime(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(run) => match emit(&run, cli.common.output) {
            Ok(()) if run.ok => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn emit(run: &Run, format: OutputFormat) -> Result<(), String> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &run.report).map_err(|e| e.to_string())?;
            writeln!(out).map_err(|e| e.to_string())
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&run.header).map_err(|e| e.to_string())?;
            for row in &run.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())
        }
    }
}

fn settings(common: &Common, horizon: u64, tolerance: f64) -> Result<Settings, Failure> {
    let mut s = Settings::new(common.horizon.unwrap_or(horizon), common.tolerance.unwrap_or(tolerance));
    if let Some(src) = &common.schedule {
        s.schedule = parse::parse_schedule(src)?;
    }
    Ok(s)
}

fn grid(common: &Common) -> Result<Vec<f64>, Failure> {
    Ok(match &common.eps {
        Some(src) => parse::parse_number_list(src)?,
        None => DEFAULT_EPSILON_GRID.to_vec(),
    })
}

fn config_json(common: &Common, s: &Settings, extra: Value) -> Value {
    let mut config = json!({
        "horizon": s.horizon,
        "tolerance": s.tolerance,
        "schedule": s.schedule.to_string(),
        "seed": common.seed,
        "output": common.output,
        "expect": common.expect,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut config, extra) {
        m.extend(e);
    }
    config
}

const EPSILON_HEADER: [&str; 4] = ["epsilon", "checkpoint", "count", "ratio"];

fn density_rows(epsilon: Option<f64>, v: &DensityVerdict) -> Vec<Vec<String>> {
    let p = &v.profile;
    p.checkpoints()
        .iter()
        .zip(p.counts())
        .zip(p.ratios())
        .map(|((n, c), r)| vec![epsilon.map(|e| e.to_string()).unwrap_or_default(), n.to_string(), c.to_string(), r.to_string()])
        .collect()
}

fn verdict_rows(v: &StVerdict) -> Vec<Vec<String>> {
    v.epsilon_grid.iter().zip(&v.per_epsilon).flat_map(|(&e, d)| density_rows(Some(e), d)).collect()
}

fn verdict_run(command: &str, config: Value, v: StVerdict, expect: Option<Expect>) -> Run {
    let ok = expect.is_none_or(|e| e.matches_decision(v.decision));
    Run {
        rows: verdict_rows(&v),
        header: EPSILON_HEADER.to_vec(),
        report: json!({ "command": command, "config": config, "verdict": v }),
        ok,
    }
}

fn run(cli: &Cli) -> Result<Run, Failure> {
    let common = &cli.common;
    match &cli.command {
        Command::Density { set, target } => {
            let s = settings(common, DENSITY_HORIZON, DENSITY_TOLERANCE)?;
            let set = parse::parse_set(set)?;
            let target = match target {
                Some(src) => parse::parse_target(src)?,
                None => match set.analytic_density() {
                    Some(q) if *q.numer() != 0 => Target::Ratio(q),
                    _ => Target::Zero,
                },
            };
            let profile = density_profile(&set, s.horizon, s.schedule)?;
            let v = density_verdict(&profile, target, s.tolerance)?;
            let config = config_json(common, &s, json!({ "set": set.to_string(), "target": target.to_string() }));
            Ok(Run {
                rows: density_rows(None, &v),
                header: EPSILON_HEADER.to_vec(),
                ok: common.expect.is_none_or(|e| e.matches_decision(v.decision)),
                report: json!({
                    "command": "density",
                    "config": config,
                    "final_ratio": v.profile.final_ratio(),
                    "verdict": v,
                }),
            })
        }
        Command::Converge { sequence, candidate } => {
            let s = settings(common, CLASSIFICATION_HORIZON, CLASSIFICATION_TOLERANCE)?;
            let grid = grid(common)?;
            let seq = parse::parse_sequence(sequence)?;
            let c = parse::parse_element(candidate)?;
            let v = st_converges(&seq, &c, &grid, &s)?;
            let config = config_json(
                common,
                &s,
                json!({ "epsilon_grid": grid, "sequence": seq.label(), "candidate": c.to_string() }),
            );
            Ok(verdict_run("converge", config, v, common.expect))
        }
        Command::Bounded { sequence, probes } => {
            let s = settings(common, CLASSIFICATION_HORIZON, CLASSIFICATION_TOLERANCE)?;
            let seq = parse::parse_sequence(sequence)?;
            let probes = match probes {
                Some(src) => parse::parse_number_list(src)?,
                None => default_probes(s.horizon),
            };
            let v = st_bounded(&seq, &probes, &s)?;
            let config = config_json(common, &s, json!({ "probes": probes, "sequence": seq.label() }));
            Ok(verdict_run("bounded", config, v, common.expect))
        }
        Command::Cauchy { sequence } => {
            let s = settings(common, CLASSIFICATION_HORIZON, CLASSIFICATION_TOLERANCE)?;
            let grid = grid(common)?;
            let seq = parse::parse_sequence(sequence)?;
            let v = st_cauchy(&seq, &grid, &s)?;
            let config = config_json(common, &s, json!({ "epsilon_grid": grid, "sequence": seq.label() }));
            Ok(verdict_run("cauchy", config, v, common.expect))
        }
        Command::Classify { operator, property, probes } => {
            let s = settings(common, CLASSIFICATION_HORIZON, CLASSIFICATION_TOLERANCE)?;
            let mapping = parse::parse_mapping(operator)?;
            let property: Property = property.parse()?;
            let mut cfg = ClassifyConfig::new(s);
            cfg.epsilon_grid = grid(common)?;
            if let Some(src) = probes {
                cfg.probes = parse::parse_number_list(src)?;
            }
            let corpus = Corpus::default_for(mapping.domain().unwrap_or(stconv::spaces::Space::Sparse), common.seed);
            let r = classify(&mapping, property, &corpus, &cfg)?;
            let rows = r
                .instances
                .iter()
                .map(|i| {
                    vec![
                        i.sequence.clone(),
                        i.hypothesis.to_string(),
                        i.conclusion.map(|d| d.to_string()).unwrap_or_default(),
                        i.bound.map(|b| b.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            let config = config_json(common, &s, json!({ "epsilon_grid": cfg.epsilon_grid, "probes": cfg.probes }));
            Ok(Run {
                rows,
                header: vec!["sequence", "hypothesis", "conclusion", "bound"],
                ok: common.expect.is_none_or(|e| e.matches_outcome(r.outcome)),
                report: json!({ "command": "classify", "config": config, "report": r }),
            })
        }
        Command::Suite { checks, matrix_dim } => {
            let s = settings(common, CLASSIFICATION_HORIZON, CLASSIFICATION_TOLERANCE)?;
            let mut classify = ClassifyConfig::new(s);
            classify.epsilon_grid = grid(common)?;
            let suite = Suite::new(SuiteConfig { classify, seed: common.seed, matrix_dim: *matrix_dim, ..SuiteConfig::default() });
            let ids: Vec<&str> =
                if checks.is_empty() { THEOREM_IDS.to_vec() } else { checks.iter().map(String::as_str).collect() };
            let results = ids.iter().map(|id| suite.check(id)).collect::<Result<Vec<_>, _>>()?;
            let rows = results
                .iter()
                .map(|r| {
                    vec![r.id.clone(), r.status.to_string(), r.instances.to_string(), r.passes.to_string(), r.min_instances.to_string()]
                })
                .collect();
            Ok(Run {
                rows,
                header: vec!["id", "status", "instances", "passes", "min_instances"],
                ok: results.iter().all(|r| r.status == Status::Pass),
                report: serde_json::to_value(&results).map_err(|e| Failure::Io(e.to_string()))?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stconv::density::Schedule;

    #[test]
    fn flags_parse() {
        Cli::try_parse_from(["stconv", "density", "--set", "primes", "--horizon", "1000"]).unwrap();
        Cli::try_parse_from(["stconv", "--output", "csv", "converge", "--sequence", "harmonic", "--candidate", "sparse{}"])
            .unwrap();
        assert!(Cli::try_parse_from(["stconv", "density"]).is_err());
    }

    #[test]
    fn expectations() {
        assert!(Expect::Consistent.matches_outcome(Outcome::Consistent));
        assert!(!Expect::Consistent.matches_decision(Decision::Confirmed));
        assert!(Expect::Refuted.matches_decision(Decision::Refuted));
    }

    #[test]
    fn schedule_override() {
        let cli = Cli::try_parse_from(["stconv", "--schedule", "linear(100)", "cauchy", "--sequence", "harmonic"]).unwrap();
        let s = settings(&cli.common, 1000, 0.1).unwrap();
        assert_eq!(s.schedule, Schedule::Linear { step: 100 });
    }
}
