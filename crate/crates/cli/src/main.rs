//! Command-line front end: validate instances, reduce to ordered form,
//! solve with the approximation algorithms, query the exact oracles,
//! verify guarantees, generate instances, and emit inapproximability
//! MBLPs. Instances and allocations travel as JSON; reports are JSON on
//! stdout.
//!
//! Exit codes: 0 success, 2 validation failure, 3 guarantee-verification
//! failure, 4 tractability guard exceeded, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use mms_core::generators::{
    random_instance, shuffle_items, tight_chores_instance, tight_goods_instance, QuotaPolicy,
};
use mms_core::instance::validate_instance;
use mms_core::io;
use mms_core::mblp::{build_mblp, emit_lp, emit_mapping, Dimension};
use mms_core::oracle::{
    best_alpha, mms_bruteforce_guarded, mms_identical_dp, mms_values, AlphaBound,
    DEFAULT_BRUTEFORCE_GUARD,
};
use mms_core::ordered::to_ordered;
use mms_core::rational::{format_rational, parse_rational, rat, to_f64, Rational};
use mms_core::solver::{solve, Algorithm, SolveConfig, Solved};
use mms_core::verify::verify_alpha_mms;
use mms_core::{Error, Instance, Kind, RunOptions};

#[derive(Parser)]
#[command(name = "mms", version, about = "Maximin-share allocation under category quotas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the instance invariants and report violations.
    Validate { file: PathBuf },
    /// Compute the ordered reduction of an instance.
    Ordered {
        file: PathBuf,
        /// Write the ordered instance here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute an approximate (or exact, when applicable) MMS allocation.
    Solve {
        /// Instance file; omit when using --dir.
        file: Option<PathBuf>,
        /// Solve every *.json instance in a directory; reports keyed by filename.
        #[arg(long, conflicts_with = "file")]
        dir: Option<PathBuf>,
        /// auto | single-goods | single-chores | multi-goods | multi-chores | bivalued | identical
        #[arg(long, default_value = "auto")]
        algorithm: String,
        /// Override the guarantee factor, e.g. 4/5.
        #[arg(long)]
        alpha: Option<String>,
        /// Accuracy for the identical-agent FPTAS route (default 1/10).
        #[arg(long)]
        eps: Option<String>,
        /// Also compute exact MMS values and per-agent margins.
        #[arg(long)]
        oracle: bool,
        /// Check the per-round invariant conditions during the run.
        #[arg(long)]
        check_invariants: bool,
        /// Write the allocation JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact MMS values (and witnessing partitions) via the oracles.
    Mms {
        file: PathBuf,
        /// Only this agent; default reports all agents.
        #[arg(long)]
        agent: Option<usize>,
        /// Report all agents (the default).
        #[arg(long)]
        all: bool,
        /// Override the n^m enumeration guard.
        #[arg(long)]
        guard: Option<u128>,
    },
    /// Best achievable approximation factor over all feasible allocations.
    BestAlpha { file: PathBuf },
    /// Verify an allocation against α times the exact MMS values.
    Verify {
        file: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
        #[arg(long)]
        alpha: String,
    },
    /// Generate instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Build the inapproximability MBLP for a dimension and emit it as an
    /// LP file.
    Mblp {
        #[arg(long)]
        agents: usize,
        /// Repeatable: SIZE:QMIN:QMAX per category.
        #[arg(long = "category", required = true)]
        categories: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the bundle-index sidecar mapping.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Tight goods family: n agents, 3n goods, worst ratio 2n/(3n-1).
    TightGoods {
        #[arg(long)]
        n: usize,
        /// Relabel item ids with this seed to exercise `ordered`.
        #[arg(long)]
        shuffle: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tight chores family: n agents, 2n chores, worst ratio (3n-1)/(2n).
    TightChores {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        shuffle: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random instance with small integer values.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        agents: usize,
        /// Comma-separated category sizes, e.g. 4,3,2.
        #[arg(long)]
        sizes: String,
        /// tight | loose | lower-only | upper-only | unconstrained
        #[arg(long, default_value = "tight")]
        policy: String,
        /// goods | chores
        #[arg(long, default_value = "goods")]
        kind: String,
        /// Smallest value (defaults: 0 for goods, -8 for chores).
        #[arg(long)]
        min: Option<i64>,
        /// Largest value (defaults: 8 for goods, 0 for chores).
        #[arg(long)]
        max: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::MalformedInstance(_)
        | Error::BadRational(_)
        | Error::NotAPartition(_)
        | Error::ItemNotInInstance { .. }
        | Error::Unsatisfiable(_)
        | Error::Json(_) => 2,
        Error::InfeasibleAllocation(_) => 3,
        Error::GuardExceeded { .. } => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Ordered { file, out } => cmd_ordered(&file, out.as_deref()),
        Command::Solve {
            file,
            dir,
            algorithm,
            alpha,
            eps,
            oracle,
            check_invariants,
            out,
        } => {
            let opts = SolveArgs {
                algorithm,
                alpha,
                eps,
                oracle,
                check_invariants,
            };
            match (file, dir) {
                (Some(file), None) => cmd_solve(&file, &opts, out.as_deref()),
                (None, Some(dir)) => cmd_solve_dir(&dir, &opts),
                _ => Err(Error::Precondition(
                    "solve needs an instance file or --dir".to_string(),
                )),
            }
        }
        Command::Mms {
            file,
            agent,
            all,
            guard,
        } => cmd_mms(&file, agent, all, guard),
        Command::BestAlpha { file } => cmd_best_alpha(&file),
        Command::Verify {
            file,
            allocation,
            alpha,
        } => cmd_verify(&file, &allocation, &alpha),
        Command::Gen(gen) => cmd_gen(gen),
        Command::Mblp {
            agents,
            categories,
            out,
            mapping,
        } => cmd_mblp(agents, &categories, &out, mapping.as_deref()),
    }
}

fn cmd_validate(file: &Path) -> Result<ExitCode, Error> {
    let inst = io::read_instance(file)?;
    let report = validate_instance(&inst);
    let doc = json!({
        "ok": report.ok(),
        "violations": report.violations,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_ordered(file: &Path, out: Option<&Path>) -> Result<ExitCode, Error> {
    let inst = io::read_instance(file)?;
    let reduction = to_ordered(&inst);
    let text = io::instance_to_json(&reduction.ordered_instance);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

struct SolveArgs {
    algorithm: String,
    alpha: Option<String>,
    eps: Option<String>,
    oracle: bool,
    check_invariants: bool,
}

impl SolveArgs {
    fn config(&self) -> Result<SolveConfig, Error> {
        Ok(SolveConfig {
            algorithm: Some(Algorithm::parse(&self.algorithm)?),
            alpha: self.alpha.as_deref().map(parse_rational).transpose()?,
            eps: self.eps.as_deref().map(parse_rational).transpose()?,
            options: RunOptions {
                check_invariants: self.check_invariants,
            },
        })
    }
}

fn rational_field(r: &Rational) -> Value {
    Value::from(format_rational(r))
}

fn build_report(
    inst: &Instance,
    solved: &Solved,
    oracle: bool,
    wall_ms: f64,
) -> Result<(Value, bool), Error> {
    let mus = if oracle { Some(mms_values(inst)?) } else { None };
    let mut ok = true;
    let mut agents = Vec::with_capacity(inst.n_agents());
    for agent in 0..inst.n_agents() {
        let bundle = &solved.allocation.bundles[agent];
        let value = inst.bundle_value(agent, bundle)?;
        let mut entry = json!({
            "agent": agent,
            "bundle": bundle,
            "value": rational_field(&value),
            "value_decimal": to_f64(&value),
        });
        if let Some(mu_hat) = &solved.mu_hat {
            entry["mu_hat"] = rational_field(&mu_hat[agent]);
        }
        if let Some(mus) = &mus {
            let margin = &value - &solved.alpha * &mus[agent];
            if margin < rat(0) {
                ok = false;
            }
            entry["mu"] = rational_field(&mus[agent]);
            entry["margin"] = rational_field(&margin);
            entry["margin_decimal"] = Value::from(to_f64(&margin));
        }
        agents.push(entry);
    }
    let report = json!({
        "algorithm": solved.algorithm,
        "alpha": format_rational(&solved.alpha),
        "alpha_decimal": to_f64(&solved.alpha),
        "ok": ok,
        "agents": agents,
        "wall_time_ms": wall_ms,
    });
    Ok((report, ok))
}

fn cmd_solve(file: &Path, args: &SolveArgs, out: Option<&Path>) -> Result<ExitCode, Error> {
    let inst = io::read_instance(file)?;
    let config = args.config()?;
    let started = Instant::now();
    let solved = solve(&inst, &config)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    if !inst.is_feasible_allocation(&solved.allocation)? {
        return Err(Error::InfeasibleAllocation(
            "solver produced an infeasible allocation".to_string(),
        ));
    }
    let (report, ok) = build_report(&inst, &solved, args.oracle, wall_ms)?;
    if let Some(path) = out {
        std::fs::write(path, io::allocation_to_json(&solved.allocation))?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_solve_dir(dir: &Path, args: &SolveArgs) -> Result<ExitCode, Error> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |ext| ext == "json"))
        .collect();
    entries.sort();
    let mut worst = ExitCode::SUCCESS;
    let mut reports = serde_json::Map::new();
    for path in entries {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let outcome = io::read_instance(&path).and_then(|inst| {
            let config = args.config()?;
            let started = Instant::now();
            let solved = solve(&inst, &config)?;
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            build_report(&inst, &solved, args.oracle, wall_ms)
        });
        match outcome {
            Ok((report, ok)) => {
                if !ok {
                    worst = ExitCode::from(3);
                }
                reports.insert(name, report);
            }
            Err(err) => {
                worst = ExitCode::from(exit_code_for(&err));
                reports.insert(name, json!({ "error": err.to_string() }));
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&Value::Object(reports))?);
    Ok(worst)
}

fn cmd_mms(
    file: &Path,
    agent: Option<usize>,
    _all: bool,
    guard: Option<u128>,
) -> Result<ExitCode, Error> {
    let inst = io::read_instance(file)?;
    let guard = guard.unwrap_or(DEFAULT_BRUTEFORCE_GUARD);
    let one = |i: usize| -> Result<Value, Error> {
        let result = if inst.agents_identical() {
            mms_identical_dp(&inst)?
        } else {
            mms_bruteforce_guarded(&inst, i, guard)?
        };
        Ok(json!({
            "agent": i,
            "mu": format_rational(&result.value),
            "mu_decimal": to_f64(&result.value),
            "partition": result.partition.bundles,
        }))
    };
    let doc = match agent {
        Some(i) => one(i)?,
        None => {
            let all: Vec<Value> = (0..inst.n_agents()).map(one).collect::<Result<_, _>>()?;
            json!({ "agents": all })
        }
    };
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_best_alpha(file: &Path) -> Result<ExitCode, Error> {
    let inst = io::read_instance(file)?;
    let result = best_alpha(&inst)?;
    let alpha_field = match &result.alpha {
        AlphaBound::Any => Value::from("any"),
        AlphaBound::Value(a) => Value::from(format_rational(a)),
    };
    let doc = json!({
        "alpha": alpha_field,
        "alpha_decimal": match &result.alpha {
            AlphaBound::Any => Value::Null,
            AlphaBound::Value(a) => Value::from(to_f64(a)),
        },
        "allocation": result.allocation.bundles,
        "mms": result.mms_values.iter().map(|m| format_rational(m)).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(file: &Path, allocation: &Path, alpha: &str) -> Result<ExitCode, Error> {
    let inst = io::read_instance(file)?;
    let alloc = io::read_allocation(allocation)?;
    let alpha = parse_rational(alpha)?;
    let mus = mms_values(&inst)?;
    let report = verify_alpha_mms(&inst, &alloc, &alpha, &mus)?;
    let doc = json!({
        "ok": report.ok,
        "alpha": format_rational(&alpha),
        "agents": report.margins.iter().map(|m| json!({
            "agent": m.agent,
            "value": format_rational(&m.bundle_value),
            "mu": format_rational(&mus[m.agent]),
            "margin": format_rational(&m.margin),
            "margin_decimal": to_f64(&m.margin),
        })).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_gen(gen: GenCommand) -> Result<ExitCode, Error> {
    let (inst, out) = match gen {
        GenCommand::TightGoods { n, shuffle, out } => {
            let mut inst = tight_goods_instance(n)?;
            if let Some(seed) = shuffle {
                inst = shuffle_items(&inst, seed);
            }
            (inst, out)
        }
        GenCommand::TightChores { n, shuffle, out } => {
            let mut inst = tight_chores_instance(n)?;
            if let Some(seed) = shuffle {
                inst = shuffle_items(&inst, seed);
            }
            (inst, out)
        }
        GenCommand::Random {
            seed,
            agents,
            sizes,
            policy,
            kind,
            min,
            max,
            out,
        } => {
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Unsatisfiable(format!("bad size {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            let policy = QuotaPolicy::parse(&policy)?;
            let kind = match kind.as_str() {
                "goods" => Kind::Goods,
                "chores" => Kind::Chores,
                other => {
                    return Err(Error::Unsatisfiable(format!(
                        "kind must be goods or chores, got {other:?}"
                    )))
                }
            };
            let range = match kind {
                Kind::Chores => (min.unwrap_or(-8), max.unwrap_or(0)),
                _ => (min.unwrap_or(0), max.unwrap_or(8)),
            };
            let inst = random_instance(seed, agents, &sizes, policy, range, kind)?;
            (inst, out)
        }
    };
    let text = io::instance_to_json(&inst);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_mblp(
    agents: usize,
    categories: &[String],
    out: &Path,
    mapping: Option<&Path>,
) -> Result<ExitCode, Error> {
    let parsed: Vec<(usize, usize, usize)> = categories
        .iter()
        .map(|spec| {
            let parts: Vec<&str> = spec.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Precondition(format!(
                    "category spec must be SIZE:QMIN:QMAX, got {spec:?}"
                )));
            }
            let nums: Vec<usize> = parts
                .iter()
                .map(|p| {
                    p.parse()
                        .map_err(|_| Error::Precondition(format!("bad number in {spec:?}")))
                })
                .collect::<Result<_, _>>()?;
            Ok((nums[0], nums[1], nums[2]))
        })
        .collect::<Result<_, _>>()?;
    let dim = Dimension::new(agents, parsed)?;
    let model = build_mblp(&dim)?;
    std::fs::write(out, emit_lp(&model))?;
    if let Some(path) = mapping {
        std::fs::write(path, emit_mapping(&model))?;
    }
    let doc = json!({
        "variables": model.n_variables(),
        "constraints": model.n_constraints(),
        "binaries": model.n_binaries(),
        "bundles": model.bundles.len(),
        "allocations": model.allocations.len(),
        "out": out.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(ExitCode::SUCCESS)
}
