//! Subcommands of the `ckblowup` binary. Exit codes: 0 success, 1 input or
//! algorithm failure, 2 unmet precondition, 3 budget exhausted.

pub mod experiment;

use anyhow::{anyhow, Context};
use ckblowup::constructive::{asymp_factor, AsympParams, ConstructiveError};
use ckblowup::exact::{cover_number, is_linked, max_tiling, Budget, ExactError};
use ckblowup::generators::{complete_blowup, cover_example, haggkvist_example, random_min_degree};
use ckblowup::inequality::{self, Certification, SystemId};
use ckblowup::io::{graph_from_json, graph_to_json, to_dot, Partition};
use ckblowup::swap3::{near_factor3, Swap3Error};
use ckblowup::{validate_tiling, BlowupGraph, Rational, Tiling};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub stage: String,
    pub source: anyhow::Error,
}

impl CliError {
    fn new(code: i32, stage: impl Into<String>, source: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            stage: stage.into(),
            source: source.into(),
        }
    }

    fn input(source: impl Into<anyhow::Error>) -> Self {
        Self::new(EXIT_FAILURE, "input", source)
    }
}

type CmdResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ckblowup",
    version,
    about = "Transversal cycle tilings in blow-ups of cycles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated instance as JSON.
    Generate(GenerateArgs),
    /// Print the degree profile and which degree hypotheses hold.
    Check { file: PathBuf },
    /// Find a transversal tiling.
    Tile(TileArgs),
    /// Exact minimum transversal cover.
    Cover {
        file: PathBuf,
        #[arg(long)]
        budget_ms: Option<u64>,
    },
    /// Exhaustive (η, t)-linkedness check.
    Linking {
        file: PathBuf,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        budget_ms: Option<u64>,
    },
    /// Certify the inequality systems B1..B5.
    Verify(VerifyArgs),
    /// Factor rates over a grid of degree vectors, as CSV.
    Experiment(ExperimentArgs),
    /// Graphviz export.
    Dot {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Complete,
    Haggkvist,
    Cover,
    Random,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// `p/q`, for the cover family.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Comma-separated minimum degrees, for the random family.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sidecar file for the named vertex blocks.
    #[arg(long)]
    pub partition: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TileArgs {
    pub file: PathBuf,
    #[arg(long, group = "method")]
    pub exact: bool,
    #[arg(long, group = "method")]
    pub constructive: bool,
    #[arg(long, group = "method")]
    pub swap3: bool,
    #[arg(long)]
    pub budget_ms: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Move cap for the local search.
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,
    /// Write the tiling as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the move trace (local search) or stage log (constructive) as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// B1..B5, B1-weak, or `all`; repeatable.
    #[arg(long = "lemma", required = true)]
    pub lemmas: Vec<String>,
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
    #[arg(long, default_value = "1/1000000")]
    pub margin: String,
    /// Also run the grid scan at this resolution.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Directory for certificate files `<lemma>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub from: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub to: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub budget_ms: u64,
    #[arg(long, default_value_t = 20_000)]
    pub max_runs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Check { file } => check(&file),
        Command::Tile(a) => tile(a),
        Command::Cover { file, budget_ms } => cover(&file, budget_ms),
        Command::Linking {
            file,
            eta,
            t,
            budget_ms,
        } => linking(&file, eta, t, budget_ms),
        Command::Verify(a) => verify(a),
        Command::Experiment(a) => run_experiment(a),
        Command::Dot { file, out } => {
            let g = load(&file)?;
            emit(out.as_deref(), &to_dot(&g))
        }
    }
}

pub fn load(path: &Path) -> Result<BlowupGraph, CliError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::input)?;
    graph_from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(CliError::input)
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(CliError::input),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn budget(ms: Option<u64>) -> Budget {
    Budget::new(ms.map(Duration::from_millis))
}

fn precondition(stage: &str, msg: impl Into<String>) -> CliError {
    CliError::new(EXIT_PRECONDITION, stage, anyhow!(msg.into()))
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    v.ok_or_else(|| {
        precondition(
            "generate",
            format!("--{flag} is required for the {family} family"),
        )
    })
}

fn parse_fraction(s: &str) -> Result<(i64, i64), CliError> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: i64 = p
        .trim()
        .parse()
        .map_err(|_| precondition("generate", format!("bad fraction {s:?}")))?;
    let q: i64 = q
        .trim()
        .parse()
        .map_err(|_| precondition("generate", format!("bad fraction {s:?}")))?;
    Ok((p, q))
}

fn generate(a: GenerateArgs) -> CmdResult {
    let pre = |e: anyhow::Error| CliError::new(EXIT_PRECONDITION, "generate", e);
    let (graph, partition): (BlowupGraph, Option<Partition>) = match a.family {
        Family::Complete => {
            let g = complete_blowup(need(a.k, "k", "complete")?, need(a.n, "n", "complete")?)
                .map_err(|e| pre(e.into()))?;
            (g, None)
        }
        Family::Haggkvist => {
            let inst =
                haggkvist_example(need(a.k, "k", "haggkvist")?, need(a.m, "m", "haggkvist")?)
                    .map_err(|e| pre(e.into()))?;
            (inst.graph, Some(inst.partition))
        }
        Family::Cover => {
            let (p, q) = parse_fraction(&need(a.gamma, "gamma", "cover")?)?;
            let ex = cover_example(p, q).map_err(|e| pre(e.into()))?;
            (ex.instance.graph, Some(ex.instance.partition))
        }
        Family::Random => {
            let seed = need(a.seed, "seed", "random")?;
            let (k, n) = (need(a.k, "k", "random")?, need(a.n, "n", "random")?);
            (
                random_min_degree(k, n, &a.deltas, seed).map_err(|e| pre(e.into()))?,
                None,
            )
        }
    };
    if let (Some(path), Some(part)) = (&a.partition, &partition) {
        emit(Some(path), &part.to_sidecar_json(&graph))?;
    } else if a.partition.is_some() {
        return Err(precondition("generate", "this family has no named blocks"));
    }
    emit(a.out.as_deref(), &graph_to_json(&graph))
}

/// Degree hypotheses as exact integer comparisons.
pub fn hypotheses(g: &BlowupGraph) -> serde_json::Value {
    let profile = g.degree_profile();
    let (k, n, ds) = (g.k(), g.n(), profile.delta_star);
    // δ* ≥ (1 + 1/k) n/2 + 1  ⇔  2kδ* ≥ (k+1)n + 2k
    let conj = json!({ "threshold": ((k + 1) * n) as f64 / (2 * k) as f64 + 1.0, "holds": 2 * k * ds >= (k + 1) * n + 2 * k });
    let mut out = json!({
        "k": k,
        "n": n,
        "deltas": profile.deltas,
        "delta_star": ds,
        "conjectured_factor_bound": conj,
    });
    if k == 3 {
        let d = &profile.deltas;
        let halves = d.iter().all(|&x| 2 * x >= n);
        let sum: usize = d.iter().sum();
        let mut sorted = d.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        out["average_bound"] = json!({
            "description": "all deltas >= n/2 and mean delta > 2n/3",
            "holds": halves && 3 * sum > 6 * n,
        });
        out["sum_bound"] = json!({
            "description": "all deltas >= n/2 and delta_1 + delta_2 + delta_3 >= 2n",
            "holds": halves && sum >= 2 * n,
        });
        out["cover_bound"] = json!({
            "description": "sorted delta_3 >= n/2 and (delta_1 + delta_2)/2 >= 2n/3",
            "holds": 2 * sorted[2] >= n && 3 * (sorted[0] + sorted[1]) >= 4 * n,
        });
    }
    out
}

fn check(file: &Path) -> CmdResult {
    let g = load(file)?;
    emit(
        None,
        &serde_json::to_string_pretty(&hypotheses(&g)).expect("json"),
    )
}

fn write_tiling(out: Option<&Path>, tiling: &Tiling) -> CmdResult {
    match out {
        Some(p) => emit(Some(p), &serde_json::to_string(tiling).expect("json")),
        None => Ok(()),
    }
}

fn write_lines<T: serde::Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> CmdResult {
    let mut f = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(CliError::input)?;
    for item in items {
        writeln!(f, "{}", serde_json::to_string(&item).expect("json"))
            .map_err(|e| CliError::input(e))?;
    }
    Ok(())
}

fn tile(a: TileArgs) -> CmdResult {
    let g = load(&a.file)?;
    if a.constructive {
        let epsilon = a
            .epsilon
            .ok_or_else(|| precondition("tile", "--epsilon is required with --constructive"))?;
        let seed = a
            .seed
            .ok_or_else(|| precondition("tile", "--seed is required with --constructive"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return match asymp_factor(&g, epsilon, AsympParams::default(), &mut rng) {
            Ok(out) => {
                if let Some(p) = &a.trace {
                    write_lines(p, [&out.log])?;
                }
                write_tiling(a.out.as_deref(), &out.tiling)?;
                emit(
                    None,
                    &json!({ "method": "constructive", "size": out.tiling.len(), "log": out.log })
                        .to_string(),
                )
            }
            Err(f) => {
                if let Some(p) = &a.trace {
                    write_lines(p, [&f.log])?;
                }
                let code = match &f.source {
                    ConstructiveError::BelowThreshold { .. }
                    | ConstructiveError::NotLinked { .. }
                    | ConstructiveError::SigmaTooLarge { .. }
                    | ConstructiveError::NoRoom { .. } => EXIT_PRECONDITION,
                    _ => EXIT_FAILURE,
                };
                Err(CliError::new(code, f.stage, f.source))
            }
        };
    }
    if a.swap3 {
        return match near_factor3(&g, a.cap) {
            Ok(out) => {
                if let Some(p) = &a.trace {
                    write_lines(p, &out.trace)?;
                }
                write_tiling(a.out.as_deref(), &out.tiling)?;
                emit(None, &json!({ "method": "swap3", "size": out.tiling.len(), "moves": out.trace.len() }).to_string())
            }
            Err(e) => {
                if let (Some(art), Some(p)) = (e.artifact(), &a.trace) {
                    emit(Some(p), &art.to_json())?;
                }
                let code = match e {
                    Swap3Error::CapReached { .. } => EXIT_BUDGET,
                    Swap3Error::NotTriangle(_) | Swap3Error::Degrees { .. } => EXIT_PRECONDITION,
                    _ => EXIT_FAILURE,
                };
                Err(CliError::new(code, "swap3", e))
            }
        };
    }
    let r = max_tiling(&g, budget(a.budget_ms));
    validate_tiling(&g, &r.witness).map_err(|e| CliError::new(EXIT_FAILURE, "exact", e))?;
    write_tiling(a.out.as_deref(), &r.witness)?;
    emit(
        None,
        &json!({ "method": "exact", "size": r.size, "optimal": r.optimal, "millis": r.millis })
            .to_string(),
    )?;
    if r.optimal {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_BUDGET,
            "exact",
            anyhow!("budget exhausted; best tiling has size {}", r.size),
        ))
    }
}

fn cover(file: &Path, budget_ms: Option<u64>) -> CmdResult {
    let g = load(file)?;
    let r = cover_number(&g, None, budget(budget_ms));
    emit(None, &serde_json::to_string(&r).expect("json"))?;
    if r.optimal {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_BUDGET,
            "cover",
            anyhow!("budget exhausted; best cover has size {}", r.size),
        ))
    }
}

fn linking(file: &Path, eta: f64, t: usize, budget_ms: Option<u64>) -> CmdResult {
    let g = load(file)?;
    match is_linked(&g, eta, t, budget(budget_ms)) {
        Ok(r) => emit(None, &serde_json::to_string(&r).expect("json")),
        Err(e @ ExactError::BudgetExceeded { .. }) => Err(CliError::new(EXIT_BUDGET, "linking", e)),
        Err(e) => Err(CliError::new(EXIT_PRECONDITION, "linking", e)),
    }
}

fn verify(a: VerifyArgs) -> CmdResult {
    let margin: Rational = a
        .margin
        .parse()
        .map_err(|_| precondition("verify", format!("bad margin {:?}", a.margin)))?;
    let mut ids = Vec::new();
    for l in &a.lemmas {
        if l.eq_ignore_ascii_case("all") {
            ids.extend(SystemId::PAPER);
        } else {
            ids.push(
                l.parse::<SystemId>()
                    .map_err(|e| precondition("verify", e.to_string()))?,
            );
        }
    }
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(CliError::input)?;
    }
    let mut worst: Option<CliError> = None;
    for id in ids {
        let mut line = json!({ "lemma": id.to_string() });
        match inequality::certify_infeasible(id, a.depth, &margin) {
            Ok(Certification::Infeasible(cert)) => {
                let replay = inequality::verify_certificate(&cert);
                line["certified"] = json!(replay.is_ok());
                line["max_depth"] = json!(cert.max_depth);
                line["leaf_count"] = json!(cert.leaf_count);
                line["millis"] = json!(cert.millis);
                if let Some(dir) = &a.out {
                    emit(
                        Some(&dir.join(format!("{id}.json"))),
                        &serde_json::to_string(&cert).expect("json"),
                    )?;
                }
                if let Err(e) = replay {
                    worst.get_or_insert(CliError::new(EXIT_FAILURE, format!("verify {id}"), e));
                }
            }
            Ok(Certification::Feasible(p)) => {
                line["certified"] = json!(false);
                line["feasible_point"] = json!(p.point);
                worst.get_or_insert(CliError::new(
                    EXIT_FAILURE,
                    format!("verify {id}"),
                    anyhow!("feasible point found"),
                ));
            }
            Err(e) => {
                line["certified"] = json!(false);
                line["error"] = json!(e.to_string());
                worst.get_or_insert(CliError::new(EXIT_BUDGET, format!("verify {id}"), e));
            }
        }
        if let Some(res) = a.grid {
            let scan = inequality::grid_scan::<f64>(id, res, &margin)
                .map_err(|e| CliError::new(EXIT_FAILURE, "grid", e))?;
            line["grid"] = serde_json::to_value(&scan).expect("json");
        }
        println!("{line}");
    }
    worst.map_or(Ok(()), Err)
}

fn run_experiment(a: ExperimentArgs) -> CmdResult {
    let config = experiment::ExperimentConfig {
        k: a.k,
        n: a.n,
        trials: a.trials,
        seed: a.seed,
        budget_ms: a.budget_ms,
        max_runs: a.max_runs,
    };
    let grid = experiment::GridSpec {
        from: a.from,
        to: a.to,
        step: a.step,
    };
    let rows = experiment::run(&config, &grid)
        .map_err(|e| CliError::new(EXIT_PRECONDITION, "experiment", e))?;
    let unproven: usize = rows.iter().map(|r| r.unproven).sum();
    if unproven > 0 {
        eprintln!("warning: {unproven} trials hit the budget before proving optimality");
    }
    let f = fs::File::create(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .map_err(CliError::input)?;
    experiment::write_csv(&rows, a.k, f).map_err(CliError::input)
}
