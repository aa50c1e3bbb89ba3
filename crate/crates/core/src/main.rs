//! Command-line front end. Exit status: 0 verified, 2 refuted as
//! expected, 3 inconclusive, 1 error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use diffprod::constraints::{diagnose, extract_constraints, Diagnosis};
use diffprod::experiment::{experiment_nonfinax, experiment_square};
use diffprod::formula::{classify_sahlqvist, parse_formula, render_formula, Formula};
use diffprod::frame::Frame;
use diffprod::grid::{decompose_frame, realize_grid, BiCluster, GridSpec};
use diffprod::pipeline::{diagnosis_report, grid_from_json, synth_bundle, SynthKind};
use diffprod::pmorph::{
    assemble_product_pmorphism, bicluster_preimage, game_play, pmorphism_profile, Adversary, Move,
    Strategy,
};
use diffprod::semantics::{valid_in_frame, CheckMode, Validity};
use diffprod::synth::recognize_axiom;
use diffprod::{Error, ExtNat, Result};

#[derive(Parser)]
#[command(
    name = "diffprod",
    version,
    about = "Products of difference frames: grids, constraints, axioms"
)]
struct Cli {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula (text, or @file) and print it back.
    Parse { formula: String },
    /// Sahlqvist class and recognized axiom of a formula, or the type of a
    /// bi-cluster given with --cluster.
    Classify {
        formula: Option<String>,
        #[arg(long)]
        cluster: Option<String>,
    },
    /// Grid of bi-clusters of a frame file.
    Decompose { file: PathBuf },
    /// Frame of a grid file.
    Realize { file: PathBuf },
    /// Diagnose a grid or frame file.
    Diagnose { file: PathBuf },
    /// Synthesize the refuting axiom with its countermodel.
    Synth {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        kind: KindArg,
    },
    /// Validity of a formula in a frame or grid file.
    Check {
        formula: String,
        file: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Onto p-morphism from a product of difference frames onto a grid.
    Assemble {
        file: PathBuf,
        /// Node sizes as a JSON object; defaults to the canonical solution.
        #[arg(long)]
        xi: Option<String>,
        /// Print only sizes and the profile, not the map.
        #[arg(long)]
        summary: bool,
    },
    /// Play the network game on a bi-cluster.
    Game(GameArgs),
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Auto,
    Impossible,
    Badpath,
    Square,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exhaustive budget in valuation bits (variables × worlds).
    #[arg(long, default_value_t = 24)]
    bound: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    FromPmorphism,
    GreedyRr,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Random,
    Exhaustive,
    Scripted,
}

#[derive(Args)]
struct GameArgs {
    /// Bi-cluster as JSON, e.g. '{"ii":3}'.
    #[arg(long)]
    cluster: String,
    #[arg(long, value_enum, default_value = "search")]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "random")]
    adversary: AdversaryArg,
    /// Move list for the scripted adversary (a JSON array or a transcript).
    #[arg(long)]
    script: Option<PathBuf>,
    /// Lookahead of the exhaustive adversary.
    #[arg(long, default_value_t = 4)]
    bound: usize,
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Experiment {
    Nonfinax {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Square {
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy)]
enum Status {
    Verified = 0,
    Refuted = 2,
    Inconclusive = 3,
}

fn read_json(p: &PathBuf) -> Result<Value> {
    let text = fs::read_to_string(p)?;
    serde_json::from_str(&text).map_err(|e| Error::Json(format!("{}: {e}", p.display())))
}

fn formula_arg(s: &str) -> Result<Formula> {
    match s.strip_prefix('@') {
        Some(path) => parse_formula(&fs::read_to_string(path)?),
        None => parse_formula(s),
    }
}

fn cluster_arg(s: &str) -> Result<BiCluster> {
    serde_json::from_str(s).map_err(|e| Error::Json(format!("cluster: {e}")))
}

fn frame_of(v: &Value) -> Result<Frame> {
    if v.get("worlds").is_some() {
        serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))
    } else {
        let g: GridSpec =
            serde_json::from_value(v.clone()).map_err(|e| Error::Json(e.to_string()))?;
        Ok(realize_grid(&g)?.frame)
    }
}

fn run(cmd: Cmd) -> Result<(Value, Status)> {
    use Status::*;
    Ok(match cmd {
        Cmd::Parse { formula } => {
            let f = formula_arg(&formula)?;
            (
                json!({ "formula": render_formula(&f), "vars": f.vars(), "size": f.size() }),
                Verified,
            )
        }
        Cmd::Classify { formula, cluster } => match (formula, cluster) {
            (Some(f), None) => {
                let f = formula_arg(&f)?;
                let recognized = recognize_axiom(&f);
                (
                    json!({ "sahlqvist": classify_sahlqvist(&f), "recognized": recognized }),
                    Verified,
                )
            }
            (None, Some(c)) => {
                let c = cluster_arg(&c)?;
                let (h, v, n) = c.sizes();
                (
                    json!({ "cluster": c, "type": c.classify()?, "h_size": h, "v_size": v, "size": n }),
                    Verified,
                )
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "give a formula or --cluster, not both".into(),
                ))
            }
        },
        Cmd::Decompose { file } => {
            let f: Frame = serde_json::from_value(read_json(&file)?)
                .map_err(|e| Error::Json(e.to_string()))?;
            (
                serde_json::to_value(decompose_frame(&f)?).expect("serializable"),
                Verified,
            )
        }
        Cmd::Realize { file } => {
            let g: GridSpec = serde_json::from_value(read_json(&file)?)
                .map_err(|e| Error::Json(e.to_string()))?;
            (
                serde_json::to_value(realize_grid(&g)?).expect("serializable"),
                Verified,
            )
        }
        Cmd::Diagnose { file } => {
            let (g, info) = grid_from_json(&read_json(&file)?)?;
            let mut r = diagnosis_report(&g);
            if let Some(info) = info {
                r["decomposition"] = info;
            }
            let status = if r["verdict"] == "good" {
                Verified
            } else {
                Refuted
            };
            (r, status)
        }
        Cmd::Synth { file, kind } => {
            let (g, _) = grid_from_json(&read_json(&file)?)?;
            let kind = match kind {
                KindArg::Auto => SynthKind::Auto,
                KindArg::Impossible => SynthKind::Impossible,
                KindArg::Badpath => SynthKind::Badpath,
                KindArg::Square => SynthKind::Square,
            };
            let b = synth_bundle(&g, kind)?;
            let mut v = b.to_json();
            v["countermodel_verified"] = json!(true);
            (v, Refuted)
        }
        Cmd::Check {
            formula,
            file,
            mode,
        } => {
            let f = formula_arg(&formula)?;
            let frame = frame_of(&read_json(&file)?)?;
            let m = match mode.mode {
                ModeArg::Exhaustive => CheckMode::Exhaustive { budget: mode.bound },
                ModeArg::Sampled => CheckMode::Sampled {
                    trials: mode.trials,
                    seed: mode.seed,
                },
            };
            match valid_in_frame(&frame, &f, m) {
                Ok(Validity::Valid) => (json!({ "result": "valid" }), Verified),
                Ok(Validity::Refuted { model, world }) => (
                    json!({ "result": "refuted", "world": world, "valuation": serde_json::to_value(&model).expect("serializable")["valuation"] }),
                    Refuted,
                ),
                Ok(Validity::NoCounterexampleFound {
                    trials,
                    seed,
                    antecedent_hits,
                }) => (
                    json!({ "result": "no_counterexample_found", "trials": trials, "seed": seed, "antecedent_hits": antecedent_hits }),
                    Inconclusive,
                ),
                Err(e @ Error::BudgetExceeded { .. }) => (
                    json!({ "result": "inconclusive", "reason": e.to_string() }),
                    Inconclusive,
                ),
                Err(e) => return Err(e),
            }
        }
        Cmd::Assemble { file, xi, summary } => {
            let (g, _) = grid_from_json(&read_json(&file)?)?;
            let con = extract_constraints(&g)
                .map_err(|c| Error::Precondition(format!("impossible cell {:?}", c.kind)))?;
            let xi: Vec<ExtNat> = match xi {
                Some(s) => {
                    let named =
                        serde_json::from_str(&s).map_err(|e| Error::Json(format!("xi: {e}")))?;
                    con.from_named(&named)?
                }
                None => match diagnose(&g) {
                    Diagnosis::Good { xi_min } => xi_min,
                    _ => return Err(Error::Precondition("grid has no solution".into())),
                },
            };
            let pm = assemble_product_pmorphism(&g, &xi)?;
            let profile = pmorphism_profile(&g, &pm)?;
            let mut v = json!({
                "xi": con.named(&xi),
                "source": { "nx": pm.nx, "ny": pm.ny },
                "profile": con.named(&profile),
                "verified": true,
            });
            if !summary {
                v["map"] = json!(pm.map);
            }
            (v, Verified)
        }
        Cmd::Game(a) => {
            let c = cluster_arg(&a.cluster)?;
            let strategy = match a.strategy {
                StrategyArg::GreedyRr => Strategy::GreedyRr,
                StrategyArg::Search => Strategy::Search,
                StrategyArg::FromPmorphism => {
                    let g = GridSpec::new(vec!["x".into()], vec!["y".into()], vec![vec![c]])?;
                    let Diagnosis::Good { xi_min } = diagnose(&g) else {
                        return Err(Error::Precondition(format!("{c} has no product preimage")));
                    };
                    let size = |e: ExtNat| {
                        e.finite()
                            .map(|n| n as usize)
                            .ok_or_else(|| Error::Infinite(c.to_string()))
                    };
                    Strategy::FromPMorphism(bicluster_preimage(
                        &c,
                        size(xi_min[0])?,
                        size(xi_min[1])?,
                    )?)
                }
            };
            let adversary = match a.adversary {
                AdversaryArg::Random => Adversary::Random { seed: a.seed },
                AdversaryArg::Exhaustive => Adversary::Exhaustive { depth: a.bound },
                AdversaryArg::Scripted => {
                    let path = a
                        .script
                        .ok_or_else(|| Error::Script("--script is required".into()))?;
                    let v = read_json(&path)?;
                    let moves = match v.get("transcript") {
                        Some(t) => t
                            .as_array()
                            .map(|rs| rs.iter().map(|r| r["move"].clone()).collect())
                            .unwrap_or_default(),
                        None => v,
                    };
                    let moves: Vec<Move> =
                        serde_json::from_value(moves).map_err(|e| Error::Script(e.to_string()))?;
                    Adversary::Scripted(moves)
                }
            };
            let r = game_play(&c, &adversary, &strategy, a.rounds)?;
            let status = if r.survived() { Verified } else { Refuted };
            (r.to_json(), status)
        }
        Cmd::Experiment(e) => {
            let start = Instant::now();
            let r = match e {
                Experiment::Nonfinax { k, m, seed } => experiment_nonfinax(k, m, seed)?,
                Experiment::Square { k, m, seed } => experiment_square(k, m, seed)?,
            };
            eprintln!(
                "seed {}; {} steps verified in {:.2?}",
                r.params.seed,
                r.steps.len(),
                start.elapsed()
            );
            (r.to_json(), Verified)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok((v, status)) => {
            let text = serde_json::to_string_pretty(&v).expect("serializable") + "\n";
            let written = match &cli.out {
                Some(p) => fs::write(p, text).map_err(Error::from),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::from(status as u8),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
