//! Command-line front end for the `intgame` library.

mod play;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use intgame::affine::{check_ai_proof, AIProof, CheckMode};
use intgame::completeness::{
    dedollarize, desequentize, elementary_formula, pipeline, standardize, PipelineConfig, SessionConfig,
    StandardSequent,
};
use intgame::game_core::{parse_move, transcript, Interpretation, LabMove, Move, Player, Run, G};
use intgame::int_calculus::{check_int_proof, prove_int, IntProof, ProveOutcome};
use intgame::kripke::countermodel;
use intgame::machines::{arena_run, ccs, BoxStrategy, Idle, RandomAdversary, Strategy};
use intgame::soundness::{extract, extraction_target, sample_interpretations, validate_formula};
use intgame::syntax::{embed_formula, parse_ai, parse_int, Formula, IntSequent, ParsedInt};

#[derive(Parser)]
#[command(name = "intgame", version, about = "Intuitionistic logic with Kripke countermodels and game semantics")]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug)]
struct Config {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Scheduler steps per arena session.
    #[arg(long, global = true, default_value_t = intgame::machines::DEFAULT_BUDGET, value_parser = positive)]
    budget: usize,
    /// Largest Kripke model searched for.
    #[arg(long, global = true, default_value_t = 8, value_parser = positive)]
    bound: usize,
    /// Random seeds, comma separated.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
    seeds: Vec<u64>,
    /// Plays per sampled interpretation when validating.
    #[arg(long, global = true, default_value_t = 20, value_parser = positive)]
    plays: usize,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TransformKind {
    Dedollarize,
    Standardize,
    Desequentize,
    Elementarize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Side {
    Top,
    Bottom,
}

/// Formula and sequent arguments may be given inline or as `@file`.
#[derive(Subcommand)]
enum Cmd {
    /// Parse and print a formula or sequent.
    Parse {
        input: String,
        /// Read the AI language instead of Int.
        #[arg(long)]
        ai: bool,
    },
    /// Decide Int-provability; prints a proof or a countermodel.
    Prove { input: String },
    /// Check a JSON proof file.
    CheckProof {
        file: PathBuf,
        /// The file holds an AI proof.
        #[arg(long)]
        ai: bool,
    },
    /// Search for the smallest Kripke countermodel.
    Countermodel { input: String },
    /// Apply one of the completeness transformations.
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        input: String,
        /// Copies of each `!P -> Q` block.
        #[arg(long, default_value_t = 1, value_parser = positive)]
        n: usize,
    },
    /// Extract a strategy from the proof of an Int-formula or sequent.
    ExtractStrategy {
        input: String,
        /// Also play the strategy against random adversaries.
        #[arg(long)]
        validate: bool,
    },
    /// Run one session between two machines.
    Arena {
        input: String,
        /// Read the AI language instead of Int.
        #[arg(long)]
        ai: bool,
        /// `ccs`, `idle`, `extract`, `random:SEED` or `script:M1,M2,...`.
        #[arg(long, default_value = "ccs")]
        top: String,
        /// `idle`, `random:SEED` or `script:M1,M2,...`.
        #[arg(long, default_value = "random:1")]
        bottom: String,
        /// Interpretation file, or `sample:SEED`.
        #[arg(long, default_value = "sample:1")]
        interp: String,
    },
    /// Refute an unprovable Int-formula through its elementary game.
    Pipeline { input: String },
    /// Play interactively against a machine.
    Play {
        input: String,
        /// Read the AI language instead of Int.
        #[arg(long)]
        ai: bool,
        /// Interpretation file, or `sample:SEED`.
        #[arg(long, default_value = "sample:1")]
        interp: String,
        /// The side you play.
        #[arg(long, value_enum, default_value_t = Side::Bottom)]
        side: Side,
        /// The machine: `extract`, `ccs`, `idle` or `random:SEED`.
        #[arg(long, default_value = "extract")]
        machine: String,
    },
}

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Success,
    Refuted,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Refuted) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = &cli.cfg;
    match &cli.cmd {
        Cmd::Parse { input, ai } => cmd_parse(cfg, &read_input(input)?, *ai),
        Cmd::Prove { input } => cmd_prove(cfg, &read_input(input)?),
        Cmd::CheckProof { file, ai } => cmd_check_proof(cfg, file, *ai),
        Cmd::Countermodel { input } => cmd_countermodel(cfg, &read_input(input)?),
        Cmd::Transform { kind, input, n } => cmd_transform(cfg, *kind, &read_input(input)?, *n),
        Cmd::ExtractStrategy { input, validate } => cmd_extract(cfg, &read_input(input)?, *validate),
        Cmd::Arena { input, ai, top, bottom, interp } => cmd_arena(cfg, &read_input(input)?, *ai, top, bottom, interp),
        Cmd::Pipeline { input } => cmd_pipeline(cfg, &read_input(input)?),
        Cmd::Play { input, ai, interp, side, machine } => {
            let human = match side {
                Side::Top => Player::Top,
                Side::Bottom => Player::Bottom,
            };
            let (f, extracted) =
                session_formula(&read_input(input)?, *ai, machine == "extract" && human == Player::Bottom)?;
            let g = interpret(&f, interp)?;
            let m = self::machine(machine, human.flip(), &g, extracted)?;
            let stdin = std::io::stdin();
            play::repl(&g, m, human, &mut stdin.lock(), &mut std::io::stdout())?;
            Ok(Outcome::Success)
        }
    }
}

fn read_input(s: &str) -> Result<String> {
    match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(s.to_string()),
    }
}

fn emit(cfg: &Config, text: impl FnOnce() -> String, value: impl FnOnce() -> Value) {
    match cfg.format {
        Format::Text => println!("{}", text().trim_end()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value()).expect("values serialize")),
    }
}

fn int_sequent(text: &str) -> Result<IntSequent> {
    Ok(match parse_int(text)? {
        ParsedInt::Formula(f) => IntSequent::goal(f),
        ParsedInt::Sequent(s) => s,
    })
}

fn int_formula(text: &str) -> Result<Formula> {
    match parse_int(text)? {
        ParsedInt::Formula(f) => Ok(f),
        ParsedInt::Sequent(_) => bail!("expected a formula, found a sequent"),
    }
}

fn cmd_parse(cfg: &Config, text: &str, ai: bool) -> Result<Outcome> {
    if ai {
        let f = parse_ai(text)?;
        emit(
            cfg,
            || f.to_string(),
            || json!({"language": "ai", "kind": "formula", "text": f.to_string(), "connectives": f.connectives()}),
        );
        return Ok(Outcome::Success);
    }
    match parse_int(text)? {
        ParsedInt::Formula(f) => emit(
            cfg,
            || f.to_string(),
            || {
                json!({"language": "int", "kind": "formula", "text": f.to_string(), "connectives": f.connectives(),
                      "atoms": f.atoms().iter().map(|a| a.to_string()).collect::<Vec<_>>()})
            },
        ),
        ParsedInt::Sequent(s) => emit(
            cfg,
            || s.to_string(),
            || {
                json!({"language": "int", "kind": "sequent", "text": s.to_string(),
                      "antecedent": s.antecedent.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                      "succedent": s.succedent.to_string()})
            },
        ),
    }
    Ok(Outcome::Success)
}

fn cmd_prove(cfg: &Config, text: &str) -> Result<Outcome> {
    let s = int_sequent(text)?;
    match prove_int(&s)? {
        ProveOutcome::Proved(p) => {
            emit(
                cfg,
                || format!("provable\n{p}"),
                || json!({"sequent": s.to_string(), "provable": true, "proof": p.to_json()}),
            );
            Ok(Outcome::Success)
        }
        ProveOutcome::Unprovable { .. } => {
            let m = countermodel(&s, cfg.bound);
            emit(
                cfg,
                || match &m {
                    Some(m) => format!("unprovable\ncountermodel: {}", m.to_json()),
                    None => format!("unprovable\nno countermodel with at most {} worlds", cfg.bound),
                },
                || json!({"sequent": s.to_string(), "provable": false, "countermodel": m.as_ref().map(|m| m.to_json())}),
            );
            Ok(Outcome::Refuted)
        }
    }
}

/// Parses JSON without the default nesting limit; proof trees nest one level per rule.
fn deep_json(text: &str) -> serde_json::Result<Value> {
    use serde::Deserialize;
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let v = Value::deserialize(&mut de)?;
    de.end()?;
    Ok(v)
}

fn cmd_check_proof(cfg: &Config, file: &PathBuf, ai: bool) -> Result<Outcome> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let v = deep_json(&text).context("proof file is not JSON")?;
    let verdict = if ai {
        let p = AIProof::from_json(&v).map_err(|e| anyhow!(e))?;
        check_ai_proof(&p, CheckMode::Strict).map_err(|e| e.to_string())
    } else {
        let p = IntProof::from_json(&v).map_err(|e| anyhow!(e))?;
        check_int_proof(&p).map_err(|e| e.to_string())
    };
    emit(
        cfg,
        || match &verdict {
            Ok(()) => "valid".into(),
            Err(e) => format!("invalid: {e}"),
        },
        || json!({"valid": verdict.is_ok(), "error": verdict.as_ref().err()}),
    );
    Ok(if verdict.is_ok() { Outcome::Success } else { Outcome::Refuted })
}

fn cmd_countermodel(cfg: &Config, text: &str) -> Result<Outcome> {
    let s = int_sequent(text)?;
    let m = countermodel(&s, cfg.bound);
    emit(
        cfg,
        || match &m {
            Some(m) => m.to_json().to_string(),
            None => format!("no countermodel with at most {} worlds", cfg.bound),
        },
        || json!({"sequent": s.to_string(), "bound": cfg.bound, "countermodel": m.as_ref().map(|m| m.to_json())}),
    );
    Ok(if m.is_some() { Outcome::Refuted } else { Outcome::Success })
}

/// A standard sequent given directly, or the standardization of a dollarless formula.
fn standard_of(text: &str) -> Result<StandardSequent> {
    match parse_int(text)? {
        ParsedInt::Sequent(s) => {
            StandardSequent::from_sequent(&s).ok_or_else(|| anyhow!("{s} is not a standard sequent"))
        }
        ParsedInt::Formula(f) => Ok(standardize(&f)?.0),
    }
}

fn cmd_transform(cfg: &Config, kind: TransformKind, text: &str, n: usize) -> Result<Outcome> {
    match kind {
        TransformKind::Dedollarize => {
            let f = dedollarize(&int_formula(text)?);
            emit(cfg, || f.to_string(), || json!({"dedollarized": f.to_string()}));
        }
        TransformKind::Standardize => {
            let (s, names) = standardize(&int_formula(text)?)?;
            emit(
                cfg,
                || {
                    let mut out = s.to_sequent().to_string();
                    for (h, a) in &names.names {
                        out.push_str(&format!("\n{a} := {h}"));
                    }
                    out
                },
                || json!({"standard": s.to_json(), "naming": names.to_json()}),
            );
        }
        TransformKind::Desequentize => {
            let d = desequentize(&standard_of(text)?, n);
            emit(cfg, || d.to_string(), || json!({"n": n, "desequentized": d.to_string()}));
        }
        TransformKind::Elementarize => {
            let e = elementary_formula(&standard_of(text)?, n);
            emit(cfg, || e.to_string(), || json!({"n": n, "elementary": e.to_string()}));
        }
    }
    Ok(Outcome::Success)
}

fn proved(s: &IntSequent) -> Result<Option<IntProof>> {
    Ok(match prove_int(s)? {
        ProveOutcome::Proved(p) => Some(p),
        ProveOutcome::Unprovable { .. } => None,
    })
}

fn cmd_extract(cfg: &Config, text: &str, validate: bool) -> Result<Outcome> {
    let s = int_sequent(text)?;
    let Some(p) = proved(&s)? else {
        emit(cfg, || format!("{s} is unprovable"), || json!({"sequent": s.to_string(), "provable": false}));
        return Ok(Outcome::Refuted);
    };
    let (strategy, trace) = extract(&p)?;
    let target = extraction_target(&s);
    let stats = validate.then(|| {
        let seed = cfg.seeds.first().copied().unwrap_or(1);
        validate_formula(strategy.as_ref(), &target, cfg.seeds.len().max(1), cfg.plays, seed)
    });
    emit(
        cfg,
        || {
            let mut out = format!("target: {target}\n");
            for e in &trace.entries {
                out.push_str(&format!("{:?} {} {} [{}]\n", e.path, e.case, e.conclusion, e.schemas.join(", ")));
            }
            if let Some(st) = &stats {
                out.push_str(&format!("won {}/{} plays", st.top_wins, st.plays));
            }
            out
        },
        || {
            json!({"sequent": s.to_string(), "target": target.to_string(), "trace": trace.to_json(),
                  "validation": stats.as_ref().map(|st| serde_json::to_value(st).unwrap())})
        },
    );
    Ok(Outcome::Success)
}

/// The interpretation named by `spec` applied to `f`.
fn interpret(f: &Formula, spec: &str) -> Result<G> {
    let interp = match spec.strip_prefix("sample:") {
        Some(seed) => {
            let seed: u64 = seed.parse().context("sample seed")?;
            let max_atom = f.atoms().iter().filter_map(|a| a.index()).max().unwrap_or(1);
            sample_interpretations(seed, 1, max_atom).remove(0)
        }
        None => {
            let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
            Interpretation::from_json(&serde_json::from_str(&text).context("interpretation file is not JSON")?)?
        }
    };
    Ok(interp.interpret(f)?)
}

/// Replays text moves, parsing each against the position it is played in.
#[derive(Clone)]
struct ScriptText {
    game: G,
    me: Player,
    run: Run,
    moves: std::collections::VecDeque<String>,
}

impl Strategy for ScriptText {
    fn observe(&mut self, mv: &Move) {
        self.run.push(LabMove::new(self.me.flip(), mv.clone()));
    }

    fn step(&mut self) -> Option<Move> {
        let text = self.moves.pop_front()?;
        let mv = parse_move(&self.game, &self.run, &text).ok()?;
        self.run.push(LabMove::new(self.me, mv.clone()));
        Some(mv)
    }
}

fn machine(spec: &str, me: Player, game: &G, extracted: Option<BoxStrategy>) -> Result<BoxStrategy> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed = seed.parse().context("random seed")?;
        return Ok(Box::new(RandomAdversary::new(game.clone(), seed, 8).with_player(me)));
    }
    if let Some(list) = spec.strip_prefix("script:") {
        let moves = list.split(',').map(str::trim).filter(|m| !m.is_empty()).map(String::from).collect();
        return Ok(Box::new(ScriptText { game: game.clone(), me, run: Vec::new(), moves }));
    }
    match spec {
        "idle" => Ok(Box::new(Idle)),
        "ccs" if me == Player::Top => Ok(ccs()),
        "extract" if me == Player::Top => extracted.ok_or_else(|| anyhow!("no proof to extract from")),
        _ => bail!("unknown machine {spec:?} for {me}"),
    }
}

/// The formula a session is played on, with the extracted strategy when one is asked for.
fn session_formula(text: &str, ai: bool, wants_extract: bool) -> Result<(Formula, Option<BoxStrategy>)> {
    if ai {
        if wants_extract {
            bail!("extraction needs an Int-formula or sequent");
        }
        return Ok((parse_ai(text)?, None));
    }
    let s = int_sequent(text)?;
    if !wants_extract {
        let f = if s.antecedent.is_empty() { embed_formula(&s.succedent) } else { extraction_target(&s) };
        return Ok((f, None));
    }
    let p = proved(&s)?.ok_or_else(|| anyhow!("{s} is unprovable; nothing to extract"))?;
    let (strategy, _) = extract(&p)?;
    Ok((extraction_target(&s), Some(strategy)))
}

fn cmd_arena(cfg: &Config, text: &str, ai: bool, top: &str, bottom: &str, interp: &str) -> Result<Outcome> {
    let (f, extracted) = session_formula(text, ai, top == "extract")?;
    let g = interpret(&f, interp)?;
    let mut t = machine(top, Player::Top, &g, extracted)?;
    let mut b = machine(bottom, Player::Bottom, &g, None)?;
    let r = arena_run(t.as_mut(), b.as_mut(), &g, cfg.budget);
    emit(
        cfg,
        || format!("{}\nverdict: {:?} (quiesced: {}, steps: {})", transcript(&r.run), r.verdict, r.quiesced, r.steps),
        || {
            let mut v = r.to_json();
            v["formula"] = json!(f.to_string());
            v
        },
    );
    Ok(Outcome::Success)
}

fn cmd_pipeline(cfg: &Config, text: &str) -> Result<Outcome> {
    let k = int_formula(text)?;
    let pc = PipelineConfig {
        model_bound: cfg.bound,
        seeds: cfg.seeds.clone(),
        session: SessionConfig { budget: cfg.budget, ..SessionConfig::default() },
    };
    let b = pipeline(&k, &pc)?;
    emit(
        cfg,
        || {
            let mut out = format!(
                "K: {}\nF: {}\nstandard: {}\nn: {}\nD: {}\nelementary: {}\n",
                b.k,
                b.dedollarized,
                b.standard.to_sequent(),
                b.n,
                b.desequentized,
                b.elementary
            );
            for s in &b.sessions {
                let branch = s.branch.map(|x| format!("{x:?}").to_lowercase()).unwrap_or_else(|| "undetermined".into());
                let verdict = s.verdict.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
                out.push_str(&format!(
                    "{:<12} {:<13} moves {:>3}  verdict {verdict}  invariants {}\n",
                    s.adversary,
                    branch,
                    s.arena.run.len(),
                    if s.invariants.all() { "ok" } else { "FAILED" }
                ));
            }
            out.push_str(if b.refuted() { "refuted" } else { "NOT refuted" });
            out
        },
        || b.to_json(),
    );
    if !b.refuted() {
        bail!("pipeline cross-checks failed");
    }
    Ok(Outcome::Success)
}
