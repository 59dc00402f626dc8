//! `selfx`: load, infer over and query a capability knowledge base.
//!
//! Exit status is 0 on success, 1 when a query answers "no" and 2 on error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use selfx_core::assess::{read_log, train_behavior, Conditions, SomConfig, SomMap};
use selfx_core::inference::{self, explain, infer_to_fixpoint, trace_jsonl};
use selfx_core::kb::{FactId, KnowledgeBase};
use selfx_core::mission::{self, AssessmentResult, Predictors, SuccessPredictor};
use selfx_core::schema::{self, validate_component};
use selfx_core::sxdl;

#[derive(Parser)]
#[command(name = "selfx", version, about = "Capability knowledge base: can the robot do it?")]
struct Cli {
    /// Knowledge base snapshot.
    #[arg(long, global = true, env = "SELFX_KB", default_value = "selfx-kb.json")]
    kb: PathBuf,
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an sxdl file and add it to the knowledge base.
    Load { file: PathBuf },
    /// Run inference to a fixpoint.
    Infer {
        /// Write one JSON line per derivation.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// List inferred relations.
    Query {
        #[command(subcommand)]
        what: Query,
    },
    /// Print the derivation tree of a fact.
    Explain { fact: FactId },
    /// Check a component against its design pattern.
    Validate { component: String },
    /// Train a success map from an experience log.
    Train(TrainArgs),
    /// Assess one behavior under given conditions.
    Assess {
        #[arg(long)]
        behavior: String,
        #[arg(long)]
        conditions: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
    /// Answer whether a behavior reaches a success probability.
    Can {
        behavior: String,
        #[arg(long)]
        min_performance: f64,
        #[arg(long)]
        conditions: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Pick the best feasible behavior.
    Select {
        #[arg(long)]
        conditions: PathBuf,
        /// `BEHAVIOR=FILE`; repeatable.
        #[arg(long = "map", value_parser = parse_binding)]
        maps: Vec<(String, PathBuf)>,
        #[arg(long)]
        min_performance: Option<f64>,
    },
}

#[derive(Subcommand)]
enum Query {
    /// Processing relations, optionally by output class.
    Processing {
        #[arg(long)]
        output: Option<String>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    behavior: String,
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.rsplit_once('=').ok_or("expected BEHAVIOR=FILE")?;
    Ok((name.to_string(), PathBuf::from(path)))
}

/// Outcome of a command that succeeded.
enum Answer {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Answer::Yes) => ExitCode::SUCCESS,
        Ok(Answer::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Answer> {
    let out = &mut std::io::stdout().lock();
    match &cli.command {
        Command::Load { file } => {
            let mut kb = if cli.kb.exists() { open_kb(&cli.kb)? } else { schema::new_kb() };
            let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let report = sxdl::load_str(&text, &mut kb).with_context(|| file.display().to_string())?;
            save_kb(&cli.kb, &kb)?;
            if cli.json {
                print_json(out, &report)?;
            } else {
                writeln!(out, "classes added   {}", report.classes_added)?;
                writeln!(out, "instances added {}", report.instances_added)?;
                writeln!(out, "links added     {}", report.links_added)?;
                for (category, n) in &report.categories {
                    writeln!(out, "  {category:<24} {n}")?;
                }
            }
            Ok(Answer::Yes)
        }
        Command::Infer { trace } => {
            let mut kb = open_kb(&cli.kb)?;
            let report = infer_to_fixpoint(&mut kb)?;
            save_kb(&cli.kb, &kb)?;
            if let Some(path) = trace {
                let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = std::io::BufWriter::new(file);
                trace_jsonl(&kb, &mut w)?;
                w.flush()?;
            }
            if cli.json {
                print_json(out, &report)?;
            } else {
                let s = &report.stats;
                writeln!(out, "rounds     {}", s.rounds)?;
                writeln!(out, "retracted  {}", s.retracted)?;
                writeln!(out, "wall time  {:.3} ms", s.wall_time.as_secs_f64() * 1e3)?;
                for (rule, n) in &s.facts_added {
                    writeln!(out, "  {:<22} {n}", rule.name())?;
                }
                writeln!(out, "  {:<22} {}", "total", s.total_added())?;
                for e in &report.ledger.entries {
                    writeln!(
                        out,
                        "resource {} committed {} of {}",
                        kb.label(e.provider),
                        e.committed_throughput,
                        e.throughput.map_or("?".to_string(), |t| t.to_string())
                    )?;
                }
                for d in &report.diagnostics {
                    writeln!(out, "warning[{}] {}: {}", d.code, kb.label(d.subject), d.message)?;
                }
            }
            Ok(Answer::Yes)
        }
        Command::Query { what: Query::Processing { output } } => {
            let kb = open_kb(&cli.kb)?;
            if let Some(c) = output {
                kb.require_class(c)?;
            }
            let rows = inference::processings_with_output(&kb, output.as_deref());
            if cli.json {
                #[derive(Serialize)]
                struct Row {
                    id: FactId,
                    executors: Vec<String>,
                    inputs: Vec<String>,
                    output: Option<String>,
                }
                let rows: Vec<Row> = rows
                    .iter()
                    .map(|p| Row {
                        id: p.id,
                        executors: p.executors.iter().map(|e| kb.label(*e)).collect(),
                        inputs: p.inputs.iter().map(|e| kb.label(*e)).collect(),
                        output: p.output.map(|o| kb.label(o)),
                    })
                    .collect();
                print_json(out, &rows)?;
            } else {
                writeln!(out, "{:<6} {:<40} {:<40} output", "id", "executors", "inputs")?;
                for p in &rows {
                    writeln!(
                        out,
                        "{:<6} {:<40} {:<40} {}",
                        p.id.to_string(),
                        labels(&kb, &p.executors, " > "),
                        labels(&kb, &p.inputs, ", "),
                        p.output.map_or("-".to_string(), |o| kb.label(o))
                    )?;
                }
            }
            Ok(Answer::Yes)
        }
        Command::Explain { fact } => {
            let kb = open_kb(&cli.kb)?;
            let tree = explain(&kb, *fact)?;
            if cli.json {
                print_json(out, &tree)?;
            } else {
                write!(out, "{}", tree.render())?;
            }
            Ok(Answer::Yes)
        }
        Command::Validate { component } => {
            let kb = open_kb(&cli.kb)?;
            let id = kb.lookup(component).with_context(|| format!("no instance named `{component}`"))?;
            let report = validate_component(&kb, id)?;
            if cli.json {
                print_json(out, &report)?;
            } else if report.is_conformant() {
                writeln!(out, "{component}: conformant")?;
            } else {
                for v in &report.violations {
                    writeln!(out, "{component}: [{}] {}", v.rule, v.message)?;
                }
            }
            Ok(if report.is_conformant() { Answer::Yes } else { Answer::No })
        }
        Command::Train(args) => {
            let records = read_log(&args.log)?;
            let config = SomConfig {
                seed: args.seed,
                rows: args.rows,
                cols: args.cols,
                epochs: args.epochs,
                ..SomConfig::default()
            };
            let map = train_behavior(&records, &args.behavior, config)?;
            fs::write(&args.out, map.to_text()).with_context(|| format!("writing {}", args.out.display()))?;
            let trained = map.nodes.iter().map(|n| n.member_count).sum::<usize>();
            if cli.json {
                #[derive(Serialize)]
                struct Trained<'a> {
                    behavior: &'a str,
                    records: usize,
                    features: &'a [String],
                    out: &'a Path,
                }
                print_json(
                    out,
                    &Trained { behavior: &args.behavior, records: trained, features: &map.feature_names, out: &args.out },
                )?;
            } else {
                writeln!(
                    out,
                    "trained `{}` on {trained} records ({}) -> {}",
                    args.behavior,
                    map.feature_names.join(", "),
                    args.out.display()
                )?;
            }
            Ok(Answer::Yes)
        }
        Command::Assess { behavior, conditions, map } => {
            let kb = open_kb(&cli.kb)?;
            let conditions = read_conditions(conditions)?;
            let map = read_map(map)?;
            let result = mission::assess_behavior(&kb, behavior, &conditions, Some(&map as &dyn SuccessPredictor))?;
            print_results(out, cli.json, std::slice::from_ref(&result))?;
            Ok(Answer::Yes)
        }
        Command::Can { behavior, min_performance, conditions, map } => {
            let kb = open_kb(&cli.kb)?;
            let conditions = read_conditions(conditions)?;
            let map = map.as_deref().map(read_map).transpose()?;
            let answer = mission::can_i_do_it(
                &kb,
                behavior,
                *min_performance,
                &conditions,
                map.as_ref().map(|m| m as &dyn SuccessPredictor),
            )?;
            let word = if answer.yes { "yes" } else { "no" };
            if cli.json {
                #[derive(Serialize)]
                struct Out<'a> {
                    answer: &'a str,
                    result: &'a AssessmentResult,
                }
                print_json(out, &Out { answer: word, result: &answer.result })?;
            } else {
                writeln!(out, "{word}")?;
                print_results(out, false, std::slice::from_ref(&answer.result))?;
            }
            Ok(if answer.yes { Answer::Yes } else { Answer::No })
        }
        Command::Select { conditions, maps, min_performance } => {
            let kb = open_kb(&cli.kb)?;
            let conditions = read_conditions(conditions)?;
            let mut predictors = Predictors::new();
            for (name, path) in maps {
                mission::find_behavior(&kb, name)?;
                predictors.insert(name, read_map(path)?);
            }
            let ranked = mission::rank_behaviors(&kb, &conditions, &predictors)?;
            let chosen = mission::select_behavior(&kb, &conditions, &predictors, *min_performance)?;
            if cli.json {
                #[derive(Serialize)]
                struct Out<'a> {
                    selected: Option<&'a str>,
                    candidates: &'a [AssessmentResult],
                }
                print_json(out, &Out { selected: chosen.as_deref(), candidates: &ranked })?;
            } else {
                writeln!(out, "selected: {}", chosen.as_deref().unwrap_or("none"))?;
                print_results(out, false, &ranked)?;
            }
            Ok(if chosen.is_some() { Answer::Yes } else { Answer::No })
        }
    }
}

fn labels(kb: &KnowledgeBase, ids: &[FactId], sep: &str) -> String {
    ids.iter().map(|i| kb.label(*i)).collect::<Vec<_>>().join(sep)
}

fn print_json(out: &mut impl Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn print_results(out: &mut impl Write, json: bool, results: &[AssessmentResult]) -> Result<()> {
    if json {
        return print_json(out, &results);
    }
    let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    writeln!(out, "{:<32} {:<9} {:<9} {:<12} supporting", "behavior", "feasible", "p_success", "inaccuracy")?;
    for r in results {
        writeln!(
            out,
            "{:<32} {:<9} {:<9} {:<12} {}",
            r.behavior,
            if r.feasible { "yes" } else { "no" },
            num(r.p_success),
            num(r.position_inaccuracy),
            r.supporting_processing.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
        )?;
    }
    Ok(())
}

fn open_kb(path: &Path) -> Result<KnowledgeBase> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading knowledge base {} (run `selfx load` first)", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("decoding knowledge base {}", path.display()))
}

/// Writes through a sibling temporary file so a crash never leaves a
/// truncated snapshot.
fn save_kb(path: &Path, kb: &KnowledgeBase) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, serde_json::to_vec(kb)?).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn read_conditions(path: &Path) -> Result<Conditions> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let c = Conditions::parse_sxdl(&text).with_context(|| path.display().to_string())?;
    c.validate().with_context(|| path.display().to_string())?;
    Ok(c)
}

fn read_map(path: &Path) -> Result<SomMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let map = SomMap::from_text(&text).with_context(|| path.display().to_string())?;
    if map.nodes.iter().all(|n| n.member_count == 0) {
        bail!("{}: map has no trained nodes", path.display());
    }
    Ok(map)
}
