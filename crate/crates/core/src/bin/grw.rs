use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use grw::engine::{
    self, normalize_traced, run_pipeline_traced, step_all, EngineError, Grs, NormalizeStatus,
    RewriteStep, TerminationVerdict, TraceStep, DEFAULT_STATE_LIMIT,
};
use grw::graph::Graph;
use grw::io::{self, load_pipeline, parse_graph, parse_grs, parse_weights, read_file, ParseError};
use grw::pattern::find_matchings;
use grw::termination::{
    check_compatible, check_lexicographic, synthesize_weight, CompatibilityReport, Direction,
    EdgeWeight, Failure, RuleVerdict, Synthesis,
};

const DEFAULT_FUEL: usize = 100_000;
/// Above this many edge labels the sign search gets slow.
const SYNTHESIS_WARN_LABELS: usize = 20;

#[derive(Parser)]
#[command(
    name = "grw",
    version,
    about = "Graph rewriting and termination analysis"
)]
struct Cli {
    /// Stream every rewrite step to stderr as: rule, matching, result key.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the matchings of every rule's pattern in a graph.
    Match {
        #[arg(short, long)]
        pattern: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
    },
    /// Show every one-step rewrite of a graph.
    Rewrite {
        #[arg(short, long)]
        rules: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
    },
    /// Rewrite until no rule applies, taking the first step each time.
    Normalize {
        #[arg(short, long)]
        rules: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
    /// Module pipelines.
    Pipeline {
        #[command(subcommand)]
        action: PipelineAction,
    },
    /// Decide or certify termination.
    Terminate {
        #[arg(short, long)]
        rules: PathBuf,
        /// Start graph (reach mode only).
        #[arg(short, long)]
        graph: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
        limit: usize,
        /// Weights file; weights mode synthesizes one when omitted.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Search for a compatible edge weight.
    Synthesize {
        #[arg(short, long)]
        rules: PathBuf,
    },
    /// Length of the longest derivation from a graph.
    Height {
        #[arg(short, long)]
        rules: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
        limit: usize,
    },
}

#[derive(Subcommand)]
enum PipelineAction {
    /// Normalize with each module in turn.
    Run {
        #[arg(short, long)]
        pipeline: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Explore every reachable graph.
    Reach,
    /// Edge weight compatibility.
    Weights,
    /// Lexicographic weight compatibility.
    Lex,
}

/// Success, a positive verdict, a negative verdict, bad input, or no answer within limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Ok,
    Negative,
    Inconclusive,
}

#[derive(Debug)]
enum Failed {
    Parse(ParseError),
    Input(String),
}

impl From<ParseError> for Failed {
    fn from(e: ParseError) -> Self {
        Failed::Parse(e)
    }
}

struct Out {
    text: String,
    color: bool,
}

impl Out {
    fn verdict(&mut self, word: &str, good: bool) {
        if self.color {
            let code = if good { "32" } else { "31" };
            write!(self.text, "\x1b[1;{code}m{word}\x1b[0m").unwrap();
        } else {
            self.text.push_str(word);
        }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let color = std::io::stdout().is_terminal() && std::env::var("GRW_COLOR").as_deref() != Ok("0");
    let mut out = Out {
        text: String::new(),
        color,
    };
    let result = run(&cli, &mut out);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.text.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Ok(Outcome::Inconclusive) => ExitCode::from(3),
        Err(e) => {
            match e {
                Failed::Parse(e) => eprintln!("error: {e}"),
                Failed::Input(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(2)
        }
    }
}

fn load_grs(path: &Path) -> Result<Grs, Failed> {
    Ok(parse_grs(&read_file(path)?).map_err(|e| e.in_file(path))?)
}

fn load_graph(path: &Path, grs: &Grs) -> Result<Graph, Failed> {
    Ok(parse_graph(&read_file(path)?, grs.alphabets()).map_err(|e| e.in_file(path))?)
}

fn engine_error(e: EngineError) -> Failed {
    Failed::Input(e.to_string())
}

fn trace_step(enabled: bool, module: Option<&str>, step: &RewriteStep) {
    if enabled {
        let prefix = module.map(|m| format!("[{m}] ")).unwrap_or_default();
        eprintln!(
            "{prefix}{} {} {}",
            step.rule_name,
            step.matching,
            step.result.canonical_key().digest()
        );
    }
}

fn run(cli: &Cli, out: &mut Out) -> Result<Outcome, Failed> {
    match &cli.command {
        Command::Match { pattern, graph } => {
            let grs = load_grs(pattern)?;
            let g = load_graph(graph, &grs)?;
            for r in grs.rules() {
                for m in
                    find_matchings(r.pattern(), &g).map_err(|e| Failed::Input(e.to_string()))?
                {
                    out.line(format!("{} {m}", r.name()));
                }
            }
            Ok(Outcome::Ok)
        }
        Command::Rewrite { rules, graph } => {
            let grs = load_grs(rules)?;
            let g = load_graph(graph, &grs)?;
            let steps = step_all(&grs, &g).map_err(engine_error)?;
            for (i, step) in steps.iter().enumerate() {
                trace_step(cli.trace, None, step);
                if i > 0 {
                    out.line("");
                }
                out.line(format!("# {} {}", step.rule_name, step.matching));
                out.text.push_str(&io::render_graph(&step.result));
            }
            Ok(Outcome::Ok)
        }
        Command::Normalize { rules, graph, fuel } => {
            let grs = load_grs(rules)?;
            let g = load_graph(graph, &grs)?;
            let n = normalize_traced(&grs, &g, *fuel, |s| trace_step(cli.trace, None, s))
                .map_err(engine_error)?;
            out.text.push_str(&io::render_graph(&n.graph));
            if n.status == NormalizeStatus::FuelExhausted {
                eprintln!(
                    "fuel exhausted after {} steps; graph is not in normal form",
                    n.steps
                );
                return Ok(Outcome::Inconclusive);
            }
            Ok(Outcome::Ok)
        }
        Command::Pipeline {
            action:
                PipelineAction::Run {
                    pipeline,
                    graph,
                    fuel,
                },
        } => {
            let p = load_pipeline(pipeline)?;
            let Some((_, first)) = p.modules().first() else {
                return Err(Failed::Input(format!("{}: no modules", pipeline.display())));
            };
            let g = load_graph(graph, first)?;
            match run_pipeline_traced(&p, &g, *fuel, |m, s| trace_step(cli.trace, Some(m), s)) {
                Ok(run) => {
                    out.text.push_str(&io::render_graph(&run.graph));
                    Ok(Outcome::Ok)
                }
                Err(EngineError::FuelExhausted {
                    module,
                    steps,
                    graph,
                }) => {
                    out.text.push_str(&io::render_graph(&graph));
                    eprintln!("fuel exhausted in module `{module}` after {steps} steps");
                    Ok(Outcome::Inconclusive)
                }
                Err(e) => Err(engine_error(e)),
            }
        }
        Command::Terminate {
            rules,
            graph,
            mode,
            limit,
            weights,
        } => {
            let grs = load_grs(rules)?;
            match mode {
                Mode::Reach => {
                    let Some(graph) = graph else {
                        return Err(Failed::Input(
                            "reach mode needs a start graph (--graph)".into(),
                        ));
                    };
                    let g = load_graph(graph, &grs)?;
                    reach(cli.trace, &grs, &g, *limit, out)
                }
                Mode::Weights => {
                    let w = match weights {
                        Some(path) => {
                            parse_weights(&read_file(path)?, grs.alphabets())
                                .map_err(|e| e.in_file(path))?
                                .edge
                        }
                        None => match synthesis(&grs) {
                            Synthesis::Found(w) => {
                                out.line("synthesized weight:");
                                write_weight(out, &w, "  ");
                                w
                            }
                            Synthesis::NoWeightExists(why) => {
                                out.verdict("NO-WEIGHT", false);
                                out.line("");
                                eprintln!("{why}");
                                return Ok(Outcome::Negative);
                            }
                        },
                    };
                    Ok(report(out, &grs, &check_compatible(&grs, &w)))
                }
                Mode::Lex => {
                    let Some(path) = weights else {
                        return Err(Failed::Input(
                            "lex mode needs a weights file (--weights)".into(),
                        ));
                    };
                    let w = parse_weights(&read_file(path)?, grs.alphabets())
                        .map_err(|e| e.in_file(path))?;
                    Ok(report(
                        out,
                        &grs,
                        &check_lexicographic(&grs, &w.lexicographic()),
                    ))
                }
            }
        }
        Command::Synthesize { rules } => {
            let grs = load_grs(rules)?;
            match synthesis(&grs) {
                Synthesis::Found(w) => {
                    write_weight(out, &w, "");
                    Ok(Outcome::Ok)
                }
                Synthesis::NoWeightExists(why) => {
                    out.verdict("NO-WEIGHT", false);
                    out.line("");
                    eprintln!("{why}");
                    Ok(Outcome::Negative)
                }
            }
        }
        Command::Height {
            rules,
            graph,
            limit,
        } => {
            let grs = load_grs(rules)?;
            let g = load_graph(graph, &grs)?;
            let space = engine::explore(&grs, &g, *limit).map_err(engine_error)?;
            trace_space(cli.trace, &grs, &space);
            match space.verdict(&grs) {
                TerminationVerdict::Terminates { height, .. } => {
                    out.line(height.to_string());
                    Ok(Outcome::Ok)
                }
                TerminationVerdict::Loops { .. } => {
                    out.verdict("NOT-TERMINATING", false);
                    out.line("");
                    Ok(Outcome::Negative)
                }
                TerminationVerdict::LimitExceeded { states } => {
                    out.verdict("LIMIT", false);
                    out.line(format!(" states={states}"));
                    Ok(Outcome::Inconclusive)
                }
            }
        }
    }
}

fn synthesis(grs: &Grs) -> Synthesis {
    let labels = grs.alphabets().edge_count();
    if labels > SYNTHESIS_WARN_LABELS {
        eprintln!("warning: {labels} edge labels; the sign search may take a long time");
    }
    synthesize_weight(grs)
}

fn write_weight(out: &mut Out, w: &EdgeWeight, indent: &str) {
    let s = w.alphabets();
    for l in s.edge_labels() {
        out.line(format!("{indent}edge {} {}", s.edge_name(l), w.get(l)));
    }
}

/// Explored transitions, state by state, in discovery order.
fn trace_space(enabled: bool, grs: &Grs, space: &engine::DerivationSpace) {
    if !enabled {
        return;
    }
    for s in 0..space.state_count() {
        for t in space.transitions(s) {
            eprintln!(
                "{} {} {}",
                grs.rules()[t.rule].name(),
                t.matching,
                space.state(t.target).canonical_key().digest()
            );
        }
    }
}

fn reach(
    trace: bool,
    grs: &Grs,
    g: &Graph,
    limit: usize,
    out: &mut Out,
) -> Result<Outcome, Failed> {
    let space = engine::explore(grs, g, limit).map_err(engine_error)?;
    trace_space(trace, grs, &space);
    match space.verdict(grs) {
        TerminationVerdict::Terminates { height, states } => {
            out.verdict("TERMINATES", true);
            out.line(format!(" height={height} states={states}"));
            Ok(Outcome::Ok)
        }
        TerminationVerdict::Loops { witness, states } => {
            out.verdict("LOOPS", false);
            out.line(format!(" states={states}"));
            let write_steps = |out: &mut Out, title: &str, steps: &[TraceStep]| {
                if steps.is_empty() {
                    return;
                }
                out.line(format!("{title}:"));
                out.line(format!("  [{}] {}", steps[0].source_state, steps[0].source));
                for s in steps {
                    out.line(format!("    {} {}", s.rule_name, s.matching));
                    out.line(format!("  [{}] {}", s.target_state, s.target));
                }
            };
            write_steps(out, "path", &witness.entry);
            write_steps(out, "cycle", &witness.cycle);
            Ok(Outcome::Negative)
        }
        TerminationVerdict::LimitExceeded { states } => {
            out.verdict("LIMIT", false);
            out.line(format!(" states={states}"));
            Ok(Outcome::Inconclusive)
        }
    }
}

fn describe_failure(grs: &Grs, f: &Failure) -> String {
    let s = grs.alphabets();
    match f {
        Failure::NotUniform => "rule is not uniform".into(),
        Failure::NotDecreasing { before, after } => {
            format!("pattern weight does not decrease ({before} -> {after})")
        }
        Failure::UnguardedMerge {
            label,
            target,
            direction,
            members,
        } => {
            let names: Vec<String> = members.iter().map(ToString::to_string).collect();
            let dir = match direction {
                Direction::In => "in",
                Direction::Out => "out",
            };
            format!(
                "shift merges {} onto {target} without forbidding {dir} {} edges",
                names.join(","),
                s.edge_name(*label)
            )
        }
        Failure::WeightIncreases { before, after } => {
            format!("edge weight increases ({before} -> {after})")
        }
        Failure::NoLexDecrease { before, after } => {
            format!("contextual weights do not decrease ({before:?} -> {after:?})")
        }
        Failure::FragileRelabel { node, label } => format!(
            "relabels {node} without forbidding in or out {} edges",
            s.edge_name(*label)
        ),
        Failure::ShiftWithoutWeightDecrease => "shift without a strict edge weight decrease".into(),
    }
}

fn report(out: &mut Out, grs: &Grs, r: &CompatibilityReport) -> Outcome {
    for rule in &r.rules {
        let weights = match (rule.weight_before, rule.weight_after) {
            (Some(b), Some(a)) => format!(" w(P)={b} w(P')={a}"),
            _ => String::new(),
        };
        match &rule.verdict {
            RuleVerdict::Compatible(clause) => {
                out.line(format!("{} compatible {clause}{weights}", rule.rule));
            }
            RuleVerdict::Incompatible(f) => out.line(format!(
                "{} incompatible {}{weights}: {}",
                rule.rule,
                f.condition(r.lexicographic),
                describe_failure(grs, f)
            )),
        }
    }
    if r.is_compatible() {
        out.verdict("COMPATIBLE", true);
        out.line("");
        Outcome::Ok
    } else {
        out.verdict("INCOMPATIBLE", false);
        out.line("");
        Outcome::Negative
    }
}
