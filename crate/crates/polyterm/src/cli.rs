//! Command-line front end.
//!
//! One binary, five modes: `verify` checks a user-supplied interpretation,
//! `search` enumerates one, `translate` dumps the circuit rules generated
//! from a rule system, `classify` reports its syntactic shape, and
//! `normalize` runs the rewrite engine on a ground term's circuit.  Run with
//! just an input file, the binary searches with default bounds.
//!
//! Exit codes are a contract: 0 means terminating (or plain success for the
//! non-proving modes), 1 means unknown, 2 means a usage, parse, or
//! configuration error.  JSON output is deterministic: the same input and
//! flags produce byte-identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::engine::{self, Strategy};
use crate::interp::{CurrentDomain, HeatDomain, Interpretation};
use crate::prover::{self, Certificate, Route, SearchBounds, Verdict};
use crate::translation::{build_polygraph, translate_term, CellSelection, GateSet};
use crate::trs::classify::classify;
use crate::trs::parse::{parse_ground_term, parse_trs};
use crate::trs::Trs;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OutputFormat {
    Text,
    Json,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Option<OutputFormat> {
        match text {
            "text" => Some(OutputFormat::Text),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

/// Which generated rule families `translate` and `normalize` work with.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CellChoice {
    /// The rules translated from the input rules.
    Computation,
    /// Rules pushing resource gates past operation gates.
    Delta2,
    /// Rules among resource gates only.
    Delta1,
    /// Resource pushes across constructors only.
    Constructors,
    /// Resource pushes across defined functions only.
    Functions,
    /// Every generated rule.
    All,
}

impl CellChoice {
    pub fn parse(text: &str) -> Option<CellChoice> {
        match text {
            "computation" => Some(CellChoice::Computation),
            "delta2" => Some(CellChoice::Delta2),
            "delta1" => Some(CellChoice::Delta1),
            "constructors" => Some(CellChoice::Constructors),
            "functions" => Some(CellChoice::Functions),
            "all" => Some(CellChoice::All),
            _ => None,
        }
    }

    pub fn selection(self) -> CellSelection {
        let pick = |computation, structure_law, constructor_push, function_push| CellSelection {
            computation,
            structure_law,
            constructor_push,
            function_push,
            push_filter: None,
        };
        match self {
            CellChoice::Computation => pick(true, false, false, false),
            CellChoice::Delta2 => pick(false, false, true, true),
            CellChoice::Delta1 => pick(false, true, false, false),
            CellChoice::Constructors => pick(false, false, true, false),
            CellChoice::Functions => pick(false, false, false, true),
            CellChoice::All => CellSelection::full(),
        }
    }
}

/// What to do with the input system.
pub enum Mode {
    Verify { interp: PathBuf },
    Search,
    Translate,
    Classify,
    Normalize { term: String },
}

/// A fully resolved invocation.
pub struct RunConfig {
    pub input: PathBuf,
    pub mode: Mode,
    /// Require this route instead of trying all in priority order.
    pub route: Option<Route>,
    pub bounds: SearchBounds,
    /// `verify` treats these as assertions against the interpretation file;
    /// `search` uses them as the domains to search over.
    pub current_domain: Option<CurrentDomain>,
    pub heat_domain: Option<HeatDomain>,
    pub cells: CellChoice,
    pub format: OutputFormat,
    pub fuel: usize,
}

/// Executes the configured mode, writing the report to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> i32 {
    match execute(config) {
        Ok((report, code)) => {
            if out.write_all(report.as_bytes()).is_err() {
                return 2;
            }
            code
        }
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}

/// Runs one mode and renders its report; errors are diagnostics for exit 2.
pub fn execute(config: &RunConfig) -> Result<(String, i32), String> {
    let text = fs::read_to_string(&config.input)
        .map_err(|e| format!("cannot read {}: {e}", config.input.display()))?;
    let trs = parse_trs(&text).map_err(|e| format!("{}: {e}", config.input.display()))?;
    match &config.mode {
        Mode::Verify { interp } => run_verify(config, &trs, interp),
        Mode::Search => run_search(config, &trs),
        Mode::Translate => run_translate(config, &trs),
        Mode::Classify => run_classify(config, &trs),
        Mode::Normalize { term } => run_normalize(config, &trs, term),
    }
}

fn run_verify(config: &RunConfig, trs: &Trs, path: &PathBuf) -> Result<(String, i32), String> {
    let raw =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut parsed: Value =
        serde_json::from_str(&raw).map_err(|e| format!("{}: {e}", path.display()))?;
    reconcile_domains(&mut parsed, config.current_domain, config.heat_domain)?;
    let gates = GateSet::new(trs.signature());
    let interp = Interpretation::load(&gates, &parsed).map_err(|e| e.to_string())?;
    let cert = prover::verify(trs, &interp, config.route).map_err(|e| e.to_string())?;
    Ok(emit(&cert, config.format))
}

fn run_search(config: &RunConfig, trs: &Trs) -> Result<(String, i32), String> {
    if config.bounds.budget == 0 {
        return Err("the search budget must be positive".into());
    }
    let routes: Vec<Route> = config.route.into_iter().collect();
    let cert = prover::search(
        trs,
        &config.bounds,
        &routes,
        config.current_domain.unwrap_or(CurrentDomain::Naturals),
        config.heat_domain.unwrap_or(HeatDomain::Scalar),
    )
    .map_err(|e| e.to_string())?;
    Ok(emit(&cert, config.format))
}

fn run_translate(config: &RunConfig, trs: &Trs) -> Result<(String, i32), String> {
    let polygraph =
        build_polygraph(trs, &config.cells.selection()).map_err(|e| e.to_string())?;
    let report = match config.format {
        OutputFormat::Json => {
            let value = json!({
                "count": polygraph.cells.len(),
                "polygraph": polygraph.to_json(),
            });
            pretty(&value)
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{} gates, {} circuit rules",
                polygraph.gates.all().len(),
                polygraph.cells.len()
            );
            for cell in &polygraph.cells {
                let _ = writeln!(out, "{} [{}]", cell.name, cell.family);
                for line in cell.source.layered_text() {
                    let _ = writeln!(out, "    {line}");
                }
                let _ = writeln!(out, "  =>");
                for line in cell.target.layered_text() {
                    let _ = writeln!(out, "    {line}");
                }
            }
            out
        }
    };
    Ok((report, 0))
}

fn run_classify(config: &RunConfig, trs: &Trs) -> Result<(String, i32), String> {
    let class = classify(trs);
    let report = match config.format {
        OutputFormat::Json => pretty(&class.to_json()),
        OutputFormat::Text => {
            let list = |items: &std::collections::BTreeSet<String>| {
                if items.is_empty() {
                    "(none)".to_string()
                } else {
                    items.iter().cloned().collect::<Vec<_>>().join(", ")
                }
            };
            let mut out = String::new();
            let _ = writeln!(out, "left-linear: {}", class.left_linear);
            let _ = writeln!(out, "linear: {}", class.linear);
            let _ = writeln!(out, "planar: {}", class.planar);
            let _ = writeln!(out, "non-duplicating: {}", class.non_duplicating);
            let _ = writeln!(out, "functional program: {}", class.functional_program);
            let _ = writeln!(out, "constructors: {}", list(&class.constructors));
            let _ = writeln!(out, "functions: {}", list(&class.functions));
            let unused = class
                .unused_structure
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>();
            let _ = writeln!(
                out,
                "unused resource shapes: {}",
                if unused.is_empty() {
                    "(none)".to_string()
                } else {
                    unused.join(", ")
                }
            );
            for (op, ks) in &class.k_table {
                let rendered = ks
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(out, "copy table K({op}): [{rendered}]");
            }
            out
        }
    };
    Ok((report, 0))
}

fn run_normalize(config: &RunConfig, trs: &Trs, term: &str) -> Result<(String, i32), String> {
    let term = parse_ground_term(term).map_err(|e| e.to_string())?;
    let gates = GateSet::new(trs.signature());
    let circuit = translate_term(&gates, &term, &[]).map_err(|e| e.to_string())?;
    let polygraph =
        build_polygraph(trs, &config.cells.selection()).map_err(|e| e.to_string())?;
    let (result, trace, exhausted) = engine::normalize(
        &circuit,
        &polygraph.cells,
        Strategy::LeftmostInnermost,
        config.fuel,
    );
    let report = match config.format {
        OutputFormat::Json => {
            let value = json!({
                "steps": trace.len(),
                "fuel_exhausted": exhausted,
                "trace": trace.to_json(),
                "result": result.to_json(),
            });
            pretty(&value)
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "initial ({term}):");
            for line in trace.initial.layered_text() {
                let _ = writeln!(out, "  {line}");
            }
            for step in &trace.steps {
                let _ = writeln!(out, "step: {} at {}", step.cell, step.position);
            }
            let _ = writeln!(
                out,
                "{} steps, {}",
                trace.len(),
                if exhausted {
                    "fuel exhausted before a normal form"
                } else {
                    "normal form reached"
                }
            );
            let _ = writeln!(out, "result:");
            for line in result.layered_text() {
                let _ = writeln!(out, "  {line}");
            }
            out
        }
    };
    Ok((report, if exhausted { 1 } else { 0 }))
}

/// Fills absent domain keys from the flags and rejects contradictions.
fn reconcile_domains(
    parsed: &mut Value,
    domain: Option<CurrentDomain>,
    heat: Option<HeatDomain>,
) -> Result<(), String> {
    let obj = parsed
        .as_object_mut()
        .ok_or_else(|| "the interpretation must be a JSON object".to_string())?;
    if let Some(d) = domain {
        match obj.get("domain") {
            None => {
                obj.insert("domain".into(), Value::String(d.to_string()));
            }
            Some(v) if v.as_str().and_then(CurrentDomain::parse) == Some(d) => {}
            Some(v) => {
                return Err(format!(
                    "the interpretation declares domain {v}, but the command asked for {d}"
                ))
            }
        }
    }
    if let Some(h) = heat {
        match obj.get("heat_domain") {
            None => {
                obj.insert("heat_domain".into(), Value::String(h.to_string()));
            }
            Some(v) if v.as_str().and_then(HeatDomain::parse) == Some(h) => {}
            Some(v) => {
                return Err(format!(
                    "the interpretation declares heat domain {v}, but the command asked for {h}"
                ))
            }
        }
    }
    Ok(())
}

fn emit(cert: &Certificate, format: OutputFormat) -> (String, i32) {
    let code = match cert.verdict {
        Verdict::Terminating => 0,
        Verdict::Unknown => 1,
    };
    (report(cert, format), code)
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

/// Renders a certificate for humans or machines.
pub fn report(cert: &Certificate, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => pretty(&cert.to_json()),
        OutputFormat::Text => text_report(cert),
    }
}

fn text_report(cert: &Certificate) -> String {
    let mut out = String::new();
    let vacuous = cert.verdict == Verdict::Terminating
        && cert.strict_summary.is_empty()
        && cert.checks.is_empty();
    if vacuous {
        let _ = writeln!(out, "verdict: terminating (vacuous)");
    } else {
        let _ = writeln!(out, "verdict: {}", cert.verdict);
    }
    let _ = writeln!(out, "route: {}", cert.route);
    if let Some(stats) = &cert.stats {
        let _ = writeln!(
            out,
            "search: {} current assignments, {} full candidates, {} of {} budget spent",
            stats.currents_tried,
            stats.candidates_tried,
            stats.spent(),
            stats.budget
        );
    }
    if !cert.checks.is_empty() {
        let _ = writeln!(out, "checks:");
        for check in &cert.checks {
            let relation = if check.strict_required { ">" } else { ">=" };
            let status = if check.ok() { "ok" } else { "FAIL" };
            let _ = write!(
                out,
                "  {} [{}]: heat {} {} {}: {status}",
                check.cell, check.family, check.source_heat, relation, check.target_heat
            );
            if !check.currents_ok {
                let _ = write!(out, " (currents increase)");
            }
            out.push('\n');
        }
    }
    if cert.verdict == Verdict::Unknown {
        if let Some(first) = cert.failing().next() {
            let _ = writeln!(
                out,
                "first failing cell: {} (source heat {}, target heat {})",
                first.cell, first.source_heat, first.target_heat
            );
        } else if let Some(cond) = cert.conditions.iter().find(|c| !c.holds) {
            let _ = writeln!(out, "first failing condition: {}", cond.condition);
        }
    }
    if !cert.conditions.is_empty() {
        let _ = writeln!(out, "side conditions:");
        for cond in &cert.conditions {
            let status = if cond.holds { "ok" } else { "FAIL" };
            let _ = writeln!(out, "  {}: {status}", cond.condition);
            if let Some(witness) = &cond.witness {
                let _ = writeln!(out, "    {witness}");
            }
        }
    }
    if let Some(interp) = &cert.interpretation {
        if cert.stats.is_some() && cert.verdict == Verdict::Terminating {
            let _ = writeln!(out, "interpretation:");
            for (name, ci) in &interp.cells {
                let currents = ci
                    .currents
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(", ");
                let _ = writeln!(out, "  {name}: currents [{currents}], heat {}", ci.heat);
            }
        }
    }
    if !cert.bounds.is_empty() {
        let _ = writeln!(out, "candidate bounds (uncertified):");
        let _ = writeln!(out, "  {:<6} {:<16} {}", "op", "size", "time");
        for row in &cert.bounds {
            let _ = writeln!(out, "  {:<6} {:<16} {}", row.op, row.size, row.time);
        }
    }
    for note in &cert.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

// ---------------------------------------------------------------------------
// Flag wiring.
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "polyterm",
    version,
    about = "Prove termination of left-linear rule systems via circuit interpretations"
)]
struct Cli {
    #[command(subcommand)]
    command: Option<ModeCommand>,

    /// With no subcommand: rule system to search with the flags below.
    #[arg(value_name = "INPUT")]
    input: Option<PathBuf>,

    #[command(flatten)]
    search: SearchFlags,
}

#[derive(Args)]
struct SearchFlags {
    /// Proof route to require: planar-linear, special, nondup, functional,
    /// partial, or general (default: all, in priority order).
    #[arg(long)]
    route: Option<String>,

    /// Current domain: N or N+.
    #[arg(long, default_value = "N")]
    domain: String,

    /// Heat domain: N or multiset.
    #[arg(long, default_value = "N")]
    heat: String,

    /// Largest total degree of candidate polynomials.
    #[arg(long, default_value_t = 2)]
    max_degree: u32,

    /// Largest coefficient of candidate polynomials.
    #[arg(long, default_value_t = 3)]
    max_coeff: u64,

    /// Candidates examined (across both stages) before giving up.
    #[arg(long, default_value_t = 500_000)]
    budget: u64,

    /// Output format: text or json.
    #[arg(long, default_value = "text")]
    format: String,
}

#[derive(Subcommand)]
enum ModeCommand {
    /// Check an interpretation file against a rule system.
    Verify {
        /// Rule system (.trs).
        input: PathBuf,

        /// Interpretation file (JSON).
        #[arg(long)]
        interp: PathBuf,

        /// Proof route to require (default: first applicable).
        #[arg(long)]
        route: Option<String>,

        /// Current domain the interpretation must use: N or N+.
        #[arg(long)]
        domain: Option<String>,

        /// Heat domain the interpretation must use: N or multiset.
        #[arg(long)]
        heat: Option<String>,

        /// Output format: text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Search for a certifying interpretation within bounds.
    Search {
        /// Rule system (.trs).
        input: PathBuf,

        #[command(flatten)]
        flags: SearchFlags,
    },
    /// Dump the circuit rules generated from a rule system.
    Translate {
        /// Rule system (.trs).
        input: PathBuf,

        /// Rule families: computation, delta2, delta1, constructors,
        /// functions, or all.
        #[arg(long, default_value = "all")]
        cells: String,

        /// Output format: text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Report the syntactic shape of a rule system.
    Classify {
        /// Rule system (.trs).
        input: PathBuf,

        /// Output format: text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Rewrite a ground term's circuit to normal form.
    Normalize {
        /// Rule system (.trs).
        input: PathBuf,

        /// Ground term over the system's operations.
        term: String,

        /// Step limit.
        #[arg(long, default_value_t = engine::DEFAULT_NORMALIZE_FUEL)]
        fuel: usize,

        /// Rule families to rewrite with (as for translate).
        #[arg(long, default_value = "all")]
        cells: String,

        /// Output format: text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
}

fn parse_route_flag(text: Option<&str>) -> Result<Option<Route>, String> {
    text.map(|t| {
        Route::parse(t).ok_or_else(|| {
            format!(
                "unknown route {t:?}; expected planar-linear, special, nondup, functional, \
                 partial or general"
            )
        })
    })
    .transpose()
}

fn parse_domain_flag(text: &str) -> Result<CurrentDomain, String> {
    CurrentDomain::parse(text)
        .ok_or_else(|| format!("unknown current domain {text:?}; expected N or N+"))
}

fn parse_heat_flag(text: &str) -> Result<HeatDomain, String> {
    HeatDomain::parse(text)
        .ok_or_else(|| format!("unknown heat domain {text:?}; expected N or multiset"))
}

fn parse_format_flag(text: &str) -> Result<OutputFormat, String> {
    OutputFormat::parse(text)
        .ok_or_else(|| format!("unknown output format {text:?}; expected text or json"))
}

fn parse_cells_flag(text: &str) -> Result<CellChoice, String> {
    CellChoice::parse(text).ok_or_else(|| {
        format!(
            "unknown cell family {text:?}; expected computation, delta2, delta1, constructors, \
             functions or all"
        )
    })
}

fn search_config(input: PathBuf, flags: &SearchFlags) -> Result<RunConfig, String> {
    Ok(RunConfig {
        input,
        mode: Mode::Search,
        route: parse_route_flag(flags.route.as_deref())?,
        bounds: SearchBounds {
            max_degree: flags.max_degree,
            max_coeff: flags.max_coeff,
            budget: flags.budget,
        },
        current_domain: Some(parse_domain_flag(&flags.domain)?),
        heat_domain: Some(parse_heat_flag(&flags.heat)?),
        cells: CellChoice::All,
        format: parse_format_flag(&flags.format)?,
        fuel: engine::DEFAULT_NORMALIZE_FUEL,
    })
}

fn config_from(cli: Cli) -> Result<RunConfig, String> {
    match cli.command {
        None => {
            let input = cli
                .input
                .ok_or("no input file given; run with --help for usage")?;
            search_config(input, &cli.search)
        }
        Some(ModeCommand::Search { input, flags }) => search_config(input, &flags),
        Some(ModeCommand::Verify {
            input,
            interp,
            route,
            domain,
            heat,
            format,
        }) => Ok(RunConfig {
            input,
            mode: Mode::Verify { interp },
            route: parse_route_flag(route.as_deref())?,
            bounds: SearchBounds::default(),
            current_domain: domain.as_deref().map(parse_domain_flag).transpose()?,
            heat_domain: heat.as_deref().map(parse_heat_flag).transpose()?,
            cells: CellChoice::All,
            format: parse_format_flag(&format)?,
            fuel: engine::DEFAULT_NORMALIZE_FUEL,
        }),
        Some(ModeCommand::Translate {
            input,
            cells,
            format,
        }) => Ok(RunConfig {
            input,
            mode: Mode::Translate,
            route: None,
            bounds: SearchBounds::default(),
            current_domain: None,
            heat_domain: None,
            cells: parse_cells_flag(&cells)?,
            format: parse_format_flag(&format)?,
            fuel: engine::DEFAULT_NORMALIZE_FUEL,
        }),
        Some(ModeCommand::Classify { input, format }) => Ok(RunConfig {
            input,
            mode: Mode::Classify,
            route: None,
            bounds: SearchBounds::default(),
            current_domain: None,
            heat_domain: None,
            cells: CellChoice::All,
            format: parse_format_flag(&format)?,
            fuel: engine::DEFAULT_NORMALIZE_FUEL,
        }),
        Some(ModeCommand::Normalize {
            input,
            term,
            fuel,
            cells,
            format,
        }) => Ok(RunConfig {
            input,
            mode: Mode::Normalize { term },
            route: None,
            bounds: SearchBounds::default(),
            current_domain: None,
            heat_domain: None,
            cells: parse_cells_flag(&cells)?,
            format: parse_format_flag(&format)?,
            fuel,
        }),
    }
}

/// Parses the process arguments and runs; returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let config = match config_from(cli) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return 2;
        }
    };
    let stdout = std::io::stdout();
    run(&config, &mut stdout.lock())
}
