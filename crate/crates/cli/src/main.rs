//! Command-line entry point: state inference, script repair, and the
//! scenario-generation / evaluation pipeline.
//!
//! Exit codes are a stable contract:
//!   0  success (for `repair`: at least one solution)
//!   1  no solution found / empty corpus
//!   2  parse failure (also used by argument errors)
//!   3  branch enumeration cap exceeded
//!   4  repair timed out without finding a solution
//!   5  engine or internal error

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use infrafix::frontend::detect_tech;
use infrafix::infer::{infer_from_trace, infer_states, InferError, TraceOptions, DEFAULT_BRANCH_CAP};
use infrafix::ir::{Script, Tech};
use infrafix::normalize::{normalize_script, CanonicalModel, NormalizationDb};
use infrafix::patch::{apply_patches, render_edits, unified_diff};
use infrafix::repair::{repair, site_span, EditSite, RepairConfig, ResourceRef};
use infrafix::scenario::{generate_scenarios, parse_script, run_suite, MutationConfig};
use infrafix::state::parse_state;

const ENV_DB_OVERRIDE: &str = "INFRAFIX_NORMALIZATION_DB";

#[derive(Parser)]
#[command(
    name = "infrafix",
    version,
    about = "Repairs infrastructure-as-code scripts against desired system states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer system states from a script or from a syscall trace.
    Infer(InferArgs),
    /// Repair a script so it satisfies a desired state.
    Repair(RepairArgs),
    /// Generate and run mutation-based repair scenarios.
    Scenarios(ScenariosArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TechArg {
    Ansible,
    Puppet,
}

impl From<TechArg> for Tech {
    fn from(value: TechArg) -> Tech {
        match value {
            TechArg::Ansible => Tech::Ansible,
            TechArg::Puppet => Tech::Puppet,
        }
    }
}

#[derive(Args)]
struct InferArgs {
    /// Technology of the script (detected from the extension when omitted).
    #[arg(long, value_enum)]
    tech: Option<TechArg>,
    /// IaC script to evaluate statically.
    #[arg(long, conflicts_with = "trace")]
    script: Option<PathBuf>,
    /// Syscall trace log to derive file states from.
    #[arg(long, requires = "fs_root")]
    trace: Option<PathBuf>,
    /// Directory the trace's paths are probed under.
    #[arg(long)]
    fs_root: Option<PathBuf>,
    /// Record a sha256 content attribute for regular files.
    #[arg(long)]
    content_hash: bool,
    /// Maximum number of branch combinations to enumerate.
    #[arg(long, default_value_t = DEFAULT_BRANCH_CAP)]
    branch_cap: usize,
    /// Output file; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct RepairArgs {
    /// Technology of the script (detected from the extension when omitted).
    #[arg(long, value_enum)]
    tech: Option<TechArg>,
    /// Script to repair.
    #[arg(long)]
    script: PathBuf,
    /// Desired system state (JSON).
    #[arg(long)]
    state: PathBuf,
    #[arg(long, default_value_t = 10)]
    max_solutions: usize,
    /// Search budget in seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    /// Maximum number of edits per solution.
    #[arg(long, default_value_t = 8)]
    max_cost: u32,
    /// Also write unified diffs next to the patched scripts.
    #[arg(long)]
    diff: bool,
    /// Directory for patched scripts; `-` prints them to stdout.
    #[arg(long)]
    out: Option<String>,
    /// Disable insertion of missing resources.
    #[arg(long)]
    no_insert: bool,
}

#[derive(Args)]
struct ScenariosArgs {
    #[command(subcommand)]
    action: ScenariosAction,
}

#[derive(Subcommand)]
enum ScenariosAction {
    /// Generate scenario files without running them.
    Gen(GenArgs),
    /// Generate, run, and report.
    Run(RunArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Directory of IaC scripts.
    #[arg(long)]
    corpus: PathBuf,
    /// Directory the scenario JSON files are written to.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    scenarios_per_state: u32,
    #[arg(long, default_value_t = 1)]
    min_mutations: u32,
    #[arg(long, default_value_t = 3)]
    max_mutations: u32,
}

#[derive(Args)]
struct RunArgs {
    /// Directory of IaC scripts.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Report JSON output path.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 25)]
    scenarios_per_state: u32,
    #[arg(long, default_value_t = 1)]
    min_mutations: u32,
    #[arg(long, default_value_t = 3)]
    max_mutations: u32,
    /// Per-scenario repair budget in seconds.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 10)]
    max_solutions: usize,
    #[arg(long, default_value_t = 8)]
    max_cost: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Infer(args) => cmd_infer(args),
        Command::Repair(args) => cmd_repair(args),
        Command::Scenarios(args) => match args.action {
            ScenariosAction::Gen(args) => cmd_scenarios_gen(args),
            ScenariosAction::Run(args) => cmd_scenarios_run(args),
        },
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(5)
        }
    }
}

/// Loads the normalization rules, honoring the `INFRAFIX_NORMALIZATION_DB`
/// path override.
fn load_db() -> Result<NormalizationDb> {
    match std::env::var_os(ENV_DB_OVERRIDE) {
        Some(path) => {
            let path = PathBuf::from(path);
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            NormalizationDb::load(&text)
                .map_err(|e| anyhow!("loading normalization db {}: {e}", path.display()))
        }
        None => Ok(NormalizationDb::bundled().clone()),
    }
}

fn resolve_tech(explicit: Option<TechArg>, path: &Path) -> Result<Tech> {
    if let Some(tech) = explicit {
        return Ok(tech.into());
    }
    detect_tech(path).ok_or_else(|| {
        anyhow!(
            "cannot detect technology of `{}`; pass --tech",
            path.display()
        )
    })
}

fn write_output(out: &str, content: &str) -> Result<()> {
    if out == "-" {
        println!("{content}");
    } else {
        fs::write(out, content).with_context(|| format!("writing {out}"))?;
    }
    Ok(())
}

fn load_script(tech: Tech, path: &Path) -> Result<Result<Script, infrafix::frontend::ParseError>> {
    let source = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_script(tech, &source))
}

#[derive(Serialize)]
struct AnnotatedState<'a> {
    branch_decisions: Vec<BranchDecision>,
    state: &'a infrafix::state::SystemState,
}

#[derive(Serialize)]
struct BranchDecision {
    conditional: u32,
    branch: String,
}

fn cmd_infer(args: InferArgs) -> Result<u8> {
    if let Some(trace_path) = &args.trace {
        let fs_root = args.fs_root.as_deref().expect("clap enforces fs_root");
        let trace = fs::read_to_string(trace_path)
            .with_context(|| format!("reading {}", trace_path.display()))?;
        let options = TraceOptions {
            content_hash: args.content_hash,
        };
        let inferred = infer_from_trace(&trace, fs_root, options)?;
        if inferred.skipped_lines > 0 {
            eprintln!(
                "warning: skipped {} unparsable trace line(s)",
                inferred.skipped_lines
            );
        }
        write_output(&args.out, &inferred.state.to_json())?;
        return Ok(0);
    }

    let Some(script_path) = &args.script else {
        return Err(anyhow!("pass --script or --trace"));
    };
    let tech = resolve_tech(args.tech, script_path)?;
    let db = load_db()?;
    let raw = match load_script(tech, script_path)? {
        Ok(script) => script,
        Err(parse_err) => {
            eprintln!("{}: {parse_err}", script_path.display());
            return Ok(2);
        }
    };
    let normalized = normalize_script(&raw, &db);
    let states = match infer_states(&normalized, args.branch_cap) {
        Ok(states) => states,
        Err(InferError::BranchCapExceeded { cap }) => {
            eprintln!("branch cap of {cap} paths exceeded");
            return Ok(3);
        }
        Err(err) => {
            eprintln!("inference failed: {err}");
            return Ok(5);
        }
    };
    let rendered = if states.len() == 1 {
        states[0].state.to_json()
    } else {
        let annotated: Vec<AnnotatedState> = states
            .iter()
            .map(|s| AnnotatedState {
                branch_decisions: s
                    .branch_decisions
                    .iter()
                    .map(|(id, side)| BranchDecision {
                        conditional: id.0,
                        branch: side.to_string(),
                    })
                    .collect(),
                state: &s.state,
            })
            .collect();
        serde_json::to_string_pretty(&annotated)?
    };
    write_output(&args.out, &rendered)?;
    Ok(0)
}

/// Human-readable one-liner for an edit.
fn describe_edit(edit: &infrafix::repair::Edit, script: &Script) -> String {
    let location = site_span(script, &edit.site)
        .map(|span| format!("line {}", span.start_line))
        .unwrap_or_else(|| "new".to_string());
    match &edit.site {
        EditSite::AttributeValue { attribute, .. } => {
            format!("[{location}] set attribute {attribute} = {}", edit.new_value)
        }
        EditSite::VariableLiteral { variable, .. } => {
            format!("[{location}] set variable {variable} = {}", edit.new_value)
        }
        EditSite::ConditionLiteral { leaf, .. } => {
            format!("[{location}] set condition literal #{leaf} = {}", edit.new_value)
        }
        EditSite::MissingAttribute {
            resource: ResourceRef::Node(_),
            attribute,
        } => format!("[{location}] add attribute {attribute} = {}", edit.new_value),
        EditSite::MissingAttribute {
            resource: ResourceRef::Inserted(id),
            attribute,
        } => format!("[{location}] attribute {attribute} = {} of inserted {id}", edit.new_value),
        EditSite::MissingResource { id } => format!("[{location}] insert resource {id}"),
    }
}

fn cmd_repair(args: RepairArgs) -> Result<u8> {
    let tech = resolve_tech(args.tech, &args.script)?;
    let db = load_db()?;
    let raw = match load_script(tech, &args.script)? {
        Ok(script) => script,
        Err(parse_err) => {
            let class = match parse_err.kind {
                infrafix::frontend::ParseErrorKind::UnsupportedArrayTitle => " [array-title]",
                _ => "",
            };
            eprintln!("{}: {parse_err}{class}", args.script.display());
            return Ok(2);
        }
    };
    let normalized = normalize_script(&raw, &db);
    let state_text = fs::read_to_string(&args.state)
        .with_context(|| format!("reading {}", args.state.display()))?;
    let desired = parse_state(&state_text)
        .map_err(|e| anyhow!("state file {}: {e}", args.state.display()))?;

    let cfg = RepairConfig {
        max_solutions: args.max_solutions,
        timeout: Duration::from_secs_f64(args.timeout),
        max_cost: args.max_cost,
        allow_resource_insertion: !args.no_insert,
    };
    let outcome = match repair(&normalized, &desired, CanonicalModel::builtin(), &cfg) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("repair failed: {err}");
            return Ok(5);
        }
    };

    if outcome.solutions.is_empty() {
        let diag = &outcome.diagnostics;
        let class = if outcome.timed_out {
            "timeout"
        } else if diag.shared_variable_conflict {
            "shared-variable-conflict"
        } else if diag.undefined_variable {
            "undefined-variable"
        } else if diag.insertion_blocked {
            "insertion-disabled"
        } else if diag.unsupported_resource {
            "unsupported-resource"
        } else {
            "search-exhausted"
        };
        eprintln!("no solution found ({class})");
        return Ok(if outcome.timed_out { 4 } else { 1 });
    }

    let out_dir = match &args.out {
        Some(dir) if dir != "-" => Some(PathBuf::from(dir)),
        Some(_) => None,
        None => Some(
            args.script
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from(".")),
        ),
    };
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let file_name = args
        .script
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "script".to_string());
    for (idx, solution) in outcome.solutions.iter().enumerate() {
        let n = idx + 1;
        println!("solution {n}: cost {}", solution.total_cost);
        for edit in &solution.edits {
            println!("  {}", describe_edit(edit, &raw));
        }
        let patches = render_edits(solution, &raw, &db)
            .map_err(|e| anyhow!("rendering solution {n}: {e}"))?;
        let patched = apply_patches(&raw.source, &patches)
            .map_err(|e| anyhow!("splicing solution {n}: {e}"))?;
        match &out_dir {
            Some(dir) => {
                let fix_path = dir.join(format!("{file_name}.fix{n}"));
                fs::write(&fix_path, &patched)
                    .with_context(|| format!("writing {}", fix_path.display()))?;
                println!("  wrote {}", fix_path.display());
                if args.diff {
                    let diff = unified_diff(&raw.source, &patched, &file_name);
                    let diff_path = dir.join(format!("{file_name}.fix{n}.diff"));
                    fs::write(&diff_path, diff)
                        .with_context(|| format!("writing {}", diff_path.display()))?;
                }
            }
            None => {
                println!("--- patched script (solution {n}) ---");
                print!("{patched}");
                if args.diff {
                    print!("{}", unified_diff(&raw.source, &patched, &file_name));
                }
            }
        }
    }
    Ok(0)
}

fn mutation_config(
    seed: u64,
    scenarios_per_state: u32,
    min_mutations: u32,
    max_mutations: u32,
) -> Result<MutationConfig> {
    if min_mutations == 0 || max_mutations < min_mutations {
        return Err(anyhow!("mutation range must be positive and ordered"));
    }
    Ok(MutationConfig {
        mutations_per_scenario: min_mutations..=max_mutations,
        scenarios_per_state,
        seed,
        ..MutationConfig::default()
    })
}

fn scripts_in(corpus: &Path) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if detect_tech(&path).is_some() {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(corpus, &mut files).with_context(|| format!("reading corpus {}", corpus.display()))?;
    files.sort();
    Ok(files)
}

fn cmd_scenarios_gen(args: GenArgs) -> Result<u8> {
    let cfg = mutation_config(
        args.seed,
        args.scenarios_per_state,
        args.min_mutations,
        args.max_mutations,
    )?;
    let db = load_db()?;
    let files = scripts_in(&args.corpus)?;
    if files.is_empty() {
        eprintln!("no scripts found under {}", args.corpus.display());
        return Ok(1);
    }
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut written = 0usize;
    for file in &files {
        let tech = detect_tech(file).expect("filtered");
        let raw = match load_script(tech, file)? {
            Ok(script) => script,
            Err(err) => {
                eprintln!("skipping {}: {err}", file.display());
                continue;
            }
        };
        let normalized = normalize_script(&raw, &db);
        let label = file
            .strip_prefix(&args.corpus)
            .unwrap_or(file)
            .to_path_buf();
        let scenarios = match generate_scenarios(&normalized, &label, &cfg) {
            Ok(s) => s,
            Err(err) => {
                eprintln!("skipping {}: {err}", file.display());
                continue;
            }
        };
        let stem = label.to_string_lossy().replace(['/', '\\'], "_");
        for (idx, scenario) in scenarios.iter().enumerate() {
            let path = args.out.join(format!("{stem}.{idx:03}.scenario.json"));
            fs::write(&path, serde_json::to_string_pretty(scenario)?)
                .with_context(|| format!("writing {}", path.display()))?;
            written += 1;
        }
    }
    println!("wrote {written} scenario file(s) to {}", args.out.display());
    Ok(0)
}

fn cmd_scenarios_run(args: RunArgs) -> Result<u8> {
    let mutation_cfg = mutation_config(
        args.seed,
        args.scenarios_per_state,
        args.min_mutations,
        args.max_mutations,
    )?;
    let repair_cfg = RepairConfig {
        max_solutions: args.max_solutions,
        timeout: Duration::from_secs_f64(args.timeout),
        max_cost: args.max_cost,
        allow_resource_insertion: true,
    };
    let db = load_db()?;
    if scripts_in(&args.corpus)?.is_empty() {
        eprintln!("no scripts found under {}", args.corpus.display());
        return Ok(1);
    }
    let report = run_suite(&args.corpus, &mutation_cfg, &repair_cfg, args.workers, &db)?;
    print!("{}", report.render_table());
    for skip in &report.skipped {
        eprintln!("skipped {}: {}", skip.file, skip.reason);
    }
    if let Some(report_path) = &args.report {
        fs::write(report_path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", report_path.display()))?;
        println!("report written to {}", report_path.display());
    }
    Ok(0)
}
