//! Mutation-based repair-scenario generation and the evaluation suite.
//!
//! For every inferred state of a script, attributes of supported resources
//! are mutated to different pool values, producing desired states that the
//! repair engine is then asked to reach. Outcomes are classified as passed,
//! failed, error, or timeout, and aggregated per technology. Files are
//! distributed across a worker pool with all scenarios of one file handled
//! by the same worker; per-file seeds derive from the global seed and the
//! file name, so results are independent of worker count.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{detect_tech, parse_ansible, parse_puppet, ParseError, ParseErrorKind};
use crate::infer::{infer_states, InferError, DEFAULT_BRANCH_CAP};
use crate::ir::{Script, Tech};
use crate::normalize::{
    identifying_attribute, normalize_script, CanonicalModel, NormalizationDb,
};
use crate::patch::{apply_patches, render_edits};
use crate::repair::{repair, verify_solution, EngineError, RepairConfig, RepairSolution};
use crate::state::{satisfies, ResourceState, SystemState, UNKNOWN_VALUE};

/// How candidate values for one attribute are produced.
#[derive(Debug, Clone)]
enum Pool {
    Fixed(Vec<String>),
    /// New values derived by suffixing the current value.
    Suffixed(Vec<String>),
}

/// Candidate mutation values per canonical (type, attribute).
#[derive(Debug, Clone)]
pub struct ValuePools {
    pools: BTreeMap<(String, String), Pool>,
}

impl Default for ValuePools {
    fn default() -> Self {
        let model = CanonicalModel::builtin();
        let mut pools = BTreeMap::new();
        // Closed sets from the canonical model.
        for ctype in model.supported_types() {
            for attr in model.attributes(ctype) {
                if let Some(values) = model.closed_values(ctype, attr) {
                    pools.insert(
                        (ctype.to_string(), attr.to_string()),
                        Pool::Fixed(values.iter().cloned().collect()),
                    );
                }
            }
        }
        let owners = || Pool::Fixed(vec!["root".into(), "daemon".into(), "www-data".into()]);
        pools.insert(("file".into(), "owner".into()), owners());
        pools.insert(("file".into(), "group".into()), owners());
        pools.insert(
            ("file".into(), "mode".into()),
            Pool::Fixed(vec!["0644".into(), "0600".into(), "0755".into(), "0700".into()]),
        );
        pools.insert(
            ("file".into(), "path".into()),
            Pool::Suffixed(vec![".bak".into(), ".new".into()]),
        );
        pools.insert(
            ("file".into(), "target".into()),
            Pool::Suffixed(vec![".bak".into(), ".new".into()]),
        );
        pools.insert(
            ("package".into(), "version".into()),
            Pool::Fixed(vec!["1.0.0".into(), "2.0.0".into()]),
        );
        ValuePools { pools }
    }
}

impl ValuePools {
    /// Candidate values for an attribute, never including the current value.
    pub fn candidates(&self, ctype: &str, attr: &str, current: &str) -> Vec<String> {
        match self.pools.get(&(ctype.to_string(), attr.to_string())) {
            None => Vec::new(),
            Some(Pool::Fixed(values)) => values
                .iter()
                .filter(|v| v.as_str() != current)
                .cloned()
                .collect(),
            Some(Pool::Suffixed(suffixes)) => suffixes
                .iter()
                .map(|s| format!("{current}{s}"))
                .filter(|v| v != current)
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MutationConfig {
    pub mutations_per_scenario: RangeInclusive<u32>,
    pub scenarios_per_state: u32,
    pub seed: u64,
    pub pools: ValuePools,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            mutations_per_scenario: 1..=3,
            scenarios_per_state: 25,
            seed: 0,
            pools: ValuePools::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub resource_id: String,
    pub attribute: String,
    pub old_value: String,
    pub new_value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOrigin {
    pub state_index: usize,
    pub mutations: Vec<Mutation>,
}

/// One repair scenario: a script plus a desired state it does not satisfy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub script: PathBuf,
    pub tech: Tech,
    pub desired: SystemState,
    pub origin: ScenarioOrigin,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("state inference failed: {0}")]
    Infer(#[from] InferError),
    #[error("script has no mutable attributes")]
    NoMutableAttributes,
}

/// Generates up to `scenarios_per_state` scenarios per inferred state by
/// mutating 1..k attributes of supported resources, reproducibly from the
/// seed. Unknown-valued attributes are never targets; duplicate desired
/// states and states the script already satisfies are dropped.
pub fn generate_scenarios(
    script: &Script,
    script_path: &Path,
    cfg: &MutationConfig,
) -> Result<Vec<Scenario>, GenerateError> {
    let states = infer_states(script, DEFAULT_BRANCH_CAP)?;
    let path_label = script_path.to_string_lossy();
    let mut scenarios = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut any_targets = false;

    for (state_index, inferred) in states.iter().enumerate() {
        let targets = mutation_targets(&inferred.state, &cfg.pools);
        if targets.is_empty() {
            continue;
        }
        any_targets = true;
        for i in 0..cfg.scenarios_per_state {
            let scenario_seed = mix_seed(cfg.seed, &path_label, state_index as u64, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
            let span = cfg.mutations_per_scenario.clone();
            let want: u32 = rng.gen_range(span);
            let count = (want as usize).min(targets.len());
            let mut picks: Vec<usize> = sample(&mut rng, targets.len(), count).into_vec();
            picks.sort_unstable();

            let mut state = inferred.state.clone();
            let mut mutations = Vec::new();
            let mut ok = true;
            for pick in picks {
                let (resource_idx, attr, current) = &targets[pick];
                let candidates =
                    cfg.pools
                        .candidates(state.resources[*resource_idx].type_name(), attr, current);
                if candidates.is_empty() {
                    ok = false;
                    break;
                }
                let new_value = candidates[rng.gen_range(0..candidates.len())].clone();
                let resource = &mut state.resources[*resource_idx];
                let old_id = resource.id.clone();
                resource
                    .attributes
                    .insert(attr.clone(), new_value.clone());
                // Mutating the identifying attribute renames the resource.
                if identifying_attribute(resource.type_name()) == Some(attr.as_str()) {
                    let new_id = format!("{}:{}", resource.type_name(), new_value);
                    if state.resources.iter().any(|r| r.id == new_id) {
                        ok = false;
                        break;
                    }
                    let resource = &mut state.resources[*resource_idx];
                    resource.id = new_id;
                }
                mutations.push(Mutation {
                    resource_id: old_id,
                    attribute: attr.clone(),
                    old_value: current.clone(),
                    new_value,
                });
            }
            if !ok || mutations.is_empty() {
                continue;
            }
            let desired = strip_unknown(&state);
            if desired.resources.is_empty() {
                continue;
            }
            // The desired state must differ from every inferred state.
            if states.iter().any(|s| satisfies(&s.state, &desired)) {
                continue;
            }
            if !seen.insert(desired.to_json()) {
                continue;
            }
            scenarios.push(Scenario {
                script: script_path.to_path_buf(),
                tech: script.tech,
                desired,
                origin: ScenarioOrigin {
                    state_index,
                    mutations,
                },
                seed: scenario_seed,
            });
        }
    }
    if !any_targets {
        return Err(GenerateError::NoMutableAttributes);
    }
    Ok(scenarios)
}

fn mutation_targets(
    state: &SystemState,
    pools: &ValuePools,
) -> Vec<(usize, String, String)> {
    let mut targets = Vec::new();
    for (idx, resource) in state.resources.iter().enumerate() {
        for (attr, value) in &resource.attributes {
            if value == UNKNOWN_VALUE {
                continue;
            }
            if !pools
                .candidates(resource.type_name(), attr, value)
                .is_empty()
            {
                targets.push((idx, attr.clone(), value.clone()));
            }
        }
    }
    targets
}

fn strip_unknown(state: &SystemState) -> SystemState {
    SystemState {
        resources: state
            .resources
            .iter()
            .filter_map(|r| {
                let attributes: BTreeMap<String, String> = r
                    .attributes
                    .iter()
                    .filter(|(_, v)| *v != UNKNOWN_VALUE)
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                (!attributes.is_empty()).then(|| ResourceState {
                    id: r.id.clone(),
                    attributes,
                })
            })
            .collect(),
    }
}

/// FNV-1a, used to derive stable per-file seeds.
fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn mix_seed(seed: u64, label: &str, state_index: u64, scenario_index: u64) -> u64 {
    let mut x = seed
        ^ fnv1a(label)
        ^ state_index.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ scenario_index.wrapping_mul(0xd1b5_4a32_d192_ed03);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

// --- scenario execution --------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioStatus {
    Passed,
    Failed,
    Error,
    Timeout,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub status: ScenarioStatus,
    pub solutions_found: usize,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioRecord {
    pub file: String,
    pub tech: Tech,
    pub scenario_index: usize,
    pub status: ScenarioStatus,
    pub solutions_found: usize,
    pub wall_time: f64,
    /// Documented failure class for failed/erroneous scenarios.
    pub failure_class: Option<String>,
    /// First verified solution, for post-pass soundness re-checks.
    pub solution: Option<RepairSolution>,
    /// verify_solution re-confirmed every emitted solution.
    pub solutions_verified: bool,
    /// Patch, re-parse, re-infer closure held for every emitted solution.
    pub patch_closure_ok: bool,
}

/// Runs one scenario through the repair engine and classifies the outcome.
/// Every emitted solution is re-verified and additionally pushed through the
/// text-level patch / re-parse / re-infer closure.
pub fn run_scenario(
    raw: &Script,
    normalized: &Script,
    scenario: &Scenario,
    repair_cfg: &RepairConfig,
    db: &NormalizationDb,
) -> ScenarioOutcome {
    let (outcome, _) = run_scenario_checked(raw, normalized, scenario, repair_cfg, db);
    outcome
}

pub fn run_scenario_checked(
    raw: &Script,
    normalized: &Script,
    scenario: &Scenario,
    repair_cfg: &RepairConfig,
    db: &NormalizationDb,
) -> (ScenarioOutcome, ScenarioRecord) {
    let start = Instant::now();
    let model = CanonicalModel::builtin();
    let result = repair(normalized, &scenario.desired, model, repair_cfg);
    let wall_time = start.elapsed().as_secs_f64();

    let mut record = ScenarioRecord {
        file: scenario.script.to_string_lossy().into_owned(),
        tech: scenario.tech,
        scenario_index: 0,
        status: ScenarioStatus::Failed,
        solutions_found: 0,
        wall_time,
        failure_class: None,
        solution: None,
        solutions_verified: true,
        patch_closure_ok: true,
    };

    match result {
        Err(err) => {
            record.status = ScenarioStatus::Error;
            record.failure_class = Some(classify_engine_error(&err));
        }
        Ok(outcome) => {
            record.solutions_found = outcome.solutions.len();
            if !outcome.solutions.is_empty() {
                record.status = ScenarioStatus::Passed;
                record.solution = outcome.solutions.first().cloned();
                for solution in &outcome.solutions {
                    if !verify_solution(normalized, solution, &scenario.desired) {
                        record.solutions_verified = false;
                    }
                    if !patch_closure_holds(raw, solution, &scenario.desired, db) {
                        record.patch_closure_ok = false;
                    }
                }
            } else if outcome.timed_out {
                record.status = ScenarioStatus::Timeout;
                record.failure_class = Some("timeout".to_string());
            } else {
                record.status = ScenarioStatus::Failed;
                let diag = &outcome.diagnostics;
                record.failure_class = Some(
                    if diag.shared_variable_conflict {
                        "shared-variable-conflict"
                    } else if diag.undefined_variable {
                        "undefined-variable"
                    } else if diag.insertion_blocked {
                        "insertion-disabled"
                    } else if diag.unsupported_resource {
                        "unsupported-resource"
                    } else {
                        "search-exhausted"
                    }
                    .to_string(),
                );
            }
        }
    }
    let outcome = ScenarioOutcome {
        status: record.status,
        solutions_found: record.solutions_found,
        wall_time,
    };
    (outcome, record)
}

fn classify_engine_error(err: &EngineError) -> String {
    match err {
        EngineError::Infer(InferError::UnknownIdentifier { .. }) => "undefined-variable".into(),
        EngineError::Infer(InferError::BranchCapExceeded { .. }) => "branch-cap-exceeded".into(),
        EngineError::Infer(_) => "inference-error".into(),
        EngineError::Internal(_) => "engine-error".into(),
    }
}

/// Text-level soundness: rendering the solution, splicing it, re-parsing,
/// re-normalizing, and re-inferring must reach the desired state.
pub fn patch_closure_holds(
    raw: &Script,
    solution: &RepairSolution,
    desired: &SystemState,
    db: &NormalizationDb,
) -> bool {
    let Ok(patches) = render_edits(solution, raw, db) else {
        return false;
    };
    let Ok(patched) = apply_patches(&raw.source, &patches) else {
        return false;
    };
    let reparsed = match raw.tech {
        Tech::Ansible => parse_ansible(&patched),
        Tech::Puppet => parse_puppet(&patched),
    };
    let Ok(reparsed) = reparsed else {
        return false;
    };
    let renormalized = normalize_script(&reparsed, db);
    let Ok(states) = infer_states(&renormalized, DEFAULT_BRANCH_CAP) else {
        return false;
    };
    states.iter().any(|s| satisfies(&s.state, desired))
}

// --- suite ----------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BenchmarkStats {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub error: usize,
    pub timeout: usize,
}

impl BenchmarkStats {
    fn add(&mut self, status: ScenarioStatus) {
        self.total += 1;
        match status {
            ScenarioStatus::Passed => self.passed += 1,
            ScenarioStatus::Failed => self.failed += 1,
            ScenarioStatus::Error => self.error += 1,
            ScenarioStatus::Timeout => self.timeout += 1,
        }
    }

    pub fn pct(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            count as f64 * 100.0 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedFile {
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub benchmarks: BTreeMap<String, BenchmarkStats>,
    pub total: BenchmarkStats,
    pub records: Vec<ScenarioRecord>,
    pub skipped: Vec<SkippedFile>,
}

impl SuiteReport {
    /// Plain-text summary: one row per technology plus a total row, with
    /// Total / Passed / Failed / Error / Timeout columns.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>7} {:>16} {:>16} {:>16} {:>16}\n",
            "", "Total", "Passed (%)", "Failed (%)", "Error (%)", "Timeout (%)"
        ));
        let row = |name: &str, s: &BenchmarkStats| {
            format!(
                "{:<10} {:>7} {:>9} ({:>4.1}%) {:>9} ({:>4.1}%) {:>9} ({:>4.1}%) {:>9} ({:>4.1}%)\n",
                name,
                s.total,
                s.passed,
                s.pct(s.passed),
                s.failed,
                s.pct(s.failed),
                s.error,
                s.pct(s.error),
                s.timeout,
                s.pct(s.timeout),
            )
        };
        for (tech, stats) in &self.benchmarks {
            out.push_str(&row(tech, stats));
        }
        out.push_str(&row("total", &self.total));
        out
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("cannot read corpus directory `{path}`: {source}")]
    Corpus {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("worker pool construction failed: {0}")]
    Pool(String),
}

/// Runs the full generation + repair pipeline over every parsable script
/// under `corpus`. Files are processed in path order; all scenarios of one
/// file run on the same worker. Results are deterministic for a fixed seed
/// regardless of worker count.
pub fn run_suite(
    corpus: &Path,
    mutation_cfg: &MutationConfig,
    repair_cfg: &RepairConfig,
    workers: usize,
    db: &NormalizationDb,
) -> Result<SuiteReport, SuiteError> {
    let mut files = Vec::new();
    collect_scripts(corpus, &mut files).map_err(|source| SuiteError::Corpus {
        path: corpus.to_path_buf(),
        source,
    })?;
    files.sort();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SuiteError::Pool(e.to_string()))?;

    let results: Vec<FileResult> = pool.install(|| {
        use rayon::prelude::*;
        files
            .par_iter()
            .map(|file| process_file(file, corpus, mutation_cfg, repair_cfg, db))
            .collect()
    });

    let mut report = SuiteReport {
        benchmarks: BTreeMap::new(),
        total: BenchmarkStats::default(),
        records: Vec::new(),
        skipped: Vec::new(),
    };
    for result in results {
        match result {
            FileResult::Skipped(skip) => report.skipped.push(skip),
            FileResult::Ran { tech, records } => {
                let stats = report.benchmarks.entry(tech.to_string()).or_default();
                for record in records {
                    stats.add(record.status);
                    report.total.add(record.status);
                    report.records.push(record);
                }
            }
        }
    }
    Ok(report)
}

enum FileResult {
    Skipped(SkippedFile),
    Ran {
        tech: Tech,
        records: Vec<ScenarioRecord>,
    },
}

fn collect_scripts(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_scripts(&path, out)?;
        } else if detect_tech(&path).is_some() {
            out.push(path);
        }
    }
    Ok(())
}

fn label_for(file: &Path, corpus: &Path) -> String {
    file.strip_prefix(corpus)
        .unwrap_or(file)
        .to_string_lossy()
        .into_owned()
}

fn process_file(
    file: &Path,
    corpus: &Path,
    mutation_cfg: &MutationConfig,
    repair_cfg: &RepairConfig,
    db: &NormalizationDb,
) -> FileResult {
    let label = label_for(file, corpus);
    let skip = |reason: String| {
        FileResult::Skipped(SkippedFile {
            file: label.clone(),
            reason,
        })
    };
    let Some(tech) = detect_tech(file) else {
        return skip("unknown technology".into());
    };
    let source = match fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => return skip(format!("unreadable: {e}")),
    };
    let raw = match parse_script(tech, &source) {
        Ok(s) => s,
        Err(e) => return skip(classify_parse_error(&e)),
    };
    let normalized = normalize_script(&raw, db);
    let scenarios = match generate_scenarios(&normalized, Path::new(&label), mutation_cfg) {
        Ok(s) => s,
        Err(GenerateError::NoMutableAttributes) => {
            return skip("generation-skip: no mutable attributes".into())
        }
        Err(GenerateError::Infer(e)) => return skip(format!("generation-skip: {e}")),
    };
    let mut records = Vec::new();
    for (idx, scenario) in scenarios.iter().enumerate() {
        let (_, mut record) = run_scenario_checked(&raw, &normalized, scenario, repair_cfg, db);
        record.scenario_index = idx;
        records.push(record);
    }
    FileResult::Ran { tech, records }
}

pub fn parse_script(tech: Tech, source: &str) -> Result<Script, ParseError> {
    match tech {
        Tech::Ansible => parse_ansible(source),
        Tech::Puppet => parse_puppet(source),
    }
}

fn classify_parse_error(err: &ParseError) -> String {
    match err.kind {
        ParseErrorKind::UnsupportedArrayTitle => format!("array-title: {err}"),
        ParseErrorKind::Unsupported => format!("unsupported: {err}"),
        ParseErrorKind::Syntax => format!("parse-error: {err}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prepared(src: &str, puppet: bool) -> (Script, Script) {
        let db = NormalizationDb::bundled();
        let raw = if puppet {
            crate::frontend::parse_puppet(src).unwrap()
        } else {
            crate::frontend::parse_ansible(src).unwrap()
        };
        let normalized = normalize_script(&raw, db);
        (raw, normalized)
    }

    #[test]
    fn pools_never_offer_the_current_value() {
        let pools = ValuePools::default();
        for current in ["present", "absent", "directory", "link"] {
            let candidates = pools.candidates("file", "state", current);
            assert!(!candidates.is_empty());
            assert!(!candidates.contains(&current.to_string()));
        }
        let paths = pools.candidates("file", "path", "/etc/app.conf");
        assert_eq!(paths, vec!["/etc/app.conf.bak", "/etc/app.conf.new"]);
        assert!(pools.candidates("file", "content", "x").is_empty());
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let (_, normalized) = prepared(
            "file { '/a': ensure => file, mode => '0644', owner => 'root' }\n",
            true,
        );
        let cfg = MutationConfig {
            seed: 42,
            ..MutationConfig::default()
        };
        let a = generate_scenarios(&normalized, Path::new("x.pp"), &cfg).unwrap();
        let b = generate_scenarios(&normalized, Path::new("x.pp"), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
        for scenario in &a {
            for mutation in &scenario.origin.mutations {
                assert_ne!(mutation.old_value, mutation.new_value);
            }
        }
    }

    #[test]
    fn generation_covers_every_inferred_state() {
        let (_, normalized) = prepared(
            "if $os == 'debian' {\n  package { 'apache2': ensure => installed }\n} else {\n  package { 'httpd': ensure => installed }\n}\n",
            true,
        );
        let cfg = MutationConfig {
            seed: 7,
            ..MutationConfig::default()
        };
        let scenarios = generate_scenarios(&normalized, Path::new("x.pp"), &cfg).unwrap();
        let state_indices: BTreeSet<usize> =
            scenarios.iter().map(|s| s.origin.state_index).collect();
        assert_eq!(state_indices, BTreeSet::from([0, 1]));
    }

    #[test]
    fn generation_skips_unsupported_only_scripts() {
        let (_, normalized) = prepared("cron { 'job': command => '/bin/true' }\n", true);
        let err =
            generate_scenarios(&normalized, Path::new("x.pp"), &MutationConfig::default())
                .unwrap_err();
        assert!(matches!(err, GenerateError::NoMutableAttributes));
    }

    #[test]
    fn unknown_attributes_are_not_targets_and_not_desired() {
        let (_, normalized) = prepared(
            "file { '/a': ensure => file, owner => $who }\n",
            true,
        );
        let cfg = MutationConfig {
            seed: 3,
            ..MutationConfig::default()
        };
        let scenarios = generate_scenarios(&normalized, Path::new("x.pp"), &cfg).unwrap();
        for scenario in &scenarios {
            for res in &scenario.desired.resources {
                assert!(!res.attributes.values().any(|v| v == UNKNOWN_VALUE));
                assert!(!res.attributes.contains_key("owner"));
            }
            for m in &scenario.origin.mutations {
                assert_ne!(m.attribute, "owner");
            }
        }
    }

    #[test]
    fn single_mutation_scenario_passes_with_cost_one() {
        let (raw, normalized) = prepared("file { '/a': ensure => file, mode => '0644' }\n", true);
        let cfg = MutationConfig {
            mutations_per_scenario: 1..=1,
            scenarios_per_state: 5,
            seed: 11,
            ..MutationConfig::default()
        };
        let scenarios = generate_scenarios(&normalized, Path::new("x.pp"), &cfg).unwrap();
        assert!(!scenarios.is_empty());
        let db = NormalizationDb::bundled();
        for scenario in &scenarios {
            let (outcome, record) =
                run_scenario_checked(&raw, &normalized, scenario, &RepairConfig::default(), db);
            assert_eq!(outcome.status, ScenarioStatus::Passed, "{scenario:?}");
            assert!(record.solutions_verified);
            assert!(record.patch_closure_ok);
            assert_eq!(record.solution.as_ref().unwrap().total_cost, 1);
        }
    }

    #[test]
    fn forced_timeout_is_classified() {
        let mut src = String::from("$a = 'x'\n");
        for i in 0..8 {
            src.push_str(&format!(
                "if $a == 'f{i}' {{\n  file {{ '/f{i}': ensure => file }}\n}}\n"
            ));
        }
        let (raw, normalized) = prepared(&src, true);
        let desired: Vec<String> = (0..8)
            .map(|i| format!(r#"{{"id":"file:/f{i}","attributes":{{"state":"present"}}}}"#))
            .collect();
        let desired =
            crate::state::parse_state(&format!("[{}]", desired.join(","))).unwrap();
        let scenario = Scenario {
            script: PathBuf::from("x.pp"),
            tech: Tech::Puppet,
            desired,
            origin: ScenarioOrigin {
                state_index: 0,
                mutations: Vec::new(),
            },
            seed: 0,
        };
        let cfg = RepairConfig {
            timeout: std::time::Duration::from_micros(1),
            ..RepairConfig::default()
        };
        let outcome = run_scenario(&raw, &normalized, &scenario, &cfg, NormalizationDb::bundled());
        assert_eq!(outcome.status, ScenarioStatus::Timeout);
        assert_eq!(outcome.solutions_found, 0);
    }

    #[test]
    fn engine_fault_is_classified_as_error() {
        let (raw, normalized) = prepared("package { $pkg: ensure => installed }\n", true);
        let desired = crate::state::parse_state(
            r#"[{"id":"package:x","attributes":{"state":"present"}}]"#,
        )
        .unwrap();
        let scenario = Scenario {
            script: PathBuf::from("x.pp"),
            tech: Tech::Puppet,
            desired,
            origin: ScenarioOrigin {
                state_index: 0,
                mutations: Vec::new(),
            },
            seed: 0,
        };
        let (outcome, record) = run_scenario_checked(
            &raw,
            &normalized,
            &scenario,
            &RepairConfig::default(),
            NormalizationDb::bundled(),
        );
        assert_eq!(outcome.status, ScenarioStatus::Error);
        assert_eq!(record.failure_class.as_deref(), Some("undefined-variable"));
    }

    #[test]
    fn table_percentages_sum_to_one_hundred() {
        let mut stats = BenchmarkStats::default();
        stats.add(ScenarioStatus::Passed);
        stats.add(ScenarioStatus::Passed);
        stats.add(ScenarioStatus::Failed);
        stats.add(ScenarioStatus::Timeout);
        let sum = stats.pct(stats.passed)
            + stats.pct(stats.failed)
            + stats.pct(stats.error)
            + stats.pct(stats.timeout);
        assert!((sum - 100.0).abs() < 1e-9);
    }
}
