//! State inference: a static evaluator that computes the possible system
//! states of a normalized script (forking on conditionals it cannot decide),
//! and a syscall-trace adapter that builds a state from a trace log plus
//! filesystem probing.

use std::collections::BTreeMap;
use std::fs;
use std::os::unix::fs::{MetadataExt, PermissionsExt};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ir::{BranchSide, CondId, Expr, ExprKind, Resource, Script, Statement};
use crate::normalize::{identifying_attribute, identifying_expr};
use crate::state::{ResourceState, SystemState, UNKNOWN_VALUE};

pub const DEFAULT_BRANCH_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum InferError {
    #[error("branch enumeration exceeded cap of {cap} paths")]
    BranchCapExceeded { cap: usize },
    #[error("identifier of resource `{type_name}` at line {line} evaluates to unknown")]
    UnknownIdentifier { type_name: String, line: u32 },
    #[error("filesystem root `{root}` is not readable: {source}")]
    FsRoot {
        root: PathBuf,
        source: std::io::Error,
    },
}

/// A concrete or unresolvable value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Known(String),
    Unknown,
}

impl Value {
    pub fn known(&self) -> Option<&str> {
        match self {
            Value::Known(v) => Some(v),
            Value::Unknown => None,
        }
    }
}

/// Evaluation environment: variable bindings plus the branch decisions taken
/// to reach the current point.
#[derive(Debug, Clone, Default)]
pub struct EvalEnv {
    pub bindings: BTreeMap<String, Value>,
    pub branch_decisions: Vec<(CondId, BranchSide)>,
}

impl EvalEnv {
    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), value);
    }
}

/// Canonical rendering of a literal.
pub fn render_literal(kind: &ExprKind) -> Option<String> {
    match kind {
        ExprKind::StringLiteral(s) => Some(s.clone()),
        ExprKind::IntLiteral(i) => Some(i.to_string()),
        ExprKind::BoolLiteral(b) => Some(b.to_string()),
        ExprKind::Null => Some(String::new()),
        _ => None,
    }
}

/// Evaluates an expression to a canonical value string, or `Unknown` when a
/// variable is unbound or an operand does not fit the operator. Total:
/// never fails.
pub fn eval_expression(expr: &Expr, env: &EvalEnv) -> Value {
    match &expr.kind {
        ExprKind::StringLiteral(_)
        | ExprKind::IntLiteral(_)
        | ExprKind::BoolLiteral(_)
        | ExprKind::Null => Value::Known(render_literal(&expr.kind).expect("literal renders")),
        ExprKind::VariableReference(name) => {
            env.bindings.get(name).cloned().unwrap_or(Value::Unknown)
        }
        ExprKind::Concat(l, r) => {
            match (eval_expression(l, env), eval_expression(r, env)) {
                (Value::Known(a), Value::Known(b)) => Value::Known(format!("{a}{b}")),
                _ => Value::Unknown,
            }
        }
        ExprKind::Sum(l, r) => match (eval_expression(l, env), eval_expression(r, env)) {
            (Value::Known(a), Value::Known(b)) => {
                match (a.trim().parse::<i64>(), b.trim().parse::<i64>()) {
                    (Ok(x), Ok(y)) => Value::Known((x + y).to_string()),
                    _ => Value::Unknown,
                }
            }
            _ => Value::Unknown,
        },
        ExprKind::Equals(l, r) => match (eval_expression(l, env), eval_expression(r, env)) {
            (Value::Known(a), Value::Known(b)) => Value::Known((a == b).to_string()),
            _ => Value::Unknown,
        },
        ExprKind::NotEquals(l, r) => match (eval_expression(l, env), eval_expression(r, env)) {
            (Value::Known(a), Value::Known(b)) => Value::Known((a != b).to_string()),
            _ => Value::Unknown,
        },
    }
}

/// One inferred state with the branch decisions that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InferredState {
    pub state: SystemState,
    pub branch_decisions: Vec<(CondId, BranchSide)>,
}

/// Computes the possible system states of a normalized script.
///
/// Statements execute in order. Assignments update the environment; a
/// conditional whose condition is decided follows that branch, while an
/// undecided condition forks both branches. Each resource becomes a resource
/// state under the environment at its position; later declarations of an id
/// overwrite earlier attribute values. Results are deduplicated by state
/// equality, ordered by branch-decision vector (then-first).
pub fn infer_states(script: &Script, branch_cap: usize) -> Result<Vec<InferredState>, InferError> {
    let mut paths = 1usize;
    let mut out: Vec<InferredState> = Vec::new();
    let resources = ResourceAccumulator::default();
    run_statements(
        &[&script.statements],
        EvalEnv::default(),
        resources,
        branch_cap,
        &mut paths,
        &mut out,
    )?;
    let mut deduped: Vec<InferredState> = Vec::new();
    for candidate in out {
        if !deduped.iter().any(|s| s.state == candidate.state) {
            deduped.push(candidate);
        }
    }
    Ok(deduped)
}

/// Resource map preserving first-declaration order with per-attribute
/// overwrite on redeclaration.
#[derive(Debug, Clone, Default)]
struct ResourceAccumulator {
    entries: Vec<(String, BTreeMap<String, String>)>,
}

impl ResourceAccumulator {
    fn record(&mut self, id: String, attrs: BTreeMap<String, String>) {
        match self.entries.iter_mut().find(|(eid, _)| *eid == id) {
            Some((_, existing)) => existing.extend(attrs),
            None => self.entries.push((id, attrs)),
        }
    }

    fn into_state(self) -> SystemState {
        SystemState {
            resources: self
                .entries
                .into_iter()
                .map(|(id, attributes)| ResourceState { id, attributes })
                .collect(),
        }
    }
}

fn run_statements<'a>(
    continuation: &[&'a [Statement]],
    env: EvalEnv,
    resources: ResourceAccumulator,
    branch_cap: usize,
    paths: &mut usize,
    out: &mut Vec<InferredState>,
) -> Result<(), InferError> {
    // The continuation is a stack of statement slices; the last block is the
    // innermost and execution falls through to the enclosing suffixes.
    let mut env = env;
    let mut resources = resources;
    let mut cont: Vec<(&'a [Statement], usize)> =
        continuation.iter().map(|block| (*block, 0usize)).collect();
    loop {
        let Some(&mut (block, ref mut idx)) = cont.last_mut() else {
            out.push(InferredState {
                state: resources.into_state(),
                branch_decisions: env.branch_decisions,
            });
            return Ok(());
        };
        if *idx >= block.len() {
            cont.pop();
            continue;
        }
        let stmt = &block[*idx];
        *idx += 1;
        match stmt {
            Statement::VariableAssignment { name, value, .. } => {
                let v = eval_expression(value, &env);
                env.bind(name.clone(), v);
            }
            Statement::Resource(res) => {
                let (id, attrs) = evaluate_resource(res, &env)?;
                resources.record(id, attrs);
            }
            Statement::Conditional {
                id,
                condition,
                then_branch,
                else_branch,
                ..
            } => {
                let outcome = eval_expression(condition, &env);
                match outcome.known() {
                    Some("true") => {
                        env.branch_decisions.push((*id, BranchSide::Then));
                        cont.push((then_branch, 0));
                    }
                    Some("false") => {
                        env.branch_decisions.push((*id, BranchSide::Else));
                        cont.push((else_branch, 0));
                    }
                    _ => {
                        *paths += 1;
                        if *paths > branch_cap {
                            return Err(InferError::BranchCapExceeded { cap: branch_cap });
                        }
                        // Then-path first keeps output in lexicographic
                        // branch-vector order.
                        let mut then_env = env.clone();
                        then_env.branch_decisions.push((*id, BranchSide::Then));
                        let mut then_blocks: Vec<&'a [Statement]> =
                            cont.iter().map(|(blk, i)| &blk[*i..]).collect();
                        then_blocks.push(then_branch);
                        run_statements(
                            &then_blocks,
                            then_env,
                            resources.clone(),
                            branch_cap,
                            paths,
                            out,
                        )?;
                        env.branch_decisions.push((*id, BranchSide::Else));
                        cont.push((else_branch, 0));
                    }
                }
            }
        }
    }
}

fn evaluate_resource(
    res: &Resource,
    env: &EvalEnv,
) -> Result<(String, BTreeMap<String, String>), InferError> {
    let id_value = eval_expression(identifying_expr(res), env);
    let Some(identifier) = id_value.known() else {
        return Err(InferError::UnknownIdentifier {
            type_name: res.type_name.clone(),
            line: res.span.start_line,
        });
    };
    let id = format!("{}:{}", res.type_name, identifier);
    let mut attrs = BTreeMap::new();
    for attr in &res.attributes {
        let value = match eval_expression(&attr.value, env) {
            Value::Known(v) => v,
            Value::Unknown => UNKNOWN_VALUE.to_string(),
        };
        attrs.insert(attr.name.clone(), value);
    }
    // The identifying attribute is part of the state even when the script
    // carries it only in the title.
    if let Some(id_attr) = identifying_attribute(&res.type_name) {
        attrs.insert(id_attr.to_string(), identifier.to_string());
    }
    Ok((id, attrs))
}

// --- syscall-trace adapter -------------------------------------------------

/// Filesystem operation extracted from one trace line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceOp {
    Write,
    Create,
    Chmod,
    Chown,
    Unlink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub path: String,
    pub op: TraceOp,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TraceOptions {
    /// Record a `content` attribute holding a sha256 digest for regular files.
    pub content_hash: bool,
}

#[derive(Debug)]
pub struct TraceInference {
    pub state: SystemState,
    /// Lines that could not be interpreted and were skipped.
    pub skipped_lines: usize,
}

const WRITE_FLAGS: &[&str] = &["O_WRONLY", "O_RDWR", "O_CREAT", "O_TRUNC", "O_APPEND"];

/// Parses the simplified strace dialect: one `syscall("path", ...)` per
/// line, first quoted string is the path. Lines for irrelevant syscalls are
/// ignored; lines that cannot be interpreted are counted as skipped.
pub fn parse_trace(text: &str) -> (Vec<TraceEvent>, usize) {
    let mut events = Vec::new();
    let mut skipped = 0usize;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(paren) = line.find('(') else {
            skipped += 1;
            continue;
        };
        let name = line[..paren].trim();
        let name = name.rsplit(|c: char| c.is_whitespace()).next().unwrap_or(name);
        let args = &line[paren + 1..];
        let quoted = |from: usize| -> Option<(String, usize)> {
            let start = args[from..].find('"')? + from + 1;
            let end = args[start..].find('"')? + start;
            Some((args[start..end].to_string(), end + 1))
        };
        let ops: &[(TraceOp, &str)] = match name {
            "open" | "openat" => {
                let Some((path, _)) = quoted(0) else {
                    skipped += 1;
                    continue;
                };
                if WRITE_FLAGS.iter().any(|f| args.contains(f)) {
                    push_event(&mut events, &mut skipped, path, TraceOp::Write);
                }
                continue;
            }
            "creat" => &[(TraceOp::Create, "")],
            "mkdir" | "mkdirat" => &[(TraceOp::Create, "")],
            "chmod" | "fchmodat" => &[(TraceOp::Chmod, "")],
            "chown" | "lchown" | "fchownat" => &[(TraceOp::Chown, "")],
            "unlink" | "unlinkat" | "rmdir" => &[(TraceOp::Unlink, "")],
            "symlink" | "symlinkat" | "link" => {
                // The affected path is the link being created, i.e. the last
                // quoted argument; the first names the target.
                let Some((first, next)) = quoted(0) else {
                    skipped += 1;
                    continue;
                };
                let path = quoted(next).map(|(p, _)| p).unwrap_or(first);
                push_event(&mut events, &mut skipped, path, TraceOp::Create);
                continue;
            }
            "rename" | "renameat" => {
                // Source becomes absent, destination is created.
                let Some((src, next)) = quoted(0) else {
                    skipped += 1;
                    continue;
                };
                push_event(&mut events, &mut skipped, src, TraceOp::Unlink);
                if let Some((dst, _)) = quoted(next) {
                    push_event(&mut events, &mut skipped, dst, TraceOp::Create);
                }
                continue;
            }
            "write" | "pwrite64" | "truncate" | "ftruncate" => &[(TraceOp::Write, "")],
            _ => continue,
        };
        let Some((path, _)) = quoted(0) else {
            skipped += 1;
            continue;
        };
        for (op, _) in ops {
            push_event(&mut events, &mut skipped, path.clone(), *op);
        }
    }
    (events, skipped)
}

fn push_event(events: &mut Vec<TraceEvent>, skipped: &mut usize, path: String, op: TraceOp) {
    if !path.starts_with('/') {
        *skipped += 1;
        return;
    }
    events.push(TraceEvent { path, op });
}

/// Builds a system state from a trace: every touched path is probed under
/// `fs_root` and described as a `file:` resource; paths that do not exist
/// are recorded as absent.
pub fn infer_from_trace(
    trace: &str,
    fs_root: &Path,
    options: TraceOptions,
) -> Result<TraceInference, InferError> {
    fs::metadata(fs_root).map_err(|source| InferError::FsRoot {
        root: fs_root.to_path_buf(),
        source,
    })?;
    let (events, skipped_lines) = parse_trace(trace);
    let mut seen = Vec::new();
    for event in &events {
        if !seen.contains(&event.path) {
            seen.push(event.path.clone());
        }
    }
    let names = NameTables::load(fs_root);
    let mut resources = Vec::new();
    for path in seen {
        let probe_target = fs_root.join(path.trim_start_matches('/'));
        let mut attrs = BTreeMap::new();
        attrs.insert("path".to_string(), path.clone());
        match fs::symlink_metadata(&probe_target) {
            Err(_) => {
                attrs.insert("state".to_string(), "absent".to_string());
            }
            Ok(meta) => {
                let ft = meta.file_type();
                if ft.is_symlink() {
                    attrs.insert("state".to_string(), "link".to_string());
                    if let Ok(target) = fs::read_link(&probe_target) {
                        attrs.insert(
                            "target".to_string(),
                            target.to_string_lossy().into_owned(),
                        );
                    }
                } else {
                    let state = if ft.is_dir() { "directory" } else { "present" };
                    attrs.insert("state".to_string(), state.to_string());
                    attrs.insert("owner".to_string(), names.user(meta.uid()));
                    attrs.insert("group".to_string(), names.group(meta.gid()));
                    attrs.insert(
                        "mode".to_string(),
                        format!("{:04o}", meta.permissions().mode() & 0o7777),
                    );
                    if options.content_hash && ft.is_file() {
                        if let Ok(bytes) = fs::read(&probe_target) {
                            let digest = Sha256::digest(&bytes);
                            attrs.insert(
                                "content".to_string(),
                                format!("sha256:{}", hex_string(&digest)),
                            );
                        }
                    }
                }
            }
        }
        resources.push(ResourceState {
            id: format!("file:{path}"),
            attributes: attrs,
        });
    }
    Ok(TraceInference {
        state: SystemState { resources },
        skipped_lines,
    })
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// uid/gid to name maps read from the host's passwd/group files, falling
/// back to numeric strings.
struct NameTables {
    users: BTreeMap<u32, String>,
    groups: BTreeMap<u32, String>,
}

impl NameTables {
    fn load(_fs_root: &Path) -> NameTables {
        NameTables {
            users: read_id_table("/etc/passwd"),
            groups: read_id_table("/etc/group"),
        }
    }

    fn user(&self, uid: u32) -> String {
        self.users.get(&uid).cloned().unwrap_or_else(|| uid.to_string())
    }

    fn group(&self, gid: u32) -> String {
        self.groups
            .get(&gid)
            .cloned()
            .unwrap_or_else(|| gid.to_string())
    }
}

fn read_id_table(path: &str) -> BTreeMap<u32, String> {
    let mut table = BTreeMap::new();
    let Ok(text) = fs::read_to_string(path) else {
        return table;
    };
    for line in text.lines() {
        let mut fields = line.split(':');
        let (Some(name), _, Some(id)) = (fields.next(), fields.next(), fields.next()) else {
            continue;
        };
        if let Ok(id) = id.parse::<u32>() {
            table.entry(id).or_insert_with(|| name.to_string());
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_ansible, parse_puppet};
    use crate::normalize::{normalize_script, NormalizationDb};

    fn infer(src: &str, puppet: bool) -> Vec<InferredState> {
        let db = NormalizationDb::bundled();
        let script = if puppet {
            parse_puppet(src).unwrap()
        } else {
            parse_ansible(src).unwrap()
        };
        infer_states(&normalize_script(&script, db), DEFAULT_BRANCH_CAP).unwrap()
    }

    fn env_with(pairs: &[(&str, &str)]) -> EvalEnv {
        let mut env = EvalEnv::default();
        for (k, v) in pairs {
            env.bind(*k, Value::Known(v.to_string()));
        }
        env
    }

    #[test]
    fn eval_concat_with_bound_variable() {
        let script = parse_ansible("- file:\n    path: \"/etc/{{ app }}\"\n    state: touch\n").unwrap();
        let Statement::Resource(res) = &script.statements[0] else {
            panic!();
        };
        let path = &res.attribute("path").unwrap().value;
        assert_eq!(
            eval_expression(path, &env_with(&[("app", "nginx")])),
            Value::Known("/etc/nginx".into())
        );
        assert_eq!(eval_expression(path, &EvalEnv::default()), Value::Unknown);
    }

    #[test]
    fn eval_sum_of_integers() {
        let script = parse_puppet("$x = 2 + 3\n").unwrap();
        let Statement::VariableAssignment { value, .. } = &script.statements[0] else {
            panic!();
        };
        assert_eq!(
            eval_expression(value, &EvalEnv::default()),
            Value::Known("5".into())
        );
    }

    #[test]
    fn missing_variable_is_unknown() {
        let expr = Expr::new(
            ExprKind::VariableReference("missing".into()),
            crate::ir::Span::SYNTHETIC,
        );
        assert_eq!(eval_expression(&expr, &EvalEnv::default()), Value::Unknown);
    }

    #[test]
    fn single_resource_yields_one_state() {
        let states = infer("file { '/a': ensure => file, mode => '0644' }\n", true);
        assert_eq!(states.len(), 1);
        let state = &states[0].state;
        assert_eq!(state.resources.len(), 1);
        assert_eq!(state.resources[0].id, "file:/a");
        assert_eq!(state.resources[0].attributes["state"], "present");
        assert_eq!(state.resources[0].attributes["mode"], "0644");
        assert_eq!(state.resources[0].attributes["path"], "/a");
    }

    #[test]
    fn undecided_conditional_forks_two_states() {
        let src = "if $os == 'debian' {\n  package { 'apache2': ensure => installed }\n} else {\n  package { 'httpd': ensure => installed }\n}\n";
        let states = infer(src, true);
        assert_eq!(states.len(), 2);
        assert_eq!(states[0].branch_decisions, vec![(CondId(0), BranchSide::Then)]);
        assert_eq!(states[0].state.resources[0].id, "package:apache2");
        assert_eq!(states[1].branch_decisions, vec![(CondId(0), BranchSide::Else)]);
        assert_eq!(states[1].state.resources[0].id, "package:httpd");
    }

    #[test]
    fn decided_conditional_follows_one_branch() {
        let src = "$os = 'debian'\nif $os == 'debian' {\n  package { 'apache2': ensure => installed }\n} else {\n  package { 'httpd': ensure => installed }\n}\n";
        let states = infer(src, true);
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].state.resources[0].id, "package:apache2");
    }

    #[test]
    fn later_declarations_overwrite_attributes() {
        let src = "file { '/a': ensure => file, mode => '0644' }\nfile { '/a': mode => '0600' }\n";
        let states = infer(src, true);
        assert_eq!(states.len(), 1);
        let res = &states[0].state.resources[0];
        assert_eq!(res.attributes["mode"], "0600");
        assert_eq!(res.attributes["state"], "present");
    }

    #[test]
    fn unknown_attribute_value_uses_sentinel() {
        let src = "file { '/a': ensure => file, owner => $who }\n";
        let states = infer(src, true);
        assert_eq!(states[0].state.resources[0].attributes["owner"], UNKNOWN_VALUE);
    }

    #[test]
    fn unknown_identifier_is_an_error() {
        let db = NormalizationDb::bundled();
        let script = parse_puppet("package { $pkg: ensure => installed }\n").unwrap();
        let err = infer_states(&normalize_script(&script, db), DEFAULT_BRANCH_CAP).unwrap_err();
        assert!(matches!(err, InferError::UnknownIdentifier { .. }));
    }

    #[test]
    fn branch_cap_is_enforced() {
        let mut src = String::new();
        for i in 0..8 {
            src.push_str(&format!(
                "if $v{i} == 'x' {{\n  file {{ '/f{i}': ensure => file }}\n}}\n"
            ));
        }
        let db = NormalizationDb::bundled();
        let script = parse_puppet(&src).unwrap();
        let err = infer_states(&normalize_script(&script, db), 16).unwrap_err();
        assert!(matches!(err, InferError::BranchCapExceeded { cap: 16 }));
        assert_eq!(
            infer_states(&normalize_script(&script, db), 256).unwrap().len(),
            256
        );
    }

    #[test]
    fn states_order_is_lexicographic_over_decisions() {
        let src = "if $a == '1' {\n  file { '/a': ensure => file }\n} else {\n  file { '/a': ensure => absent }\n}\nif $b == '2' {\n  file { '/b': ensure => file }\n} else {\n  file { '/b': ensure => absent }\n}\n";
        let states = infer(src, true);
        let decisions: Vec<Vec<(CondId, BranchSide)>> =
            states.iter().map(|s| s.branch_decisions.clone()).collect();
        assert_eq!(
            decisions,
            vec![
                vec![(CondId(0), BranchSide::Then), (CondId(1), BranchSide::Then)],
                vec![(CondId(0), BranchSide::Then), (CondId(1), BranchSide::Else)],
                vec![(CondId(0), BranchSide::Else), (CondId(1), BranchSide::Then)],
                vec![(CondId(0), BranchSide::Else), (CondId(1), BranchSide::Else)],
            ]
        );
    }

    #[test]
    fn states_deduplicate_by_equality() {
        // Both branches produce the same resource.
        let src = "if $x == '1' {\n  file { '/a': ensure => file }\n} else {\n  file { '/a': ensure => file }\n}\n";
        let states = infer(src, true);
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].branch_decisions, vec![(CondId(0), BranchSide::Then)]);
    }

    #[test]
    fn steam_playbook_infers_package_state() {
        let src = "---\n- hosts: all\n  tasks:\n    - name: install\n      package:\n        name: steam\n        state: present\n";
        let states = infer(src, false);
        assert_eq!(states.len(), 1);
        let res = &states[0].state.resources[0];
        assert_eq!(res.id, "package:steam");
        assert_eq!(res.attributes["state"], "present");
    }

    #[test]
    fn trace_parse_extracts_paths_and_ops() {
        let (events, skipped) = parse_trace(
            "chmod(\"/etc/app.conf\", 0644) = 0\nopen(\"/var/log/app.log\", O_WRONLY|O_CREAT) = 3\nopen(\"/etc/passwd\", O_RDONLY) = 4\nread(3, \"...\", 512) = 512\nnot a syscall\n",
        );
        assert_eq!(skipped, 1);
        assert_eq!(
            events,
            vec![
                TraceEvent { path: "/etc/app.conf".into(), op: TraceOp::Chmod },
                TraceEvent { path: "/var/log/app.log".into(), op: TraceOp::Write },
            ]
        );
    }

    #[test]
    fn empty_trace_is_empty_state() {
        let dir = tempfile::tempdir().unwrap();
        let inferred = infer_from_trace("", dir.path(), TraceOptions::default()).unwrap();
        assert!(inferred.state.is_empty());
        assert_eq!(inferred.skipped_lines, 0);
    }

    #[test]
    fn trace_probe_describes_files() {
        let dir = tempfile::tempdir().unwrap();
        let etc = dir.path().join("etc");
        fs::create_dir_all(&etc).unwrap();
        let conf = etc.join("app.conf");
        fs::write(&conf, "x = 1\n").unwrap();
        let mut perms = fs::metadata(&conf).unwrap().permissions();
        perms.set_mode(0o644);
        fs::set_permissions(&conf, perms).unwrap();

        let trace = "chmod(\"/etc/app.conf\", 0644) = 0\nunlink(\"/tmp/x\") = 0\n";
        let inferred = infer_from_trace(trace, dir.path(), TraceOptions::default()).unwrap();
        assert_eq!(inferred.state.resources.len(), 2);
        let conf_state = inferred.state.resource("file:/etc/app.conf").unwrap();
        assert_eq!(conf_state.attributes["state"], "present");
        assert_eq!(conf_state.attributes["mode"], "0644");
        assert!(conf_state.attributes.contains_key("owner"));
        let gone = inferred.state.resource("file:/tmp/x").unwrap();
        assert_eq!(gone.attributes["state"], "absent");
    }

    #[test]
    fn trace_probe_describes_links_and_dirs() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("srv/www")).unwrap();
        std::os::unix::fs::symlink("/srv/www", dir.path().join("srv/link")).unwrap();
        let trace = "mkdir(\"/srv/www\", 0755) = 0\nsymlink(\"/srv/www\", \"/srv/link\") = 0\n";
        let inferred = infer_from_trace(trace, dir.path(), TraceOptions::default()).unwrap();
        let www = inferred.state.resource("file:/srv/www").unwrap();
        assert_eq!(www.attributes["state"], "directory");
        let link = inferred.state.resource("file:/srv/link").unwrap();
        assert_eq!(link.attributes["state"], "link");
        assert_eq!(link.attributes["target"], "/srv/www");
    }

    #[test]
    fn unreadable_root_is_an_error() {
        let err = infer_from_trace("", Path::new("/no/such/root"), TraceOptions::default())
            .unwrap_err();
        assert!(matches!(err, InferError::FsRoot { .. }));
    }
}
