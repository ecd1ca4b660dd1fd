//! Constraint-based repair: finds minimal-cost edit sets over the normalized
//! IR such that re-evaluating the patched script satisfies a desired state.
//!
//! The search works in three phases. First it enumerates branch plans:
//! condition-flip edit sets that steer decided conditionals, re-simulating
//! the script under each plan so environments stay accurate. Second, for
//! every (plan, execution path) it derives discharge options per violated
//! desired attribute by propagating string equations structurally (a concat
//! with a known literal prefix constrains the embedded variable; a variable
//! pinned to a value is discharged by one edit at its assignment, shared by
//! all dependents), falling back to whole-expression replacement. Missing
//! attributes are sketched in; missing resources are discharged by insertion
//! or by re-identifying an existing resource of the same type. Third,
//! combined candidates are explored in increasing total cost and each one is
//! verified by patching the IR in memory, re-running inference, and checking
//! satisfaction; only verified solutions are emitted.
//!
//! New values come only from desired-state values, closed canonical value
//! sets, and values forced by equation propagation; the engine never invents
//! free strings.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::infer::{
    eval_expression, infer_states, EvalEnv, InferError, Value, DEFAULT_BRANCH_CAP,
};
use crate::ir::{
    Attribute, BranchSide, CondId, Expr, ExprKind, NodePath, Resource, Script, Span, Statement,
};
use crate::normalize::{identifying_attribute, CanonicalModel};
use crate::state::{satisfies, SystemState, UNKNOWN_VALUE};

const PLAN_CAP: usize = 64;
const OPTIONS_PER_CONSTRAINT_CAP: usize = 8;
const ALTERNATIVES_PER_RESOURCE_CAP: usize = 64;
const CANDIDATE_CAP: usize = 50_000;
const DISCHARGE_DEPTH_CAP: usize = 4;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("state inference failed: {0}")]
    Infer(#[from] InferError),
    #[error("internal engine error: {0}")]
    Internal(String),
}

/// Search limits. Defaults: up to 10 solutions, 120 s budget, at most 8
/// edits per solution, insertion allowed.
#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub max_solutions: usize,
    pub timeout: Duration,
    pub max_cost: u32,
    pub allow_resource_insertion: bool,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            max_solutions: 10,
            timeout: Duration::from_secs(120),
            max_cost: 8,
            allow_resource_insertion: true,
        }
    }
}

/// Reference to the resource a synthetic attribute lands on: an existing
/// node or a resource this same solution inserts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ResourceRef {
    Node(NodePath),
    Inserted(String),
}

/// A location the repair engine may change. Sites address live IR nodes by
/// stable statement paths; spans are resolved against the script on demand
/// (see [`site_span`]). `Missing*` sites are synthetic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EditSite {
    /// Whole value expression of an existing attribute.
    AttributeValue {
        resource: NodePath,
        attribute: String,
    },
    /// Whole value expression of a variable assignment.
    VariableLiteral {
        assignment: NodePath,
        variable: String,
    },
    /// One literal leaf inside a conditional's condition, by depth-first index.
    ConditionLiteral { conditional: NodePath, leaf: usize },
    /// An attribute the resource does not yet carry (sketching).
    MissingAttribute {
        resource: ResourceRef,
        attribute: String,
    },
    /// A resource the script does not yet declare.
    MissingResource { id: String },
}

impl EditSite {
    pub fn is_synthetic(&self) -> bool {
        matches!(
            self,
            EditSite::MissingAttribute { .. } | EditSite::MissingResource { .. }
        )
    }
}

/// Resolves the source span a site's edit would splice, against the script
/// the sites were collected from. Synthetic sites have no span.
pub fn site_span(script: &Script, site: &EditSite) -> Option<Span> {
    match site {
        EditSite::AttributeValue {
            resource,
            attribute,
        } => match script.statement_at(resource)? {
            Statement::Resource(res) => {
                let attr = res.attribute(attribute)?;
                (!attr.synthetic).then_some(attr.value.span)
            }
            _ => None,
        },
        EditSite::VariableLiteral { assignment, .. } => match script.statement_at(assignment)? {
            Statement::VariableAssignment { value, .. } => Some(value.span),
            _ => None,
        },
        EditSite::ConditionLiteral { conditional, leaf } => {
            match script.statement_at(conditional)? {
                Statement::Conditional { condition, .. } => {
                    condition.literal_leaves().get(*leaf).map(|e| e.span)
                }
                _ => None,
            }
        }
        EditSite::MissingAttribute { .. } | EditSite::MissingResource { .. } => None,
    }
}

/// One change: a site and the canonical value to put there. Every edit costs
/// one unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Edit {
    pub site: EditSite,
    pub new_value: String,
    pub cost: u32,
}

impl Edit {
    fn new(site: EditSite, new_value: impl Into<String>) -> Self {
        Edit {
            site,
            new_value: new_value.into(),
            cost: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepairSolution {
    pub edits: Vec<Edit>,
    pub total_cost: u32,
    /// Decision vector of the patched-script state that satisfied the
    /// desired state during verification.
    pub branch_decisions: Vec<(CondId, BranchSide)>,
}

/// Observations made during the search, used to classify failures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RepairDiagnostics {
    /// A violated desired attribute is fed by an undefined variable.
    pub undefined_variable: bool,
    /// One variable was forced to two different values by different
    /// desired attributes.
    pub shared_variable_conflict: bool,
    /// A desired resource could only be discharged by insertion, which the
    /// config disabled.
    pub insertion_blocked: bool,
    /// A desired resource has an unsupported type the engine cannot edit.
    pub unsupported_resource: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepairOutcome {
    pub solutions: Vec<RepairSolution>,
    pub timed_out: bool,
    pub diagnostics: RepairDiagnostics,
}

/// Enumerates the edit sites of a normalized script: one `AttributeValue`
/// per attribute of a supported resource, `MissingAttribute` for every
/// canonical-model attribute the resource lacks, one `VariableLiteral` per
/// assignment containing a literal leaf, and one `ConditionLiteral` per
/// literal leaf inside a condition. `MissingResource` sites come from the
/// desired state during search.
pub fn collect_sites(script: &Script, model: &CanonicalModel) -> Vec<EditSite> {
    let mut sites = Vec::new();
    for (path, stmt) in script.walk_statements() {
        match stmt {
            Statement::Resource(res) => {
                if !model.is_supported_type(&res.type_name) {
                    continue;
                }
                for attr in &res.attributes {
                    sites.push(EditSite::AttributeValue {
                        resource: path.clone(),
                        attribute: attr.name.clone(),
                    });
                }
                for attr in model.attributes(&res.type_name) {
                    if res.attribute(attr).is_none() {
                        sites.push(EditSite::MissingAttribute {
                            resource: ResourceRef::Node(path.clone()),
                            attribute: attr.to_string(),
                        });
                    }
                }
            }
            Statement::VariableAssignment { name, value, .. } => {
                if value.contains_literal() {
                    sites.push(EditSite::VariableLiteral {
                        assignment: path.clone(),
                        variable: name.clone(),
                    });
                }
            }
            Statement::Conditional { condition, .. } => {
                for (leaf, _) in condition.literal_leaves().iter().enumerate() {
                    sites.push(EditSite::ConditionLiteral {
                        conditional: path.clone(),
                        leaf,
                    });
                }
            }
        }
    }
    sites
}

// --- in-memory patching -----------------------------------------------------

/// Applies an edit set to a clone of the script. Synthetic spans mark every
/// value this writes; inference never reads spans.
pub fn apply_edits_to_ir(script: &Script, edits: &[Edit]) -> Result<Script, EngineError> {
    let mut patched = script.clone();
    let mut inserted_attrs: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut inserted_resources: Vec<String> = Vec::new();
    for edit in edits {
        match &edit.site {
            EditSite::AttributeValue {
                resource,
                attribute,
            } => {
                let Some(Statement::Resource(res)) = patched.statement_at_mut(resource) else {
                    return Err(EngineError::Internal(format!(
                        "attribute-value site {resource} does not address a resource"
                    )));
                };
                let Some(attr) = res.attribute_mut(attribute) else {
                    return Err(EngineError::Internal(format!(
                        "resource at {resource} has no attribute `{attribute}`"
                    )));
                };
                attr.value = Expr::synthetic_string(&edit.new_value);
            }
            EditSite::VariableLiteral { assignment, .. } => {
                let Some(Statement::VariableAssignment { value, .. }) =
                    patched.statement_at_mut(assignment)
                else {
                    return Err(EngineError::Internal(format!(
                        "variable-literal site {assignment} does not address an assignment"
                    )));
                };
                *value = Expr::synthetic_string(&edit.new_value);
            }
            EditSite::ConditionLiteral { conditional, leaf } => {
                let Some(Statement::Conditional { condition, .. }) =
                    patched.statement_at_mut(conditional)
                else {
                    return Err(EngineError::Internal(format!(
                        "condition-literal site {conditional} does not address a conditional"
                    )));
                };
                let mut counter = 0usize;
                if !replace_literal_leaf(condition, *leaf, &mut counter, &edit.new_value) {
                    return Err(EngineError::Internal(format!(
                        "condition at {conditional} has no literal leaf {leaf}"
                    )));
                }
            }
            EditSite::MissingAttribute {
                resource: ResourceRef::Node(path),
                attribute,
            } => {
                let Some(Statement::Resource(res)) = patched.statement_at_mut(path) else {
                    return Err(EngineError::Internal(format!(
                        "missing-attribute site {path} does not address a resource"
                    )));
                };
                if res.attribute(attribute).is_some() {
                    return Err(EngineError::Internal(format!(
                        "resource at {path} already has attribute `{attribute}`"
                    )));
                }
                res.attributes
                    .push(Attribute::synthetic(attribute.clone(), &edit.new_value));
            }
            EditSite::MissingAttribute {
                resource: ResourceRef::Inserted(id),
                attribute,
            } => {
                inserted_attrs
                    .entry(id.clone())
                    .or_default()
                    .push((attribute.clone(), edit.new_value.clone()));
            }
            EditSite::MissingResource { id } => {
                inserted_resources.push(id.clone());
            }
        }
    }
    for id in inserted_resources {
        let Some((type_name, identifier)) = id.split_once(':') else {
            return Err(EngineError::Internal(format!("malformed resource id `{id}`")));
        };
        let mut attributes = Vec::new();
        if let Some(id_attr) = identifying_attribute(type_name) {
            attributes.push(Attribute::synthetic(id_attr, identifier));
        }
        for (attr, value) in inserted_attrs.remove(&id).unwrap_or_default() {
            if attributes.iter().any(|a| a.name == attr) {
                continue;
            }
            attributes.push(Attribute::synthetic(attr, value));
        }
        patched.statements.push(Statement::Resource(Resource {
            type_name: type_name.to_string(),
            title: Expr::synthetic_string(identifier),
            attributes,
            span: Span::SYNTHETIC,
        }));
    }
    if !inserted_attrs.is_empty() {
        return Err(EngineError::Internal(
            "inserted attribute without matching inserted resource".to_string(),
        ));
    }
    Ok(patched)
}

fn replace_literal_leaf(expr: &mut Expr, target: usize, counter: &mut usize, value: &str) -> bool {
    match &mut expr.kind {
        ExprKind::StringLiteral(_)
        | ExprKind::IntLiteral(_)
        | ExprKind::BoolLiteral(_)
        | ExprKind::Null => {
            if *counter == target {
                expr.kind = ExprKind::StringLiteral(value.to_string());
                expr.span = Span::SYNTHETIC;
                return true;
            }
            *counter += 1;
            false
        }
        ExprKind::VariableReference(_) => false,
        ExprKind::Concat(l, r)
        | ExprKind::Sum(l, r)
        | ExprKind::Equals(l, r)
        | ExprKind::NotEquals(l, r) => {
            replace_literal_leaf(l, target, counter, value)
                || replace_literal_leaf(r, target, counter, value)
        }
    }
}

/// True iff some state of the script patched with this solution satisfies
/// the desired state.
pub fn verify_solution(script: &Script, solution: &RepairSolution, desired: &SystemState) -> bool {
    let Ok(patched) = apply_edits_to_ir(script, &solution.edits) else {
        return false;
    };
    let Ok(states) = infer_states(&patched, DEFAULT_BRANCH_CAP) else {
        return false;
    };
    states.iter().any(|s| satisfies(&s.state, desired))
}

// --- plan simulation ---------------------------------------------------------

/// Variable binding with the assignment that produced it, so equation
/// propagation can discharge constraints at the definition site.
#[derive(Debug, Clone)]
struct SimBinding {
    value: Value,
    def: Option<Box<DefInfo>>,
}

#[derive(Debug, Clone)]
struct DefInfo {
    path: NodePath,
    expr: Expr,
    env: SimEnv,
    editable: bool,
}

type SimEnv = BTreeMap<String, SimBinding>;

fn eval_env(env: &SimEnv) -> EvalEnv {
    let mut out = EvalEnv::default();
    for (name, binding) in env {
        out.bind(name.clone(), binding.value.clone());
    }
    out
}

/// One resource node traversed on a path.
#[derive(Debug, Clone)]
struct SimNode {
    path: NodePath,
    type_name: String,
    id: String,
    attr_exprs: BTreeMap<String, Expr>,
    attr_values: BTreeMap<String, String>,
    env: SimEnv,
    has_identifying_attr: bool,
}

/// Provenance of one final attribute value: the winning expression, the
/// environment it was evaluated in, and the whole-expression edit site
/// (a `MissingAttribute` when the value came from a resource title).
#[derive(Debug, Clone)]
struct ProvEntry {
    expr: Expr,
    env: SimEnv,
    site: Option<EditSite>,
}

#[derive(Debug, Clone)]
struct FinalResource {
    id: String,
    type_name: String,
    attrs: BTreeMap<String, String>,
    provenance: BTreeMap<String, ProvEntry>,
    last_node: NodePath,
}

#[derive(Debug, Clone, Default)]
struct PathSim {
    nodes: Vec<SimNode>,
    finals: Vec<FinalResource>,
}

/// A way to flip one decided conditional: each option is a small edit set.
#[derive(Debug, Clone)]
struct FlipOpportunity {
    options: Vec<Vec<Edit>>,
}

#[derive(Debug, Default)]
struct SimResult {
    paths: Vec<PathSim>,
    flips: Vec<FlipOpportunity>,
}

struct Simulator {
    branch_cap: usize,
    paths_used: usize,
    result: SimResult,
}

type Frame<'a> = (&'a [Statement], NodePath, usize);

impl Simulator {
    fn simulate(script: &Script, branch_cap: usize) -> Result<SimResult, InferError> {
        let mut sim = Simulator {
            branch_cap,
            paths_used: 1,
            result: SimResult::default(),
        };
        sim.run(
            vec![(&script.statements, NodePath::default(), 0)],
            SimEnv::new(),
            Vec::new(),
        )?;
        Ok(sim.result)
    }

    fn run(
        &mut self,
        continuation: Vec<Frame<'_>>,
        env: SimEnv,
        nodes: Vec<SimNode>,
    ) -> Result<(), InferError> {
        let mut env = env;
        let mut nodes = nodes;
        let mut cont = continuation;
        loop {
            let Some(top) = cont.last_mut() else {
                let finals = merge_finals(&nodes);
                self.result.paths.push(PathSim { nodes, finals });
                return Ok(());
            };
            if top.2 >= top.0.len() {
                cont.pop();
                continue;
            }
            let block = top.0;
            let base = top.1.clone();
            let stmt_index = top.2;
            top.2 += 1;
            let stmt = &block[stmt_index];
            match stmt {
                Statement::VariableAssignment { name, value, .. } => {
                    let evaluated = eval_expression(value, &eval_env(&env));
                    let def = DefInfo {
                        path: base.push(stmt_index, None),
                        expr: value.clone(),
                        env: env.clone(),
                        editable: value.contains_literal(),
                    };
                    env.insert(
                        name.clone(),
                        SimBinding {
                            value: evaluated,
                            def: Some(Box::new(def)),
                        },
                    );
                }
                Statement::Resource(res) => {
                    nodes.push(evaluate_sim_node(res, &env, base.push(stmt_index, None))?);
                }
                Statement::Conditional {
                    condition,
                    then_branch,
                    else_branch,
                    ..
                } => {
                    let cond_path = base.push(stmt_index, None);
                    let outcome = eval_expression(condition, &eval_env(&env));
                    match outcome.known() {
                        Some(truth @ ("true" | "false")) => {
                            let natural_then = truth == "true";
                            self.result.flips.push(FlipOpportunity {
                                options: flip_options(condition, &cond_path, &env, !natural_then),
                            });
                            let (side, branch) = if natural_then {
                                (BranchSide::Then, then_branch)
                            } else {
                                (BranchSide::Else, else_branch)
                            };
                            cont.push((branch, base.push(stmt_index, Some(side)), 0));
                        }
                        _ => {
                            self.paths_used += 1;
                            if self.paths_used > self.branch_cap {
                                return Err(InferError::BranchCapExceeded {
                                    cap: self.branch_cap,
                                });
                            }
                            let mut then_cont: Vec<Frame<'_>> = cont
                                .iter()
                                .map(|(blk, b, i)| (*blk, b.clone(), *i))
                                .collect();
                            then_cont.push((
                                then_branch,
                                base.push(stmt_index, Some(BranchSide::Then)),
                                0,
                            ));
                            self.run(then_cont, env.clone(), nodes.clone())?;
                            cont.push((
                                else_branch,
                                base.push(stmt_index, Some(BranchSide::Else)),
                                0,
                            ));
                        }
                    }
                }
            }
        }
    }
}

fn evaluate_sim_node(res: &Resource, env: &SimEnv, path: NodePath) -> Result<SimNode, InferError> {
    let eenv = eval_env(env);
    let id_expr = crate::normalize::identifying_expr(res);
    let id_value = eval_expression(id_expr, &eenv);
    let Some(identifier) = id_value.known() else {
        return Err(InferError::UnknownIdentifier {
            type_name: res.type_name.clone(),
            line: res.span.start_line,
        });
    };
    let identifier = identifier.to_string();
    let id = format!("{}:{}", res.type_name, identifier);
    let mut attr_exprs = BTreeMap::new();
    let mut attr_values = BTreeMap::new();
    for attr in &res.attributes {
        let value = match eval_expression(&attr.value, &eenv) {
            Value::Known(v) => v,
            Value::Unknown => UNKNOWN_VALUE.to_string(),
        };
        attr_exprs.insert(attr.name.clone(), attr.value.clone());
        attr_values.insert(attr.name.clone(), value);
    }
    let id_attr = identifying_attribute(&res.type_name);
    let has_identifying_attr = id_attr.is_some_and(|a| res.attribute(a).is_some());
    if let Some(id_attr) = id_attr {
        attr_values.insert(id_attr.to_string(), identifier.clone());
        if !has_identifying_attr {
            // The identifying value came from the title; the editable site
            // for it is a sketched identifying attribute, not the title.
            attr_exprs.insert(id_attr.to_string(), res.title.clone());
        }
    }
    Ok(SimNode {
        path,
        type_name: res.type_name.clone(),
        id,
        attr_exprs,
        attr_values,
        env: env.clone(),
        has_identifying_attr,
    })
}

/// Whole-expression edit site for one attribute of a node.
fn node_attr_site(node: &SimNode, attr: &str) -> EditSite {
    let from_title = identifying_attribute(&node.type_name) == Some(attr)
        && !node.has_identifying_attr;
    if from_title {
        EditSite::MissingAttribute {
            resource: ResourceRef::Node(node.path.clone()),
            attribute: attr.to_string(),
        }
    } else {
        EditSite::AttributeValue {
            resource: node.path.clone(),
            attribute: attr.to_string(),
        }
    }
}

fn merge_finals(nodes: &[SimNode]) -> Vec<FinalResource> {
    let mut finals: Vec<FinalResource> = Vec::new();
    for node in nodes {
        let entry = match finals.iter_mut().position(|f| f.id == node.id) {
            Some(i) => &mut finals[i],
            None => {
                finals.push(FinalResource {
                    id: node.id.clone(),
                    type_name: node.type_name.clone(),
                    attrs: BTreeMap::new(),
                    provenance: BTreeMap::new(),
                    last_node: node.path.clone(),
                });
                finals.last_mut().expect("just pushed")
            }
        };
        entry.last_node = node.path.clone();
        for (attr, value) in &node.attr_values {
            entry.attrs.insert(attr.clone(), value.clone());
            if let Some(expr) = node.attr_exprs.get(attr) {
                entry.provenance.insert(
                    attr.clone(),
                    ProvEntry {
                        expr: expr.clone(),
                        env: node.env.clone(),
                        site: Some(node_attr_site(node, attr)),
                    },
                );
            }
        }
    }
    finals
}

/// Edit options that make a decided condition take the opposite branch.
/// The condition literal can be rewritten directly; when the wanted outcome
/// pins a compared variable to the literal's value, editing the variable's
/// assignment is offered as well.
fn flip_options(
    condition: &Expr,
    cond_path: &NodePath,
    env: &SimEnv,
    want_then: bool,
) -> Vec<Vec<Edit>> {
    let mut options: Vec<Vec<Edit>> = Vec::new();
    let (left, right, is_equals) = match &condition.kind {
        ExprKind::Equals(l, r) => (l.as_ref(), r.as_ref(), true),
        ExprKind::NotEquals(l, r) => (l.as_ref(), r.as_ref(), false),
        _ => return options,
    };
    let eenv = eval_env(env);
    // want_equal: should the two sides compare equal after the edit?
    let want_equal = want_then == is_equals;
    let leaves = condition.literal_leaves();
    for (idx, leaf) in leaves.iter().enumerate() {
        let other = if std::ptr::eq(*leaf, left) {
            right
        } else if std::ptr::eq(*leaf, right) {
            left
        } else {
            continue; // only whole-side literals are solvable directly
        };
        if let Value::Known(other_value) = eval_expression(other, &eenv) {
            let new_value = if want_equal {
                other_value
            } else {
                distinct_value(&other_value)
            };
            options.push(vec![Edit::new(
                EditSite::ConditionLiteral {
                    conditional: cond_path.clone(),
                    leaf: idx,
                },
                new_value,
            )]);
        }
    }
    if want_equal {
        for (var_side, other_side) in [(left, right), (right, left)] {
            let ExprKind::VariableReference(name) = &var_side.kind else {
                continue;
            };
            let Value::Known(target) = eval_expression(other_side, &eenv) else {
                continue;
            };
            for option in discharge_variable(name, env, &target, DISCHARGE_DEPTH_CAP) {
                options.push(option);
            }
        }
    }
    dedup_options(options)
}

/// Deterministic value different from `v`.
fn distinct_value(v: &str) -> String {
    format!("{v}_")
}

// --- equation propagation ----------------------------------------------------

/// Ways to make `expr` evaluate to `target`: the whole-expression edit at
/// `whole_site` (when that site exists in the edit vocabulary) plus
/// structural options through concat/sum shapes and variable definitions.
fn discharge_options(
    expr: &Expr,
    env: &SimEnv,
    target: &str,
    whole_site: Option<EditSite>,
    depth: usize,
) -> Vec<Vec<Edit>> {
    let mut options: Vec<Vec<Edit>> = Vec::new();
    if let Some(site) = whole_site {
        options.push(vec![Edit::new(site, target)]);
    }
    if depth == 0 {
        return dedup_options(options);
    }
    let eenv = eval_env(env);
    match &expr.kind {
        ExprKind::VariableReference(name) => {
            options.extend(discharge_variable(name, env, target, depth));
        }
        ExprKind::Concat(l, r) => {
            if let Value::Known(prefix) = eval_expression(l, &eenv) {
                if let Some(rest) = target.strip_prefix(prefix.as_str()) {
                    options.extend(discharge_options(r, env, rest, None, depth - 1));
                }
            }
            if let Value::Known(suffix) = eval_expression(r, &eenv) {
                if let Some(rest) = target.strip_suffix(suffix.as_str()) {
                    options.extend(discharge_options(l, env, rest, None, depth - 1));
                }
            }
        }
        ExprKind::Sum(l, r) => {
            if let Ok(want) = target.trim().parse::<i64>() {
                if let Value::Known(lv) = eval_expression(l, &eenv) {
                    if let Ok(lv) = lv.trim().parse::<i64>() {
                        options.extend(discharge_options(
                            r,
                            env,
                            &(want - lv).to_string(),
                            None,
                            depth - 1,
                        ));
                    }
                }
                if let Value::Known(rv) = eval_expression(r, &eenv) {
                    if let Ok(rv) = rv.trim().parse::<i64>() {
                        options.extend(discharge_options(
                            l,
                            env,
                            &(want - rv).to_string(),
                            None,
                            depth - 1,
                        ));
                    }
                }
            }
        }
        _ => {}
    }
    dedup_options(options)
}

/// Options pinning variable `name` to `target` by editing its definition.
fn discharge_variable(
    name: &str,
    env: &SimEnv,
    target: &str,
    depth: usize,
) -> Vec<Vec<Edit>> {
    if depth == 0 {
        return Vec::new();
    }
    let Some(binding) = env.get(name) else {
        return Vec::new();
    };
    let Some(def) = &binding.def else {
        return Vec::new();
    };
    let whole_site = def.editable.then(|| EditSite::VariableLiteral {
        assignment: def.path.clone(),
        variable: name.to_string(),
    });
    discharge_options(&def.expr, &def.env, target, whole_site, depth - 1)
}

fn dedup_options(options: Vec<Vec<Edit>>) -> Vec<Vec<Edit>> {
    let mut seen: BTreeSet<Vec<Edit>> = BTreeSet::new();
    let mut out = Vec::new();
    for mut option in options {
        option.sort();
        option.dedup();
        if seen.insert(option.clone()) {
            out.push(option);
        }
        if out.len() >= OPTIONS_PER_CONSTRAINT_CAP {
            break;
        }
    }
    out
}

// --- candidate assembly --------------------------------------------------------

type AtomSet = BTreeMap<EditSite, String>;

fn merge_option(base: &AtomSet, option: &[Edit]) -> Option<AtomSet> {
    let mut merged = base.clone();
    for edit in option {
        match merged.get(&edit.site) {
            Some(existing) if *existing != edit.new_value => return None,
            _ => {
                merged.insert(edit.site.clone(), edit.new_value.clone());
            }
        }
    }
    Some(merged)
}

/// Records the variable values each constraint pins, per discharge-option
/// scan, so contradictory requirements on one shared variable can be
/// reported as a failure class.
#[derive(Debug, Default)]
struct SharedVarObservations {
    per_site: BTreeMap<EditSite, Vec<BTreeSet<String>>>,
}

impl SharedVarObservations {
    fn record(&mut self, options: &[Vec<Edit>]) {
        let mut per_constraint: BTreeMap<EditSite, BTreeSet<String>> = BTreeMap::new();
        for option in options {
            for edit in option {
                if matches!(edit.site, EditSite::VariableLiteral { .. }) {
                    per_constraint
                        .entry(edit.site.clone())
                        .or_default()
                        .insert(edit.new_value.clone());
                }
            }
        }
        for (site, values) in per_constraint {
            self.per_site.entry(site).or_default().push(values);
        }
    }

    /// True when two constraints force one variable to disjoint value sets.
    fn has_conflict(&self) -> bool {
        self.per_site.values().any(|sets| {
            sets.iter().enumerate().any(|(i, a)| {
                sets[i + 1..]
                    .iter()
                    .any(|b| a.intersection(b).next().is_none())
            })
        })
    }
}

/// All ways to fix one desired resource on one simulated path.
fn resource_alternatives(
    desired: &crate::state::ResourceState,
    path: &PathSim,
    model: &CanonicalModel,
    cfg: &RepairConfig,
    diag: &mut RepairDiagnostics,
    shared: &mut SharedVarObservations,
) -> Vec<Vec<Edit>> {
    let desired_type = desired.type_name().to_string();
    if let Some(found) = path.finals.iter().find(|f| f.id == desired.id) {
        let mut per_attr: Vec<Vec<Vec<Edit>>> = Vec::new();
        for (attr, want) in &desired.attributes {
            if found.attrs.get(attr) == Some(want) {
                continue;
            }
            let options = match found.provenance.get(attr) {
                Some(prov) => {
                    if found.attrs.get(attr).map(String::as_str) == Some(UNKNOWN_VALUE) {
                        diag.undefined_variable = true;
                    }
                    discharge_options(
                        &prov.expr,
                        &prov.env,
                        want,
                        prov.site.clone(),
                        DISCHARGE_DEPTH_CAP,
                    )
                }
                None => {
                    if model.has_attribute(&found.type_name, attr) {
                        vec![vec![Edit::new(
                            EditSite::MissingAttribute {
                                resource: ResourceRef::Node(found.last_node.clone()),
                                attribute: attr.clone(),
                            },
                            want,
                        )]]
                    } else {
                        Vec::new()
                    }
                }
            };
            shared.record(&options);
            if options.is_empty() {
                if !model.is_supported_type(&found.type_name) {
                    diag.unsupported_resource = true;
                }
                return Vec::new();
            }
            per_attr.push(options);
        }
        return cross_product(per_attr);
    }

    // Resource absent from this path's state.
    if !model.is_supported_type(&desired_type) {
        diag.unsupported_resource = true;
        return Vec::new();
    }
    let mut alternatives: Vec<Vec<Edit>> = Vec::new();
    let identifier = desired.identifier().to_string();
    let id_attr = identifying_attribute(&desired_type);
    if cfg.allow_resource_insertion {
        let mut bundle = vec![Edit::new(
            EditSite::MissingResource {
                id: desired.id.clone(),
            },
            identifier.clone(),
        )];
        for (attr, want) in &desired.attributes {
            if id_attr == Some(attr.as_str()) && want == &identifier {
                continue; // the skeleton's identifying attribute covers this
            }
            bundle.push(Edit::new(
                EditSite::MissingAttribute {
                    resource: ResourceRef::Inserted(desired.id.clone()),
                    attribute: attr.clone(),
                },
                want,
            ));
        }
        alternatives.push(bundle);
    } else {
        diag.insertion_blocked = true;
    }
    // Re-identify an existing node of the same type.
    for node in &path.nodes {
        if node.type_name != desired_type || node.id == desired.id {
            continue;
        }
        let Some(id_attr) = id_attr else { continue };
        let Some(id_expr) = node.attr_exprs.get(id_attr) else {
            continue;
        };
        let id_options = discharge_options(
            id_expr,
            &node.env,
            &identifier,
            Some(node_attr_site(node, id_attr)),
            DISCHARGE_DEPTH_CAP,
        );
        shared.record(&id_options);
        if id_options.is_empty() {
            continue;
        }
        let mut per_constraint = vec![id_options];
        let mut feasible = true;
        for (attr, want) in &desired.attributes {
            if attr == id_attr {
                continue; // carried by the re-identification itself
            }
            if node.attr_values.get(attr) == Some(want) {
                continue;
            }
            let options = match node.attr_exprs.get(attr) {
                Some(expr) => discharge_options(
                    expr,
                    &node.env,
                    want,
                    Some(node_attr_site(node, attr)),
                    DISCHARGE_DEPTH_CAP,
                ),
                None => {
                    if model.has_attribute(&node.type_name, attr) {
                        vec![vec![Edit::new(
                            EditSite::MissingAttribute {
                                resource: ResourceRef::Node(node.path.clone()),
                                attribute: attr.clone(),
                            },
                            want,
                        )]]
                    } else {
                        Vec::new()
                    }
                }
            };
            shared.record(&options);
            if options.is_empty() {
                feasible = false;
                break;
            }
            per_constraint.push(options);
        }
        if feasible {
            alternatives.extend(cross_product(per_constraint));
        }
    }
    alternatives.truncate(ALTERNATIVES_PER_RESOURCE_CAP);
    alternatives
}

fn cross_product(per_constraint: Vec<Vec<Vec<Edit>>>) -> Vec<Vec<Edit>> {
    let mut acc: Vec<Vec<Edit>> = vec![Vec::new()];
    for options in per_constraint {
        let mut next = Vec::new();
        for base in &acc {
            for option in &options {
                let mut combined = base.clone();
                combined.extend(option.iter().cloned());
                next.push(combined);
                if next.len() >= ALTERNATIVES_PER_RESOURCE_CAP {
                    break;
                }
            }
            if next.len() >= ALTERNATIVES_PER_RESOURCE_CAP {
                break;
            }
        }
        acc = next;
        if acc.is_empty() {
            return acc;
        }
    }
    acc
}

// --- top-level search ---------------------------------------------------------

/// Searches for cost-ordered verified repair solutions.
pub fn repair(
    script: &Script,
    desired: &SystemState,
    model: &CanonicalModel,
    cfg: &RepairConfig,
) -> Result<RepairOutcome, EngineError> {
    let deadline = Instant::now() + cfg.timeout;
    let mut diagnostics = RepairDiagnostics::default();

    // Zero-edit fast path.
    let base_states = infer_states(script, DEFAULT_BRANCH_CAP)?;
    if let Some(satisfied) = base_states.iter().find(|s| satisfies(&s.state, desired)) {
        return Ok(RepairOutcome {
            solutions: vec![RepairSolution {
                edits: Vec::new(),
                total_cost: 0,
                branch_decisions: satisfied.branch_decisions.clone(),
            }],
            timed_out: false,
            diagnostics,
        });
    }

    let mut shared = SharedVarObservations::default();

    // Plan enumeration: breadth-first over condition-flip edit sets, with
    // fresh simulation under every plan.
    let mut candidates: BTreeSet<AtomSet> = BTreeSet::new();
    let mut seen_plans: BTreeSet<Vec<(EditSite, String)>> = BTreeSet::new();
    let mut queue: VecDeque<AtomSet> = VecDeque::new();
    queue.push_back(AtomSet::new());
    seen_plans.insert(Vec::new());
    let mut plans_explored = 0usize;
    let mut timed_out = false;

    while let Some(plan) = queue.pop_front() {
        if Instant::now() >= deadline {
            timed_out = true;
            break;
        }
        if plans_explored >= PLAN_CAP {
            break;
        }
        plans_explored += 1;
        let plan_edits: Vec<Edit> = plan
            .iter()
            .map(|(site, value)| Edit::new(site.clone(), value.clone()))
            .collect();
        let planned_script = match apply_edits_to_ir(script, &plan_edits) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let sim = match Simulator::simulate(&planned_script, DEFAULT_BRANCH_CAP) {
            Ok(sim) => sim,
            Err(err) => {
                if plan.is_empty() {
                    return Err(err.into());
                }
                continue;
            }
        };
        // Extend the queue with one extra flip per opportunity.
        for opp in &sim.flips {
            for option in &opp.options {
                if let Some(extended) = merge_option(&plan, option) {
                    if extended.len() as u32 > cfg.max_cost || extended == plan {
                        continue;
                    }
                    let key: Vec<(EditSite, String)> =
                        extended.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
                    if seen_plans.insert(key) {
                        queue.push_back(extended);
                    }
                }
            }
        }
        // Candidates from every path under this plan.
        for path in &sim.paths {
            let mut per_resource: Vec<Vec<Vec<Edit>>> = Vec::new();
            let mut feasible = true;
            for want in &desired.resources {
                let already_satisfied = path.finals.iter().any(|f| {
                    f.id == want.id
                        && want.attributes.iter().all(|(a, v)| f.attrs.get(a) == Some(v))
                });
                if already_satisfied {
                    per_resource.push(vec![Vec::new()]);
                    continue;
                }
                let alts =
                    resource_alternatives(want, path, model, cfg, &mut diagnostics, &mut shared);
                if alts.is_empty() {
                    feasible = false;
                    break;
                }
                per_resource.push(alts);
            }
            if !feasible {
                continue;
            }
            let mut sets: Vec<AtomSet> = vec![plan.clone()];
            for alts in per_resource {
                let mut next: Vec<AtomSet> = Vec::new();
                for base in &sets {
                    for alt in &alts {
                        if let Some(merged) = merge_option(base, alt) {
                            if merged.len() as u32 <= cfg.max_cost {
                                next.push(merged);
                            }
                        }
                    }
                }
                sets = next;
                if sets.is_empty() {
                    break;
                }
            }
            for set in sets {
                if candidates.len() >= CANDIDATE_CAP {
                    break;
                }
                candidates.insert(set);
            }
        }
    }

    diagnostics.shared_variable_conflict = shared.has_conflict();

    // Cost-ordered verification.
    let mut ordered: Vec<AtomSet> = candidates.into_iter().collect();
    ordered.sort_by_cached_key(|set| candidate_sort_key(script, set));

    let mut solutions: Vec<RepairSolution> = Vec::new();
    for set in ordered {
        if Instant::now() >= deadline {
            timed_out = true;
            break;
        }
        let edits = ordered_edits(script, &set);
        let Ok(patched) = apply_edits_to_ir(script, &edits) else {
            continue;
        };
        let Ok(states) = infer_states(&patched, DEFAULT_BRANCH_CAP) else {
            continue;
        };
        let Some(good) = states.iter().find(|s| satisfies(&s.state, desired)) else {
            continue;
        };
        let total_cost = edits.iter().map(|e| e.cost).sum();
        solutions.push(RepairSolution {
            edits,
            total_cost,
            branch_decisions: good.branch_decisions.clone(),
        });
        if solutions.len() >= cfg.max_solutions {
            break;
        }
    }

    Ok(RepairOutcome {
        solutions,
        timed_out,
        diagnostics,
    })
}

fn candidate_sort_key(script: &Script, set: &AtomSet) -> (u32, usize, Vec<(EditSite, String)>) {
    let cost = set.len() as u32;
    let earliest = set
        .keys()
        .filter_map(|site| site_span(script, site))
        .map(|span| span.byte_start)
        .min()
        .unwrap_or(usize::MAX);
    let atoms: Vec<(EditSite, String)> =
        set.iter().map(|(s, v)| (s.clone(), v.clone())).collect();
    (cost, earliest, atoms)
}

/// Deterministic edit order for display and patching: spanned edits by
/// source position, then synthetic attribute additions, then insertions.
fn ordered_edits(script: &Script, set: &AtomSet) -> Vec<Edit> {
    let mut edits: Vec<Edit> = set
        .iter()
        .map(|(site, value)| Edit::new(site.clone(), value.clone()))
        .collect();
    edits.sort_by_cached_key(|edit| {
        let (rank, pos) = match (&edit.site, site_span(script, &edit.site)) {
            (_, Some(span)) => (0u8, span.byte_start),
            (EditSite::MissingAttribute { resource: ResourceRef::Node(_), .. }, None) => (1, 0),
            (EditSite::MissingResource { .. }, None) => (2, 0),
            (EditSite::MissingAttribute { resource: ResourceRef::Inserted(_), .. }, None) => (3, 0),
            (_, None) => (4, 0),
        };
        (rank, pos, edit.site.clone(), edit.new_value.clone())
    });
    edits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_ansible, parse_puppet};
    use crate::normalize::{normalize_script, NormalizationDb};
    use crate::state::parse_state;

    fn prepared(src: &str, puppet: bool) -> Script {
        let db = NormalizationDb::bundled();
        let script = if puppet {
            parse_puppet(src).unwrap()
        } else {
            parse_ansible(src).unwrap()
        };
        normalize_script(&script, db)
    }

    fn run(script: &Script, desired_json: &str, cfg: &RepairConfig) -> RepairOutcome {
        let desired = parse_state(desired_json).unwrap();
        repair(script, &desired, CanonicalModel::builtin(), cfg).unwrap()
    }

    #[test]
    fn collect_sites_counts_match_model() {
        let script = prepared("file { '/a': ensure => file, mode => '0644' }\n", true);
        let sites = collect_sites(&script, CanonicalModel::builtin());
        let attr_sites = sites
            .iter()
            .filter(|s| matches!(s, EditSite::AttributeValue { .. }))
            .count();
        let missing_sites = sites
            .iter()
            .filter(|s| matches!(s, EditSite::MissingAttribute { .. }))
            .count();
        // file model: path, state, owner, group, mode, content, target.
        assert_eq!(attr_sites, 2);
        assert_eq!(missing_sites, 5);
    }

    #[test]
    fn collect_sites_variable_and_condition() {
        let script = prepared(
            "$x = 'a'\nif $x == 'b' {\n  file { '/f': ensure => file }\n}\n",
            true,
        );
        let sites = collect_sites(&script, CanonicalModel::builtin());
        assert!(sites
            .iter()
            .any(|s| matches!(s, EditSite::VariableLiteral { variable, .. } if variable == "x")));
        assert!(sites
            .iter()
            .any(|s| matches!(s, EditSite::ConditionLiteral { leaf: 0, .. })));
    }

    #[test]
    fn collect_sites_empty_script() {
        let script = prepared("", false);
        assert!(collect_sites(&script, CanonicalModel::builtin()).is_empty());
    }

    #[test]
    fn zero_edits_when_already_satisfied() {
        let script = prepared("file { '/a': ensure => file }\n", true);
        let outcome = run(
            &script,
            r#"[{"id":"file:/a","attributes":{"state":"present"}}]"#,
            &RepairConfig::default(),
        );
        assert_eq!(outcome.solutions.len(), 1);
        assert_eq!(outcome.solutions[0].total_cost, 0);
        assert!(outcome.solutions[0].edits.is_empty());
    }

    #[test]
    fn single_value_edit_costs_one() {
        let script = prepared("file { '/a': ensure => file }\n", true);
        let outcome = run(
            &script,
            r#"[{"id":"file:/a","attributes":{"state":"absent"}}]"#,
            &RepairConfig::default(),
        );
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1);
        assert_eq!(first.edits.len(), 1);
        assert!(matches!(
            &first.edits[0].site,
            EditSite::AttributeValue { attribute, .. } if attribute == "state"
        ));
        assert_eq!(first.edits[0].new_value, "absent");
        let norm = &script;
        assert!(verify_solution(norm, first, &parse_state(
            r#"[{"id":"file:/a","attributes":{"state":"absent"}}]"#
        ).unwrap()));
    }

    #[test]
    fn steam_example_inserts_two_packages() {
        let script = prepared(
            "---\n- hosts: all\n  tasks:\n    - name: install steam\n      package:\n        name: steam\n        state: present\n",
            false,
        );
        let desired = r#"[
            {"id":"package:steam","attributes":{"state":"present"}},
            {"id":"package:libgl1-mesa-dri:i386","attributes":{"state":"present"}},
            {"id":"package:libgl1:i386","attributes":{"state":"present"}}
        ]"#;
        let outcome = run(&script, desired, &RepairConfig::default());
        assert!(!outcome.solutions.is_empty());
        let first = &outcome.solutions[0];
        let inserts: Vec<&str> = first
            .edits
            .iter()
            .filter_map(|e| match &e.site {
                EditSite::MissingResource { id } => Some(id.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(inserts.len(), 2);
        assert!(inserts.contains(&"package:libgl1-mesa-dri:i386"));
        assert!(inserts.contains(&"package:libgl1:i386"));
        // 2 resource skeletons + 2 state attributes.
        assert_eq!(first.total_cost, 4);
    }

    #[test]
    fn missing_attribute_is_sketched() {
        let script = prepared("file { '/a': ensure => file }\n", true);
        let outcome = run(
            &script,
            r#"[{"id":"file:/a","attributes":{"state":"present","mode":"0600"}}]"#,
            &RepairConfig::default(),
        );
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1);
        assert!(matches!(
            &first.edits[0].site,
            EditSite::MissingAttribute { attribute, .. } if attribute == "mode"
        ));
    }

    #[test]
    fn shared_variable_discharged_once() {
        let script = prepared(
            "$app = 'apache'\nfile { \"/etc/${app}.conf\": ensure => file }\nfile { \"/var/log/${app}.log\": ensure => file }\n",
            true,
        );
        let desired = r#"[
            {"id":"file:/etc/nginx.conf","attributes":{"state":"present"}},
            {"id":"file:/var/log/nginx.log","attributes":{"state":"present"}}
        ]"#;
        let outcome = run(&script, desired, &RepairConfig::default());
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1, "one shared variable edit: {:?}", first.edits);
        assert!(matches!(
            &first.edits[0].site,
            EditSite::VariableLiteral { variable, .. } if variable == "app"
        ));
        assert_eq!(first.edits[0].new_value, "nginx");
    }

    #[test]
    fn condition_flip_via_literal_edit() {
        let script = prepared(
            "$os = 'ubuntu'\nif $os == 'debian' {\n  package { 'apache2': ensure => installed }\n}\n",
            true,
        );
        let desired = r#"[{"id":"package:apache2","attributes":{"state":"present"}}]"#;
        let outcome = run(&script, desired, &RepairConfig::default());
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1, "edits: {:?}", first.edits);
    }

    #[test]
    fn inconsistent_shared_variable_needs_expression_edits() {
        // Both attributes read one variable but the desired values cannot
        // come from any single assignment; no solution may edit only the
        // variable.
        let script = prepared(
            "$v = 'a'\nfile { '/x': ensure => file, owner => $v, group => $v }\n",
            true,
        );
        let desired =
            r#"[{"id":"file:/x","attributes":{"owner":"root","group":"daemon"}}]"#;
        let outcome = run(&script, desired, &RepairConfig::default());
        assert!(!outcome.solutions.is_empty());
        for solution in &outcome.solutions {
            let var_only = solution.edits.iter().all(|e| {
                matches!(e.site, EditSite::VariableLiteral { .. })
            });
            assert!(!var_only, "solution edits only the shared variable: {:?}", solution);
        }
        assert_eq!(outcome.solutions[0].total_cost, 2);
        assert!(outcome.diagnostics.shared_variable_conflict);
    }

    #[test]
    fn no_insert_config_blocks_new_resources() {
        let script = prepared("file { '/a': ensure => file }\n", true);
        let cfg = RepairConfig {
            allow_resource_insertion: false,
            ..RepairConfig::default()
        };
        let outcome = run(
            &script,
            r#"[{"id":"package:steam","attributes":{"state":"present"}}]"#,
            &cfg,
        );
        assert!(outcome.solutions.is_empty());
        assert!(outcome.diagnostics.insertion_blocked);
        assert!(!outcome.timed_out);
    }

    #[test]
    fn undefined_variable_attribute_uses_whole_expression_edit() {
        let script = prepared("file { '/a': ensure => file, owner => $who }\n", true);
        let outcome = run(
            &script,
            r#"[{"id":"file:/a","attributes":{"owner":"root"}}]"#,
            &RepairConfig::default(),
        );
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1);
        assert!(matches!(
            &first.edits[0].site,
            EditSite::AttributeValue { attribute, .. } if attribute == "owner"
        ));
        assert!(outcome.diagnostics.undefined_variable);
    }

    #[test]
    fn reidentification_beats_insertion_for_renames() {
        let script = prepared(
            "- file:\n    path: /tmp/a\n    state: touch\n    mode: \"0644\"\n",
            false,
        );
        let desired = r#"[{"id":"file:/tmp/a.bak","attributes":{"path":"/tmp/a.bak","state":"present","mode":"0644"}}]"#;
        let outcome = run(&script, desired, &RepairConfig::default());
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1, "edits: {:?}", first.edits);
        assert!(matches!(
            &first.edits[0].site,
            EditSite::AttributeValue { attribute, .. } if attribute == "path"
        ));
    }

    #[test]
    fn puppet_title_rename_adds_identifying_attribute() {
        let script = prepared("package { 'steam': ensure => installed }\n", true);
        let desired = r#"[{"id":"package:steam-beta","attributes":{"name":"steam-beta","state":"present"}}]"#;
        let outcome = run(&script, desired, &RepairConfig::default());
        let first = &outcome.solutions[0];
        assert_eq!(first.total_cost, 1, "edits: {:?}", first.edits);
        assert!(matches!(
            &first.edits[0].site,
            EditSite::MissingAttribute { attribute, .. } if attribute == "name"
        ));
    }

    #[test]
    fn timeout_reports_partial_outcome() {
        let mut src = String::new();
        src.push_str("$a = 'x'\n");
        for i in 0..6 {
            src.push_str(&format!(
                "if $a == 'flip{i}' {{\n  file {{ '/f{i}': ensure => file }}\n}}\n"
            ));
        }
        let script = prepared(&src, true);
        let desired = r#"[
            {"id":"file:/f0","attributes":{"state":"present"}},
            {"id":"file:/f1","attributes":{"state":"present"}},
            {"id":"file:/f2","attributes":{"state":"present"}},
            {"id":"file:/f3","attributes":{"state":"present"}},
            {"id":"file:/f4","attributes":{"state":"present"}},
            {"id":"file:/f5","attributes":{"state":"present"}}
        ]"#;
        let cfg = RepairConfig {
            timeout: Duration::from_nanos(1),
            ..RepairConfig::default()
        };
        let outcome = run(&script, desired, &cfg);
        assert!(outcome.timed_out);
        assert!(outcome.solutions.is_empty());
    }

    #[test]
    fn engine_error_on_unknown_identifier() {
        let script = prepared("package { $pkg: ensure => installed }\n", true);
        let desired = parse_state(r#"[{"id":"package:x","attributes":{"state":"present"}}]"#).unwrap();
        let err = repair(&script, &desired, CanonicalModel::builtin(), &RepairConfig::default())
            .unwrap_err();
        assert!(matches!(err, EngineError::Infer(_)));
    }

    #[test]
    fn verify_rejects_hand_built_wrong_edit() {
        let script = prepared("file { '/a': ensure => file }\n", true);
        let desired =
            parse_state(r#"[{"id":"file:/a","attributes":{"state":"absent"}}]"#).unwrap();
        let wrong = RepairSolution {
            edits: vec![Edit::new(
                EditSite::AttributeValue {
                    resource: NodePath(vec![crate::ir::PathStep {
                        index: 0,
                        branch: None,
                    }]),
                    attribute: "state".into(),
                },
                "directory",
            )],
            total_cost: 1,
            branch_decisions: Vec::new(),
        };
        assert!(!verify_solution(&script, &wrong, &desired));
    }

    #[test]
    fn solutions_are_deterministic() {
        let script = prepared(
            "file { '/a': ensure => file, mode => '0644' }\nfile { '/b': ensure => file }\n",
            true,
        );
        let desired = r#"[
            {"id":"file:/a","attributes":{"state":"absent"}},
            {"id":"file:/b","attributes":{"mode":"0600"}}
        ]"#;
        let a = run(&script, desired, &RepairConfig::default());
        let b = run(&script, desired, &RepairConfig::default());
        assert_eq!(a.solutions, b.solutions);
    }
}
