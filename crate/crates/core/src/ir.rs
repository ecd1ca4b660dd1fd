//! Span-preserving intermediate representation shared by the frontends and
//! consumed by normalization, inference, and repair.
//!
//! Every node carries a [`Span`] pointing back into the original script text,
//! so verified edits can be spliced into the source byte-for-byte. IR values
//! are immutable after construction; transformations produce new trees.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Source location of a token or expression.
///
/// Lines and columns are 1-based; byte offsets are 0-based with an exclusive
/// end. Slicing the original source at `byte_start..byte_end` yields exactly
/// the text the parser consumed for the node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub byte_start: usize,
    pub byte_end: usize,
}

impl Span {
    /// Sentinel span for nodes that were synthesized (e.g. by repair) and
    /// have no position in the source. Must never be used for splicing.
    pub const SYNTHETIC: Span = Span {
        start_line: 0,
        start_col: 0,
        end_line: 0,
        end_col: 0,
        byte_start: 0,
        byte_end: 0,
    };

    pub fn is_synthetic(&self) -> bool {
        self.start_line == 0
    }

    pub fn len(&self) -> usize {
        self.byte_end.saturating_sub(self.byte_start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpanError {
    #[error("span {start}..{end} is out of bounds for source of {len} bytes")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error("span does not fall on UTF-8 character boundaries")]
    NotCharAligned,
    #[error("synthetic span cannot be resolved against source text")]
    Synthetic,
}

/// Expression tree. Leaves are typed literals or variable references;
/// inner nodes are string concatenation, integer addition, and equality
/// comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExprKind {
    StringLiteral(String),
    IntLiteral(i64),
    BoolLiteral(bool),
    Null,
    VariableReference(String),
    Concat(Box<Expr>, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Equals(Box<Expr>, Box<Expr>),
    NotEquals(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Synthetic string literal, used for values inserted by repair.
    pub fn synthetic_string(value: impl Into<String>) -> Self {
        Expr {
            kind: ExprKind::StringLiteral(value.into()),
            span: Span::SYNTHETIC,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::StringLiteral(_)
                | ExprKind::IntLiteral(_)
                | ExprKind::BoolLiteral(_)
                | ExprKind::Null
        )
    }

    /// True if any leaf of the tree is a literal.
    pub fn contains_literal(&self) -> bool {
        match &self.kind {
            ExprKind::StringLiteral(_)
            | ExprKind::IntLiteral(_)
            | ExprKind::BoolLiteral(_)
            | ExprKind::Null => true,
            ExprKind::VariableReference(_) => false,
            ExprKind::Concat(l, r)
            | ExprKind::Sum(l, r)
            | ExprKind::Equals(l, r)
            | ExprKind::NotEquals(l, r) => l.contains_literal() || r.contains_literal(),
        }
    }

    /// Literal leaves in depth-first order.
    pub fn literal_leaves(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_literal_leaves(&mut out);
        out
    }

    fn collect_literal_leaves<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match &self.kind {
            ExprKind::StringLiteral(_)
            | ExprKind::IntLiteral(_)
            | ExprKind::BoolLiteral(_)
            | ExprKind::Null => out.push(self),
            ExprKind::VariableReference(_) => {}
            ExprKind::Concat(l, r)
            | ExprKind::Sum(l, r)
            | ExprKind::Equals(l, r)
            | ExprKind::NotEquals(l, r) => {
                l.collect_literal_leaves(out);
                r.collect_literal_leaves(out);
            }
        }
    }

    /// Variable names referenced anywhere in the tree, in depth-first order.
    pub fn referenced_variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.kind {
            ExprKind::VariableReference(name) => out.push(name),
            ExprKind::StringLiteral(_)
            | ExprKind::IntLiteral(_)
            | ExprKind::BoolLiteral(_)
            | ExprKind::Null => {}
            ExprKind::Concat(l, r)
            | ExprKind::Sum(l, r)
            | ExprKind::Equals(l, r)
            | ExprKind::NotEquals(l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
        }
    }
}

/// A resource attribute. Names stay technology-specific until normalization.
/// Attributes inserted by repair are marked `synthetic` and carry sentinel
/// spans that must never be spliced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub value: Expr,
    pub name_span: Span,
    pub synthetic: bool,
}

impl Attribute {
    pub fn new(name: impl Into<String>, value: Expr, name_span: Span) -> Self {
        Attribute {
            name: name.into(),
            value,
            name_span,
            synthetic: false,
        }
    }

    pub fn synthetic(name: impl Into<String>, value: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            value: Expr::synthetic_string(value),
            name_span: Span::SYNTHETIC,
            synthetic: true,
        }
    }
}

/// A declared resource: a type name, a title expression identifying the
/// resource, and an ordered attribute list. The span covers the whole
/// declaration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub type_name: String,
    pub title: Expr,
    pub attributes: Vec<Attribute>,
    pub span: Span,
}

impl Resource {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn attribute_mut(&mut self, name: &str) -> Option<&mut Attribute> {
        self.attributes.iter_mut().find(|a| a.name == name)
    }
}

/// Identifies one conditional statement within a script. Ids are assigned by
/// the frontends in source order and stay stable across normalization and
/// in-memory patching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CondId(pub u32);

impl fmt::Display for CondId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchSide {
    Then,
    Else,
}

impl fmt::Display for BranchSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchSide::Then => write!(f, "then"),
            BranchSide::Else => write!(f, "else"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statement {
    Resource(Resource),
    VariableAssignment {
        name: String,
        value: Expr,
        span: Span,
    },
    Conditional {
        id: CondId,
        condition: Expr,
        then_branch: Vec<Statement>,
        else_branch: Vec<Statement>,
        span: Span,
    },
}

impl Statement {
    pub fn span(&self) -> Span {
        match self {
            Statement::Resource(r) => r.span,
            Statement::VariableAssignment { span, .. } => *span,
            Statement::Conditional { span, .. } => *span,
        }
    }
}

/// Supported IaC technologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tech {
    Ansible,
    Puppet,
}

impl Tech {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tech::Ansible => "ansible",
            Tech::Puppet => "puppet",
        }
    }
}

impl fmt::Display for Tech {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Tech {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ansible" => Ok(Tech::Ansible),
            "puppet" => Ok(Tech::Puppet),
            other => Err(format!("unknown technology `{other}`")),
        }
    }
}

/// A parsed script: statements in source order plus the original text the
/// spans index into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub tech: Tech,
    pub statements: Vec<Statement>,
    pub source: String,
}

/// One step along a path into the statement tree. `branch` is `None` for the
/// final step (selecting the statement itself) and names the branch to
/// descend into otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathStep {
    pub index: usize,
    pub branch: Option<BranchSide>,
}

/// Stable address of a statement within a script.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct NodePath(pub Vec<PathStep>);

impl NodePath {
    pub fn push(&self, index: usize, branch: Option<BranchSide>) -> NodePath {
        let mut steps = self.0.clone();
        steps.push(PathStep { index, branch });
        NodePath(steps)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", step.index)?;
            if let Some(b) = step.branch {
                write!(f, "/{b}")?;
            }
        }
        Ok(())
    }
}

impl Script {
    /// Returns the exact source slice a span covers.
    pub fn span_text(&self, span: Span) -> Result<&str, SpanError> {
        if span.is_synthetic() {
            return Err(SpanError::Synthetic);
        }
        if span.byte_start > span.byte_end || span.byte_end > self.source.len() {
            return Err(SpanError::OutOfBounds {
                start: span.byte_start,
                end: span.byte_end,
                len: self.source.len(),
            });
        }
        self.source
            .get(span.byte_start..span.byte_end)
            .ok_or(SpanError::NotCharAligned)
    }

    /// Every resource in source order together with the conditional branches
    /// guarding it. Resources outside conditionals have an empty branch path.
    pub fn iter_resources(&self) -> Vec<(&Resource, Vec<(CondId, BranchSide)>)> {
        let mut out = Vec::new();
        collect_resources(&self.statements, &mut Vec::new(), &mut out);
        out
    }

    /// Every statement in source order, paired with its address.
    pub fn walk_statements(&self) -> Vec<(NodePath, &Statement)> {
        let mut out = Vec::new();
        walk(&self.statements, &NodePath::default(), &mut out);
        out
    }

    pub fn statement_at(&self, path: &NodePath) -> Option<&Statement> {
        let mut list = &self.statements;
        let mut steps = path.0.iter().peekable();
        while let Some(step) = steps.next() {
            let stmt = list.get(step.index)?;
            match step.branch {
                None => {
                    if steps.peek().is_some() {
                        return None;
                    }
                    return Some(stmt);
                }
                Some(side) => match stmt {
                    Statement::Conditional {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        list = match side {
                            BranchSide::Then => then_branch,
                            BranchSide::Else => else_branch,
                        };
                    }
                    _ => return None,
                },
            }
        }
        None
    }

    pub fn statement_at_mut(&mut self, path: &NodePath) -> Option<&mut Statement> {
        let mut list = &mut self.statements;
        let mut steps = path.0.iter().peekable();
        while let Some(step) = steps.next() {
            let stmt = list.get_mut(step.index)?;
            match step.branch {
                None => {
                    if steps.peek().is_some() {
                        return None;
                    }
                    return Some(stmt);
                }
                Some(side) => match stmt {
                    Statement::Conditional {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        list = match side {
                            BranchSide::Then => then_branch,
                            BranchSide::Else => else_branch,
                        };
                    }
                    _ => return None,
                },
            }
        }
        None
    }
}

fn collect_resources<'a>(
    stmts: &'a [Statement],
    guards: &mut Vec<(CondId, BranchSide)>,
    out: &mut Vec<(&'a Resource, Vec<(CondId, BranchSide)>)>,
) {
    for stmt in stmts {
        match stmt {
            Statement::Resource(r) => out.push((r, guards.clone())),
            Statement::VariableAssignment { .. } => {}
            Statement::Conditional {
                id,
                then_branch,
                else_branch,
                ..
            } => {
                guards.push((*id, BranchSide::Then));
                collect_resources(then_branch, guards, out);
                guards.pop();
                guards.push((*id, BranchSide::Else));
                collect_resources(else_branch, guards, out);
                guards.pop();
            }
        }
    }
}

fn walk<'a>(stmts: &'a [Statement], base: &NodePath, out: &mut Vec<(NodePath, &'a Statement)>) {
    for (i, stmt) in stmts.iter().enumerate() {
        out.push((base.push(i, None), stmt));
        if let Statement::Conditional {
            then_branch,
            else_branch,
            ..
        } = stmt
        {
            walk(then_branch, &base.push(i, Some(BranchSide::Then)), out);
            walk(else_branch, &base.push(i, Some(BranchSide::Else)), out);
        }
    }
}
