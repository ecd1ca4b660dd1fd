//! Data-driven normalization of technology-specific resource types,
//! attribute names, and reserved values to canonical forms, plus the inverse
//! lookups repair uses when writing values back into a script.
//!
//! Rules live in a text database (see [`NormalizationDb::load`] for the
//! format). Rules are checked for invertibility at load time: within one
//! scope no two raw names may map to the same canonical name, no raw name
//! may be mapped twice, and no rule's canonical output may be another rule's
//! raw input.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use thiserror::Error;

use crate::ir::{Expr, ExprKind, Resource, Script, Statement, Tech};

/// Bundled rule set, shipped with the crate.
pub const BUNDLED_DB: &str = include_str!("../data/normalization.db");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DbError {
    #[error("line {line}: expected `tech|canonical_type|kind|raw|canonical`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown technology `{tech}`")]
    UnknownTech { line: usize, tech: String },
    #[error("line {line}: unknown rule kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: duplicate rule for raw `{raw}` in scope {scope}")]
    DuplicateRaw { line: usize, raw: String, scope: String },
    #[error("line {line}: rule for raw `{raw}` is not invertible: canonical `{canonical}` already produced in scope {scope}")]
    NotInvertible {
        line: usize,
        raw: String,
        canonical: String,
        scope: String,
    },
    #[error("line {line}: rule chain: canonical `{canonical}` is also a raw name in scope {scope}")]
    RuleChain {
        line: usize,
        canonical: String,
        scope: String,
    },
    #[error("line {line}: value rule targets `{ctype}.{attr}` which is not in the canonical model")]
    UnknownAttribute {
        line: usize,
        ctype: String,
        attr: String,
    },
}

/// Canonical resource model: per type, the known canonical attributes and,
/// where closed, the set of admissible values. Open-valued attributes map to
/// `None`.
#[derive(Debug, Clone)]
pub struct CanonicalModel {
    types: BTreeMap<String, BTreeMap<String, Option<BTreeSet<String>>>>,
}

impl CanonicalModel {
    pub fn builtin() -> &'static CanonicalModel {
        static MODEL: OnceLock<CanonicalModel> = OnceLock::new();
        MODEL.get_or_init(|| {
            let mut types = BTreeMap::new();
            let closed = |values: &[&str]| -> Option<BTreeSet<String>> {
                Some(values.iter().map(|v| v.to_string()).collect())
            };
            let mut file = BTreeMap::new();
            file.insert("path".into(), None);
            file.insert("state".into(), closed(&["present", "absent", "directory", "link"]));
            file.insert("owner".into(), None);
            file.insert("group".into(), None);
            file.insert("mode".into(), None);
            file.insert("content".into(), None);
            file.insert("target".into(), None);
            types.insert("file".into(), file);
            let mut package = BTreeMap::new();
            package.insert("name".into(), None);
            package.insert("state".into(), closed(&["present", "absent", "latest"]));
            package.insert("version".into(), None);
            types.insert("package".into(), package);
            let mut service = BTreeMap::new();
            service.insert("name".into(), None);
            service.insert("state".into(), closed(&["started", "stopped"]));
            service.insert("enabled".into(), closed(&["true", "false"]));
            types.insert("service".into(), service);
            let mut user = BTreeMap::new();
            user.insert("name".into(), None);
            user.insert("state".into(), closed(&["present", "absent"]));
            user.insert("uid".into(), None);
            user.insert("gid".into(), None);
            user.insert("home".into(), None);
            user.insert("shell".into(), None);
            types.insert("user".into(), user);
            CanonicalModel { types }
        })
    }

    pub fn is_supported_type(&self, canonical_type: &str) -> bool {
        self.types.contains_key(canonical_type)
    }

    pub fn supported_types(&self) -> impl Iterator<Item = &str> {
        self.types.keys().map(String::as_str)
    }

    /// Known canonical attributes of a type, in sorted order.
    pub fn attributes(&self, canonical_type: &str) -> Vec<&str> {
        self.types
            .get(canonical_type)
            .map(|attrs| attrs.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }

    pub fn has_attribute(&self, canonical_type: &str, attr: &str) -> bool {
        self.types
            .get(canonical_type)
            .is_some_and(|attrs| attrs.contains_key(attr))
    }

    /// Closed value set for an attribute, or `None` when open-valued.
    pub fn closed_values(&self, canonical_type: &str, attr: &str) -> Option<&BTreeSet<String>> {
        self.types.get(canonical_type)?.get(attr)?.as_ref()
    }
}

/// Canonical attribute that supplies the resource identifier, per type.
pub fn identifying_attribute(canonical_type: &str) -> Option<&'static str> {
    match canonical_type {
        "file" => Some("path"),
        "package" | "service" | "user" => Some("name"),
        _ => None,
    }
}

type TypeKey = (Tech, String);
type AttrKey = (Tech, String, String);
type ValueKey = (Tech, String, String, String);

/// Loaded and validated normalization rules with their inverses.
#[derive(Debug, Clone, Default)]
pub struct NormalizationDb {
    type_rules: BTreeMap<TypeKey, String>,
    attr_rules: BTreeMap<AttrKey, String>,
    value_rules: BTreeMap<ValueKey, String>,
    type_inverse: BTreeMap<TypeKey, String>,
    attr_inverse: BTreeMap<AttrKey, String>,
    value_inverse: BTreeMap<ValueKey, String>,
}

impl NormalizationDb {
    /// Parses the pipe-separated rule format:
    ///
    /// ```text
    /// tech|canonical_type|kind|raw|canonical
    /// ```
    ///
    /// where `kind` is `type`, `attr`, or `value:<canonical_attr>`; `#`
    /// starts a comment and whitespace around fields is trimmed.
    pub fn load(source: &str) -> Result<NormalizationDb, DbError> {
        let mut db = NormalizationDb::default();
        let model = CanonicalModel::builtin();
        for (idx, raw_line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(DbError::Malformed {
                    line: line_no,
                    text: line.to_string(),
                });
            }
            let tech: Tech = fields[0].parse().map_err(|_| DbError::UnknownTech {
                line: line_no,
                tech: fields[0].to_string(),
            })?;
            let ctype = fields[1].to_string();
            let kind = fields[2];
            let raw = fields[3].to_string();
            let canonical = fields[4].to_string();
            if raw.is_empty() || canonical.is_empty() {
                return Err(DbError::Malformed {
                    line: line_no,
                    text: line.to_string(),
                });
            }
            if kind == "type" {
                insert_rule(
                    &mut db.type_rules,
                    &mut db.type_inverse,
                    (tech, raw.clone()),
                    (tech, canonical.clone()),
                    raw,
                    canonical,
                    line_no,
                    format!("(tech {tech})"),
                )?;
            } else if kind == "attr" {
                insert_rule(
                    &mut db.attr_rules,
                    &mut db.attr_inverse,
                    (tech, ctype.clone(), raw.clone()),
                    (tech, ctype.clone(), canonical.clone()),
                    raw,
                    canonical,
                    line_no,
                    format!("(tech {tech}, type {ctype})"),
                )?;
            } else if let Some(attr) = kind.strip_prefix("value:") {
                let attr = attr.trim().to_string();
                if !model.has_attribute(&ctype, &attr) {
                    return Err(DbError::UnknownAttribute {
                        line: line_no,
                        ctype,
                        attr,
                    });
                }
                insert_rule(
                    &mut db.value_rules,
                    &mut db.value_inverse,
                    (tech, ctype.clone(), attr.clone(), raw.clone()),
                    (tech, ctype.clone(), attr.clone(), canonical.clone()),
                    raw,
                    canonical,
                    line_no,
                    format!("(tech {tech}, type {ctype}, attr {attr})"),
                )?;
            } else {
                return Err(DbError::UnknownKind {
                    line: line_no,
                    kind: kind.to_string(),
                });
            }
        }
        db.check_chains()?;
        Ok(db)
    }

    /// The rule set shipped with the crate.
    pub fn bundled() -> &'static NormalizationDb {
        static DB: OnceLock<NormalizationDb> = OnceLock::new();
        DB.get_or_init(|| NormalizationDb::load(BUNDLED_DB).expect("bundled db is valid"))
    }

    fn check_chains(&self) -> Result<(), DbError> {
        for ((tech, raw), canonical) in &self.type_rules {
            if raw != canonical && self.type_rules.contains_key(&(*tech, canonical.clone())) {
                return Err(DbError::RuleChain {
                    line: 0,
                    canonical: canonical.clone(),
                    scope: format!("(tech {tech})"),
                });
            }
        }
        for ((tech, ctype, raw), canonical) in &self.attr_rules {
            if raw != canonical
                && self
                    .attr_rules
                    .contains_key(&(*tech, ctype.clone(), canonical.clone()))
            {
                return Err(DbError::RuleChain {
                    line: 0,
                    canonical: canonical.clone(),
                    scope: format!("(tech {tech}, type {ctype})"),
                });
            }
        }
        for ((tech, ctype, attr, raw), canonical) in &self.value_rules {
            if raw != canonical
                && self
                    .value_rules
                    .contains_key(&(*tech, ctype.clone(), attr.clone(), canonical.clone()))
            {
                return Err(DbError::RuleChain {
                    line: 0,
                    canonical: canonical.clone(),
                    scope: format!("(tech {tech}, type {ctype}, attr {attr})"),
                });
            }
        }
        Ok(())
    }

    pub fn canonical_type(&self, tech: Tech, raw: &str) -> String {
        self.type_rules
            .get(&(tech, raw.to_string()))
            .cloned()
            .unwrap_or_else(|| raw.to_string())
    }

    pub fn canonical_attr(&self, tech: Tech, canonical_type: &str, raw: &str) -> String {
        self.attr_rules
            .get(&(tech, canonical_type.to_string(), raw.to_string()))
            .cloned()
            .unwrap_or_else(|| raw.to_string())
    }

    pub fn canonical_value(
        &self,
        tech: Tech,
        canonical_type: &str,
        canonical_attr: &str,
        raw: &str,
    ) -> String {
        self.value_rules
            .get(&(
                tech,
                canonical_type.to_string(),
                canonical_attr.to_string(),
                raw.to_string(),
            ))
            .cloned()
            .unwrap_or_else(|| raw.to_string())
    }

    /// Inverse type lookup; identity when no rule applies.
    pub fn raw_type(&self, tech: Tech, canonical: &str) -> String {
        self.type_inverse
            .get(&(tech, canonical.to_string()))
            .cloned()
            .unwrap_or_else(|| canonical.to_string())
    }

    /// Inverse attribute-name lookup; identity when no rule applies.
    pub fn raw_attr(&self, tech: Tech, canonical_type: &str, canonical: &str) -> String {
        self.attr_inverse
            .get(&(tech, canonical_type.to_string(), canonical.to_string()))
            .cloned()
            .unwrap_or_else(|| canonical.to_string())
    }

    /// Inverse reserved-value lookup; identity when no rule applies.
    pub fn raw_value(
        &self,
        tech: Tech,
        canonical_type: &str,
        canonical_attr: &str,
        canonical: &str,
    ) -> String {
        self.value_inverse
            .get(&(
                tech,
                canonical_type.to_string(),
                canonical_attr.to_string(),
                canonical.to_string(),
            ))
            .cloned()
            .unwrap_or_else(|| canonical.to_string())
    }

    /// Reverses a canonical attribute name or value for one technology.
    /// With `attr` absent the string is treated as an attribute name;
    /// with `attr` present it is treated as that attribute's value.
    pub fn denormalize(
        &self,
        name_or_value: &str,
        tech: Tech,
        canonical_type: &str,
        attr: Option<&str>,
    ) -> String {
        match attr {
            None => self.raw_attr(tech, canonical_type, name_or_value),
            Some(attr) => self.raw_value(tech, canonical_type, attr, name_or_value),
        }
    }

    /// All loaded rules as (scope description, raw, canonical) triples, for
    /// exhaustive round-trip checks.
    pub fn all_rules(&self) -> Vec<(RuleScope, String, String)> {
        let mut out = Vec::new();
        for ((tech, raw), canonical) in &self.type_rules {
            out.push((RuleScope::Type { tech: *tech }, raw.clone(), canonical.clone()));
        }
        for ((tech, ctype, raw), canonical) in &self.attr_rules {
            out.push((
                RuleScope::Attr {
                    tech: *tech,
                    ctype: ctype.clone(),
                },
                raw.clone(),
                canonical.clone(),
            ));
        }
        for ((tech, ctype, attr, raw), canonical) in &self.value_rules {
            out.push((
                RuleScope::Value {
                    tech: *tech,
                    ctype: ctype.clone(),
                    attr: attr.clone(),
                },
                raw.clone(),
                canonical.clone(),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleScope {
    Type { tech: Tech },
    Attr { tech: Tech, ctype: String },
    Value { tech: Tech, ctype: String, attr: String },
}

#[allow(clippy::too_many_arguments)]
fn insert_rule<K: Ord + Clone, I: Ord + Clone>(
    forward: &mut BTreeMap<K, String>,
    inverse: &mut BTreeMap<I, String>,
    forward_key: K,
    inverse_key: I,
    raw: String,
    canonical: String,
    line: usize,
    scope: String,
) -> Result<(), DbError> {
    if forward.contains_key(&forward_key) {
        return Err(DbError::DuplicateRaw { line, raw, scope });
    }
    if inverse.contains_key(&inverse_key) {
        return Err(DbError::NotInvertible {
            line,
            raw,
            canonical,
            scope,
        });
    }
    forward.insert(forward_key, canonical.clone());
    inverse.insert(inverse_key, raw);
    Ok(())
}

/// Rewrites resource type names, attribute names, and literal reserved
/// values to canonical forms. Spans are untouched (they keep pointing at the
/// raw source); unmapped names pass through unchanged.
pub fn normalize_script(script: &Script, db: &NormalizationDb) -> Script {
    let mut out = script.clone();
    normalize_statements(&mut out.statements, script.tech, db);
    out
}

fn normalize_statements(statements: &mut [Statement], tech: Tech, db: &NormalizationDb) {
    for stmt in statements {
        match stmt {
            Statement::Resource(res) => normalize_resource(res, tech, db),
            Statement::VariableAssignment { .. } => {}
            Statement::Conditional {
                then_branch,
                else_branch,
                ..
            } => {
                normalize_statements(then_branch, tech, db);
                normalize_statements(else_branch, tech, db);
            }
        }
    }
}

fn normalize_resource(res: &mut Resource, tech: Tech, db: &NormalizationDb) {
    let ctype = db.canonical_type(tech, &res.type_name);
    res.type_name = ctype.clone();
    for attr in &mut res.attributes {
        attr.name = db.canonical_attr(tech, &ctype, &attr.name);
        rewrite_reserved_value(&mut attr.value, tech, &ctype, &attr.name, db);
    }
    // Distinct raw names may collapse onto one canonical name; keep the last
    // occurrence, matching last-writer-wins evaluation.
    let mut seen = BTreeSet::new();
    let mut keep = vec![true; res.attributes.len()];
    for (i, attr) in res.attributes.iter().enumerate().rev() {
        if !seen.insert(attr.name.clone()) {
            keep[i] = false;
        }
    }
    let mut idx = 0;
    res.attributes.retain(|_| {
        let k = keep[idx];
        idx += 1;
        k
    });
}

fn rewrite_reserved_value(
    value: &mut Expr,
    tech: Tech,
    ctype: &str,
    cattr: &str,
    db: &NormalizationDb,
) {
    match &mut value.kind {
        ExprKind::StringLiteral(text) => {
            let canonical = db.canonical_value(tech, ctype, cattr, text);
            if canonical != *text {
                *text = canonical;
            }
        }
        ExprKind::BoolLiteral(b) => {
            // Boolean renderings (yes/no/true/false) converge on true/false.
            let canonical = db.canonical_value(tech, ctype, cattr, if *b { "true" } else { "false" });
            if canonical != if *b { "true" } else { "false" } {
                value.kind = ExprKind::StringLiteral(canonical);
            }
        }
        _ => {}
    }
}

/// The expression a resource's canonical identifier comes from: the
/// identifying attribute's value when present, the title otherwise.
pub fn identifying_expr(res: &Resource) -> &Expr {
    if let Some(id_attr) = identifying_attribute(&res.type_name) {
        if let Some(attr) = res.attribute(id_attr) {
            return &attr.value;
        }
    }
    &res.title
}
