//! The system-state format and its comparison semantics.
//!
//! A system state is an ordered list of resource states; a resource state is
//! an identifier of the form `<type>:<identifier>` plus a dictionary of
//! canonical attribute values. Desired states are partial: an actual state
//! satisfies a desired state when every desired resource and attribute is
//! matched, with extra resources and attributes ignored.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sentinel attribute value for values that static inference cannot resolve.
pub const UNKNOWN_VALUE: &str = "\u{27c2}unknown\u{27c2}";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("state file is not valid JSON: {0}")]
    Json(String),
    #[error("malformed resource id `{0}`: expected `<type>:<identifier>`")]
    MalformedId(String),
    #[error("duplicate resource id `{0}`")]
    DuplicateId(String),
    #[error("resource `{0}` has an empty attribute map")]
    EmptyAttributes(String),
}

/// One resource's state: its id and canonical attribute values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceState {
    pub id: String,
    pub attributes: BTreeMap<String, String>,
}

impl ResourceState {
    pub fn new(id: impl Into<String>) -> Self {
        ResourceState {
            id: id.into(),
            attributes: BTreeMap::new(),
        }
    }

    /// The canonical type: the text before the first colon. Identifiers may
    /// themselves contain colons (`package:libgl1:i386`).
    pub fn type_name(&self) -> &str {
        self.id.split_once(':').map(|(t, _)| t).unwrap_or(&self.id)
    }

    /// The identifier: everything after the first colon.
    pub fn identifier(&self) -> &str {
        self.id.split_once(':').map(|(_, i)| i).unwrap_or("")
    }
}

/// An ordered list of resource states with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemState {
    pub resources: Vec<ResourceState>,
}

impl SystemState {
    pub fn resource(&self, id: &str) -> Option<&ResourceState> {
        self.resources.iter().find(|r| r.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system state serializes")
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for res in &self.resources {
            write!(f, "{} {{", res.id)?;
            let mut first = true;
            for (k, v) in &res.attributes {
                if !first {
                    write!(f, ",")?;
                }
                write!(f, " {k} -> {v}")?;
                first = false;
            }
            writeln!(f, " }}")?;
        }
        Ok(())
    }
}

/// Parses and validates a state file (a JSON array of
/// `{"id": ..., "attributes": {...}}` objects).
pub fn parse_state(text: &str) -> Result<SystemState, StateError> {
    let state: SystemState =
        serde_json::from_str(text).map_err(|e| StateError::Json(e.to_string()))?;
    validate_state(&state)?;
    Ok(state)
}

/// Checks id shape, id uniqueness, and attribute-map non-emptiness.
pub fn validate_state(state: &SystemState) -> Result<(), StateError> {
    let mut seen = std::collections::BTreeSet::new();
    for res in &state.resources {
        let Some((type_name, identifier)) = res.id.split_once(':') else {
            return Err(StateError::MalformedId(res.id.clone()));
        };
        if type_name.is_empty() || identifier.is_empty() {
            return Err(StateError::MalformedId(res.id.clone()));
        }
        if !seen.insert(res.id.clone()) {
            return Err(StateError::DuplicateId(res.id.clone()));
        }
        if res.attributes.is_empty() {
            return Err(StateError::EmptyAttributes(res.id.clone()));
        }
    }
    Ok(())
}

/// Subset satisfaction: every desired resource must exist in `actual` with
/// every desired attribute equal; extra resources and attributes in `actual`
/// are ignored.
pub fn satisfies(actual: &SystemState, desired: &SystemState) -> bool {
    diff(actual, desired).is_empty()
}

/// What `actual` is missing relative to `desired`, in desired order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateDiff {
    pub resource_id: String,
    pub kind: DiffKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DiffKind {
    MissingResource,
    MissingAttribute {
        attribute: String,
        expected: String,
    },
    ValueMismatch {
        attribute: String,
        expected: String,
        found: String,
    },
}

impl fmt::Display for StateDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DiffKind::MissingResource => write!(f, "{}: missing resource", self.resource_id),
            DiffKind::MissingAttribute {
                attribute,
                expected,
            } => write!(
                f,
                "{}: attribute {attribute} expected {expected}, missing",
                self.resource_id
            ),
            DiffKind::ValueMismatch {
                attribute,
                expected,
                found,
            } => write!(
                f,
                "{}: attribute {attribute} expected {expected}, found {found}",
                self.resource_id
            ),
        }
    }
}

/// Empty iff `satisfies(actual, desired)`.
pub fn diff(actual: &SystemState, desired: &SystemState) -> Vec<StateDiff> {
    let mut out = Vec::new();
    for want in &desired.resources {
        match actual.resource(&want.id) {
            None => out.push(StateDiff {
                resource_id: want.id.clone(),
                kind: DiffKind::MissingResource,
            }),
            Some(have) => {
                for (attr, expected) in &want.attributes {
                    match have.attributes.get(attr) {
                        None => out.push(StateDiff {
                            resource_id: want.id.clone(),
                            kind: DiffKind::MissingAttribute {
                                attribute: attr.clone(),
                                expected: expected.clone(),
                            },
                        }),
                        Some(found) if found != expected => out.push(StateDiff {
                            resource_id: want.id.clone(),
                            kind: DiffKind::ValueMismatch {
                                attribute: attr.clone(),
                                expected: expected.clone(),
                                found: found.clone(),
                            },
                        }),
                        Some(_) => {}
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(id: &str, attrs: &[(&str, &str)]) -> ResourceState {
        ResourceState {
            id: id.into(),
            attributes: attrs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    #[test]
    fn parse_steam_state() {
        let state =
            parse_state(r#"[{"id":"package:steam","attributes":{"state":"present"}}]"#).unwrap();
        assert_eq!(state.resources.len(), 1);
        assert_eq!(state.resources[0].id, "package:steam");
        assert_eq!(
            state.resources[0].attributes.get("state").map(String::as_str),
            Some("present")
        );
    }

    #[test]
    fn parse_empty_state() {
        assert!(parse_state("[]").unwrap().is_empty());
    }

    #[test]
    fn parse_rejects_duplicate_ids() {
        let err = parse_state(
            r#"[{"id":"file:/a","attributes":{"state":"present"}},
                {"id":"file:/a","attributes":{"state":"absent"}}]"#,
        )
        .unwrap_err();
        assert_eq!(err, StateError::DuplicateId("file:/a".into()));
    }

    #[test]
    fn parse_rejects_malformed_id() {
        let err = parse_state(r#"[{"id":"steam","attributes":{"state":"present"}}]"#).unwrap_err();
        assert_eq!(err, StateError::MalformedId("steam".into()));
    }

    #[test]
    fn parse_rejects_non_string_values() {
        assert!(matches!(
            parse_state(r#"[{"id":"file:/a","attributes":{"mode":644}}]"#),
            Err(StateError::Json(_))
        ));
    }

    #[test]
    fn identifier_may_contain_colons() {
        let r = res("package:libgl1:i386", &[("state", "present")]);
        assert_eq!(r.type_name(), "package");
        assert_eq!(r.identifier(), "libgl1:i386");
    }

    #[test]
    fn satisfies_is_reflexive() {
        let state = SystemState {
            resources: vec![res("package:steam", &[("state", "present")])],
        };
        assert!(satisfies(&state, &state));
    }

    #[test]
    fn satisfies_fails_on_missing_resource() {
        let actual = SystemState::default();
        let desired = SystemState {
            resources: vec![res("package:steam", &[("state", "present")])],
        };
        assert!(!satisfies(&actual, &desired));
        let d = diff(&actual, &desired);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiffKind::MissingResource);
    }

    #[test]
    fn satisfies_ignores_extra_attributes() {
        let actual = SystemState {
            resources: vec![res("file:/a", &[("state", "present"), ("mode", "0644")])],
        };
        let desired = SystemState {
            resources: vec![res("file:/a", &[("state", "present")])],
        };
        assert!(satisfies(&actual, &desired));
    }

    #[test]
    fn diff_reports_value_mismatch() {
        let actual = SystemState {
            resources: vec![res("file:/a", &[("state", "present")])],
        };
        let desired = SystemState {
            resources: vec![res("file:/a", &[("state", "absent")])],
        };
        let d = diff(&actual, &desired);
        assert_eq!(d.len(), 1);
        assert_eq!(
            d[0].kind,
            DiffKind::ValueMismatch {
                attribute: "state".into(),
                expected: "absent".into(),
                found: "present".into(),
            }
        );
    }

    #[test]
    fn round_trip_is_value_identical() {
        let state = SystemState {
            resources: vec![
                res("file:/a", &[("state", "present"), ("mode", "0644")]),
                res("package:steam", &[("state", "present")]),
            ],
        };
        let back = parse_state(&state.to_json()).unwrap();
        assert_eq!(back, state);
    }
}
