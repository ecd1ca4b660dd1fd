//! Propagates verified IR edits back into the original script text:
//! canonical values are denormalized for the script's technology, spliced
//! over the original spans with the original quoting style, and missing
//! attributes/resources are rendered as technology-correct text using the
//! file's indentation. Bytes outside the emitted patch ranges never change.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ir::{Script, Statement, Tech};
use crate::normalize::{identifying_attribute, NormalizationDb};
use crate::repair::{site_span, EditSite, RepairSolution, ResourceRef};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatchError {
    #[error("patches overlap at byte {at}")]
    Overlap { at: usize },
    #[error("edit site {site} could not be resolved against the script")]
    UnresolvedSite { site: String },
    #[error("synthetic span cannot be spliced")]
    SyntheticSpan,
    #[error("value `{value}` cannot be quoted for {tech}")]
    Unquotable { value: String, tech: Tech },
}

/// One textual replacement: `[byte_start, byte_end)` is replaced by
/// `replacement`. Pure insertions have an empty range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextPatch {
    pub byte_start: usize,
    pub byte_end: usize,
    pub replacement: String,
}

/// Renders a verified solution against the raw (pre-normalization) script:
/// canonical names and values are reversed through the normalization rules,
/// replacements re-quote in the original style, and synthetic edits become
/// inserted attribute lines or resource blocks. The result is sorted and
/// non-overlapping.
pub fn render_edits(
    solution: &RepairSolution,
    raw_script: &Script,
    db: &NormalizationDb,
) -> Result<Vec<TextPatch>, PatchError> {
    let tech = raw_script.tech;
    let mut patches: Vec<TextPatch> = Vec::new();
    // attribute insertions per existing resource, resource insertions per id
    let mut attr_inserts: BTreeMap<Vec<crate::ir::PathStep>, Vec<(String, String)>> =
        BTreeMap::new();
    let mut resource_inserts: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();

    for edit in &solution.edits {
        match &edit.site {
            EditSite::AttributeValue {
                resource,
                attribute,
            } => {
                let res = resource_at(raw_script, resource)?;
                let ctype = db.canonical_type(tech, &res.type_name);
                let raw_value = db.raw_value(tech, &ctype, attribute, &edit.new_value);
                // The raw script still carries technology-specific attribute
                // names; match by canonical name.
                let span = res
                    .attributes
                    .iter()
                    .find(|a| {
                        !a.synthetic && db.canonical_attr(tech, &ctype, &a.name) == *attribute
                    })
                    .map(|a| a.value.span)
                    .ok_or_else(|| unresolved(&edit.site))?;
                let original = raw_script.span_text(span).map_err(|_| PatchError::SyntheticSpan)?;
                patches.push(TextPatch {
                    byte_start: span.byte_start,
                    byte_end: span.byte_end,
                    replacement: requote(original, &raw_value, tech)?,
                });
            }
            EditSite::VariableLiteral { .. } | EditSite::ConditionLiteral { .. } => {
                let span = site_span(raw_script, &edit.site)
                    .ok_or_else(|| unresolved(&edit.site))?;
                let original = raw_script.span_text(span).map_err(|_| PatchError::SyntheticSpan)?;
                patches.push(TextPatch {
                    byte_start: span.byte_start,
                    byte_end: span.byte_end,
                    replacement: requote(original, &edit.new_value, tech)?,
                });
            }
            EditSite::MissingAttribute {
                resource: ResourceRef::Node(path),
                attribute,
            } => {
                attr_inserts
                    .entry(path.0.clone())
                    .or_default()
                    .push((attribute.clone(), edit.new_value.clone()));
            }
            EditSite::MissingAttribute {
                resource: ResourceRef::Inserted(id),
                attribute,
            } => {
                resource_inserts
                    .entry(id.clone())
                    .or_default()
                    .push((attribute.clone(), edit.new_value.clone()));
            }
            EditSite::MissingResource { id } => {
                resource_inserts.entry(id.clone()).or_default();
            }
        }
    }

    for (path_steps, attrs) in attr_inserts {
        let path = crate::ir::NodePath(path_steps);
        patches.push(render_attribute_insert(raw_script, &path, &attrs, db)?);
    }
    if !resource_inserts.is_empty() {
        patches.push(render_resource_inserts(raw_script, &resource_inserts, db)?);
    }

    patches.sort_by_key(|p| (p.byte_start, p.byte_end));
    check_non_overlapping(&patches)?;
    Ok(patches)
}

/// Splices sorted, non-overlapping patches into the source. Bytes outside
/// the patched ranges are copied unchanged.
pub fn apply_patches(source: &str, patches: &[TextPatch]) -> Result<String, PatchError> {
    check_non_overlapping(patches)?;
    let mut out = String::with_capacity(source.len());
    let mut cursor = 0usize;
    for patch in patches {
        if patch.byte_start < cursor {
            return Err(PatchError::Overlap {
                at: patch.byte_start,
            });
        }
        out.push_str(&source[cursor..patch.byte_start]);
        out.push_str(&patch.replacement);
        cursor = patch.byte_end;
    }
    out.push_str(&source[cursor..]);
    Ok(out)
}

/// Ranges must not overlap; touching ranges and insertions at one point are
/// fine and apply in list order.
fn check_non_overlapping(patches: &[TextPatch]) -> Result<(), PatchError> {
    for pair in patches.windows(2) {
        if pair[0].byte_end > pair[1].byte_start {
            return Err(PatchError::Overlap {
                at: pair[1].byte_start,
            });
        }
    }
    Ok(())
}

fn unresolved(site: &EditSite) -> PatchError {
    PatchError::UnresolvedSite {
        site: format!("{site:?}"),
    }
}

fn resource_at<'a>(
    script: &'a Script,
    path: &crate::ir::NodePath,
) -> Result<&'a crate::ir::Resource, PatchError> {
    match script.statement_at(path) {
        Some(Statement::Resource(res)) => Ok(res),
        _ => Err(PatchError::UnresolvedSite {
            site: format!("resource at {path}"),
        }),
    }
}

// --- quoting -----------------------------------------------------------------

fn is_bare_safe(value: &str) -> bool {
    if value.is_empty() {
        return false;
    }
    if value.chars().all(|c| c.is_ascii_digit()) {
        return true;
    }
    let mut chars = value.chars();
    let first = chars.next().expect("non-empty");
    if !(first.is_ascii_alphabetic() || first == '_') {
        return false;
    }
    if !chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')) {
        return false;
    }
    // Words that would re-parse as a different scalar type stay quoted.
    !matches!(
        value,
        "true" | "false" | "True" | "False" | "yes" | "no" | "Yes" | "No" | "on" | "off"
            | "null" | "Null" | "NULL"
    )
}

fn quote_with(value: &str, preferred: char, tech: Tech) -> Result<String, PatchError> {
    let other = if preferred == '\'' { '"' } else { '\'' };
    if !value.contains(preferred) {
        Ok(format!("{preferred}{value}{preferred}"))
    } else if !value.contains(other) {
        Ok(format!("{other}{value}{other}"))
    } else {
        Err(PatchError::Unquotable {
            value: value.to_string(),
            tech,
        })
    }
}

/// Renders a replacement value in the same style as the original token:
/// quoted tokens keep their quote character, bare tokens stay bare when the
/// value is syntax-safe and are quoted otherwise.
fn requote(original: &str, value: &str, tech: Tech) -> Result<String, PatchError> {
    if let Some(q) = original.chars().next().filter(|c| *c == '\'' || *c == '"') {
        return quote_with(value, q, tech);
    }
    if is_bare_safe(value) || (tech == Tech::Puppet && matches!(value, "true" | "false")) {
        return Ok(value.to_string());
    }
    let preferred = match tech {
        Tech::Ansible => '"',
        Tech::Puppet => '\'',
    };
    quote_with(value, preferred, tech)
}

/// Quoting for newly rendered attribute values (no original token): Ansible
/// values are always double-quoted so modes like 0644 stay strings; Puppet
/// values are single-quoted except booleans.
fn render_new_value(value: &str, tech: Tech) -> Result<String, PatchError> {
    match tech {
        Tech::Ansible => quote_with(value, '"', tech),
        Tech::Puppet => {
            if matches!(value, "true" | "false") {
                Ok(value.to_string())
            } else {
                quote_with(value, '\'', tech)
            }
        }
    }
}

// --- insertion rendering -------------------------------------------------------

/// Most frequent positive leading-space width; 2 when nothing indents.
fn dominant_indent(source: &str) -> usize {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for line in source.lines() {
        let trimmed = line.trim_start_matches(' ');
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - trimmed.len();
        if indent > 0 {
            *counts.entry(indent).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .max_by_key(|(indent, count)| (*count, std::cmp::Reverse(*indent)))
        .map(|(indent, _)| indent)
        .unwrap_or(2)
}

fn render_attribute_insert(
    script: &Script,
    path: &crate::ir::NodePath,
    attrs: &[(String, String)],
    db: &NormalizationDb,
) -> Result<TextPatch, PatchError> {
    let tech = script.tech;
    let res = resource_at(script, path)?;
    let ctype = db.canonical_type(tech, &res.type_name);
    let mut rendered: Vec<(String, String)> = Vec::new();
    for (attr, value) in attrs {
        let raw_attr = db.raw_attr(tech, &ctype, attr);
        let raw_value = db.raw_value(tech, &ctype, attr, value);
        rendered.push((raw_attr, render_new_value(&raw_value, tech)?));
    }

    let last_attr = res
        .attributes
        .iter()
        .filter(|a| !a.synthetic)
        .max_by_key(|a| a.value.span.byte_end.max(a.name_span.byte_end));
    match last_attr {
        Some(attr) => {
            let at = attr.value.span.byte_end.max(attr.name_span.byte_end);
            let indent = attr.name_span.start_col.saturating_sub(1) as usize;
            let inline = is_inline_tail(&script.source, at);
            let text = match (tech, inline) {
                (Tech::Ansible, true) => rendered
                    .iter()
                    .map(|(a, v)| format!(", {a}: {v}"))
                    .collect::<String>(),
                (Tech::Ansible, false) => rendered
                    .iter()
                    .map(|(a, v)| format!("\n{}{a}: {v}", " ".repeat(indent)))
                    .collect::<String>(),
                (Tech::Puppet, true) => rendered
                    .iter()
                    .map(|(a, v)| format!(", {a} => {v}"))
                    .collect::<String>(),
                (Tech::Puppet, false) => rendered
                    .iter()
                    .map(|(a, v)| format!(",\n{}{a} => {v}", " ".repeat(indent)))
                    .collect::<String>(),
            };
            Ok(TextPatch {
                byte_start: at,
                byte_end: at,
                replacement: text,
            })
        }
        None => {
            // Resource with no attributes: insert right after the title colon.
            let colon = script.source[res.title.span.byte_end..]
                .find(':')
                .map(|rel| res.title.span.byte_end + rel + 1)
                .ok_or_else(|| PatchError::UnresolvedSite {
                    site: format!("title colon of resource at {path}"),
                })?;
            let text = match tech {
                Tech::Ansible => rendered
                    .iter()
                    .map(|(a, v)| format!(" {a}: {v},"))
                    .collect::<String>()
                    .trim_end_matches(',')
                    .to_string(),
                Tech::Puppet => {
                    let body: Vec<String> =
                        rendered.iter().map(|(a, v)| format!("{a} => {v}")).collect();
                    format!(" {}", body.join(", "))
                }
            };
            Ok(TextPatch {
                byte_start: colon,
                byte_end: colon,
                replacement: text,
            })
        }
    }
}

/// True when the resource body continues on the same line after the last
/// attribute (flow/inline style), looking past a trailing comma.
fn is_inline_tail(source: &str, from: usize) -> bool {
    let mut rest = source[from..].chars().peekable();
    while matches!(rest.peek(), Some(' ' | '\t')) {
        rest.next();
    }
    if rest.peek() == Some(&',') {
        rest.next();
        while matches!(rest.peek(), Some(' ' | '\t')) {
            rest.next();
        }
    }
    matches!(rest.peek(), Some('}'))
}

fn render_resource_inserts(
    script: &Script,
    inserts: &BTreeMap<String, Vec<(String, String)>>,
    db: &NormalizationDb,
) -> Result<TextPatch, PatchError> {
    let tech = script.tech;
    let insert_at = script
        .statements
        .iter()
        .map(|s| s.span().byte_end)
        .max()
        .unwrap_or(script.source.trim_end().len());
    let marker_indent = script
        .statements
        .iter()
        .rev()
        .find(|s| matches!(s, Statement::Resource(_) | Statement::Conditional { .. }))
        .map(|s| s.span().start_col.saturating_sub(1) as usize)
        .unwrap_or(0);

    let mut text = String::new();
    for (id, attrs) in inserts {
        let (ctype, identifier) = id.split_once(':').ok_or_else(|| PatchError::UnresolvedSite {
            site: format!("resource id `{id}`"),
        })?;
        let raw_type = db.raw_type(tech, ctype);
        let id_attr = identifying_attribute(ctype);
        // The identifying attribute leads; remaining attributes in name order.
        let mut lines: Vec<(String, String)> = Vec::new();
        if let Some(id_attr) = id_attr {
            if !attrs.iter().any(|(a, _)| a == id_attr) {
                let raw_attr = db.raw_attr(tech, ctype, id_attr);
                lines.push((raw_attr, render_new_value(identifier, tech)?));
            }
        }
        for (attr, value) in attrs {
            let raw_attr = db.raw_attr(tech, ctype, attr);
            let raw_value = db.raw_value(tech, ctype, attr, value);
            lines.push((raw_attr, render_new_value(&raw_value, tech)?));
        }
        match tech {
            Tech::Ansible => {
                let marker = " ".repeat(marker_indent);
                let arg = " ".repeat(marker_indent + 4);
                text.push_str(&format!("\n{marker}- {raw_type}:"));
                for (attr, value) in lines {
                    text.push_str(&format!("\n{arg}{attr}: {value}"));
                }
            }
            Tech::Puppet => {
                let unit = " ".repeat(dominant_indent(&script.source));
                let title = render_new_value(identifier, tech)?;
                text.push_str(&format!("\n{raw_type} {{ {title}:"));
                for (attr, value) in lines {
                    text.push_str(&format!("\n{unit}{attr} => {value},"));
                }
                text.push_str("\n}");
            }
        }
    }
    if insert_at == 0 {
        text = text.trim_start_matches('\n').to_string();
    }
    Ok(TextPatch {
        byte_start: insert_at,
        byte_end: insert_at,
        replacement: text,
    })
}

// --- diff rendering -------------------------------------------------------------

/// Unified diff between two texts, for the CLI `--diff` flag. Changes are
/// local (patches never overlap), so a single hunk around the changed line
/// range is sufficient.
pub fn unified_diff(old: &str, new: &str, path: &str) -> String {
    if old == new {
        return String::new();
    }
    let old_lines: Vec<&str> = old.lines().collect();
    let new_lines: Vec<&str> = new.lines().collect();
    let mut prefix = 0usize;
    while prefix < old_lines.len()
        && prefix < new_lines.len()
        && old_lines[prefix] == new_lines[prefix]
    {
        prefix += 1;
    }
    let mut suffix = 0usize;
    while suffix < old_lines.len() - prefix
        && suffix < new_lines.len() - prefix
        && old_lines[old_lines.len() - 1 - suffix] == new_lines[new_lines.len() - 1 - suffix]
    {
        suffix += 1;
    }
    let context = 3usize;
    let ctx_start = prefix.saturating_sub(context);
    let old_changed = &old_lines[prefix..old_lines.len() - suffix];
    let new_changed = &new_lines[prefix..new_lines.len() - suffix];
    let ctx_end_old = (old_lines.len() - suffix + context).min(old_lines.len());
    let ctx_end_new = (new_lines.len() - suffix + context).min(new_lines.len());

    let mut out = String::new();
    out.push_str(&format!("--- a/{path}\n+++ b/{path}\n"));
    out.push_str(&format!(
        "@@ -{},{} +{},{} @@\n",
        ctx_start + 1,
        ctx_end_old - ctx_start,
        ctx_start + 1,
        ctx_end_new - ctx_start
    ));
    for line in &old_lines[ctx_start..prefix] {
        out.push_str(&format!(" {line}\n"));
    }
    for line in old_changed {
        out.push_str(&format!("-{line}\n"));
    }
    for line in new_changed {
        out.push_str(&format!("+{line}\n"));
    }
    for line in &old_lines[old_lines.len() - suffix..ctx_end_old] {
        out.push_str(&format!(" {line}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_ansible, parse_puppet};
    use crate::infer::infer_states;
    use crate::normalize::{normalize_script, CanonicalModel, NormalizationDb};
    use crate::repair::{repair, RepairConfig};
    use crate::state::{parse_state, satisfies};

    fn fix(src: &str, desired_json: &str, puppet: bool) -> (String, Vec<TextPatch>, String) {
        let db = NormalizationDb::bundled();
        let raw = if puppet {
            parse_puppet(src).unwrap()
        } else {
            parse_ansible(src).unwrap()
        };
        let normalized = normalize_script(&raw, db);
        let desired = parse_state(desired_json).unwrap();
        let outcome = repair(
            &normalized,
            &desired,
            CanonicalModel::builtin(),
            &RepairConfig::default(),
        )
        .unwrap();
        let solution = outcome.solutions.first().expect("a solution");
        let patches = render_edits(solution, &raw, db).unwrap();
        let patched = apply_patches(src, &patches).unwrap();
        // Re-parse/re-infer closure.
        let reparsed = if puppet {
            parse_puppet(&patched).unwrap()
        } else {
            parse_ansible(&patched).unwrap()
        };
        let renormalized = normalize_script(&reparsed, db);
        let states = infer_states(&renormalized, 64).unwrap();
        assert!(
            states.iter().any(|s| satisfies(&s.state, &desired)),
            "patched script does not satisfy desired state:\n{patched}"
        );
        (patched, patches, src.to_string())
    }

    #[test]
    fn puppet_value_edit_is_denormalized() {
        let src = "file { '/a':\n  ensure => file,\n}\n";
        let (patched, patches, _) = fix(
            src,
            r#"[{"id":"file:/a","attributes":{"state":"absent"}}]"#,
            true,
        );
        assert_eq!(patches.len(), 1);
        assert_eq!(patched, "file { '/a':\n  ensure => absent,\n}\n");
    }

    #[test]
    fn ansible_missing_attribute_inserted_after_last() {
        let src = "- file:\n    path: /etc/app.conf\n    state: touch\n";
        let (patched, _, _) = fix(
            src,
            r#"[{"id":"file:/etc/app.conf","attributes":{"state":"present","mode":"0644"}}]"#,
            false,
        );
        assert_eq!(
            patched,
            "- file:\n    path: /etc/app.conf\n    state: touch\n    mode: \"0644\"\n"
        );
    }

    #[test]
    fn puppet_missing_attribute_keeps_style() {
        let src = "file { '/a':\n  ensure => file,\n  owner  => 'root',\n}\n";
        let (patched, _, _) = fix(
            src,
            r#"[{"id":"file:/a","attributes":{"mode":"0600"}}]"#,
            true,
        );
        assert_eq!(
            patched,
            "file { '/a':\n  ensure => file,\n  owner  => 'root',\n  mode => '0600',\n}\n"
        );
    }

    #[test]
    fn puppet_inline_resource_inserts_inline() {
        let src = "file { '/a': ensure => file }\n";
        let (patched, _, _) = fix(
            src,
            r#"[{"id":"file:/a","attributes":{"mode":"0600"}}]"#,
            true,
        );
        assert_eq!(patched, "file { '/a': ensure => file, mode => '0600' }\n");
    }

    #[test]
    fn ansible_resource_insertion_appends_tasks() {
        let src = "---\n- hosts: all\n  tasks:\n    - name: install steam\n      package:\n        name: steam\n        state: present\n";
        let desired = r#"[
            {"id":"package:steam","attributes":{"state":"present"}},
            {"id":"package:libgl1-mesa-dri:i386","attributes":{"state":"present"}},
            {"id":"package:libgl1:i386","attributes":{"state":"present"}}
        ]"#;
        let (patched, _, _) = fix(src, desired, false);
        let expected = "---\n- hosts: all\n  tasks:\n    - name: install steam\n      package:\n        name: steam\n        state: present\n    - package:\n        name: \"libgl1-mesa-dri:i386\"\n        state: \"present\"\n    - package:\n        name: \"libgl1:i386\"\n        state: \"present\"\n";
        assert_eq!(patched, expected);
    }

    #[test]
    fn puppet_resource_insertion_denormalizes_values() {
        let src = "package { 'steam': ensure => installed }\n";
        let desired = r#"[
            {"id":"package:steam","attributes":{"state":"present"}},
            {"id":"package:libgl1:i386","attributes":{"state":"present"}}
        ]"#;
        let (patched, _, _) = fix(src, desired, true);
        assert_eq!(
            patched,
            "package { 'steam': ensure => installed }\npackage { 'libgl1:i386':\n  name => 'libgl1:i386',\n  ensure => 'installed',\n}\n"
        );
    }

    #[test]
    fn zero_edit_solution_changes_nothing() {
        let src = "file { '/a': ensure => file }\n";
        let (patched, patches, original) = fix(
            src,
            r#"[{"id":"file:/a","attributes":{"state":"present"}}]"#,
            true,
        );
        assert!(patches.is_empty());
        assert_eq!(patched, original);
    }

    #[test]
    fn patches_touch_only_their_ranges() {
        let src = "file { '/a':\n  ensure => file,\n  mode   => '0644',\n}\n";
        let (patched, patches, original) = fix(
            src,
            r#"[{"id":"file:/a","attributes":{"state":"absent"}}]"#,
            true,
        );
        // All bytes outside the patch ranges are identical.
        let mut orig_cursor = 0usize;
        let mut new_cursor = 0usize;
        for patch in &patches {
            assert_eq!(
                &original[orig_cursor..patch.byte_start],
                &patched[new_cursor..new_cursor + (patch.byte_start - orig_cursor)]
            );
            new_cursor += patch.byte_start - orig_cursor + patch.replacement.len();
            orig_cursor = patch.byte_end;
        }
        assert_eq!(&original[orig_cursor..], &patched[new_cursor..]);
    }

    #[test]
    fn apply_patches_rejects_overlap() {
        let patches = vec![
            TextPatch {
                byte_start: 0,
                byte_end: 5,
                replacement: "x".into(),
            },
            TextPatch {
                byte_start: 3,
                byte_end: 7,
                replacement: "y".into(),
            },
        ];
        assert!(matches!(
            apply_patches("0123456789", &patches),
            Err(PatchError::Overlap { .. })
        ));
    }

    #[test]
    fn apply_empty_patch_list_is_identity() {
        assert_eq!(apply_patches("abc", &[]).unwrap(), "abc");
    }

    #[test]
    fn requote_preserves_quote_style() {
        assert_eq!(requote("'file'", "absent", Tech::Puppet).unwrap(), "'absent'");
        assert_eq!(requote("\"x\"", "y", Tech::Ansible).unwrap(), "\"y\"");
        assert_eq!(requote("file", "absent", Tech::Puppet).unwrap(), "absent");
        assert_eq!(
            requote("present", "/etc/a b", Tech::Ansible).unwrap(),
            "\"/etc/a b\""
        );
        assert_eq!(requote("10", "12", Tech::Ansible).unwrap(), "12");
    }

    #[test]
    fn condition_literal_patch_rewrites_when() {
        let src = "- package:\n    name: apache2\n    state: present\n  when: os == \"debian\"\n";
        let db = NormalizationDb::bundled();
        let raw = parse_ansible(src).unwrap();
        let normalized = normalize_script(&raw, db);
        let desired = parse_state(
            r#"[{"id":"package:apache2","attributes":{"state":"present"}}]"#,
        )
        .unwrap();
        let outcome = repair(
            &normalized,
            &desired,
            CanonicalModel::builtin(),
            &RepairConfig::default(),
        )
        .unwrap();
        let solution = &outcome.solutions[0];
        let patches = render_edits(solution, &raw, db).unwrap();
        let patched = apply_patches(src, &patches).unwrap();
        let reparsed = parse_ansible(&patched).unwrap();
        let states = infer_states(&normalize_script(&reparsed, db), 64).unwrap();
        assert!(states.iter().any(|s| satisfies(&s.state, &desired)));
    }

    #[test]
    fn unified_diff_shows_changed_lines() {
        let old = "a\nb\nc\n";
        let new = "a\nB\nc\n";
        let diff = unified_diff(old, new, "x.pp");
        assert!(diff.contains("--- a/x.pp"));
        assert!(diff.contains("-b"));
        assert!(diff.contains("+B"));
        assert_eq!(unified_diff(old, old, "x.pp"), "");
    }
}
