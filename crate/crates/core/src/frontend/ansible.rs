//! Ansible playbook frontend.
//!
//! Supported subset: a top-level list of plays (mappings with a `tasks:`
//! list and optional `vars:`) or a bare list of tasks. Each task holds at
//! most a `name:`, an optional `when:` equality comparison, and either a
//! `set_fact:` block or exactly one module key (`file:`, `package:`, ...)
//! whose mapping becomes a resource. `{{ var }}` interpolation inside
//! scalars parses into concat/variable-reference structure. Everything else
//! is a positioned parse error.

use crate::ir::{Attribute, CondId, Expr, ExprKind, Resource, Script, Span, Statement, Tech};

use super::lines::LineIndex;
use super::{ParseError, ParseErrorKind};

/// Module parameter that supplies the resource title, per module.
fn identifying_key(module: &str) -> &'static str {
    match module {
        "file" => "path",
        _ => "name",
    }
}

const PLAY_IGNORED_KEYS: &[&str] = &["name", "hosts"];
const BOOL_TRUE: &[&str] = &["true", "True", "TRUE", "yes", "Yes", "YES", "on", "On"];
const BOOL_FALSE: &[&str] = &["false", "False", "FALSE", "no", "No", "NO", "off", "Off"];
const NULL_WORDS: &[&str] = &["~", "null", "Null", "NULL"];

pub fn parse_ansible(source: &str) -> Result<Script, ParseError> {
    let mut parser = YamlParser::new(source);
    let statements = parser.parse_document()?;
    Ok(Script {
        tech: Tech::Ansible,
        statements,
        source: source.to_string(),
    })
}

/// One significant (non-blank, non-comment) physical line.
#[derive(Debug, Clone, Copy)]
struct Line {
    indent: usize,
    /// Byte offset of the first non-space character.
    start: usize,
    /// Byte offset just past the last character (before the newline).
    end: usize,
}

#[derive(Debug)]
enum YamlValue {
    Scalar(Expr),
    Mapping(Vec<MapEntry>),
    Sequence(Vec<SeqItem>),
}

#[derive(Debug)]
struct MapEntry {
    key: String,
    key_span: Span,
    value: YamlValue,
    /// End byte of the entry (last line it occupies).
    end: usize,
}

#[derive(Debug)]
struct SeqItem {
    /// Byte offset of the `-` marker.
    marker: usize,
    entries: Vec<MapEntry>,
    /// End byte of the item block.
    end: usize,
}

struct YamlParser<'a> {
    src: &'a str,
    index: LineIndex<'a>,
    lines: Vec<Line>,
    pos: usize,
    cond_counter: u32,
}

impl<'a> YamlParser<'a> {
    fn new(src: &'a str) -> Self {
        let index = LineIndex::new(src);
        let mut lines = Vec::new();
        let mut offset = 0;
        for raw in src.split('\n') {
            let end_no_cr = raw.strip_suffix('\r').unwrap_or(raw);
            let indent = end_no_cr.len() - end_no_cr.trim_start_matches(' ').len();
            let content = end_no_cr[indent..].trim_end();
            if !content.is_empty() && !content.starts_with('#') {
                lines.push(Line {
                    indent,
                    start: offset + indent,
                    end: offset + indent + content.len(),
                });
            }
            offset += raw.len() + 1;
        }
        YamlParser {
            src,
            index,
            lines,
            pos: 0,
            cond_counter: 0,
        }
    }

    fn peek(&self) -> Option<Line> {
        self.lines.get(self.pos).copied()
    }

    fn content(&self, line: Line) -> &'a str {
        &self.src[line.start..line.end]
    }

    fn err(&self, kind: ParseErrorKind, offset: usize, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.index.position(offset);
        ParseError::new(kind, line, col, msg)
    }

    fn next_cond_id(&mut self) -> CondId {
        let id = CondId(self.cond_counter);
        self.cond_counter += 1;
        id
    }

    fn parse_document(&mut self) -> Result<Vec<Statement>, ParseError> {
        if let Some(line) = self.peek() {
            if line.indent == 0 && self.content(line) == "---" {
                self.pos += 1;
            }
        }
        if let Some(line) = self.peek() {
            if self.content(line) == "..." {
                self.pos += 1;
            }
        }
        let Some(first) = self.peek() else {
            return Ok(Vec::new());
        };
        if self.content(first) == "..." {
            self.pos += 1;
            return Ok(Vec::new());
        }
        if !self.content(first).starts_with('-') {
            return Err(self.err(
                ParseErrorKind::Unsupported,
                first.start,
                "expected a top-level list of plays or tasks",
            ));
        }
        let items = self.parse_sequence(first.indent)?;
        if let Some(extra) = self.peek() {
            if self.content(extra) != "..." {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    extra.start,
                    format!("unexpected content at indent {}", extra.indent),
                ));
            }
            self.pos += 1;
        }
        let mut statements = Vec::new();
        for item in items {
            self.lower_top_item(item, &mut statements)?;
        }
        Ok(statements)
    }

    fn parse_sequence(&mut self, indent: usize) -> Result<Vec<SeqItem>, ParseError> {
        let mut items = Vec::new();
        while let Some(line) = self.peek() {
            if line.indent != indent || !self.content(line).starts_with('-') {
                break;
            }
            let content = self.content(line);
            if content != "-" && !content.starts_with("- ") {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    line.start,
                    "expected `- ` list item marker",
                ));
            }
            let marker = line.start;
            let entries = if content == "-" {
                self.pos += 1;
                let Some(body) = self.peek() else {
                    return Err(self.err(
                        ParseErrorKind::Syntax,
                        line.end,
                        "list item has no content",
                    ));
                };
                if body.indent <= indent {
                    return Err(self.err(
                        ParseErrorKind::Syntax,
                        body.start,
                        "list item has no content",
                    ));
                }
                self.parse_mapping(body.indent)?
            } else {
                // Compact form: the first mapping entry shares the marker line.
                // Its key column defines the item's virtual indent.
                let inline_start = marker + 2 + content[2..].len() - content[2..].trim_start().len();
                let virtual_indent = inline_start - (line.start - line.indent);
                self.parse_mapping_from(virtual_indent, Some((line, inline_start)))?
            };
            let end = entries.last().map(|e| e.end).unwrap_or(line.end);
            items.push(SeqItem { marker, entries, end });
        }
        Ok(items)
    }

    fn parse_mapping(&mut self, indent: usize) -> Result<Vec<MapEntry>, ParseError> {
        self.parse_mapping_from(indent, None)
    }

    fn parse_mapping_from(
        &mut self,
        indent: usize,
        inline: Option<(Line, usize)>,
    ) -> Result<Vec<MapEntry>, ParseError> {
        let mut entries: Vec<MapEntry> = Vec::new();
        let mut pending = inline;
        loop {
            let (line, entry_start) = match pending.take() {
                Some((line, start)) => {
                    self.pos += 1;
                    (line, start)
                }
                None => {
                    let Some(line) = self.peek() else { break };
                    if line.indent != indent {
                        if line.indent > indent && !entries.is_empty() {
                            return Err(self.err(
                                ParseErrorKind::Syntax,
                                line.start,
                                "unexpected deeper indentation",
                            ));
                        }
                        break;
                    }
                    if self.content(line).starts_with('-') {
                        break;
                    }
                    self.pos += 1;
                    (line, line.start)
                }
            };
            let entry = self.parse_map_entry(line, entry_start, indent)?;
            if entries.iter().any(|e| e.key == entry.key) {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    entry.key_span.byte_start,
                    format!("duplicate key `{}`", entry.key),
                ));
            }
            entries.push(entry);
        }
        if entries.is_empty() {
            if let Some(line) = self.peek() {
                return Err(self.err(ParseErrorKind::Syntax, line.start, "expected mapping"));
            }
        }
        Ok(entries)
    }

    fn parse_map_entry(
        &mut self,
        line: Line,
        entry_start: usize,
        indent: usize,
    ) -> Result<MapEntry, ParseError> {
        let text = &self.src[entry_start..line.end];
        let Some(colon_rel) = find_key_colon(text) else {
            return Err(self.err(
                ParseErrorKind::Syntax,
                entry_start,
                "expected `key: value` mapping entry",
            ));
        };
        let key = text[..colon_rel].trim_end();
        if key.is_empty() || !is_plain_key(key) {
            return Err(self.err(
                ParseErrorKind::Syntax,
                entry_start,
                format!("unsupported mapping key `{key}`"),
            ));
        }
        let key_span = self.index.span(entry_start, entry_start + key.len());
        let rest_start = entry_start + colon_rel + 1;
        let rest = self.src[rest_start..line.end].trim_start();
        let rest_offset = line.end - rest.len();
        let rest = strip_plain_comment(rest);

        if rest.is_empty() {
            // Nested block on the following lines, or an empty (null) scalar.
            if let Some(next) = self.peek() {
                if next.indent > indent {
                    if self.content(next).starts_with('-') {
                        let items = self.parse_sequence(next.indent)?;
                        let end = items.last().map(|i| i.end).unwrap_or(line.end);
                        return Ok(MapEntry {
                            key: key.to_string(),
                            key_span,
                            value: YamlValue::Sequence(items),
                            end,
                        });
                    }
                    let inner = self.parse_mapping(next.indent)?;
                    let end = inner.last().map(|e| e.end).unwrap_or(line.end);
                    return Ok(MapEntry {
                        key: key.to_string(),
                        key_span,
                        value: YamlValue::Mapping(inner),
                        end,
                    });
                }
            }
            let span = self.index.span(entry_start + colon_rel, entry_start + colon_rel + 1);
            return Ok(MapEntry {
                key: key.to_string(),
                key_span,
                value: YamlValue::Scalar(Expr::new(ExprKind::Null, span)),
                end: line.end,
            });
        }

        if rest.starts_with('{') {
            let entries = self.parse_flow_mapping(rest_offset, rest_offset + rest.len())?;
            return Ok(MapEntry {
                key: key.to_string(),
                key_span,
                value: YamlValue::Mapping(entries),
                end: line.end,
            });
        }
        if rest.starts_with('[') {
            return Err(self.err(
                ParseErrorKind::Unsupported,
                rest_offset,
                "flow sequences are not supported",
            ));
        }
        if rest.starts_with('|') || rest.starts_with('>') {
            return Err(self.err(
                ParseErrorKind::Unsupported,
                rest_offset,
                "block scalars are not supported",
            ));
        }
        let expr = self.parse_scalar(rest_offset, rest_offset + rest.len())?;
        Ok(MapEntry {
            key: key.to_string(),
            key_span,
            value: YamlValue::Scalar(expr),
            end: line.end,
        })
    }

    fn parse_flow_mapping(
        &mut self,
        start: usize,
        end: usize,
    ) -> Result<Vec<MapEntry>, ParseError> {
        let text = &self.src[start..end];
        if !text.ends_with('}') {
            return Err(self.err(
                ParseErrorKind::Syntax,
                start,
                "flow mapping must close on the same line",
            ));
        }
        let inner_start = start + 1;
        let inner = &self.src[inner_start..end - 1];
        let mut entries: Vec<MapEntry> = Vec::new();
        let mut field_start = 0usize;
        let mut depth_quotes: Option<char> = None;
        let bytes = inner.as_bytes();
        let mut fields = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            let c = b as char;
            match depth_quotes {
                Some(q) if c == q => depth_quotes = None,
                Some(_) => {}
                None if c == '\'' || c == '"' => depth_quotes = Some(c),
                None if c == ',' => {
                    fields.push((field_start, i));
                    field_start = i + 1;
                }
                None => {}
            }
        }
        fields.push((field_start, inner.len()));
        for (fs, fe) in fields {
            let field = &inner[fs..fe];
            if field.trim().is_empty() {
                continue;
            }
            let lead = field.len() - field.trim_start().len();
            let abs = inner_start + fs + lead;
            let trimmed = field.trim();
            let Some(colon_rel) = find_key_colon(trimmed) else {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    abs,
                    "expected `key: value` in flow mapping",
                ));
            };
            let key = trimmed[..colon_rel].trim_end();
            if key.is_empty() || !is_plain_key(key) {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    abs,
                    format!("unsupported mapping key `{key}`"),
                ));
            }
            let key_span = self.index.span(abs, abs + key.len());
            let val = trimmed[colon_rel + 1..].trim();
            if val.is_empty() {
                return Err(self.err(ParseErrorKind::Syntax, abs, "missing value in flow mapping"));
            }
            let val_abs = abs + trimmed[colon_rel + 1..].len() - val.len() + colon_rel + 1;
            let expr = self.parse_scalar(val_abs, val_abs + val.len())?;
            if entries.iter().any(|e| e.key == key) {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    abs,
                    format!("duplicate key `{key}`"),
                ));
            }
            entries.push(MapEntry {
                key: key.to_string(),
                key_span,
                value: YamlValue::Scalar(expr),
                end,
            });
        }
        Ok(entries)
    }

    /// Parses one scalar token at `[start, end)` into an expression,
    /// handling quoting and `{{ var }}` interpolation.
    fn parse_scalar(&self, start: usize, end: usize) -> Result<Expr, ParseError> {
        let text = &self.src[start..end];
        let full_span = self.index.span(start, end);
        if let Some(quote) = text.chars().next().filter(|c| *c == '"' || *c == '\'') {
            if text.len() < 2 || !text.ends_with(quote) {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    start,
                    "unterminated quoted scalar",
                ));
            }
            let inner = &text[1..text.len() - 1];
            if inner.contains(quote) || inner.contains('\\') {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    start,
                    "escape sequences in quoted scalars are not supported",
                ));
            }
            return self.parse_interpolated(start + 1, end - 1, full_span);
        }
        // Plain scalar.
        if NULL_WORDS.contains(&text) {
            return Ok(Expr::new(ExprKind::Null, full_span));
        }
        if BOOL_TRUE.contains(&text) {
            return Ok(Expr::new(ExprKind::BoolLiteral(true), full_span));
        }
        if BOOL_FALSE.contains(&text) {
            return Ok(Expr::new(ExprKind::BoolLiteral(false), full_span));
        }
        if is_int_token(text) {
            if let Ok(v) = text.parse::<i64>() {
                return Ok(Expr::new(ExprKind::IntLiteral(v), full_span));
            }
        }
        self.parse_interpolated(start, end, full_span)
    }

    /// Parses the region `[start, end)` as literal text interleaved with
    /// `{{ var }}` references, folded right into concat nodes.
    fn parse_interpolated(
        &self,
        start: usize,
        end: usize,
        full_span: Span,
    ) -> Result<Expr, ParseError> {
        let region = &self.src[start..end];
        let mut pieces: Vec<Expr> = Vec::new();
        let mut i = 0usize;
        while i < region.len() {
            match region[i..].find("{{") {
                None => {
                    let lit = &region[i..];
                    pieces.push(Expr::new(
                        ExprKind::StringLiteral(lit.to_string()),
                        self.index.span(start + i, end),
                    ));
                    i = region.len();
                }
                Some(rel) => {
                    if rel > 0 {
                        let lit = &region[i..i + rel];
                        pieces.push(Expr::new(
                            ExprKind::StringLiteral(lit.to_string()),
                            self.index.span(start + i, start + i + rel),
                        ));
                    }
                    let open = i + rel;
                    let Some(close_rel) = region[open + 2..].find("}}") else {
                        return Err(self.err(
                            ParseErrorKind::Syntax,
                            start + open,
                            "unterminated `{{` interpolation",
                        ));
                    };
                    let close = open + 2 + close_rel;
                    let name = region[open + 2..close].trim();
                    if !is_identifier(name) {
                        return Err(self.err(
                            ParseErrorKind::Unsupported,
                            start + open,
                            format!("unsupported template expression `{name}`"),
                        ));
                    }
                    pieces.push(Expr::new(
                        ExprKind::VariableReference(name.to_string()),
                        self.index.span(start + open, start + close + 2),
                    ));
                    i = close + 2;
                }
            }
        }
        match pieces.len() {
            0 => Ok(Expr::new(ExprKind::StringLiteral(String::new()), full_span)),
            1 => {
                let mut only = pieces.pop().expect("one piece");
                only.span = full_span;
                Ok(only)
            }
            _ => {
                let mut expr = pieces.pop().expect("non-empty");
                while let Some(prev) = pieces.pop() {
                    let span = self.index.span(prev.span.byte_start, expr.span.byte_end);
                    expr = Expr::new(ExprKind::Concat(Box::new(prev), Box::new(expr)), span);
                }
                expr.span = full_span;
                Ok(expr)
            }
        }
    }

    /// Parses a `when:` scalar of the form `var == literal` / `var != literal`.
    fn parse_when_condition(&self, expr: &Expr) -> Result<Expr, ParseError> {
        let span = expr.span;
        let (mut start, mut end) = (span.byte_start, span.byte_end);
        let raw = &self.src[start..end];
        if raw.starts_with('"') || raw.starts_with('\'') {
            start += 1;
            end -= 1;
        }
        let region = &self.src[start..end];
        let (op_rel, negated) = match (region.find("=="), region.find("!=")) {
            (Some(e), Some(n)) if n < e => (n, true),
            (Some(e), _) => (e, false),
            (None, Some(n)) => (n, true),
            (None, None) => {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    start,
                    "only `var == literal` / `var != literal` conditions are supported",
                ));
            }
        };
        let left = region[..op_rel].trim();
        if !is_identifier(left) {
            return Err(self.err(
                ParseErrorKind::Unsupported,
                start,
                "condition left-hand side must be a variable name",
            ));
        }
        let left_start = start + region[..op_rel].len() - region[..op_rel].trim_start().len();
        let left_expr = Expr::new(
            ExprKind::VariableReference(left.to_string()),
            self.index.span(left_start, left_start + left.len()),
        );
        let right = region[op_rel + 2..].trim();
        if right.is_empty() {
            return Err(self.err(
                ParseErrorKind::Syntax,
                start + op_rel + 2,
                "missing comparison right-hand side",
            ));
        }
        let right_start = start + op_rel + 2 + region[op_rel + 2..].len()
            - region[op_rel + 2..].trim_start().len();
        let right_expr = self.parse_scalar(right_start, right_start + right.len())?;
        if !right_expr.is_literal() {
            return Err(self.err(
                ParseErrorKind::Unsupported,
                right_start,
                "condition right-hand side must be a literal",
            ));
        }
        let cond_span = self.index.span(span.byte_start, span.byte_end);
        let kind = if negated {
            ExprKind::NotEquals(Box::new(left_expr), Box::new(right_expr))
        } else {
            ExprKind::Equals(Box::new(left_expr), Box::new(right_expr))
        };
        Ok(Expr::new(kind, cond_span))
    }

    fn lower_top_item(
        &mut self,
        item: SeqItem,
        statements: &mut Vec<Statement>,
    ) -> Result<(), ParseError> {
        let is_play = item.entries.iter().any(|e| e.key == "tasks");
        if !is_play {
            let stmt = self.lower_task(item)?;
            statements.push(stmt);
            return Ok(());
        }
        let mut tasks_value = None;
        let mut vars_value = None;
        for entry in item.entries {
            match entry.key.as_str() {
                "tasks" => tasks_value = Some(entry),
                "vars" => vars_value = Some(entry),
                k if PLAY_IGNORED_KEYS.contains(&k) => {}
                other => {
                    return Err(self.err(
                        ParseErrorKind::Unsupported,
                        entry.key_span.byte_start,
                        format!("unsupported play key `{other}`"),
                    ));
                }
            }
        }
        if let Some(vars) = vars_value {
            let YamlValue::Mapping(entries) = vars.value else {
                return Err(self.err(
                    ParseErrorKind::Syntax,
                    vars.key_span.byte_start,
                    "`vars` must be a mapping",
                ));
            };
            for var in entries {
                statements.push(self.lower_assignment(var)?);
            }
        }
        if let Some(tasks) = tasks_value {
            match tasks.value {
                YamlValue::Sequence(items) => {
                    for task in items {
                        let stmt = self.lower_task(task)?;
                        statements.push(stmt);
                    }
                }
                YamlValue::Scalar(Expr {
                    kind: ExprKind::Null,
                    ..
                }) => {}
                _ => {
                    return Err(self.err(
                        ParseErrorKind::Syntax,
                        tasks.key_span.byte_start,
                        "`tasks` must be a list",
                    ));
                }
            }
        }
        Ok(())
    }

    fn lower_assignment(&self, entry: MapEntry) -> Result<Statement, ParseError> {
        let YamlValue::Scalar(value) = entry.value else {
            return Err(self.err(
                ParseErrorKind::Unsupported,
                entry.key_span.byte_start,
                "variable values must be scalars",
            ));
        };
        let span = self
            .index
            .span(entry.key_span.byte_start, value.span.byte_end.max(entry.key_span.byte_end));
        Ok(Statement::VariableAssignment {
            name: entry.key,
            value,
            span,
        })
    }

    fn lower_task(&mut self, item: SeqItem) -> Result<Statement, ParseError> {
        let task_span = self.index.span(item.marker, item.end);
        let mut when_entry = None;
        let mut set_fact = None;
        let mut module = None;
        for entry in item.entries {
            match entry.key.as_str() {
                "name" => {}
                "when" => when_entry = Some(entry),
                "set_fact" => set_fact = Some(entry),
                _ => {
                    if module.is_some() {
                        return Err(self.err(
                            ParseErrorKind::Unsupported,
                            entry.key_span.byte_start,
                            format!("task has more than one module key (`{}`)", entry.key),
                        ));
                    }
                    module = Some(entry);
                }
            }
        }

        let condition = match &when_entry {
            Some(entry) => {
                let YamlValue::Scalar(scalar) = &entry.value else {
                    return Err(self.err(
                        ParseErrorKind::Unsupported,
                        entry.key_span.byte_start,
                        "`when` lists are not supported",
                    ));
                };
                Some(self.parse_when_condition(scalar)?)
            }
            None => None,
        };
        // Source-order conditional ids: allocate before descending further.
        let cond_id = condition.as_ref().map(|_| self.next_cond_id());

        let mut body = Vec::new();
        match (set_fact, module) {
            (Some(facts), None) => {
                let YamlValue::Mapping(entries) = facts.value else {
                    return Err(self.err(
                        ParseErrorKind::Syntax,
                        facts.key_span.byte_start,
                        "`set_fact` must be a mapping",
                    ));
                };
                for entry in entries {
                    body.push(self.lower_assignment(entry)?);
                }
            }
            (None, Some(module)) => {
                body.push(Statement::Resource(self.lower_resource(module, task_span)?));
            }
            (Some(_), Some(module)) => {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    module.key_span.byte_start,
                    "task mixes `set_fact` with a module",
                ));
            }
            (None, None) => {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    item.marker,
                    "task has no supported module",
                ));
            }
        }

        match (condition, cond_id) {
            (Some(condition), Some(id)) => Ok(Statement::Conditional {
                id,
                condition,
                then_branch: body,
                else_branch: Vec::new(),
                span: task_span,
            }),
            _ => Ok(body.remove(0)),
        }
    }

    fn lower_resource(&self, module: MapEntry, span: Span) -> Result<Resource, ParseError> {
        let type_name = module.key.clone();
        let args = match module.value {
            YamlValue::Mapping(entries) => entries,
            YamlValue::Scalar(_) => {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    module.key_span.byte_start,
                    format!("module `{type_name}` requires a mapping of parameters"),
                ));
            }
            YamlValue::Sequence(_) => {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    module.key_span.byte_start,
                    format!("module `{type_name}` cannot take a list"),
                ));
            }
        };
        let mut attributes = Vec::new();
        for arg in args {
            let YamlValue::Scalar(value) = arg.value else {
                return Err(self.err(
                    ParseErrorKind::Unsupported,
                    arg.key_span.byte_start,
                    "module parameters must be scalars",
                ));
            };
            attributes.push(Attribute::new(arg.key, value, arg.key_span));
        }
        let title = attributes
            .iter()
            .find(|a| a.name == identifying_key(&type_name))
            .map(|a| a.value.clone())
            .unwrap_or_else(|| Expr::synthetic_string(""));
        Ok(Resource {
            type_name,
            title,
            attributes,
            span,
        })
    }
}

/// Column position of the `:` ending a plain key, if the text starts one.
fn find_key_colon(text: &str) -> Option<usize> {
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b':' && (i + 1 == bytes.len() || bytes[i + 1] == b' ') {
            return Some(i);
        }
        if b == b'\'' || b == b'"' || b == b'#' {
            return None;
        }
    }
    None
}

fn is_plain_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_int_token(text: &str) -> bool {
    let digits = text.strip_prefix('-').unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Strips a trailing ` #comment` from a plain scalar region, respecting quotes.
fn strip_plain_comment(text: &str) -> &str {
    if text.starts_with('"') || text.starts_with('\'') {
        // Comment can only start after the closing quote.
        let quote = text.as_bytes()[0];
        if let Some(close) = text[1..].find(quote as char) {
            let after = 1 + close + 1;
            return text[..after].trim_end();
        }
        return text;
    }
    let bytes = text.as_bytes();
    for i in 0..bytes.len() {
        if bytes[i] == b'#' && i > 0 && bytes[i - 1] == b' ' {
            return text[..i].trim_end();
        }
    }
    text.trim_end()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Script {
        parse_ansible(src).expect("parses")
    }

    fn first_resource(script: &Script) -> &Resource {
        for (_, stmt) in script.walk_statements() {
            if let Statement::Resource(r) = stmt {
                return r;
            }
        }
        panic!("no resource in script");
    }

    #[test]
    fn parses_flow_style_package_task() {
        let script = parse("- package: {name: steam, state: present}\n");
        let res = first_resource(&script);
        assert_eq!(res.type_name, "package");
        assert_eq!(res.attributes.len(), 2);
        assert_eq!(res.attributes[0].name, "name");
        assert_eq!(
            res.attributes[0].value.kind,
            ExprKind::StringLiteral("steam".into())
        );
        assert_eq!(res.attributes[1].name, "state");
        assert_eq!(
            res.attributes[1].value.kind,
            ExprKind::StringLiteral("present".into())
        );
        assert_eq!(res.title.kind, ExprKind::StringLiteral("steam".into()));
    }

    #[test]
    fn parses_block_style_playbook() {
        let src = "---\n- name: Install Steam\n  hosts: all\n  tasks:\n    - name: steam\n      package:\n        name: steam\n        state: present\n";
        let script = parse(src);
        assert_eq!(script.statements.len(), 1);
        let res = first_resource(&script);
        assert_eq!(res.type_name, "package");
        let name_attr = res.attribute("name").unwrap();
        assert_eq!(script.span_text(name_attr.value.span).unwrap(), "steam");
    }

    #[test]
    fn interpolation_builds_concat_structure() {
        let src = "- file:\n    path: \"/etc/{{ app }}.conf\"\n    state: touch\n";
        let script = parse(src);
        let res = first_resource(&script);
        let path = &res.attribute("path").unwrap().value;
        let ExprKind::Concat(left, rest) = &path.kind else {
            panic!("expected concat, got {:?}", path.kind);
        };
        assert_eq!(left.kind, ExprKind::StringLiteral("/etc/".into()));
        assert_eq!(script.span_text(left.span).unwrap(), "/etc/");
        let ExprKind::Concat(var, suffix) = &rest.kind else {
            panic!("expected nested concat");
        };
        assert_eq!(var.kind, ExprKind::VariableReference("app".into()));
        assert_eq!(script.span_text(var.span).unwrap(), "{{ app }}");
        assert_eq!(suffix.kind, ExprKind::StringLiteral(".conf".into()));
        assert_eq!(script.span_text(suffix.span).unwrap(), ".conf");
        assert_eq!(
            script.span_text(path.span).unwrap(),
            "\"/etc/{{ app }}.conf\""
        );
    }

    #[test]
    fn when_condition_wraps_task_in_conditional() {
        let src = "- package:\n    name: steam\n    state: present\n  when: distro == \"debian\"\n";
        let script = parse(src);
        assert_eq!(script.statements.len(), 1);
        let Statement::Conditional {
            id,
            condition,
            then_branch,
            else_branch,
            ..
        } = &script.statements[0]
        else {
            panic!("expected conditional");
        };
        assert_eq!(*id, CondId(0));
        assert!(else_branch.is_empty());
        assert_eq!(then_branch.len(), 1);
        let ExprKind::Equals(l, r) = &condition.kind else {
            panic!("expected equals");
        };
        assert_eq!(l.kind, ExprKind::VariableReference("distro".into()));
        assert_eq!(r.kind, ExprKind::StringLiteral("debian".into()));
        assert_eq!(script.span_text(r.span).unwrap(), "\"debian\"");
    }

    #[test]
    fn set_fact_and_vars_become_assignments() {
        let src = "---\n- hosts: all\n  vars:\n    app: nginx\n  tasks:\n    - set_fact:\n        mode_value: \"0644\"\n    - file:\n        path: /etc/app.conf\n        state: touch\n";
        let script = parse(src);
        assert_eq!(script.statements.len(), 3);
        assert!(matches!(
            &script.statements[0],
            Statement::VariableAssignment { name, .. } if name == "app"
        ));
        assert!(matches!(
            &script.statements[1],
            Statement::VariableAssignment { name, .. } if name == "mode_value"
        ));
    }

    #[test]
    fn empty_playbook_has_no_statements() {
        assert!(parse("---\n").statements.is_empty());
        assert!(parse("").statements.is_empty());
        assert!(parse("# just a comment\n").statements.is_empty());
    }

    #[test]
    fn quoted_scalar_span_includes_quotes() {
        let src = "- package:\n    name: steam\n    state: \"present\"\n";
        let script = parse(src);
        let res = first_resource(&script);
        let state = res.attribute("state").unwrap();
        assert_eq!(script.span_text(state.value.span).unwrap(), "\"present\"");
        assert_eq!(
            state.value.kind,
            ExprKind::StringLiteral("present".into())
        );
    }

    #[test]
    fn booleans_and_ints_are_typed() {
        let src = "- service:\n    name: nginx\n    enabled: yes\n    priority: 10\n";
        let script = parse(src);
        let res = first_resource(&script);
        assert_eq!(
            res.attribute("enabled").unwrap().value.kind,
            ExprKind::BoolLiteral(true)
        );
        assert_eq!(
            res.attribute("priority").unwrap().value.kind,
            ExprKind::IntLiteral(10)
        );
    }

    #[test]
    fn unsupported_constructs_error_with_position() {
        let err = parse_ansible("- shell: echo hi\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unsupported);
        assert_eq!(err.line, 1);

        let err = parse_ansible("- package:\n    name: steam\n  loop: [a, b]\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unsupported);

        let err = parse_ansible("- file:\n    path: /a\n  when: x is defined\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Unsupported);
    }

    #[test]
    fn tasks_in_plays_share_conditional_id_space() {
        let src = "- package:\n    name: a\n  when: x == 1\n- package:\n    name: b\n  when: y == 2\n";
        let script = parse(src);
        let ids: Vec<CondId> = script
            .statements
            .iter()
            .filter_map(|s| match s {
                Statement::Conditional { id, .. } => Some(*id),
                _ => None,
            })
            .collect();
        assert_eq!(ids, vec![CondId(0), CondId(1)]);
    }

    #[test]
    fn comment_after_plain_scalar_is_stripped() {
        let src = "- package:\n    name: steam # the game store\n    state: present\n";
        let script = parse(src);
        let res = first_resource(&script);
        assert_eq!(
            res.attribute("name").unwrap().value.kind,
            ExprKind::StringLiteral("steam".into())
        );
    }

    #[test]
    fn parse_is_deterministic() {
        let src = "- file:\n    path: \"/etc/{{ app }}.conf\"\n    state: touch\n  when: distro == \"debian\"\n";
        assert_eq!(parse(src), parse(src));
    }
}
