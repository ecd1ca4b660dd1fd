//! Puppet manifest frontend.
//!
//! Supported subset: resource declarations `type { 'title': attr => value }`,
//! variable assignments `$x = value`, `if`/`else` with `==`/`!=` comparisons,
//! `"${x}"` interpolation, and `+` on integers. Array titles are rejected
//! with a dedicated error class since they declare multiple resources in one
//! construct.

use crate::ir::{
    Attribute, CondId, Expr, ExprKind, Resource, Script, Span, Statement, Tech,
};

use super::lines::LineIndex;
use super::{ParseError, ParseErrorKind};

pub fn parse_puppet(source: &str) -> Result<Script, ParseError> {
    let tokens = lex(source)?;
    let index = LineIndex::new(source);
    let mut parser = PuppetParser {
        src: source,
        index,
        tokens,
        pos: 0,
        cond_counter: 0,
    };
    let statements = parser.parse_statements(true)?;
    Ok(Script {
        tech: Tech::Puppet,
        statements,
        source: source.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Var(String),
    SingleString(String),
    DoubleString(String),
    Int(i64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Colon,
    Comma,
    FatArrow,
    Assign,
    EqEq,
    NotEq,
    Plus,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Tok>, ParseError> {
    let index = LineIndex::new(src);
    let err = |offset: usize, kind: ParseErrorKind, msg: String| {
        let (line, col) = index.position(offset);
        ParseError::new(kind, line, col, msg)
    };
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '{' => {
                toks.push(Tok { kind: TokKind::LBrace, start: i, end: i + 1 });
                i += 1;
            }
            '}' => {
                toks.push(Tok { kind: TokKind::RBrace, start: i, end: i + 1 });
                i += 1;
            }
            '[' => {
                toks.push(Tok { kind: TokKind::LBracket, start: i, end: i + 1 });
                i += 1;
            }
            ']' => {
                toks.push(Tok { kind: TokKind::RBracket, start: i, end: i + 1 });
                i += 1;
            }
            ':' => {
                toks.push(Tok { kind: TokKind::Colon, start: i, end: i + 1 });
                i += 1;
            }
            ',' => {
                toks.push(Tok { kind: TokKind::Comma, start: i, end: i + 1 });
                i += 1;
            }
            '+' => {
                toks.push(Tok { kind: TokKind::Plus, start: i, end: i + 1 });
                i += 1;
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push(Tok { kind: TokKind::FatArrow, start: i, end: i + 2 });
                    i += 2;
                } else if bytes.get(i + 1) == Some(&b'=') {
                    toks.push(Tok { kind: TokKind::EqEq, start: i, end: i + 2 });
                    i += 2;
                } else {
                    toks.push(Tok { kind: TokKind::Assign, start: i, end: i + 1 });
                    i += 1;
                }
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push(Tok { kind: TokKind::NotEq, start: i, end: i + 2 });
                    i += 2;
                } else {
                    return Err(err(i, ParseErrorKind::Syntax, "unexpected `!`".into()));
                }
            }
            '$' => {
                let start = i;
                i += 1;
                let name_start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                if i == name_start {
                    return Err(err(start, ParseErrorKind::Syntax, "expected variable name after `$`".into()));
                }
                toks.push(Tok {
                    kind: TokKind::Var(src[name_start..i].to_string()),
                    start,
                    end: i,
                });
            }
            '\'' | '"' => {
                let quote = bytes[i];
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != quote && bytes[i] != b'\n' {
                    if bytes[i] == b'\\' {
                        return Err(err(
                            i,
                            ParseErrorKind::Unsupported,
                            "escape sequences in strings are not supported".into(),
                        ));
                    }
                    i += 1;
                }
                if i >= bytes.len() || bytes[i] != quote {
                    return Err(err(start, ParseErrorKind::Syntax, "unterminated string".into()));
                }
                let inner = src[start + 1..i].to_string();
                i += 1;
                let kind = if quote == b'\'' {
                    TokKind::SingleString(inner)
                } else {
                    TokKind::DoubleString(inner)
                };
                toks.push(Tok { kind, start, end: i });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                let value: i64 = text.parse().map_err(|_| {
                    err(start, ParseErrorKind::Syntax, format!("integer `{text}` out of range"))
                })?;
                toks.push(Tok { kind: TokKind::Int(value), start, end: i });
            }
            c if c.is_ascii_alphabetic() || c == '_' || c == '/' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric()
                        || matches!(bytes[i], b'_' | b'-' | b'.' | b'/'))
                {
                    i += 1;
                }
                toks.push(Tok {
                    kind: TokKind::Ident(src[start..i].to_string()),
                    start,
                    end: i,
                });
            }
            other => {
                return Err(err(i, ParseErrorKind::Syntax, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(toks)
}

struct PuppetParser<'a> {
    src: &'a str,
    index: LineIndex<'a>,
    tokens: Vec<Tok>,
    pos: usize,
    cond_counter: u32,
}

impl<'a> PuppetParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn err_at(&self, offset: usize, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.index.position(offset);
        ParseError::new(kind, line, col, msg)
    }

    fn err_here(&self, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
        let offset = self
            .peek()
            .map(|t| t.start)
            .unwrap_or_else(|| self.src.len());
        self.err_at(offset, kind, msg)
    }

    fn expect(&mut self, kind: &TokKind, what: &str) -> Result<Tok, ParseError> {
        match self.peek() {
            Some(tok) if std::mem::discriminant(&tok.kind) == std::mem::discriminant(kind) => {
                Ok(self.next().expect("peeked"))
            }
            _ => Err(self.err_here(ParseErrorKind::Syntax, format!("expected {what}"))),
        }
    }

    fn span(&self, start: usize, end: usize) -> Span {
        self.index.span(start, end)
    }

    fn parse_statements(&mut self, top_level: bool) -> Result<Vec<Statement>, ParseError> {
        let mut statements = Vec::new();
        loop {
            match self.peek() {
                None => {
                    if !top_level {
                        return Err(self.err_here(ParseErrorKind::Syntax, "expected `}`"));
                    }
                    return Ok(statements);
                }
                Some(tok) if tok.kind == TokKind::RBrace => {
                    if top_level {
                        return Err(self.err_here(ParseErrorKind::Syntax, "unexpected `}`"));
                    }
                    return Ok(statements);
                }
                Some(tok) => match &tok.kind {
                    TokKind::Ident(name) if name == "if" => {
                        statements.push(self.parse_conditional()?);
                    }
                    TokKind::Ident(_) => statements.push(self.parse_resource()?),
                    TokKind::Var(_) => statements.push(self.parse_assignment()?),
                    _ => {
                        return Err(self.err_here(
                            ParseErrorKind::Syntax,
                            "expected a resource, variable assignment, or `if`",
                        ));
                    }
                },
            }
        }
    }

    fn parse_resource(&mut self) -> Result<Statement, ParseError> {
        let type_tok = self.next().expect("resource type token");
        let TokKind::Ident(type_name) = type_tok.kind else {
            unreachable!("caller checked ident");
        };
        self.expect(&TokKind::LBrace, "`{`")?;
        if let Some(tok) = self.peek() {
            if tok.kind == TokKind::LBracket {
                return Err(self.err_at(
                    tok.start,
                    ParseErrorKind::UnsupportedArrayTitle,
                    "array titles declare multiple resources in one construct",
                ));
            }
        }
        let title = self.parse_title()?;
        self.expect(&TokKind::Colon, "`:` after resource title")?;
        let mut attributes = Vec::new();
        loop {
            match self.peek() {
                Some(tok) if tok.kind == TokKind::RBrace => break,
                Some(Tok { kind: TokKind::Ident(_), .. }) => {
                    let name_tok = self.next().expect("attribute name");
                    let TokKind::Ident(attr_name) = name_tok.kind else {
                        unreachable!();
                    };
                    let name_span = self.span(name_tok.start, name_tok.end);
                    self.expect(&TokKind::FatArrow, "`=>`")?;
                    let value = self.parse_expr()?;
                    if attributes.iter().any(|a: &Attribute| a.name == attr_name) {
                        return Err(self.err_at(
                            name_tok.start,
                            ParseErrorKind::Syntax,
                            format!("duplicate attribute `{attr_name}`"),
                        ));
                    }
                    attributes.push(Attribute::new(attr_name, value, name_span));
                    match self.peek() {
                        Some(tok) if tok.kind == TokKind::Comma => {
                            self.next();
                        }
                        Some(tok) if tok.kind == TokKind::RBrace => {}
                        _ => {
                            return Err(
                                self.err_here(ParseErrorKind::Syntax, "expected `,` or `}`")
                            );
                        }
                    }
                }
                _ => return Err(self.err_here(ParseErrorKind::Syntax, "expected attribute or `}`")),
            }
        }
        let rbrace = self.expect(&TokKind::RBrace, "`}`")?;
        Ok(Statement::Resource(Resource {
            type_name,
            title,
            attributes,
            span: self.span(type_tok.start, rbrace.end),
        }))
    }

    fn parse_title(&mut self) -> Result<Expr, ParseError> {
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokKind::SingleString(_)) | Some(TokKind::DoubleString(_)) | Some(TokKind::Var(_)) => {
                self.parse_term()
            }
            _ => Err(self.err_here(
                ParseErrorKind::Syntax,
                "resource title must be a string or variable",
            )),
        }
    }

    fn parse_assignment(&mut self) -> Result<Statement, ParseError> {
        let var_tok = self.next().expect("variable token");
        let TokKind::Var(name) = var_tok.kind else {
            unreachable!("caller checked var");
        };
        self.expect(&TokKind::Assign, "`=`")?;
        let value = self.parse_expr()?;
        let span = self.span(var_tok.start, value.span.byte_end);
        Ok(Statement::VariableAssignment { name, value, span })
    }

    fn parse_conditional(&mut self) -> Result<Statement, ParseError> {
        let if_tok = self.next().expect("if token");
        let id = CondId(self.cond_counter);
        self.cond_counter += 1;
        let left = self.parse_term()?;
        let negated = match self.peek().map(|t| t.kind.clone()) {
            Some(TokKind::EqEq) => {
                self.next();
                false
            }
            Some(TokKind::NotEq) => {
                self.next();
                true
            }
            _ => {
                return Err(self.err_here(
                    ParseErrorKind::Unsupported,
                    "only `==` / `!=` comparisons are supported in conditions",
                ));
            }
        };
        let right = self.parse_term()?;
        let cond_span = self.span(left.span.byte_start, right.span.byte_end);
        let condition = Expr::new(
            if negated {
                ExprKind::NotEquals(Box::new(left), Box::new(right))
            } else {
                ExprKind::Equals(Box::new(left), Box::new(right))
            },
            cond_span,
        );
        self.expect(&TokKind::LBrace, "`{`")?;
        let then_branch = self.parse_statements(false)?;
        let mut end_tok = self.expect(&TokKind::RBrace, "`}`")?;
        let mut else_branch = Vec::new();
        if let Some(Tok { kind: TokKind::Ident(word), .. }) = self.peek() {
            if word == "else" {
                self.next();
                if let Some(Tok { kind: TokKind::Ident(word), start, .. }) = self.peek() {
                    if word == "if" {
                        let start = *start;
                        return Err(self.err_at(
                            start,
                            ParseErrorKind::Unsupported,
                            "`else if` chains are not supported",
                        ));
                    }
                }
                self.expect(&TokKind::LBrace, "`{`")?;
                else_branch = self.parse_statements(false)?;
                end_tok = self.expect(&TokKind::RBrace, "`}`")?;
            }
        }
        Ok(Statement::Conditional {
            id,
            condition,
            then_branch,
            else_branch,
            span: self.span(if_tok.start, end_tok.end),
        })
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.parse_term()?;
        while matches!(self.peek(), Some(tok) if tok.kind == TokKind::Plus) {
            self.next();
            let right = self.parse_term()?;
            let span = self.span(expr.span.byte_start, right.span.byte_end);
            expr = Expr::new(ExprKind::Sum(Box::new(expr), Box::new(right)), span);
        }
        Ok(expr)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.next() else {
            return Err(self.err_here(ParseErrorKind::Syntax, "expected expression"));
        };
        let span = self.span(tok.start, tok.end);
        match tok.kind {
            TokKind::Int(v) => Ok(Expr::new(ExprKind::IntLiteral(v), span)),
            TokKind::Var(name) => Ok(Expr::new(ExprKind::VariableReference(name), span)),
            TokKind::SingleString(inner) => {
                Ok(Expr::new(ExprKind::StringLiteral(inner), span))
            }
            TokKind::DoubleString(_) => self.parse_interpolated(tok.start, tok.end),
            TokKind::Ident(word) => match word.as_str() {
                "true" => Ok(Expr::new(ExprKind::BoolLiteral(true), span)),
                "false" => Ok(Expr::new(ExprKind::BoolLiteral(false), span)),
                "undef" => Ok(Expr::new(ExprKind::Null, span)),
                _ => Ok(Expr::new(ExprKind::StringLiteral(word), span)),
            },
            TokKind::LBracket => Err(self.err_at(
                tok.start,
                ParseErrorKind::Unsupported,
                "arrays are not supported",
            )),
            _ => Err(self.err_at(tok.start, ParseErrorKind::Syntax, "expected expression")),
        }
    }

    /// Parses the contents of a double-quoted string token `[start, end)`
    /// (quotes included), resolving `${var}` and `$var` interpolation.
    fn parse_interpolated(&self, start: usize, end: usize) -> Result<Expr, ParseError> {
        let full_span = self.span(start, end);
        let inner_start = start + 1;
        let inner_end = end - 1;
        let region = &self.src[inner_start..inner_end];
        let bytes = region.as_bytes();
        let mut pieces: Vec<Expr> = Vec::new();
        let mut lit_start = 0usize;
        let mut i = 0usize;
        while i < bytes.len() {
            if bytes[i] != b'$' {
                i += 1;
                continue;
            }
            let piece_end = i;
            let var_start = i;
            let braced = bytes.get(i + 1) == Some(&b'{');
            let name_start = if braced { i + 2 } else { i + 1 };
            let mut j = name_start;
            while j < bytes.len()
                && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
            {
                j += 1;
            }
            if j == name_start {
                return Err(self.err_at(
                    inner_start + i,
                    ParseErrorKind::Syntax,
                    "expected variable name in interpolation",
                ));
            }
            let name = &region[name_start..j];
            let var_end = if braced {
                if bytes.get(j) != Some(&b'}') {
                    return Err(self.err_at(
                        inner_start + i,
                        ParseErrorKind::Syntax,
                        "unterminated `${` interpolation",
                    ));
                }
                j + 1
            } else {
                j
            };
            if piece_end > lit_start {
                pieces.push(Expr::new(
                    ExprKind::StringLiteral(region[lit_start..piece_end].to_string()),
                    self.span(inner_start + lit_start, inner_start + piece_end),
                ));
            }
            pieces.push(Expr::new(
                ExprKind::VariableReference(name.to_string()),
                self.span(inner_start + var_start, inner_start + var_end),
            ));
            lit_start = var_end;
            i = var_end;
        }
        if lit_start < region.len() || pieces.is_empty() {
            pieces.push(Expr::new(
                ExprKind::StringLiteral(region[lit_start..].to_string()),
                self.span(inner_start + lit_start, inner_end),
            ));
        }
        if pieces.len() == 1 {
            let mut only = pieces.pop().expect("one piece");
            only.span = full_span;
            return Ok(only);
        }
        let mut expr = pieces.pop().expect("non-empty");
        while let Some(prev) = pieces.pop() {
            let span = self.span(prev.span.byte_start, expr.span.byte_end);
            expr = Expr::new(ExprKind::Concat(Box::new(prev), Box::new(expr)), span);
        }
        expr.span = full_span;
        Ok(expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Script {
        parse_puppet(src).expect("parses")
    }

    #[test]
    fn parses_file_resource() {
        let src = "file { '/tmp/a':\n  ensure => file,\n  mode   => '0644',\n}\n";
        let script = parse(src);
        assert_eq!(script.statements.len(), 1);
        let Statement::Resource(res) = &script.statements[0] else {
            panic!("expected resource");
        };
        assert_eq!(res.type_name, "file");
        assert_eq!(res.title.kind, ExprKind::StringLiteral("/tmp/a".into()));
        assert_eq!(script.span_text(res.title.span).unwrap(), "'/tmp/a'");
        assert_eq!(res.attributes.len(), 2);
        assert_eq!(
            res.attributes[0].value.kind,
            ExprKind::StringLiteral("file".into())
        );
        assert_eq!(script.span_text(res.attributes[0].value.span).unwrap(), "file");
        assert_eq!(
            res.attributes[1].value.kind,
            ExprKind::StringLiteral("0644".into())
        );
        assert_eq!(script.span_text(res.attributes[1].value.span).unwrap(), "'0644'");
    }

    #[test]
    fn parses_variable_title() {
        let src = "$p = 'steam'\npackage { $p: ensure => installed }\n";
        let script = parse(src);
        assert_eq!(script.statements.len(), 2);
        assert!(matches!(
            &script.statements[0],
            Statement::VariableAssignment { name, .. } if name == "p"
        ));
        let Statement::Resource(res) = &script.statements[1] else {
            panic!("expected resource");
        };
        assert_eq!(res.title.kind, ExprKind::VariableReference("p".into()));
    }

    #[test]
    fn array_title_is_a_dedicated_error() {
        let err = parse_puppet("file { ['/a', '/b']: ensure => file }\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnsupportedArrayTitle);
        assert_eq!(err.line, 1);
    }

    #[test]
    fn parses_if_else() {
        let src = "if $os == 'debian' {\n  package { 'apache2': ensure => installed }\n} else {\n  package { 'httpd': ensure => installed }\n}\n";
        let script = parse(src);
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
        assert_eq!(then_branch.len(), 1);
        assert_eq!(else_branch.len(), 1);
        let ExprKind::Equals(l, r) = &condition.kind else {
            panic!("expected equals");
        };
        assert_eq!(l.kind, ExprKind::VariableReference("os".into()));
        assert_eq!(r.kind, ExprKind::StringLiteral("debian".into()));
    }

    #[test]
    fn interpolation_in_double_quotes() {
        let src = "$app = 'nginx'\nfile { \"/etc/${app}.conf\": ensure => file }\n";
        let script = parse(src);
        let Statement::Resource(res) = &script.statements[1] else {
            panic!("expected resource");
        };
        let ExprKind::Concat(lead, rest) = &res.title.kind else {
            panic!("expected concat, got {:?}", res.title.kind);
        };
        assert_eq!(lead.kind, ExprKind::StringLiteral("/etc/".into()));
        assert_eq!(script.span_text(lead.span).unwrap(), "/etc/");
        let ExprKind::Concat(var, tail) = &rest.kind else {
            panic!("expected nested concat");
        };
        assert_eq!(var.kind, ExprKind::VariableReference("app".into()));
        assert_eq!(script.span_text(var.span).unwrap(), "${app}");
        assert_eq!(tail.kind, ExprKind::StringLiteral(".conf".into()));
    }

    #[test]
    fn sum_on_integers() {
        let src = "$total = 2 + 3\n";
        let script = parse(src);
        let Statement::VariableAssignment { value, .. } = &script.statements[0] else {
            panic!("expected assignment");
        };
        let ExprKind::Sum(l, r) = &value.kind else {
            panic!("expected sum");
        };
        assert_eq!(l.kind, ExprKind::IntLiteral(2));
        assert_eq!(r.kind, ExprKind::IntLiteral(3));
    }

    #[test]
    fn barewords_and_booleans() {
        let src = "service { 'nginx': ensure => running, enable => true }\n";
        let script = parse(src);
        let Statement::Resource(res) = &script.statements[0] else {
            panic!("expected resource");
        };
        assert_eq!(
            res.attribute("ensure").unwrap().value.kind,
            ExprKind::StringLiteral("running".into())
        );
        assert_eq!(
            res.attribute("enable").unwrap().value.kind,
            ExprKind::BoolLiteral(true)
        );
    }

    #[test]
    fn nested_conditionals_number_in_source_order() {
        let src = "if $a == 1 {\n  if $b == 2 {\n    file { '/x': ensure => file }\n  }\n} else {\n  if $c == 3 {\n    file { '/y': ensure => file }\n  }\n}\n";
        let script = parse(src);
        let Statement::Conditional { id, then_branch, else_branch, .. } = &script.statements[0]
        else {
            panic!("expected conditional");
        };
        assert_eq!(*id, CondId(0));
        let Statement::Conditional { id: inner_then, .. } = &then_branch[0] else {
            panic!();
        };
        let Statement::Conditional { id: inner_else, .. } = &else_branch[0] else {
            panic!();
        };
        assert_eq!(*inner_then, CondId(1));
        assert_eq!(*inner_else, CondId(2));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_puppet("file { '/a' ensure => file }\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.line, 1);

        let err = parse_puppet("line1\nfile {\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn parse_is_deterministic() {
        let src = "$p = 'steam'\nif $os == 'x' { package { $p: ensure => installed } }\n";
        assert_eq!(parse(src), parse(src));
    }
}
