//! Frontends parsing Ansible-playbook and Puppet-manifest subsets into the
//! raw, un-normalized IR with exact source spans.
//!
//! Parsers are pure: the same bytes always produce the same tree, and every
//! input either yields a script or a positioned parse error. Name mapping is
//! left entirely to the normalization layer.

use std::path::Path;

use thiserror::Error;

use crate::ir::Tech;

pub mod ansible;
pub mod puppet;

mod lines;

pub use ansible::parse_ansible;
pub use puppet::parse_puppet;

/// Static description of one supported technology.
#[derive(Debug, Clone, Copy)]
pub struct TechProfile {
    pub tech: Tech,
    pub file_extensions: &'static [&'static str],
    pub comment_syntax: &'static str,
}

pub const TECH_PROFILES: &[TechProfile] = &[
    TechProfile {
        tech: Tech::Ansible,
        file_extensions: &["yml", "yaml"],
        comment_syntax: "#",
    },
    TechProfile {
        tech: Tech::Puppet,
        file_extensions: &["pp"],
        comment_syntax: "#",
    },
];

/// Maps a file extension to its technology. Unknown extensions yield `None`.
pub fn detect_tech(path: &Path) -> Option<Tech> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    TECH_PROFILES
        .iter()
        .find(|p| p.file_extensions.contains(&ext.as_str()))
        .map(|p| p.tech)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Lexically or structurally malformed input.
    Syntax,
    /// Well-formed input using a construct outside the supported subset.
    Unsupported,
    /// Multiple resources declared in one construct via an array title.
    UnsupportedArrayTitle,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line,
            col,
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_tech_by_extension() {
        assert_eq!(detect_tech(Path::new("site.pp")), Some(Tech::Puppet));
        assert_eq!(detect_tech(Path::new("play.yml")), Some(Tech::Ansible));
        assert_eq!(detect_tech(Path::new("play.yaml")), Some(Tech::Ansible));
        assert_eq!(detect_tech(Path::new("README.md")), None);
        assert_eq!(detect_tech(Path::new("Makefile")), None);
    }

    #[test]
    fn profile_extensions_are_disjoint() {
        let mut seen = std::collections::BTreeSet::new();
        for profile in TECH_PROFILES {
            for ext in profile.file_extensions {
                assert!(seen.insert(*ext), "extension {ext} mapped twice");
            }
        }
    }
}
