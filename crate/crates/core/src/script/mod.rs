//! Straight-line tube programs.
//!
//! One statement per line; `#` starts a comment. An optional first line
//! `CODEBOOK <path>` binds the codebook used by `ANNEAL` and `PREMARKER`.
//!
//! ```text
//! program   = [ "CODEBOOK" path ] { statement }
//! statement = "INPUT" tube multiset
//!           | "MERGE" tube tube | "COPY" tube tube
//!           | "SEPARATE" tube patterns tube [ "WHOLE" | "PREMARKER" ]
//!           | "SELECT" tube length tube
//!           | ( "DETECT" | "ANNEAL" | "DENATURE" | "DISCARD" ) tube
//!           | "APPEND" tube strand
//! multiset  = "{" [ [ count "x" ] strand { "," [ count "x" ] strand } ] "}"
//! patterns  = "{" strand { "," strand } "}"
//! strand    = bases | "'" { base } "'"
//! ```

mod env;
mod parse;

use std::fmt::{self, Write as _};

use num_bigint::BigUint;
use num_traits::One;

use crate::strand::Strand;

pub use env::{DetectEvent, ScriptEnv, ScriptError};
pub use parse::{parse, Category, Diagnostic};

/// Where a `SEPARATE` looks for its patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Region {
    #[default]
    Whole,
    /// Before the codebook marker.
    PreMarker,
}

impl Region {
    fn keyword(self) -> &'static str {
        match self {
            Region::Whole => "WHOLE",
            Region::PreMarker => "PREMARKER",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Input { tube: String, contents: Vec<(BigUint, Strand)> },
    /// `into := into + from`, `from := empty`.
    Merge { into: String, from: String },
    Copy { src: String, dst: String },
    Detect { tube: String },
    Separate { src: String, patterns: Vec<Strand>, dst: String, region: Region },
    Select { src: String, len: usize, dst: String },
    Anneal { tube: String },
    Denature { tube: String },
    Discard { tube: String },
    Append { tube: String, strand: Strand },
}

impl Statement {
    pub fn keyword(&self) -> &'static str {
        match self {
            Statement::Input { .. } => "INPUT",
            Statement::Merge { .. } => "MERGE",
            Statement::Copy { .. } => "COPY",
            Statement::Detect { .. } => "DETECT",
            Statement::Separate { .. } => "SEPARATE",
            Statement::Select { .. } => "SELECT",
            Statement::Anneal { .. } => "ANNEAL",
            Statement::Denature { .. } => "DENATURE",
            Statement::Discard { .. } => "DISCARD",
            Statement::Append { .. } => "APPEND",
        }
    }

    /// Tubes read by the statement.
    pub fn sources(&self) -> Vec<&str> {
        match self {
            Statement::Input { .. } => vec![],
            Statement::Merge { from, .. } => vec![from],
            Statement::Copy { src, .. } | Statement::Separate { src, .. } | Statement::Select { src, .. } => vec![src],
            Statement::Detect { tube }
            | Statement::Anneal { tube }
            | Statement::Denature { tube }
            | Statement::Discard { tube }
            | Statement::Append { tube, .. } => vec![tube],
        }
    }

    /// Tube declared by the statement, if any.
    pub fn destination(&self) -> Option<&str> {
        match self {
            Statement::Input { tube, .. } => Some(tube),
            Statement::Merge { into, .. } => Some(into),
            Statement::Copy { dst, .. } | Statement::Separate { dst, .. } | Statement::Select { dst, .. } => Some(dst),
            _ => None,
        }
    }
}

fn quoted(s: &Strand) -> String {
    if s.is_empty() {
        "''".to_string()
    } else {
        s.to_string()
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Input { tube, contents } => {
                let items: Vec<String> = contents
                    .iter()
                    .map(|(c, s)| {
                        if c.is_one() {
                            quoted(s)
                        } else if s.is_empty() {
                            format!("{c}x''")
                        } else {
                            format!("{c}x{s}")
                        }
                    })
                    .collect();
                write!(f, "INPUT {tube} {{{}}}", items.join(", "))
            }
            Statement::Merge { into, from } => write!(f, "MERGE {into} {from}"),
            Statement::Copy { src, dst } => write!(f, "COPY {src} {dst}"),
            Statement::Detect { tube } => write!(f, "DETECT {tube}"),
            Statement::Separate { src, patterns, dst, region } => {
                let items: Vec<String> = patterns.iter().map(quoted).collect();
                write!(f, "SEPARATE {src} {{{}}} {dst} {}", items.join(", "), region.keyword())
            }
            Statement::Select { src, len, dst } => write!(f, "SELECT {src} {len} {dst}"),
            Statement::Anneal { tube } => write!(f, "ANNEAL {tube}"),
            Statement::Denature { tube } => write!(f, "DENATURE {tube}"),
            Statement::Discard { tube } => write!(f, "DISCARD {tube}"),
            Statement::Append { tube, strand } => write!(f, "APPEND {tube} {}", quoted(strand)),
        }
    }
}

/// A parsed program. Equality ignores source positions.
#[derive(Clone, Debug, Default)]
pub struct TubeProgram {
    pub codebook: Option<String>,
    pub statements: Vec<Statement>,
    /// Source line of each statement; empty for programs built in code.
    pub lines: Vec<usize>,
}

impl PartialEq for TubeProgram {
    fn eq(&self, other: &Self) -> bool {
        self.codebook == other.codebook && self.statements == other.statements
    }
}

impl Eq for TubeProgram {}

impl TubeProgram {
    pub fn new(codebook: Option<String>, statements: Vec<Statement>) -> TubeProgram {
        TubeProgram {
            codebook,
            statements,
            lines: Vec::new(),
        }
    }

    /// Line a statement prints on in [`TubeProgram::print`] output.
    pub fn canonical_line(has_codebook: bool, index: usize) -> usize {
        index + 1 + usize::from(has_codebook)
    }

    /// Source line of statement `index`.
    pub fn line_of(&self, index: usize) -> usize {
        self.lines
            .get(index)
            .copied()
            .unwrap_or_else(|| TubeProgram::canonical_line(self.codebook.is_some(), index))
    }

    /// Canonical text: the optional header, then one statement per line.
    pub fn print(&self) -> String {
        let mut out = String::new();
        if let Some(path) = &self.codebook {
            writeln!(out, "CODEBOOK {path}").unwrap();
        }
        for s in &self.statements {
            writeln!(out, "{s}").unwrap();
        }
        out
    }
}
