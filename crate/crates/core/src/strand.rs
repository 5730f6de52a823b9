//! Nucleotides and single DNA strands.
//!
//! A [`Strand`] is an immutable sequence over `{A, C, G, T}`. Internally the
//! bases are kept as ASCII bytes behind an `Arc`, so copying a tube shares the
//! sequence data instead of duplicating it, and substring search can run on
//! plain byte slices.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// One of the four DNA bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nucleotide {
    A,
    C,
    G,
    T,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T];

    /// Watson-Crick partner: A pairs with T, C pairs with G.
    pub fn pair(self) -> Nucleotide {
        match self {
            Nucleotide::A => Nucleotide::T,
            Nucleotide::T => Nucleotide::A,
            Nucleotide::C => Nucleotide::G,
            Nucleotide::G => Nucleotide::C,
        }
    }

    pub fn as_byte(self) -> u8 {
        match self {
            Nucleotide::A => b'A',
            Nucleotide::C => b'C',
            Nucleotide::G => b'G',
            Nucleotide::T => b'T',
        }
    }

    pub fn from_byte(b: u8) -> Option<Nucleotide> {
        match b {
            b'A' => Some(Nucleotide::A),
            b'C' => Some(Nucleotide::C),
            b'G' => Some(Nucleotide::G),
            b'T' => Some(Nucleotide::T),
            _ => None,
        }
    }
}

impl fmt::Display for Nucleotide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_byte() as char)
    }
}

/// Complement of a single ASCII base. Only called on validated bytes.
#[inline]
fn pair_byte(b: u8) -> u8 {
    match b {
        b'A' => b'T',
        b'T' => b'A',
        b'C' => b'G',
        b'G' => b'C',
        _ => unreachable!("strand bytes are always A, C, G or T"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid nucleotide {found:?} at offset {offset}")]
pub struct StrandParseError {
    /// Byte offset of the first offending character.
    pub offset: usize,
    pub found: char,
}

/// A single DNA strand; a strand of length `y` is a *y-mer*.
///
/// Ordering is lexicographic over `A < C < G < T`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strand(Arc<[u8]>);

impl Strand {
    pub fn empty() -> Strand {
        Strand(Arc::from(&b""[..]))
    }

    pub fn from_nucleotides<I: IntoIterator<Item = Nucleotide>>(bases: I) -> Strand {
        let bytes: Vec<u8> = bases.into_iter().map(Nucleotide::as_byte).collect();
        Strand(Arc::from(bytes))
    }

    /// A strand made of `len` copies of one base.
    pub fn repeat(base: Nucleotide, len: usize) -> Strand {
        Strand(Arc::from(vec![base.as_byte(); len]))
    }

    /// Validates raw ASCII bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Strand, StrandParseError> {
        if let Some(offset) = bytes.iter().position(|b| Nucleotide::from_byte(*b).is_none()) {
            return Err(StrandParseError {
                offset,
                found: bytes[offset] as char,
            });
        }
        Ok(Strand(Arc::from(bytes)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII A/C/G/T is ever stored.
        std::str::from_utf8(&self.0).expect("strand bytes are ASCII")
    }

    pub fn nucleotides(&self) -> impl Iterator<Item = Nucleotide> + '_ {
        self.0
            .iter()
            .map(|b| Nucleotide::from_byte(*b).expect("strand bytes are validated"))
    }

    /// Position-wise Watson-Crick complement. No reversal: position `i` of the
    /// result pairs with position `i` of `self`.
    pub fn complement(&self) -> Strand {
        let bytes: Vec<u8> = self.0.iter().map(|b| pair_byte(*b)).collect();
        Strand(Arc::from(bytes))
    }

    /// Concatenation of `parts` in order.
    pub fn concat<'a, I>(parts: I) -> Strand
    where
        I: IntoIterator<Item = &'a Strand>,
    {
        let mut bytes = Vec::new();
        for p in parts {
            bytes.extend_from_slice(p.as_bytes());
        }
        Strand(Arc::from(bytes))
    }

    /// `self` followed by `tail`.
    pub fn join(&self, tail: &Strand) -> Strand {
        let mut bytes = Vec::with_capacity(self.len() + tail.len());
        bytes.extend_from_slice(&self.0);
        bytes.extend_from_slice(&tail.0);
        Strand(Arc::from(bytes))
    }

    /// True iff `pattern` occurs contiguously in `self`. The empty pattern
    /// always matches.
    pub fn contains(&self, pattern: &Strand) -> bool {
        memchr::memmem::find(&self.0, &pattern.0).is_some()
    }

    /// Offset of the first occurrence of `pattern`.
    pub fn find(&self, pattern: &Strand) -> Option<usize> {
        memchr::memmem::find(&self.0, &pattern.0)
    }

    /// Sub-strand `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Strand {
        Strand(Arc::from(&self.0[start..end]))
    }
}

impl Deref for Strand {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl FromStr for Strand {
    type Err = StrandParseError;

    fn from_str(s: &str) -> Result<Strand, StrandParseError> {
        if let Some((offset, found)) = s.char_indices().find(|(_, c)| !matches!(c, 'A' | 'C' | 'G' | 'T')) {
            return Err(StrandParseError { offset, found });
        }
        Ok(Strand(Arc::from(s.as_bytes())))
    }
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "'{}'", self.as_str())
    }
}
