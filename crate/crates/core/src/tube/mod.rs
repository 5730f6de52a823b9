//! Test tubes and the ten tube operations.
//!
//! A [`Tube`] is a multiset of strands with arbitrary-precision
//! multiplicities. Strands that came out of the same annealing assembly carry
//! a shared duplex tag until [`Tube::denature`] erases it; every other
//! operation treats a tagged strand like any other strand.

mod anneal;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use aho_corasick::AhoCorasick;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::strand::{Nucleotide, Strand};

pub use anneal::{AnnealMode, HybridizationRule, LITERAL_MAX_SPAN};

/// Default maximum number of distinct strands a tube may hold.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Longest strand a single [`Tube::append`] accepts.
pub const APPEND_LIMIT: usize = 20;

pub type Multiplicity = BigUint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TubeError {
    #[error("tube {tube} would hold more than {cap} distinct strands")]
    CapacityExceeded { tube: String, cap: usize },
    #[error("append of a {len}-mer exceeds the {APPEND_LIMIT}-nucleotide limit")]
    AppendTooLong { len: usize },
    #[error("separation needs at least one pattern")]
    EmptyPatternSet,
    #[error("literal annealing is limited to spans of {limit} nucleotides, rule asks for {span}")]
    LiteralSpanTooLarge { span: usize, limit: usize },
}

/// Where [`Tube::separate`] looks for patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchRegion {
    Whole,
    /// Only the prefix before the first occurrence of the marker (the whole
    /// strand if the marker does not occur).
    BeforeMarker(Strand),
}

impl MatchRegion {
    fn view<'a>(&self, s: &'a Strand) -> &'a [u8] {
        match self {
            MatchRegion::Whole => s.as_bytes(),
            MatchRegion::BeforeMarker(m) => match s.find(m) {
                Some(at) => &s.as_bytes()[..at],
                None => s.as_bytes(),
            },
        }
    }
}

/// Content of the y-mers appended to encode lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillerPolicy {
    Repeat(Nucleotide),
}

impl Default for FillerPolicy {
    fn default() -> Self {
        FillerPolicy::Repeat(Nucleotide::A)
    }
}

impl FillerPolicy {
    pub fn filler(&self, len: usize) -> Strand {
        match *self {
            FillerPolicy::Repeat(n) => Strand::repeat(n, len),
        }
    }
}

/// Lengths of the successive appends realizing a `total`-nucleotide
/// extension: one append when `total <= 20`, otherwise `total / 20`
/// twenty-mers followed by one `(total % 20)`-mer (possibly empty).
pub fn append_chunks(total: usize) -> Vec<usize> {
    if total <= APPEND_LIMIT {
        return vec![total];
    }
    let mut out = vec![APPEND_LIMIT; total / APPEND_LIMIT];
    out.push(total % APPEND_LIMIT);
    out
}

/// A non-empty set of substring patterns, compiled once.
#[derive(Clone, Debug)]
pub struct PatternSet {
    patterns: Vec<Strand>,
    automaton: AhoCorasick,
}

impl PatternSet {
    pub fn new<I: IntoIterator<Item = Strand>>(patterns: I) -> Result<PatternSet, TubeError> {
        let mut patterns: Vec<Strand> = patterns.into_iter().collect();
        patterns.sort();
        patterns.dedup();
        if patterns.is_empty() {
            return Err(TubeError::EmptyPatternSet);
        }
        let automaton = AhoCorasick::new(patterns.iter().map(|p| p.as_bytes()))
            .expect("nucleotide patterns always compile");
        Ok(PatternSet { patterns, automaton })
    }

    pub fn patterns(&self) -> &[Strand] {
        &self.patterns
    }

    pub fn matches(&self, haystack: &[u8]) -> bool {
        self.automaton.is_match(haystack)
    }
}

impl PartialEq for PatternSet {
    fn eq(&self, other: &Self) -> bool {
        self.patterns == other.patterns
    }
}

impl Eq for PatternSet {}

/// A strand as stored in a tube: its sequence plus the duplex it belongs to,
/// if it has been annealed and not yet denatured.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Molecule {
    pub strand: Strand,
    pub duplex: Option<u64>,
}

impl Molecule {
    pub fn single(strand: Strand) -> Molecule {
        Molecule { strand, duplex: None }
    }
}

#[derive(Clone, Debug)]
pub struct Tube {
    label: String,
    cap: usize,
    contents: BTreeMap<Molecule, Multiplicity>,
    next_duplex: u64,
}

impl Tube {
    pub fn new(label: impl Into<String>, cap: usize) -> Tube {
        Tube {
            label: label.into(),
            cap,
            contents: BTreeMap::new(),
            next_duplex: 0,
        }
    }

    pub fn with_default_cap(label: impl Into<String>) -> Tube {
        Tube::new(label, DEFAULT_CAP)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Number of distinct molecules held.
    pub fn distinct(&self) -> usize {
        self.contents.len()
    }

    pub fn total(&self) -> Multiplicity {
        self.contents.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn molecules(&self) -> impl Iterator<Item = (&Molecule, &Multiplicity)> {
        self.contents.iter()
    }

    /// Multiplicity of `s`, summed over duplex tags.
    pub fn multiplicity(&self, s: &Strand) -> Multiplicity {
        self.contents
            .iter()
            .filter(|(m, _)| m.strand == *s)
            .map(|(_, c)| c)
            .sum()
    }

    /// Contents with duplex tags dropped, ordered by strand.
    pub fn strands(&self) -> BTreeMap<Strand, Multiplicity> {
        let mut out: BTreeMap<Strand, Multiplicity> = BTreeMap::new();
        for (m, c) in &self.contents {
            *out.entry(m.strand.clone()).or_default() += c;
        }
        out
    }

    /// Smallest strand in the tube.
    pub fn first_strand(&self) -> Option<&Strand> {
        self.contents.keys().next().map(|m| &m.strand)
    }

    /// Number of duplex assemblies currently held.
    pub fn duplex_count(&self) -> usize {
        self.contents.keys().filter(|m| m.duplex.is_some()).count() / 2
    }

    fn check_cap(&self, label: &str, distinct: usize) -> Result<(), TubeError> {
        if distinct > self.cap {
            return Err(TubeError::CapacityExceeded {
                tube: label.to_string(),
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Replaces the contents with the given multiset. Zero counts are dropped
    /// and repeated strands add up.
    pub fn input<I>(&mut self, strands: I) -> Result<(), TubeError>
    where
        I: IntoIterator<Item = (Strand, Multiplicity)>,
    {
        let mut contents: BTreeMap<Molecule, Multiplicity> = BTreeMap::new();
        for (s, c) in strands {
            if c.is_zero() {
                continue;
            }
            *contents.entry(Molecule::single(s)).or_default() += c;
            self.check_cap(&self.label, contents.len())?;
        }
        self.contents = contents;
        self.next_duplex = 0;
        Ok(())
    }

    /// [`Tube::input`] with multiplicity one per listed strand.
    pub fn input_strands<I: IntoIterator<Item = Strand>>(&mut self, strands: I) -> Result<(), TubeError> {
        self.input(strands.into_iter().map(|s| (s, Multiplicity::one())))
    }

    /// `self := self + other`, `other := empty`. Duplex tags from `other` are
    /// shifted so they stay distinct from this tube's tags.
    pub fn merge(&mut self, other: &mut Tube) -> Result<(), TubeError> {
        let incoming_new = other
            .contents
            .keys()
            .filter(|m| m.duplex.is_some() || !self.contents.contains_key(*m))
            .count();
        self.check_cap(&self.label, self.contents.len() + incoming_new)?;
        let shift = self.next_duplex;
        for (mut m, c) in std::mem::take(&mut other.contents) {
            if let Some(d) = m.duplex.as_mut() {
                *d += shift;
            }
            *self.contents.entry(m).or_default() += c;
        }
        self.next_duplex += other.next_duplex;
        other.next_duplex = 0;
        Ok(())
    }

    /// Makes `dst` an exact copy of this tube's contents.
    pub fn copy_to(&self, dst: &mut Tube) -> Result<(), TubeError> {
        dst.check_cap(&dst.label, self.contents.len())?;
        dst.contents = self.contents.clone();
        dst.next_duplex = self.next_duplex;
        Ok(())
    }

    /// True iff the tube holds at least one strand.
    pub fn detect(&self) -> bool {
        !self.contents.is_empty()
    }

    /// Moves every strand containing at least one pattern (inside `region`)
    /// into `dst`, which is overwritten.
    pub fn separate(&mut self, patterns: &PatternSet, region: &MatchRegion, dst: &mut Tube) -> Result<(), TubeError> {
        let (hit, miss): (BTreeMap<_, _>, BTreeMap<_, _>) = std::mem::take(&mut self.contents)
            .into_iter()
            .partition(|(m, _)| patterns.matches(region.view(&m.strand)));
        self.contents = miss;
        if let Err(e) = dst.check_cap(&dst.label, hit.len()) {
            // Put everything back before reporting.
            self.contents.extend(hit);
            return Err(e);
        }
        dst.contents = hit;
        dst.next_duplex = self.next_duplex;
        Ok(())
    }

    /// Moves every strand of exactly `len` nucleotides into `dst`, which is
    /// overwritten.
    pub fn select(&mut self, len: usize, dst: &mut Tube) -> Result<(), TubeError> {
        let (hit, miss): (BTreeMap<_, _>, BTreeMap<_, _>) = std::mem::take(&mut self.contents)
            .into_iter()
            .partition(|(m, _)| m.strand.len() == len);
        self.contents = miss;
        if let Err(e) = dst.check_cap(&dst.label, hit.len()) {
            self.contents.extend(hit);
            return Err(e);
        }
        dst.contents = hit;
        dst.next_duplex = self.next_duplex;
        Ok(())
    }

    /// Adds every assembly the rule admits over the tube's current strands.
    /// Each assembly contributes its upper and lower strand once, tagged as
    /// duplex partners. Returns the number of assemblies formed.
    pub fn anneal(&mut self, rule: &HybridizationRule, mode: AnnealMode) -> Result<usize, TubeError> {
        let pieces: Vec<Strand> = self.strands().into_keys().filter(|s| !s.is_empty()).collect();
        let room = self.cap.saturating_sub(self.contents.len()) / 2;
        let overflow = || TubeError::CapacityExceeded {
            tube: self.label.clone(),
            cap: self.cap,
        };
        let assemblies = match mode {
            AnnealMode::Literal => anneal::literal(rule, &pieces, room)?,
            AnnealMode::Assembly => anneal::assemble(rule, &pieces, room),
        }
        .ok_or_else(overflow)?;
        let formed = assemblies.len();
        for (upper, lower) in assemblies {
            let tag = self.next_duplex;
            self.next_duplex += 1;
            self.contents.insert(
                Molecule {
                    strand: upper,
                    duplex: Some(tag),
                },
                Multiplicity::one(),
            );
            self.contents.insert(
                Molecule {
                    strand: lower,
                    duplex: Some(tag),
                },
                Multiplicity::one(),
            );
        }
        Ok(formed)
    }

    /// Splits every duplex into its two single strands.
    pub fn denature(&mut self) {
        if self.contents.keys().all(|m| m.duplex.is_none()) {
            return;
        }
        let mut out: BTreeMap<Molecule, Multiplicity> = BTreeMap::new();
        for (m, c) in std::mem::take(&mut self.contents) {
            *out.entry(Molecule::single(m.strand)).or_default() += c;
        }
        self.contents = out;
        self.next_duplex = 0;
    }

    pub fn discard(&mut self) {
        self.contents.clear();
        self.next_duplex = 0;
    }

    /// Appends `z` to every strand. Strands that become equal merge their
    /// multiplicities (only possible when tags differ, which append keeps).
    pub fn append(&mut self, z: &Strand) -> Result<(), TubeError> {
        if z.len() > APPEND_LIMIT {
            return Err(TubeError::AppendTooLong { len: z.len() });
        }
        if z.is_empty() {
            return Ok(());
        }
        let mut out: BTreeMap<Molecule, Multiplicity> = BTreeMap::new();
        for (m, c) in std::mem::take(&mut self.contents) {
            let grown = Molecule {
                strand: m.strand.join(z),
                duplex: m.duplex,
            };
            *out.entry(grown).or_default() += c;
        }
        self.contents = out;
        Ok(())
    }

    /// Lengthens every strand by `total` nucleotides through repeated
    /// [`Tube::append`] calls (see [`append_chunks`]). Returns the appended
    /// chunk lengths.
    pub fn append_long(&mut self, total: usize, filler: FillerPolicy) -> Result<Vec<usize>, TubeError> {
        let chunks = append_chunks(total);
        for &len in &chunks {
            self.append(&filler.filler(len))?;
        }
        Ok(chunks)
    }

    /// `<multiplicity> <strand>` per line, sorted by strand; the empty strand
    /// prints as `''`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (s, c) in self.strands() {
            if s.is_empty() {
                writeln!(out, "{c} ''").unwrap();
            } else {
                writeln!(out, "{c} {s}").unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> Strand {
        t.parse().unwrap()
    }

    fn n(x: u32) -> Multiplicity {
        Multiplicity::from(x)
    }

    fn tube(items: &[(&str, u32)]) -> Tube {
        let mut t = Tube::with_default_cap("T");
        t.input(items.iter().map(|&(x, c)| (s(x), n(c)))).unwrap();
        t
    }

    fn contents(t: &Tube) -> Vec<(String, u32)> {
        t.strands()
            .into_iter()
            .map(|(k, v)| (k.to_string(), u32::try_from(v).unwrap()))
            .collect()
    }

    fn owned(items: &[(&str, u32)]) -> Vec<(String, u32)> {
        items.iter().map(|&(a, b)| (a.to_string(), b)).collect()
    }

    #[test]
    fn input_and_detect() {
        let t = tube(&[("AC", 1), ("GT", 2)]);
        assert_eq!(t.distinct(), 2);
        assert_eq!(t.total(), n(3));
        assert!(t.detect());
        let e = tube(&[]);
        assert!(!e.detect());
        assert_eq!(e.total(), n(0));
    }

    #[test]
    fn input_over_capacity() {
        let mut t = Tube::new("small", 2);
        let err = t.input_strands([s("A"), s("C"), s("G")]).unwrap_err();
        assert_eq!(err, TubeError::CapacityExceeded { tube: "small".into(), cap: 2 });
    }

    #[test]
    fn merge_adds_and_empties() {
        let mut a = tube(&[("A", 1)]);
        let mut b = tube(&[("A", 2)]);
        a.merge(&mut b).unwrap();
        assert_eq!(contents(&a), owned(&[("A", 3)]));
        assert!(!b.detect());

        let mut t = tube(&[("ACG", 4)]);
        let mut empty = tube(&[]);
        t.merge(&mut empty).unwrap();
        assert_eq!(contents(&t), owned(&[("ACG", 4)]));
        let mut e2 = tube(&[]);
        let mut t2 = tube(&[("ACG", 4)]);
        e2.merge(&mut t2).unwrap();
        assert_eq!(contents(&e2), owned(&[("ACG", 4)]));
        assert!(!t2.detect());
    }

    #[test]
    fn merge_respects_capacity() {
        let mut a = Tube::new("a", 2);
        a.input_strands([s("A"), s("C")]).unwrap();
        let mut b = tube(&[("A", 1), ("G", 1)]);
        assert!(matches!(a.merge(&mut b), Err(TubeError::CapacityExceeded { .. })));
        // Nothing moved.
        assert_eq!(contents(&a), owned(&[("A", 1), ("C", 1)]));
        assert_eq!(b.distinct(), 2);
    }

    #[test]
    fn copy_then_merge_doubles() {
        let t1 = tube(&[("A", 5), ("CC", 1)]);
        let mut t2 = Tube::with_default_cap("T2");
        t1.copy_to(&mut t2).unwrap();
        assert_eq!(contents(&t2), contents(&t1));
        let mut t1 = t1;
        t1.merge(&mut t2).unwrap();
        assert_eq!(contents(&t1), owned(&[("A", 10), ("CC", 2)]));

        let empty = tube(&[]);
        let mut dst = tube(&[("A", 1)]);
        empty.copy_to(&mut dst).unwrap();
        assert!(!dst.detect());
    }

    #[test]
    fn separation_examples() {
        let mut t1 = tube(&[("ACGT", 1), ("TTTT", 2)]);
        let mut t2 = Tube::with_default_cap("T2");
        t1.separate(&PatternSet::new([s("CG")]).unwrap(), &MatchRegion::Whole, &mut t2)
            .unwrap();
        assert_eq!(contents(&t1), owned(&[("TTTT", 2)]));
        assert_eq!(contents(&t2), owned(&[("ACGT", 1)]));

        let mut t = tube(&[("ACGT", 1)]);
        let mut out = Tube::with_default_cap("O");
        t.separate(&PatternSet::new([s("GGG")]).unwrap(), &MatchRegion::Whole, &mut out)
            .unwrap();
        assert!(!out.detect());
        assert_eq!(contents(&t), owned(&[("ACGT", 1)]));
        assert_eq!(PatternSet::new(Vec::new()).unwrap_err(), TubeError::EmptyPatternSet);
    }

    #[test]
    fn separation_before_marker() {
        let marker = s("GGGG");
        let mut t = tube(&[("ACGGGGTA", 1), ("TTGGGGAC", 1)]);
        let mut out = Tube::with_default_cap("O");
        let pats = PatternSet::new([s("AC")]).unwrap();
        t.separate(&pats, &MatchRegion::BeforeMarker(marker), &mut out).unwrap();
        // "AC" after the marker does not count.
        assert_eq!(contents(&out), owned(&[("ACGGGGTA", 1)]));
        assert_eq!(contents(&t), owned(&[("TTGGGGAC", 1)]));
    }

    #[test]
    fn selection_examples() {
        let mut t1 = tube(&[("AC", 1), ("ACGT", 1)]);
        let mut t2 = Tube::with_default_cap("T2");
        t1.select(4, &mut t2).unwrap();
        assert_eq!(contents(&t2), owned(&[("ACGT", 1)]));
        assert_eq!(contents(&t1), owned(&[("AC", 1)]));
        t1.select(7, &mut t2).unwrap();
        assert!(!t2.detect());
    }

    #[test]
    fn discard_examples() {
        let mut t = tube(&[("A", 5)]);
        t.discard();
        assert!(!t.detect());
        t.discard();
        assert!(!t.detect());
    }

    #[test]
    fn append_examples() {
        let mut t = tube(&[("AC", 2)]);
        t.append(&s("GT")).unwrap();
        assert_eq!(contents(&t), owned(&[("ACGT", 2)]));
        t.append(&Strand::empty()).unwrap();
        assert_eq!(contents(&t), owned(&[("ACGT", 2)]));
        let err = t.append(&Strand::repeat(Nucleotide::C, 21)).unwrap_err();
        assert_eq!(err, TubeError::AppendTooLong { len: 21 });
        t.append(&Strand::repeat(Nucleotide::C, 20)).unwrap();
        assert_eq!(t.first_strand().unwrap().len(), 24);
    }

    #[test]
    fn append_chunking() {
        assert_eq!(append_chunks(47), vec![20, 20, 7]);
        assert_eq!(append_chunks(0), vec![0]);
        assert_eq!(append_chunks(20), vec![20]);
        assert_eq!(append_chunks(40), vec![20, 20, 0]);
        assert_eq!(append_chunks(17), vec![17]);

        let mut t = tube(&[("C", 1), ("GG", 3)]);
        let chunks = t.append_long(47, FillerPolicy::default()).unwrap();
        assert_eq!(chunks, vec![20, 20, 7]);
        let lens: Vec<usize> = t.strands().keys().map(|k| k.len()).collect();
        assert_eq!(lens, vec![48, 49]);
        let mut u = tube(&[("C", 1)]);
        u.append_long(0, FillerPolicy::default()).unwrap();
        assert_eq!(contents(&u), owned(&[("C", 1)]));
    }

    #[test]
    fn dump_format() {
        let mut t = tube(&[("GT", 2), ("AC", 1)]);
        assert_eq!(t.dump(), "1 AC\n2 GT\n");
        t.input([(Strand::empty(), n(3))]).unwrap();
        assert_eq!(t.dump(), "3 ''\n");
    }

    #[test]
    fn multiplicities_are_unbounded() {
        let mut t = tube(&[("A", 1)]);
        for _ in 0..100 {
            let mut c = Tube::with_default_cap("C");
            t.copy_to(&mut c).unwrap();
            t.merge(&mut c).unwrap();
        }
        assert_eq!(t.total(), BigUint::from(1u8) << 100);
    }

    #[test]
    fn denature_untagged_is_noop() {
        let mut t = tube(&[("AC", 2), ("G", 1)]);
        t.denature();
        assert_eq!(contents(&t), owned(&[("AC", 2), ("G", 1)]));
    }
}
