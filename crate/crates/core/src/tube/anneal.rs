//! Annealing: forming blunt-ended duplexes out of a tube's single strands.
//!
//! An assembly is an upper chain of strands and a lower chain of strands of
//! equal total length, position-wise complementary, whose internal nicks
//! never coincide (a duplex with nicks at the same offset on both strands
//! would be two separate duplexes). The lower chain must open with one end
//! cap of the rule and close with the other.
//!
//! Two enumerators produce the same assembly sets:
//!
//! * [`literal`] searches over every strand in the tube as a candidate piece
//!   on either side, checking complementarity base by base.
//! * [`assemble`] only considers the rule's unit words as upper pieces and its
//!   bridge words as interior lower pieces, walking unit-to-unit joins.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::strand::Strand;

use super::TubeError;

/// Span limit for [`AnnealMode::Literal`]: four 20-mer units.
pub const LITERAL_MAX_SPAN: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AnnealMode {
    /// Exhaustive nucleotide-level search. Small inputs only.
    Literal,
    /// Enumerates walks over the rule's joins.
    #[default]
    Assembly,
}

/// Which strands may hybridize with which.
///
/// Units are upper words of `2 * half_length` nucleotides. A bridge is a lower
/// word `complement(x . y)` where `x` is the right half of one unit and `y` the
/// left half of the next. Caps are lower words of `half_length` nucleotides
/// that close the lower chain at either end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HybridizationRule {
    half_length: usize,
    max_span: usize,
    units: BTreeSet<Strand>,
    bridges: BTreeSet<Strand>,
    caps: Option<(Strand, Strand)>,
}

impl HybridizationRule {
    /// Panics if a unit or bridge is not `2 * half_length` long or a cap not
    /// `half_length` long.
    pub fn new(
        half_length: usize,
        max_span: usize,
        units: Vec<Strand>,
        bridges: Vec<Strand>,
        caps: Option<(Strand, Strand)>,
    ) -> HybridizationRule {
        assert!(half_length > 0);
        let word = 2 * half_length;
        assert!(units.iter().all(|u| u.len() == word), "unit length");
        assert!(bridges.iter().all(|b| b.len() == word), "bridge length");
        if let Some((a, b)) = &caps {
            assert!(a.len() == half_length && b.len() == half_length, "cap length");
        }
        HybridizationRule {
            half_length,
            max_span,
            units: units.into_iter().collect(),
            bridges: bridges.into_iter().collect(),
            caps,
        }
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    /// Longest assembly (in nucleotides) the rule forms.
    pub fn max_span(&self) -> usize {
        self.max_span
    }

    pub fn with_max_span(mut self, max_span: usize) -> HybridizationRule {
        self.max_span = max_span;
        self
    }

    pub fn caps(&self) -> Option<(&Strand, &Strand)> {
        self.caps.as_ref().map(|(a, b)| (a, b))
    }

    /// Joins `(from unit, bridge, to unit)` among the given units and bridges:
    /// the bridge complements the right half of `from` followed by the left
    /// half of `to`.
    pub fn joins<'a>(
        &self,
        units: &[&'a Strand],
        bridges: &[&'a Strand],
    ) -> Vec<(usize, &'a Strand, usize)> {
        let h = self.half_length;
        let by_left: HashMap<&[u8], Vec<usize>> = units.iter().enumerate().fold(HashMap::new(), |mut m, (i, u)| {
            m.entry(&u.as_bytes()[..h]).or_default().push(i);
            m
        });
        let mut out = Vec::new();
        for &b in bridges {
            let target = b.complement();
            for (i, u) in units.iter().enumerate() {
                if u.as_bytes()[h..] != target.as_bytes()[..h] {
                    continue;
                }
                if let Some(next) = by_left.get(&target.as_bytes()[h..]) {
                    for &j in next {
                        out.push((i, b, j));
                    }
                }
            }
        }
        out.sort();
        out
    }
}

type Assemblies = BTreeSet<(Strand, Strand)>;

#[inline]
fn pairs(a: u8, b: u8) -> bool {
    matches!((a, b), (b'A', b'T') | (b'T', b'A') | (b'C', b'G') | (b'G', b'C'))
}

/// Walk-based enumeration. `None` if more than `limit` assemblies form.
pub(super) fn assemble(rule: &HybridizationRule, pieces: &[Strand], limit: usize) -> Option<Assemblies> {
    let Some((cap_a, cap_b)) = rule.caps.as_ref() else {
        return Some(Assemblies::new());
    };
    let present: HashSet<&Strand> = pieces.iter().collect();
    if !present.contains(cap_a) || !present.contains(cap_b) {
        return Some(Assemblies::new());
    }
    let h = rule.half_length;
    let units: Vec<&Strand> = rule.units.iter().filter(|u| present.contains(u)).collect();
    let bridges: Vec<&Strand> = rule.bridges.iter().filter(|b| present.contains(b)).collect();
    let mut next: Vec<Vec<(&Strand, usize)>> = vec![Vec::new(); units.len()];
    for (i, b, j) in rule.joins(&units, &bridges) {
        next[i].push((b, j));
    }
    let caps = [cap_a, cap_b];
    let opens = |u: &Strand, cap: &Strand| u.as_bytes()[..h].iter().zip(cap.as_bytes()).all(|(x, y)| pairs(*x, *y));
    let closes = |u: &Strand, cap: &Strand| u.as_bytes()[h..].iter().zip(cap.as_bytes()).all(|(x, y)| pairs(*x, *y));
    let max_units = rule.max_span / (2 * h);

    struct Walk<'a> {
        units: Vec<usize>,
        bridges: Vec<&'a Strand>,
    }
    let mut out = Assemblies::new();
    for (start_cap, end_cap) in [(0, 1), (1, 0)] {
        for s in 0..units.len() {
            if !opens(units[s], caps[start_cap]) {
                continue;
            }
            let mut walk = Walk {
                units: vec![s],
                bridges: Vec::new(),
            };
            // Depth-first over joins; the stack holds the next join index to
            // try at each depth.
            let mut cursor = vec![0usize];
            loop {
                let depth = cursor.len();
                let cur = *walk.units.last().unwrap();
                if cursor[depth - 1] == 0 && closes(units[cur], caps[end_cap]) {
                    let upper = Strand::concat(walk.units.iter().map(|&i| units[i]));
                    let lower = Strand::concat(
                        std::iter::once(caps[start_cap])
                            .chain(walk.bridges.iter().copied())
                            .chain(std::iter::once(caps[end_cap])),
                    );
                    out.insert((upper, lower));
                    if out.len() > limit {
                        return None;
                    }
                }
                let k = cursor[depth - 1];
                if depth < max_units && k < next[cur].len() {
                    cursor[depth - 1] += 1;
                    let (b, j) = next[cur][k];
                    walk.units.push(j);
                    walk.bridges.push(b);
                    cursor.push(0);
                } else {
                    cursor.pop();
                    if cursor.is_empty() {
                        break;
                    }
                    walk.units.pop();
                    walk.bridges.pop();
                }
            }
        }
    }
    Some(out)
}

struct Search<'a> {
    pieces: &'a [Strand],
    caps: [&'a Strand; 2],
    max_span: usize,
    limit: usize,
    upper: Vec<u8>,
    lower: Vec<u8>,
    upper_cuts: Vec<usize>,
    lower_cuts: Vec<usize>,
    first_cap: Option<usize>,
    last_lower: Option<usize>,
    found: BTreeMap<(Vec<u8>, Vec<u8>), ()>,
}

impl Search<'_> {
    fn run(&mut self) -> bool {
        let (u, l) = (self.upper.len(), self.lower.len());
        if u == l && u > 0 {
            let first = self.first_cap.expect("lower chain starts with a cap");
            let last = &self.pieces[self.last_lower.expect("non-empty lower chain")];
            if last == self.caps[1 - first] {
                self.found.insert((self.upper.clone(), self.lower.clone()), ());
                if self.found.len() > self.limit {
                    return false;
                }
            }
            return true;
        }
        if u <= l {
            for idx in 0..self.pieces.len() {
                let p = self.pieces[idx].as_bytes();
                let end = u + p.len();
                if end > self.max_span || (u > 0 && self.lower_cuts.contains(&u)) {
                    continue;
                }
                let overlap = end.min(l) - u;
                if !(0..overlap).all(|k| pairs(p[k], self.lower[u + k])) {
                    continue;
                }
                if u > 0 {
                    self.upper_cuts.push(u);
                }
                self.upper.extend_from_slice(p);
                let ok = self.run();
                self.upper.truncate(u);
                if u > 0 {
                    self.upper_cuts.pop();
                }
                if !ok {
                    return false;
                }
            }
        } else {
            for idx in 0..self.pieces.len() {
                let piece = &self.pieces[idx];
                let p = piece.as_bytes();
                let end = l + p.len();
                if end > self.max_span || (l > 0 && self.upper_cuts.contains(&l)) {
                    continue;
                }
                let saved_first = self.first_cap;
                if l == 0 {
                    match self.caps.iter().position(|c| *c == piece) {
                        Some(which) => self.first_cap = Some(which),
                        None => continue,
                    }
                }
                let overlap = end.min(u) - l;
                if !(0..overlap).all(|k| pairs(self.upper[l + k], p[k])) {
                    self.first_cap = saved_first;
                    continue;
                }
                if l > 0 {
                    self.lower_cuts.push(l);
                }
                let saved_last = self.last_lower.replace(idx);
                self.lower.extend_from_slice(p);
                let ok = self.run();
                self.lower.truncate(l);
                self.last_lower = saved_last;
                self.first_cap = saved_first;
                if l > 0 {
                    self.lower_cuts.pop();
                }
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

/// Exhaustive base-level search over all pieces. `Ok(None)` if more than
/// `limit` assemblies form.
pub(super) fn literal(
    rule: &HybridizationRule,
    pieces: &[Strand],
    limit: usize,
) -> Result<Option<Assemblies>, TubeError> {
    if rule.max_span > LITERAL_MAX_SPAN {
        return Err(TubeError::LiteralSpanTooLarge {
            span: rule.max_span,
            limit: LITERAL_MAX_SPAN,
        });
    }
    let Some((cap_a, cap_b)) = rule.caps.as_ref() else {
        return Ok(Some(Assemblies::new()));
    };
    let mut search = Search {
        pieces,
        caps: [cap_a, cap_b],
        max_span: rule.max_span,
        limit,
        upper: Vec::new(),
        lower: Vec::new(),
        upper_cuts: Vec::new(),
        lower_cuts: Vec::new(),
        first_cap: None,
        last_lower: None,
        found: BTreeMap::new(),
    };
    if !search.run() {
        return Ok(None);
    }
    Ok(Some(
        search
            .found
            .into_keys()
            .map(|(u, l)| {
                (
                    Strand::from_bytes(&u).expect("pieces are strands"),
                    Strand::from_bytes(&l).expect("pieces are strands"),
                )
            })
            .collect(),
    ))
}
