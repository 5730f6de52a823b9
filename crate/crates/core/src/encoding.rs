//! Strand codebook for an instance.
//!
//! Every vertex `i` gets a 10-mer `h_i`; its vertex code is the 20-mer
//! `h_i h_i`. The ordered pair `(i, j)` of adjacent vertices is encoded as
//! `complement(h_i h_j)`, so an edge code binds the second half of one vertex
//! code and the first half of the next. One anchor edge `(a, b)` is held back:
//! instead of its 20-mer codes the tube receives the two 10-mers
//! `complement(h_a)` and `complement(h_b)`, which cap the two ends of the
//! lower strand of an assembled cycle.
//!
//! Half-mers are drawn by seeded rejection sampling. Besides distinctness the
//! sampler enforces a comma-free condition: no 10-character window that
//! straddles two adjacent half-mers equals a half-mer or the complement of
//! one. That guarantees codeword patterns only ever match at block-aligned
//! positions, so substring tests on assembled strands mean exactly "this
//! vertex/edge is used".

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Edge, RppInstance};
use crate::strand::{Nucleotide, Strand};
use crate::tube::HybridizationRule;

/// Length of a half-mer.
pub const HALF: usize = 10;
/// Length of a vertex or edge code, and of the marker.
pub const WORD: usize = 2 * HALF;

const MAX_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodebookError {
    #[error("{0} vertices exceed the 4^10 half-mer space")]
    TooManyVertices(usize),
    #[error("rejection sampling gave up after {draws} draws while placing {what}")]
    SamplingExhausted { what: String, draws: usize },
    #[error("invalid codebook: {0}")]
    Invalid(String),
    #[error("codebook dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// Codewords for one instance. Built once, then read-only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    seed: u64,
    halves: Vec<Strand>,
    edges: Vec<Edge>,
    anchor: Option<Edge>,
    marker: Strand,
    /// complement(h_i) -> i
    cap_index: BTreeMap<Strand, usize>,
    /// edge code -> ordered pair
    edge_index: BTreeMap<Strand, (usize, usize)>,
}

/// The default anchor: smallest required edge, else smallest edge.
pub fn default_anchor(inst: &RppInstance) -> Option<Edge> {
    inst.required()
        .iter()
        .next()
        .copied()
        .or_else(|| inst.edges().next())
}

impl Codebook {
    /// Builds a codebook with the default anchor edge.
    pub fn build(inst: &RppInstance, seed: u64) -> Result<Codebook, CodebookError> {
        Codebook::build_with_anchor(inst, seed, default_anchor(inst))
    }

    /// Builds a codebook holding back `anchor` (which must be an edge of the
    /// instance, or `None` for an edgeless graph).
    pub fn build_with_anchor(
        inst: &RppInstance,
        seed: u64,
        anchor: Option<Edge>,
    ) -> Result<Codebook, CodebookError> {
        let v = inst.vertex_count();
        if v > 1 << 20 {
            return Err(CodebookError::TooManyVertices(v));
        }
        if let Some(a) = anchor {
            if inst.length(a).is_none() {
                return Err(CodebookError::Invalid(format!("anchor {a} is not an edge")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sampler = HalfSampler::default();
        for i in 1..=v {
            let mut placed = false;
            for _ in 0..MAX_DRAWS {
                let cand = random_block(&mut rng);
                if sampler.try_add(cand) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(CodebookError::SamplingExhausted {
                    what: format!("vertex {i}"),
                    draws: MAX_DRAWS,
                });
            }
        }
        let mut marker = None;
        for _ in 0..MAX_DRAWS {
            let cand: [u8; WORD] = std::array::from_fn(|_| random_base(&mut rng));
            if sampler.marker_ok(&cand) {
                marker = Some(Strand::from_bytes(&cand).expect("sampled bases"));
                break;
            }
        }
        let marker = marker.ok_or_else(|| CodebookError::SamplingExhausted {
            what: "marker".into(),
            draws: MAX_DRAWS,
        })?;
        let halves = sampler
            .order
            .iter()
            .map(|b| Strand::from_bytes(b).expect("sampled bases"))
            .collect();
        Codebook::from_parts(seed, halves, inst.edges().collect(), anchor, marker)
    }

    /// Assembles a codebook from explicit codewords, checking the structural
    /// invariants (lengths, distinctness, anchor membership). The comma-free
    /// condition is reported separately by [`Codebook::separation_violations`].
    pub fn from_parts(
        seed: u64,
        halves: Vec<Strand>,
        edges: Vec<Edge>,
        anchor: Option<Edge>,
        marker: Strand,
    ) -> Result<Codebook, CodebookError> {
        let v = halves.len();
        if let Some(bad) = halves.iter().position(|h| h.len() != HALF) {
            return Err(CodebookError::Invalid(format!(
                "half-mer of vertex {} has length {}",
                bad + 1,
                halves[bad].len()
            )));
        }
        let mut blocks = HashSet::new();
        for h in &halves {
            if !blocks.insert(h.clone()) || !blocks.insert(h.complement()) {
                return Err(CodebookError::Invalid(format!(
                    "half-mer {h} collides with another half-mer or complement"
                )));
            }
        }
        if marker.len() != WORD {
            return Err(CodebookError::Invalid(format!("marker has length {}", marker.len())));
        }
        for e in &edges {
            if e.lo == 0 || e.hi > v || e.lo >= e.hi {
                return Err(CodebookError::Invalid(format!("edge {e} out of range")));
            }
        }
        let mut edges = edges;
        edges.sort();
        edges.dedup();
        if let Some(a) = anchor {
            if edges.binary_search(&a).is_err() {
                return Err(CodebookError::Invalid(format!("anchor {a} is not an edge")));
            }
        }
        let cap_index = halves
            .iter()
            .enumerate()
            .map(|(i, h)| (h.complement(), i + 1))
            .collect();
        let mut cb = Codebook {
            seed,
            halves,
            edges,
            anchor,
            marker,
            cap_index,
            edge_index: BTreeMap::new(),
        };
        let mut edge_index = BTreeMap::new();
        for e in cb.edges.clone() {
            edge_index.insert(cb.edge_code(e.lo, e.hi), (e.lo, e.hi));
            edge_index.insert(cb.edge_code(e.hi, e.lo), (e.hi, e.lo));
        }
        cb.edge_index = edge_index;
        Ok(cb)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vertex_count(&self) -> usize {
        self.halves.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The anchor edge `e'`, excluded from Q and split into R.
    pub fn anchor(&self) -> Option<Edge> {
        self.anchor
    }

    pub fn marker(&self) -> &Strand {
        &self.marker
    }

    pub fn half(&self, i: usize) -> &Strand {
        &self.halves[i - 1]
    }

    pub fn halves(&self) -> &[Strand] {
        &self.halves
    }

    /// `h_i h_i`.
    pub fn vertex_code(&self, i: usize) -> Strand {
        self.half(i).join(self.half(i))
    }

    /// `complement(h_i h_j)`.
    pub fn edge_code(&self, i: usize, j: usize) -> Strand {
        self.half(i).join(self.half(j)).complement()
    }

    /// Both orientations of an edge's code.
    pub fn edge_patterns(&self, e: Edge) -> [Strand; 2] {
        [self.edge_code(e.lo, e.hi), self.edge_code(e.hi, e.lo)]
    }

    /// `complement(vertex_code(i))`: the trace vertex `i` leaves on a lower
    /// strand.
    pub fn vertex_pattern(&self, i: usize) -> Strand {
        self.vertex_code(i).complement()
    }

    /// Set P: every vertex code once.
    pub fn tube_p(&self) -> Vec<Strand> {
        (1..=self.vertex_count()).map(|i| self.vertex_code(i)).collect()
    }

    /// Set Q: both orientations of every edge code except the anchor's.
    pub fn tube_q(&self) -> Vec<Strand> {
        let mut out = Vec::with_capacity(2 * self.edges.len());
        for &e in &self.edges {
            if Some(e) == self.anchor {
                continue;
            }
            out.extend(self.edge_patterns(e));
        }
        out
    }

    /// Set R: `complement(h_a)`, `complement(h_b)` for anchor `(a, b)`, `a < b`.
    /// Empty when there is no anchor.
    pub fn tube_r(&self) -> Vec<Strand> {
        match self.anchor {
            Some(e) => vec![self.half(e.lo).complement(), self.half(e.hi).complement()],
            None => Vec::new(),
        }
    }

    /// Annealing rule: vertex codes as upper units, edge codes as bridges, R
    /// as end caps, assemblies up to `20 * v` nucleotides.
    pub fn hybridization_rule(&self) -> HybridizationRule {
        let units = (1..=self.vertex_count()).map(|i| self.vertex_code(i)).collect();
        let bridges = self.edge_index.keys().cloned().collect();
        let caps = self.anchor.map(|e| {
            (
                self.half(e.lo).complement(),
                self.half(e.hi).complement(),
            )
        });
        HybridizationRule::new(HALF, WORD * self.vertex_count(), units, bridges, caps)
    }

    /// Prefix of `s` before the first marker occurrence (all of `s` if none).
    pub fn pre_marker<'a>(&self, s: &'a Strand) -> &'a [u8] {
        match s.find(&self.marker) {
            Some(at) => &s.as_bytes()[..at],
            None => s.as_bytes(),
        }
    }

    /// Parses a lower (edge-side) walk strand
    /// `complement(h_x1) . code(x1,x2) ... code(x_{k-1},x_k) . complement(h_xk)`
    /// where `{x1, xk}` is the anchor. Returns `x1..xk`; the closing step
    /// `xk -> x1` is the anchor edge. Anything after the marker is ignored.
    pub fn decode_walk(&self, s: &Strand) -> Option<Vec<usize>> {
        let anchor = self.anchor?;
        let body = self.pre_marker(s);
        if body.len() < WORD || !body.len().is_multiple_of(WORD) {
            return None;
        }
        let lookup_cap = |bytes: &[u8]| {
            let key = Strand::from_bytes(bytes).ok()?;
            self.cap_index.get(&key).copied()
        };
        let first = lookup_cap(&body[..HALF])?;
        let last = lookup_cap(&body[body.len() - HALF..])?;
        let mut walk = vec![first];
        let mut at = HALF;
        while at + WORD <= body.len() - HALF {
            let key = Strand::from_bytes(&body[at..at + WORD]).ok()?;
            let &(i, j) = self.edge_index.get(&key)?;
            if i != *walk.last().unwrap() {
                return None;
            }
            walk.push(j);
            at += WORD;
        }
        if *walk.last().unwrap() != last || first == last {
            return None;
        }
        if Edge::new(first, last) != anchor {
            return None;
        }
        Some(walk)
    }

    /// Lower strand for a walk `x1..xk` closed by the anchor edge. Inverse of
    /// [`Codebook::decode_walk`]; `None` if the walk does not start and end at
    /// the two anchor endpoints.
    pub fn encode_walk(&self, walk: &[usize]) -> Option<Strand> {
        let anchor = self.anchor?;
        let (&first, &last) = (walk.first()?, walk.last()?);
        if first == last || Edge::new(first, last) != anchor {
            return None;
        }
        let mut parts = vec![self.half(first).complement()];
        for w in walk.windows(2) {
            parts.push(self.edge_code(w[0], w[1]));
        }
        parts.push(self.half(last).complement());
        Some(Strand::concat(parts.iter()))
    }

    /// Upper strand for a walk: the vertex codes in order.
    pub fn encode_upper(&self, walk: &[usize]) -> Strand {
        let parts: Vec<Strand> = walk.iter().map(|&x| self.vertex_code(x)).collect();
        Strand::concat(parts.iter())
    }

    /// Violations of the comma-free and marker conditions. Empty for every
    /// codebook produced by [`Codebook::build`].
    pub fn separation_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let blocks: HashSet<&[u8]> = self
            .halves
            .iter()
            .map(|h| h.as_bytes())
            .chain(self.cap_index.keys().map(|c| c.as_bytes()))
            .collect();
        for (x, hx) in self.halves.iter().enumerate() {
            for (y, hy) in self.halves.iter().enumerate() {
                let pair = hx.join(hy);
                for k in 1..HALF {
                    if blocks.contains(&pair[k..k + HALF]) {
                        out.push(format!(
                            "window at shift {k} of h{}h{} is a codeword block",
                            x + 1,
                            y + 1
                        ));
                    }
                }
            }
        }
        for k in 0..=HALF {
            if blocks.contains(&self.marker[k..k + HALF]) {
                out.push(format!("marker window at offset {k} is a codeword block"));
            }
        }
        if has_border(&self.marker) {
            out.push("marker overlaps itself".into());
        }
        out
    }

    /// Deterministic text dump: `seed`, `vertex i`, `edge (i,j)`, `excluded`,
    /// `marker` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "seed: {}", self.seed).unwrap();
        for i in 1..=self.vertex_count() {
            writeln!(out, "vertex {i}: {}", self.vertex_code(i)).unwrap();
        }
        let mut ordered: Vec<(usize, usize)> = self
            .edges
            .iter()
            .flat_map(|e| [(e.lo, e.hi), (e.hi, e.lo)])
            .collect();
        ordered.sort();
        for (i, j) in ordered {
            writeln!(out, "edge ({i},{j}): {}", self.edge_code(i, j)).unwrap();
        }
        match self.anchor {
            Some(e) => writeln!(out, "excluded: ({},{})", e.lo, e.hi).unwrap(),
            None => writeln!(out, "excluded: none").unwrap(),
        }
        writeln!(out, "marker: {}", self.marker).unwrap();
        out
    }

    /// Parses a [`Codebook::dump`]. Blank lines and `#` comments are ignored.
    pub fn parse_dump(text: &str) -> Result<Codebook, CodebookError> {
        let mut seed = 0;
        let mut vertices: Vec<Strand> = Vec::new();
        let mut codes: BTreeMap<(usize, usize), Strand> = BTreeMap::new();
        let mut anchor: Option<Option<Edge>> = None;
        let mut marker = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| CodebookError::Dump {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| err("expected `key: value`".into()))?;
            let value = value.trim();
            let strand = |v: &str| v.parse::<Strand>().map_err(|e| err(e.to_string()));
            if key == "seed" {
                seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?;
            } else if let Some(rest) = key.strip_prefix("vertex ") {
                let i: usize = rest.trim().parse().map_err(|_| err(format!("bad vertex {rest:?}")))?;
                if i != vertices.len() + 1 {
                    return Err(err(format!("vertex {i} out of order")));
                }
                let code = strand(value)?;
                if code.len() != WORD || code[..HALF] != code[HALF..] {
                    return Err(err(format!("vertex {i} code must be two identical 10-mers")));
                }
                vertices.push(code.slice(0, HALF));
            } else if let Some(rest) = key.strip_prefix("edge ") {
                let pair = parse_pair(rest).ok_or_else(|| err(format!("bad edge {rest:?}")))?;
                codes.insert(pair, strand(value)?);
            } else if key == "excluded" {
                anchor = Some(if value == "none" {
                    None
                } else {
                    let (a, b) = parse_pair(value).ok_or_else(|| err(format!("bad edge {value:?}")))?;
                    if a == b {
                        return Err(err("excluded edge is a self-loop".into()));
                    }
                    Some(Edge::new(a, b))
                });
            } else if key == "marker" {
                marker = Some(strand(value)?);
            } else {
                return Err(err(format!("unknown key {key:?}")));
            }
        }
        let eof = |message: &str| CodebookError::Dump {
            line: text.lines().count(),
            message: message.into(),
        };
        let anchor = anchor.ok_or_else(|| eof("missing `excluded` line"))?;
        let marker = marker.ok_or_else(|| eof("missing `marker` line"))?;
        let mut edges = Vec::new();
        for &(i, j) in codes.keys() {
            if i == j || i == 0 || j == 0 || i > vertices.len() || j > vertices.len() {
                return Err(CodebookError::Invalid(format!("edge ({i},{j}) out of range")));
            }
            if !codes.contains_key(&(j, i)) {
                return Err(CodebookError::Invalid(format!("edge ({i},{j}) lacks its reverse orientation")));
            }
            if i < j {
                edges.push(Edge::new(i, j));
            }
        }
        let cb = Codebook::from_parts(seed, vertices, edges, anchor, marker)?;
        for (&(i, j), code) in &codes {
            if *code != cb.edge_code(i, j) {
                return Err(CodebookError::Invalid(format!(
                    "edge ({i},{j}) code is not the complement of its vertex halves"
                )));
            }
        }
        Ok(cb)
    }
}

fn parse_pair(text: &str) -> Option<(usize, usize)> {
    let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn random_base(rng: &mut ChaCha8Rng) -> u8 {
    Nucleotide::ALL[rng.gen_range(0..4)].as_byte()
}

fn random_block(rng: &mut ChaCha8Rng) -> [u8; HALF] {
    std::array::from_fn(|_| random_base(rng))
}

fn complement_block(b: &[u8; HALF]) -> [u8; HALF] {
    std::array::from_fn(|k| match b[k] {
        b'A' => b'T',
        b'T' => b'A',
        b'C' => b'G',
        _ => b'C',
    })
}

/// True if some proper prefix of `s` is also a suffix.
fn has_border(s: &[u8]) -> bool {
    (1..s.len()).any(|k| s[..k] == s[s.len() - k..])
}

/// Incremental comma-free half-mer set.
#[derive(Default)]
struct HalfSampler {
    order: Vec<[u8; HALF]>,
    /// Half-mers and their complements.
    blocks: HashSet<[u8; HALF]>,
    /// Every straddling window of every ordered pair of accepted half-mers.
    windows: HashSet<[u8; HALF]>,
}

impl HalfSampler {
    fn straddles(x: &[u8; HALF], y: &[u8; HALF]) -> impl Iterator<Item = [u8; HALF]> + 'static {
        let mut pair = [0u8; WORD];
        pair[..HALF].copy_from_slice(x);
        pair[HALF..].copy_from_slice(y);
        (1..HALF).map(move |k| std::array::from_fn(|t| pair[k + t]))
    }

    fn try_add(&mut self, h: [u8; HALF]) -> bool {
        let hc = complement_block(&h);
        if self.blocks.contains(&h) || self.blocks.contains(&hc) {
            return false;
        }
        if self.windows.contains(&h) || self.windows.contains(&hc) {
            return false;
        }
        let forbidden = |w: &[u8; HALF], blocks: &HashSet<[u8; HALF]>| *w == h || *w == hc || blocks.contains(w);
        let mut fresh = Vec::new();
        for w in Self::straddles(&h, &h) {
            if forbidden(&w, &self.blocks) {
                return false;
            }
            fresh.push(w);
        }
        for y in &self.order {
            for w in Self::straddles(&h, y).chain(Self::straddles(y, &h)) {
                if forbidden(&w, &self.blocks) {
                    return false;
                }
                fresh.push(w);
            }
        }
        self.blocks.insert(h);
        self.blocks.insert(hc);
        self.windows.extend(fresh);
        self.order.push(h);
        true
    }

    fn marker_ok(&self, m: &[u8; WORD]) -> bool {
        (0..=HALF).all(|k| {
            let w: [u8; HALF] = std::array::from_fn(|t| m[k + t]);
            !self.blocks.contains(&w)
        }) && !has_border(m)
    }
}
