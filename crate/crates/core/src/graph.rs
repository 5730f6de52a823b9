//! Rural Postman instances: a simple undirected graph with edge lengths, a
//! required edge subset and a budget.
//!
//! The decision question answered everywhere in this crate is whether a
//! Hamiltonian cycle exists that uses every required edge and whose total
//! length is at most the budget. Note that this is not the classical
//! arc-routing formulation, where the postman walks a closed route covering
//! the required edges and may revisit vertices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An undirected edge, stored with `lo < hi`. Vertices are 1-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
}

impl Edge {
    /// Normalizes the endpoint order. Panics on a self-loop; use
    /// [`RppInstance::validate`] for untrusted input.
    pub fn new(a: usize, b: usize) -> Edge {
        assert_ne!(a, b, "self-loop");
        Edge {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    pub fn touches(&self, x: usize) -> bool {
        self.lo == x || self.hi == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("instance has no vertices")]
    NoVertices,
    #[error("edge ({u},{v}) references a vertex outside 1..={n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge ({u},{u}) is a self-loop")]
    SelfLoop { u: usize },
    #[error("edge {0} is listed more than once")]
    DuplicateEdge(Edge),
    #[error("required edge ({0},{1}) is not an edge of the graph")]
    RequiredNotInEdges(usize, usize),
    #[error("graph is disconnected: vertex {unreached} is unreachable from vertex 1")]
    Disconnected { unreached: usize },
}

/// One edge record of the JSON instance format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEdge {
    pub u: usize,
    pub v: usize,
    #[serde(default = "default_len")]
    pub len: u64,
    #[serde(default)]
    pub required: bool,
}

fn default_len() -> u64 {
    1
}

/// The JSON instance format, before validation.
///
/// ```json
/// {"vertices": 3, "edges": [{"u": 1, "v": 2, "len": 3, "required": true}], "budget": 7}
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub vertices: usize,
    pub edges: Vec<RawEdge>,
    pub budget: u64,
}

impl RawInstance {
    pub fn from_json(text: &str) -> Result<RawInstance, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A validated instance. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RppInstance {
    vertices: usize,
    lengths: BTreeMap<Edge, u64>,
    required: BTreeSet<Edge>,
    budget: u64,
}

impl RppInstance {
    /// Validates edges given as `(u, v, len)` plus a separate required list.
    pub fn new(
        vertices: usize,
        edges: &[(usize, usize, u64)],
        required: &[(usize, usize)],
        budget: u64,
    ) -> Result<RppInstance, ValidationError> {
        if vertices == 0 {
            return Err(ValidationError::NoVertices);
        }
        let mut lengths = BTreeMap::new();
        for &(u, v, len) in edges {
            if u == 0 || v == 0 || u > vertices || v > vertices {
                return Err(ValidationError::VertexOutOfRange { u, v, n: vertices });
            }
            if u == v {
                return Err(ValidationError::SelfLoop { u });
            }
            let e = Edge::new(u, v);
            if lengths.insert(e, len).is_some() {
                return Err(ValidationError::DuplicateEdge(e));
            }
        }
        let mut req = BTreeSet::new();
        for &(u, v) in required {
            if u == v {
                return Err(ValidationError::RequiredNotInEdges(u, v));
            }
            let e = Edge::new(u, v);
            if !lengths.contains_key(&e) {
                return Err(ValidationError::RequiredNotInEdges(u, v));
            }
            req.insert(e);
        }
        let inst = RppInstance {
            vertices,
            lengths,
            required: req,
            budget,
        };
        if let Some(unreached) = inst.first_unreachable() {
            return Err(ValidationError::Disconnected { unreached });
        }
        Ok(inst)
    }

    /// Validates a parsed JSON instance.
    pub fn validate(raw: &RawInstance) -> Result<RppInstance, ValidationError> {
        let edges: Vec<(usize, usize, u64)> = raw.edges.iter().map(|e| (e.u, e.v, e.len)).collect();
        let required: Vec<(usize, usize)> = raw
            .edges
            .iter()
            .filter(|e| e.required)
            .map(|e| (e.u, e.v))
            .collect();
        RppInstance::new(raw.vertices, &edges, &required, raw.budget)
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            vertices: self.vertices,
            edges: self
                .lengths
                .iter()
                .map(|(e, &len)| RawEdge {
                    u: e.lo,
                    v: e.hi,
                    len,
                    required: self.required.contains(e),
                })
                .collect(),
            budget: self.budget,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        1..=self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.lengths.len()
    }

    /// Edges in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.lengths.keys().copied()
    }

    pub fn length(&self, e: Edge) -> Option<u64> {
        self.lengths.get(&e).copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.lengths.contains_key(&Edge::new(a, b))
    }

    pub fn required(&self) -> &BTreeSet<Edge> {
        &self.required
    }

    pub fn is_required(&self, e: Edge) -> bool {
        self.required.contains(&e)
    }

    /// Edges of `E - E'`, ascending.
    pub fn free_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges().filter(|e| !self.required.contains(e))
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Same graph and required set, different budget.
    pub fn with_budget(&self, budget: u64) -> RppInstance {
        RppInstance {
            budget,
            ..self.clone()
        }
    }

    /// Same graph and budget, different required set. Panics if a required
    /// edge is missing from the graph.
    pub fn with_required<I: IntoIterator<Item = Edge>>(&self, required: I) -> RppInstance {
        let required: BTreeSet<Edge> = required.into_iter().collect();
        assert!(required.iter().all(|e| self.lengths.contains_key(e)));
        RppInstance {
            required,
            ..self.clone()
        }
    }

    /// Neighbors of `x`, ascending.
    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .lengths
            .keys()
            .filter(|e| e.touches(x))
            .map(|e| e.other(x))
            .collect();
        out.sort_unstable();
        out
    }

    /// Adjacency lists indexed by vertex (index 0 unused).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices + 1];
        for e in self.lengths.keys() {
            adj[e.lo].push(e.hi);
            adj[e.hi].push(e.lo);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// `c = B - sum of required lengths`; negative when the required edges
    /// alone already exceed the budget.
    pub fn free_budget(&self) -> i128 {
        let required: i128 = self
            .required
            .iter()
            .map(|e| self.lengths[e] as i128)
            .sum();
        self.budget as i128 - required
    }

    /// Total length of a closed vertex sequence, `None` if a step is not an edge.
    pub fn cycle_cost(&self, cycle: &[usize]) -> Option<u64> {
        let n = cycle.len();
        let mut total = 0u64;
        for i in 0..n {
            let (a, b) = (cycle[i], cycle[(i + 1) % n]);
            if a == b {
                return None;
            }
            total += self.length(Edge::new(a, b))?;
        }
        Some(total)
    }

    /// True iff `cycle` visits every vertex exactly once, is closed in the
    /// graph, and uses every required edge.
    pub fn is_rural_postman_circuit(&self, cycle: &[usize]) -> bool {
        if cycle.len() != self.vertices || self.vertices < 3 {
            return false;
        }
        let distinct: BTreeSet<usize> = cycle.iter().copied().collect();
        if distinct.len() != self.vertices || distinct.iter().any(|&x| x == 0 || x > self.vertices) {
            return false;
        }
        if self.cycle_cost(cycle).is_none() {
            return false;
        }
        let used = cycle_edges(cycle);
        self.required.iter().all(|e| used.contains(e))
    }

    fn first_unreachable(&self) -> Option<usize> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertices + 1];
        let mut stack = vec![1];
        seen[1] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (1..=self.vertices).find(|&x| !seen[x])
    }

    /// Relabels vertices in depth-first discovery order from `root`, visiting
    /// neighbors in ascending label order. Returns the relabeled instance and
    /// the mapping between the two labelings.
    pub fn dfs_renumber(&self, root: usize) -> (RppInstance, Relabeling) {
        assert!((1..=self.vertices).contains(&root), "root {root} out of range");
        let adj = self.adjacency();
        let mut order = Vec::with_capacity(self.vertices);
        let mut seen = vec![false; self.vertices + 1];
        // Explicit stack of (vertex, next neighbor index) to get preorder
        // identical to the recursive formulation.
        let mut stack = vec![(root, 0usize)];
        seen[root] = true;
        order.push(root);
        while let Some(top) = stack.last_mut() {
            let (x, idx) = *top;
            if idx < adj[x].len() {
                top.1 += 1;
                let y = adj[x][idx];
                if !seen[y] {
                    seen[y] = true;
                    order.push(y);
                    stack.push((y, 0));
                }
            } else {
                stack.pop();
            }
        }
        // Validated instances are connected; anything left over keeps its
        // relative order at the end.
        order.extend((1..=self.vertices).filter(|&x| !seen[x]));
        let relabel = Relabeling::from_order(&order);
        (relabel.apply(self), relabel)
    }
}

/// Undirected edges used by a closed vertex sequence.
pub fn cycle_edges(cycle: &[usize]) -> BTreeSet<Edge> {
    let n = cycle.len();
    (0..n)
        .filter(|&i| cycle[i] != cycle[(i + 1) % n])
        .map(|i| Edge::new(cycle[i], cycle[(i + 1) % n]))
        .collect()
}

/// Start at vertex 1 (or the smallest label) and orient so the second vertex
/// is smaller than the last.
pub fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    if cycle.len() < 3 {
        return cycle.to_vec();
    }
    let n = cycle.len();
    let start = (0..n).min_by_key(|&i| cycle[i]).unwrap();
    let mut fwd: Vec<usize> = (0..n).map(|k| cycle[(start + k) % n]).collect();
    if fwd[1] > fwd[n - 1] {
        fwd[1..].reverse();
    }
    fwd
}

/// A vertex permutation between original and renumbered labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    /// `to_new[old]`, index 0 unused.
    to_new: Vec<usize>,
    /// `to_old[new]`, index 0 unused.
    to_old: Vec<usize>,
}

impl Relabeling {
    /// `order[k]` is the original vertex that receives label `k + 1`.
    pub fn from_order(order: &[usize]) -> Relabeling {
        let n = order.len();
        let mut to_new = vec![0; n + 1];
        let mut to_old = vec![0; n + 1];
        for (k, &old) in order.iter().enumerate() {
            to_new[old] = k + 1;
            to_old[k + 1] = old;
        }
        Relabeling { to_new, to_old }
    }

    pub fn identity(n: usize) -> Relabeling {
        Relabeling::from_order(&(1..=n).collect::<Vec<_>>())
    }

    pub fn is_identity(&self) -> bool {
        self.to_new.iter().enumerate().skip(1).all(|(i, &x)| i == x)
    }

    pub fn new_label(&self, old: usize) -> usize {
        self.to_new[old]
    }

    pub fn old_label(&self, new: usize) -> usize {
        self.to_old[new]
    }

    /// Original labels in discovery order.
    pub fn discovery_order(&self) -> &[usize] {
        &self.to_old[1..]
    }

    pub fn apply(&self, inst: &RppInstance) -> RppInstance {
        let map = |e: &Edge| Edge::new(self.to_new[e.lo], self.to_new[e.hi]);
        RppInstance {
            vertices: inst.vertices,
            lengths: inst.lengths.iter().map(|(e, &l)| (map(e), l)).collect(),
            required: inst.required.iter().map(map).collect(),
            budget: inst.budget,
        }
    }

    pub fn invert(&self) -> Relabeling {
        Relabeling {
            to_new: self.to_old.clone(),
            to_old: self.to_new.clone(),
        }
    }

    /// Maps a vertex sequence in new labels back to original labels.
    pub fn to_original(&self, seq: &[usize]) -> Vec<usize> {
        seq.iter().map(|&x| self.to_old[x]).collect()
    }
}
