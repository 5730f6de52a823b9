//! Exhaustive reference solver.
//!
//! Deliberately naive: every Hamiltonian cycle is listed by permuting the
//! vertices after vertex 1. Used to check the tube pipeline, not to be fast.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, RppInstance};

/// Largest vertex count [`bruteforce`] accepts.
pub const MAX_VERTICES: usize = 12;

/// Longest walk [`enumerate_closed_walks`] lists.
pub const MAX_WALK_LENGTH: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {vertices} vertices; the exhaustive search is limited to {limit}")]
    TooManyVertices { vertices: usize, limit: usize },
    #[error("walk length {length} exceeds the limit of {limit}")]
    WalkTooLong { length: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_cost: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_cycle: Option<Vec<usize>>,
    /// Feasible and `min_cost <= budget`.
    pub decision: bool,
}

impl OracleResult {
    pub fn answer(&self) -> &'static str {
        if self.decision {
            "YES"
        } else {
            "NO"
        }
    }
}

/// Minimum-cost Hamiltonian cycle through every required edge.
///
/// Cycles start at vertex 1 with the second vertex smaller than the last, so
/// each undirected cycle is seen once. Ties keep the lexicographically first.
pub fn bruteforce(inst: &RppInstance) -> Result<OracleResult, OracleError> {
    let v = inst.vertex_count();
    if v > MAX_VERTICES {
        return Err(OracleError::TooManyVertices {
            vertices: v,
            limit: MAX_VERTICES,
        });
    }
    let mut best: Option<(u64, Vec<usize>)> = None;
    if v >= 3 {
        let mut cycle = vec![1];
        let mut used = vec![false; v + 1];
        used[1] = true;
        extend(inst, &mut cycle, &mut used, &mut best);
    }
    Ok(match best {
        Some((cost, cycle)) => OracleResult {
            feasible: true,
            min_cost: Some(cost),
            best_cycle: Some(cycle),
            decision: cost <= inst.budget(),
        },
        None => OracleResult {
            feasible: false,
            min_cost: None,
            best_cycle: None,
            decision: false,
        },
    })
}

fn extend(inst: &RppInstance, cycle: &mut Vec<usize>, used: &mut [bool], best: &mut Option<(u64, Vec<usize>)>) {
    let v = inst.vertex_count();
    if cycle.len() == v {
        if cycle[1] > cycle[v - 1] {
            return;
        }
        if !inst.is_rural_postman_circuit(cycle) {
            return;
        }
        let cost = inst.cycle_cost(cycle).expect("closed in the graph");
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            *best = Some((cost, cycle.clone()));
        }
        return;
    }
    for x in 2..=v {
        if used[x] || !inst.has_edge(*cycle.last().unwrap(), x) {
            continue;
        }
        used[x] = true;
        cycle.push(x);
        extend(inst, cycle, used, best);
        cycle.pop();
        used[x] = false;
    }
}

/// Every closed walk `x0 .. x{length-1}` of `length` edges whose closing step
/// `x{length-1} -> x0` is `through`, in either direction.
///
/// The other `length - 1` steps run over graph edges other than `through`;
/// vertices may repeat. Walks are listed in lexicographic order and a walk
/// and its reversal are both included.
pub fn enumerate_closed_walks(inst: &RppInstance, length: usize, through: Edge) -> Result<Vec<Vec<usize>>, OracleError> {
    if length > MAX_WALK_LENGTH {
        return Err(OracleError::WalkTooLong {
            length,
            limit: MAX_WALK_LENGTH,
        });
    }
    let mut out = Vec::new();
    if length < 2 || !inst.has_edge(through.lo, through.hi) {
        return Ok(out);
    }
    let adj = inst.adjacency();
    for (start, end) in [(through.lo, through.hi), (through.hi, through.lo)] {
        let mut walk = vec![start];
        walks_from(&adj, through, length, end, &mut walk, &mut out);
    }
    out.sort();
    Ok(out)
}

fn walks_from(adj: &[Vec<usize>], through: Edge, length: usize, end: usize, walk: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let at = *walk.last().unwrap();
    if walk.len() == length {
        if at == end {
            out.push(walk.clone());
        }
        return;
    }
    for &y in &adj[at] {
        if Edge::new(at, y) == through {
            continue;
        }
        walk.push(y);
        walks_from(adj, through, length, end, walk, out);
        walk.pop();
    }
}
