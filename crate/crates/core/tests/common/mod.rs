#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tubesim::graph::{Edge, RppInstance};

pub fn complete_edges(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| ((i + 1)..=n).map(move |j| (i, j))).collect()
}

pub fn unit(v: usize, edges: &[(usize, usize)], required: &[(usize, usize)], budget: u64) -> RppInstance {
    let weighted: Vec<(usize, usize, u64)> = edges.iter().map(|&(a, b)| (a, b, 1)).collect();
    RppInstance::new(v, &weighted, required, budget).unwrap()
}

pub fn complete(n: usize, required: &[(usize, usize)], budget: u64) -> RppInstance {
    unit(n, &complete_edges(n), required, budget)
}

fn connected(v: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; v + 1];
    let mut stack = vec![1];
    seen[1] = true;
    while let Some(x) = stack.pop() {
        for &(a, b) in edges {
            for (p, q) in [(a, b), (b, a)] {
                if p == x && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n);
            out.push(q);
        }
    }
    out
}

/// Every connected simple graph on vertices `1..=v`, as edge lists.
pub fn labeled_connected_graphs(v: usize) -> Vec<Vec<(usize, usize)>> {
    let all = complete_edges(v);
    (0u32..1 << all.len())
        .map(|mask| {
            all.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| *e)
                .collect::<Vec<_>>()
        })
        .filter(|edges| v == 1 || connected(v, edges))
        .collect()
}

/// One representative per isomorphism class of connected graphs on `v`
/// vertices: the graph whose sorted edge list is smallest among relabelings.
pub fn connected_graphs(v: usize) -> Vec<Vec<(usize, usize)>> {
    let perms = permutations(v);
    let canon = |edges: &[(usize, usize)]| -> Vec<(usize, usize)> {
        perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| {
                        let (x, y) = (p[a - 1], p[b - 1]);
                        (x.min(y), x.max(y))
                    })
                    .collect();
                e.sort();
                e
            })
            .min()
            .unwrap()
    };
    let classes: BTreeSet<Vec<(usize, usize)>> = labeled_connected_graphs(v).iter().map(|g| canon(g)).collect();
    classes.into_iter().collect()
}

/// Non-empty subsets of `edges`.
pub fn nonempty_subsets(edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    (1u32..1 << edges.len())
        .map(|mask| {
            edges
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| *e)
                .collect()
        })
        .collect()
}

/// Random connected instance: `v` in `4..=8`, edge probability 1/2, lengths
/// in `0..=9`, one to three required edges, and a budget within 5 of the cost
/// of a random Hamiltonian cycle (or of a random vertex ordering if the graph
/// has none).
pub fn random_instance(rng: &mut ChaCha8Rng) -> RppInstance {
    let v = rng.gen_range(4..=8);
    let edges = loop {
        let edges: Vec<(usize, usize)> = complete_edges(v).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        if connected(v, &edges) {
            break edges;
        }
    };
    let weighted: Vec<(usize, usize, u64)> = edges.iter().map(|&(a, b)| (a, b, rng.gen_range(0..=9))).collect();
    let k = rng.gen_range(1..=edges.len().min(3));
    let required: Vec<(usize, usize)> = edges.choose_multiple(rng, k).copied().collect();
    let order = random_hamiltonian(v, &edges, rng).unwrap_or_else(|| {
        let mut order: Vec<usize> = (1..=v).collect();
        order.shuffle(rng);
        order
    });
    let lookup = |a: usize, b: usize| {
        weighted
            .iter()
            .find(|&&(x, y, _)| Edge::new(x, y) == Edge::new(a, b))
            .map_or(0, |w| w.2)
    };
    let around: u64 = (0..v).map(|i| lookup(order[i], order[(i + 1) % v])).sum();
    let budget = rng.gen_range(around.saturating_sub(5)..=around + 5);
    RppInstance::new(v, &weighted, &required, budget).unwrap()
}

/// A Hamiltonian cycle found by backtracking with shuffled neighbor order.
fn random_hamiltonian(v: usize, edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    fn extend(path: &mut Vec<usize>, adj: &[Vec<usize>], v: usize, rng: &mut ChaCha8Rng) -> bool {
        let last = *path.last().unwrap();
        if path.len() == v {
            return adj[last].contains(&path[0]);
        }
        let mut next = adj[last].clone();
        next.shuffle(rng);
        for y in next {
            if !path.contains(&y) {
                path.push(y);
                if extend(path, adj, v, rng) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    let mut adj = vec![Vec::new(); v + 1];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut path = vec![rng.gen_range(1..=v)];
    (v >= 3 && extend(&mut path, &adj, v, rng)).then_some(path)
}

pub fn edge_list(inst: &RppInstance) -> Vec<(usize, usize)> {
    inst.edges().map(|e| (e.lo, e.hi)).collect()
}
