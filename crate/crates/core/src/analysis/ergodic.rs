use std::collections::VecDeque;

use serde::Serialize;

use crate::model::SparseStochasticMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Ergodicity {
    Ergodic,
    /// The support digraph is not strongly connected (or a row is empty).
    Reducible,
    Periodic { period: usize },
}

impl Ergodicity {
    pub fn is_ergodic(self) -> bool {
        self == Ergodicity::Ergodic
    }

    pub fn reason(self) -> String {
        match self {
            Ergodicity::Ergodic => "ergodic".into(),
            Ergodicity::Reducible => "reducible".into(),
            Ergodicity::Periodic { period } => format!("periodic with period {period}"),
        }
    }
}

fn bfs_levels(n: usize, start: usize, neighbours: impl Fn(usize) -> Vec<usize>) -> Vec<Option<usize>> {
    let mut level = vec![None; n];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for v in neighbours(u) {
            if level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Classifies the chain with transition matrix `p`.
///
/// Irreducibility is strong connectivity of the support digraph (forward
/// and reverse reachability from state 0). The period is the gcd of
/// `level(u) + 1 - level(v)` over all edges `u -> v`, with BFS levels from
/// state 0.
pub fn is_ergodic(p: &SparseStochasticMatrix) -> Ergodicity {
    let n = p.n();
    if n == 0 || !p.empty_rows().is_empty() {
        return Ergodicity::Reducible;
    }
    let forward = bfs_levels(n, 0, |u| p.row(u).iter().map(|&(v, _)| v).collect());
    let mut reverse_adj = vec![Vec::new(); n];
    for (u, row) in p.rows().iter().enumerate() {
        for &(v, _) in row {
            reverse_adj[v].push(u);
        }
    }
    let backward = bfs_levels(n, 0, |u| reverse_adj[u].clone());
    if forward.iter().chain(&backward).any(Option::is_none) {
        return Ergodicity::Reducible;
    }
    let mut period = 0;
    for (u, row) in p.rows().iter().enumerate() {
        let lu = forward[u].unwrap();
        for &(v, _) in row {
            let lv = forward[v].unwrap();
            period = gcd(period, (lu + 1).abs_diff(lv));
        }
    }
    if period == 1 {
        Ergodicity::Ergodic
    } else {
        Ergodicity::Periodic { period }
    }
}
