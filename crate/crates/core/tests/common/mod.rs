//! Shared oracles for the integration tests.
#![allow(dead_code)]

use esrl_core::graph::UnifiedGraph;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random protograph with up to 5 checks, 10 variables and width 2.
pub fn random_graph(rng: &mut ChaCha8Rng) -> UnifiedGraph {
    let m = rng.random_range(2..=5);
    let n = rng.random_range(2..=10);
    let w = rng.random_range(0..=2);
    let mut triples = Vec::new();
    for c in 0..m {
        for v in 0..n {
            if rng.random_bool(0.45) {
                triples.push((c, v, rng.random_range(0..=w as i32)));
            }
        }
    }
    UnifiedGraph::new(m, n, w, triples).unwrap()
}

/// Coupled graph over enough positions that walks from the middle replica
/// never reach the boundary. Variable `(p, v)` meets check `(p + T, c)`.
pub struct Coupled {
    var_adj: Vec<Vec<usize>>,
    check_adj: Vec<Vec<usize>>,
    pub vars: usize,
    pub middle: usize,
}

impl Coupled {
    pub fn new(g: &UnifiedGraph, l: usize) -> Self {
        let reach = (l / 2) * g.coupling_width + 1;
        let positions = 2 * reach + 1;
        let checks_per = g.checks;
        let mut var_adj = vec![Vec::new(); positions * g.vars];
        let mut check_adj = vec![Vec::new(); (positions + g.coupling_width) * checks_per];
        for p in 0..positions {
            for e in g.edges() {
                let vi = p * g.vars + e.var;
                let ci = (p + e.spread as usize) * checks_per + e.check;
                var_adj[vi].push(ci);
                check_adj[ci].push(vi);
            }
        }
        Coupled { var_adj, check_adj, vars: g.vars, middle: reach }
    }

    /// Closed non-backtracking walks of length `l` from `start` whose first
    /// and last edges differ.
    pub fn walks(&self, start: usize, l: usize) -> u64 {
        let mut total = 0;
        for &c0 in &self.var_adj[start] {
            total += self.walk_check(start, c0, start, c0, l - 1);
        }
        total
    }

    fn walk_check(&self, start: usize, first: usize, prev_var: usize, c: usize, left: usize) -> u64 {
        let mut total = 0;
        for &u in &self.check_adj[c] {
            if u == prev_var {
                continue;
            }
            if left == 1 {
                if u == start && c != first {
                    total += 1;
                }
                continue;
            }
            for &c2 in &self.var_adj[u] {
                if c2 != c {
                    total += self.walk_check(start, first, u, c2, left - 2);
                }
            }
        }
        total
    }
}
