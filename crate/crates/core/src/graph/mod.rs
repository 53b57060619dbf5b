//! The unified graph: the uncoupled protograph with a spreading label (and
//! optionally a circulant shift) on every edge. A closed walk in it survives
//! coupling when its accumulated path value
//! `sum_i (T[c_i][v_i] - T[c_i][v_{i+1}])` is zero.

pub mod ace;
pub mod counting;
pub mod lifting;
pub mod optimize;

use crate::matrix::IntMatrix;
use crate::profile::CodeProfile;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub use counting::{count_at_var, count_total, CountOptions, CyclePolynomial, Factor, Term};
pub use optimize::{eval_reallocation, optimize_spreading, Move};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub check: usize,
    pub var: usize,
    pub spread: i32,
    pub shift: Option<i32>,
    /// Locked edges keep their spreading label under optimization.
    pub locked: bool,
    /// Smallest label the optimizer may assign.
    pub floor: i32,
    /// Largest label the optimizer may assign.
    pub ceil: i32,
}

#[derive(Clone, Debug)]
pub struct UnifiedGraph {
    pub checks: usize,
    pub vars: usize,
    pub coupling_width: usize,
    pub lifting: usize,
    edges: Vec<Edge>,
    var_edges: Vec<Vec<usize>>,
    check_edges: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
}

impl UnifiedGraph {
    /// Builds a graph from `(check, var, spread)` triples.
    pub fn new(
        checks: usize,
        vars: usize,
        coupling_width: usize,
        triples: impl IntoIterator<Item = (usize, usize, i32)>,
    ) -> Result<Self> {
        let mut g = UnifiedGraph {
            checks,
            vars,
            coupling_width,
            lifting: 0,
            edges: Vec::new(),
            var_edges: vec![Vec::new(); vars],
            check_edges: vec![Vec::new(); checks],
            index: HashMap::new(),
        };
        for (c, v, t) in triples {
            g.add_edge(c, v, t)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, c: usize, v: usize, spread: i32) -> Result<usize> {
        if c >= self.checks || v >= self.vars {
            return Err(Error::structure(format!("edge ({c},{v}) outside the graph")));
        }
        if spread < 0 || spread as usize > self.coupling_width {
            return Err(Error::structure(format!("label {spread} on ({c},{v})")));
        }
        if self.index.contains_key(&(c, v)) {
            return Err(Error::structure(format!("parallel edge ({c},{v})")));
        }
        let id = self.edges.len();
        let ceil = self.coupling_width as i32;
        self.edges.push(Edge { check: c, var: v, spread, shift: None, locked: false, floor: 0, ceil });
        self.var_edges[v].push(id);
        self.check_edges[c].push(id);
        self.index.insert((c, v), id);
        Ok(id)
    }

    /// Unified graph of a profile's base matrix with its labels and, for
    /// lifted profiles, its shifts. The tail matrix is not part of the graph.
    pub fn from_profile(p: &CodeProfile) -> Result<Self> {
        let s = p.shape;
        let mut g = UnifiedGraph::new(s.rows, s.cols, s.coupling_width, [])?;
        g.lifting = s.lifting;
        for c in 0..s.rows {
            for v in 0..s.cols {
                if p.has_edge(c, v) {
                    let id = g.add_edge(c, v, p.spread[(c, v)])?;
                    if s.lifting > 0 {
                        g.edges[id].shift = Some(p.shifts[(c, v)]);
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn edge_id(&self, c: usize, v: usize) -> Option<usize> {
        self.index.get(&(c, v)).copied()
    }

    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_edges[c]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_edges[v].len()
    }

    pub fn spread(&self, c: usize, v: usize) -> Option<i32> {
        self.edge_id(c, v).map(|e| self.edges[e].spread)
    }

    pub fn set_spread(&mut self, c: usize, v: usize, label: i32) -> Result<()> {
        let id = self
            .edge_id(c, v)
            .ok_or_else(|| Error::structure(format!("no edge ({c},{v})")))?;
        let e = &mut self.edges[id];
        if e.locked && e.spread != label {
            return Err(Error::structure(format!("edge ({c},{v}) is locked")));
        }
        if label < 0 || label as usize > self.coupling_width {
            return Err(Error::structure(format!("label {label} outside [0,{}]", self.coupling_width)));
        }
        e.spread = label;
        Ok(())
    }

    pub fn set_shift(&mut self, c: usize, v: usize, shift: i32) -> Result<()> {
        let id = self
            .edge_id(c, v)
            .ok_or_else(|| Error::structure(format!("no edge ({c},{v})")))?;
        self.edges[id].shift = Some(shift);
        Ok(())
    }

    pub fn lock(&mut self, c: usize, v: usize) {
        if let Some(id) = self.edge_id(c, v) {
            self.edges[id].locked = true;
        }
    }

    pub fn lock_all(&mut self) {
        self.edges.iter_mut().for_each(|e| e.locked = true);
    }

    pub fn set_floor(&mut self, c: usize, v: usize, floor: i32) {
        if let Some(id) = self.edge_id(c, v) {
            self.edges[id].floor = floor;
        }
    }

    pub fn set_ceil(&mut self, c: usize, v: usize, ceil: i32) {
        if let Some(id) = self.edge_id(c, v) {
            self.edges[id].ceil = ceil;
        }
    }

    /// Spreading labels as a `checks x vars` matrix, -1 where absent.
    pub fn spread_matrix(&self) -> IntMatrix {
        let mut t = IntMatrix::filled(self.checks, self.vars, -1);
        for e in &self.edges {
            t[(e.check, e.var)] = e.spread;
        }
        t
    }

    /// Path value of a closed walk `[v0, c0, v1, c1, ..]` (VN first,
    /// implicitly returning to `v0`); `None` if a step is not an edge.
    pub fn path_value(&self, walk: &[usize]) -> Option<i64> {
        self.walk_sum(walk, |e| e.spread as i64)
    }

    /// Alternating shift sum of a closed walk, not reduced modulo the
    /// lifting size.
    pub fn shift_value(&self, walk: &[usize]) -> Option<i64> {
        self.walk_sum(walk, |e| e.shift.map_or(0, i64::from))
    }

    fn walk_sum(&self, walk: &[usize], label: impl Fn(&Edge) -> i64) -> Option<i64> {
        if walk.len() < 4 || !walk.len().is_multiple_of(2) {
            return None;
        }
        let h = walk.len() / 2;
        let mut sum = 0;
        for i in 0..h {
            let (v, c, next) = (walk[2 * i], walk[2 * i + 1], walk[(2 * i + 2) % walk.len()]);
            let a = self.edge_id(c, v)?;
            let b = self.edge_id(c, next)?;
            sum += label(&self.edges[a]) - label(&self.edges[b]);
        }
        Some(sum)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    #[test]
    fn rejects_parallel_edges_and_bad_labels() {
        assert!(UnifiedGraph::new(1, 1, 1, [(0, 0, 0), (0, 0, 1)]).is_err());
        assert!(UnifiedGraph::new(1, 1, 1, [(0, 0, 2)]).is_err());
    }

    #[test]
    fn locked_edge_keeps_label() {
        let mut g = UnifiedGraph::new(1, 2, 1, [(0, 0, 0), (0, 1, 0)]).unwrap();
        g.lock(0, 0);
        assert!(g.set_spread(0, 0, 1).is_err());
        g.set_spread(0, 1, 1).unwrap();
        assert_eq!(g.spread(0, 1), Some(1));
    }

    #[test]
    fn four_cycle_path_value() {
        let g = UnifiedGraph::new(2, 2, 1, [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)]).unwrap();
        assert_eq!(g.path_value(&[0, 0, 1, 1]), Some(-1));
        assert_eq!(g.path_value(&[0, 2, 1, 1]), None);
    }
}
