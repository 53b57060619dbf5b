//! Cycle counting by monomial message passing.
//!
//! A message is a multiset of factors `gamma_c^phi`: `c` is the check the walk
//! left the root through and `phi` the path value accumulated so far. The
//! multiset is kept as a histogram, so counts are exact. After `l - 1`
//! half-steps, the message returning to the root along edge `c` holds one
//! factor per non-backtracking closed walk of length `l` ending through `c`.
//! Walks leaving and returning through the same edge are dropped; the rest
//! with `phi == 0` survive coupling, and each cycle is seen twice (once per
//! direction).

use super::UnifiedGraph;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Factor {
    /// Check the walk started through.
    pub check: usize,
    /// Accumulated path value.
    pub phi: i32,
}

/// All factors returning to the root along the edge to `returning`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub returning: usize,
    /// Sorted `(factor, multiplicity)` pairs.
    pub factors: Vec<(Factor, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePolynomial {
    pub var: usize,
    pub length: usize,
    pub terms: Vec<Term>,
}

impl CyclePolynomial {
    /// Number of factors with zero path value.
    pub fn zero_factors(&self) -> u64 {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter())
            .filter(|(f, _)| f.phi == 0)
            .map(|(_, n)| n)
            .sum()
    }

    /// Surviving cycles through the root.
    pub fn cycles(&self) -> u64 {
        self.zero_factors() / 2
    }

    pub fn term(&self, returning: usize) -> Option<&Term> {
        self.terms.iter().find(|t| t.returning == returning)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    /// Abort when a single message holds more distinct factors than this.
    pub max_terms: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { max_terms: 1_000_000 }
    }
}

type Hist = Vec<(Factor, u64)>;

fn normalize(mut h: Hist) -> Hist {
    h.sort_unstable_by_key(|(f, _)| *f);
    let mut out: Hist = Vec::with_capacity(h.len());
    for (f, n) in h {
        match out.last_mut() {
            Some((g, m)) if *g == f => *m += n,
            _ => out.push((f, n)),
        }
    }
    out.retain(|(_, n)| *n > 0);
    out
}

fn merge<'a>(parts: impl Iterator<Item = &'a Hist>) -> Hist {
    normalize(parts.flatten().copied().collect())
}

/// `total - own`, shifted by `delta`; both inputs sorted, `own` a sub-multiset.
fn extrinsic(total: &Hist, own: &Hist, delta: i32) -> Hist {
    let mut out = Vec::with_capacity(total.len());
    let mut j = 0;
    for &(f, n) in total {
        while j < own.len() && own[j].0 < f {
            j += 1;
        }
        let sub = if j < own.len() && own[j].0 == f { own[j].1 } else { 0 };
        if n > sub {
            out.push((Factor { check: f.check, phi: f.phi + delta }, n - sub));
        }
    }
    out
}

/// Polynomial of closed walks of length `l` through `v`. `ops` accumulates the
/// number of factor entries written.
pub fn count_at_var(
    g: &UnifiedGraph,
    v: usize,
    l: usize,
    opts: &CountOptions,
    ops: &mut u64,
) -> Result<(u64, CyclePolynomial)> {
    if l < 4 || !l.is_multiple_of(2) {
        return Err(Error::Counting(format!("cycle length {l} must be even and at least 4")));
    }
    if v >= g.vars {
        return Err(Error::Counting(format!("no variable node {v}")));
    }
    let ne = g.edges.len();
    let mut to_check: Vec<Hist> = vec![Vec::new(); ne];
    let mut to_var: Vec<Hist> = vec![Vec::new(); ne];
    for &e in g.var_edges(v) {
        let edge = &g.edges[e];
        to_check[e] = vec![(Factor { check: edge.check, phi: edge.spread }, 1)];
    }
    let cap = |h: &Hist| -> Result<()> {
        if h.len() > opts.max_terms {
            Err(Error::Counting(format!(
                "message at root {v}, length {l} holds {} factors (cap {})",
                h.len(),
                opts.max_terms
            )))
        } else {
            Ok(())
        }
    };
    for step in 1..l {
        if step % 2 == 1 {
            for c in 0..g.checks {
                let es = g.check_edges(c);
                if es.iter().all(|&e| to_check[e].is_empty()) {
                    es.iter().for_each(|&e| to_var[e].clear());
                    continue;
                }
                let total = merge(es.iter().map(|&e| &to_check[e]));
                for &e in es {
                    to_var[e] = extrinsic(&total, &to_check[e], -g.edges[e].spread);
                    *ops += to_var[e].len() as u64;
                    cap(&to_var[e])?;
                }
            }
            to_check.iter_mut().for_each(Vec::clear);
        } else {
            for u in 0..g.vars {
                let es = g.var_edges(u);
                if es.iter().all(|&e| to_var[e].is_empty()) {
                    continue;
                }
                let total = merge(es.iter().map(|&e| &to_var[e]));
                for &e in es {
                    to_check[e] = extrinsic(&total, &to_var[e], g.edges[e].spread);
                    *ops += to_check[e].len() as u64;
                    cap(&to_check[e])?;
                }
            }
            to_var.iter_mut().for_each(Vec::clear);
        }
    }
    let terms: Vec<Term> = g
        .var_edges(v)
        .iter()
        .map(|&e| {
            let c = g.edges[e].check;
            let factors = to_var[e].iter().copied().filter(|(f, _)| f.check != c).collect();
            Term { returning: c, factors }
        })
        .collect();
    let poly = CyclePolynomial { var: v, length: l, terms };
    Ok((poly.cycles(), poly))
}

/// Polynomials for every variable node, computed in parallel.
pub fn count_all(g: &UnifiedGraph, l: usize, opts: &CountOptions) -> Result<Vec<CyclePolynomial>> {
    (0..g.vars)
        .into_par_iter()
        .map(|v| count_at_var(g, v, l, opts, &mut 0).map(|(_, p)| p))
        .collect()
}

/// Number of surviving cycles of length `l` in the whole coupled graph,
/// counted once per replica.
pub fn count_total(g: &UnifiedGraph, l: usize, opts: &CountOptions) -> Result<u64> {
    let per_var: u64 = count_all(g, l, opts)?.iter().map(CyclePolynomial::cycles).sum();
    let half = (l / 2) as u64;
    if !per_var.is_multiple_of(half) {
        return Err(Error::Counting(format!(
            "sum of per-node {l}-cycle counts {per_var} is not divisible by {half}"
        )));
    }
    Ok(per_var / half)
}
