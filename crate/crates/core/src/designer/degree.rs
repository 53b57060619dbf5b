//! Column-degree selection for the core, scored by the coupled RCA
//! threshold.

use super::peg::peg_place;
use super::{assemble, constrain, DesignConfig};
use crate::coupled::CoupledCode;
use crate::graph::UnifiedGraph;
use crate::matrix::IntMatrix;
use crate::profile::CodeProfile;
use crate::rca::rca_threshold;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeCandidate {
    pub degrees: Vec<usize>,
    pub threshold_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeChoice {
    /// Selected column degrees of the core.
    pub degrees: Vec<usize>,
    pub threshold_db: f64,
    /// Every scored candidate in sampling order.
    pub candidates: Vec<DegreeCandidate>,
}

/// Smallest legal column degree inside the core.
pub fn min_degree(cfg: &DesignConfig) -> usize {
    cfg.hrc_rows.min(3)
}

/// Forced core edges: every pivot and every edge of a punctured column.
pub(crate) fn forced_core(cfg: &DesignConfig) -> IntMatrix {
    let (m, n) = (cfg.hrc_rows, cfg.hrc_cols);
    let k = cfg.info_cols();
    let mut b = IntMatrix::zeros(m, n);
    for r in 0..m {
        b[(r, k + r)] = 1;
        for v in 0..cfg.punctured {
            b[(r, v)] = 1;
        }
    }
    b
}

/// Core profile used to score a degree list: PEG in column order with all
/// free labels at 0.
pub fn degree_candidate_profile(cfg: &DesignConfig, degrees: &[usize]) -> Result<CodeProfile> {
    let order: Vec<usize> = (0..cfg.hrc_cols).collect();
    let base = peg_place(&forced_core(cfg), degrees, &order, |_, _| true)?;
    let mut g = UnifiedGraph::new(cfg.hrc_rows, cfg.hrc_cols, cfg.coupling_width, [])?;
    for c in 0..cfg.hrc_rows {
        for v in 0..cfg.hrc_cols {
            if base[(c, v)] != 0 {
                g.add_edge(c, v, 0)?;
            }
        }
    }
    constrain(&mut g, &cfg.shape())?;
    Ok(assemble(cfg.shape(), &base, &g.spread_matrix()))
}

fn score(cfg: &DesignConfig, degrees: &[usize]) -> Result<f64> {
    let p = degree_candidate_profile(cfg, degrees)?;
    let cc = CoupledCode::new(&p, cfg.length)?;
    Ok(rca_threshold(&cc, &cfg.rca)?.threshold_db)
}

/// Samples `cfg.degree_samples` degree lists satisfying the core constraints
/// (punctured columns connected to every core row, all columns of degree at
/// least `min(3, m')`) and keeps the one with the lowest threshold. The first
/// candidate is always the densest list.
pub fn select_degree_distribution(cfg: &DesignConfig, rng: &mut ChaCha8Rng) -> Result<DegreeChoice> {
    let (m, n) = (cfg.hrc_rows, cfg.hrc_cols);
    let lo = min_degree(cfg);
    if lo == 0 {
        return Err(Error::Design("core has no rows".into()));
    }
    let mut candidates = Vec::with_capacity(cfg.degree_samples);
    for i in 0..cfg.degree_samples {
        let p: f64 = if i == 0 { 1.0 } else { rng.random() };
        let degrees: Vec<usize> = (0..n)
            .map(|v| {
                if v < cfg.punctured {
                    m
                } else {
                    lo + (0..m - lo).filter(|_| rng.random::<f64>() < p).count()
                }
            })
            .collect();
        let threshold_db = score(cfg, &degrees)?;
        candidates.push(DegreeCandidate { degrees, threshold_db });
    }
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.threshold_db.total_cmp(&b.1.threshold_db).then(a.0.cmp(&b.0)))
        .map(|(_, c)| c.clone())
        .expect("at least one sample");
    Ok(DegreeChoice { degrees: best.degrees, threshold_db: best.threshold_db, candidates })
}
