//! Design of the highest-rate core: PEG placement, spreading optimization on
//! the unified graph, ACE screening and RCA selection over restarts.

use super::degree::forced_core;
use super::peg::peg_place;
use super::{assemble, constrain, optimize_all, DesignConfig};
use crate::coupled::CoupledCode;
use crate::graph::ace::{ace_spectrum, AceSpectrum};
use crate::graph::{Move, UnifiedGraph};
use crate::matrix::IntMatrix;
use crate::rca::rca_threshold;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HrcDesign {
    pub base: IntMatrix,
    pub spread: IntMatrix,
    pub threshold_db: f64,
    /// Threshold of every restart that passed the ACE screen.
    pub candidates_db: Vec<f64>,
    pub moves: Vec<Move>,
    pub ace: AceSpectrum,
}

/// Graph of a binary matrix with every label at 0.
pub(crate) fn zero_graph(b: &IntMatrix, coupling_width: usize) -> Result<UnifiedGraph> {
    let mut g = UnifiedGraph::new(b.rows(), b.cols(), coupling_width, [])?;
    for c in 0..b.rows() {
        for v in 0..b.cols() {
            if b[(c, v)] != 0 {
                g.add_edge(c, v, 0)?;
            }
        }
    }
    Ok(g)
}

/// One PEG + ACE + spreading candidate, or `None` when every redraw fails
/// the ACE screen.
fn candidate(
    cfg: &DesignConfig,
    degrees: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<Option<(IntMatrix, UnifiedGraph, Vec<Move>, AceSpectrum)>> {
    let k = cfg.info_cols();
    let parity: Vec<usize> = (k..cfg.hrc_cols).collect();
    let mut info: Vec<usize> = (cfg.punctured..k).collect();
    for _ in 0..cfg.ace_retries {
        info.shuffle(rng);
        let order: Vec<usize> = (0..cfg.punctured).chain(parity.iter().copied()).chain(info.iter().copied()).collect();
        let base = peg_place(&forced_core(cfg), degrees, &order, |_, _| true)?;
        let mut g = zero_graph(&base, cfg.coupling_width)?;
        constrain(&mut g, &cfg.shape())?;
        let (g, moves) = optimize_all(&g, cfg.ace_len, cfg.i_mp)?;
        let ace = ace_spectrum(&g, cfg.ace_len);
        if ace.meets(|_| cfg.eta_ace) {
            return Ok(Some((base, g, moves, ace)));
        }
    }
    Ok(None)
}

/// Runs `cfg.i_hrc` restarts and keeps the candidate with the lowest coupled
/// RCA threshold (earliest restart on ties).
pub fn design_hrc(cfg: &DesignConfig, degrees: &[usize], rng: &mut ChaCha8Rng) -> Result<HrcDesign> {
    if degrees.len() != cfg.hrc_cols {
        return Err(Error::Design(format!("{} degrees for {} core columns", degrees.len(), cfg.hrc_cols)));
    }
    let mut best: Option<HrcDesign> = None;
    let mut candidates_db = Vec::new();
    for _ in 0..cfg.i_hrc {
        let Some((base, g, moves, ace)) = candidate(cfg, degrees, rng)? else {
            continue;
        };
        let spread = g.spread_matrix();
        let profile = assemble(cfg.shape(), &base, &spread);
        let cc = CoupledCode::new(&profile, cfg.length)?;
        let threshold_db = rca_threshold(&cc, &cfg.rca)?.threshold_db;
        candidates_db.push(threshold_db);
        if best.as_ref().is_none_or(|b| threshold_db < b.threshold_db) {
            best = Some(HrcDesign { base, spread, threshold_db, candidates_db: Vec::new(), moves, ace });
        }
    }
    let mut best = best.ok_or_else(|| {
        Error::Design(format!("every core restart failed the ACE screen (eta {})", cfg.eta_ace))
    })?;
    best.candidates_db = candidates_db;
    Ok(best)
}
