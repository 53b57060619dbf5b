//! Automated profile construction: degree selection, PEG placement, ACE
//! screening, spreading optimization, row-wise extension and circulant
//! lifting.
//!
//! All randomness flows from one ChaCha generator seeded by
//! [`DesignConfig::seed`], and every step runs sequentially, so a config
//! always produces the same profile.

pub mod degree;
pub mod hrc;
pub mod ime;
pub mod lift;
pub mod peg;

use crate::graph::ace::AceSpectrum;
use crate::graph::{optimize_spreading, CountOptions, Move, UnifiedGraph};
use crate::matrix::IntMatrix;
use crate::profile::{tail_pattern, CodeProfile, Shape};
use crate::rca::RcaConfig;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use degree::{select_degree_distribution, DegreeChoice};
pub use hrc::{design_hrc, HrcDesign};
pub use ime::{design_ime, global_weight_ref, ImeDesign, RowLog, WeightGuide};
pub use lift::{lift_profile, lift_with_fallback, LiftReport};

/// Minimum ACE per cycle length.
pub type AceBounds = Vec<(usize, u32)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    pub hrc_rows: usize,
    pub hrc_cols: usize,
    pub rows: usize,
    pub cols: usize,
    pub punctured: usize,
    pub coupling_width: usize,
    /// Coupling length used for threshold scoring.
    pub length: usize,
    /// Circulant size; 0 skips lifting.
    pub lifting: usize,
    /// Lifted graph should have no surviving cycle shorter than this.
    pub girth: usize,
    /// Lowest girth accepted when `girth` cannot be reached at this
    /// circulant size; equal to `girth` makes the target strict.
    pub min_girth: usize,
    /// Minimum ACE of any surviving cycle of the core, up to `ace_len`.
    pub eta_ace: u32,
    /// Per-length ACE bounds for the cycles each extension row creates,
    /// measured with the projected final column degrees.
    pub ace_bounds: AceBounds,
    /// Longest cycle screened.
    pub ace_len: usize,
    /// Total protomatrix weight; `None` lets the reference design pick row
    /// degrees of its own.
    pub target_weight: Option<usize>,
    /// Upper bound on the SSC weight as a fraction of the IRC weight.
    pub ssc_fraction: f64,
    pub i_hrc: usize,
    pub i_ime: usize,
    pub i_mp: usize,
    /// Degree distributions sampled in the first step.
    pub degree_samples: usize,
    /// PEG redraws allowed to pass the ACE screen per attempt.
    pub ace_retries: usize,
    pub lift_restarts: usize,
    /// RCA settings used for scoring candidates.
    pub rca: RcaConfig,
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            hrc_rows: 4,
            hrc_cols: 26,
            rows: 40,
            cols: 62,
            punctured: 1,
            coupling_width: 1,
            length: 10,
            lifting: 39,
            girth: 8,
            min_girth: 6,
            eta_ace: 2,
            ace_bounds: vec![(4, 6), (6, 12), (8, 12)],
            ace_len: 8,
            target_weight: Some(314),
            ssc_fraction: 0.3,
            i_hrc: 50,
            i_ime: 50,
            i_mp: 50,
            degree_samples: 200,
            ace_retries: 20,
            lift_restarts: 20,
            rca: RcaConfig { iterations: 400, resolution_db: 0.02, ..RcaConfig::default() },
            seed: 1,
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::param(m.to_string()));
        if self.hrc_rows == 0 || self.hrc_cols <= self.hrc_rows {
            return bad("the core needs at least one row and more columns than rows");
        }
        if self.rows < self.hrc_rows || self.cols - self.hrc_cols != self.rows - self.hrc_rows {
            return bad("the extension must add exactly one column per row");
        }
        if self.punctured > self.hrc_cols - self.hrc_rows {
            return bad("more punctured columns than information columns");
        }
        if self.i_hrc == 0 || self.i_ime == 0 || self.i_mp == 0 || self.degree_samples == 0 {
            return bad("budgets must be at least 1");
        }
        if self.ace_retries == 0 || self.lift_restarts == 0 {
            return bad("retry budgets must be at least 1");
        }
        if self.girth < 6 || !self.girth.is_multiple_of(2) {
            return bad("girth target must be even and at least 6");
        }
        if self.min_girth < 6 || self.min_girth > self.girth {
            return bad("min_girth must lie between 6 and the girth target");
        }
        if self.ace_len < 4 || !self.ace_len.is_multiple_of(2) {
            return bad("ACE length must be even and at least 4");
        }
        if self.length == 0 {
            return bad("coupling length must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.ssc_fraction) {
            return bad("ssc_fraction must lie in [0, 1]");
        }
        Ok(())
    }

    /// Shape of the full profile.
    pub fn shape(&self) -> Shape {
        Shape {
            hrc_rows: self.hrc_rows,
            hrc_cols: self.hrc_cols,
            rows: self.rows,
            cols: self.cols,
            coupling_width: self.coupling_width,
            punctured: self.punctured,
            lifting: 0,
        }
    }

    pub fn info_cols(&self) -> usize {
        self.cols - self.rows
    }

    fn bound(&self, l: usize) -> u32 {
        self.ace_bounds.iter().find(|(len, _)| *len == l).map_or(0, |&(_, b)| b)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Everything a design run reports besides the profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignLog {
    pub degrees: DegreeChoice,
    pub hrc_threshold_db: f64,
    pub hrc_candidates_db: Vec<f64>,
    pub hrc_moves: Vec<Move>,
    pub guide: WeightGuide,
    pub rows: Vec<RowLog>,
    pub ace: AceSpectrum,
    pub lift: Option<LiftReport>,
}

/// Profile of the first `rows` rows built from a base and a label matrix of
/// that size, with the default tail.
pub(crate) fn assemble(shape: Shape, base: &IntMatrix, spread: &IntMatrix) -> CodeProfile {
    let rows = base.rows();
    let cols = base.cols();
    let s = Shape { rows, cols, ..shape };
    CodeProfile::from_base(s, base.clone(), spread.clone(), tail_pattern(rows, shape.coupling_width))
}

/// Applies the structural label rules to every edge of `g`, whose rows are
/// the first `g.checks` rows of a profile of shape `shape`: pivots and SSC
/// diagonals pinned to 0, core parity entries right of the pivot kept at
/// label 1 or more, and punctured columns kept below any tail block whose
/// punctured column the same row touches.
pub(crate) fn constrain(g: &mut UnifiedGraph, shape: &Shape) -> Result<()> {
    let k = shape.cols - shape.rows;
    let w = shape.coupling_width as i32;
    let tail = tail_pattern(g.checks, shape.coupling_width);
    for c in 0..g.checks {
        let pivot = k + c;
        if let Some(t) = g.spread(c, pivot) {
            if t != 0 {
                g.set_spread(c, pivot, 0)?;
            }
            g.lock(c, pivot);
        }
        for v in pivot + 1..shape.hrc_cols.max(pivot + 1) {
            if let Some(t) = g.spread(c, v) {
                g.set_floor(c, v, 1);
                if t < 1 {
                    g.set_spread(c, v, 1.min(w))?;
                }
            }
        }
        for j in 1..=shape.coupling_width {
            let hits = (0..shape.punctured.min(g.checks)).any(|r| tail[(c, (j - 1) * g.checks + r)] != 0);
            if !hits {
                continue;
            }
            for v in 0..shape.punctured {
                if let Some(t) = g.spread(c, v) {
                    let ceil = j as i32 - 1;
                    let id = g.edge_id(c, v).expect("edge");
                    if g.edge(id).ceil > ceil {
                        g.set_ceil(c, v, ceil);
                    }
                    if t > ceil {
                        g.set_spread(c, v, ceil)?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Greedy spreading optimization for every cycle length up to `l_max`,
/// shortest first, with up to `budget` moves per length.
pub(crate) fn optimize_all(g: &UnifiedGraph, l_max: usize, budget: usize) -> Result<(UnifiedGraph, Vec<Move>)> {
    let mut g = g.clone();
    let mut all = Vec::new();
    for l in (4..=l_max).step_by(2) {
        let (h, moves) = optimize_spreading(&g, l, budget, &CountOptions::default())?;
        g = h;
        all.extend(moves);
    }
    Ok((g, all))
}

/// Full pipeline: degree selection, core design, row-wise extension and
/// lifting. Returns the profile and the design log.
pub fn design(cfg: &DesignConfig) -> Result<(CodeProfile, DesignLog)> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let degrees = select_degree_distribution(cfg, &mut rng)?;
    let hrc = design_hrc(cfg, &degrees.degrees, &mut rng)?;
    let guide = global_weight_ref(cfg, &hrc, &mut rng)?;
    let ime = design_ime(cfg, &hrc, &guide, &mut rng)?;
    let g = UnifiedGraph::from_profile(&ime.profile)?;
    let ace = crate::graph::ace::ace_spectrum(&g, cfg.ace_len);
    let (profile, lift) = if cfg.lifting > 0 {
        let (p, r) = lift_with_fallback(&ime.profile, cfg.lifting, cfg.girth, cfg.min_girth, cfg.lift_restarts, &mut rng)?;
        (p, Some(r))
    } else {
        (ime.profile.clone(), None)
    };
    let log = DesignLog {
        degrees,
        hrc_threshold_db: hrc.threshold_db,
        hrc_candidates_db: hrc.candidates_db.clone(),
        hrc_moves: hrc.moves.clone(),
        guide,
        rows: ime.rows,
        ace,
        lift,
    };
    Ok((profile, log))
}
