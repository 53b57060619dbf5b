//! Layered belief-propagation decoders over the lifted coupled code.
//!
//! A proto row of the coupled matrix lifts to `Z` checks with disjoint
//! supports, so one proto row is one layer. Row blocks are the spatial
//! positions of the chain (tail blocks included). All decoders share one
//! schedule: the window of row blocks is swept layer by layer in the order
//! `O`, and within a layer-step the rows `(b, O[t])` of every block `b` in the
//! window are updated. Two such rows never share a column (one label per
//! edge, tail blocks private to their row block), which is what lets the
//! multi-engine executor run them in lockstep.
//!
//! * full layered decoding: one window spanning the whole chain, executed
//!   sequentially;
//! * SLME: the same sweep with one engine per row block, executed in
//!   lockstep (read phase from a snapshot, then a checked write phase);
//! * windowed decoding: windows of `W` row blocks advancing by `S`; the
//!   first `S` batches freeze their decisions when the window moves.

use crate::coupled::CoupledCode;
use crate::profile::CodeProfile;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Saturation of sum-product check messages.
const SP_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// Normalized min-sum with scaling factor `alpha`.
    Nms { alpha: f64 },
    /// Exact tanh-rule sum-product.
    SumProduct,
}

impl Default for Variant {
    fn default() -> Self {
        Variant::Nms { alpha: 0.75 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Executor {
    /// Rows of a layer-step updated one after another, block order.
    Sequential,
    /// Rows of a layer-step computed from one snapshot, then written.
    Lockstep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeConfig {
    pub variant: Variant,
    /// Iterations per window position.
    pub max_iter: usize,
    /// Window size and step in row blocks; `None` decodes the whole chain.
    pub window: Option<(usize, usize)>,
    pub executor: Executor,
    /// Stop a window once all its rows are satisfied.
    pub early_stop: bool,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            variant: Variant::default(),
            max_iter: 5,
            window: None,
            executor: Executor::Sequential,
            early_stop: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutput {
    /// Hard decisions over every bit, punctured ones included.
    pub bits: Vec<u8>,
    /// Iterations summed over window positions.
    pub iterations: usize,
    /// The decisions satisfy every check of the code.
    pub converged: bool,
    /// Bit-level check-node updates performed.
    pub cn_updates: u64,
    pub windows: usize,
}

/// Default window step for window size `w`: `ceil(w / 2)`.
pub fn default_step(w: usize) -> usize {
    w.div_ceil(2)
}

/// Proto rows sorted by ascending degree, ties kept in index order.
pub fn layer_ordering(profile: &CodeProfile) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profile.shape.rows).collect();
    order.sort_by_key(|&r| profile.base.row(r).iter().filter(|&&x| x != 0).count());
    order
}

/// Decoder tables for one lifted coupled code.
#[derive(Clone, Debug)]
pub struct Decoder {
    z: usize,
    cols: usize,
    blocks: usize,
    per_block: usize,
    /// `(proto column, shift)` per proto row.
    rows: Vec<Vec<(usize, usize)>>,
    /// Offset of each proto row's messages.
    msg_base: Vec<usize>,
    msg_len: usize,
    order: Vec<usize>,
    /// Proto columns of each batch; batch `b` is frozen with row block `b`.
    batches: Vec<std::ops::Range<usize>>,
}

/// Writes produced by one row update.
struct RowWrites {
    post: Vec<(usize, f64)>,
    msg_start: usize,
    msg: Vec<f64>,
}

impl Decoder {
    pub fn new(code: &CoupledCode) -> Result<Self> {
        let z = code.lifting()?;
        let rows = code
            .rows
            .iter()
            .map(|row| row.iter().map(|e| (code.column(e), e.shift as usize)).collect())
            .collect();
        Self::from_rows(
            rows,
            code.num_cols(),
            z,
            code.row_blocks(),
            code.profile.shape.rows,
            layer_ordering(&code.profile),
            (0..code.num_batches()).map(|b| code.batch_start(b)..code.batch_start(b) + code.batch_width(b)).collect(),
        )
    }

    /// Decoder over arbitrary proto rows grouped into `blocks` blocks of
    /// `per_block` rows, with one column batch per block.
    pub fn from_rows(
        rows: Vec<Vec<(usize, usize)>>,
        cols: usize,
        z: usize,
        blocks: usize,
        per_block: usize,
        order: Vec<usize>,
        batches: Vec<std::ops::Range<usize>>,
    ) -> Result<Self> {
        if z == 0 || rows.len() != blocks * per_block || order.len() != per_block || batches.len() != blocks {
            return Err(Error::param("inconsistent decoder dimensions"));
        }
        if batches.iter().any(|b| b.end > cols) {
            return Err(Error::param("batch outside the column range"));
        }
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..per_block).collect::<Vec<_>>() {
            return Err(Error::param("layer order is not a permutation"));
        }
        let mut msg_base = Vec::with_capacity(rows.len());
        let mut msg_len = 0;
        for row in &rows {
            if row.iter().any(|&(c, s)| c >= cols || s >= z) {
                return Err(Error::param("row entry out of range"));
            }
            msg_base.push(msg_len);
            msg_len += row.len() * z;
        }
        Ok(Decoder { z, cols, blocks, per_block, rows, msg_base, msg_len, order, batches })
    }

    pub fn lifting(&self) -> usize {
        self.z
    }

    pub fn frame_len(&self) -> usize {
        self.cols * self.z
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Bit-level check-node updates of one sweep over `blocks` row blocks
    /// starting at `first`.
    pub fn sweep_cost(&self, first: usize, blocks: usize) -> u64 {
        let rows = first * self.per_block..(first + blocks).min(self.blocks) * self.per_block;
        self.rows[rows].iter().map(|r| (r.len() * self.z) as u64).sum()
    }

    fn bit(&self, col: usize, shift: usize, lane: usize) -> usize {
        col * self.z + (lane + shift) % self.z
    }

    fn compute(&self, r: usize, post: &[f64], msg: &[f64], variant: Variant) -> RowWrites {
        let row = &self.rows[r];
        let d = row.len();
        let z = self.z;
        let base = self.msg_base[r];
        let mut out_post = Vec::with_capacity(d * z);
        let mut out_msg = vec![0.0; d * z];
        let mut t = vec![0.0; d];
        let mut pre = vec![0.0; d + 1];
        let mut suf = vec![0.0; d + 1];
        for lane in 0..z {
            for (j, &(c, s)) in row.iter().enumerate() {
                t[j] = post[self.bit(c, s, lane)] - msg[base + j * z + lane];
            }
            match variant {
                Variant::Nms { alpha } => {
                    let (mut min1, mut min2, mut pos, mut neg) = (f64::INFINITY, f64::INFINITY, 0, false);
                    for (j, &x) in t.iter().enumerate() {
                        let a = x.abs();
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            pos = j;
                        } else if a < min2 {
                            min2 = a;
                        }
                        neg ^= x < 0.0;
                    }
                    for j in 0..d {
                        let mag = if j == pos { min2 } else { min1 };
                        let sign = if neg ^ (t[j] < 0.0) { -1.0 } else { 1.0 };
                        out_msg[j * z + lane] = if d > 1 { alpha * sign * mag } else { 0.0 };
                    }
                }
                Variant::SumProduct => {
                    pre[0] = 1.0;
                    for j in 0..d {
                        pre[j + 1] = pre[j] * (t[j] / 2.0).tanh();
                    }
                    suf[d] = 1.0;
                    for j in (0..d).rev() {
                        suf[j] = suf[j + 1] * (t[j] / 2.0).tanh();
                    }
                    for j in 0..d {
                        let p = (pre[j] * suf[j + 1]).clamp(-SP_CLAMP, SP_CLAMP);
                        out_msg[j * z + lane] = if d > 1 { 2.0 * p.atanh() } else { 0.0 };
                    }
                }
            }
            for (j, &(c, s)) in row.iter().enumerate() {
                out_post.push((self.bit(c, s, lane), t[j] + out_msg[j * z + lane]));
            }
        }
        RowWrites { post: out_post, msg_start: base, msg: out_msg }
    }

    fn apply(w: RowWrites, post: &mut [f64], msg: &mut [f64]) {
        for (i, v) in w.post {
            post[i] = v;
        }
        msg[w.msg_start..w.msg_start + w.msg.len()].copy_from_slice(&w.msg);
    }

    /// One layer-step over the rows `(b, layer)` for `b` in `blocks`.
    fn layer_step(
        &self,
        layer: usize,
        blocks: std::ops::Range<usize>,
        exec: Executor,
        variant: Variant,
        post: &mut [f64],
        msg: &mut [f64],
        stamp: &mut [u64],
        step_id: u64,
    ) -> Result<()> {
        match exec {
            Executor::Sequential => {
                for b in blocks {
                    let w = self.compute(b * self.per_block + layer, post, msg, variant);
                    Self::apply(w, post, msg);
                }
            }
            Executor::Lockstep => {
                let snapshot_post: &[f64] = post;
                let snapshot_msg: &[f64] = msg;
                let writes: Vec<RowWrites> = blocks
                    .into_par_iter()
                    .map(|b| self.compute(b * self.per_block + layer, snapshot_post, snapshot_msg, variant))
                    .collect();
                for w in &writes {
                    for &(i, _) in &w.post {
                        if stamp[i] == step_id {
                            return Err(Error::Internal(format!(
                                "two engines wrote bit {i} in the same layer-step"
                            )));
                        }
                        stamp[i] = step_id;
                    }
                }
                for w in writes {
                    Self::apply(w, post, msg);
                }
            }
        }
        Ok(())
    }

    fn rows_satisfied(&self, rows: std::ops::Range<usize>, post: &[f64]) -> bool {
        self.rows[rows].iter().all(|row| {
            (0..self.z).all(|lane| {
                !row.iter().fold(false, |acc, &(c, s)| acc ^ (post[self.bit(c, s, lane)] < 0.0))
            })
        })
    }

    /// Checks every check of the code against hard decisions.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.rows.iter().all(|row| {
            (0..self.z).all(|lane| row.iter().fold(0u8, |acc, &(c, s)| acc ^ bits[self.bit(c, s, lane)]) == 0)
        })
    }

    /// Decodes channel LLRs given for every bit (0 at punctured positions).
    pub fn decode(&self, llr: &[f64], cfg: &DecodeConfig) -> Result<DecodeOutput> {
        if llr.len() != self.frame_len() {
            return Err(Error::param(format!("expected {} LLRs, got {}", self.frame_len(), llr.len())));
        }
        if let Some(i) = llr.iter().position(|x| !x.is_finite()) {
            return Err(Error::Decoder(format!("non-finite channel LLR at bit {i}")));
        }
        if cfg.max_iter == 0 {
            return Err(Error::param("at least one iteration is required"));
        }
        let (w, s) = cfg.window.unwrap_or((self.blocks, self.blocks));
        if w == 0 || s == 0 || s > w || w > self.blocks {
            return Err(Error::param(format!(
                "window {w} with step {s} must satisfy 1 <= step <= window <= {}",
                self.blocks
            )));
        }
        let mut post = llr.to_vec();
        let mut msg = vec![0.0; self.msg_len];
        let mut stamp = vec![0u64; if cfg.executor == Executor::Lockstep { post.len() } else { 0 }];
        let mut step_id = 0u64;
        let mut bits = vec![0u8; post.len()];
        let (mut iterations, mut cn_updates, mut windows) = (0, 0u64, 0);
        let mut start = 0;
        loop {
            let end = (start + w).min(self.blocks);
            let last = end == self.blocks;
            windows += 1;
            for _ in 0..cfg.max_iter {
                for &layer in &self.order {
                    step_id += 1;
                    self.layer_step(layer, start..end, cfg.executor, cfg.variant, &mut post, &mut msg, &mut stamp, step_id)?;
                }
                iterations += 1;
                cn_updates += self.sweep_cost(start, end - start);
                if cfg.early_stop && self.rows_satisfied(start * self.per_block..end * self.per_block, &post) {
                    break;
                }
            }
            let freeze = if last { end } else { start + s };
            self.freeze(start..freeze, &post, &mut bits);
            if last {
                break;
            }
            start += s;
        }
        let converged = self.is_codeword(&bits);
        Ok(DecodeOutput { bits, iterations, converged, cn_updates, windows })
    }

    /// Hard decisions for the bits of the batches in `range`.
    fn freeze(&self, range: std::ops::Range<usize>, post: &[f64], bits: &mut [u8]) {
        for b in range {
            let cols = &self.batches[b];
            for i in cols.start * self.z..cols.end * self.z {
                bits[i] = u8::from(post[i] < 0.0);
            }
        }
    }
}

/// Full-chain layered decoding.
pub fn decode_layered(dec: &Decoder, llr: &[f64], max_iter: usize, variant: Variant) -> Result<DecodeOutput> {
    dec.decode(llr, &DecodeConfig { variant, max_iter, window: None, executor: Executor::Sequential, early_stop: true })
}

/// Multi-engine decoding: one engine per row block of a window of `w` blocks
/// advancing by `s`, engines in lockstep.
pub fn decode_slme(
    dec: &Decoder,
    llr: &[f64],
    w: usize,
    s: usize,
    max_iter: usize,
    variant: Variant,
) -> Result<DecodeOutput> {
    dec.decode(llr, &DecodeConfig { variant, max_iter, window: Some((w, s)), executor: Executor::Lockstep, early_stop: true })
}

/// Windowed decoding with sequential row updates inside each window.
pub fn decode_windowed(
    dec: &Decoder,
    llr: &[f64],
    w: usize,
    s: usize,
    max_iter: usize,
    variant: Variant,
) -> Result<DecodeOutput> {
    dec.decode(llr, &DecodeConfig { variant, max_iter, window: Some((w, s)), executor: Executor::Sequential, early_stop: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single block, Z = 1: `x0 + x1 + x2 = 0`, `x2 + x3 = 0`.
    fn tree() -> Decoder {
        Decoder::from_rows(vec![vec![(0, 0), (1, 0), (2, 0)], vec![(2, 0), (3, 0)]], 4, 1, 1, 2, vec![1, 0], vec![0..4]).unwrap()
    }

    #[test]
    fn ordering_is_stable_by_degree() {
        use crate::matrix::IntMatrix;
        use crate::profile::{tail_pattern, Shape};
        let rows = [5usize, 2, 7, 2];
        let b: Vec<Vec<i32>> = rows.iter().map(|&d| (0..8).map(|c| i32::from(c < d)).collect()).collect();
        let base = IntMatrix::from_rows(&b).unwrap();
        let shape = Shape { hrc_rows: 4, hrc_cols: 8, rows: 4, cols: 8, coupling_width: 1, punctured: 0, lifting: 0 };
        let p = CodeProfile::from_base(shape, base.clone(), base, tail_pattern(4, 1));
        assert_eq!(layer_ordering(&p), vec![1, 3, 0, 2]);
    }

    #[test]
    fn sum_product_on_tree_matches_map() {
        let dec = tree();
        let llr = [1.2, -0.4, 0.3, -0.9];
        let out = decode_layered(&dec, &llr, 3, Variant::SumProduct).unwrap();
        // bitwise MAP by enumeration over the 4 codewords
        let words: Vec<[u8; 4]> = (0..16u8)
            .map(|x| [x & 1, (x >> 1) & 1, (x >> 2) & 1, (x >> 3) & 1])
            .filter(|w| w[0] ^ w[1] ^ w[2] == 0 && w[2] ^ w[3] == 0)
            .collect();
        for i in 0..4 {
            let mut p = [0.0f64; 2];
            for w in &words {
                let like: f64 = (0..4).map(|j| if w[j] == 0 { (llr[j] / 2.0).exp() } else { (-llr[j] / 2.0).exp() }).product();
                p[w[i] as usize] += like;
            }
            assert_eq!(out.bits[i], u8::from(p[1] > p[0]), "bit {i}");
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let dec = tree();
        let r = decode_layered(&dec, &[f64::INFINITY, 0.0, 0.0, 0.0], 1, Variant::default());
        assert!(matches!(r, Err(Error::Decoder(_))));
    }

    #[test]
    fn strong_codeword_converges_in_one_iteration() {
        let dec = tree();
        let out = decode_layered(&dec, &[50.0; 4], 10, Variant::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.bits, vec![0; 4]);
    }

    #[test]
    fn default_step_is_half_window_rounded_up() {
        assert_eq!(default_step(7), 4);
        assert_eq!(default_step(4), 2);
    }
}
