//! Systematic encoder for lifted coupled codes.
//!
//! Rows are solved in coupled order. Every row must reference exactly one
//! proto column whose bits are still unknown; that column is its pivot and is
//! filled in one circulant at a time. The profile layout (lower-triangular
//! parity part in the first sub-matrix, lower-triangular tail blocks)
//! guarantees such an order exists.

use crate::coupled::{CoupledCode, ProtoEntry};
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct Step {
    pivot: ProtoEntry,
    known: Vec<ProtoEntry>,
}

/// Precomputed solve schedule for one coupled code.
#[derive(Clone, Debug)]
pub struct Encoder {
    code: CoupledCode,
    lifting: usize,
    info_cols: Vec<usize>,
    steps: Vec<Step>,
}

impl Encoder {
    pub fn new(code: &CoupledCode) -> Result<Self> {
        let z = code.lifting()?;
        let s = code.profile.shape;
        let k = s.info_cols();
        let mut known = vec![false; code.num_cols()];
        let mut info_cols = Vec::with_capacity(k * code.length);
        for q in 0..code.length {
            for v in 0..k {
                let col = code.batch_start(q) + v;
                known[col] = true;
                info_cols.push(col);
            }
        }
        let mut steps = Vec::with_capacity(code.num_rows());
        for (r, row) in code.rows.iter().enumerate() {
            let (unknown, rest): (Vec<ProtoEntry>, Vec<ProtoEntry>) =
                row.iter().partition(|e| !known[code.column(e)]);
            let [pivot] = unknown[..] else {
                return Err(Error::structure(format!(
                    "coupled row {r} has {} unsolved columns; parity part is not triangular",
                    unknown.len()
                )));
            };
            known[code.column(&pivot)] = true;
            steps.push(Step { pivot, known: rest });
        }
        if let Some(col) = known.iter().position(|&k| !k) {
            return Err(Error::structure(format!("proto column {col} is never solved")));
        }
        Ok(Encoder { code: code.clone(), lifting: z, info_cols, steps })
    }

    pub fn code(&self) -> &CoupledCode {
        &self.code
    }

    /// Information bits per frame.
    pub fn info_len(&self) -> usize {
        self.info_cols.len() * self.lifting
    }

    /// Bits per frame before puncturing.
    pub fn frame_len(&self) -> usize {
        self.code.num_cols() * self.lifting
    }

    /// Bit positions of the information bits, in input order.
    pub fn info_positions(&self) -> impl Iterator<Item = usize> + '_ {
        let z = self.lifting;
        self.info_cols.iter().flat_map(move |&c| c * z..(c + 1) * z)
    }

    /// Encodes `info` (one byte per bit) into the full codeword, punctured
    /// positions included.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_len() {
            return Err(Error::param(format!(
                "expected {} information bits, got {}",
                self.info_len(),
                info.len()
            )));
        }
        let z = self.lifting;
        let mut word = vec![0u8; self.frame_len()];
        for (pos, &b) in self.info_positions().zip(info) {
            word[pos] = b & 1;
        }
        for step in &self.steps {
            let p = self.code.column(&step.pivot) * z;
            let ps = step.pivot.shift as usize;
            for i in 0..z {
                let mut acc = 0u8;
                for e in &step.known {
                    acc ^= word[self.code.column(e) * z + (i + e.shift as usize) % z];
                }
                word[p + (i + ps) % z] = acc;
            }
        }
        Ok(word)
    }
}
