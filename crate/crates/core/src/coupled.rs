//! Coupled protomatrix and lifted parity-check matrix.
//!
//! Proto rows are numbered `block * m + c` for row block `block` in
//! `0..L+w`. Proto columns come in batches: batches `0..L` hold the `n`
//! columns of each spatial position, batches `L..L+w` hold the `m` columns of
//! each tail block.

use crate::profile::CodeProfile;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtoEntry {
    pub batch: usize,
    pub offset: usize,
    pub shift: u32,
}

#[derive(Clone, Debug)]
pub struct CoupledCode {
    pub profile: CodeProfile,
    pub length: usize,
    /// Sparse proto rows in row-block-major order.
    pub rows: Vec<Vec<ProtoEntry>>,
    /// One flag per proto column.
    pub punct_mask: Vec<bool>,
}

impl CoupledCode {
    /// Expands `profile` into `length` coupled replicas plus the tail.
    pub fn new(profile: &CodeProfile, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::param("coupling length must be at least 1"));
        }
        let s = profile.shape;
        let (m, n, w) = (s.rows, s.cols, s.coupling_width);
        let mut rows = Vec::with_capacity(m * (length + w));
        for block in 0..length + w {
            for c in 0..m {
                let mut row = Vec::new();
                for v in 0..n {
                    if !profile.has_edge(c, v) {
                        continue;
                    }
                    let t = profile.spread[(c, v)];
                    if t < 0 || t as usize > w {
                        return Err(Error::structure(format!("label {t} at ({c},{v})")));
                    }
                    if let Some(q) = block.checked_sub(t as usize).filter(|&q| q < length) {
                        row.push(ProtoEntry {
                            batch: q,
                            offset: v,
                            shift: profile.shifts[(c, v)].max(0) as u32,
                        });
                    }
                }
                if block >= length {
                    let j = block - length;
                    for r in 0..m {
                        if profile.tail[(c, j * m + r)] != 0 {
                            row.push(ProtoEntry { batch: length + j, offset: r, shift: 0 });
                        }
                    }
                }
                rows.push(row);
            }
        }
        let mut punct_mask = vec![false; n * length + m * w];
        for q in 0..length {
            for v in 0..s.punctured {
                punct_mask[q * n + v] = true;
            }
        }
        for j in 0..w {
            for r in 0..s.punctured.min(m) {
                punct_mask[length * n + j * m + r] = true;
            }
        }
        Ok(CoupledCode { profile: profile.clone(), length, rows, punct_mask })
    }

    pub fn row_blocks(&self) -> usize {
        self.length + self.profile.shape.coupling_width
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.punct_mask.len()
    }

    pub fn num_batches(&self) -> usize {
        self.length + self.profile.shape.coupling_width
    }

    /// First proto column of `batch`.
    pub fn batch_start(&self, batch: usize) -> usize {
        let s = self.profile.shape;
        if batch <= self.length {
            batch * s.cols
        } else {
            self.length * s.cols + (batch - self.length) * s.rows
        }
    }

    pub fn batch_width(&self, batch: usize) -> usize {
        if batch < self.length {
            self.profile.shape.cols
        } else {
            self.profile.shape.rows
        }
    }

    pub fn column(&self, e: &ProtoEntry) -> usize {
        self.batch_start(e.batch) + e.offset
    }

    /// Total number of proto edges.
    pub fn weight(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Circulant size used for lifting; errors for unlifted profiles.
    pub fn lifting(&self) -> Result<usize> {
        match self.profile.shape.lifting {
            0 => Err(Error::param("profile is not lifted (lifting size 0)")),
            z => Ok(z),
        }
    }

    /// Dense 0/1 coupled protomatrix.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; self.num_cols()]; self.num_rows()];
        for (r, row) in self.rows.iter().enumerate() {
            for e in row {
                out[r][self.column(e)] += 1;
            }
        }
        out
    }

    /// Bit-level parity-check matrix.
    pub fn lift(&self) -> Result<SparseParity> {
        let z = self.lifting()?;
        let mut row_cols = Vec::with_capacity(self.num_rows() * z);
        for row in &self.rows {
            for i in 0..z {
                let mut cols: Vec<usize> = row
                    .iter()
                    .map(|e| self.column(e) * z + (i + e.shift as usize) % z)
                    .collect();
                cols.sort_unstable();
                row_cols.push(cols);
            }
        }
        Ok(SparseParity { cols: self.num_cols() * z, row_cols })
    }

    /// Transmitted bit positions and, for each bit, its index in the
    /// transmitted stream (`None` when punctured).
    pub fn puncture_map(&self) -> Result<PunctureMap> {
        let z = self.lifting()?;
        let mut transmit = Vec::new();
        let mut inverse = vec![None; self.num_cols() * z];
        for (col, &p) in self.punct_mask.iter().enumerate() {
            if p {
                continue;
            }
            for i in 0..z {
                inverse[col * z + i] = Some(transmit.len());
                transmit.push(col * z + i);
            }
        }
        Ok(PunctureMap { transmit, inverse })
    }
}

#[derive(Clone, Debug)]
pub struct PunctureMap {
    pub transmit: Vec<usize>,
    pub inverse: Vec<Option<usize>>,
}

/// Sparse binary parity-check matrix, one sorted column list per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseParity {
    pub cols: usize,
    pub row_cols: Vec<Vec<usize>>,
}

impl SparseParity {
    pub fn rows(&self) -> usize {
        self.row_cols.len()
    }

    /// Syndrome of a hard-decision word (one byte per bit, 0 or 1).
    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.row_cols
            .iter()
            .map(|cols| cols.iter().fold(0u8, |acc, &c| acc ^ (word[c] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        self.row_cols
            .iter()
            .all(|cols| cols.iter().fold(0u8, |acc, &c| acc ^ (word[c] & 1)) == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::profile::{tail_pattern, Shape};

    fn tiny(lifting: usize) -> CodeProfile {
        let shape = Shape {
            hrc_rows: 2,
            hrc_cols: 4,
            rows: 2,
            cols: 4,
            coupling_width: 1,
            punctured: 1,
            lifting,
        };
        let base = IntMatrix::from_rows(&[vec![1, 1, 1, 1], vec![1, 1, 1, 1]]).unwrap();
        let spread = IntMatrix::from_rows(&[vec![0, 1, 0, 1], vec![0, 0, 1, 0]]).unwrap();
        CodeProfile::from_base(shape, base, spread, tail_pattern(2, 1))
    }

    #[test]
    fn single_replica_layout() {
        let cc = CoupledCode::new(&tiny(0), 1).unwrap();
        let d = cc.dense();
        assert_eq!(d.len(), 4);
        assert_eq!(d[0], vec![1, 0, 1, 0, 0, 0]);
        assert_eq!(d[1], vec![1, 1, 0, 1, 0, 0]);
        assert_eq!(d[2], vec![0, 1, 0, 1, 1, 0]);
        assert_eq!(d[3], vec![0, 0, 1, 0, 1, 1]);
        assert_eq!(cc.punct_mask, vec![true, false, false, false, true, false]);
    }

    #[test]
    fn unit_lifting_equals_proto() {
        let cc = CoupledCode::new(&tiny(1), 3).unwrap();
        let h = cc.lift().unwrap();
        let d = cc.dense();
        for (r, cols) in h.row_cols.iter().enumerate() {
            let expect: Vec<usize> = (0..d[r].len()).filter(|&c| d[r][c] == 1).collect();
            assert_eq!(cols, &expect);
        }
    }
}
