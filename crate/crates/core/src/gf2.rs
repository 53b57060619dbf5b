//! Dense GF(2) helpers for rank checks.

use crate::matrix::IntMatrix;

/// Rank over GF(2) of a 0/1 matrix (nonzero entries count as 1).
pub fn rank(m: &IntMatrix) -> usize {
    let words = m.cols().div_ceil(64);
    let mut rows: Vec<Vec<u64>> = (0..m.rows())
        .map(|r| {
            let mut bits = vec![0u64; words];
            for c in 0..m.cols() {
                if m[(r, c)] != 0 {
                    bits[c / 64] |= 1 << (c % 64);
                }
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for c in 0..m.cols() {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c / 64] >> (c % 64) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c / 64] >> (c % 64) & 1 == 1 {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_small_matrices() {
        let id = IntMatrix::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(rank(&id), 2);
        let dup = IntMatrix::from_rows(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(rank(&dup), 1);
        let sum = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(rank(&sum), 2);
    }
}
