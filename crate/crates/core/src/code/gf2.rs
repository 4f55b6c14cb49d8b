use super::SparseParityCheck;

/// Dense bit rows, 64 columns per word.
struct BitRows {
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl BitRows {
    fn from_matrix(h: &SparseParityCheck) -> Self {
        let words = h.n_cols().div_ceil(64);
        let rows = h
            .rows()
            .iter()
            .map(|row| {
                let mut bits = vec![0u64; words];
                for &c in row {
                    bits[c / 64] |= 1 << (c % 64);
                }
                bits
            })
            .collect();
        Self { words, rows }
    }

    fn bit(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    /// Reduced row echelon form in place; returns pivot columns in order.
    fn reduce(&mut self, n_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..n_cols {
            let Some(p) = (rank..self.rows.len()).find(|&r| self.bit(r, c)) else {
                continue;
            };
            self.rows.swap(rank, p);
            let pivot = self.rows[rank].clone();
            for r in 0..self.rows.len() {
                if r != rank && self.bit(r, c) {
                    for w in 0..self.words {
                        self.rows[r][w] ^= pivot[w];
                    }
                }
            }
            pivots.push(c);
            rank += 1;
            if rank == self.rows.len() {
                break;
            }
        }
        pivots
    }
}

/// Rank over GF(2) by dense bitset elimination.
pub fn gf2_rank(h: &SparseParityCheck) -> usize {
    BitRows::from_matrix(h).reduce(h.n_cols()).len()
}

/// A basis of the null space of `h` (the code itself), one 0/1 vector per
/// free column of the reduced echelon form.
pub fn nullspace_basis(h: &SparseParityCheck) -> Vec<Vec<u8>> {
    let n = h.n_cols();
    let mut m = BitRows::from_matrix(h);
    let pivots = m.reduce(n);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|free| {
            let mut word = vec![0u8; n];
            word[free] = 1;
            for (r, &p) in pivots.iter().enumerate() {
                if m.bit(r, free) {
                    word[p] = 1;
                }
            }
            word
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{build_qc_matrix, cyclic_shift_variable, tanner_155_shifts};

    #[test]
    fn small_ranks() {
        let eye: Vec<Vec<u8>> = (0..5)
            .map(|i| (0..5).map(|j| u8::from(i == j)).collect())
            .collect();
        assert_eq!(gf2_rank(&SparseParityCheck::from_dense(&eye).unwrap()), 5);
        let zero = vec![vec![0u8; 7]; 3];
        assert_eq!(gf2_rank(&SparseParityCheck::from_dense(&zero).unwrap()), 0);
    }

    #[test]
    fn tanner_rank_is_91() {
        let h = build_qc_matrix(&tanner_155_shifts(), 31).unwrap();
        assert_eq!(gf2_rank(&h), 91);
        assert_eq!(h.n_cols() - gf2_rank(&h), 64);
    }

    #[test]
    fn nullspace_vectors_are_codewords() {
        let h = build_qc_matrix(&tanner_155_shifts(), 31).unwrap();
        let basis = nullspace_basis(&h);
        assert_eq!(basis.len(), 64);
        for w in &basis {
            assert!(h.is_codeword(w).unwrap());
        }
    }

    #[test]
    fn block_cyclic_shift_preserves_codewords() {
        let h = build_qc_matrix(&tanner_155_shifts(), 31).unwrap();
        for w in nullspace_basis(&h).iter().take(10) {
            let mut shifted = vec![0u8; w.len()];
            for (v, &b) in w.iter().enumerate() {
                shifted[cyclic_shift_variable(v, 31, 1)] = b;
            }
            assert!(h.is_codeword(&shifted).unwrap());
        }
    }
}
