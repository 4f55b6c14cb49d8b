use super::{CodeError, SparseParityCheck};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Shift table of a quasi-cyclic array code.
///
/// Block `(i, j)` is the `p × p` identity with its rows cyclically shifted
/// left by `shifts[i][j]`: entry `(r, c)` of the block is one iff
/// `c ≡ r + shifts[i][j] (mod p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcDescriptor {
    pub p: usize,
    pub shifts: Vec<Vec<usize>>,
}

impl QcDescriptor {
    pub fn block_rows(&self) -> usize {
        self.shifts.len()
    }

    pub fn block_cols(&self) -> usize {
        self.shifts.first().map_or(0, Vec::len)
    }
}

/// Exponent table of the length-155 Tanner code with `p = 31`.
pub fn tanner_155_shifts() -> Vec<Vec<usize>> {
    vec![
        vec![1, 2, 4, 8, 16],
        vec![5, 10, 20, 9, 18],
        vec![25, 19, 7, 14, 28],
    ]
}

/// Builds the `d_v·p × d_c·p` block-circulant matrix for `shifts`.
pub fn build_qc_matrix(shifts: &[Vec<usize>], p: usize) -> Result<SparseParityCheck, CodeError> {
    if p == 0 {
        return Err(CodeError::ZeroCirculant);
    }
    let d_c = shifts.first().map_or(0, Vec::len);
    if d_c == 0 || shifts.iter().any(|r| r.len() != d_c) {
        return Err(CodeError::BadShiftTable);
    }
    for (i, row) in shifts.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if s >= p {
                return Err(CodeError::ShiftOutOfRange {
                    row: i,
                    col: j,
                    shift: s,
                    p,
                });
            }
        }
    }
    let mut rows = Vec::with_capacity(shifts.len() * p);
    for row in shifts {
        for r in 0..p {
            rows.push(
                row.iter()
                    .enumerate()
                    .map(|(j, &s)| j * p + (r + s) % p)
                    .collect(),
            );
        }
    }
    let h = SparseParityCheck::from_rows(d_c * p, rows)?;
    Ok(h.with_qc(QcDescriptor {
        p,
        shifts: shifts.to_vec(),
    }))
}

/// Image of variable `v` under the cyclic automorphism applied `t` times:
/// position within its column block advances by `t` modulo `p`.
pub fn cyclic_shift_variable(v: usize, p: usize, t: usize) -> usize {
    let block = v / p;
    block * p + (v % p + t) % p
}

/// Checks that shifting every column and row block by one position maps the
/// matrix onto itself.
pub(crate) fn has_cyclic_automorphism(h: &SparseParityCheck, p: usize) -> bool {
    if p == 0 || h.n_cols() % p != 0 || h.n_rows() % p != 0 {
        return false;
    }
    h.rows().iter().enumerate().all(|(r, row)| {
        let image_row = cyclic_shift_variable(r, p, 1);
        let mut image: Vec<usize> = row.iter().map(|&c| cyclic_shift_variable(c, p, 1)).collect();
        image.sort_unstable();
        image == h.row(image_row)
    })
}

/// A 4-cycle-free `6 × 32` shift table with `p = 64`, found by a seeded
/// randomized greedy search.
///
/// This has the block shape of the 10GBASE-T (2048, 1723) code but not its
/// Reed–Solomon based permutations; it is a structural stand-in only.
pub fn proxy_6_32_shifts() -> Vec<Vec<usize>> {
    four_cycle_free_shifts(6, 32, 64, 0x8023)
}

/// Seeded search for a `d_v × d_c` shift table modulo `p` with no 4-cycles,
/// i.e. for every pair of block rows the column-wise shift differences are
/// distinct.
pub fn four_cycle_free_shifts(d_v: usize, d_c: usize, p: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(d_c <= p, "need d_c ≤ p for a 4-cycle-free table");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'restart: loop {
        // used[i][k][d]: difference d already taken by row pair (i, k), i < k
        let mut used = vec![vec![vec![false; p]; d_v]; d_v];
        let mut table = vec![vec![0usize; d_c]; d_v];
        for j in 0..d_c {
            let mut placed = false;
            for _attempt in 0..2000 {
                let mut col = vec![0usize; d_v];
                let mut ok = true;
                for i in 1..d_v {
                    let candidates: Vec<usize> = (0..p)
                        .filter(|&v| (0..i).all(|k| !used[k][i][(v + p - col[k]) % p]))
                        .collect();
                    if candidates.is_empty() {
                        ok = false;
                        break;
                    }
                    col[i] = candidates[rng.random_range(0..candidates.len())];
                }
                if ok {
                    for i in 0..d_v {
                        for k in (i + 1)..d_v {
                            used[i][k][(col[k] + p - col[i]) % p] = true;
                        }
                        table[i][j] = col[i];
                    }
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'restart;
            }
        }
        return table;
    }
}
