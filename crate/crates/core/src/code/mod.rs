//! Sparse parity-check matrices and their Tanner graphs.
//!
//! A [`SparseParityCheck`] stores both the row view (check → variables) and
//! the column view (variable → checks) of a binary matrix. The two views are
//! validated against each other on every construction path.

mod alist;
mod gf2;
mod girth;
mod qc;
mod random;

pub use alist::{load_alist, parse_alist, save_alist, write_alist};
pub use gf2::{gf2_rank, nullspace_basis};
pub use girth::girth;
pub use random::random_regular;
pub(crate) use qc::has_cyclic_automorphism;
pub use qc::{
    build_qc_matrix, cyclic_shift_variable, four_cycle_free_shifts, proxy_6_32_shifts, tanner_155_shifts, QcDescriptor,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("circulant size must be positive")]
    ZeroCirculant,
    #[error("shift table is empty or ragged")]
    BadShiftTable,
    #[error("shift {shift} at block ({row}, {col}) is outside [0, {p})")]
    ShiftOutOfRange {
        row: usize,
        col: usize,
        shift: usize,
        p: usize,
    },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("duplicate index {index} in support list {list}")]
    DuplicateIndex { list: usize, index: usize },
    #[error("row and column views disagree")]
    TransposeMismatch,
    #[error("word length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no regular graph: {0}")]
    Ensemble(String),
    #[error("alist parse error: {0}")]
    Alist(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Binary `n_rows × n_cols` matrix with sorted row and column supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseParityCheck {
    n_rows: usize,
    n_cols: usize,
    row_support: Vec<Vec<usize>>,
    col_support: Vec<Vec<usize>>,
    qc: Option<QcDescriptor>,
}

impl SparseParityCheck {
    /// Builds a matrix from per-row variable lists. Lists are sorted here;
    /// duplicates and out-of-range indices are rejected.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self, CodeError> {
        let n_rows = rows.len();
        let mut row_support = rows;
        let mut col_support = vec![Vec::new(); n_cols];
        for (r, row) in row_support.iter_mut().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(CodeError::DuplicateIndex { list: r, index: w[0] });
                }
            }
            for &c in row.iter() {
                if c >= n_cols {
                    return Err(CodeError::IndexOutOfRange { index: c, limit: n_cols });
                }
                col_support[c].push(r);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_support,
            col_support,
            qc: None,
        })
    }

    /// Builds a matrix from both views and checks that they describe the same
    /// set of ones.
    pub fn from_both(
        n_rows: usize,
        n_cols: usize,
        rows: Vec<Vec<usize>>,
        cols: Vec<Vec<usize>>,
    ) -> Result<Self, CodeError> {
        if rows.len() != n_rows || cols.len() != n_cols {
            return Err(CodeError::TransposeMismatch);
        }
        let mut cols = cols;
        for (c, col) in cols.iter_mut().enumerate() {
            col.sort_unstable();
            for w in col.windows(2) {
                if w[0] == w[1] {
                    return Err(CodeError::DuplicateIndex { list: c, index: w[0] });
                }
            }
            if let Some(&r) = col.iter().find(|&&r| r >= n_rows) {
                return Err(CodeError::IndexOutOfRange { index: r, limit: n_rows });
            }
        }
        let m = Self::from_rows(n_cols, rows)?;
        if m.col_support != cols {
            return Err(CodeError::TransposeMismatch);
        }
        Ok(m)
    }

    /// Dense constructor, mostly for tests and tiny codes.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self, CodeError> {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut support = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != n_cols {
                return Err(CodeError::LengthMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            support.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .map(|(j, _)| j)
                    .collect(),
            );
        }
        Self::from_rows(n_cols, support)
    }

    pub(crate) fn with_qc(mut self, qc: QcDescriptor) -> Self {
        self.qc = Some(qc);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_support[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_support[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.row_support
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.col_support
    }

    pub fn qc(&self) -> Option<&QcDescriptor> {
        self.qc.as_ref()
    }

    /// Total number of ones.
    pub fn n_edges(&self) -> usize {
        self.row_support.iter().map(Vec::len).sum()
    }

    pub fn max_col_weight(&self) -> usize {
        self.col_support.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_row_weight(&self) -> usize {
        self.row_support.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `(weight, count)` pairs for columns and rows, ascending by weight.
    pub fn degree_profile(&self) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        fn hist(lists: &[Vec<usize>]) -> Vec<(usize, usize)> {
            let mut h = std::collections::BTreeMap::new();
            for l in lists {
                *h.entry(l.len()).or_insert(0) += 1;
            }
            h.into_iter().collect()
        }
        (hist(&self.col_support), hist(&self.row_support))
    }

    /// Regular `(d_v, d_c)` pair when every column and every row has the same
    /// weight.
    pub fn regular_degrees(&self) -> Option<(usize, usize)> {
        let (cols, rows) = self.degree_profile();
        match (cols.as_slice(), rows.as_slice()) {
            ([(dv, _)], [(dc, _)]) => Some((*dv, *dc)),
            _ => None,
        }
    }

    /// Coordinates `(row, col)` of every one, row-major. This is the dot-plot
    /// data of the matrix.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_support
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r, c)))
    }

    /// `H · word` over GF(2).
    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>, CodeError> {
        if word.len() != self.n_cols {
            return Err(CodeError::LengthMismatch {
                expected: self.n_cols,
                got: word.len(),
            });
        }
        Ok(self
            .row_support
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ (word[c] & 1)))
            .collect())
    }

    pub fn is_codeword(&self, word: &[u8]) -> Result<bool, CodeError> {
        Ok(self.syndrome(word)?.iter().all(|&s| s == 0))
    }
}

/// Edge-indexed view of a parity-check matrix.
///
/// Edges are numbered check-major: the edges of check `c` occupy the
/// contiguous id range `check_range(c)`, in ascending variable order.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    n_vars: usize,
    edge_var: Vec<usize>,
    edge_check: Vec<usize>,
    check_start: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(h: &SparseParityCheck) -> Self {
        let mut edge_var = Vec::with_capacity(h.n_edges());
        let mut edge_check = Vec::with_capacity(h.n_edges());
        let mut check_start = Vec::with_capacity(h.n_rows() + 1);
        let mut var_edges = vec![Vec::new(); h.n_cols()];
        for (c, row) in h.rows().iter().enumerate() {
            check_start.push(edge_var.len());
            for &v in row {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
                edge_check.push(c);
            }
        }
        check_start.push(edge_var.len());
        Self {
            n_vars: h.n_cols(),
            edge_var,
            edge_check,
            check_start,
            var_edges,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.edge_check[e], self.edge_var[e])
    }

    pub fn edge_id(&self, check: usize, var: usize) -> Option<usize> {
        let range = self.check_range(check);
        let vars = &self.edge_var[range.clone()];
        vars.binary_search(&var).ok().map(|i| range.start + i)
    }

    pub fn check_range(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn edge_vars(&self) -> &[usize] {
        &self.edge_var
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_consistency() {
        let h = build_qc_matrix(&tanner_155_shifts(), 31).unwrap();
        for (r, row) in h.rows().iter().enumerate() {
            for &c in row {
                assert!(h.col(c).binary_search(&r).is_ok());
            }
        }
        let col_total: usize = h.cols().iter().map(Vec::len).sum();
        assert_eq!(col_total, h.n_edges());
    }

    #[test]
    fn from_both_rejects_mismatch() {
        let rows = vec![vec![0, 1], vec![1]];
        let cols = vec![vec![0], vec![0]];
        assert!(matches!(
            SparseParityCheck::from_both(2, 2, rows, cols),
            Err(CodeError::TransposeMismatch)
        ));
    }

    #[test]
    fn duplicate_rejected() {
        assert!(matches!(
            SparseParityCheck::from_rows(3, vec![vec![0, 2, 2]]),
            Err(CodeError::DuplicateIndex { .. })
        ));
    }

    #[test]
    fn syndrome_of_zero_and_unit_words() {
        let h = build_qc_matrix(&tanner_155_shifts(), 31).unwrap();
        let zero = vec![0u8; 155];
        assert!(h.is_codeword(&zero).unwrap());
        assert!(h.syndrome(&zero).unwrap().iter().all(|&s| s == 0));
        let j = 47;
        let mut unit = zero.clone();
        unit[j] = 1;
        let s = h.syndrome(&unit).unwrap();
        let expected: Vec<usize> = (0..h.n_rows()).filter(|&r| s[r] == 1).collect();
        assert_eq!(expected, h.col(j));
    }

    #[test]
    fn syndrome_length_mismatch() {
        let h = SparseParityCheck::from_dense(&[vec![1, 1, 0]]).unwrap();
        assert!(matches!(
            h.syndrome(&[0, 1]),
            Err(CodeError::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn tanner_graph_edge_bijection() {
        let h = build_qc_matrix(&tanner_155_shifts(), 31).unwrap();
        let g = TannerGraph::new(&h);
        assert_eq!(g.n_edges(), h.n_edges());
        for e in 0..g.n_edges() {
            let (c, v) = g.edge(e);
            assert_eq!(g.edge_id(c, v), Some(e));
            assert!(g.var_edges(v).contains(&e));
        }
        let per_var: usize = (0..g.n_vars()).map(|v| g.var_edges(v).len()).sum();
        assert_eq!(per_var, g.n_edges());
    }
}
