//! MacKay's alist text format.
//!
//! ```text
//! n m
//! max_col_weight max_row_weight
//! <n column weights>
//! <m row weights>
//! <n lines: 1-indexed check indices of each column, zero padded>
//! <m lines: 1-indexed variable indices of each row, zero padded>
//! ```

use super::{CodeError, SparseParityCheck};
use std::fmt::Write as _;
use std::path::Path;

fn bad(msg: impl Into<String>) -> CodeError {
    CodeError::Alist(msg.into())
}

struct Tokens<'a> {
    inner: std::str::SplitWhitespace<'a>,
}

impl Tokens<'_> {
    fn next(&mut self, what: &str) -> Result<usize, CodeError> {
        let tok = self
            .inner
            .next()
            .ok_or_else(|| bad(format!("unexpected end of input reading {what}")))?;
        tok.parse()
            .map_err(|_| bad(format!("invalid integer {tok:?} reading {what}")))
    }
}

fn read_lists(
    tokens: &mut Tokens<'_>,
    weights: &[usize],
    limit: usize,
    what: &str,
) -> Result<Vec<Vec<usize>>, CodeError> {
    let mut lists = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let mut list = Vec::with_capacity(w);
        while list.len() < w {
            // zeros are padding and never valid indices
            let idx = tokens.next(what)?;
            if idx == 0 {
                continue;
            }
            if idx > limit {
                return Err(bad(format!(
                    "{what} {}: neighbor index {idx} outside 1..={limit}",
                    i + 1
                )));
            }
            if list.contains(&(idx - 1)) {
                return Err(bad(format!("{what} {}: duplicate neighbor {idx}", i + 1)));
            }
            list.push(idx - 1);
        }
        lists.push(list);
    }
    Ok(lists)
}

pub fn parse_alist(text: &str) -> Result<SparseParityCheck, CodeError> {
    let mut t = Tokens {
        inner: text.split_whitespace(),
    };
    let n = t.next("n")?;
    let m = t.next("m")?;
    let max_col = t.next("max column weight")?;
    let max_row = t.next("max row weight")?;
    let col_w = (0..n).map(|_| t.next("column weight")).collect::<Result<Vec<_>, _>>()?;
    let row_w = (0..m).map(|_| t.next("row weight")).collect::<Result<Vec<_>, _>>()?;
    if col_w.iter().any(|&w| w > max_col) || row_w.iter().any(|&w| w > max_row) {
        return Err(bad("a node weight exceeds the declared maximum"));
    }
    if col_w.iter().sum::<usize>() != row_w.iter().sum::<usize>() {
        return Err(bad("column and row weights have different totals"));
    }
    let cols = read_lists(&mut t, &col_w, m, "column")?;
    let rows = read_lists(&mut t, &row_w, n, "row")?;
    if t.inner.any(|tok| tok != "0") {
        return Err(bad("trailing data after row lists"));
    }
    SparseParityCheck::from_both(m, n, rows, cols).map_err(|e| match e {
        CodeError::TransposeMismatch => bad("row lists and column lists disagree"),
        other => other,
    })
}

pub fn load_alist(path: impl AsRef<Path>) -> Result<SparseParityCheck, CodeError> {
    parse_alist(&std::fs::read_to_string(path)?)
}

pub fn write_alist(h: &SparseParityCheck) -> String {
    let mut s = String::new();
    let max_col = h.max_col_weight();
    let max_row = h.max_row_weight();
    let join = |v: &mut dyn Iterator<Item = usize>| {
        v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(s, "{} {}", h.n_cols(), h.n_rows());
    let _ = writeln!(s, "{max_col} {max_row}");
    let _ = writeln!(s, "{}", join(&mut h.cols().iter().map(Vec::len)));
    let _ = writeln!(s, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for col in h.cols() {
        let padded = col.iter().map(|&r| r + 1).chain(std::iter::repeat(0)).take(max_col);
        let _ = writeln!(s, "{}", join(&mut padded.into_iter()));
    }
    for row in h.rows() {
        let padded = row.iter().map(|&c| c + 1).chain(std::iter::repeat(0)).take(max_row);
        let _ = writeln!(s, "{}", join(&mut padded.into_iter()));
    }
    s
}

pub fn save_alist(h: &SparseParityCheck, path: impl AsRef<Path>) -> Result<(), CodeError> {
    std::fs::write(path, write_alist(h))?;
    Ok(())
}
