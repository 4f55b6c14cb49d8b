use super::{CodeError, SparseParityCheck};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random `(d_v, d_c)`-regular matrix with `n` columns from a seeded socket
/// permutation. Repeated variable-check pairs are removed by random edge
/// swaps, so every entry is 0 or 1 and all degrees are exact.
pub fn random_regular(n: usize, d_v: usize, d_c: usize, seed: u64) -> Result<SparseParityCheck, CodeError> {
    if d_v == 0 || d_c == 0 || n * d_v % d_c != 0 || d_c > n {
        return Err(CodeError::Ensemble(format!("n = {n}, d_v = {d_v}, d_c = {d_c}")));
    }
    let m = n * d_v / d_c;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sockets: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d_v)).collect();
    sockets.shuffle(&mut rng);
    // edge e joins check e / d_c and variable sockets[e]
    let check_of = |e: usize| e / d_c;
    let mut rows: Vec<Vec<usize>> = sockets.chunks(d_c).map(<[usize]>::to_vec).collect();
    let count = |rows: &[Vec<usize>], c: usize, v: usize| rows[c].iter().filter(|&&x| x == v).count();
    let total = sockets.len();
    for _ in 0..100 * total {
        let Some(e) = (0..total).find(|&e| count(&rows, check_of(e), rows[check_of(e)][e % d_c]) > 1) else {
            let rows = rows.into_iter().map(|mut r| {
                r.sort_unstable();
                r
            });
            return SparseParityCheck::from_rows(n, rows.collect());
        };
        let f = rng.random_range(0..total);
        let (ce, cf) = (check_of(e), check_of(f));
        let (ve, vf) = (rows[ce][e % d_c], rows[cf][f % d_c]);
        if ce == cf || count(&rows, ce, vf) > 0 || count(&rows, cf, ve) > 0 {
            continue;
        }
        rows[ce][e % d_c] = vf;
        rows[cf][f % d_c] = ve;
    }
    Err(CodeError::Ensemble(format!("could not remove repeated edges for {m} checks")))
}
