use super::SparseParityCheck;
use std::collections::VecDeque;

/// Length of the shortest cycle of the Tanner graph, `None` if it is a forest.
///
/// Runs a BFS from every variable node; every cycle passes through some
/// variable node, and the BFS rooted on a shortest cycle sees its exact
/// length.
pub fn girth(h: &SparseParityCheck) -> Option<usize> {
    let n = h.n_cols();
    // Node ids: variables 0..n, checks n..n+m.
    let neighbors = |u: usize| -> &[usize] {
        if u < n {
            h.col(u)
        } else {
            h.row(u - n)
        }
    };
    let to_id = |from: usize, x: usize| if from < n { n + x } else { x };
    let total = n + h.n_rows();
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut best = usize::MAX;
    let mut queue = VecDeque::new();
    let mut touched = Vec::new();
    for root in 0..n {
        for &t in &touched {
            dist[t] = usize::MAX;
            parent[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] >= best {
                break;
            }
            for &x in neighbors(u) {
                let w = to_id(u, x);
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}
