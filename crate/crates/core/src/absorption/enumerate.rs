//! Exhaustive enumeration of absorption sets.
//!
//! Connected sets (connected through shared checks) are enumerated with the
//! ESU scheme: every connected subset is generated exactly once, rooted at
//! its smallest variable. Two bounds prune a partial set `S` with `r`
//! variables still to add:
//!
//! * the odd-check count drops by at most `d_v` per added variable, so
//!   `b(S) − d_v·r > b_max` is hopeless;
//! * a member's even-check count rises by at most `s` per added variable,
//!   `s` being the largest number of checks two variables share, so a member
//!   that cannot reach a majority ends the branch.
//!
//! Under a cyclic automorphism of order `p` only roots at block position 0
//! are expanded and only the lexicographically smallest image of each orbit
//! is kept; orbits are expanded afterwards. Disconnected absorption sets are
//! unions of pairwise check-disjoint connected ones and are composed from
//! the connected list.

use super::incidence;
use crate::code::{cyclic_shift_variable, has_cyclic_automorphism, SparseParityCheck};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

#[derive(Debug, thiserror::Error)]
pub enum EnumerateError {
    #[error("matrix has no cyclic automorphism of order {0}")]
    NotQuasiCyclic(usize),
    #[error("a_max must be at least 1")]
    EmptyRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    pub a_max: usize,
    pub b_max: usize,
    /// Circulant size of a cyclic automorphism to exploit.
    #[serde(default)]
    pub qc_symmetry: Option<usize>,
    /// Search-tree node budget; exceeding it yields a non-exhaustive result.
    #[serde(default)]
    pub node_budget: Option<u64>,
    #[serde(default = "default_true")]
    pub include_disconnected: bool,
}

fn default_true() -> bool {
    true
}

impl EnumerationOptions {
    pub fn new(a_max: usize, b_max: usize) -> Self {
        Self {
            a_max,
            b_max,
            qc_symmetry: None,
            node_budget: None,
            include_disconnected: true,
        }
    }

    pub fn with_qc(mut self, p: usize) -> Self {
        self.qc_symmetry = Some(p);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumerationResult {
    pub exhaustive: bool,
    pub nodes_visited: u64,
    /// Every set found, as sorted variable lists, grouped by `(a, b)` and
    /// sorted within each group.
    pub sets: BTreeMap<(usize, usize), Vec<Vec<usize>>>,
}

impl EnumerationResult {
    pub fn multiplicities(&self) -> BTreeMap<(usize, usize), usize> {
        self.sets.iter().map(|(&k, v)| (k, v.len())).collect()
    }

    pub fn count(&self, a: usize, b: usize) -> usize {
        self.sets.get(&(a, b)).map_or(0, Vec::len)
    }

    pub fn get(&self, a: usize, b: usize) -> &[Vec<usize>] {
        self.sets.get(&(a, b)).map_or(&[], Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.sets.values().flatten()
    }
}

struct Search<'a> {
    h: &'a SparseParityCheck,
    /// Variables sharing at least one check, sorted.
    nbrs: Vec<Vec<usize>>,
    a_max: usize,
    b_max: usize,
    d_v: usize,
    max_shared: usize,
    p: Option<usize>,
    budget: u64,
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
}

/// Mutable state of one search branch.
struct Branch {
    sub: Vec<usize>,
    in_sub: Vec<bool>,
    /// Members of `sub` adjacent to each variable.
    near: Vec<u32>,
    check_count: Vec<u32>,
    odd: usize,
    local_nodes: u64,
}

impl Branch {
    fn new(n: usize, m: usize) -> Self {
        Self {
            sub: Vec::new(),
            in_sub: vec![false; n],
            near: vec![0; n],
            check_count: vec![0; m],
            odd: 0,
            local_nodes: 0,
        }
    }

    fn push(&mut self, s: &Search<'_>, w: usize) {
        self.sub.push(w);
        self.in_sub[w] = true;
        for &u in &s.nbrs[w] {
            self.near[u] += 1;
        }
        for &c in s.h.col(w) {
            self.check_count[c] += 1;
            if self.check_count[c] % 2 == 1 {
                self.odd += 1;
            } else {
                self.odd -= 1;
            }
        }
    }

    fn pop(&mut self, s: &Search<'_>) {
        let w = self.sub.pop().expect("pop on empty branch");
        self.in_sub[w] = false;
        for &u in &s.nbrs[w] {
            self.near[u] -= 1;
        }
        for &c in s.h.col(w) {
            self.check_count[c] -= 1;
            if self.check_count[c] % 2 == 1 {
                self.odd += 1;
            } else {
                self.odd -= 1;
            }
        }
    }

    /// `(is absorption set, worth extending)`.
    fn assess(&self, s: &Search<'_>) -> (bool, bool) {
        let remaining = s.a_max - self.sub.len();
        let mut majority = true;
        let mut reachable = self.odd <= s.b_max + s.d_v * remaining;
        for &u in &self.sub {
            let col = s.h.col(u);
            let even = col.iter().filter(|&&c| self.check_count[c] % 2 == 0).count();
            let need = col.len() / 2 + 1;
            if even < need {
                majority = false;
                if even + s.max_shared * remaining < need {
                    reachable = false;
                    break;
                }
            }
        }
        (majority && self.odd <= s.b_max, reachable && remaining > 0)
    }
}

impl Search<'_> {
    fn canonical_orbit(&self, set: &[usize]) -> Option<usize> {
        let Some(p) = self.p else {
            return Some(1);
        };
        let mut distinct = HashSet::new();
        for t in 0..p {
            let mut img: Vec<usize> = set.iter().map(|&v| cyclic_shift_variable(v, p, t)).collect();
            img.sort_unstable();
            if img.as_slice() < set {
                return None;
            }
            distinct.insert(img);
        }
        Some(distinct.len())
    }

    fn tick(&self, br: &mut Branch) -> bool {
        br.local_nodes += 1;
        if br.local_nodes % 4096 == 0 {
            let total = self.nodes.fetch_add(4096, Ordering::Relaxed) + 4096;
            if total > self.budget {
                self.stop.store(true, Ordering::Relaxed);
            }
        }
        !self.stop.load(Ordering::Relaxed)
    }

    fn visit(&self, br: &mut Branch, root: usize, ext: &[usize], found: &mut Vec<Vec<usize>>) {
        if !self.tick(br) {
            return;
        }
        let (accept, extend) = br.assess(self);
        if accept {
            let mut set = br.sub.clone();
            set.sort_unstable();
            if self.canonical_orbit(&set).is_some() {
                found.push(set);
            }
        }
        if !extend {
            return;
        }
        let mut ext = ext.to_vec();
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            next.extend(
                self.nbrs[w]
                    .iter()
                    .copied()
                    .filter(|&u| u > root && !br.in_sub[u] && br.near[u] == 0),
            );
            br.push(self, w);
            self.visit(br, root, &next, found);
            br.pop(self);
        }
    }

    /// Runs the branch of `root` that picks `ext0[i]` as its second member
    /// (`i = None` handles the single-variable node itself).
    fn run_task(&self, root: usize, i: Option<usize>) -> (Vec<Vec<usize>>, u64) {
        let mut br = Branch::new(self.h.n_cols(), self.h.n_rows());
        let mut found = Vec::new();
        br.push(self, root);
        let ext0: Vec<usize> = self.nbrs[root].iter().copied().filter(|&u| u > root).collect();
        match i {
            None => {
                let (accept, _) = br.assess(self);
                if accept && self.canonical_orbit(&[root]).is_some() {
                    found.push(vec![root]);
                }
            }
            Some(i) if self.a_max >= 2 && br.assess(self).1 => {
                let w = ext0[i];
                let mut next = ext0[..i].to_vec();
                next.extend(
                    self.nbrs[w]
                        .iter()
                        .copied()
                        .filter(|&u| u > root && !br.in_sub[u] && br.near[u] == 0),
                );
                br.push(self, w);
                self.visit(&mut br, root, &next, &mut found);
            }
            Some(_) => {}
        }
        (found, br.local_nodes % 4096)
    }
}

fn variable_neighbors(h: &SparseParityCheck) -> (Vec<Vec<usize>>, usize) {
    let mut max_shared = 0;
    let nbrs = (0..h.n_cols())
        .map(|v| {
            let mut all: Vec<usize> = h
                .col(v)
                .iter()
                .flat_map(|&c| h.row(c).iter().copied())
                .filter(|&u| u != v)
                .collect();
            all.sort_unstable();
            let mut out: Vec<usize> = Vec::with_capacity(all.len());
            let mut run = 0;
            for (k, &u) in all.iter().enumerate() {
                run = if k > 0 && all[k - 1] == u { run + 1 } else { 1 };
                max_shared = max_shared.max(run);
                if out.last() != Some(&u) {
                    out.push(u);
                }
            }
            out
        })
        .collect();
    (nbrs, max_shared)
}

/// Enumerates all absorption sets with `a ≤ a_max` and `b ≤ b_max`.
pub fn enumerate_sets(h: &SparseParityCheck, opts: &EnumerationOptions) -> Result<EnumerationResult, EnumerateError> {
    if opts.a_max == 0 {
        return Err(EnumerateError::EmptyRange);
    }
    if let Some(p) = opts.qc_symmetry {
        if !has_cyclic_automorphism(h, p) {
            return Err(EnumerateError::NotQuasiCyclic(p));
        }
    }
    let (nbrs, max_shared) = variable_neighbors(h);
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let search = Search {
        h,
        nbrs,
        a_max: opts.a_max,
        b_max: opts.b_max,
        d_v: h.max_col_weight(),
        max_shared,
        p: opts.qc_symmetry,
        budget: opts.node_budget.unwrap_or(u64::MAX),
        nodes: &nodes,
        stop: &stop,
    };
    let roots: Vec<usize> = (0..h.n_cols())
        .filter(|&v| opts.qc_symmetry.is_none_or(|p| v % p == 0))
        .collect();
    let tasks: Vec<(usize, Option<usize>)> = roots
        .iter()
        .flat_map(|&r| {
            let k = search.nbrs[r].iter().filter(|&&u| u > r).count();
            std::iter::once((r, None)).chain((0..k).map(move |i| (r, Some(i))))
        })
        .collect();
    let results: Vec<(Vec<Vec<usize>>, u64)> = tasks
        .par_iter()
        .map(|&(r, i)| search.run_task(r, i))
        .collect();
    let mut reps: Vec<Vec<usize>> = Vec::new();
    let mut leftover = 0;
    for (found, rest) in results {
        reps.extend(found);
        leftover += rest;
    }
    let nodes_visited = nodes.load(Ordering::Relaxed) + leftover;
    let exhaustive = !stop.load(Ordering::Relaxed);

    let mut connected: Vec<Vec<usize>> = match opts.qc_symmetry {
        None => reps,
        Some(p) => {
            let mut all = HashSet::new();
            for set in &reps {
                for t in 0..p {
                    let mut img: Vec<usize> = set.iter().map(|&v| cyclic_shift_variable(v, p, t)).collect();
                    img.sort_unstable();
                    all.insert(img);
                }
            }
            all.into_iter().collect()
        }
    };
    connected.sort_unstable();
    let mut all = connected.clone();
    if opts.include_disconnected {
        all.extend(compose_disconnected(h, &connected, opts.a_max, opts.b_max));
    }
    let mut sets: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
    for set in all {
        let b = incidence(h, &set).values().filter(|&&k| k % 2 == 1).count();
        sets.entry((set.len(), b)).or_default().push(set);
    }
    for group in sets.values_mut() {
        group.sort_unstable();
    }
    Ok(EnumerationResult {
        exhaustive,
        nodes_visited,
        sets,
    })
}

/// Unions of two or more pairwise check-disjoint connected absorption sets
/// within the size and odd-check limits.
fn compose_disconnected(
    h: &SparseParityCheck,
    connected: &[Vec<usize>],
    a_max: usize,
    b_max: usize,
) -> Vec<Vec<usize>> {
    struct Part {
        vars: Vec<usize>,
        checks: HashSet<usize>,
        b: usize,
    }
    let parts: Vec<Part> = connected
        .iter()
        .map(|s| {
            let count = incidence(h, s);
            Part {
                vars: s.clone(),
                b: count.values().filter(|&&k| k % 2 == 1).count(),
                checks: count.into_keys().collect(),
            }
        })
        .collect();
    let min_a = parts.iter().map(|p| p.vars.len()).min().unwrap_or(usize::MAX);
    if min_a.saturating_mul(2) > a_max {
        return Vec::new();
    }
    let mut out = Vec::new();
    fn grow(
        parts: &[Part],
        start: usize,
        chosen: &mut Vec<usize>,
        a: usize,
        b: usize,
        limits: (usize, usize),
        out: &mut Vec<Vec<usize>>,
    ) {
        if chosen.len() >= 2 {
            let mut vars: Vec<usize> = chosen.iter().flat_map(|&i| parts[i].vars.iter().copied()).collect();
            vars.sort_unstable();
            out.push(vars);
        }
        for j in start..parts.len() {
            let pj = &parts[j];
            if a + pj.vars.len() > limits.0 || b + pj.b > limits.1 {
                continue;
            }
            if chosen.iter().any(|&i| !parts[i].checks.is_disjoint(&pj.checks)) {
                continue;
            }
            chosen.push(j);
            grow(parts, j + 1, chosen, a + pj.vars.len(), b + pj.b, limits, out);
            chosen.pop();
        }
    }
    let mut chosen = Vec::new();
    grow(&parts, 0, &mut chosen, 0, 0, (a_max, b_max), &mut out);
    out
}
