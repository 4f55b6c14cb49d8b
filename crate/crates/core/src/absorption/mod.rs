//! Absorption sets: verification, exhaustive enumeration and the labeled
//! topology consumed by the linear model.
//!
//! A variable set is an absorption set when every member has strictly more
//! neighboring checks of even incidence (satisfied) than of odd incidence
//! (unsatisfied). `(a, b)` is the set size and the number of odd checks.

mod enumerate;
mod topology;

pub use enumerate::{enumerate_sets, EnumerateError, EnumerationOptions, EnumerationResult};
pub use topology::{induced_topology, Topology, TopologyError, TopologyFile};

use crate::code::SparseParityCheck;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorptionSet {
    pub variables: Vec<usize>,
    pub unsatisfied_checks: Vec<usize>,
    pub satisfied_checks: Vec<usize>,
    /// `(variable, check)` pairs joining the set to its satisfied checks.
    pub internal_edges: Vec<(usize, usize)>,
    /// Every satisfied check has incidence 2 and every unsatisfied check
    /// incidence 1, the shape required by the linear model.
    pub simple: bool,
}

impl AbsorptionSet {
    pub fn a(&self) -> usize {
        self.variables.len()
    }

    pub fn b(&self) -> usize {
        self.unsatisfied_checks.len()
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.a(), self.b())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("empty variable set")]
    Empty,
    #[error("variable {0} is out of range")]
    OutOfRange(usize),
    #[error("variable {0} listed twice")]
    Duplicate(usize),
    #[error("variable {variable} has {satisfied} even-incidence checks against {unsatisfied} odd")]
    Majority {
        variable: usize,
        satisfied: usize,
        unsatisfied: usize,
    },
}

/// Per-check incidence counts of a variable set.
pub(crate) fn incidence(h: &SparseParityCheck, vars: &[usize]) -> HashMap<usize, usize> {
    let mut count = HashMap::new();
    for &v in vars {
        for &c in h.col(v) {
            *count.entry(c).or_insert(0) += 1;
        }
    }
    count
}

/// Verifies the majority rule and returns the set's check partition.
pub fn classify_set(h: &SparseParityCheck, variables: &[usize]) -> Result<AbsorptionSet, Rejection> {
    if variables.is_empty() {
        return Err(Rejection::Empty);
    }
    let mut vars = variables.to_vec();
    vars.sort_unstable();
    if let Some(&v) = vars.iter().find(|&&v| v >= h.n_cols()) {
        return Err(Rejection::OutOfRange(v));
    }
    if let Some(w) = vars.windows(2).find(|w| w[0] == w[1]) {
        return Err(Rejection::Duplicate(w[0]));
    }
    let count = incidence(h, &vars);
    for &v in &vars {
        let even = h.col(v).iter().filter(|c| count[c] % 2 == 0).count();
        let odd = h.col(v).len() - even;
        if even <= odd {
            return Err(Rejection::Majority {
                variable: v,
                satisfied: even,
                unsatisfied: odd,
            });
        }
    }
    let mut satisfied: Vec<usize> = count.iter().filter(|(_, &k)| k % 2 == 0).map(|(&c, _)| c).collect();
    let mut unsatisfied: Vec<usize> = count.iter().filter(|(_, &k)| k % 2 == 1).map(|(&c, _)| c).collect();
    satisfied.sort_unstable();
    unsatisfied.sort_unstable();
    let simple = count.values().all(|&k| k <= 2);
    let internal_edges = vars
        .iter()
        .flat_map(|&v| {
            h.col(v)
                .iter()
                .filter(|c| count[c] % 2 == 0)
                .map(move |&c| (v, c))
        })
        .collect();
    Ok(AbsorptionSet {
        variables: vars,
        unsatisfied_checks: unsatisfied,
        satisfied_checks: satisfied,
        internal_edges,
        simple,
    })
}

/// Fraction of `smaller` sets contained (as variable sets) in at least one
/// of the `larger` sets. An empty `smaller` collection gives 1.
pub fn containment_stats(smaller: &[Vec<usize>], larger: &[Vec<usize>]) -> f64 {
    if smaller.is_empty() {
        return 1.0;
    }
    let mut by_var: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, s) in larger.iter().enumerate() {
        for &v in s {
            by_var.entry(v).or_default().push(i);
        }
    }
    let contained = smaller
        .iter()
        .filter(|s| {
            let Some(&first) = s.first() else {
                return true;
            };
            by_var.get(&first).is_some_and(|cands| {
                cands
                    .iter()
                    .any(|&i| s.iter().all(|v| larger[i].binary_search(v).is_ok()))
            })
        })
        .count();
    contained as f64 / smaller.len() as f64
}
