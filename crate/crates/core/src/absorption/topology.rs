use super::{incidence, AbsorptionSet};
use crate::code::SparseParityCheck;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("check {check} meets the set {incidence} times; the linear model needs incidence 1 or 2")]
    Incidence { check: usize, incidence: usize },
    #[error("invalid topology: {0}")]
    Invalid(String),
}

/// Labeled subgraph induced by an absorption set whose satisfied checks all
/// have degree two in the set.
///
/// Internal edges (variable to satisfied check) are labeled variable-major,
/// then by ascending check. Each satisfied check pairs two edges; `partner`
/// maps an edge to the other edge through its check.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    /// Code indices of the set variables (local labels for fixtures).
    pub variables: Vec<usize>,
    pub edge_var: Vec<usize>,
    pub edge_check: Vec<usize>,
    pub partner: Vec<usize>,
    /// Unsatisfied checks adjacent to each variable.
    pub external: Vec<usize>,
}

/// JSON form: 0-based local variables, one `[u, v]` pair per satisfied
/// check in label order, and per-variable unsatisfied-check counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<usize>>,
    pub internal_checks: Vec<[usize; 2]>,
    pub external: Vec<usize>,
}

impl Topology {
    /// Builds the labeling from satisfied checks given as variable pairs;
    /// the position in `checks` orders edges within each variable.
    pub fn from_pairs(variables: Vec<usize>, checks: &[[usize; 2]], external: Vec<usize>) -> Result<Self, TopologyError> {
        let a = variables.len();
        if external.len() != a {
            return Err(TopologyError::Invalid(format!(
                "{} external counts for {a} variables",
                external.len()
            )));
        }
        let mut per_var: Vec<Vec<(usize, usize)>> = vec![Vec::new(); a];
        for (k, &[u, v]) in checks.iter().enumerate() {
            if u >= a || v >= a || u == v {
                return Err(TopologyError::Invalid(format!("check {k} joins {u} and {v}")));
            }
            per_var[u].push((k, v));
            per_var[v].push((k, u));
        }
        let mut edge_var = Vec::new();
        let mut edge_check = Vec::new();
        let mut slot = BTreeMap::new();
        for (u, list) in per_var.iter().enumerate() {
            for &(k, _) in list {
                slot.entry(k).or_insert_with(Vec::new).push(edge_var.len());
                edge_var.push(u);
                edge_check.push(k);
            }
        }
        let mut partner = vec![0; edge_var.len()];
        for pair in slot.values() {
            partner[pair[0]] = pair[1];
            partner[pair[1]] = pair[0];
        }
        Ok(Self {
            variables,
            edge_var,
            edge_check,
            partner,
            external,
        })
    }

    pub fn from_file(file: &TopologyFile) -> Result<Self, TopologyError> {
        let a = file.external.len();
        let vars = file.variables.clone().unwrap_or_else(|| (0..a).collect());
        Self::from_pairs(vars, &file.internal_checks, file.external.clone())
    }

    pub fn to_file(&self) -> TopologyFile {
        let mut checks: BTreeMap<usize, [usize; 2]> = BTreeMap::new();
        for (e, &p) in self.partner.iter().enumerate() {
            if e < p {
                checks.insert(self.edge_check[e], [self.edge_var[e], self.edge_var[p]]);
            }
        }
        TopologyFile {
            name: None,
            variables: Some(self.variables.clone()),
            internal_checks: checks.into_values().collect(),
            external: self.external.clone(),
        }
    }

    pub fn a(&self) -> usize {
        self.variables.len()
    }

    pub fn b(&self) -> usize {
        self.external.iter().sum()
    }

    /// Number of labeled internal edges, `a·d_v − b` for regular codes.
    pub fn dim(&self) -> usize {
        self.edge_var.len()
    }

    /// Contiguous label range of each variable's edges.
    pub fn var_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.a());
        let mut start = 0;
        for u in 0..self.a() {
            let len = self.edge_var[start..].iter().take_while(|&&x| x == u).count();
            out.push(start..start + len);
            start += len;
        }
        out
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![vec![0; self.a()]; self.a()];
        for (e, &p) in self.partner.iter().enumerate() {
            adj[self.edge_var[e]][self.edge_var[p]] += 1;
        }
        adj
    }

    /// A variable bijection `map` with `other` such that local variable `u`
    /// here corresponds to `map[u]` there, preserving internal checks and
    /// external counts.
    pub fn isomorphism(&self, other: &Topology) -> Option<Vec<usize>> {
        let a = self.a();
        if a != other.a() || self.dim() != other.dim() {
            return None;
        }
        let (x, y) = (self.adjacency(), other.adjacency());
        let mut map = vec![usize::MAX; a];
        let mut used = vec![false; a];
        fn go(u: usize, s: &Topology, o: &Topology, x: &[Vec<usize>], y: &[Vec<usize>], map: &mut [usize], used: &mut [bool]) -> bool {
            if u == map.len() {
                return true;
            }
            for t in 0..map.len() {
                if used[t] || s.external[u] != o.external[t] {
                    continue;
                }
                if (0..u).any(|w| x[u][w] != y[t][map[w]]) {
                    continue;
                }
                map[u] = t;
                used[t] = true;
                if go(u + 1, s, o, x, y, map, used) {
                    return true;
                }
                used[t] = false;
            }
            false
        }
        go(0, self, other, &x, &y, &mut map, &mut used).then_some(map)
    }

    /// Label correspondence induced by a variable bijection: edge `e` here is
    /// edge `out[e]` in `other`. Requires at most one check per variable pair.
    pub fn edge_map(&self, other: &Topology, var_map: &[usize]) -> Option<Vec<usize>> {
        (0..self.dim())
            .map(|e| {
                let (u, v) = (var_map[self.edge_var[e]], var_map[self.edge_var[self.partner[e]]]);
                let hits: Vec<usize> = (0..other.dim())
                    .filter(|&f| other.edge_var[f] == u && other.edge_var[other.partner[f]] == v)
                    .collect();
                (hits.len() == 1).then(|| hits[0])
            })
            .collect()
    }
}

/// Labeled topology of an absorption set; rejects sets with a check of
/// incidence above two.
pub fn induced_topology(h: &SparseParityCheck, set: &AbsorptionSet) -> Result<Topology, TopologyError> {
    let count = incidence(h, &set.variables);
    let mut bad: Vec<(usize, usize)> = count.iter().filter(|(_, &k)| k > 2).map(|(&c, &k)| (c, k)).collect();
    bad.sort_unstable();
    if let Some(&(check, incidence)) = bad.first() {
        return Err(TopologyError::Incidence { check, incidence });
    }
    let mut edge_var = Vec::new();
    let mut edge_check = Vec::new();
    let mut slot: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut external = vec![0; set.variables.len()];
    for (u, &v) in set.variables.iter().enumerate() {
        for &c in h.col(v) {
            if count[&c] == 2 {
                slot.entry(c).or_default().push(edge_var.len());
                edge_var.push(u);
                edge_check.push(c);
            } else {
                external[u] += 1;
            }
        }
    }
    let mut partner = vec![0; edge_var.len()];
    for pair in slot.values() {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    Ok(Topology {
        variables: set.variables.clone(),
        edge_var,
        edge_check,
        partner,
        external,
    })
}
