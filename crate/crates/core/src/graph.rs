//! Communication digraphs, agent roles, and robustness certificates.
//!
//! Node ids are 1-based. An edge `(i, j)` means agent `i` receives agent
//! `j`'s state, so `j` is an in-neighbor of `i`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Largest graph the exhaustive robustness and matrix checkers accept.
pub const MAX_ENUMERATION_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Benign,
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    in_nbrs: Vec<BTreeSet<NodeId>>,
    roles: Vec<Role>,
}

impl Digraph {
    /// Builds a digraph on nodes `1..=n` from `(receiver, sender)` edges.
    /// Nodes listed in `adversarial` get the adversarial role, all others benign.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        adversarial: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        let mut in_nbrs = vec![BTreeSet::new(); n];
        for (i, j) in edges {
            if i == 0 || i > n || j == 0 || j > n {
                return Err(Error::InvalidGraph(format!("edge {i} <- {j} outside 1..={n}")));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            in_nbrs[i - 1].insert(j);
        }
        let mut roles = vec![Role::Benign; n];
        for a in adversarial {
            if a == 0 || a > n {
                return Err(Error::UnknownNode(a));
            }
            roles[a - 1] = Role::Adversarial;
        }
        Ok(Digraph { in_nbrs, roles })
    }

    /// Complete digraph on `n` nodes, all benign.
    pub fn complete(n: usize) -> Result<Self> {
        let edges = (1..=n).flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)));
        Self::new(n, edges, [])
    }

    pub fn node_count(&self) -> usize {
        self.in_nbrs.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.node_count()
    }

    fn check(&self, i: NodeId) -> Result<()> {
        if i == 0 || i > self.node_count() {
            return Err(Error::UnknownNode(i));
        }
        Ok(())
    }

    pub fn in_neighbors(&self, i: NodeId) -> Result<&BTreeSet<NodeId>> {
        self.check(i)?;
        Ok(&self.in_nbrs[i - 1])
    }

    pub fn out_neighbors(&self, j: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(j)?;
        Ok(self
            .nodes()
            .filter(|&i| self.in_nbrs[i - 1].contains(&j))
            .collect())
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        i >= 1 && i <= self.node_count() && self.in_nbrs[i - 1].contains(&j)
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.in_nbrs
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i + 1, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.in_nbrs.iter().map(BTreeSet::len).sum()
    }

    pub fn role(&self, i: NodeId) -> Result<Role> {
        self.check(i)?;
        Ok(self.roles[i - 1])
    }

    pub fn is_benign(&self, i: NodeId) -> bool {
        i >= 1 && i <= self.node_count() && self.roles[i - 1] == Role::Benign
    }

    pub fn benign(&self) -> Vec<NodeId> {
        self.nodes().filter(|&i| self.is_benign(i)).collect()
    }

    pub fn adversarial(&self) -> Vec<NodeId> {
        self.nodes().filter(|&i| !self.is_benign(i)).collect()
    }

    /// Copy of the graph with the edge `i <- j` added.
    pub fn with_edge(&self, i: NodeId, j: NodeId) -> Result<Self> {
        let mut g = self.clone();
        g.check(i)?;
        g.check(j)?;
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
        }
        g.in_nbrs[i - 1].insert(j);
        Ok(g)
    }

    /// Copy of the graph with the edge `i <- j` removed (no-op when absent).
    pub fn without_edge(&self, i: NodeId, j: NodeId) -> Result<Self> {
        let mut g = self.clone();
        g.check(i)?;
        g.in_nbrs[i - 1].remove(&j);
        Ok(g)
    }

    fn in_masks(&self) -> Vec<u32> {
        self.in_nbrs
            .iter()
            .map(|s| s.iter().fold(0u32, |m, &j| m | (1 << (j - 1))))
            .collect()
    }

    /// Parses the line-oriented text form:
    ///
    /// ```text
    /// nodes 4
    /// adversarial 2
    /// 1 <- 2
    /// 1 <- 3
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut n = None;
        let mut adversarial = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {raw:?}", lineno + 1));
            if let Some(rest) = line.strip_prefix("nodes") {
                n = Some(rest.trim().parse::<usize>().map_err(|_| bad("bad node count"))?);
            } else if let Some(rest) = line.strip_prefix("adversarial") {
                for tok in rest.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                    adversarial.push(tok.parse::<usize>().map_err(|_| bad("bad node id"))?);
                }
            } else if let Some((lhs, rhs)) = line.split_once("<-") {
                let i = lhs.trim().parse::<usize>().map_err(|_| bad("bad receiver"))?;
                for tok in rhs.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
                    edges.push((i, tok.parse::<usize>().map_err(|_| bad("bad sender"))?));
                }
            } else {
                return Err(bad("unrecognised line"));
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing `nodes N` line".into()))?;
        Self::new(n, edges, adversarial)
    }
}

impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes {}", self.node_count())?;
        let adv = self.adversarial();
        if !adv.is_empty() {
            let ids: Vec<String> = adv.iter().map(ToString::to_string).collect();
            writeln!(f, "adversarial {}", ids.join(" "))?;
        }
        for (i, s) in self.in_nbrs.iter().enumerate() {
            if !s.is_empty() {
                let ids: Vec<String> = s.iter().map(ToString::to_string).collect();
                writeln!(f, "{} <- {}", i + 1, ids.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Outcome of an exhaustive robustness check. `s = 1` encodes plain
/// r-robustness. On failure `witness` holds a subset pair violating every clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobustnessCertificate {
    pub r: usize,
    pub s: usize,
    pub holds: bool,
    pub witness: Option<(Vec<NodeId>, Vec<NodeId>)>,
}

fn mask_to_ids(mask: u32) -> Vec<NodeId> {
    (0..32).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

fn ids_to_mask(ids: &[NodeId]) -> u32 {
    ids.iter().fold(0, |m, &i| m | (1 << (i - 1)))
}

/// Visits every unordered pair of disjoint nonempty node subsets, with the
/// lowest assigned node always placed in the first set. Stops and returns the
/// first pair for which `violates` is true.
pub(crate) fn find_violating_pair(n: usize, mut violates: impl FnMut(u32, u32) -> bool) -> Option<(u32, u32)> {
    fn rec(
        node: usize,
        n: usize,
        m1: u32,
        m2: u32,
        violates: &mut dyn FnMut(u32, u32) -> bool,
    ) -> Option<(u32, u32)> {
        if node == n {
            if m1 != 0 && m2 != 0 && violates(m1, m2) {
                return Some((m1, m2));
            }
            return None;
        }
        let bit = 1u32 << node;
        if let Some(w) = rec(node + 1, n, m1, m2, violates) {
            return Some(w);
        }
        if let Some(w) = rec(node + 1, n, m1 | bit, m2, violates) {
            return Some(w);
        }
        if m1 != 0 {
            if let Some(w) = rec(node + 1, n, m1, m2 | bit, violates) {
                return Some(w);
            }
        }
        None
    }
    rec(0, n, 0, 0, &mut violates)
}

/// Number of members of `set` with at least `r` in-neighbors outside `set`.
fn reachable_count(masks: &[u32], set: u32, r: usize) -> usize {
    let mut count = 0;
    let mut rest = set;
    while rest != 0 {
        let b = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (masks[b] & !set).count_ones() as usize >= r {
            count += 1;
        }
    }
    count
}

fn has_reachable(masks: &[u32], set: u32, r: usize) -> bool {
    let mut rest = set;
    while rest != 0 {
        let b = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (masks[b] & !set).count_ones() as usize >= r {
            return true;
        }
    }
    false
}

fn check_size(g: &Digraph) -> Result<()> {
    if g.node_count() > MAX_ENUMERATION_NODES {
        return Err(Error::InvalidParameter(format!(
            "exhaustive robustness check supports at most {MAX_ENUMERATION_NODES} nodes, graph has {}",
            g.node_count()
        )));
    }
    Ok(())
}

/// Exhaustive r-robustness check over all disjoint nonempty subset pairs.
pub fn check_r_robust(g: &Digraph, r: usize) -> Result<RobustnessCertificate> {
    let n = g.node_count();
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("r = {r} must be in 1..={n}")));
    }
    check_size(g)?;
    let masks = g.in_masks();
    let witness = find_violating_pair(n, |m1, m2| {
        !has_reachable(&masks, m1, r) && !has_reachable(&masks, m2, r)
    });
    Ok(RobustnessCertificate {
        r,
        s: 1,
        holds: witness.is_none(),
        witness: witness.map(|(a, b)| (mask_to_ids(a), mask_to_ids(b))),
    })
}

/// Exhaustive (r,s)-robustness check. For each pair, either every member of
/// one subset has `r` in-neighbors outside its own subset, or at least `s`
/// members across both subsets do.
pub fn check_rs_robust(g: &Digraph, r: usize, s: usize) -> Result<RobustnessCertificate> {
    let n = g.node_count();
    if r == 0 || r > n || s == 0 || s > n {
        return Err(Error::InvalidParameter(format!(
            "(r, s) = ({r}, {s}) must both be in 1..={n}"
        )));
    }
    check_size(g)?;
    let masks = g.in_masks();
    let witness = find_violating_pair(n, |m1, m2| !rs_pair_ok(&masks, m1, m2, r, s));
    Ok(RobustnessCertificate {
        r,
        s,
        holds: witness.is_none(),
        witness: witness.map(|(a, b)| (mask_to_ids(a), mask_to_ids(b))),
    })
}

fn rs_pair_ok(masks: &[u32], m1: u32, m2: u32, r: usize, s: usize) -> bool {
    let x1 = reachable_count(masks, m1, r);
    let x2 = reachable_count(masks, m2, r);
    x1 == m1.count_ones() as usize || x2 == m2.count_ones() as usize || x1 + x2 >= s
}

/// Re-evaluates a witness pair against the definition. Returns true when the
/// pair is disjoint, nonempty, and violates every clause for `(r, s)`.
pub fn witness_violates(g: &Digraph, cert: &RobustnessCertificate) -> bool {
    let Some((v1, v2)) = &cert.witness else {
        return false;
    };
    if v1.is_empty() || v2.is_empty() || v1.iter().any(|i| v2.contains(i)) {
        return false;
    }
    if v1.iter().chain(v2).any(|&i| i == 0 || i > g.node_count()) {
        return false;
    }
    let masks = g.in_masks();
    let (m1, m2) = (ids_to_mask(v1), ids_to_mask(v2));
    if cert.s == 1 {
        !has_reachable(&masks, m1, cert.r) && !has_reachable(&masks, m2, cert.r)
    } else {
        !rs_pair_ok(&masks, m1, m2, cert.r, cert.s)
    }
}

/// Whether every node has at least `(d+1)F + 1` in-neighbors.
pub fn check_min_indegree(g: &Digraph, d: usize, faults: usize) -> bool {
    let need = (d + 1) * faults + 1;
    g.in_nbrs.iter().all(|s| s.len() >= need)
}

/// Nodes whose in-degree is below `(d+1)F + 1`.
pub fn indegree_violations(g: &Digraph, d: usize, faults: usize) -> Vec<(NodeId, usize)> {
    let need = (d + 1) * faults + 1;
    g.in_nbrs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() < need)
        .map(|(i, s)| (i + 1, s.len()))
        .collect()
}

/// Largest r for which the graph is r-robust (0 if not even 1-robust).
pub fn max_robustness(g: &Digraph) -> Result<usize> {
    let mut best = 0;
    for r in 1..=g.node_count() {
        if check_r_robust(g, r)?.holds {
            best = r;
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> Digraph {
        // 1 <- 2 <- 3 <- 1
        Digraph::new(3, [(1, 2), (2, 3), (3, 1)], []).unwrap()
    }

    /// Independent evaluation of both robustness definitions by listing every
    /// assignment of nodes to (V1, V2, neither) as explicit sets.
    fn brute(g: &Digraph, r: usize, s: Option<usize>) -> bool {
        let n = g.node_count();
        let outside = |i: NodeId, set: &BTreeSet<NodeId>| {
            g.in_neighbors(i).unwrap().iter().filter(|j| !set.contains(j)).count()
        };
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut v1 = BTreeSet::new();
            let mut v2 = BTreeSet::new();
            for i in 1..=n {
                match c % 3 {
                    1 => {
                        v1.insert(i);
                    }
                    2 => {
                        v2.insert(i);
                    }
                    _ => {}
                }
                c /= 3;
            }
            if v1.is_empty() || v2.is_empty() {
                continue;
            }
            let x1 = v1.iter().filter(|&&i| outside(i, &v1) >= r).count();
            let x2 = v2.iter().filter(|&&i| outside(i, &v2) >= r).count();
            let ok = match s {
                None => x1 > 0 || x2 > 0,
                Some(s) => x1 == v1.len() || x2 == v2.len() || x1 + x2 >= s,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    #[test]
    fn in_neighbor_examples() {
        let g = cycle3();
        assert_eq!(g.in_neighbors(1).unwrap().iter().copied().collect::<Vec<_>>(), vec![2]);
        let k4 = Digraph::complete(4).unwrap();
        assert_eq!(k4.in_neighbors(2).unwrap().iter().copied().collect::<Vec<_>>(), vec![1, 3, 4]);
        assert!(matches!(g.in_neighbors(4), Err(Error::UnknownNode(4))));
        assert_eq!(g.out_neighbors(1).unwrap().into_iter().collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Digraph::new(3, [(1, 1)], []).is_err());
        assert!(Digraph::new(3, [(1, 4)], []).is_err());
        assert!(Digraph::new(3, [(1, 2)], [5]).is_err());
    }

    #[test]
    fn r_robust_examples() {
        let k4 = Digraph::complete(4).unwrap();
        assert!(brute(&k4, 2, None));
        assert!(check_r_robust(&k4, 2).unwrap().holds);

        let c = cycle3();
        assert!(!brute(&c, 2, None));
        let cert = check_r_robust(&c, 2).unwrap();
        assert!(!cert.holds);
        assert!(witness_violates(&c, &cert));

        assert!(check_r_robust(&c, 0).is_err());
        assert!(check_r_robust(&c, 4).is_err());
    }

    #[test]
    fn rs_robust_examples() {
        let k5 = Digraph::complete(5).unwrap();
        assert!(brute(&k5, 2, Some(2)));
        assert!(check_rs_robust(&k5, 2, 2).unwrap().holds);

        // every pair on three nodes contains a singleton, and a singleton in
        // the cycle always has its one in-neighbor outside, so clause 1 or 2 holds
        let c = cycle3();
        assert!(brute(&c, 1, Some(3)));
        assert!(check_rs_robust(&c, 1, 3).unwrap().holds);

        assert!(!brute(&c, 2, Some(1)));
        let cert = check_rs_robust(&c, 2, 1).unwrap();
        assert!(!cert.holds);
        assert!(witness_violates(&c, &cert));
    }

    #[test]
    fn complete_graph_robustness_limit() {
        // K_n is ceil(n/2)-robust and no more
        for n in 2..=9 {
            let g = Digraph::complete(n).unwrap();
            assert_eq!(max_robustness(&g).unwrap(), n.div_ceil(2), "n = {n}");
        }
    }

    #[test]
    fn min_indegree_examples() {
        let c = cycle3();
        assert!(!check_min_indegree(&c, 2, 1));
        assert!(check_min_indegree(&c, 1, 0));
        let lonely = Digraph::new(2, [(1, 2)], []).unwrap();
        assert!(!check_min_indegree(&lonely, 1, 0));
        assert_eq!(indegree_violations(&lonely, 1, 0), vec![(2, 0)]);
    }

    #[test]
    fn text_round_trip() {
        let g = Digraph::new(4, [(1, 2), (1, 3), (2, 4), (4, 1)], [3]).unwrap();
        let text = g.to_string();
        assert_eq!(Digraph::parse_text(&text).unwrap(), g);
        assert!(Digraph::parse_text("nodes 2\n1 <- x\n").is_err());
        assert!(Digraph::parse_text("1 <- 2\n").is_err());
    }
}
