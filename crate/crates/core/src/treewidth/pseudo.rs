//! Pseudo-cliques: recognition, the bag-rewriting normalization that moves
//! every edge-node into small private bags, and a subdivided-clique lower
//! bound on treewidth.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{tree_violation, validate_decomposition, TreeDecomposition};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::structures::{Graph, VertexLabel};

/// A recognised pseudo-clique: for every pair `i < j` of main-nodes, the
/// edge-nodes of the connecting path listed from `i` towards `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PseudoClique {
    pub mains: Vec<usize>,
    pub paths: BTreeMap<(usize, usize), Vec<usize>>,
}

impl PseudoClique {
    pub fn size(&self) -> usize {
        self.mains.len()
    }

    pub fn cardinality(&self) -> usize {
        self.paths.values().map(Vec::len).max().unwrap_or(0)
    }
}

/// Decomposes `g` into main-nodes and induced, internally disjoint paths,
/// one per pair of main-nodes; `None` if that is impossible.
pub fn pseudo_clique_paths(g: &Graph, mains: &BTreeSet<usize>) -> Option<PseudoClique> {
    if mains.iter().any(|&v| v == 0 || v > g.n()) {
        return None;
    }
    let adj = g.adjacency();
    if g.vertices().any(|v| !mains.contains(&v) && adj[v].len() != 2) {
        return None;
    }
    let mut paths: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut covered = 0;
    for &u in mains {
        for &w in &adj[u] {
            let (mut prev, mut cur) = (u, w);
            let mut path = Vec::new();
            while !mains.contains(&cur) {
                path.push(cur);
                if path.len() > g.n() {
                    return None;
                }
                let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
                prev = cur;
                cur = next;
            }
            let v = cur;
            if v == u {
                return None;
            }
            if u < v {
                if paths.insert((u, v), path.clone()).is_some() {
                    return None;
                }
                covered += path.len();
            } else {
                path.reverse();
                if paths.get(&(v, u)) != Some(&path) {
                    return None;
                }
            }
        }
    }
    let pairs = mains.len() * mains.len().saturating_sub(1) / 2;
    if paths.len() != pairs || covered + mains.len() != g.n() {
        return None;
    }
    Some(PseudoClique {
        mains: mains.iter().copied().collect(),
        paths,
    })
}

pub fn is_pseudo_clique(g: &Graph, mains: &BTreeSet<usize>) -> bool {
    pseudo_clique_paths(g, mains).is_some()
}

/// Rewrites `td` so that edge-nodes only occur in bags of size at most 3.
///
/// Main-nodes are taken from the `main` vertex labels. For each pair `(i, j)`
/// in lexicographic order, with `Y` the bags holding one of its edge-nodes:
/// `C` is the first bag of `Y` (ascending id) containing `i`; every edge-node
/// of the pair is replaced by `j` throughout `Y`; and the chain
/// `{i, d1, j}, {d1, d2, j}, ..., {d(k-1), dk, j}` is hung below `C`.
///
/// The chain ends at `{d(k-1), dk, j}`. A further `{dk, j}` bag would be
/// redundant and would put `dk` into a second bag. Each edge-node then lies
/// in one bag if `k = 1` and in at most two otherwise. Exactly one is
/// impossible for `k ≥ 2`, since consecutive edge-nodes must share a bag.
pub fn normalize_pseudo(g: &Graph, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    if g.labels().is_none() {
        return Err(Error::NotPseudoClique("graph carries no main/edge labels".into()));
    }
    let mains: BTreeSet<usize> = g.labelled(VertexLabel::Main).into_iter().collect();
    let pc = pseudo_clique_paths(g, &mains)
        .ok_or_else(|| Error::NotPseudoClique("labelled main-nodes do not span a pseudo-clique".into()))?;
    if let Some(v) = tree_violation(td) {
        return Err(Error::InvalidDecomposition(v.to_string()));
    }
    if let Some(v) = validate_decomposition(g, td)?.first() {
        return Err(Error::InvalidDecomposition(v.to_string()));
    }

    let mut out = td.clone();
    for (&(i, j), path) in &pc.paths {
        if path.is_empty() {
            continue;
        }
        let nodes: BTreeSet<usize> = path.iter().copied().collect();
        let y: Vec<usize> = out
            .bags()
            .iter()
            .filter(|(_, b)| !b.is_disjoint(&nodes))
            .map(|(&id, _)| id)
            .collect();
        let c = *y
            .iter()
            .find(|id| out.bags()[id].contains(&i))
            .expect("a valid decomposition covers the edge from i to its first edge-node");
        for id in &y {
            let bag = out.bag_mut(*id).unwrap();
            bag.retain(|v| !nodes.contains(v));
            bag.insert(j);
        }
        let mut parent = c;
        let mut prev = i;
        for &d in path {
            let id = out.push_bag(BTreeSet::from([prev, d, j]));
            out.add_edge(parent, id);
            parent = id;
            prev = d;
        }
    }
    Ok(out)
}

/// A certified lower bound: `clique` spans a subdivided complete graph in
/// the input, so treewidth is at least `value - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBound {
    pub value: usize,
    pub clique: Vec<usize>,
    /// Suppressed vertices on the path realising each clique edge.
    pub paths: BTreeMap<(usize, usize), Vec<usize>>,
}

/// Suppresses degree-2 vertices (joining their two neighbours) to a fixpoint
/// and returns the largest clique left, with the paths it stands for.
///
/// A degree-2 vertex whose neighbours are already adjacent is kept, so that
/// triangles are not collapsed into single edges.
pub fn pseudo_clique_lower_bound(g: &Graph, limits: &Limits) -> Result<LowerBound> {
    let cap = limits.pseudo_lb.min(64);
    if g.n() > cap {
        return Err(Error::limit("pseudo-clique lower bound vertices", cap, g.n()));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n() + 1];
    let mut via: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (u, v) in g.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
        via.insert((u, v), Vec::new());
    }
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // Path of edge (a, b) oriented from a to b.
    let oriented = |via: &BTreeMap<(usize, usize), Vec<usize>>, a: usize, b: usize| {
        let mut p = via[&key(a, b)].clone();
        if a > b {
            p.reverse();
        }
        p
    };
    let mut alive: BTreeSet<usize> = g.vertices().collect();
    loop {
        let pick = alive.iter().copied().find(|&v| {
            adj[v].len() == 2 && {
                let mut it = adj[v].iter();
                let (a, b) = (*it.next().unwrap(), *it.next().unwrap());
                !adj[a].contains(&b)
            }
        });
        let Some(v) = pick else { break };
        let (a, b) = {
            let mut it = adj[v].iter();
            (*it.next().unwrap(), *it.next().unwrap())
        };
        let mut path = oriented(&via, a, v);
        path.push(v);
        path.extend(oriented(&via, v, b));
        via.remove(&key(a, v));
        via.remove(&key(v, b));
        via.insert(key(a, b), path);
        adj[a].remove(&v);
        adj[b].remove(&v);
        adj[v].clear();
        adj[a].insert(b);
        adj[b].insert(a);
        alive.remove(&v);
    }

    let verts: Vec<usize> = alive.iter().copied().collect();
    let index: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<u64> = verts
        .iter()
        .map(|&v| adj[v].iter().fold(0u64, |m, u| m | 1 << index[u]))
        .collect();
    let best = max_clique(&masks);
    let clique: Vec<usize> = (0..verts.len())
        .filter(|i| best >> i & 1 == 1)
        .map(|i| verts[i])
        .collect();
    let mut paths = BTreeMap::new();
    for (x, &a) in clique.iter().enumerate() {
        for &b in &clique[x + 1..] {
            paths.insert((a, b), via[&(a, b)].clone());
        }
    }
    let lb = LowerBound {
        value: clique.len(),
        clique,
        paths,
    };
    debug_assert!(certificate_holds(g, &lb));
    if certificate_holds(g, &lb) {
        Ok(lb)
    } else {
        Ok(LowerBound {
            value: usize::from(g.n() > 0) + usize::from(g.edge_count() > 0),
            clique: Vec::new(),
            paths: BTreeMap::new(),
        })
    }
}

/// Whether the paths of `lb` are genuine, internally disjoint paths of `g`
/// joining every pair of clique vertices and avoiding the clique elsewhere.
pub fn certificate_holds(g: &Graph, lb: &LowerBound) -> bool {
    let mut used: BTreeSet<usize> = lb.clique.iter().copied().collect();
    if used.len() != lb.clique.len() {
        return false;
    }
    let pairs = lb.clique.len() * lb.clique.len().saturating_sub(1) / 2;
    if lb.paths.len() != pairs {
        return false;
    }
    for (&(a, b), inner) in &lb.paths {
        if !lb.clique.contains(&a) || !lb.clique.contains(&b) {
            return false;
        }
        let mut walk = vec![a];
        walk.extend(inner);
        walk.push(b);
        if walk.windows(2).any(|w| !g.has_edge(w[0], w[1])) {
            return false;
        }
        if inner.iter().any(|v| !used.insert(*v)) {
            return false;
        }
    }
    true
}

/// Largest clique as a bitmask (Bron–Kerbosch with pivoting).
fn max_clique(adj: &[u64]) -> u64 {
    fn rec(adj: &[u64], r: u64, mut p: u64, mut x: u64, best: &mut u64) {
        if p == 0 && x == 0 {
            if r.count_ones() > best.count_ones() {
                *best = r;
            }
            return;
        }
        if r.count_ones() + p.count_ones() <= best.count_ones() {
            return;
        }
        let pivot = (p | x).trailing_zeros() as usize;
        let mut cand = p & !adj[pivot];
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            rec(adj, r | 1 << v, p & adj[v], x & adj[v], best);
            p &= !(1 << v);
            x |= 1 << v;
        }
    }
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let all = if n == 64 { !0 } else { (1u64 << n) - 1 };
    let mut best = 0;
    rec(adj, 0, all, 0, &mut best);
    best
}
