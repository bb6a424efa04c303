//! Exact treewidth by branch and bound over elimination orderings.
//!
//! The graph is first shrunk with the simplicial and almost-simplicial
//! reduction rules, which are safe given a lower bound. Only the remaining
//! kernel is searched, so long subdivided paths (pseudo-cliques) stay cheap.
//! The vertex cap applies to the kernel.

use std::collections::{BTreeSet, HashMap};

use super::elimination::decomposition_from_ordering;
use super::TreeDecomposition;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::structures::Graph;

/// Minor-min-width lower bound: repeatedly contract a minimum-degree vertex
/// into its minimum-degree neighbour, recording the largest degree seen.
pub fn minor_min_width(g: &Graph) -> usize {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n() + 1];
    for (u, v) in g.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let mut alive: BTreeSet<usize> = g.vertices().collect();
    let mut lb = 0;
    while alive.len() > 1 {
        let v = *alive.iter().min_by_key(|&&v| (adj[v].len(), v)).unwrap();
        alive.remove(&v);
        let nb = std::mem::take(&mut adj[v]);
        let Some(&u) = nb.iter().min_by_key(|&&u| (adj[u].len(), u)) else {
            continue;
        };
        lb = lb.max(nb.len());
        for &w in &nb {
            adj[w].remove(&v);
            if w != u {
                adj[w].insert(u);
                adj[u].insert(w);
            }
        }
    }
    lb
}

fn is_clique(adj: &[BTreeSet<usize>], vs: &[usize]) -> bool {
    vs.iter()
        .enumerate()
        .all(|(i, a)| vs[i + 1..].iter().all(|b| adj[*a].contains(b)))
}

fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) {
    let nb: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
    for &a in &nb {
        adj[a].remove(&v);
    }
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
}

/// Applies reduction rules. Returns the eliminated prefix, the lower bound
/// and the surviving kernel vertices.
fn reduce(g: &Graph) -> (Vec<usize>, usize, Vec<usize>) {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n() + 1];
    for (u, v) in g.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let mut low = minor_min_width(g);
    let mut alive: BTreeSet<usize> = g.vertices().collect();
    let mut prefix = Vec::new();
    'outer: loop {
        if alive.len() <= low + 1 {
            prefix.extend(alive.iter().copied());
            alive.clear();
            break;
        }
        for &v in &alive {
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            let simplicial = is_clique(&adj, &nb);
            let almost = !simplicial
                && nb.len() <= low
                && (0..nb.len()).any(|skip| {
                    let rest: Vec<usize> = nb
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, &x)| x)
                        .collect();
                    is_clique(&adj, &rest)
                });
            if simplicial || almost {
                if simplicial {
                    low = low.max(nb.len());
                }
                eliminate(&mut adj, v);
                alive.remove(&v);
                prefix.push(v);
                continue 'outer;
            }
        }
        break;
    }
    (prefix, low, alive.into_iter().collect())
}

/// Bitmask graph on at most 64 vertices.
#[derive(Clone)]
struct Masks {
    adj: Vec<u64>,
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

impl Masks {
    fn degree(&self, v: usize, alive: u64) -> usize {
        (self.adj[v] & alive).count_ones() as usize
    }

    fn eliminated(&self, v: usize, alive: u64) -> Masks {
        let nb = self.adj[v] & alive;
        let mut adj = self.adj.clone();
        for u in bits(nb) {
            adj[u] |= nb & !(1 << u);
            adj[u] &= !(1 << v);
        }
        adj[v] = 0;
        Masks { adj }
    }

    fn mmw(&self, alive: u64) -> usize {
        let mut adj: Vec<u64> = self.adj.iter().map(|a| a & alive).collect();
        let mut alive = alive;
        let mut lb = 0;
        while alive.count_ones() > 1 {
            let v = bits(alive).min_by_key(|&v| (adj[v].count_ones(), v)).unwrap();
            alive &= !(1 << v);
            let nb = adj[v];
            if nb == 0 {
                continue;
            }
            lb = lb.max(nb.count_ones() as usize);
            let u = bits(nb).min_by_key(|&u| (adj[u].count_ones(), u)).unwrap();
            for w in bits(nb) {
                adj[w] &= !(1 << v);
                if w != u {
                    adj[w] |= 1 << u;
                    adj[u] |= 1 << w;
                }
            }
            adj[v] = 0;
        }
        lb
    }

    fn clique(&self, set: u64) -> bool {
        bits(set).all(|u| self.adj[u] & set == set & !(1 << u))
    }

    /// A vertex whose elimination first is safe: simplicial, or almost
    /// simplicial with degree at most `lb`.
    fn forced(&self, alive: u64, lb: usize) -> Option<usize> {
        bits(alive).find(|&v| {
            let nb = self.adj[v] & alive;
            self.clique(nb) || (nb.count_ones() as usize <= lb && bits(nb).any(|u| self.clique(nb & !(1 << u))))
        })
    }

    fn min_fill_order(&self, alive: u64) -> (usize, Vec<usize>) {
        let mut g = self.clone();
        let mut alive = alive;
        let (mut width, mut order) = (0, Vec::new());
        while alive != 0 {
            let v = bits(alive)
                .min_by_key(|&v| {
                    let nb = g.adj[v] & alive;
                    let fill: u32 = bits(nb).map(|u| (nb & !g.adj[u] & !(1 << u)).count_ones()).sum();
                    (fill, v)
                })
                .unwrap();
            width = width.max(g.degree(v, alive));
            g = g.eliminated(v, alive);
            alive &= !(1 << v);
            order.push(v);
        }
        (width, order)
    }
}

struct Search {
    best: usize,
    best_order: Option<Vec<usize>>,
    floor: usize,
    memo: HashMap<u64, usize>,
    nodes: u64,
    node_limit: u64,
}

impl Search {
    fn run(&mut self, g: &Masks, alive: u64, width: usize, order: &mut Vec<usize>) -> Result<()> {
        if self.best <= self.floor {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::limit(
                "exact treewidth search nodes",
                self.node_limit as usize,
                self.nodes as usize,
            ));
        }
        let rem = alive.count_ones() as usize;
        if rem == 0 || rem - 1 <= width {
            if width < self.best {
                self.best = width;
                let mut full = order.clone();
                full.extend(bits(alive));
                self.best_order = Some(full);
            }
            return Ok(());
        }
        let lb = width.max(g.mmw(alive));
        if lb >= self.best {
            return Ok(());
        }
        if matches!(self.memo.get(&alive), Some(&w) if w <= width) {
            return Ok(());
        }
        self.memo.insert(alive, width);

        let candidates: Vec<usize> = match g.forced(alive, lb) {
            Some(v) => vec![v],
            None => {
                let mut vs: Vec<usize> = bits(alive).collect();
                vs.sort_by_key(|&v| (g.degree(v, alive), v));
                vs
            }
        };
        for v in candidates {
            let w = width.max(g.degree(v, alive));
            if w >= self.best {
                continue;
            }
            let next = g.eliminated(v, alive);
            order.push(v);
            self.run(&next, alive & !(1 << v), w, order)?;
            order.pop();
            if self.best <= self.floor {
                break;
            }
        }
        Ok(())
    }
}

/// Exact treewidth with an optimal decomposition.
///
/// `upper_hint`, if given, is tried as an initial bound; a hint below the
/// true width is detected and ignored.
pub fn exact_treewidth(g: &Graph, upper_hint: Option<usize>, limits: &Limits) -> Result<(usize, TreeDecomposition)> {
    let (mut order, low, kernel) = reduce(g);
    if kernel.len() > limits.exact_tw.min(64) {
        return Err(Error::limit(
            "exact treewidth kernel vertices",
            limits.exact_tw.min(64),
            kernel.len(),
        ));
    }
    if !kernel.is_empty() {
        let index: HashMap<usize, usize> = kernel.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let masks = kernel_masks(g, &order, &kernel, &index);
        let alive = if kernel.len() == 64 {
            !0
        } else {
            (1u64 << kernel.len()) - 1
        };
        let (heur_width, heur_order) = masks.min_fill_order(alive);
        let mut search = Search {
            best: heur_width,
            best_order: Some(heur_order.clone()),
            floor: low,
            memo: HashMap::new(),
            nodes: 0,
            node_limit: limits.mso_steps,
        };
        if let Some(h) = upper_hint.filter(|&h| h < heur_width) {
            search.best = h + 1;
            search.best_order = None;
            search.run(&masks, alive, 0, &mut Vec::new())?;
            if search.best_order.is_none() {
                search.best = heur_width;
                search.best_order = Some(heur_order);
                search.memo.clear();
                search.run(&masks, alive, 0, &mut Vec::new())?;
            }
        } else {
            search.run(&masks, alive, 0, &mut Vec::new())?;
        }
        let best = search.best_order.expect("search keeps an ordering");
        order.extend(best.into_iter().map(|i| kernel[i]));
    }
    let td = decomposition_from_ordering(g, &order)?;
    let width = if g.n() == 0 { 0 } else { td.width()? };
    Ok((width, td))
}

/// The kernel as it stands after eliminating `prefix`, as bitmasks.
fn kernel_masks(g: &Graph, prefix: &[usize], kernel: &[usize], index: &HashMap<usize, usize>) -> Masks {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n() + 1];
    for (u, v) in g.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    for &v in prefix {
        eliminate(&mut adj, v);
    }
    let mut masks = vec![0u64; kernel.len()];
    for (i, &v) in kernel.iter().enumerate() {
        for u in &adj[v] {
            masks[i] |= 1 << index[u];
        }
    }
    Masks { adj: masks }
}
