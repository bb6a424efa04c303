use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TreeDecomposition;
use crate::error::{Error, Result};
use crate::structures::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    MinDegree,
    MinFill,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::MinDegree => "min_degree",
            Heuristic::MinFill => "min_fill",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Heuristic> {
        match s.replace('-', "_").as_str() {
            "min_degree" => Ok(Heuristic::MinDegree),
            "min_fill" => Ok(Heuristic::MinFill),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

fn adjacency_sets(g: &Graph) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); g.n() + 1];
    for (u, v) in g.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    adj
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        missing += nb[i + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
    }
    missing
}

/// Eliminates `v`: its neighbourhood becomes a clique and `v` is removed.
/// Returns the neighbourhood and whether any fill edge was added.
fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) -> (Vec<usize>, bool) {
    let nb: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
    let mut filled = false;
    for &a in &nb {
        adj[a].remove(&v);
    }
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if adj[a].insert(b) {
                adj[b].insert(a);
                filled = true;
            }
        }
    }
    (nb, filled)
}

/// Greedy elimination ordering; ties go to the smallest vertex id.
pub fn elimination_ordering(g: &Graph, method: Heuristic) -> Vec<usize> {
    let mut adj = adjacency_sets(g);
    let score = |adj: &[BTreeSet<usize>], v: usize| match method {
        Heuristic::MinDegree => adj[v].len(),
        Heuristic::MinFill => fill_in(adj, v),
    };
    let mut scores: Vec<usize> = (0..=g.n()).map(|v| if v == 0 { 0 } else { score(&adj, v) }).collect();
    let mut queue: BTreeSet<(usize, usize)> = g.vertices().map(|v| (scores[v], v)).collect();
    let mut order = Vec::with_capacity(g.n());
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let (nb, filled) = eliminate(&mut adj, v);
        let mut touched: BTreeSet<usize> = nb.iter().copied().collect();
        if method == Heuristic::MinFill && filled {
            for &a in &nb {
                touched.extend(adj[a].iter().copied());
            }
        }
        for w in touched {
            let s = score(&adj, w);
            if s != scores[w] {
                queue.remove(&(scores[w], w));
                scores[w] = s;
                queue.insert((s, w));
            }
        }
    }
    order
}

/// Tree decomposition induced by an elimination ordering.
///
/// Bag `i` holds the `i`-th eliminated vertex and its neighbours at
/// elimination time; its parent is the bag of the earliest-eliminated of
/// those neighbours. Separate components are chained at their roots. An
/// empty graph yields a single empty bag.
pub fn decomposition_from_ordering(g: &Graph, order: &[usize]) -> Result<TreeDecomposition> {
    let n = g.n();
    let mut pos = vec![usize::MAX; n + 1];
    for (i, &v) in order.iter().enumerate() {
        if v == 0 || v > n || pos[v] != usize::MAX {
            return Err(Error::Invalid(format!(
                "elimination ordering is not a permutation at {v}"
            )));
        }
        pos[v] = i;
    }
    if order.len() != n {
        return Err(Error::Invalid(format!("ordering has {} of {n} vertices", order.len())));
    }
    if n == 0 {
        return Ok(TreeDecomposition::from_parts([BTreeSet::new()], []));
    }
    let mut adj = adjacency_sets(g);
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::with_capacity(n);
    let mut last_root: Option<usize> = None;
    for (i, &v) in order.iter().enumerate() {
        let (nb, _) = eliminate(&mut adj, v);
        let parent = nb.iter().map(|&u| pos[u]).min();
        let mut bag: BTreeSet<usize> = nb.into_iter().collect();
        bag.insert(v);
        bags.push(bag);
        match parent {
            Some(p) => edges.push((i + 1, p + 1)),
            None => {
                if let Some(r) = last_root {
                    edges.push((r, i + 1));
                }
                last_root = Some(i + 1);
            }
        }
    }
    Ok(TreeDecomposition::from_parts(bags, edges))
}

pub fn heuristic_decomposition(g: &Graph, method: Heuristic) -> TreeDecomposition {
    let order = elimination_ordering(g, method);
    decomposition_from_ordering(g, &order).expect("heuristic orderings are permutations")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treewidth::validate_decomposition;

    #[test]
    fn path_and_clique() {
        for m in [Heuristic::MinDegree, Heuristic::MinFill] {
            let td = heuristic_decomposition(&Graph::path(5), m);
            assert_eq!(td.width().unwrap(), 1);
            let k4 = Graph::complete(4);
            let td = heuristic_decomposition(&k4, m);
            assert_eq!(td.width().unwrap(), 3);
            assert_eq!(validate_decomposition(&k4, &td).unwrap(), vec![]);
        }
    }

    #[test]
    fn ties_break_on_smallest_id() {
        assert_eq!(elimination_ordering(&Graph::cycle(4), Heuristic::MinDegree)[0], 1);
        assert_eq!(elimination_ordering(&Graph::new(3), Heuristic::MinFill), vec![1, 2, 3]);
    }

    #[test]
    fn disconnected_and_empty() {
        let g = Graph::from_edges(5, [(1, 2), (4, 5)]).unwrap();
        let td = heuristic_decomposition(&g, Heuristic::MinFill);
        assert_eq!(validate_decomposition(&g, &td).unwrap(), vec![]);
        let td = heuristic_decomposition(&Graph::new(0), Heuristic::MinFill);
        assert_eq!(td.num_bags(), 1);
        assert_eq!(validate_decomposition(&Graph::new(0), &td).unwrap(), vec![]);
    }

    #[test]
    fn rejects_bad_orderings() {
        let g = Graph::path(3);
        assert!(decomposition_from_ordering(&g, &[1, 1, 2]).is_err());
        assert!(decomposition_from_ordering(&g, &[1, 2]).is_err());
        assert!(decomposition_from_ordering(&g, &[1, 2, 4]).is_err());
    }

    #[test]
    fn parses_names() {
        assert_eq!("min-fill".parse::<Heuristic>().unwrap(), Heuristic::MinFill);
        assert_eq!("min_degree".parse::<Heuristic>().unwrap(), Heuristic::MinDegree);
        assert!("greedy".parse::<Heuristic>().is_err());
    }
}
