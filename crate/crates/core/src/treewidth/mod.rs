//! Tree decompositions: validation, heuristic and exact construction, nice
//! form, pseudo-clique recognition, normalization and lower bounds.

mod elimination;
mod exact;
mod nice;
mod pseudo;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structures::Graph;

pub use elimination::{decomposition_from_ordering, elimination_ordering, heuristic_decomposition, Heuristic};
pub use exact::{exact_treewidth, minor_min_width};
pub use nice::{make_nice, NiceDecomposition, NiceKind, NiceNode};
pub use pseudo::{
    certificate_holds, is_pseudo_clique, normalize_pseudo, pseudo_clique_lower_bound, pseudo_clique_paths, LowerBound,
    PseudoClique,
};

/// A tree of bags with explicit (1-based, as in PACE) bag ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    bags: BTreeMap<usize, BTreeSet<usize>>,
    edges: BTreeSet<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new() -> TreeDecomposition {
        TreeDecomposition::default()
    }

    /// Bags numbered `1..` in the given order, joined by `edges` over those numbers.
    pub fn from_parts(
        bags: impl IntoIterator<Item = BTreeSet<usize>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> TreeDecomposition {
        let mut td = TreeDecomposition::new();
        for (i, bag) in bags.into_iter().enumerate() {
            td.bags.insert(i + 1, bag);
        }
        for (a, b) in edges {
            td.add_edge(a, b);
        }
        td
    }

    /// Inserts or replaces bag `id`.
    pub fn set_bag(&mut self, id: usize, bag: BTreeSet<usize>) {
        self.bags.insert(id, bag);
    }

    /// Adds a bag with the next free id and returns that id.
    pub fn push_bag(&mut self, bag: BTreeSet<usize>) -> usize {
        let id = self.next_id();
        self.bags.insert(id, bag);
        id
    }

    pub fn next_id(&self) -> usize {
        self.bags.keys().next_back().map_or(1, |&m| m + 1)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn bags(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.bags
    }

    pub fn bag(&self, id: usize) -> Option<&BTreeSet<usize>> {
        self.bags.get(&id)
    }

    pub fn bag_mut(&mut self, id: usize) -> Option<&mut BTreeSet<usize>> {
        self.bags.get_mut(&id)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn num_bags(&self) -> usize {
        self.bags.len()
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.values().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Largest bag size minus one (0 when every bag is empty).
    pub fn width(&self) -> Result<usize> {
        if self.bags.is_empty() {
            return Err(Error::InvalidDecomposition("decomposition has no bags".into()));
        }
        Ok(self.max_bag_size().saturating_sub(1))
    }

    /// Neighbouring bag ids, per bag id.
    pub fn adjacency(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = self.bags.keys().map(|&k| (k, Vec::new())).collect();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        adj
    }

    /// Renumbers bags `1..=num_bags` in ascending id order.
    pub fn compacted(&self) -> TreeDecomposition {
        let index: BTreeMap<usize, usize> = self.bags.keys().enumerate().map(|(i, &k)| (k, i + 1)).collect();
        TreeDecomposition {
            bags: self.bags.iter().map(|(k, b)| (index[k], b.clone())).collect(),
            edges: self
                .edges
                .iter()
                .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)))
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
        }
    }
}

/// One failed condition of a tree decomposition, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum Violation {
    /// The bag graph is not a tree.
    NotATree { reason: String },
    /// Condition (i): a vertex in no bag.
    VertexUncovered { vertex: usize },
    /// Condition (ii): an edge contained in no bag.
    EdgeUncovered { u: usize, v: usize },
    /// Condition (iii): two bags holding `vertex` whose tree path leaves its occurrence set.
    Disconnected { vertex: usize, bags: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree { reason } => write!(f, "not a tree: {reason}"),
            Violation::VertexUncovered { vertex } => write!(f, "(i) vertex {vertex} is in no bag"),
            Violation::EdgeUncovered { u, v } => write!(f, "(ii) edge {{{u}, {v}}} is in no bag"),
            Violation::Disconnected { vertex, bags } => write!(
                f,
                "(iii) bags containing vertex {vertex} are disconnected (bags {} and {})",
                bags.0, bags.1
            ),
        }
    }
}

fn tree_violation(td: &TreeDecomposition) -> Option<Violation> {
    let not_tree = |reason: String| Some(Violation::NotATree { reason });
    if td.bags.is_empty() {
        return (!td.edges.is_empty()).then(|| Violation::NotATree {
            reason: "edges without bags".into(),
        });
    }
    for &(a, b) in &td.edges {
        if a == b {
            return not_tree(format!("loop at bag {a}"));
        }
        if let Some(x) = [a, b].into_iter().find(|x| !td.bags.contains_key(x)) {
            return not_tree(format!("edge {{{a}, {b}}} references unknown bag {x}"));
        }
    }
    if td.edges.len() != td.bags.len() - 1 {
        return not_tree(format!("{} bags but {} edges", td.bags.len(), td.edges.len()));
    }
    let adj = td.adjacency();
    let start = *td.bags.keys().next().unwrap();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[&x] {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    if let Some(&lost) = td.bags.keys().find(|k| !seen.contains(k)) {
        return not_tree(format!("bag {lost} is not connected to bag {start}"));
    }
    None
}

/// Checks the tree shape and conditions (i)-(iii). An empty list means valid.
pub fn validate_decomposition(g: &Graph, td: &TreeDecomposition) -> Result<Vec<Violation>> {
    for (id, bag) in &td.bags {
        if let Some(v) = bag.iter().find(|&&v| v == 0 || v > g.n()) {
            return Err(Error::InvalidDecomposition(format!(
                "bag {id} contains vertex {v}, graph has {} vertices",
                g.n()
            )));
        }
    }
    let mut out = Vec::new();
    let shape_ok = match tree_violation(td) {
        Some(v) => {
            out.push(v);
            false
        }
        None => true,
    };

    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n() + 1];
    for (&id, bag) in &td.bags {
        for &v in bag {
            holders[v].push(id);
        }
    }
    for v in g.vertices() {
        if holders[v].is_empty() {
            out.push(Violation::VertexUncovered { vertex: v });
        }
    }
    for (u, v) in g.edges() {
        let covered = holders[u].iter().any(|id| td.bags[id].contains(&v));
        if !covered {
            out.push(Violation::EdgeUncovered { u, v });
        }
    }
    if shape_ok {
        let adj = td.adjacency();
        for v in g.vertices() {
            let Some(&start) = holders[v].first() else { continue };
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[&x] {
                    if td.bags[&y].contains(&v) && seen.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
            if let Some(&other) = holders[v].iter().find(|b| !seen.contains(b)) {
                out.push(Violation::Disconnected {
                    vertex: v,
                    bags: (start, other),
                });
            }
        }
    }
    Ok(out)
}

pub fn is_valid(g: &Graph, td: &TreeDecomposition) -> bool {
    matches!(validate_decomposition(g, td), Ok(v) if v.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(vs: &[usize]) -> BTreeSet<usize> {
        vs.iter().copied().collect()
    }

    #[test]
    fn single_edge() {
        let g = Graph::path(2);
        let td = TreeDecomposition::from_parts([bag(&[1, 2])], []);
        assert_eq!(validate_decomposition(&g, &td).unwrap(), vec![]);
        let td = TreeDecomposition::from_parts([bag(&[1]), bag(&[2])], []);
        let v = validate_decomposition(&g, &td).unwrap();
        assert!(v.contains(&Violation::EdgeUncovered { u: 1, v: 2 }), "{v:?}");
    }

    #[test]
    fn triangle_on_path_breaks_connectivity() {
        let g = Graph::cycle(3);
        let td = TreeDecomposition::from_parts([bag(&[1, 2]), bag(&[2, 3]), bag(&[1, 3])], [(1, 2), (2, 3)]);
        let v = validate_decomposition(&g, &td).unwrap();
        assert_eq!(
            v,
            vec![Violation::Disconnected {
                vertex: 1,
                bags: (1, 3)
            }]
        );
    }

    #[test]
    fn widths() {
        assert_eq!(TreeDecomposition::from_parts([bag(&[1, 2, 3])], []).width().unwrap(), 2);
        assert_eq!(
            TreeDecomposition::from_parts([bag(&[1]), bag(&[2])], [(1, 2)])
                .width()
                .unwrap(),
            0
        );
        assert!(TreeDecomposition::new().width().is_err());
    }

    #[test]
    fn out_of_range_vertex_is_error() {
        let td = TreeDecomposition::from_parts([bag(&[1, 4])], []);
        assert!(validate_decomposition(&Graph::path(3), &td).is_err());
    }

    #[test]
    fn detects_non_tree() {
        let g = Graph::new(1);
        let td = TreeDecomposition::from_parts([bag(&[1]), bag(&[1]), bag(&[1])], [(1, 2), (2, 3), (1, 3)]);
        assert!(matches!(
            validate_decomposition(&g, &td).unwrap()[0],
            Violation::NotATree { .. }
        ));
        let forest = TreeDecomposition::from_parts([bag(&[1]), bag(&[])], []);
        assert!(!is_valid(&g, &forest));
        let mut dangling = TreeDecomposition::from_parts([bag(&[1])], []);
        dangling.add_edge(1, 7);
        assert!(!is_valid(&g, &dangling));
    }
}
