use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{tree_violation, TreeDecomposition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "vertex", rename_all = "lowercase")]
pub enum NiceKind {
    /// Empty bag, no children.
    Leaf,
    /// Bag of the single child plus the vertex.
    Introduce(usize),
    /// Bag of the single child minus the vertex.
    Forget(usize),
    /// Two children with the same bag as this node.
    Join,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NiceNode {
    pub bag: BTreeSet<usize>,
    pub kind: NiceKind,
    pub children: Vec<usize>,
}

/// Rooted decomposition in which every node is a leaf, introduce, forget or
/// join node. Children precede their parents in `nodes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NiceDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
}

impl NiceDecomposition {
    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// The same tree as a plain decomposition; node `i` becomes bag `i + 1`.
    pub fn to_decomposition(&self) -> TreeDecomposition {
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.children.iter().map(move |&c| (i + 1, c + 1)));
        TreeDecomposition::from_parts(self.nodes.iter().map(|n| n.bag.clone()), edges)
    }

    fn push(&mut self, bag: BTreeSet<usize>, kind: NiceKind, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { bag, kind, children });
        self.nodes.len() - 1
    }

    /// Extends node `top` by forget and introduce steps until its bag is `target`.
    fn morph(&mut self, mut top: usize, target: &BTreeSet<usize>) -> usize {
        let from = self.nodes[top].bag.clone();
        let mut bag = from.clone();
        for &v in from.difference(target) {
            bag.remove(&v);
            top = self.push(bag.clone(), NiceKind::Forget(v), vec![top]);
        }
        for &v in target.difference(&from) {
            bag.insert(v);
            top = self.push(bag.clone(), NiceKind::Introduce(v), vec![top]);
        }
        top
    }
}

/// Converts a decomposition to nice form, rooted at its smallest bag id.
/// Width is unchanged; the root keeps the root bag.
pub fn make_nice(td: &TreeDecomposition) -> Result<NiceDecomposition> {
    if let Some(v) = tree_violation(td) {
        return Err(Error::InvalidDecomposition(v.to_string()));
    }
    let Some(&root_bag) = td.bags().keys().next() else {
        return Err(Error::InvalidDecomposition("decomposition has no bags".into()));
    };
    let adj = td.adjacency();

    // Iterative DFS for a post-order of bags with their children.
    let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut post = Vec::with_capacity(td.num_bags());
    let mut stack = vec![(root_bag, None, false)];
    while let Some((b, parent, expanded)) = stack.pop() {
        if expanded {
            post.push(b);
            continue;
        }
        stack.push((b, parent, true));
        let mut kids: Vec<usize> = adj[&b].iter().copied().filter(|&c| Some(c) != parent).collect();
        kids.sort_unstable();
        for &c in kids.iter().rev() {
            stack.push((c, Some(b), false));
        }
        children.insert(b, kids);
    }

    let mut nice = NiceDecomposition {
        nodes: Vec::new(),
        root: 0,
    };
    let mut top: BTreeMap<usize, usize> = BTreeMap::new();
    for b in post {
        let bag = &td.bags()[&b];
        let mut tops: Vec<usize> = children[&b]
            .iter()
            .map(|c| {
                let t = top.remove(c).expect("children are processed first");
                nice.morph(t, bag)
            })
            .collect();
        let node = if tops.is_empty() {
            let leaf = nice.push(BTreeSet::new(), NiceKind::Leaf, vec![]);
            nice.morph(leaf, bag)
        } else {
            let mut acc = tops.remove(0);
            for t in tops {
                acc = nice.push(bag.clone(), NiceKind::Join, vec![acc, t]);
            }
            acc
        };
        top.insert(b, node);
    }
    nice.root = top[&root_bag];
    Ok(nice)
}
