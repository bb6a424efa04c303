use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexLabel {
    Main,
    Edge,
    None,
}

impl VertexLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            VertexLabel::Main => "main",
            VertexLabel::Edge => "edge",
            VertexLabel::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<VertexLabel> {
        match s {
            "main" => Some(VertexLabel::Main),
            "edge" => Some(VertexLabel::Edge),
            "none" => Some(VertexLabel::None),
            _ => None,
        }
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Simple undirected graph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    labels: Option<Vec<VertexLabel>>,
    descriptions: Option<Vec<String>>,
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph {
            n,
            edges: BTreeSet::new(),
            labels: None,
            descriptions: None,
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 1..=n {
            for v in u + 1..=n {
                g.edges.insert((u, v));
            }
        }
        g
    }

    pub fn path(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 1..n {
            g.edges.insert((u, u + 1));
        }
        g
    }

    pub fn cycle(n: usize) -> Graph {
        let mut g = Graph::path(n);
        if n >= 3 {
            g.edges.insert((1, n));
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        if u == v {
            return Err(Error::Invalid(format!("self-loop at vertex {u}")));
        }
        for w in [u, v] {
            if w == 0 || w > self.n {
                return Err(Error::Invalid(format!("vertex {w} outside 1..={}", self.n)));
            }
        }
        Ok(self.edges.insert((u.min(v), u.max(v))))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Sorted neighbour lists, indexed by vertex; slot 0 is unused.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn labels(&self) -> Option<&[VertexLabel]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> VertexLabel {
        self.labels
            .as_ref()
            .and_then(|l| l.get(v - 1).copied())
            .unwrap_or(VertexLabel::None)
    }

    pub fn set_labels(&mut self, labels: Vec<VertexLabel>) -> Result<()> {
        if labels.len() != self.n {
            return Err(Error::Invalid(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn descriptions(&self) -> Option<&[String]> {
        self.descriptions.as_deref()
    }

    pub fn description(&self, v: usize) -> Option<&str> {
        self.descriptions
            .as_ref()
            .and_then(|d| d.get(v - 1))
            .map(String::as_str)
    }

    pub fn set_descriptions(&mut self, descriptions: Vec<String>) -> Result<()> {
        if descriptions.len() != self.n {
            return Err(Error::Invalid(format!(
                "{} descriptions for {} vertices",
                descriptions.len(),
                self.n
            )));
        }
        self.descriptions = Some(descriptions);
        Ok(())
    }

    /// Vertices with the given label, ascending.
    pub fn labelled(&self, label: VertexLabel) -> Vec<usize> {
        self.vertices().filter(|&v| self.label(v) == label).collect()
    }

    /// Subgraph induced by `keep` (deduplicated, sorted). Returns the new
    /// graph and, for each new vertex `i`, the old vertex at `map[i - 1]`.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (Graph, Vec<usize>) {
        let mut map: Vec<usize> = keep.iter().copied().filter(|&v| v >= 1 && v <= self.n).collect();
        map.sort_unstable();
        map.dedup();
        let mut index = vec![0usize; self.n + 1];
        for (i, &v) in map.iter().enumerate() {
            index[v] = i + 1;
        }
        let mut g = Graph::new(map.len());
        for &(u, v) in &self.edges {
            if index[u] != 0 && index[v] != 0 {
                g.edges.insert((index[u].min(index[v]), index[u].max(index[v])));
            }
        }
        if let Some(labels) = &self.labels {
            g.labels = Some(map.iter().map(|&v| labels[v - 1]).collect());
        }
        if let Some(desc) = &self.descriptions {
            g.descriptions = Some(map.iter().map(|&v| desc[v - 1].clone()).collect());
        }
        (g, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_out_of_range() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        assert!(g.add_edge(0, 2).is_err());
        assert!(g.add_edge(2, 4).is_err());
        assert!(g.add_edge(3, 1).unwrap());
        assert!(!g.add_edge(1, 3).unwrap());
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(1, 3)]);
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = Graph::cycle(5);
        let (h, map) = g.induced_subgraph(&[5, 1, 2]);
        assert_eq!(map, vec![1, 2, 5]);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![(1, 2), (1, 3)]);
    }
}
