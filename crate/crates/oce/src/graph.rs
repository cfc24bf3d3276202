//! Directed acyclic graphs over nodes `1..=n`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A validated DAG. Nodes are 1-based integers, mirroring the usual
/// variable indexing; acyclicity is checked eagerly so every consumer may
/// assume a topological order exists.
///
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl Dag {
    /// Build a DAG on `n` nodes from `(parent, child)` pairs.
    ///
    /// Rejects out-of-range nodes, self-loops, duplicate edges and cycles.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("a DAG needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        let mut parents = vec![Vec::new(); n + 1];
        let mut children = vec![Vec::new(); n + 1];
        for (h, j) in edges {
            for node in [h, j] {
                if node == 0 || node > n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if h == j {
                return Err(Error::SelfLoop(h));
            }
            if !set.insert((h, j)) {
                return Err(Error::DuplicateEdge(h, j));
            }
            parents[j].push(h);
            children[h].push(j);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let topo = kahn_order(n, &parents, &children)?;
        Ok(Self {
            n,
            edges: set,
            parents,
            children,
            topo,
            labels: None,
        })
    }

    /// Attach display names, one per node.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidParam(format!(
                "expected {} labels, got {}",
                self.n,
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, h: usize, j: usize) -> bool {
        self.edges.contains(&(h, j))
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of a node: its label if set, otherwise `Y<index>`.
    pub fn label(&self, node: usize) -> String {
        match &self.labels {
            Some(l) if node >= 1 && node <= self.n => l[node - 1].clone(),
            _ => format!("Y{node}"),
        }
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.n {
            return Err(Error::NodeOutOfRange { node, n: self.n });
        }
        Ok(())
    }

    /// The parent set `{h : (h, j) ∈ E}`, ascending; empty for roots.
    pub fn parents(&self, j: usize) -> Result<&[usize]> {
        self.check_node(j)?;
        Ok(&self.parents[j])
    }

    /// The child set of `h`, ascending.
    pub fn children(&self, h: usize) -> Result<&[usize]> {
        self.check_node(h)?;
        Ok(&self.children[h])
    }

    /// Nodes with no parents, ascending.
    pub fn roots(&self) -> Vec<usize> {
        (1..=self.n)
            .filter(|&j| self.parents[j].is_empty())
            .collect()
    }

    /// A topological order: every edge `(h, j)` has `h` placed before `j`.
    /// Ties are broken by ascending node index, so the order is unique for
    /// a given graph.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// All nodes reachable from `i` along directed paths, excluding `i`
    /// itself; ascending.
    pub fn descendants(&self, i: usize) -> Result<Vec<usize>> {
        self.check_node(i)?;
        let mut seen = vec![false; self.n + 1];
        let mut stack = vec![i];
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        Ok((1..=self.n).filter(|&j| seen[j]).collect())
    }

    pub fn is_descendant(&self, of: usize, node: usize) -> Result<bool> {
        Ok(self.descendants(of)?.contains(&node))
    }
}

/// Kahn's algorithm with a minimum-index frontier; deterministic output.
fn kahn_order(n: usize, parents: &[Vec<usize>], children: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut indegree: Vec<usize> = (0..=n)
        .map(|j| parents.get(j).map_or(0, Vec::len))
        .collect();
    let mut frontier: BTreeSet<usize> = (1..=n).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&u) = frontier.iter().next() {
        frontier.remove(&u);
        order.push(u);
        for &c in &children[u] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                frontier.insert(c);
            }
        }
    }
    if order.len() != n {
        return Err(Error::CycleDetected);
    }
    Ok(order)
}
