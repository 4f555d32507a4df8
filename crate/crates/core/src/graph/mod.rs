//! Immutable undirected simple graph in compressed sparse row form.
//!
//! Adjacency lists are sorted, so neighborhood intersection is a linear merge
//! and edge membership is a binary search. Raw labels from the input are kept
//! in ascending order; `labels[id]` is the raw label of dense id `id`.

mod io;

pub use io::{load_edge_list, load_path, read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[repr(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipDirection {
    Add,
    Remove,
}

/// A single edge toggle between two graphs that are neighbors under edge privacy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeFlip {
    pub u: NodeId,
    pub v: NodeId,
    pub direction: FlipDirection,
}

impl EdgeFlip {
    pub fn add(u: NodeId, v: NodeId) -> Self {
        EdgeFlip { u, v, direction: FlipDirection::Add }
    }

    pub fn remove(u: NodeId, v: NodeId) -> Self {
        EdgeFlip { u, v, direction: FlipDirection::Remove }
    }

    pub fn inverse(self) -> Self {
        let direction = match self.direction {
            FlipDirection::Add => FlipDirection::Remove,
            FlipDirection::Remove => FlipDirection::Add,
        };
        EdgeFlip { direction, ..self }
    }

    /// The flip that toggles `(u, v)` in `g`, whichever direction that is.
    pub fn toggle(g: &Graph, u: NodeId, v: NodeId) -> Self {
        if g.has_edge(u, v) {
            EdgeFlip::remove(u, v)
        } else {
            EdgeFlip::add(u, v)
        }
    }

    pub fn touches(self, r: NodeId) -> bool {
        self.u == r || self.v == r
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    labels: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub max_degree: usize,
    /// `degree_histogram[d]` is the number of nodes with degree `d`.
    pub degree_histogram: Vec<usize>,
}

impl Graph {
    pub fn empty() -> Self {
        Graph { offsets: vec![0], neighbors: Vec::new(), labels: Vec::new() }
    }

    /// Builds a graph on nodes `0..n` (labels equal to ids). Self-loops are
    /// dropped and repeated or reversed pairs collapse to one edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_labeled_edges((0..n as i64).collect(), edges)
    }

    /// `labels` must be strictly ascending; edge endpoints index into it.
    pub(crate) fn from_labeled_edges<I>(labels: Vec<i64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = labels.len();
        if n > u32::MAX as usize {
            return Err(Error::Domain(format!("{n} nodes exceed 32-bit id space")));
        }
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(Error::NodeOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(Error::NodeOutOfRange { id: v, n });
            }
            if u == v {
                continue;
            }
            adj[u].push(NodeId::from(v));
            adj[v].push(NodeId::from(u));
        }
        Ok(Self::from_adjacency(labels, adj))
    }

    fn from_adjacency(labels: Vec<i64>, mut adj: Vec<Vec<NodeId>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut total = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            total += list.len();
            offsets.push(total);
        }
        let mut neighbors = Vec::with_capacity(total);
        for list in adj {
            neighbors.extend(list);
        }
        Graph { offsets, neighbors, labels }
    }

    /// Reassembles a graph from raw CSR parts, checking every structural invariant.
    pub(crate) fn from_csr(offsets: Vec<usize>, neighbors: Vec<NodeId>, labels: Vec<i64>) -> Result<Self> {
        let g = Graph { offsets, neighbors, labels };
        g.validate()?;
        Ok(g)
    }

    /// Checks symmetry, absence of self-loops and duplicates, sortedness, and label order.
    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        let bad = |msg: String| Err(Error::Precondition(msg));
        if self.offsets.len() != n + 1 || self.offsets[0] != 0 {
            return bad("offset table does not match node count".into());
        }
        if *self.offsets.last().unwrap() != self.neighbors.len() {
            return bad("offset table does not cover neighbor array".into());
        }
        if self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets are not monotone".into());
        }
        if self.labels.windows(2).any(|w| w[0] >= w[1]) {
            return bad("labels are not strictly ascending".into());
        }
        for u in self.nodes() {
            let list = self.neighbors(u);
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("adjacency of {u} is not strictly sorted"));
            }
            for &v in list {
                if v.index() >= n {
                    return Err(Error::NodeOutOfRange { id: v.index(), n });
                }
                if v == u {
                    return bad(format!("self-loop at {u}"));
                }
                if !self.has_edge(v, u) {
                    return bad(format!("edge ({u}, {v}) is not symmetric"));
                }
            }
        }
        if self.neighbors.len() % 2 != 0 {
            return bad("odd adjacency total".into());
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Undirected edge count.
    #[inline]
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n()).map(NodeId::from)
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u.index() + 1] - self.offsets[u.index()]
    }

    pub fn max_degree(&self) -> usize {
        self.nodes().map(|u| self.degree(u)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn raw_label(&self, u: NodeId) -> i64 {
        self.labels[u.index()]
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn node_for_label(&self, raw: i64) -> Result<NodeId> {
        self.labels
            .binary_search(&raw)
            .map(NodeId::from)
            .map_err(|_| Error::UnknownLabel(raw))
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u.index() < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { id: u.index(), n: self.n() })
        }
    }

    pub fn stats(&self) -> GraphStats {
        let max_degree = self.max_degree();
        let mut degree_histogram = vec![0; if self.n() == 0 { 0 } else { max_degree + 1 }];
        for u in self.nodes() {
            degree_histogram[self.degree(u)] += 1;
        }
        GraphStats { nodes: self.n(), edges: self.m(), max_degree, degree_histogram }
    }

    /// `|N(u) ∩ N(v)|` by merging the two sorted adjacency lists.
    pub fn common_neighbor_count(&self, u: NodeId, v: NodeId) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        let (a, b) = (self.neighbors(u), self.neighbors(v));
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(count)
    }

    /// Nodes that may be recommended to `r`: everything except `r` and its neighbors,
    /// in ascending id order.
    pub fn candidate_set(&self, r: NodeId) -> Result<Vec<NodeId>> {
        self.check_node(r)?;
        let nbrs = self.neighbors(r);
        let mut out = Vec::with_capacity(self.n().saturating_sub(nbrs.len() + 1));
        let mut next = nbrs.iter().peekable();
        for u in self.nodes() {
            if next.peek() == Some(&&u) {
                next.next();
                continue;
            }
            if u != r {
                out.push(u);
            }
        }
        Ok(out)
    }

    /// Returns a new graph with the flip applied; `self` is untouched.
    pub fn apply_flip(&self, flip: &EdgeFlip) -> Result<Graph> {
        let EdgeFlip { u, v, direction } = *flip;
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::Precondition(format!("flip endpoints coincide at {u}")));
        }
        let present = self.has_edge(u, v);
        match direction {
            FlipDirection::Add if present => {
                return Err(Error::Precondition(format!("edge ({u}, {v}) already present")))
            }
            FlipDirection::Remove if !present => {
                return Err(Error::Precondition(format!("edge ({u}, {v}) not present")))
            }
            _ => {}
        }

        let n = self.n();
        let delta: isize = if direction == FlipDirection::Add { 1 } else { -1 };
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity((self.neighbors.len() as isize + 2 * delta) as usize);
        offsets.push(0);
        for w in self.nodes() {
            let list = self.neighbors(w);
            let other = if w == u {
                Some(v)
            } else if w == v {
                Some(u)
            } else {
                None
            };
            match (other, direction) {
                (Some(x), FlipDirection::Add) => {
                    let pos = list.partition_point(|&y| y < x);
                    neighbors.extend_from_slice(&list[..pos]);
                    neighbors.push(x);
                    neighbors.extend_from_slice(&list[pos..]);
                }
                (Some(x), FlipDirection::Remove) => {
                    neighbors.extend(list.iter().copied().filter(|&y| y != x));
                }
                (None, _) => neighbors.extend_from_slice(list),
            }
            offsets.push(neighbors.len());
        }
        Ok(Graph { offsets, neighbors, labels: self.labels.clone() })
    }

    /// Relabels nodes: node `i` of `self` becomes node `perm[i]` of the result.
    /// Labels are kept by position, so raw ids follow dense ids.
    pub fn permuted(&self, perm: &[NodeId]) -> Result<Graph> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::Precondition(format!("permutation has {} entries for {n} nodes", perm.len())));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p.index() >= n || std::mem::replace(&mut seen[p.index()], true) {
                return Err(Error::Precondition("mapping is not a bijection".into()));
            }
        }
        let edges = self.edges().map(|(u, v)| (perm[u.index()].index(), perm[v.index()].index()));
        Graph::from_labeled_edges(self.labels.clone(), edges.collect::<Vec<_>>())
    }
}
