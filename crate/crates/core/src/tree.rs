//! Finite weighted trees with marked points, and their phylogenetic
//! (Steiner subtree length) diversity.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::diversity::Diversity;
use crate::error::{Error, Result};
use crate::metric::FiniteMetric;
use crate::rat::Rat;
use crate::sets::{GroundSet, SubsetMask};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub length: Rat,
}

/// A connected acyclic graph with positive rational edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricTree {
    nodes: Vec<String>,
    edges: Vec<TreeEdge>,
}

impl MetricTree {
    pub fn new<S: Into<String>>(
        nodes: impl IntoIterator<Item = S>,
        edges: Vec<(usize, usize, Rat)>,
    ) -> Result<Self> {
        let nodes: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let n = nodes.len();
        if n == 0 {
            return Err(Error::InvalidTree("no nodes".into()));
        }
        if edges.len() + 1 != n {
            return Err(Error::InvalidTree(format!(
                "{} nodes need {} edges, got {}",
                n,
                n - 1,
                edges.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, name) in nodes.iter().enumerate() {
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::DuplicateLabel(name.clone()));
            }
        }
        // Union-find catches cycles; with n-1 edges no cycle means connected.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, length) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidTree(format!("edge {u}-{v} out of range")));
            }
            if !length.is_positive() {
                return Err(Error::InvalidTree(format!(
                    "edge {}-{} has nonpositive length {}",
                    nodes[u], nodes[v], length
                )));
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return Err(Error::InvalidTree(format!(
                    "edge {}-{} closes a cycle",
                    nodes[u], nodes[v]
                )));
            }
            parent[ru] = rv;
            out.push(TreeEdge { u, v, length });
        }
        Ok(Self { nodes, edges: out })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    /// The point at node `v`.
    pub fn node_point(&self, v: usize) -> Result<TreePoint> {
        if v >= self.nodes.len() {
            return Err(Error::InvalidTree(format!("node {v} out of range")));
        }
        Ok(TreePoint {
            location: Location::Node(v),
        })
    }

    /// The point at distance `offset` from `edges[edge].u` along that edge.
    pub fn point_on_edge(&self, edge: usize, offset: Rat) -> Result<TreePoint> {
        let e = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::InvalidTree(format!("edge {edge} out of range")))?;
        if offset.is_negative() || offset > e.length {
            return Err(Error::InvalidTree(format!(
                "offset {} outside [0, {}] on edge {}",
                offset, e.length, edge
            )));
        }
        let location = if offset.is_zero() {
            Location::Node(e.u)
        } else if offset == e.length {
            Location::Node(e.v)
        } else {
            Location::Interior { edge, offset }
        };
        Ok(TreePoint { location })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Location {
    Node(usize),
    Interior { edge: usize, offset: Rat },
}

/// A point of a [`MetricTree`]: a node, or a point strictly inside an
/// edge. Node points are canonical, so equal points compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreePoint {
    location: Location,
}

impl TreePoint {
    pub fn node(&self) -> Option<usize> {
        match self.location {
            Location::Node(v) => Some(v),
            Location::Interior { .. } => None,
        }
    }
}

/// Phylogenetic diversity of marked points: δ(A) is the total length of
/// the subtree spanned by A (the union of all paths between its points).
///
/// Internally the tree is subdivided at interior marked points and rooted;
/// each piece of edge lies on a path between two points of A exactly when
/// it separates A, so δ(A) sums the pieces whose lower side holds some but
/// not all of A.
#[derive(Clone, Debug)]
pub struct TreeDiversity {
    ground: GroundSet,
    // Subdivided tree: `parent[v]` with edge length `up_len[v]`, root 0.
    parent: Vec<Option<usize>>,
    up_len: Vec<Rat>,
    depth: Vec<Rat>,
    level: Vec<usize>,
    // Marked points below each vertex (inclusive).
    below: Vec<SubsetMask>,
    marked_vertex: Vec<usize>,
}

impl TreeDiversity {
    pub fn new(tree: &MetricTree, marked: &[(String, TreePoint)]) -> Result<Self> {
        let ground = GroundSet::new(marked.iter().map(|(l, _)| l.clone()))?;
        for (i, (_, p)) in marked.iter().enumerate() {
            if marked[..i].iter().any(|(_, q)| q == p) {
                return Err(Error::InvalidTree(format!(
                    "marked point `{}` duplicates an earlier point",
                    marked[i].0
                )));
            }
        }
        // Subdivide each edge at its interior marked points.
        let mut vertex_count = tree.nodes.len();
        let mut adj: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); vertex_count];
        let mut marked_vertex = vec![0usize; marked.len()];
        for (ei, e) in tree.edges.iter().enumerate() {
            let mut cuts: Vec<(Rat, usize)> = marked
                .iter()
                .enumerate()
                .filter_map(|(mi, (_, p))| match &p.location {
                    Location::Interior { edge, offset } if *edge == ei => Some((offset.clone(), mi)),
                    _ => None,
                })
                .collect();
            cuts.sort();
            let mut prev = e.u;
            let mut prev_off = Rat::zero();
            for (off, mi) in cuts {
                let v = vertex_count;
                vertex_count += 1;
                adj.push(Vec::new());
                let len = &off - &prev_off;
                adj[prev].push((v, len.clone()));
                adj[v].push((prev, len));
                marked_vertex[mi] = v;
                prev = v;
                prev_off = off;
            }
            let len = &e.length - &prev_off;
            adj[prev].push((e.v, len.clone()));
            adj[e.v].push((prev, len));
        }
        for (mi, (_, p)) in marked.iter().enumerate() {
            if let Location::Node(v) = p.location {
                marked_vertex[mi] = v;
            }
        }
        // Root at 0 and orient.
        let mut parent = vec![None; vertex_count];
        let mut up_len = vec![Rat::zero(); vertex_count];
        let mut depth = vec![Rat::zero(); vertex_count];
        let mut level = vec![0usize; vertex_count];
        let mut order = Vec::with_capacity(vertex_count);
        let mut visited = vec![false; vertex_count];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for (v, len) in &adj[u] {
                if !visited[*v] {
                    visited[*v] = true;
                    parent[*v] = Some(u);
                    up_len[*v] = len.clone();
                    depth[*v] = &depth[u] + len;
                    level[*v] = level[u] + 1;
                    stack.push(*v);
                }
            }
        }
        let mut below = vec![SubsetMask::EMPTY; vertex_count];
        for (mi, &v) in marked_vertex.iter().enumerate() {
            below[v] = below[v].with(mi);
        }
        for &u in order.iter().rev() {
            if let Some(p) = parent[u] {
                below[p] = below[p] | below[u];
            }
        }
        Ok(Self {
            ground,
            parent,
            up_len,
            depth,
            level,
            below,
            marked_vertex,
        })
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.level[a] > self.level[b] {
            a = self.parent[a].unwrap();
        }
        while self.level[b] > self.level[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    fn vertex_dist(&self, a: usize, b: usize) -> Rat {
        let c = self.lca(a, b);
        &self.depth[a] + &self.depth[b] - &self.depth[c] * Rat::from_integer(2.into())
    }

    /// Path metric between marked points.
    pub fn distance(&self, i: usize, j: usize) -> Rat {
        self.vertex_dist(self.marked_vertex[i], self.marked_vertex[j])
    }

    pub fn metric(&self) -> FiniteMetric {
        let n = self.ground.len();
        let dist = (0..n * n).map(|k| self.distance(k / n, k % n)).collect();
        FiniteMetric::from_trusted(self.ground.clone(), dist)
    }

    fn in_hull(&self, set: SubsetMask, v: usize) -> bool {
        // v lies on conv(A) iff it is marked in A or at least two of the
        // components around v meet A.
        let k = set.len();
        if k == 0 {
            return false;
        }
        if self.marked_vertex.iter().enumerate().any(|(i, &m)| m == v && set.contains(i)) {
            return true;
        }
        let mut touched = 0;
        let mut covered = SubsetMask::EMPTY;
        for c in (0..self.parent.len()).filter(|&c| self.parent[c] == Some(v)) {
            let part = self.below[c] & set;
            if !part.is_empty() {
                touched += 1;
                covered = covered | part;
            }
        }
        if covered != set {
            touched += 1;
        }
        touched >= 2
    }

    /// Distance from marked point `w` to its gate, the first point of
    /// conv(A) met on the way from `w` towards A.
    pub fn gate_distance(&self, set: SubsetMask, w: usize) -> Result<Rat> {
        let target = set.first().ok_or(Error::EmptySet)?;
        let (mut a, mut b) = (self.marked_vertex[w], self.marked_vertex[target]);
        let c = self.lca(a, b);
        // Walk w → lca → target and stop at the first hull vertex.
        let mut path = Vec::new();
        while a != c {
            path.push(a);
            a = self.parent[a].unwrap();
        }
        path.push(c);
        let mut tail = Vec::new();
        while b != c {
            tail.push(b);
            b = self.parent[b].unwrap();
        }
        path.extend(tail.into_iter().rev());
        let start = self.marked_vertex[w];
        let gate = path
            .into_iter()
            .find(|&v| self.in_hull(set, v))
            .expect("path ends inside the hull");
        Ok(self.vertex_dist(start, gate))
    }
}

impl Diversity for TreeDiversity {
    fn ground(&self) -> &GroundSet {
        &self.ground
    }

    fn value(&self, set: SubsetMask) -> Rat {
        let mut total = Rat::zero();
        for (v, p) in self.parent.iter().enumerate() {
            if p.is_none() {
                continue;
            }
            let inside = self.below[v] & set;
            if !inside.is_empty() && inside != set {
                total += &self.up_len[v];
            }
        }
        total
    }
}
