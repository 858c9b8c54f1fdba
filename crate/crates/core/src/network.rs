//! Agent network: undirected, connected, positively weighted.
//!
//! Agents are indexed `0..n` in the API. The edge-list text format uses
//! 1-based indices and is converted on load.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

/// Unordered agent pair stored as `(lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    /// Canonicalizes `(i, j)`; panics on `i == j`.
    pub fn new(i: usize, j: usize) -> Self {
        assert_ne!(i, j, "an edge needs two distinct endpoints");
        if i < j {
            Edge { lo: i, hi: j }
        } else {
            Edge { lo: j, hi: i }
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }
}

/// A neighbor of some agent, together with the shared edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub agent: usize,
    pub edge: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    p: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    index: HashMap<Edge, usize>,
    // Per agent, neighbors sorted by agent index.
    adjacency: Vec<Vec<Neighbor>>,
}

impl Network {
    /// Validates and builds a network from `(i, j, W_ij)` triples (0-based).
    ///
    /// Either orientation of a pair is accepted; giving both is a duplicate.
    pub fn new(n: usize, p: usize, weighted_edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidDimensions { n, p });
        }
        let mut edges = Vec::with_capacity(weighted_edges.len());
        let mut weights = Vec::with_capacity(weighted_edges.len());
        let mut index = HashMap::with_capacity(weighted_edges.len());
        for &(i, j, w) in weighted_edges {
            for a in [i, j] {
                if a >= n {
                    return Err(Error::IndexOutOfRange { index: a, len: n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonpositiveWeight { i, j, weight: w });
            }
            let e = Edge::new(i, j);
            if index.insert(e, edges.len()).is_some() {
                return Err(Error::DuplicateEdge(e.lo, e.hi));
            }
            edges.push(e);
            weights.push(w);
        }

        let mut adjacency = vec![Vec::new(); n];
        for (k, (e, &w)) in edges.iter().zip(&weights).enumerate() {
            adjacency[e.lo].push(Neighbor {
                agent: e.hi,
                edge: k,
                weight: w,
            });
            adjacency[e.hi].push(Neighbor {
                agent: e.lo,
                edge: k,
                weight: w,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|nb| nb.agent);
        }

        let net = Network {
            n,
            p,
            edges,
            weights,
            index,
            adjacency,
        };
        if !net.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(net)
    }

    /// Parses the edge-list text format and builds the network.
    ///
    /// One edge per line as `i j W_ij`, 1-based, whitespace separated.
    /// `#` starts a comment; blank lines are ignored.
    pub fn from_edge_list(text: &str, n: usize, p: usize) -> Result<Self> {
        let edges = parse_edge_list(text)?;
        Self::new(n, p, &edges)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(a) = queue.pop_front() {
            for nb in &self.adjacency[a] {
                if !seen[nb.agent] {
                    seen[nb.agent] = true;
                    count += 1;
                    queue.push_back(nb.agent);
                }
            }
        }
        count == self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> Edge {
        self.edges[k]
    }

    pub fn edge_weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Index of the edge joining `i` and `j`, in either order.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        if i == j || i >= self.n || j >= self.n {
            return None;
        }
        self.index.get(&Edge::new(i, j)).copied()
    }

    /// `W_ij`, zero for non-adjacent pairs.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.edge_index(i, j).map_or(0.0, |k| self.weights[k])
    }

    pub fn neighbors(&self, j: usize) -> &[Neighbor] {
        &self.adjacency[j]
    }

    pub fn degree(&self, j: usize) -> usize {
        self.adjacency[j].len()
    }

    /// Position of `k` inside `neighbors(j)`.
    pub fn neighbor_slot(&self, j: usize, k: usize) -> Option<usize> {
        self.adjacency
            .get(j)?
            .binary_search_by_key(&k, |nb| nb.agent)
            .ok()
    }

    /// `w_j`, the total weight of edges incident to `j`.
    pub fn agent_weight_sum(&self, j: usize) -> Result<f64> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.n,
            });
        }
        Ok(self.adjacency[j].iter().map(|nb| nb.weight).sum())
    }

    /// `(i, j, W_ij)` triples in insertion order.
    pub fn weighted_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges
            .iter()
            .zip(&self.weights)
            .map(|(e, &w)| (e.lo, e.hi, w))
            .collect()
    }

    /// Serializes to the 1-based edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("# i j W_ij\n");
        for (e, w) in self.edges.iter().zip(&self.weights) {
            out.push_str(&format!("{} {} {}\n", e.lo + 1, e.hi + 1, crate::fmt_f64(*w)));
        }
        out
    }
}

/// Parses `i j W_ij` lines (1-based) into 0-based triples.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected `i j W_ij`, got {:?}", line)));
        }
        let idx = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(format!("bad index {:?}", s)))?;
            v.checked_sub(1)
                .ok_or_else(|| err("indices are 1-based".to_string()))
        };
        let w: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("bad weight {:?}", fields[2])))?;
        edges.push((idx(fields[0])?, idx(fields[1])?, w));
    }
    Ok(edges)
}
