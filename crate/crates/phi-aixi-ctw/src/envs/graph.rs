//! Undirected contact graphs: construction, file I/O, and centrality.
//!
//! Graphs are simple (no loops, no multi-edges) and stored as adjacency
//! lists plus a canonical sorted edge list. Betweenness centrality uses
//! Brandes' accumulation over BFS shortest-path DAGs; for an undirected
//! graph each unordered pair is visited from both endpoints, so the
//! accumulated totals are halved. Ties in centrality rankings break toward
//! the lower node id to keep rankings reproducible.
//!
//! Two synthetic generators cover desk-scale experiments: a rewired ring
//! lattice (small-world) and preferential attachment (heavy-tailed hubs).
//! Real networks load from whitespace-separated edge lists, one `u v` pair
//! per line, `#` comments allowed.

use rand::Rng;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("edge list line {line}: {reason}")]
    BadEdgeList { line: usize, reason: String },
    #[error("graph has no nodes")]
    Empty,
}

/// A simple undirected graph over nodes `0..n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Graph {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            assert!((a as usize) < n && (b as usize) < n, "edge ({a},{b}) out of range");
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &set {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        Graph { n, adj, edges: set.into_iter().collect() }
    }

    /// Parse a whitespace-separated edge list (`u v` per line). Node count
    /// is `1 + max id`.
    pub fn from_edge_list_text(text: &str) -> Result<Graph, GraphError> {
        let mut edges = Vec::new();
        let mut max_id = None::<u32>;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next = |what: &str| -> Result<u32, GraphError> {
                it.next()
                    .ok_or_else(|| GraphError::BadEdgeList {
                        line: i + 1,
                        reason: format!("missing {what} node id"),
                    })?
                    .parse()
                    .map_err(|e| GraphError::BadEdgeList {
                        line: i + 1,
                        reason: format!("bad {what} node id: {e}"),
                    })
            };
            let a = next("first")?;
            let b = next("second")?;
            if it.next().is_some() {
                return Err(GraphError::BadEdgeList {
                    line: i + 1,
                    reason: "more than two fields".into(),
                });
            }
            max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
            edges.push((a, b));
        }
        match max_id {
            None => Err(GraphError::Empty),
            Some(m) => Ok(Graph::from_edges(m as usize + 1, edges)),
        }
    }

    pub fn to_edge_list_text(&self) -> String {
        let mut s = String::new();
        for &(a, b) in &self.edges {
            s.push_str(&format!("{a} {b}\n"));
        }
        s
    }

    /// Rewired ring lattice: each node links to its `k/2` nearest
    /// neighbours on each side, then every edge is rewired with
    /// probability `p` to a uniform non-duplicate target.
    pub fn ring_lattice(n: usize, k: usize, p: f64, rng: &mut impl Rng) -> Graph {
        assert!(n > k && k >= 2 && k % 2 == 0, "need n > k, even k >= 2");
        let mut set = BTreeSet::new();
        for v in 0..n as u32 {
            for d in 1..=(k / 2) as u32 {
                let u = (v + d) % n as u32;
                set.insert((v.min(u), v.max(u)));
            }
        }
        let mut edges: Vec<(u32, u32)> = set.iter().copied().collect();
        for i in 0..edges.len() {
            if rng.random_bool(p) {
                let (a, _) = edges[i];
                for _ in 0..32 {
                    let c = rng.random_range(0..n as u32);
                    let cand = (a.min(c), a.max(c));
                    if c != a && !set.contains(&cand) {
                        set.remove(&edges[i]);
                        set.insert(cand);
                        edges[i] = cand;
                        break;
                    }
                }
            }
        }
        Graph::from_edges(n, set)
    }

    /// Preferential attachment: a seed clique of `m + 1` nodes, then each
    /// arriving node attaches to `m` distinct existing nodes chosen with
    /// probability proportional to degree.
    pub fn preferential_attachment(n: usize, m: usize, rng: &mut impl Rng) -> Graph {
        assert!(m >= 1 && n > m, "need n > m >= 1");
        let mut edges: Vec<(u32, u32)> = Vec::new();
        // Repeated-endpoints urn: sampling an index uniformly from this
        // list is degree-proportional sampling.
        let mut urn: Vec<u32> = Vec::new();
        for a in 0..=m as u32 {
            for b in a + 1..=m as u32 {
                edges.push((a, b));
                urn.push(a);
                urn.push(b);
            }
        }
        for v in (m + 1) as u32..n as u32 {
            let mut chosen = BTreeSet::new();
            while chosen.len() < m {
                let pick = urn[rng.random_range(0..urn.len())];
                chosen.insert(pick);
            }
            for &u in &chosen {
                edges.push((u, v));
                urn.push(u);
                urn.push(v);
            }
        }
        Graph::from_edges(n, edges)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Betweenness centrality of every node (Brandes; unordered-pair
    /// convention, so each pair of endpoints contributes total weight 1).
    pub fn betweenness(&self) -> Vec<f64> {
        let n = self.n;
        let mut centrality = vec![0.0f64; n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        let mut delta = vec![0.0f64; n];
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut order: Vec<u32> = Vec::with_capacity(n);
        let mut queue: std::collections::VecDeque<u32> = Default::default();
        for s in 0..n as u32 {
            for v in 0..n {
                sigma[v] = 0.0;
                dist[v] = -1;
                delta[v] = 0.0;
                preds[v].clear();
            }
            order.clear();
            queue.clear();
            sigma[s as usize] = 1.0;
            dist[s as usize] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in &self.adj[v as usize] {
                    if dist[w as usize] < 0 {
                        dist[w as usize] = dist[v as usize] + 1;
                        queue.push_back(w);
                    }
                    if dist[w as usize] == dist[v as usize] + 1 {
                        sigma[w as usize] += sigma[v as usize];
                        preds[w as usize].push(v);
                    }
                }
            }
            for &w in order.iter().rev() {
                for &v in &preds[w as usize] {
                    delta[v as usize] += sigma[v as usize] / sigma[w as usize]
                        * (1.0 + delta[w as usize]);
                }
                if w != s {
                    centrality[w as usize] += delta[w as usize];
                }
            }
        }
        for c in &mut centrality {
            *c /= 2.0;
        }
        centrality
    }

    /// Node ids sorted by descending betweenness, ties toward lower id.
    pub fn betweenness_ranking(&self) -> Vec<u32> {
        rank_desc(&self.betweenness())
    }

    /// Node ids sorted by descending degree, ties toward lower id.
    pub fn degree_ranking(&self) -> Vec<u32> {
        rank_desc(&(0..self.n as u32).map(|v| self.degree(v) as f64).collect::<Vec<_>>())
    }
}

fn rank_desc(score: &[f64]) -> Vec<u32> {
    let mut ids: Vec<u32> = (0..score.len() as u32).collect();
    ids.sort_by(|&a, &b| {
        score[b as usize]
            .partial_cmp(&score[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    ids
}
