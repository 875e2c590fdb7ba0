use std::fmt;

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseEdgeSet {
    adj: Vec<Vec<u32>>,
    m: usize,
}

impl SparseEdgeSet {
    pub fn empty(n: usize) -> Self {
        SparseEdgeSet {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds from an edge list; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for n = {n}");
            if u != v {
                adj[u].push(v as u32);
                adj[v].push(u as u32);
            }
        }
        Self::from_adjacency(adj)
    }

    /// Builds from per-vertex forward lists (`u -> v` with `v > u`).
    pub(crate) fn from_forward_rows(n: usize, rows: Vec<Vec<u32>>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, row) in rows.into_iter().enumerate() {
            for v in row {
                adj[u].push(v);
                adj[v as usize].push(u as u32);
            }
        }
        Self::from_adjacency(adj)
    }

    fn from_adjacency(mut adj: Vec<Vec<u32>>) -> Self {
        let mut twice = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        SparseEdgeSet { adj, m: twice / 2 }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|u| (0..n as u32).filter(|&v| v as usize != u).collect())
            .collect();
        SparseEdgeSet {
            adj,
            m: n * n.saturating_sub(1) / 2,
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.adj[u]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    #[inline]
    pub fn contains(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&(b as u32)).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let start = list.partition_point(|&v| (v as usize) <= u);
            list[start..].iter().map(move |&v| (u, v as usize))
        })
    }

    pub fn edge_vec(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }

    /// Removes every listed edge; unknown edges are ignored.
    pub fn remove_all(&mut self, removed: &[(usize, usize)]) {
        for &(u, v) in removed {
            let mut hit = false;
            if let Ok(i) = self.adj[u].binary_search(&(v as u32)) {
                self.adj[u].remove(i);
                hit = true;
            }
            if let Ok(i) = self.adj[v].binary_search(&(u as u32)) {
                self.adj[v].remove(i);
            }
            if hit {
                self.m -= 1;
            }
        }
    }

    pub fn is_subset_of(&self, other: &SparseEdgeSet) -> bool {
        self.n() == other.n() && self.edges().all(|(u, v)| other.contains(u, v))
    }
}

impl fmt::Debug for SparseEdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseEdgeSet")
            .field("n", &self.n())
            .field("m", &self.m)
            .finish()
    }
}
