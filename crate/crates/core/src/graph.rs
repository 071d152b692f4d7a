//! Weighted undirected graphs and Dijkstra with deterministic tie-breaking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    pub adj: Vec<Vec<(u32, f64)>>,
}

/// Min-heap entry ordered by (distance, node).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HeapItem {
    pub dist: f64,
    pub node: u32,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.total_cmp(&self.dist).then_with(|| o.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

pub const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pub parent: Vec<u32>,
    /// Nodes in the order they were settled.
    pub order: Vec<u32>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn add_edge(&mut self, a: u32, b: u32, w: f64) {
        self.adj[a as usize].push((b, w));
        self.adj[b as usize].push((a, w));
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn weight(&self, a: u32, b: u32) -> Option<f64> {
        self.adj[a as usize].iter().filter(|e| e.0 == b).map(|e| e.1).reduce(f64::min)
    }

    pub fn dijkstra(&self, src: u32) -> ShortestPaths {
        self.dijkstra_until(src, |_| false)
    }

    /// Dijkstra that stops right after settling a node for which `stop` holds.
    pub fn dijkstra_until(&self, src: u32, mut stop: impl FnMut(u32) -> bool) -> ShortestPaths {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![NO_PARENT; n];
        let mut done = vec![false; n];
        let mut order = Vec::new();
        let mut heap = BinaryHeap::new();
        dist[src as usize] = 0.0;
        heap.push(HeapItem { dist: 0.0, node: src });
        while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
            if done[u as usize] {
                continue;
            }
            done[u as usize] = true;
            order.push(u);
            if stop(u) {
                break;
            }
            for &(v, w) in &self.adj[u as usize] {
                let nd = d + w;
                let cur = dist[v as usize];
                if !done[v as usize] && (nd < cur || (nd == cur && u < parent[v as usize])) {
                    dist[v as usize] = nd;
                    parent[v as usize] = u;
                    heap.push(HeapItem { dist: nd, node: v });
                }
            }
        }
        ShortestPaths { dist, parent, order }
    }

    pub fn components(&self) -> Vec<u32> {
        let n = self.adj.len();
        let mut comp = vec![u32::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s as u32];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adj[u as usize] {
                    if comp[v as usize] == u32::MAX {
                        comp[v as usize] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}
