//! Brute-force distance oracles for checking route lengths.
//!
//! The subdivision oracle puts m points on every mesh edge and joins every
//! pair of points on a common face. The points on an edge sit at parameters
//! {k/m : 1 ≤ k < m} ∪ {1/(2m)}, so the point set for m is contained in the
//! one for 4m and distances never increase along m = 1, 4, 16, 64.

use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::Point3;
use crate::polytope::{FaceId, TriangulatedPolytope, VertexId};
use crate::router::Router;

/// Shortest path length along mesh edges, for every vertex from `s`.
pub fn edge_distances(p: &TriangulatedPolytope, s: VertexId) -> Vec<f64> {
    let mut g = crate::graph::WeightedGraph::new(p.vertex_count());
    for &(a, b) in p.edges() {
        g.add_edge(a, b, p.edge_length(a, b));
    }
    g.dijkstra(s).dist
}

pub fn edge_dijkstra(p: &TriangulatedPolytope, s: VertexId, t: VertexId) -> f64 {
    edge_distances(p, s)[t as usize]
}

/// Edge parameters of the subdivision points for a given m.
pub fn subdivision_params(m: usize) -> Vec<f64> {
    if m == 0 {
        return Vec::new();
    }
    let mut ts: Vec<f64> = (1..m).map(|k| k as f64 / m as f64).collect();
    ts.push(0.5 / m as f64);
    ts.sort_by(f64::total_cmp);
    ts
}

/// Vertices plus m points per edge; nodes on a common face are all joined.
#[derive(Debug, Clone)]
pub struct SubdivisionGraph {
    pub m: usize,
    pub positions: Vec<Point3>,
    /// Nodes on each face.
    pub face_nodes: Vec<Vec<u32>>,
    /// Faces each node lies on.
    pub node_faces: Vec<Vec<FaceId>>,
    n_vertices: usize,
}

#[derive(Clone, Copy, PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl SubdivisionGraph {
    pub fn new(p: &TriangulatedPolytope, m: usize) -> Self {
        let nv = p.vertex_count();
        let ts = subdivision_params(m);
        let mut positions: Vec<Point3> = p.vertices().to_vec();
        let mut node_faces: Vec<Vec<FaceId>> = (0..nv as VertexId).map(|v| p.fan(v).to_vec()).collect();
        let mut face_nodes: Vec<Vec<u32>> = p.faces().iter().map(|f| f.to_vec()).collect();
        for &(a, b) in p.edges() {
            let faces = p.edge_faces(a, b).expect("mesh edge");
            for &t in &ts {
                let id = positions.len() as u32;
                positions.push(p.vertex(a).lerp(p.vertex(b), t));
                node_faces.push(faces.to_vec());
                for &f in &faces {
                    face_nodes[f as usize].push(id);
                }
            }
        }
        Self { m, positions, face_nodes, node_faces, n_vertices: nv }
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    /// Distances from vertex `s` to every vertex; stops once all `targets`
    /// are settled (all vertices when `targets` is empty).
    pub fn distances_from(&self, s: VertexId, targets: &[VertexId]) -> Vec<f64> {
        let n = self.positions.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut want = vec![targets.is_empty(); self.n_vertices];
        for &t in targets {
            want[t as usize] = true;
        }
        let mut left = want.iter().filter(|&&w| w).count();
        let mut heap = BinaryHeap::new();
        dist[s as usize] = 0.0;
        heap.push(Item(0.0, s));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u as usize] {
                continue;
            }
            done[u as usize] = true;
            if (u as usize) < self.n_vertices && want[u as usize] {
                left -= 1;
                if left == 0 {
                    break;
                }
            }
            let pu = self.positions[u as usize];
            for &f in &self.node_faces[u as usize] {
                for &w in &self.face_nodes[f as usize] {
                    if done[w as usize] {
                        continue;
                    }
                    let nd = d + pu.dist(self.positions[w as usize]);
                    if nd < dist[w as usize] {
                        dist[w as usize] = nd;
                        heap.push(Item(nd, w));
                    }
                }
            }
        }
        dist.truncate(self.n_vertices);
        dist
    }

    pub fn distance(&self, s: VertexId, t: VertexId) -> f64 {
        self.distances_from(s, &[t])[t as usize]
    }
}

pub fn subdivided_geodesic(p: &TriangulatedPolytope, s: VertexId, t: VertexId, m: usize) -> f64 {
    SubdivisionGraph::new(p, m).distance(s, t)
}

/// Distances for many pairs, one Dijkstra per distinct source.
pub fn pair_distances(g: &SubdivisionGraph, pairs: &[(VertexId, VertexId)]) -> Vec<f64> {
    let mut by_source: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &(s, t) in pairs {
        by_source.entry(s).or_default().push(t);
    }
    let mut sources: Vec<_> = by_source.into_iter().collect();
    sources.sort_unstable_by_key(|e| e.0);
    let found: HashMap<(VertexId, VertexId), f64> = sources
        .par_iter()
        .flat_map_iter(|(s, ts)| {
            let d = g.distances_from(*s, ts);
            ts.iter().map(move |&t| ((*s, t), d[t as usize])).collect::<Vec<_>>()
        })
        .collect();
    pairs.iter().map(|pr| found[pr]).collect()
}

/// `k` random pairs of distinct vertices.
pub fn sample_pairs(n: usize, k: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    while out.len() < k && n > 1 {
        let s = rng.gen_range(0..n as VertexId);
        let t = rng.gen_range(0..n as VertexId);
        if s != t {
            out.push((s, t));
        }
    }
    out
}

/// Stand-in for the largest cell diagonal when ∂P is cut into 1/ε³ cells of
/// equal area: the diagonal of a square of that area, inflated by 1 + 2ε.
pub fn estimate_d(p: &TriangulatedPolytope, eps: f64) -> f64 {
    (2.0 * p.surface_area() * eps.powi(3)).sqrt() * (1.0 + 2.0 * eps)
}

/// Relative gap between two refinements: max over pairs of (coarse − fine) / fine.
pub fn oracle_slack(coarse: &SubdivisionGraph, fine: &SubdivisionGraph, pairs: &[(VertexId, VertexId)]) -> f64 {
    let a = pair_distances(coarse, pairs);
    let b = pair_distances(fine, pairs);
    a.iter().zip(&b).filter(|(_, &f)| f > 0.0).map(|(&c, &f)| (c - f) / f).fold(0.0, f64::max)
}

/// Upper bound on a route length: (8 + ε)/sin θ_m · (D̂ + d̂) · (1 + μ).
pub fn stretch_bound(eps: f64, theta_m: f64, d_hat: f64, geodesic: f64, mu: f64) -> f64 {
    (8.0 + eps) / theta_m.sin() * (d_hat + geodesic) * (1.0 + mu)
}

#[derive(Debug, Clone, Serialize)]
pub struct StretchRow {
    pub pair_id: usize,
    pub s: VertexId,
    pub t: VertexId,
    /// NaN when routing failed.
    pub route_len: f64,
    pub oracle_len: f64,
    pub euclid: f64,
    pub bound: f64,
    pub ratio: f64,
    pub error: Option<String>,
}

impl StretchRow {
    pub fn violates(&self) -> bool {
        self.error.is_some() || !(self.route_len <= self.bound)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StretchReport {
    pub rows: Vec<StretchRow>,
    pub d_hat: f64,
    pub mu: f64,
    pub theta_m: f64,
    pub eps: f64,
    pub m: usize,
}

impl StretchReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violates()).count()
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).fold(0.0, f64::max)
    }

    pub fn mean_ratio(&self) -> f64 {
        let rs: Vec<f64> = self.rows.iter().map(|r| r.ratio).filter(|r| r.is_finite()).collect();
        if rs.is_empty() {
            0.0
        } else {
            rs.iter().sum::<f64>() / rs.len() as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("pair_id,s,t,route_len,oracle_len,euclid,bound,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{:.9},{:.9},{:.9},{:.9},{:.9}", r.pair_id, r.s, r.t, r.route_len, r.oracle_len, r.euclid, r.bound, r.ratio);
        }
        s
    }
}

/// Route every pair and compare with the subdivision oracle.
pub fn stretch_sweep(
    router: &Router,
    oracle: &SubdivisionGraph,
    pairs: &[(VertexId, VertexId)],
    eps: f64,
    theta_m: f64,
    d_hat: f64,
    mu: f64,
) -> StretchReport {
    let p = router.p;
    let geo = pair_distances(oracle, pairs);
    let rows = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(s, t))| {
            let euclid = p.vertex(s).dist(p.vertex(t));
            let bound = stretch_bound(eps, theta_m, d_hat, geo[i], mu);
            let (route_len, error) = if s == t {
                (0.0, None)
            } else {
                match router.route(s, t) {
                    Ok(tr) => (tr.length, None),
                    Err(e) => (f64::NAN, Some(e.to_string())),
                }
            };
            let ratio = if geo[i] > 0.0 { route_len / geo[i] } else { 1.0 };
            StretchRow { pair_id: i, s, t, route_len, oracle_len: geo[i], euclid, bound, ratio, error }
        })
        .collect();
    StretchReport { rows, d_hat, mu, theta_m, eps, m: oracle.m }
}
