//! Landmark-based compact routing over G′ with stretch at most 3.
//!
//! Every node knows next hops toward all landmarks and toward the nodes of
//! its cluster C(u) = {v : v is settled before its home landmark in a
//! Dijkstra from v}. Landmarks additionally know next hops to every node.
//! Forwarding at u toward v:
//! 1. v in C(u): follow the cluster entry;
//! 2. u is the home landmark of v: follow the full map;
//! 3. otherwise head for the home landmark of v.
//!
//! Once a packet enters rule 1 or 2 every later node is in rule 1, so walks
//! are loop free and have length at most d(u, ℓ(v)) + d(ℓ(v), v) ≤ 3·d(u, v).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use std::collections::HashMap;

use crate::geometry::{Plane, Point3, Vec3};
use crate::graph::{WeightedGraph, NO_PARENT};
use crate::patching::PatchDecomposition;
use crate::spanner::{NodeKind, SpannerGraph};
use crate::tables::PseudoDest;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no route from {from} to {to}")]
    NoRoute { from: u32, to: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LandmarkSelection {
    /// The ⌈√N⌉ nodes of largest degree, ties by node id.
    Degree,
    /// ⌈√N⌉ nodes sampled with the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct LandmarkScheme {
    pub n: usize,
    /// Landmark node ids, sorted.
    pub landmarks: Vec<u32>,
    /// Index into `landmarks` for landmark nodes.
    pub landmark_index: Vec<Option<u32>>,
    /// Home landmark of every node (a node id).
    pub home: Vec<u32>,
    pub home_dist: Vec<f64>,
    /// For each node u: (v, next hop from u toward v) for v in C(u), sorted by v.
    pub cluster: Vec<Vec<(u32, u32)>>,
    /// For each node u and landmark index k: next hop from u toward landmark k.
    pub to_landmark: Vec<Vec<u32>>,
    /// For each landmark index k: next hop from the landmark toward every node.
    pub full: Vec<Vec<u32>>,
}

pub fn select_landmarks(g: &WeightedGraph, how: LandmarkSelection) -> Vec<u32> {
    let n = g.node_count();
    let count = (n as f64).sqrt().ceil() as usize;
    let mut ids: Vec<u32> = (0..n as u32).collect();
    match how {
        LandmarkSelection::Degree => ids.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b))),
        LandmarkSelection::Random(seed) => ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
    ids.truncate(count.min(n));
    ids.sort_unstable();
    ids
}

/// Build the scheme. Fails on disconnected graphs.
pub fn tz_preprocess(g: &WeightedGraph, how: LandmarkSelection) -> Result<LandmarkScheme, RoutingError> {
    let n = g.node_count();
    if n > 0 && !g.is_connected() {
        return Err(RoutingError::Disconnected);
    }
    let landmarks = select_landmarks(g, how);
    let mut landmark_index = vec![None; n];
    for (k, &l) in landmarks.iter().enumerate() {
        landmark_index[l as usize] = Some(k as u32);
    }

    // per destination v: Dijkstra from v until the first landmark is settled
    struct Local {
        home: u32,
        dist: f64,
        /// (u, next hop from u toward v) for every u settled before the landmark
        members: Vec<(u32, u32)>,
        /// next hop from the home landmark toward v
        landmark_hop: u32,
    }
    let locals: Vec<Local> = (0..n as u32)
        .into_par_iter()
        .map(|v| {
            let sp = g.dijkstra_until(v, |u| landmark_index[u as usize].is_some());
            let home = *sp.order.last().expect("source settled");
            let members = sp.order[..sp.order.len() - 1]
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| (u, sp.parent[u as usize]))
                .collect();
            Local { home, dist: sp.dist[home as usize], members, landmark_hop: sp.parent[home as usize] }
        })
        .collect();

    let mut cluster = vec![Vec::new(); n];
    for (v, loc) in locals.iter().enumerate() {
        for &(u, hop) in &loc.members {
            cluster[u as usize].push((v as u32, hop));
        }
    }
    for c in &mut cluster {
        c.sort_unstable();
    }

    let trees: Vec<(Vec<u32>, Vec<u32>)> = landmarks
        .par_iter()
        .map(|&l| {
            let sp = g.dijkstra(l);
            // first hop from l toward each node
            let mut first = vec![NO_PARENT; n];
            for &u in &sp.order {
                if u == l {
                    continue;
                }
                let p = sp.parent[u as usize];
                first[u as usize] = if p == l { u } else { first[p as usize] };
            }
            (sp.parent, first)
        })
        .collect();

    let mut to_landmark = vec![vec![NO_PARENT; landmarks.len()]; n];
    let mut full = Vec::with_capacity(landmarks.len());
    for (k, (parent, first)) in trees.into_iter().enumerate() {
        let l = landmarks[k];
        for u in 0..n {
            to_landmark[u][k] = if u as u32 == l { l } else { parent[u] };
        }
        let mut f = first;
        f[l as usize] = l;
        for (v, loc) in locals.iter().enumerate() {
            if loc.home == l && v as u32 != l {
                f[v] = loc.landmark_hop;
            }
        }
        full.push(f);
    }

    Ok(LandmarkScheme {
        n,
        home: locals.iter().map(|l| l.home).collect(),
        home_dist: locals.iter().map(|l| l.dist).collect(),
        landmarks,
        landmark_index,
        cluster,
        to_landmark,
        full,
    })
}

impl LandmarkScheme {
    pub fn is_landmark(&self, u: u32) -> bool {
        self.landmark_index[u as usize].is_some()
    }

    pub fn in_cluster(&self, u: u32, v: u32) -> Option<u32> {
        let c = &self.cluster[u as usize];
        c.binary_search_by_key(&v, |e| e.0).ok().map(|i| c[i].1)
    }

    pub fn toward_landmark(&self, u: u32, l: u32) -> u32 {
        let k = self.landmark_index[l as usize].expect("landmark") as usize;
        self.to_landmark[u as usize][k]
    }

    /// Memoryless next hop from `u` toward `v`.
    pub fn next_hop(&self, u: u32, v: u32) -> Option<u32> {
        if u == v {
            return None;
        }
        if let Some(h) = self.in_cluster(u, v) {
            return Some(h);
        }
        let l = self.home[v as usize];
        if u == l {
            let k = self.landmark_index[l as usize].expect("landmark") as usize;
            return Some(self.full[k][v as usize]);
        }
        Some(self.toward_landmark(u, l))
    }

    /// Node sequence of the scheme's walk from `u` to `v`.
    pub fn walk(&self, u: u32, v: u32) -> Result<Vec<u32>, RoutingError> {
        let mut path = vec![u];
        let mut cur = u;
        while cur != v {
            let next = self.next_hop(cur, v).filter(|&h| h != NO_PARENT).ok_or(RoutingError::NoRoute { from: u, to: v })?;
            path.push(next);
            cur = next;
            if path.len() > 2 * self.n + 2 {
                return Err(RoutingError::NoRoute { from: u, to: v });
            }
        }
        Ok(path)
    }

    /// Walk that stops as soon as `direct(node)` holds, as happens when the
    /// current node shares a sketch face with the destination.
    pub fn walk_until(&self, u: u32, v: u32, mut direct: impl FnMut(u32) -> bool) -> Result<Vec<u32>, RoutingError> {
        let mut path = vec![u];
        let mut cur = u;
        while cur != v && !direct(cur) {
            let next = self.next_hop(cur, v).filter(|&h| h != NO_PARENT).ok_or(RoutingError::NoRoute { from: u, to: v })?;
            path.push(next);
            cur = next;
            if path.len() > 2 * self.n + 2 {
                return Err(RoutingError::NoRoute { from: u, to: v });
            }
        }
        Ok(path)
    }

    /// Total number of stored next-hop entries.
    pub fn entry_count(&self) -> usize {
        self.cluster.iter().map(Vec::len).sum::<usize>()
            + self.n * self.landmarks.len()
            + self.full.iter().map(Vec::len).sum::<usize>()
    }
}

/// Drop cluster and full-map entries whose two nodes share a sketch face;
/// those destinations are served by direct plane entries. Returns the
/// number of entries removed.
pub fn prune_intra_face(scheme: &mut LandmarkScheme, g: &SpannerGraph) -> usize {
    let mut removed = 0;
    for (u, c) in scheme.cluster.iter_mut().enumerate() {
        let before = c.len();
        c.retain(|&(v, _)| g.common_face(u as u32, v).is_none());
        removed += before - c.len();
    }
    for (k, f) in scheme.full.iter_mut().enumerate() {
        let l = scheme.landmarks[k];
        for (v, hop) in f.iter_mut().enumerate() {
            if v as u32 != l && *hop != NO_PARENT && g.common_face(l, v as u32).is_some() {
                *hop = NO_PARENT;
                removed += 1;
            }
        }
    }
    removed
}

/// Destination of a materialized entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NodeDest {
    /// A representative vertex.
    Rep(u32),
    /// A landmark, by node id.
    Landmark(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneEntry {
    pub dest: NodeDest,
    /// True for same-face entries that bypass the scheme.
    pub direct: bool,
    /// Sketch face the plane is orthogonal to.
    pub face: u32,
    pub plane: Plane,
    pub next: PseudoDest,
}

/// Pseudo-destination standing for a spanner node.
pub fn pseudo_of(g: &SpannerGraph, w: u32) -> PseudoDest {
    match g.nodes[w as usize].kind {
        NodeKind::Rep(v) => PseudoDest::Vertex(v),
        NodeKind::Steiner { marked: (x, y), .. } => PseudoDest::Relay { node: w, x, y },
    }
}

/// Plane orthogonal to sketch face `face` through the lifts of `u` and `w`.
pub fn hop_plane(dec: &PatchDecomposition, g: &SpannerGraph, u: u32, w: u32, face: u32) -> Plane {
    let (nu, nw) = (&g.nodes[u as usize], &g.nodes[w as usize]);
    let fr = &dec.patches[face as usize].frame;
    plane_through(nu.lift, nw.lift, fr.normal, || match (nu.local_on(face), nw.local_on(face)) {
        (Some(a), Some(b)) => fr.to_world(b) - fr.to_world(a),
        _ => fr.e1,
    }, fr.e1)
}

/// Plane through `a` and `b` containing `normal`; when `a` and `b` are too
/// close, the direction comes from `fallback`, and failing that `last`.
pub fn plane_through(a: Point3, b: Point3, normal: Vec3, fallback: impl FnOnce() -> Vec3, last: Vec3) -> Plane {
    Plane::new(a, b - a, normal)
        .or_else(|_| Plane::new(a, fallback(), normal))
        .or_else(|_| Plane::new(a, last, normal))
        .expect("frame axis is orthogonal to the normal")
}

/// Turn the pruned scheme into plane entries for every node of G′. Only
/// representatives and landmarks appear as destinations.
pub fn materialize_plane_entries(scheme: &LandmarkScheme, dec: &PatchDecomposition, g: &SpannerGraph) -> Vec<Vec<PlaneEntry>> {
    let mut edge_face: HashMap<(u32, u32), u32> = HashMap::new();
    for e in &g.edges {
        edge_face.entry((e.a.min(e.b), e.a.max(e.b))).or_insert(e.face);
    }
    let is_rep = |v: u32| matches!(g.nodes[v as usize].kind, NodeKind::Rep(_));
    let rep_dest = |v: u32| NodeDest::Rep(g.nodes[v as usize].rep_vertex().expect("rep node"));
    (0..scheme.n as u32)
        .into_par_iter()
        .map(|u| {
            let mut out = Vec::new();
            let via = |dest: NodeDest, hop: u32| {
                let face = edge_face[&(u.min(hop), u.max(hop))];
                PlaneEntry { dest, direct: false, face, plane: hop_plane(dec, g, u, hop, face), next: pseudo_of(g, hop) }
            };
            let direct = |dest: NodeDest, w: u32, face: u32| PlaneEntry {
                dest,
                direct: true,
                face,
                plane: hop_plane(dec, g, u, w, face),
                next: pseudo_of(g, w),
            };
            let node = &g.nodes[u as usize];
            for &f in &node.faces {
                for &w in &g.face_nodes[f as usize] {
                    if w != u && is_rep(w) {
                        out.push(direct(rep_dest(w), w, f));
                    }
                }
            }
            for &(v, hop) in &scheme.cluster[u as usize] {
                if is_rep(v) {
                    out.push(via(rep_dest(v), hop));
                }
            }
            if let Some(k) = scheme.landmark_index[u as usize] {
                for (v, &hop) in scheme.full[k as usize].iter().enumerate() {
                    let v = v as u32;
                    if v != u && hop != NO_PARENT && is_rep(v) && scheme.in_cluster(u, v).is_none() {
                        out.push(via(rep_dest(v), hop));
                    }
                }
            }
            for (k, &l) in scheme.landmarks.iter().enumerate() {
                if l == u {
                    continue;
                }
                match g.common_face(u, l) {
                    Some(f) => out.push(direct(NodeDest::Landmark(l), l, f)),
                    None => out.push(via(NodeDest::Landmark(l), scheme.to_landmark[u as usize][k])),
                }
            }
            out
        })
        .collect()
}

pub fn path_length(g: &WeightedGraph, path: &[u32]) -> f64 {
    path.windows(2).map(|w| g.weight(w[0], w[1]).expect("walk follows edges")).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn check_stretch(g: &WeightedGraph, s: &LandmarkScheme) -> f64 {
        let mut worst: f64 = 1.0;
        for u in 0..g.node_count() as u32 {
            let sp = g.dijkstra(u);
            for v in 0..g.node_count() as u32 {
                if u == v {
                    continue;
                }
                let w = s.walk(u, v).unwrap();
                let r = path_length(g, &w) / sp.dist[v as usize];
                assert!(r <= 3.0 + 1e-9, "stretch {r} from {u} to {v}");
                worst = worst.max(r);
            }
        }
        worst
    }

    #[test]
    fn single_node() {
        let g = WeightedGraph::new(1);
        let s = tz_preprocess(&g, LandmarkSelection::Degree).unwrap();
        assert_eq!(s.landmarks, vec![0]);
        assert!(s.cluster[0].is_empty());
        assert_eq!(s.walk(0, 0).unwrap(), vec![0]);
    }

    #[test]
    fn path_graph() {
        let mut g = WeightedGraph::new(9);
        for i in 0..8 {
            g.add_edge(i, i + 1, 1.0 + (i % 3) as f64);
        }
        let s = tz_preprocess(&g, LandmarkSelection::Degree).unwrap();
        assert_eq!(s.landmarks.len(), 3);
        check_stretch(&g, &s);
    }

    #[test]
    fn star_is_exact() {
        let mut g = WeightedGraph::new(10);
        for i in 1..10 {
            g.add_edge(0, i, i as f64);
        }
        let s = tz_preprocess(&g, LandmarkSelection::Degree).unwrap();
        assert!(s.is_landmark(0));
        assert!((check_stretch(&g, &s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..5 {
            let n = 60;
            let mut g = WeightedGraph::new(n);
            for i in 1..n as u32 {
                let j = rng.gen_range(0..i);
                g.add_edge(i, j, rng.gen_range(0.1..2.0));
            }
            for _ in 0..80 {
                let a = rng.gen_range(0..n as u32);
                let b = rng.gen_range(0..n as u32);
                if a != b {
                    g.add_edge(a, b, rng.gen_range(0.1..2.0));
                }
            }
            let how = if trial % 2 == 0 { LandmarkSelection::Degree } else { LandmarkSelection::Random(trial) };
            let s = tz_preprocess(&g, how).unwrap();
            assert_eq!(s.landmarks.len(), 8);
            check_stretch(&g, &s);
            // cluster members never include landmarks
            for c in &s.cluster {
                for &(v, _) in c {
                    assert!(!s.is_landmark(v) || s.home[v as usize] != v);
                }
            }
            for u in 0..n as u32 {
                for &(v, h) in &s.cluster[u as usize] {
                    assert!(g.weight(u, h).is_some(), "hop toward {v} is a neighbour");
                }
            }
        }
    }

    #[test]
    fn disconnected_rejected() {
        let mut g = WeightedGraph::new(3);
        g.add_edge(0, 1, 1.0);
        assert_eq!(tz_preprocess(&g, LandmarkSelection::Degree).unwrap_err(), RoutingError::Disconnected);
    }
}
