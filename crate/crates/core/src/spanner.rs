//! The spanner G′: Θ-graphs on every sketch face over representative
//! projections and Steiner nodes placed on sketch-face boundaries.

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    clip_polygon, closest_on_segment, closest_on_segment_2d, closest_on_triangle, polygon_area, ray_triangle, Point2,
    Point3, RigidMap, Vec2,
};
use crate::graph::WeightedGraph;
use crate::patching::{PatchDecomposition, Sketch};
use crate::polytope::{FaceId, TriangulatedPolytope, VertexId};
use crate::sampling::RepresentativeAssignment;

pub type NodeId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpannerError {
    #[error("spanner has {0} connected components; try a smaller epsilon")]
    DisconnectedSpanner(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
}

/// Number of Θ-graph cones for a given ε.
pub fn cone_count(eps: f64) -> usize {
    (TAU / eps - 1e-9).ceil().max(3.0) as usize
}

/// Cone of direction `d`; directions on a bounding ray go to the lower
/// index, and the ray at angle 0 belongs to cone 0.
pub fn cone_index(d: Vec2, k: usize) -> usize {
    let mut a = d.angle();
    if a < 0.0 {
        a += TAU;
    }
    let theta = TAU / k as f64;
    let x = a / theta;
    let r = x.round();
    if (x - r).abs() <= 1e-12 * k as f64 {
        let r = r as usize;
        return if r == 0 || r == k { 0 } else { r - 1 };
    }
    (x.ceil() as usize).clamp(1, k) - 1
}

fn cone_rays(c: usize, k: usize) -> (Vec2, Vec2) {
    let theta = TAU / k as f64;
    (Vec2::from_angle(c as f64 * theta), Vec2::from_angle((c + 1) as f64 * theta))
}

/// Strict membership of `q` in the open cone `c` at `apex`.
pub fn in_open_cone(apex: Point2, q: Point2, c: usize, k: usize, snap: f64) -> bool {
    let d = q - apex;
    let len = d.norm();
    if len <= snap {
        return false;
    }
    let (u0, u1) = cone_rays(c, k);
    u0.cross(d) > snap && d.cross(u1) > snap
}

/// Θ-graph edges: for each node and each nonempty cone, one edge to the
/// node whose projection on the cone bisector is nearest (ties by index).
pub fn build_theta_graph(points: &[Point2], k: usize, snap: f64) -> Vec<(usize, usize)> {
    let theta = TAU / k as f64;
    let bis: Vec<Vec2> = (0..k).map(|c| Vec2::from_angle((c as f64 + 0.5) * theta)).collect();
    let mut out = HashSet::new();
    for (i, &p) in points.iter().enumerate() {
        let mut best: Vec<Option<(f64, usize)>> = vec![None; k];
        for (j, &q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = q - p;
            let c = if d.norm() <= snap { 0 } else { cone_index(d, k) };
            let proj = d.dot(bis[c]);
            let better = match best[c] {
                None => true,
                Some((bp, bj)) => proj < bp || (proj == bp && j < bj),
            };
            if better {
                best[c] = Some((proj, j));
            }
        }
        for (_, j) in best.into_iter().flatten() {
            out.insert((i.min(j), i.max(j)));
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.sort_unstable();
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NodeKind {
    Rep(VertexId),
    Steiner {
        /// Position on the shared sketch edge.
        point: Point3,
        /// Marked edge of P carrying the lift (x == y when it snapped to a vertex).
        marked: (VertexId, VertexId),
        /// Added only to reconnect the spanner.
        bridge: bool,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct SpannerNode {
    pub kind: NodeKind,
    /// One sketch face for representatives, two for Steiner nodes.
    pub faces: Vec<u32>,
    /// Local coordinates on each face in `faces`.
    pub local: Vec<Point2>,
    /// Point of P standing in for this node.
    pub lift: Point3,
}

impl SpannerNode {
    pub fn local_on(&self, face: u32) -> Option<Point2> {
        self.faces.iter().position(|&f| f == face).map(|i| self.local[i])
    }

    pub fn on_face(&self, face: u32) -> bool {
        self.faces.contains(&face)
    }

    pub fn rep_vertex(&self) -> Option<VertexId> {
        match self.kind {
            NodeKind::Rep(v) => Some(v),
            NodeKind::Steiner { .. } => None,
        }
    }

    pub fn marked(&self) -> Option<(VertexId, VertexId)> {
        match self.kind {
            NodeKind::Rep(_) => None,
            NodeKind::Steiner { marked, .. } => Some(marked),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpannerEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub weight: f64,
    /// Sketch face the edge lies on.
    pub face: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpannerGraph {
    pub eps: f64,
    pub cones: usize,
    pub nodes: Vec<SpannerNode>,
    pub edges: Vec<SpannerEdge>,
    /// Nodes lying on each sketch face.
    pub face_nodes: Vec<Vec<NodeId>>,
    /// Θ-graph edges produced on each sketch face.
    pub face_edges: Vec<Vec<u32>>,
    /// Spanner node of each representative vertex.
    pub rep_node: HashMap<VertexId, NodeId>,
    pub bridges: usize,
}

impl SpannerGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn steiner_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Steiner { .. })).count()
    }

    pub fn to_graph(&self) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.nodes.len());
        for e in &self.edges {
            g.add_edge(e.a, e.b, e.weight);
        }
        g
    }

    /// Subgraph G_i′ of one face, over global node ids.
    pub fn face_graph(&self, face: u32) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.nodes.len());
        for &e in &self.face_edges[face as usize] {
            let e = self.edges[e as usize];
            g.add_edge(e.a, e.b, e.weight);
        }
        g
    }

    /// The edge between two nodes, if any.
    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<&SpannerEdge> {
        self.edges.iter().find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
    }

    /// Two sketch faces share a node pair when both lie on one face.
    pub fn common_face(&self, a: NodeId, b: NodeId) -> Option<u32> {
        let na = &self.nodes[a as usize];
        let nb = &self.nodes[b as usize];
        na.faces.iter().copied().find(|f| nb.on_face(*f))
    }

    /// Plain-text dump: `node id kind x y z` then `edge a b weight face`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let kind = match n.kind {
                NodeKind::Rep(v) => format!("rep:{v}"),
                NodeKind::Steiner { marked, .. } => format!("steiner:{}-{}", marked.0, marked.1),
            };
            let _ = writeln!(s, "node {i} {kind} {:?} {:?} {:?}", n.lift.x, n.lift.y, n.lift.z);
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} {:?} {}", e.a, e.b, e.weight, e.face);
        }
        s
    }
}

/// Per-face geometry used while tracing extended cones.
struct FaceGeom {
    corners3: Vec<Point3>,
    centroid: Point3,
    /// (neighbour face, shared edge endpoints)
    nbrs: Vec<(u32, Point3, Point3)>,
}

fn face_geometry(dec: &PatchDecomposition, sketch: &Sketch) -> Vec<FaceGeom> {
    sketch
        .faces
        .iter()
        .map(|sf| {
            let fr = &dec.patches[sf.patch].frame;
            let corners3: Vec<Point3> = sf.corners.iter().map(|c| fr.to_world(c.point)).collect();
            let centroid = corners3.iter().fold(Point3::ZERO, |a, &b| a + b) / corners3.len().max(1) as f64;
            let nbrs = (0..sf.corners.len())
                .filter_map(|k| {
                    let (_, _, l) = sf.edge(k);
                    l.map(|l| (l, corners3[k], corners3[(k + 1) % corners3.len()]))
                })
                .collect();
            FaceGeom { corners3, centroid, nbrs }
        })
        .collect()
}

struct Ctx<'a> {
    dec: &'a PatchDecomposition,
    sketch: &'a Sketch,
    asg: &'a RepresentativeAssignment,
    geom: Vec<FaceGeom>,
    k: usize,
    snap: f64,
    area_snap: f64,
}

impl Ctx<'_> {
    /// Does the extended cone `c` at `apex` on face `i` reach a
    /// representative projection of another face?
    fn extended_cone_hits(&self, i: usize, apex: Point2, c: usize) -> bool {
        let fr_i = &self.dec.patches[i].frame;
        let (u0, u1) = cone_rays(c, self.k);
        let n1 = Vec2::new(u0.y, -u0.x);
        let n2 = Vec2::new(-u1.y, u1.x);
        let mut seen = vec![false; self.geom.len()];
        seen[i] = true;
        let mut queue = VecDeque::new();
        for &(l, a, b) in &self.geom[i].nbrs {
            if !seen[l as usize] {
                seen[l as usize] = true;
                if let Some(m) = RigidMap::unfold(a, b, self.geom[i].centroid, self.geom[l as usize].centroid) {
                    queue.push_back((l as usize, m));
                }
            }
        }
        while let Some((j, map)) = queue.pop_front() {
            let poly: Vec<(Point2, ())> =
                self.geom[j].corners3.iter().map(|&x| (fr_i.to_local(map.apply(x)), ())).collect();
            let clipped = clip_polygon(&poly, n1, -n1.dot(apex), (), self.snap);
            let clipped = clip_polygon(&clipped, n2, -n2.dot(apex), (), self.snap);
            let pts: Vec<Point2> = clipped.iter().map(|e| e.0).collect();
            if pts.len() < 3 || polygon_area(&pts).abs() <= self.area_snap {
                continue;
            }
            let fr_j = &self.dec.patches[j].frame;
            for &r in &self.asg.patch_reps[j] {
                let q = fr_i.to_local(map.apply(fr_j.to_world(self.asg.point_of[r as usize])));
                if in_open_cone(apex, q, c, self.k, self.snap) {
                    return true;
                }
            }
            for &(l, a, b) in &self.geom[j].nbrs {
                if !seen[l as usize] {
                    seen[l as usize] = true;
                    if let Some(m) = RigidMap::unfold(a, b, self.geom[j].centroid, self.geom[l as usize].centroid) {
                        queue.push_back((l as usize, map.compose(&m)));
                    }
                }
            }
        }
        false
    }

    /// Closest point to `apex` on the labelled boundary of face `i` inside the
    /// closed cone `c`, skipping edges through the apex itself.
    fn boundary_point(&self, i: usize, apex: Point2, c: usize) -> Option<(Point2, u32)> {
        let sf = &self.sketch.faces[i];
        let (u0, u1) = cone_rays(c, self.k);
        let mut best: Option<(f64, Point2, u32)> = None;
        for k in 0..sf.corners.len() {
            let (a, b, label) = sf.edge(k);
            let Some(label) = label else { continue };
            if closest_on_segment_2d(a, b, apex).0.dist(apex) <= self.snap {
                continue;
            }
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            // f0(t) = u0 × (x(t) - apex) >= -snap, f1(t) = (x(t) - apex) × u1 >= -snap
            let fa = [u0.cross(a - apex), (a - apex).cross(u1)];
            let fb = [u0.cross(b - apex), (b - apex).cross(u1)];
            let mut empty = false;
            for m in 0..2 {
                let (f0, f1) = (fa[m] + self.snap, fb[m] + self.snap);
                if f0 < 0.0 && f1 < 0.0 {
                    empty = true;
                    break;
                }
                if f0 < 0.0 {
                    lo = lo.max(f0 / (f0 - f1));
                } else if f1 < 0.0 {
                    hi = hi.min(f0 / (f0 - f1));
                }
            }
            if empty || lo > hi {
                continue;
            }
            let (x, _) = closest_on_segment_2d(a + (b - a) * lo, a + (b - a) * hi, apex);
            let d = x.dist(apex);
            if d <= self.snap {
                continue;
            }
            if best.map_or(true, |(bd, _, _)| d < bd) {
                best = Some((d, x, label));
            }
        }
        best.map(|(_, x, l)| (x, l))
    }
}

struct RawSteiner {
    faces: [u32; 2],
    point: Point3,
    bridge: bool,
}

/// Candidate Steiner points of one face, in (rep, cone) order.
fn face_steiner(ctx: &Ctx, i: usize) -> Vec<RawSteiner> {
    let fr = &ctx.dec.patches[i].frame;
    let reps = &ctx.asg.patch_reps[i];
    let mut out = Vec::new();
    for &r in reps {
        let apex = ctx.asg.point_of[r as usize];
        for c in 0..ctx.k {
            let occupied = reps
                .iter()
                .any(|&o| o != r && in_open_cone(apex, ctx.asg.point_of[o as usize], c, ctx.k, ctx.snap));
            if occupied || !ctx.extended_cone_hits(i, apex, c) {
                continue;
            }
            if let Some((x, j)) = ctx.boundary_point(i, apex, c) {
                out.push(RawSteiner { faces: [i as u32, j], point: fr.to_world(x), bridge: false });
            }
        }
    }
    out
}

/// Steiner points for every face, deduplicated, in a deterministic order.
pub fn place_steiner_points(
    p: &TriangulatedPolytope,
    dec: &PatchDecomposition,
    sketch: &Sketch,
    asg: &RepresentativeAssignment,
    eps: f64,
) -> Vec<(u32, u32, Point3)> {
    let ctx = make_ctx(p, dec, sketch, asg, eps);
    collect_steiner(&ctx).into_iter().map(|s| (s.faces[0], s.faces[1], s.point)).collect()
}

fn make_ctx<'a>(
    p: &TriangulatedPolytope,
    dec: &'a PatchDecomposition,
    sketch: &'a Sketch,
    asg: &'a RepresentativeAssignment,
    eps: f64,
) -> Ctx<'a> {
    let diam = p.diameter();
    let snap = p.tolerance().snap(diam);
    Ctx { dec, sketch, asg, geom: face_geometry(dec, sketch), k: cone_count(eps), snap, area_snap: 1e-12 * diam * diam }
}

fn collect_steiner(ctx: &Ctx) -> Vec<RawSteiner> {
    let per_face: Vec<Vec<RawSteiner>> = (0..ctx.sketch.faces.len()).into_par_iter().map(|i| face_steiner(ctx, i)).collect();
    let mut out: Vec<RawSteiner> = Vec::new();
    let mut by_pair: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    let dedup = 10.0 * ctx.snap;
    for s in per_face.into_iter().flatten() {
        let key = (s.faces[0].min(s.faces[1]), s.faces[0].max(s.faces[1]));
        let slot = by_pair.entry(key).or_default();
        if slot.iter().any(|&k| out[k].point.dist(s.point) <= dedup) {
            continue;
        }
        slot.push(out.len());
        out.push(RawSteiner { faces: [key.0, key.1], ..s });
    }
    out
}

/// Lift a point of P′ onto an edge of P: cast a ray along `-normal` into P,
/// then snap the hit to the nearest edge of the hit face.
pub fn lift_to_edge(p: &TriangulatedPolytope, x: Point3, normal: crate::geometry::Vec3) -> (Point3, (VertexId, VertexId)) {
    let dir = -normal;
    let snap = p.tolerance().snap(p.diameter());
    let mut hit: Option<(f64, FaceId)> = None;
    for f in 0..p.face_count() as FaceId {
        let tri = p.face_points(f);
        if p.normal(f).dot(dir) >= 0.0 {
            continue;
        }
        if let Some(t) = ray_triangle(x, dir, &tri, 1e-9) {
            if t >= -snap && hit.map_or(true, |(bt, _)| t < bt) {
                hit = Some((t, f));
            }
        }
    }
    let (point, face) = match hit {
        Some((t, f)) => (x + dir * t, f),
        None => (0..p.face_count() as FaceId)
            .map(|f| (closest_on_triangle(&p.face_points(f), x), f))
            .min_by(|a, b| a.0.dist(x).total_cmp(&b.0.dist(x)))
            .expect("nonempty polytope"),
    };
    let tri = p.face(face);
    let mut best: Option<(f64, Point3, f64, VertexId, VertexId)> = None;
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let (q, u) = closest_on_segment(p.vertex(a), p.vertex(b), point);
        let d = q.dist(point);
        if best.map_or(true, |bb| d < bb.0) {
            best = Some((d, q, u, a, b));
        }
    }
    let (_, q, u, a, b) = best.expect("triangle");
    let len = p.edge_length(a, b);
    if u * len <= snap {
        (p.vertex(a), (a, a))
    } else if (1.0 - u) * len <= snap {
        (p.vertex(b), (b, b))
    } else {
        (q, (a.min(b), a.max(b)))
    }
}

/// Build G′ end to end: Steiner placement, lifting, per-face Θ-graphs and
/// bridging of disconnected components.
pub fn build_spanner(
    p: &TriangulatedPolytope,
    dec: &PatchDecomposition,
    sketch: &Sketch,
    asg: &RepresentativeAssignment,
    eps: f64,
) -> Result<SpannerGraph, SpannerError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SpannerError::BadEpsilon(eps));
    }
    let ctx = make_ctx(p, dec, sketch, asg, eps);
    let mut nodes: Vec<SpannerNode> = Vec::new();
    let mut rep_node = HashMap::new();
    for &r in &asg.reps {
        rep_node.insert(r, nodes.len() as NodeId);
        nodes.push(SpannerNode {
            kind: NodeKind::Rep(r),
            faces: vec![asg.patch_of(r) as u32],
            local: vec![asg.point_of[r as usize]],
            lift: p.vertex(r),
        });
    }
    let raw = collect_steiner(&ctx);
    let lifted: Vec<SpannerNode> = raw.par_iter().map(|s| steiner_node(p, dec, s)).collect();
    nodes.extend(lifted);

    let nf = sketch.faces.len();
    let mut bridged: HashSet<(u32, u32)> = HashSet::new();
    let mut bridges = 0;
    let mut allow_empty = false;
    loop {
        let (edges, face_nodes, face_edges) = theta_edges(&nodes, nf, ctx.k, ctx.snap);
        let mut g = WeightedGraph::new(nodes.len());
        for e in &edges {
            g.add_edge(e.a, e.b, e.weight);
        }
        let comp = g.components();
        let ncomp = comp.iter().copied().max().map_or(0, |m| m as usize + 1);
        if ncomp <= 1 {
            return Ok(SpannerGraph { eps, cones: ctx.k, nodes, edges, face_nodes, face_edges, rep_node, bridges });
        }
        // union-find over node components and empty faces
        let mut parent: Vec<usize> = (0..ncomp + nf).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let nx = parent[y];
                parent[y] = r;
                y = nx;
            }
            r
        }
        let face_comp = |f: usize| face_nodes[f].first().map(|&n| comp[n as usize] as usize);
        let mut added = Vec::new();
        for i in 0..nf {
            for (j, a, b) in ctx.geom[i].nbrs.iter().map(|&(j, a, b)| (j as usize, a, b)) {
                if j <= i || bridged.contains(&(i as u32, j as u32)) {
                    continue;
                }
                let (ci, cj) = (face_comp(i), face_comp(j));
                if !allow_empty && (ci.is_none() || cj.is_none()) {
                    continue;
                }
                let ri = find(&mut parent, ci.unwrap_or(ncomp + i));
                let rj = find(&mut parent, cj.unwrap_or(ncomp + j));
                if ri == rj {
                    continue;
                }
                parent[ri] = rj;
                bridged.insert((i as u32, j as u32));
                added.push(RawSteiner { faces: [i as u32, j as u32], point: (a + b) * 0.5, bridge: true });
            }
        }
        if added.is_empty() {
            if allow_empty {
                return Err(SpannerError::DisconnectedSpanner(ncomp));
            }
            allow_empty = true;
            continue;
        }
        bridges += added.len();
        for s in &added {
            nodes.push(steiner_node(p, dec, s));
        }
    }
}

fn steiner_node(p: &TriangulatedPolytope, dec: &PatchDecomposition, s: &RawSteiner) -> SpannerNode {
    let [i, j] = s.faces;
    let lower = i.min(j) as usize;
    let (lift, marked) = lift_to_edge(p, s.point, dec.patches[lower].normal());
    SpannerNode {
        kind: NodeKind::Steiner { point: s.point, marked, bridge: s.bridge },
        faces: vec![i, j],
        local: vec![dec.patches[i as usize].frame.to_local(s.point), dec.patches[j as usize].frame.to_local(s.point)],
        lift,
    }
}

#[allow(clippy::type_complexity)]
fn theta_edges(nodes: &[SpannerNode], nf: usize, k: usize, snap: f64) -> (Vec<SpannerEdge>, Vec<Vec<NodeId>>, Vec<Vec<u32>>) {
    let mut face_nodes = vec![Vec::new(); nf];
    for (id, n) in nodes.iter().enumerate() {
        for &f in &n.faces {
            face_nodes[f as usize].push(id as NodeId);
        }
    }
    let per_face: Vec<Vec<(NodeId, NodeId, f64)>> = face_nodes
        .par_iter()
        .enumerate()
        .map(|(f, ids)| {
            let pts: Vec<Point2> = ids.iter().map(|&n| nodes[n as usize].local_on(f as u32).expect("node on face")).collect();
            build_theta_graph(&pts, k, snap)
                .into_iter()
                .map(|(a, b)| (ids[a], ids[b], pts[a].dist(pts[b])))
                .collect()
        })
        .collect();
    let mut edges = Vec::new();
    let mut index: HashMap<(NodeId, NodeId), u32> = HashMap::new();
    let mut face_edges = vec![Vec::new(); nf];
    for (f, list) in per_face.into_iter().enumerate() {
        for (a, b, w) in list {
            let key = (a.min(b), a.max(b));
            let id = *index.entry(key).or_insert_with(|| {
                edges.push(SpannerEdge { a: key.0, b: key.1, weight: w, face: f as u32 });
                (edges.len() - 1) as u32
            });
            face_edges[f].push(id);
        }
    }
    (edges, face_nodes, face_edges)
}
