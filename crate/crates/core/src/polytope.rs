//! The input polytope: OFF ingest, validation (closed, oriented, convex,
//! triangulated) and the adjacency indices used by every later phase.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{corner_angle, is_degenerate, triangle_area, Point3, Tolerance, Vec3};

pub type VertexId = u32;
pub type FaceId = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("face {face} has {count} vertices; only triangles are supported")]
    NonTriangular { face: usize, count: usize },
    #[error("edge ({a},{b}) bounds {count} faces; the surface is not a closed 2-manifold")]
    NotClosed { a: VertexId, b: VertexId, count: usize },
    #[error("faces are not consistently oriented around edge ({a},{b})")]
    InconsistentOrientation { a: VertexId, b: VertexId },
    #[error("vertex {vertex} lies {distance:.3e} outside the plane of face {face}")]
    NonConvex { face: FaceId, vertex: VertexId, distance: f64 },
    #[error("face {0} is degenerate")]
    DegenerateFace(FaceId),
    #[error("invalid topology: {0}")]
    Topology(String),
}

/// A validated, outward-oriented triangulated convex polytope.
#[derive(Debug, Clone)]
pub struct TriangulatedPolytope {
    vertices: Vec<Point3>,
    faces: Vec<[VertexId; 3]>,
    normals: Vec<Vec3>,
    /// sorted vertex pair -> (face containing a->b, face containing b->a) with a < b
    edge_faces: HashMap<(VertexId, VertexId), [FaceId; 2]>,
    edges: Vec<(VertexId, VertexId)>,
    /// incident faces of each vertex in counter-clockwise order (seen from outside)
    fans: Vec<Vec<FaceId>>,
    /// neighbours aligned with `fans`: fan face k is (v, nbrs[k], nbrs[k+1])
    neighbours: Vec<Vec<VertexId>>,
    tol: Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolytopeMetrics {
    /// Half the minimum corner angle over all faces.
    pub theta_m: f64,
    /// Half the minimum 3D angle between two edges sharing a vertex.
    pub theta_m_vertex: f64,
    pub mesh_diameter: f64,
    pub surface_area: f64,
    pub n: usize,
}

/// Face adjacency (one node per face, three neighbours each).
#[derive(Debug, Clone)]
pub struct DualGraph {
    pub adjacency: Vec<[FaceId; 3]>,
}

impl DualGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        if self.adjacency.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.adjacency.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(f) = stack.pop() {
            for &g in &self.adjacency[f] {
                if !seen[g as usize] {
                    seen[g as usize] = true;
                    count += 1;
                    stack.push(g as usize);
                }
            }
        }
        count == self.adjacency.len()
    }
}

fn sorted(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriangulatedPolytope {
    /// Build and validate from raw vertex and face arrays.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[VertexId; 3]>) -> Result<Self, PolytopeError> {
        let n = vertices.len();
        if n < 4 || faces.len() < 4 {
            return Err(PolytopeError::Topology(format!("need at least 4 vertices and 4 faces, got {n} and {}", faces.len())));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(PolytopeError::Parse(format!("vertex {i} has non-finite coordinates")));
        }
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v as usize >= n) {
                return Err(PolytopeError::Parse(format!("face {fi} references a missing vertex")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(PolytopeError::DegenerateFace(fi as FaceId));
            }
        }
        let diameter = diameter_of(&vertices);
        let tol = Tolerance::for_diameter(diameter);
        let mut faces = faces;

        // directed edge -> face; each directed edge must appear once
        let mut directed: HashMap<(VertexId, VertexId), FaceId> = HashMap::with_capacity(faces.len() * 3);
        let mut undirected: HashMap<(VertexId, VertexId), usize> = HashMap::with_capacity(faces.len() * 3 / 2);
        for f in faces.iter() {
            for k in 0..3 {
                *undirected.entry(sorted(f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut bad: Vec<_> = undirected.iter().filter(|(_, &c)| c != 2).collect();
        bad.sort();
        if let Some((&(a, b), &count)) = bad.first() {
            return Err(PolytopeError::NotClosed { a, b, count });
        }
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if directed.insert(e, fi as FaceId).is_some() {
                    return Err(PolytopeError::InconsistentOrientation { a: e.0, b: e.1 });
                }
            }
        }
        let mut used = vec![false; n];
        for f in &faces {
            for &v in f {
                used[v as usize] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(PolytopeError::Topology(format!("vertex {v} is not referenced by any face")));
        }
        let euler = n as i64 - undirected.len() as i64 + faces.len() as i64;
        if euler != 2 {
            return Err(PolytopeError::Topology(format!("Euler characteristic is {euler}, expected 2")));
        }

        // orientation: signed volume about the centroid must be positive
        let centroid = vertices.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / n as f64;
        let volume: f64 = faces
            .iter()
            .map(|f| {
                let a = vertices[f[0] as usize] - centroid;
                let b = vertices[f[1] as usize] - centroid;
                let c = vertices[f[2] as usize] - centroid;
                a.dot(b.cross(c))
            })
            .sum();
        if volume < 0.0 {
            for f in faces.iter_mut() {
                f.swap(1, 2);
            }
            directed = directed.into_iter().map(|((a, b), f)| ((b, a), f)).collect();
        }

        let mut normals = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let tri = [vertices[f[0] as usize], vertices[f[1] as usize], vertices[f[2] as usize]];
            if is_degenerate(&tri, tol) {
                return Err(PolytopeError::DegenerateFace(fi as FaceId));
            }
            normals.push((tri[1] - tri[0]).cross(tri[2] - tri[0]).normalize());
        }

        // convexity: every vertex on the inner closed side of every face plane
        let snap = tol.snap(diameter);
        for (fi, f) in faces.iter().enumerate() {
            let a = vertices[f[0] as usize];
            let nrm = normals[fi];
            for (vi, &p) in vertices.iter().enumerate() {
                let d = nrm.dot(p - a);
                if d > snap {
                    return Err(PolytopeError::NonConvex { face: fi as FaceId, vertex: vi as VertexId, distance: d });
                }
            }
        }

        let mut edge_faces = HashMap::with_capacity(undirected.len());
        for (&(a, b), &f) in &directed {
            if a < b {
                let g = directed[&(b, a)];
                edge_faces.insert((a, b), [f, g]);
            }
        }
        let mut edges: Vec<_> = edge_faces.keys().copied().collect();
        edges.sort_unstable();

        // cyclic fans
        let mut first_face: Vec<Option<FaceId>> = vec![None; n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                first_face[v as usize].get_or_insert(fi as FaceId);
            }
        }
        let mut fans = Vec::with_capacity(n);
        let mut neighbours = Vec::with_capacity(n);
        for v in 0..n as VertexId {
            let start = first_face[v as usize].expect("checked above");
            let mut fan = Vec::new();
            let mut nbrs = Vec::new();
            let mut cur = start;
            loop {
                let f = faces[cur as usize];
                let k = f.iter().position(|&x| x == v).expect("fan face contains vertex");
                let a = f[(k + 1) % 3];
                let b = f[(k + 2) % 3];
                fan.push(cur);
                nbrs.push(a);
                // next face holds the twin edge v -> b
                cur = directed[&(v, b)];
                if cur == start {
                    break;
                }
                if fan.len() > faces.len() {
                    return Err(PolytopeError::Topology(format!("vertex {v} has a non-manifold fan")));
                }
            }
            let incident = faces.iter().filter(|f| f.contains(&v)).count();
            if incident != fan.len() {
                return Err(PolytopeError::Topology(format!("vertex {v} is non-manifold")));
            }
            fans.push(fan);
            neighbours.push(nbrs);
        }

        Ok(Self { vertices, faces, normals, edge_faces, edges, fans, neighbours, tol })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> Point3 {
        self.vertices[v as usize]
    }

    pub fn faces(&self) -> &[[VertexId; 3]] {
        &self.faces
    }

    pub fn face(&self, f: FaceId) -> [VertexId; 3] {
        self.faces[f as usize]
    }

    pub fn face_points(&self, f: FaceId) -> [Point3; 3] {
        let [a, b, c] = self.faces[f as usize];
        [self.vertex(a), self.vertex(b), self.vertex(c)]
    }

    /// Outward unit normal.
    pub fn normal(&self, f: FaceId) -> Vec3 {
        self.normals[f as usize]
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// The two faces sharing edge `ab`, in either vertex order.
    pub fn edge_faces(&self, a: VertexId, b: VertexId) -> Option<[FaceId; 2]> {
        self.edge_faces.get(&sorted(a, b)).copied()
    }

    /// The face in which `a -> b` is a counter-clockwise boundary edge.
    pub fn directed_face(&self, a: VertexId, b: VertexId) -> Option<FaceId> {
        let [ab, ba] = self.edge_faces(a, b)?;
        Some(if a < b { ab } else { ba })
    }

    pub fn is_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_faces.contains_key(&sorted(a, b))
    }

    /// The face across edge `ab` from face `f`.
    pub fn opposite_face(&self, f: FaceId, a: VertexId, b: VertexId) -> Option<FaceId> {
        let [g, h] = self.edge_faces(a, b)?;
        if g == f {
            Some(h)
        } else if h == f {
            Some(g)
        } else {
            None
        }
    }

    /// Incident faces of `v` in CCW order.
    pub fn fan(&self, v: VertexId) -> &[FaceId] {
        &self.fans[v as usize]
    }

    /// Neighbours of `v` aligned with [`Self::fan`].
    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.neighbours[v as usize]
    }

    /// For face `f` incident to `v`: the two other vertices (a, b) such that
    /// (v, a, b) is counter-clockwise.
    pub fn others(&self, f: FaceId, v: VertexId) -> (VertexId, VertexId) {
        let t = self.faces[f as usize];
        let k = t.iter().position(|&x| x == v).expect("vertex on face");
        (t[(k + 1) % 3], t[(k + 2) % 3])
    }

    pub fn third_vertex(&self, f: FaceId, a: VertexId, b: VertexId) -> VertexId {
        *self.faces[f as usize].iter().find(|&&x| x != a && x != b).expect("triangle")
    }

    pub fn edge_length(&self, a: VertexId, b: VertexId) -> f64 {
        self.vertex(a).dist(self.vertex(b))
    }

    pub fn dual_graph(&self) -> DualGraph {
        let adjacency = self
            .faces
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let mut out = [0; 3];
                for k in 0..3 {
                    out[k] = self.opposite_face(fi as FaceId, f[k], f[(k + 1) % 3]).expect("closed surface");
                }
                out
            })
            .collect();
        DualGraph { adjacency }
    }

    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| triangle_area(self.vertex(f[0]), self.vertex(f[1]), self.vertex(f[2])))
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        diameter_of(&self.vertices)
    }

    pub fn metrics(&self) -> PolytopeMetrics {
        let mut min_corner = f64::INFINITY;
        for fi in 0..self.faces.len() {
            let pts = self.face_points(fi as FaceId);
            for k in 0..3 {
                let a = corner_angle(&pts, k, self.tol).expect("validated non-degenerate");
                min_corner = min_corner.min(a);
            }
        }
        let mut min_pair = f64::INFINITY;
        for v in 0..self.vertices.len() as VertexId {
            let p = self.vertex(v);
            let dirs: Vec<Vec3> = self.neighbours(v).iter().map(|&w| (self.vertex(w) - p).normalize()).collect();
            for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    let a = dirs[i].cross(dirs[j]).norm().atan2(dirs[i].dot(dirs[j]));
                    min_pair = min_pair.min(a);
                }
            }
        }
        PolytopeMetrics {
            theta_m: 0.5 * min_corner,
            theta_m_vertex: 0.5 * min_pair,
            mesh_diameter: self.diameter(),
            surface_area: self.surface_area(),
            n: self.vertices.len(),
        }
    }

    pub fn to_off(&self) -> String {
        write_off(&self.vertices, &self.faces)
    }
}

/// Convenience wrapper over [`TriangulatedPolytope::metrics`].
pub fn compute_theta_m(p: &TriangulatedPolytope) -> PolytopeMetrics {
    p.metrics()
}

pub fn dual_graph(p: &TriangulatedPolytope) -> DualGraph {
    p.dual_graph()
}

fn diameter_of(vertices: &[Point3]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            best = best.max(vertices[i].dist(vertices[j]));
        }
    }
    best
}

pub fn write_off(vertices: &[Point3], faces: &[[VertexId; 3]]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{} {} 0", vertices.len(), faces.len());
    for v in vertices {
        let _ = writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in faces {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    s
}

/// Parse an ASCII OFF stream and validate it as a triangulated convex polytope.
pub fn load_off(bytes: &[u8]) -> Result<TriangulatedPolytope, PolytopeError> {
    let text = std::str::from_utf8(bytes).map_err(|e| PolytopeError::Parse(format!("not UTF-8: {e}")))?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace());

    let header = tokens.next().ok_or_else(|| PolytopeError::Parse("empty input".into()))?;
    if header != "OFF" {
        return Err(PolytopeError::Parse(format!("expected OFF header, found {header:?}")));
    }
    let mut next_usize = |what: &str| -> Result<usize, PolytopeError> {
        let t = tokens.next().ok_or_else(|| PolytopeError::Parse(format!("unexpected end of input reading {what}")))?;
        t.parse::<usize>().map_err(|_| PolytopeError::Parse(format!("bad {what}: {t:?}")))
    };
    let nv = next_usize("vertex count")?;
    let nf = next_usize("face count")?;
    let _ne = next_usize("edge count")?;
    drop(next_usize);

    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut c = [0.0; 3];
        for slot in c.iter_mut() {
            let t = tokens.next().ok_or_else(|| PolytopeError::Parse(format!("truncated vertex {i}")))?;
            *slot = t.parse::<f64>().map_err(|_| PolytopeError::Parse(format!("bad coordinate {t:?} on vertex {i}")))?;
        }
        vertices.push(Vec3::new(c[0], c[1], c[2]));
    }
    let mut faces = Vec::with_capacity(nf);
    for i in 0..nf {
        let t = tokens.next().ok_or_else(|| PolytopeError::Parse(format!("truncated face {i}")))?;
        let count: usize = t.parse().map_err(|_| PolytopeError::Parse(format!("bad face size {t:?}")))?;
        let mut idx = Vec::with_capacity(count);
        for _ in 0..count {
            let t = tokens.next().ok_or_else(|| PolytopeError::Parse(format!("truncated face {i}")))?;
            let v: u32 = t.parse().map_err(|_| PolytopeError::Parse(format!("bad vertex index {t:?} in face {i}")))?;
            idx.push(v);
        }
        if count != 3 {
            return Err(PolytopeError::NonTriangular { face: i, count });
        }
        faces.push([idx[0], idx[1], idx[2]]);
    }
    TriangulatedPolytope::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use std::f64::consts::PI;

    const TETRA_OFF: &str = "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn loads_tetrahedron() {
        let p = load_off(TETRA_OFF.as_bytes()).unwrap();
        assert_eq!(p.vertex_count(), 4);
        assert_eq!(p.face_count(), 4);
        assert_eq!(p.edge_count(), 6);
    }

    #[test]
    fn inward_orientation_is_repaired() {
        let flipped = "OFF\n4 4 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
        let p = load_off(flipped.as_bytes()).unwrap();
        for f in 0..4 {
            let c = p.face_points(f).iter().fold(Vec3::ZERO, |a, &b| a + b) / 3.0;
            assert!(p.normal(f).dot(c) > 0.0);
        }
    }

    #[test]
    fn quad_cube_is_non_triangular() {
        let off = "OFF\n8 6 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n\
                   4 0 3 2 1\n4 4 5 6 7\n4 0 1 5 4\n4 1 2 6 5\n4 2 3 7 6\n4 3 0 4 7\n";
        assert!(matches!(load_off(off.as_bytes()), Err(PolytopeError::NonTriangular { face: 0, count: 4 })));
    }

    #[test]
    fn dented_bipyramid_is_non_convex() {
        // Four points are always in convex position, so the dent is made on a
        // triangular bipyramid: the lower apex is reflected through the base
        // plane z = 0 to (0,0,0.2). The lower faces then have upward-tilted
        // normals and the upper apex (z = 1) lies strictly outside them.
        let verts = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-0.5, 0.866, 0.0),
            Vec3::new(-0.5, -0.866, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, 0.2),
        ];
        let faces = vec![[0, 1, 3], [1, 2, 3], [2, 0, 3], [1, 0, 4], [2, 1, 4], [0, 2, 4]];
        let err = TriangulatedPolytope::new(verts, faces).unwrap_err();
        assert!(matches!(err, PolytopeError::NonConvex { .. }), "{err:?}");
    }

    #[test]
    fn open_surface_is_rejected() {
        let off = "OFF\n4 3 0\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n";
        let err = load_off(off.as_bytes()).unwrap_err();
        assert!(matches!(err, PolytopeError::NotClosed { .. } | PolytopeError::Topology(_)), "{err:?}");
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(matches!(load_off(b"PLY\n"), Err(PolytopeError::Parse(_))));
        assert!(matches!(load_off(b"OFF\n4 4 0\n1 2"), Err(PolytopeError::Parse(_))));
    }

    #[test]
    fn dual_graphs_have_expected_counts() {
        for (p, nodes, edges) in [
            (shapes::tetrahedron(), 4, 6),
            (shapes::octahedron(), 8, 12),
            (shapes::cube(), 12, 18),
        ] {
            let g = p.dual_graph();
            assert_eq!(g.node_count(), nodes);
            assert_eq!(g.edge_count(), edges);
            assert!(g.is_connected());
            assert!(g.adjacency.iter().all(|a| a.len() == 3 && a.iter().all(|&x| (x as usize) < nodes)));
        }
    }

    #[test]
    fn theta_m_examples() {
        let t = shapes::tetrahedron().metrics();
        assert!((t.theta_m - PI / 6.0).abs() < 1e-12);
        assert!((t.theta_m.sin() - 0.5).abs() < 1e-12);
        let c = shapes::cube().metrics();
        assert!((c.theta_m - PI / 8.0).abs() < 1e-12);
        let o = shapes::octahedron().metrics();
        assert!((o.theta_m - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn fans_are_cyclic_and_consistent() {
        let p = shapes::sphere_hull(60, 3).unwrap();
        for v in 0..p.vertex_count() as VertexId {
            let fan = p.fan(v);
            let nb = p.neighbours(v);
            assert_eq!(fan.len(), nb.len());
            for k in 0..fan.len() {
                let (a, b) = p.others(fan[k], v);
                assert_eq!(a, nb[k]);
                assert_eq!(b, nb[(k + 1) % nb.len()]);
            }
        }
        assert_eq!(p.vertex_count() as i64 - p.edge_count() as i64 + p.face_count() as i64, 2);
    }

    #[test]
    fn off_round_trip() {
        let p = shapes::sphere_hull(30, 1).unwrap();
        let q = load_off(p.to_off().as_bytes()).unwrap();
        assert_eq!(p.vertices(), q.vertices());
        assert_eq!(p.faces(), q.faces());
    }
}
