//! δ-patches, representative faces, the sketch P′ and per-patch projections.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{clip_polygon, Frame, Plane, Point2, Point3, Vec2, Vec3};
use crate::polytope::{FaceId, TriangulatedPolytope, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatchError {
    #[error("delta must lie in (0, pi], got {0}")]
    BadDelta(f64),
    #[error("sketch is unbounded: the {0} supporting planes do not span three dimensions")]
    UnboundedSketch(usize),
    #[error("sketch face {0} is empty")]
    EmptySketchFace(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct Patch {
    pub id: usize,
    /// Faces in BFS order; the first one is the representative face.
    pub faces: Vec<FaceId>,
    pub rep_face: FaceId,
    /// Supporting plane of the representative face.
    pub gamma: Plane,
    pub frame: Frame,
    /// Every vertex on some face of the patch, sorted.
    pub vertices: Vec<VertexId>,
    /// Vertices whose home patch is this one, sorted.
    pub home: Vec<VertexId>,
    /// Spread of θx and θz over the patch faces.
    pub width_x: f64,
    pub width_z: f64,
}

impl Patch {
    pub fn normal(&self) -> Vec3 {
        self.frame.normal
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchDecomposition {
    pub delta: f64,
    pub patches: Vec<Patch>,
    pub face_patch: Vec<u32>,
    /// Home patch of each vertex: the smallest patch id among its faces.
    pub home_patch: Vec<u32>,
}

impl PatchDecomposition {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Largest normal-cone width over all patches.
    pub fn max_width(&self) -> f64 {
        self.patches.iter().map(|p| p.width_x.max(p.width_z)).fold(0.0, f64::max)
    }
}

/// Angles of the outward unit normal with the +x and +z axes.
pub fn normal_angles(n: Vec3) -> (f64, f64) {
    (n.x.clamp(-1.0, 1.0).acos(), n.z.clamp(-1.0, 1.0).acos())
}

/// Grow patches by BFS over the dual graph. A face joins the current patch
/// when the θx and θz ranges of the patch stay within `delta`, which is the
/// pairwise condition checked in constant time.
pub fn compute_patches(p: &TriangulatedPolytope, delta: f64) -> Result<PatchDecomposition, PatchError> {
    if !(delta > 0.0 && delta <= std::f64::consts::PI) {
        return Err(PatchError::BadDelta(delta));
    }
    let nf = p.face_count();
    let angles: Vec<(f64, f64)> = (0..nf).map(|f| normal_angles(p.normal(f as FaceId))).collect();
    let dual = p.dual_graph();
    let limit = delta + 1e-12;
    let mut face_patch = vec![u32::MAX; nf];
    let mut patches = Vec::new();

    for seed in 0..nf {
        if face_patch[seed] != u32::MAX {
            continue;
        }
        let id = patches.len();
        let (sx, sz) = angles[seed];
        let (mut lo_x, mut hi_x, mut lo_z, mut hi_z) = (sx, sx, sz, sz);
        let mut faces = vec![seed as FaceId];
        face_patch[seed] = id as u32;
        let mut queue = VecDeque::from([seed]);
        while let Some(f) = queue.pop_front() {
            for &g in &dual.adjacency[f] {
                let g = g as usize;
                if face_patch[g] != u32::MAX {
                    continue;
                }
                let (gx, gz) = angles[g];
                if hi_x.max(gx) - lo_x.min(gx) <= limit && hi_z.max(gz) - lo_z.min(gz) <= limit {
                    lo_x = lo_x.min(gx);
                    hi_x = hi_x.max(gx);
                    lo_z = lo_z.min(gz);
                    hi_z = hi_z.max(gz);
                    face_patch[g] = id as u32;
                    faces.push(g as FaceId);
                    queue.push_back(g);
                }
            }
        }
        let rep = seed as FaceId;
        let pts = p.face_points(rep);
        let normal = p.normal(rep);
        let gamma = Plane::new(pts[0], pts[1] - pts[0], pts[2] - pts[0]).expect("validated face");
        let frame = Frame::new(pts[0], pts[1], normal);
        let mut vertices: Vec<VertexId> = faces.iter().flat_map(|&f| p.face(f)).collect();
        vertices.sort_unstable();
        vertices.dedup();
        patches.push(Patch {
            id,
            faces,
            rep_face: rep,
            gamma,
            frame,
            vertices,
            home: Vec::new(),
            width_x: hi_x - lo_x,
            width_z: hi_z - lo_z,
        });
    }

    let mut home_patch = vec![u32::MAX; p.vertex_count()];
    for (f, tri) in p.faces().iter().enumerate() {
        for &v in tri {
            let h = &mut home_patch[v as usize];
            *h = (*h).min(face_patch[f]);
        }
    }
    for (v, &h) in home_patch.iter().enumerate() {
        patches[h as usize].home.push(v as VertexId);
    }
    Ok(PatchDecomposition { delta, patches, face_patch, home_patch })
}

/// Outward half-space `normal · x <= offset`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

impl HalfSpace {
    pub fn excess(&self, x: Point3) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// One corner of a sketch face; the edge from this corner to the next one
/// lies on the plane of patch `label` (or on the artificial bounding square
/// when `None`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SketchCorner {
    pub point: Point2,
    pub label: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SketchFace {
    pub patch: usize,
    /// Counter-clockwise polygon in the patch frame.
    pub corners: Vec<SketchCorner>,
}

impl SketchFace {
    pub fn edge(&self, k: usize) -> (Point2, Point2, Option<u32>) {
        let a = self.corners[k];
        let b = self.corners[(k + 1) % self.corners.len()];
        (a.point, b.point, a.label)
    }

    pub fn is_bounded(&self) -> bool {
        self.corners.iter().all(|c| c.label.is_some())
    }

    pub fn area(&self) -> f64 {
        let pts: Vec<Point2> = self.corners.iter().map(|c| c.point).collect();
        crate::geometry::polygon_area(&pts)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sketch {
    pub halfspaces: Vec<HalfSpace>,
    pub faces: Vec<SketchFace>,
}

impl Sketch {
    /// Largest violation of any half-space by `x` (non-positive when inside).
    pub fn excess(&self, x: Point3) -> f64 {
        self.halfspaces.iter().map(|h| h.excess(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: Point3, snap: f64) -> bool {
        self.excess(x) <= snap
    }
}

/// Intersect the supporting half-spaces of all representative faces and
/// record, per patch, the face of the result lying on its plane.
pub fn build_sketch(p: &TriangulatedPolytope, dec: &PatchDecomposition) -> Result<Sketch, PatchError> {
    let halfspaces: Vec<HalfSpace> = dec
        .patches
        .iter()
        .map(|pa| HalfSpace { normal: pa.normal(), offset: pa.normal().dot(pa.frame.origin) })
        .collect();
    let diam = p.diameter().max(1e-300);
    let tol = p.tolerance();
    let big = 100.0 * diam + 1.0;
    let snap = tol.snap(diam);

    let faces: Vec<Result<SketchFace, PatchError>> = dec
        .patches
        .par_iter()
        .map(|pa| {
            let fr = &pa.frame;
            let mut poly: Vec<(Point2, Option<u32>)> = vec![
                (Vec2::new(-big, -big), None),
                (Vec2::new(big, -big), None),
                (Vec2::new(big, big), None),
                (Vec2::new(-big, big), None),
            ];
            for (j, h) in halfspaces.iter().enumerate() {
                if j == pa.id {
                    continue;
                }
                let n2 = Vec2::new(h.normal.dot(fr.e1), h.normal.dot(fr.e2));
                let c = h.normal.dot(fr.origin) - h.offset;
                if n2.norm() <= 1e-12 {
                    // parallel plane: either coincident, or strictly outside for a valid input
                    continue;
                }
                poly = clip_polygon(&poly, n2, c, Some(j as u32), snap);
                if poly.is_empty() {
                    return Err(PatchError::EmptySketchFace(pa.id));
                }
            }
            Ok(SketchFace {
                patch: pa.id,
                corners: poly.into_iter().map(|(point, label)| SketchCorner { point, label }).collect(),
            })
        })
        .collect();
    let faces = faces.into_iter().collect::<Result<Vec<_>, _>>()?;
    // Faces that keep an artificial edge stay clipped by the square; this
    // happens when mirrored faces share (θx, θz) and merge, as on the octahedron.
    if dec.patches.len() >= 4 && normal_rank(&halfspaces) < 3 {
        return Err(PatchError::UnboundedSketch(dec.patches.len()));
    }
    Ok(Sketch { halfspaces, faces })
}

fn normal_rank(hs: &[HalfSpace]) -> usize {
    let Some(a) = hs.first().map(|h| h.normal) else { return 0 };
    let Some(ab) = hs.iter().map(|h| a.cross(h.normal)).max_by(|x, y| x.norm().total_cmp(&y.norm())) else { return 1 };
    if ab.norm() < 1e-9 {
        return 1;
    }
    let vol = hs.iter().map(|h| ab.dot(h.normal).abs()).fold(0.0, f64::max);
    if vol < 1e-9 {
        2
    } else {
        3
    }
}

/// Orthogonal projection of the vertices of one patch onto its plane.
#[derive(Debug, Clone, Serialize)]
pub struct Projection {
    pub patch: usize,
    /// (vertex, local coordinates), sorted by vertex.
    pub points: Vec<(VertexId, Point2)>,
}

impl Projection {
    pub fn get(&self, v: VertexId) -> Option<Point2> {
        self.points.binary_search_by_key(&v, |e| e.0).ok().map(|i| self.points[i].1)
    }
}

pub fn project_patch(p: &TriangulatedPolytope, patch: &Patch) -> Projection {
    let points = patch.vertices.iter().map(|&v| (v, patch.frame.to_local(p.vertex(v)))).collect();
    Projection { patch: patch.id, points }
}

pub fn project_all(p: &TriangulatedPolytope, dec: &PatchDecomposition) -> Vec<Projection> {
    dec.patches.par_iter().map(|pa| project_patch(p, pa)).collect()
}
