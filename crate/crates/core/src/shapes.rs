//! Test and CLI mesh generators: regular solids and convex hulls of random
//! points on the unit sphere.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point3, Vec3};
use crate::polytope::{PolytopeError, TriangulatedPolytope, VertexId};

pub fn tetrahedron() -> TriangulatedPolytope {
    let v = vec![
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, -1.0),
        Vec3::new(-1.0, 1.0, -1.0),
        Vec3::new(-1.0, -1.0, 1.0),
    ];
    let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    TriangulatedPolytope::new(v, f).expect("regular tetrahedron")
}

/// Vertices (±1,0,0), (0,±1,0), (0,0,±1) in that order.
pub fn octahedron() -> TriangulatedPolytope {
    let v = vec![
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 0.0, -1.0),
    ];
    let f = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    TriangulatedPolytope::new(v, f).expect("regular octahedron")
}

/// Unit cube [0,1]^3 with every square split along a diagonal.
pub fn cube() -> TriangulatedPolytope {
    let mut v = Vec::new();
    for i in 0..8u32 {
        v.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
    }
    // quads listed counter-clockwise seen from outside
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // z = 0
        [4, 5, 7, 6], // z = 1
        [0, 1, 5, 4], // y = 0
        [2, 6, 7, 3], // y = 1
        [0, 4, 6, 2], // x = 0
        [1, 3, 7, 5], // x = 1
    ];
    let mut f = Vec::new();
    for q in quads {
        f.push([q[0], q[1], q[2]]);
        f.push([q[0], q[2], q[3]]);
    }
    TriangulatedPolytope::new(v, f).expect("triangulated cube")
}

/// Uniform random points on the unit sphere.
pub fn sphere_points(n: usize, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Convex hull of `n` random unit-sphere points.
pub fn sphere_hull(n: usize, seed: u64) -> Result<TriangulatedPolytope, PolytopeError> {
    if n < 4 {
        return Err(PolytopeError::Topology(format!("sphere hull needs at least 4 points, got {n}")));
    }
    let pts = sphere_points(n, seed);
    let faces = convex_hull(&pts).ok_or_else(|| PolytopeError::Topology("points are degenerate".into()))?;
    TriangulatedPolytope::new(pts, faces)
}

/// Incremental 3D convex hull. Returns outward-oriented triangles over the
/// input indices, or `None` when the points do not span three dimensions.
/// Points strictly inside the hull are left unreferenced.
pub fn convex_hull(pts: &[Point3]) -> Option<Vec<[VertexId; 3]>> {
    let n = pts.len();
    if n < 4 {
        return None;
    }
    let scale = pts.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-12 * scale;

    // initial tetrahedron
    let a = 0usize;
    let b = (1..n).max_by(|&i, &j| pts[i].dist(pts[a]).total_cmp(&pts[j].dist(pts[a])))?;
    let line = (pts[b] - pts[a]).normalize();
    let off_line = |i: usize| {
        let d = pts[i] - pts[a];
        (d - line * line.dot(d)).norm()
    };
    let c = (0..n).max_by(|&i, &j| off_line(i).total_cmp(&off_line(j)))?;
    if off_line(c) <= eps {
        return None;
    }
    let nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]).normalize();
    let d = (0..n).max_by(|&i, &j| nrm.dot(pts[i] - pts[a]).abs().total_cmp(&nrm.dot(pts[j] - pts[a]).abs()))?;
    if nrm.dot(pts[d] - pts[a]).abs() <= eps {
        return None;
    }

    let mut faces: Vec<Option<[usize; 3]>> = Vec::new();
    let orient = |f: [usize; 3], inside: Point3| -> [usize; 3] {
        let nn = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]);
        if nn.dot(inside - pts[f[0]]) > 0.0 {
            [f[0], f[2], f[1]]
        } else {
            f
        }
    };
    let inside = (pts[a] + pts[b] + pts[c] + pts[d]) / 4.0;
    for f in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        faces.push(Some(orient(f, inside)));
    }

    let above = |f: [usize; 3], p: Point3| -> f64 {
        let nn = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]);
        let len = nn.norm();
        nn.dot(p - pts[f[0]]) / len
    };

    for i in 0..n {
        if i == a || i == b || i == c || i == d {
            continue;
        }
        let p = pts[i];
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter_map(|(k, f)| f.filter(|&f| above(f, p) > eps).map(|_| k))
            .collect();
        if visible.is_empty() {
            continue;
        }
        // horizon: directed edges of visible faces whose twin is not visible
        let mut visible_edges: HashSet<(usize, usize)> = HashSet::new();
        for &k in &visible {
            let f = faces[k].expect("live face");
            for e in 0..3 {
                visible_edges.insert((f[e], f[(e + 1) % 3]));
            }
        }
        let mut horizon = Vec::new();
        for &k in &visible {
            let f = faces[k].expect("live face");
            for e in 0..3 {
                let (u, v) = (f[e], f[(e + 1) % 3]);
                if !visible_edges.contains(&(v, u)) {
                    horizon.push((u, v));
                }
            }
        }
        for &k in &visible {
            faces[k] = None;
        }
        for (u, v) in horizon {
            faces.push(Some([u, v, i]));
        }
        if faces.len() > 8 * n + 64 {
            faces.retain(|f| f.is_some());
        }
    }
    let out: Vec<[VertexId; 3]> = faces
        .into_iter()
        .flatten()
        .map(|f| [f[0] as VertexId, f[1] as VertexId, f[2] as VertexId])
        .collect();
    Some(out)
}
