//! Tolerance-aware 3D/2D primitives: vectors, planes, local frames,
//! segment/plane intersection, corner angles and rigid unfolding.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("segment endpoints coincide within tolerance")]
    DegenerateSegment,
    #[error("face is degenerate (zero area within tolerance)")]
    DegenerateFace,
    #[error("plane direction vectors are parallel")]
    DegeneratePlane,
    #[error("faces do not share exactly one edge")]
    NotAdjacent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub type Point3 = Vec3;

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or `None` when the norm is below `min_norm`.
    pub fn try_normalize(self, min_norm: f64) -> Option<Vec3> {
        let n = self.norm();
        if n > min_norm && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn normalize(self) -> Vec3 {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Vec3, u: f64) -> Vec3 {
        self + (o - self) * u
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub type Point2 = Vec2;

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn from_angle(a: f64) -> Vec2 {
        Vec2::new(a.cos(), a.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Symmetric absolute + relative snapping tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_abs: f64,
    pub eps_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps_abs: 1e-12, eps_rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(eps_abs: f64, eps_rel: f64) -> Self {
        Self { eps_abs, eps_rel }
    }

    /// Tolerance scaled to a mesh of the given diameter.
    pub fn for_diameter(diameter: f64) -> Self {
        let d = if diameter > 0.0 && diameter.is_finite() { diameter } else { 1.0 };
        Self { eps_abs: 1e-10 * d, eps_rel: 1e-9 }
    }

    /// Snap distance for quantities of magnitude `scale`.
    pub fn snap(&self, scale: f64) -> f64 {
        self.eps_abs + self.eps_rel * scale.abs()
    }
}

/// A plane stored as an anchor point plus two spanning directions; the
/// unit normal is `dir1 × dir2` normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub anchor: Point3,
    pub dir1: Vec3,
    pub dir2: Vec3,
    pub normal: Vec3,
}

impl Plane {
    pub fn new(anchor: Point3, dir1: Vec3, dir2: Vec3) -> Result<Self, GeometryError> {
        let c = dir1.cross(dir2);
        let scale = dir1.norm() * dir2.norm();
        if !(scale > 0.0) || c.norm() <= 1e-12 * scale {
            return Err(GeometryError::DegeneratePlane);
        }
        Ok(Self { anchor, dir1, dir2, normal: c.normalize() })
    }

    /// Plane through `p` and `q` that contains the direction `face_normal`,
    /// i.e. orthogonal to any face with that normal.
    pub fn orthogonal_through(p: Point3, q: Point3, face_normal: Vec3) -> Result<Self, GeometryError> {
        Plane::new(p, q - p, face_normal)
    }

    pub fn signed_distance(&self, p: Point3) -> f64 {
        self.normal.dot(p - self.anchor)
    }

    /// The two stored points on the direction rays (the stored form of a plane).
    pub fn ray_points(&self) -> (Point3, Point3) {
        (self.anchor + self.dir1, self.anchor + self.dir2)
    }

    pub fn from_ray_points(anchor: Point3, a: Point3, b: Point3) -> Result<Self, GeometryError> {
        Plane::new(anchor, a - anchor, b - anchor)
    }
}

/// Orthonormal frame of a plane used to map between 3D and local 2D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Point3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub normal: Vec3,
}

impl Frame {
    /// Frame with origin `origin`, first axis along `toward - origin` and
    /// the given (not necessarily unit) normal.
    pub fn new(origin: Point3, toward: Point3, normal: Vec3) -> Self {
        let n = normal.normalize();
        let d = toward - origin;
        let mut e1 = d - n * n.dot(d);
        if e1.norm() < 1e-12 * (1.0 + d.norm()) {
            let helper = if n.x.abs() < 0.9 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::new(0.0, 1.0, 0.0) };
            e1 = helper - n * n.dot(helper);
        }
        let e1 = e1.normalize();
        let e2 = n.cross(e1);
        Self { origin, e1, e2, normal: n }
    }

    pub fn to_local(&self, p: Point3) -> Point2 {
        let d = p - self.origin;
        Vec2::new(d.dot(self.e1), d.dot(self.e2))
    }

    pub fn to_world(&self, q: Point2) -> Point3 {
        self.origin + self.e1 * q.x + self.e2 * q.y
    }

    /// Orthogonal projection of `p` onto the frame plane.
    pub fn project(&self, p: Point3) -> Point3 {
        p - self.normal * self.normal.dot(p - self.origin)
    }

    pub fn height(&self, p: Point3) -> f64 {
        self.normal.dot(p - self.origin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentHit {
    NoHit,
    Interior { point: Point3, u: f64 },
    AtEndpoint(Endpoint),
}

/// Intersect segment `ab` with plane `h`. Endpoint snapping takes priority
/// over interior hits; the snap distance is `tol.snap(|ab|)`.
pub fn segment_plane_intersect(a: Point3, b: Point3, h: &Plane, tol: Tolerance) -> Result<SegmentHit, GeometryError> {
    let len = a.dist(b);
    if len <= tol.eps_abs {
        return Err(GeometryError::DegenerateSegment);
    }
    let snap = tol.snap(len);
    let da = h.signed_distance(a);
    let db = h.signed_distance(b);
    if da.abs() <= snap {
        return Ok(SegmentHit::AtEndpoint(Endpoint::A));
    }
    if db.abs() <= snap {
        return Ok(SegmentHit::AtEndpoint(Endpoint::B));
    }
    if (da > 0.0) == (db > 0.0) {
        return Ok(SegmentHit::NoHit);
    }
    let u = da / (da - db);
    Ok(SegmentHit::Interior { point: a.lerp(b, u), u })
}

fn longest_edge(face: &[Point3; 3]) -> f64 {
    face[0].dist(face[1]).max(face[1].dist(face[2])).max(face[2].dist(face[0]))
}

pub fn is_degenerate(face: &[Point3; 3], tol: Tolerance) -> bool {
    let l = longest_edge(face);
    if l <= tol.eps_abs {
        return true;
    }
    let twice_area = (face[1] - face[0]).cross(face[2] - face[0]).norm();
    twice_area / l <= tol.snap(l)
}

/// Interior angle of triangle `face` at vertex index `at` (0, 1 or 2).
pub fn corner_angle(face: &[Point3; 3], at: usize, tol: Tolerance) -> Result<f64, GeometryError> {
    if is_degenerate(face, tol) {
        return Err(GeometryError::DegenerateFace);
    }
    let p = face[at % 3];
    let u = face[(at + 1) % 3] - p;
    let v = face[(at + 2) % 3] - p;
    Ok(u.cross(v).norm().atan2(u.dot(v)))
}

/// Rigid motion `x ↦ R (x - pivot) + pivot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMap {
    pub rot: [[f64; 3]; 3],
    pub pivot: Point3,
    pub shift: Vec3,
}

impl RigidMap {
    pub fn identity() -> Self {
        Self {
            rot: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            pivot: Vec3::ZERO,
            shift: Vec3::ZERO,
        }
    }

    /// Rotation by `angle` about the axis through `pivot` with unit direction `axis`.
    pub fn rotation(pivot: Point3, axis: Vec3, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let (x, y, z) = (axis.x, axis.y, axis.z);
        let t = 1.0 - c;
        let rot = [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ];
        Self { rot, pivot, shift: Vec3::ZERO }
    }

    fn rotate(&self, v: Vec3) -> Vec3 {
        let r = &self.rot;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        self.rotate(p - self.pivot) + self.pivot + self.shift
    }

    pub fn apply_vec(&self, v: Vec3) -> Vec3 {
        self.rotate(v)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &RigidMap) -> RigidMap {
        let mut rot = [[0.0; 3]; 3];
        for (i, row) in rot.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.rot[i][k] * inner.rot[k][j]).sum();
            }
        }
        // self(inner(x)) = R1 (R2 (x - p2) + p2 + s2 - p1) + p1 + s1
        let origin_img = self.apply(inner.apply(Vec3::ZERO));
        RigidMap { rot, pivot: Vec3::ZERO, shift: origin_img }
    }

    /// Rotation about the line through `e0`,`e1` that carries the half-plane
    /// containing `moving` onto the plane of `fixed`, on the side opposite
    /// to `fixed` (flattening the dihedral between the two half-planes).
    pub fn unfold(e0: Point3, e1: Point3, fixed: Point3, moving: Point3) -> Option<RigidMap> {
        let axis = (e1 - e0).try_normalize(0.0)?;
        let perp = |p: Point3| {
            let d = p - e0;
            d - axis * axis.dot(d)
        };
        let wf = perp(fixed).try_normalize(0.0)?;
        let wg = perp(moving).try_normalize(0.0)?;
        let target = -wf;
        let angle = axis.dot(wg.cross(target)).atan2(wg.dot(target));
        Some(RigidMap::rotation(e0, axis, angle))
    }
}

fn shared_edge(f: &[Point3; 3], g: &[Point3; 3], tol: Tolerance) -> Option<((usize, usize), (usize, usize))> {
    let scale = longest_edge(f).max(longest_edge(g));
    let snap = tol.snap(scale);
    let mut pairs = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if f[i].dist(g[j]) <= snap {
                pairs.push((i, j));
            }
        }
    }
    if pairs.len() != 2 {
        return None;
    }
    Some(((pairs[0].0, pairs[1].0), (pairs[0].1, pairs[1].1)))
}

/// Rigid map taking the plane of `g` onto the plane of `f`, fixing their
/// shared edge pointwise and placing `g` on the far side of that edge.
pub fn unfold_across_edge(f: &[Point3; 3], g: &[Point3; 3], tol: Tolerance) -> Result<RigidMap, GeometryError> {
    if is_degenerate(f, tol) || is_degenerate(g, tol) {
        return Err(GeometryError::DegenerateFace);
    }
    let ((fi, fj), (gi, gj)) = shared_edge(f, g, tol).ok_or(GeometryError::NotAdjacent)?;
    let f_apex = f[3 - fi - fj];
    let g_apex = g[3 - gi - gj];
    RigidMap::unfold(f[fi], f[fj], f_apex, g_apex).ok_or(GeometryError::DegenerateFace)
}

/// Triangle area.
pub fn triangle_area(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

/// Closest point on segment `ab` to `p`, and its parameter in [0, 1].
pub fn closest_on_segment(a: Point3, b: Point3, p: Point3) -> (Point3, f64) {
    let d = b - a;
    let l2 = d.norm2();
    if l2 == 0.0 {
        return (a, 0.0);
    }
    let u = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    (a + d * u, u)
}

pub fn closest_on_segment_2d(a: Point2, b: Point2, p: Point2) -> (Point2, f64) {
    let d = b - a;
    let l2 = d.dot(d);
    if l2 == 0.0 {
        return (a, 0.0);
    }
    let u = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    (a + d * u, u)
}

/// Clip a convex polygon by the half-plane `n·x + c <= 0`. Each edge
/// carries a label (edge k runs from vertex k to k+1); new edges get `new_label`.
pub fn clip_polygon<L: Copy>(poly: &[(Point2, L)], n: Vec2, c: f64, new_label: L, snap: f64) -> Vec<(Point2, L)> {
    let k = poly.len();
    if k == 0 {
        return Vec::new();
    }
    let val = |p: Point2| n.dot(p) + c;
    let mut out: Vec<(Point2, L)> = Vec::with_capacity(k + 1);
    for i in 0..k {
        let (p, lab) = poly[i];
        let (q, _) = poly[(i + 1) % k];
        let vp = val(p);
        let vq = val(q);
        let p_in = vp <= snap;
        let q_in = vq <= snap;
        if p_in {
            out.push((p, lab));
            if !q_in && vp < -snap {
                let u = vp / (vp - vq);
                out.push((p + (q - p) * u, new_label));
            } else if !q_in {
                // p on the line, q outside: the edge leaving p lies on the clip line
                let last = out.len() - 1;
                out[last].1 = new_label;
            }
        } else if q_in && vq < -snap {
            let u = vp / (vp - vq);
            out.push((p + (q - p) * u, lab));
        }
    }
    dedup_polygon(out, snap)
}

fn dedup_polygon<L: Copy>(poly: Vec<(Point2, L)>, snap: f64) -> Vec<(Point2, L)> {
    let mut out: Vec<(Point2, L)> = Vec::with_capacity(poly.len());
    for (p, l) in poly {
        if let Some(last) = out.last_mut() {
            if last.0.dist(p) <= snap {
                // keep the later label: the zero-length edge is dropped
                last.1 = l;
                continue;
            }
        }
        out.push((p, l));
    }
    while out.len() > 1 && out[0].0.dist(out[out.len() - 1].0) <= snap {
        out.pop();
    }
    if out.len() < 3 {
        return Vec::new();
    }
    out
}

pub fn polygon_area(poly: &[Point2]) -> f64 {
    let k = poly.len();
    (0..k).map(|i| poly[i].cross(poly[(i + 1) % k])).sum::<f64>() * 0.5
}

/// Ray parameter at which `origin + t·dir` meets triangle `tri`, with a
/// relative slack `eps` on the barycentric bounds.
pub fn ray_triangle(origin: Point3, dir: Vec3, tri: &[Point3; 3], eps: f64) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let h = dir.cross(e2);
    let a = e1.dot(h);
    if a.abs() <= 1e-300 {
        return None;
    }
    let s = origin - tri[0];
    let u = s.dot(h) / a;
    let q = s.cross(e1);
    let v = dir.dot(q) / a;
    if u < -eps || v < -eps || u + v > 1.0 + eps {
        return None;
    }
    Some(e2.dot(q) / a)
}

/// Closest point of triangle `tri` to `p`.
pub fn closest_on_triangle(tri: &[Point3; 3], p: Point3) -> Point3 {
    let [a, b, c] = *tri;
    let n = (b - a).cross(c - a);
    let inside = |x: Point3, y: Point3| (y - x).cross(p - x).dot(n) >= 0.0;
    if n.norm2() > 0.0 && inside(a, b) && inside(b, c) && inside(c, a) {
        let nn = n.normalize();
        return p - nn * nn.dot(p - a);
    }
    [(a, b), (b, c), (c, a)]
        .into_iter()
        .map(|(x, y)| closest_on_segment(x, y, p).0)
        .min_by(|x, y| x.dist(p).total_cmp(&y.dist(p)))
        .expect("three edges")
}
