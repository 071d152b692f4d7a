//! Per-vertex routing tables and their binary (PRT1) and JSON forms.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "PRT1" | version u16 | flags u16 | section count u32
//! { tag u8 | length u32 | payload } *
//! crc32 u32 over everything before it
//! ```
//!
//! Section tags: 1 mesh, 2 metadata, 3 one vertex table.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compact_routing::{plane_through, LandmarkScheme, NodeDest, PlaneEntry};
use crate::geometry::{Plane, Point3, Vec3};
use crate::patching::PatchDecomposition;
use crate::polytope::{FaceId, TriangulatedPolytope, VertexId};
use crate::sampling::RepresentativeAssignment;
use crate::spanner::SpannerGraph;

pub const MAGIC: &[u8; 4] = b"PRT1";
pub const VERSION: u16 = 1;
const TAG_MESH: u8 = 1;
const TAG_META: u8 = 2;
const TAG_TABLE: u8 = 3;
const FLAG_MESH: u16 = 1;
const FLAG_META: u16 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("bad magic")]
    BadMagic,
    #[error("format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u16, expected: u16 },
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("stream ends early")]
    TruncatedStream,
    #[error("malformed stream: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntryKind {
    ToMyRep,
    RepToMember,
    RepToRepSamePatch,
    Global,
    MarkedRelay,
}

/// What an entry is looked up by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntryKey {
    Vertex(VertexId),
    /// Toward a landmark, by spanner node id.
    Landmark(u32),
    /// At a marked vertex: from Steiner node `node` toward a representative.
    RelayVertex { node: u32, vertex: VertexId },
    /// At a marked vertex: from Steiner node `node` toward a landmark.
    RelayLandmark { node: u32, landmark: u32 },
}

/// The point the packet steers toward next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PseudoDest {
    Vertex(VertexId),
    /// A lifted Steiner node on the edge `xy` of P (x == y if it sits on a vertex).
    Relay { node: u32, x: VertexId, y: VertexId },
}

impl PseudoDest {
    pub fn reached(&self, v: VertexId) -> bool {
        match *self {
            PseudoDest::Vertex(q) => q == v,
            PseudoDest::Relay { x, y, .. } => x == v || y == v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingEntry {
    pub key: EntryKey,
    pub kind: EntryKind,
    pub plane: Plane,
    pub next: PseudoDest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeLabel {
    pub vertex: VertexId,
    pub rep: VertexId,
    /// Spanner node of the representative.
    pub node: u32,
    /// Home landmark of that node.
    pub landmark: u32,
    pub patch: u32,
    pub cell: u32,
}

impl NodeLabel {
    /// Bits needed for the label fields given the id ranges.
    pub fn bit_length(n: usize, nodes: usize, patches: usize, cells: usize) -> usize {
        let bits = |x: usize| (usize::BITS - x.max(1).leading_zeros()) as usize;
        2 * bits(n) + 2 * bits(nodes) + bits(patches) + bits(cells)
    }
}

/// A Steiner node whose lift sits on an edge at this vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelayInfo {
    pub node: u32,
    pub x: VertexId,
    pub y: VertexId,
    pub point: Point3,
    /// Home landmark of the node.
    pub landmark: u32,
    /// Sketch faces the node lies on.
    pub faces: [u32; 2],
}

impl RelayInfo {
    pub fn is_landmark(&self) -> bool {
        self.landmark == self.node
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingTable {
    pub vertex: VertexId,
    pub label: NodeLabel,
    /// Sorted by key.
    pub entries: Vec<RoutingEntry>,
    /// Mesh neighbours and the spanner node standing for each, if any.
    pub neighbour_map: Vec<(VertexId, Option<u32>)>,
    /// For each incident face, the face across the edge opposite this vertex.
    pub opposite_face_map: Vec<(FaceId, FaceId)>,
    /// Sorted by node.
    pub relays: Vec<RelayInfo>,
}

impl RoutingTable {
    pub fn is_rep(&self) -> bool {
        self.label.rep == self.vertex
    }

    pub fn get(&self, key: EntryKey) -> Option<&RoutingEntry> {
        self.entries.binary_search_by(|e| e.key.cmp(&key)).ok().map(|i| &self.entries[i])
    }

    pub fn relay(&self, node: u32) -> Option<&RelayInfo> {
        self.relays.binary_search_by_key(&node, |r| r.node).ok().map(|i| &self.relays[i])
    }

    pub fn count(&self, kind: EntryKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    /// Size in machine words: one per key, kind and next field, nine per plane.
    pub fn words(&self) -> usize {
        self.entries.len() * 12 + self.neighbour_map.len() * 2 + self.opposite_face_map.len() * 2 + self.relays.len() * 9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub theta_m: f64,
    pub d_hat: f64,
    pub patches: u32,
    pub reps: u32,
    pub spanner_nodes: u32,
    pub spanner_edges: u32,
    pub landmarks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshData {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[VertexId; 3]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TableSet {
    pub tables: Vec<RoutingTable>,
    pub mesh: Option<MeshData>,
    pub meta: Option<TableMeta>,
}

impl TableSet {
    pub fn entry_count(&self) -> usize {
        self.tables.iter().map(|t| t.entries.len()).sum()
    }

    pub fn words(&self) -> usize {
        self.tables.iter().map(RoutingTable::words).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, TableError> {
        serde_json::from_str(s).map_err(|e| TableError::Malformed(e.to_string()))
    }
}

// ---------------------------------------------------------------- encoding

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }
    fn u16(&mut self, x: u16) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }
    fn vec3(&mut self, v: Vec3) {
        self.f64(v.x);
        self.f64(v.y);
        self.f64(v.z);
    }
    fn opt_u32(&mut self, x: Option<u32>) {
        match x {
            Some(v) => {
                self.u8(1);
                self.u32(v);
            }
            None => self.u8(0),
        }
    }
}

fn put_key(w: &mut Writer, k: EntryKey) {
    match k {
        EntryKey::Vertex(v) => {
            w.u8(0);
            w.u32(v);
            w.u32(0);
        }
        EntryKey::Landmark(l) => {
            w.u8(1);
            w.u32(l);
            w.u32(0);
        }
        EntryKey::RelayVertex { node, vertex } => {
            w.u8(2);
            w.u32(node);
            w.u32(vertex);
        }
        EntryKey::RelayLandmark { node, landmark } => {
            w.u8(3);
            w.u32(node);
            w.u32(landmark);
        }
    }
}

fn kind_code(k: EntryKind) -> u8 {
    match k {
        EntryKind::ToMyRep => 0,
        EntryKind::RepToMember => 1,
        EntryKind::RepToRepSamePatch => 2,
        EntryKind::Global => 3,
        EntryKind::MarkedRelay => 4,
    }
}

fn put_table(w: &mut Writer, t: &RoutingTable) {
    w.u32(t.vertex);
    let l = t.label;
    for x in [l.vertex, l.rep, l.node, l.landmark, l.patch, l.cell] {
        w.u32(x);
    }
    w.u32(t.entries.len() as u32);
    for e in &t.entries {
        put_key(w, e.key);
        w.u8(kind_code(e.kind));
        w.vec3(e.plane.anchor);
        w.vec3(e.plane.dir1);
        w.vec3(e.plane.dir2);
        match e.next {
            PseudoDest::Vertex(v) => {
                w.u8(0);
                w.u32(v);
                w.u32(0);
                w.u32(0);
            }
            PseudoDest::Relay { node, x, y } => {
                w.u8(1);
                w.u32(node);
                w.u32(x);
                w.u32(y);
            }
        }
    }
    w.u32(t.neighbour_map.len() as u32);
    for &(v, n) in &t.neighbour_map {
        w.u32(v);
        w.opt_u32(n);
    }
    w.u32(t.opposite_face_map.len() as u32);
    for &(f, g) in &t.opposite_face_map {
        w.u32(f);
        w.u32(g);
    }
    w.u32(t.relays.len() as u32);
    for r in &t.relays {
        w.u32(r.node);
        w.u32(r.x);
        w.u32(r.y);
        w.vec3(r.point);
        w.u32(r.landmark);
        w.u32(r.faces[0]);
        w.u32(r.faces[1]);
    }
}

fn put_meta(w: &mut Writer, m: &TableMeta) {
    w.f64(m.eps);
    w.f64(m.delta);
    w.u64(m.seed);
    w.f64(m.theta_m);
    w.f64(m.d_hat);
    for x in [m.patches, m.reps, m.spanner_nodes, m.spanner_edges, m.landmarks] {
        w.u32(x);
    }
}

fn put_mesh(w: &mut Writer, m: &MeshData) {
    w.u32(m.vertices.len() as u32);
    w.u32(m.faces.len() as u32);
    for &v in &m.vertices {
        w.vec3(v);
    }
    for f in &m.faces {
        for &x in f {
            w.u32(x);
        }
    }
}

fn section(out: &mut Writer, tag: u8, body: impl FnOnce(&mut Writer)) {
    let mut w = Writer { buf: Vec::new() };
    body(&mut w);
    out.u8(tag);
    out.u32(w.buf.len() as u32);
    out.buf.extend_from_slice(&w.buf);
}

pub fn serialize(set: &TableSet) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u16(VERSION);
    let flags = if set.mesh.is_some() { FLAG_MESH } else { 0 } | if set.meta.is_some() { FLAG_META } else { 0 };
    w.u16(flags);
    let count = set.tables.len() + set.mesh.is_some() as usize + set.meta.is_some() as usize;
    w.u32(count as u32);
    if let Some(m) = &set.mesh {
        section(&mut w, TAG_MESH, |s| put_mesh(s, m));
    }
    if let Some(m) = &set.meta {
        section(&mut w, TAG_META, |s| put_meta(s, m));
    }
    for t in &set.tables {
        section(&mut w, TAG_TABLE, |s| put_table(s, t));
    }
    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

// ---------------------------------------------------------------- decoding

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], TableError> {
        let end = self.pos.checked_add(n).ok_or(TableError::TruncatedStream)?;
        if end > self.buf.len() {
            return Err(TableError::TruncatedStream);
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, TableError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, TableError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32, TableError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, TableError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64, TableError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn vec3(&mut self) -> Result<Vec3, TableError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }
    fn opt_u32(&mut self) -> Result<Option<u32>, TableError> {
        match self.u8()? {
            0 => Ok(None),
            1 => Ok(Some(self.u32()?)),
            t => Err(TableError::Malformed(format!("bad option tag {t}"))),
        }
    }
    /// A count whose items need at least `min_size` bytes each.
    fn count(&mut self, min_size: usize) -> Result<usize, TableError> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_size) > self.buf.len() - self.pos {
            return Err(TableError::Malformed(format!("count {n} exceeds section")));
        }
        Ok(n)
    }
    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn get_key(r: &mut Reader) -> Result<EntryKey, TableError> {
    let tag = r.u8()?;
    let (a, b) = (r.u32()?, r.u32()?);
    Ok(match tag {
        0 => EntryKey::Vertex(a),
        1 => EntryKey::Landmark(a),
        2 => EntryKey::RelayVertex { node: a, vertex: b },
        3 => EntryKey::RelayLandmark { node: a, landmark: b },
        t => return Err(TableError::Malformed(format!("bad key tag {t}"))),
    })
}

fn get_kind(c: u8) -> Result<EntryKind, TableError> {
    Ok(match c {
        0 => EntryKind::ToMyRep,
        1 => EntryKind::RepToMember,
        2 => EntryKind::RepToRepSamePatch,
        3 => EntryKind::Global,
        4 => EntryKind::MarkedRelay,
        t => return Err(TableError::Malformed(format!("bad entry kind {t}"))),
    })
}

fn get_table(r: &mut Reader) -> Result<RoutingTable, TableError> {
    let vertex = r.u32()?;
    let mut f = [0u32; 6];
    for x in &mut f {
        *x = r.u32()?;
    }
    let label = NodeLabel { vertex: f[0], rep: f[1], node: f[2], landmark: f[3], patch: f[4], cell: f[5] };
    let n = r.count(95)?;
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let key = get_key(r)?;
        let kind = get_kind(r.u8()?)?;
        let (anchor, d1, d2) = (r.vec3()?, r.vec3()?, r.vec3()?);
        let plane = Plane::new(anchor, d1, d2).map_err(|e| TableError::Malformed(e.to_string()))?;
        let tag = r.u8()?;
        let (a, b, c) = (r.u32()?, r.u32()?, r.u32()?);
        let next = match tag {
            0 => PseudoDest::Vertex(a),
            1 => PseudoDest::Relay { node: a, x: b, y: c },
            t => return Err(TableError::Malformed(format!("bad pseudo-destination tag {t}"))),
        };
        entries.push(RoutingEntry { key, kind, plane, next });
    }
    let n = r.count(5)?;
    let mut neighbour_map = Vec::with_capacity(n);
    for _ in 0..n {
        neighbour_map.push((r.u32()?, r.opt_u32()?));
    }
    let n = r.count(8)?;
    let mut opposite_face_map = Vec::with_capacity(n);
    for _ in 0..n {
        opposite_face_map.push((r.u32()?, r.u32()?));
    }
    let n = r.count(48)?;
    let mut relays = Vec::with_capacity(n);
    for _ in 0..n {
        relays.push(RelayInfo {
            node: r.u32()?,
            x: r.u32()?,
            y: r.u32()?,
            point: r.vec3()?,
            landmark: r.u32()?,
            faces: [r.u32()?, r.u32()?],
        });
    }
    Ok(RoutingTable { vertex, label, entries, neighbour_map, opposite_face_map, relays })
}

fn get_meta(r: &mut Reader) -> Result<TableMeta, TableError> {
    Ok(TableMeta {
        eps: r.f64()?,
        delta: r.f64()?,
        seed: r.u64()?,
        theta_m: r.f64()?,
        d_hat: r.f64()?,
        patches: r.u32()?,
        reps: r.u32()?,
        spanner_nodes: r.u32()?,
        spanner_edges: r.u32()?,
        landmarks: r.u32()?,
    })
}

fn get_mesh(r: &mut Reader) -> Result<MeshData, TableError> {
    let nv = r.u32()? as usize;
    let nf = r.u32()? as usize;
    if nv.saturating_mul(24).saturating_add(nf.saturating_mul(12)) != r.buf.len() - r.pos {
        return Err(TableError::Malformed("mesh section size".into()));
    }
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(r.vec3()?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        faces.push([r.u32()?, r.u32()?, r.u32()?]);
    }
    Ok(MeshData { vertices, faces })
}

pub fn deserialize(bytes: &[u8]) -> Result<TableSet, TableError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(TableError::BadMagic);
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(TableError::FormatVersionMismatch { found: version, expected: VERSION });
    }
    let flags = r.u16()?;
    let count = r.u32()? as usize;
    // locate sections first so that short streams report truncation
    let mut sections = Vec::new();
    for _ in 0..count {
        let tag = r.u8()?;
        let len = r.u32()? as usize;
        let body = r.take(len)?;
        sections.push((tag, body));
    }
    let body_end = r.pos;
    let stored = r.u32()?;
    if !r.done() {
        return Err(TableError::Malformed("trailing bytes".into()));
    }
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(TableError::ChecksumMismatch { stored, computed });
    }

    let mut set = TableSet::default();
    for (tag, body) in sections {
        let mut s = Reader { buf: body, pos: 0 };
        match tag {
            TAG_MESH if set.mesh.is_none() && set.tables.is_empty() => set.mesh = Some(get_mesh(&mut s)?),
            TAG_META if set.meta.is_none() && set.tables.is_empty() => set.meta = Some(get_meta(&mut s)?),
            TAG_TABLE => set.tables.push(get_table(&mut s)?),
            t => return Err(TableError::Malformed(format!("unexpected section tag {t}"))),
        }
        if !s.done() {
            return Err(TableError::Malformed(format!("section {tag} has trailing bytes")));
        }
    }
    let expect = if set.mesh.is_some() { FLAG_MESH } else { 0 } | if set.meta.is_some() { FLAG_META } else { 0 };
    if flags != expect {
        return Err(TableError::Malformed(format!("flags {flags:#x} disagree with sections")));
    }
    Ok(set)
}

// ---------------------------------------------------------------- building

/// Label of every vertex of P.
pub fn labels(asg: &RepresentativeAssignment, g: &SpannerGraph, scheme: &LandmarkScheme) -> Vec<NodeLabel> {
    (0..asg.rep_of.len())
        .map(|v| {
            let rep = asg.rep_of[v];
            let node = g.rep_node[&rep];
            let (patch, cell) = asg.cell_of[v];
            NodeLabel { vertex: v as VertexId, rep, node, landmark: scheme.home[node as usize], patch, cell }
        })
        .collect()
}

/// Plane from vertex `a` to vertex `b` orthogonal to patch `patch`.
fn vertex_plane(p: &TriangulatedPolytope, dec: &PatchDecomposition, a: VertexId, b: VertexId, patch: usize) -> Plane {
    let fr = &dec.patches[patch].frame;
    plane_through(p.vertex(a), p.vertex(b), fr.normal, || fr.e1, fr.e2)
}

/// Assemble per-vertex tables from the node entries of G′.
pub fn build_tables(
    p: &TriangulatedPolytope,
    dec: &PatchDecomposition,
    asg: &RepresentativeAssignment,
    g: &SpannerGraph,
    scheme: &LandmarkScheme,
    node_entries: &[Vec<PlaneEntry>],
) -> Vec<RoutingTable> {
    let labels = labels(asg, g, scheme);
    let n = p.vertex_count();
    let mut entries: Vec<Vec<RoutingEntry>> = vec![Vec::new(); n];
    let mut relays: Vec<Vec<RelayInfo>> = vec![Vec::new(); n];

    for v in 0..n as VertexId {
        let r = asg.rep_of[v as usize];
        let patch = asg.patch_of(v);
        if r != v {
            entries[v as usize].push(RoutingEntry {
                key: EntryKey::Vertex(r),
                kind: EntryKind::ToMyRep,
                plane: vertex_plane(p, dec, v, r, patch),
                next: PseudoDest::Vertex(r),
            });
        } else {
            for m in asg.members(v) {
                entries[v as usize].push(RoutingEntry {
                    key: EntryKey::Vertex(m),
                    kind: EntryKind::RepToMember,
                    plane: vertex_plane(p, dec, v, m, patch),
                    next: PseudoDest::Vertex(m),
                });
            }
        }
    }

    for (u, list) in node_entries.iter().enumerate() {
        let u = u as u32;
        let node = &g.nodes[u as usize];
        if let Some(r) = node.rep_vertex() {
            for e in list {
                let (key, kind) = match e.dest {
                    NodeDest::Rep(x) => (EntryKey::Vertex(x), if e.direct { EntryKind::RepToRepSamePatch } else { EntryKind::Global }),
                    NodeDest::Landmark(l) => (EntryKey::Landmark(l), EntryKind::Global),
                };
                entries[r as usize].push(RoutingEntry { key, kind, plane: e.plane, next: e.next });
            }
        } else if let Some((x, y)) = node.marked() {
            let info = RelayInfo {
                node: u,
                x,
                y,
                point: node.lift,
                landmark: scheme.home[u as usize],
                faces: [node.faces[0], node.faces[1]],
            };
            let ends = [x, y];
            for &at in if x == y { &ends[..1] } else { &ends[..] } {
                relays[at as usize].push(info.clone());
                for e in list {
                    let key = match e.dest {
                        NodeDest::Rep(v) => EntryKey::RelayVertex { node: u, vertex: v },
                        NodeDest::Landmark(l) => EntryKey::RelayLandmark { node: u, landmark: l },
                    };
                    entries[at as usize].push(RoutingEntry { key, kind: EntryKind::MarkedRelay, plane: e.plane, next: e.next });
                }
            }
        }
    }

    (0..n as VertexId)
        .map(|v| {
            let mut es = std::mem::take(&mut entries[v as usize]);
            es.sort_by(|a, b| a.key.cmp(&b.key));
            es.dedup_by(|a, b| a.key == b.key);
            let mut rs = std::mem::take(&mut relays[v as usize]);
            rs.sort_by_key(|r| r.node);
            let neighbour_map = p.neighbours(v).iter().map(|&w| (w, asg.is_rep(w).then(|| g.rep_node[&w]))).collect();
            let opposite_face_map = p
                .fan(v)
                .iter()
                .map(|&f| {
                    let (a, b) = p.others(f, v);
                    (f, p.opposite_face(f, a, b).expect("closed surface"))
                })
                .collect();
            RoutingTable { vertex: v, label: labels[v as usize], entries: es, neighbour_map, opposite_face_map, relays: rs }
        })
        .collect()
}
