//! Edge-local packet forwarding along guiding planes.
//!
//! A leg follows the curve η ∩ ∂P from the current vertex toward the
//! pseudo-destination. Vertices at signed distance below `-snap` are on the
//! negative side, all others on the positive side, so the curve never runs
//! through a vertex and crosses a well-defined sequence of edges. The
//! packet always sits at an endpoint of the last crossed edge; the header
//! remembers the other endpoint. With η's normal taken as (q − p) × N the
//! positive side lies to the right of travel, so the face ahead of a
//! crossed edge is the one holding it directed from negative to positive.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Plane, Point3};
use crate::polytope::{FaceId, TriangulatedPolytope, VertexId};
use crate::tables::{EntryKey, EntryKind, NodeLabel, PseudoDest, RoutingEntry, RoutingTable, TableSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("source equals destination")]
    TrivialRoute,
    #[error("vertex {vertex} has no entry for {key:?}")]
    MissingEntry { vertex: VertexId, key: EntryKey },
    #[error("plane leaves no face at vertex {0}")]
    NoExitFace(VertexId),
    #[error("hop limit {0} exceeded")]
    HopLimitExceeded(usize),
    #[error("table lookups at vertex {0} do not make progress")]
    ConsultLoop(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HopCase {
    /// First hop out of the source.
    FirstHop,
    /// First hop after switching to a new pseudo-destination.
    PseudoSwitch,
    /// Look-ahead into the face beyond the exit edge.
    General,
    /// The plane runs through the chosen vertex.
    VertexHit,
    /// The plane runs through the look-ahead vertex; shorter detour wins.
    TieBreak,
    /// Destination or pseudo-destination is a neighbour.
    Neighbour,
    /// Plane misses the star; moved to the neighbour nearest the target.
    Fallback,
}

impl HopCase {
    pub fn name(self) -> &'static str {
        match self {
            HopCase::FirstHop => "first",
            HopCase::PseudoSwitch => "switch",
            HopCase::General => "general",
            HopCase::VertexHit => "vertex",
            HopCase::TieBreak => "tie",
            HopCase::Neighbour => "neighbour",
            HopCase::Fallback => "fallback",
        }
    }
}

/// Where the packet is relative to the curve η ∩ ∂P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Crossing {
    /// Not yet placed on the curve.
    AtVertex,
    /// The curve last crossed the edge from the current vertex to this one.
    OnEdge(VertexId),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketHeader {
    pub dest: NodeLabel,
    pub pseudo: PseudoDest,
    pub plane: Plane,
    pub prev: Option<VertexId>,
    /// Spanner node whose entry set the current leg.
    pub via: Option<u32>,
    pub crossing: Crossing,
    pub hop_count: usize,
    /// True until the first hop of a new leg.
    pub fresh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hop {
    pub from: VertexId,
    pub to: VertexId,
    pub case: HopCase,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteTrace {
    pub vertices: Vec<VertexId>,
    pub hops: Vec<Hop>,
    pub length: f64,
    /// Table consultations, including the one at the source.
    pub consults: usize,
    /// Entry kinds used, in order.
    pub kinds: Vec<EntryKind>,
    /// Legs: (first vertex index into `vertices`, plane, pseudo-destination).
    pub legs: Vec<(usize, Plane, PseudoDest)>,
}

impl RouteTrace {
    pub fn count(&self, case: HopCase) -> usize {
        self.hops.iter().filter(|h| h.case == case).count()
    }

    /// One line per hop, `hop_index vertex_id case edge_length`, then a summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "0 {} start 0", self.vertices[0]);
        for (i, h) in self.hops.iter().enumerate() {
            let _ = writeln!(s, "{} {} {} {:.9}", i + 1, h.to, h.case.name(), h.length);
        }
        let _ = writeln!(s, "summary hops={} length={:.9} consults={}", self.hops.len(), self.length, self.consults);
        s
    }
}

pub struct Router<'a> {
    pub p: &'a TriangulatedPolytope,
    pub tables: &'a [RoutingTable],
    pub snap: f64,
    pub hop_limit: usize,
}

enum Consult {
    Done,
    Leg,
}

impl<'a> Router<'a> {
    /// Router with hop limit `hop_mult · n`.
    pub fn new(p: &'a TriangulatedPolytope, tables: &'a TableSet, hop_mult: usize) -> Self {
        Self::from_tables(p, &tables.tables, hop_mult)
    }

    pub fn from_tables(p: &'a TriangulatedPolytope, tables: &'a [RoutingTable], hop_mult: usize) -> Self {
        Self { p, tables, snap: p.tolerance().snap(p.diameter()), hop_limit: hop_mult * p.vertex_count() }
    }

    fn d(&self, plane: &Plane, v: VertexId) -> f64 {
        plane.signed_distance(self.p.vertex(v))
    }

    fn pos(&self, plane: &Plane, v: VertexId) -> bool {
        self.d(plane, v) >= -self.snap
    }

    fn on_plane(&self, plane: &Plane, v: VertexId) -> bool {
        self.d(plane, v).abs() <= self.snap
    }

    fn len(&self, a: VertexId, b: VertexId) -> f64 {
        self.p.edge_length(a, b)
    }

    fn target_point(&self, pd: PseudoDest) -> Point3 {
        match pd {
            PseudoDest::Vertex(q) => self.p.vertex(q),
            PseudoDest::Relay { x, y, .. } => (self.p.vertex(x) + self.p.vertex(y)) * 0.5,
        }
    }

    /// The next crossed edge after (pos, neg), as (pos, neg), and the face between.
    fn advance(&self, plane: &Plane, pos: VertexId, neg: VertexId) -> Option<(VertexId, VertexId, FaceId)> {
        let f = self.p.directed_face(neg, pos)?;
        let c = self.p.third_vertex(f, pos, neg);
        Some(if self.pos(plane, c) { (c, neg, f) } else { (pos, c, f) })
    }

    pub fn make_packet(&self, s: VertexId, t: VertexId) -> Result<PacketHeader, RouteError> {
        self.packet_with(s, t, &mut Vec::new())
    }

    fn packet_with(&self, s: VertexId, t: VertexId, kinds: &mut Vec<EntryKind>) -> Result<PacketHeader, RouteError> {
        let n = self.tables.len().min(self.p.vertex_count()) as VertexId;
        for v in [s, t] {
            if v >= n {
                return Err(RouteError::UnknownVertex(v));
            }
        }
        if s == t {
            return Err(RouteError::TrivialRoute);
        }
        let here = self.p.vertex(s);
        let mut h = PacketHeader {
            dest: self.tables[t as usize].label,
            pseudo: PseudoDest::Vertex(s),
            // replaced by the consultation below
            plane: Plane { anchor: here, dir1: here, dir2: here, normal: here },
            prev: None,
            via: None,
            crossing: Crossing::AtVertex,
            hop_count: 0,
            fresh: true,
        };
        self.consult_until_leg(s, &mut h, kinds)?;
        Ok(h)
    }

    fn lookup(&self, v: VertexId, key: EntryKey) -> Result<&'a RoutingEntry, RouteError> {
        self.tables[v as usize].get(key).ok_or(RouteError::MissingEntry { vertex: v, key })
    }

    /// Consult the table at `v`, whose pseudo-destination has been reached.
    fn consult(&self, v: VertexId, h: &mut PacketHeader, kinds: &mut Vec<EntryKind>) -> Result<Consult, RouteError> {
        let t = h.dest.vertex;
        if v == t {
            return Ok(Consult::Done);
        }
        let table = &self.tables[v as usize];
        let dest = h.dest;
        let (entry, relay_edge) = match h.pseudo {
            PseudoDest::Relay { node, x, y } if x == v || y == v => {
                let info = table.relay(node);
                let guarded = info.is_some_and(|r| r.is_landmark() && dest.landmark != node && !r.faces.contains(&dest.patch));
                let e = match table.get(EntryKey::RelayVertex { node, vertex: dest.rep }) {
                    Some(e) if !guarded => e,
                    _ => self.lookup(v, EntryKey::RelayLandmark { node, landmark: dest.landmark })?,
                };
                h.via = Some(node);
                (e, (x != y).then_some((x, y)))
            }
            _ if !table.is_rep() => (self.lookup(v, EntryKey::Vertex(table.label.rep))?, None),
            _ if dest.rep == v => (self.lookup(v, EntryKey::Vertex(t))?, None),
            _ => {
                let me = table.label.node;
                let guarded = |e: &RoutingEntry| e.kind == EntryKind::Global && table.label.landmark == me && dest.landmark != me;
                let e = match table.get(EntryKey::Vertex(dest.rep)) {
                    Some(e) if !guarded(e) => e,
                    _ => self.lookup(v, EntryKey::Landmark(dest.landmark))?,
                };
                h.via = Some(me);
                (e, None)
            }
        };
        kinds.push(entry.kind);
        h.pseudo = entry.next;
        h.plane = entry.plane;
        h.fresh = true;
        h.crossing = Crossing::AtVertex;
        if let Some((x, y)) = relay_edge {
            let o = if x == v { y } else { x };
            if self.pos(&h.plane, v) != self.pos(&h.plane, o) {
                h.crossing = Crossing::OnEdge(o);
            }
        }
        Ok(Consult::Leg)
    }

    fn consult_until_leg(&self, v: VertexId, h: &mut PacketHeader, kinds: &mut Vec<EntryKind>) -> Result<bool, RouteError> {
        let mut rounds = 0;
        while h.pseudo.reached(v) {
            if let Consult::Done = self.consult(v, h, kinds)? {
                return Ok(true);
            }
            rounds += 1;
            if rounds > 4 * self.p.vertex_count() + 16 {
                return Err(RouteError::ConsultLoop(v));
            }
        }
        Ok(false)
    }

    /// Choose the face through which the curve leaves the star of `v`.
    fn enter_curve(&self, v: VertexId, h: &PacketHeader) -> Option<Crossing> {
        let plane = &h.plane;
        let target = self.target_point(h.pseudo);
        let vp = self.pos(plane, v);
        let mut best: Option<(f64, Crossing)> = None;
        for &f in self.p.fan(v) {
            let (a, b) = self.p.others(f, v);
            if !(self.pos(plane, a) && !self.pos(plane, b)) {
                continue;
            }
            let (da, db) = (self.d(plane, a), self.d(plane, b));
            let u = (da / (da - db)).clamp(0.0, 1.0);
            let exit = self.p.vertex(a).lerp(self.p.vertex(b), u);
            let score = exit.dist(target);
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, Crossing::OnEdge(if vp { b } else { a })));
            }
        }
        best.map(|(_, c)| c)
    }

    /// Decide one mesh hop from `v`. Updates the crossing state.
    fn hop(&self, v: VertexId, h: &mut PacketHeader) -> Result<(VertexId, HopCase), RouteError> {
        let p = self.p;
        let t = h.dest.vertex;
        let nbrs = p.neighbours(v);
        if nbrs.contains(&t) {
            return Ok((t, HopCase::Neighbour));
        }
        let near = match h.pseudo {
            PseudoDest::Vertex(q) => nbrs.contains(&q).then_some(q),
            PseudoDest::Relay { x, y, .. } => {
                let here = p.vertex(v);
                [x, y].into_iter().filter(|w| nbrs.contains(w)).min_by(|&a, &b| p.vertex(a).dist(here).total_cmp(&p.vertex(b).dist(here)))
            }
        };
        if let Some(q) = near {
            h.crossing = Crossing::AtVertex;
            return Ok((q, HopCase::Neighbour));
        }

        let plane = h.plane;
        if let Crossing::OnEdge(o) = h.crossing {
            if !nbrs.contains(&o) || self.pos(&plane, v) == self.pos(&plane, o) {
                h.crossing = Crossing::AtVertex;
            }
        }
        if h.crossing == Crossing::AtVertex {
            match self.enter_curve(v, h) {
                Some(c) => h.crossing = c,
                None => {
                    let target = self.target_point(h.pseudo);
                    let w = *nbrs
                        .iter()
                        .filter(|&&w| Some(w) != h.prev)
                        .min_by(|&&a, &&b| p.vertex(a).dist(target).total_cmp(&p.vertex(b).dist(target)))
                        .or(nbrs.first())
                        .ok_or(RouteError::NoExitFace(v))?;
                    return Ok((w, HopCase::Fallback));
                }
            }
        }

        let guard = 2 * p.edge_count() + 8;
        for _ in 0..guard {
            let Crossing::OnEdge(o) = h.crossing else { unreachable!("crossing set above") };
            let (pos, neg) = if self.pos(&plane, v) { (v, o) } else { (o, v) };
            let (pos2, neg2, _) = self.advance(&plane, pos, neg).ok_or(RouteError::NoExitFace(v))?;
            if pos2 == v || neg2 == v {
                h.crossing = Crossing::OnEdge(if pos2 == v { neg2 } else { pos2 });
                continue;
            }
            // leave v: pick an endpoint of the exit edge (pos2, neg2)
            let other = |w: VertexId| if w == pos2 { neg2 } else { pos2 };
            for w in [pos2, neg2] {
                if w != o && self.on_plane(&plane, w) {
                    h.crossing = Crossing::OnEdge(other(w));
                    return Ok((w, HopCase::VertexHit));
                }
            }
            if self.on_plane(&plane, o) {
                h.crossing = Crossing::OnEdge(other(o));
                return Ok((o, HopCase::VertexHit));
            }
            let f3 = p.directed_face(neg2, pos2).ok_or(RouteError::NoExitFace(v))?;
            let p4 = p.third_vertex(f3, pos2, neg2);
            let w = if self.on_plane(&plane, p4) {
                let f1 = p.directed_face(neg, pos).ok_or(RouteError::NoExitFace(v))?;
                let (p2, p3) = p.others(f1, v);
                let via2 = self.len(v, p2) + self.len(p2, p4);
                let via3 = self.len(v, p3) + self.len(p3, p4);
                let w = if via2 < via3 { p2 } else { p3 };
                h.crossing = Crossing::OnEdge(other(w));
                return Ok((w, HopCase::TieBreak));
            } else if self.pos(&plane, p4) {
                // next edge (p4, neg2)
                neg2
            } else {
                pos2
            };
            h.crossing = Crossing::OnEdge(other(w));
            return Ok((w, HopCase::General));
        }
        Err(RouteError::NoExitFace(v))
    }

    /// One forwarding step at `v`: table consultations as needed, then a
    /// single hop. Returns `None` once `v` is the destination.
    pub fn step(&self, v: VertexId, h: &mut PacketHeader) -> Result<Option<(VertexId, HopCase)>, RouteError> {
        self.step_with(v, h, &mut Vec::new())
    }

    fn step_with(&self, v: VertexId, h: &mut PacketHeader, kinds: &mut Vec<EntryKind>) -> Result<Option<(VertexId, HopCase)>, RouteError> {
        if v == h.dest.vertex || self.consult_until_leg(v, h, kinds)? {
            return Ok(None);
        }
        if h.hop_count >= self.hop_limit {
            return Err(RouteError::HopLimitExceeded(self.hop_limit));
        }
        let (w, mut case) = self.hop(v, h)?;
        if h.fresh && matches!(case, HopCase::General | HopCase::VertexHit | HopCase::TieBreak) {
            case = if h.hop_count == 0 { HopCase::FirstHop } else { HopCase::PseudoSwitch };
        }
        h.fresh = false;
        h.prev = Some(v);
        h.hop_count += 1;
        Ok(Some((w, case)))
    }

    pub fn route(&self, s: VertexId, t: VertexId) -> Result<RouteTrace, RouteError> {
        let mut kinds = Vec::new();
        let mut h = self.packet_with(s, t, &mut kinds)?;
        let mut trace = RouteTrace {
            vertices: vec![s],
            hops: Vec::new(),
            length: 0.0,
            consults: 0,
            kinds: Vec::new(),
            legs: vec![(0, h.plane, h.pseudo)],
        };
        let mut v = s;
        loop {
            let before = kinds.len();
            let step = self.step_with(v, &mut h, &mut kinds)?;
            if kinds.len() != before && step.is_some() {
                trace.legs.push((trace.vertices.len() - 1, h.plane, h.pseudo));
            }
            let Some((w, case)) = step else { break };
            debug_assert!(self.p.is_edge(v, w), "hop {v}->{w} is not an edge");
            let length = self.len(v, w);
            trace.hops.push(Hop { from: v, to: w, case, length });
            trace.length += length;
            trace.vertices.push(w);
            v = w;
        }
        trace.consults = kinds.len();
        trace.kinds = kinds;
        Ok(trace)
    }
}
