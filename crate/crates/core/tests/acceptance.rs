//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyroute::compact_routing::{path_length, tz_preprocess, LandmarkSelection};
use polyroute::geometry::{corner_angle, is_degenerate, Plane, Tolerance, Vec3};
use polyroute::oracle::{edge_distances, oracle_slack, sample_pairs, stretch_sweep, SubdivisionGraph};
use polyroute::pipeline::{preprocess, Config, Preprocessed};
use polyroute::polytope::{TriangulatedPolytope, VertexId};
use polyroute::router::Router;
use polyroute::shapes;
use polyroute::tables::{
    deserialize, serialize, EntryKey, EntryKind, MeshData, NodeLabel, PseudoDest, RelayInfo, RoutingEntry, RoutingTable,
    TableMeta, TableSet,
};

// Pinned tolerances and sizes.
const ROUTE_SIZES: [usize; 3] = [50, 100, 300];
const ROUTE_EPS: [f64; 2] = [0.2, 0.4];
const ROUTE_PAIRS: usize = 1000;
const HOP_MULT: usize = 4;
const LOCALITY_SECONDS: f64 = 120.0;
const STRETCH_SECONDS: f64 = 600.0;
const ORACLE_M: usize = 16;
const ORACLE_FINE_M: usize = 64;
const SLACK_PAIRS: usize = 24;
const THETA_TOL: f64 = 1e-9;
const TZ_MAX_NODES: usize = 200;
const TZ_STRETCH: f64 = 3.0;
const TZ_TOL: f64 = 1e-9;
const TRIANGLES: usize = 10_000;
const TRIANGLE_TOL: f64 = 1e-9;
const PATCH_PAIRS: usize = 500;
// relative rounding allowance on |p′q′| ≤ d̂; equality holds for pairs on the representative face
const FLATNESS_TOL: f64 = 1e-12;
const HEADROOM: f64 = 2.0;
const SCALING_N: [usize; 2] = [100, 200];
const SCALING_EPS: [f64; 2] = [0.3, 0.4];
const TREND_N: [usize; 3] = [100, 200, 400];
const TREND_EPS: f64 = 0.3;
const TREND_MAX_EXPONENT: f64 = 3.0;
const TABLE_SETS: usize = 100;
const CORRUPTIONS_PER_SET: usize = 10;
const SUBDIV_LEVELS: [usize; 4] = [0, 4, 16, 64];
const SANDWICH_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Mesh {
    n: usize,
    p: TriangulatedPolytope,
    pre: BTreeMap<u64, Preprocessed>,
}

fn eps_key(eps: f64) -> u64 {
    (eps * 1000.0).round() as u64
}

fn meshes() -> Vec<Mesh> {
    ROUTE_SIZES
        .iter()
        .map(|&n| {
            let p = shapes::sphere_hull(n, 0).expect("hull");
            let pre = ROUTE_EPS.iter().map(|&e| (eps_key(e), preprocess(&p, &Config::new(e)).expect("preprocess"))).collect();
            Mesh { n, p, pre }
        })
        .collect()
}

/// Criteria 1 to 3 share the routing sweep.
fn routing_sweep(ms: &[Mesh]) -> [Outcome; 3] {
    let mut routed = 0;
    let mut off_edge = 0;
    let mut unfinished = 0;
    let mut max_hops_frac: f64 = 0.0;
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    let mut route_secs = 0.0;
    let mut stretch_secs = 0.0;
    let mut mus = Vec::new();
    for m in ms {
        let pairs = sample_pairs(m.n, ROUTE_PAIRS, m.n as u64);
        let t0 = Instant::now();
        let coarse = SubdivisionGraph::new(&m.p, ORACLE_M);
        let fine = SubdivisionGraph::new(&m.p, ORACLE_FINE_M);
        let mu = oracle_slack(&coarse, &fine, &pairs[..SLACK_PAIRS]);
        drop(fine);
        mus.push(mu);
        stretch_secs += t0.elapsed().as_secs_f64();
        for pre in m.pre.values() {
            let r = Router::new(&m.p, &pre.tables, HOP_MULT);
            let t0 = Instant::now();
            for &(s, t) in &pairs {
                routed += 1;
                match r.route(s, t) {
                    Ok(tr) => {
                        off_edge += tr.vertices.windows(2).filter(|w| !m.p.is_edge(w[0], w[1])).count();
                        if tr.vertices.last() != Some(&t) || tr.hops.len() > HOP_MULT * m.n {
                            unfinished += 1;
                        }
                        max_hops_frac = max_hops_frac.max(tr.hops.len() as f64 / m.n as f64);
                    }
                    Err(_) => unfinished += 1,
                }
            }
            route_secs += t0.elapsed().as_secs_f64();
            let t0 = Instant::now();
            let st = &pre.stats;
            let rep = stretch_sweep(&r, &coarse, &pairs, st.eps, st.theta_m, st.d_hat, mu);
            violations += rep.violations();
            max_ratio = max_ratio.max(rep.max_ratio());
            stretch_secs += t0.elapsed().as_secs_f64();
        }
    }
    [
        outcome(
            off_edge == 0 && route_secs < LOCALITY_SECONDS,
            format!("{routed} routes, {off_edge} non-edge moves, routing took {route_secs:.1}s (limit {LOCALITY_SECONDS}s)"),
        ),
        outcome(
            unfinished == 0,
            format!("{unfinished} of {routed} routes missed t or exceeded {HOP_MULT}n hops; max hops/n = {max_hops_frac:.3}"),
        ),
        outcome(
            violations == 0 && stretch_secs < STRETCH_SECONDS,
            format!(
                "{violations} of {routed} exceed (8+ε)/sin θ_m·(D̂+d̂)(1+μ); max route/d̂ {max_ratio:.3}; μ per mesh {:?}; {stretch_secs:.1}s (limit {STRETCH_SECONDS}s)",
                mus.iter().map(|m| format!("{m:.2e}")).collect::<Vec<_>>()
            ),
        ),
    ]
}

fn theta_spanner(ms: &[Mesh]) -> Outcome {
    let mut pairs = 0usize;
    let mut bad = 0usize;
    let mut worst: f64 = 0.0;
    for m in ms {
        for pre in m.pre.values() {
            let g = &pre.spanner;
            let eps = g.eps;
            let bound = 1.0 / (eps.cos() - eps.sin()) + THETA_TOL;
            for f in 0..g.face_nodes.len() as u32 {
                let fg = g.face_graph(f);
                let nodes = &g.face_nodes[f as usize];
                for (i, &u) in nodes.iter().enumerate() {
                    let sp = fg.dijkstra(u);
                    let lu = g.nodes[u as usize].local_on(f).unwrap();
                    for &v in &nodes[i + 1..] {
                        let d = lu.dist(g.nodes[v as usize].local_on(f).unwrap());
                        if d == 0.0 {
                            continue;
                        }
                        pairs += 1;
                        let r = sp.dist[v as usize] / d;
                        worst = worst.max(r);
                        if !(r <= bound) {
                            bad += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(bad == 0 && pairs > 0, format!("{pairs} same-face pairs, {bad} over 1/(cos ε − sin ε); max ratio {worst:.4}"))
}

fn compact_stretch() -> Outcome {
    let mut cases: Vec<(String, TriangulatedPolytope, f64)> = vec![
        ("tetra".into(), shapes::tetrahedron(), 0.2),
        ("cube".into(), shapes::cube(), 0.3),
        ("octa".into(), shapes::octahedron(), 0.3),
    ];
    for (n, e) in [(20, 0.4), (30, 0.5), (40, 0.5), (30, 0.4)] {
        cases.push((format!("sphere{n}@{e}"), shapes::sphere_hull(n, 5).unwrap(), e));
    }
    let mut pairs = 0usize;
    let mut bad = 0usize;
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::new();
    for (name, p, eps) in &cases {
        let pre = preprocess(p, &Config::new(*eps)).unwrap();
        let g = pre.spanner.to_graph();
        if g.node_count() > TZ_MAX_NODES {
            continue;
        }
        sizes.push(format!("{name}:{}", g.node_count()));
        let scheme = tz_preprocess(&g, LandmarkSelection::Degree).unwrap();
        for u in 0..g.node_count() as u32 {
            let sp = g.dijkstra(u);
            for v in 0..g.node_count() as u32 {
                if u == v {
                    continue;
                }
                pairs += 1;
                let len = scheme.walk(u, v).map(|w| path_length(&g, &w)).unwrap_or(f64::INFINITY);
                let r = len / sp.dist[v as usize];
                worst = worst.max(r);
                if !(len <= TZ_STRETCH * sp.dist[v as usize] + TZ_TOL) {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0 && pairs > 0, format!("{pairs} node pairs on G′ sizes [{}], {bad} over stretch {TZ_STRETCH}; max {worst:.4}", sizes.join(" ")))
}

fn two_legs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut done = 0;
    let mut bad = 0;
    let mut worst: f64 = 0.0;
    let pt = |rng: &mut ChaCha8Rng| Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    while done < TRIANGLES {
        let f = [pt(&mut rng), pt(&mut rng), pt(&mut rng)];
        if is_degenerate(&f, Tolerance::new(1e-6, 1e-6)) {
            continue;
        }
        done += 1;
        let [a, b, c] = f;
        let beta = corner_angle(&f, 1, Tolerance::default()).unwrap();
        let lhs = a.dist(b) + b.dist(c);
        let rhs = a.dist(c) / (beta / 2.0).sin();
        worst = worst.max(lhs / rhs);
        if !(lhs <= rhs + TRIANGLE_TOL) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{done} triangles, {bad} with |AB|+|BC| > |AC|/sin(B/2); max ratio {worst:.6}"))
}

fn patch_flatness(ms: &[Mesh]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let configs: Vec<(&Mesh, &Preprocessed)> = ms.iter().filter(|m| m.n >= 100).flat_map(|m| m.pre.values().map(move |pre| (m, pre))).collect();
    let per = PATCH_PAIRS.div_ceil(configs.len());
    let mut total = 0;
    let mut above = 0;
    let mut below = 0;
    let mut tightest: f64 = f64::INFINITY;
    let mut excess: f64 = f64::NEG_INFINITY;
    for (m, pre) in configs {
        let usable: Vec<_> = pre.dec.patches.iter().filter(|pa| pa.vertices.len() >= 2).collect();
        let mut pairs = Vec::new();
        let mut owner = Vec::new();
        while pairs.len() < per.min(PATCH_PAIRS - total) {
            let pa = usable[rng.gen_range(0..usable.len())];
            let a = pa.vertices[rng.gen_range(0..pa.vertices.len())];
            let b = pa.vertices[rng.gen_range(0..pa.vertices.len())];
            if a != b {
                pairs.push((a, b));
                owner.push(pa);
            }
        }
        let coarse = SubdivisionGraph::new(&m.p, ORACLE_M);
        let fine = SubdivisionGraph::new(&m.p, ORACLE_FINE_M);
        let mu = oracle_slack(&coarse, &fine, &pairs[..SLACK_PAIRS.min(pairs.len())]);
        let delta = pre.stats.delta;
        for (&(a, b), pa) in pairs.iter().zip(&owner) {
            total += 1;
            let dh = coarse.distance(a, b);
            let proj = pa.frame.to_local(m.p.vertex(a)).dist(pa.frame.to_local(m.p.vertex(b)));
            let low = dh / (1.0 + 2.0 * delta) * (1.0 - mu);
            excess = excess.max(proj / dh - 1.0);
            if proj > dh * (1.0 + FLATNESS_TOL) {
                above += 1;
            }
            if proj < low {
                below += 1;
            }
            tightest = tightest.min(proj / low);
        }
    }
    outcome(
        above == 0 && below == 0 && total == PATCH_PAIRS,
        format!("{total} same-patch pairs, {above} with |p′q′| > d̂, {below} with |p′q′| < d̂/(1+2δ)(1−μ); min |p′q′|/lower {tightest:.3}, max |p′q′|/d̂ − 1 {excess:.1e}"),
    )
}

struct Sizes {
    n: usize,
    eps: f64,
    patches: f64,
    reps: f64,
    entries_per_vertex: f64,
}

fn sizes(seed: u64) -> Vec<Sizes> {
    let mut out = Vec::new();
    for &n in &SCALING_N {
        let p = shapes::sphere_hull(n, seed).unwrap();
        for &eps in &SCALING_EPS {
            let pre = preprocess(&p, &Config::new(eps)).unwrap();
            out.push(Sizes {
                n,
                eps,
                patches: pre.stats.patches as f64,
                reps: pre.stats.reps as f64,
                entries_per_vertex: pre.stats.entries as f64 / n as f64,
            });
        }
    }
    out
}

fn scaling() -> [Outcome; 2] {
    let laws: [(&str, fn(&Sizes) -> f64, fn(&Sizes) -> f64); 3] = [
        ("patches ≤ c/δ²", |s| s.patches, |s| 1.0 / (s.eps * s.eps)),
        ("|R| ≤ c·min(n, ε⁻³)", |s| s.reps, |s| (s.n as f64).min(s.eps.powi(-3))),
        ("entries/vertex ≤ c·min(n, ε^-1.5)", |s| s.entries_per_vertex, |s| (s.n as f64).min(s.eps.powf(-1.5))),
    ];
    let fit = sizes(0);
    let consts: Vec<f64> = laws.iter().map(|(_, y, x)| fit.iter().map(|s| y(s) / x(s)).fold(0.0, f64::max)).collect();
    let mut worst = vec![0.0f64; laws.len()];
    for seed in 1..=5 {
        for s in sizes(seed) {
            for (k, (_, y, x)) in laws.iter().enumerate() {
                worst[k] = worst[k].max(y(&s) / (consts[k] * x(&s)));
            }
        }
    }
    let pass = worst.iter().all(|&w| w <= HEADROOM);
    let detail = laws
        .iter()
        .zip(&consts)
        .zip(&worst)
        .map(|(((name, _, _), c), w)| format!("{name}: c={c:.3}, worst seed use {w:.2}×c"))
        .collect::<Vec<_>>()
        .join("; ");

    let mut secs = Vec::new();
    for &n in &TREND_N {
        let p = shapes::sphere_hull(n, 0).unwrap();
        let t0 = Instant::now();
        preprocess(&p, &Config::new(TREND_EPS)).unwrap();
        secs.push(t0.elapsed().as_secs_f64());
    }
    let ratio = TREND_N[2] as f64 / TREND_N[0] as f64;
    let exponent = (secs[2] / secs[0]).ln() / ratio.ln();
    [
        outcome(pass, format!("{detail} (headroom {HEADROOM}×)")),
        outcome(
            exponent < TREND_MAX_EXPONENT,
            format!("preprocessing at n={TREND_N:?}: {:?}s, growth exponent {exponent:.2} (limit {TREND_MAX_EXPONENT})", secs.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>()),
        ),
    ]
}

fn random_set(rng: &mut ChaCha8Rng) -> TableSet {
    let v3 = |rng: &mut ChaCha8Rng| Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    let plane = |rng: &mut ChaCha8Rng| loop {
        if let Ok(h) = Plane::new(v3(rng), v3(rng), v3(rng)) {
            return h;
        }
    };
    let pseudo = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.5) {
            PseudoDest::Vertex(rng.gen())
        } else {
            PseudoDest::Relay { node: rng.gen(), x: rng.gen(), y: rng.gen() }
        }
    };
    let kinds = [EntryKind::ToMyRep, EntryKind::RepToMember, EntryKind::RepToRepSamePatch, EntryKind::Global, EntryKind::MarkedRelay];
    let n = rng.gen_range(0..6);
    let tables = (0..n)
        .map(|v| {
            let mut entries: Vec<RoutingEntry> = (0..rng.gen_range(0..20))
                .map(|_| {
                    let key = match rng.gen_range(0..4) {
                        0 => EntryKey::Vertex(rng.gen()),
                        1 => EntryKey::Landmark(rng.gen()),
                        2 => EntryKey::RelayVertex { node: rng.gen(), vertex: rng.gen() },
                        _ => EntryKey::RelayLandmark { node: rng.gen(), landmark: rng.gen() },
                    };
                    RoutingEntry { key, kind: kinds[rng.gen_range(0..kinds.len())], plane: plane(rng), next: pseudo(rng) }
                })
                .collect();
            entries.sort_by_key(|e| e.key);
            entries.dedup_by_key(|e| e.key);
            let mut relays: Vec<RelayInfo> = (0..rng.gen_range(0..4))
                .map(|_| RelayInfo { node: rng.gen(), x: rng.gen(), y: rng.gen(), point: v3(rng), landmark: rng.gen(), faces: [rng.gen(), rng.gen()] })
                .collect();
            relays.sort_by_key(|r| r.node);
            relays.dedup_by_key(|r| r.node);
            RoutingTable {
                vertex: v,
                label: NodeLabel { vertex: v, rep: rng.gen(), node: rng.gen(), landmark: rng.gen(), patch: rng.gen(), cell: rng.gen() },
                entries,
                neighbour_map: (0..rng.gen_range(0..8)).map(|_| (rng.gen(), rng.gen_bool(0.5).then(|| rng.gen()))).collect(),
                opposite_face_map: (0..rng.gen_range(0..8)).map(|_| (rng.gen(), rng.gen())).collect(),
                relays,
            }
        })
        .collect();
    let mesh = rng.gen_bool(0.5).then(|| MeshData {
        vertices: (0..rng.gen_range(0..10)).map(|_| v3(rng)).collect(),
        faces: (0..rng.gen_range(0..10)).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect(),
    });
    let meta = rng.gen_bool(0.5).then(|| TableMeta {
        eps: rng.gen(),
        delta: rng.gen(),
        seed: rng.gen(),
        theta_m: rng.gen(),
        d_hat: rng.gen(),
        patches: rng.gen(),
        reps: rng.gen(),
        spanner_nodes: rng.gen(),
        spanner_edges: rng.gen(),
        landmarks: rng.gen(),
    });
    TableSet { tables, mesh, meta }
}

fn serialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sets: Vec<TableSet> = Vec::new();
    for (i, p) in [shapes::tetrahedron(), shapes::cube(), shapes::octahedron()].into_iter().enumerate() {
        sets.push(preprocess(&p, &Config::new(0.3 + 0.1 * i as f64)).unwrap().tables);
    }
    for seed in 0..5 {
        let p = shapes::sphere_hull(20 + 10 * seed as usize, seed).unwrap();
        sets.push(preprocess(&p, &Config::new(0.4)).unwrap().tables);
    }
    while sets.len() < TABLE_SETS {
        sets.push(random_set(&mut rng));
    }
    let mut mismatched = 0;
    let mut accepted = 0;
    let mut corruptions = 0;
    for set in &sets {
        let bytes = serialize(set);
        match deserialize(&bytes) {
            Ok(back) if back == *set && serialize(&back) == bytes => {}
            _ => mismatched += 1,
        }
        for k in 0..CORRUPTIONS_PER_SET {
            let mut bad = bytes.clone();
            if k % 2 == 0 {
                let i = rng.gen_range(0..bad.len());
                bad[i] ^= 1 << rng.gen_range(0..8);
            } else {
                bad.truncate(rng.gen_range(0..bad.len()));
            }
            corruptions += 1;
            if deserialize(&bad).is_ok() {
                accepted += 1;
            }
        }
    }
    outcome(
        mismatched == 0 && accepted == 0,
        format!("{} sets, {mismatched} not bit-exact; {corruptions} corrupted streams, {accepted} accepted", sets.len()),
    )
}

fn oracle_sandwich() -> Outcome {
    let cases = [shapes::cube(), shapes::sphere_hull(50, 2).unwrap(), shapes::sphere_hull(100, 3).unwrap()];
    let mut checked = 0;
    let mut sandwich = 0;
    let mut monotone = 0;
    for p in &cases {
        let n = p.vertex_count();
        let pairs = sample_pairs(n, 40, n as u64);
        let graphs: Vec<_> = SUBDIV_LEVELS.iter().map(|&m| SubdivisionGraph::new(p, m)).collect();
        let mut by_source: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for &(s, t) in &pairs {
            by_source.entry(s).or_default().push(t);
        }
        for (s, ts) in by_source {
            let edge = edge_distances(p, s);
            let ds: Vec<Vec<f64>> = graphs.iter().map(|g| g.distances_from(s, &ts)).collect();
            for &t in &ts {
                checked += 1;
                let e = p.vertex(s).dist(p.vertex(t));
                let col: Vec<f64> = ds.iter().map(|d| d[t as usize]).collect();
                if col.iter().any(|&d| d < e - SANDWICH_TOL || d > edge[t as usize] + SANDWICH_TOL) {
                    sandwich += 1;
                }
                if col.windows(2).any(|w| w[1] > w[0]) {
                    monotone += 1;
                }
            }
        }
    }
    outcome(
        sandwich == 0 && monotone == 0,
        format!("{checked} pairs at m={SUBDIV_LEVELS:?}: {sandwich} outside |st| ≤ d ≤ edge distance, {monotone} not monotone in m"),
    )
}

fn main() {
    let start = Instant::now();
    let ms = meshes();
    let [locality, termination, stretch] = routing_sweep(&ms);
    let [laws, trend] = scaling();
    let results = [
        ("C1 locality", locality),
        ("C2 termination", termination),
        ("C3 stretch bound", stretch),
        ("C4 theta-graph stretch", theta_spanner(&ms)),
        ("C5 compact routing stretch", compact_stretch()),
        ("C6 two-leg detour", two_legs()),
        ("C7 patch flatness", patch_flatness(&ms)),
        ("C8 scaling laws", laws),
        ("C8 preprocessing trend", trend),
        ("C9 serialization", serialization()),
        ("C10 oracle sandwich", oracle_sandwich()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} passed in {:.1}s", results.len() - failed, results.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
