//! Preprocessing end to end: patches, sketch, sampling, spanner, compact
//! routing and per-vertex tables.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::compact_routing::{materialize_plane_entries, prune_intra_face, tz_preprocess, LandmarkScheme, LandmarkSelection, RoutingError};
use crate::oracle::estimate_d;
use crate::patching::{build_sketch, compute_patches, project_all, PatchDecomposition, PatchError, Sketch};
use crate::polytope::{PolytopeMetrics, TriangulatedPolytope};
use crate::sampling::{build_grid, select_representatives, RepresentativeAssignment};
use crate::spanner::{build_spanner, SpannerError, SpannerGraph};
use crate::tables::{build_tables, serialize, MeshData, TableMeta, TableSet};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error(transparent)]
    Spanner(#[from] SpannerError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub eps: f64,
    /// Patch width; defaults to `eps`.
    pub delta: Option<f64>,
    /// Seeded random landmarks instead of the degree rule.
    pub landmark_seed: Option<u64>,
    /// Store the mesh inside the table set.
    pub embed_mesh: bool,
}

impl Config {
    pub fn new(eps: f64) -> Self {
        Self { eps, delta: None, landmark_seed: None, embed_mesh: true }
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(self.eps)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(PipelineError::Config(format!("epsilon must lie in (0, 1), got {}", self.eps)));
        }
        let d = self.delta();
        if !(d > 0.0 && d <= std::f64::consts::PI) {
            return Err(PipelineError::Config(format!("delta must lie in (0, π], got {d}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Stats {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub patches: usize,
    pub reps: usize,
    pub spanner_nodes: usize,
    pub spanner_edges: usize,
    pub steiner: usize,
    pub bridges: usize,
    pub landmarks: usize,
    pub pruned: usize,
    pub entries: usize,
    pub words: usize,
    pub table_bytes: usize,
    pub theta_m: f64,
    pub d_hat: f64,
    pub seconds: f64,
}

pub struct Preprocessed {
    pub metrics: PolytopeMetrics,
    pub dec: PatchDecomposition,
    pub sketch: Sketch,
    pub asg: RepresentativeAssignment,
    pub spanner: SpannerGraph,
    pub scheme: LandmarkScheme,
    pub tables: TableSet,
    pub stats: Stats,
}

pub fn preprocess(p: &TriangulatedPolytope, cfg: &Config) -> Result<Preprocessed, PipelineError> {
    cfg.validate()?;
    let start = Instant::now();
    let eps = cfg.eps;
    let metrics = p.metrics();
    let snap = p.tolerance().snap(p.diameter());

    let dec = compute_patches(p, cfg.delta())?;
    let sketch = build_sketch(p, &dec)?;
    let projections = project_all(p, &dec);
    let grids: Vec<_> = projections.iter().map(|pr| build_grid(pr, eps, snap)).collect();
    let asg = select_representatives(&dec, &projections, &grids);
    let spanner = build_spanner(p, &dec, &sketch, &asg, eps)?;

    let how = cfg.landmark_seed.map_or(LandmarkSelection::Degree, LandmarkSelection::Random);
    let mut scheme = tz_preprocess(&spanner.to_graph(), how)?;
    let pruned = prune_intra_face(&mut scheme, &spanner);
    let node_entries = materialize_plane_entries(&scheme, &dec, &spanner);
    let d_hat = estimate_d(p, eps);

    let tables = TableSet {
        tables: build_tables(p, &dec, &asg, &spanner, &scheme, &node_entries),
        mesh: cfg.embed_mesh.then(|| MeshData { vertices: p.vertices().to_vec(), faces: p.faces().to_vec() }),
        meta: Some(TableMeta {
            eps,
            delta: cfg.delta(),
            seed: cfg.landmark_seed.unwrap_or(0),
            theta_m: metrics.theta_m,
            d_hat,
            patches: dec.len() as u32,
            reps: asg.reps.len() as u32,
            spanner_nodes: spanner.node_count() as u32,
            spanner_edges: spanner.edge_count() as u32,
            landmarks: scheme.landmarks.len() as u32,
        }),
    };
    let stats = Stats {
        n: p.vertex_count(),
        eps,
        delta: cfg.delta(),
        patches: dec.len(),
        reps: asg.reps.len(),
        spanner_nodes: spanner.node_count(),
        spanner_edges: spanner.edge_count(),
        steiner: spanner.steiner_count(),
        bridges: spanner.bridges,
        landmarks: scheme.landmarks.len(),
        pruned,
        entries: tables.entry_count(),
        words: tables.words(),
        table_bytes: serialize(&tables).len(),
        theta_m: metrics.theta_m,
        d_hat,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(Preprocessed { metrics, dec, sketch, asg, spanner, scheme, tables, stats })
}
