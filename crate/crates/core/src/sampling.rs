//! Grid sampling on the sketch faces and representative selection.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::geometry::{Point2, Vec2};
use crate::patching::{PatchDecomposition, Projection};
use crate::polytope::VertexId;

/// Square grid over the bounding box of one patch's projected vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub patch: usize,
    pub min: Point2,
    pub cell_w: f64,
    pub cell_h: f64,
    pub cols: usize,
    pub rows: usize,
}

/// Cells per side for a given ε.
pub fn grid_side(eps: f64) -> usize {
    ((1.0 / eps).sqrt() - 1e-12).ceil().max(1.0) as usize
}

/// Number of cells of the strip used when the bounding box is degenerate.
pub fn strip_len(eps: f64) -> usize {
    (1.0 / eps - 1e-12).ceil().max(1.0) as usize
}

fn axis_index(x: f64, lo: f64, w: f64, n: usize) -> usize {
    if n <= 1 || w <= 0.0 {
        return 0;
    }
    // boundary points go to the lower cell
    let k = ((x - lo) / w).ceil() as i64 - 1;
    k.clamp(0, n as i64 - 1) as usize
}

impl Grid {
    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    pub fn cell_of(&self, q: Point2) -> usize {
        let c = axis_index(q.x, self.min.x, self.cell_w, self.cols);
        let r = axis_index(q.y, self.min.y, self.cell_h, self.rows);
        r * self.cols + c
    }
}

pub fn build_grid(projection: &Projection, eps: f64, snap: f64) -> Grid {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(_, q) in &projection.points {
        lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    if projection.points.is_empty() {
        lo = Vec2::new(0.0, 0.0);
        hi = lo;
    }
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let side = grid_side(eps);
    let (cols, rows) = if w <= snap && h <= snap {
        (1, 1)
    } else if h <= snap {
        (strip_len(eps), 1)
    } else if w <= snap {
        (1, strip_len(eps))
    } else {
        (side, side)
    };
    Grid { patch: projection.patch, min: lo, cell_w: w / cols as f64, cell_h: h / rows as f64, cols, rows }
}

/// Representative of every vertex, chosen per (home patch, grid cell) as
/// the lowest vertex index.
#[derive(Debug, Clone, Serialize)]
pub struct RepresentativeAssignment {
    /// Sorted.
    pub reps: Vec<VertexId>,
    pub rep_of: Vec<VertexId>,
    /// (patch, cell) of each vertex.
    pub cell_of: Vec<(u32, u32)>,
    /// Projected point of each vertex on its home patch plane.
    pub point_of: Vec<Point2>,
    /// Representatives of each patch, sorted.
    pub patch_reps: Vec<Vec<VertexId>>,
}

impl RepresentativeAssignment {
    pub fn is_rep(&self, v: VertexId) -> bool {
        self.rep_of[v as usize] == v
    }

    pub fn patch_of(&self, v: VertexId) -> usize {
        self.cell_of[v as usize].0 as usize
    }

    /// Vertices represented by `r`, excluding `r` itself.
    pub fn members(&self, r: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.rep_of.iter().enumerate().filter(move |&(v, &x)| x == r && v as VertexId != r).map(|(v, _)| v as VertexId)
    }
}

pub fn select_representatives(
    dec: &PatchDecomposition,
    projections: &[Projection],
    grids: &[Grid],
) -> RepresentativeAssignment {
    let n = dec.home_patch.len();
    let mut rep_of = vec![0; n];
    let mut cell_of = vec![(0, 0); n];
    let mut point_of = vec![Vec2::new(0.0, 0.0); n];
    let mut patch_reps = vec![Vec::new(); dec.patches.len()];
    for pa in &dec.patches {
        let pr = &projections[pa.id];
        let grid = &grids[pa.id];
        let mut best: BTreeMap<usize, VertexId> = BTreeMap::new();
        for &v in &pa.home {
            let q = pr.get(v).expect("home vertex is projected");
            let c = grid.cell_of(q);
            cell_of[v as usize] = (pa.id as u32, c as u32);
            point_of[v as usize] = q;
            best.entry(c).and_modify(|r| *r = (*r).min(v)).or_insert(v);
        }
        for &v in &pa.home {
            rep_of[v as usize] = best[&(cell_of[v as usize].1 as usize)];
        }
        let mut reps: Vec<VertexId> = best.into_values().collect();
        reps.sort_unstable();
        patch_reps[pa.id] = reps;
    }
    let mut reps: Vec<VertexId> = patch_reps.iter().flatten().copied().collect();
    reps.sort_unstable();
    RepresentativeAssignment { reps, rep_of, cell_of, point_of, patch_reps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patching::{compute_patches, project_all};
    use crate::shapes;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn proj(points: Vec<Point2>) -> Projection {
        Projection { patch: 0, points: points.into_iter().enumerate().map(|(i, q)| (i as VertexId, q)).collect() }
    }

    #[test]
    fn grid_sizes() {
        let pr = proj(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)]);
        let g = build_grid(&pr, 1.0, 1e-12);
        assert_eq!((g.cols, g.rows), (1, 1));
        let g = build_grid(&pr, 0.25, 1e-12);
        assert_eq!((g.cols, g.rows), (2, 2));
        let g = build_grid(&pr, 0.1, 1e-12);
        assert_eq!((g.cols, g.rows), (4, 4));
        assert!(g.cell_count() >= 10);
    }

    #[test]
    fn boundary_ties_go_low() {
        let pr = proj(vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0)]);
        let g = build_grid(&pr, 0.25, 1e-12);
        assert_eq!(g.cell_of(Vec2::new(1.0, 0.5)), 0);
        assert_eq!(g.cell_of(Vec2::new(1.0 + 1e-9, 0.5)), 1);
        assert_eq!(g.cell_of(Vec2::new(0.0, 0.0)), 0);
        assert_eq!(g.cell_of(Vec2::new(2.0, 2.0)), 3);
    }

    #[test]
    fn degenerate_box_is_strip() {
        let pr = proj(vec![Vec2::new(0.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(1.0, 0.0)]);
        let g = build_grid(&pr, 0.1, 1e-12);
        assert_eq!((g.cols, g.rows), (10, 1));
        let pr = proj(vec![Vec2::new(1.0, 1.0)]);
        assert_eq!(build_grid(&pr, 0.1, 1e-12).cell_count(), 1);
    }

    #[test]
    fn random_points_each_in_one_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<Point2> = (0..100).map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..5.0))).collect();
        let pr = proj(pts.clone());
        let g = build_grid(&pr, 0.1, 1e-12);
        assert_eq!((g.cols, g.rows), (4, 4));
        for q in pts {
            let c = g.cell_of(q);
            let (col, row) = (c % g.cols, c / g.cols);
            let x0 = g.min.x + col as f64 * g.cell_w;
            let y0 = g.min.y + row as f64 * g.cell_h;
            assert!(q.x >= x0 - 1e-12 && q.x <= x0 + g.cell_w + 1e-12);
            assert!(q.y >= y0 - 1e-12 && q.y <= y0 + g.cell_h + 1e-12);
        }
    }

    #[test]
    fn lowest_index_wins() {
        let pts = vec![
            Vec2::new(5.0, 5.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(0.1, 0.1),
            Vec2::new(0.2, 0.0),
        ];
        let pr = Projection { patch: 0, points: vec![(3, pts[1]), (7, pts[2]), (12, pts[3]), (20, pts[0])] };
        let g = build_grid(&pr, 0.25, 1e-12);
        // vertices 7, 3, 12 share the lower-left cell
        assert_eq!(g.cell_of(pts[1]), g.cell_of(pts[2]));
        assert_eq!(g.cell_of(pts[1]), g.cell_of(pts[3]));
        let mut best = BTreeMap::new();
        for &(v, q) in &pr.points {
            best.entry(g.cell_of(q)).and_modify(|r: &mut VertexId| *r = (*r).min(v)).or_insert(v);
        }
        assert_eq!(best[&g.cell_of(pts[2])], 3);
        assert_eq!(best.len(), 2);
    }

    #[test]
    fn assignment_invariants() {
        let p = shapes::sphere_hull(200, 9).unwrap();
        for eps in [0.1, 0.3, 0.6] {
            let dec = compute_patches(&p, eps).unwrap();
            let prs = project_all(&p, &dec);
            let grids: Vec<Grid> = prs.iter().map(|pr| build_grid(pr, eps, 1e-12)).collect();
            let asg = select_representatives(&dec, &prs, &grids);
            for v in 0..p.vertex_count() as VertexId {
                let r = asg.rep_of[v as usize];
                assert_eq!(asg.rep_of[r as usize], r);
                assert_eq!(asg.cell_of[v as usize], asg.cell_of[r as usize]);
                assert_eq!(asg.patch_of(v), dec.home_patch[v as usize] as usize);
            }
            for (i, reps) in asg.patch_reps.iter().enumerate() {
                assert!(reps.len() <= grids[i].cell_count());
            }
            assert!(asg.reps.len() <= p.vertex_count());
        }
    }
}
