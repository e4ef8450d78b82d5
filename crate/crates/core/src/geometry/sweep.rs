//! Lattice cells crossed by a cell rolling 120° about an edge of its
//! substrate.
//!
//! The mover starts at `2·from`, rotates rigidly about the line through the
//! edge shared by substrate faces `from` and `to`, and ends at `2·to`. The
//! motion is sampled at a fixed angular step; a lattice cell blocks the roll
//! if its overlap volume with the mover exceeds a threshold at any sample.
//! Grazing contact (zero-volume overlap) does not block.

use std::sync::OnceLock;

use rayon::prelude::*;

use super::clip::{convex_intersection_volume, ConvexPolyhedron};
use super::{add, face_vertices, norm, normalize, scale, sub, GeometryError, Rotation3, Vec3, CANONICAL_VERTICES};
use crate::lattice::{lattice_distance, FaceDir, LatticePos};

/// Sampling parameters for the swept-volume test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    /// Angular sampling step in degrees.
    pub step_deg: f64,
    /// Overlap volume (canonical units³) above which a cell blocks.
    pub overlap_eps: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams { step_deg: 1.0, overlap_eps: 1e-9 }
    }
}

const PIVOT_ANGLE_DEG: f64 = 120.0;

/// Candidate offsets are searched out to this lattice distance from the
/// substrate; results are asserted to stay well inside it.
const SEARCH_RADIUS: i32 = 3;

fn int_vec(v: [i32; 3]) -> Vec3 {
    [v[0] as f64, v[1] as f64, v[2] as f64]
}

/// Endpoints of the edge shared by substrate faces `a` and `b`.
fn shared_edge(a: FaceDir, b: FaceDir) -> Result<(Vec3, Vec3), GeometryError> {
    if a.dot(b) != 1 {
        return Err(GeometryError::NotEdgeAdjacent(a, b));
    }
    let fb = face_vertices(b);
    let common: Vec<usize> = face_vertices(a).into_iter().filter(|v| fb.contains(v)).collect();
    debug_assert_eq!(common.len(), 2);
    Ok((int_vec(CANONICAL_VERTICES[common[0]]), int_vec(CANONICAL_VERTICES[common[1]])))
}

/// The rigid motion of the mover at each sampled angle, as
/// `(pivot point, rotation)`; position `x ↦ pivot + R·(x − pivot)`.
pub(crate) fn roll_samples(from: FaceDir, to: FaceDir, step_deg: f64) -> Result<(Vec3, Vec<Rotation3>), GeometryError> {
    let (e0, e1) = shared_edge(from, to)?;
    let axis = normalize(sub(e1, e0));
    let start = sub(scale(from.as_f64(), 2.0), e0);
    let end = sub(scale(to.as_f64(), 2.0), e0);
    // Pick the rotation sense that carries the mover onto the destination.
    let sense = [1.0, -1.0]
        .into_iter()
        .find(|s| {
            let r = Rotation3::from_axis_angle(axis, s * PIVOT_ANGLE_DEG).unwrap();
            norm(sub(r.apply(start), end)) < 1e-9
        })
        .expect("one rotation sense reaches the destination");
    let steps = (PIVOT_ANGLE_DEG / step_deg).ceil() as usize;
    let rots = (0..=steps)
        .map(|k| {
            let angle = PIVOT_ANGLE_DEG * k as f64 / steps as f64;
            Rotation3::from_axis_angle(axis, sense * angle).unwrap()
        })
        .collect();
    Ok((e0, rots))
}

/// Computes the blocker set for one `(from, to)` pair without caching.
pub fn compute_swept_cells(from: FaceDir, to: FaceDir, params: SweepParams) -> Result<Vec<LatticePos>, GeometryError> {
    let (pivot, rots) = roll_samples(from, to, params.step_deg)?;
    let mover_center = scale(from.as_f64(), 2.0);
    let poses: Vec<(Vec3, ConvexPolyhedron)> = rots
        .iter()
        .map(|r| {
            let place = |v: Vec3| add(pivot, r.apply(sub(add(v, mover_center), pivot)));
            (place([0.0; 3]), ConvexPolyhedron::cell_with(place))
        })
        .collect();

    let (from_pos, to_pos) = (from.as_pos(), to.as_pos());
    let mut blocked = Vec::new();
    for x in -SEARCH_RADIUS..=SEARCH_RADIUS {
        for y in -SEARCH_RADIUS..=SEARCH_RADIUS {
            for z in -SEARCH_RADIUS..=SEARCH_RADIUS {
                let Ok(q) = LatticePos::new(x, y, z) else { continue };
                if q == LatticePos::ORIGIN || q == from_pos || q == to_pos {
                    continue;
                }
                if lattice_distance(LatticePos::ORIGIN, q) > SEARCH_RADIUS as u32 {
                    continue;
                }
                let qc = q.center();
                let mut other: Option<ConvexPolyhedron> = None;
                let hit = poses.iter().any(|(c, poly)| {
                    // Circumradius is 2, so centres 4 apart cannot overlap.
                    if norm(sub(*c, qc)) >= 4.0 {
                        return false;
                    }
                    let other = other.get_or_insert_with(|| ConvexPolyhedron::cell_at(qc));
                    convex_intersection_volume(poly, other) > params.overlap_eps
                });
                if hit {
                    blocked.push(q);
                }
            }
        }
    }
    blocked.sort();
    Ok(blocked)
}

/// Blocker sets for all 48 ordered pairs of edge-adjacent faces, relative to
/// the substrate at the origin.
#[derive(Debug)]
pub struct BlockerTable {
    entries: Vec<Vec<LatticePos>>,
}

impl BlockerTable {
    pub fn compute(params: SweepParams) -> BlockerTable {
        let pairs: Vec<(FaceDir, FaceDir)> = FaceDir::all()
            .flat_map(|a| FaceDir::all().map(move |b| (a, b)))
            .collect();
        let entries = pairs
            .par_iter()
            .map(|&(a, b)| if a.dot(b) == 1 { compute_swept_cells(a, b, params).unwrap() } else { Vec::new() })
            .collect();
        BlockerTable { entries }
    }

    pub fn get(&self, from: FaceDir, to: FaceDir) -> Result<&[LatticePos], GeometryError> {
        if from.dot(to) != 1 {
            return Err(GeometryError::NotEdgeAdjacent(from, to));
        }
        Ok(&self.entries[from.index() * 12 + to.index()])
    }
}

/// The shared table at default parameters, computed on first use.
pub fn blocker_table() -> &'static BlockerTable {
    static TABLE: OnceLock<BlockerTable> = OnceLock::new();
    TABLE.get_or_init(|| BlockerTable::compute(SweepParams::default()))
}

/// Offsets, relative to the substrate, of cells that obstruct a roll of the
/// mover from `from` to `to`.
pub fn swept_cells(from: FaceDir, to: FaceDir) -> Result<&'static [LatticePos], GeometryError> {
    blocker_table().get(from, to)
}
