//! Euclidean geometry of the canonical rhombic dodecahedron.
//!
//! Canonical units: the cell centred at the origin has its 14 vertices at the
//! eight cube corners `(±1, ±1, ±1)` and the six octahedral tips `(±2, 0, 0)`,
//! `(0, ±2, 0)`, `(0, 0, ±2)`. The face with outward normal along face
//! direction `d` lies in the plane `d·x = 2` and is centred at `d`. A lattice
//! site `p` has its cell centred at `2p`, so every vertex of every cell in a
//! structure has integer coordinates.

mod clip;
mod sweep;

pub use clip::{convex_intersection_volume, ConvexPolyhedron};
#[cfg(test)]
pub(crate) use sweep::roll_samples;
pub use sweep::{blocker_table, compute_swept_cells, swept_cells, BlockerTable, SweepParams};

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Configuration, FaceDir, LatticePos};

/// Default tolerance on `z` when collecting ground-support vertices.
pub const DEFAULT_CONTACT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("matrix is not a proper rotation (orthonormality error {0:.3e}, determinant {1:.6})")]
    DegenerateRotation(f64, f64),
    #[error("rotation axis has zero length")]
    ZeroAxis,
    #[error("faces {0} and {1} do not share an edge")]
    NotEdgeAdjacent(FaceDir, FaceDir),
}

pub type Vec3 = [f64; 3];

pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

fn int_vec(v: [i32; 3]) -> Vec3 {
    [v[0] as f64, v[1] as f64, v[2] as f64]
}

/// Cube-type vertices first, then octahedral tips, each in lexicographic order.
pub const CANONICAL_VERTICES: [[i32; 3]; 14] = [
    [-1, -1, -1],
    [-1, -1, 1],
    [-1, 1, -1],
    [-1, 1, 1],
    [1, -1, -1],
    [1, -1, 1],
    [1, 1, -1],
    [1, 1, 1],
    [-2, 0, 0],
    [0, -2, 0],
    [0, 0, -2],
    [0, 0, 2],
    [0, 2, 0],
    [2, 0, 0],
];

fn vertex_index(v: [i32; 3]) -> usize {
    CANONICAL_VERTICES.iter().position(|&w| w == v).expect("canonical vertex")
}

/// The two octahedral tips of face `d` (the long diagonal), lexicographically
/// smaller first.
pub fn long_diagonal(d: FaceDir) -> ([i32; 3], [i32; 3]) {
    let v = d.vector();
    let mut tips = (0..3).filter(|&i| v[i] != 0).map(|i| {
        let mut t = [0; 3];
        t[i] = 2 * v[i];
        t
    });
    let (a, b) = (tips.next().unwrap(), tips.next().unwrap());
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The two cube corners of face `d` (the short diagonal), lexicographically
/// smaller first.
pub fn short_diagonal(d: FaceDir) -> ([i32; 3], [i32; 3]) {
    let v = d.vector();
    let zero = (0..3).find(|&i| v[i] == 0).unwrap();
    let (mut a, mut b) = (v, v);
    a[zero] = -1;
    b[zero] = 1;
    (a, b)
}

/// Vertex indices of face `d`, counter-clockwise seen from outside.
pub fn face_vertices(d: FaceDir) -> [usize; 4] {
    let (o1, o2) = long_diagonal(d);
    let (c1, c2) = short_diagonal(d);
    let ring = [o1, c1, o2, c2];
    let turn = cross(sub(int_vec(ring[1]), int_vec(ring[0])), sub(int_vec(ring[2]), int_vec(ring[1])));
    let ring = if dot(turn, d.as_f64()) > 0.0 { ring } else { [o1, c2, o2, c1] };
    ring.map(vertex_index)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    /// Vertex-index polygons, counter-clockwise seen from outside.
    pub faces: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_points(&self, f: usize) -> impl Iterator<Item = Vec3> + '_ {
        self.faces[f].iter().map(|&i| self.vertices[i])
    }

    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let n = self.faces[f].len() as f64;
        scale(self.face_points(f).fold([0.0; 3], add), 1.0 / n)
    }

    /// Area-weighted normal; its length is twice the polygon area.
    fn face_area_vector(&self, f: usize) -> Vec3 {
        let pts: Vec<_> = self.face_points(f).collect();
        let mut acc = [0.0; 3];
        for i in 1..pts.len() - 1 {
            acc = add(acc, cross(sub(pts[i], pts[0]), sub(pts[i + 1], pts[0])));
        }
        acc
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        normalize(self.face_area_vector(f))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * norm(self.face_area_vector(f))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Enclosed volume by the divergence theorem (fan triangulation).
    pub fn volume(&self) -> f64 {
        let mut v = 0.0;
        for f in 0..self.faces.len() {
            let pts: Vec<_> = self.face_points(f).collect();
            for i in 1..pts.len() - 1 {
                v += dot(pts[0], cross(pts[i], pts[i + 1]));
            }
        }
        v / 6.0
    }

    /// Pairs of faces sharing an edge (two common vertices), each unordered
    /// pair once.
    pub fn adjacent_face_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.faces.len() {
            for b in a + 1..self.faces.len() {
                let shared = self.faces[a].iter().filter(|v| self.faces[b].contains(v)).count();
                if shared == 2 {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// The rhombic dodecahedron centred at the origin. Face `i` is the face with
/// outward normal along `FaceDir` index `i`.
pub fn canonical_cell_mesh() -> Mesh {
    Mesh {
        vertices: CANONICAL_VERTICES.iter().map(|&v| int_vec(v)).collect(),
        faces: FaceDir::all().map(|d| face_vertices(d).to_vec()).collect(),
    }
}

/// Orthonormal right-handed frame on a face: `normal = long_axis × short_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceFrame {
    pub center: Vec3,
    pub normal: Vec3,
    /// Points from the smaller toward the lexicographically larger tip.
    pub long_axis: Vec3,
    pub short_axis: Vec3,
}

impl FaceFrame {
    /// Maps in-face coordinates `(u, v)` (along long, short axes) to cell
    /// coordinates.
    pub fn to_cell(&self, uv: [f64; 2]) -> Vec3 {
        add(self.center, add(scale(self.long_axis, uv[0]), scale(self.short_axis, uv[1])))
    }
}

pub fn face_frame(d: FaceDir) -> FaceFrame {
    let (lo, hi) = long_diagonal(d);
    let long_axis = normalize(sub(int_vec(hi), int_vec(lo)));
    let normal = normalize(d.as_f64());
    FaceFrame { center: d.as_f64(), normal, long_axis, short_axis: cross(normal, long_axis) }
}

/// Half-lengths of the face diagonals: `(√2, 1)` in canonical units.
pub fn face_half_diagonals() -> (f64, f64) {
    (2f64.sqrt(), 1.0)
}

/// Interior dihedral angles (degrees) of every ordered pair of edge-adjacent
/// faces of the canonical mesh.
pub fn dihedral_angles() -> Vec<f64> {
    let mesh = canonical_cell_mesh();
    let mut out = Vec::new();
    for (a, b) in mesh.adjacent_face_pairs() {
        let cos = dot(mesh.face_normal(a), mesh.face_normal(b)).clamp(-1.0, 1.0);
        let interior = 180.0 - cos.acos().to_degrees();
        out.push(interior);
        out.push(interior);
    }
    out
}

/// Interior dihedral angle of the cell, in degrees.
pub fn dihedral_angle() -> f64 {
    let angles = dihedral_angles();
    angles.iter().sum::<f64>() / angles.len() as f64
}

/// Distance from the centre to the nearest face plane.
pub fn inradius() -> f64 {
    let mesh = canonical_cell_mesh();
    (0..mesh.faces.len())
        .map(|f| dot(mesh.face_normal(f), mesh.vertices[mesh.faces[f][0]]).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Fraction of space filled by the spheres inscribed in a tiling of cells.
pub fn packing_density() -> f64 {
    let r = inradius();
    (4.0 / 3.0) * PI * r * r * r / canonical_cell_mesh().volume()
}

/// A real proper rotation of space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3([[f64; 3]; 3]);

impl Rotation3 {
    pub const IDENTITY: Rotation3 = Rotation3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Validates orthonormality and determinant +1 to within 1e-9.
    pub fn new(m: [[f64; 3]; 3]) -> Result<Rotation3, GeometryError> {
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((d - want).abs());
            }
        }
        let det = dot(m[0], cross(m[1], m[2]));
        if !err.is_finite() || err > 1e-9 || (det - 1.0).abs() > 1e-9 {
            return Err(GeometryError::DegenerateRotation(err, det));
        }
        Ok(Rotation3(m))
    }

    /// Right-handed rotation by `degrees` about `axis`.
    pub fn from_axis_angle(axis: Vec3, degrees: f64) -> Result<Rotation3, GeometryError> {
        let n = norm(axis);
        if n.is_nan() || n <= 1e-12 {
            return Err(GeometryError::ZeroAxis);
        }
        let u = scale(axis, 1.0 / n);
        let (s, c) = degrees.to_radians().sin_cos();
        let t = 1.0 - c;
        Ok(Rotation3([
            [c + u[0] * u[0] * t, u[0] * u[1] * t - u[2] * s, u[0] * u[2] * t + u[1] * s],
            [u[1] * u[0] * t + u[2] * s, c + u[1] * u[1] * t, u[1] * u[2] * t - u[0] * s],
            [u[2] * u[0] * t - u[1] * s, u[2] * u[1] * t + u[0] * s, c + u[2] * u[2] * t],
        ]))
    }

    /// Shortest rotation taking direction `from` onto direction `to`.
    pub fn aligning(from: Vec3, to: Vec3) -> Result<Rotation3, GeometryError> {
        if norm(from) < 1e-12 || norm(to) < 1e-12 {
            return Err(GeometryError::ZeroAxis);
        }
        let (a, b) = (normalize(from), normalize(to));
        let c = dot(a, b).clamp(-1.0, 1.0);
        let axis = cross(a, b);
        if norm(axis) < 1e-12 {
            if c > 0.0 {
                return Ok(Rotation3::IDENTITY);
            }
            // Antiparallel: half turn about any perpendicular axis.
            let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            return Rotation3::from_axis_angle(cross(a, helper), 180.0);
        }
        Rotation3::from_axis_angle(axis, c.acos().to_degrees())
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.0
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        [dot(self.0[0], v), dot(self.0[1], v), dot(self.0[2], v)]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Rotation3) -> Rotation3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Rotation3(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContactType {
    Point,
    Edge,
    Face,
}

impl std::fmt::Display for ContactType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ContactType::Point => "Point",
            ContactType::Edge => "Edge",
            ContactType::Face => "Face",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactReport {
    pub overall: ContactType,
    /// `None` for cells that do not touch the ground plane.
    pub per_cell: Vec<(LatticePos, Option<ContactType>)>,
    /// Distinct world-space support points, sorted.
    pub support: Vec<Vec3>,
}

fn affine_dimension(points: &[Vec3], tol: f64) -> usize {
    let Some(&base) = points.first() else { return 0 };
    let mut basis: Vec<Vec3> = Vec::new();
    for &p in &points[1..] {
        let mut v = sub(p, base);
        for b in &basis {
            v = sub(v, scale(*b, dot(v, *b)));
        }
        if norm(v) > tol {
            basis.push(normalize(v));
        }
    }
    basis.len()
}

fn contact_from_dimension(dim: usize) -> ContactType {
    match dim {
        0 => ContactType::Point,
        1 => ContactType::Edge,
        _ => ContactType::Face,
    }
}

pub fn classify_ground_contact(c: &Configuration, world_rot: &Rotation3) -> Result<ContactReport, GeometryError> {
    classify_ground_contact_with(c, world_rot, DEFAULT_CONTACT_EPS)
}

/// Rotates the structure, drops it onto the plane `z = min z`, and classifies
/// what touches the plane by the affine dimension of each cell's support set.
pub fn classify_ground_contact_with(
    c: &Configuration,
    world_rot: &Rotation3,
    eps_z: f64,
) -> Result<ContactReport, GeometryError> {
    if c.is_empty() {
        return Err(GeometryError::EmptyConfiguration);
    }
    let rot = Rotation3::new(world_rot.matrix())?;
    let cells: Vec<(LatticePos, Vec<Vec3>)> = c
        .positions()
        .map(|p| {
            let center = p.center();
            let pts = CANONICAL_VERTICES.iter().map(|&v| rot.apply(add(center, int_vec(v)))).collect();
            (p, pts)
        })
        .collect();
    let min_z = cells.iter().flat_map(|(_, pts)| pts.iter().map(|v| v[2])).fold(f64::INFINITY, f64::min);

    let mut per_cell = Vec::with_capacity(cells.len());
    let mut support: Vec<Vec3> = Vec::new();
    let mut overall: Option<ContactType> = None;
    for (p, pts) in &cells {
        let low: Vec<Vec3> = pts.iter().copied().filter(|v| v[2] - min_z <= eps_z).collect();
        if low.is_empty() {
            per_cell.push((*p, None));
            continue;
        }
        let kind = contact_from_dimension(affine_dimension(&low, 1e-6));
        overall = Some(overall.map_or(kind, |o| o.max(kind)));
        per_cell.push((*p, Some(kind)));
        for v in low {
            if !support.iter().any(|s| norm(sub(*s, v)) < 1e-9) {
                support.push(v);
            }
        }
    }
    support.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ContactReport { overall: overall.expect("the lowest vertex belongs to some cell"), per_cell, support })
}

/// Union of the cells' surfaces with faces shared by two occupied cells
/// removed. Vertices are shared between cells, so the result is a closed
/// surface for connected structures.
pub fn structure_mesh(c: &Configuration) -> Result<Mesh, GeometryError> {
    if c.is_empty() {
        return Err(GeometryError::EmptyConfiguration);
    }
    let mut index: HashMap<[i32; 3], usize> = HashMap::new();
    let mut mesh = Mesh::default();
    for p in c.positions() {
        let center = p.to_array().map(|v| 2 * v);
        for d in FaceDir::all() {
            if c.contains(p.step(d)) {
                continue;
            }
            let face = face_vertices(d)
                .iter()
                .map(|&vi| {
                    let v = CANONICAL_VERTICES[vi];
                    let key = [center[0] + v[0], center[1] + v[1], center[2] + v[2]];
                    *index.entry(key).or_insert_with(|| {
                        mesh.vertices.push(int_vec(key));
                        mesh.vertices.len() - 1
                    })
                })
                .collect();
            mesh.faces.push(face);
        }
    }
    Ok(mesh)
}
