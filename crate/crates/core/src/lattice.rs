//! Integer arithmetic on the face-centred cubic (FCC) lattice.
//!
//! # Coordinates
//!
//! A cell centre is an integer triple `(x, y, z)` with `x + y + z` even. In the
//! Euclidean units used by [`crate::geometry`] the centre sits at `2·(x, y, z)`,
//! so neighbouring cells are `2√2` apart and touch along a full rhombic face.
//!
//! # Face directions
//!
//! The twelve neighbour offsets are the signed permutations of `(±1, ±1, 0)`.
//! They are indexed 0..12 in ascending lexicographic order:
//!
//! | idx | vector     | idx | vector    |
//! |-----|------------|-----|-----------|
//! | 0   | (-1,-1, 0) | 6   | ( 0, 1,-1)|
//! | 1   | (-1, 0,-1) | 7   | ( 0, 1, 1)|
//! | 2   | (-1, 0, 1) | 8   | ( 1,-1, 0)|
//! | 3   | (-1, 1, 0) | 9   | ( 1, 0,-1)|
//! | 4   | ( 0,-1,-1) | 10  | ( 1, 0, 1)|
//! | 5   | ( 0,-1, 1) | 11  | ( 1, 1, 0)|
//!
//! With this order the opposite of direction `i` is `11 - i`. The same
//! indices are used in every file format.
//!
//! # Rotations
//!
//! [`Rotation24`] is the chiral octahedral group: the 24 signed permutation
//! matrices with determinant +1. Index 0 is the identity; indices 1..24 are
//! the remaining matrices in ascending lexicographic order of their row-major
//! entries.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("position ({0}, {1}, {2}) has odd coordinate sum and is not an FCC site")]
    OddParity(i64, i64, i64),
    #[error("duplicate cell position {0}")]
    DuplicatePosition(LatticePos),
    #[error("configuration is empty")]
    EmptyConfiguration,
    #[error("rotation index {0} out of range 0..24")]
    RotationIndex(usize),
    #[error("face direction index {0} out of range 0..12")]
    FaceDirIndex(usize),
    #[error("vector {0:?} is not a face direction")]
    NotAFaceDir([i32; 3]),
}

/// A cell centre on the FCC lattice. Always has an even coordinate sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[i32; 3]", into = "[i32; 3]")]
pub struct LatticePos {
    x: i32,
    y: i32,
    z: i32,
}

impl LatticePos {
    pub const ORIGIN: LatticePos = LatticePos { x: 0, y: 0, z: 0 };

    pub fn new(x: i32, y: i32, z: i32) -> Result<Self, LatticeError> {
        if (x as i64 + y as i64 + z as i64).rem_euclid(2) != 0 {
            return Err(LatticeError::OddParity(x as i64, y as i64, z as i64));
        }
        Ok(LatticePos { x, y, z })
    }

    /// Callers guarantee the parity invariant (sums and differences of
    /// valid positions and face directions).
    pub(crate) const fn from_raw(x: i32, y: i32, z: i32) -> Self {
        LatticePos { x, y, z }
    }

    pub fn x(self) -> i32 {
        self.x
    }

    pub fn y(self) -> i32 {
        self.y
    }

    pub fn z(self) -> i32 {
        self.z
    }

    pub fn to_array(self) -> [i32; 3] {
        [self.x, self.y, self.z]
    }

    /// Centre of the cell in canonical Euclidean units.
    pub fn center(self) -> [f64; 3] {
        [2.0 * self.x as f64, 2.0 * self.y as f64, 2.0 * self.z as f64]
    }

    pub fn step(self, d: FaceDir) -> LatticePos {
        let v = d.vector();
        LatticePos::from_raw(self.x + v[0], self.y + v[1], self.z + v[2])
    }

    /// The direction `d` with `self.step(d) == other`, if the two are adjacent.
    pub fn direction_to(self, other: LatticePos) -> Option<FaceDir> {
        FaceDir::from_vector((other - self).to_array()).ok()
    }
}

impl TryFrom<[i32; 3]> for LatticePos {
    type Error = LatticeError;

    fn try_from(v: [i32; 3]) -> Result<Self, Self::Error> {
        LatticePos::new(v[0], v[1], v[2])
    }
}

impl From<LatticePos> for [i32; 3] {
    fn from(p: LatticePos) -> Self {
        p.to_array()
    }
}

impl fmt::Display for LatticePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for LatticePos {
    type Output = LatticePos;

    fn add(self, o: LatticePos) -> LatticePos {
        LatticePos::from_raw(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for LatticePos {
    type Output = LatticePos;

    fn sub(self, o: LatticePos) -> LatticePos {
        LatticePos::from_raw(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for LatticePos {
    type Output = LatticePos;

    fn neg(self) -> LatticePos {
        LatticePos::from_raw(-self.x, -self.y, -self.z)
    }
}

impl Add<FaceDir> for LatticePos {
    type Output = LatticePos;

    fn add(self, d: FaceDir) -> LatticePos {
        self.step(d)
    }
}

const FACE_VECTORS: [[i32; 3]; 12] = [
    [-1, -1, 0],
    [-1, 0, -1],
    [-1, 0, 1],
    [-1, 1, 0],
    [0, -1, -1],
    [0, -1, 1],
    [0, 1, -1],
    [0, 1, 1],
    [1, -1, 0],
    [1, 0, -1],
    [1, 0, 1],
    [1, 1, 0],
];

/// One of the 12 neighbour offsets, which is also the outward normal
/// direction of the matching rhombic face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct FaceDir(u8);

impl FaceDir {
    pub const COUNT: usize = 12;

    pub fn all() -> impl Iterator<Item = FaceDir> + Clone {
        (0..12u8).map(FaceDir)
    }

    pub fn from_index(i: usize) -> Result<FaceDir, LatticeError> {
        if i < 12 {
            Ok(FaceDir(i as u8))
        } else {
            Err(LatticeError::FaceDirIndex(i))
        }
    }

    pub fn from_vector(v: [i32; 3]) -> Result<FaceDir, LatticeError> {
        FACE_VECTORS
            .iter()
            .position(|&f| f == v)
            .map(|i| FaceDir(i as u8))
            .ok_or(LatticeError::NotAFaceDir(v))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn vector(self) -> [i32; 3] {
        FACE_VECTORS[self.0 as usize]
    }

    pub fn as_f64(self) -> [f64; 3] {
        let v = self.vector();
        [v[0] as f64, v[1] as f64, v[2] as f64]
    }

    pub fn as_pos(self) -> LatticePos {
        let v = self.vector();
        LatticePos::from_raw(v[0], v[1], v[2])
    }

    pub fn opposite(self) -> FaceDir {
        FaceDir(11 - self.0)
    }

    pub fn dot(self, other: FaceDir) -> i32 {
        let (a, b) = (self.vector(), other.vector());
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }
}

impl Neg for FaceDir {
    type Output = FaceDir;

    fn neg(self) -> FaceDir {
        self.opposite()
    }
}

impl TryFrom<usize> for FaceDir {
    type Error = LatticeError;

    fn try_from(i: usize) -> Result<Self, Self::Error> {
        FaceDir::from_index(i)
    }
}

impl From<FaceDir> for usize {
    fn from(d: FaceDir) -> usize {
        d.index()
    }
}

impl fmt::Display for FaceDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.vector();
        write!(f, "({}, {}, {})", v[0], v[1], v[2])
    }
}

/// The 12 neighbours of `p`, in [`FaceDir`] index order.
pub fn neighbors(p: LatticePos) -> [LatticePos; 12] {
    let mut out = [p; 12];
    for d in FaceDir::all() {
        out[d.index()] = p.step(d);
    }
    out
}

/// Minimal number of face steps between two sites.
///
/// Closed form `max(‖Δ‖∞, ‖Δ‖₁ / 2)`; checked against breadth-first search
/// in the tests.
pub fn lattice_distance(p: LatticePos, q: LatticePos) -> u32 {
    let d = q - p;
    let (ax, ay, az) = (d.x.unsigned_abs(), d.y.unsigned_abs(), d.z.unsigned_abs());
    let linf = ax.max(ay).max(az);
    // Δ has even sum, so the L1 norm is even.
    let half_l1 = (ax + ay + az).div_ceil(2);
    linf.max(half_l1)
}

pub type Matrix3 = [[i32; 3]; 3];

struct GroupTables {
    matrices: [Matrix3; 24],
    compose: [[u8; 24]; 24],
    inverse: [u8; 24],
    face_action: [[u8; 12]; 24],
}

fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn mat_vec(a: &Matrix3, v: [i32; 3]) -> [i32; 3] {
    let mut out = [0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

pub(crate) fn determinant(m: &Matrix3) -> i32 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn build_tables() -> GroupTables {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut proper = Vec::with_capacity(24);
    for perm in PERMS {
        for signs in 0..8 {
            let mut m = [[0; 3]; 3];
            for row in 0..3 {
                m[row][perm[row]] = if signs & (1 << row) != 0 { -1 } else { 1 };
            }
            if determinant(&m) == 1 {
                proper.push(m);
            }
        }
    }
    let identity = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    proper.retain(|m| *m != identity);
    proper.sort();
    proper.insert(0, identity);
    let matrices: [Matrix3; 24] = proper.try_into().expect("24 proper rotations");

    let lookup = |m: &Matrix3| matrices.iter().position(|x| x == m).expect("group is closed") as u8;
    let mut compose = [[0u8; 24]; 24];
    let mut inverse = [0u8; 24];
    let mut face_action = [[0u8; 12]; 24];
    for a in 0..24 {
        for b in 0..24 {
            compose[a][b] = lookup(&mat_mul(&matrices[a], &matrices[b]));
            if compose[a][b] == 0 {
                inverse[a] = b as u8;
            }
        }
        for d in FaceDir::all() {
            let v = mat_vec(&matrices[a], d.vector());
            face_action[a][d.index()] = FaceDir::from_vector(v).expect("rotations permute face directions").0;
        }
    }
    GroupTables { matrices, compose, inverse, face_action }
}

fn tables() -> &'static GroupTables {
    static TABLES: OnceLock<GroupTables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

/// An element of the 24-element rotation group of the cube, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Rotation24(u8);

impl Rotation24 {
    pub const IDENTITY: Rotation24 = Rotation24(0);
    pub const COUNT: usize = 24;

    pub fn all() -> impl Iterator<Item = Rotation24> + Clone {
        (0..24u8).map(Rotation24)
    }

    pub fn from_index(i: usize) -> Result<Rotation24, LatticeError> {
        if i < 24 {
            Ok(Rotation24(i as u8))
        } else {
            Err(LatticeError::RotationIndex(i))
        }
    }

    /// Looks up the group element with the given matrix, if it is one.
    pub fn from_matrix(m: &Matrix3) -> Option<Rotation24> {
        tables().matrices.iter().position(|x| x == m).map(|i| Rotation24(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn matrix(self) -> &'static Matrix3 {
        &tables().matrices[self.0 as usize]
    }

    pub fn matrix_f64(self) -> [[f64; 3]; 3] {
        let m = self.matrix();
        m.map(|row| row.map(|v| v as f64))
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(self, other: Rotation24) -> Rotation24 {
        Rotation24(tables().compose[self.0 as usize][other.0 as usize])
    }

    pub fn inverse(self) -> Rotation24 {
        Rotation24(tables().inverse[self.0 as usize])
    }

    pub fn trace(self) -> i32 {
        let m = self.matrix();
        m[0][0] + m[1][1] + m[2][2]
    }

    /// Smallest `n ≥ 1` with `selfⁿ = identity`.
    pub fn order(self) -> u32 {
        let mut acc = self;
        let mut n = 1;
        while acc != Rotation24::IDENTITY {
            acc = acc.compose(self);
            n += 1;
        }
        n
    }

    pub fn apply_vec(self, v: [i32; 3]) -> [i32; 3] {
        mat_vec(self.matrix(), v)
    }

    pub fn apply_f64(self, v: [f64; 3]) -> [f64; 3] {
        let m = self.matrix();
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = m[i][0] as f64 * v[0] + m[i][1] as f64 * v[1] + m[i][2] as f64 * v[2];
        }
        out
    }
}

impl TryFrom<usize> for Rotation24 {
    type Error = LatticeError;

    fn try_from(i: usize) -> Result<Self, Self::Error> {
        Rotation24::from_index(i)
    }
}

impl From<Rotation24> for usize {
    fn from(r: Rotation24) -> usize {
        r.index()
    }
}

pub fn apply_rotation(r: Rotation24, p: LatticePos) -> LatticePos {
    let v = r.apply_vec(p.to_array());
    // Signed permutations preserve the coordinate sum's parity.
    LatticePos::from_raw(v[0], v[1], v[2])
}

pub fn apply_rotation_dir(r: Rotation24, d: FaceDir) -> FaceDir {
    FaceDir(tables().face_action[r.0 as usize][d.index()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Active,
    #[default]
    Passive,
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellKind::Active => "active",
            CellKind::Passive => "passive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub pos: LatticePos,
    pub kind: CellKind,
    pub orient: Rotation24,
}

impl Cell {
    pub fn passive(pos: LatticePos) -> Cell {
        Cell { pos, kind: CellKind::Passive, orient: Rotation24::IDENTITY }
    }

    pub fn active(pos: LatticePos) -> Cell {
        Cell { pos, kind: CellKind::Active, orient: Rotation24::IDENTITY }
    }
}

/// Per-cell metadata stored alongside the position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CellState {
    pub kind: CellKind,
    pub orient: Rotation24,
}

/// A finite set of cells with pairwise distinct positions, kept sorted by
/// position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration {
    cells: BTreeMap<LatticePos, CellState>,
}

impl Configuration {
    pub fn new(cells: impl IntoIterator<Item = Cell>) -> Result<Self, LatticeError> {
        let mut c = Configuration::default();
        for cell in cells {
            c.insert(cell)?;
        }
        Ok(c)
    }

    /// Passive, identity-oriented cells at the given positions.
    pub fn from_positions(positions: impl IntoIterator<Item = LatticePos>) -> Result<Self, LatticeError> {
        Configuration::new(positions.into_iter().map(Cell::passive))
    }

    pub fn insert(&mut self, cell: Cell) -> Result<(), LatticeError> {
        if self.cells.contains_key(&cell.pos) {
            return Err(LatticeError::DuplicatePosition(cell.pos));
        }
        self.cells.insert(cell.pos, CellState { kind: cell.kind, orient: cell.orient });
        Ok(())
    }

    pub fn remove(&mut self, pos: LatticePos) -> Option<Cell> {
        self.cells.remove(&pos).map(|s| Cell { pos, kind: s.kind, orient: s.orient })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, pos: LatticePos) -> bool {
        self.cells.contains_key(&pos)
    }

    pub fn get(&self, pos: LatticePos) -> Option<Cell> {
        self.cells.get(&pos).map(|s| Cell { pos, kind: s.kind, orient: s.orient })
    }

    /// Cells in ascending position order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().map(|(&pos, s)| Cell { pos, kind: s.kind, orient: s.orient })
    }

    pub fn positions(&self) -> impl Iterator<Item = LatticePos> + '_ {
        self.cells.keys().copied()
    }

    pub fn translated(&self, offset: LatticePos) -> Configuration {
        Configuration { cells: self.cells.iter().map(|(&p, &s)| (p + offset, s)).collect() }
    }

    /// Applies a lattice rotation about the origin to every position and
    /// composes it into every cell orientation.
    pub fn rotated(&self, r: Rotation24) -> Configuration {
        Configuration {
            cells: self
                .cells
                .iter()
                .map(|(&p, s)| (apply_rotation(r, p), CellState { kind: s.kind, orient: r.compose(s.orient) }))
                .collect(),
        }
    }

    /// Number of unordered adjacent cell pairs.
    pub fn adjacent_pairs(&self) -> usize {
        let twice: usize = self
            .positions()
            .map(|p| neighbors(p).iter().filter(|q| self.contains(**q)).count())
            .sum();
        twice / 2
    }

    pub fn min_position(&self) -> Option<LatticePos> {
        self.cells.keys().next().copied()
    }

    /// Translation-invariant form: the lexicographically smallest position is
    /// moved to the origin. Kinds and orientations are kept.
    pub fn canonicalize(&self) -> Result<Configuration, LatticeError> {
        let min = self.min_position().ok_or(LatticeError::EmptyConfiguration)?;
        Ok(self.translated(-min))
    }

    /// Whether the face-adjacency graph of the cells has a single component.
    pub fn is_connected(&self) -> Result<bool, LatticeError> {
        let start = self.min_position().ok_or(LatticeError::EmptyConfiguration)?;
        Ok(self.component_size(start, None) == self.len())
    }

    /// Size of the component containing `start`, optionally pretending the
    /// cell at `skip` is absent.
    pub(crate) fn component_size(&self, start: LatticePos, skip: Option<LatticePos>) -> usize {
        let mut seen = HashSet::with_capacity(self.len());
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in neighbors(p) {
                if Some(q) != skip && self.contains(q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        seen.len()
    }

    /// Whether removing the cell at `pos` leaves the rest connected.
    pub fn is_connected_without(&self, pos: LatticePos) -> bool {
        if self.len() <= 2 {
            return true;
        }
        let Some(start) = self.positions().find(|&p| p != pos) else {
            return true;
        };
        let remaining = if self.contains(pos) { self.len() - 1 } else { self.len() };
        self.component_size(start, Some(pos)) == remaining
    }
}

pub fn canonicalize(c: &Configuration) -> Result<Configuration, LatticeError> {
    c.canonicalize()
}

pub fn is_connected(c: &Configuration) -> Result<bool, LatticeError> {
    c.is_connected()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: i32, y: i32, z: i32) -> LatticePos {
        LatticePos::new(x, y, z).unwrap()
    }

    fn bfs_distances(radius: i32) -> std::collections::HashMap<LatticePos, u32> {
        // Plain BFS over face steps, kept inside a generous box so that
        // shortest paths to targets within `radius` are never cut off.
        let bound = radius + 2;
        let mut dist = std::collections::HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(LatticePos::ORIGIN, 0);
        queue.push_back(LatticePos::ORIGIN);
        while let Some(cur) = queue.pop_front() {
            let dc = dist[&cur];
            for d in FACE_VECTORS {
                let n = [cur.x + d[0], cur.y + d[1], cur.z + d[2]];
                if n.iter().any(|c| c.abs() > bound) {
                    continue;
                }
                let n = LatticePos::new(n[0], n[1], n[2]).unwrap();
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(n) {
                    e.insert(dc + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    #[test]
    fn rejects_odd_parity() {
        assert_eq!(LatticePos::new(1, 0, 0), Err(LatticeError::OddParity(1, 0, 0)));
        assert!(LatticePos::new(-1, 0, 0).is_err());
        assert!(LatticePos::new(1, 1, 0).is_ok());
    }

    #[test]
    fn face_directions_are_sorted_and_paired() {
        let mut sorted = FACE_VECTORS;
        sorted.sort();
        assert_eq!(sorted, FACE_VECTORS);
        for d in FaceDir::all() {
            let v = d.vector();
            assert_eq!(v.iter().filter(|c| c.abs() == 1).count(), 2);
            assert_eq!(d.opposite().vector(), [-v[0], -v[1], -v[2]]);
        }
    }

    #[test]
    fn neighbors_of_origin() {
        let ns = neighbors(LatticePos::ORIGIN);
        assert_eq!(ns.len(), 12);
        for q in [p(1, 1, 0), p(1, 0, -1), p(0, -1, -1)] {
            assert!(ns.contains(&q));
        }
        assert!(neighbors(p(1, 1, 0)).contains(&LatticePos::ORIGIN));
        for q in neighbors(p(2, 0, 0)) {
            assert_eq!((q.x + q.y + q.z).rem_euclid(2), 0);
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(lattice_distance(LatticePos::ORIGIN, LatticePos::ORIGIN), 0);
        assert_eq!(lattice_distance(LatticePos::ORIGIN, p(1, 1, 0)), 1);
        assert_eq!(lattice_distance(LatticePos::ORIGIN, p(2, 2, 2)), 3);
    }

    #[test]
    fn distance_matches_bfs_within_radius_6() {
        let dist = bfs_distances(6);
        for x in -6..=6 {
            for y in -6..=6 {
                for z in -6..=6 {
                    if let Ok(q) = LatticePos::new(x, y, z) {
                        assert_eq!(lattice_distance(LatticePos::ORIGIN, q), dist[&q], "offset {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_group_axioms() {
        let all: Vec<_> = Rotation24::all().collect();
        assert_eq!(all.len(), 24);
        assert_eq!(*Rotation24::IDENTITY.matrix(), [[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        let mut seen = HashSet::new();
        for &a in &all {
            let m = a.matrix();
            assert_eq!(determinant(m), 1);
            for (i, row) in m.iter().enumerate() {
                assert_eq!(row.iter().filter(|v| **v != 0).count(), 1);
                assert_eq!((0..3).filter(|&r| m[r][i] != 0).count(), 1);
            }
            assert!(seen.insert(*m));
            assert_eq!(a.compose(a.inverse()), Rotation24::IDENTITY);
            assert_eq!(a.inverse().compose(a), Rotation24::IDENTITY);
            assert_eq!(a.compose(Rotation24::IDENTITY), a);
            for &b in &all {
                assert_eq!(*a.compose(b).matrix(), mat_mul(a.matrix(), b.matrix()));
                for &c in &all {
                    assert_eq!(a.compose(b).compose(c), a.compose(b.compose(c)));
                }
            }
        }
    }

    #[test]
    fn rotations_permute_face_directions() {
        for r in Rotation24::all() {
            let image: HashSet<_> = FaceDir::all().map(|d| apply_rotation_dir(r, d)).collect();
            assert_eq!(image.len(), 12);
            for d in FaceDir::all() {
                assert_eq!(apply_rotation_dir(r, d).vector(), r.apply_vec(d.vector()));
            }
        }
    }

    #[test]
    fn body_diagonal_three_cycle() {
        // x -> y -> z -> x, i.e. rotation by 120° about (1,1,1).
        let r = Rotation24::from_matrix(&[[0, 0, 1], [1, 0, 0], [0, 1, 0]]).unwrap();
        assert_eq!(apply_rotation(Rotation24::IDENTITY, p(1, 1, 0)), p(1, 1, 0));
        assert_eq!(apply_rotation(r, p(1, 1, 0)), p(0, 1, 1));
        assert_eq!(apply_rotation(r, p(0, 1, 1)), p(1, 0, 1));
        assert_eq!(apply_rotation(r, p(1, 0, 1)), p(1, 1, 0));
        assert_eq!(r.compose(r).compose(r), Rotation24::IDENTITY);
        assert_eq!(r.order(), 3);
        assert_eq!(r.trace(), 0);
    }

    #[test]
    fn canonicalize_examples() {
        let c = Configuration::from_positions([LatticePos::ORIGIN]).unwrap();
        assert_eq!(c.canonicalize().unwrap(), c);
        let c = Configuration::from_positions([p(2, 2, 0), p(3, 3, 0)]).unwrap();
        let want = Configuration::from_positions([p(0, 0, 0), p(1, 1, 0)]).unwrap();
        assert_eq!(c.canonicalize().unwrap(), want);
        assert_eq!(Configuration::default().canonicalize(), Err(LatticeError::EmptyConfiguration));
    }

    #[test]
    fn canonicalize_keeps_metadata() {
        let r = Rotation24::from_index(5).unwrap();
        let c = Configuration::new([
            Cell { pos: p(4, 0, 0), kind: CellKind::Active, orient: r },
            Cell::passive(p(5, 1, 0)),
        ])
        .unwrap();
        let k = c.canonicalize().unwrap();
        assert_eq!(k.get(LatticePos::ORIGIN).unwrap().kind, CellKind::Active);
        assert_eq!(k.get(LatticePos::ORIGIN).unwrap().orient, r);
    }

    #[test]
    fn duplicate_positions_rejected() {
        let err = Configuration::from_positions([p(0, 0, 0), p(0, 0, 0)]).unwrap_err();
        assert_eq!(err, LatticeError::DuplicatePosition(LatticePos::ORIGIN));
    }

    #[test]
    fn connectivity_examples() {
        let c = Configuration::from_positions([p(0, 0, 0), p(1, 1, 0)]).unwrap();
        assert!(c.is_connected().unwrap());
        let c = Configuration::from_positions([p(0, 0, 0), p(2, 2, 0)]).unwrap();
        assert!(!c.is_connected().unwrap());
        assert_eq!(Configuration::default().is_connected(), Err(LatticeError::EmptyConfiguration));
        let line = Configuration::from_positions([p(0, 0, 0), p(1, 1, 0), p(2, 2, 0)]).unwrap();
        assert!(!line.is_connected_without(p(1, 1, 0)));
        assert!(line.is_connected_without(p(2, 2, 0)));
    }

    fn union_find_connected(ps: &[LatticePos]) -> bool {
        let mut parent: Vec<usize> = (0..ps.len()).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            parent[i] = r;
            r
        }
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let d = ps[i] - ps[j];
                let (ax, ay, az) = (d.x.abs(), d.y.abs(), d.z.abs());
                let mut a = [ax, ay, az];
                a.sort();
                if a == [0, 1, 1] {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..ps.len()).all(|i| find(&mut parent, i) == root)
    }

    fn arb_pos(r: i32) -> impl Strategy<Value = LatticePos> {
        (-r..=r, -r..=r, -r..=r).prop_map(|(x, y, z)| {
            let z = if (x + y + z) % 2 == 0 { z } else { z + 1 };
            LatticePos::from_raw(x, y, z)
        })
    }

    proptest! {
        #[test]
        fn connectivity_agrees_with_union_find(ps in prop::collection::btree_set(arb_pos(3), 1..20)) {
            let ps: Vec<_> = ps.into_iter().collect();
            let c = Configuration::from_positions(ps.iter().copied()).unwrap();
            prop_assert_eq!(c.is_connected().unwrap(), union_find_connected(&ps));
        }

        #[test]
        fn canonicalize_is_translation_invariant(
            ps in prop::collection::btree_set(arb_pos(4), 1..10),
            t in arb_pos(50),
        ) {
            let c = Configuration::from_positions(ps).unwrap();
            let k = c.canonicalize().unwrap();
            prop_assert_eq!(c.translated(t).canonicalize().unwrap(), k.clone());
            prop_assert_eq!(k.canonicalize().unwrap(), k);
        }

        #[test]
        fn distance_is_a_metric(a in arb_pos(8), b in arb_pos(8), c in arb_pos(8)) {
            prop_assert_eq!(lattice_distance(a, a), 0);
            prop_assert_eq!(lattice_distance(a, b), lattice_distance(b, a));
            prop_assert!(lattice_distance(a, b) > 0 || a == b);
            prop_assert!(lattice_distance(a, c) <= lattice_distance(a, b) + lattice_distance(b, c));
        }

        #[test]
        fn adjacency_is_symmetric(a in arb_pos(100)) {
            for q in neighbors(a) {
                prop_assert!(neighbors(q).contains(&a));
                prop_assert_eq!(lattice_distance(a, q), 1);
            }
        }
    }
}
