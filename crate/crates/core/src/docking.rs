//! Magnet layouts on cell faces and genderless docking checks.
//!
//! Every face carries axially poled magnets at fixed in-face positions. The
//! [`Polarity`] of a magnet is the pole facing outward. When two faces meet,
//! magnets at coincident points pair up; a contact is attractive when every
//! pair has opposite outward poles.
//!
//! In-face coordinates `(u, v)` are measured along the face's long and short
//! diagonals (see [`crate::geometry::FaceFrame`]), in canonical units. The
//! rhombic face spans `|u|/√2 + |v| ≤ 1`.
//!
//! A layout is *genderless* when any two cells, in any orientations, meeting
//! at any pair of faces, attract. For a single face profile with `k`-fold
//! rotational symmetry the equivalent condition is that the face attracts a
//! copy of itself at each of the `k` relative in-plane rotations.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{add, face_frame, face_half_diagonals, norm, scale, sub, Vec3};
use crate::lattice::{apply_rotation_dir, Configuration, FaceDir, LatticePos, Rotation24};

/// Position coincidence tolerance, canonical units.
pub const MATCH_EPS: f64 = 1e-6;

/// Enumeration is exhaustive over `2^m` patterns; keep `m` small.
pub const MAX_ENUMERATED_MAGNETS: usize = 20;

/// Default placement as fractions of the long and short half-diagonals.
pub const DEFAULT_LONG_FRACTION: f64 = 0.5;
pub const DEFAULT_SHORT_FRACTION: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DockingError {
    #[error("magnet {index} on side {side} has no partner within {eps:e}")]
    Pairing { side: char, index: usize, eps: f64 },
    #[error("faces are not coincident under this alignment: {0}")]
    InvalidAlignment(ContactAlignment),
    #[error("face symmetry order {0} is unsupported: at least 2-fold rotational symmetry is required")]
    UnsupportedSymmetry(usize),
    #[error("magnet positions are not invariant under {0}-fold rotation")]
    NotSymmetric(usize),
    #[error("{0} magnets is too many to enumerate (limit {MAX_ENUMERATED_MAGNETS})")]
    TooManyMagnets(usize),
    #[error("malformed layout: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    N,
    S,
}

impl Polarity {
    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::N => Polarity::S,
            Polarity::S => Polarity::N,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::N => "N",
            Polarity::S => "S",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetSpec {
    pub pos: [f64; 2],
    pub polarity: Polarity,
}

/// Magnets on one face.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FaceLayout {
    magnets: Vec<MagnetSpec>,
}

fn rotate2(p: [f64; 2], turns: f64) -> [f64; 2] {
    let (s, c) = (turns * std::f64::consts::TAU).sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Whether the point set maps onto itself under rotation by `1/k` turn.
pub fn is_k_symmetric(points: &[[f64; 2]], k: usize) -> bool {
    points.iter().all(|&p| {
        let q = rotate2(p, 1.0 / k as f64);
        points.iter().any(|&r| dist2(q, r) < MATCH_EPS)
    })
}

impl FaceLayout {
    /// Checks that positions are pairwise separated by more than `2·MATCH_EPS`.
    pub fn new(magnets: Vec<MagnetSpec>) -> Result<FaceLayout, DockingError> {
        for i in 0..magnets.len() {
            if !magnets[i].pos.iter().all(|c| c.is_finite()) {
                return Err(DockingError::Malformed(format!("magnet {i} has a non-finite position")));
            }
            for j in 0..i {
                if dist2(magnets[i].pos, magnets[j].pos) <= 2.0 * MATCH_EPS {
                    return Err(DockingError::Malformed(format!("magnets {j} and {i} coincide")));
                }
            }
        }
        Ok(FaceLayout { magnets })
    }

    pub fn from_pattern(positions: &[[f64; 2]], pattern: &[Polarity]) -> Result<FaceLayout, DockingError> {
        if positions.len() != pattern.len() {
            return Err(DockingError::Malformed(format!(
                "{} positions but {} polarities",
                positions.len(),
                pattern.len()
            )));
        }
        FaceLayout::new(positions.iter().zip(pattern).map(|(&pos, &polarity)| MagnetSpec { pos, polarity }).collect())
    }

    pub fn magnets(&self) -> &[MagnetSpec] {
        &self.magnets
    }

    pub fn len(&self) -> usize {
        self.magnets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnets.is_empty()
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.magnets.iter().map(|m| m.pos).collect()
    }

    pub fn inverted(&self) -> FaceLayout {
        FaceLayout {
            magnets: self.magnets.iter().map(|m| MagnetSpec { pos: m.pos, polarity: m.polarity.flipped() }).collect(),
        }
    }

    fn check_rhombic(&self) -> Result<(), DockingError> {
        let (hl, hs) = face_half_diagonals();
        for (i, m) in self.magnets.iter().enumerate() {
            if m.pos[0].abs() / hl + m.pos[1].abs() / hs >= 1.0 {
                return Err(DockingError::Malformed(format!("magnet {i} at {:?} is not inside the rhombic face", m.pos)));
            }
        }
        if !is_k_symmetric(&self.positions(), 2) {
            return Err(DockingError::NotSymmetric(2));
        }
        Ok(())
    }
}

/// Four magnets placed mirror-symmetrically about both face diagonals, at
/// `(±a·√2, ±b·1)` where `a`, `b` are fractions of the half-diagonals.
///
/// Order: `(+,+)`, `(+,−)`, `(−,+)`, `(−,−)`.
pub fn rhombic_positions(long_fraction: f64, short_fraction: f64) -> Vec<[f64; 2]> {
    let (hl, hs) = face_half_diagonals();
    let (u, v) = (long_fraction * hl, short_fraction * hs);
    vec![[u, v], [u, -v], [-u, v], [-u, -v]]
}

pub fn default_rhombic_positions() -> Vec<[f64; 2]> {
    rhombic_positions(DEFAULT_LONG_FRACTION, DEFAULT_SHORT_FRACTION)
}

/// Magnet layouts for all 12 faces of a cell, indexed by [`FaceDir`], in
/// each face's own frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLayout {
    faces: Vec<FaceLayout>,
}

impl CellLayout {
    pub fn new(faces: Vec<FaceLayout>) -> Result<CellLayout, DockingError> {
        if faces.len() != FaceDir::COUNT {
            return Err(DockingError::Malformed(format!("expected 12 faces, got {}", faces.len())));
        }
        for (i, f) in faces.iter().enumerate() {
            f.check_rhombic().map_err(|e| match e {
                DockingError::Malformed(msg) => DockingError::Malformed(format!("face {i}: {msg}")),
                other => other,
            })?;
        }
        Ok(CellLayout { faces })
    }

    /// The same face layout on every face.
    pub fn uniform(face: FaceLayout) -> Result<CellLayout, DockingError> {
        CellLayout::new(vec![face; FaceDir::COUNT])
    }

    pub fn face(&self, d: FaceDir) -> &FaceLayout {
        &self.faces[d.index()]
    }

    pub fn faces(&self) -> &[FaceLayout] {
        &self.faces
    }

    pub fn magnet_count(&self) -> usize {
        self.faces.iter().map(FaceLayout::len).sum()
    }

    /// The physically identical cell after rotating it by `r`: the magnets
    /// of face `d` move to face `r·d`, re-expressed in that face's frame.
    pub fn rotated(&self, r: Rotation24) -> CellLayout {
        let mut faces = vec![FaceLayout::default(); FaceDir::COUNT];
        for d in FaceDir::all() {
            let target = apply_rotation_dir(r, d);
            let src = face_frame(d);
            let dst = face_frame(target);
            faces[target.index()] = FaceLayout {
                magnets: self.faces[d.index()]
                    .magnets
                    .iter()
                    .map(|m| {
                        let p = sub(r.apply_f64(src.to_cell(m.pos)), dst.center);
                        MagnetSpec {
                            pos: [crate::geometry::dot(p, dst.long_axis), crate::geometry::dot(p, dst.short_axis)],
                            polarity: m.polarity,
                        }
                    })
                    .collect(),
            };
        }
        CellLayout { faces }
    }
}

/// How two faces meet: face `face_a` of a cell in orientation `orient_a`
/// against face `face_b` of a neighbouring cell in orientation `orient_b`,
/// with face B's magnets additionally turned by `symmetry_index / k` of a
/// turn in their own plane (`k = 2` for the rhombic face).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContactAlignment {
    pub face_a: FaceDir,
    pub orient_a: Rotation24,
    pub face_b: FaceDir,
    pub orient_b: Rotation24,
    pub symmetry_index: usize,
}

impl ContactAlignment {
    pub fn new(face_a: FaceDir, orient_a: Rotation24, face_b: FaceDir, orient_b: Rotation24) -> ContactAlignment {
        ContactAlignment { face_a, orient_a, face_b, orient_b, symmetry_index: 0 }
    }

    /// Faces coincide when they point in opposite world directions.
    pub fn is_coincident(&self) -> bool {
        apply_rotation_dir(self.orient_a, self.face_a) == apply_rotation_dir(self.orient_b, self.face_b).opposite()
    }

    /// The same contact seen from cell B. Face-to-face contact mirrors the
    /// in-plane frame, so the symmetry index is unchanged.
    pub fn inverse(&self) -> ContactAlignment {
        ContactAlignment {
            face_a: self.face_b,
            orient_a: self.orient_b,
            face_b: self.face_a,
            orient_b: self.orient_a,
            symmetry_index: self.symmetry_index,
        }
    }
}

impl fmt::Display for ContactAlignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "face {} (orientation {}) against face {} (orientation {}), in-plane index {}",
            self.face_a,
            self.orient_a.index(),
            self.face_b,
            self.orient_b.index(),
            self.symmetry_index
        )
    }
}

fn match_points(a: &[Vec3], b: &[Vec3]) -> Result<Vec<(usize, usize)>, DockingError> {
    let mut used = vec![false; b.len()];
    let mut pairs = Vec::with_capacity(a.len());
    for (i, pa) in a.iter().enumerate() {
        let j = (0..b.len())
            .find(|&j| !used[j] && norm(sub(*pa, b[j])) < MATCH_EPS)
            .ok_or(DockingError::Pairing { side: 'A', index: i, eps: MATCH_EPS })?;
        used[j] = true;
        pairs.push((i, j));
    }
    if let Some(j) = used.iter().position(|u| !u) {
        return Err(DockingError::Pairing { side: 'B', index: j, eps: MATCH_EPS });
    }
    Ok(pairs)
}

const RHOMBIC_SYMMETRY: usize = 2;

/// Pairs magnets of face A with magnets of face B that land on the same
/// point. Cell A sits at the origin; cell B is its neighbour across face A.
pub fn contact_map(a: &FaceLayout, b: &FaceLayout, align: &ContactAlignment) -> Result<Vec<(usize, usize)>, DockingError> {
    if !align.is_coincident() {
        return Err(DockingError::InvalidAlignment(*align));
    }
    let world_dir = apply_rotation_dir(align.orient_a, align.face_a);
    let b_center = scale(world_dir.as_f64(), 2.0);
    let fa = face_frame(align.face_a);
    let fb = face_frame(align.face_b);
    let turns = (align.symmetry_index % RHOMBIC_SYMMETRY) as f64 / RHOMBIC_SYMMETRY as f64;
    let pa: Vec<Vec3> = a.magnets.iter().map(|m| align.orient_a.apply_f64(fa.to_cell(m.pos))).collect();
    let pb: Vec<Vec3> = b
        .magnets
        .iter()
        .map(|m| add(b_center, align.orient_b.apply_f64(fb.to_cell(rotate2(m.pos, turns)))))
        .collect();
    match_points(&pa, &pb)
}

fn all_opposite(a: &FaceLayout, b: &FaceLayout, pairs: &[(usize, usize)]) -> bool {
    pairs.iter().all(|&(i, j)| a.magnets[i].polarity != b.magnets[j].polarity)
}

/// True when every magnet pair across the contact faces N against S.
pub fn is_attractive_contact(a: &FaceLayout, b: &FaceLayout, align: &ContactAlignment) -> Result<bool, DockingError> {
    let pairs = contact_map(a, b, align)?;
    Ok(all_opposite(a, b, &pairs))
}

/// Contact of an abstract face with `k`-fold symmetry against another: face
/// A in the plane `z = 0` facing `+z`, face B facing `−z` (its frame mirrored
/// across the long axis) and turned by `j / k` of a turn in its own plane.
pub fn planar_contact_map(a: &FaceLayout, b: &FaceLayout, k: usize, j: usize) -> Result<Vec<(usize, usize)>, DockingError> {
    if k < 2 {
        return Err(DockingError::UnsupportedSymmetry(k));
    }
    let turns = (j % k) as f64 / k as f64;
    let pa: Vec<Vec3> = a.magnets.iter().map(|m| [m.pos[0], m.pos[1], 0.0]).collect();
    let pb: Vec<Vec3> = b
        .magnets
        .iter()
        .map(|m| {
            let q = rotate2(m.pos, turns);
            [q[0], -q[1], 0.0]
        })
        .collect();
    match_points(&pa, &pb)
}

pub fn is_attractive_planar(a: &FaceLayout, b: &FaceLayout, k: usize, j: usize) -> Result<bool, DockingError> {
    let pairs = planar_contact_map(a, b, k, j)?;
    Ok(all_opposite(a, b, &pairs))
}

/// Outcome of an exhaustive genderless check.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderlessCheck {
    pub alignments_checked: usize,
    /// First repulsive alignment found, in enumeration order.
    pub counterexample: Option<ContactAlignment>,
}

impl GenderlessCheck {
    pub fn is_genderless(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Every face-to-face alignment two lattice cells can realize: all face
/// pairs, all 24 × 24 orientation pairs, keeping those where the faces meet.
pub fn lattice_alignments() -> impl Iterator<Item = ContactAlignment> {
    FaceDir::all().flat_map(|fa| {
        Rotation24::all().flat_map(move |ra| {
            FaceDir::all().flat_map(move |fb| {
                Rotation24::all()
                    .map(move |rb| ContactAlignment::new(fa, ra, fb, rb))
                    .filter(ContactAlignment::is_coincident)
            })
        })
    })
}

/// Checks [`is_attractive_contact`] over every realizable lattice alignment.
pub fn validate_genderless(layout: &CellLayout) -> Result<GenderlessCheck, DockingError> {
    let mut checked = 0;
    for align in lattice_alignments() {
        checked += 1;
        if !is_attractive_contact(layout.face(align.face_a), layout.face(align.face_b), &align)? {
            return Ok(GenderlessCheck { alignments_checked: checked, counterexample: Some(align) });
        }
    }
    Ok(GenderlessCheck { alignments_checked: checked, counterexample: None })
}

/// Pattern number `mask` over `m` magnets: bit `i` set means magnet `i` is S.
pub fn pattern_from_mask(mask: u64, m: usize) -> Vec<Polarity> {
    (0..m).map(|i| if mask >> i & 1 == 1 { Polarity::S } else { Polarity::N }).collect()
}

/// Exhaustively searches polarity patterns for the given magnet positions.
///
/// With `share_one_pattern_across_faces`, the positions are a rhombic face
/// profile (`k` must be 2), every face of the cell carries the same pattern,
/// and each candidate must pass [`validate_genderless`]. Otherwise the
/// positions describe a generic face with `k`-fold symmetry and a pattern is
/// kept when the face attracts a copy of itself at every in-plane index
/// `0..k`.
///
/// Patterns are returned in ascending mask order (see [`pattern_from_mask`]).
pub fn enumerate_valid_layouts(
    face_positions: &[[f64; 2]],
    k: usize,
    share_one_pattern_across_faces: bool,
) -> Result<Vec<Vec<Polarity>>, DockingError> {
    if k < 2 {
        return Err(DockingError::UnsupportedSymmetry(k));
    }
    let m = face_positions.len();
    if m > MAX_ENUMERATED_MAGNETS {
        return Err(DockingError::TooManyMagnets(m));
    }
    if !is_k_symmetric(face_positions, k) {
        return Err(DockingError::NotSymmetric(k));
    }
    // Validates spacing once up front.
    FaceLayout::from_pattern(face_positions, &pattern_from_mask(0, m))?;
    if share_one_pattern_across_faces {
        if k != RHOMBIC_SYMMETRY {
            return Err(DockingError::Malformed(format!(
                "rhombic faces have 2-fold symmetry; got k = {k} in shared-pattern mode"
            )));
        }
        CellLayout::uniform(FaceLayout::from_pattern(face_positions, &pattern_from_mask(0, m))?)?;
    }

    let verdicts: Vec<Result<Option<Vec<Polarity>>, DockingError>> = (0..1u64 << m)
        .into_par_iter()
        .map(|mask| {
            let pattern = pattern_from_mask(mask, m);
            let face = FaceLayout::from_pattern(face_positions, &pattern)?;
            let ok = if share_one_pattern_across_faces {
                validate_genderless(&CellLayout::uniform(face)?)?.is_genderless()
            } else {
                let mut ok = true;
                for j in 0..k {
                    ok &= is_attractive_planar(&face, &face, k, j)?;
                }
                ok
            };
            Ok(ok.then_some(pattern))
        })
        .collect();
    verdicts.into_iter().filter_map(Result::transpose).collect()
}

/// The first valid shared pattern on the default four-magnet rhombic profile.
pub fn reference_cell_layout() -> CellLayout {
    let positions = default_rhombic_positions();
    let patterns = enumerate_valid_layouts(&positions, RHOMBIC_SYMMETRY, true).expect("default profile is well formed");
    let face = FaceLayout::from_pattern(&positions, &patterns[0]).expect("default profile is well formed");
    CellLayout::uniform(face).expect("default profile is well formed")
}

/// One face-to-face contact inside a structure.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureContact {
    pub a: LatticePos,
    pub b: LatticePos,
    pub alignment: ContactAlignment,
    pub attractive: bool,
}

/// Evaluates every shared face of a structure whose cells all carry `layout`.
pub fn structure_contacts(c: &Configuration, layout: &CellLayout) -> Result<Vec<StructureContact>, DockingError> {
    let mut out = Vec::new();
    for a in c.cells() {
        for w in FaceDir::all() {
            let q = a.pos.step(w);
            if q <= a.pos {
                continue;
            }
            let Some(b) = c.get(q) else { continue };
            let face_a = apply_rotation_dir(a.orient.inverse(), w);
            let face_b = apply_rotation_dir(b.orient.inverse(), w.opposite());
            let alignment = ContactAlignment::new(face_a, a.orient, face_b, b.orient);
            let attractive = is_attractive_contact(layout.face(face_a), layout.face(face_b), &alignment)?;
            out.push(StructureContact { a: a.pos, b: q, alignment, attractive });
        }
    }
    Ok(out)
}
