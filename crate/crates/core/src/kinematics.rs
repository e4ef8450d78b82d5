//! The 120° edge pivot: one cell rolls over an edge of a neighbouring
//! substrate cell onto an adjacent face of that substrate.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::swept_cells;
use crate::lattice::{neighbors, Configuration, FaceDir, LatticePos, Rotation24};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KinematicsError {
    #[error("faces {0} and {1} are not edge-adjacent (dot product must be 1)")]
    NotEdgeAdjacent(FaceDir, FaceDir),
    #[error("mover {mover} is not at substrate {substrate} + {from}")]
    MoverMismatch { mover: LatticePos, substrate: LatticePos, from: FaceDir },
    #[error("illegal move: {0}")]
    IllegalMove(MoveLegality),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PivotMove {
    mover: LatticePos,
    substrate: LatticePos,
    from_dir: FaceDir,
    to_dir: FaceDir,
}

impl PivotMove {
    pub fn new(substrate: LatticePos, from_dir: FaceDir, to_dir: FaceDir) -> Result<PivotMove, KinematicsError> {
        if from_dir.dot(to_dir) != 1 {
            return Err(KinematicsError::NotEdgeAdjacent(from_dir, to_dir));
        }
        Ok(PivotMove { mover: substrate.step(from_dir), substrate, from_dir, to_dir })
    }

    /// Builds a move from all four fields, checking they agree.
    pub fn with_mover(
        mover: LatticePos,
        substrate: LatticePos,
        from_dir: FaceDir,
        to_dir: FaceDir,
    ) -> Result<PivotMove, KinematicsError> {
        if substrate.step(from_dir) != mover {
            return Err(KinematicsError::MoverMismatch { mover, substrate, from: from_dir });
        }
        PivotMove::new(substrate, from_dir, to_dir)
    }

    pub fn mover(&self) -> LatticePos {
        self.mover
    }

    pub fn substrate(&self) -> LatticePos {
        self.substrate
    }

    pub fn from_dir(&self) -> FaceDir {
        self.from_dir
    }

    pub fn to_dir(&self) -> FaceDir {
        self.to_dir
    }

    pub fn destination(&self) -> LatticePos {
        self.substrate.step(self.to_dir)
    }

    /// Rolling back over the same edge.
    pub fn reversed(&self) -> PivotMove {
        PivotMove {
            mover: self.destination(),
            substrate: self.substrate,
            from_dir: self.to_dir,
            to_dir: self.from_dir,
        }
    }
}

impl fmt::Display for PivotMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} about {}", self.mover, self.destination(), self.substrate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveLegality {
    Legal,
    DestinationOccupied,
    SweptVolumeBlocked,
    DisconnectsStructure,
    MoverAbsent,
    SubstrateAbsent,
    /// Only under strict stability: the mover would end up held by the
    /// substrate alone.
    InsufficientSupport,
}

impl fmt::Display for MoveLegality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveLegality::Legal => "legal",
            MoveLegality::DestinationOccupied => "destination occupied",
            MoveLegality::SweptVolumeBlocked => "swept volume blocked",
            MoveLegality::DisconnectsStructure => "disconnects structure",
            MoveLegality::MoverAbsent => "mover absent",
            MoveLegality::SubstrateAbsent => "substrate absent",
            MoveLegality::InsufficientSupport => "insufficient support",
        })
    }
}

/// The four faces sharing an edge with face `d`, in face-index order.
pub fn pivot_destinations(d: FaceDir) -> [FaceDir; 4] {
    let mut out = [d; 4];
    for (slot, e) in out.iter_mut().zip(FaceDir::all().filter(|e| d.dot(*e) == 1)) {
        *slot = e;
    }
    out
}

/// The 120° rotation about the pivot edge that carries the mover from
/// `from_dir` to `to_dir`: the linear part of the roll `x ↦ p + R(x − p)`,
/// where `p` is the octahedral vertex on the shared edge. It fixes the edge
/// direction `from × to`. Note that it does not map `from` onto `to`; the
/// centre offset from the pivot, `2·from − p`, goes to `2·to − p` instead.
pub fn pivot_rotation(m: &PivotMove) -> Rotation24 {
    let (a, b) = (m.from_dir.vector(), m.to_dir.vector());
    let axis = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let p = pivot_vertex(a, b);
    let before = [2 * a[0] - p[0], 2 * a[1] - p[1], 2 * a[2] - p[2]];
    let after = [2 * b[0] - p[0], 2 * b[1] - p[1], 2 * b[2] - p[2]];
    Rotation24::all()
        .find(|r| r.apply_vec(axis) == axis && r.apply_vec(before) == after)
        .expect("edge-adjacent faces have a pivot rotation")
}

/// The octahedral tip shared by two edge-adjacent faces: the axis on which
/// both face directions agree.
fn pivot_vertex(a: [i32; 3], b: [i32; 3]) -> [i32; 3] {
    let mut p = [0; 3];
    for k in 0..3 {
        if a[k] != 0 && a[k] == b[k] {
            p[k] = 2 * a[k];
        }
    }
    p
}

/// Legality options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MoveRules {
    /// Require the mover to touch at least one cell besides the substrate at
    /// its destination.
    pub strict_stability: bool,
}

pub fn check_move(c: &Configuration, m: &PivotMove) -> MoveLegality {
    check_move_with(c, m, MoveRules::default())
}

/// Checks run in a fixed order and the first failure is reported.
pub fn check_move_with(c: &Configuration, m: &PivotMove, rules: MoveRules) -> MoveLegality {
    if !c.contains(m.mover) {
        return MoveLegality::MoverAbsent;
    }
    if !c.contains(m.substrate) {
        return MoveLegality::SubstrateAbsent;
    }
    check_move_inner(c, m, rules, || c.is_connected_without(m.mover))
}

/// Shared tail of the legality check once mover and substrate are known to
/// be present; `removable` answers whether the mover is not an articulation
/// cell.
pub(crate) fn check_move_inner(
    c: &Configuration,
    m: &PivotMove,
    rules: MoveRules,
    removable: impl FnOnce() -> bool,
) -> MoveLegality {
    let dest = m.destination();
    if c.contains(dest) {
        return MoveLegality::DestinationOccupied;
    }
    if c.len() > 1 && !removable() {
        return MoveLegality::DisconnectsStructure;
    }
    let blockers = swept_cells(m.from_dir, m.to_dir).expect("PivotMove guarantees adjacent faces");
    if blockers.iter().any(|&q| c.contains(m.substrate + q)) {
        return MoveLegality::SweptVolumeBlocked;
    }
    if rules.strict_stability {
        let held = neighbors(dest).iter().filter(|&&q| q != m.mover && q != m.substrate && c.contains(q)).count();
        if held == 0 {
            return MoveLegality::InsufficientSupport;
        }
    }
    MoveLegality::Legal
}

pub fn apply_move(c: &Configuration, m: &PivotMove) -> Result<Configuration, KinematicsError> {
    apply_move_with(c, m, MoveRules::default())
}

pub fn apply_move_with(c: &Configuration, m: &PivotMove, rules: MoveRules) -> Result<Configuration, KinematicsError> {
    match check_move_with(c, m, rules) {
        MoveLegality::Legal => Ok(apply_unchecked(c, m)),
        other => Err(KinematicsError::IllegalMove(other)),
    }
}

pub(crate) fn apply_unchecked(c: &Configuration, m: &PivotMove) -> Configuration {
    let mut out = c.clone();
    let mut cell = out.remove(m.mover).expect("mover present");
    cell.pos = m.destination();
    cell.orient = pivot_rotation(m).compose(cell.orient);
    out.insert(cell).expect("destination empty");
    out
}

/// All moves of `c` in `(mover, from index, to index)` order, legal or not,
/// whose mover and substrate are both present.
pub fn candidate_moves(c: &Configuration) -> Vec<PivotMove> {
    let mut out = Vec::new();
    for mover in c.positions() {
        for from in FaceDir::all() {
            let substrate = mover.step(from.opposite());
            if !c.contains(substrate) {
                continue;
            }
            for to in pivot_destinations(from) {
                out.push(PivotMove { mover, substrate, from_dir: from, to_dir: to });
            }
        }
    }
    out
}

pub fn legal_moves(c: &Configuration, rules: MoveRules) -> Vec<PivotMove> {
    candidate_moves(c).into_iter().filter(|m| check_move_with(c, m, rules) == MoveLegality::Legal).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonical_cell_mesh, Rotation3, CANONICAL_VERTICES};
    use crate::lattice::{lattice_distance, Cell, CellKind};
    use proptest::prelude::*;

    fn fd(v: [i32; 3]) -> FaceDir {
        FaceDir::from_vector(v).unwrap()
    }

    fn p(x: i32, y: i32, z: i32) -> LatticePos {
        LatticePos::new(x, y, z).unwrap()
    }

    fn cfg(ps: &[(i32, i32, i32)]) -> Configuration {
        Configuration::from_positions(ps.iter().map(|&(x, y, z)| p(x, y, z))).unwrap()
    }

    #[test]
    fn destinations_of_110() {
        let got = pivot_destinations(fd([1, 1, 0]));
        let want = [fd([0, 1, -1]), fd([0, 1, 1]), fd([1, 0, -1]), fd([1, 0, 1])];
        assert_eq!(got, want);
    }

    #[test]
    fn destinations_match_mesh_edge_incidence() {
        let mesh = canonical_cell_mesh();
        for d in FaceDir::all() {
            let dests = pivot_destinations(d);
            let mut from_mesh: Vec<FaceDir> = FaceDir::all()
                .filter(|e| {
                    let shared = mesh.faces[d.index()].iter().filter(|v| mesh.faces[e.index()].contains(v)).count();
                    shared == 2
                })
                .collect();
            from_mesh.sort();
            assert_eq!(dests.to_vec(), from_mesh);
            for e in dests {
                assert!(pivot_destinations(e).contains(&d));
            }
        }
    }

    #[test]
    fn pivot_rotations_are_120_degrees() {
        let verts: std::collections::BTreeSet<_> = CANONICAL_VERTICES.iter().copied().collect();
        for from in FaceDir::all() {
            for to in pivot_destinations(from) {
                let m = PivotMove::new(LatticePos::ORIGIN, from, to).unwrap();
                let r = pivot_rotation(&m);
                assert_eq!(r.order(), 3);
                assert_eq!(r.trace(), 0);
                // Rolling the mover's vertices about the shared octahedral
                // tip lands them exactly on the destination cell.
                let (a, b) = (from.vector(), to.vector());
                let tip = *CANONICAL_VERTICES[8..]
                    .iter()
                    .find(|v| (0..3).all(|k| v[k] == 0 || (v[k] == 2 * a[k] && v[k] == 2 * b[k])))
                    .unwrap();
                let rolled: std::collections::BTreeSet<_> = CANONICAL_VERTICES
                    .iter()
                    .map(|v| {
                        let off = r.apply_vec([v[0] + 2 * a[0] - tip[0], v[1] + 2 * a[1] - tip[1], v[2] + 2 * a[2] - tip[2]]);
                        [off[0] + tip[0] - 2 * b[0], off[1] + tip[1] - 2 * b[1], off[2] + tip[2] - 2 * b[2]]
                    })
                    .collect();
                assert_eq!(rolled, verts);
                let image: std::collections::BTreeSet<_> = CANONICAL_VERTICES.iter().map(|v| r.apply_vec(*v)).collect();
                assert_eq!(image, verts);
                assert_eq!(pivot_rotation(&m.reversed()), r.inverse());
            }
        }
    }

    #[test]
    fn pivot_rotation_example() {
        let m = PivotMove::new(LatticePos::ORIGIN, FaceDir::from_vector([1, 1, 0]).unwrap(), FaceDir::from_vector([1, 0, 1]).unwrap()).unwrap();
        let r = pivot_rotation(&m);
        assert_eq!(r.apply_vec([1, -1, -1]), [1, -1, -1]);
        assert_eq!(r.apply_vec([0, 2, 0]), [0, 0, 2]);
        assert_eq!(r.apply_vec([1, 1, 0]), [0, -1, 1]);
    }

    #[test]
    fn pivot_rotation_matches_continuous_roll() {
        // The end of the sampled rigid roll has the group element as its
        // linear part.
        for from in FaceDir::all() {
            for to in pivot_destinations(from) {
                let m = PivotMove::new(LatticePos::ORIGIN, from, to).unwrap();
                let (_, rots) = crate::geometry::roll_samples(from, to, 1.0).unwrap();
                let end: &Rotation3 = rots.last().unwrap();
                let want = pivot_rotation(&m).matrix_f64();
                for (row, want_row) in end.matrix().iter().zip(&want) {
                    for (a, b) in row.iter().zip(want_row) {
                        assert!((a - b).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn malformed_moves() {
        assert_eq!(
            PivotMove::new(LatticePos::ORIGIN, fd([1, 1, 0]), fd([-1, -1, 0])),
            Err(KinematicsError::NotEdgeAdjacent(fd([1, 1, 0]), fd([-1, -1, 0])))
        );
        assert!(matches!(
            PivotMove::with_mover(p(2, 0, 0), LatticePos::ORIGIN, fd([1, 1, 0]), fd([1, 0, 1])),
            Err(KinematicsError::MoverMismatch { .. })
        ));
    }

    #[test]
    fn two_cell_roll_is_legal() {
        let c = cfg(&[(0, 0, 0), (1, 1, 0)]);
        let m = PivotMove::new(LatticePos::ORIGIN, fd([1, 1, 0]), fd([1, 0, 1])).unwrap();
        assert_eq!(m.mover(), p(1, 1, 0));
        assert_eq!(check_move(&c, &m), MoveLegality::Legal);
        let after = apply_move(&c, &m).unwrap();
        assert_eq!(after, Configuration::new([Cell::passive(p(0, 0, 0)), Cell { orient: pivot_rotation(&m), ..Cell::passive(p(1, 0, 1)) }]).unwrap());
        assert!(after.is_connected().unwrap());
    }

    #[test]
    fn legality_failures_in_order() {
        let m = PivotMove::new(LatticePos::ORIGIN, fd([1, 1, 0]), fd([1, 0, 1])).unwrap();
        assert_eq!(check_move(&cfg(&[(0, 0, 0)]), &m), MoveLegality::MoverAbsent);
        assert_eq!(check_move(&cfg(&[(1, 1, 0), (2, 2, 0)]), &m), MoveLegality::SubstrateAbsent);
        let occupied = cfg(&[(0, 0, 0), (1, 1, 0), (1, 0, 1)]);
        assert_eq!(check_move(&occupied, &m), MoveLegality::DestinationOccupied);
        let line = cfg(&[(0, 0, 0), (1, 1, 0), (2, 2, 0)]);
        assert_eq!(check_move(&line, &m), MoveLegality::DisconnectsStructure);
        // (0, 1, 1) lies in the swept set of this roll.
        let blocked = cfg(&[(0, 0, 0), (1, 1, 0), (0, 1, 1)]);
        assert_eq!(check_move(&blocked, &m), MoveLegality::SweptVolumeBlocked);
        assert!(matches!(apply_move(&line, &m), Err(KinematicsError::IllegalMove(MoveLegality::DisconnectsStructure))));
    }

    #[test]
    fn strict_stability() {
        let rules = MoveRules { strict_stability: true };
        let c = cfg(&[(0, 0, 0), (1, 1, 0)]);
        let m = PivotMove::new(LatticePos::ORIGIN, fd([1, 1, 0]), fd([1, 0, 1])).unwrap();
        assert_eq!(check_move_with(&c, &m, rules), MoveLegality::InsufficientSupport);
        // (0, -1, 1) touches both the substrate and the destination.
        let c = cfg(&[(0, 0, 0), (1, 1, 0), (0, -1, 1)]);
        assert_eq!(check_move(&c, &m), MoveLegality::Legal);
        assert_eq!(check_move_with(&c, &m, rules), MoveLegality::Legal);
    }

    #[test]
    fn isolated_pair_has_four_pivots_per_contact() {
        for d in FaceDir::all() {
            let c = Configuration::from_positions([LatticePos::ORIGIN, d.as_pos()]).unwrap();
            let moves = legal_moves(&c, MoveRules::default());
            // Either cell may roll over the other.
            assert_eq!(moves.len(), 8);
            assert_eq!(moves.iter().filter(|m| m.mover() == d.as_pos()).count(), 4);
        }
    }

    fn arb_structure() -> impl Strategy<Value = Configuration> {
        // Random connected structure grown by attaching cells to existing ones.
        prop::collection::vec((0usize..64, 0usize..12, 0usize..24, any::<bool>()), 1..9).prop_map(|steps| {
            let mut c = Configuration::from_positions([LatticePos::ORIGIN]).unwrap();
            for (pick, dir, rot, active) in steps {
                let base = c.positions().nth(pick % c.len()).unwrap();
                let q = base.step(FaceDir::from_index(dir).unwrap());
                let kind = if active { CellKind::Active } else { CellKind::Passive };
                let _ = c.insert(Cell { pos: q, kind, orient: Rotation24::from_index(rot).unwrap() });
            }
            c
        })
    }

    proptest! {
        #[test]
        fn legal_moves_are_reversible(c in arb_structure()) {
            for m in legal_moves(&c, MoveRules::default()) {
                let after = apply_move(&c, &m).unwrap();
                prop_assert_eq!(after.len(), c.len());
                prop_assert!(after.is_connected().unwrap());
                let step = m.destination() - m.mover();
                prop_assert_eq!(lattice_distance(LatticePos::ORIGIN, step), 1);
                let back = m.reversed();
                prop_assert_eq!(check_move(&after, &back), MoveLegality::Legal);
                let restored = apply_move(&after, &back).unwrap();
                prop_assert_eq!(restored, c.clone());
            }
        }
    }
}
