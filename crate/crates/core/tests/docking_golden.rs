//! The default four-magnet rhombic profile against its recorded golden set.

use rhombikit::docking::{default_rhombic_positions, enumerate_valid_layouts, pattern_from_mask, validate_genderless, CellLayout, FaceLayout};
use rhombikit::Polarity;
use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    format_version: u32,
    symmetry: usize,
    share_one_pattern_across_faces: bool,
    positions: Vec<[f64; 2]>,
    valid_patterns: Vec<Vec<Polarity>>,
}

fn golden() -> Golden {
    serde_json::from_str(include_str!("golden/rhombic_default_layouts.json")).unwrap()
}

/// Hand-derived oracle. A face meets a mirrored copy of itself, (u, v) ↦
/// (u, −v), either directly or after a half turn, (u, v) ↦ (−u, v). With
/// magnets ordered (+,+), (+,−), (−,+), (−,−) the first pairs 0↔1 and 2↔3,
/// the second 0↔2 and 1↔3; every pair must be opposite.
fn planar_oracle(p: &[Polarity]) -> bool {
    p[0] != p[1] && p[2] != p[3] && p[0] != p[2] && p[1] != p[3]
}

#[test]
fn golden_matches_enumeration() {
    let g = golden();
    assert_eq!(g.format_version, 1);
    let positions = default_rhombic_positions();
    assert_eq!(positions.len(), g.positions.len());
    for (a, b) in positions.iter().zip(&g.positions) {
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12, "{a:?} vs {b:?}");
    }
    let found = enumerate_valid_layouts(&positions, g.symmetry, g.share_one_pattern_across_faces).unwrap();
    assert_eq!(found, g.valid_patterns);
}

#[test]
fn golden_matches_planar_oracle() {
    let g = golden();
    let oracle: Vec<Vec<Polarity>> = (0..16).map(|m| pattern_from_mask(m, 4)).filter(|p| planar_oracle(p)).collect();
    assert_eq!(oracle, g.valid_patterns);
}

#[test]
fn golden_patterns_are_genderless_and_others_are_not() {
    let g = golden();
    let positions = default_rhombic_positions();
    for mask in 0..16 {
        let pattern = pattern_from_mask(mask, 4);
        let layout = CellLayout::uniform(FaceLayout::from_pattern(&positions, &pattern).unwrap()).unwrap();
        let check = validate_genderless(&layout).unwrap();
        assert_eq!(check.is_genderless(), g.valid_patterns.contains(&pattern), "mask {mask}");
        assert_eq!(check.counterexample.is_none(), check.is_genderless());
    }
}
