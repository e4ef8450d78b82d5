//! Convex polyhedron clipping, used to measure overlap volumes.

use super::{add, canonical_cell_mesh, cross, dot, norm, normalize, scale, sub, Vec3};

const PLANE_EPS: f64 = 1e-10;

/// A convex polyhedron as outward-oriented polygons plus its bounding
/// half-spaces `n·x ≤ d`.
#[derive(Debug, Clone)]
pub struct ConvexPolyhedron {
    pub faces: Vec<Vec<Vec3>>,
    pub planes: Vec<(Vec3, f64)>,
}

impl ConvexPolyhedron {
    /// The canonical cell transformed by `x ↦ f(x)`, where `f` must be a rigid
    /// motion.
    pub fn cell_with(f: impl Fn(Vec3) -> Vec3) -> ConvexPolyhedron {
        let mesh = canonical_cell_mesh();
        let faces: Vec<Vec<Vec3>> =
            (0..mesh.faces.len()).map(|i| mesh.face_points(i).map(&f).collect()).collect();
        let planes = faces
            .iter()
            .map(|poly| {
                let n = normalize(cross(sub(poly[1], poly[0]), sub(poly[2], poly[0])));
                (n, dot(n, poly[0]))
            })
            .collect();
        ConvexPolyhedron { faces, planes }
    }

    pub fn cell_at(center: Vec3) -> ConvexPolyhedron {
        ConvexPolyhedron::cell_with(|v| add(v, center))
    }

    pub fn volume(&self) -> f64 {
        polygon_soup_volume(&self.faces)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.planes.iter().all(|(n, d)| dot(*n, p) <= *d)
    }
}

fn polygon_soup_volume(faces: &[Vec<Vec3>]) -> f64 {
    let mut v = 0.0;
    for poly in faces {
        for i in 1..poly.len().saturating_sub(1) {
            v += dot(poly[0], cross(poly[i], poly[i + 1]));
        }
    }
    v / 6.0
}

/// Keeps the part of a closed convex surface with `n·x ≤ d`, capping the cut.
fn clip(faces: Vec<Vec<Vec3>>, n: Vec3, d: f64) -> Vec<Vec<Vec3>> {
    let mut out = Vec::with_capacity(faces.len() + 1);
    let mut on_plane: Vec<Vec3> = Vec::new();
    let mut coplanar_face = false;
    for poly in faces {
        let dist: Vec<f64> = poly.iter().map(|p| dot(n, *p) - d).collect();
        if dist.iter().all(|s| s.abs() <= PLANE_EPS) {
            // Already capped by an existing face lying in the plane.
            coplanar_face = true;
            out.push(poly);
            continue;
        }
        if dist.iter().all(|&s| s <= PLANE_EPS) {
            for (p, s) in poly.iter().zip(&dist) {
                if s.abs() <= PLANE_EPS {
                    on_plane.push(*p);
                }
            }
            out.push(poly);
            continue;
        }
        if dist.iter().all(|&s| s >= -PLANE_EPS) {
            for (p, s) in poly.iter().zip(&dist) {
                if s.abs() <= PLANE_EPS {
                    on_plane.push(*p);
                }
            }
            continue;
        }
        let mut kept = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let j = (i + 1) % poly.len();
            let (a, b) = (poly[i], poly[j]);
            let (sa, sb) = (dist[i], dist[j]);
            if sa <= PLANE_EPS {
                kept.push(a);
                if sa.abs() <= PLANE_EPS {
                    on_plane.push(a);
                }
            }
            if (sa < -PLANE_EPS && sb > PLANE_EPS) || (sa > PLANE_EPS && sb < -PLANE_EPS) {
                let t = sa / (sa - sb);
                let x = add(a, scale(sub(b, a), t));
                kept.push(x);
                on_plane.push(x);
            }
        }
        if kept.len() >= 3 {
            out.push(kept);
        }
    }
    if !coplanar_face {
        if let Some(cap) = cap_polygon(on_plane, n) {
            out.push(cap);
        }
    }
    out
}

/// Orders the cut points counter-clockwise about `n`.
fn cap_polygon(mut pts: Vec<Vec3>, n: Vec3) -> Option<Vec<Vec3>> {
    let mut uniq: Vec<Vec3> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if !uniq.iter().any(|q| norm(sub(*q, p)) < 1e-10) {
            uniq.push(p);
        }
    }
    if uniq.len() < 3 {
        return None;
    }
    let centroid = scale(uniq.iter().copied().fold([0.0; 3], add), 1.0 / uniq.len() as f64);
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(n, helper));
    let e2 = cross(n, e1);
    let mut keyed: Vec<(f64, Vec3)> = uniq
        .into_iter()
        .map(|p| {
            let r = sub(p, centroid);
            (dot(r, e2).atan2(dot(r, e1)), p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    Some(keyed.into_iter().map(|(_, p)| p).collect())
}

/// Volume of `a ∩ b` for convex polyhedra.
pub fn convex_intersection_volume(a: &ConvexPolyhedron, b: &ConvexPolyhedron) -> f64 {
    let mut faces = a.faces.clone();
    for &(n, d) in &b.planes {
        faces = clip(faces, n, d);
        if faces.len() < 4 {
            return 0.0;
        }
    }
    polygon_soup_volume(&faces).max(0.0)
}
