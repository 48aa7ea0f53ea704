use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachcloud_hull::*;

type Point = [f64; 3];

fn in_ball(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p: Point = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            pts.push(p);
        }
    }
    pts
}

/// Uniform samples inside the torus with radii `big` and `small` about z.
fn in_torus(n: usize, big: f64, small: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = big + small;
    let mut pts = Vec::with_capacity(n);
    while pts.len() < n {
        let p: Point = [rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-small..small)];
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if (rho - big).powi(2) + p[2] * p[2] <= small * small {
            pts.push(p);
        }
    }
    pts
}

#[test]
fn cube_corners() {
    let pts: Vec<Point> = (0..8)
        .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
        .collect();
    let hull = convex_hull(&pts).unwrap();
    assert_eq!(hull.faces.len(), 12);
    assert!((mesh_volume(&hull).unwrap() - 1.0).abs() < 1e-14);
    let shape = alpha_shape(&pts, 1e6).unwrap();
    assert!((shape.volume - 1.0).abs() < 1e-14);
}

#[test]
fn ball_convex_volume() {
    let pts = in_ball(10_000, 1);
    let hull = convex_hull(&pts).unwrap();
    assert!(hull.is_closed() && hull.is_two_manifold());
    let v = mesh_volume(&hull).unwrap();
    let exact = 4.0 / 3.0 * PI;
    assert!((v / exact - 1.0).abs() < 0.05, "{v}");
    assert!(v <= exact);
}

#[test]
fn ball_voxel_volume() {
    let pts = in_ball(300_000, 2);
    let v = voxel_volume(&pts, 2.0 / 64.0).unwrap();
    let exact = 4.0 / 3.0 * PI;
    assert!((v.volume / exact - 1.0).abs() < 0.10, "{v:?}");
}

#[test]
fn thick_torus_alpha_volume() {
    let (big, small) = (1.0, 0.5);
    let n = 20_000;
    let exact = 2.0 * PI * PI * big * small * small;
    let pts = in_torus(n, big, small, 3);
    let spacing = (exact / n as f64).cbrt();
    let shape = alpha_shape(&pts, 2.0 * spacing).unwrap();
    assert!((shape.volume / exact - 1.0).abs() < 0.10, "{}", shape.volume);
    assert!(shape.mesh.is_closed());
    assert!((mesh_volume(&shape.mesh).unwrap() - shape.volume).abs() < 1e-9);
    // The hole must survive.
    let hull = mesh_volume(&convex_hull(&pts).unwrap()).unwrap();
    assert!(shape.volume < 0.8 * hull);
}

#[test]
fn torus_analysis_matches_voxel_oracle() {
    let pts = in_torus(20_000, 1.0, 0.5, 4);
    let r = analyze_points(&pts, AlphaChoice::Auto).unwrap();
    let s = r.selection.unwrap();
    assert!(s.matched);
    assert!((r.v_concave / s.voxel_volume - 1.0).abs() <= 0.10);
    assert!(r.v_concave <= r.v_convex);
    assert!(!r.thinness_flag);
    assert_eq!(r.unr, unreachability(r.v_concave, r.v_convex).unwrap());
    let json = serde_json::to_string(&r.metrics()).unwrap();
    let back: HullMetrics = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r.metrics());
}

#[test]
fn flat_slab_is_flagged_thin() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts: Vec<Point> = (0..5000)
        .map(|_| [rng.gen(), rng.gen(), 0.002 * rng.gen::<f64>()])
        .collect();
    let r = analyze_points(&pts, AlphaChoice::Multiplier(8.0)).unwrap();
    assert!(r.thinness_flag);
    assert!(r.v_concave > 0.0);
}

#[test]
fn rigid_motion_invariance() {
    let pts = in_torus(3000, 1.0, 0.4, 5);
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let (c2, s2) = (1.1f64.cos(), 1.1f64.sin());
    let moved: Vec<Point> = pts
        .iter()
        .map(|p| {
            let q = [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]];
            let q = [q[0], c2 * q[1] - s2 * q[2], s2 * q[1] + c2 * q[2]];
            [q[0] + 3.5, q[1] - 1.25, q[2] + 0.75]
        })
        .collect();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs();
    let ha = mesh_volume(&convex_hull(&pts).unwrap()).unwrap();
    let hb = mesh_volume(&convex_hull(&moved).unwrap()).unwrap();
    assert!(rel(ha, hb) < 1e-9);
    let a = alpha_shape(&pts, 0.3).unwrap().volume;
    let b = alpha_shape(&moved, 0.3).unwrap().volume;
    assert!(rel(a, b) < 1e-9, "{a} {b}");
}

#[test]
fn alpha_below_spacing_is_empty() {
    let pts = in_ball(500, 7);
    assert!(matches!(alpha_shape(&pts, 1e-4), Err(HullError::EmptyShape { .. })));
}

#[test]
fn grid_gives_alpha_from_spacing() {
    let mut pts = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            for k in 0..8 {
                pts.push([0.25 * i as f64, 0.25 * j as f64, 0.25 * k as f64]);
            }
        }
    }
    let sel = auto_alpha(&pts).unwrap();
    assert!((sel.median_nn - 0.25).abs() < 1e-12);
    assert!((sel.alpha - sel.multiplier * 0.25).abs() < 1e-12);
}

#[test]
fn ply_and_off_round_trip_hull_mesh() {
    let hull = convex_hull(&in_ball(2000, 8)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("hull.ply");
    hull.write_ply(&p).unwrap();
    assert_eq!(TriangleMesh::read_ply(&p).unwrap(), hull);
    let o = dir.path().join("hull.off");
    hull.write_off(&o).unwrap();
    assert_eq!(TriangleMesh::read_off(&o).unwrap(), hull);
}

fn cloud() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 12..150)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn alpha_volume_monotone_and_bounded(pts in cloud()) {
        let Ok(c) = AlphaComplex::new(&pts) else { return Ok(()) };
        let hull = mesh_volume(&convex_hull(&pts).unwrap()).unwrap();
        prop_assert!((c.total_volume() - hull).abs() <= 1e-9 * hull);
        let mut last = 0.0;
        for a in [0.1, 0.2, 0.3, 0.5, 0.8, 1.5, f64::INFINITY] {
            let v = match c.shape(a) {
                Ok(s) => {
                    prop_assert!(s.mesh.is_closed());
                    s.volume
                }
                Err(HullError::EmptyShape { .. }) => 0.0,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!(v >= last - 1e-12);
            prop_assert!(v <= hull * (1.0 + 1e-9));
            last = v;
        }
        prop_assert!((last - hull).abs() <= 1e-9 * hull);
    }

    #[test]
    fn hull_contains_every_point(pts in cloud()) {
        let Ok(h) = convex_hull(&pts) else { return Ok(()) };
        prop_assert!(h.is_closed() && h.is_two_manifold());
        for p in &pts {
            for f in &h.faces {
                let [a, b, c] = f.map(|i| h.vertices[i as usize]);
                prop_assert!(predicates::orient(&a, &b, &c, p) <= 0.0);
            }
        }
    }

    #[test]
    fn unreachability_in_unit_interval(a in 1e-6f64..10.0, b in 1e-6f64..10.0) {
        let u = unreachability(a.min(b), a.max(b)).unwrap();
        prop_assert!((0.0..=1.0).contains(&u));
    }
}
