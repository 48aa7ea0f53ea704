//! Agreement with an independent 60-digit evaluation of the closed-form model.
//! The fixture is produced by `fixtures/model_oracle.py`.

use reachcloud_core::delta::{delta3_complex, delta_coefficients};
use reachcloud_core::{
    fiber_rotation, helical_angle_from_revolution, local_fields, minimal_design, ActivationState, FiberArchitecture,
    ManipulatorDesign, TaperedGeometry,
};
use serde_json::Value;

const REL: f64 = 1e-10;

fn fixture() -> Value {
    serde_json::from_str(include_str!("fixtures/model_oracle.json")).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn geometry(p: &Value) -> TaperedGeometry {
    TaperedGeometry {
        length: 1.0,
        r2_0: num(&p["r2_0"]),
        r1_0: num(&p["r1_0"]),
        phi: num(&p["phi"]),
    }
}

#[test]
fn deltas_and_rotation_at_random_points() {
    let fx = fixture();
    let points = fx["delta_points"].as_array().unwrap();
    assert_eq!(points.len(), 100);
    let mut worst = [0.0f64; 5];
    for p in points {
        let g = geometry(p);
        let (alpha, nu, z) = (num(&p["alpha"]), num(&p["nu"]), num(&p["z"]));
        let d = delta_coefficients(&g, alpha, nu, z).unwrap();
        let errs = [
            rel_err(g.profile(z), num(&p["f"])),
            rel_err(fiber_rotation(&g, alpha, z).unwrap(), num(&p["rotation"])),
            rel_err(d.delta0, num(&p["delta0"])),
            rel_err(d.delta1, num(&p["delta1"])),
            rel_err(d.delta3, num(&p["delta3"])),
        ];
        assert_eq!(d.delta1, d.delta2);
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    for (name, w) in ["f", "rotation", "delta0", "delta1", "delta3"].iter().zip(worst) {
        assert!(w < REL, "{name}: worst relative error {w:e}");
    }
}

#[test]
fn complex_route_agrees_at_random_points() {
    let fx = fixture();
    for p in fx["delta_points"].as_array().unwrap() {
        let g = geometry(p);
        let (alpha, z) = (num(&p["alpha"]), num(&p["z"]));
        let t = g.taper_radii(z).unwrap();
        let d = delta_coefficients(&g, alpha, num(&p["nu"]), z).unwrap();
        let c = delta3_complex(t.r1, t.r2, d.c_phi, d.c_alpha);
        let want = num(&p["delta3"]);
        assert!(c.im.abs() < 1e-8 * want.abs(), "imaginary residue {}", c.im);
        // The complex form cancels catastrophically at small c_φ, c_α; it only
        // serves as a coarse second route.
        assert!(rel_err(c.re, want) < 1e-4, "{} vs {want}", c.re);
    }
}

fn design(p: &Value) -> ManipulatorDesign {
    let d = &p["design"];
    ManipulatorDesign {
        geometry: geometry(d),
        nu: num(&d["nu"]),
        architectures: d["architectures"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| FiberArchitecture {
                alpha: num(&a["alpha"]),
                sigma: num(&a["sigma"]),
                theta0: num(&a["theta0"]),
                n: a["n"].as_u64().unwrap() as usize,
            })
            .collect(),
    }
}

#[test]
fn fields_at_random_points() {
    let fx = fixture();
    let points = fx["field_points"].as_array().unwrap();
    assert_eq!(points.len(), 100);
    for p in points {
        let d = design(p);
        let act = ActivationState {
            gamma: p["gammas"]
                .as_array()
                .unwrap()
                .iter()
                .map(|row| row.as_array().unwrap().iter().map(num).collect())
                .collect(),
        };
        let f = local_fields(&d, &act, num(&p["z"])).unwrap();
        assert!(rel_err(f.zeta_hat, num(&p["zeta"])) < REL);
        let want: Vec<f64> = p["u"].as_array().unwrap().iter().map(num).collect();
        let scale = want.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..3 {
            let e = (f.u_hat[i] - want[i]).abs() / scale;
            assert!(e < REL, "u[{i}]: {} vs {} ({e:e})", f.u_hat[i], want[i]);
        }
    }
}

#[test]
fn untapered_unhelical_limit() {
    let fx = fixture();
    let z = &fx["zero_limit"];
    let g = TaperedGeometry::reference(0.0);
    let d = delta_coefficients(&g, 0.0, 0.5, 0.0).unwrap();
    assert!(rel_err(d.delta0, num(&z["analytic"]["delta0"])) < 1e-15);
    assert!(rel_err(d.delta1, num(&z["analytic"]["delta1"])) < 1e-15);
    assert_eq!(d.delta3, 0.0);

    let r2 = g.r2_0;
    let g = TaperedGeometry::reference((1e-6 * r2).atan());
    let d = delta_coefficients(&g, (1.3e-6 * r2).atan(), 0.5, 0.0).unwrap();
    let pert = &z["perturbed"];
    assert!(rel_err(d.delta0, num(&pert["delta0"])) < REL);
    assert!(rel_err(d.delta1, num(&pert["delta1"])) < REL);
    assert!(rel_err(d.delta3, num(&pert["delta3"])) < REL);
}

#[test]
fn reference_example_point() {
    let fx = fixture();
    let e = &fx["example_point"];
    let g = TaperedGeometry::reference(2f64.to_radians());
    let d = delta_coefficients(&g, 6.72f64.to_radians(), 0.5, 0.0).unwrap();
    assert!(rel_err(d.delta0, num(&e["delta0"])) < REL);
    assert!(rel_err(d.delta1, num(&e["delta1"])) < REL);
    assert!(rel_err(d.delta3, num(&e["delta3"])) < REL);
}

#[test]
fn minimal_design_longitudinal_contraction() {
    let fx = fixture();
    let m = &fx["minimal_longitudinal"];
    let d = minimal_design(108f64.to_radians(), 2f64.to_radians());
    let alpha = helical_angle_from_revolution(&d.geometry, 108f64.to_radians());
    assert!(rel_err(alpha, num(&m["alpha"])) < 1e-13);
    let act = ActivationState {
        gamma: vec![vec![0.0], vec![0.0], vec![-1.0]],
    };
    let f = local_fields(&d, &act, 0.0).unwrap();
    assert!(rel_err(f.zeta_hat, num(&m["zeta"])) < REL);
    assert!(rel_err(f.u_hat[0], num(&m["u"][0])) < REL);
    assert!(f.u_hat[1].abs() < 1e-12 && f.u_hat[2].abs() < 1e-12);
}
