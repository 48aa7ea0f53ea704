//! Integration of the centerline and director frames along the rod.
//!
//! The frame is stored as a unit quaternion `q` mapping body components to
//! world components, so `dᵢ = q eᵢ q*`. With body-frame Darboux components
//! `û` the kinematics become
//!
//! ```text
//! r′ = ζ̂ d₃,    q′ = ½ q ⊗ (0, ζ̂ û)
//! ```
//!
//! integrated by classical fixed-step RK4 with the quaternion renormalized
//! after every step.

use std::io::Write;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::activation::ActivationState;
use crate::design::ManipulatorDesign;
use crate::error::{ModelError, Result};
use crate::fields::{bending_curvature, design_coefficients, FieldTable, LocalFields};

pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Clone)]
pub struct RodConfiguration {
    pub z_grid: Vec<f64>,
    pub centerline: Vec<Vector3<f64>>,
    pub frames: Vec<UnitQuaternion<f64>>,
    pub fields: Vec<LocalFields>,
}

#[inline]
fn tangent(q: &Quaternion<f64>) -> Vector3<f64> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    let n2 = w * w + x * x + y * y + z * z;
    Vector3::new(
        2.0 * (x * z + w * y),
        2.0 * (y * z - w * x),
        w * w - x * x - y * y + z * z,
    ) / n2
}

#[inline]
fn derivative(q: &Quaternion<f64>, f: &LocalFields) -> (Vector3<f64>, Quaternion<f64>) {
    let omega = Quaternion::new(
        0.0,
        f.zeta_hat * f.u_hat[0],
        f.zeta_hat * f.u_hat[1],
        f.zeta_hat * f.u_hat[2],
    );
    (tangent(q) * f.zeta_hat, q * omega * 0.5)
}

/// One RK4 step given the fields at the start, midpoint and end of the step.
#[inline]
fn rk4_step(
    r: &mut Vector3<f64>,
    q: &mut Quaternion<f64>,
    h: f64,
    f0: &LocalFields,
    fm: &LocalFields,
    f1: &LocalFields,
) {
    let (k1r, k1q) = derivative(q, f0);
    let (k2r, k2q) = derivative(&(*q + k1q * (0.5 * h)), fm);
    let (k3r, k3q) = derivative(&(*q + k2q * (0.5 * h)), fm);
    let (k4r, k4q) = derivative(&(*q + k3q * h), f1);
    *r += (k1r + (k2r + k3r) * 2.0 + k4r) * (h / 6.0);
    *q += (k1q + (k2q + k3q) * 2.0 + k4q) * (h / 6.0);
    *q /= q.norm();
}

/// Integrates with fields supplied on the half-step grid: `fields(k)` is
/// evaluated at `Z = k·h/2`. Calls `visit(i, r, q)` at every grid station.
pub fn integrate_fields<F, V>(length: f64, steps: usize, fields: F, mut visit: V) -> Vector3<f64>
where
    F: Fn(usize) -> LocalFields,
    V: FnMut(usize, &Vector3<f64>, &Quaternion<f64>),
{
    let h = length / steps as f64;
    let mut r = Vector3::zeros();
    let mut q = Quaternion::identity();
    visit(0, &r, &q);
    let mut f0 = fields(0);
    for i in 0..steps {
        let fm = fields(2 * i + 1);
        let f1 = fields(2 * i + 2);
        rk4_step(&mut r, &mut q, h, &f0, &fm, &f1);
        visit(i + 1, &r, &q);
        f0 = f1;
    }
    r
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < 2 {
        return Err(ModelError::Parameter(format!("steps must be >= 2, got {steps}")));
    }
    Ok(())
}

/// Full configuration: centerline, frames and fields at `steps + 1` stations.
pub fn integrate(design: &ManipulatorDesign, act: &ActivationState, steps: usize) -> Result<RodConfiguration> {
    check_steps(steps)?;
    let coeffs = design_coefficients(design, act)?;
    let table = FieldTable::half_step_grid(design, steps)?;
    let mut config = RodConfiguration {
        z_grid: Vec::with_capacity(steps + 1),
        centerline: Vec::with_capacity(steps + 1),
        frames: Vec::with_capacity(steps + 1),
        fields: Vec::with_capacity(steps + 1),
    };
    integrate_fields(
        design.geometry.length,
        steps,
        |k| table.fields(k, &coeffs),
        |i, r, q| {
            config.z_grid.push(table.stations()[2 * i]);
            config.centerline.push(*r);
            config.frames.push(UnitQuaternion::new_unchecked(*q));
            config.fields.push(table.fields(2 * i, &coeffs));
        },
    );
    Ok(config)
}

/// Tip position only; bit-identical to the last station of [`integrate`].
pub fn tip_from_table(
    table: &FieldTable,
    coeffs: &[crate::activation::ActivationCoefficients],
    length: f64,
    steps: usize,
) -> Vector3<f64> {
    integrate_fields(length, steps, |k| table.fields(k, coeffs), |_, _, _| {})
}

pub fn end_effector(config: &RodConfiguration) -> Vector3<f64> {
    *config.centerline.last().expect("configuration has stations")
}

impl RodConfiguration {
    /// Largest deviation of the director triad from orthonormality.
    pub fn max_frame_defect(&self) -> f64 {
        self.frames
            .iter()
            .map(|q| {
                let m = q.to_rotation_matrix().into_inner();
                (m.transpose() * m - nalgebra::Matrix3::identity()).abs().max()
            })
            .fold(0.0, f64::max)
    }

    /// Polygonal arclength of the centerline.
    pub fn arclength(&self) -> f64 {
        self.centerline.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Writes `Z,x,y,z,qw,qx,qy,qz,zeta,u1,u2,u3,kappa` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "Z,x,y,z,qw,qx,qy,qz,zeta,u1,u2,u3,kappa")?;
        for i in 0..self.z_grid.len() {
            let r = &self.centerline[i];
            let q = self.frames[i].quaternion();
            let f = &self.fields[i];
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.z_grid[i],
                r.x,
                r.y,
                r.z,
                q.w,
                q.i,
                q.j,
                q.k,
                f.zeta_hat,
                f.u_hat[0],
                f.u_hat[1],
                f.u_hat[2],
                bending_curvature(f)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub error: f64,
}

/// Tip error for each resolution against `reference`, or against the finest
/// resolution in `steps_list` when no reference is given (that row is then
/// omitted).
pub fn convergence_report(
    design: &ManipulatorDesign,
    act: &ActivationState,
    steps_list: &[usize],
    reference: Option<Vector3<f64>>,
) -> Result<Vec<ConvergenceRow>> {
    if steps_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModelError::Parameter("steps_list must be strictly ascending".into()));
    }
    let tips = steps_list
        .iter()
        .map(|&s| integrate(design, act, s).map(|c| end_effector(&c)))
        .collect::<Result<Vec<_>>>()?;
    let (reference, n) = match reference {
        Some(r) => (r, tips.len()),
        None => match tips.last() {
            Some(r) => (*r, tips.len() - 1),
            None => return Ok(Vec::new()),
        },
    };
    Ok(steps_list[..n]
        .iter()
        .zip(&tips)
        .map(|(&steps, tip)| ConvergenceRow {
            steps,
            error: (tip - reference).norm(),
        })
        .collect())
}

/// Observed order between consecutive rows, `log(e₁/e₂) / log(s₂/s₁)`.
pub fn observed_orders(rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[1].steps as f64 / w[0].steps as f64).ln())
        .collect()
}

/// Tip of a rod with constant ζ̂ and body-frame Darboux vector `u`, from the
/// rigid-rotation closed form.
pub fn constant_darboux_tip(length: f64, zeta: f64, u: Vector3<f64>) -> Vector3<f64> {
    let e3 = Vector3::z();
    let w = u.norm();
    if w == 0.0 {
        return e3 * (zeta * length);
    }
    let n = u / w;
    let a = zeta * w * length;
    let s = zeta * length;
    (e3 * (a.sin() / a) + n.cross(&e3) * ((1.0 - a.cos()) / a) + n * n.dot(&e3) * (1.0 - a.sin() / a)) * s
}
