//! Post-activation axial extension and curvatures.

use crate::activation::{coefficients_unchecked, ActivationCoefficients, ActivationState};
use crate::delta::deltas_at_radii;
use crate::design::ManipulatorDesign;
use crate::error::Result;
use crate::rotation::fiber_rotation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFields {
    pub zeta_hat: f64,
    /// Curvatures (û₁, û₂, û₃) in the director frame.
    pub u_hat: [f64; 3],
}

impl LocalFields {
    pub const IDENTITY: Self = Self {
        zeta_hat: 1.0,
        u_hat: [0.0; 3],
    };
}

/// Bending curvature `√(û₁² + û₂²)`; twist is excluded.
pub fn bending_curvature(fields: &LocalFields) -> f64 {
    fields.u_hat[0].hypot(fields.u_hat[1])
}

/// Evaluates ζ̂ and û at station `z` directly from the closed forms.
pub fn local_fields(design: &ManipulatorDesign, act: &ActivationState, z: f64) -> Result<LocalFields> {
    design.check_activation(act)?;
    let g = &design.geometry;
    let t = g.taper_radii(z)?;
    let r2_2 = t.r2 * t.r2;
    let r2_4 = r2_2 * r2_2;
    let nu = design.nu;

    let mut zeta = 1.0;
    let mut u = [0.0; 3];
    for (arch, gammas) in design.architectures.iter().zip(&act.gamma) {
        let d = deltas_at_radii(t.r1, t.r2, g.phi, arch.alpha, nu);
        let c = coefficients_unchecked(arch, gammas);
        let theta = fiber_rotation(g, arch.alpha, z)?;
        zeta += d.delta0 * c.a0 / (4.0 * r2_2);
        u[0] += -2.0 / (3.0 * r2_4) * d.delta1 * c.amplitude * (c.phase - theta).sin();
        u[1] += -2.0 / (3.0 * r2_4) * d.delta2 * c.amplitude * (c.phase - theta).cos();
        u[2] += 2.0 * (1.0 + nu) / (3.0 * r2_4) * d.delta3 * c.a0;
    }
    Ok(LocalFields {
        zeta_hat: zeta,
        u_hat: u,
    })
}

/// Activation-independent weights of one architecture at one station.
#[derive(Debug, Clone, Copy)]
struct StationWeights {
    axial: f64,
    bend: f64,
    twist: f64,
    cos_theta: f64,
    sin_theta: f64,
}

/// Precomputed per-station weights so that fields for many activations cost a
/// few multiplications each.
///
/// With `A cos φ = a₁` and `A sin φ = −b₁` the curvature terms expand to
/// `A sin(φ − Θ̃) = −b₁ cos Θ̃ − a₁ sin Θ̃` and `A cos(φ − Θ̃) = a₁ cos Θ̃ − b₁ sin Θ̃`.
#[derive(Debug, Clone)]
pub struct FieldTable {
    stations: Vec<f64>,
    n_arch: usize,
    weights: Vec<StationWeights>,
}

impl FieldTable {
    pub fn new(design: &ManipulatorDesign, stations: &[f64]) -> Result<Self> {
        let g = &design.geometry;
        let n_arch = design.architectures.len();
        let mut weights = Vec::with_capacity(stations.len() * n_arch);
        for &z in stations {
            let t = g.taper_radii(z)?;
            let r2_2 = t.r2 * t.r2;
            let r2_4 = r2_2 * r2_2;
            for arch in &design.architectures {
                let d = deltas_at_radii(t.r1, t.r2, g.phi, arch.alpha, design.nu);
                let (sin_theta, cos_theta) = fiber_rotation(g, arch.alpha, z)?.sin_cos();
                weights.push(StationWeights {
                    axial: d.delta0 / (4.0 * r2_2),
                    bend: -2.0 / (3.0 * r2_4) * d.delta1,
                    twist: 2.0 * (1.0 + design.nu) / (3.0 * r2_4) * d.delta3,
                    cos_theta,
                    sin_theta,
                });
            }
        }
        Ok(Self {
            stations: stations.to_vec(),
            n_arch,
            weights,
        })
    }

    /// Stations `0, L/(2s), …, L`: the grid points and midpoints of an
    /// `s`-step fixed-step scheme.
    pub fn half_step_grid(design: &ManipulatorDesign, steps: usize) -> Result<Self> {
        let l = design.geometry.length;
        let n = 2 * steps;
        let z: Vec<f64> = (0..=n).map(|k| l * k as f64 / n as f64).collect();
        Self::new(design, &z)
    }

    pub fn stations(&self) -> &[f64] {
        &self.stations
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    #[inline]
    pub fn fields(&self, station: usize, coeffs: &[ActivationCoefficients]) -> LocalFields {
        let w = &self.weights[station * self.n_arch..(station + 1) * self.n_arch];
        let mut zeta = 1.0;
        let mut u = [0.0; 3];
        for (w, c) in w.iter().zip(coeffs) {
            zeta += w.axial * c.a0;
            u[0] += w.bend * (-c.b1 * w.cos_theta - c.a1 * w.sin_theta);
            u[1] += w.bend * (c.a1 * w.cos_theta - c.b1 * w.sin_theta);
            u[2] += w.twist * c.a0;
        }
        LocalFields {
            zeta_hat: zeta,
            u_hat: u,
        }
    }
}

/// Activation coefficients for every architecture of `design`.
pub fn design_coefficients(design: &ManipulatorDesign, act: &ActivationState) -> Result<Vec<ActivationCoefficients>> {
    design.check_activation(act)?;
    Ok(design
        .architectures
        .iter()
        .zip(&act.gamma)
        .map(|(a, g)| coefficients_unchecked(a, g))
        .collect())
}

/// Same as [`design_coefficients`] for a flat activation vector, without
/// allocating per architecture.
pub(crate) fn flat_coefficients(design: &ManipulatorDesign, flat: &[f64], out: &mut Vec<ActivationCoefficients>) {
    out.clear();
    let mut offset = 0;
    for arch in &design.architectures {
        out.push(coefficients_unchecked(arch, &flat[offset..offset + arch.n]));
        offset += arch.n;
    }
}
