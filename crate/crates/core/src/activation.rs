use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// One helical fiber architecture: `n` equidistant bundles of angular extent
/// `sigma`, the first centered at `theta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberArchitecture {
    pub alpha: f64,
    pub sigma: f64,
    pub theta0: f64,
    pub n: usize,
}

impl FiberArchitecture {
    pub fn bundle_angle(&self, j: usize) -> f64 {
        self.theta0 + 2.0 * PI * j as f64 / self.n as f64
    }
}

/// Fourier coefficients of the activation pattern of one architecture.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActivationCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub amplitude: f64,
    pub phase: f64,
}

pub fn activation_coefficients(arch: &FiberArchitecture, gammas: &[f64]) -> Result<ActivationCoefficients> {
    if gammas.len() != arch.n {
        return Err(ModelError::Shape(format!(
            "architecture has {} bundles, got {} activations",
            arch.n,
            gammas.len()
        )));
    }
    Ok(coefficients_unchecked(arch, gammas))
}

pub(crate) fn coefficients_unchecked(arch: &FiberArchitecture, gammas: &[f64]) -> ActivationCoefficients {
    let a0 = arch.sigma / PI * gammas.iter().sum::<f64>();
    let k = 2.0 * (arch.sigma / 2.0).sin() / PI;
    let (mut a1, mut b1) = (0.0, 0.0);
    for (j, g) in gammas.iter().enumerate() {
        let (s, c) = arch.bundle_angle(j).sin_cos();
        a1 += g * c;
        b1 += g * s;
    }
    a1 *= k;
    b1 *= k;
    let amplitude = a1.hypot(b1);
    // atan2(0, 0) is taken as 0 so that zero activation has a defined phase.
    let phase = if a1 == 0.0 && b1 == 0.0 { 0.0 } else { -b1.atan2(a1) };
    ActivationCoefficients {
        a0,
        a1,
        b1,
        amplitude,
        phase,
    }
}

/// Per-architecture, per-bundle activation values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationState {
    pub gamma: Vec<Vec<f64>>,
}

impl ActivationState {
    pub fn zeros(layout: &[usize]) -> Self {
        Self {
            gamma: layout.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Splits a flat activation vector according to the bundle layout.
    pub fn from_flat(layout: &[usize], flat: &[f64]) -> Result<Self> {
        let total: usize = layout.iter().sum();
        if flat.len() != total {
            return Err(ModelError::Shape(format!(
                "expected {total} activations, got {}",
                flat.len()
            )));
        }
        let mut rest = flat;
        let gamma = layout
            .iter()
            .map(|&n| {
                let (head, tail) = rest.split_at(n);
                rest = tail;
                head.to_vec()
            })
            .collect();
        Ok(Self { gamma })
    }

    pub fn flat(&self) -> Vec<f64> {
        self.gamma.iter().flatten().copied().collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            gamma: self
                .gamma
                .iter()
                .map(|row| row.iter().map(|g| g * s).collect())
                .collect(),
        }
    }
}
