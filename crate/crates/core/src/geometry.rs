//! Linearly tapered tubular geometry.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Relative slack allowed when a station lands a few ulps past the tip.
const Z_SLACK: f64 = 1e-12;

/// Truncated-cone manipulator body with a fiber ring between `r1_0` and `r2_0`
/// at the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperedGeometry {
    pub length: f64,
    pub r2_0: f64,
    pub r1_0: f64,
    /// Half-angle of the outer cone surface, radians.
    pub phi: f64,
}

/// Radii at one station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Taper {
    pub r1: f64,
    pub r2: f64,
    /// Normalized profile, `r2 / r2_0`.
    pub f: f64,
}

impl TaperedGeometry {
    /// Unit-length body with outer radius L/16 and inner radius 3L/64.
    pub fn reference(phi: f64) -> Self {
        Self {
            length: 1.0,
            r2_0: 1.0 / 16.0,
            r1_0: 3.0 / 64.0,
            phi,
        }
    }

    pub fn profile(&self, z: f64) -> f64 {
        1.0 - z * self.phi.tan() / self.r2_0
    }

    pub fn taper_radii(&self, z: f64) -> Result<Taper> {
        let z = self.check_station(z)?;
        let f = self.profile(z);
        Ok(Taper {
            r1: self.r1_0 * f,
            r2: self.r2_0 * f,
            f,
        })
    }

    /// Clamps stations within rounding distance of the ends and rejects the rest.
    pub(crate) fn check_station(&self, z: f64) -> Result<f64> {
        let slack = Z_SLACK * self.length;
        if !(z >= -slack && z <= self.length + slack) {
            return Err(ModelError::Domain {
                quantity: "Z",
                value: z,
                range: format!("[0, {}]", self.length),
            });
        }
        Ok(z.clamp(0.0, self.length))
    }

    pub fn tip_radius(&self) -> f64 {
        self.r2_0 - self.length * self.phi.tan()
    }

    /// Returns a copy with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            length: self.length * s,
            r2_0: self.r2_0 * s,
            r1_0: self.r1_0 * s,
            phi: self.phi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untapered_profile_is_flat() {
        let g = TaperedGeometry::reference(0.0);
        for z in [0.0, 0.3, 1.0] {
            let t = g.taper_radii(z).unwrap();
            assert_eq!(t.f, 1.0);
            assert_eq!(t.r2, g.r2_0);
            assert_eq!(t.r1, g.r1_0);
        }
    }

    #[test]
    fn three_degree_taper_ratio() {
        let g = TaperedGeometry::reference(3f64.to_radians());
        let t = g.taper_radii(1.0).unwrap();
        assert!((t.f - (1.0 - 16.0 * 3f64.to_radians().tan())).abs() < 1e-15);
        let ratio = g.r2_0 / t.r2;
        assert!((ratio - 6.19).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn one_degree_midpoint() {
        // 1 - 0.5 * tan(1 deg) * 16, evaluated by hand: tan(1 deg) = 0.017455064928217585
        let g = TaperedGeometry::reference(1f64.to_radians());
        let t = g.taper_radii(0.5).unwrap();
        assert!((t.f - 0.860_359_480_574_259_3).abs() < 1e-14);
        assert!((t.r1 / t.r2 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn station_outside_length_is_rejected() {
        let g = TaperedGeometry::reference(0.0);
        assert!(g.taper_radii(-0.01).is_err());
        assert!(g.taper_radii(1.01).is_err());
        assert!(g.taper_radii(f64::NAN).is_err());
        assert!(g.taper_radii(1.0 + 1e-14).is_ok());
    }
}
