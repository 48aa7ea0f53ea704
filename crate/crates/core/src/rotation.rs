//! Azimuthal rotation of helical fibers along a tapered body.

use crate::error::Result;
use crate::geometry::TaperedGeometry;

/// Below this taper angle the rotation uses its small-angle series.
pub const PHI_TOL: f64 = 1e-6;

/// Rotation per unit `tan α` accumulated over `[0, z]` on the outer surface,
/// `−ln(f(z)) / sin φ`. With `x = z tan φ / R₂(0)` this equals
/// `z / (R₂(0) cos φ) · (−ln(1−x)/x)`, which is what the series branch expands.
fn rotation_per_tan(geometry: &TaperedGeometry, z: f64) -> f64 {
    if geometry.phi <= PHI_TOL {
        rotation_per_tan_series(geometry, z)
    } else {
        rotation_per_tan_closed(geometry, z)
    }
}

fn rotation_per_tan_closed(geometry: &TaperedGeometry, z: f64) -> f64 {
    let x = z * geometry.phi.tan() / geometry.r2_0;
    -(-x).ln_1p() / geometry.phi.sin()
}

fn rotation_per_tan_series(geometry: &TaperedGeometry, z: f64) -> f64 {
    let x = z * geometry.phi.tan() / geometry.r2_0;
    let log_ratio = 1.0 + x / 2.0 + x * x / 3.0 + x * x * x / 4.0;
    z / (geometry.r2_0 * geometry.phi.cos()) * log_ratio
}

/// Total fiber rotation Θ̃₂ over `[0, z]` for helical angle `alpha`.
pub fn fiber_rotation(geometry: &TaperedGeometry, alpha: f64, z: f64) -> Result<f64> {
    let z = geometry.check_station(z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok(alpha.tan() * rotation_per_tan(geometry, z))
}

/// Helical angle whose fiber completes `omega` radians of revolution over the
/// full length.
pub fn helical_angle_from_revolution(geometry: &TaperedGeometry, omega: f64) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    (omega / rotation_per_tan(geometry, geometry.length)).atan()
}
