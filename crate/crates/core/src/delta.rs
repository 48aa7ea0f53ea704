//! Cross-sectional coefficients δ₀…δ₃ of the active-filament model.
//!
//! Each coefficient is an integral over the fiber ring `R ∈ [R₁, R₂]` of a
//! weight built from `c_φ = tan φ / R₂` and `c_α = tan α / R₂`:
//!
//! ```text
//! δ₀ = 2ν(R₁² − R₂²) + 2(1+ν) ∫ 2R  / ((1+c_φ²R²)(1+c_α²R²)) dR
//! δ₁ = 2ν(R₁³ − R₂³) + 6(1+ν) ∫ R²  / ((1+c_φ²R²)(1+c_α²R²)) dR   (= δ₂)
//! δ₃ = 6 c_α              ∫ R³  / ((1+c_α²R²) √(1+c_φ²R²))  dR
//! ```
//!
//! The closed forms of these integrals have removable singularities at
//! `c_α = 0`, `c_φ = 0` and `c_φ = c_α`. Writing `∫₀^R g = R^k · I(R²c_φ², R²c_α²)`
//! moves everything onto dimensionless kernels `I(a, b)` that are evaluated by
//! a cancellation-free power series near the singular set and by a real closed
//! form elsewhere. [`delta3_complex`] keeps the complex-valued closed form as a
//! second route.

use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::TaperedGeometry;

/// Kernels switch to their power series when both arguments are below this.
const SERIES_LIMIT: f64 = 0.5;
const SERIES_MAX_TERMS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaSet {
    pub delta0: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub c_phi: f64,
    pub c_alpha: f64,
}

/// Evaluates the coefficients at station `z` for a fiber with helical angle `alpha`.
pub fn delta_coefficients(geometry: &TaperedGeometry, alpha: f64, nu: f64, z: f64) -> Result<DeltaSet> {
    let t = geometry.taper_radii(z)?;
    Ok(deltas_at_radii(t.r1, t.r2, geometry.phi, alpha, nu))
}

pub(crate) fn deltas_at_radii(r1: f64, r2: f64, phi: f64, alpha: f64, nu: f64) -> DeltaSet {
    let c_phi = phi.tan() / r2;
    let c_alpha = alpha.tan() / r2;
    let p = c_phi * c_phi;
    let q = c_alpha * c_alpha;
    let (a1, b1) = (r1 * r1 * p, r1 * r1 * q);
    let (a2, b2) = (r2 * r2 * p, r2 * r2 * q);

    let delta0 = 2.0 * nu * (r1 * r1 - r2 * r2)
        + 2.0 * (1.0 + nu) * (r2 * r2 * log_kernel(a2, b2) - r1 * r1 * log_kernel(a1, b1));
    let delta1 = 2.0 * nu * (r1.powi(3) - r2.powi(3))
        + 6.0 * (1.0 + nu) * (r2.powi(3) * bending_kernel(a2, b2) - r1.powi(3) * bending_kernel(a1, b1));
    let delta3 = 6.0 * c_alpha * (r2.powi(4) * twist_kernel(a2, b2) - r1.powi(4) * twist_kernel(a1, b1));

    DeltaSet {
        delta0,
        delta1,
        delta2: delta1,
        delta3,
        c_phi,
        c_alpha,
    }
}

/// `∫₀¹ 2t / ((1+at²)(1+bt²)) dt = ln((1+a)/(1+b)) / (a − b)`.
pub(crate) fn log_kernel(a: f64, b: f64) -> f64 {
    let x = (a - b) / (1.0 + b);
    ln1p_ratio(x) / (1.0 + b)
}

/// `ln(1+x)/x`, continuous through `x = 0`.
fn ln1p_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x / 2.0 + x * x / 3.0 - x * x * x / 4.0
    } else {
        x.ln_1p() / x
    }
}

/// `∫₀¹ t² / ((1+at²)(1+bt²)) dt`.
pub(crate) fn bending_kernel(a: f64, b: f64) -> f64 {
    if a.max(b) <= SERIES_LIMIT {
        // Σₙ (−1)ⁿ hₙ(a,b) / (2n+3), hₙ the complete homogeneous polynomial.
        let mut h = 1.0;
        let mut b_pow = 1.0;
        let mut sum = 1.0 / 3.0;
        for n in 1..SERIES_MAX_TERMS {
            b_pow *= b;
            h = a * h + b_pow;
            let term = h / (2 * n + 3) as f64;
            sum += if n % 2 == 0 { term } else { -term };
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    } else {
        // (g(b) − g(a))/(a − b) with g(y) = atan(√y)/√y. The difference of
        // arctangents goes through atan((√b−√a)/(1+√(ab))) so that nearly
        // equal arguments do not cancel; b ≥ a keeps the divisor nonzero.
        let (a, b) = (a.min(b), a.max(b));
        let (sa, sb) = (a.sqrt(), b.sqrt());
        let w = 1.0 + sa * sb;
        let x = (b - a) / ((sa + sb) * w);
        let t = atan_ratio(x) / w;
        (atan_sqrt_ratio(a) - t) / (sb * (sa + sb))
    }
}

/// `atan(x)/x`, continuous through `x = 0`.
fn atan_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 3.0 + x.powi(4) / 5.0
    } else {
        x.atan() / x
    }
}

/// `atan(√y)/√y`.
fn atan_sqrt_ratio(y: f64) -> f64 {
    if y < 1e-8 {
        1.0 - y / 3.0 + y * y / 5.0
    } else {
        let s = y.sqrt();
        s.atan() / s
    }
}

/// `∫₀¹ t³ / ((1+bt²) √(1+at²)) dt`.
pub(crate) fn twist_kernel(a: f64, b: f64) -> f64 {
    if a.max(b) <= SERIES_LIMIT {
        // ½ Σₙ gₙ / (n+2) with gₙ = Σ_{j+k=n} (−b)ʲ cₖ aᵏ and cₖ = C(−½, k).
        let mut c = 1.0;
        let mut a_pow = 1.0;
        let mut g = 1.0;
        let mut sum = 0.5;
        for n in 1..SERIES_MAX_TERMS {
            c *= -((2 * n - 1) as f64) / ((2 * n) as f64);
            a_pow *= a;
            g = -b * g + c * a_pow;
            let term = g / (n + 2) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() && n > 2 {
                break;
            }
        }
        0.5 * sum
    } else if a < 1e-12 {
        // First-order expansion in a around the untapered limit.
        let m0 = b.ln_1p() / b;
        let m1 = (1.0 - m0) / b;
        let m2 = (0.5 - m1) / b;
        0.5 * m1 - 0.25 * a * m2
    } else if b < 1e-5 {
        // Second-order expansion in b; here a > SERIES_LIMIT so the
        // polynomial forms in v = √(1+a) do not cancel.
        let v = (1.0 + a).sqrt();
        let (v3, v5, v7) = (v.powi(3), v.powi(5), v.powi(7));
        let n0 = ((v3 - 1.0) / 3.0 - (v - 1.0)) / a.powi(2);
        let n1 = ((v5 - 1.0) / 5.0 - 2.0 * (v3 - 1.0) / 3.0 + (v - 1.0)) / a.powi(3);
        let n2 = ((v7 - 1.0) / 7.0 - 3.0 * (v5 - 1.0) / 5.0 + (v3 - 1.0) - (v - 1.0)) / a.powi(4);
        n0 - b * n1 + b * b * n2
    } else {
        // ½∫₀¹ u/((1+bu)√(1+au)) du with v = √(1+au):
        // (1/(ab)) [ (V−1) − a ∫₁^V dv / (b v² + a − b) ].
        let v = (1.0 + a).sqrt();
        let v_m1 = a / (1.0 + v);
        let tail = if (a - b).abs() <= 1e-13 * b {
            v_m1 / (b * v)
        } else if a > b {
            let k = (b / (a - b)).sqrt();
            (v_m1 * k / (1.0 + v * k * k)).atan() / (b * (a - b)).sqrt()
        } else {
            let s = ((b - a) / b).sqrt();
            let one_m_s = (a / b) / (1.0 + s);
            (2.0 * s * v_m1 / ((v + s) * one_m_s)).ln_1p() / (2.0 * b * s)
        };
        (v_m1 - a * tail) / (a * b)
    }
}

/// δ₃ through the complex-intermediate closed form
/// `3/(c_φ²c_α²√(c_φ²−c_α²)) [ (T(−R₁)+T(R₁)−T(−R₂)−T(R₂)) c_φ² + 2c_α (S(R₂)−S(R₁)) ]`.
///
/// Only valid away from the removable singularities; the returned imaginary
/// part is a rounding residue.
pub fn delta3_complex(r1: f64, r2: f64, c_phi: f64, c_alpha: f64) -> Complex64 {
    let p = c_phi * c_phi;
    let q = c_alpha * c_alpha;
    let w = Complex64::new(p - q, 0.0).sqrt();
    let s = |r: f64| w * (1.0 + p * r * r).sqrt();
    let t = |r: f64| ((Complex64::new(c_alpha, p * r)) / s(r)).atan();
    let bracket = (t(-r1) + t(r1) - t(-r2) - t(r2)) * p + 2.0 * c_alpha * (s(r2) - s(r1));
    bracket * 3.0 / (p * q * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Gauss–Legendre on [0, 1]; independent of the kernel algebra.
    fn quad(f: impl Fn(f64) -> f64) -> f64 {
        const X: [f64; 5] = [
            0.0,
            0.538_469_310_105_683,
            -0.538_469_310_105_683,
            0.906_179_845_938_664,
            -0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let panels = 400;
        let h = 1.0 / panels as f64;
        (0..panels)
            .map(|k| {
                let mid = (k as f64 + 0.5) * h;
                X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn kernels_match_quadrature_across_regimes() {
        let grid = [0.0, 1e-9, 1e-3, 0.2, 0.5, 0.50001, 0.9, 3.0, 40.0];
        for &a in &grid[..7] {
            for &b in &grid {
                let lk = quad(|t| 2.0 * t / ((1.0 + a * t * t) * (1.0 + b * t * t)));
                let bk = quad(|t| t * t / ((1.0 + a * t * t) * (1.0 + b * t * t)));
                let tk = quad(|t| t.powi(3) / ((1.0 + b * t * t) * (1.0 + a * t * t).sqrt()));
                assert!((log_kernel(a, b) - lk).abs() < 1e-9 * lk, "log a={a} b={b}");
                assert!((bending_kernel(a, b) - bk).abs() < 1e-9 * bk, "bend a={a} b={b}");
                assert!((twist_kernel(a, b) - tk).abs() < 1e-9 * tk, "twist a={a} b={b}");
            }
        }
    }

    #[test]
    fn kernels_continuous_at_series_switch() {
        for b in [0.0, 0.1, 0.49] {
            let lo = twist_kernel(SERIES_LIMIT, b);
            let hi = twist_kernel(SERIES_LIMIT * (1.0 + 1e-12), b);
            assert!((lo - hi).abs() < 1e-12 * lo);
            let lo = bending_kernel(b, SERIES_LIMIT);
            let hi = bending_kernel(b, SERIES_LIMIT * (1.0 + 1e-12));
            assert!((lo - hi).abs() < 1e-12 * lo);
        }
        // Nearly equal arguments in the closed forms.
        let x = 0.8;
        let at = bending_kernel(x, x);
        let s = x.sqrt();
        assert!((at - (s.atan() / s - 1.0 / (1.0 + x)) / (2.0 * x)).abs() < 1e-15);
        for rel in [1e-15, 1e-12, 1e-9, 1e-6] {
            let b = bending_kernel(x, x * (1.0 + rel));
            assert!((b - at).abs() < 1e-12 * at + rel * at, "rel {rel}: {b} vs {at}");
            assert_eq!(b, bending_kernel(x * (1.0 + rel), x));
        }
        assert!((twist_kernel(x, x) - twist_kernel(x, x * (1.0 + 1e-10))).abs() < 1e-10);
    }

    #[test]
    fn zero_limits() {
        let d = deltas_at_radii(3.0 / 64.0, 1.0 / 16.0, 0.0, 0.0, 0.5);
        let (r1, r2): (f64, f64) = (3.0 / 64.0, 1.0 / 16.0);
        assert!((d.delta0 - 2.0 * (r2 * r2 - r1 * r1)).abs() < 1e-17);
        assert!((d.delta1 - 2.0 * (r2.powi(3) - r1.powi(3))).abs() < 1e-18);
        assert_eq!(d.delta3, 0.0);
        assert_eq!(d.delta1, d.delta2);
    }

    #[test]
    fn complex_route_agrees_with_real_route() {
        let (r1, r2) = (0.04, 0.06);
        for (phi, alpha) in [(0.03, 0.2), (0.05, 0.02), (0.02, -1.1), (0.04, 0.0402)] {
            let d = deltas_at_radii(r1, r2, phi, alpha, 0.4);
            let c = delta3_complex(r1, r2, d.c_phi, d.c_alpha);
            assert!(c.im.abs() < 1e-10 * c.re.abs(), "{c}");
            assert!(
                (c.re - d.delta3).abs() < 1e-8 * d.delta3.abs(),
                "{} vs {}",
                c.re,
                d.delta3
            );
        }
    }
}
