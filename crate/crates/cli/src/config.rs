//! Design configuration files (TOML or JSON). Angles are in degrees, lengths in
//! units of the manipulator length `L`.
//!
//! ```toml
//! omega_deg = 108.0      # fiber revolution, used by `helix` entries
//!
//! [geometry]
//! length = 1.0
//! r2_0 = 0.0625          # outer base radius / L
//! r1_0 = 0.046875        # inner base radius / L
//! phi_deg = 2.0
//!
//! nu = 0.5
//!
//! [[architectures]]
//! helix = -1             # or alpha_deg = -30.0
//! sigma_deg = 48.0
//! theta0_deg = 66.0
//! n = 1
//!
//! [sampler]
//! samples = 400000
//! seed = 42
//! ```
//!
//! Alternatively `preset = "minimal"` or `"redundant"` with `omega_deg` and
//! `geometry.phi_deg` (and optionally `geometry.length`, `nu`).

use std::path::Path;

use serde::Deserialize;

use reachcloud_core::{
    helical_angle_from_revolution, minimal_design, redundant_design, validate_design, FiberArchitecture,
    ManipulatorDesign, SamplerConfig, TaperedGeometry,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Minimal,
    Redundant,
}

impl Preset {
    /// `omega` and `phi` in radians.
    pub fn design(self, omega: f64, phi: f64) -> ManipulatorDesign {
        match self {
            Preset::Minimal => minimal_design(omega, phi),
            Preset::Redundant => redundant_design(omega, phi),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    length: Option<f64>,
    r2_0: Option<f64>,
    r1_0: Option<f64>,
    phi_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchitectureFile {
    alpha_deg: Option<f64>,
    helix: Option<i8>,
    sigma_deg: f64,
    theta0_deg: f64,
    #[serde(default = "one")]
    n: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerFile {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
}

impl SamplerFile {
    pub fn apply(&self, s: &mut SamplerConfig) {
        if let Some(v) = self.samples {
            s.n_samples = v;
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.steps {
            s.steps = v;
        }
        if let Some(v) = self.gamma_min {
            s.gamma_min = v;
        }
        if let Some(v) = self.gamma_max {
            s.gamma_max = v;
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignFile {
    preset: Option<Preset>,
    omega_deg: Option<f64>,
    #[serde(default)]
    geometry: GeometryFile,
    nu: Option<f64>,
    architectures: Option<Vec<ArchitectureFile>>,
    #[serde(default)]
    sampler: SamplerFile,
}

/// A parsed configuration: validated design plus optional sampler overrides.
#[derive(Debug)]
pub struct DesignConfig {
    pub design: ManipulatorDesign,
    pub sampler: SamplerFile,
}

fn field_error(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("field `{field}`: {message}"))
}

/// Parses `text` as JSON when `json` is set, TOML otherwise. Syntax and schema
/// errors report the line and column (and offending key) from the parser.
pub fn parse_design_str(text: &str, json: bool, origin: &str) -> Result<DesignConfig> {
    let config = parse_unchecked(text, json, origin)?;
    let violations = validate_design(&config.design);
    if !violations.is_empty() {
        return Err(CliError::Validation(format!(
            "{origin}: design failed validation: {}",
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        )));
    }
    Ok(config)
}

/// Schema-checked but not validated, for reporting every violation.
pub fn parse_unchecked(text: &str, json: bool, origin: &str) -> Result<DesignConfig> {
    let file: DesignFile = if json {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?
    };
    let design = build(&file).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{origin}: {m}")),
        e => e,
    })?;
    Ok(DesignConfig {
        design,
        sampler: file.sampler,
    })
}

/// Reads a design file; `.json` files are JSON, everything else TOML.
pub fn parse_design(path: &Path) -> Result<DesignConfig> {
    let text = std::fs::read_to_string(path).map_err(crate::error::io(path))?;
    parse_design_str(&text, is_json(path), &path.display().to_string())
}

pub fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn build(f: &DesignFile) -> Result<ManipulatorDesign> {
    let g = &f.geometry;
    let omega = f.omega_deg.map(f64::to_radians);
    let phi = g.phi_deg.unwrap_or(0.0).to_radians();
    let length = g.length.unwrap_or(1.0);
    let mut design = if let Some(preset) = f.preset {
        if f.architectures.is_some() {
            return Err(field_error("architectures", "cannot be combined with `preset`"));
        }
        if g.r1_0.is_some() || g.r2_0.is_some() {
            return Err(field_error(
                "geometry",
                "presets fix r1_0 and r2_0; only length and phi_deg may be set",
            ));
        }
        preset.design(omega.unwrap_or(0.0), phi).scaled(length)
    } else {
        let reference = TaperedGeometry::reference(phi);
        let geometry = TaperedGeometry {
            length,
            r2_0: g.r2_0.unwrap_or(reference.r2_0) * length,
            r1_0: g.r1_0.unwrap_or(reference.r1_0) * length,
            phi,
        };
        let archs = f
            .architectures
            .as_ref()
            .ok_or_else(|| field_error("architectures", "required unless `preset` is given"))?;
        let mut architectures = Vec::with_capacity(archs.len());
        for (i, a) in archs.iter().enumerate() {
            let alpha = match (a.alpha_deg, a.helix) {
                (Some(d), None) => d.to_radians(),
                (None, Some(h)) => {
                    let field = format!("architectures[{i}].helix");
                    if !(-1..=1).contains(&h) {
                        return Err(field_error(&field, "must be -1, 0 or 1"));
                    }
                    let omega = omega.ok_or_else(|| field_error(&field, "requires top-level `omega_deg`"))?;
                    h as f64 * helical_angle_from_revolution(&geometry, omega)
                }
                _ => {
                    return Err(field_error(
                        &format!("architectures[{i}]"),
                        "exactly one of `alpha_deg` and `helix` is required",
                    ))
                }
            };
            architectures.push(FiberArchitecture {
                alpha,
                sigma: a.sigma_deg.to_radians(),
                theta0: a.theta0_deg.to_radians(),
                n: a.n,
            });
        }
        ManipulatorDesign {
            geometry,
            nu: 0.5,
            architectures,
        }
    };
    if let Some(nu) = f.nu {
        design.nu = nu;
    }
    Ok(design)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_file_matches_minimal_preset() {
        let text = r#"
omega_deg = 108.0
[geometry]
phi_deg = 2.0
[[architectures]]
helix = -1
sigma_deg = 48
theta0_deg = 66
[[architectures]]
helix = 1
sigma_deg = 48
theta0_deg = 114
[[architectures]]
alpha_deg = 0
sigma_deg = 48
theta0_deg = 270
"#;
        let c = parse_design_str(text, false, "t").unwrap();
        let p = minimal_design(108f64.to_radians(), 2f64.to_radians());
        assert_eq!(c.design.geometry, p.geometry);
        for (a, b) in c.design.architectures.iter().zip(&p.architectures) {
            assert!((a.alpha - b.alpha).abs() < 1e-15 && (a.sigma - b.sigma).abs() < 1e-15);
            assert!((a.theta0 - b.theta0).abs() < 1e-15 && a.n == b.n);
        }
    }

    #[test]
    fn preset_in_json() {
        let c = parse_design_str(
            r#"{"preset":"redundant","omega_deg":108,"geometry":{"phi_deg":2}}"#,
            true,
            "t",
        )
        .unwrap();
        assert_eq!(c.design, redundant_design(108f64.to_radians(), 2f64.to_radians()));
    }

    #[test]
    fn errors_name_the_field_and_line() {
        let e = parse_design_str("preset = \"minimal\"\n[geometry]\nphi_dg = 2\n", false, "t").unwrap_err();
        let m = e.to_string();
        assert!(m.contains("line 3") && m.contains("phi_dg"), "{m}");
        let e = parse_design_str("{\"preset\": \"minimal\",\n \"nu\": \"half\"}", true, "t").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_design_str(
            "[[architectures]]\nhelix = 1\nsigma_deg = 48\ntheta0_deg = 0\n",
            false,
            "t",
        )
        .unwrap_err();
        assert!(e.to_string().contains("architectures[0].helix"), "{e}");
    }

    #[test]
    fn overlapping_bundles_fail_validation() {
        let text = "[[architectures]]\nalpha_deg = 0\nsigma_deg = 100\ntheta0_deg = 0\nn = 4\n";
        let e = parse_design_str(text, false, "t").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("n * sigma > 2 pi"), "{e}");
    }
}
