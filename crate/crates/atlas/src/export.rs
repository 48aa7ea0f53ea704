//! Atlas directory layout: `atlas.csv`, `manifest.json` and
//! `cells/omega_<i>_phi_<j>/metrics.json` (plus retained `cloud.ply`/`hull.ply`).

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_error, AtlasError, Result};
use crate::manifest::RunManifest;
use crate::{cell_dir, find_volume_optimum, trend_statistics, AtlasResult};

pub const CSV_HEADER: &str = "omega_deg,phi_deg,v_norm,unr,alpha_used,n_points";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasRow {
    pub omega_deg: f64,
    pub phi_deg: f64,
    pub v_norm: Option<f64>,
    pub unr: Option<f64>,
    pub alpha_used: Option<f64>,
    pub n_points: usize,
}

impl AtlasResult {
    pub fn rows(&self) -> Vec<AtlasRow> {
        self.cells
            .iter()
            .map(|c| AtlasRow {
                omega_deg: c.omega.to_degrees(),
                phi_deg: c.phi.to_degrees(),
                v_norm: c.v_norm(),
                unr: c.unr(),
                alpha_used: c.metrics.as_ref().map(|m| m.alpha_used),
                n_points: c.n_points,
            })
            .collect()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Failed cells leave their metric fields empty.
pub fn write_atlas_csv<W: Write>(rows: &[AtlasRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.omega_deg,
            r.phi_deg,
            opt(r.v_norm),
            opt(r.unr),
            opt(r.alpha_used),
            r.n_points
        )?;
    }
    w.flush()
}

pub fn read_atlas_csv<R: BufRead>(r: R) -> Result<Vec<AtlasRow>> {
    let parse_err = |line: usize, message: String| AtlasError::Parse {
        what: format!("atlas CSV line {line}"),
        message,
    };
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header {CSV_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let n = k + 2;
        let line = line.map_err(|e| parse_err(n, e.to_string()))?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(parse_err(n, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(n, format!("{s:?}: {e}")));
        let maybe = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(AtlasRow {
            omega_deg: num(f[0])?,
            phi_deg: num(f[1])?,
            v_norm: maybe(f[2])?,
            unr: maybe(f[3])?,
            alpha_used: maybe(f[4])?,
            n_points: f[5].parse().map_err(|e| parse_err(n, format!("{:?}: {e}", f[5])))?,
        });
    }
    Ok(rows)
}

/// Files and directories created so far, removed again if the export fails.
struct Staging {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
}

impl Staging {
    fn mkdir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut p = Some(dir);
        while let Some(d) = p {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            p = d.parent();
        }
        std::fs::create_dir_all(dir).map_err(io_error(dir))?;
        self.dirs.extend(missing.into_iter().rev());
        Ok(())
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        let existed = path.exists();
        std::fs::write(path, bytes).map_err(io_error(path))?;
        if !existed {
            self.files.push(path.to_path_buf());
        }
        Ok(())
    }

    fn rollback(self) {
        for f in self.files.iter().rev() {
            let _ = std::fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = std::fs::remove_dir(d);
        }
    }
}

/// Writes the atlas directory and returns its manifest. On failure every file
/// and directory created by this call is removed.
pub fn export_atlas(result: &AtlasResult, dir: &Path) -> Result<RunManifest> {
    let mut staging = Staging {
        files: Vec::new(),
        dirs: Vec::new(),
    };
    match export_into(result, dir, &mut staging) {
        Ok(m) => Ok(m),
        Err(e) => {
            staging.rollback();
            Err(e)
        }
    }
}

fn export_into(result: &AtlasResult, dir: &Path, staging: &mut Staging) -> Result<RunManifest> {
    staging.mkdir(dir)?;
    let mut manifest = RunManifest::new("atlas");
    manifest.seeds = vec![result.spec.sampler.seed];
    manifest.sampler = Some(result.spec.sampler);

    let csv = dir.join("atlas.csv");
    let mut buf = Vec::new();
    write_atlas_csv(&result.rows(), &mut buf).map_err(io_error(&csv))?;
    staging.write(&csv, &buf)?;
    manifest.add_file(dir, &csv)?;

    for cell in &result.cells {
        let cdir = cell_dir(dir, cell);
        staging.mkdir(&cdir)?;
        let path = cdir.join("metrics.json");
        let json = serde_json::to_string_pretty(cell).expect("cell serializes") + "\n";
        staging.write(&path, json.as_bytes())?;
        manifest.add_file(dir, &path)?;
        for retained in ["cloud.ply", "hull.ply"] {
            let p = cdir.join(retained);
            if p.exists() {
                manifest.add_file(dir, &p)?;
            }
        }
    }

    let spec = &result.spec;
    let p = &mut manifest.parameters;
    p.insert(
        "omega_deg".into(),
        serde_json::json!(spec.omega_values.iter().map(|x| x.to_degrees()).collect::<Vec<_>>()),
    );
    p.insert(
        "phi_deg".into(),
        serde_json::json!(spec.phi_values.iter().map(|x| x.to_degrees()).collect::<Vec<_>>()),
    );
    p.insert("spec".into(), serde_json::to_value(spec).expect("spec serializes"));
    p.insert(
        "optimum".into(),
        serde_json::to_value(find_volume_optimum(result)).unwrap(),
    );
    if spec.omega_values.len() >= 2 && spec.phi_values.len() >= 2 {
        p.insert(
            "unr_trend".into(),
            serde_json::to_value(trend_statistics(result)).unwrap(),
        );
    }
    p.insert(
        "failed_cells".into(),
        serde_json::json!(result.failed().iter().map(|c| c.dir_name()).collect::<Vec<_>>()),
    );
    p.insert(
        "cell_runtime_s".into(),
        serde_json::json!(result.cells.iter().map(|c| c.runtime_s).collect::<Vec<_>>()),
    );
    manifest.wall_clock_s = result.cells.iter().map(|c| c.runtime_s).sum();

    let mpath = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    staging.write(&mpath, json.as_bytes())?;
    Ok(manifest)
}
