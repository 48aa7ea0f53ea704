//! Cloud files: little-endian binary PLY with run metadata in header comments,
//! and a plain CSV export.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::cloud::{Aabb, ReachCloud};
use crate::design::ManipulatorDesign;
use crate::error::{ModelError, Result};
use crate::sampling::SamplerConfig;
use crate::TOOL_VERSION;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ModelError + '_ {
    move |source| ModelError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_cloud_to<W: Write>(cloud: &ReachCloud, mut w: W) -> std::io::Result<()> {
    let s = &cloud.sampler;
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "comment reachcloud {TOOL_VERSION}")?;
    writeln!(w, "comment design_digest {}", cloud.design_digest)?;
    if let Some(json) = &cloud.design_json {
        writeln!(w, "comment design {json}")?;
    }
    writeln!(w, "comment seed {}", s.seed)?;
    writeln!(w, "comment gamma_min {:?}", s.gamma_min)?;
    writeln!(w, "comment gamma_max {:?}", s.gamma_max)?;
    writeln!(w, "comment steps {}", s.steps)?;
    writeln!(w, "comment n_samples {}", s.n_samples)?;
    if cloud.bundles != 3 {
        writeln!(
            w,
            "comment color red/green/blue from gamma_0..gamma_2 of {} bundles",
            cloud.bundles
        )?;
    }
    writeln!(w, "element vertex {}", cloud.len())?;
    for c in ["x", "y", "z"] {
        writeln!(w, "property double {c}")?;
    }
    for c in ["red", "green", "blue"] {
        writeln!(w, "property uchar {c}")?;
    }
    for b in 0..cloud.bundles {
        writeln!(w, "property float gamma_{b}")?;
    }
    writeln!(w, "end_header")?;
    let mut buf = Vec::with_capacity(27 + 4 * cloud.bundles);
    for i in 0..cloud.len() {
        buf.clear();
        for x in cloud.positions[i] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf.extend_from_slice(&cloud.colors[i]);
        for g in cloud.activation(i) {
            buf.extend_from_slice(&g.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()
}

pub fn write_cloud(cloud: &ReachCloud, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    write_cloud_to(cloud, BufWriter::new(f)).map_err(io_err(path))
}

fn parse_err(offset: u64, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        offset,
        message: message.into(),
    }
}

/// Parses a cloud written by [`write_cloud_to`]. A stored design whose digest
/// disagrees with the recorded one adds a warning to the result.
pub fn read_cloud_from<R: Read>(r: R) -> Result<ReachCloud> {
    let mut r = BufReader::new(r);
    let mut offset = 0u64;
    let mut line = String::new();
    let mut next_line = |r: &mut BufReader<R>, offset: &mut u64| -> Result<(u64, String)> {
        line.clear();
        let start = *offset;
        let n = r
            .read_line(&mut line)
            .map_err(|e| parse_err(start, format!("unreadable header: {e}")))?;
        if n == 0 {
            return Err(parse_err(start, "unexpected end of header"));
        }
        *offset += n as u64;
        Ok((start, line.trim_end_matches(['\n', '\r']).to_string()))
    };

    let (at, magic) = next_line(&mut r, &mut offset)?;
    if magic != "ply" {
        return Err(parse_err(at, "missing ply magic"));
    }
    let (at, format) = next_line(&mut r, &mut offset)?;
    if format != "format binary_little_endian 1.0" {
        return Err(parse_err(at, format!("unsupported format line {format:?}")));
    }

    let mut sampler = SamplerConfig::default();
    let mut design_digest = None;
    let mut design_json = None;
    let mut n_vertices = None;
    let mut props: Vec<(String, String)> = Vec::new();
    loop {
        let (at, l) = next_line(&mut r, &mut offset)?;
        if l == "end_header" {
            break;
        }
        let mut it = l.splitn(2, ' ');
        let key = it.next().unwrap_or("");
        let rest = it.next().unwrap_or("");
        match key {
            "comment" => {
                let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                let bad = |_| parse_err(at, format!("bad {k} value {v:?}"));
                match k {
                    "design_digest" => design_digest = Some(v.to_string()),
                    "design" => design_json = Some(v.to_string()),
                    "seed" => sampler.seed = v.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                    "steps" => sampler.steps = v.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                    "n_samples" => {
                        sampler.n_samples = v.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?
                    }
                    "gamma_min" => {
                        sampler.gamma_min = v.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?
                    }
                    "gamma_max" => {
                        sampler.gamma_max = v.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?
                    }
                    _ => {}
                }
            }
            "element" => {
                let Some(n) = rest.strip_prefix("vertex ") else {
                    return Err(parse_err(at, format!("unexpected element {rest:?}")));
                };
                n_vertices = Some(n.parse::<usize>().map_err(|e| parse_err(at, e.to_string()))?);
            }
            "property" => {
                let (ty, name) = rest
                    .split_once(' ')
                    .ok_or_else(|| parse_err(at, "malformed property line"))?;
                props.push((ty.to_string(), name.to_string()));
            }
            _ => return Err(parse_err(at, format!("unexpected header line {l:?}"))),
        }
    }
    let n = n_vertices.ok_or_else(|| parse_err(offset, "no vertex element"))?;
    let bundles = props.len().saturating_sub(6);
    let expected: Vec<(String, String)> = ["x", "y", "z"]
        .iter()
        .map(|c| ("double".to_string(), c.to_string()))
        .chain(
            ["red", "green", "blue"]
                .iter()
                .map(|c| ("uchar".to_string(), c.to_string())),
        )
        .chain((0..bundles).map(|b| ("float".to_string(), format!("gamma_{b}"))))
        .collect();
    if props != expected || bundles == 0 {
        return Err(parse_err(offset, "vertex properties do not match the cloud layout"));
    }

    let stride = 27 + 4 * bundles;
    let mut positions = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n);
    let mut activations = Vec::with_capacity(n * bundles);
    let mut rec = vec![0u8; stride];
    for i in 0..n {
        read_record(&mut r, &mut rec, offset, i, n)?;
        let f = |k: usize| f64::from_le_bytes(rec[8 * k..8 * k + 8].try_into().unwrap());
        positions.push([f(0), f(1), f(2)]);
        colors.push([rec[24], rec[25], rec[26]]);
        for b in 0..bundles {
            let o = 27 + 4 * b;
            activations.push(f32::from_le_bytes(rec[o..o + 4].try_into().unwrap()));
        }
        offset += stride as u64;
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra).map_err(|e| parse_err(offset, e.to_string()))? != 0 {
        return Err(parse_err(offset, "trailing bytes after vertex data"));
    }

    let mut cloud = ReachCloud {
        bounds: Aabb::of(&positions),
        positions,
        activations,
        colors,
        bundles,
        design_digest: design_digest.unwrap_or_default(),
        sampler,
        design_json,
        warnings: Vec::new(),
    };
    if let Some(json) = &cloud.design_json {
        match serde_json::from_str::<ManipulatorDesign>(json) {
            Ok(d) if d.digest() == cloud.design_digest => {}
            Ok(d) => cloud.warnings.push(format!(
                "stored design hashes to {} but the file records {}",
                d.digest(),
                cloud.design_digest
            )),
            Err(e) => cloud.warnings.push(format!("stored design is unreadable: {e}")),
        }
    }
    if cloud.sampler.n_samples != n {
        cloud.warnings.push(format!(
            "header records {} samples but the file holds {n}",
            cloud.sampler.n_samples
        ));
    }
    Ok(cloud)
}

fn read_record<R: Read>(r: &mut R, rec: &mut [u8], offset: u64, i: usize, n: usize) -> Result<()> {
    let mut got = 0;
    while got < rec.len() {
        match r.read(&mut rec[got..]) {
            Ok(0) => {
                return Err(parse_err(
                    offset + got as u64,
                    format!("file truncated in vertex {i} of {n}"),
                ))
            }
            Ok(k) => got += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(parse_err(offset + got as u64, e.to_string())),
        }
    }
    Ok(())
}

pub fn read_cloud(path: &Path) -> Result<ReachCloud> {
    let f = File::open(path).map_err(io_err(path))?;
    read_cloud_from(f)
}

/// Header `x,y,z,gamma_0,…`; numbers in shortest round-trip form.
pub fn write_cloud_csv_to<W: Write>(cloud: &ReachCloud, mut w: W) -> std::io::Result<()> {
    write!(w, "x,y,z")?;
    for b in 0..cloud.bundles {
        write!(w, ",gamma_{b}")?;
    }
    writeln!(w)?;
    for i in 0..cloud.len() {
        let p = cloud.positions[i];
        write!(w, "{},{},{}", p[0], p[1], p[2])?;
        for g in cloud.activation(i) {
            write!(w, ",{g}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_cloud_csv(cloud: &ReachCloud, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(io_err(path))?;
    write_cloud_csv_to(cloud, BufWriter::new(f)).map_err(io_err(path))
}
