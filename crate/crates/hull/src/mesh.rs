//! Triangle meshes: closedness checks, enclosed volume, PLY and OFF files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{HullError, Result};
use crate::predicates::{cross, dot, sub, Point};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise seen from outside.
    pub faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Directed edges `(u, v)` that occur more often than their reverse.
    pub fn unmatched_edges(&self) -> Vec<(u32, u32)> {
        let mut count: HashMap<(u32, u32), i64> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                if u < v {
                    *count.entry((u, v)).or_default() += 1;
                } else {
                    *count.entry((v, u)).or_default() -= 1;
                }
            }
        }
        let mut out: Vec<(u32, u32)> = count
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|((u, v), c)| if c > 0 { (u, v) } else { (v, u) })
            .collect();
        out.sort_unstable();
        out
    }

    /// Every directed edge is matched by its reverse, so the surface bounds a
    /// well-defined volume (possibly touching itself along edges or vertices).
    pub fn is_closed(&self) -> bool {
        self.unmatched_edges().is_empty()
    }

    /// Every undirected edge is shared by exactly two faces.
    pub fn is_two_manifold(&self) -> bool {
        let mut count: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                *count.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        count.values().all(|&c| c == 2)
    }

    pub fn surface_area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = self.corners(f);
                let n = cross(&sub(&b, &a), &sub(&c, &a));
                0.5 * dot(&n, &n).sqrt()
            })
            .sum()
    }

    fn corners(&self, f: &[u32; 3]) -> [Point; 3] {
        [
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        ]
    }

    /// Drops vertices no face refers to, preserving order.
    pub fn compacted(&self) -> Self {
        let mut map = vec![u32::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        let faces = self
            .faces
            .iter()
            .map(|f| {
                f.map(|v| {
                    let m = &mut map[v as usize];
                    if *m == u32::MAX {
                        *m = vertices.len() as u32;
                        vertices.push(self.vertices[v as usize]);
                    }
                    *m
                })
            })
            .collect();
        Self { vertices, faces }
    }
}

/// Enclosed volume by the divergence theorem, summed over faces relative to
/// the vertex centroid to limit cancellation.
pub fn mesh_volume(mesh: &TriangleMesh) -> Result<f64> {
    let boundary_edges = mesh.unmatched_edges();
    if !boundary_edges.is_empty() {
        return Err(HullError::Topology { boundary_edges });
    }
    let n = mesh.vertices.len().max(1) as f64;
    let mut o = [0.0; 3];
    for v in &mesh.vertices {
        for i in 0..3 {
            o[i] += v[i] / n;
        }
    }
    Ok(mesh
        .faces
        .iter()
        .map(|f| {
            let [a, b, c] = mesh.corners(f);
            dot(&sub(&a, &o), &cross(&sub(&b, &o), &sub(&c, &o))) / 6.0
        })
        .sum())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HullError + '_ {
    move |source| HullError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl TriangleMesh {
    pub fn write_ply_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(
            w,
            "ply\nformat binary_little_endian 1.0\ncomment reachcloud mesh\n\
             element vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
             element face {}\nproperty list uchar uint vertex_indices\nend_header\n",
            self.vertices.len(),
            self.faces.len()
        )?;
        for v in &self.vertices {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        for f in &self.faces {
            w.write_all(&[3u8])?;
            for i in f {
                w.write_all(&i.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn write_ply(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(io_err(path))?;
        self.write_ply_to(BufWriter::new(f)).map_err(io_err(path))
    }

    pub fn read_ply_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut offset = 0u64;
        let mut line = String::new();
        let mut next = |r: &mut BufReader<R>, offset: &mut u64| -> Result<String> {
            line.clear();
            let n = r.read_line(&mut line).map_err(|e| HullError::Parse {
                offset: *offset,
                message: e.to_string(),
            })?;
            if n == 0 {
                return Err(HullError::Parse {
                    offset: *offset,
                    message: "unexpected end of header".into(),
                });
            }
            *offset += n as u64;
            Ok(line.trim_end().to_string())
        };
        let bad = |offset: u64, message: String| HullError::Parse { offset, message };

        if next(&mut r, &mut offset)? != "ply" {
            return Err(bad(0, "missing ply magic".into()));
        }
        let expected = [
            "format binary_little_endian 1.0",
            "element vertex",
            "property double x",
            "property double y",
            "property double z",
            "element face",
            "property list uchar uint vertex_indices",
            "end_header",
        ];
        let (mut nv, mut nf) = (0usize, 0usize);
        for want in expected {
            let start = offset;
            let mut l = next(&mut r, &mut offset)?;
            while l.starts_with("comment") {
                l = next(&mut r, &mut offset)?;
            }
            if want.starts_with("element") {
                let count = l
                    .strip_prefix(want)
                    .and_then(|s| s.trim().parse::<usize>().ok())
                    .ok_or_else(|| bad(start, format!("expected '{want} <count>', got '{l}'")))?;
                if want.ends_with("vertex") {
                    nv = count;
                } else {
                    nf = count;
                }
            } else if l != want {
                return Err(bad(start, format!("expected '{want}', got '{l}'")));
            }
        }

        let mut body = Vec::new();
        r.read_to_end(&mut body).map_err(|e| bad(offset, e.to_string()))?;
        let need = nv * 24 + nf * 13;
        if body.len() < need {
            return Err(bad(
                offset + body.len() as u64,
                format!("truncated body: {} of {need} bytes", body.len()),
            ));
        }
        let f64_at = |i: usize| f64::from_le_bytes(body[i..i + 8].try_into().unwrap());
        let u32_at = |i: usize| u32::from_le_bytes(body[i..i + 4].try_into().unwrap());
        let vertices = (0..nv)
            .map(|k| [f64_at(24 * k), f64_at(24 * k + 8), f64_at(24 * k + 16)])
            .collect();
        let mut faces = Vec::with_capacity(nf);
        for k in 0..nf {
            let at = nv * 24 + 13 * k;
            if body[at] != 3 {
                return Err(bad(offset + at as u64, format!("face with {} vertices", body[at])));
            }
            let f = [u32_at(at + 1), u32_at(at + 5), u32_at(at + 9)];
            if f.iter().any(|&i| i as usize >= nv) {
                return Err(bad(offset + at as u64, "vertex index out of range".into()));
            }
            faces.push(f);
        }
        Ok(Self { vertices, faces })
    }

    pub fn read_ply(path: &Path) -> Result<Self> {
        Self::read_ply_from(File::open(path).map_err(io_err(path))?)
    }

    /// OFF text; coordinates use the shortest round-trip decimal form.
    pub fn write_off_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "OFF\n{} {} 0", self.vertices.len(), self.faces.len())?;
        for v in &self.vertices {
            writeln!(w, "{:?} {:?} {:?}", v[0], v[1], v[2])?;
        }
        for f in &self.faces {
            writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
        }
        w.flush()
    }

    pub fn write_off(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(io_err(path))?;
        self.write_off_to(BufWriter::new(f)).map_err(io_err(path))
    }

    pub fn read_off_from<R: Read>(r: R) -> Result<Self> {
        let mut text = String::new();
        BufReader::new(r)
            .read_to_string(&mut text)
            .map_err(|e| HullError::Parse {
                offset: 0,
                message: e.to_string(),
            })?;
        // Token stream with byte offsets, skipping comments.
        let mut tokens = Vec::new();
        let mut pos = 0;
        for line in text.split_inclusive('\n') {
            let content = line.split('#').next().unwrap_or("");
            let mut col = 0;
            for tok in content.split_whitespace() {
                let at = content[col..].find(tok).unwrap() + col;
                tokens.push((pos + at, tok));
                col = at + tok.len();
            }
            pos += line.len();
        }
        let mut it = tokens.into_iter();
        let end = text.len() as u64;
        let mut take = |what: &str| {
            it.next().ok_or_else(|| HullError::Parse {
                offset: end,
                message: format!("unexpected end of file reading {what}"),
            })
        };
        let (o, magic) = take("header")?;
        if magic != "OFF" {
            return Err(HullError::Parse {
                offset: o as u64,
                message: "missing OFF magic".into(),
            });
        }
        fn parse<T: std::str::FromStr>((o, t): (usize, &str)) -> Result<T> {
            t.parse().map_err(|_| HullError::Parse {
                offset: o as u64,
                message: format!("cannot parse '{t}'"),
            })
        }
        let nv: usize = parse(take("vertex count")?)?;
        let nf: usize = parse(take("face count")?)?;
        let _: usize = parse(take("edge count")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([parse(take("x")?)?, parse(take("y")?)?, parse(take("z")?)?]);
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let t = take("face size")?;
            let k: usize = parse(t)?;
            if k != 3 {
                return Err(HullError::Parse {
                    offset: t.0 as u64,
                    message: format!("face with {k} vertices"),
                });
            }
            let mut f = [0u32; 3];
            for x in &mut f {
                let t = take("face index")?;
                *x = parse(t)?;
                if *x as usize >= nv {
                    return Err(HullError::Parse {
                        offset: t.0 as u64,
                        message: "vertex index out of range".into(),
                    });
                }
            }
            faces.push(f);
        }
        Ok(Self { vertices, faces })
    }

    pub fn read_off(path: &Path) -> Result<Self> {
        Self::read_off_from(File::open(path).map_err(io_err(path))?)
    }
}

/// Axis-aligned box `[lo, hi]³` as 12 outward triangles.
pub fn box_mesh(lo: Point, hi: Point) -> TriangleMesh {
    let vertices = (0..8)
        .map(|i| {
            [
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            ]
        })
        .collect();
    let quads = [
        [0, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let faces = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriangleMesh { vertices, faces }
}

/// Sphere approximation by repeated midpoint subdivision of an icosahedron.
pub fn icosphere(radius: f64, subdivisions: usize) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let project = |p: Point| {
        let n = dot(&p, &p).sqrt();
        [p[0] * radius / n, p[1] * radius / n, p[2] * radius / n]
    };
    for v in &mut vertices {
        *v = project(*v);
    }
    for _ in 0..subdivisions {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0u32; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                m[k] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (p, q) = (vertices[a as usize], vertices[b as usize]);
                    vertices.push(project([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                    vertices.len() as u32 - 1
                });
            }
            next.extend([[f[0], m[0], m[2]], [f[1], m[1], m[0]], [f[2], m[2], m[1]], m]);
        }
        faces = next;
    }
    TriangleMesh { vertices, faces }
}
