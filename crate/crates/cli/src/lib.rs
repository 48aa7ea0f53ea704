//! `reachcloud` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reachcloud_atlas::{
    export_atlas, find_volume_optimum, run_atlas, trend_statistics, AtlasSpec, RunManifest, RunOptions,
};
use reachcloud_core::{
    curvature_statistics, distal_stations, distance_field, generate_cloud, integrate, read_cloud, reflection_test,
    validate_design, write_cloud, write_cloud_csv, ActivationState, ManipulatorDesign, SamplerConfig,
};
use reachcloud_hull::{analyze_points, AlphaChoice};

pub mod config;
pub mod error;

pub use config::{parse_design, parse_design_str, DesignConfig, Preset};
pub use error::{CliError, Result};

use error::io;

#[derive(Debug, Parser)]
#[command(
    name = "reachcloud",
    version,
    about = "Reachability clouds of fiber-actuated tapered soft manipulators"
)]
pub struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of sampled activations.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Integration steps along the rod.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Output file, stem or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long, global = true, env = "REACHCLOUD_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Format of the report printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a reachability cloud (PLY, or CSV when --out ends in .csv).
    Gen(DesignArgs),
    /// Sweep fiber revolution and taper angle of a preset.
    Atlas(AtlasArgs),
    /// Concave and convex volume of a cloud file.
    Hull(HullArgs),
    /// Mean activation distance field of a cloud file.
    Redundancy(RedundancyArgs),
    /// Curvature histograms at distal stations.
    Stats(StatsArgs),
    /// Centerline and frames for one activation.
    Centerline(CenterlineArgs),
    /// Check a design against its invariants.
    Validate(DesignArgs),
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Built-in design.
    #[arg(long, value_enum, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<Preset>,
    /// Fiber revolution of the preset, degrees.
    #[arg(long, value_name = "DEG", requires = "preset", allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Taper angle of the preset, degrees.
    #[arg(long, value_name = "DEG", requires = "preset", allow_hyphen_values = true)]
    phi: Option<f64>,
    /// TOML or JSON design file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AtlasArgs {
    /// Template design.
    #[arg(long, value_enum, default_value_t = Preset::Minimal)]
    preset: Preset,
    /// 16×16 grid with 4·10⁵ samples per cell.
    #[arg(long, conflicts_with_all = ["n_omega", "n_phi"])]
    full: bool,
    /// Grid points in Ω, from 0 to --omega-max.
    #[arg(long, default_value_t = 8)]
    n_omega: usize,
    /// Grid points in φ, from 0 to --phi-max.
    #[arg(long, default_value_t = 8)]
    n_phi: usize,
    /// Largest fiber revolution, degrees.
    #[arg(long, default_value_t = 108.0)]
    omega_max: f64,
    /// Largest taper angle, degrees.
    #[arg(long, default_value_t = 3.0)]
    phi_max: f64,
    /// Fixed α as a multiple of the median nearest-neighbor distance.
    #[arg(long)]
    alpha_multiplier: Option<f64>,
    /// Directory of per-cell results reused by later runs.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Keep each cell's cloud and concave hull.
    #[arg(long)]
    retain: bool,
}

#[derive(Debug, Args)]
struct HullArgs {
    /// Cloud PLY file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// α as a multiple of the median nearest-neighbor distance.
    #[arg(long, conflicts_with = "alpha")]
    alpha_multiplier: Option<f64>,
    /// Absolute α radius.
    #[arg(long)]
    alpha: Option<f64>,
    /// Write the concave hull mesh here (PLY).
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RedundancyArgs {
    /// Cloud PLY file.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Neighborhood radius in cloud units (default L/60).
    #[arg(long)]
    radius: Option<f64>,
    /// Number of randomly chosen points at which D̄ is evaluated.
    #[arg(long, default_value_t = 10_000)]
    subset: usize,
    /// D̄ mapped to the top of the color scale (default: largest value).
    #[arg(long)]
    d_max: Option<f64>,
    /// Azimuthal sectors for the regional summary.
    #[arg(long, default_value_t = 8)]
    sectors: usize,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// Stations as fractions of L (default 0.5, 0.6, ..., 1.0).
    #[arg(long, value_delimiter = ',')]
    stations: Vec<f64>,
    /// Also run the mirror-symmetry two-sample test on the tip cloud.
    #[arg(long)]
    reflection: bool,
    #[arg(long, default_value_t = 199)]
    permutations: usize,
    /// Cloud size for the reflection test.
    #[arg(long, default_value_t = 10_000)]
    reflection_points: usize,
}

#[derive(Debug, Args)]
struct CenterlineArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// Bundle activations in architecture order, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    gamma: Vec<f64>,
}

/// Parses `args` (program name first) and runs the command; returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(d) => gen(g, d),
        Command::Atlas(a) => atlas(g, a),
        Command::Hull(h) => hull(g, h),
        Command::Redundancy(r) => redundancy(g, r),
        Command::Stats(s) => stats(g, s),
        Command::Centerline(c) => centerline(g, c),
        Command::Validate(d) => validate(g, d),
    }
}

fn load_design(d: &DesignArgs, g: &GlobalArgs) -> Result<(ManipulatorDesign, SamplerConfig)> {
    let mut sampler = SamplerConfig::default();
    let design = match (&d.config, d.preset) {
        (Some(path), _) => {
            let c = parse_design(path)?;
            c.sampler.apply(&mut sampler);
            c.design
        }
        (None, Some(p)) => p.design(d.omega.unwrap_or(0.0).to_radians(), d.phi.unwrap_or(0.0).to_radians()),
        (None, None) => return Err(CliError::Usage("one of --preset and --config is required".into())),
    };
    apply_sampler_flags(g, &mut sampler);
    Ok((design, sampler))
}

fn apply_sampler_flags(g: &GlobalArgs, s: &mut SamplerConfig) {
    if let Some(v) = g.samples {
        s.n_samples = v;
    }
    if let Some(v) = g.seed {
        s.seed = v;
    }
    if let Some(v) = g.steps {
        s.steps = v;
    }
}

fn require_out<'a>(g: &'a GlobalArgs, what: &str) -> Result<&'a Path> {
    g.out
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("--out is required ({what})")))
}

/// `<out>.manifest.json` next to the first output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}

fn write_manifest(mut m: RunManifest, path: PathBuf, outputs: &[&Path], started: Instant) -> Result<PathBuf> {
    let base = path.parent().unwrap_or(Path::new(""));
    for o in outputs {
        m.add_file(base, o)?;
    }
    m.wall_clock_s = started.elapsed().as_secs_f64();
    m.write(&path)?;
    Ok(path)
}

fn design_manifest(command: &str, design: &ManipulatorDesign, sampler: Option<&SamplerConfig>) -> RunManifest {
    let mut m = RunManifest::new(command);
    m.design_digest = Some(design.digest());
    m.sampler = sampler.copied();
    m.seeds = sampler.map(|s| vec![s.seed]).unwrap_or_default();
    m.parameters.insert(
        "design".into(),
        serde_json::to_value(design).expect("design serializes"),
    );
    m
}

fn report(g: &GlobalArgs, text: String, value: Value) {
    let mut out = std::io::stdout().lock();
    let _ = match g.format {
        Format::Text => writeln!(out, "{text}"),
        Format::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&value).expect("report serializes")
        ),
    };
}

fn has_extension(p: &Path, ext: &str) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn gen(g: &GlobalArgs, d: &DesignArgs) -> Result<()> {
    let out = require_out(g, "cloud file")?;
    let (design, sampler) = load_design(d, g)?;
    let started = Instant::now();
    let cloud = generate_cloud(&design, &sampler, g.workers)?;
    if has_extension(out, "csv") {
        write_cloud_csv(&cloud, out)?;
    } else {
        write_cloud(&cloud, out)?;
    }
    let manifest = write_manifest(
        design_manifest("gen", &design, Some(&sampler)),
        manifest_path(out),
        &[out],
        started,
    )?;
    let b = cloud.bounds;
    report(
        g,
        format!(
            "{} points -> {}\nbounds min {:?} max {:?}\ndesign {}\nmanifest {}",
            cloud.len(),
            out.display(),
            b.min,
            b.max,
            cloud.design_digest,
            manifest.display()
        ),
        json!({
            "points": cloud.len(),
            "out": out,
            "bounds": b,
            "design_digest": cloud.design_digest,
            "manifest": manifest,
        }),
    );
    Ok(())
}

fn atlas(g: &GlobalArgs, a: &AtlasArgs) -> Result<()> {
    let out = require_out(g, "atlas directory")?;
    let seed = g.seed.unwrap_or(0);
    let mut spec = if a.full {
        AtlasSpec::full(seed)
    } else {
        AtlasSpec::uniform(
            a.n_omega,
            a.n_phi,
            a.omega_max,
            a.phi_max,
            SamplerConfig {
                n_samples: 50_000,
                seed,
                ..Default::default()
            },
        )
    };
    spec.base_design = a.preset.design(108f64.to_radians(), 0.0);
    apply_sampler_flags(g, &mut spec.sampler);
    if let Some(c) = a.alpha_multiplier {
        spec.alpha = AlphaChoice::Multiplier(c);
    }
    let options = RunOptions {
        workers: g.workers,
        cache_dir: a.cache.clone(),
        retain_dir: a.retain.then(|| out.to_path_buf()),
    };
    let started = Instant::now();
    let result = run_atlas(&spec, &options)?;
    let mut manifest = export_atlas(&result, out)?;
    manifest.wall_clock_s = started.elapsed().as_secs_f64();
    manifest.write(&out.join("manifest.json"))?;

    let optimum = find_volume_optimum(&result);
    let trend = (spec.omega_values.len() >= 2 && spec.phi_values.len() >= 2).then(|| trend_statistics(&result));
    let failed: Vec<String> = result.failed().iter().map(|c| c.dir_name()).collect();
    let mut text = format!("{} cells -> {}", result.cells.len(), out.display());
    if let Some(o) = &optimum {
        text += &format!(
            "\nvolume optimum: phi* = {:.3} deg, omega* = {:.3} deg, V/L^3 = {:.4}",
            o.phi_star.to_degrees(),
            o.omega_star.to_degrees(),
            o.v_norm
        );
    }
    if let Some(t) = &trend {
        text += &format!(
            "\nUNR negative trend: {:.0}% of rows (vs omega), {:.0}% of columns (vs phi)",
            100.0 * t.fraction_negative_vs_omega,
            100.0 * t.fraction_negative_vs_phi
        );
    }
    if !failed.is_empty() {
        text += &format!("\nfailed cells: {}", failed.join(", "));
    }
    report(
        g,
        text,
        json!({ "cells": result.cells.len(), "optimum": optimum, "trend": trend, "failed": failed }),
    );
    Ok(())
}

fn hull(g: &GlobalArgs, h: &HullArgs) -> Result<()> {
    let cloud = read_cloud(&h.input)?;
    for w in &cloud.warnings {
        log::warn!("{}: {w}", h.input.display());
    }
    let choice = match (h.alpha_multiplier, h.alpha) {
        (Some(c), _) => AlphaChoice::Multiplier(c),
        (_, Some(a)) => AlphaChoice::Absolute(a),
        _ => AlphaChoice::Auto,
    };
    let started = Instant::now();
    let result = analyze_points(&cloud.positions, choice)?;
    let metrics = result.metrics();
    let mut outputs: Vec<&Path> = Vec::new();
    if let Some(out) = &g.out {
        let json = serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n";
        std::fs::write(out, json).map_err(io(out))?;
        outputs.push(out);
    }
    if let Some(mesh) = &h.mesh {
        result.concave_mesh.write_ply(mesh)?;
        outputs.push(mesh);
    }
    if !outputs.is_empty() {
        let mut m = RunManifest::new("hull");
        m.design_digest = Some(cloud.design_digest.clone());
        m.sampler = Some(cloud.sampler);
        m.parameters.insert("input".into(), json!(h.input));
        m.parameters
            .insert("input_sha256".into(), json!(reachcloud_atlas::sha256_file(&h.input)?));
        m.parameters
            .insert("alpha".into(), serde_json::to_value(choice).unwrap());
        write_manifest(m, manifest_path(outputs[0]), &outputs, started)?;
    }
    report(
        g,
        format!(
            "v_concave {:.6}\nv_convex {:.6}\nunr {:.4}\nalpha {:.6}{}",
            metrics.v_concave,
            metrics.v_convex,
            metrics.unr,
            metrics.alpha_used,
            if metrics.thinness_flag {
                "\nwarning: cloud is thin, volumes unreliable"
            } else {
                ""
            }
        ),
        serde_json::to_value(&metrics).unwrap(),
    );
    Ok(())
}

fn redundancy(g: &GlobalArgs, r: &RedundancyArgs) -> Result<()> {
    let out = require_out(g, "output stem for .csv and .ply")?;
    let stem = if has_extension(out, "csv") || has_extension(out, "ply") {
        out.with_extension("")
    } else {
        out.to_path_buf()
    };
    let (csv, ply) = (stem.with_extension("csv"), stem.with_extension("ply"));
    let cloud = read_cloud(&r.input)?;
    for w in &cloud.warnings {
        log::warn!("{}: {w}", r.input.display());
    }
    let radius = r
        .radius
        .unwrap_or_else(|| cloud.design().map_or(1.0, |d| d.geometry.length) / 60.0);
    let seed = g.seed.unwrap_or(0);
    let started = Instant::now();
    let field = distance_field(&cloud, r.subset, radius, seed, g.workers)?;
    let summary = field.summary();
    let d_max = r
        .d_max
        .unwrap_or_else(|| field.valid_values().into_iter().fold(0.0, f64::max));
    field.save(&cloud, Some(&csv), Some(&ply), d_max)?;
    let sectors = field.sector_means(&cloud, r.sectors);

    let mut m = RunManifest::new("redundancy");
    m.design_digest = Some(cloud.design_digest.clone());
    m.sampler = Some(cloud.sampler);
    m.seeds = vec![seed];
    m.parameters.insert("input".into(), json!(r.input));
    m.parameters
        .insert("input_sha256".into(), json!(reachcloud_atlas::sha256_file(&r.input)?));
    m.parameters.insert("radius".into(), json!(radius));
    m.parameters.insert("subset".into(), json!(r.subset));
    m.parameters.insert("d_max".into(), json!(d_max));
    write_manifest(m, manifest_path(&stem), &[&csv, &ply], started)?;

    let mut text = format!(
        "D-bar over {} points (radius {radius:.6}): median {:.4}, p95 {:.4}, mean {:.4}, isolated {}",
        field.len(),
        summary.median(),
        summary.percentile_95(),
        summary.mean,
        summary.n_isolated
    );
    for (k, s) in sectors.iter().enumerate() {
        if let Some(s) = s {
            text += &format!("\nsector {k}: mean {:.4} over {} points", s.mean, s.count);
        }
    }
    text += &format!("\n-> {}, {}", csv.display(), ply.display());
    report(
        g,
        text,
        json!({ "summary": summary, "sectors": sectors, "radius": radius, "csv": csv, "ply": ply }),
    );
    Ok(())
}

fn stats(g: &GlobalArgs, s: &StatsArgs) -> Result<()> {
    let (design, sampler) = load_design(&s.design, g)?;
    let length = design.geometry.length;
    let stations = if s.stations.is_empty() {
        distal_stations(length)
    } else {
        s.stations.iter().map(|z| z * length).collect()
    };
    let started = Instant::now();
    let table = curvature_statistics(&design, &sampler, &stations, g.workers)?;
    let reflection = if s.reflection {
        let cfg = SamplerConfig {
            n_samples: s.reflection_points,
            ..sampler
        };
        let cloud = generate_cloud(&design, &cfg, g.workers)?;
        Some(reflection_test(&cloud.positions, s.permutations, sampler.seed)?)
    } else {
        None
    };
    let value = json!({ "stations": table, "reflection": reflection });
    if let Some(out) = &g.out {
        let text = serde_json::to_string_pretty(&value).expect("stats serialize") + "\n";
        std::fs::write(out, text).map_err(io(out))?;
        write_manifest(
            design_manifest("stats", &design, Some(&sampler)),
            manifest_path(out),
            &[out],
            started,
        )?;
    }
    let mut text = String::from("Z/L      p05      median   p95      support  (kappa L)");
    for st in &table {
        text += &format!(
            "\n{:<8.3} {:<8.4} {:<8.4} {:<8.4} {:<8.4}",
            st.z / length,
            st.quantiles[0],
            st.quantiles[2],
            st.percentile_95(),
            st.support()
        );
    }
    if let Some(t) = &reflection {
        text += &format!("\nreflection test: statistic {:.3e}, p = {:.4}", t.statistic, t.p_value);
    }
    report(g, text, value);
    Ok(())
}

fn centerline(g: &GlobalArgs, c: &CenterlineArgs) -> Result<()> {
    let (design, sampler) = load_design(&c.design, g)?;
    let act = ActivationState::from_flat(&design.layout(), &c.gamma)?;
    let started = Instant::now();
    let rod = integrate(&design, &act, sampler.steps)?;
    let tip = rod.centerline.last().copied().unwrap_or_default();
    match &g.out {
        Some(out) => {
            let f = std::fs::File::create(out).map_err(io(out))?;
            rod.write_csv(std::io::BufWriter::new(f)).map_err(io(out))?;
            let mut m = design_manifest("centerline", &design, None);
            m.parameters.insert("gamma".into(), json!(c.gamma));
            m.parameters.insert("steps".into(), json!(sampler.steps));
            write_manifest(m, manifest_path(out), &[out], started)?;
        }
        None if g.format == Format::Text => {
            rod.write_csv(std::io::stdout().lock())
                .map_err(io(Path::new("<stdout>")))?;
            return Ok(());
        }
        None => {}
    }
    report(
        g,
        format!("tip {:.9} {:.9} {:.9}", tip.x, tip.y, tip.z),
        json!({ "tip": [tip.x, tip.y, tip.z], "frame_defect": rod.max_frame_defect() }),
    );
    Ok(())
}

fn validate(g: &GlobalArgs, d: &DesignArgs) -> Result<()> {
    let design = match (&d.config, d.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(io(path))?;
            config::parse_unchecked(&text, config::is_json(path), &path.display().to_string())?.design
        }
        _ => load_design(d, g)?.0,
    };
    let violations = validate_design(&design);
    let text = if violations.is_empty() {
        format!("valid design {}", design.digest())
    } else {
        violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n")
    };
    report(
        g,
        text,
        json!({ "violations": violations, "design_digest": design.digest() }),
    );
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} violation(s)", violations.len())))
    }
}
