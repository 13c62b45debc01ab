//! Command-line front end.
//!
//! Subcommands map one-to-one onto result panels:
//!
//! * `bands`   — photonic band structure along a reciprocal-space path
//! * `ldos`    — projected LDOS histogram near the band edge plus the
//!               square-root edge model, lossless and broadened
//! * `kbe-map` — scaled band-edge coupling K_BE along a real-space path
//!               through the Wigner-Seitz cell and versus sphere radius
//! * `decay`   — excited-state population versus time, one file per loss width
//! * `df-scan` — minimum residual strength versus coupling, per loss width
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.
//! Output rows are written with full-precision scientific formatting and every
//! run is bit-identical for a given configuration, independent of `--threads`.

use crate::config::{preset, RunConfig};
use crate::crystal::{build_kmesh, build_reciprocal_set, ws_point, LatticeSpec};
use crate::dynamics::pole::{optimize_detuning, EmitterSpec};
use crate::dynamics::spectrum::{spectrum_by_name, EdgeParams};
use crate::dynamics::decay_curve;
use crate::ldos::{
    band_edge_model, broadened_ldos, edge_dispersion, ldos_histogram, BandEdgeModel,
    EdgeDispersion, LossModel,
};
use crate::pwe::{assemble_with, eigensolve, EpsilonOperator};
use crate::{Error, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "opaldyn",
    version,
    about = "Band-edge emitter dynamics in lossy inverse-opal photonic crystals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file with `section.key = value` lines.
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,
    /// Named parameter preset (fig1, fig2, fig3, fig4).
    #[arg(long, global = true, value_name = "name")]
    preset: Option<String>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "dir", default_value = ".")]
    out: PathBuf,
    /// Worker thread count (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "n")]
    threads: Option<usize>,
    /// Print the fully resolved parameters and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq)]
enum Command {
    /// Band structure along Gamma-X-W-K-Gamma-L (reciprocal space).
    Bands,
    /// Projected LDOS histogram and broadened edge model near the band edge.
    Ldos,
    /// K_BE along Gamma-H-P-Gamma-N-H (real space) and versus R/a at H.
    KbeMap,
    /// Excited-state decay curves, one output file per loss width.
    Decay,
    /// Minimum residual strength versus coupling, one file per loss width.
    DfScan,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Bands => "bands",
            Command::Ldos => "ldos",
            Command::KbeMap => "kbe-map",
            Command::Decay => "decay",
            Command::DfScan => "df-scan",
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => 2,
                Error::Numerical(_) | Error::Io(_) => 3,
            }
        }
    }
}

/// Entry point for the binary: parse `std::env::args` and return the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

fn run_cli(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.preset {
        Some(name) => preset(name)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config '{}': {e}", path.display()))
        })?;
        cfg.apply(&text)?;
    }
    cfg.validate()?;

    if cli.dry_run {
        print!("# opaldyn {} (dry run)\n{}", cli.command.name(), cfg.describe());
        return Ok(());
    }

    let execute = || match cli.command {
        Command::Bands => cmd_bands(&cfg, &cli.out),
        Command::Ldos => cmd_ldos(&cfg, &cli.out),
        Command::KbeMap => cmd_kbe_map(&cfg, &cli.out),
        Command::Decay => cmd_decay(&cfg, &cli.out),
        Command::DfScan => cmd_df_scan(&cfg, &cli.out),
    };
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            pool.install(execute)
        }
        None => execute(),
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn header(command: &str, cfg: &RunConfig, extra: &[String]) -> String {
    let mut s = format!("# opaldyn {command}\n");
    for line in cfg.describe().lines() {
        let _ = writeln!(s, "# {line}");
    }
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    s
}

fn write_output(out_dir: &Path, cfg: &RunConfig, name: &str, body: &str) -> crate::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let file = out_dir.join(format!("{}{name}", cfg.output_prefix));
    std::fs::write(&file, body)?;
    println!("wrote {}", file.display());
    Ok(())
}

fn lattice_of(cfg: &RunConfig) -> Result<LatticeSpec> {
    LatticeSpec::new(cfg.lattice_a, cfg.r_over_a, cfg.eps_real, cfg.eps_imag)
}

fn operator_of(cfg: &RunConfig, spec: &LatticeSpec) -> Result<Arc<EpsilonOperator>> {
    let basis = build_reciprocal_set(spec, cfg.basis_count)?;
    EpsilonOperator::new(spec, Arc::new(basis))
}

/// Interpolate `points_per_segment` samples over a polyline, skipping each
/// segment's start point after the first so shared vertices appear once.
/// Returns (cumulative arc length, point).
fn polyline(vertices: &[[f64; 3]], points_per_segment: usize) -> Vec<(f64, [f64; 3])> {
    let mut out = Vec::new();
    let mut s = 0.0;
    for seg in vertices.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt();
        let first = if out.is_empty() { 0 } else { 1 };
        for j in first..=points_per_segment {
            let f = j as f64 / points_per_segment as f64;
            out.push((
                s + f * len,
                [
                    a[0] + f * (b[0] - a[0]),
                    a[1] + f * (b[1] - a[1]),
                    a[2] + f * (b[2] - a[2]),
                ],
            ));
        }
        s += len;
    }
    out
}

/// Band-edge fit shared by the PWE-backed subcommands.
fn dispersion_of(cfg: &RunConfig, spec: &LatticeSpec) -> Result<(Arc<EpsilonOperator>, EdgeDispersion)> {
    let ops = operator_of(cfg, spec)?;
    let disp = edge_dispersion(&ops, cfg.edge_stencil_h, cfg.edge_band)?;
    Ok((ops, disp))
}

/// Scaled coupling for the dynamics stage: taken from the config when set,
/// otherwise fitted from the plane-wave expansion.
fn resolve_k_be(cfg: &RunConfig) -> Result<(f64, Vec<String>)> {
    if let Some(k) = cfg.k_be {
        return Ok((k, vec![format!("k_be_scaled = {k:e} (from config)")]));
    }
    let spec = lattice_of(cfg)?;
    let (_, disp) = dispersion_of(cfg, &spec)?;
    let r = ws_point(&cfg.position)?.position;
    let model = band_edge_model(&disp, r, cfg.orientation);
    let k = model.k_be_scaled(model.omega_be);
    Ok((
        k,
        vec![
            format!("k_be_scaled = {k:.16e} (from plane-wave expansion)"),
            format!("omega_be = {:.16e} (2*pi*c/a)", model.omega_be),
        ],
    ))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

/// High-symmetry points of the FCC Brillouin zone, units 2*pi/a.
const BZ_PATH: [(&str, [f64; 3]); 5] = [
    ("Gamma", [0.0, 0.0, 0.0]),
    ("X", [1.0, 0.0, 0.0]),
    ("W", [1.0, 0.5, 0.0]),
    ("K", [0.75, 0.75, 0.0]),
    ("L", [0.5, 0.5, 0.5]),
];

fn cmd_bands(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = lattice_of(cfg)?;
    let ops = operator_of(cfg, &spec)?;
    let vertices: Vec<[f64; 3]> = [
        BZ_PATH[0].1, // Gamma
        BZ_PATH[1].1, // X
        BZ_PATH[2].1, // W
        BZ_PATH[3].1, // K
        BZ_PATH[0].1, // Gamma
        BZ_PATH[4].1, // L
    ]
    .to_vec();
    let samples = polyline(&vertices, cfg.bands_segment_points);
    let rows: Vec<Result<String>> = samples
        .par_iter()
        .map(|&(s, k)| {
            let sol = eigensolve(&assemble_with(&ops, k), cfg.bands_count)?;
            let mut row = format!("{s:.16e} {:.16e} {:.16e} {:.16e}", k[0], k[1], k[2]);
            for w in &sol.omegas {
                let _ = write!(row, " {w:.16e}");
            }
            row.push('\n');
            Ok(row)
        })
        .collect();
    let extra = vec![
        "path: Gamma-X-W-K-Gamma-L (reciprocal space, units 2*pi/a)".into(),
        "columns: s kx ky kz omega_1..omega_n (2*pi*c/a)".into(),
    ];
    let mut body = header("bands", cfg, &extra);
    for row in rows {
        body.push_str(&row?);
    }
    write_output(out, cfg, "bands.txt", &body)
}

fn cmd_ldos(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = lattice_of(cfg)?;
    let (ops, disp) = dispersion_of(cfg, &spec)?;
    let r = ws_point(&cfg.position)?.position;
    let model: BandEdgeModel = band_edge_model(&disp, r, cfg.orientation);
    let mesh = build_kmesh(cfg.kmesh_resolution, cfg.kmesh_half_zone)?;
    let hist = ldos_histogram(
        &ops,
        &mesh,
        r,
        cfg.orientation,
        model.omega_be - cfg.ldos_span_below,
        model.omega_be + cfg.ldos_span_above,
        cfg.ldos_bin_width,
        cfg.ldos_max_bands,
    )?;
    let scaled = hist.scaled(model.omega_be);
    let rho_ref = crate::rho0(model.omega_be);
    let mut extra = vec![
        format!("omega_be = {:.16e} (2*pi*c/a)", model.omega_be),
        format!("k_be = {:.16e}", model.k_be),
        format!("k_be_scaled = {:.16e}", model.k_be_scaled(model.omega_be)),
        format!("k_points = {}", mesh.points.len()),
        "loss widths are scaled by omega_be to absolute units".into(),
    ];
    let mut cols = String::from("columns: omega rho_hist_scaled rho_edge_scaled");
    for d in &cfg.delta_list {
        let _ = write!(cols, " rho_edge_delta={d:e}");
    }
    extra.push(cols);
    let mut body = header("ldos", cfg, &extra);
    for (i, v) in scaled.iter().enumerate() {
        let w = hist.bin_center(i);
        let sharp = if w > model.omega_be {
            model.k_be * (w - model.omega_be).sqrt() / rho_ref
        } else {
            0.0
        };
        let _ = write!(body, "{w:.16e} {v:.16e} {sharp:.16e}");
        for &d in &cfg.delta_list {
            let loss = LossModel {
                delta: d * model.omega_be,
                f: 1.0,
                eps_ratio: 0.0,
            };
            let rho = broadened_ldos(&model, &loss, w) / rho_ref;
            let _ = write!(body, " {rho:.16e}");
        }
        body.push('\n');
    }
    write_output(out, cfg, "ldos.txt", &body)
}

fn cmd_kbe_map(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = lattice_of(cfg)?;
    let (_, disp) = dispersion_of(cfg, &spec)?;
    let labels = ["Gamma", "H", "P", "Gamma", "N", "H"];
    let vertices: Vec<[f64; 3]> = labels
        .iter()
        .map(|l| ws_point(l).map(|p| p.position))
        .collect::<Result<_>>()?;
    let samples = polyline(&vertices, cfg.kbe_path_points);
    let orientations: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    let extra = vec![
        format!("path: {} (real space, units of a)", labels.join("-")),
        format!("omega_be = {:.16e} (2*pi*c/a)", disp.omega_be),
        "columns: s rx ry rz kbe_x kbe_y kbe_z (scaled)".into(),
    ];
    let mut body = header("kbe-map", cfg, &extra);
    for &(s, r) in &samples {
        let _ = write!(body, "{s:.16e} {:.16e} {:.16e} {:.16e}", r[0], r[1], r[2]);
        for e in orientations {
            let k = band_edge_model(&disp, r, e).k_be_scaled(disp.omega_be);
            let _ = write!(body, " {k:.16e}");
        }
        body.push('\n');
    }
    write_output(out, cfg, "kbe_map.txt", &body)?;

    // R/a sweep at the H vertex: each radius is a new crystal, so the band
    // edge is re-solved per point.
    let h = ws_point("H")?.position;
    let rows: Vec<Result<String>> = cfg
        .kbe_r_sweep
        .par_iter()
        .map(|&r_over_a| {
            let spec = LatticeSpec::new(cfg.lattice_a, r_over_a, cfg.eps_real, cfg.eps_imag)?;
            let (_, disp) = dispersion_of(cfg, &spec)?;
            let mut row = format!("{r_over_a:.16e} {:.16e}", disp.omega_be);
            for e in orientations {
                let k = band_edge_model(&disp, h, e).k_be_scaled(disp.omega_be);
                let _ = write!(row, " {k:.16e}");
            }
            row.push('\n');
            Ok(row)
        })
        .collect();
    let extra = vec![
        "sphere-radius sweep at the H vertex".into(),
        "columns: r_over_a omega_be kbe_x kbe_y kbe_z (scaled)".into(),
    ];
    let mut body = header("kbe-map", cfg, &extra);
    for row in rows {
        body.push_str(&row?);
    }
    write_output(out, cfg, "kbe_sweep.txt", &body)
}

fn cmd_decay(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (k_be, mut meta) = resolve_k_be(cfg)?;
    let emitter = EmitterSpec::scaled(cfg.beta, cfg.detuning, k_be);
    meta.push(format!("beta * k_be = {:e}", cfg.beta * k_be));
    for (i, &delta) in cfg.delta_list.iter().enumerate() {
        let density = spectrum_by_name(&cfg.spectrum, &emitter.edge_params(delta))?;
        let curve = decay_curve(&emitter, density.as_ref(), cfg.t_max, cfg.samples)?;
        let p = &curve.pole;
        let mut extra = meta.clone();
        extra.push(format!("delta = {delta:e}"));
        extra.push(format!(
            "pole omega0 = {:.16e} {:+.16e}i",
            p.omega0.re, p.omega0.im
        ));
        extra.push(format!("residual strength = {:.16e}", p.strength));
        extra.push(format!("lamb_shift = {:.16e}", p.lamb_shift));
        extra.push(format!("bound_state = {}", p.bound_state));
        extra.push("columns: t population pole_part".into());
        let mut body = header("decay", cfg, &extra);
        for j in 0..curve.times.len() {
            let _ = writeln!(
                body,
                "{:.16e} {:.16e} {:.16e}",
                curve.times[j], curve.population[j], curve.pole_part[j]
            );
        }
        write_output(out, cfg, &format!("decay_{i}.txt"), &body)?;
    }
    Ok(())
}

fn cmd_df_scan(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (k_be, meta) = resolve_k_be(cfg)?;
    // Validate the spectrum name once so the per-point closure can't fail.
    spectrum_by_name(&cfg.spectrum, &EdgeParams {
        k_be,
        omega_be: cfg.detuning,
        delta: 0.0,
    })?;
    let grid: Vec<f64> = (0..cfg.df_points)
        .map(|i| {
            let f = i as f64 / (cfg.df_points - 1) as f64;
            (cfg.df_min.ln() + f * (cfg.df_max.ln() - cfg.df_min.ln())).exp()
        })
        .collect();
    for (i, &delta) in cfg.delta_list.iter().enumerate() {
        let rows: Vec<Result<String>> = grid
            .par_iter()
            .map(|&coupling| {
                let beta = coupling / k_be;
                let emitter = EmitterSpec::scaled(beta, cfg.detuning, k_be);
                let spectrum = cfg.spectrum.clone();
                let build = move |d: f64| {
                    spectrum_by_name(&spectrum, &EdgeParams {
                        k_be,
                        omega_be: d,
                        delta,
                    })
                    .expect("spectrum name validated above")
                };
                let (df, argmin) = optimize_detuning(&emitter, build, cfg.df_interval)?;
                Ok(format!("{coupling:.16e} {df:.16e} {argmin:.16e}\n"))
            })
            .collect();
        let mut extra = meta.clone();
        extra.push(format!("delta = {delta:e}"));
        extra.push("columns: beta_k_be d_f argmin_detuning".into());
        let mut body = header("df-scan", cfg, &extra);
        for row in rows {
            body.push_str(&row?);
        }
        write_output(out, cfg, &format!("df_scan_{i}.txt"), &body)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_hits_vertices_once() {
        let pts = polyline(&[[0.0; 3], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]], 2);
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0].1, [0.0, 0.0, 0.0]);
        assert_eq!(pts[2].1, [1.0, 0.0, 0.0]);
        assert_eq!(pts[4].1, [1.0, 1.0, 0.0]);
        assert!((pts[4].0 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["opaldyn", "no-such-subcommand"]), 2);
        assert_eq!(run_from(["opaldyn"]), 2);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run_from(["opaldyn", "--help"]), 0);
    }
}
