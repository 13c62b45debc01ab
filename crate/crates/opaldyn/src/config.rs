//! Flat `section.key = value` run configuration with figure presets.
//!
//! A config file is plain text: one assignment per line, `#` starts a
//! comment, keys are namespaced by section (`lattice.r_over_a = 0.3436`).
//! Values resolve in three layers: built-in defaults, then an optional
//! preset, then the config file; later layers override earlier ones.

use crate::{Error, Result};

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // lattice
    pub lattice_a: f64,
    pub r_over_a: f64,
    pub eps_real: f64,
    pub eps_imag: f64,
    // basis
    pub basis_count: usize,
    // kmesh
    pub kmesh_resolution: usize,
    pub kmesh_half_zone: bool,
    // bands
    pub bands_segment_points: usize,
    pub bands_count: usize,
    // band-edge fit
    pub edge_band: usize,
    pub edge_stencil_h: f64,
    // ldos histogram window around the edge
    pub ldos_bin_width: f64,
    pub ldos_span_below: f64,
    pub ldos_span_above: f64,
    pub ldos_max_bands: usize,
    // K_BE map
    pub kbe_path_points: usize,
    pub kbe_r_sweep: Vec<f64>,
    // emitter
    pub beta: f64,
    pub detuning: f64,
    pub omega_eg: f64,
    /// Scaled K_BE given directly; when set the PWE stage is bypassed.
    pub k_be: Option<f64>,
    pub position: String,
    pub orientation: [f64; 3],
    // loss
    pub delta_list: Vec<f64>,
    // dynamics
    pub t_max: f64,
    pub samples: usize,
    pub spectrum: String,
    // D_f scan
    pub df_min: f64,
    pub df_max: f64,
    pub df_points: usize,
    pub df_interval: (f64, f64),
    // output
    pub output_prefix: String,
    /// Preset this config was derived from, if any.
    pub preset: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice_a: 1.0,
            r_over_a: 0.3436,
            eps_real: 11.76,
            eps_imag: 0.0,
            basis_count: 169,
            kmesh_resolution: 16,
            kmesh_half_zone: true,
            bands_segment_points: 20,
            bands_count: 10,
            edge_band: 8,
            edge_stencil_h: 0.01,
            ldos_bin_width: 5.0e-4,
            ldos_span_below: 0.01,
            ldos_span_above: 0.02,
            ldos_max_bands: 24,
            kbe_path_points: 8,
            kbe_r_sweep: vec![0.30, 0.32, 0.34, 0.3436],
            beta: 5.5e-8,
            detuning: 1.0 - 8.309e-6,
            omega_eg: 1.0,
            k_be: None,
            position: "H".into(),
            orientation: [0.0, 0.0, 1.0],
            delta_list: vec![0.0],
            t_max: 2.0e7,
            samples: 401,
            spectrum: "composite".into(),
            df_min: 1.0e-8,
            df_max: 1.0e-5,
            df_points: 10,
            df_interval: (1.0 - 1.0e-4, 1.0 + 1.0e-5),
            output_prefix: String::new(),
            preset: None,
        }
    }
}

/// Preset names understood by `--preset` and the `preset` config key.
pub const PRESETS: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

/// Build the named preset configuration.
pub fn preset(name: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    c.preset = Some(name.to_string());
    match name {
        // Projected LDOS at the H position: PWE histogram plus the
        // square-root edge model, lossless and lossy.
        "fig1" => {
            c.basis_count = 531;
            c.kmesh_resolution = 48;
            c.delta_list = vec![0.0, 1.0e-10, 1.0e-9];
        }
        // K_BE along the real-space path through the Wigner-Seitz cell for
        // the three principal orientations, plus the R/a sweep at H.
        "fig2" => {
            c.basis_count = 531;
        }
        // Decay curves at three loss values; K_BE and the detuning enter
        // directly, bypassing the eigensolver.
        "fig3" => {
            c.k_be = Some(10.0);
            c.delta_list = vec![0.0, 1.0e-10, 1.0e-9];
        }
        // Minimum residual strength versus coupling, per loss value.
        "fig4" => {
            c.k_be = Some(10.0);
            c.delta_list = vec![0.0, 1.0e-10, 1.0e-9];
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(c)
}

fn parse_f64(line_no: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| {
        Error::Config(format!("config line {line_no}: invalid number for '{key}': '{v}'"))
    })
}

fn parse_usize(line_no: usize, key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>().map_err(|_| {
        Error::Config(format!("config line {line_no}: invalid integer for '{key}': '{v}'"))
    })
}

fn parse_bool(line_no: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!(
            "config line {line_no}: invalid boolean for '{key}': '{v}' (use true/false)"
        ))),
    }
}

fn parse_f64_list(line_no: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_f64(line_no, key, s.trim()))
        .collect()
}

fn parse_orientation(line_no: usize, v: &str) -> Result<[f64; 3]> {
    match v {
        "x" => return Ok([1.0, 0.0, 0.0]),
        "y" => return Ok([0.0, 1.0, 0.0]),
        "z" => return Ok([0.0, 0.0, 1.0]),
        _ => {}
    }
    let parts = parse_f64_list(line_no, "emitter.orientation", v)?;
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "config line {line_no}: orientation needs x|y|z or three components, got '{v}'"
        )));
    }
    Ok([parts[0], parts[1], parts[2]])
}

impl RunConfig {
    /// Apply the assignments of a config file on top of this configuration.
    /// Errors carry the 1-based line number.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "config line {line_no}: expected 'section.key = value', got '{raw}'"
                ))
            })?;
            let (key, v) = (key.trim(), value.trim());
            if v.is_empty() {
                return Err(Error::Config(format!(
                    "config line {line_no}: empty value for '{key}'"
                )));
            }
            match key {
                "preset" => {
                    *self = preset(v).map_err(|e| {
                        Error::Config(format!("config line {line_no}: {e}"))
                    })?;
                }
                "lattice.a" => self.lattice_a = parse_f64(line_no, key, v)?,
                "lattice.r_over_a" => self.r_over_a = parse_f64(line_no, key, v)?,
                "lattice.eps_real" => self.eps_real = parse_f64(line_no, key, v)?,
                "lattice.eps_imag" => self.eps_imag = parse_f64(line_no, key, v)?,
                "basis.count" => self.basis_count = parse_usize(line_no, key, v)?,
                "kmesh.resolution" => self.kmesh_resolution = parse_usize(line_no, key, v)?,
                "kmesh.half_zone" => self.kmesh_half_zone = parse_bool(line_no, key, v)?,
                "bands.segment_points" => {
                    self.bands_segment_points = parse_usize(line_no, key, v)?
                }
                "bands.count" => self.bands_count = parse_usize(line_no, key, v)?,
                "edge.band" => self.edge_band = parse_usize(line_no, key, v)?,
                "edge.stencil_h" => self.edge_stencil_h = parse_f64(line_no, key, v)?,
                "ldos.bin_width" => self.ldos_bin_width = parse_f64(line_no, key, v)?,
                "ldos.span_below" => self.ldos_span_below = parse_f64(line_no, key, v)?,
                "ldos.span_above" => self.ldos_span_above = parse_f64(line_no, key, v)?,
                "ldos.max_bands" => self.ldos_max_bands = parse_usize(line_no, key, v)?,
                "kbe.path_points" => self.kbe_path_points = parse_usize(line_no, key, v)?,
                "kbe.r_sweep" => self.kbe_r_sweep = parse_f64_list(line_no, key, v)?,
                "emitter.beta" => self.beta = parse_f64(line_no, key, v)?,
                "emitter.detuning" => self.detuning = parse_f64(line_no, key, v)?,
                "emitter.omega_eg" => self.omega_eg = parse_f64(line_no, key, v)?,
                "emitter.k_be" => self.k_be = Some(parse_f64(line_no, key, v)?),
                "emitter.position" => self.position = v.to_string(),
                "emitter.orientation" => self.orientation = parse_orientation(line_no, v)?,
                "loss.delta_list" => self.delta_list = parse_f64_list(line_no, key, v)?,
                "dynamics.t_max" => self.t_max = parse_f64(line_no, key, v)?,
                "dynamics.samples" => self.samples = parse_usize(line_no, key, v)?,
                "dynamics.spectrum" => self.spectrum = v.to_string(),
                "df.min" => self.df_min = parse_f64(line_no, key, v)?,
                "df.max" => self.df_max = parse_f64(line_no, key, v)?,
                "df.points" => self.df_points = parse_usize(line_no, key, v)?,
                "df.interval_lo" => self.df_interval.0 = parse_f64(line_no, key, v)?,
                "df.interval_hi" => self.df_interval.1 = parse_f64(line_no, key, v)?,
                "output.prefix" => self.output_prefix = v.to_string(),
                other => {
                    return Err(Error::Config(format!(
                        "config line {line_no}: unknown key '{other}'"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Cross-field validation beyond per-key parsing.
    pub fn validate(&self) -> Result<()> {
        crate::crystal::LatticeSpec::new(
            self.lattice_a,
            self.r_over_a,
            self.eps_real,
            self.eps_imag,
        )?;
        if self.basis_count == 0 {
            return Err(Error::Config("basis.count must be >= 1".into()));
        }
        if self.kmesh_resolution == 0 {
            return Err(Error::Config("kmesh.resolution must be >= 1".into()));
        }
        if self.delta_list.is_empty() || self.delta_list.iter().any(|&d| d < 0.0) {
            return Err(Error::Config(
                "loss.delta_list must be a nonempty list of nonnegative widths".into(),
            ));
        }
        if !(self.df_min > 0.0 && self.df_max > self.df_min) {
            return Err(Error::Config(format!(
                "df grid needs 0 < df.min < df.max, got [{}, {}]",
                self.df_min, self.df_max
            )));
        }
        if self.df_points < 2 {
            return Err(Error::Config("df.points must be >= 2".into()));
        }
        if self.samples < 2 || !(self.t_max > 0.0) {
            return Err(Error::Config(format!(
                "dynamics needs t_max > 0 and samples >= 2, got {} / {}",
                self.t_max, self.samples
            )));
        }
        crate::crystal::ws_point(&self.position)?;
        Ok(())
    }

    /// Deterministic listing of every resolved parameter, one `key = value`
    /// per line (used by `--dry-run` and output headers).
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv(&mut s, "preset", self.preset.clone().unwrap_or_else(|| "none".into()));
        kv(&mut s, "lattice.a", format!("{:e}", self.lattice_a));
        kv(&mut s, "lattice.r_over_a", format!("{:e}", self.r_over_a));
        kv(&mut s, "lattice.eps_real", format!("{:e}", self.eps_real));
        kv(&mut s, "lattice.eps_imag", format!("{:e}", self.eps_imag));
        kv(&mut s, "basis.count", format!("{}", self.basis_count));
        kv(&mut s, "kmesh.resolution", format!("{}", self.kmesh_resolution));
        kv(&mut s, "kmesh.half_zone", format!("{}", self.kmesh_half_zone));
        kv(&mut s, "bands.segment_points", format!("{}", self.bands_segment_points));
        kv(&mut s, "bands.count", format!("{}", self.bands_count));
        kv(&mut s, "edge.band", format!("{}", self.edge_band));
        kv(&mut s, "edge.stencil_h", format!("{:e}", self.edge_stencil_h));
        kv(&mut s, "ldos.bin_width", format!("{:e}", self.ldos_bin_width));
        kv(&mut s, "ldos.span_below", format!("{:e}", self.ldos_span_below));
        kv(&mut s, "ldos.span_above", format!("{:e}", self.ldos_span_above));
        kv(&mut s, "ldos.max_bands", format!("{}", self.ldos_max_bands));
        kv(&mut s, "kbe.path_points", format!("{}", self.kbe_path_points));
        let sweep: Vec<String> = self.kbe_r_sweep.iter().map(|v| format!("{v:e}")).collect();
        kv(&mut s, "kbe.r_sweep", sweep.join(","));
        kv(&mut s, "emitter.beta", format!("{:e}", self.beta));
        kv(&mut s, "emitter.detuning", format!("{:.12e}", self.detuning));
        kv(&mut s, "emitter.omega_eg", format!("{:e}", self.omega_eg));
        kv(
            &mut s,
            "emitter.k_be",
            self.k_be.map(|v| format!("{v:e}")).unwrap_or_else(|| "from-pwe".into()),
        );
        kv(&mut s, "emitter.position", self.position.clone());
        kv(
            &mut s,
            "emitter.orientation",
            format!("{:e},{:e},{:e}", self.orientation[0], self.orientation[1], self.orientation[2]),
        );
        let deltas: Vec<String> = self.delta_list.iter().map(|v| format!("{v:e}")).collect();
        kv(&mut s, "loss.delta_list", deltas.join(","));
        kv(&mut s, "dynamics.t_max", format!("{:e}", self.t_max));
        kv(&mut s, "dynamics.samples", format!("{}", self.samples));
        kv(&mut s, "dynamics.spectrum", self.spectrum.clone());
        kv(&mut s, "df.min", format!("{:e}", self.df_min));
        kv(&mut s, "df.max", format!("{:e}", self.df_max));
        kv(&mut s, "df.points", format!("{}", self.df_points));
        kv(&mut s, "df.interval_lo", format!("{:.12e}", self.df_interval.0));
        kv(&mut s, "df.interval_hi", format!("{:.12e}", self.df_interval.1));
        kv(&mut s, "output.prefix", if self.output_prefix.is_empty() {
            "none".into()
        } else {
            self.output_prefix.clone()
        });
        s
    }
}
