//! Projected local density of states by k-space summation, the band-edge
//! square-root model `rho_BE = K_BE sqrt(omega - omega_BE)`, and absorptive
//! Lorentzian broadening.
//!
//! In program units (omega in 2*pi*c/a, k in 2*pi/a, modes normalized over the
//! cell) the projected LDOS is `rho_p(r, omega) = V_cell * int_BZ d^3k
//! sum_n |e_p . E_nk(r)|^2 delta(omega - omega_nk)`; the vacuum limit is
//! `rho0 = (8 pi / 3) omega^2`.

use crate::crystal::{KMesh, LatticeSpec};
use crate::pwe::{assemble_with, eigensolve, projected_amplitudes, BandSolution, EpsilonOperator};
use crate::quad;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Binned projected LDOS at a fixed position and dipole orientation.
#[derive(Debug, Clone)]
pub struct LdosHistogram {
    /// Bin edges, length = number of bins + 1 (units 2*pi*c/a).
    pub bin_edges: Vec<f64>,
    /// LDOS per bin (deposited weight / bin width), program units.
    pub values: Vec<f64>,
    pub r: [f64; 3],
    pub e_p: [f64; 3],
}

impl LdosHistogram {
    pub fn new(omega_min: f64, omega_max: f64, bin_width: f64, r: [f64; 3], e_p: [f64; 3]) -> Result<Self> {
        if !(bin_width > 0.0) || !(omega_max > omega_min) {
            return Err(Error::Config(format!(
                "invalid histogram range [{omega_min}, {omega_max}] / bin width {bin_width}"
            )));
        }
        let n = ((omega_max - omega_min) / bin_width).ceil() as usize;
        let bin_edges = (0..=n).map(|i| omega_min + i as f64 * bin_width).collect();
        Ok(LdosHistogram {
            bin_edges,
            values: vec![0.0; n],
            r,
            e_p,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.bin_edges[i] + self.bin_edges[i + 1])
    }

    /// Deposit the modes of one solved k-point with mesh weight `weight`.
    pub fn deposit(&mut self, weight: f64, solution: &BandSolution) {
        let lo = self.bin_edges[0];
        let hi = *self.bin_edges.last().unwrap();
        let any_in_range = solution.omegas.iter().any(|&w| w >= lo && w < hi && w > 1e-8);
        if !any_in_range {
            return;
        }
        let amps = projected_amplitudes(solution, self.r, self.e_p);
        let dw = self.bin_width();
        for (b, &omega) in solution.omegas.iter().enumerate() {
            if omega < lo || omega >= hi {
                continue;
            }
            if let Some(a) = amps[b] {
                let bin = ((omega - lo) / dw) as usize;
                let bin = bin.min(self.values.len() - 1);
                self.values[bin] += weight * a.norm_sqr() * crate::V_CELL / dw;
            }
        }
    }

    /// Total deposited weight, `sum values * bin_width`.
    pub fn integrated(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bin_width()
    }

    /// Values rescaled to units of `rho0(omega_ref)`.
    pub fn scaled(&self, omega_ref: f64) -> Vec<f64> {
        let r0 = crate::rho0(omega_ref);
        self.values.iter().map(|v| v / r0).collect()
    }
}

/// Accumulate the projected LDOS histogram over a k-mesh.
///
/// k-points are solved in fixed-size chunks mapped in parallel and merged in
/// chunk order, so the result is bit-identical for any worker count.
#[allow(clippy::too_many_arguments)]
pub fn ldos_histogram(
    ops: &Arc<EpsilonOperator>,
    mesh: &KMesh,
    r: [f64; 3],
    e_p: [f64; 3],
    omega_min: f64,
    omega_max: f64,
    bin_width: f64,
    max_bands: usize,
) -> Result<LdosHistogram> {
    if mesh.points.is_empty() {
        return Err(Error::Config("empty k-mesh".into()));
    }
    let template = LdosHistogram::new(omega_min, omega_max, bin_width, r, e_p)?;
    let chunk = 64usize;
    let indices: Vec<usize> = (0..mesh.points.len()).collect();
    let partials: Vec<Result<Vec<f64>>> = indices
        .par_chunks(chunk)
        .map(|ids| {
            let mut h = template.clone();
            for &i in ids {
                let sol = eigensolve(&assemble_with(ops, mesh.points[i]), max_bands.min(2 * ops.basis.count))?;
                h.deposit(mesh.weights[i], &sol);
            }
            Ok(h.values)
        })
        .collect();
    let mut out = template;
    for p in partials {
        let p = p?;
        for (v, x) in out.values.iter_mut().zip(&p) {
            *v += *x;
        }
    }
    Ok(out)
}

/// One parabolic band-edge pocket.
#[derive(Debug, Clone)]
pub struct Pocket {
    /// Pocket center (an inequivalent X point), units 2*pi/a.
    pub k_x: [f64; 3],
    /// Diagonal curvature d^2 omega / dk_i^2 along the Cartesian axes.
    pub curvature: [f64; 3],
    /// Summed projected field weight |e_p . E(r)|^2 over the degenerate subspace.
    pub field_weight: f64,
}

/// Square-root band-edge model of the LDOS at one position and orientation.
#[derive(Debug, Clone)]
pub struct BandEdgeModel {
    /// Band-edge frequency (units 2*pi*c/a).
    pub omega_be: f64,
    /// Per-pocket curvature diagonals.
    pub curvature: Vec<[f64; 3]>,
    /// Prefactor of `rho_BE = k_be * sqrt(omega - omega_be)` in program units.
    pub k_be: f64,
    pub pockets: Vec<Pocket>,
    /// Upper frequency bound of the square-root window used by the broadened
    /// closed form (defaults to 1% above the edge).
    pub window_top: f64,
}

impl BandEdgeModel {
    /// K_BE in units of `rho0(omega_ref) / sqrt(omega_ref)`.
    pub fn k_be_scaled(&self, omega_ref: f64) -> f64 {
        3.0 / (8.0 * std::f64::consts::PI) * self.k_be * omega_ref.powf(-1.5)
    }
}

/// Absorptive loss model; `delta = omega0 * (eps_I / eps_R) * f / 2`.
#[derive(Debug, Clone)]
pub struct LossModel {
    pub delta: f64,
    pub f: f64,
    pub eps_ratio: f64,
}

/// First-order perturbative loss width.
pub fn loss_delta(spec: &LatticeSpec, f: f64, omega0: f64) -> Result<LossModel> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::Config(format!("f factor must lie in (0, 1], got {f}")));
    }
    let eps_ratio = spec.eps_backbone_imag / spec.eps_backbone_real;
    Ok(LossModel {
        delta: omega0 * eps_ratio * f / 2.0,
        f,
        eps_ratio,
    })
}

/// Band-edge dispersion data shared by all positions/orientations: curvatures
/// and the X-point solutions of the edge band for each inequivalent pocket.
pub struct EdgeDispersion {
    pub omega_be: f64,
    pub pockets_kx: Vec<[f64; 3]>,
    pub curvatures: Vec<[f64; 3]>,
    pub x_solutions: Vec<BandSolution>,
    /// Per pocket, 0-based indices of the bands degenerate with the edge band.
    pub degenerate: Vec<Vec<usize>>,
    pub band: usize,
}

/// The three inequivalent X points of the FCC Brillouin zone.
pub const X_POINTS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Solve 5-point curvature stencils of band `band` (0-based) through each X
/// pocket. `stencil_h` is the stencil spacing in units 2*pi/a.
pub fn edge_dispersion(ops: &Arc<EpsilonOperator>, stencil_h: f64, band: usize) -> Result<EdgeDispersion> {
    if !(stencil_h > 0.0 && stencil_h < 0.2) {
        return Err(Error::Config(format!("stencil spacing {stencil_h} out of range")));
    }
    let n_bands = band + 4;
    let mut pockets_kx = Vec::new();
    let mut curvatures = Vec::new();
    let mut x_solutions = Vec::new();
    let mut degenerate = Vec::new();
    for &kx in &X_POINTS {
        let sol_x = eigensolve(&assemble_with(ops, kx), n_bands)?;
        let w0 = sol_x.omegas[band];
        // Degenerate subspace at X (basis-rotation invariant weights).
        let deg: Vec<usize> = (0..n_bands)
            .filter(|&b| (sol_x.omegas[b] - w0).abs() <= 1e-8 * w0)
            .collect();
        let mut curv = [0.0f64; 3];
        for d in 0..3 {
            let mut f = [0.0f64; 5];
            f[2] = w0;
            for (s, m) in [(-2.0f64, 0usize), (-1.0, 1), (1.0, 3), (2.0, 4)] {
                let mut k = kx;
                k[d] += s * stencil_h;
                let sol = eigensolve(&assemble_with(ops, k), n_bands)?;
                f[m] = sol.omegas[band];
            }
            curv[d] = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4])
                / (12.0 * stencil_h * stencil_h);
            if curv[d] <= 0.0 {
                return Err(Error::Numerical(format!(
                    "non-positive band-edge curvature {:.3e} along axis {d} at pocket {kx:?}",
                    curv[d]
                )));
            }
        }
        pockets_kx.push(kx);
        curvatures.push(curv);
        x_solutions.push(sol_x);
        degenerate.push(deg);
    }
    let omega_be = x_solutions.iter().map(|s| s.omegas[band]).sum::<f64>() / 3.0;
    let spread = x_solutions
        .iter()
        .map(|s| (s.omegas[band] - omega_be).abs())
        .fold(0.0f64, f64::max);
    if spread > 1e-6 * omega_be {
        return Err(Error::Numerical(format!(
            "X pockets disagree on the edge frequency by {spread:.3e}"
        )));
    }
    Ok(EdgeDispersion {
        omega_be,
        pockets_kx,
        curvatures,
        x_solutions,
        degenerate,
        band,
    })
}

/// Assemble the band-edge model at position `r` and orientation `e_p` from a
/// shared dispersion. Each inequivalent X pocket contributes a full ellipsoid:
/// `k_be = V_cell * 4 sqrt(2) pi * sum_p weight_p / sqrt(det A_p)`.
pub fn band_edge_model(disp: &EdgeDispersion, r: [f64; 3], e_p: [f64; 3]) -> BandEdgeModel {
    let mut pockets = Vec::new();
    let mut k_be = 0.0;
    for p in 0..disp.pockets_kx.len() {
        let amps = projected_amplitudes(&disp.x_solutions[p], r, e_p);
        let weight: f64 = disp.degenerate[p]
            .iter()
            .filter_map(|&b| amps[b].map(|a| a.norm_sqr()))
            .sum();
        let det_a: f64 = disp.curvatures[p].iter().product();
        k_be += crate::V_CELL * 4.0 * 2f64.sqrt() * std::f64::consts::PI * weight / det_a.sqrt();
        pockets.push(Pocket {
            k_x: disp.pockets_kx[p],
            curvature: disp.curvatures[p],
            field_weight: weight,
        });
    }
    BandEdgeModel {
        omega_be: disp.omega_be,
        curvature: disp.curvatures.clone(),
        k_be,
        pockets,
        window_top: disp.omega_be * 1.01,
    }
}

/// 5-point-stencil band-edge fit at one position and orientation.
pub fn fit_band_edge(
    ops: &Arc<EpsilonOperator>,
    r: [f64; 3],
    e_p: [f64; 3],
    stencil_h: f64,
    band: usize,
) -> Result<BandEdgeModel> {
    let disp = edge_dispersion(ops, stencil_h, band)?;
    Ok(band_edge_model(&disp, r, e_p))
}

// ---------------------------------------------------------------------------
// Lorentzian broadening of the square-root edge over a finite window.
// ---------------------------------------------------------------------------

/// `I_pm(z) = 2 sqrt(W) + sqrt(z) (Log((sqrt(W)-sqrt(z))/(sqrt(W)+sqrt(z))) +- i pi)`.
/// `I_plus` is the branch analytic across (0, W) approached from above,
/// `I_minus` from below; together they express the finite-window convolution.
pub(crate) fn i_pm(z: Complex64, w: f64, plus: bool) -> Complex64 {
    let sw = w.sqrt();
    let sz = z.sqrt();
    let l = ((sw - sz) / (sw + sz)).ln();
    let ipi = Complex64::new(0.0, if plus { std::f64::consts::PI } else { -std::f64::consts::PI });
    2.0 * sw + sz * (l + ipi)
}

/// Derivative of `i_pm` with respect to z.
pub(crate) fn i_pm_prime(z: Complex64, w: f64, plus: bool) -> Complex64 {
    let sw = w.sqrt();
    let sz = z.sqrt();
    let l = ((sw - sz) / (sw + sz)).ln();
    let ipi = Complex64::new(0.0, if plus { std::f64::consts::PI } else { -std::f64::consts::PI });
    (l + ipi) / (2.0 * sz) - sw / (w - z)
}

/// Analytic extension of the broadened edge density to complex frequency.
///
/// For `delta = 0` this is `k sqrt(w - omega_be)` (principal branch); for
/// `delta > 0` it is the exact finite-window Lorentzian convolution,
/// `rho(w) = (k / 2 pi i) [I_plus(u + i delta) - I_minus(u - i delta)]` with
/// `u = w - omega_be`, analytic in the strip `|Im w| < delta`.
pub fn broadened_edge_analytic(
    k: f64,
    omega_be: f64,
    window_top: f64,
    delta: f64,
    w: Complex64,
) -> Complex64 {
    let u = w - omega_be;
    if delta == 0.0 {
        return k * u.sqrt();
    }
    let wid = window_top - omega_be;
    let idelta = Complex64::new(0.0, delta);
    let diff = i_pm(u + idelta, wid, true) - i_pm(u - idelta, wid, false);
    k * diff / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

/// Derivative of [`broadened_edge_analytic`] with respect to `w`.
pub fn broadened_edge_analytic_prime(
    k: f64,
    omega_be: f64,
    window_top: f64,
    delta: f64,
    w: Complex64,
) -> Complex64 {
    let u = w - omega_be;
    if delta == 0.0 {
        return k * 0.5 / u.sqrt();
    }
    let wid = window_top - omega_be;
    let idelta = Complex64::new(0.0, delta);
    let diff = i_pm_prime(u + idelta, wid, true) - i_pm_prime(u - idelta, wid, false);
    k * diff / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

/// Closed-form broadened band-edge LDOS on the real axis.
pub fn broadened_edge_closed(k: f64, omega_be: f64, window_top: f64, delta: f64, omega: f64) -> f64 {
    if delta == 0.0 {
        return if omega > omega_be {
            k * (omega - omega_be).sqrt()
        } else {
            0.0
        };
    }
    broadened_edge_analytic(k, omega_be, window_top, delta, Complex64::new(omega, 0.0)).re
}

/// Independent quadrature route for the broadened edge: adaptive
/// Gauss-Kronrod of `k sqrt(x - omega_be) (delta/pi) / ((omega - x)^2 + delta^2)`
/// over the window, in the variable `y = sqrt(x - omega_be)`.
pub fn broadened_edge_quadrature(
    k: f64,
    omega_be: f64,
    window_top: f64,
    delta: f64,
    omega: f64,
) -> f64 {
    if delta == 0.0 {
        return broadened_edge_closed(k, omega_be, window_top, delta, omega);
    }
    let wid = window_top - omega_be;
    let y_top = wid.sqrt();
    let u = omega - omega_be;
    // Breakpoints: graded toward y = 0 and toward the Lorentzian peak.
    let mut pts = vec![0.0, y_top];
    let mut s = y_top * 1e-9;
    while s < y_top {
        pts.push(s);
        s *= 10.0;
    }
    if u > 0.0 {
        let y0 = u.sqrt();
        let width = delta / (2.0 * y0.max(delta.sqrt()));
        let mut d = width;
        while d < y_top {
            if y0 - d > 0.0 {
                pts.push(y0 - d);
            }
            if y0 + d < y_top {
                pts.push(y0 + d);
            }
            d *= 4.0;
        }
        pts.push(y0.min(y_top));
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
    let f = |y: f64| {
        let x = omega_be + y * y;
        let lor = delta / std::f64::consts::PI / ((omega - x) * (omega - x) + delta * delta);
        Complex64::new(k * y * lor * 2.0 * y, 0.0)
    };
    let scale = k * y_top.max(u.abs().sqrt());
    quad::integrate_segmented(&f, &pts, 1e-13 * scale.max(1e-30)).re
}

/// Broadened LDOS of a fitted band-edge model.
pub fn broadened_ldos(model: &BandEdgeModel, loss: &LossModel, omega: f64) -> f64 {
    broadened_edge_closed(model.k_be, model.omega_be, model.window_top, loss.delta, omega)
}

/// Least-squares log-log exponent of a histogram above the edge, using bins
/// with centers in `(omega_be, omega_be + w_max]`, skipping `skip` bins.
pub fn fit_sqrt_exponent(hist: &LdosHistogram, omega_be: f64, w_max: f64, skip: usize) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut seen = 0usize;
    for i in 0..hist.values.len() {
        let c = hist.bin_center(i);
        if c > omega_be && c <= omega_be + w_max && hist.values[i] > 0.0 {
            seen += 1;
            if seen <= skip {
                continue;
            }
            xs.push((c - omega_be).ln());
            ys.push(hist.values[i].ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{build_kmesh, build_reciprocal_set};

    fn vacuum_ops(count: usize) -> Arc<EpsilonOperator> {
        let spec = LatticeSpec {
            a: 1.0,
            r_over_a: 0.0,
            eps_backbone_real: 1.0,
            eps_backbone_imag: 0.0,
            eps_sphere: 1.0,
        };
        let basis = Arc::new(build_reciprocal_set(&spec, count).unwrap());
        EpsilonOperator::new(&spec, basis).unwrap()
    }

    fn si_ops(count: usize) -> Arc<EpsilonOperator> {
        let spec = LatticeSpec::new(1.0, 0.3436, 11.76, 0.0).unwrap();
        let basis = Arc::new(build_reciprocal_set(&spec, count).unwrap());
        EpsilonOperator::new(&spec, basis).unwrap()
    }

    #[test]
    fn histogram_sum_rule_independent_of_bin_width() {
        let ops = vacuum_ops(27);
        let mesh = build_kmesh(3, false).unwrap();
        let r = [0.1, 0.0, 0.2];
        let ep = [0.0, 0.0, 1.0];
        let h1 = ldos_histogram(&ops, &mesh, r, ep, 0.0, 3.0, 0.05, 20).unwrap();
        let h2 = ldos_histogram(&ops, &mesh, r, ep, 0.0, 3.0, 0.01, 20).unwrap();
        assert!(h1.values.iter().all(|&v| v >= 0.0));
        let (a, b) = (h1.integrated(), h2.integrated());
        assert!((a - b).abs() < 1e-10 * a.max(b), "sum rule: {a} vs {b}");
    }

    #[test]
    fn vacuum_ldos_matches_rho0() {
        let ops = vacuum_ops(59);
        let mesh = build_kmesh(16, true).unwrap();
        let h = ldos_histogram(&ops, &mesh, [0.13, 0.21, 0.34], [0.0, 0.0, 1.0], 0.0, 1.0, 0.05, 24)
            .unwrap();
        // Compare binned LDOS against (8 pi / 3) omega^2 away from the cutoff.
        // Mesh discreteness leaves ~1/sqrt(modes per bin) noise per bin; the
        // bin-averaged ratio is the converged quantity.
        let mut ratios = Vec::new();
        for i in 0..h.values.len() {
            let c = h.bin_center(i);
            if c < 0.35 || c > 0.85 {
                continue;
            }
            let expect = crate::rho0(c);
            let rel = (h.values[i] - expect).abs() / expect;
            assert!(rel < 0.3, "omega {c}: {} vs {expect} (rel {rel})", h.values[i]);
            ratios.push(h.values[i] / expect);
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean LDOS ratio {mean}");
    }

    #[test]
    fn orientation_average_is_trace_third() {
        let ops = si_ops(59);
        let mesh = build_kmesh(2, false).unwrap();
        let r = [0.5, 0.0, 0.0];
        let hx = ldos_histogram(&ops, &mesh, r, [1.0, 0.0, 0.0], 0.1, 2.0, 0.02, 16).unwrap();
        let hy = ldos_histogram(&ops, &mesh, r, [0.0, 1.0, 0.0], 0.1, 2.0, 0.02, 16).unwrap();
        let hz = ldos_histogram(&ops, &mesh, r, [0.0, 0.0, 1.0], 0.1, 2.0, 0.02, 16).unwrap();
        // Trace route: |E|^2 deposits computed independently per band.
        let mut trace = vec![0.0f64; hx.values.len()];
        for (i, (&k, &w)) in mesh.points.iter().zip(&mesh.weights).enumerate() {
            let _ = i;
            let sol = eigensolve(&assemble_with(&ops, k), 16).unwrap();
            for b in 0..16 {
                let omega = sol.omegas[b];
                if omega < 0.1 || omega >= 2.0 || omega < 1e-8 {
                    continue;
                }
                let e = crate::pwe::reconstruct_field(&sol, b, r).unwrap();
                let m = e[0].norm_sqr() + e[1].norm_sqr() + e[2].norm_sqr();
                let bin = (((omega - 0.1) / 0.02) as usize).min(trace.len() - 1);
                trace[bin] += w * m * crate::V_CELL / 0.02;
            }
        }
        for i in 0..trace.len() {
            let avg = (hx.values[i] + hy.values[i] + hz.values[i]) / 3.0;
            assert!(
                (avg - trace[i] / 3.0).abs() <= 1e-10 * trace[i].max(1.0),
                "bin {i}: {avg} vs {}",
                trace[i] / 3.0
            );
        }
    }

    #[test]
    fn pocket_constant_vs_riemann_sum() {
        // Synthetic isotropic parabolic band omega = w0 + alpha/2 |dk|^2 with
        // unit field weight; the Riemann-sum histogram must follow
        // K sqrt(omega - w0) with K = V_cell 4 sqrt(2) pi / alpha^(3/2).
        let w0 = 0.8;
        let alpha = 0.6;
        let n = 160usize;
        let half = 0.2;
        let dk = 2.0 * half / n as f64;
        let dv = dk * dk * dk;
        let bw = 1e-3;
        let nbins = 12usize;
        let mut bins = vec![0.0f64; nbins];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let kx = -half + (i as f64 + 0.5) * dk;
                    let ky = -half + (j as f64 + 0.5) * dk;
                    let kz = -half + (l as f64 + 0.5) * dk;
                    let w = w0 + 0.5 * alpha * (kx * kx + ky * ky + kz * kz);
                    let b = ((w - w0) / bw) as usize;
                    if b < nbins {
                        bins[b] += dv * crate::V_CELL / bw;
                    }
                }
            }
        }
        let k_expect =
            crate::V_CELL * 4.0 * 2f64.sqrt() * std::f64::consts::PI / alpha.powf(1.5);
        for b in 2..nbins {
            let c = w0 + (b as f64 + 0.5) * bw;
            let law = k_expect * (c - w0).sqrt();
            let rel = (bins[b] - law).abs() / law;
            assert!(rel < 0.02, "bin {b}: {} vs {law} (rel {rel})", bins[b]);
        }
    }

    #[test]
    fn band_edge_fit_smoke() {
        let ops = si_ops(169);
        let m = fit_band_edge(&ops, [0.5, 0.0, 0.0], [0.0, 0.0, 1.0], 0.01, 8).unwrap();
        assert!(m.k_be >= 0.0);
        assert_eq!(m.pockets.len(), 3);
        for c in &m.curvature {
            assert!(c.iter().all(|&x| x > 0.0));
        }
        // The edge lies above band 8 everywhere sampled (complete gap below).
        let s = eigensolve(&assemble_with(&ops, [1.0, 0.0, 0.0]), 12).unwrap();
        assert!(m.omega_be > s.omegas[7]);
        let scaled = m.k_be_scaled(m.omega_be);
        assert!(scaled > 0.5 && scaled < 100.0, "scaled K_BE {scaled}");
    }

    #[test]
    fn coarse_stencil_rejected() {
        let ops = si_ops(59);
        assert!(edge_dispersion(&ops, 0.5, 8).is_err());
        assert!(edge_dispersion(&ops, 0.0, 8).is_err());
    }

    #[test]
    fn broadened_limits() {
        let (k, wbe, top) = (10.0, 1.0, 1.01);
        assert_eq!(broadened_edge_closed(k, wbe, top, 0.0, 0.999), 0.0);
        let v = broadened_edge_closed(k, wbe, top, 0.0, 1.000004);
        assert!((v - 10.0 * 4e-6f64.sqrt()).abs() < 1e-12);
        // Loss introduces states below the edge, monotonically in delta.
        let mut last = 0.0;
        for delta in [1e-10, 1e-9, 1e-8, 1e-7] {
            let v = broadened_edge_closed(k, wbe, top, delta, wbe);
            assert!(v > last, "delta {delta}: {v}");
            last = v;
        }
    }

    #[test]
    fn broadened_closed_vs_quadrature() {
        let (k, wbe, top) = (10.0, 0.999991691, 1.01);
        for &delta in &[1e-10, 1e-9, 1e-8] {
            for j in 0..21 {
                let omega = wbe + (j as f64 - 10.0) * 10.0 * delta;
                let a = broadened_edge_closed(k, wbe, top, delta, omega);
                let b = broadened_edge_quadrature(k, wbe, top, delta, omega);
                let rel = (a - b).abs() / a.abs().max(b.abs());
                assert!(rel < 1e-8, "delta {delta} omega {omega}: {a} vs {b} rel {rel}");
            }
        }
    }

    #[test]
    fn broadening_conserves_weight() {
        let (k, wbe, top) = (10.0, 1.0, 1.01);
        let delta = 1e-6;
        let f = |x: f64| Complex64::new(broadened_edge_closed(k, wbe, top, delta, x), 0.0);
        let mut pts: Vec<f64> = vec![wbe - 10.0, wbe - 1.0, wbe - 1e-2, wbe - 1e-4];
        for j in -6..=6 {
            pts.push(wbe + 1e-2 * (j as f64) / 6.0);
        }
        pts.extend_from_slice(&[top + 1e-4, top + 1e-2, top + 1.0, top + 10.0]);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total = quad::integrate_segmented(&f, &pts, 1e-12).re;
        let lossless = k * 2.0 / 3.0 * (top - wbe).powf(1.5);
        assert!(
            (total - lossless).abs() < 1e-6 * lossless,
            "broadened weight {total} vs lossless {lossless}"
        );
    }

    #[test]
    fn loss_delta_formula() {
        let spec = LatticeSpec::new(1.0, 0.3436, 11.76, 1.176e-9).unwrap();
        let l = loss_delta(&spec, 0.8, 0.8).unwrap();
        assert!((l.delta - 0.8 * 1e-10 * 0.8 / 2.0).abs() < 1e-24);
        let spec0 = LatticeSpec::new(1.0, 0.3436, 11.76, 0.0).unwrap();
        assert_eq!(loss_delta(&spec0, 0.8, 0.8).unwrap().delta, 0.0);
        assert!(loss_delta(&spec0, 0.0, 0.8).is_err());
    }

    #[test]
    fn sqrt_exponent_on_synthetic_histogram() {
        let mut h = LdosHistogram::new(1.0, 1.02, 5e-4, [0.0; 3], [0.0, 0.0, 1.0]).unwrap();
        let wbe = 1.0005;
        for i in 0..h.values.len() {
            let c = h.bin_center(i);
            h.values[i] = if c > wbe { 7.0 * (c - wbe).sqrt() } else { 0.0 };
        }
        let e = fit_sqrt_exponent(&h, wbe, 0.015, 1).unwrap();
        assert!((e - 0.5).abs() < 0.02, "exponent {e}");
    }
}
