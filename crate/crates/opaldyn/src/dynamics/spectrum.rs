//! Relative LDOS models `rho_tilde(omega_tilde)` feeding the memory integral,
//! behind a strategy trait so the CLI can pick the density by name.
//!
//! All frequencies here are scaled by the emitter transition frequency
//! (`omega_tilde = omega / omega_eg`). The composite model uses the vacuum
//! background `rho = w^2` outside the analysis window [0.95, 1.01] and the
//! (possibly broadened) band-edge law inside; the cutoff is 1e5.

use crate::ldos::{broadened_edge_analytic, broadened_edge_analytic_prime, broadened_edge_closed};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

pub const WINDOW_LO: f64 = 0.95;
pub const WINDOW_HI: f64 = 1.01;
pub const CUTOFF: f64 = 1e5;

/// Scaled band-edge parameters inside the analysis window.
#[derive(Debug, Clone)]
pub struct EdgeParams {
    /// K_BE in units rho0(omega_eg)/sqrt(omega_eg).
    pub k_be: f64,
    /// Scaled edge frequency omega_BE / omega_eg (the detuning).
    pub omega_be: f64,
    /// Scaled loss half-width delta / omega_eg.
    pub delta: f64,
}

/// A relative LDOS on the real axis together with everything the memory
/// integral needs: its boundary-value transform `G` for Im w >= 0 (the same
/// expression evaluates the naive lower boundary for Im w < 0), the transform
/// derivative, and the analytic extension of the density across the window.
pub trait SpectralDensity: Send + Sync {
    fn name(&self) -> &'static str;
    fn cutoff(&self) -> f64;
    /// Density on the real axis.
    fn rho(&self, x: f64) -> f64;
    /// Analytic extension of the density near the analysis window.
    fn rho_analytic(&self, w: Complex64) -> Complex64;
    fn rho_analytic_prime(&self, w: Complex64) -> Complex64;
    /// `G(w) = i w int_0^C rho(x) / (x^2 (w - x)) dx`, boundary value from
    /// above for real w.
    fn g_upper(&self, w: Complex64) -> Result<Complex64>;
    /// Derivative of `g_upper` with respect to w.
    fn g_upper_prime(&self, w: Complex64) -> Result<Complex64>;
    /// Whether the analytic continuation through the real axis is valid at
    /// this point of the lower half plane.
    fn continuation_ok(&self, w: Complex64) -> bool;
    /// Band-edge parameters, when the model has an edge.
    fn edge(&self) -> Option<&EdgeParams>;
}

/// Principal log for complex arguments; for exactly real negative arguments
/// the limit from above (`ln|z| + i pi`) is taken.
pub fn log_above(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        if z.re < 0.0 {
            Complex64::new((-z.re).ln(), std::f64::consts::PI)
        } else {
            Complex64::new(z.re.ln(), 0.0)
        }
    } else {
        z.ln()
    }
}

fn check_interior(w: Complex64, cutoff: f64) -> Result<()> {
    if w.im == 0.0 && (w.re <= 1e-12 || (w.re - cutoff).abs() < 1e-9 || w.re >= cutoff) {
        return Err(Error::Numerical(format!(
            "G evaluated on an integration endpoint: w = {w}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

/// `rho = 0`: no electromagnetic environment.
pub struct ZeroDensity;

impl SpectralDensity for ZeroDensity {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn cutoff(&self) -> f64 {
        CUTOFF
    }
    fn rho(&self, _x: f64) -> f64 {
        0.0
    }
    fn rho_analytic(&self, _w: Complex64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn rho_analytic_prime(&self, _w: Complex64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn g_upper(&self, _w: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
    fn g_upper_prime(&self, _w: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
    fn continuation_ok(&self, _w: Complex64) -> bool {
        true
    }
    fn edge(&self) -> Option<&EdgeParams> {
        None
    }
}

/// `rho = w^2` everywhere up to the cutoff (vacuum reduction).
pub struct VacuumDensity {
    pub cutoff: f64,
}

impl SpectralDensity for VacuumDensity {
    fn name(&self) -> &'static str {
        "vacuum"
    }
    fn cutoff(&self) -> f64 {
        self.cutoff
    }
    fn rho(&self, x: f64) -> f64 {
        if (0.0..=self.cutoff).contains(&x) {
            x * x
        } else {
            0.0
        }
    }
    fn rho_analytic(&self, w: Complex64) -> Complex64 {
        w * w
    }
    fn rho_analytic_prime(&self, w: Complex64) -> Complex64 {
        2.0 * w
    }
    fn g_upper(&self, w: Complex64) -> Result<Complex64> {
        check_interior(w, self.cutoff)?;
        Ok(Complex64::i() * w * (log_above(w) - log_above(w - self.cutoff)))
    }
    fn g_upper_prime(&self, w: Complex64) -> Result<Complex64> {
        check_interior(w, self.cutoff)?;
        let logs = log_above(w) - log_above(w - self.cutoff);
        Ok(Complex64::i() * (logs + 1.0 - w / (w - self.cutoff)))
    }
    fn continuation_ok(&self, w: Complex64) -> bool {
        // rho = w^2 is entire; only the support endpoints obstruct.
        w.re > 1e-9 && w.re < self.cutoff
    }
    fn edge(&self) -> Option<&EdgeParams> {
        None
    }
}

/// Band-edge density inside the analysis window, with or without the `w^2`
/// background outside it.
pub struct CompositeDensity {
    pub edge: EdgeParams,
    pub background: bool,
    pub cutoff: f64,
    pub window: (f64, f64),
}

impl CompositeDensity {
    fn edge_rho(&self, x: f64) -> f64 {
        broadened_edge_closed(
            self.edge.k_be,
            self.edge.omega_be,
            self.window.1,
            self.edge.delta,
            x,
        )
    }

    /// Integrand `f(x) = rho(x) / x^2` on the window.
    fn f_win(&self, x: f64) -> f64 {
        self.edge_rho(x) / (x * x)
    }

    /// Half-plane analytic piece of the broadened-edge window integrand:
    /// on the real axis `f(x) = rho(x)/x^2 = h_+(x) - h_-(x)`, where `h_+`
    /// extends analytically to `Im x > -delta` and `h_-` to `Im x < delta`
    /// (their branch points sit at `omega_be -+ i delta` and
    /// `window_top -+ i delta`).
    fn h_branch(&self, x: Complex64, plus: bool) -> Complex64 {
        let wid = self.window.1 - self.edge.omega_be;
        let sign = if plus { 1.0 } else { -1.0 };
        let z = x - self.edge.omega_be + Complex64::new(0.0, sign * self.edge.delta);
        let pref = self.edge.k_be / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        pref * crate::ldos::i_pm(z, wid, plus) / (x * x)
    }

    fn h_branch_prime(&self, x: Complex64, plus: bool) -> Complex64 {
        let wid = self.window.1 - self.edge.omega_be;
        let sign = if plus { 1.0 } else { -1.0 };
        let z = x - self.edge.omega_be + Complex64::new(0.0, sign * self.edge.delta);
        let pref = self.edge.k_be / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        pref
            * (crate::ldos::i_pm_prime(z, wid, plus) / (x * x)
                - 2.0 * crate::ldos::i_pm(z, wid, plus) / (x * x * x))
    }

    /// Height of the deformed rectangular contours.
    const DEFORM_HEIGHT: f64 = 0.03;

    /// `C'(w) = -int_wbe^hi f(x)/(w-x)^2 dx` for the sharp edge (`delta = 0`),
    /// by deforming the path into the lower half plane where
    /// `f = k sqrt(x - wbe) / x^2` is analytic: wbe -> wbe - iH -> hi - iH
    /// -> hi. For Im w >= 0 (including the real-axis boundary value from
    /// above) the deformed path sees no pole; for a pole inside the swept
    /// rectangle the explicit residue derivative is added back.
    fn sharp_prime_deformed(&self, w: Complex64) -> Complex64 {
        let hi = self.window.1;
        let wbe = self.edge.omega_be;
        let k = self.edge.k_be;
        let hgt = Self::DEFORM_HEIGHT;
        let tol = 1e-13;
        let kernel = |x: Complex64| {
            let f = k * (x - wbe).sqrt() / (x * x);
            let d = w - x;
            -f / (d * d)
        };
        // Left leg with x = wbe - i s^2: the substitution flattens the branch
        // point, and the pole (at distance |w - wbe| from the corner) maps to
        // s ~ sqrt|w - wbe|, where the panels are graded.
        let s_top = hgt.sqrt();
        let mut ss = vec![0.0, s_top];
        let mut d = s_top * 1e-8;
        while d < s_top {
            ss.push(d);
            d *= 4.0;
        }
        let s0 = (w - wbe).norm().sqrt();
        if s0 > 0.0 && s0 < s_top {
            let mut d = s0 * 1e-3;
            while d < s_top {
                ss.push(d);
                d *= 4.0;
            }
        }
        ss.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ss.dedup();
        let u0 = w - wbe;
        let sqrt_neg_i = Complex64::new(0.5f64.sqrt(), -(0.5f64.sqrt()));
        let gleft = |s: f64| {
            let x = Complex64::new(wbe, -s * s);
            let f = k * s * sqrt_neg_i / (x * x);
            let den = u0 + Complex64::new(0.0, s * s);
            -f / (den * den) * Complex64::new(0.0, -2.0 * s)
        };
        let mut cp = crate::quad::integrate_segmented(&gleft, &ss, tol);
        let gbot = |u: f64| kernel(Complex64::new(u, -hgt));
        cp += crate::quad::integrate_segmented(&gbot, &[wbe, hi], tol);
        // Right leg traversed upward, back to the axis.
        let gright = |t: f64| kernel(Complex64::new(hi, -t)) * Complex64::new(0.0, -1.0);
        cp -= crate::quad::integrate_segmented(&gright, &[0.0, hgt], tol);
        if w.re > wbe && w.re < hi && w.im < 0.0 && w.im > -hgt {
            let f_an = self.rho_analytic(w) / (w * w);
            let f_an_p = self.rho_analytic_prime(w) / (w * w) - 2.0 * f_an / w;
            cp += Complex64::new(0.0, 2.0 * std::f64::consts::PI) * f_an_p;
        }
        cp
    }

    /// `int_lo^hi h(x)/(w-x) dx` (and, if requested, its w-derivative) for one
    /// half-plane branch, evaluated on the path lo -> lo + i s H -> hi + i s H
    /// -> hi with s = +-1 on the side where the branch is analytic. Residue
    /// corrections for a pole inside the swept strip are applied by the
    /// caller.
    fn deformed_cauchy(
        &self,
        w: Complex64,
        plus: bool,
        want_prime: bool,
    ) -> (Complex64, Complex64) {
        let (lo, hi) = self.window;
        let sgn = if plus { 1.0 } else { -1.0 };
        let hgt = Self::DEFORM_HEIGHT;
        let tol = 1e-13;
        // Vertical legs pass within `delta` of a branch point at t = 0 (the
        // hi leg in particular); grade the panels toward that corner.
        let mut ts = vec![0.0, hgt];
        let mut d = self.edge.delta.min(hgt);
        while d < hgt {
            ts.push(d);
            d *= 4.0;
        }
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        let mut c = Complex64::new(0.0, 0.0);
        let mut cp = Complex64::new(0.0, 0.0);
        let mut leg = |f: &dyn Fn(f64) -> Complex64, dxdt: Complex64, pts: &[f64], orient: f64| {
            let kernel = |t: f64| {
                let x = f(t);
                self.h_branch(x, plus) / (w - x)
            };
            c += orient * dxdt * crate::quad::integrate_segmented(&kernel, pts, tol);
            if want_prime {
                let kernel_p = |t: f64| {
                    let x = f(t);
                    let d = w - x;
                    -self.h_branch(x, plus) / (d * d)
                };
                cp += orient * dxdt * crate::quad::integrate_segmented(&kernel_p, pts, tol);
            }
        };
        let up = Complex64::new(0.0, sgn);
        // lo vertical, upward in |t|.
        leg(&|t| Complex64::new(lo, sgn * t), up, &ts, 1.0);
        // horizontal at height s * hgt.
        leg(
            &|u| Complex64::new(u, sgn * hgt),
            Complex64::new(1.0, 0.0),
            &[lo, hi],
            1.0,
        );
        // hi vertical, traversed back down toward the axis.
        leg(&|t| Complex64::new(hi, sgn * t), up, &ts, -1.0);
        (c, cp)
    }

    /// `C(w) = int_window f(x)/(w-x) dx` and `C'(w) = -int f(x)/(w-x)^2 dx`.
    fn window_cauchy(&self, w: Complex64, want_prime: bool) -> (Complex64, Complex64) {
        let (lo, hi) = self.window;
        let wbe = self.edge.omega_be;
        let delta = self.edge.delta;
        let tol = 1e-12;
        if delta == 0.0 {
            let p = w.re;
            // Support is [wbe, hi]; substitute y = sqrt(x - wbe).
            let y_top = (hi - wbe).sqrt();
            let k = self.edge.k_be;
            let subtract = p > wbe + 1e-13 && p < hi - 1e-13;
            let mut pts = vec![0.0, y_top];
            let mut d = y_top * 1e-10;
            while d < y_top {
                pts.push(d);
                d *= 4.0;
            }
            // Grade around the pole image and around sqrt(|w - wbe|).
            let s_abs = (w - wbe).norm();
            if s_abs > 0.0 && s_abs.sqrt() < y_top {
                let y0 = s_abs.sqrt();
                let mut d = y0 * 1e-8;
                while d < y_top {
                    for s in [y0 - d, y0 + d] {
                        if s > 0.0 && s < y_top {
                            pts.push(s);
                        }
                    }
                    d *= 4.0;
                }
                pts.push(y0);
            }
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
            let fp = if subtract { self.f_win(p) } else { 0.0 };
            // Keep w - x = (w - wbe) - y^2 in this form: computing it as
            // w - (wbe + y^2) loses all precision once y^2 < eps * wbe.
            let u0 = w - wbe;
            let g0 = |y: f64| -> Complex64 {
                let x = wbe + y * y;
                let fx = k * y / (x * x);
                (fx - fp) * 2.0 * y / (u0 - y * y)
            };
            let mut c = crate::quad::integrate_segmented(&g0, &pts, tol);
            if subtract {
                c += fp * (log_above(w - wbe) - log_above(w - hi));
            }
            let cp = if want_prime {
                self.sharp_prime_deformed(w)
            } else {
                Complex64::new(0.0, 0.0)
            };
            (c, cp)
        } else {
            // Broadened edge: split f = h_+ - h_- into half-plane analytic
            // pieces and push each Cauchy integral onto a rectangular path on
            // its analytic side. The integrands there are smooth on the scale
            // of the contour height, independent of delta; a pole swept over
            // during the deformation contributes an explicit residue term.
            // For real w the upper-branch correction reproduces the boundary
            // value from above.
            let (c_p, cp_p) = self.deformed_cauchy(w, true, want_prime);
            let (c_m, cp_m) = self.deformed_cauchy(w, false, want_prime);
            let mut c = c_p - c_m;
            let mut cp = cp_p - cp_m;
            let hgt = Self::DEFORM_HEIGHT;
            let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
            if w.re > lo && w.re < hi {
                if w.im >= 0.0 && w.im < hgt {
                    c -= two_pi_i * self.h_branch(w, true);
                    if want_prime {
                        cp -= two_pi_i * self.h_branch_prime(w, true);
                    }
                } else if w.im < 0.0 && w.im > -hgt {
                    // The lower rectangle belongs to C_-, which enters with a
                    // minus sign: c = C_+ - (def_- + 2 pi i h_-).
                    c -= two_pi_i * self.h_branch(w, false);
                    if want_prime {
                        cp -= two_pi_i * self.h_branch_prime(w, false);
                    }
                }
            }
            (c, cp)
        }
    }

    /// Background contribution `i w [int_0^lo + int_hi^cutoff] dx/(w-x)` and
    /// its derivative (the x^2 density cancels the 1/x^2 kernel).
    fn background_g(&self, w: Complex64, want_prime: bool) -> (Complex64, Complex64) {
        if !self.background {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let (lo, hi) = self.window;
        let l0 = log_above(w);
        let l1 = log_above(w - lo);
        let l2 = log_above(w - hi);
        let l3 = log_above(w - self.cutoff);
        let logs = l0 - l1 + l2 - l3;
        let g = Complex64::i() * w * logs;
        let gp = if want_prime {
            let frac = 1.0 / w - 1.0 / (w - lo) + 1.0 / (w - hi) - 1.0 / (w - self.cutoff);
            Complex64::i() * (logs + w * frac)
        } else {
            Complex64::new(0.0, 0.0)
        };
        (g, gp)
    }
}

impl SpectralDensity for CompositeDensity {
    fn name(&self) -> &'static str {
        if self.background {
            "composite"
        } else {
            "edge"
        }
    }
    fn cutoff(&self) -> f64 {
        self.cutoff
    }
    fn rho(&self, x: f64) -> f64 {
        let (lo, hi) = self.window;
        if x >= lo && x <= hi {
            self.edge_rho(x)
        } else if self.background && (0.0..=self.cutoff).contains(&x) {
            x * x
        } else {
            0.0
        }
    }
    fn rho_analytic(&self, w: Complex64) -> Complex64 {
        broadened_edge_analytic(
            self.edge.k_be,
            self.edge.omega_be,
            self.window.1,
            self.edge.delta,
            w,
        )
    }
    fn rho_analytic_prime(&self, w: Complex64) -> Complex64 {
        broadened_edge_analytic_prime(
            self.edge.k_be,
            self.edge.omega_be,
            self.window.1,
            self.edge.delta,
            w,
        )
    }
    fn g_upper(&self, w: Complex64) -> Result<Complex64> {
        check_interior(w, self.cutoff)?;
        let (bg, _) = self.background_g(w, false);
        let (c, _) = self.window_cauchy(w, false);
        Ok(bg + Complex64::i() * w * c)
    }
    fn g_upper_prime(&self, w: Complex64) -> Result<Complex64> {
        check_interior(w, self.cutoff)?;
        let (bg, bgp) = self.background_g(w, true);
        let _ = bg;
        let (c, cp) = self.window_cauchy(w, true);
        Ok(bgp + Complex64::i() * (c + w * cp))
    }
    fn continuation_ok(&self, w: Complex64) -> bool {
        if self.edge.delta == 0.0 {
            // k sqrt(w - omega_be): the only cut lies on the real axis.
            true
        } else {
            // The convolved edge has branch points at omega_be - i delta and
            // window_top - i delta; the strip |Im w| < delta is always safe,
            // and between the branch points any depth is.
            w.im.abs() < 0.95 * self.edge.delta
                || (w.re > self.edge.omega_be && w.re < self.window.1)
        }
    }
    fn edge(&self) -> Option<&EdgeParams> {
        Some(&self.edge)
    }
}

// ---------------------------------------------------------------------------

type Constructor = fn(&EdgeParams) -> Arc<dyn SpectralDensity>;

/// Name -> constructor registry for the density models the CLI can select.
pub fn registry() -> &'static [(&'static str, Constructor)] {
    fn composite(e: &EdgeParams) -> Arc<dyn SpectralDensity> {
        Arc::new(CompositeDensity {
            edge: e.clone(),
            background: true,
            cutoff: CUTOFF,
            window: (WINDOW_LO, WINDOW_HI),
        })
    }
    fn edge_only(e: &EdgeParams) -> Arc<dyn SpectralDensity> {
        Arc::new(CompositeDensity {
            edge: e.clone(),
            background: false,
            cutoff: CUTOFF,
            window: (WINDOW_LO, WINDOW_HI),
        })
    }
    fn vacuum(_e: &EdgeParams) -> Arc<dyn SpectralDensity> {
        Arc::new(VacuumDensity { cutoff: CUTOFF })
    }
    fn zero(_e: &EdgeParams) -> Arc<dyn SpectralDensity> {
        Arc::new(ZeroDensity)
    }
    &[
        ("composite", composite),
        ("edge", edge_only),
        ("vacuum", vacuum),
        ("zero", zero),
    ]
}

/// Build a density by registry name.
pub fn spectrum_by_name(name: &str, edge: &EdgeParams) -> Result<Arc<dyn SpectralDensity>> {
    for (n, ctor) in registry() {
        if *n == name {
            return Ok(ctor(edge));
        }
    }
    let known: Vec<&str> = registry().iter().map(|(n, _)| *n).collect();
    Err(Error::Config(format!(
        "unknown spectrum '{name}' (known: {})",
        known.join(", ")
    )))
}
