//! The memory kernel `G(w) = i w int_0^C rho(x) / (x^2 (w - x)) dx` as a
//! function on the physical sheet: boundary values from above for Im w >= 0
//! and the analytic continuation through the real axis for Im w < 0.

use super::spectrum::SpectralDensity;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `G` on the physical sheet. For Im w < 0 the continuation adds the jump
/// `2 pi rho_an(w) / w` to the naive lower-boundary value.
pub fn g_physical(density: &dyn SpectralDensity, w: Complex64) -> Result<Complex64> {
    if w.im >= 0.0 {
        return density.g_upper(w);
    }
    if !density.continuation_ok(w) {
        return Err(Error::Numerical(format!(
            "analytic continuation requested outside its validity region: w = {w}"
        )));
    }
    Ok(density.g_upper(w)? + 2.0 * PI * density.rho_analytic(w) / w)
}

/// Upper-half-plane transform (boundary value from above on the real axis).
/// Rejects points below the axis; use [`analytic_continuation`] there.
pub fn g_function(density: &dyn SpectralDensity, w: Complex64) -> Result<Complex64> {
    if w.im < 0.0 {
        return Err(Error::Config(format!(
            "g_function is defined for Im w >= 0; got w = {w}"
        )));
    }
    g_physical(density, w)
}

/// `G` continued through the real axis into the lower half plane. Rejects
/// points on or above the axis; use [`g_function`] there.
pub fn analytic_continuation(density: &dyn SpectralDensity, w: Complex64) -> Result<Complex64> {
    if w.im >= 0.0 {
        return Err(Error::Config(format!(
            "analytic_continuation is defined for Im w < 0; got w = {w}"
        )));
    }
    g_physical(density, w)
}

/// Derivative of [`g_physical`] with respect to w.
pub fn g_physical_prime(density: &dyn SpectralDensity, w: Complex64) -> Result<Complex64> {
    if w.im >= 0.0 {
        return density.g_upper_prime(w);
    }
    if !density.continuation_ok(w) {
        return Err(Error::Numerical(format!(
            "analytic continuation requested outside its validity region: w = {w}"
        )));
    }
    let rho = density.rho_analytic(w);
    let rho_p = density.rho_analytic_prime(w);
    Ok(density.g_upper_prime(w)? + 2.0 * PI * (rho_p / w - rho / (w * w)))
}

/// Independent route for `G` at real frequency: an explicit symmetric-pairing
/// principal-value quadrature of `f(x) = rho(x)/x^2` plus the `-i pi f(w)`
/// residue half-circle, with no recourse to the closed-form antiderivatives.
/// Intended for densities smooth near `w` (e.g. vacuum).
pub fn g_pv_quadrature(density: &dyn SpectralDensity, w: f64) -> Result<Complex64> {
    let cutoff = density.cutoff();
    if w <= 0.0 || w >= cutoff {
        return Err(Error::Numerical(format!(
            "principal value requested outside the open support (0, {cutoff}): w = {w}"
        )));
    }
    let f = |x: f64| density.rho(x) / (x * x);
    let h = 0.5 * w.min(cutoff - w);
    let tol = 1e-12;
    // Outer pieces, graded logarithmically toward both support endpoints so
    // the adaptive rule sees the decades of the wide background.
    let log_pts = |a: f64, b: f64| -> Vec<f64> {
        let mut pts = vec![a, b];
        let mut d = (b - a) * 1e-9;
        while d < b - a {
            pts.push(a + d);
            pts.push(b - d);
            d *= 10.0;
        }
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup_by(|x, y| (*x - *y).abs() < 1e-18 * b.abs().max(1.0));
        pts
    };
    let left = crate::quad::integrate_segmented(
        &|x: f64| Complex64::new(f(x) / (w - x), 0.0),
        &log_pts(0.0, w - h),
        tol,
    );
    let right = crate::quad::integrate_segmented(
        &|x: f64| Complex64::new(f(x) / (w - x), 0.0),
        &log_pts(w + h, cutoff),
        tol,
    );
    // Symmetric pairing across the pole: (f(w-t) - f(w+t)) / t is regular.
    let paired = crate::quad::integrate_segmented(
        &|t: f64| {
            let num = f(w - t) - f(w + t);
            // Guard the removable 0/0 limit with the analytic derivative.
            if t.abs() < 1e-300 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(num / t, 0.0)
            }
        },
        &log_pts(0.0, h),
        tol,
    );
    let pv = left + right + paired;
    let iw = Complex64::i() * w;
    Ok(iw * (pv - Complex64::i() * PI * f(w)))
}
