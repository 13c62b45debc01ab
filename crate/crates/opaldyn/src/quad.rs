//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands on real
//! intervals, plus a golden-section minimizer used by the detuning optimizer.

use num_complex::Complex64;

/// Kronrod-15 nodes on [-1, 1] (positive half; symmetric).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod-15 weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss-7 weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss–Kronrod 7-15 panel on [a, b]. Returns (integral, error estimate).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let hc = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut resk = Complex64::new(0.0, 0.0);
    let mut resg = Complex64::new(0.0, 0.0);
    let fc = f(mid);
    resk += WGK[7] * fc;
    resg += WG[3] * fc;
    for j in 0..7 {
        let dx = hc * XGK[j];
        let fsum = f(mid - dx) + f(mid + dx);
        resk += WGK[j] * fsum;
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }
    let integral = resk * hc;
    let err = ((resk - resg) * hc).norm();
    (integral, err)
}

/// Adaptive quadrature of a complex integrand over [a, b] by recursive
/// bisection of the worst panel, to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    // Worst-first heap of panels (err, a, b, value).
    let mut panels: Vec<(f64, f64, f64, Complex64)> = Vec::new();
    let (v, e) = gk15(f, a, b);
    panels.push((e, a, b, v));
    let mut total_err = e;
    let mut total_val = v;
    let max_panels = 4000;
    // Stop on the absolute tolerance or a relative floor near machine
    // precision, whichever is reached first; otherwise unreachable absolute
    // tolerances would always exhaust the panel budget.
    while total_err > tol && total_err > 5e-15 * total_val.norm() && panels.len() < max_panels {
        // Pop the panel with the largest error.
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.0 > panels[worst].0 {
                worst = i;
            }
        }
        let (err, pa, pb, old_v) = panels.swap_remove(worst);
        total_err -= err;
        let pm = 0.5 * (pa + pb);
        if pm <= pa || pm >= pb {
            // Interval exhausted at machine precision; accept as is.
            panels.push((0.0, pa, pb, old_v));
            continue;
        }
        let (v1, e1) = gk15(f, pa, pm);
        let (v2, e2) = gk15(f, pm, pb);
        panels.push((e1, pa, pm, v1));
        panels.push((e2, pm, pb, v2));
        total_err += e1 + e2;
        total_val += v1 + v2 - old_v;
    }
    panels.iter().map(|p| p.3).sum()
}

/// Adaptive quadrature over a list of breakpoints: integrates each
/// consecutive pair and sums. Breakpoints must be nondecreasing.
pub fn integrate_segmented<F: Fn(f64) -> Complex64>(f: &F, pts: &[f64], tol: f64) -> Complex64 {
    let n = pts.len().max(1) - 1;
    let seg_tol = tol / n.max(1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for w in pts.windows(2) {
        if w[1] > w[0] {
            acc += integrate(f, w[0], w[1], seg_tol);
        }
    }
    acc
}

/// Golden-section minimization of a unimodal scalar function on [a, b].
/// Returns (argmin, min). `tol` is the absolute x tolerance.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
