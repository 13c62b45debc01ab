//! Time-domain excited-state amplitude from the transformed amplitude
//! `c_tilde(w) = 1 / D(w)`: the located pole is split off analytically and
//! the regular remainder is inverted along the real axis with a piecewise
//! linear Filon rule, exact for each oscillatory segment.

use super::gfun::g_physical;
use super::pole::{find_pole, EmitterSpec, PoleResult};
use super::spectrum::SpectralDensity;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Inversion window on the scaled frequency axis.
const W_MIN: f64 = 0.9;
const W_MAX: f64 = 1.1;
const BASE_NODES: usize = 401;

#[derive(Debug, Clone)]
pub struct DecayCurve {
    /// Scaled times (units 1/omega_eg).
    pub times: Vec<f64>,
    /// Excited-state population |c(t)|^2.
    pub population: Vec<f64>,
    /// Long-time pole contribution |a|^2 exp(2 Im w0 t).
    pub pole_part: Vec<f64>,
    pub pole: PoleResult,
}

/// `phi0(theta) = (1 - e^{-i theta}) / (i theta)`, the zeroth Filon moment
/// `int_0^1 e^{-i theta s} ds`, with a series fallback for small theta.
fn phi0(theta: f64) -> Complex64 {
    if theta.abs() < 1e-3 {
        let t = theta;
        Complex64::new(1.0 - t * t / 6.0, -t / 2.0 + t * t * t / 24.0)
    } else {
        let e = Complex64::new(0.0, -theta).exp();
        (1.0 - e) / Complex64::new(0.0, theta)
    }
}

/// `phi1(theta) = (phi0 - e^{-i theta}) / (i theta) = int_0^1 s e^{-i theta s} ds`.
fn phi1(theta: f64) -> Complex64 {
    if theta.abs() < 1e-3 {
        let t = theta;
        Complex64::new(0.5 - t * t / 8.0, -t / 3.0 + t * t * t / 30.0)
    } else {
        let e = Complex64::new(0.0, -theta).exp();
        (phi0(theta) - e) / Complex64::new(0.0, theta)
    }
}

/// Sine integral `Si(x) = int_0^x sin(t)/t dt` for x >= 0: Maclaurin series
/// below 8, asymptotic auxiliary expansion above.
fn sine_integral(x: f64) -> f64 {
    if x < 16.0 {
        // Si(x) = sum_k (-1)^k x^{2k+1} / ((2k+1) (2k+1)!).
        let x2 = x * x;
        let mut factorial_term = x; // (-1)^k x^{2k+1} / (2k+1)!
        let mut sum = x;
        for k in 1..60 {
            let n = (2 * k + 1) as f64;
            factorial_term *= -x2 / ((2 * k) as f64 * n);
            let contrib = factorial_term / n;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        // Si(x) = pi/2 - f(x) cos x - g(x) sin x, auxiliary asymptotic
        // series truncated near their optimal order for x >= 16.
        let s = 1.0 / (x * x);
        let f = (1.0 - s * (2.0 - s * (24.0 - s * (720.0 - s * (40320.0 - s * 3628800.0))))) / x;
        let g =
            s * (1.0 - s * (6.0 - s * (120.0 - s * (5040.0 - s * (362880.0 - s * 39916800.0)))));
        PI / 2.0 - f * x.cos() - g * x.sin()
    }
}

/// Append a two-sided geometric ladder of points around `center`.
fn cluster(center: f64, start: f64, reach: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
    if start <= 0.0 {
        return;
    }
    let mut d = start;
    while d < reach {
        for s in [center - d, center + d] {
            if s > lo && s < hi {
                out.push(s);
            }
        }
        d *= 1.5;
    }
    if center > lo && center < hi {
        out.push(center);
    }
}

/// Frequency nodes resolving the band edge, the pole peak, and any
/// quasi-resonance left on the axis after the pole subtraction.
fn build_nodes(density: &dyn SpectralDensity, emitter: &EmitterSpec, pole: &PoleResult) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(1024);
    for i in 0..BASE_NODES {
        nodes.push(W_MIN + (W_MAX - W_MIN) * i as f64 / (BASE_NODES - 1) as f64);
    }
    if let Some(e) = density.edge() {
        cluster(e.omega_be, 1e-10, 0.05, W_MIN, W_MAX, &mut nodes);
        // Analysis window boundaries carry weak logarithmic kinks.
        cluster(super::spectrum::WINDOW_LO, 1e-9, 1e-2, W_MIN, W_MAX, &mut nodes);
        cluster(super::spectrum::WINDOW_HI, 1e-9, 1e-2, W_MIN, W_MAX, &mut nodes);
    }
    let bound = pole.omega0.im.abs() < 1e-13;
    let pole_start = if bound {
        1e-7
    } else {
        (pole.omega0.im.abs() / 30.0).max(1e-10)
    };
    cluster(pole.omega0.re, pole_start, 0.05, W_MIN, W_MAX, &mut nodes);
    cluster(1.0, 1e-9, 0.05, W_MIN, W_MAX, &mut nodes);
    // A bound-state pole can leave a sharp quasi-resonance on the axis where
    // |D| has a second near-zero; estimate it by one fixed-point sweep.
    if let Ok(g) = g_physical(density, Complex64::new(1.0, -1e-12)) {
        let w_res = Complex64::new(1.0, 0.0) - Complex64::i() * emitter.beta * g;
        if w_res.re > W_MIN && w_res.re < W_MAX {
            cluster(
                w_res.re,
                (w_res.im.abs() / 30.0).max(1e-10),
                0.05,
                W_MIN,
                W_MAX,
                &mut nodes,
            );
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    if density.edge().is_some() {
        // The transform kernel is singular exactly on the analysis-window
        // boundaries; the clusters above approach them instead.
        nodes.retain(|&w| {
            (w - super::spectrum::WINDOW_LO).abs() > 1e-12
                && (w - super::spectrum::WINDOW_HI).abs() > 1e-12
        });
    }
    if bound {
        // Keep a guard gap around the on-axis pole: the remainder is regular
        // there but suffers catastrophic cancellation closer in.
        nodes.retain(|&w| (w - pole.omega0.re).abs() >= 0.5e-7);
    }
    nodes
}

/// Sampled regular remainder on the inversion window, invertible at any time.
struct RestInverter {
    nodes: Vec<f64>,
    q: Vec<Complex64>,
    /// Coefficient of the `b/(w - 1)` model of the remainder outside the
    /// window.
    b: Complex64,
    /// Half-width of the window around w = 1 beyond which the tail model
    /// applies.
    l: f64,
}

impl RestInverter {
    fn new(
        emitter: &EmitterSpec,
        density: &dyn SpectralDensity,
        pole: &PoleResult,
    ) -> Result<Self> {
        let a = pole.residual;
        let w0 = pole.omega0;
        let nodes = build_nodes(density, emitter, pole);
        // Regular remainder q(w) = 1/D(w) - a/(w - w0) on the axis.
        let q: Vec<Complex64> = nodes
            .iter()
            .map(|&w| -> Result<Complex64> {
                let wc = Complex64::new(w, 0.0);
                let d = emitter.beta * density.g_upper(wc)? - Complex64::i() * (wc - 1.0);
                Ok(1.0 / d - a / (wc - w0))
            })
            .collect::<Result<_>>()?;
        Ok(RestInverter {
            nodes,
            q,
            b: Complex64::i() - a,
            l: (1.0 - W_MIN).min(W_MAX - 1.0),
        })
    }

    /// `rest(t) = (1/2 pi) int q(w) e^{-i w t} dw`: piecewise-linear Filon
    /// over the window plus the analytic transform of the `b/(w-1)` tail,
    /// `-(i b / pi) e^{-i t} sign(t) (pi/2 - Si(L |t|))` (the truncated tail
    /// is not causal; negative times matter for energy accounting).
    fn rest(&self, t: f64) -> Complex64 {
        let mut rest = Complex64::new(0.0, 0.0);
        for s in 0..self.nodes.len() - 1 {
            let (wa, wb) = (self.nodes[s], self.nodes[s + 1]);
            let h = wb - wa;
            let theta = t * h;
            let lead = Complex64::from_polar(1.0, -wa * t);
            rest += h * lead * (self.q[s] * phi0(theta) + (self.q[s + 1] - self.q[s]) * phi1(theta));
        }
        rest /= 2.0 * PI;
        let sgn = if t < 0.0 { -1.0 } else { 1.0 };
        rest + -Complex64::i() * self.b / PI
            * Complex64::from_polar(1.0, -t)
            * (sgn * (PI / 2.0 - sine_integral(self.l * t.abs())))
    }

    /// Frequency-side energy `(1/2 pi) int |q_model(w)|^2 dw` of the same
    /// spectral model the inversion uses: exact segment integrals of the
    /// piecewise-linear interpolant plus the closed-form tail `2 |b|^2 / L`.
    #[cfg(test)]
    fn spectral_energy(&self) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.nodes.len() - 1 {
            let h = self.nodes[s + 1] - self.nodes[s];
            let qa = self.q[s];
            let dq = self.q[s + 1] - qa;
            // int_0^1 |qa + dq s|^2 ds
            acc += h * (qa.norm_sqr() + (qa.conj() * dq).re + dq.norm_sqr() / 3.0);
        }
        acc += 2.0 * self.b.norm_sqr() / self.l;
        acc / (2.0 * PI)
    }
}

/// Excited-state dynamics on `n` evenly spaced times in `[0, t_max]`
/// (scaled units).
pub fn decay_curve(
    emitter: &EmitterSpec,
    density: &dyn SpectralDensity,
    t_max: f64,
    n: usize,
) -> Result<DecayCurve> {
    emitter.validate()?;
    if !(t_max > 0.0) || n < 2 {
        return Err(Error::Config(format!(
            "decay curve needs t_max > 0 and at least 2 samples, got t_max = {t_max}, n = {n}"
        )));
    }
    let pole = find_pole(emitter, density)?;
    let a = pole.residual;
    let w0 = pole.omega0;
    let inverter = RestInverter::new(emitter, density, &pole)?;

    let times: Vec<f64> = (0..n)
        .map(|j| t_max * j as f64 / (n - 1) as f64)
        .collect();
    let mut population = Vec::with_capacity(n);
    let mut pole_part = Vec::with_capacity(n);
    for &t in &times {
        let c = -Complex64::i() * a * (-Complex64::i() * w0 * t).exp() + inverter.rest(t);
        population.push(c.norm_sqr());
        pole_part.push(a.norm_sqr() * (2.0 * w0.im * t).exp());
    }
    let p0 = population[0];
    if (p0 - 1.0).abs() > 1e-2 {
        return Err(Error::Numerical(format!(
            "inversion sanity check failed: |c(0)|^2 = {p0}, expected 1"
        )));
    }
    if (p0 - 1.0).abs() > 1e-3 {
        eprintln!("warning: inversion normalization drift |c(0)|^2 = {p0}");
    }
    Ok(DecayCurve {
        times,
        population,
        pole_part,
        pole,
    })
}

#[cfg(test)]
mod tests {
    use super::super::spectrum::{
        CompositeDensity, EdgeParams, VacuumDensity, ZeroDensity, CUTOFF, WINDOW_HI, WINDOW_LO,
    };
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn filon_moments_match_series_boundary() {
        for theta in [9.9e-4, 1.01e-3] {
            let e = Complex64::new(0.0, -theta).exp();
            let p0 = (1.0 - e) / Complex64::new(0.0, theta);
            let p1 = (p0 - e) / Complex64::new(0.0, theta);
            assert_relative_eq!(phi0(theta).re, p0.re, max_relative = 1e-9);
            assert_relative_eq!(phi0(theta).im, p0.im, max_relative = 1e-9);
            assert_relative_eq!(phi1(theta).re, p1.re, max_relative = 1e-9);
            assert_relative_eq!(phi1(theta).im, p1.im, max_relative = 1e-9);
        }
    }

    #[test]
    fn sine_integral_matches_quadrature() {
        for x in [0.3, 1.0, 4.0, 9.0, 15.9, 16.1, 40.0] {
            let direct = crate::quad::integrate(
                &|t: f64| {
                    Complex64::new(if t.abs() < 1e-12 { 1.0 } else { t.sin() / t }, 0.0)
                },
                0.0,
                x,
                1e-13,
            )
            .re;
            assert_relative_eq!(sine_integral(x), direct, max_relative = 3e-7);
        }
    }

    #[test]
    fn free_emitter_population_is_constant() {
        let e = EmitterSpec::scaled(1e-8, 1.0 - 8.309e-6, 10.0);
        let curve = decay_curve(&e, &ZeroDensity, 1e6, 11).unwrap();
        for &p in &curve.population {
            assert_relative_eq!(p, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn vacuum_decay_is_exponential() {
        let beta = 1e-5;
        let e = EmitterSpec::scaled(beta, 1.0 - 8.309e-6, 10.0);
        let d = VacuumDensity { cutoff: CUTOFF };
        let t_max = 2.0 / (2.0 * PI * beta);
        let curve = decay_curve(&e, &d, t_max, 41).unwrap();
        for (j, &t) in curve.times.iter().enumerate() {
            let expected = (2.0 * curve.pole.omega0.im * t).exp();
            assert!(
                (curve.population[j] - expected).abs() < 2e-3,
                "t = {t}: pop = {}, exp = {expected}",
                curve.population[j]
            );
        }
    }

    #[test]
    fn pole_split_leaves_a_regular_remainder() {
        // The remainder q = 1/D - a/(w - w0) must not retain any 1/(w - w0)
        // growth: approaching the pole from either side, q stays flat on the
        // scale a pole term would set.
        let e = EmitterSpec::scaled(1e-3, 1.0 - 8.309e-6, 10.0);
        let d = VacuumDensity { cutoff: CUTOFF };
        let pole = find_pole(&e, &d).unwrap();
        let a = pole.residual;
        let q = |w: f64| {
            let wc = Complex64::new(w, 0.0);
            let dv = e.beta * d.g_upper(wc).unwrap() - Complex64::i() * (wc - 1.0);
            1.0 / dv - a / (wc - pole.omega0)
        };
        let p = pole.omega0.re;
        for eps in [1e-4, 1e-5, 1e-6] {
            let spread = (q(p + eps) - q(p - eps)).norm();
            let pole_scale = a.norm() / eps;
            assert!(
                spread < 1e-6 * pole_scale,
                "eps = {eps}: remainder varies by {spread} vs pole scale {pole_scale}"
            );
        }
    }

    #[test]
    fn parseval_ties_rest_signal_to_its_spectrum() {
        // Dual route for the inversion machinery: the time-domain energy of
        // rest(t) (oscillatory Filon sums plus the sine-integral tail) must
        // reproduce the frequency-domain energy of the same spectral model
        // (exact piecewise-linear segment integrals plus the closed-form
        // 2|b|^2/L tail).
        let e = EmitterSpec::scaled(1e-3, 1.0 - 8.309e-6, 10.0);
        let d = VacuumDensity { cutoff: CUTOFF };
        let pole = find_pole(&e, &d).unwrap();
        let inv = RestInverter::new(&e, &d, &pole).unwrap();
        let spectral = inv.spectral_energy();

        // The truncated b/(w-1) tail model is not causal, so the energy
        // identity holds over the whole time axis: Simpson on [-T, T].
        // Beyond |t| = T both wings are tail-dominated,
        // |rest|^2 ~ |b|^2 cos^2(L t) / (pi L t)^2, leaving
        // |b|^2 / (pi^2 L^2 T) in total.
        let t_max = 20000.0;
        let steps = 320000; // even
        let h = 2.0 * t_max / steps as f64;
        let mut acc = inv.rest(-t_max).norm_sqr() + inv.rest(t_max).norm_sqr();
        for j in 1..steps {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * inv.rest(-t_max + j as f64 * h).norm_sqr();
        }
        let mut time_side = acc * h / 3.0;
        time_side += inv.b.norm_sqr() / (PI * PI * inv.l * inv.l * t_max);

        assert_relative_eq!(time_side, spectral, max_relative = 1e-3);
    }

    #[test]
    fn fractional_decay_plateaus_at_pole_strength() {
        let e = EmitterSpec::scaled(1e-5, 1.0 - 8.309e-6, 10.0);
        let d = CompositeDensity {
            edge: EdgeParams {
                k_be: 10.0,
                omega_be: 1.0 - 8.309e-6,
                delta: 0.0,
            },
            background: false,
            cutoff: CUTOFF,
            window: (WINDOW_LO, WINDOW_HI),
        };
        let curve = decay_curve(&e, &d, 2e7, 81).unwrap();
        assert!(curve.pole.bound_state);
        let s = curve.pole.strength;
        assert_relative_eq!(s, 0.913446131298068, max_relative = 1e-8);
        // Population starts at 1, never leaves [s - eps, 1 + eps], and ends
        // near the bound-state plateau.
        for &p in &curve.population {
            assert!(p < 1.02 && p > s - 0.1, "population out of range: {p}");
        }
        let last = *curve.population.last().unwrap();
        assert!(
            (last - s).abs() < 2e-2,
            "plateau mismatch: final population {last} vs strength {s}"
        );
    }
}
