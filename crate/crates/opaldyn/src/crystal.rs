//! FCC inverse-opal geometry: reciprocal lattice, permittivity Fourier
//! coefficients, Brillouin-zone meshes and named Wigner-Seitz positions.
//!
//! Conventions: lengths in units of the lattice constant `a`, wavevectors in
//! units of `2*pi/a`. Real-space primitive vectors A1=(0,1/2,1/2),
//! A2=(1/2,0,1/2), A3=(1/2,1/2,0); reciprocal basis B1=(-1,1,1), B2=(1,-1,1),
//! B3=(1,1,-1). Reciprocal vectors have integer Cartesian components of equal
//! parity (a BCC lattice). Plane waves are `exp(2*pi*i*(k+G).r)`.

use crate::{Error, Result};
use num_complex::Complex64;

/// Sphere radius over lattice constant at which nearest-neighbor spheres touch.
pub const TOUCHING_R_OVER_A: f64 = 0.35355339059327373;

/// Hard upper limit accepted for `r_over_a` (slightly past touching).
pub const MAX_R_OVER_A: f64 = 0.3536;

/// FCC primitive lattice vectors in units of `a`.
pub const A_VECS: [[f64; 3]; 3] = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];

/// Reciprocal primitive vectors in units of `2*pi/a`.
pub const B_VECS: [[f64; 3]; 3] = [[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]];

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// FCC inverse-opal geometry and complex permittivity.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    /// Lattice constant (arbitrary length unit; outputs are scaled).
    pub a: f64,
    /// Sphere radius over lattice constant.
    pub r_over_a: f64,
    /// Real part of the backbone permittivity.
    pub eps_backbone_real: f64,
    /// Imaginary part of the backbone permittivity (loss).
    pub eps_backbone_imag: f64,
    /// Permittivity inside the air spheres.
    pub eps_sphere: f64,
}

impl LatticeSpec {
    pub fn new(a: f64, r_over_a: f64, eps_real: f64, eps_imag: f64) -> Result<Self> {
        let spec = LatticeSpec {
            a,
            r_over_a,
            eps_backbone_real: eps_real,
            eps_backbone_imag: eps_imag,
            eps_sphere: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::Config(format!("lattice constant must be > 0, got {}", self.a)));
        }
        if !(0.0..=MAX_R_OVER_A).contains(&self.r_over_a) {
            return Err(Error::Config(format!(
                "r_over_a must lie in [0, {MAX_R_OVER_A}], got {}",
                self.r_over_a
            )));
        }
        if self.eps_backbone_real < 1.0 {
            return Err(Error::Config(format!(
                "backbone permittivity real part must be >= 1, got {}",
                self.eps_backbone_real
            )));
        }
        if self.eps_backbone_imag < 0.0 {
            return Err(Error::Config(format!(
                "backbone permittivity imaginary part must be >= 0, got {}",
                self.eps_backbone_imag
            )));
        }
        Ok(())
    }

    /// True when spheres overlap and Fourier coefficients fall back to
    /// real-space quadrature of the indicator function.
    pub fn spheres_overlap(&self) -> bool {
        self.r_over_a > TOUCHING_R_OVER_A
    }

    /// Sphere volume fraction for non-overlapping spheres (one per cell,
    /// cell volume 1/4).
    pub fn sphere_volume_fraction(&self) -> f64 {
        16.0 * std::f64::consts::PI / 3.0 * self.r_over_a.powi(3)
    }

    /// Complex backbone permittivity.
    pub fn eps_backbone(&self) -> Complex64 {
        Complex64::new(self.eps_backbone_real, self.eps_backbone_imag)
    }
}

/// Symmetric-shell-complete set of reciprocal lattice vectors.
#[derive(Debug, Clone)]
pub struct ReciprocalSet {
    /// Integer Cartesian components in units of `2*pi/a` (equal parity).
    pub g_int: Vec<[i64; 3]>,
    pub count: usize,
}

impl ReciprocalSet {
    pub fn g(&self, i: usize) -> [f64; 3] {
        let g = self.g_int[i];
        [g[0] as f64, g[1] as f64, g[2] as f64]
    }
}

/// Smallest inversion- and shell-complete reciprocal set with at least
/// `target_count` vectors. Shells are grouped by exact integer |G|^2.
pub fn build_reciprocal_set(_spec: &LatticeSpec, target_count: usize) -> Result<ReciprocalSet> {
    if target_count < 1 {
        return Err(Error::Config(format!(
            "basis target_count must be >= 1, got {target_count}"
        )));
    }
    // Enumerate equal-parity integer vectors out to a box that certainly
    // contains enough shells, then grow the box if a shell might be split.
    let mut m: i64 = 4;
    loop {
        let mut v: Vec<([i64; 3], i64)> = Vec::new();
        for h in -m..=m {
            for k in -m..=m {
                for l in -m..=m {
                    let same_parity = (h - k) % 2 == 0 && (h - l) % 2 == 0;
                    if same_parity {
                        v.push(([h, k, l], h * h + k * k + l * l));
                    }
                }
            }
        }
        v.sort_by_key(|&(g, n2)| (n2, g));
        // Walk whole shells until the count target is met.
        let mut out: Vec<[i64; 3]> = Vec::new();
        let mut i = 0;
        while i < v.len() && out.len() < target_count {
            let n2 = v[i].1;
            let mut j = i;
            while j < v.len() && v[j].1 == n2 {
                j += 1;
            }
            out.extend(v[i..j].iter().map(|&(g, _)| g));
            i = j;
        }
        // The box is adequate only if the last included shell is shorter than
        // the box inradius (otherwise part of it may be cut off).
        let max_n2 = out
            .iter()
            .map(|g| g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
            .max()
            .unwrap_or(0);
        if out.len() >= target_count && max_n2 < m * m {
            let count = out.len();
            return Ok(ReciprocalSet { g_int: out, count });
        }
        m *= 2;
        if m > 1 << 12 {
            return Err(Error::Numerical(
                "reciprocal set enumeration failed to close".into(),
            ));
        }
    }
}

/// Sphere form factor `3 (sin u - u cos u) / u^3`, equal to 1 at u = 0.
fn sphere_form_factor(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        // Series: 1 - u^2/10 + u^4/280.
        let u2 = u * u;
        1.0 - u2 / 10.0 + u2 * u2 / 280.0
    } else {
        3.0 * (u.sin() - u * u.cos()) / (u * u * u)
    }
}

/// Fourier coefficient eps(G) of the permittivity. `g` in units of `2*pi/a`.
///
/// Non-overlapping spheres use the analytic form factor; past touching the
/// coefficient is computed by real-space quadrature of the sphere-union
/// indicator (flagged by [`LatticeSpec::spheres_overlap`]).
pub fn epsilon_fourier(spec: &LatticeSpec, g: [f64; 3]) -> Complex64 {
    let is_zero = norm(g) < 1e-12;
    let eps_b = spec.eps_backbone();
    let eps_s = Complex64::new(spec.eps_sphere, 0.0);
    let base = if is_zero { eps_b } else { Complex64::new(0.0, 0.0) };
    if spec.r_over_a == 0.0 {
        return base;
    }
    if !spec.spheres_overlap() {
        let u = 2.0 * std::f64::consts::PI * norm(g) * spec.r_over_a;
        let fv = spec.sphere_volume_fraction();
        base + (eps_s - eps_b) * fv * sphere_form_factor(u)
    } else {
        base + (eps_s - eps_b) * indicator_fourier(spec.r_over_a, g, 48)
    }
}

/// Cell-averaged Fourier transform of the sphere-union indicator by midpoint
/// quadrature on an n^3 grid over the primitive cell.
pub fn indicator_fourier(r_over_a: f64, g: [f64; 3], n: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let r2 = r_over_a * r_over_a;
    for i in 0..n {
        let s1 = (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let s2 = (j as f64 + 0.5) / n as f64;
            for l in 0..n {
                let s3 = (l as f64 + 0.5) / n as f64;
                let r = [
                    s1 * A_VECS[0][0] + s2 * A_VECS[1][0] + s3 * A_VECS[2][0],
                    s1 * A_VECS[0][1] + s2 * A_VECS[1][1] + s3 * A_VECS[2][1],
                    s1 * A_VECS[0][2] + s2 * A_VECS[1][2] + s3 * A_VECS[2][2],
                ];
                if in_sphere_union(r, r2) {
                    let phase = -2.0 * std::f64::consts::PI * dot(g, r);
                    acc += Complex64::new(phase.cos(), phase.sin());
                }
            }
        }
    }
    acc / (n * n * n) as f64
}

/// True when `r` (units of a) lies within distance sqrt(r2) of any FCC site.
pub fn in_sphere_union(r: [f64; 3], r2: f64) -> bool {
    for m1 in -1..=2i64 {
        for m2 in -1..=2i64 {
            for m3 in -1..=2i64 {
                let site = [
                    m1 as f64 * A_VECS[0][0] + m2 as f64 * A_VECS[1][0] + m3 as f64 * A_VECS[2][0],
                    m1 as f64 * A_VECS[0][1] + m2 as f64 * A_VECS[1][1] + m3 as f64 * A_VECS[2][1],
                    m1 as f64 * A_VECS[0][2] + m2 as f64 * A_VECS[1][2] + m3 as f64 * A_VECS[2][2],
                ];
                let d = sub(r, site);
                if dot(d, d) <= r2 {
                    return true;
                }
            }
        }
    }
    false
}

/// Uniform Bloch mesh over the first Brillouin zone.
#[derive(Debug, Clone)]
pub struct KMesh {
    /// Points folded into the first Brillouin zone, units `2*pi/a`.
    pub points: Vec<[f64; 3]>,
    /// Per-point weights, summing to the covered BZ volume (4 for FCC).
    pub weights: Vec<f64>,
}

/// Fold `k` into the first Brillouin zone: subtract the reciprocal lattice
/// vector nearest to `k`. Ties resolved toward the lexicographically smallest
/// folded vector (deterministic).
pub fn fold_to_bz(k: [f64; 3]) -> [f64; 3] {
    let mut best = k;
    let mut best_d = dot(k, k);
    for m1 in -2..=2i64 {
        for m2 in -2..=2i64 {
            for m3 in -2..=2i64 {
                let g = [
                    m1 as f64 * B_VECS[0][0] + m2 as f64 * B_VECS[1][0] + m3 as f64 * B_VECS[2][0],
                    m1 as f64 * B_VECS[0][1] + m2 as f64 * B_VECS[1][1] + m3 as f64 * B_VECS[2][1],
                    m1 as f64 * B_VECS[0][2] + m2 as f64 * B_VECS[1][2] + m3 as f64 * B_VECS[2][2],
                ];
                let f = sub(k, g);
                let d = dot(f, f);
                if d < best_d - 1e-12 || (d < best_d + 1e-12 && lex_less(f, best)) {
                    best_d = d;
                    best = f;
                }
            }
        }
    }
    best
}

fn lex_less(a: [f64; 3], b: [f64; 3]) -> bool {
    for i in 0..3 {
        if a[i] < b[i] - 1e-15 {
            return true;
        }
        if a[i] > b[i] + 1e-15 {
            return false;
        }
    }
    false
}

/// Shifted uniform mesh with `resolution^3` points folded into the first BZ.
/// With `half_zone`, time-reversal partners (k, -k) are merged: the canonical
/// member keeps a doubled weight. The weight sum is the BZ volume, 4.
pub fn build_kmesh(resolution: usize, half_zone: bool) -> Result<KMesh> {
    if resolution < 1 {
        return Err(Error::Config(format!(
            "kmesh resolution must be >= 1, got {resolution}"
        )));
    }
    let n = resolution;
    let w0 = crate::V_BZ / (n * n * n) as f64;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let frac = |i: usize| (2.0 * i as f64 + 1.0 - n as f64) / (2.0 * n as f64);
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                // Time-reversal partner of (i1,i2,i3) is (n-1-i1, n-1-i2, n-1-i3).
                let idx = [i1, i2, i3];
                let partner = [n - 1 - i1, n - 1 - i2, n - 1 - i3];
                let self_paired = idx == partner;
                if half_zone && !self_paired && partner < idx {
                    continue;
                }
                let (f1, f2, f3) = (frac(i1), frac(i2), frac(i3));
                let k = [
                    f1 * B_VECS[0][0] + f2 * B_VECS[1][0] + f3 * B_VECS[2][0],
                    f1 * B_VECS[0][1] + f2 * B_VECS[1][1] + f3 * B_VECS[2][1],
                    f1 * B_VECS[0][2] + f2 * B_VECS[1][2] + f3 * B_VECS[2][2],
                ];
                points.push(fold_to_bz(k));
                weights.push(if half_zone && !self_paired { 2.0 * w0 } else { w0 });
            }
        }
    }
    Ok(KMesh { points, weights })
}

/// Named real-space position in the Wigner-Seitz cell (units of `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerSeitzPoint {
    pub label: String,
    pub position: [f64; 3],
}

/// Coordinates of the labeled Wigner-Seitz cell positions. The FCC
/// Wigner-Seitz cell is a rhombic dodecahedron; H is a 4-fold vertex, P a
/// 3-fold vertex, N a face center.
pub fn ws_point(label: &str) -> Result<WignerSeitzPoint> {
    let position = match label.to_ascii_uppercase().as_str() {
        "G" | "GAMMA" | "Γ" => [0.0, 0.0, 0.0],
        "H" => [0.5, 0.0, 0.0],
        "P" => [0.25, 0.25, 0.25],
        "N" => [0.25, 0.25, 0.0],
        other => {
            return Err(Error::Config(format!(
                "unknown Wigner-Seitz label '{other}' (expected Gamma, H, P or N)"
            )))
        }
    };
    Ok(WignerSeitzPoint {
        label: label.to_string(),
        position,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn si_opal() -> LatticeSpec {
        LatticeSpec::new(1.0, 0.3436, 11.76, 0.0).unwrap()
    }

    #[test]
    fn trivial_basis() {
        let s = build_reciprocal_set(&si_opal(), 1).unwrap();
        assert_eq!(s.count, 1);
        assert_eq!(s.g_int[0], [0, 0, 0]);
    }

    #[test]
    fn shell_closure_169_and_1243() {
        // Brute-force enumeration over a large bounding box as the oracle.
        let mut v: Vec<i64> = Vec::new();
        let m = 16i64;
        for h in -m..=m {
            for k in -m..=m {
                for l in -m..=m {
                    if (h - k) % 2 == 0 && (h - l) % 2 == 0 {
                        v.push(h * h + k * k + l * l);
                    }
                }
            }
        }
        v.sort_unstable();
        let closure_counts: Vec<usize> = {
            let mut c = Vec::new();
            let mut i = 0;
            while i < v.len() {
                let mut j = i;
                while j < v.len() && v[j] == v[i] {
                    j += 1;
                }
                c.push(j);
                i = j;
            }
            c
        };
        assert!(closure_counts.contains(&169), "169 is not a closed shell count");
        assert!(closure_counts.contains(&1243), "1243 is not a closed shell count");
        let s169 = build_reciprocal_set(&si_opal(), 169).unwrap();
        assert_eq!(s169.count, 169);
        let s1243 = build_reciprocal_set(&si_opal(), 1243).unwrap();
        assert_eq!(s1243.count, 1243);
    }

    #[test]
    fn shell_completeness_and_inversion() {
        let s = build_reciprocal_set(&si_opal(), 100).unwrap();
        let n2 = |g: [i64; 3]| g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        let max_in = s.g_int.iter().map(|&g| n2(g)).max().unwrap();
        // No excluded lattice vector inside max_in.
        let m = 10i64;
        let mut n_inside = 0usize;
        for h in -m..=m {
            for k in -m..=m {
                for l in -m..=m {
                    if (h - k) % 2 == 0 && (h - l) % 2 == 0 && h * h + k * k + l * l <= max_in {
                        n_inside += 1;
                    }
                }
            }
        }
        assert_eq!(n_inside, s.count);
        for &g in &s.g_int {
            assert!(s.g_int.contains(&[-g[0], -g[1], -g[2]]));
        }
    }

    #[test]
    fn eps_fourier_no_spheres() {
        let spec = LatticeSpec::new(1.0, 0.0, 11.76, 0.1).unwrap();
        let e0 = epsilon_fourier(&spec, [0.0, 0.0, 0.0]);
        assert!((e0 - Complex64::new(11.76, 0.1)).norm() < 1e-14);
        let e1 = epsilon_fourier(&spec, [1.0, 1.0, 1.0]);
        assert!(e1.norm() < 1e-14);
    }

    #[test]
    fn eps_fourier_volume_fraction() {
        let spec = LatticeSpec::new(1.0, 0.25, 11.76, 0.0).unwrap();
        let fv = spec.sphere_volume_fraction();
        let expect = 16.0 * std::f64::consts::PI / 3.0 * 0.25f64.powi(3);
        assert!((fv - expect).abs() < 1e-15);
        let e0 = epsilon_fourier(&spec, [0.0, 0.0, 0.0]);
        let expect0 = 11.76 + (1.0 - 11.76) * fv;
        assert!((e0.re - expect0).abs() < 1e-12);
        assert!(e0.im.abs() < 1e-15);

        // Monte-Carlo integration of the indicator as an independent route.
        let mut rng = rand::rngs::StdRng::seed_from_u64(42);
        let m = 2_000_000usize;
        let mut hits = 0usize;
        for _ in 0..m {
            let s: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let r = [
                s[0] * A_VECS[0][0] + s[1] * A_VECS[1][0] + s[2] * A_VECS[2][0],
                s[0] * A_VECS[0][1] + s[1] * A_VECS[1][1] + s[2] * A_VECS[2][1],
                s[0] * A_VECS[0][2] + s[1] * A_VECS[1][2] + s[2] * A_VECS[2][2],
            ];
            if in_sphere_union(r, 0.25 * 0.25) {
                hits += 1;
            }
        }
        let fv_mc = hits as f64 / m as f64;
        assert!((fv_mc - fv).abs() < 1.5e-3, "fv_mc = {fv_mc}, fv = {fv}");
    }

    #[test]
    fn eps_fourier_symmetry() {
        let spec = LatticeSpec::new(1.0, 0.3436, 11.76, 0.0).unwrap();
        for g in [[1.0, 1.0, 1.0], [2.0, 0.0, 0.0], [3.0, 1.0, 1.0]] {
            let ep = epsilon_fourier(&spec, g);
            let em = epsilon_fourier(&spec, [-g[0], -g[1], -g[2]]);
            assert!((ep - em).norm() < 1e-14);
            // Real permittivity: coefficients real and conjugate-symmetric.
            assert!(ep.im.abs() < 1e-14);
            assert!((ep - em.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn eps_fourier_overlap_quadrature() {
        let spec = LatticeSpec {
            a: 1.0,
            r_over_a: 0.3536,
            eps_backbone_real: 11.76,
            eps_backbone_imag: 0.0,
            eps_sphere: 1.0,
        };
        assert!(spec.spheres_overlap());
        // Union volume fraction: sphere volume minus the 12 half-lens overlaps,
        // per cell of volume 1/4.
        let r = spec.r_over_a;
        let d = 1.0 / 2f64.sqrt();
        let cap_h = r - d / 2.0;
        let lens = 2.0 * std::f64::consts::PI * cap_h * cap_h * (r - cap_h / 3.0);
        let union_frac = (4.0 * std::f64::consts::PI / 3.0 * r.powi(3) - 6.0 * lens) / 0.25;
        let e0 = epsilon_fourier(&spec, [0.0, 0.0, 0.0]);
        let frac_q = (e0.re - 11.76) / (1.0 - 11.76);
        assert!(
            (frac_q - union_frac).abs() < 1e-2,
            "quadrature {frac_q} vs analytic union {union_frac}"
        );
    }

    #[test]
    fn r_over_a_validation() {
        assert!(LatticeSpec::new(1.0, 0.6, 11.76, 0.0).is_err());
        assert!(LatticeSpec::new(1.0, -0.1, 11.76, 0.0).is_err());
        assert!(LatticeSpec::new(1.0, 0.3536, 11.76, 0.0).is_ok());
    }

    #[test]
    fn kmesh_trivial() {
        let m = build_kmesh(1, false).unwrap();
        assert_eq!(m.points.len(), 1);
        assert!(norm(m.points[0]) < 1e-14);
        assert!((m.weights[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn kmesh_weight_sum_and_bz_membership() {
        for &(res, half) in &[(4usize, false), (5, false), (4, true), (5, true)] {
            let m = build_kmesh(res, half).unwrap();
            let sum: f64 = m.weights.iter().sum();
            assert!((sum - 4.0).abs() < 1e-10 * 4.0, "res {res} half {half}: {sum}");
            assert!(m.weights.iter().all(|&w| w > 0.0));
            for &k in &m.points {
                let f = fold_to_bz(k);
                assert!(norm(sub(f, k)) < 1e-12, "point not in first BZ");
            }
        }
    }

    #[test]
    fn kmesh_half_zone_no_pairs() {
        for res in [4usize, 5] {
            let m = build_kmesh(res, true).unwrap();
            for (i, &k) in m.points.iter().enumerate() {
                let mk = fold_to_bz([-k[0], -k[1], -k[2]]);
                for (j, &k2) in m.points.iter().enumerate() {
                    if i != j {
                        assert!(
                            norm(sub(mk, k2)) > 1e-9,
                            "res {res}: points {i} and {j} are a (k,-k) pair"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn ws_points() {
        assert_eq!(ws_point("Gamma").unwrap().position, [0.0, 0.0, 0.0]);
        assert_eq!(ws_point("H").unwrap().position, [0.5, 0.0, 0.0]);
        assert_eq!(ws_point("P").unwrap().position, [0.25, 0.25, 0.25]);
        assert_eq!(ws_point("N").unwrap().position, [0.25, 0.25, 0.0]);
        assert!(ws_point("Q").is_err());
        // H is the cell point farthest from all sphere centers along a cube axis.
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let dist2 = |r: [f64; 3]| {
            let mut best = f64::MAX;
            for m1 in -2..=2i64 {
                for m2 in -2..=2i64 {
                    for m3 in -2..=2i64 {
                        let site = [
                            m1 as f64 * A_VECS[0][0] + m2 as f64 * A_VECS[1][0]
                                + m3 as f64 * A_VECS[2][0],
                            m1 as f64 * A_VECS[0][1] + m2 as f64 * A_VECS[1][1]
                                + m3 as f64 * A_VECS[2][1],
                            m1 as f64 * A_VECS[0][2] + m2 as f64 * A_VECS[1][2]
                                + m3 as f64 * A_VECS[2][2],
                        ];
                        let d = sub(r, site);
                        best = best.min(dot(d, d));
                    }
                }
            }
            best
        };
        let h = ws_point("H").unwrap().position;
        let dh = dist2(h);
        for _ in 0..200 {
            let t: f64 = rng.gen::<f64>() - 0.5;
            assert!(dist2([t, 0.0, 0.0]) <= dh + 1e-12);
        }
    }
}
