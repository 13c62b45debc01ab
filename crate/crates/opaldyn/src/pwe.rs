//! Plane-wave expansion of the Maxwell Bloch eigenproblem in the transverse
//! magnetic-field formulation, plus electric-field mode reconstruction.
//!
//! For each reciprocal vector `G` two polarization unit vectors `e1, e2`
//! perpendicular to `q = k + G` are chosen with `q_hat x e1 = e2`. The
//! operator acting on the transverse H amplitudes `(h1, h2)` is
//!
//! `M[(i,l),(j,m)] = |q_i||q_j| * eta[i,j] * T(l,m)`,
//! `T = [[e2i.e2j, -e2i.e1j], [-e1i.e2j, e1i.e1j]]`,
//!
//! where `eta` is the inverse of the `eps(Gi - Gj)` matrix. Eigenvalues are
//! `(omega/c)^2`. Loss enters downstream perturbatively: only the real part
//! of the permittivity is used here, so the operator is real symmetric.

use crate::crystal::{cross, dot, epsilon_fourier, norm, LatticeSpec, ReciprocalSet};
use crate::{Error, Result};
use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;
use std::sync::Arc;

/// k-independent permittivity matrices for a fixed basis: `eps[i][j] =
/// Re eps(Gi - Gj)` and its inverse `eta`. Built once, shared across k-points.
pub struct EpsilonOperator {
    pub basis: Arc<ReciprocalSet>,
    pub eps: Mat<f64>,
    pub eta: Mat<f64>,
}

impl EpsilonOperator {
    pub fn new(spec: &LatticeSpec, basis: Arc<ReciprocalSet>) -> Result<Arc<Self>> {
        spec.validate()?;
        let n = basis.count;
        let mut eps = Mat::<f64>::zeros(n, n);
        // Coefficients depend only on the difference vector; cache by shell.
        let mut cache: std::collections::HashMap<[i64; 3], f64> = std::collections::HashMap::new();
        for i in 0..n {
            for j in 0..n {
                let d = [
                    basis.g_int[i][0] - basis.g_int[j][0],
                    basis.g_int[i][1] - basis.g_int[j][1],
                    basis.g_int[i][2] - basis.g_int[j][2],
                ];
                let v = *cache.entry(d).or_insert_with(|| {
                    epsilon_fourier(spec, [d[0] as f64, d[1] as f64, d[2] as f64]).re
                });
                eps[(i, j)] = v;
            }
        }
        let lu = eps.partial_piv_lu();
        let eta = lu.inverse();
        // Sanity check the inversion: ||eps*eta - I|| must be small.
        let mut resid = 0.0f64;
        let prod = &eps * &eta;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                resid = resid.max((prod[(i, j)] - expect).abs());
            }
        }
        if !(resid < 1e-8) {
            return Err(Error::Numerical(format!(
                "eps(G-G') matrix inversion ill-conditioned: ||eps*eta - I||_max = {resid:.3e}"
            )));
        }
        Ok(Arc::new(EpsilonOperator { basis, eps, eta }))
    }
}

/// Assembled Bloch eigenproblem at one k-point.
pub struct BlochProblem {
    pub k: [f64; 3],
    pub ops: Arc<EpsilonOperator>,
    /// |k + G_i| per basis vector.
    pub qnorm: Vec<f64>,
    /// Polarization unit vectors perpendicular to k + G_i.
    pub e1: Vec<[f64; 3]>,
    pub e2: Vec<[f64; 3]>,
    /// Real symmetric operator of dimension 2 * basis count.
    pub op: Mat<f64>,
}

/// Deterministic transverse frame for direction `q`. For |q| ~ 0 an arbitrary
/// fixed frame is returned (such modes are zero-frequency and excluded).
fn transverse_frame(q: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let qn = norm(q);
    if qn < 1e-12 {
        return ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
    }
    let qh = crate::crystal::scale(q, 1.0 / qn);
    let seed = if qh[2].abs() < 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let mut e1 = cross(seed, qh);
    let n1 = norm(e1);
    e1 = crate::crystal::scale(e1, 1.0 / n1);
    let e2 = cross(qh, e1);
    (e1, e2)
}

/// Assemble the transverse H-field operator at Bloch vector `k` (units 2*pi/a).
pub fn assemble_with(ops: &Arc<EpsilonOperator>, k: [f64; 3]) -> BlochProblem {
    let basis = &ops.basis;
    let n = basis.count;
    let mut qnorm = Vec::with_capacity(n);
    let mut e1 = Vec::with_capacity(n);
    let mut e2 = Vec::with_capacity(n);
    for i in 0..n {
        let q = crate::crystal::add(k, basis.g(i));
        let (a, b) = transverse_frame(q);
        qnorm.push(norm(q));
        e1.push(a);
        e2.push(b);
    }
    let mut op = Mat::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let s = qnorm[i] * qnorm[j] * ops.eta[(i, j)];
            op[(2 * i, 2 * j)] = s * dot(e2[i], e2[j]);
            op[(2 * i, 2 * j + 1)] = -s * dot(e2[i], e1[j]);
            op[(2 * i + 1, 2 * j)] = -s * dot(e1[i], e2[j]);
            op[(2 * i + 1, 2 * j + 1)] = s * dot(e1[i], e1[j]);
        }
    }
    BlochProblem {
        k,
        ops: ops.clone(),
        qnorm,
        e1,
        e2,
        op,
    }
}

/// Convenience single-shot assembly (builds the eps matrices internally).
pub fn assemble(spec: &LatticeSpec, k: [f64; 3], basis: Arc<ReciprocalSet>) -> Result<BlochProblem> {
    let ops = EpsilonOperator::new(spec, basis)?;
    Ok(assemble_with(&ops, k))
}

/// Bloch band solution at one k-point: ascending eigenfrequencies (units
/// 2*pi*c/a) and the per-band transverse H amplitudes.
pub struct BandSolution {
    pub k: [f64; 3],
    pub omegas: Vec<f64>,
    /// Column b holds the H amplitudes (h1_0, h2_0, h1_1, ...) of band b.
    pub coeffs: Mat<f64>,
    pub ops: Arc<EpsilonOperator>,
    pub qnorm: Vec<f64>,
    pub e1: Vec<[f64; 3]>,
    pub e2: Vec<[f64; 3]>,
}

/// Solve the lowest `n_bands` bands of an assembled problem.
pub fn eigensolve(problem: &BlochProblem, n_bands: usize) -> Result<BandSolution> {
    let dim = 2 * problem.ops.basis.count;
    if n_bands > dim {
        return Err(Error::Config(format!(
            "requested {n_bands} bands from an operator of dimension {dim}"
        )));
    }
    let eig = problem
        .op
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver failure: {e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let mut omegas = Vec::with_capacity(n_bands);
    let mut coeffs = Mat::<f64>::zeros(dim, n_bands);
    for b in 0..n_bands {
        let lambda = s[b];
        if lambda < -1e-9 {
            return Err(Error::Numerical(format!(
                "negative eigenvalue {lambda:.3e} beyond clamp tolerance"
            )));
        }
        omegas.push(lambda.max(0.0).sqrt());
        for r in 0..dim {
            coeffs[(r, b)] = u[(r, b)];
        }
    }
    Ok(BandSolution {
        k: problem.k,
        omegas,
        coeffs,
        ops: problem.ops.clone(),
        qnorm: problem.qnorm.clone(),
        e1: problem.e1.clone(),
        e2: problem.e2.clone(),
    })
}

/// Electric-field mode of one band, normalized to `<E|eps_R|E>_cell = 1`.
pub struct ModeField {
    /// Real plane-wave coefficient vectors E_i of `E(r) = sum_i E_i e^{2 pi i (k+G_i).r}`.
    pub coeffs: Vec<[f64; 3]>,
    /// Wavevectors k + G_i (units 2*pi/a).
    pub qs: Vec<[f64; 3]>,
    /// Unit-cell volume used for normalization (units a^3).
    pub normalization_volume: f64,
}

impl ModeField {
    /// Evaluate the field at `r` (units of a).
    pub fn at(&self, r: [f64; 3]) -> [Complex64; 3] {
        let mut e = [Complex64::new(0.0, 0.0); 3];
        for (c, q) in self.coeffs.iter().zip(&self.qs) {
            let phase = 2.0 * std::f64::consts::PI * dot(*q, r);
            let p = Complex64::new(phase.cos(), phase.sin());
            for x in 0..3 {
                e[x] += c[x] * p;
            }
        }
        e
    }
}

/// Build the normalized electric-field mode for `band` (0-based).
///
/// From the curl relation the E coefficients are `eta * v / (omega sqrt(V_cell))`
/// with `v_j = |q_j| (h1_j e2_j - h2_j e1_j)`; the eigenproblem identity
/// `v* eta v = omega^2 |h|^2` makes this normalization exact.
pub fn mode_field(solution: &BandSolution, band: usize) -> Result<ModeField> {
    let n = solution.ops.basis.count;
    if band >= solution.omegas.len() {
        return Err(Error::Config(format!(
            "band {band} not solved (have {})",
            solution.omegas.len()
        )));
    }
    let omega = solution.omegas[band];
    if omega < 1e-8 {
        return Err(Error::Numerical(
            "field reconstruction undefined for zero-frequency band".into(),
        ));
    }
    let mut v = vec![[0.0f64; 3]; n];
    for j in 0..n {
        let h1 = solution.coeffs[(2 * j, band)];
        let h2 = solution.coeffs[(2 * j + 1, band)];
        for x in 0..3 {
            v[j][x] = solution.qnorm[j] * (h1 * solution.e2[j][x] - h2 * solution.e1[j][x]);
        }
    }
    let scale = 1.0 / (omega * crate::V_CELL.sqrt());
    let mut coeffs = vec![[0.0f64; 3]; n];
    for i in 0..n {
        let mut acc = [0.0f64; 3];
        for j in 0..n {
            let eta = solution.ops.eta[(i, j)];
            for x in 0..3 {
                acc[x] += eta * v[j][x];
            }
        }
        for x in 0..3 {
            coeffs[i][x] = acc[x] * scale;
        }
    }
    let qs = (0..n)
        .map(|i| crate::crystal::add(solution.k, solution.ops.basis.g(i)))
        .collect();
    Ok(ModeField {
        coeffs,
        qs,
        normalization_volume: crate::V_CELL,
    })
}

/// Evaluate the electric field of `band` at `r` (units of a).
pub fn reconstruct_field(solution: &BandSolution, band: usize, r: [f64; 3]) -> Result<[Complex64; 3]> {
    Ok(mode_field(solution, band)?.at(r))
}

/// Projected field amplitudes `e_p . E_band(r)` for all solved bands at once.
///
/// Cost is one n^2 contraction for the k-point plus O(n) per band, which keeps
/// dense LDOS mesh sweeps affordable. Zero-frequency bands yield `None`.
pub fn projected_amplitudes(
    solution: &BandSolution,
    r: [f64; 3],
    e_p: [f64; 3],
) -> Vec<Option<Complex64>> {
    let n = solution.ops.basis.count;
    // w_j = sum_i phase_i eta[i,j]
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let q = crate::crystal::add(solution.k, solution.ops.basis.g(i));
        let phase = 2.0 * std::f64::consts::PI * dot(q, r);
        let p = Complex64::new(phase.cos(), phase.sin());
        for j in 0..n {
            w[j] += p * solution.ops.eta[(i, j)];
        }
    }
    let pe1: Vec<f64> = (0..n).map(|j| dot(e_p, solution.e1[j])).collect();
    let pe2: Vec<f64> = (0..n).map(|j| dot(e_p, solution.e2[j])).collect();
    let vcell_sqrt = crate::V_CELL.sqrt();
    solution
        .omegas
        .iter()
        .enumerate()
        .map(|(b, &omega)| {
            if omega < 1e-8 {
                return None;
            }
            let mut amp = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let h1 = solution.coeffs[(2 * j, b)];
                let h2 = solution.coeffs[(2 * j + 1, b)];
                amp += w[j] * (solution.qnorm[j] * (h1 * pe2[j] - h2 * pe1[j]));
            }
            Some(amp / (omega * vcell_sqrt))
        })
        .collect()
}

/// Fraction of the normalized mode's `eps_R |E|^2` weight inside the lossy
/// backbone (the cell minus the spheres). Computed analytically through the
/// sphere form factor; `0 < f <= 1`.
pub fn f_factor(solution: &BandSolution, band: usize, spec: &LatticeSpec) -> Result<f64> {
    let field = mode_field(solution, band)?;
    let n = field.coeffs.len();
    // <E|E> over the cell.
    let mut total = 0.0f64;
    for c in &field.coeffs {
        total += dot(*c, *c);
    }
    total *= crate::V_CELL;
    // <E|chi_sphere|E> via the sphere indicator's Fourier coefficients.
    let mut in_sphere = 0.0f64;
    if spec.r_over_a > 0.0 {
        let fv = spec.sphere_volume_fraction();
        for i in 0..n {
            for j in 0..n {
                let d = crate::crystal::sub(field.qs[i], field.qs[j]);
                let s = if spec.spheres_overlap() {
                    crate::crystal::indicator_fourier(spec.r_over_a, d, 48).re
                } else {
                    let u = 2.0 * std::f64::consts::PI * norm(d) * spec.r_over_a;
                    fv * {
                        if u < 1e-4 {
                            1.0 - u * u / 10.0
                        } else {
                            3.0 * (u.sin() - u * u.cos()) / (u * u * u)
                        }
                    }
                };
                in_sphere += s * dot(field.coeffs[i], field.coeffs[j]);
            }
        }
        in_sphere *= crate::V_CELL;
    }
    let f = (total - in_sphere) / total;
    if !(f > 0.0 && f <= 1.0 + 1e-9) {
        return Err(Error::Numerical(format!("f factor {f} outside (0, 1]")));
    }
    Ok(f.min(1.0))
}

/// Hermiticity residual ||A - A^T|| / ||A|| (Frobenius).
pub fn symmetry_residual(problem: &BlochProblem) -> f64 {
    let dim = problem.op.nrows();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let d = problem.op[(i, j)] - problem.op[(j, i)];
            num += d * d;
            den += problem.op[(i, j)] * problem.op[(i, j)];
        }
    }
    (num / den).sqrt()
}
