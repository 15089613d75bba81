//! Stability measurements of the force-coupled operator: coercivity of its
//! symmetric part, the second-difference bound on the inverse, the
//! operator-norm sandwich through the T matrix, the gradient-space stability
//! constant, the growing instability witness, and the stability-region
//! sweep behind the ‖T‖_∞ plot.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{
    backward_difference_of, compensated_sum, heaviside_at, lp_norm, project_zero_mean_raw,
    ChainConfig, Displacement,
};
use crate::exec;
use crate::forces::LinearizedCoefficients;
use crate::linalg::{e_complement_basis, inf_norm, symmetric_part, CheckedLu};
use crate::operators::{
    conjugate_operator, l1_operator, l2tilde_operator, qcf_operator, z_prime_from_gradient,
    StencilData,
};
use crate::{Error, Result};

/// Brute-force enumerations over sign vectors stop at this many sites.
pub const EXACT_ENUMERATION_LIMIT: usize = 16;

/// Sample count for the randomized lower bound used beyond the enumeration
/// limit.
const U1INF_SAMPLES: usize = 20_000;
const U1INF_SEED: u64 = 0x51_47_4e;

/// Infimum of the quadratic form of the coupled operator over gradient-
/// normalized zero-mean displacements.
#[derive(Debug, Clone)]
pub struct CoercivityResult {
    /// inf ⟨L u, u⟩ subject to ‖u'‖_{ℓ²_ε} = 1.
    pub min_value: f64,
    /// The displacement attaining the infimum, normalized to unit gradient.
    pub minimizer: Displacement,
    pub n: usize,
}

/// Smallest eigenvalue of the symmetric part of the projected coupling
/// operator against the discrete Laplacian, i.e. the optimal constant in
/// ⟨L u, u⟩ ≥ c‖u'‖²_{ℓ²_ε} on the zero-mean subspace.
///
/// The quadratic form only sees the symmetric part (M + Mᵀ)/2, so the
/// computation restricts both forms to the orthogonal complement of the
/// constant vector and solves the generalized symmetric eigenproblem there
/// by a Cholesky reduction.
pub fn coercivity_infimum(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<CoercivityResult> {
    if !(coeffs.phi_f > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coercivity measurement needs a positive nearest-neighbour curvature, got {}",
            coeffs.phi_f
        )));
    }
    let m = cfg.num_sites();
    let sym = symmetric_part(&qcf_operator(coeffs, cfg).matrix);
    let l1 = l1_operator(cfg).matrix;
    let q = e_complement_basis(m);
    let a_r = q.transpose() * &sym * &q;
    let b_r = q.transpose() * &l1 * &q;

    // B is positive definite off the kernel of the Laplacian, which the
    // basis excludes by construction.
    let chol = nalgebra::Cholesky::new(b_r)
        .expect("the Laplacian restricted off its kernel is positive definite");
    let lfac = chol.l();
    let x = lfac
        .solve_lower_triangular(&a_r)
        .expect("Cholesky factor is nonsingular");
    let reduced = lfac
        .solve_lower_triangular(&x.transpose())
        .expect("Cholesky factor is nonsingular");
    let eig = symmetric_part(&reduced).symmetric_eigen();
    let (jmin, &min_value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let y = eig.eigenvectors.column(jmin).into_owned();
    let x = lfac
        .transpose()
        .solve_upper_triangular(&y)
        .expect("Cholesky factor is nonsingular");
    let u_raw = &q * x;

    // Normalize ‖u'‖_{ℓ²_ε} = 1, i.e. ε uᵀ L1 u = 1.
    let quad = cfg.epsilon() * (&l1 * &u_raw).dot(&u_raw);
    debug_assert!(quad > 0.0);
    let scale = quad.sqrt();
    let minimizer = Displacement::new(u_raw.iter().map(|v| v / scale).collect(), cfg)?;
    Ok(CoercivityResult { min_value, minimizer, n: cfg.n() })
}

/// Outcome of the randomized audit of the second-difference estimates.
#[derive(Debug, Clone)]
pub struct U2InfReport {
    /// Whether |φ''_F| − (4+2ε)|φ''_{2F}| > 0 held, enabling the inverse
    /// bound. When false the inverse-bound check is skipped and the report
    /// is informational, not a failure.
    pub hypothesis_satisfied: bool,
    /// |φ''_F| − (4+2ε)|φ''_{2F}|.
    pub margin: f64,
    pub samples: usize,
    /// Violations of ‖P_U L̃₂ u‖_∞ ≤ (4+2ε)‖u''‖_∞.
    pub second_difference_violations: usize,
    /// Violations of ‖u''‖_∞ ≤ ‖P_U L u‖_∞ / margin.
    pub inverse_bound_violations: usize,
    /// Whether P_U L + e⊗e was numerically invertible.
    pub augmented_invertible: bool,
    /// Largest observed ‖P_U L̃₂ u‖_∞ / ‖u''‖_∞.
    pub max_second_difference_ratio: f64,
    /// Largest observed ‖u''‖_∞ · margin / ‖P_U L u‖_∞ (at most 1 when the
    /// bound holds).
    pub max_inverse_bound_ratio: f64,
}

/// Randomized audit of the two estimates behind the second-difference
/// stability bound: the stride-two operator is controlled by second
/// differences, and in turn second differences are controlled by the
/// coupled operator whenever the curvature margin is positive.
pub fn u2inf_stability_check(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
    samples: usize,
    seed: u64,
) -> Result<U2InfReport> {
    let m = cfg.num_sites();
    let margin =
        coeffs.phi_f.abs() - (4.0 + 2.0 * cfg.epsilon()) * coeffs.phi_2f.abs();
    let hypothesis_satisfied = margin > 0.0;
    let qcf = qcf_operator(coeffs, cfg);
    let l2t = l2tilde_operator(cfg);

    let mut aug = qcf.matrix.clone();
    let eps = cfg.epsilon();
    for i in 0..m {
        for j in 0..m {
            aug[(i, j)] += eps;
        }
    }
    let augmented_invertible = CheckedLu::new(&aug).is_ok();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut second_difference_violations = 0;
    let mut inverse_bound_violations = 0;
    let mut max_a = 0.0f64;
    let mut max_b = 0.0f64;
    // Hairline slack for the exact inequalities evaluated in floating point.
    let slack = 1.0 + 1e-9;
    for _ in 0..samples {
        let u = Displacement::new(
            (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            cfg,
        )?;
        let d2 = u.second_difference(cfg);
        let d2_norm = d2.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if d2_norm == 0.0 {
            continue;
        }
        let spread = project_zero_mean_raw(&l2t.apply(u.values()));
        let spread_norm = spread.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let ratio_a = spread_norm / d2_norm;
        max_a = max_a.max(ratio_a);
        if ratio_a > (4.0 + 2.0 * eps) * slack {
            second_difference_violations += 1;
        }
        if hypothesis_satisfied {
            let coupled = qcf.apply(u.values());
            let coupled_norm = coupled.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            let ratio_b = d2_norm * margin / coupled_norm;
            max_b = max_b.max(ratio_b);
            if ratio_b > slack {
                inverse_bound_violations += 1;
            }
        }
    }

    Ok(U2InfReport {
        hypothesis_satisfied,
        margin,
        samples,
        second_difference_violations,
        inverse_bound_violations,
        augmented_invertible,
        max_second_difference_ratio: max_a,
        max_inverse_bound_ratio: max_b,
    })
}

/// The centered inverse of the conjugate operator, whose plain ℓ^∞ matrix
/// norm sandwiches the inverse-operator norm of the coupled system within a
/// factor of two on each side.
#[derive(Debug, Clone)]
pub struct TMatrixResult {
    pub t: DMatrix<f64>,
    /// Largest absolute row sum of `t`.
    pub norm_inf: f64,
    /// False when the mean-augmented conjugate operator was numerically
    /// singular; `t` is zero and `norm_inf` infinite in that case.
    pub invertible: bool,
    /// The coefficients the matrix was assembled from, for bookkeeping in
    /// sweeps over many strains.
    pub coeffs: LinearizedCoefficients,
}

/// Subtract each column's mean: the zero-mean projection applied from the
/// left.
fn project_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let rows = m.nrows();
    for j in 0..m.ncols() {
        let mean = compensated_sum(m.column(j).iter().copied()) / rows as f64;
        for i in 0..rows {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Subtract each row's mean: the zero-mean projection applied from the
/// right.
fn project_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let cols = m.ncols();
    for i in 0..m.nrows() {
        let mean = compensated_sum(m.row(i).iter().copied()) / cols as f64;
        for j in 0..cols {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Builds T = P_U (P_U E + e⊗e)^{-1} P_U on gradient space, where E is the
/// conjugate of the coupled operator and e⊗e is the ε-weighted rank-one
/// mean augmentation that makes the restriction to the zero-mean subspace
/// invertible without changing it there.
pub fn t_matrix(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> Result<TMatrixResult> {
    let e_op = conjugate_operator(coeffs, cfg)?;
    let m = cfg.num_sites();
    let eps = cfg.epsilon();
    let mut aug = project_columns(&e_op.matrix);
    for i in 0..m {
        for j in 0..m {
            aug[(i, j)] += eps;
        }
    }
    let lu = match CheckedLu::new(&aug) {
        Ok(lu) => lu,
        Err(_) => {
            return Ok(TMatrixResult {
                t: DMatrix::zeros(m, m),
                norm_inf: f64::INFINITY,
                invertible: false,
                coeffs: *coeffs,
            })
        }
    };
    let t = project_columns(&project_rows(&lu.inverse()));

    #[cfg(debug_assertions)]
    {
        // T annihilates constants and inverts the projected conjugate
        // operator on the zero-mean subspace.
        let te = &t * DVector::from_element(m, 1.0);
        debug_assert!(te.amax() <= 1e-8 * inf_norm(&t).max(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = DVector::from_iterator(m, (0..m).map(|_| rng.gen_range(-1.0..1.0)));
        let f = &f - DVector::from_element(m, f.mean());
        let ef = project_zero_mean_raw(&e_op.apply(f.as_slice()));
        let back = &t * DVector::from_vec(ef);
        debug_assert!((&back - &f).amax() <= 1e-8 * f.amax().max(1.0));
    }

    let norm_inf = inf_norm(&t);
    Ok(TMatrixResult { t, norm_inf, invertible: true, coeffs: *coeffs })
}

/// The closed-form upper bound 2/(φ''_F + 8φ''_{2F}) on the inverse norm of
/// the coupled operator, valid when the second-neighbour curvature is
/// non-positive and the combination is positive.
pub fn inverse_norm_upper_bound(coeffs: &LinearizedCoefficients) -> Option<f64> {
    let denom = coeffs.phi_f + 8.0 * coeffs.phi_2f;
    if coeffs.phi_2f <= 0.0 && denom > 0.0 {
        Some(2.0 / denom)
    } else {
        None
    }
}

/// Gradient-to-gradient matrix of u' ↦ z' (the Laplacian-preconditioned
/// coupled operator), augmented by the rank-one mean term so that it is
/// invertible on all of R^{2N} while agreeing with the preconditioned
/// operator on zero-sum vectors.
fn gradient_map_lu(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> Result<Option<CheckedLu>> {
    let m = cfg.num_sites();
    let mut zmat = DMatrix::zeros(m, m);
    let mut basis = vec![0.0; m];
    for j in 0..m {
        basis[j] = 1.0;
        let col = z_prime_from_gradient(&basis, coeffs, cfg)?;
        basis[j] = 0.0;
        for i in 0..m {
            zmat[(i, j)] = col[i];
        }
    }
    let inv_m = 1.0 / m as f64;
    for i in 0..m {
        for j in 0..m {
            zmat[(i, j)] += inv_m;
        }
    }
    Ok(CheckedLu::new(&zmat).ok())
}

fn max_gradient_response(lu: &CheckedLu, w: &DVector<f64>) -> f64 {
    lu.solve(w).amax()
}

/// Measured stability constant of the coupled operator between the
/// gradient-norm spaces: the operator norm of the inverse of the
/// Laplacian-preconditioned operator on zero-sum gradients with the sup
/// norm.
///
/// The norm is a convex maximum over the zero-sum unit ball, so it is
/// attained at the ball's extreme points, which in even dimension are
/// exactly the balanced ±1 sign vectors. Up to 2N = 16 sites all of them
/// are enumerated and the value is exact; beyond that a seeded random
/// sample of balanced sign vectors gives a deterministic lower bound, to be
/// combined with [`inverse_norm_upper_bound`].
///
/// An infinite value is returned when the preconditioned operator is
/// numerically singular on the zero-sum subspace.
pub fn u1inf_stability_constant(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<f64> {
    let m = cfg.num_sites();
    let lu = match gradient_map_lu(coeffs, cfg)? {
        Some(lu) => lu,
        None => return Ok(f64::INFINITY),
    };
    if m <= EXACT_ENUMERATION_LIMIT {
        let mut best = 0.0f64;
        for mask in 0u32..(1u32 << m) {
            if mask.count_ones() as usize != m / 2 {
                continue;
            }
            let w = DVector::from_iterator(
                m,
                (0..m).map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 }),
            );
            best = best.max(max_gradient_response(&lu, &w));
        }
        Ok(best)
    } else {
        Ok(sampled_gradient_norm(&lu, m, U1INF_SAMPLES, U1INF_SEED))
    }
}

/// Randomized lower bound on the same quantity: the maximum response over
/// `samples` balanced sign vectors.
pub(crate) fn sampled_gradient_norm(
    lu: &CheckedLu,
    m: usize,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signs: Vec<f64> = (0..m).map(|i| if i < m / 2 { 1.0 } else { -1.0 }).collect();
    let mut best = 0.0f64;
    for _ in 0..samples {
        signs.shuffle(&mut rng);
        let w = DVector::from_column_slice(&signs);
        best = best.max(max_gradient_response(lu, &w));
    }
    best
}

#[cfg(test)]
pub(crate) fn gradient_lu_for_tests(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<Option<CheckedLu>> {
    gradient_map_lu(coeffs, cfg)
}

/// Exact inverse-operator norm of the coupled system from the dual-norm
/// unit ball to gradient sup norm, by brute force over the ball's extreme
/// points. Those extreme points are the images under the Laplacian of the
/// centered ±1 sign vectors, so the enumeration is over all 2^{2N} sign
/// patterns; the cost limits this to 2N ≤ [`EXACT_ENUMERATION_LIMIT`].
///
/// Returns infinity when the projected coupled operator is numerically
/// singular on the zero-mean subspace.
pub fn exact_l_inverse_norm(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> Result<f64> {
    let m = cfg.num_sites();
    if m > EXACT_ENUMERATION_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "exact inverse-norm enumeration is limited to 2N ≤ {EXACT_ENUMERATION_LIMIT}, got 2N = {m}"
        )));
    }
    let qcf = qcf_operator(coeffs, cfg);
    let eps = cfg.epsilon();
    let mut aug = qcf.matrix.clone();
    for i in 0..m {
        for j in 0..m {
            aug[(i, j)] += eps;
        }
    }
    let lu = match CheckedLu::new(&aug) {
        Ok(lu) => lu,
        Err(_) => return Ok(f64::INFINITY),
    };
    let inv_eps = 1.0 / eps;
    let mut best = 0.0f64;
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    for mask in 1u32..full {
        // g = L1 z for the centered sign vector z' = w − mean(w):
        // g_i = ε^{-1}(w_i − w_{i+1}).
        let g = DVector::from_iterator(
            m,
            (0..m).map(|i| {
                let wi = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
                let wn = if mask & (1 << ((i + 1) % m)) != 0 { 1.0 } else { -1.0 };
                inv_eps * (wi - wn)
            }),
        );
        // g is zero-sum, so the mean-augmented solve returns the zero-mean
        // displacement with P_U L u = g.
        let u = lu.solve(&g);
        let up = backward_difference_of(u.as_slice(), cfg);
        best = best.max(up.iter().fold(0.0f64, |acc, x| acc.max(x.abs())));
    }
    Ok(best)
}

/// The localized gradient whose response under the coupled operator stays
/// bounded while its own size grows like N^{1/p}: heaviside away from the
/// right interface and a short three-point correction next to it.
///
/// Returns the zero-mean displacement integrating that gradient together
/// with the certified ratio ‖v'‖_{ℓ^p_ε} / ‖L v‖ in the dual gradient norm;
/// the denominator is the Hölder upper bound ‖E v'‖_{ℓ^p_ε} through the
/// conjugate operator, which can only decrease the reported ratio.
pub fn instability_witness(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
    p: f64,
) -> Result<(Displacement, f64)> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "witness ratio needs 1 ≤ p < ∞, got p = {p}"
        )));
    }
    if coeffs.phi_2f == 0.0 {
        return Err(Error::InvalidArgument(
            "witness construction needs a nonzero second-neighbour curvature".into(),
        ));
    }
    let n = cfg.n() as i64;
    let k = cfg.k() as i64;
    if !(2 <= k && k < n - 2) {
        return Err(Error::InvalidArgument(format!(
            "witness construction needs 2 ≤ K < N−2, got K = {k}, N = {n}"
        )));
    }

    let m = cfg.num_sites();
    let a_f = coeffs.a_f();
    let q = a_f / (6.0 * coeffs.phi_2f);
    let mut vp = vec![0.0; m];
    for ell in (1 - n)..=n {
        vp[cfg.idx(ell)] = if ell == k - 1 {
            0.0
        } else if ell == k || ell == k + 2 {
            -q
        } else if ell == k + 1 {
            2.0 * q
        } else {
            heaviside_at(ell - k - 1, cfg)
        };
    }

    let scale = a_f.abs().max(1.0);
    let sum = compensated_sum(vp.iter().copied());
    if sum.abs() > 1e-12 * m as f64 {
        return Err(Error::Certification(format!(
            "witness gradient failed the zero-sum check: Σ v' = {sum:.3e}"
        )));
    }
    let st = StencilData::new(*coeffs, *cfg)?;
    let am = st.alpha_minus(&vp);
    let ap = st.alpha_plus(&vp);
    if am.abs() > 1e-12 * scale || (ap + a_f).abs() > 1e-12 * scale {
        return Err(Error::Certification(format!(
            "witness interface response off target: α_{{−K}} = {am:.3e}, α_K = {ap:.3e}"
        )));
    }
    let e_op = conjugate_operator(coeffs, cfg)?;
    let ev = e_op.apply(&vp);
    let ev_norm = ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let support: Vec<i64> = ((1 - n)..=n)
        .filter(|&ell| ev[cfg.idx(ell)].abs() > 1e-10 * ev_norm.max(scale))
        .collect();
    if !support.iter().all(|&ell| (k - 2..=k + 2).contains(&ell)) {
        return Err(Error::Certification(format!(
            "witness response leaked outside the five interface sites: {support:?}"
        )));
    }

    let numerator = lp_norm(&vp, p, cfg)?;
    let denominator = lp_norm(&ev, p, cfg)?;
    if denominator <= 0.0 {
        return Err(Error::Certification(
            "witness response vanished; ratio undefined".into(),
        ));
    }

    let mut vals = vec![0.0; m];
    let mut acc = 0.0;
    for ell in (1 - n)..=n {
        acc += cfg.epsilon() * vp[cfg.idx(ell)];
        vals[cfg.idx(ell)] = acc;
    }
    let v = Displacement::new(vals, cfg)?;
    Ok((v, numerator / denominator))
}

/// Witness ratios over a list of chain sizes, in input order.
pub fn witness_sweep(
    coeffs: &LinearizedCoefficients,
    cfgs: &[ChainConfig],
    p: f64,
) -> Result<Vec<f64>> {
    exec::map_cells(cfgs, |cfg| instability_witness(coeffs, cfg, p).map(|(_, r)| r))
        .into_iter()
        .collect()
}

/// Least-squares slope of log(value) against log(N) over the largest three
/// N, the window where the asymptotic growth rate is read off.
pub fn growth_exponent(ns: &[usize], values: &[f64]) -> f64 {
    assert_eq!(ns.len(), values.len());
    assert!(ns.len() >= 3, "exponent fit needs at least three points");
    let mut pairs: Vec<(f64, f64)> =
        ns.iter().zip(values).map(|(&n, &v)| ((n as f64).ln(), v.ln())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tail = &pairs[pairs.len() - 3..];
    let mx = tail.iter().map(|(x, _)| x).sum::<f64>() / 3.0;
    let my = tail.iter().map(|(_, y)| y).sum::<f64>() / 3.0;
    let sxx: f64 = tail.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = tail.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    sxy / sxx
}

/// One row of the stability-region sweep: ‖T‖_∞ as a function of the
/// curvature ratio A_F/φ''_F at fixed φ''_F = 1.
#[derive(Debug, Clone)]
pub struct Figure1Row {
    pub n: usize,
    pub k: usize,
    /// A_F/φ''_F = 1 + 4φ''_{2F}/φ''_F.
    pub ratio: f64,
    pub t_norm_inf: f64,
    /// 2/(φ''_F + 8φ''_{2F}) when that hypothesis holds.
    pub upper_bound: Option<f64>,
    pub note: &'static str,
}

/// Sweeps ‖T‖_∞ over chains × curvature ratios, in grid order (chains
/// outer, ratios inner). φ''_F is pinned to 1 so the ratio determines
/// φ''_{2F} = (ratio − 1)/4.
pub fn figure1_sweep(cfg_list: &[ChainConfig], ratio_grid: &[f64]) -> Result<Vec<Figure1Row>> {
    for &r in ratio_grid {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "curvature ratios must lie in (0, 1], got {r}"
            )));
        }
    }
    let grid: Vec<(ChainConfig, f64)> = cfg_list
        .iter()
        .flat_map(|cfg| ratio_grid.iter().map(move |&r| (*cfg, r)))
        .collect();
    exec::map_cells(&grid, |&(cfg, ratio)| -> Result<Figure1Row> {
        let coeffs = LinearizedCoefficients::new(1.0, (ratio - 1.0) / 4.0);
        let tm = t_matrix(&coeffs, &cfg)?;
        let upper_bound = inverse_norm_upper_bound(&coeffs);
        let note = if !tm.invertible {
            "conjugate operator singular"
        } else if upper_bound.is_some() {
            "closed-form inverse bound applies"
        } else {
            "outside the inverse-bound hypothesis; uniform boundedness conjectured"
        };
        Ok(Figure1Row {
            n: cfg.n(),
            k: cfg.k(),
            ratio,
            t_norm_inf: tm.norm_inf,
            upper_bound,
            note,
        })
    })
    .into_iter()
    .collect()
}
