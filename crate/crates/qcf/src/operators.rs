//! Dense assembly of the linearized operators at the uniform state: the
//! atomistic, QCL and QNL energy Hessians, the force-mixed QCF operator with
//! its Laplacian decomposition, and the gradient-space conjugate operator
//! with its interface stencils.
//!
//! Everything acts on raw vectors in `R^{2N}`; the zero-mean subspace `U` is
//! handled by explicit projection rather than a reduced basis. Matrix entries
//! are integer multiples of `ε^{-2}` times the coefficients, so the two
//! independent QCF assembly routes agree to roundoff.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::chain::{
    self, compensated_sum, heaviside_at, pairing, ChainConfig, Displacement, DualVector,
};
use crate::forces::LinearizedCoefficients;
use crate::linalg;
use crate::{csvfmt, Error, Result};

/// Tolerance (relative to the largest entry) under which an assembled matrix
/// is labeled symmetric.
const SYMMETRY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Atomistic,
    Qcl,
    Qnl,
    QcfProjected,
    EqcfConjugate,
    L1,
    L2Reg,
    L2Sng,
    L2Tilde,
}

/// A dense `2N × 2N` operator. Displacement-space models map site values to
/// (negated, linearized) force densities; `EqcfConjugate` acts on gradients.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub matrix: DMatrix<f64>,
    pub model: Model,
    pub symmetric: bool,
}

impl LinearizedOperator {
    fn from_matrix(matrix: DMatrix<f64>, model: Model) -> Self {
        let tol = SYMMETRY_REL_TOL * linalg::max_abs(&matrix);
        let symmetric = linalg::is_symmetric(&matrix, tol);
        LinearizedOperator { matrix, model, symmetric }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(u);
        v.data.into()
    }

    /// `⟨M u, v⟩ = ε Σ_ℓ (M u)_ℓ v_ℓ`.
    pub fn bilinear(&self, u: &[f64], v: &[f64], cfg: &ChainConfig) -> f64 {
        pairing(&self.apply(u), v, cfg)
    }

    /// Row-major debug dump; floats carry 17 significant digits so the
    /// matrix round-trips exactly.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "# model={:?} rows={} cols={}",
            self.model,
            self.matrix.nrows(),
            self.matrix.ncols()
        )?;
        for i in 0..self.matrix.nrows() {
            let cells: Vec<String> =
                self.matrix.row(i).iter().map(|x| csvfmt::float_cell(*x)).collect();
            writeln!(w, "{}", csvfmt::record(&cells))?;
        }
        Ok(())
    }
}

fn sites(cfg: &ChainConfig) -> impl Iterator<Item = i64> {
    let n = cfg.n() as i64;
    (1 - n)..=n
}

/// `ℓ` sites whose σ row carries the interface stencil: `−K+1, …, K`.
fn sigma_interface(ell: i64, cfg: &ChainConfig) -> bool {
    let k = cfg.k() as i64;
    1 - k <= ell && ell <= k
}

/// Adds `w · a aᵀ` where `a` is the difference functional
/// `u ↦ ε^{-1}(u_i − u_j)`. Degenerate `i == j` (tiny periods) cancels to
/// zero on its own.
fn add_difference_outer(m: &mut DMatrix<f64>, i: usize, j: usize, w: f64, inv_eps2: f64) {
    let c = w * inv_eps2;
    m[(i, i)] += c;
    m[(j, j)] += c;
    m[(i, j)] -= c;
    m[(j, i)] -= c;
}

/// Hessian of the atomistic energy: for every bond,
/// `φ''_F u'_ℓ v'_ℓ + φ''_{2F} (u'_ℓ + u'_{ℓ+1})(v'_ℓ + v'_{ℓ+1})`.
pub fn hessian_atomistic(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> LinearizedOperator {
    let m = cfg.num_sites();
    let inv_eps2 = 1.0 / (cfg.epsilon() * cfg.epsilon());
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        add_difference_outer(&mut a, cfg.idx(ell), cfg.idx(ell - 1), coeffs.phi_f, inv_eps2);
        // u'_ℓ + u'_{ℓ+1} telescopes to ε^{-1}(u_{ℓ+1} − u_{ℓ−1}).
        add_difference_outer(&mut a, cfg.idx(ell + 1), cfg.idx(ell - 1), coeffs.phi_2f, inv_eps2);
    }
    LinearizedOperator::from_matrix(a, Model::Atomistic)
}

/// Hessian of the local continuum energy, `A_F Σ u'_ℓ v'_ℓ`: equals
/// `A_F · L1`.
pub fn hessian_qcl(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> LinearizedOperator {
    let m = cfg.num_sites();
    let inv_eps2 = 1.0 / (cfg.epsilon() * cfg.epsilon());
    let af = coeffs.a_f();
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        add_difference_outer(&mut a, cfg.idx(ell), cfg.idx(ell - 1), af, inv_eps2);
    }
    LinearizedOperator::from_matrix(a, Model::Qcl)
}

/// Hessian of the QNL energy: full second-neighbour bonds inside `A`, split
/// Cauchy-Born halves `2φ''_{2F}(u'_ℓ v'_ℓ + u'_{ℓ+1} v'_{ℓ+1})` on `C`.
pub fn hessian_qnl(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> LinearizedOperator {
    let m = cfg.num_sites();
    let inv_eps2 = 1.0 / (cfg.epsilon() * cfg.epsilon());
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        add_difference_outer(&mut a, cfg.idx(ell), cfg.idx(ell - 1), coeffs.phi_f, inv_eps2);
        if cfg.is_atomistic(ell) {
            add_difference_outer(&mut a, cfg.idx(ell + 1), cfg.idx(ell - 1), coeffs.phi_2f, inv_eps2);
        } else {
            let w = 2.0 * coeffs.phi_2f;
            add_difference_outer(&mut a, cfg.idx(ell), cfg.idx(ell - 1), w, inv_eps2);
            add_difference_outer(&mut a, cfg.idx(ell + 1), cfg.idx(ell), w, inv_eps2);
        }
    }
    LinearizedOperator::from_matrix(a, Model::Qnl)
}

/// Periodic nearest-neighbour Laplacian
/// `(L1 u)_ℓ = −ε^{-2}(u_{ℓ+1} − 2u_ℓ + u_{ℓ−1})`.
pub fn l1_operator(cfg: &ChainConfig) -> LinearizedOperator {
    let m = cfg.num_sites();
    let inv_eps2 = 1.0 / (cfg.epsilon() * cfg.epsilon());
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        add_difference_outer(&mut a, cfg.idx(ell), cfg.idx(ell - 1), 1.0, inv_eps2);
    }
    LinearizedOperator::from_matrix(a, Model::L1)
}

/// Second-neighbour row operator: the stride-2 Laplacian on atomistic rows,
/// `4 L1` on continuum rows.
pub fn l2tilde_operator(cfg: &ChainConfig) -> LinearizedOperator {
    let m = cfg.num_sites();
    let inv_eps2 = 1.0 / (cfg.epsilon() * cfg.epsilon());
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        let i = cfg.idx(ell);
        if cfg.is_atomistic(ell) {
            a[(i, cfg.idx(ell + 2))] -= inv_eps2;
            a[(i, i)] += 2.0 * inv_eps2;
            a[(i, cfg.idx(ell - 2))] -= inv_eps2;
        } else {
            a[(i, cfg.idx(ell + 1))] -= 4.0 * inv_eps2;
            a[(i, i)] += 8.0 * inv_eps2;
            a[(i, cfg.idx(ell - 1))] -= 4.0 * inv_eps2;
        }
    }
    LinearizedOperator::from_matrix(a, Model::L2Tilde)
}

/// Subtracts each column's mean: the matrix version of composing with `P_U`
/// on the output side.
fn project_columns_zero_mean(m: &mut DMatrix<f64>) {
    let rows = m.nrows() as f64;
    for j in 0..m.ncols() {
        let mean = compensated_sum(m.column(j).iter().copied()) / rows;
        for i in 0..m.nrows() {
            m[(i, j)] -= mean;
        }
    }
}

/// Unprojected QCF matrix: atomistic Hessian rows on `A`, QCL rows on `C`.
pub(crate) fn qcf_row_mixed(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> DMatrix<f64> {
    let atom = hessian_atomistic(coeffs, cfg).matrix;
    let qcl = hessian_qcl(coeffs, cfg).matrix;
    let m = cfg.num_sites();
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        let i = cfg.idx(ell);
        let src = if cfg.is_atomistic(ell) { &atom } else { &qcl };
        a.set_row(i, &src.row(i));
    }
    a
}

/// Projected QCF operator `P_U L_qcf`, assembled by mixing force rows. In
/// debug builds the Laplacian decomposition
/// `φ''_F L1 + φ''_{2F} P_U L̃2` is assembled as well and both routes are
/// required to agree.
pub fn qcf_operator(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> LinearizedOperator {
    let mut projected = qcf_row_mixed(coeffs, cfg);
    project_columns_zero_mean(&mut projected);
    #[cfg(debug_assertions)]
    {
        let alt = qcf_from_decomposition(coeffs, cfg);
        let scale = linalg::max_abs(&projected).max(linalg::max_abs(&alt));
        let diff = linalg::max_abs(&(&projected - &alt));
        debug_assert!(
            diff <= 1e-12 * scale,
            "QCF assembly routes disagree: {diff:e} vs scale {scale:e}"
        );
    }
    LinearizedOperator::from_matrix(projected, Model::QcfProjected)
}

/// The alternative assembly `φ''_F L1 + φ''_{2F} P_U L̃2`.
pub(crate) fn qcf_from_decomposition(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> DMatrix<f64> {
    let l1 = l1_operator(cfg).matrix;
    let mut l2 = l2tilde_operator(cfg).matrix;
    project_columns_zero_mean(&mut l2);
    coeffs.phi_f * l1 + coeffs.phi_2f * l2
}

fn require_continuum_region(cfg: &ChainConfig, what: &str) -> Result<()> {
    if cfg.k() >= cfg.n() {
        return Err(Error::InvalidArgument(format!(
            "{what} needs a nonempty continuum region (K < N), got K = N = {}",
            cfg.n()
        )));
    }
    Ok(())
}

/// Splits the second-neighbour part of the QCF form into its regular and
/// singular (interface point-evaluation) parts:
/// `⟨L2reg u, v⟩ = Σ_C 4 u'_ℓ v'_ℓ + Σ_{−K+1..K} (u'_{ℓ−1}+2u'_ℓ+u'_{ℓ+1}) v'_ℓ`
/// and `⟨L2sng u, v⟩ = α̃_{−K}(u') v_{−K} − α̃_K(u') v_K` with
/// `α̃_{±K}` the interface second differences of the gradient. Then
/// `φ''_F L1 + φ''_{2F}(L2reg + L2sng)` reproduces the QCF form on `U × U`.
pub fn l2_split(cfg: &ChainConfig) -> Result<(LinearizedOperator, LinearizedOperator)> {
    require_continuum_region(cfg, "the interface splitting")?;
    let m = cfg.num_sites();
    let inv_eps = 1.0 / cfg.epsilon();
    let inv_eps2 = inv_eps * inv_eps;
    let k = cfg.k() as i64;

    // Regular part as Dᵀ W D: W has rows (1, 2, 1) at interface sites and
    // 4·I elsewhere, all acting on gradients.
    let mut d = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        d[(cfg.idx(ell), cfg.idx(ell))] += inv_eps;
        d[(cfg.idx(ell), cfg.idx(ell - 1))] -= inv_eps;
    }
    let mut w = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        let i = cfg.idx(ell);
        if sigma_interface(ell, cfg) {
            w[(i, cfg.idx(ell - 1))] += 1.0;
            w[(i, i)] += 2.0;
            w[(i, cfg.idx(ell + 1))] += 1.0;
        } else {
            w[(i, i)] += 4.0;
        }
    }
    let reg = d.transpose() * &w * &d;

    // Singular part: rank two, supported on the rows of the interface sites.
    let mut sng = DMatrix::zeros(m, m);
    let row_m = cfg.idx(-k);
    sng[(row_m, cfg.idx(-k + 1))] += inv_eps2;
    sng[(row_m, cfg.idx(-k))] -= 3.0 * inv_eps2;
    sng[(row_m, cfg.idx(-k - 1))] += 3.0 * inv_eps2;
    sng[(row_m, cfg.idx(-k - 2))] -= inv_eps2;
    let row_p = cfg.idx(k);
    sng[(row_p, cfg.idx(k + 2))] -= inv_eps2;
    sng[(row_p, cfg.idx(k + 1))] += 3.0 * inv_eps2;
    sng[(row_p, cfg.idx(k))] -= 3.0 * inv_eps2;
    sng[(row_p, cfg.idx(k - 1))] += inv_eps2;

    Ok((
        LinearizedOperator::from_matrix(reg, Model::L2Reg),
        LinearizedOperator::from_matrix(sng, Model::L2Sng),
    ))
}

/// Interface stencil functionals on gradient vectors: `σ` applies the
/// `(1, 2, 1)` second-neighbour weights across `−K+1, …, K` and the
/// Cauchy-Born weight `A_F` elsewhere; `α_{±K}` are the boundary second
/// differences that the conjugate operator spreads along the heaviside.
#[derive(Debug, Clone, Copy)]
pub struct StencilData {
    coeffs: LinearizedCoefficients,
    cfg: ChainConfig,
}

impl StencilData {
    pub fn new(coeffs: LinearizedCoefficients, cfg: ChainConfig) -> Result<Self> {
        require_continuum_region(&cfg, "the interface stencils")?;
        Ok(StencilData { coeffs, cfg })
    }

    pub fn is_interface(&self, ell: i64) -> bool {
        sigma_interface(self.cfg.wrap(ell), &self.cfg)
    }

    pub fn sigma_at(&self, ell: i64, g: &[f64]) -> f64 {
        let cfg = &self.cfg;
        let ell = cfg.wrap(ell);
        if sigma_interface(ell, cfg) {
            self.coeffs.phi_f * g[cfg.idx(ell)]
                + self.coeffs.phi_2f
                    * (g[cfg.idx(ell - 1)] + 2.0 * g[cfg.idx(ell)] + g[cfg.idx(ell + 1)])
        } else {
            self.coeffs.a_f() * g[cfg.idx(ell)]
        }
    }

    pub fn sigma(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.cfg.num_sites());
        sites(&self.cfg).map(|ell| self.sigma_at(ell, g)).collect()
    }

    /// `α_K(g) = φ''_{2F}(g_{K+2} − 2g_{K+1} + g_K)`.
    pub fn alpha_plus(&self, g: &[f64]) -> f64 {
        let cfg = &self.cfg;
        let k = cfg.k() as i64;
        self.coeffs.phi_2f
            * (g[cfg.idx(k + 2)] - 2.0 * g[cfg.idx(k + 1)] + g[cfg.idx(k)])
    }

    /// `α_{−K}(g) = φ''_{2F}(g_{−K+1} − 2g_{−K} + g_{−K−1})`.
    pub fn alpha_minus(&self, g: &[f64]) -> f64 {
        let cfg = &self.cfg;
        let k = cfg.k() as i64;
        self.coeffs.phi_2f
            * (g[cfg.idx(-k + 1)] - 2.0 * g[cfg.idx(-k)] + g[cfg.idx(-k - 1)])
    }
}

/// Conjugate operator on gradients:
/// `E g_ℓ = σ_ℓ(g) − α_{−K}(g) h_{ℓ+K−1} + α_K(g) h_{ℓ−K−1}`, satisfying
/// `⟨L_qcf u, v⟩ = ⟨E u', v'⟩` on `U × U` and `E e = A_F e`.
pub fn conjugate_operator(
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<LinearizedOperator> {
    require_continuum_region(cfg, "the conjugate operator")?;
    let m = cfg.num_sites();
    let k = cfg.k() as i64;
    let p2 = coeffs.phi_2f;
    let mut a = DMatrix::zeros(m, m);
    for ell in sites(cfg) {
        let i = cfg.idx(ell);
        a[(i, i)] += coeffs.phi_f;
        if sigma_interface(ell, cfg) {
            a[(i, cfg.idx(ell - 1))] += p2;
            a[(i, i)] += 2.0 * p2;
            a[(i, cfg.idx(ell + 1))] += p2;
        } else {
            a[(i, i)] += 4.0 * p2;
        }
        // Rank-two heaviside spread of the interface functionals.
        let hm = heaviside_at(ell + k - 1, cfg);
        a[(i, cfg.idx(-k + 1))] -= hm * p2;
        a[(i, cfg.idx(-k))] += 2.0 * hm * p2;
        a[(i, cfg.idx(-k - 1))] -= hm * p2;
        let hp = heaviside_at(ell - k - 1, cfg);
        a[(i, cfg.idx(k + 2))] += hp * p2;
        a[(i, cfg.idx(k + 1))] -= 2.0 * hp * p2;
        a[(i, cfg.idx(k))] += hp * p2;
    }
    Ok(LinearizedOperator::from_matrix(a, Model::EqcfConjugate))
}

/// Gradient of `z = L1^{-1} P_U L_qcf u` evaluated directly from a gradient
/// vector: `σ_ℓ(g)` minus its mean (the telescoped interface term), plus the
/// heaviside spreads of `α_{±K}`. Defined for any `g`, not just zero-sum
/// ones, to expose the affine-invariance of the stencils.
pub fn z_prime_from_gradient(
    g: &[f64],
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<Vec<f64>> {
    let st = StencilData::new(*coeffs, *cfg)?;
    assert_eq!(g.len(), cfg.num_sites());
    let k = cfg.k() as i64;
    // Mean of σ over the period: A_F · mean(g) plus the telescoped interface
    // correction ε/2 · φ''_{2F} {g_{−K} − g_{−K+1} − g_K + g_{K+1}}.
    let g_mean = compensated_sum(g.iter().copied()) / g.len() as f64;
    let sigma_bar = coeffs.a_f() * g_mean
        + 0.5 * cfg.epsilon()
            * coeffs.phi_2f
            * (g[cfg.idx(-k)] - g[cfg.idx(-k + 1)] - g[cfg.idx(k)] + g[cfg.idx(k + 1)]);
    let am = st.alpha_minus(g);
    let ap = st.alpha_plus(g);
    Ok(sites(cfg)
        .map(|ell| {
            st.sigma_at(ell, g) - sigma_bar - am * heaviside_at(ell + k - 1, cfg)
                + ap * heaviside_at(ell - k - 1, cfg)
        })
        .collect())
}

/// Gradient of `z = L1^{-1} P_U L_qcf u` by the closed interface formula.
pub fn z_prime_formula(
    u: &Displacement,
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<Vec<f64>> {
    z_prime_from_gradient(&u.backward_difference(cfg), coeffs, cfg)
}

/// `z'` for the solution of `L1 z = g`, the reference for
/// [`z_prime_formula`].
pub fn z_prime_by_direct_solve(
    u: &Displacement,
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
) -> Result<Vec<f64>> {
    let qcf = qcf_operator(coeffs, cfg);
    let rhs = DualVector::new(qcf.apply(u.values()), cfg)?;
    Ok(chain::solve_l1_gradient(&rhs, cfg))
}
