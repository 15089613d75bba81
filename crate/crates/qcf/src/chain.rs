//! Lattice bookkeeping, the displacement space `U`, difference operators,
//! discrete norms, and the zero-mean projection `P_U`.
//!
//! All vectors hold one period of `2N` values at sites `ℓ = -N+1, …, N`,
//! stored in that order. `epsilon = 1/N` is the lattice parameter, and every
//! `ℓ^p` quantity is `epsilon`-scaled: `‖v‖_{ℓ^p_ε} = (ε Σ |v_ℓ|^p)^{1/p}`.

use crate::{Error, Result};

/// Absolute zero-mean tolerance per site; a vector of length `2N` is
/// considered zero-mean when `|Σ v_ℓ| ≤ MEAN_TOL_PER_SITE · 2N`.
pub const MEAN_TOL_PER_SITE: f64 = 1e-12;

/// Geometry of one period of the chain: `2N` sites, atomistic region
/// `A = {-K, …, K}`, macroscopic strain `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    n: usize,
    k: usize,
    f: f64,
    epsilon: f64,
}

impl ChainConfig {
    /// `n` is the half period count (period `2n`), `k` the atomistic
    /// half-width, `f` the macroscopic strain.
    ///
    /// `k == n` is accepted as the degenerate all-atomistic limit (empty
    /// continuum region); operations that need an actual interface reject it
    /// individually.
    pub fn new(n: usize, k: usize, f: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("need N >= 2, got N={n}")));
        }
        if k < 1 || k > n {
            return Err(Error::InvalidConfig(format!(
                "atomistic half-width must satisfy 1 <= K <= N, got K={k}, N={n}"
            )));
        }
        if !f.is_finite() {
            return Err(Error::InvalidConfig(format!("strain must be finite, got F={f}")));
        }
        Ok(ChainConfig { n, k, f, epsilon: 1.0 / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn strain(&self) -> f64 {
        self.f
    }

    /// Lattice parameter `ε = 1/N`. Derived from `N` alone, never stored
    /// independently by callers, so `ε·N` cannot drift from 1.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of sites in one period, `2N`.
    pub fn num_sites(&self) -> usize {
        2 * self.n
    }

    /// Storage index of site `ℓ` (any integer; wraps modulo `2N`).
    pub fn idx(&self, ell: i64) -> usize {
        let m = self.num_sites() as i64;
        (ell + self.n as i64 - 1).rem_euclid(m) as usize
    }

    /// Site label in `[-N+1, N]` of storage index `i`.
    pub fn site(&self, i: usize) -> i64 {
        debug_assert!(i < self.num_sites());
        i as i64 - (self.n as i64 - 1)
    }

    /// Reduce an arbitrary site label into the principal range `[-N+1, N]`.
    pub fn wrap(&self, ell: i64) -> i64 {
        self.site(self.idx(ell))
    }

    /// Whether site `ℓ` lies in the atomistic region `A = {-K, …, K}`.
    pub fn is_atomistic(&self, ell: i64) -> bool {
        self.wrap(ell).unsigned_abs() <= self.k as u64
    }
}

/// Element of the zero-mean displacement space `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    values: Vec<f64>,
}

/// A functional on `U`, identified with its zero-mean representative.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    values: Vec<f64>,
}

macro_rules! zero_mean_vector {
    ($name:ident) => {
        impl $name {
            /// Projects the input onto zero mean and checks the invariant.
            pub fn new(values: Vec<f64>, cfg: &ChainConfig) -> Result<Self> {
                if values.len() != cfg.num_sites() {
                    return Err(Error::InvalidArgument(format!(
                        "expected {} sites, got {}",
                        cfg.num_sites(),
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite entry".into()));
                }
                let values = project_zero_mean_raw(&values);
                let mean_bound = MEAN_TOL_PER_SITE * cfg.num_sites() as f64;
                debug_assert!(compensated_sum(values.iter().copied()).abs() <= mean_bound);
                Ok(Self { values })
            }

            pub fn zeros(cfg: &ChainConfig) -> Self {
                Self { values: vec![0.0; cfg.num_sites()] }
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            /// Value at site `ℓ` via the periodic extension.
            pub fn at(&self, ell: i64, cfg: &ChainConfig) -> f64 {
                self.values[cfg.idx(ell)]
            }
        }
    };
}

zero_mean_vector!(Displacement);
zero_mean_vector!(DualVector);

impl Displacement {
    pub fn backward_difference(&self, cfg: &ChainConfig) -> Vec<f64> {
        backward_difference_of(&self.values, cfg)
    }

    pub fn second_difference(&self, cfg: &ChainConfig) -> Vec<f64> {
        second_difference_of(&self.values, cfg)
    }
}

/// Neumaier-compensated sum; the norms below need ~1e-10 discrimination on
/// thousands of terms.
pub(crate) fn compensated_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The `ε`-weighted pairing `⟨a, b⟩ = ε Σ a_ℓ b_ℓ`.
pub fn pairing(a: &[f64], b: &[f64], cfg: &ChainConfig) -> f64 {
    assert_eq!(a.len(), b.len());
    cfg.epsilon() * compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Uniform state `(y_F)_ℓ = F·ε·ℓ` over the stored period.
pub fn forward_state(cfg: &ChainConfig) -> Vec<f64> {
    let fe = cfg.strain() * cfg.epsilon();
    (0..cfg.num_sites()).map(|i| fe * cfg.site(i) as f64).collect()
}

/// Backward first difference `v'_ℓ = ε^{-1}(v_ℓ − v_{ℓ−1})` with periodic
/// wraparound, for a raw one-period vector.
pub fn backward_difference_of(values: &[f64], cfg: &ChainConfig) -> Vec<f64> {
    let m = cfg.num_sites();
    assert_eq!(values.len(), m);
    let inv_eps = 1.0 / cfg.epsilon();
    (0..m)
        .map(|i| inv_eps * (values[i] - values[(i + m - 1) % m]))
        .collect()
}

/// Centered second difference `v''_ℓ = ε^{-2}(v_{ℓ+1} − 2v_ℓ + v_{ℓ−1})`.
pub fn second_difference_of(values: &[f64], cfg: &ChainConfig) -> Vec<f64> {
    let m = cfg.num_sites();
    assert_eq!(values.len(), m);
    let inv_eps2 = 1.0 / (cfg.epsilon() * cfg.epsilon());
    (0..m)
        .map(|i| inv_eps2 * (values[(i + 1) % m] - 2.0 * values[i] + values[(i + m - 1) % m]))
        .collect()
}

pub fn backward_difference(u: &Displacement, cfg: &ChainConfig) -> Vec<f64> {
    u.backward_difference(cfg)
}

pub fn second_difference(u: &Displacement, cfg: &ChainConfig) -> Vec<f64> {
    u.second_difference(cfg)
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::UnsupportedNorm(format!("p must lie in [1, inf], got {p}")));
    }
    Ok(())
}

/// `ℓ^p_ε` norm: `(ε Σ |v_ℓ|^p)^{1/p}` for finite `p`, `max |v_ℓ|` for
/// `p = ∞`.
pub fn lp_norm(v: &[f64], p: f64, cfg: &ChainConfig) -> Result<f64> {
    validate_p(p)?;
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    let s = compensated_sum(v.iter().map(|x| x.abs().powf(p)));
    Ok((cfg.epsilon() * s).powf(1.0 / p))
}

/// `‖u‖_{U^{1,p}} = ‖u'‖_{ℓ^p_ε}`.
pub fn u1p_norm(u: &Displacement, p: f64, cfg: &ChainConfig) -> Result<f64> {
    lp_norm(&u.backward_difference(cfg), p, cfg)
}

/// `‖u‖_{U^{2,p}} = ‖u''‖_{ℓ^p_ε}`.
pub fn u2p_norm(u: &Displacement, p: f64, cfg: &ChainConfig) -> Result<f64> {
    lp_norm(&u.second_difference(cfg), p, cfg)
}

/// `(P_U v)_ℓ = v_ℓ − (1/2N) Σ v_j`, with a second correction pass so the
/// output mean is zero to roundoff regardless of input magnitude.
pub fn project_zero_mean_raw(values: &[f64]) -> Vec<f64> {
    let m = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / m;
    let mut out: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let residual = compensated_sum(out.iter().copied()) / m;
    if residual != 0.0 {
        for v in &mut out {
            *v -= residual;
        }
    }
    out
}

pub fn project_zero_mean(values: &[f64], cfg: &ChainConfig) -> Result<DualVector> {
    DualVector::new(values.to_vec(), cfg)
}

/// Periodic heaviside `h ∈ U`: `h_ℓ = ½(1−εℓ) − ε/4` for `ℓ ≥ 0` and
/// `h_ℓ = −½(1+εℓ) − ε/4` for `ℓ < 0`. Its gradient represents point
/// evaluation: `⟨h', v⟩ = v_0` for every `v ∈ U`.
pub fn heaviside(cfg: &ChainConfig) -> Displacement {
    let eps = cfg.epsilon();
    let values: Vec<f64> = (0..cfg.num_sites())
        .map(|i| {
            let ell = cfg.site(i) as f64;
            if ell >= 0.0 {
                0.5 * (1.0 - eps * ell) - 0.25 * eps
            } else {
                -0.5 * (1.0 + eps * ell) - 0.25 * eps
            }
        })
        .collect();
    Displacement::new(values, cfg).expect("heaviside formula is zero-mean")
}

/// Value of the periodic heaviside at an arbitrary site label.
pub(crate) fn heaviside_at(ell: i64, cfg: &ChainConfig) -> f64 {
    let ell = cfg.wrap(ell) as f64;
    let eps = cfg.epsilon();
    if ell >= 0.0 {
        0.5 * (1.0 - eps * ell) - 0.25 * eps
    } else {
        -0.5 * (1.0 + eps * ell) - 0.25 * eps
    }
}

/// Solves `L1 z = g` for `z ∈ U`, where `(L1 z)_ℓ = −ε^{-2}(z_{ℓ+1} − 2z_ℓ +
/// z_{ℓ−1})` and `g` is zero-mean. Exact integration: `z'_{ℓ+1} = z'_ℓ − ε
/// g_ℓ` determines `z'` up to the constant fixed by `Σ z' = 0`, then `z`
/// follows by a second integration.
pub fn solve_l1(g: &DualVector, cfg: &ChainConfig) -> Displacement {
    let m = cfg.num_sites();
    let eps = cfg.epsilon();
    let gv = g.values();
    let mut zp = vec![0.0; m];
    let mut acc = 0.0;
    let mut comp = 0.0;
    for i in 0..m - 1 {
        // Neumaier-compensated running sum of -eps*g.
        let x = -eps * gv[i];
        let t = acc + x;
        if acc.abs() >= x.abs() {
            comp += (acc - t) + x;
        } else {
            comp += (x - t) + acc;
        }
        acc = t;
        zp[i + 1] = acc + comp;
    }
    let zp = project_zero_mean_raw(&zp);
    let mut z = vec![0.0; m];
    for i in 1..m {
        z[i] = z[i - 1] + eps * zp[i];
    }
    Displacement::new(z, cfg).expect("integrated vector has the right length")
}

/// Gradient of the `L1` solution for `g`: the `z'` with `⟨g, v⟩ = ⟨z', v'⟩`
/// for all `v ∈ U`, normalized to zero sum.
pub fn solve_l1_gradient(g: &DualVector, cfg: &ChainConfig) -> Vec<f64> {
    solve_l1(g, cfg).backward_difference(cfg)
}

/// Dual `ℓ^p_ε` norm of the functional `w ↦ ⟨c, w⟩` restricted to zero-sum
/// vectors: `min_κ ‖c − κ e‖_{ℓ^p_ε}`. The annihilator of the zero-sum
/// subspace is spanned by `e`, so the minimum over constant shifts is the
/// exact dual norm (Hahn-Banach), not a bound.
pub(crate) fn dual_norm_on_zero_sum(c: &[f64], p: f64, cfg: &ChainConfig) -> Result<f64> {
    validate_p(p)?;
    if p.is_infinite() {
        let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = c.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok(0.5 * (max - min));
    }
    if p == 2.0 {
        let mean = compensated_sum(c.iter().copied()) / c.len() as f64;
        let shifted: Vec<f64> = c.iter().map(|x| x - mean).collect();
        return lp_norm(&shifted, 2.0, cfg);
    }
    if p == 1.0 {
        let mut sorted = c.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let kappa = sorted[sorted.len() / 2];
        let shifted: Vec<f64> = c.iter().map(|x| x - kappa).collect();
        return lp_norm(&shifted, 1.0, cfg);
    }
    // General p: the objective is convex in kappa; ternary search.
    let mut lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let obj = |kappa: f64| -> f64 {
        compensated_sum(c.iter().map(|x| (x - kappa).abs().powf(p)))
    };
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if obj(a) <= obj(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let shifted: Vec<f64> = c.iter().map(|x| x - kappa).collect();
    lp_norm(&shifted, p, cfg)
}

/// Negative-order norm `‖g‖_{U^{-s,p}}` for `s ∈ {0, 1}` and `p ∈ [1, ∞]`.
///
/// `s = 0`: supremum of `⟨g, v⟩` over zero-mean `v` with `‖v‖_{ℓ^q_ε} = 1`,
/// computed exactly as `min_κ ‖g − κe‖_{ℓ^p_ε}`.
///
/// `s = 1`: supremum over `‖v'‖_{ℓ^q_ε} = 1`; substituting `⟨g, v⟩ =
/// ⟨z', v'⟩` with `L1 z = g` reduces it to the same dual formula applied to
/// `z'`. For `p = ∞` this is the half-oscillation `(max z' − min z')/2`.
pub fn negative_norm(g: &DualVector, s: u32, p: f64, cfg: &ChainConfig) -> Result<f64> {
    match s {
        0 => dual_norm_on_zero_sum(g.values(), p, cfg),
        1 => {
            let zp = solve_l1_gradient(g, cfg);
            dual_norm_on_zero_sum(&zp, p, cfg)
        }
        _ => Err(Error::UnsupportedNorm(format!(
            "negative norm implemented for s in {{0, 1}}, got s={s}"
        ))),
    }
}
