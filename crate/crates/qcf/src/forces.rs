//! Nonlinear energies and force fields for the atomistic, local-QC (QCL),
//! QNL, and force-mixed QCF models, with next-nearest-neighbour pair
//! interactions.
//!
//! Deformations `y` are raw one-period vectors; the models act on the
//! nearest gap `r1_ℓ = y'_ℓ` and second-neighbour gap `r2_ℓ = y'_ℓ +
//! y'_{ℓ+1}`. Forces are scaled per site: `F_ℓ = −ε^{-1} ∂E/∂y_ℓ`.

use crate::chain::{backward_difference_of, compensated_sum, ChainConfig, DualVector};
use crate::{Error, Result};

/// Interaction law `φ` on `(0, ∞)` with two derivatives and the inflection
/// point `r_star` separating the convex well from the concave tail.
pub trait Potential: Send + Sync {
    fn phi(&self, r: f64) -> f64;
    fn dphi(&self, r: f64) -> f64;
    fn ddphi(&self, r: f64) -> f64;
    fn r_star(&self) -> f64;
}

/// `φ(r) = r^{−12} − 2 r^{−6}`, minimum at `r = 1` with depth `−1`.
#[derive(Debug, Clone, Copy)]
pub struct LennardJones;

impl Potential for LennardJones {
    fn phi(&self, r: f64) -> f64 {
        let s6 = r.powi(-6);
        s6 * s6 - 2.0 * s6
    }

    fn dphi(&self, r: f64) -> f64 {
        12.0 * (r.powi(-7) - r.powi(-13))
    }

    fn ddphi(&self, r: f64) -> f64 {
        156.0 * r.powi(-14) - 84.0 * r.powi(-8)
    }

    fn r_star(&self) -> f64 {
        // Root of ddphi: 156 r^{-14} = 84 r^{-8}.
        (13.0 / 7.0f64).powf(1.0 / 6.0)
    }
}

/// Default interaction for CLI experiments.
pub fn reference_lennard_jones() -> LennardJones {
    LennardJones
}

/// Samples the qualitative shape requirements of a Lennard-Jones-type law:
/// convex below `r_star`, concave above, derivative consistent with `phi`,
/// and (softly) decaying tails beyond `2 r_star`. No decay *rate* is
/// asserted.
pub fn check_potential_shape(pot: &dyn Potential, lo: f64, hi: f64, samples: usize) -> Result<()> {
    if !(lo > 0.0 && hi > lo && samples >= 8) {
        return Err(Error::InvalidArgument("need 0 < lo < hi and samples >= 8".into()));
    }
    let rs = pot.r_star();
    let step = (hi - lo) / (samples - 1) as f64;
    let mut prev_tail: Option<[f64; 3]> = None;
    for i in 0..samples {
        let r = lo + step * i as f64;
        let dd = pot.ddphi(r);
        if r < 0.995 * rs && dd <= 0.0 {
            return Err(Error::Certification(format!("ddphi({r}) = {dd} not convex below r_star")));
        }
        if r > 1.005 * rs && dd >= 0.0 {
            return Err(Error::Certification(format!("ddphi({r}) = {dd} not concave above r_star")));
        }
        let h = 1e-5 * r;
        let fd = (pot.phi(r + h) - pot.phi(r - h)) / (2.0 * h);
        let dp = pot.dphi(r);
        let scale = dp.abs().max(1e-8);
        if (fd - dp).abs() > 1e-6 * scale.max(1.0) + 1e-6 * scale {
            return Err(Error::Certification(format!(
                "dphi({r}) = {dp} disagrees with finite difference {fd}"
            )));
        }
        if r > 2.0 * rs {
            let cur = [pot.phi(r).abs(), pot.dphi(r).abs(), pot.ddphi(r).abs()];
            if let Some(prev) = prev_tail {
                for (c, p) in cur.iter().zip(prev.iter()) {
                    if *c > *p * (1.0 + 1e-9) {
                        return Err(Error::Certification(format!("tail not decaying at r={r}")));
                    }
                }
            }
            prev_tail = Some(cur);
        }
    }
    Ok(())
}

/// Second derivatives of the interaction at the nearest (`F`) and
/// second-neighbour (`2F`) gaps of the uniform state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedCoefficients {
    pub phi_f: f64,
    pub phi_2f: f64,
}

impl LinearizedCoefficients {
    pub fn new(phi_f: f64, phi_2f: f64) -> Self {
        LinearizedCoefficients { phi_f, phi_2f }
    }

    pub fn from_potential(pot: &dyn Potential, f: f64) -> Self {
        LinearizedCoefficients { phi_f: pot.ddphi(f), phi_2f: pot.ddphi(2.0 * f) }
    }

    /// Elastic modulus of the Cauchy-Born law, `A_F = φ''_F + 4 φ''_{2F}`.
    /// Always recomputed.
    pub fn a_f(&self) -> f64 {
        self.phi_f + 4.0 * self.phi_2f
    }
}

/// Nearest and second-neighbour gaps `(r1, r2)` with the hard domain guard
/// `r1_ℓ > 0`. Deformations extend affinely across the period,
/// `y_{ℓ+2N} = y_ℓ + 2F`, so the bond reaching back across the seam picks up
/// the macroscopic stretch `2F` that the stored period drops.
fn gaps(y: &[f64], cfg: &ChainConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r1 = backward_difference_of(y, cfg);
    let n = cfg.n() as i64;
    r1[cfg.idx(1 - n)] += 2.0 * cfg.strain() / cfg.epsilon();
    if let Some((i, bad)) = r1.iter().enumerate().find(|(_, g)| **g <= 0.0) {
        return Err(Error::Domain(format!(
            "nearest gap y'_ℓ = {bad} <= 0 at site {}",
            cfg.site(i)
        )));
    }
    let m = cfg.num_sites();
    let r2 = (0..m).map(|i| r1[i] + r1[(i + 1) % m]).collect();
    Ok((r1, r2))
}

/// `E_a(y) = ε Σ_ℓ (φ(y'_ℓ) + φ(y'_ℓ + y'_{ℓ+1}))`.
pub fn energy_atomistic(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<f64> {
    let (r1, r2) = gaps(y, cfg)?;
    let s = compensated_sum(r1.iter().zip(&r2).map(|(a, b)| pot.phi(*a) + pot.phi(*b)));
    Ok(cfg.epsilon() * s)
}

/// Analytic atomistic forces `F_{a,ℓ} = −ε^{-1} ∂E_a/∂y_ℓ`; zero-mean by
/// the periodic telescoping identity.
pub fn forces_atomistic(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<DualVector> {
    let (r1, r2) = gaps(y, cfg)?;
    let m = cfg.num_sites();
    let inv_eps = 1.0 / cfg.epsilon();
    let f: Vec<f64> = (0..m)
        .map(|i| {
            let ip = (i + 1) % m;
            let im = (i + m - 1) % m;
            inv_eps * (pot.dphi(r1[ip]) - pot.dphi(r1[i]) + pot.dphi(r2[ip]) - pot.dphi(r2[im]))
        })
        .collect();
    DualVector::new(f, cfg)
}

fn phi_cb(pot: &dyn Potential, r: f64) -> f64 {
    pot.phi(r) + pot.phi(2.0 * r)
}

fn dphi_cb(pot: &dyn Potential, r: f64) -> f64 {
    pot.dphi(r) + 2.0 * pot.dphi(2.0 * r)
}

/// Cauchy-Born energy `E_qcl(y) = ε Σ_ℓ ½(φ_cb(y'_ℓ) + φ_cb(y'_{ℓ+1}))`.
pub fn energy_qcl(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<f64> {
    let (r1, _) = gaps(y, cfg)?;
    let m = cfg.num_sites();
    let s = compensated_sum(
        (0..m).map(|i| 0.5 * (phi_cb(pot, r1[i]) + phi_cb(pot, r1[(i + 1) % m]))),
    );
    Ok(cfg.epsilon() * s)
}

pub fn forces_qcl(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<DualVector> {
    let (r1, _) = gaps(y, cfg)?;
    let m = cfg.num_sites();
    let inv_eps = 1.0 / cfg.epsilon();
    let f: Vec<f64> =
        (0..m).map(|i| inv_eps * (dphi_cb(pot, r1[(i + 1) % m]) - dphi_cb(pot, r1[i]))).collect();
    DualVector::new(f, cfg)
}

/// QNL energy: full nearest-neighbour sum, atomistic second-neighbour terms
/// for `ℓ ∈ A`, Cauchy-Born halves `½(φ(2y'_ℓ) + φ(2y'_{ℓ+1}))` for `ℓ ∈ C`.
pub fn energy_qnl(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<f64> {
    let (r1, r2) = gaps(y, cfg)?;
    let m = cfg.num_sites();
    let s = compensated_sum((0..m).map(|i| {
        let nn = pot.phi(r1[i]);
        let ell = cfg.site(i);
        if cfg.is_atomistic(ell) {
            nn + pot.phi(r2[i])
        } else {
            nn + 0.5 * (pot.phi(2.0 * r1[i]) + pot.phi(2.0 * r1[(i + 1) % m]))
        }
    }));
    Ok(cfg.epsilon() * s)
}

pub fn forces_qnl(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<DualVector> {
    let (r1, r2) = gaps(y, cfg)?;
    let m = cfg.num_sites();
    let inv_eps = 1.0 / cfg.epsilon();
    let in_a = |i: usize| cfg.is_atomistic(cfg.site(i));
    let f: Vec<f64> = (0..m)
        .map(|i| {
            let ip = (i + 1) % m;
            let im = (i + m - 1) % m;
            let mut df = pot.dphi(r1[ip]) - pot.dphi(r1[i]);
            if in_a(ip) {
                df += pot.dphi(r2[ip]);
            }
            if in_a(im) {
                df -= pot.dphi(r2[im]);
            }
            let c_here = if in_a(i) { 0.0 } else { 1.0 };
            let c_prev = if in_a(im) { 0.0 } else { 1.0 };
            let c_next = if in_a(ip) { 0.0 } else { 1.0 };
            df += (c_here + c_next) * pot.dphi(2.0 * r1[ip]);
            df -= (c_here + c_prev) * pot.dphi(2.0 * r1[i]);
            inv_eps * df
        })
        .collect();
    DualVector::new(f, cfg)
}

/// Force mixing: atomistic rows on `A`, QCL rows on `C`. The result is NOT
/// zero-mean; its mean is the interface mismatch of
/// [`qcf_force_sum_identity`].
pub fn forces_qcf(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<Vec<f64>> {
    let fa = forces_atomistic(y, pot, cfg)?;
    let fc = forces_qcl(y, pot, cfg)?;
    Ok((0..cfg.num_sites())
        .map(|i| {
            if cfg.is_atomistic(cfg.site(i)) {
                fa.values()[i]
            } else {
                fc.values()[i]
            }
        })
        .collect())
}

pub fn forces_qcf_projected(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<DualVector> {
    let raw = forces_qcf(y, pot, cfg)?;
    DualVector::new(raw, cfg)
}

/// Closed form of `Σ_ℓ F_{qcf,ℓ}(y)`: one bracket per interface,
/// `ε^{-1}[2φ'(2y'_{−K}) − φ'(y'_{−K}+y'_{−K−1}) − φ'(y'_{−K+1}+y'_{−K})]
///  − ε^{-1}[2φ'(2y'_{K+1}) − φ'(y'_{K+2}+y'_{K+1}) − φ'(y'_{K+1}+y'_K)]`.
pub fn qcf_force_sum_identity(y: &[f64], pot: &dyn Potential, cfg: &ChainConfig) -> Result<f64> {
    if cfg.k() >= cfg.n() {
        return Err(Error::InvalidConfig("interface formula needs K < N".into()));
    }
    let (r1, _) = gaps(y, cfg)?;
    let k = cfg.k() as i64;
    let g = |ell: i64| r1[cfg.idx(ell)];
    let inv_eps = 1.0 / cfg.epsilon();
    let left =
        2.0 * pot.dphi(2.0 * g(-k)) - pot.dphi(g(-k) + g(-k - 1)) - pot.dphi(g(-k + 1) + g(-k));
    let right =
        2.0 * pot.dphi(2.0 * g(k + 1)) - pot.dphi(g(k + 2) + g(k + 1)) - pot.dphi(g(k + 1) + g(k));
    Ok(inv_eps * (left - right))
}
