//! Linearized dynamics ü + P_U L u = 0 started from rest, solved two
//! independent ways: exactly through the eigenbasis, and by an explicit
//! symplectic integrator that serves as a cross-check. On top of both sits
//! a randomized audit of the dynamical-stability bound ‖u(t)‖ ≤ C‖u₀‖.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{compensated_sum, ChainConfig, Displacement};
use crate::csvfmt;
use crate::exec;
use crate::forces::LinearizedCoefficients;
use crate::linalg::CheckedLu;
use crate::operators::qcf_operator;
use crate::spectral::{self, SpectralResult};
use crate::{Error, Result};

/// Relative threshold on |Im λ| above which the spectrum counts as complex
/// and the evolution refuses to run.
const UNSTABLE_IMAG_REL_TOL: f64 = 1e-8;
/// Relative threshold on negative Re λ; anything below it is unstable,
/// anything between it and zero is solver noise and clamps to zero.
const UNSTABLE_NEG_REL_TOL: f64 = 1e-8;
/// Relative threshold under which an eigenvalue is the zero mode and its
/// amplitude is held exactly constant.
const ZERO_MODE_REL_TOL: f64 = 1e-10;
/// Power-iteration steps for the stiffest-frequency estimate.
const POWER_ITERATIONS: usize = 300;
/// Trajectory samples per trial in the stability audit.
const AUDIT_SAMPLES: usize = 600;

/// Which solver produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMethod {
    SpectralExact,
    LeapfrogIntegrator,
}

/// Sampled norm history of one solution of ü + P_U L u = 0, u̇(0) = 0.
#[derive(Debug, Clone)]
pub struct TrajectoryResult {
    /// Strictly increasing sample times, starting at the initial state.
    pub times: Vec<f64>,
    /// ‖u(t)‖_{ℓ²_ε} at each sample time.
    pub norms: Vec<f64>,
    /// max_t ‖u(t)‖ / ‖u₀‖ over the initial state and all samples; 1 for
    /// zero initial data.
    pub peak_ratio: f64,
    pub method: TrajectoryMethod,
}

impl TrajectoryResult {
    /// Writes the trajectory as CSV rows of (t, ‖u(t)‖).
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "t,norm")?;
        for (t, norm) in self.times.iter().zip(&self.norms) {
            let row = [csvfmt::float_cell(*t), csvfmt::float_cell(*norm)];
            writeln!(w, "{}", csvfmt::record(&row))?;
        }
        Ok(())
    }
}

fn l2_eps_norm(u: &[f64], cfg: &ChainConfig) -> f64 {
    (cfg.epsilon() * compensated_sum(u.iter().map(|x| x * x))).sqrt()
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument(
            "trajectory needs at least one sample time".into(),
        ));
    }
    if !times[0].is_finite() || times[0] < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sample times must be finite and nonnegative, got t₀ = {}",
            times[0]
        )));
    }
    for w in times.windows(2) {
        if !(w[1].is_finite() && w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!(
                "sample times must increase strictly, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Evenly spaced sample times 0, h, …, t_end.
pub fn sample_times(t_end: f64, samples: usize) -> Vec<f64> {
    assert!(t_end > 0.0 && samples > 0);
    (0..=samples).map(|i| t_end * i as f64 / samples as f64).collect()
}

/// Real eigenbasis of the projected coupling operator together with its
/// factorization, ready to propagate any initial state.
struct SpectralPropagator {
    basis: DMatrix<f64>,
    lu: CheckedLu,
    /// Clamped nonnegative frequencies squared; the zero mode is exactly 0.
    lambda: Vec<f64>,
}

impl SpectralPropagator {
    fn build(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> Result<Self> {
        let s: SpectralResult = spectral::eigendecompose(&qcf_operator(coeffs, cfg))?;
        if s.degraded {
            return Err(Error::Certification(format!(
                "eigenpair residuals too large to trust the evolution: max residual {:.3e}",
                s.max_residual
            )));
        }
        let radius = s
            .eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        let m = s.vectors.nrows();
        let mut basis = DMatrix::zeros(m, m);
        let mut lambda = vec![0.0; m];
        let mut j = 0;
        while j < m {
            let ev = s.eigenvalues[j];
            if ev.im.abs() > UNSTABLE_IMAG_REL_TOL * radius {
                return Err(Error::UnstableSpectrum(format!(
                    "complex eigenvalue {} + {}i: the evolution is oscillatorily unstable",
                    ev.re, ev.im
                )));
            }
            if ev.re < -UNSTABLE_NEG_REL_TOL * radius {
                return Err(Error::UnstableSpectrum(format!(
                    "negative eigenvalue {}: the evolution grows exponentially",
                    ev.re
                )));
            }
            let lam = if ev.re.abs() <= ZERO_MODE_REL_TOL * radius {
                0.0
            } else {
                ev.re.max(0.0)
            };
            if ev.im != 0.0 {
                // A conjugate pair within the noise threshold: its real and
                // imaginary parts still span the invariant plane, so they
                // serve as the two basis columns with the shared frequency.
                for i in 0..m {
                    basis[(i, j)] = s.vectors[(i, j)].re;
                    basis[(i, j + 1)] = s.vectors[(i, j)].im;
                }
                lambda[j] = lam;
                lambda[j + 1] = lam;
                j += 2;
            } else {
                for i in 0..m {
                    basis[(i, j)] = s.vectors[(i, j)].re;
                }
                lambda[j] = lam;
                j += 1;
            }
        }
        let lu = CheckedLu::new(&basis).map_err(|_| {
            Error::Defective("eigenbasis is numerically singular; cannot propagate".into())
        })?;
        Ok(SpectralPropagator { basis, lu, lambda })
    }

    /// u(t) = V diag(cos(√λ_j t)) V^{-1} u₀; each modal amplitude is
    /// |z_j(0) cos(√λ_j t)| ≤ |z_j(0)|, and the zero mode stays constant.
    fn evolve(&self, u0: &Displacement, cfg: &ChainConfig, times: &[f64]) -> TrajectoryResult {
        let u0_norm = l2_eps_norm(u0.values(), cfg);
        if u0_norm == 0.0 {
            return TrajectoryResult {
                times: times.to_vec(),
                norms: vec![0.0; times.len()],
                peak_ratio: 1.0,
                method: TrajectoryMethod::SpectralExact,
            };
        }
        let z0 = self.lu.solve(&DVector::from_column_slice(u0.values()));
        let omega: Vec<f64> = self.lambda.iter().map(|&l| l.sqrt()).collect();
        let mut norms = Vec::with_capacity(times.len());
        let mut peak = u0_norm;
        let mut z = DVector::zeros(z0.len());
        for &t in times {
            for j in 0..z0.len() {
                z[j] = z0[j] * (omega[j] * t).cos();
            }
            let u = &self.basis * &z;
            let norm = l2_eps_norm(u.as_slice(), cfg);
            peak = peak.max(norm);
            norms.push(norm);
        }
        TrajectoryResult {
            times: times.to_vec(),
            norms,
            peak_ratio: peak / u0_norm,
            method: TrajectoryMethod::SpectralExact,
        }
    }
}

/// Exact evolution through the eigenbasis, sampled at `times`.
///
/// Refuses to evolve when the eigenpair residuals fail certification or
/// when the spectrum has a complex or negative eigenvalue; those runs end
/// in an instability report naming the offending eigenvalue instead of a
/// trajectory.
pub fn evolve_spectral(
    u0: &Displacement,
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
    times: &[f64],
) -> Result<TrajectoryResult> {
    validate_times(times)?;
    let prop = SpectralPropagator::build(coeffs, cfg)?;
    Ok(prop.evolve(u0, cfg, times))
}

fn spectral_radius_estimate(matrix: &DMatrix<f64>) -> f64 {
    let m = matrix.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut x = DVector::from_iterator(m, (0..m).map(|_| rng.gen_range(-1.0..1.0f64)));
    let mut rayleigh = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let y = matrix * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        x = y / norm;
        rayleigh = (matrix * &x).dot(&x);
    }
    rayleigh.abs()
}

/// Largest step size the explicit integrator accepts: half the linear
/// stability limit 2/√λ_max of the stiffest mode.
pub fn leapfrog_step_limit(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> f64 {
    let rho = spectral_radius_estimate(&qcf_operator(coeffs, cfg).matrix);
    if rho > 0.0 {
        1.0 / rho.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Velocity-Verlet integration of ü = −P_U L u from rest, recording every
/// step. Agrees with [`evolve_spectral`] to second order in `dt`; each mode
/// follows the exact discrete recurrence z_n = z_0 cos(n ω̃ dt) with
/// cos(ω̃ dt) = 1 − λ dt²/2, so modal amplitudes do not drift.
pub fn evolve_leapfrog(
    u0: &Displacement,
    coeffs: &LinearizedCoefficients,
    cfg: &ChainConfig,
    dt: f64,
    steps: usize,
) -> Result<TrajectoryResult> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {dt}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let limit = leapfrog_step_limit(coeffs, cfg);
    if dt > limit {
        return Err(Error::InvalidArgument(format!(
            "step size {dt:.6e} exceeds the stability limit {limit:.6e} for this operator"
        )));
    }

    let op = qcf_operator(coeffs, cfg);
    let u0_norm = l2_eps_norm(u0.values(), cfg);
    let mut u = u0.values().to_vec();
    let mut v = vec![0.0; u.len()];
    let mut acc: Vec<f64> = op.apply(&u).iter().map(|x| -x).collect();

    let mut times = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    times.push(0.0);
    norms.push(u0_norm);
    let mut peak = u0_norm;
    for step in 1..=steps {
        for i in 0..u.len() {
            u[i] += dt * v[i] + 0.5 * dt * dt * acc[i];
        }
        let acc_next: Vec<f64> = op.apply(&u).iter().map(|x| -x).collect();
        for i in 0..u.len() {
            v[i] += 0.5 * dt * (acc[i] + acc_next[i]);
        }
        acc = acc_next;
        let norm = l2_eps_norm(&u, cfg);
        peak = peak.max(norm);
        times.push(step as f64 * dt);
        norms.push(norm);
    }
    let peak_ratio = if u0_norm == 0.0 { 1.0 } else { peak / u0_norm };
    Ok(TrajectoryResult {
        times,
        norms,
        peak_ratio,
        method: TrajectoryMethod::LeapfrogIntegrator,
    })
}

/// One chain size in the stability audit.
#[derive(Debug, Clone)]
pub struct AuditRow {
    pub n: usize,
    pub k: usize,
    /// Time horizon the trials were sampled over.
    pub horizon: f64,
    pub trials: usize,
    /// Largest peak ratio over the random trials; infinite when the
    /// spectrum was unstable and no trajectory exists.
    pub max_peak_ratio: f64,
    /// The analytic ceiling: the conditioning of the eigenbasis.
    pub conditioning_bound: f64,
    /// The instability report when the spectrum was complex or negative.
    pub instability: Option<String>,
}

/// Outcome of [`dynamical_stability_audit`].
#[derive(Debug, Clone)]
pub struct StabilityAudit {
    pub rows: Vec<AuditRow>,
    /// No row hit an unstable spectrum.
    pub all_stable: bool,
    /// Every sampled maximum stayed below its conditioning bound. Any
    /// finite audit samples the true supremum from below, so this is the
    /// checkable direction of the bound.
    pub within_conditioning_bounds: bool,
}

/// Random-trial audit of the dynamical-stability bound across chain sizes:
/// for each chain, `trials` random zero-mean initial states evolve exactly
/// over the horizon (default: two periods of the slowest nonzero mode,
/// 4π/√λ_min⁺) and the peak norm ratios are compared against the
/// eigenbasis conditioning. Unstable spectra are flagged per row rather
/// than aborting the audit.
pub fn dynamical_stability_audit(
    coeffs: &LinearizedCoefficients,
    cfgs: &[ChainConfig],
    horizon: Option<f64>,
    trials: usize,
    seed: u64,
) -> Result<StabilityAudit> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    if let Some(h) = horizon {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {h}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(cfgs.len());
    for (row_idx, cfg) in cfgs.iter().enumerate() {
        let conditioning_bound = match spectral::eigenvector_condition(coeffs, cfg) {
            Ok(c) => c,
            Err(_) => f64::INFINITY,
        };
        let prop = match SpectralPropagator::build(coeffs, cfg) {
            Ok(p) => p,
            Err(Error::UnstableSpectrum(msg)) => {
                rows.push(AuditRow {
                    n: cfg.n(),
                    k: cfg.k(),
                    horizon: horizon.unwrap_or(f64::NAN),
                    trials,
                    max_peak_ratio: f64::INFINITY,
                    conditioning_bound,
                    instability: Some(msg),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let lambda_min = prop
            .lambda
            .iter()
            .copied()
            .filter(|&l| l > 0.0)
            .fold(f64::INFINITY, f64::min);
        let row_horizon = horizon.unwrap_or_else(|| {
            if lambda_min.is_finite() {
                4.0 * std::f64::consts::PI / lambda_min.sqrt()
            } else {
                1.0
            }
        });
        let times = sample_times(row_horizon, AUDIT_SAMPLES);
        let trial_ids: Vec<u64> = (0..trials as u64).collect();
        let m = cfg.num_sites();
        let peaks = exec::map_cells(&trial_ids, |&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((row_idx as u64) << 32) | trial);
            let u0 = Displacement::new(
                (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                cfg,
            )
            .expect("finite random entries");
            prop.evolve(&u0, cfg, &times).peak_ratio
        });
        let max_peak_ratio = peaks.into_iter().fold(0.0f64, f64::max);
        rows.push(AuditRow {
            n: cfg.n(),
            k: cfg.k(),
            horizon: row_horizon,
            trials,
            max_peak_ratio,
            conditioning_bound,
            instability: None,
        });
    }
    let all_stable = rows.iter().all(|r| r.instability.is_none());
    let within_conditioning_bounds = all_stable
        && rows
            .iter()
            .all(|r| r.max_peak_ratio <= r.conditioning_bound * (1.0 + 1e-6));
    Ok(StabilityAudit { rows, all_stable, within_conditioning_bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::lp_norm;

    fn cfg(n: usize, k: usize) -> ChainConfig {
        ChainConfig::new(n, k, 1.0).unwrap()
    }

    fn random_u0(c: &ChainConfig, seed: u64) -> Displacement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Displacement::new(
            (0..c.num_sites()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            c,
        )
        .unwrap()
    }

    /// Real eigenpair (λ, v) of the coupled operator with λ ascending and
    /// index picked from the nonzero modes.
    fn real_mode(
        coeffs: &LinearizedCoefficients,
        c: &ChainConfig,
        index: usize,
    ) -> (f64, Displacement) {
        let s = spectral::eigendecompose(&qcf_operator(coeffs, c)).unwrap();
        assert!(s.max_imag() <= 1e-10);
        let lam = s.eigenvalues[index].re;
        let v: Vec<f64> = (0..c.num_sites()).map(|i| s.vectors[(i, index)].re).collect();
        (lam, Displacement::new(v, c).unwrap())
    }

    #[test]
    fn initial_time_returns_the_initial_state_norm() {
        let c = cfg(10, 4);
        let coeffs = LinearizedCoefficients::new(1.0, -0.1);
        let u0 = random_u0(&c, 1);
        let r = evolve_spectral(&u0, &coeffs, &c, &[0.0, 0.5]).unwrap();
        let n0 = lp_norm(u0.values(), 2.0, &c).unwrap();
        assert!((r.norms[0] - n0).abs() <= 1e-10 * n0);
        assert!(r.peak_ratio >= 1.0 - 1e-10);
        assert_eq!(r.method, TrajectoryMethod::SpectralExact);
    }

    #[test]
    fn single_mode_norm_follows_the_cosine_exactly() {
        let c = cfg(12, 4);
        let coeffs = LinearizedCoefficients::new(1.0, -0.15);
        let (lam, v) = real_mode(&coeffs, &c, 7);
        assert!(lam > 0.0);
        let times = sample_times(3.0, 40);
        let r = evolve_spectral(&v, &coeffs, &c, &times).unwrap();
        let v_norm = l2_eps_norm(v.values(), &c);
        for (t, norm) in times.iter().zip(&r.norms) {
            let expect = ((lam.sqrt() * t).cos()).abs() * v_norm;
            assert!(
                (norm - expect).abs() <= 1e-9 * v_norm,
                "t = {t}: {norm} vs {expect}"
            );
        }
    }

    #[test]
    fn unstable_coupling_is_reported_with_the_eigenvalue() {
        let c = cfg(16, 8);
        let coeffs = LinearizedCoefficients::new(1.0, -0.3);
        assert!(coeffs.a_f() < 0.0);
        let u0 = random_u0(&c, 3);
        match evolve_spectral(&u0, &coeffs, &c, &[0.0, 1.0]) {
            Err(Error::UnstableSpectrum(msg)) => {
                assert!(msg.contains("eigenvalue"), "report lacks the eigenvalue: {msg}");
            }
            other => panic!("expected an instability report, got {other:?}"),
        }
    }

    #[test]
    fn times_must_increase_strictly_from_nonnegative_start() {
        let c = cfg(8, 3);
        let coeffs = LinearizedCoefficients::new(1.0, 0.0);
        let u0 = random_u0(&c, 4);
        for bad in [&[][..], &[-1.0, 0.0][..], &[0.0, 0.0][..], &[1.0, 0.5][..]] {
            assert!(matches!(
                evolve_spectral(&u0, &coeffs, &c, bad),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn zero_initial_data_stays_identically_zero() {
        let c = cfg(10, 5);
        let coeffs = LinearizedCoefficients::new(1.0, -0.1);
        let u0 = Displacement::zeros(&c);
        let r = evolve_leapfrog(&u0, &coeffs, &c, 1e-3, 50).unwrap();
        assert!(r.norms.iter().all(|&x| x == 0.0));
        assert_eq!(r.peak_ratio, 1.0);
        assert_eq!(r.times.len(), 51);
        assert_eq!(r.method, TrajectoryMethod::LeapfrogIntegrator);
    }

    #[test]
    fn leapfrog_rejects_steps_beyond_the_stability_limit() {
        let c = cfg(12, 6);
        let coeffs = LinearizedCoefficients::new(1.0, -0.1);
        let u0 = random_u0(&c, 5);
        let limit = leapfrog_step_limit(&coeffs, &c);
        assert!(limit.is_finite() && limit > 0.0);
        assert!(matches!(
            evolve_leapfrog(&u0, &coeffs, &c, 2.0 * limit, 10),
            Err(Error::InvalidArgument(_))
        ));
        assert!(evolve_leapfrog(&u0, &coeffs, &c, 0.5 * limit, 10).is_ok());
    }

    #[test]
    fn leapfrog_single_mode_follows_the_discrete_recurrence() {
        // The integrator's modal recurrence is z_n = z_0 cos(n ω̃ dt) with
        // cos(ω̃ dt) = 1 − λ dt²/2: amplitudes must not drift over 10⁴
        // steps at a tenth of the step limit.
        let c = cfg(8, 3);
        let coeffs = LinearizedCoefficients::new(1.0, -0.15);
        let (lam, v) = real_mode(&coeffs, &c, 9);
        let dt = 0.1 * leapfrog_step_limit(&coeffs, &c);
        let steps = 10_000;
        let r = evolve_leapfrog(&v, &coeffs, &c, dt, steps).unwrap();
        let v_norm = l2_eps_norm(v.values(), &c);
        let omega_tilde = (1.0 - lam * dt * dt / 2.0).acos() / dt;
        for (i, norm) in r.norms.iter().enumerate() {
            let expect = (omega_tilde * i as f64 * dt).cos().abs() * v_norm;
            assert!(
                (norm - expect).abs() <= 1e-8 * v_norm,
                "step {i}: {norm} vs {expect}"
            );
        }
        assert!((r.peak_ratio - 1.0).abs() <= 1e-6, "amplitude drifted: {}", r.peak_ratio);
    }

    #[test]
    fn halving_the_step_quarters_the_leapfrog_error() {
        let c = cfg(8, 3);
        let coeffs = LinearizedCoefficients::new(1.0, -0.15);
        let (lam, v) = real_mode(&coeffs, &c, 8);
        let omega = lam.sqrt();
        // End at a quarter-phase point so the norm error is first order in
        // the accumulated phase error.
        let t_end = (2.0 * std::f64::consts::PI * 3.0 + std::f64::consts::FRAC_PI_4) / omega;
        let exact = evolve_spectral(&v, &coeffs, &c, &[t_end * 0.5, t_end]).unwrap();
        let mut errs = Vec::new();
        for steps in [400usize, 800] {
            let dt = t_end / steps as f64;
            let r = evolve_leapfrog(&v, &coeffs, &c, dt, steps).unwrap();
            errs.push((r.norms[steps] - exact.norms[1]).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (3.2..=4.8).contains(&ratio),
            "second-order convergence broken: errors {errs:?}, ratio {ratio}"
        );
    }

    #[test]
    fn methods_agree_on_the_norm_history() {
        let c = cfg(30, 15);
        let coeffs = LinearizedCoefficients::new(1.0, -0.2);
        let u0 = random_u0(&c, 8);
        let t_end = 10.0;
        let steps = 20_000;
        let dt = t_end / steps as f64;
        assert!(dt <= leapfrog_step_limit(&coeffs, &c));
        let lf = evolve_leapfrog(&u0, &coeffs, &c, dt, steps).unwrap();
        let stride = 500;
        let sample_idx: Vec<usize> = (1..=steps / stride).map(|i| i * stride).collect();
        let times: Vec<f64> = sample_idx.iter().map(|&i| lf.times[i]).collect();
        let sp = evolve_spectral(&u0, &coeffs, &c, &times).unwrap();
        let u0_norm = l2_eps_norm(u0.values(), &c);
        for (j, &i) in sample_idx.iter().enumerate() {
            let diff = (lf.norms[i] - sp.norms[j]).abs();
            assert!(
                diff <= 1e-3 * u0_norm,
                "t = {}: leapfrog {} vs spectral {}",
                times[j],
                lf.norms[i],
                sp.norms[j]
            );
        }
    }

    #[test]
    fn peak_ratio_is_capped_by_the_eigenbasis_conditioning() {
        let c = cfg(30, 15);
        let coeffs = LinearizedCoefficients::new(1.0, -0.2);
        let cond = spectral::eigenvector_condition(&coeffs, &c).unwrap();
        assert!((cond - 2.8049).abs() <= 0.05 * 2.8049);
        let times = sample_times(20.0, 400);
        for seed in 0..50 {
            let u0 = random_u0(&c, 100 + seed);
            let r = evolve_spectral(&u0, &coeffs, &c, &times).unwrap();
            assert!(
                r.peak_ratio <= cond * (1.0 + 1e-6),
                "seed {seed}: {} > {cond}",
                r.peak_ratio
            );
            assert!(r.peak_ratio >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn orthogonal_modes_keep_the_norm_flat() {
        let c = cfg(16, 8);
        let coeffs = LinearizedCoefficients::new(1.7, 0.0);
        let times = sample_times(8.0, 200);
        for seed in 0..10 {
            let u0 = random_u0(&c, 200 + seed);
            let r = evolve_spectral(&u0, &coeffs, &c, &times).unwrap();
            assert!(
                (r.peak_ratio - 1.0).abs() <= 1e-8,
                "seed {seed}: peak ratio {}",
                r.peak_ratio
            );
        }
    }

    #[test]
    fn audit_reports_bounded_maxima_on_a_stable_grid() {
        let coeffs = LinearizedCoefficients::new(1.0, -0.2);
        let cfgs = [cfg(8, 4), cfg(16, 8), cfg(24, 12)];
        let audit = dynamical_stability_audit(&coeffs, &cfgs, None, 5, 17).unwrap();
        assert!(audit.all_stable);
        assert!(audit.within_conditioning_bounds);
        for row in &audit.rows {
            assert!(row.instability.is_none());
            assert!(row.max_peak_ratio >= 1.0 - 1e-10);
            assert!(row.max_peak_ratio <= row.conditioning_bound * (1.0 + 1e-6));
            assert!(row.horizon > 0.0);
        }
    }

    #[test]
    fn audit_flags_the_unstable_coupling() {
        let coeffs = LinearizedCoefficients::new(1.0, -0.3);
        let cfgs = [cfg(8, 4)];
        let audit = dynamical_stability_audit(&coeffs, &cfgs, None, 3, 19).unwrap();
        assert!(!audit.all_stable);
        assert!(!audit.within_conditioning_bounds);
        let row = &audit.rows[0];
        assert!(row.instability.is_some());
        assert!(row.max_peak_ratio.is_infinite());
    }

    #[test]
    fn audit_without_second_neighbour_coupling_stays_at_unit_ratio() {
        let coeffs = LinearizedCoefficients::new(2.0, 0.0);
        let cfgs = [cfg(12, 6)];
        let audit = dynamical_stability_audit(&coeffs, &cfgs, None, 3, 23).unwrap();
        assert!(audit.rows[0].max_peak_ratio <= 1.0 + 1e-8);
    }

    #[test]
    fn trajectory_csv_has_one_row_per_sample() {
        let c = cfg(8, 4);
        let coeffs = LinearizedCoefficients::new(1.0, -0.1);
        let u0 = random_u0(&c, 31);
        let r = evolve_spectral(&u0, &coeffs, &c, &sample_times(1.0, 4)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,norm");
        assert_eq!(lines.len(), 1 + 5);
        assert!(lines[1].split(',').count() == 2);
    }
}
