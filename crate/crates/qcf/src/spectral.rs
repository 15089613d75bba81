//! Eigensolver front-end with residual certification, plus the two spectrum
//! studies built on it: the sorted-spectrum distance between the projected
//! force-coupling operator and the energy-based QNL hessian, and the
//! conditioning of the coupling operator's eigenbasis.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::ChainConfig;
use crate::evd;
use crate::exec;
use crate::forces::LinearizedCoefficients;
use crate::linalg::spectral_norm;
use crate::operators::{hessian_qnl, qcf_operator, LinearizedOperator};
use crate::{Error, Result};

/// A result is flagged degraded when any eigenpair residual exceeds this
/// multiple of ‖A‖₂.
pub const RESIDUAL_REL_TOL: f64 = 1e-8;

/// Imaginary parts returned for a symmetric input must stay below this
/// multiple of ‖A‖₂ (the symmetric path produces exact zeros).
pub const SYMMETRIC_IMAG_REL_TOL: f64 = 1e-10;

/// An eigenvalue counts as the translation zero mode when its modulus is
/// below this multiple of ‖A‖₂.
pub const ZERO_MODE_REL_TOL: f64 = 1e-10;

/// Eigenbasis condition numbers at or above this are treated as a failed
/// diagonalization rather than a huge-but-meaningful value.
pub const DEFECTIVE_COND_LIMIT: f64 = 1e12;

/// Certified dense eigendecomposition of a real square matrix.
///
/// Eigenvalues are sorted by (real part, imaginary part); the columns of
/// `vectors` follow the same order, have unit Euclidean norm, and are
/// phase-rotated so the largest-magnitude entry is real positive. Complex
/// eigenvalues of a real matrix come in conjugate pairs and stay adjacent.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    /// max_j ‖A v_j − λ_j v_j‖₂ over unit-norm columns.
    pub max_residual: f64,
    /// 2-norm condition number of the eigenvector matrix.
    pub cond2: f64,
    /// True when `max_residual` exceeds [`RESIDUAL_REL_TOL`]·‖A‖₂.
    pub degraded: bool,
}

impl SpectralResult {
    /// Real parts, in the stored (sorted) order.
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// Largest |Im λ| over the spectrum.
    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub fn eigendecompose(op: &LinearizedOperator) -> Result<SpectralResult> {
    eigendecompose_matrix(&op.matrix)
}

pub fn eigendecompose_matrix(a: &DMatrix<f64>) -> Result<SpectralResult> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidArgument("eigendecomposition needs a nonempty square matrix".into()));
    }
    if !a.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("matrix entries must be finite".into()));
    }

    let dec = evd::decompose(a)?;
    let a_norm = spectral_norm(a);

    // Pack the raw (re, im, real-storage vectors) into complex columns.
    let mut eigenvalues: Vec<Complex64> = dec
        .re
        .iter()
        .zip(&dec.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    {
        let mut j = 0;
        while j < n {
            if dec.im[j] == 0.0 {
                for i in 0..n {
                    vectors[(i, j)] = Complex64::new(dec.vectors[(i, j)], 0.0);
                }
                j += 1;
            } else {
                // Adjacent (Re, Im) storage for the conjugate pair.
                debug_assert!(dec.im[j] > 0.0 && dec.im[j + 1] < 0.0);
                for i in 0..n {
                    let re = dec.vectors[(i, j)];
                    let im = dec.vectors[(i, j + 1)];
                    vectors[(i, j)] = Complex64::new(re, im);
                    vectors[(i, j + 1)] = Complex64::new(re, -im);
                }
                j += 2;
            }
        }
    }

    for j in 0..n {
        normalize_column(&mut vectors, j);
    }

    // Residual per column, with an accept-if-better Rayleigh refinement of
    // the eigenvalue. All arithmetic stays real: A is real, so for
    // v = vr + i·vi and λ = α + i·β the residual splits into the two real
    // systems below, and the Rayleigh quotient v̄ᵀAv needs only Avr, Avi.
    let mut max_residual = 0.0f64;
    for j in 0..n {
        let (vr, vi) = split_column(&vectors, j);
        let avr = a * &vr;
        let avi = a * &vi;
        let lam = eigenvalues[j];
        let res_solver = residual(&avr, &avi, &vr, &vi, lam);
        let rayleigh = Complex64::new(
            vr.dot(&avr) + vi.dot(&avi),
            vr.dot(&avi) - vi.dot(&avr),
        );
        let res_rayleigh = residual(&avr, &avi, &vr, &vi, rayleigh);
        let res = if res_rayleigh < res_solver {
            eigenvalues[j] = rayleigh;
            res_rayleigh
        } else {
            res_solver
        };
        max_residual = max_residual.max(res);
    }

    // Sort by (re, im); conjugate pairs share re and differ by the sign of
    // im, so they stay adjacent.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        eigenvalues[p]
            .re
            .total_cmp(&eigenvalues[q].re)
            .then(eigenvalues[p].im.total_cmp(&eigenvalues[q].im))
    });
    let eigenvalues: Vec<Complex64> = order.iter().map(|&j| eigenvalues[j]).collect();
    let mut sorted = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    let vectors = sorted;

    let cond2 = condition_number(&vectors);
    let degraded = max_residual > RESIDUAL_REL_TOL * a_norm;

    Ok(SpectralResult { eigenvalues, vectors, max_residual, cond2, degraded })
}

/// Unit Euclidean norm, then a phase rotation making the largest-magnitude
/// entry real positive. For a real column this is the usual sign fix; for a
/// conjugate pair it commutes with conjugation, so pairing is preserved.
fn normalize_column(vectors: &mut DMatrix<Complex64>, j: usize) {
    let n = vectors.nrows();
    let norm = vectors.column(j).norm();
    if norm == 0.0 {
        return;
    }
    let mut k = 0;
    let mut best = 0.0;
    for i in 0..n {
        let mag = vectors[(i, j)].norm();
        if mag > best {
            best = mag;
            k = i;
        }
    }
    let pivot = vectors[(k, j)];
    let phase = pivot.conj() / pivot.norm();
    for i in 0..n {
        vectors[(i, j)] = vectors[(i, j)] * phase / norm;
    }
}

fn split_column(vectors: &DMatrix<Complex64>, j: usize) -> (DVector<f64>, DVector<f64>) {
    let n = vectors.nrows();
    let vr = DVector::from_fn(n, |i, _| vectors[(i, j)].re);
    let vi = DVector::from_fn(n, |i, _| vectors[(i, j)].im);
    (vr, vi)
}

fn residual(
    avr: &DVector<f64>,
    avi: &DVector<f64>,
    vr: &DVector<f64>,
    vi: &DVector<f64>,
    lam: Complex64,
) -> f64 {
    let rr = avr - (lam.re * vr - lam.im * vi);
    let ri = avi - (lam.re * vi + lam.im * vr);
    (rr.norm_squared() + ri.norm_squared()).sqrt()
}

fn condition_number(v: &DMatrix<Complex64>) -> f64 {
    let sv = v.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Unscaled ℓ² distance between the ascending real spectra of the projected
/// force-coupling operator and the QNL hessian. Both matrices go through the
/// same solver; with no second-neighbour coupling they are assembled
/// identically, so the distance is exactly zero.
pub fn spectrum_distance(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> Result<f64> {
    let op_qcf = qcf_operator(coeffs, cfg);
    let op_qnl = hessian_qnl(coeffs, cfg);
    let r_qcf = eigendecompose(&op_qcf)?;
    let r_qnl = eigendecompose(&op_qnl)?;

    let scale = spectral_norm(&op_qcf.matrix);
    if r_qcf.degraded || r_qnl.degraded {
        return Err(Error::Certification(format!(
            "eigenpair residuals too large for a trustworthy spectrum comparison \
             (coupling {:.3e}, energy-based {:.3e}, allowed {:.3e})",
            r_qcf.max_residual,
            r_qnl.max_residual,
            RESIDUAL_REL_TOL * scale,
        )));
    }
    let max_imag = r_qcf.max_imag();
    if max_imag > RESIDUAL_REL_TOL * scale {
        return Err(Error::Certification(format!(
            "coupling operator spectrum has imaginary parts up to {max_imag:.3e}, \
             beyond the certification tolerance {:.3e}",
            RESIDUAL_REL_TOL * scale,
        )));
    }

    let mut s_qcf = r_qcf.real_parts();
    let mut s_qnl = r_qnl.real_parts();
    s_qcf.sort_by(f64::total_cmp);
    s_qnl.sort_by(f64::total_cmp);
    let dist2: f64 = s_qcf
        .iter()
        .zip(&s_qnl)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(dist2.sqrt())
}

/// 2-norm condition number of the eigenbasis of the projected coupling
/// operator, with the translation mode replaced by its exact eigenvector
/// e/‖e‖ so a spurious near-singular direction cannot leak into the number.
pub fn eigenvector_condition(coeffs: &LinearizedCoefficients, cfg: &ChainConfig) -> Result<f64> {
    let op = qcf_operator(coeffs, cfg);
    let scale = spectral_norm(&op.matrix);
    let mut r = eigendecompose(&op)?;
    if r.degraded {
        return Err(Error::Defective(format!(
            "diagonalization failed: residual {:.3e} exceeds {:.3e}",
            r.max_residual,
            RESIDUAL_REL_TOL * scale,
        )));
    }

    let zero_tol = ZERO_MODE_REL_TOL * scale;
    let zero_modes: Vec<usize> = (0..r.eigenvalues.len())
        .filter(|&j| r.eigenvalues[j].norm() <= zero_tol)
        .collect();
    if zero_modes.len() != 1 {
        return Err(Error::Certification(format!(
            "expected exactly one translation zero mode, found {} within |λ| ≤ {zero_tol:.3e}",
            zero_modes.len(),
        )));
    }
    let j0 = zero_modes[0];
    let n = r.vectors.nrows();
    let unit = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    for i in 0..n {
        r.vectors[(i, j0)] = unit;
    }
    r.eigenvalues[j0] = Complex64::new(0.0, 0.0);

    let cond = condition_number(&r.vectors);
    if !cond.is_finite() || cond >= DEFECTIVE_COND_LIMIT {
        return Err(Error::Defective(format!(
            "diagonalization failed: eigenbasis condition number {cond:.3e}"
        )));
    }
    Ok(cond)
}

/// One output cell of a table sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub n: usize,
    pub k: usize,
    pub phi_f: f64,
    pub phi_2f: f64,
    pub value: f64,
    /// Previously published reference value for this grid point, if any.
    pub reference: Option<f64>,
    /// Wall-clock seconds spent on this cell (not part of any CSV output).
    pub seconds: f64,
}

fn sweep<F>(n_list: &[usize], phi_2f_list: &[f64], phi_f: f64, compute: F) -> Result<Vec<SweepCell>>
where
    F: Fn(&LinearizedCoefficients, &ChainConfig) -> Result<f64> + Sync + Send,
{
    let mut grid = Vec::new();
    for &n in n_list {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidArgument("table sweeps need even N ≥ 2 so that K = N/2".into()));
        }
        for &phi_2f in phi_2f_list {
            grid.push((n, phi_2f));
        }
    }
    let cells = exec::map_cells(&grid, |&(n, phi_2f)| -> Result<(f64, f64)> {
        let cfg = ChainConfig::new(n, n / 2, 1.0)?;
        let coeffs = LinearizedCoefficients::new(phi_f, phi_2f);
        let start = Instant::now();
        let value = compute(&coeffs, &cfg)?;
        Ok((value, start.elapsed().as_secs_f64()))
    });
    grid.iter()
        .zip(cells)
        .map(|(&(n, phi_2f), cell)| {
            let (value, seconds) = cell?;
            Ok(SweepCell { n, k: n / 2, phi_f, phi_2f, value, reference: None, seconds })
        })
        .collect()
}

/// Spectrum-distance sweep over the (N, φ''_{2F}) grid with K = N/2.
pub fn spectrum_distance_sweep(
    n_list: &[usize],
    phi_2f_list: &[f64],
    phi_f: f64,
) -> Result<Vec<SweepCell>> {
    let mut cells = sweep(n_list, phi_2f_list, phi_f, spectrum_distance)?;
    for cell in &mut cells {
        cell.reference = reference_spectrum_distance(cell.n, cell.phi_2f);
    }
    Ok(cells)
}

/// Eigenbasis-conditioning sweep over the (N, φ''_{2F}) grid with K = N/2.
pub fn condition_sweep(
    n_list: &[usize],
    phi_2f_list: &[f64],
    phi_f: f64,
) -> Result<Vec<SweepCell>> {
    let mut cells = sweep(n_list, phi_2f_list, phi_f, eigenvector_condition)?;
    for cell in &mut cells {
        cell.reference = reference_condition(cell.n, cell.phi_2f);
    }
    Ok(cells)
}

/// Previously published spectrum distances on the K = N/2, φ''_F = 1 grid.
const REFERENCE_SPECTRUM_DISTANCES: [(usize, [f64; 4]); 6] = [
    (50, [1.19e-10, 9.93e-11, 7.31e-11, 6.64e-11]),
    (100, [6.97e-10, 6.19e-10, 4.71e-10, 3.16e-10]),
    (150, [2.05e-9, 1.83e-9, 1.31e-9, 1.23e-9]),
    (200, [4.44e-9, 3.12e-9, 2.90e-9, 2.10e-9]),
    (250, [8.25e-9, 6.38e-9, 6.38e-9, 3.96e-9]),
    (300, [1.62e-8, 1.15e-8, 9.98e-9, 8.86e-9]),
];
const REFERENCE_DISTANCE_COLUMNS: [f64; 4] = [-0.1, -0.15, -0.2, -0.25];

/// Previously published eigenbasis condition numbers on the same grid.
const REFERENCE_CONDITIONS: [(usize, [f64; 5]); 6] = [
    (10, [1.00, 1.4563, 1.7607, 2.3770, 5.4398]),
    (30, [1.00, 1.5242, 1.9441, 2.8049, 6.2876]),
    (90, [1.00, 1.5794, 2.0537, 3.0726, 7.4324]),
    (270, [1.00, 1.6049, 2.1095, 3.1510, 8.2878]),
    (810, [1.00, 1.6136, 2.1191, 3.2021, 8.3863]),
    // The (2430, −0.15) entry breaks the column's monotone trend in the
    // published data and is kept verbatim, not treated as ground truth.
    (2430, [1.00, 1.6139, 3.7477, 3.2075, 8.5968]),
];
const REFERENCE_CONDITION_COLUMNS: [f64; 5] = [0.0, -0.1, -0.15, -0.2, -0.24];

fn lookup(
    rows: &[(usize, [f64; 4])],
    columns: &[f64; 4],
    n: usize,
    phi_2f: f64,
) -> Option<f64> {
    let row = rows.iter().find(|(rn, _)| *rn == n)?;
    let col = columns.iter().position(|&c| (c - phi_2f).abs() <= 1e-12)?;
    Some(row.1[col])
}

/// Published spectrum-distance value at the grid point, when the point is on
/// the published grid (K = N/2, φ''_F = 1 assumed). φ''_{2F} = 0 is on the
/// grid with value exactly zero.
pub fn reference_spectrum_distance(n: usize, phi_2f: f64) -> Option<f64> {
    if phi_2f == 0.0 && REFERENCE_SPECTRUM_DISTANCES.iter().any(|(rn, _)| *rn == n) {
        return Some(0.0);
    }
    lookup(&REFERENCE_SPECTRUM_DISTANCES, &REFERENCE_DISTANCE_COLUMNS, n, phi_2f)
}

/// Published eigenbasis condition number at the grid point, when the point
/// is on the published grid (K = N/2, φ''_F = 1 assumed).
pub fn reference_condition(n: usize, phi_2f: f64) -> Option<f64> {
    let row = REFERENCE_CONDITIONS.iter().find(|(rn, _)| *rn == n)?;
    let col = REFERENCE_CONDITION_COLUMNS
        .iter()
        .position(|&c| (c - phi_2f).abs() <= 1e-12)?;
    Some(row.1[col])
}
