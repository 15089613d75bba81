//! Dense eigendecomposition of real square matrices, ported from the
//! classical Algol/EISPACK routines: `tred2`/`tql2` for symmetric input
//! (orthogonal transforms throughout, so the returned basis is orthonormal
//! even across repeated eigenvalues) and `orthes`/`hqr2` (Householder
//! Hessenberg reduction plus Francis double-shift QR with eigenvector
//! back-substitution) for the general case.
//!
//! The symmetric branch is taken only on exact entrywise symmetry; the
//! assembly routines produce bit-symmetric matrices whenever the model is
//! self-adjoint, so no tolerance is involved.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Iteration cap per deflation step. The classical routines iterate
/// unboundedly; exceptional shifts fire at 10 and 30 iterations, so a clean
/// convergence failure is reported well after both had their chance.
const MAX_QR_ITER: usize = 100;
const MAX_TQL_ITER: usize = 100;

/// Raw eigendecomposition in the packed real storage of the classical
/// routines: eigenvalue `j` is `re[j] + i·im[j]`. For a complex conjugate
/// pair (`im[j] > 0`, `im[j+1] = -im[j]`) columns `j` and `j+1` of
/// `vectors` hold the real and imaginary parts of the eigenvector belonging
/// to eigenvalue `j`; real eigenvalues own their column outright.
pub(crate) struct Decomposition {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Diagnostic for tests: whether the tridiagonal path handled the input.
    #[allow(dead_code)]
    pub used_symmetric_path: bool,
}

pub(crate) fn decompose(a: &DMatrix<f64>) -> Result<Decomposition> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigendecomposition needs a square matrix");
    assert!(n > 0, "eigendecomposition needs a nonempty matrix");
    let symmetric = (0..n).all(|i| (0..i).all(|j| a[(i, j)] == a[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if symmetric {
        let mut v = a.clone();
        tred2(&mut v, &mut d, &mut e);
        tql2(&mut v, &mut d, &mut e)?;
        Ok(Decomposition { re: d, im: e, vectors: v, used_symmetric_path: true })
    } else {
        let mut h = a.clone();
        let mut v = DMatrix::zeros(n, n);
        orthes(&mut h, &mut v);
        hqr2(&mut h, &mut v, &mut d, &mut e)?;
        Ok(Decomposition { re: d, im: e, vectors: v, used_symmetric_path: false })
    }
}

/// Householder reduction of a symmetric matrix (stored in `v`) to
/// tridiagonal form: diagonal in `d`, subdiagonal in `e[1..]`, accumulated
/// orthogonal transforms left in `v`.
fn tred2(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = v.nrows();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let corr = f * e[k] + g * d[k];
                    v[(k, j)] -= corr;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let corr = g * d[k];
                    v[(k, j)] -= corr;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form from [`tred2`];
/// ascending eigenvalues in `d`, orthonormal eigenvectors in the columns of
/// `v`.
fn tql2(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.nrows();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        // e[n-1] = 0 guarantees the scan stops inside the array.
        while e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_TQL_ITER {
                    return Err(Error::QrNoConvergence { index: l });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Ascending selection sort, vectors carried along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                v.swap((j, i), (j, k));
            }
        }
    }
    Ok(())
}

/// Householder reduction of a general matrix (in `h`) to upper Hessenberg
/// form, accumulating the orthogonal similarity into `v`.
fn orthes(h: &mut DMatrix<f64>, v: &mut DMatrix<f64>) {
    let n = h.nrows();
    let low = 0usize;
    let high = n - 1;
    let mut ort = vec![0.0; n];

    for m in (low + 1)..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale != 0.0 {
            let mut hsum = 0.0;
            for i in (m..=high).rev() {
                ort[i] = h[(i, m - 1)] / scale;
                hsum += ort[i] * ort[i];
            }
            let mut g = hsum.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            hsum -= ort[m] * g;
            ort[m] -= g;

            // Apply the reflection from both sides.
            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * h[(i, j)];
                }
                f /= hsum;
                for i in m..=high {
                    h[(i, j)] -= f * ort[i];
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * h[(i, j)];
                }
                f /= hsum;
                for j in m..=high {
                    h[(i, j)] -= f * ort[j];
                }
            }
            ort[m] *= scale;
            h[(m, m - 1)] = scale * g;
        }
    }

    v.fill_with_identity();
    for m in ((low + 1)..high).rev() {
        if h[(m, m - 1)] != 0.0 {
            for i in (m + 1)..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[(i, j)];
                }
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    v[(i, j)] += g * ort[i];
                }
            }
        }
    }
}

/// Robust complex division `(xr + i·xi) / (yr + i·yi)`.
fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let den = yr + r * yi;
        ((xr + r * xi) / den, (xi - r * xr) / den)
    } else {
        let r = yr / yi;
        let den = yi + r * yr;
        ((r * xr + xi) / den, (r * xi - xr) / den)
    }
}

/// Francis double-shift QR on the Hessenberg matrix `h`, accumulating into
/// `v`, followed by back-substitution for the eigenvectors of the final
/// quasi-triangular form and back-transformation into the original basis.
fn hqr2(h: &mut DMatrix<f64>, v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let nn = h.nrows() as isize;
    let mut n = nn - 1;
    let low: isize = 0;
    let high: isize = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut t, mut w, mut x, mut y): (f64, f64, f64, f64);

    // 1-norm of the Hessenberg part, the scale for every deflation test.
    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += h[(i as usize, j as usize)].abs();
        }
    }

    let mut iter = 0usize;
    while n >= low {
        // Scan for a negligible subdiagonal entry.
        let mut l = n;
        while l > low {
            s = h[((l - 1) as usize, (l - 1) as usize)].abs()
                + h[(l as usize, l as usize)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l as usize, (l - 1) as usize)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One real root found.
            let un = n as usize;
            h[(un, un)] += exshift;
            d[un] = h[(un, un)];
            e[un] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // A trailing 2x2 block: real pair or complex conjugate pair.
            let un = n as usize;
            w = h[(un, un - 1)] * h[(un - 1, un)];
            p = (h[(un - 1, un - 1)] - h[(un, un)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(un, un)] += exshift;
            h[(un - 1, un - 1)] += exshift;
            x = h[(un, un)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[un - 1] = x + z;
                d[un] = d[un - 1];
                if z != 0.0 {
                    d[un] = x - w / z;
                }
                e[un - 1] = 0.0;
                e[un] = 0.0;
                x = h[(un, un - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (un - 1)..(nn as usize) {
                    z = h[(un - 1, j)];
                    h[(un - 1, j)] = q * z + p * h[(un, j)];
                    h[(un, j)] = q * h[(un, j)] - p * z;
                }
                for i in 0..=un {
                    z = h[(i, un - 1)];
                    h[(i, un - 1)] = q * z + p * h[(i, un)];
                    h[(i, un)] = q * h[(i, un)] - p * z;
                }
                for i in (low as usize)..=(high as usize) {
                    z = v[(i, un - 1)];
                    v[(i, un - 1)] = q * z + p * v[(i, un)];
                    v[(i, un)] = q * v[(i, un)] - p * z;
                }
            } else {
                d[un - 1] = x + p;
                d[un] = x + p;
                e[un - 1] = z;
                e[un] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form the double shift.
            let un = n as usize;
            x = h[(un, un)];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h[(un - 1, un - 1)];
                w = h[(un, un - 1)] * h[(un - 1, un)];
            }

            // Exceptional shifts against stagnation.
            if iter == 10 {
                exshift += x;
                for i in (low as usize)..=un {
                    h[(i, i)] -= x;
                }
                s = h[(un, un - 1)].abs() + h[(un - 1, un - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in (low as usize)..=un {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = 0.964;
                    w = 0.964;
                }
            }

            iter += 1;
            if iter > MAX_QR_ITER {
                return Err(Error::QrNoConvergence { index: un });
            }

            // Two consecutive small subdiagonals let the bulge start later.
            let mut m = n - 2;
            while m >= l {
                let um = m as usize;
                z = h[(um, um)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(um + 1, um)] + h[(um, um + 1)];
                q = h[(um + 1, um + 1)] - z - r - s;
                r = h[(um + 2, um + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(um, um - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (h[(um - 1, um - 1)].abs() + z.abs() + h[(um + 1, um + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                let ui = i as usize;
                h[(ui, ui - 2)] = 0.0;
                if i > m + 2 {
                    h[(ui, ui - 3)] = 0.0;
                }
            }

            // Double QR sweep chasing the bulge down rows l..n.
            for k in m..n {
                let uk = k as usize;
                let notlast = k != n - 1;
                if k != m {
                    p = h[(uk, uk - 1)];
                    q = h[(uk + 1, uk - 1)];
                    r = if notlast { h[(uk + 2, uk - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(uk, uk - 1)] = -s * x;
                    } else if l != m {
                        h[(uk, uk - 1)] = -h[(uk, uk - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in uk..(nn as usize) {
                        p = h[(uk, j)] + q * h[(uk + 1, j)];
                        if notlast {
                            p += r * h[(uk + 2, j)];
                            h[(uk + 2, j)] -= p * z;
                        }
                        h[(uk, j)] -= p * x;
                        h[(uk + 1, j)] -= p * y;
                    }

                    let top = n.min(k + 3) as usize;
                    for i in 0..=top {
                        p = x * h[(i, uk)] + y * h[(i, uk + 1)];
                        if notlast {
                            p += z * h[(i, uk + 2)];
                            h[(i, uk + 2)] -= p * r;
                        }
                        h[(i, uk)] -= p;
                        h[(i, uk + 1)] -= p * q;
                    }

                    for i in (low as usize)..=(high as usize) {
                        p = x * v[(i, uk)] + y * v[(i, uk + 1)];
                        if notlast {
                            p += z * v[(i, uk + 2)];
                            v[(i, uk + 2)] -= p * r;
                        }
                        v[(i, uk)] -= p;
                        v[(i, uk + 1)] -= p * q;
                    }
                }
            }
        }
    }

    if norm == 0.0 {
        return Ok(());
    }

    // Back-substitution: eigenvectors of the quasi-triangular form are built
    // into the upper part of h, column by column from the bottom.
    for bn in (0..nn).rev() {
        let ubn = bn as usize;
        p = d[ubn];
        q = e[ubn];
        if q == 0.0 {
            // Real eigenvector.
            let mut l = bn;
            h[(ubn, ubn)] = 1.0;
            for i in (0..bn).rev() {
                let ui = i as usize;
                w = h[(ui, ui)] - p;
                r = 0.0;
                for j in (l as usize)..=ubn {
                    r += h[(ui, j)] * h[(j, ubn)];
                }
                if e[ui] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[ui] == 0.0 {
                        if w != 0.0 {
                            h[(ui, ubn)] = -r / w;
                        } else {
                            h[(ui, ubn)] = -r / (eps * norm);
                        }
                    } else {
                        // One real equation coupled to the pair row below.
                        x = h[(ui, ui + 1)];
                        y = h[(ui + 1, ui)];
                        q = (d[ui] - p) * (d[ui] - p) + e[ui] * e[ui];
                        t = (x * s - z * r) / q;
                        h[(ui, ubn)] = t;
                        if x.abs() > z.abs() {
                            h[(ui + 1, ubn)] = (-r - w * t) / x;
                        } else {
                            h[(ui + 1, ubn)] = (-s - y * t) / z;
                        }
                    }
                    t = h[(ui, ubn)].abs();
                    if (eps * t) * t > 1.0 {
                        for j in ui..=ubn {
                            h[(j, ubn)] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // Complex eigenvector, stored as (real, imaginary) column pair.
            let mut l = bn - 1;
            if h[(ubn, ubn - 1)].abs() > h[(ubn - 1, ubn)].abs() {
                h[(ubn - 1, ubn - 1)] = q / h[(ubn, ubn - 1)];
                h[(ubn - 1, ubn)] = -(h[(ubn, ubn)] - p) / h[(ubn, ubn - 1)];
            } else {
                let (cr, ci) = cdiv(0.0, -h[(ubn - 1, ubn)], h[(ubn - 1, ubn - 1)] - p, q);
                h[(ubn - 1, ubn - 1)] = cr;
                h[(ubn - 1, ubn)] = ci;
            }
            h[(ubn, ubn - 1)] = 0.0;
            h[(ubn, ubn)] = 1.0;
            for i in (0..(bn - 1)).rev() {
                let ui = i as usize;
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in (l as usize)..=ubn {
                    ra += h[(ui, j)] * h[(j, ubn - 1)];
                    sa += h[(ui, j)] * h[(j, ubn)];
                }
                w = h[(ui, ui)] - p;
                if e[ui] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[ui] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h[(ui, ubn - 1)] = cr;
                        h[(ui, ubn)] = ci;
                    } else {
                        x = h[(ui, ui + 1)];
                        y = h[(ui + 1, ui)];
                        let mut vr = (d[ui] - p) * (d[ui] - p) + e[ui] * e[ui] - q * q;
                        let vi = (d[ui] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h[(ui, ubn - 1)] = cr;
                        h[(ui, ubn)] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h[(ui + 1, ubn - 1)] =
                                (-ra - w * h[(ui, ubn - 1)] + q * h[(ui, ubn)]) / x;
                            h[(ui + 1, ubn)] =
                                (-sa - w * h[(ui, ubn)] - q * h[(ui, ubn - 1)]) / x;
                        } else {
                            let (cr, ci) =
                                cdiv(-r - y * h[(ui, ubn - 1)], -s - y * h[(ui, ubn)], z, q);
                            h[(ui + 1, ubn - 1)] = cr;
                            h[(ui + 1, ubn)] = ci;
                        }
                    }
                    t = h[(ui, ubn - 1)].abs().max(h[(ui, ubn)].abs());
                    if (eps * t) * t > 1.0 {
                        for j in ui..=ubn {
                            h[(j, ubn - 1)] /= t;
                            h[(j, ubn)] /= t;
                        }
                    }
                }
            }
        }
    }

    // Back-transformation into the original basis.
    for j in ((low as usize)..(nn as usize)).rev() {
        for i in (low as usize)..=(high as usize) {
            let mut acc = 0.0;
            for k in (low as usize)..=j.min(high as usize) {
                acc += v[(i, k)] * h[(k, j)];
            }
            v[(i, j)] = acc;
        }
    }

    Ok(())
}
