//! Dense kernels for the small Hermitian n x n matrices attached to every
//! grid node. Dimensions 1 and 2 get closed forms since they dominate the
//! hot loops; the general path goes through LU / a real symmetric embedding.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Determinant of a Hermitian matrix (row-major, n x n). The result of a
/// Hermitian determinant is real; the imaginary part is dropped.
pub fn herm_det(a: &[Complex64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        1 => a[0].re,
        2 => a[0].re * a[3].re - a[1].norm_sqr(),
        3 => {
            let (a11, a12, a13) = (a[0].re, a[1], a[2]);
            let (a22, a23) = (a[4].re, a[5]);
            let a33 = a[8].re;
            a11 * a22 * a33 - a11 * a23.norm_sqr() - a33 * a12.norm_sqr()
                - a22 * a13.norm_sqr()
                + 2.0 * (a12 * a23 * a13.conj()).re
        }
        _ => lu_det(a, n),
    }
}

fn lu_det(a: &[Complex64], n: usize) -> f64 {
    let mut lu = a.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = lu[row * n + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                lu.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = lu[col * n + col];
        det *= p;
        for row in col + 1..n {
            let factor = lu[row * n + col] / p;
            for k in col..n {
                let sub = factor * lu[col * n + k];
                lu[row * n + k] -= sub;
            }
        }
    }
    det.re
}

/// Inverse of a Hermitian positive definite matrix, written into `out`.
/// Panics in debug builds if the matrix is singular to working precision.
pub fn herm_inverse(a: &[Complex64], n: usize, out: &mut [Complex64]) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(out.len(), n * n);
    match n {
        1 => {
            out[0] = Complex64::new(1.0 / a[0].re, 0.0);
        }
        2 => {
            let det = a[0].re * a[3].re - a[1].norm_sqr();
            let inv = 1.0 / det;
            out[0] = Complex64::new(a[3].re * inv, 0.0);
            out[3] = Complex64::new(a[0].re * inv, 0.0);
            out[1] = -a[1] * inv;
            out[2] = out[1].conj();
        }
        _ => gauss_jordan_inverse(a, n, out),
    }
}

fn gauss_jordan_inverse(a: &[Complex64], n: usize, out: &mut [Complex64]) {
    let mut work = a.to_vec();
    for (i, v) in out.iter_mut().enumerate() {
        *v = if i / n == i % n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    for col in 0..n {
        let mut pivot = col;
        let mut best = work[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = work[row * n + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        assert!(best > 0.0, "singular matrix in herm_inverse");
        if pivot != col {
            for k in 0..n {
                work.swap(col * n + k, pivot * n + k);
                out.swap(col * n + k, pivot * n + k);
            }
        }
        let p = work[col * n + col];
        for k in 0..n {
            work[col * n + k] /= p;
            out[col * n + k] /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row * n + col];
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..n {
                let wsub = factor * work[col * n + k];
                work[row * n + k] -= wsub;
                let osub = factor * out[col * n + k];
                out[row * n + k] -= osub;
            }
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn herm_min_eig(a: &[Complex64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        1 => a[0].re,
        2 => {
            let mid = 0.5 * (a[0].re + a[3].re);
            let dif = 0.5 * (a[0].re - a[3].re);
            mid - (dif * dif + a[1].norm_sqr()).sqrt()
        }
        _ => embedded_eigs(a, n).0,
    }
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn herm_max_eig(a: &[Complex64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        1 => a[0].re,
        2 => {
            let mid = 0.5 * (a[0].re + a[3].re);
            let dif = 0.5 * (a[0].re - a[3].re);
            mid + (dif * dif + a[1].norm_sqr()).sqrt()
        }
        _ => embedded_eigs(a, n).1,
    }
}

/// (min, max) eigenvalues via the real symmetric 2n x 2n embedding
/// [[Re, -Im], [Im, Re]], which doubles multiplicities but preserves the
/// spectrum.
fn embedded_eigs(a: &[Complex64], n: usize) -> (f64, f64) {
    let mut emb = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = a[r * n + c];
            emb[(r, c)] = z.re;
            emb[(r, c + n)] = -z.im;
            emb[(r + n, c)] = z.im;
            emb[(r + n, c + n)] = z.re;
        }
    }
    let eigs = emb.symmetric_eigen().eigenvalues;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &e in eigs.iter() {
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (lo, hi)
}

/// Hermitian deviation max_{jk} |a_jk - conj(a_kj)|.
pub fn herm_defect(a: &[Complex64], n: usize) -> f64 {
    let mut worst = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((a[r * n + c] - a[c * n + r].conj()).norm());
        }
    }
    worst
}

/// tr(W * H) for Hermitian W, H; real by symmetry.
#[inline]
pub fn herm_trace_product(w: &[Complex64], h: &[Complex64], n: usize) -> f64 {
    match n {
        1 => w[0].re * h[0].re,
        2 => {
            w[0].re * h[0].re + w[3].re * h[3].re + 2.0 * (w[1] * h[1].conj()).re
        }
        _ => {
            let mut acc = 0.0;
            for j in 0..n {
                acc += w[j * n + j].re * h[j * n + j].re;
                for k in j + 1..n {
                    acc += 2.0 * (w[j * n + k] * h[j * n + k].conj()).re;
                }
            }
            acc
        }
    }
}
