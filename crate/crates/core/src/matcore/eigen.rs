//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iterations.

use super::matrix::{ComplexMatrix, C64};
use super::MatError;

const MAX_QL_ITER: usize = 64;

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// ascending order and a unitary matrix whose columns are the matching
/// eigenvectors.
pub(crate) fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), MatError> {
    let n = a.n();
    if n == 1 {
        return Ok((vec![a[(0, 0)].re], ComplexMatrix::identity(1)));
    }
    let mut h = a.clone();
    // q accumulates the Householder reflections; stored row-major.
    let mut q = ComplexMatrix::identity(n);
    let mut d = vec![0.0; n];
    let mut e = vec![C64::new(0.0, 0.0); n];

    for k in 0..n.saturating_sub(2) {
        // x = h[k+1.., k]
        let mut sigma = 0.0;
        for i in k + 1..n {
            sigma += h[(i, k)].norm_sqr();
        }
        let norm_x = sigma.sqrt();
        let x0 = h[(k + 1, k)];
        if norm_x == 0.0 {
            e[k] = C64::new(0.0, 0.0);
            continue;
        }
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        // v = x - alpha e1, normalized
        let m = n - k - 1;
        let mut v = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            v[i] = h[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            e[k] = h[(k + 1, k)];
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // w = A22 v
        let mut w = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                acc += h[(k + 1 + i, k + 1 + j)] * v[j];
            }
            w[i] = acc;
        }
        // kk = v* w (real for Hermitian A22)
        let kk: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        for i in 0..m {
            w[i] -= v[i] * kk;
        }
        // A22 <- A22 - 2 (v w* + w v*)
        for i in 0..m {
            for j in 0..m {
                let upd = (v[i] * w[j].conj() + w[i] * v[j].conj()) * 2.0;
                h[(k + 1 + i, k + 1 + j)] -= upd;
            }
        }
        h[(k + 1, k)] = alpha;
        h[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
            h[(k, i)] = C64::new(0.0, 0.0);
        }
        e[k] = alpha;
        // Q <- Q H, H = I - 2 v v* acting on indices k+1..n
        for r in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                acc += q[(r, k + 1 + j)] * v[j];
            }
            acc *= 2.0;
            for j in 0..m {
                let t = acc * v[j].conj();
                q[(r, k + 1 + j)] -= t;
            }
        }
    }
    for i in 0..n {
        d[i] = h[(i, i)].re;
    }
    e[n - 2] = h[(n - 1, n - 2)];
    e[n - 1] = C64::new(0.0, 0.0);

    // Diagonal phase scaling makes the off-diagonal real and nonnegative.
    let mut off = vec![0.0; n];
    let mut phi = vec![C64::new(1.0, 0.0); n];
    for k in 0..n - 1 {
        let mag = e[k].norm();
        off[k] = mag;
        phi[k + 1] = if mag > 0.0 { phi[k] * (e[k] / mag) } else { phi[k] };
    }
    for r in 0..n {
        for c in 0..n {
            let z = q[(r, c)] * phi[c];
            q[(r, c)] = z;
        }
    }

    tridiagonal_ql(&mut d, &mut off, &mut q)?;
    Ok((d, q))
}

/// Implicit QL on the symmetric tridiagonal (d, e) with e[i] coupling i and
/// i+1. Rotations are accumulated into the columns of `v`. Output sorted
/// ascending.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], v: &mut ComplexMatrix) -> Result<(), MatError> {
    let n = d.len();
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(MatError::NoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                let mut i = m;
                while i > l {
                    i -= 1;
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[(k, i + 1)];
                        let vk = v[(k, i)];
                        v[(k, i + 1)] = vk * s + hk * c;
                        v[(k, i)] = vk * c - hk * s;
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

    for i in 0..n - 1 {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                let t = v[(r, i)];
                v[(r, i)] = v[(r, k)];
                v[(r, k)] = t;
            }
        }
    }
    Ok(())
}
