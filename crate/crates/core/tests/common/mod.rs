#![allow(dead_code)]

use opineq::matcore::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn gaussian_psd(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, rng);
    g.adjoint().matmul(&g).scale_real(1.0 / n as f64)
}

/// Unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, rng);
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for j in 0..n {
        let mut v: Vec<C64> = (0..n).map(|i| g[(i, j)]).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= d * ci;
                }
            }
        }
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / nv).collect());
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

pub fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / nv).collect()
}

/// Eigenvalues (ascending) of a Hermitian matrix by cyclic Jacobi on its
/// real 2n×2n embedding; every eigenvalue appears twice there.
pub fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.n();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            a[i][j] = z.re;
            a[i + n][j + n] = z.re;
            a[i][j + n] = -z.im;
            a[i + n][j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev.iter().step_by(2).copied().collect()
}

pub fn oracle_norm(t: &ComplexMatrix) -> f64 {
    let g = t.adjoint().matmul(t);
    jacobi_eigenvalues(&g).last().copied().unwrap().max(0.0).sqrt()
}

/// Lower estimate of `w(T)` from `angles` equally spaced support lines.
pub fn oracle_radius(t: &ComplexMatrix, angles: usize) -> f64 {
    (0..angles)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / angles as f64;
            let rot = t.scale(C64::from_polar(1.0, th));
            let h = rot.hermitian_part();
            *jacobi_eigenvalues(&h).last().unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn shift() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
