use std::cmp::Ordering;

use super::eigen::hermitian_eigen;
use super::matrix::{inner, vec_norm, ComplexMatrix, C64};
use super::{MatError, GELFAND_MAX_K, GELFAND_WIDTH, HERMITIAN_TOL, HINT_TOL, PSD_TOL};
use crate::interval::{pow0, EnclosureMethod, Interval};

/// Hermitian matrix; the stored base is exactly Hermitian (symmetrized on
/// construction).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    base: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, MatError> {
        let defect = (&m - &m.adjoint()).frobenius_norm();
        let scale = m.frobenius_norm();
        if defect > HERMITIAN_TOL * scale {
            return Err(MatError::NotHermitian(if scale > 0.0 {
                defect / scale
            } else {
                defect
            }));
        }
        Ok(Self {
            base: m.hermitian_part(),
        })
    }

    /// Takes the Hermitian part of `m` without checking.
    pub(crate) fn symmetrize(m: &ComplexMatrix) -> Self {
        Self {
            base: m.hermitian_part(),
        }
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }
}

/// Eigendecomposition `m = V·diag(values)·V*`, values ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Rebuilds `V·diag(f(λ))·V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        reconstruct(&self.vectors, &self.values.iter().map(|&l| f(l)).collect::<Vec<_>>())
    }
}

pub fn eigh(m: &HermitianMatrix) -> Result<Eigh, MatError> {
    let (values, vectors) = hermitian_eigen(&m.base)?;
    Ok(Eigh { values, vectors })
}

fn reconstruct(v: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = v.n();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = C64::new(0.0, 0.0);
            for (k, &lam) in values.iter().enumerate() {
                if lam != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * lam;
                }
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
        out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
    }
    out
}

/// Positive semidefinite matrix carrying its eigendecomposition, so that
/// functional calculus never re-diagonalizes.
#[derive(Debug, Clone)]
pub struct PsdMatrix {
    base: HermitianMatrix,
    eig: Eigh,
    eigen_floor: f64,
}

impl PsdMatrix {
    /// Diagonalizes `h`; eigenvalues in `[−PSD_TOL·‖h‖, 0)` are clipped to 0,
    /// anything more negative is rejected.
    pub fn new(h: HermitianMatrix) -> Result<Self, MatError> {
        let e = eigh(&h)?;
        let scale = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if e.min() < -PSD_TOL * scale {
            return Err(MatError::NotPsd(e.min()));
        }
        Ok(Self::from_eigen_clipped(e))
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self, MatError> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Clips every negative eigenvalue to zero; caller guarantees positivity
    /// in exact arithmetic.
    fn from_eigen_clipped(mut e: Eigh) -> Self {
        for v in e.values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let base = HermitianMatrix {
            base: reconstruct(&e.vectors, &e.values),
        };
        let eigen_floor = e.values[0];
        Self {
            base,
            eig: e,
            eigen_floor,
        }
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.base.base
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn eigen(&self) -> &Eigh {
        &self.eig
    }

    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Largest eigenvalue, which is also the operator norm.
    pub fn norm(&self) -> f64 {
        self.eig.max()
    }

    pub fn trace(&self) -> f64 {
        self.eig.values.iter().sum()
    }

    /// `⟨a x, x⟩`, real and clamped at zero.
    pub fn form(&self, x: &[C64]) -> f64 {
        self.as_matrix().quad_form(x).re.max(0.0)
    }

    /// `p(a)` for a real polynomial with coefficients in increasing degree.
    pub fn poly(&self, coeffs: &[f64]) -> ComplexMatrix {
        self.eig.reconstruct_with(|l| eval_poly(coeffs, l))
    }
}

pub(crate) fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `|T| = (T*T)^{1/2}`.
pub fn abs_op(t: &ComplexMatrix) -> PsdMatrix {
    let gram = HermitianMatrix::symmetrize(&t.adjoint().matmul(t));
    let mut e = eigh(&gram).expect("Hermitian eigensolver failed on a Gram matrix");
    // Gram eigenvalues below the solver's resolution are zero singular values.
    let floor = 8.0 * t.n() as f64 * f64::EPSILON * e.max().max(0.0);
    for v in e.values.iter_mut() {
        *v = if *v <= floor { 0.0 } else { v.sqrt() };
    }
    PsdMatrix::from_eigen_clipped(e)
}

/// `a^e` through the eigendecomposition, with `0^0 = 1`.
pub fn frac_power(a: &PsdMatrix, e: f64) -> Result<PsdMatrix, MatError> {
    if e.is_nan() || e < 0.0 {
        return Err(MatError::NegativeExponent(e));
    }
    if e == 1.0 {
        return Ok(a.clone());
    }
    let values: Vec<f64> = a.eig.values.iter().map(|&l| pow0(l, e)).collect();
    let eig = Eigh {
        values,
        vectors: a.eig.vectors.clone(),
    };
    Ok(PsdMatrix::from_eigen_clipped(eig))
}

/// Largest singular value.
pub fn operator_norm(t: &ComplexMatrix) -> f64 {
    let gram = HermitianMatrix::symmetrize(&t.adjoint().matmul(t));
    let e = eigh(&gram).expect("Hermitian eigensolver failed on a Gram matrix");
    e.max().max(0.0).sqrt()
}

/// `‖ |A|·B − B*·|A| ‖`.
pub fn commutation_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, MatError> {
    if a.n() != b.n() {
        return Err(MatError::DimensionMismatch(a.n(), b.n()));
    }
    let abs_a = abs_op(a);
    let lhs = abs_a.as_matrix().matmul(b);
    let rhs = b.adjoint().matmul(abs_a.as_matrix());
    Ok(operator_norm(&(&lhs - &rhs)))
}

#[derive(Debug, Clone)]
pub struct PolarParts {
    pub u: ComplexMatrix,
    pub p: PsdMatrix,
}

/// `T = U|T|` with `U` unitary. On a singular `T` the partial isometry is
/// completed by pairing the kernel of `|T|` (ascending eigenvalue order)
/// with an orthonormal basis of `ker T*` drawn from the eigenvectors of
/// `TT*` in the same order.
pub fn polar_decompose(t: &ComplexMatrix) -> PolarParts {
    let n = t.n();
    let p = abs_op(t);
    let eig = p.eigen();
    let sigma_max = eig.max();
    let kernel_tol = 1e-13 * sigma_max.max(f64::MIN_POSITIVE) * (n as f64);

    // Right singular vectors in descending singular value order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.values[j]
            .partial_cmp(&eig.values[i])
            .unwrap_or(Ordering::Equal)
            .then_with(|| lex_cmp(&eig.vector(i), &eig.vector(j)))
    });

    let mut left: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut right: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut kernel_right: Vec<Vec<C64>> = Vec::new();
    for &k in &order {
        let v = eig.vector(k);
        let tv = t.apply(&v);
        let s = vec_norm(&tv);
        if s > kernel_tol {
            if let Some(u) = orthonormalize_against(&tv, &left) {
                left.push(u);
                right.push(v);
                continue;
            }
        }
        kernel_right.push(v);
    }
    // ker |T| in ascending eigenvalue order, ties broken lexicographically.
    kernel_right.reverse();
    if !kernel_right.is_empty() {
        let gram_star = HermitianMatrix::symmetrize(&t.matmul(&t.adjoint()));
        let e_star = eigh(&gram_star).expect("Hermitian eigensolver failed on a Gram matrix");
        let mut candidates: Vec<Vec<C64>> = (0..n).map(|k| e_star.vector(k)).collect();
        candidates.extend((0..n).map(|k| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[k] = C64::new(1.0, 0.0);
            e
        }));
        let mut completion = Vec::new();
        for c in candidates {
            if completion.len() == kernel_right.len() {
                break;
            }
            let mut basis = left.clone();
            basis.extend(completion.iter().cloned());
            if let Some(u) = orthonormalize_against(&c, &basis) {
                completion.push(u);
            }
        }
        for (u, v) in completion.into_iter().zip(kernel_right) {
            left.push(u);
            right.push(v);
        }
    }

    let mut u = ComplexMatrix::zeros(n);
    for (l, r) in left.iter().zip(&right) {
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += l[i] * r[j].conj();
            }
        }
    }
    PolarParts { u, p }
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.re.partial_cmp(&y.re).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

/// Two passes of Gram-Schmidt; `None` if less than half of the vector
/// survives the projection.
fn orthonormalize_against(x: &[C64], basis: &[Vec<C64>]) -> Option<Vec<C64>> {
    let n0 = vec_norm(x);
    if n0 == 0.0 {
        return None;
    }
    let mut y: Vec<C64> = x.iter().map(|&z| z / n0).collect();
    for _ in 0..2 {
        for b in basis {
            let c = inner(&y, b);
            for (yi, bi) in y.iter_mut().zip(b) {
                *yi -= c * bi;
            }
        }
    }
    let r = vec_norm(&y);
    if r < 0.5 {
        return None;
    }
    Some(y.into_iter().map(|z| z / r).collect())
}

/// `T̃ = |T|^{1/2} U |T|^{1/2}`.
pub fn aluthge(t: &ComplexMatrix) -> ComplexMatrix {
    let parts = polar_decompose(t);
    let half = frac_power(&parts.p, 0.5).expect("exponent is positive");
    half.as_matrix().matmul(&parts.u).matmul(half.as_matrix())
}

/// `b = Σ coeffs[k]·base^k`, as recorded by the pair generators.
#[derive(Debug, Clone)]
pub struct SpectralHint {
    pub base: PsdMatrix,
    pub coeffs: Vec<f64>,
}

/// Enclosure of `max |λ(b)|`.
///
/// Exact when `b` is normal (`r = ‖b‖`) or when a valid polynomial hint is
/// supplied; otherwise a Gelfand bracket: the upper end is
/// `min_k ‖b^{2^k}‖^{2^{-k}}` and the lower end is
/// `max_k (|tr b^{2^k}|/n)^{2^{-k}}`, both valid at every `k`.
pub fn spectral_radius(b: &ComplexMatrix, hint: Option<&SpectralHint>) -> Result<Interval, MatError> {
    let n = b.n();
    let norm_b = operator_norm(b);
    if let Some(h) = hint {
        if h.base.n() != n {
            return Err(MatError::DimensionMismatch(h.base.n(), n));
        }
        let hm = h.base.as_matrix();
        let scale = norm_b.max(1.0) * h.base.norm().max(1.0);
        let comm = operator_norm(&(&b.matmul(hm) - &hm.matmul(b)));
        let fit = operator_norm(&(b - &h.base.poly(&h.coeffs)));
        if comm <= HINT_TOL * scale && fit <= HINT_TOL * norm_b.max(1.0) {
            let r = h
                .base
                .eigen()
                .values
                .iter()
                .map(|&l| eval_poly(&h.coeffs, l).abs())
                .fold(0.0, f64::max);
            return Ok(Interval::around(r, 1e-12 * norm_b.max(1.0)).clamp_nonneg());
        }
    }
    if norm_b == 0.0 {
        return Ok(Interval::point(0.0));
    }
    let normality = operator_norm(&(&b.matmul(&b.adjoint()) - &b.adjoint().matmul(b)));
    if normality <= 1e-14 * (n as f64) * norm_b * norm_b {
        return Ok(Interval::around(norm_b, 1e-12 * norm_b.max(1.0)).clamp_nonneg());
    }

    let target = GELFAND_WIDTH * norm_b.max(1.0);
    let mut upper = norm_b;
    let mut lower = b.trace().norm() / n as f64;
    // b^{2^k} = m · exp(log_scale)
    let mut m = b.clone();
    let mut log_scale = 0.0f64;
    for k in 1..=GELFAND_MAX_K {
        m = m.matmul(&m);
        log_scale *= 2.0;
        let c = m.max_abs();
        if c == 0.0 {
            upper = 0.0;
            lower = 0.0;
            break;
        }
        m = m.scale_real(1.0 / c);
        log_scale += c.ln();
        let power = 2f64.powi(k as i32);
        let nrm = operator_norm(&m);
        upper = upper.min(((nrm.ln() + log_scale) / power).exp());
        let tr = m.trace().norm();
        if tr > 0.0 {
            lower = lower.max(((tr.ln() + log_scale - (n as f64).ln()) / power).exp());
        }
        if upper - lower <= target {
            break;
        }
    }
    let lower = lower.min(upper);
    let iv = Interval::new(lower, upper, EnclosureMethod::Gelfand);
    if upper - lower <= target {
        Ok(iv)
    } else {
        Err(MatError::GelfandNoConvergence(iv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::test_support::{random_hermitian, random_matrix, random_psd};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn j2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        operator_norm(&(a - b)) <= tol
    }

    #[test]
    fn eigh_diagonal_and_identity() {
        let e = eigh(&HermitianMatrix::new(ComplexMatrix::diag_real(&[3.0, 1.0])).unwrap()).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        // eigenvectors are the swapped basis columns, up to phase
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
        let e = eigh(&HermitianMatrix::new(ComplexMatrix::identity(4)).unwrap()).unwrap();
        assert!(e.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        for seed in 0..20 {
            let n = 2 + (seed as usize % 7);
            let h = random_hermitian(n, seed);
            let e = eigh(&HermitianMatrix::new(h.clone()).unwrap()).unwrap();
            let rec = e.reconstruct_with(|l| l);
            let scale = operator_norm(&h).max(1.0);
            assert!(close(&rec, &h, 1e-10 * scale), "seed {seed}");
            let vtv = e.vectors.adjoint().matmul(&e.vectors);
            assert!(close(&vtv, &ComplexMatrix::identity(n), 1e-10));
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        assert!(matches!(HermitianMatrix::new(j2()), Err(MatError::NotHermitian(_))));
    }

    #[test]
    fn abs_of_shift_and_identity() {
        let a = abs_op(&j2());
        assert!(close(a.as_matrix(), &ComplexMatrix::diag_real(&[0.0, 1.0]), 1e-15));
        let a = abs_op(&ComplexMatrix::identity(3));
        assert!(close(a.as_matrix(), &ComplexMatrix::identity(3), 1e-15));
    }

    #[test]
    fn abs_squares_to_gram() {
        for seed in 0..10 {
            let t = random_matrix(4, seed);
            let a = abs_op(&t);
            let sq = a.as_matrix().matmul(a.as_matrix());
            let gram = t.adjoint().matmul(&t);
            let nt = operator_norm(&t);
            assert!(close(&sq, &gram, 1e-9 * nt.powi(2).max(1.0)));
        }
    }

    #[test]
    fn frac_power_conventions() {
        let a = PsdMatrix::from_matrix(ComplexMatrix::diag_real(&[0.0, 1.0])).unwrap();
        let z = frac_power(&a, 0.0).unwrap();
        assert!(close(z.as_matrix(), &ComplexMatrix::identity(2), 1e-15));
        let a = PsdMatrix::from_matrix(ComplexMatrix::diag_real(&[4.0, 9.0])).unwrap();
        let h = frac_power(&a, 0.5).unwrap();
        assert!(close(h.as_matrix(), &ComplexMatrix::diag_real(&[2.0, 3.0]), 1e-14));
        assert!(matches!(frac_power(&a, -0.5), Err(MatError::NegativeExponent(_))));
    }

    #[test]
    fn frac_power_two_is_square() {
        for seed in 0..10 {
            let a = random_psd(5, seed);
            let sq = frac_power(&a, 2.0).unwrap();
            let direct = a.as_matrix().matmul(a.as_matrix());
            assert!(close(sq.as_matrix(), &direct, 1e-10 * a.norm().powi(2).max(1.0)));
        }
    }

    #[test]
    fn psd_clipping_and_rejection() {
        let tiny = ComplexMatrix::diag_real(&[-1e-13, 1.0]);
        let p = PsdMatrix::from_matrix(tiny).unwrap();
        assert_eq!(p.eigen_floor(), 0.0);
        let bad = ComplexMatrix::diag_real(&[-1e-3, 1.0]);
        assert!(matches!(PsdMatrix::from_matrix(bad), Err(MatError::NotPsd(_))));
    }

    #[test]
    fn polar_identity_and_shift() {
        let p = polar_decompose(&ComplexMatrix::identity(3));
        assert!(close(&p.u, &ComplexMatrix::identity(3), 1e-14));
        assert!(close(p.p.as_matrix(), &ComplexMatrix::identity(3), 1e-14));

        let t = j2();
        let p = polar_decompose(&t);
        assert!(close(p.p.as_matrix(), &ComplexMatrix::diag_real(&[0.0, 1.0]), 1e-15));
        assert!(close(&p.u.matmul(p.p.as_matrix()), &t, 1e-14));
        assert!(close(&p.u.adjoint().matmul(&p.u), &ComplexMatrix::identity(2), 1e-14));
    }

    #[test]
    fn polar_invertible_matches_inverse_formula() {
        for seed in 0..10 {
            let t = random_matrix(4, 100 + seed);
            let parts = polar_decompose(&t);
            // t = u p  =>  u = t p^{-1}
            let p_inv = parts.p.eigen().reconstruct_with(|l| 1.0 / l);
            let u2 = t.matmul(&p_inv);
            assert!(close(&u2.adjoint().matmul(&u2), &ComplexMatrix::identity(4), 1e-9));
            assert!(close(&u2, &parts.u, 1e-8));
        }
    }

    #[test]
    fn aluthge_examples() {
        let t = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(close(&aluthge(&t), &t, 1e-14));
        assert!(aluthge(&j2()).max_abs() < 1e-15);
        for seed in 0..10 {
            let t = random_matrix(5, 200 + seed);
            assert!(operator_norm(&aluthge(&t)) <= operator_norm(&t) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(5)) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&j2()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_radius_examples() {
        let d = ComplexMatrix::diag_real(&[2.0, -3.0]);
        let r = spectral_radius(&d, None).unwrap();
        assert!(r.contains(3.0) && r.width() < 1e-10);

        let r = spectral_radius(&j2(), None).unwrap();
        assert!(r.contains(0.0));

        let base = PsdMatrix::from_matrix(ComplexMatrix::diag_real(&[0.0, 1.0, 2.0])).unwrap();
        let coeffs = vec![-1.0, 0.0, 1.0];
        let b = base.poly(&coeffs);
        let hint = SpectralHint { base, coeffs };
        let r = spectral_radius(&b, Some(&hint)).unwrap();
        assert_eq!(r.method, EnclosureMethod::ExactFormula);
        assert!(r.contains(3.0) && r.width() < 1e-10);
    }

    #[test]
    fn spectral_radius_gelfand_brackets_non_normal() {
        // upper triangular: eigenvalues 2 and 0.5, large off-diagonal
        let b = ComplexMatrix::from_real_rows(&[&[2.0, 5.0], &[0.0, 0.5]]).unwrap();
        let r = match spectral_radius(&b, None) {
            Ok(r) => r,
            Err(MatError::GelfandNoConvergence(r)) => r,
            Err(e) => panic!("{e}"),
        };
        assert!(r.contains(2.0), "{r:?}");
        assert_eq!(r.method, EnclosureMethod::Gelfand);
    }

    #[test]
    fn commutation_defect_examples() {
        let a = random_matrix(4, 7);
        assert!(commutation_defect(&a, &ComplexMatrix::identity(4)).unwrap() < 1e-12);
        let abs_a = abs_op(&a);
        let b = abs_a.poly(&[0.5, -1.0, 0.25]);
        assert!(commutation_defect(&a, &b).unwrap() < 1e-12 * operator_norm(&b).max(1.0) * 10.0);
        let r = random_matrix(4, 8);
        assert!(commutation_defect(&a, &r).unwrap() > 1e-3);
        assert!(matches!(
            commutation_defect(&a, &ComplexMatrix::identity(3)),
            Err(MatError::DimensionMismatch(4, 3))
        ));
    }
}
