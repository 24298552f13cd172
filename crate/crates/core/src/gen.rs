//! Seeded matrix, vector and parameter generators.
//!
//! Every output is a pure function of its spec: the random stream is a
//! ChaCha20 generator keyed by `(seed, family, dim)` with the draw index
//! selecting the stream, so concurrent draws never share state.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{self, ExponentParams, Variant};
use crate::matcore::{abs_op, hermitian_eigen, normalized, ComplexMatrix, C64};

pub const MAX_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Ginibre,
    Gue,
    HaarUnitary,
    Normal,
    NilpotentShift,
    RankOne,
    ReidPair,
    FgPair,
    #[serde(rename = "PARAM_2X2")]
    Param2x2,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Ginibre,
        Family::Gue,
        Family::HaarUnitary,
        Family::Normal,
        Family::NilpotentShift,
        Family::RankOne,
        Family::ReidPair,
        Family::FgPair,
        Family::Param2x2,
    ];

    fn tag(self) -> u64 {
        self as u64 + 1
    }

    pub fn supports_dim(self, dim: usize) -> bool {
        match self {
            Family::Param2x2 => dim == 2,
            _ => (1..=MAX_DIM).contains(&dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub family: Family,
    pub dim: usize,
    pub seed: u64,
    #[serde(default)]
    pub draw: u64,
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

impl GeneratorSpec {
    pub fn new(family: Family, dim: usize, seed: u64) -> Self {
        Self {
            family,
            dim,
            seed,
            draw: 0,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_draw(mut self, draw: u64) -> Self {
        self.draw = draw;
        self
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenError {
    #[error("dimension {dim} out of range for family {family:?}")]
    DimensionOutOfRange { family: Family, dim: usize },
}

/// Which PSD matrix `b` is a polynomial of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolyBase {
    /// `b = q(a)` with `a` itself PSD.
    A,
    /// `b = q(|a|)`.
    AbsA,
}

/// `(A, B)` pair with `B = Σ poly[k]·base^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub poly: Vec<f64>,
    pub poly_base: PolyBase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// The operator `T`; for pair families this is `A`.
    pub t: ComplexMatrix,
    pub pair: Option<MatrixPair>,
    /// Family parameters actually used (drawn or supplied).
    pub extra: BTreeMap<String, f64>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn stream(seed: u64, tag: u64, dim: u64, draw: u64) -> ChaCha20Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ tag) ^ dim);
    let mut rng = ChaCha20Rng::seed_from_u64(key);
    rng.set_stream(draw);
    rng
}

fn gaussian_c(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn ginibre(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    for z in m.as_mut_slice() {
        *z = gaussian_c(rng);
    }
    m
}

fn gue(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ginibre(rng, n).hermitian_part()
}

/// Q factor of a Ginibre matrix by modified Gram-Schmidt with one
/// reorthogonalization pass. The diagonal of R is positive, which makes Q
/// Haar distributed.
fn haar(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n);
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| g.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
                for i in 0..n {
                    let delta = cols[k][i] * proj;
                    cols[j][i] -= delta;
                }
            }
        }
        cols[j] = normalized(&cols[j]).expect("Gaussian columns are almost surely independent");
    }
    ComplexMatrix::from_fn(n, |i, j| cols[j][i])
}

fn poly_of(base: &ComplexMatrix, coeffs: &[f64]) -> ComplexMatrix {
    let n = base.n();
    let mut acc = ComplexMatrix::identity(n).scale_real(*coeffs.last().unwrap_or(&0.0));
    for &c in coeffs.iter().rev().skip(1) {
        acc = &acc.matmul(base) + &ComplexMatrix::identity(n).scale_real(c);
    }
    acc.hermitian_part()
}

fn cubic(rng: &mut impl Rng, extra: &BTreeMap<String, f64>) -> Vec<f64> {
    (0..4)
        .map(|k| {
            let key = format!("c{k}");
            let drawn: f64 = rng.sample(StandardNormal);
            extra.get(&key).copied().unwrap_or(drawn)
        })
        .collect()
}

pub fn sample(spec: &GeneratorSpec) -> Result<Sample, GenError> {
    let n = spec.dim;
    if !spec.family.supports_dim(n) {
        return Err(GenError::DimensionOutOfRange {
            family: spec.family,
            dim: n,
        });
    }
    let mut rng = stream(spec.seed, spec.family.tag(), n as u64, spec.draw);
    let mut extra = BTreeMap::new();
    let single = |t| Sample {
        t,
        pair: None,
        extra: BTreeMap::new(),
    };
    let out = match spec.family {
        Family::Ginibre => single(ginibre(&mut rng, n)),
        Family::Gue => single(gue(&mut rng, n)),
        Family::HaarUnitary => single(haar(&mut rng, n)),
        Family::Normal => {
            let u = haar(&mut rng, n);
            let z: Vec<C64> = (0..n).map(|_| gaussian_c(&mut rng)).collect();
            single(u.matmul(&ComplexMatrix::diag(&z)).matmul(&u.adjoint()))
        }
        Family::NilpotentShift => single(ComplexMatrix::from_fn(n, |i, j| {
            if j == i + 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })),
        Family::RankOne => {
            let u: Vec<C64> = (0..n).map(|_| gaussian_c(&mut rng)).collect();
            let v: Vec<C64> = (0..n).map(|_| gaussian_c(&mut rng)).collect();
            single(ComplexMatrix::from_fn(n, |i, j| u[i] * v[j].conj()))
        }
        Family::ReidPair => {
            let h = gue(&mut rng, n);
            let (vals, _) = hermitian_eigen(&h).expect("Hermitian eigensolver failed");
            let (lo, hi) = (vals[0], vals[n - 1]);
            let span = if hi > lo { hi - lo } else { 1.0 };
            let a = ComplexMatrix::from_fn(n, |i, j| {
                let shift = if i == j { lo } else { 0.0 };
                (h[(i, j)] - shift) / span
            })
            .hermitian_part();
            let poly = cubic(&mut rng, &spec.extra);
            let b = poly_of(&a, &poly);
            for (k, c) in poly.iter().enumerate() {
                extra.insert(format!("c{k}"), *c);
            }
            Sample {
                t: a.clone(),
                pair: Some(MatrixPair {
                    a,
                    b,
                    poly,
                    poly_base: PolyBase::A,
                }),
                extra: BTreeMap::new(),
            }
        }
        Family::FgPair => {
            let a = ginibre(&mut rng, n);
            let abs_a = abs_op(&a);
            let poly = cubic(&mut rng, &spec.extra);
            let b = poly_of(abs_a.as_matrix(), &poly);
            for (k, c) in poly.iter().enumerate() {
                extra.insert(format!("c{k}"), *c);
            }
            Sample {
                t: a.clone(),
                pair: Some(MatrixPair {
                    a,
                    b,
                    poly,
                    poly_base: PolyBase::AbsA,
                }),
                extra: BTreeMap::new(),
            }
        }
        Family::Param2x2 => {
            let form = spec
                .extra
                .get("form")
                .map(|f| f.round() as u64)
                .unwrap_or(spec.draw % 3);
            let mut get = |key: &str, rng: &mut ChaCha20Rng, lo: f64, hi: f64| {
                let drawn = rng.random_range(lo..hi);
                let v = spec.extra.get(key).copied().unwrap_or(drawn);
                extra.insert(key.to_string(), v);
                v
            };
            let t = get("t", &mut rng, 0.25, 4.0);
            let a = get("a", &mut rng, -2.0, 2.0);
            let b = get("b", &mut rng, -2.0, 2.0);
            let c = get("c", &mut rng, -2.0, 2.0);
            extra.insert("form".into(), form as f64);
            let rows: [[f64; 2]; 2] = match form {
                0 => [[0.0, t], [0.0, 0.0]],
                1 => [[a, b], [0.0, c]],
                _ => [[t, 0.0], [0.0, t]],
            };
            single(ComplexMatrix::from_real_rows(&[&rows[0], &rows[1]]).expect("2x2 rows"))
        }
    };
    Ok(Sample {
        extra: if extra.is_empty() { out.extra } else { extra },
        ..out
    })
}

/// Complex Gaussian vector scaled to unit norm.
pub fn sample_unit_vector(dim: usize, seed: u64) -> Vec<C64> {
    sample_unit_vector_stream(dim, seed, 0)
}

pub fn sample_unit_vector_stream(dim: usize, seed: u64, draw: u64) -> Vec<C64> {
    assert!(dim >= 1, "vector dimension must be positive");
    let mut rng = stream(seed, 0x5645_4354, dim as u64, draw);
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian_c(&mut rng)).collect();
        if let Some(x) = normalized(&v) {
            return x;
        }
    }
}

/// Raw draws from which every record's parameters are derived, so that
/// records evaluated on the same sample share matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamDraw {
    pub base: ExponentParams,
    pub unit: f64,
    pub unit_pair: (f64, f64),
    pub m_int: f64,
}

pub fn draw_params(seed: u64) -> ParamDraw {
    let mut rng = stream(seed, 0x5041_5241_4d53, 0, 0);
    let pair_sum_ge_one = |rng: &mut ChaCha20Rng, hi: f64| loop {
        let x = rng.random_range(0.0..=hi);
        let y = rng.random_range(0.0..=hi);
        if x + y >= 1.0 {
            return (x, y);
        }
    };
    let (alpha, beta) = pair_sum_ge_one(&mut rng, 2.0);
    let (gamma, delta) = pair_sum_ge_one(&mut rng, 2.0);
    let m = rng.random_range(1.0..=3.0);
    let r = rng.random_range(1.0..=3.0);
    let s = rng.random_range(1.0..=3.0);
    let p = rng.random_range(1.1..=4.0);
    let unit = rng.random_range(0.0..=1.0);
    let unit_pair = pair_sum_ge_one(&mut rng, 1.0);
    let m_int = rng.random_range(1..=4) as f64;
    let base = ExponentParams {
        alpha,
        beta,
        gamma,
        delta,
        m,
        r,
        s,
        ..ExponentParams::default()
    }
    .with_p(p);
    ParamDraw {
        base,
        unit,
        unit_pair,
        m_int,
    }
}

/// Parameters for the record named by `key` (`ID` or `ID/VARIANT`), always
/// satisfying that record's hypothesis. Unknown keys get the shared base
/// draw.
pub fn sample_params(seed: u64, key: &str) -> ExponentParams {
    let draw = draw_params(seed);
    let (id, variant) = match key.split_once('/') {
        Some((id, v)) => (id, v.parse::<Variant>().ok()),
        None => (key, None),
    };
    match catalog::find(id, variant.unwrap_or(Variant::Corrected)) {
        Some(rec) => rec.params_from(&draw),
        None => draw.base,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{operator_norm, vec_norm, PsdMatrix};

    #[test]
    fn nilpotent_shift() {
        let s = sample(&GeneratorSpec::new(Family::NilpotentShift, 2, 0)).unwrap();
        assert_eq!(
            s.t,
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
        );
    }

    #[test]
    fn determinism_and_stream_separation() {
        for fam in Family::ALL {
            let dim = if fam == Family::Param2x2 { 2 } else { 4 };
            let spec = GeneratorSpec::new(fam, dim, 42).with_draw(3);
            assert_eq!(sample(&spec).unwrap(), sample(&spec).unwrap());
        }
        let a = sample(&GeneratorSpec::new(Family::Ginibre, 3, 1)).unwrap().t;
        let b = sample(&GeneratorSpec::new(Family::Ginibre, 3, 1).with_draw(1)).unwrap().t;
        assert_ne!(a, b);
    }

    #[test]
    fn dimension_range() {
        assert!(sample(&GeneratorSpec::new(Family::Ginibre, 0, 0)).is_err());
        assert!(sample(&GeneratorSpec::new(Family::Ginibre, 257, 0)).is_err());
        assert!(sample(&GeneratorSpec::new(Family::Param2x2, 3, 0)).is_err());
    }

    #[test]
    fn haar_is_unitary() {
        for seed in 0..20 {
            let u = sample(&GeneratorSpec::new(Family::HaarUnitary, 6, seed)).unwrap().t;
            let defect = operator_norm(&(&u.adjoint().matmul(&u) - &ComplexMatrix::identity(6)));
            assert!(defect <= 1e-12, "{defect}");
        }
    }

    #[test]
    fn pairs_satisfy_hypotheses() {
        for seed in 0..20 {
            let s = sample(&GeneratorSpec::new(Family::ReidPair, 5, seed)).unwrap();
            let p = s.pair.unwrap();
            assert!(PsdMatrix::from_matrix(p.a.clone()).is_ok());
            let ab = p.a.matmul(&p.b);
            assert!(operator_norm(&(&ab - &ab.adjoint())) <= 1e-10);

            let s = sample(&GeneratorSpec::new(Family::FgPair, 5, seed)).unwrap();
            let p = s.pair.unwrap();
            let d = crate::matcore::commutation_defect(&p.a, &p.b).unwrap();
            assert!(d <= 1e-8 * operator_norm(&p.b).max(1.0), "{d}");
        }
    }

    #[test]
    fn param_family_forms() {
        let mut spec = GeneratorSpec::new(Family::Param2x2, 2, 0);
        spec.extra.insert("form".into(), 2.0);
        spec.extra.insert("t".into(), 3.0);
        let s = sample(&spec).unwrap();
        assert_eq!(s.t, ComplexMatrix::identity(2).scale_real(3.0));
        assert_eq!(s.extra["t"], 3.0);
    }

    #[test]
    fn unit_vectors() {
        let x = sample_unit_vector(1, 9);
        assert!((x[0].norm() - 1.0).abs() < 1e-15);
        let y = sample_unit_vector(7, 9);
        assert!((vec_norm(&y) - 1.0).abs() < 1e-15);
        assert_eq!(y, sample_unit_vector(7, 9));
    }

    #[test]
    fn unit_vector_mean_form_is_normalized_trace() {
        let a = crate::gen::test_support::random_hermitian(3, 4);
        let draws = 100_000;
        let vals: Vec<f64> = (0..draws)
            .map(|k| a.quad_form(&sample_unit_vector_stream(3, 11, k)).re)
            .collect();
        let mean = vals.iter().sum::<f64>() / draws as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let target = a.trace().re / 3.0;
        assert!((mean - target).abs() <= 3.0 * (var / draws as f64).sqrt());
    }

    #[test]
    fn params_respect_constraints() {
        for seed in 0..200 {
            let p = sample_params(seed, "THM2_4_2_5");
            assert!(p.alpha + p.beta >= 1.0 && p.alpha >= 0.0 && p.beta >= 0.0);
            assert!(p.conjugate_ok());
            assert!((p.r0 - (1.0 / p.p).min(1.0 / p.q)).abs() < 1e-15);
            assert!((1.0..=3.0).contains(&p.m) && (1.0..=3.0).contains(&p.r));
            let q = sample_params(seed, "THM2_15_2_15");
            assert!(q.gamma + q.delta >= 1.0);
        }
    }
}
