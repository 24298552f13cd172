use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MatError;

pub type C64 = Complex64;

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data; rejects non-square shapes and
    /// non-finite entries.
    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self, MatError> {
        if n == 0 || data.len() != n * n {
            return Err(MatError::Shape {
                rows: if n == 0 { 0 } else { data.len() / n.max(1) },
                cols: n,
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatError::NonFinite);
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, MatError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(MatError::Shape {
                    rows: n,
                    cols: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::from_vec(n, data)
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch in matmul");
        let n = self.n;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let orow = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { n, data: out }
    }

    /// `self * x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .fold(C64::new(0.0, 0.0), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `⟨A x, x⟩ = x* A x`.
    pub fn quad_form(&self, x: &[C64]) -> C64 {
        inner(&self.apply(x), x)
    }

    /// `⟨A x, y⟩ = y* A x`.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        inner(&self.apply(x), y)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5)
    }

    /// Principal submatrix with row/column `k` removed.
    pub fn remove_index(&self, k: usize) -> Option<Self> {
        if self.n <= 1 || k >= self.n {
            return None;
        }
        let keep: Vec<usize> = (0..self.n).filter(|&i| i != k).collect();
        Some(Self::from_fn(keep.len(), |i, j| self[(keep[i], keep[j])]))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.data[i * self.n + j]).collect()
    }

    pub fn to_json_repr(&self) -> MatrixJson {
        let n = self.n;
        MatrixJson {
            n,
            re: (0..n)
                .map(|i| (0..n).map(|j| self[(i, j)].re).collect())
                .collect(),
            im: (0..n)
                .map(|i| (0..n).map(|j| self[(i, j)].im).collect())
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in add");
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in sub");
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})[", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Matrix file format: `{"n": int, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = MatError;

    fn try_from(m: MatrixJson) -> Result<Self, MatError> {
        let n = m.n;
        if n == 0 || m.re.len() != n || m.im.len() != n {
            return Err(MatError::Shape {
                rows: m.re.len(),
                cols: n,
            });
        }
        let mut data = Vec::with_capacity(n * n);
        for (r, i) in m.re.iter().zip(&m.im) {
            if r.len() != n || i.len() != n {
                return Err(MatError::Shape {
                    rows: n,
                    cols: r.len().max(i.len()),
                });
            }
            data.extend(r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)));
        }
        ComplexMatrix::from_vec(n, data)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json_repr().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(m).map_err(serde::de::Error::custom)
    }
}

/// Complex vector in `{"re": [..], "im": [..]}` form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_slice(x: &[C64]) -> Self {
        Self {
            re: x.iter().map(|z| z.re).collect(),
            im: x.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vec(&self) -> Result<Vec<C64>, MatError> {
        if self.re.len() != self.im.len() || self.re.is_empty() {
            return Err(MatError::Shape {
                rows: self.re.len(),
                cols: self.im.len(),
            });
        }
        let v: Vec<C64> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&a, &b)| C64::new(a, b))
            .collect();
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatError::NonFinite);
        }
        Ok(v)
    }
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`, linear in the first slot.
#[inline]
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter()
        .zip(y)
        .fold(C64::new(0.0, 0.0), |acc, (&a, &b)| acc + a * b.conj())
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Returns `x / ‖x‖`, or `None` for a zero vector.
pub fn normalized(x: &[C64]) -> Option<Vec<C64>> {
    let nrm = vec_norm(x);
    if nrm == 0.0 || !nrm.is_finite() {
        return None;
    }
    Some(x.iter().map(|&z| z / nrm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn adjoint_of_shift() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(j.adjoint(), expected);
        assert_eq!(ComplexMatrix::identity(2).adjoint(), ComplexMatrix::identity(2));
    }

    #[test]
    fn adjoint_conjugates() {
        let m = ComplexMatrix::from_vec(2, vec![c(1.0, 2.0), c(3.0, -1.0), c(0.0, 1.0), c(2.0, 0.0)])
            .unwrap();
        let a = m.adjoint();
        assert_eq!(a[(0, 1)], c(0.0, -1.0));
        assert_eq!(a[(1, 0)], c(3.0, 1.0));
        assert_eq!(a[(0, 0)], c(1.0, -2.0));
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(ComplexMatrix::from_vec(2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::from_vec(0, vec![]).is_err());
        assert!(matches!(
            ComplexMatrix::from_vec(1, vec![c(f64::NAN, 0.0)]),
            Err(MatError::NonFinite)
        ));
    }

    #[test]
    fn json_format_roundtrip() {
        let text = r#"{"n":2,"re":[[1,2],[3,4]],"im":[[0,-1],[0.5,0]]}"#;
        let m: ComplexMatrix = serde_json::from_str(text).unwrap();
        assert_eq!(m[(0, 1)], c(2.0, -1.0));
        assert_eq!(m[(1, 0)], c(3.0, 0.5));
        let back = serde_json::to_string(&m).unwrap();
        let again: ComplexMatrix = serde_json::from_str(&back).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn json_requires_both_arrays() {
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"n":1,"re":[[1]]}"#).is_err());
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"n":2,"re":[[1]],"im":[[0]]}"#).is_err());
    }

    #[test]
    fn quad_form_matches_definition() {
        let m = ComplexMatrix::from_vec(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let x = vec![c(0.6, 0.0), c(0.0, 0.8)];
        // x* M x computed by hand
        let mx = m.apply(&x);
        let expected = x[0].conj() * mx[0] + x[1].conj() * mx[1];
        assert!((m.quad_form(&x) - expected).norm() < 1e-15);
    }

    #[test]
    fn principal_submatrix() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]])
            .unwrap();
        let s = m.remove_index(1).unwrap();
        assert_eq!(s, ComplexMatrix::from_real_rows(&[&[1.0, 3.0], &[7.0, 9.0]]).unwrap());
        assert!(ComplexMatrix::identity(1).remove_index(0).is_none());
    }
}
