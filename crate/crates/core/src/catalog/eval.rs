use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::registry::{find, known_id, FormClass, Kind, Record, Variant};
use super::ExponentParams;
use crate::gen::{MatrixPair, PolyBase};
use crate::interval::{pow0, Interval};
use crate::matcore::{
    abs_op, aluthge, commutation_defect, frac_power, hermitian_eigen, operator_norm,
    spectral_radius, vec_norm, ComplexMatrix, MatError, MatrixJson, PsdMatrix, SpectralHint,
    VectorJson, C64,
};
use crate::radius::{numerical_radius, RadiusError};
use crate::sphereopt::{
    inf_form_diff, inf_power_diff_with, inf_sq_form_diff, FormPair, InfOptions, SphereError,
};

/// Relative tolerance used by verdicts on operator and vector rows.
pub const VERDICT_REL: f64 = 1e-9;
/// Relative tolerance used by verdicts on scalar rows.
pub const SCALAR_VERDICT_REL: f64 = 1e-12;
/// Relative `|slack|` below which a result counts as an equality witness.
pub const EQUALITY_REL: f64 = 1e-8;
/// Gate on `‖ |A|B − B*|A| ‖` relative to `max(1, ‖A‖‖B‖)`.
pub const COMMUTATION_GATE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown inequality id '{0}'")]
    UnknownId(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl From<MatError> for CatalogError {
    fn from(e: MatError) -> Self {
        CatalogError::Numeric(e.to_string())
    }
}

impl From<SphereError> for CatalogError {
    fn from(e: SphereError) -> Self {
        CatalogError::Numeric(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// Supporting data attached to a result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultWitness {
    /// For two-sided rows, the side whose slack is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_side: Option<String>,
    /// Minimizers of the correction infima, in order of appearance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<VectorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ExponentParams>,
}

mod pair {
    use crate::interval::{EnclosureMethod, Interval};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(iv: &Interval, s: S) -> Result<S::Ok, S::Error> {
        [iv.lo, iv.hi].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Interval, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(d)?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(serde::de::Error::custom("invalid interval"));
        }
        Ok(Interval::new(lo, hi, EnclosureMethod::ExactFormula))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqResult {
    pub id: String,
    pub variant: Variant,
    #[serde(with = "pair")]
    pub lhs: Interval,
    #[serde(with = "pair")]
    pub rhs: Interval,
    pub slack: f64,
    pub verdict: Verdict,
    pub witness: Option<ResultWitness>,
}

impl IneqResult {
    /// `|slack| ≤ 1e−8·max(1, |rhs.hi|)`.
    pub fn is_equality(&self) -> bool {
        self.slack.abs() <= EQUALITY_REL * self.rhs.hi.abs().max(1.0)
    }
}

pub fn verdict_of(lhs: &Interval, rhs: &Interval, tol: f64) -> Verdict {
    if lhs.lo > rhs.hi + tol {
        Verdict::Violated
    } else if lhs.hi <= rhs.lo + tol {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}

/// Everything a record may consume besides its parameters.
#[derive(Debug, Clone)]
pub struct EvalInput {
    pub t: ComplexMatrix,
    pub s: Option<ComplexMatrix>,
    pub pair: Option<MatrixPair>,
    pub x: Option<Vec<C64>>,
    pub y: Option<Vec<C64>>,
    pub scalars: Option<(f64, f64)>,
}

impl EvalInput {
    pub fn new(t: ComplexMatrix) -> Self {
        Self {
            t,
            s: None,
            pair: None,
            x: None,
            y: None,
            scalars: None,
        }
    }

    pub fn with_second(mut self, s: ComplexMatrix) -> Self {
        self.s = Some(s);
        self
    }

    pub fn with_pair(mut self, pair: MatrixPair) -> Self {
        self.pair = Some(pair);
        self
    }

    pub fn with_vectors(mut self, x: Vec<C64>, y: Vec<C64>) -> Self {
        self.x = Some(x);
        self.y = Some(y);
        self
    }

    pub fn with_scalars(mut self, a: f64, b: f64) -> Self {
        self.scalars = Some((a, b));
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Numerical radius width relative to `max(1, ‖M‖)`.
    pub radius_rel: f64,
    pub inf: InfOptions,
    /// Retry once with 100× tighter widths on an inconclusive verdict.
    pub retry: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            radius_rel: 1e-8,
            inf: InfOptions::default(),
            retry: true,
        }
    }
}

impl EvalOptions {
    pub fn tightened(&self) -> Self {
        Self {
            radius_rel: self.radius_rel / 100.0,
            inf: InfOptions {
                width_target: self.inf.width_target / 100.0,
                max_angles: self.inf.max_angles * 2,
                ..self.inf
            },
            retry: false,
        }
    }
}

/// Rounding allowance for a quantity computed by a dense kernel.
fn computed(v: f64, n: usize, scale: f64) -> Interval {
    let r = 64.0 * n as f64 * f64::EPSILON * scale.abs().max(v.abs());
    Interval::around(v, r)
}

struct OpData {
    t: ComplexMatrix,
    abs: PsdMatrix,
    abs_star: PsdMatrix,
    norm: f64,
    powers: RefCell<HashMap<(bool, u64), Rc<PsdMatrix>>>,
}

impl OpData {
    fn new(t: &ComplexMatrix) -> Self {
        let abs = abs_op(t);
        let abs_star = abs_op(&t.adjoint());
        Self {
            t: t.clone(),
            norm: abs.norm(),
            abs,
            abs_star,
            powers: RefCell::new(HashMap::new()),
        }
    }

    /// `|T|^e` (`star = false`) or `|T*|^e`.
    fn pow(&self, star: bool, e: f64) -> Rc<PsdMatrix> {
        let key = (star, e.to_bits());
        if let Some(p) = self.powers.borrow().get(&key) {
            return p.clone();
        }
        let base = if star { &self.abs_star } else { &self.abs };
        let p = Rc::new(frac_power(base, e.max(0.0)).expect("exponent is nonnegative"));
        self.powers.borrow_mut().insert(key, p.clone());
        p
    }

    /// `T|T|^k`.
    fn composite(&self, k: f64) -> ComplexMatrix {
        if k == 0.0 {
            self.t.clone()
        } else {
            self.t.matmul(self.pow(false, k).as_matrix())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum WKey {
    Plain,
    Square,
    Aluthge,
    Composite(u64),
    Sum(u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum InfKind {
    Power(u64, u64),
    Linear,
}

type InfKey = (usize, u64, u64, InfKind);

/// Evaluation state for one input, shared by all records evaluated on it so
/// that `|T|` powers, numerical radii and sphere infima are computed once.
pub struct EvalContext<'a> {
    input: &'a EvalInput,
    opts: EvalOptions,
    ops: [OnceCell<OpData>; 2],
    radii: RefCell<HashMap<WKey, Interval>>,
    infima: RefCell<HashMap<InfKey, (Interval, Vec<C64>)>>,
}

impl<'a> EvalContext<'a> {
    pub fn new(input: &'a EvalInput, opts: EvalOptions) -> Self {
        Self {
            input,
            opts,
            ops: [OnceCell::new(), OnceCell::new()],
            radii: RefCell::new(HashMap::new()),
            infima: RefCell::new(HashMap::new()),
        }
    }

    pub fn input(&self) -> &EvalInput {
        self.input
    }

    fn op(&self, i: usize) -> Result<&OpData, CatalogError> {
        if i == 0 {
            return Ok(self.ops[0].get_or_init(|| OpData::new(&self.input.t)));
        }
        let s = self
            .input
            .s
            .as_ref()
            .ok_or(CatalogError::MissingInput("second operator S"))?;
        if s.n() != self.input.t.n() {
            return Err(CatalogError::HypothesisViolated(format!(
                "S has dimension {} but T has {}",
                s.n(),
                self.input.t.n()
            )));
        }
        Ok(self.ops[1].get_or_init(|| OpData::new(s)))
    }

    fn n(&self) -> usize {
        self.input.t.n()
    }

    fn radius_of(&self, key: WKey, make: impl FnOnce() -> Result<ComplexMatrix, CatalogError>) -> Result<Interval, CatalogError> {
        if let Some(iv) = self.radii.borrow().get(&key) {
            return Ok(*iv);
        }
        let m = make()?;
        let target = self.opts.radius_rel * operator_norm(&m).max(1.0);
        let iv = match numerical_radius(&m, target) {
            Ok(iv) | Err(RadiusError::WidthNotReached(iv)) => iv,
            Err(e) => return Err(CatalogError::Numeric(e.to_string())),
        };
        self.radii.borrow_mut().insert(key, iv);
        Ok(iv)
    }

    fn w_plain(&self) -> Result<Interval, CatalogError> {
        self.radius_of(WKey::Plain, || Ok(self.input.t.clone()))
    }

    fn w_composite(&self, k: f64) -> Result<Interval, CatalogError> {
        let op = self.op(0)?;
        self.radius_of(WKey::Composite(k.to_bits()), || Ok(op.composite(k)))
    }

    fn norm_t(&self) -> Result<Interval, CatalogError> {
        let op = self.op(0)?;
        Ok(computed(op.norm, self.n(), op.norm))
    }

    /// `‖Σ c_i P_i‖` for PSD `P_i` and `c_i ≥ 0`.
    fn psd_sum_norm(&self, terms: &[(f64, &PsdMatrix)]) -> Result<Interval, CatalogError> {
        let n = self.n();
        let mut sum = ComplexMatrix::zeros(n);
        let mut scale = 0.0;
        for (c, p) in terms {
            sum = &sum + &p.as_matrix().scale_real(*c);
            scale += c.abs() * p.norm();
        }
        let (values, _) = hermitian_eigen(&sum)?;
        let top = values.last().copied().unwrap_or(0.0).max(0.0);
        Ok(computed(top, n, scale).clamp_nonneg())
    }

    /// `inf_x (⟨|X|^{ea}x,x⟩^u − ⟨|X*|^{eb}x,x⟩^v)²` with `X = T` (`op = 0`)
    /// or `S` (`op = 1`).
    fn inf_power(&self, op: usize, ea: f64, eb: f64, u: f64, v: f64) -> Result<(Interval, Vec<C64>), CatalogError> {
        self.infimum((op, ea.to_bits(), eb.to_bits(), InfKind::Power(u.to_bits(), v.to_bits())), |a, b| {
            if u == 1.0 && v == 1.0 {
                Ok(inf_sq_form_diff(a, b)?)
            } else {
                let pair = FormPair::new(a.clone(), b.clone(), u, v)?;
                Ok(inf_power_diff_with(&pair, &self.opts.inf)?)
            }
        })
    }

    /// `inf_x ⟨(|X|^{ea} − |X*|^{eb})x,x⟩`.
    fn inf_linear(&self, op: usize, ea: f64, eb: f64) -> Result<(Interval, Vec<C64>), CatalogError> {
        self.infimum((op, ea.to_bits(), eb.to_bits(), InfKind::Linear), |a, b| {
            Ok(inf_form_diff(a, b)?)
        })
    }

    fn infimum(
        &self,
        key: InfKey,
        solve: impl FnOnce(&PsdMatrix, &PsdMatrix) -> Result<crate::sphereopt::InfResult, CatalogError>,
    ) -> Result<(Interval, Vec<C64>), CatalogError> {
        if let Some(hit) = self.infima.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let od = self.op(key.0)?;
        let a = od.pow(false, f64::from_bits(key.1));
        let b = od.pow(true, f64::from_bits(key.2));
        let res = solve(&a, &b)?;
        let out = (res.value, res.witness);
        self.infima.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    /// Evaluates `rec` on this context's input, retrying once with tighter
    /// widths when the verdict is inconclusive.
    pub fn evaluate(&self, rec: &Record, params: &ExponentParams) -> Result<IneqResult, CatalogError> {
        let res = self.evaluate_once(rec, params)?;
        if res.verdict == Verdict::Inconclusive && self.opts.retry {
            let fresh = EvalContext::new(self.input, self.opts.tightened());
            return fresh.evaluate_once(rec, params);
        }
        Ok(res)
    }

    fn evaluate_once(&self, rec: &Record, params: &ExponentParams) -> Result<IneqResult, CatalogError> {
        let p = rec.fix(*params);
        check_hypothesis(rec, &p)?;
        if rec.form == FormClass::Scalar {
            let (a, b) = self
                .input
                .scalars
                .ok_or(CatalogError::MissingInput("scalars a, b"))?;
            return scalar_result(rec, a, b, &p);
        }
        let (lhs, rhs, mut witness) = match rec.form {
            FormClass::Vector => self.vector_sides(rec, &p)?,
            _ => self.operator_sides(rec, &p)?,
        };
        witness.params = Some(p);
        Ok(finish(rec, lhs, rhs, VERDICT_REL, Some(witness)))
    }

    fn vectors(&self) -> Result<(&[C64], &[C64]), CatalogError> {
        let x = self.input.x.as_deref().ok_or(CatalogError::MissingInput("vector x"))?;
        let y = self.input.y.as_deref().unwrap_or(x);
        let n = self.n();
        if x.len() != n || y.len() != n {
            return Err(CatalogError::HypothesisViolated(format!(
                "vectors must have length {n}"
            )));
        }
        Ok((x, y))
    }

    fn pair(&self) -> Result<&MatrixPair, CatalogError> {
        let pair = self
            .input
            .pair
            .as_ref()
            .ok_or(CatalogError::MissingInput("pair (A, B)"))?;
        if pair.a.n() != self.n() || pair.b.n() != self.n() {
            return Err(CatalogError::HypothesisViolated(
                "pair dimensions differ from T".into(),
            ));
        }
        Ok(pair)
    }

    fn pair_radius(&self, pair: &MatrixPair) -> Result<Interval, CatalogError> {
        let hint = if pair.poly.is_empty() {
            None
        } else {
            let base = match pair.poly_base {
                PolyBase::A => PsdMatrix::from_matrix(pair.a.clone()).ok(),
                PolyBase::AbsA => Some(abs_op(&pair.a)),
            };
            base.map(|base| SpectralHint {
                base,
                coeffs: pair.poly.clone(),
            })
        };
        match spectral_radius(&pair.b, hint.as_ref()) {
            Ok(iv) | Err(MatError::GelfandNoConvergence(iv)) => Ok(iv),
            Err(e) => Err(e.into()),
        }
    }

    fn vector_sides(&self, rec: &Record, p: &ExponentParams) -> Result<(Interval, Interval, ResultWitness), CatalogError> {
        let (x, y) = self.vectors()?;
        let n = self.n();
        let nx = vec_norm(x);
        let ny = vec_norm(y);
        let unit = |v: f64| (v - 1.0).abs() <= 1e-12;
        let w = ResultWitness {
            vectors: vec![VectorJson::from_slice(x), VectorJson::from_slice(y)],
            ..Default::default()
        };
        let (lhs, rhs) = match rec.kind {
            Kind::Schwarz => {
                let a = match &self.input.pair {
                    Some(pair) => PsdMatrix::from_matrix(pair.a.clone()).map_err(|_| {
                        CatalogError::HypothesisViolated("A must be positive semidefinite".into())
                    })?,
                    None => self.op(0)?.abs.clone(),
                };
                let scale = a.norm() * nx * nx * ny * ny;
                let am = a.as_matrix();
                let l = am.bilinear(x, y).norm_sqr();
                let r = a.form(x) * a.form(y);
                (computed(l, n, scale), computed(r, n, scale))
            }
            Kind::ReidPrinted | Kind::ReidCorrected => {
                let pair = self.pair()?;
                let a = PsdMatrix::from_matrix(pair.a.clone()).map_err(|_| {
                    CatalogError::HypothesisViolated("A must be positive semidefinite".into())
                })?;
                let ab = pair.a.matmul(&pair.b);
                let nb = operator_norm(&pair.b);
                let defect = operator_norm(&(&ab - &ab.adjoint()));
                if defect > COMMUTATION_GATE * (a.norm() * nb).max(1.0) {
                    return Err(CatalogError::HypothesisViolated(format!(
                        "AB must be selfadjoint (defect {defect:.3e})"
                    )));
                }
                let scale = a.norm() * nb * nx * ny.max(nx);
                let ax = computed(a.form(x), n, a.norm() * nx * nx);
                if rec.kind == Kind::ReidPrinted {
                    let l = ab.bilinear(x, y).norm();
                    (computed(l, n, scale), computed(nb, n, nb).mul_nonneg(&ax))
                } else {
                    let l = ab.quad_form(x).norm();
                    let rb = self.pair_radius(pair)?;
                    (computed(l, n, scale), rb.mul_nonneg(&ax))
                }
            }
            Kind::Kato => {
                let op = self.op(0)?;
                let px = op.pow(false, 2.0 * p.alpha).form(x);
                let qy = op.pow(true, 2.0 * (1.0 - p.alpha)).form(y);
                let scale = op.norm.max(1.0).powi(2) * nx * nx * ny * ny;
                let l = op.t.bilinear(x, y).norm_sqr();
                (computed(l, n, scale), computed(px * qy, n, scale))
            }
            Kind::KittanehFg => {
                let pair = self.pair()?;
                let na = operator_norm(&pair.a);
                let nb = operator_norm(&pair.b);
                let defect = commutation_defect(&pair.a, &pair.b)?;
                if defect > COMMUTATION_GATE * (na * nb).max(1.0) {
                    return Err(CatalogError::HypothesisViolated(format!(
                        "|A|B = B*|A| fails (commutation defect {defect:.3e})"
                    )));
                }
                let abs_a = abs_op(&pair.a);
                let abs_as = abs_op(&pair.a.adjoint());
                let f = frac_power(&abs_a, 2.0 * p.alpha)?.form(x).sqrt();
                let g = frac_power(&abs_as, 2.0 * (1.0 - p.alpha))?.form(y).sqrt();
                let scale = na.max(1.0) * nb.max(1.0) * nx * ny;
                let l = pair.a.matmul(&pair.b).bilinear(x, y).norm();
                let rb = self.pair_radius(pair)?;
                (computed(l, n, scale), rb.mul_nonneg(&computed(f * g, n, scale)))
            }
            Kind::FurutaPrinted | Kind::FurutaCorrected => {
                let op = self.op(0)?;
                let k = p.alpha + p.beta - 1.0;
                let c = op.composite(k.max(0.0));
                let px = op.pow(false, 2.0 * p.alpha).form(x);
                let qy = op
                    .pow(rec.kind == Kind::FurutaCorrected, 2.0 * p.beta)
                    .form(y);
                let scale = op.norm.max(1.0).powf(2.0 * (p.alpha + p.beta)) * nx * nx * ny * ny;
                let l = c.bilinear(x, y).norm_sqr();
                (computed(l, n, scale), computed(px * qy, n, scale))
            }
            Kind::Jensen | Kind::JensenConcave => {
                if !unit(nx) {
                    return Err(CatalogError::HypothesisViolated("x must be a unit vector".into()));
                }
                let op = self.op(0)?;
                let e = if rec.kind == Kind::Jensen { p.r } else { 1.0 / p.r };
                let sx = op.abs.form(x);
                let sex = op.pow(false, e).form(x);
                let scale = op.norm.max(1.0).powf(e.max(1.0));
                let outer = computed(pow0(sx, e), n, scale);
                let inner_v = computed(sex, n, scale);
                if rec.kind == Kind::Jensen {
                    (outer, inner_v)
                } else {
                    (inner_v, outer)
                }
            }
            _ => unreachable!("not a vector-form record"),
        };
        Ok((lhs.clamp_nonneg(), rhs.clamp_nonneg(), w))
    }

    fn operator_sides(&self, rec: &Record, p: &ExponentParams) -> Result<(Interval, Interval, ResultWitness), CatalogError> {
        use Kind::*;
        let mut wit = ResultWitness::default();
        let mut take = |(iv, v): (Interval, Vec<C64>)| {
            wit.vectors.push(VectorJson::from_slice(&v));
            iv
        };
        let k = (p.alpha + p.beta - 1.0).max(0.0);
        let (lhs, rhs) = match rec.kind {
            NormSandwich => {
                let w = self.w_plain()?;
                let nt = self.norm_t()?;
                let lower = (nt.scale(0.5), w);
                let upper = (w, nt);
                let sl = lower.1.lo - lower.0.hi;
                let su = upper.1.lo - upper.0.hi;
                let (side, pick) = if sl <= su { ("lower", lower) } else { ("upper", upper) };
                wit.binding_side = Some(side.to_string());
                pick
            }
            Kitt2003 => {
                let op = self.op(0)?;
                let t2 = op.t.matmul(&op.t);
                let n2 = operator_norm(&t2);
                // Entrywise rounding bound for T·T.
                let abs_t = op.t.map(|z| C64::new(z.norm(), 0.0));
                let scale = abs_t.matmul(&abs_t).frobenius_norm();
                let rhs = self
                    .norm_t()?
                    .add(&computed(n2, self.n(), scale).clamp_nonneg().powf(0.5))
                    .scale(0.5);
                (self.w_plain()?, rhs)
            }
            Kitt2005Lower | Kitt2005Upper => {
                let op = self.op(0)?;
                let sum = self.psd_sum_norm(&[(1.0, &op.pow(false, 2.0)), (1.0, &op.pow(true, 2.0))])?;
                let w2 = self.w_plain()?.powf(2.0);
                if rec.kind == Kitt2005Lower {
                    (sum.scale(0.25), w2)
                } else {
                    (w2, sum.scale(0.5))
                }
            }
            Yamazaki => {
                let op = self.op(0)?;
                let wa = self.radius_of(WKey::Aluthge, || Ok(aluthge(&op.t)))?;
                (self.w_plain()?, self.norm_t()?.add(&wa).scale(0.5))
            }
            DragomirPrinted | DragomirCorrected => {
                let op = self.op(0)?;
                let w2 = self.radius_of(WKey::Square, || Ok(op.t.matmul(&op.t)))?;
                let nt = self.norm_t()?;
                let first = if rec.kind == DragomirPrinted { nt } else { nt.powf(2.0) };
                (self.w_plain()?.powf(2.0), first.add(&w2).scale(0.5))
            }
            Thm24Printed | Thm24Corrected | Cor25 | RemHalf | RemTAbsT => {
                let op = self.op(0)?;
                let (m, r) = (p.m, p.r);
                let norm = self.psd_sum_norm(&[
                    (1.0, &op.pow(false, 2.0 * r * p.alpha)),
                    (1.0, &op.pow(true, 2.0 * r * p.beta)),
                ])?;
                let corr = take(self.inf_power(0, 2.0 * p.alpha, 2.0 * p.beta, m / 2.0, m / 2.0)?);
                let rhs = norm
                    .powf(m / r)
                    .scale(2f64.powf(-m / r))
                    .sub(&corr.scale(2f64.powf(-m)));
                (self.w_composite(k)?.powf(m), rhs)
            }
            Thm27Printed | Thm27Corrected | Cor28Printed | Cor28Corrected | Rem29Printed
            | Rem29Corrected | Rem210Printed | Rem210Corrected | Rem211Printed
            | Rem211Corrected => {
                let op = self.op(0)?;
                let (r, s) = (p.r, p.s);
                let norm = self.psd_sum_norm(&[
                    (1.0, &op.pow(false, 2.0 * r * s * p.alpha)),
                    (1.0, &op.pow(true, 2.0 * r * s * p.beta)),
                ])?;
                let printed = matches!(
                    rec.kind,
                    Thm27Printed | Cor28Printed | Rem29Printed | Rem210Printed | Rem211Printed
                );
                let corr = if printed {
                    take(self.inf_linear(0, 2.0 * r * s * p.alpha, 2.0 * r * s * p.beta)?)
                } else {
                    take(self.inf_power(0, 2.0 * s * p.alpha, 2.0 * s * p.beta, 1.0, 1.0)?)
                };
                let rhs = norm
                    .powf(2.0 / r)
                    .scale(2f64.powf(-2.0 / r))
                    .sub(&corr.scale(0.25));
                (self.w_composite(k)?.powf(2.0 * s), rhs)
            }
            Thm212 | Thm213 | Rem214 => {
                let op = self.op(0)?;
                let s = p.s;
                let norm = self.psd_sum_norm(&[
                    (1.0 / p.p, &op.pow(false, 2.0 * s * p.p * p.alpha)),
                    (1.0 / p.q, &op.pow(true, 2.0 * s * p.q * p.beta)),
                ])?;
                let corr = take(self.inf_power(
                    0,
                    2.0 * s * p.alpha,
                    2.0 * s * p.beta,
                    p.p / 2.0,
                    p.q / 2.0,
                )?);
                (self.w_composite(k)?.powf(2.0 * s), norm.sub(&corr.scale(p.r0)))
            }
            Thm215 | Cor216 => {
                let (ot, os) = (self.op(0)?, self.op(1)?);
                let ks = (p.gamma + p.delta - 1.0).max(0.0);
                let ct = self.inf_power(0, 2.0 * p.alpha, 2.0 * p.beta, 0.5, 0.5)?;
                let cs = self.inf_power(1, 2.0 * p.gamma, 2.0 * p.delta, 0.5, 0.5)?;
                let corr = take(ct).add(&take(cs)).scale(0.5);
                let bound = if rec.kind == Thm215 {
                    let r = p.r;
                    let nt = self.psd_sum_norm(&[
                        (1.0, &ot.pow(false, 2.0 * r * p.alpha)),
                        (1.0, &ot.pow(true, 2.0 * r * p.beta)),
                    ])?;
                    let ns = self.psd_sum_norm(&[
                        (1.0, &os.pow(false, 2.0 * r * p.gamma)),
                        (1.0, &os.pow(true, 2.0 * r * p.delta)),
                    ])?;
                    let c = 2f64.powf(-1.0 / r);
                    nt.powf(1.0 / r).scale(c).add(&ns.powf(1.0 / r).scale(c))
                } else {
                    self.psd_sum_norm(&[
                        (1.0, &ot.pow(false, 2.0 * p.alpha)),
                        (1.0, &ot.pow(true, 2.0 * p.beta)),
                        (1.0, &os.pow(false, 2.0 * p.gamma)),
                        (1.0, &os.pow(true, 2.0 * p.delta)),
                    ])?
                    .scale(0.5)
                };
                let w = self.radius_of(WKey::Sum(k.to_bits(), ks.to_bits()), || {
                    Ok(&ot.composite(k) + &os.composite(ks))
                })?;
                (w, bound.sub(&corr))
            }
            RemSumHalf | RemSumOne => {
                let op = self.op(0)?;
                let norm = self.psd_sum_norm(&[
                    (1.0, &op.pow(false, 2.0 * p.alpha)),
                    (1.0, &op.pow(true, 2.0 * p.beta)),
                ])?;
                let corr = take(self.inf_power(0, 2.0 * p.alpha, 2.0 * p.beta, 0.5, 0.5)?);
                (self.w_composite(k)?, norm.scale(0.5).sub(&corr.scale(0.5)))
            }
            _ => unreachable!("not an operator-form record"),
        };
        Ok((lhs, rhs, wit))
    }
}

fn finish(rec: &Record, lhs: Interval, rhs: Interval, rel: f64, witness: Option<ResultWitness>) -> IneqResult {
    let tol = rel * rhs.hi.max(1.0);
    IneqResult {
        id: rec.id.to_string(),
        variant: rec.variant,
        lhs,
        rhs,
        slack: rhs.lo - lhs.hi,
        verdict: verdict_of(&lhs, &rhs, tol),
        witness,
    }
}

fn require(cond: bool, what: &str) -> Result<(), CatalogError> {
    if cond {
        Ok(())
    } else {
        Err(CatalogError::HypothesisViolated(what.to_string()))
    }
}

const SUM_TOL: f64 = 1e-12;

pub(crate) fn check_hypothesis(rec: &Record, p: &ExponentParams) -> Result<(), CatalogError> {
    use Kind::*;
    require(p.all_finite(), "parameters must be finite")?;
    let k = rec.kind;
    let composite = matches!(
        k,
        FurutaCorrected
            | Thm24Printed
            | Thm24Corrected
            | Cor25
            | Thm27Printed
            | Thm27Corrected
            | Cor28Printed
            | Cor28Corrected
            | Thm212
            | Thm213
            | Thm215
            | Cor216
    );
    if composite {
        require(p.alpha >= 0.0 && p.beta >= 0.0, "alpha, beta >= 0")?;
        require(p.alpha + p.beta >= 1.0 - SUM_TOL, "alpha + beta >= 1")?;
    }
    if matches!(k, Kato | KittanehFg) {
        require((0.0..=1.0).contains(&p.alpha), "0 <= alpha <= 1")?;
    }
    if k == FurutaPrinted {
        require(
            (0.0..=1.0).contains(&p.alpha) && (0.0..=1.0).contains(&p.beta),
            "alpha, beta in [0, 1]",
        )?;
        require(p.alpha + p.beta >= 1.0 - SUM_TOL, "alpha + beta >= 1")?;
    }
    if matches!(k, Thm215 | Cor216) {
        require(p.gamma >= 0.0 && p.delta >= 0.0, "gamma, delta >= 0")?;
        require(p.gamma + p.delta >= 1.0 - SUM_TOL, "gamma + delta >= 1")?;
    }
    if matches!(k, Thm24Printed | Thm24Corrected | Sms) {
        require(p.m >= 1.0, "m >= 1")?;
    }
    if matches!(k, Thm24Corrected | Sms) {
        require((p.m - p.m.round()).abs() <= SUM_TOL, "m must be a positive integer")?;
    }
    if matches!(
        k,
        Thm24Printed | Thm24Corrected | Cor25 | Thm27Printed | Thm27Corrected | Thm215 | Jensen
            | JensenConcave | Sms
    ) {
        require(p.r >= 1.0, "r >= 1")?;
    }
    if matches!(
        k,
        Thm27Printed | Thm27Corrected | Cor28Printed | Cor28Corrected | Thm212 | Thm213
    ) {
        require(p.s >= 1.0, "s >= 1")?;
    }
    if matches!(k, Rem29Printed | Rem29Corrected) {
        require((1.0..=2.0).contains(&p.s), "1 <= s <= 2")?;
    }
    if matches!(k, Thm212 | Young | Sms) {
        require(p.conjugate_ok(), "1/p + 1/q = 1 with r0 = min(1/p, 1/q)")?;
    }
    Ok(())
}

fn scalar_result(rec: &Record, a: f64, b: f64, p: &ExponentParams) -> Result<IneqResult, CatalogError> {
    require(a.is_finite() && b.is_finite(), "a, b must be finite")?;
    let (lhs, rhs) = match rec.kind {
        Kind::Young => {
            require(a >= 0.0 && b >= 0.0, "a, b >= 0")?;
            let d = pow0(a, p.p / 2.0) - pow0(b, p.q / 2.0);
            (a * b + p.r0 * d * d, pow0(a, p.p) / p.p + pow0(b, p.q) / p.q)
        }
        Kind::Sms => {
            require(a > 0.0 && b > 0.0, "a, b > 0")?;
            let m = p.m;
            let d = a.powf(m / 2.0) - b.powf(m / 2.0);
            let l = (a.powf(1.0 / p.p) * b.powf(1.0 / p.q)).powf(m) + p.r0.powf(m) * d * d;
            let r = (a.powf(p.r) / p.p + b.powf(p.r) / p.q).powf(m / p.r);
            (l, r)
        }
        _ => unreachable!("not a scalar record"),
    };
    Ok(finish(
        rec,
        Interval::point(lhs),
        Interval::point(rhs),
        SCALAR_VERDICT_REL,
        None,
    ))
}

fn lookup(id: &str, variant: Variant) -> Result<&'static Record, CatalogError> {
    find(id, variant).ok_or_else(|| {
        if known_id(id) {
            CatalogError::UnknownId(format!("{id} has no {variant} variant"))
        } else {
            CatalogError::UnknownId(id.to_string())
        }
    })
}

/// Evaluates one record on one input with default options.
pub fn evaluate(id: &str, variant: Variant, input: &EvalInput, params: &ExponentParams) -> Result<IneqResult, CatalogError> {
    evaluate_with(id, variant, input, params, EvalOptions::default())
}

pub fn evaluate_with(
    id: &str,
    variant: Variant,
    input: &EvalInput,
    params: &ExponentParams,
    opts: EvalOptions,
) -> Result<IneqResult, CatalogError> {
    let rec = lookup(id, variant)?;
    EvalContext::new(input, opts).evaluate(rec, params)
}

/// Scalar rows evaluated on `(a, b)` in plain floating point.
pub fn evaluate_scalar(id: &str, a: f64, b: f64, params: &ExponentParams) -> Result<IneqResult, CatalogError> {
    let rec = lookup(id, Variant::Corrected)?;
    if rec.form != FormClass::Scalar {
        return Err(CatalogError::UnknownId(format!("{id} is not a scalar record")));
    }
    let p = rec.fix(*params);
    check_hypothesis(rec, &p)?;
    scalar_result(rec, a, b, &p)
}

/// Right-hand sides of the three upper bounds for `w(T)²` that refine one
/// another, in increasing strength.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    /// `½‖T*T + TT*‖`.
    pub kitt2005_upper: Interval,
    pub rem_2_11: Interval,
    pub rem_2_14: Interval,
    /// Each bound is no larger than the one it refines, up to `tol`.
    pub ordered: bool,
    /// All three coincide within `tol`.
    pub degenerate: bool,
    pub strict: bool,
    pub tol: f64,
}

pub fn refinement_chain(t: &ComplexMatrix) -> ChainReport {
    let input = EvalInput::new(t.clone());
    let ctx = EvalContext::new(&input, EvalOptions::default());
    let params = ExponentParams::default();
    let rhs = |id: &str| {
        let rec = lookup(id, Variant::Corrected).expect("registry row");
        ctx.evaluate(rec, &params).expect("unconditional bound").rhs
    };
    let upper = rhs("KITT2005_UPPER");
    let r11 = rhs("REM_2_11");
    let r14 = rhs("REM_2_14");
    let tol = 1e-8 * upper.hi.max(1.0);
    let ordered = r14.hi <= r11.lo + tol && r11.hi <= upper.lo + tol;
    let degenerate = (upper.hi - r14.lo).abs() <= tol && (r14.hi - upper.lo).abs() <= tol;
    ChainReport {
        kitt2005_upper: upper,
        rem_2_11: r11,
        rem_2_14: r14,
        ordered,
        degenerate,
        strict: ordered && !degenerate,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{sample, Family, GeneratorSpec};
    use crate::gen::test_support::random_matrix;
    use crate::matcore::C64;

    fn shift() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    fn eval(id: &str, variant: Variant, t: &ComplexMatrix, p: &ExponentParams) -> IneqResult {
        evaluate(id, variant, &EvalInput::new(t.clone()), p).unwrap()
    }

    #[test]
    fn squared_radius_lower_bound_is_sharp_on_the_shift() {
        let r = eval("KITT2005_LOWER", Variant::Corrected, &shift(), &ExponentParams::default());
        assert!((r.lhs.mid() - 0.25).abs() < 1e-12);
        assert!((r.rhs.mid() - 0.25).abs() < 1e-8);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.is_equality());
    }

    #[test]
    fn normal_diagonal_is_an_equality_for_the_refinement() {
        let t = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let r = eval("REM_2_14", Variant::Corrected, &t, &ExponentParams::default());
        assert!((r.lhs.mid() - 1.0).abs() < 1e-8);
        assert!((r.rhs.mid() - 1.0).abs() < 1e-8);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.is_equality());
    }

    #[test]
    fn printed_square_bound_fails_on_scaled_identity() {
        let t = ComplexMatrix::identity(2).scale_real(3.0);
        let p = ExponentParams::default();
        let r = eval("DRAGOMIR", Variant::AsPrinted, &t, &p);
        assert!((r.lhs.mid() - 9.0).abs() < 1e-7);
        assert!((r.rhs.mid() - 6.0).abs() < 1e-7);
        assert_eq!(r.verdict, Verdict::Violated);
        let c = eval("DRAGOMIR", Variant::Corrected, &t, &p);
        assert_eq!(c.verdict, Verdict::Holds);
        assert!((c.rhs.mid() - 9.0).abs() < 1e-7);
    }

    #[test]
    fn general_bound_at_m_one_on_the_shift() {
        // T|T| = T for the shift, so both sides equal w(T) = 1/2 at m = 1
        // and w(T)^2 = 1/4 at m = 2.
        let p = ExponentParams {
            alpha: 1.0,
            beta: 1.0,
            m: 1.0,
            r: 1.0,
            ..Default::default()
        };
        let r = eval("THM2_4_2_5", Variant::Corrected, &shift(), &p);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((r.lhs.mid() - 0.5).abs() < 1e-8);
        assert!(r.is_equality());
        let r2 = eval("THM2_4_2_5", Variant::Corrected, &shift(), &ExponentParams { m: 2.0, ..p });
        assert!((r2.lhs.mid() - 0.25).abs() < 1e-8);
        assert!((r2.rhs.mid() - 0.25).abs() < 1e-8);
    }

    #[test]
    fn mixed_schwarz_holds_at_sample_parameters() {
        for seed in 0..20 {
            let t = random_matrix(4, seed);
            let x = crate::gen::sample_unit_vector(4, seed);
            let y = crate::gen::sample_unit_vector(4, seed + 1000);
            let input = EvalInput::new(t).with_vectors(x, y);
            let p = ExponentParams {
                alpha: 0.7,
                beta: 0.6,
                ..Default::default()
            };
            let r = evaluate("FURUTA_1_5", Variant::Corrected, &input, &p).unwrap();
            assert_eq!(r.verdict, Verdict::Holds, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn printed_mixed_schwarz_fails_on_the_shift() {
        let e1 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let e2 = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let input = EvalInput::new(shift()).with_vectors(e2, e1);
        let p = ExponentParams {
            alpha: 0.5,
            beta: 0.5,
            ..Default::default()
        };
        let r = evaluate("FURUTA_1_5", Variant::AsPrinted, &input, &p).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        let c = evaluate("FURUTA_1_5", Variant::Corrected, &input, &p).unwrap();
        assert_eq!(c.verdict, Verdict::Holds);
    }

    #[test]
    fn hypothesis_failures_are_errors() {
        let t = shift();
        let bad = ExponentParams {
            alpha: 0.2,
            beta: 0.3,
            ..Default::default()
        };
        assert!(matches!(
            evaluate("COR2_5_2_6", Variant::Corrected, &EvalInput::new(t.clone()), &bad),
            Err(CatalogError::HypothesisViolated(_))
        ));
        assert!(matches!(
            evaluate("NOPE", Variant::Corrected, &EvalInput::new(t.clone()), &bad),
            Err(CatalogError::UnknownId(_))
        ));
        assert!(matches!(
            evaluate("THM2_15_2_15", Variant::Corrected, &EvalInput::new(t), &ExponentParams::default()),
            Err(CatalogError::MissingInput(_))
        ));
    }

    #[test]
    fn commutation_gate_rejects_unrelated_pairs() {
        let a = random_matrix(3, 1);
        let b = random_matrix(3, 2);
        let pair = MatrixPair {
            a: a.clone(),
            b,
            poly: vec![],
            poly_base: PolyBase::AbsA,
        };
        let x = crate::gen::sample_unit_vector(3, 5);
        let input = EvalInput::new(a).with_pair(pair).with_vectors(x.clone(), x);
        let r = evaluate("KITTANEH_FG_1_4", Variant::Corrected, &input, &ExponentParams::default());
        assert!(matches!(r, Err(CatalogError::HypothesisViolated(_))));
    }

    #[test]
    fn generated_pairs_pass_their_gates() {
        for (family, id) in [(Family::ReidPair, "REID_1_2"), (Family::FgPair, "KITTANEH_FG_1_4")] {
            for draw in 0..10 {
                let s = sample(&GeneratorSpec::new(family, 4, 3).with_draw(draw)).unwrap();
                let x = crate::gen::sample_unit_vector(4, draw);
                let input = EvalInput::new(s.t.clone())
                    .with_pair(s.pair.unwrap())
                    .with_vectors(x.clone(), x);
                let r = evaluate(id, Variant::Corrected, &input, &ExponentParams::default()).unwrap();
                assert_eq!(r.verdict, Verdict::Holds);
            }
        }
    }

    #[test]
    fn printed_pair_bound_fails_with_independent_y() {
        let s = sample(&GeneratorSpec::new(Family::ReidPair, 3, 11)).unwrap();
        let pair = s.pair.unwrap();
        let mut violated = false;
        for draw in 0..200 {
            let x = crate::gen::sample_unit_vector(3, 2 * draw);
            let y = crate::gen::sample_unit_vector(3, 2 * draw + 1);
            let input = EvalInput::new(s.t.clone()).with_pair(pair.clone()).with_vectors(x, y);
            let r = evaluate("REID_1_2", Variant::AsPrinted, &input, &ExponentParams::default()).unwrap();
            violated |= r.verdict == Verdict::Violated;
        }
        assert!(violated);
    }

    #[test]
    fn scalar_examples() {
        let p = ExponentParams::default();
        let y = evaluate_scalar("YOUNG_REF_2_3", 1.0, 1.0, &p).unwrap();
        assert_eq!((y.lhs.lo, y.rhs.lo), (1.0, 1.0));
        assert!(y.is_equality());
        let s = evaluate_scalar("SMS_2_4", 4.0, 1.0, &ExponentParams { m: 2.0, ..p }).unwrap();
        assert!((s.lhs.lo - 6.25).abs() < 1e-12);
        assert!((s.rhs.lo - 6.25).abs() < 1e-12);
        assert_eq!(s.verdict, Verdict::Holds);
        assert!(matches!(
            evaluate_scalar("SMS_2_4", 4.0, 1.0, &ExponentParams { m: 1.5, ..p }),
            Err(CatalogError::HypothesisViolated(_))
        ));
        assert!(evaluate_scalar("REM_2_14", 1.0, 1.0, &p).is_err());
    }

    #[test]
    fn real_exponent_breaks_the_general_bound() {
        let t = ComplexMatrix::identity(2).scale_real(4.0);
        let p = ExponentParams {
            alpha: 1.0,
            beta: 0.5,
            m: 1.5,
            r: 1.0,
            ..Default::default()
        };
        let r = eval("THM2_4_2_5", Variant::AsPrinted, &t, &p);
        assert_eq!(r.verdict, Verdict::Violated, "{r:?}");
    }

    #[test]
    fn chain_examples() {
        let c = refinement_chain(&shift());
        for iv in [c.kitt2005_upper, c.rem_2_11, c.rem_2_14] {
            assert!((iv.mid() - 0.5).abs() < 1e-8);
        }
        assert!(c.ordered && c.degenerate && !c.strict);
        let d = refinement_chain(&ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]));
        assert!((d.rem_2_14.mid() - 1.0).abs() < 1e-8);
        assert!(d.degenerate);
    }

    #[test]
    fn sandwich_reports_binding_side() {
        let r = eval("NORM_SANDWICH_1_6", Variant::Corrected, &ComplexMatrix::identity(3), &ExponentParams::default());
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.is_equality());
        assert_eq!(r.witness.unwrap().binding_side.as_deref(), Some("upper"));
        let s = eval("NORM_SANDWICH_1_6", Variant::Corrected, &shift(), &ExponentParams::default());
        assert_eq!(s.witness.unwrap().binding_side.as_deref(), Some("lower"));
    }

    #[test]
    fn corrected_rows_hold_on_random_matrices() {
        let draw = crate::gen::draw_params(9);
        for seed in 0..4 {
            let t = random_matrix(3, seed);
            let input = EvalInput::new(t).with_second(random_matrix(3, seed + 50));
            let ctx = EvalContext::new(&input, EvalOptions::default());
            for rec in super::super::registry() {
                if rec.form != FormClass::Operator || rec.variant != Variant::Corrected {
                    continue;
                }
                let r = ctx.evaluate(rec, &rec.params_from(&draw)).unwrap();
                assert_ne!(r.verdict, Verdict::Violated, "{} {r:?}", rec.id);
            }
        }
    }

    #[test]
    fn result_json_shape() {
        let r = eval("KITT2005_UPPER", Variant::Corrected, &shift(), &ExponentParams::default());
        let v = serde_json::to_value(&r).unwrap();
        for key in ["id", "variant", "lhs", "rhs", "slack", "verdict", "witness"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["lhs"].as_array().unwrap().len(), 2);
        assert_eq!(v["verdict"], "HOLDS");
        let back: IneqResult = serde_json::from_value(v).unwrap();
        assert_eq!(back.slack, r.slack);
    }
}
