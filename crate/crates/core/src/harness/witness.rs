use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::catalog::{EvalInput, ExponentParams, IneqResult, Variant, Verdict};
use crate::gen::{Family, MatrixPair, PolyBase};
use crate::matcore::{ComplexMatrix, MatrixJson, VectorJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub a: MatrixJson,
    pub b: MatrixJson,
    pub poly: Vec<f64>,
    pub poly_base: PolyBase,
}

/// Everything needed to replay one evaluation through `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessBundle {
    pub id: String,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draw: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_draw: Option<u32>,
    pub params: ExponentParams,
    pub t: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<VectorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<VectorJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalars: Option<[f64; 2]>,
    pub slack: f64,
    pub verdict: Verdict,
}

impl WitnessBundle {
    pub fn new(input: &EvalInput, params: &ExponentParams, result: &IneqResult) -> Self {
        Self {
            id: result.id.clone(),
            variant: result.variant,
            family: None,
            draw: None,
            param_draw: None,
            params: *params,
            t: input.t.to_json_repr(),
            s: input.s.as_ref().map(|s| s.to_json_repr()),
            pair: input.pair.as_ref().map(|p| PairJson {
                a: p.a.to_json_repr(),
                b: p.b.to_json_repr(),
                poly: p.poly.clone(),
                poly_base: p.poly_base,
            }),
            x: input.x.as_deref().map(VectorJson::from_slice),
            y: input.y.as_deref().map(VectorJson::from_slice),
            scalars: input.scalars.map(|(a, b)| [a, b]),
            slack: result.slack,
            verdict: result.verdict,
        }
    }

    pub fn with_origin(mut self, family: Family, draw: u64, param_draw: u32) -> Self {
        self.family = Some(family);
        self.draw = Some(draw);
        self.param_draw = Some(param_draw);
        self
    }

    pub fn dim(&self) -> usize {
        self.t.n
    }

    pub fn to_input(&self) -> Result<EvalInput, HarnessError> {
        let mat = |m: &MatrixJson| {
            ComplexMatrix::try_from(m.clone()).map_err(|e| HarnessError::Parse(e.to_string()))
        };
        let vec = |v: &VectorJson| v.to_vec().map_err(|e| HarnessError::Parse(e.to_string()));
        let mut input = EvalInput::new(mat(&self.t)?);
        if let Some(s) = &self.s {
            input.s = Some(mat(s)?);
        }
        if let Some(p) = &self.pair {
            input.pair = Some(MatrixPair {
                a: mat(&p.a)?,
                b: mat(&p.b)?,
                poly: p.poly.clone(),
                poly_base: p.poly_base,
            });
        }
        if let Some(x) = &self.x {
            input.x = Some(vec(x)?);
        }
        if let Some(y) = &self.y {
            input.y = Some(vec(y)?);
        }
        input.scalars = self.scalars.map(|[a, b]| (a, b));
        Ok(input)
    }
}
