//! Campaigns, single evaluations, range export and counterexample search.

mod campaign;
mod search;
mod witness;

use std::fs;
use std::path::Path;

use thiserror::Error;

pub use campaign::{
    run_campaign, Aggregate, CampaignConfig, CampaignReport, Environment, IdSelection, Summary,
    Tolerances, VariantSelection, REPORT_SCHEMA,
};
pub use search::{search, SearchReport, SearchStatus};
pub use witness::{PairJson, WitnessBundle};

use crate::catalog::{evaluate, CatalogError, EvalInput, ExponentParams, IneqResult, Variant};
use crate::matcore::ComplexMatrix;
use crate::radius::range_boundary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CORRECTED_VIOLATION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown inequality id '{0}'")]
    UnknownId(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) | HarnessError::Numeric(_) => EXIT_IO,
            _ => EXIT_INPUT,
        }
    }
}

impl From<CatalogError> for HarnessError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::UnknownId(s) => HarnessError::UnknownId(s),
            CatalogError::HypothesisViolated(s) => HarnessError::HypothesisViolated(s),
            CatalogError::MissingInput(s) => HarnessError::MissingInput(s.to_string()),
            CatalogError::Numeric(s) => HarnessError::Numeric(s),
        }
    }
}

/// Per-field parameter overrides from the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub p: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, mut base: ExponentParams) -> ExponentParams {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut base.alpha, self.alpha);
        set(&mut base.beta, self.beta);
        set(&mut base.gamma, self.gamma);
        set(&mut base.delta, self.delta);
        set(&mut base.m, self.m);
        set(&mut base.r, self.r);
        set(&mut base.s, self.s);
        if let Some(p) = self.p {
            base = base.with_p(p);
        }
        base
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    Ok(fs::read_to_string(path)?)
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
}

pub fn load_matrix(path: &Path) -> Result<ComplexMatrix, HarnessError> {
    parse_matrix(&read(path)?)
}

/// Evaluates `id` on the matrix in `path`. The file is either a bare matrix
/// or a witness bundle from a report, whose inputs and parameters are then
/// replayed.
pub fn eval_single(path: &Path, id: &str, variant: Variant, overrides: &ParamOverrides) -> Result<IneqResult, HarnessError> {
    let text = read(path)?;
    let (input, base) = match parse_matrix(&text) {
        Ok(t) => (EvalInput::new(t), ExponentParams::default()),
        Err(matrix_err) => match serde_json::from_str::<WitnessBundle>(&text) {
            Ok(b) => (b.to_input()?, b.params),
            Err(_) => return Err(matrix_err),
        },
    };
    let params = overrides.apply(base);
    Ok(evaluate(id, variant, &input, &params)?)
}

/// Writes the sampled boundary of the numerical range as CSV.
pub fn export_range(matrix: &Path, points: usize, out: &Path) -> Result<usize, HarnessError> {
    if points < 3 {
        return Err(HarnessError::ConfigInvalid("at least 3 points are required".into()));
    }
    let t = load_matrix(matrix)?;
    let b = range_boundary(&t, points).map_err(|e| HarnessError::Numeric(e.to_string()))?;
    fs::write(out, b.to_csv())?;
    Ok(b.points.len())
}

/// Runs `f` on a pool capped by `OPINEQ_THREADS` when that is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("OPINEQ_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Verdict;
    use std::io::Write;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    const SHIFT: &str = r#"{"n":2,"re":[[0,1],[0,0]],"im":[[0,0],[0,0]]}"#;

    #[test]
    fn eval_on_shift() {
        let f = write_tmp(SHIFT);
        let r = eval_single(f.path(), "REM_2_14", Variant::Corrected, &ParamOverrides::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((r.rhs.mid() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn eval_identity_sandwich() {
        let f = write_tmp(r#"{"n":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#);
        let r = eval_single(f.path(), "NORM_SANDWICH_1_6", Variant::Corrected, &ParamOverrides::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.is_equality());
    }

    #[test]
    fn eval_errors() {
        let bad = write_tmp(r#"{"n":2,"re":[[1,0]],"im":[[0,0]]}"#);
        let e = eval_single(bad.path(), "REM_2_14", Variant::Corrected, &ParamOverrides::default()).unwrap_err();
        assert!(matches!(e, HarnessError::Parse(_)));
        assert_eq!(e.exit_code(), EXIT_INPUT);
        let f = write_tmp(SHIFT);
        let e = eval_single(f.path(), "NOPE", Variant::Corrected, &ParamOverrides::default()).unwrap_err();
        assert!(matches!(e, HarnessError::UnknownId(_)));
        let o = ParamOverrides {
            alpha: Some(0.1),
            beta: Some(0.1),
            ..Default::default()
        };
        let e = eval_single(f.path(), "COR2_5_2_6", Variant::Corrected, &o).unwrap_err();
        assert!(matches!(e, HarnessError::HypothesisViolated(_)));
        let missing = eval_single(Path::new("/nonexistent/m.json"), "REM_2_14", Variant::Corrected, &ParamOverrides::default())
            .unwrap_err();
        assert_eq!(missing.exit_code(), EXIT_IO);
    }

    #[test]
    fn overrides_keep_conjugacy() {
        let p = ParamOverrides {
            p: Some(3.0),
            m: Some(2.0),
            ..Default::default()
        }
        .apply(ExponentParams::default());
        assert!(p.conjugate_ok());
        assert_eq!(p.m, 2.0);
    }

    #[test]
    fn range_export() {
        let f = write_tmp(SHIFT);
        let out = tempfile::NamedTempFile::new().unwrap();
        assert_eq!(export_range(f.path(), 360, out.path()).unwrap(), 360);
        let csv = std::fs::read_to_string(out.path()).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 360);
        for row in rows {
            let v: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
            assert!((v[1].hypot(v[2]) - 0.5).abs() < 1e-10);
        }
        assert!(export_range(f.path(), 2, out.path()).is_err());
    }

    #[test]
    fn thread_cap_runs_closure() {
        assert_eq!(with_thread_cap(|| 5), 5);
    }
}
