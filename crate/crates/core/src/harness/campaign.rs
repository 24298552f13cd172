use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::witness::WitnessBundle;
use super::HarnessError;
use crate::catalog::{
    known_id, registry, EvalContext, EvalInput, EvalOptions, Record, Variant, Verdict,
};
use crate::gen::{self, draw_params, sample, Family, GeneratorSpec, MAX_DIM};
use crate::sphereopt::InfOptions;

const SCALAR_TAG: u64 = 0x5343_414c;
const PARAM_TAG: u64 = 0x5052_4d53;
const SECOND_SALT: u64 = 0x5345_434f_4e44;
const MAX_EQUALITY_WITNESSES: usize = 3;
const MAX_VIOLATION_WITNESSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdSelection {
    Keyword(String),
    List(Vec<String>),
}

impl Default for IdSelection {
    fn default() -> Self {
        IdSelection::Keyword("all".into())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VariantSelection {
    AsPrinted,
    Corrected,
    #[default]
    Both,
}

/// Overrides of the evaluation widths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf_width: Option<f64>,
}

fn default_families() -> Vec<Family> {
    Family::ALL.to_vec()
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub dims: Vec<usize>,
    pub samples_per_dim: usize,
    pub seed: u64,
    #[serde(default)]
    pub ineq_ids: IdSelection,
    #[serde(default)]
    pub variants: VariantSelection,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Independent parameter draws per sample and record.
    #[serde(default = "one")]
    pub param_draws: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::ConfigInvalid(m));
        if self.dims.is_empty() {
            return bad("dims must not be empty".into());
        }
        if let Some(d) = self.dims.iter().find(|d| !(1..=MAX_DIM).contains(*d)) {
            return bad(format!("dimension {d} outside [1, {MAX_DIM}]"));
        }
        if self.samples_per_dim == 0 {
            return bad("samples_per_dim must be at least 1".into());
        }
        if self.families.is_empty() {
            return bad("families must not be empty".into());
        }
        if self.param_draws == 0 {
            return bad("param_draws must be at least 1".into());
        }
        match &self.ineq_ids {
            IdSelection::Keyword(k) if k.eq_ignore_ascii_case("all") => {}
            IdSelection::Keyword(k) => return bad(format!("ineq_ids must be \"all\" or a list, got \"{k}\"")),
            IdSelection::List(ids) => {
                if let Some(id) = ids.iter().find(|id| !known_id(id)) {
                    return Err(HarnessError::UnknownId(id.clone()));
                }
            }
        }
        for v in [self.tolerances.radius_rel, self.tolerances.inf_width].into_iter().flatten() {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {v} must be positive"));
            }
        }
        Ok(())
    }

    pub fn eval_options(&self) -> EvalOptions {
        let mut o = EvalOptions::default();
        if let Some(r) = self.tolerances.radius_rel {
            o.radius_rel = r;
        }
        if let Some(w) = self.tolerances.inf_width {
            o.inf = InfOptions {
                width_target: w,
                ..o.inf
            };
        }
        o
    }

    /// Records selected by ids and variants, in registry order.
    pub fn records(&self) -> Vec<&'static Record> {
        registry()
            .iter()
            .filter(|r| match &self.ineq_ids {
                IdSelection::List(ids) => ids.iter().any(|id| id == r.id),
                IdSelection::Keyword(_) => true,
            })
            .filter(|r| match self.variants {
                VariantSelection::Both => true,
                VariantSelection::Corrected => r.variant == Variant::Corrected,
                VariantSelection::AsPrinted => r.variant == Variant::AsPrinted || r.printed_matches,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub id: String,
    pub variant: Variant,
    pub dim: usize,
    pub count: usize,
    pub holds: usize,
    pub violated: usize,
    pub inconclusive: usize,
    /// Evaluations rejected by a hypothesis gate or a numerical failure.
    pub errors: usize,
    pub min_slack: Option<f64>,
    pub min_slack_witness: Option<WitnessBundle>,
    pub equality_witnesses: Vec<WitnessBundle>,
    pub violation_witnesses: Vec<WitnessBundle>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub error_messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub evaluations: usize,
    pub holds: usize,
    pub violated: usize,
    pub inconclusive: usize,
    pub errors: usize,
    /// Samples whose family does not support the requested dimension.
    pub skipped_samples: usize,
    pub corrected_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema: String,
    pub environment: Environment,
    pub timestamp: String,
    pub config: CampaignConfig,
    pub summary: Summary,
    pub rows: Vec<Aggregate>,
}

pub const REPORT_SCHEMA: &str = "opineq-report/1";

impl CampaignReport {
    pub fn has_corrected_violation(&self) -> bool {
        self.summary.corrected_violations > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Outcome {
    Done {
        verdict: Verdict,
        slack: f64,
        equality: bool,
        bundle: Box<dyn Fn() -> WitnessBundle + Send + Sync>,
    },
    Failed(String),
}

struct Entry {
    rec: &'static Record,
    dim: usize,
    draw: u64,
    param_draw: u32,
    outcome: Outcome,
}

/// Deterministic inputs for sample `draw` at dimension `dim`.
pub(crate) struct SampleInputs {
    pub family: Family,
    pub base: EvalInput,
    pub reid: EvalInput,
    pub fg: EvalInput,
}

pub(crate) fn sample_inputs(family: Family, dim: usize, seed: u64, draw: u64) -> Result<SampleInputs, HarnessError> {
    let gen_err = |e: gen::GenError| HarnessError::ConfigInvalid(e.to_string());
    let s = sample(&GeneratorSpec::new(family, dim, seed).with_draw(draw)).map_err(gen_err)?;
    let second = sample(&GeneratorSpec::new(Family::Ginibre, dim, seed ^ SECOND_SALT).with_draw(draw))
        .map_err(gen_err)?;
    let x = gen::sample_unit_vector_stream(dim, seed, 2 * draw);
    let y = gen::sample_unit_vector_stream(dim, seed, 2 * draw + 1);
    let mut rng = gen::stream(seed, SCALAR_TAG, dim as u64, draw);
    let a = rng.random_range(-3.0f64..3.0).exp();
    let b = rng.random_range(-3.0f64..3.0).exp();
    let base = EvalInput::new(s.t.clone())
        .with_second(second.t)
        .with_vectors(x, y)
        .with_scalars(a, b);
    let pair_input = |pf: Family| -> Result<EvalInput, HarnessError> {
        let pair = if family == pf {
            s.pair.clone().expect("pair family yields a pair")
        } else {
            sample(&GeneratorSpec::new(pf, dim, seed).with_draw(draw))
                .map_err(gen_err)?
                .pair
                .expect("pair family yields a pair")
        };
        let mut input = base.clone();
        input.t = pair.a.clone();
        input.pair = Some(pair);
        Ok(input)
    };
    Ok(SampleInputs {
        family,
        reid: pair_input(Family::ReidPair)?,
        fg: pair_input(Family::FgPair)?,
        base,
    })
}

pub(crate) fn param_seed(seed: u64, dim: usize, draw: u64, j: u32) -> u64 {
    let mut rng = gen::stream(seed, PARAM_TAG, dim as u64, draw);
    rng.set_stream(j as u64);
    rng.next_u64()
}

fn input_for<'a>(rec: &Record, inputs: &'a SampleInputs) -> &'a EvalInput {
    if !rec.needs().pair {
        &inputs.base
    } else if rec.id == "KITTANEH_FG_1_4" {
        &inputs.fg
    } else {
        &inputs.reid
    }
}

fn run_sample(
    cfg: &CampaignConfig,
    records: &[&'static Record],
    opts: EvalOptions,
    dim: usize,
    draw: u64,
) -> Result<Option<Vec<Entry>>, HarnessError> {
    let family = cfg.families[draw as usize % cfg.families.len()];
    if !family.supports_dim(dim) {
        return Ok(None);
    }
    let inputs = std::sync::Arc::new(sample_inputs(family, dim, cfg.seed, draw)?);
    let base_ctx = EvalContext::new(&inputs.base, opts);
    let mut out = Vec::with_capacity(records.len() * cfg.param_draws as usize);
    for &rec in records {
        let input = input_for(rec, &inputs);
        let pair_ctx;
        let ctx = if std::ptr::eq(input, &inputs.base) {
            &base_ctx
        } else {
            pair_ctx = EvalContext::new(input, opts);
            &pair_ctx
        };
        for j in 0..cfg.param_draws {
            let params = rec.params_from(&draw_params(param_seed(cfg.seed, dim, draw, j)));
            let outcome = match ctx.evaluate(rec, &params) {
                Ok(res) => {
                    let inputs = inputs.clone();
                    let equality = res.is_equality();
                    let (verdict, slack) = (res.verdict, res.slack);
                    Outcome::Done {
                        verdict,
                        slack,
                        equality,
                        bundle: Box::new(move || {
                            let input = input_for(rec, &inputs);
                            WitnessBundle::new(&trim(input, rec), &params, &res)
                                .with_origin(inputs.family, draw, j)
                        }),
                    }
                }
                Err(e) => Outcome::Failed(e.to_string()),
            };
            out.push(Entry {
                rec,
                dim,
                draw,
                param_draw: j,
                outcome,
            });
        }
    }
    Ok(Some(out))
}

/// Drops the inputs a record does not read, keeping bundles small.
fn trim(input: &EvalInput, rec: &Record) -> EvalInput {
    let needs = rec.needs();
    EvalInput {
        t: input.t.clone(),
        s: if needs.second { input.s.clone() } else { None },
        pair: if needs.pair { input.pair.clone() } else { None },
        x: if needs.vectors { input.x.clone() } else { None },
        y: if needs.vectors { input.y.clone() } else { None },
        scalars: if needs.scalars { input.scalars } else { None },
    }
}

/// Runs the campaign; the report is independent of the thread count.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, HarnessError> {
    cfg.validate()?;
    let records = cfg.records();
    let opts = cfg.eval_options();
    let jobs: Vec<(usize, u64)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.samples_per_dim as u64).map(move |i| (d, i)))
        .collect();
    let results: Vec<Result<Option<Vec<Entry>>, HarnessError>> = jobs
        .par_iter()
        .map(|&(d, i)| run_sample(cfg, &records, opts, d, i))
        .collect();

    let mut summary = Summary::default();
    let mut entries = Vec::new();
    for r in results {
        match r? {
            Some(es) => entries.extend(es),
            None => summary.skipped_samples += 1,
        }
    }
    entries.sort_by(|a, b| {
        (a.rec.id, a.rec.variant, a.dim, a.draw, a.param_draw)
            .cmp(&(b.rec.id, b.rec.variant, b.dim, b.draw, b.param_draw))
    });

    let mut rows: BTreeMap<(&str, Variant, usize), Aggregate> = BTreeMap::new();
    for e in &entries {
        let agg = rows
            .entry((e.rec.id, e.rec.variant, e.dim))
            .or_insert_with(|| Aggregate {
                id: e.rec.id.to_string(),
                variant: e.rec.variant,
                dim: e.dim,
                count: 0,
                holds: 0,
                violated: 0,
                inconclusive: 0,
                errors: 0,
                min_slack: None,
                min_slack_witness: None,
                equality_witnesses: Vec::new(),
                violation_witnesses: Vec::new(),
                error_messages: Vec::new(),
            });
        agg.count += 1;
        summary.evaluations += 1;
        match &e.outcome {
            Outcome::Failed(msg) => {
                agg.errors += 1;
                summary.errors += 1;
                if agg.error_messages.len() < 3 && !agg.error_messages.contains(msg) {
                    agg.error_messages.push(msg.clone());
                }
            }
            Outcome::Done {
                verdict,
                slack,
                equality,
                bundle,
            } => {
                match verdict {
                    Verdict::Holds => {
                        agg.holds += 1;
                        summary.holds += 1;
                    }
                    Verdict::Violated => {
                        agg.violated += 1;
                        summary.violated += 1;
                        if e.rec.variant == Variant::Corrected {
                            summary.corrected_violations += 1;
                        }
                        if agg.violation_witnesses.len() < MAX_VIOLATION_WITNESSES {
                            agg.violation_witnesses.push(bundle());
                        }
                    }
                    Verdict::Inconclusive => {
                        agg.inconclusive += 1;
                        summary.inconclusive += 1;
                    }
                }
                if agg.min_slack.is_none_or(|m| *slack < m) {
                    agg.min_slack = Some(*slack);
                    agg.min_slack_witness = Some(bundle());
                }
                if *equality
                    && *verdict == Verdict::Holds
                    && agg.equality_witnesses.len() < MAX_EQUALITY_WITNESSES
                {
                    agg.equality_witnesses.push(bundle());
                }
            }
        }
    }

    Ok(CampaignReport {
        schema: REPORT_SCHEMA.into(),
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
        },
        timestamp: chrono::Utc::now().to_rfc3339(),
        config: cfg.clone(),
        summary,
        rows: rows.into_values().collect(),
    })
}
