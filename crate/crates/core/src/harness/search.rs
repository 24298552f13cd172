use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::campaign::{param_seed, sample_inputs};
use super::witness::WitnessBundle;
use super::HarnessError;
use crate::catalog::{
    find, known_id, EvalContext, EvalInput, EvalOptions, ExponentParams, FormClass, IneqResult,
    Record, Variant, Verdict,
};
use crate::gen::{self, Family, MAX_DIM};
use crate::matcore::{normalized, ComplexMatrix, C64};

const SEARCH_TAG: u64 = 0x5345_4152_4348;
const STALL_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SearchStatus {
    ConfirmedViolation,
    NoViolationFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub id: String,
    pub variant: Variant,
    pub status: SearchStatus,
    pub evaluations: usize,
    pub best_slack: f64,
    /// Dimension of the best candidate before shrinking.
    pub found_dim: usize,
    pub witness: WitnessBundle,
}

#[derive(Clone)]
struct Candidate {
    input: EvalInput,
    params: ExponentParams,
    family: Family,
    draw: u64,
}

struct Scored {
    cand: Candidate,
    result: IneqResult,
}

struct Searcher {
    rec: &'static Record,
    opts: EvalOptions,
    evaluations: usize,
}

impl Searcher {
    fn score(&mut self, cand: Candidate) -> Option<Scored> {
        self.evaluations += 1;
        let ctx = EvalContext::new(&cand.input, self.opts);
        let result = ctx.evaluate(self.rec, &cand.params).ok()?;
        Some(Scored { cand, result })
    }
}

fn better(a: &Scored, b: &Option<Scored>) -> bool {
    match b {
        None => true,
        Some(b) => rank(&a.result) < rank(&b.result),
    }
}

// Certified violations first, then smaller slack.
fn rank(r: &IneqResult) -> (u8, f64) {
    let v = if r.verdict == Verdict::Violated { 0 } else { 1 };
    (v, r.slack)
}

fn remove_index(input: &EvalInput, k: usize) -> Option<EvalInput> {
    let vec_drop = |x: &Vec<C64>| {
        let mut y = x.clone();
        y.remove(k);
        normalized(&y)
    };
    let mut out = input.clone();
    out.t = input.t.remove_index(k)?;
    if let Some(s) = &input.s {
        out.s = Some(s.remove_index(k)?);
    }
    if let Some(p) = &input.pair {
        let mut q = p.clone();
        q.a = p.a.remove_index(k)?;
        q.b = p.b.remove_index(k)?;
        out.pair = Some(q);
    }
    if let Some(x) = &input.x {
        out.x = Some(vec_drop(x)?);
    }
    if let Some(y) = &input.y {
        out.y = Some(vec_drop(y)?);
    }
    Some(out)
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn round_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| C64::new(round1(z.re), round1(z.im)))
}

/// Random restarts over every generator family and the requested
/// dimensions, then coordinate-wise complex hill descent on the slack, then
/// shrinking of a confirmed violation.
pub fn search(id: &str, variant: Variant, dims: &[usize], budget: usize, seed: u64) -> Result<SearchReport, HarnessError> {
    if !known_id(id) {
        return Err(HarnessError::UnknownId(id.to_string()));
    }
    let rec = find(id, variant).ok_or_else(|| HarnessError::UnknownId(format!("{id} has no {variant} variant")))?;
    if budget == 0 {
        return Err(HarnessError::ConfigInvalid("budget must be at least 1".into()));
    }
    if dims.is_empty() || dims.iter().any(|d| !(1..=MAX_DIM).contains(d)) {
        return Err(HarnessError::ConfigInvalid(format!("dims must lie in [1, {MAX_DIM}]")));
    }
    let mut rng = gen::stream(seed, SEARCH_TAG, 0, 0);
    let mut s = Searcher {
        rec,
        opts: EvalOptions::default(),
        evaluations: 0,
    };
    let perturbable = !rec.needs().pair;

    let slots: Vec<(Family, usize)> = dims
        .iter()
        .flat_map(|&d| Family::ALL.iter().filter(move |f| f.supports_dim(d)).map(move |&f| (f, d)))
        .collect();
    let restarts = budget.div_ceil(2).max(1);
    let mut best: Option<Scored> = None;
    for k in 0..restarts {
        let (family, dim) = slots[k % slots.len()];
        let draw = k as u64;
        let inputs = sample_inputs(family, dim, seed, draw)?;
        let mut input = if rec.needs().pair {
            if rec.id == "KITTANEH_FG_1_4" { inputs.fg } else { inputs.reid }
        } else {
            inputs.base
        };
        // Every other restart rescales T so that both small and large norms
        // are visited.
        if perturbable && k % 2 == 1 {
            let c = rng.random_range(-1.5f64..1.5).exp();
            input.t = input.t.scale_real(c);
        }
        let params = rec.params_from(&gen::draw_params(param_seed(seed, dim, draw, 0)));
        if let Some(sc) = s.score(Candidate {
            input,
            params,
            family,
            draw,
        }) {
            if better(&sc, &best) {
                best = Some(sc);
            }
        }
        if best.as_ref().is_some_and(|b| b.result.verdict == Verdict::Violated) {
            break;
        }
    }
    let mut best = best.ok_or_else(|| {
        HarnessError::ConfigInvalid("no admissible candidate for this inequality".into())
    })?;

    if perturbable {
        let mut step = 0.1;
        let mut stall = 0;
        while s.evaluations < budget && best.result.verdict != Verdict::Violated {
            let mut cand = best.cand.clone();
            if rec.form == FormClass::Scalar {
                let (a, b) = cand.input.scalars.unwrap_or((1.0, 1.0));
                let f = (step * rng.sample::<f64, _>(StandardNormal)).exp();
                cand.input.scalars = Some(if rng.random_bool(0.5) { (a * f, b) } else { (a, b * f) });
            } else {
                let n = cand.input.t.n();
                let scale = cand.input.t.max_abs().max(1e-3);
                let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
                let dz = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                cand.input.t[(i, j)] += dz * (step * scale);
            }
            match s.score(cand) {
                Some(sc) if rank(&sc.result) < rank(&best.result) => {
                    best = sc;
                    stall = 0;
                }
                _ => {
                    stall += 1;
                    if stall >= STALL_LIMIT {
                        step *= 0.5;
                        stall = 0;
                    }
                }
            }
        }
    }

    let found_dim = best.cand.input.t.n();
    let confirmed = best.result.verdict == Verdict::Violated;
    if confirmed {
        best = shrink(&mut s, best);
    }
    let witness = WitnessBundle::new(&best.cand.input, &best.cand.params, &best.result)
        .with_origin(best.cand.family, best.cand.draw, 0);
    Ok(SearchReport {
        id: rec.id.to_string(),
        variant: rec.variant,
        status: if confirmed {
            SearchStatus::ConfirmedViolation
        } else {
            SearchStatus::NoViolationFound
        },
        evaluations: s.evaluations,
        best_slack: best.result.slack,
        found_dim,
        witness,
    })
}

/// Principal submatrices, then rounding to one decimal, as long as the
/// violation stays certified.
fn shrink(s: &mut Searcher, mut best: Scored) -> Scored {
    let still = |sc: &Option<Scored>| sc.as_ref().is_some_and(|x| x.result.verdict == Verdict::Violated);
    'outer: loop {
        let n = best.cand.input.t.n();
        for k in 0..n {
            let Some(input) = remove_index(&best.cand.input, k) else {
                continue;
            };
            let sc = s.score(Candidate {
                input,
                ..best.cand.clone()
            });
            if still(&sc) {
                best = sc.unwrap();
                continue 'outer;
            }
        }
        break;
    }

    let mut rounded = best.cand.clone();
    rounded.input.t = round_matrix(&rounded.input.t);
    rounded.input.s = rounded.input.s.as_ref().map(round_matrix);
    let sc = s.score(rounded);
    if still(&sc) {
        return sc.unwrap();
    }
    let n = best.cand.input.t.n();
    for i in 0..n {
        for j in 0..n {
            let mut cand = best.cand.clone();
            let z = cand.input.t[(i, j)];
            cand.input.t[(i, j)] = C64::new(round1(z.re), round1(z.im));
            if cand.input.t[(i, j)] == z {
                continue;
            }
            let sc = s.score(cand);
            if still(&sc) {
                best = sc.unwrap();
            }
        }
    }
    best
}
