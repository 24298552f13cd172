//! Infima over the unit sphere of differences of quadratic forms of two PSD
//! matrices, raised to powers:
//!
//! `inf_{‖x‖=1} (⟨a x,x⟩^u − ⟨b x,x⟩^v)²`.
//!
//! The pair `(⟨a x,x⟩, ⟨b x,x⟩)` ranges over a convex planar set (the
//! numerical range of `a + ib`). The objective `g(s,t) = s^u − t^v` is
//! monotone in each coordinate, so when `g` keeps one sign its minimum is
//! attained on the boundary arc whose outward normals lie in a single
//! quadrant. That arc is swept by support directions; each pair of
//! neighbouring support points together with the intersection of their
//! supporting lines bounds a triangle containing the arc between them,
//! which yields a certified lower bound.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::interval::{pow0, EnclosureMethod, Interval};
use crate::matcore::{
    eigh, hermitian_eigen, inner, normalized, vec_norm, ComplexMatrix, HermitianMatrix, MatError,
    PsdMatrix, C64,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SphereError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("exponents must be positive and finite (u = {0}, v = {1})")]
    ExponentDomain(f64, f64),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// `(⟨a x,x⟩^u − ⟨b x,x⟩^v)²` over unit `x`.
#[derive(Debug, Clone)]
pub struct FormPair {
    pub a: PsdMatrix,
    pub b: PsdMatrix,
    pub u: f64,
    pub v: f64,
}

impl FormPair {
    pub fn new(a: PsdMatrix, b: PsdMatrix, u: f64, v: f64) -> Result<Self, SphereError> {
        if a.n() != b.n() {
            return Err(SphereError::DimensionMismatch(a.n(), b.n()));
        }
        if !(u > 0.0 && v > 0.0 && u.is_finite() && v.is_finite()) {
            return Err(SphereError::ExponentDomain(u, v));
        }
        Ok(Self { a, b, u, v })
    }

    /// Objective at a (not necessarily normalized) vector.
    pub fn objective(&self, x: &[C64]) -> f64 {
        let (s, t) = forms(self.a.as_matrix(), self.b.as_matrix(), x);
        let g = pow0(s, self.u) - pow0(t, self.v);
        g * g
    }
}

#[derive(Debug, Clone)]
pub struct InfResult {
    pub value: Interval,
    /// Unit vector whose objective value lies in `[value.lo, value.hi]`.
    pub witness: Vec<C64>,
    pub attained_zero: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct InfOptions {
    /// Initial number of support angles on the relevant quarter circle.
    pub initial_angles: usize,
    /// Target width of the returned interval, relative to `max(1, value)`.
    pub width_target: f64,
    /// Cap on the total number of support angles.
    pub max_angles: usize,
}

impl Default for InfOptions {
    fn default() -> Self {
        Self {
            initial_angles: 24,
            width_target: 1e-10,
            max_angles: 2048,
        }
    }
}

fn forms(a: &ComplexMatrix, b: &ComplexMatrix, x: &[C64]) -> (f64, f64) {
    let nn = inner(x, x).re;
    (
        (a.quad_form(x).re / nn).max(0.0),
        (b.quad_form(x).re / nn).max(0.0),
    )
}

fn check_dims(a: &PsdMatrix, b: &PsdMatrix) -> Result<(), SphereError> {
    if a.n() != b.n() {
        Err(SphereError::DimensionMismatch(a.n(), b.n()))
    } else {
        Ok(())
    }
}

fn difference_eigen(a: &PsdMatrix, b: &PsdMatrix) -> Result<(Vec<f64>, ComplexMatrix), MatError> {
    let d = HermitianMatrix::new(a.as_matrix() - b.as_matrix())?;
    let e = eigh(&d)?;
    Ok((e.values, e.vectors))
}

fn eig_margin(n: usize, scale: f64) -> f64 {
    16.0 * n as f64 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

/// Unit vector in the span of the extreme eigenvectors with `⟨d x,x⟩ = 0`,
/// for `λmin ≤ 0 ≤ λmax`.
fn zero_crossing(lmin: f64, lmax: f64, vmin: &[C64], vmax: &[C64]) -> Vec<C64> {
    let gap = lmax - lmin;
    if gap <= 0.0 {
        return vmin.to_vec();
    }
    let cmin = (lmax / gap).max(0.0).sqrt();
    let cmax = (-lmin / gap).max(0.0).sqrt();
    let x: Vec<C64> = vmin.iter().zip(vmax).map(|(p, q)| p * cmin + q * cmax).collect();
    normalized(&x).unwrap_or_else(|| vmin.to_vec())
}

/// `inf (⟨a x,x⟩ − ⟨b x,x⟩)²` in closed form from the extreme eigenvalues
/// of `a − b`.
pub fn inf_sq_form_diff(a: &PsdMatrix, b: &PsdMatrix) -> Result<InfResult, SphereError> {
    check_dims(a, b)?;
    let n = a.n();
    let (vals, vecs) = difference_eigen(a, b)?;
    let (lmin, lmax) = (vals[0], vals[n - 1]);
    let err = eig_margin(n, a.norm().max(b.norm()));
    let vmin = vecs.column(0);
    let vmax = vecs.column(n - 1);
    let d = a.as_matrix() - b.as_matrix();
    if lmin <= 0.0 && lmax >= 0.0 {
        let x = zero_crossing(lmin, lmax, &vmin, &vmax);
        let at = d.quad_form(&x).re.powi(2);
        return Ok(InfResult {
            value: Interval::new(0.0, at, EnclosureMethod::ExactFormula),
            witness: x,
            attained_zero: true,
        });
    }
    let (lam, x) = if lmin > 0.0 { (lmin, vmin) } else { (-lmax, vmax) };
    let lo = (lam - err).max(0.0).powi(2);
    let at = d.quad_form(&x).re.powi(2);
    let hi = ((lam + err).powi(2)).max(at);
    Ok(InfResult {
        value: Interval::new(lo, hi, EnclosureMethod::ExactFormula),
        witness: x,
        attained_zero: false,
    })
}

/// `inf ⟨(a − b) x,x⟩ = λmin(a − b)`, with the eigenvector as witness.
pub fn inf_form_diff(a: &PsdMatrix, b: &PsdMatrix) -> Result<InfResult, SphereError> {
    check_dims(a, b)?;
    let n = a.n();
    let (vals, vecs) = difference_eigen(a, b)?;
    let err = eig_margin(n, a.norm().max(b.norm()));
    Ok(InfResult {
        value: Interval::around(vals[0], err),
        witness: vecs.column(0),
        attained_zero: false,
    })
}

pub fn inf_power_diff(p: &FormPair) -> Result<InfResult, SphereError> {
    inf_power_diff_with(p, &InfOptions::default())
}

#[derive(Debug, Clone)]
struct Node {
    theta: f64,
    h: f64,
    s: f64,
    t: f64,
    x: Vec<C64>,
}

struct Sweep<'a> {
    a: &'a ComplexMatrix,
    b: &'a ComplexMatrix,
    u: f64,
    v: f64,
    margin: f64,
}

impl Sweep<'_> {
    fn g(&self, s: f64, t: f64) -> f64 {
        pow0(s.max(0.0), self.u) - pow0(t.max(0.0), self.v)
    }

    fn gx(&self, x: &[C64]) -> f64 {
        let (s, t) = forms(self.a, self.b, x);
        self.g(s, t)
    }

    fn node(&self, theta: f64) -> Result<Node, MatError> {
        let (c, sn) = (theta.cos(), theta.sin());
        let m = ComplexMatrix::from_fn(self.a.n(), |i, j| {
            self.a[(i, j)] * c + self.b[(i, j)] * sn
        });
        let (vals, vecs) = hermitian_eigen(&m.hermitian_part())?;
        let x = vecs.column(self.a.n() - 1);
        let (s, t) = forms(self.a, self.b, &x);
        Ok(Node {
            theta,
            h: vals[self.a.n() - 1],
            s,
            t,
            x,
        })
    }

    /// Points of the segment path `normalize((1−λ) x + λ c y)` with the
    /// phase `c` chosen so that the combination never cancels.
    fn path(&self, x: &[C64], y: &[C64], lam: f64) -> Vec<C64> {
        let ip = inner(x, y);
        let c = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
        let z: Vec<C64> = x
            .iter()
            .zip(y)
            .map(|(p, q)| p * (1.0 - lam) + q * c * lam)
            .collect();
        normalized(&z).unwrap_or_else(|| x.to_vec())
    }

    /// Bisection for a sign change of `g` between `pos` (g > 0) and `neg`.
    fn zero_between(&self, pos: &[C64], neg: &[C64]) -> Vec<C64> {
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut best = pos.to_vec();
        let mut best_abs = self.gx(pos).abs();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let z = self.path(pos, neg, mid);
            let g = self.gx(&z);
            if g.abs() < best_abs {
                best_abs = g.abs();
                best = z;
            }
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best
    }

    /// Best point on the path between two support vectors (coarse grid then
    /// golden section).
    fn chord_search(&self, x: &[C64], y: &[C64]) -> (f64, Vec<C64>) {
        const GRID: usize = 16;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=GRID {
            let lam = k as f64 / GRID as f64;
            let g = self.gx(&self.path(x, y, lam));
            if g < best.0 {
                best = (g, lam);
            }
        }
        let h = 1.0 / GRID as f64;
        let (mut lo, mut hi) = ((best.1 - h).max(0.0), (best.1 + h).min(1.0));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        let mut gc = self.gx(&self.path(x, y, c));
        let mut gd = self.gx(&self.path(x, y, d));
        for _ in 0..40 {
            if gc < gd {
                hi = d;
                d = c;
                gd = gc;
                c = hi - phi * (hi - lo);
                gc = self.gx(&self.path(x, y, c));
            } else {
                lo = c;
                c = d;
                gc = gd;
                d = lo + phi * (hi - lo);
                gd = self.gx(&self.path(x, y, d));
            }
        }
        for (g, lam) in [(gc, c), (gd, d)] {
            if g < best.0 {
                best = (g, lam);
            }
        }
        (best.0, self.path(x, y, best.1))
    }

    /// Lower bound of `g` over the triangle spanned by two neighbouring
    /// support points and the intersection of their supporting lines,
    /// widened by the eigenvalue margin.
    fn gap_lower(&self, p: &Node, q: &Node, threshold: f64, tol: f64) -> f64 {
        let m = self.margin;
        let delta = q.theta - p.theta;
        let h1 = p.h + m;
        let h2 = q.h + m;
        // Rotate so that p's normal is the first axis: x' = h1 and
        // cos(δ)x' + sin(δ)y' = h2.
        let half = (0.5 * delta).sin();
        let yr = ((h2 - h1) + 2.0 * h1 * half * half) / delta.sin();
        let (sn, cs) = p.theta.sin_cos();
        let vs = cs * h1 - sn * yr;
        let vt = sn * h1 + cs * yr;
        let shift = |s: f64, t: f64| (s - m, t + m);
        let a = shift(p.s, p.t);
        let b = shift(q.s, q.t);
        let v = shift(vs, vt);
        if !(vs.is_finite() && vt.is_finite()) {
            return self.g(a.0.min(b.0), a.1.max(b.1));
        }
        let mut lb = f64::INFINITY;
        for (x, y) in [(a, v), (v, b), (a, b)] {
            lb = lb.min(self.segment_lower(x, y, threshold, tol));
        }
        lb
    }

    /// Branch and bound for the minimum of `g` along a segment, combining a
    /// monotone endpoint bound with a mean-value bound.
    fn segment_lower(&self, a: (f64, f64), b: (f64, f64), threshold: f64, tol: f64) -> f64 {
        let ds = b.0 - a.0;
        let dt = b.1 - a.1;
        let at = |lam: f64| (a.0 + lam * ds, a.1 + lam * dt);
        let piece_bound = |l0: f64, l1: f64| -> (f64, f64) {
            let (s0, t0) = at(l0);
            let (s1, t1) = at(l1);
            let (smin, smax) = (s0.min(s1).max(0.0), s0.max(s1).max(0.0));
            let (tmin, tmax) = (t0.min(t1).max(0.0), t0.max(t1).max(0.0));
            let mono = pow0(smin, self.u) - pow0(tmax, self.v);
            let (sm, tm) = at(0.5 * (l0 + l1));
            let gm = self.g(sm, tm);
            // derivative of each term is monotone in λ; bound it at the ends
            let dterm = |lo: f64, hi: f64, e: f64, slope: f64| -> f64 {
                if slope == 0.0 {
                    return 0.0;
                }
                let f = |z: f64| {
                    if e == 1.0 {
                        1.0
                    } else if z <= 0.0 {
                        if e > 1.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        z.powf(e - 1.0)
                    }
                };
                (e * slope).abs() * f(lo).max(f(hi))
            };
            let dmax = dterm(smin, smax, self.u, ds) + dterm(tmin, tmax, self.v, dt);
            let mv = gm - 0.5 * (l1 - l0) * dmax;
            (mono.max(mv), gm)
        };
        let mut pieces = vec![(0.0, 1.0)];
        let mut settled = f64::INFINITY;
        let mut budget = 256;
        while let Some((l0, l1)) = pieces.pop() {
            let (lb, gm) = piece_bound(l0, l1);
            if lb >= threshold || gm - lb <= 0.1 * tol || budget == 0 || l1 - l0 < 1e-14 {
                settled = settled.min(lb);
                continue;
            }
            budget -= 1;
            let mid = 0.5 * (l0 + l1);
            pieces.push((l0, mid));
            pieces.push((mid, l1));
        }
        settled
    }
}

pub fn inf_power_diff_with(p: &FormPair, opts: &InfOptions) -> Result<InfResult, SphereError> {
    check_dims(&p.a, &p.b)?;
    if !(p.u > 0.0 && p.v > 0.0 && p.u.is_finite() && p.v.is_finite()) {
        return Err(SphereError::ExponentDomain(p.u, p.v));
    }
    let n = p.a.n();
    if n == 1 {
        let x = vec![C64::new(1.0, 0.0)];
        let val = p.objective(&x);
        return Ok(InfResult {
            value: Interval::point(val),
            witness: x,
            attained_zero: val == 0.0,
        });
    }
    if p.u == 1.0 && p.v == 1.0 {
        return inf_sq_form_diff(&p.a, &p.b);
    }

    let scale = p.a.norm().max(p.b.norm());
    let sweep = Sweep {
        a: p.a.as_matrix(),
        b: p.b.as_matrix(),
        u: p.u,
        v: p.v,
        margin: eig_margin(n, scale),
    };
    let zero_result = |x: Vec<C64>| InfResult {
        value: Interval::new(0.0, p.objective(&x), EnclosureMethod::ExactFormula),
        witness: x,
        attained_zero: true,
    };

    // Candidate vectors: extreme eigenvectors of a, b and a − b.
    let (dvals, dvecs) = difference_eigen(&p.a, &p.b)?;
    if p.u == p.v && dvals[0] <= 0.0 && dvals[n - 1] >= 0.0 {
        // equal exponents: the sign of g is the sign of ⟨(a − b)x,x⟩
        let x = zero_crossing(dvals[0], dvals[n - 1], &dvecs.column(0), &dvecs.column(n - 1));
        return Ok(zero_result(x));
    }
    let ea = p.a.eigen();
    let eb = p.b.eigen();
    let candidates = [
        ea.vector(0),
        ea.vector(n - 1),
        eb.vector(0),
        eb.vector(n - 1),
        dvecs.column(0),
        dvecs.column(n - 1),
    ];
    let gs: Vec<f64> = candidates.iter().map(|x| sweep.gx(x)).collect();
    if let Some(k) = gs.iter().position(|&g| g == 0.0) {
        return Ok(zero_result(candidates[k].clone()));
    }
    let ipos = gs.iter().position(|&g| g > 0.0);
    let ineg = gs.iter().position(|&g| g < 0.0);
    if let (Some(i), Some(j)) = (ipos, ineg) {
        return Ok(zero_result(sweep.zero_between(&candidates[i], &candidates[j])));
    }

    // Orient so that g > 0 on every point seen so far.
    let sweep = if ineg.is_some() {
        Sweep {
            a: p.b.as_matrix(),
            b: p.a.as_matrix(),
            u: p.v,
            v: p.u,
            margin: sweep.margin,
        }
    } else {
        sweep
    };
    let anchor = candidates[0].clone();

    let k0 = opts.initial_angles.max(2);
    let mut nodes = Vec::with_capacity(k0 + 1);
    for k in 0..=k0 {
        let theta = 0.5 * PI + 0.5 * PI * k as f64 / k0 as f64;
        let nd = sweep.node(theta)?;
        if sweep.g(nd.s, nd.t) <= 0.0 {
            return Ok(zero_result(sweep.zero_between(&anchor, &nd.x)));
        }
        nodes.push(nd);
    }

    let mut best_val = f64::INFINITY;
    let mut best_x = nodes[0].x.clone();
    for nd in &nodes {
        let g = sweep.g(nd.s, nd.t);
        if g < best_val {
            best_val = g;
            best_x = nd.x.clone();
        }
    }

    let tolerance = |u: f64| {
        let abs = opts.width_target * u.powi(2).max(1.0);
        if u > 0.0 {
            (abs / (2.0 * u)).min(abs.sqrt())
        } else {
            abs.sqrt()
        }
    };

    let mut lower;
    loop {
        let tol = tolerance(best_val);
        let threshold = best_val - tol;
        let mut open = Vec::new();
        lower = f64::INFINITY;
        for i in 0..nodes.len() - 1 {
            let lb = sweep.gap_lower(&nodes[i], &nodes[i + 1], threshold, tol);
            lower = lower.min(lb);
            if lb < threshold {
                open.push(i);
            }
        }
        if open.is_empty() || nodes.len() >= opts.max_angles {
            break;
        }
        // Improve the upper end along chords of open gaps, then split them.
        let mut fresh = Vec::with_capacity(open.len());
        for &i in &open {
            let (g, x) = sweep.chord_search(&nodes[i].x, &nodes[i + 1].x);
            if g <= 0.0 {
                return Ok(zero_result(sweep.zero_between(&anchor, &x)));
            }
            if g < best_val {
                best_val = g;
                best_x = x;
            }
            let theta = 0.5 * (nodes[i].theta + nodes[i + 1].theta);
            if nodes[i + 1].theta - nodes[i].theta > 1e-13 {
                fresh.push(sweep.node(theta)?);
            }
        }
        if fresh.is_empty() {
            break;
        }
        for nd in &fresh {
            let g = sweep.g(nd.s, nd.t);
            if g <= 0.0 {
                return Ok(zero_result(sweep.zero_between(&anchor, &nd.x)));
            }
            if g < best_val {
                best_val = g;
                best_x = nd.x.clone();
            }
        }
        nodes.extend(fresh);
        nodes.sort_by(|p, q| p.theta.total_cmp(&q.theta));
    }

    let g_hi = sweep.gx(&best_x).max(best_val);
    let g_lo = lower.min(g_hi).max(0.0);
    Ok(InfResult {
        value: Interval::new(g_lo * g_lo, g_hi * g_hi, EnclosureMethod::GridLipschitz),
        witness: best_x,
        attained_zero: false,
    })
}

/// Upper bound on the infimum from random starts refined by normalized
/// gradient descent on the sphere.
pub fn sphere_brute_oracle(p: &FormPair, samples: usize, descent_steps: usize, seed: u64) -> f64 {
    let n = p.a.n();
    let a = p.a.as_matrix();
    let b = p.b.as_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let raw: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let Some(mut x) = normalized(&raw) else { continue };
        let mut fx = p.objective(&x);
        let mut step = 1e-2;
        for _ in 0..descent_steps {
            if fx == 0.0 || step < 1e-12 {
                break;
            }
            let (s, t) = forms(a, b, &x);
            let gval = pow0(s, p.u) - pow0(t, p.v);
            let ds = p.u * s.max(1e-300).powf(p.u - 1.0);
            let dt = p.v * t.max(1e-300).powf(p.v - 1.0);
            let ax = a.apply(&x);
            let bx = b.apply(&x);
            let mut grad: Vec<C64> = ax
                .iter()
                .zip(&bx)
                .map(|(pa, pb)| (pa * ds - pb * dt) * (2.0 * gval))
                .collect();
            let radial = inner(&grad, &x);
            for (gi, xi) in grad.iter_mut().zip(&x) {
                *gi -= xi * radial;
            }
            let gn = vec_norm(&grad);
            if gn == 0.0 || !gn.is_finite() {
                break;
            }
            let trial: Vec<C64> = x.iter().zip(&grad).map(|(xi, gi)| xi - gi * (step / gn)).collect();
            let Some(trial) = normalized(&trial) else { break };
            let ft = p.objective(&trial);
            if ft < fx {
                x = trial;
                fx = ft;
            } else {
                step *= 0.5;
            }
        }
        best = best.min(fx);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::test_support::random_psd;

    fn psd(d: &[f64]) -> PsdMatrix {
        PsdMatrix::from_matrix(ComplexMatrix::diag_real(d)).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let a = random_psd(3, 1);
        let r = inf_sq_form_diff(&a, &a).unwrap();
        assert!(r.value.contains(0.0) && r.attained_zero);

        let r = inf_sq_form_diff(&psd(&[3.0, 4.0]), &psd(&[2.0, 2.0])).unwrap();
        assert!(r.value.contains(1.0) && r.value.width() < 1e-12);
        assert!((r.witness[0].norm() - 1.0).abs() < 1e-14);

        let r = inf_sq_form_diff(&psd(&[0.0, 3.0]), &psd(&[1.0, 1.0])).unwrap();
        assert!(r.value.contains(0.0) && r.value.hi < 1e-20);
        let d = ComplexMatrix::diag_real(&[-1.0, 2.0]);
        assert!(d.quad_form(&r.witness).re.abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_oracle() {
        for seed in 0..5 {
            let a = random_psd(3, 10 + seed);
            let b = random_psd(3, 20 + seed).hermitian().as_matrix().scale_real(0.2);
            let b = PsdMatrix::from_matrix(b).unwrap();
            let r = inf_sq_form_diff(&a, &b).unwrap();
            let p = FormPair::new(a, b, 1.0, 1.0).unwrap();
            let o = sphere_brute_oracle(&p, 2000, 200, seed);
            assert!((o - r.value.mid()).abs() < 1e-4, "{o} {:?}", r.value);
            assert!(o >= r.value.lo - 1e-9);
        }
    }

    #[test]
    fn scaling_is_quadratic() {
        let a = random_psd(4, 3);
        let b = PsdMatrix::from_matrix(random_psd(4, 4).as_matrix().scale_real(0.1)).unwrap();
        let r = inf_sq_form_diff(&a, &b).unwrap();
        let a3 = PsdMatrix::from_matrix(a.as_matrix().scale_real(3.0)).unwrap();
        let b3 = PsdMatrix::from_matrix(b.as_matrix().scale_real(3.0)).unwrap();
        let r3 = inf_sq_form_diff(&a3, &b3).unwrap();
        assert!(r.value.scale(9.0).overlaps(&r3.value, 1e-10));
    }

    #[test]
    fn power_diff_examples() {
        let a = random_psd(3, 5);
        let p = FormPair::new(a.clone(), a, 0.7, 0.7).unwrap();
        assert!(inf_power_diff(&p).unwrap().value.contains(0.0));

        let p = FormPair::new(psd(&[4.0]), psd(&[9.0]), 0.5, 0.5).unwrap();
        assert_eq!(inf_power_diff(&p).unwrap().value.mid(), 1.0);

        let p = FormPair::new(psd(&[0.0, 1.0]), psd(&[1.0, 0.0]), 1.0, 1.0).unwrap();
        let r = inf_power_diff(&p).unwrap();
        assert!(r.value.hi <= 1e-8 && r.attained_zero);
    }

    #[test]
    fn power_diff_rejects_bad_input() {
        let a = psd(&[1.0, 2.0]);
        assert!(matches!(
            FormPair::new(a.clone(), a.clone(), 0.0, 1.0),
            Err(SphereError::ExponentDomain(..))
        ));
        let p = FormPair {
            a: a.clone(),
            b: psd(&[1.0]),
            u: 1.0,
            v: 1.0,
        };
        assert!(matches!(inf_power_diff(&p), Err(SphereError::DimensionMismatch(2, 1))));
    }

    #[test]
    fn power_diff_matches_oracle_on_definite_pairs() {
        for seed in 0..8 {
            let n = 2 + seed as usize % 3;
            let a = PsdMatrix::from_matrix(
                &random_psd(n, 40 + seed).as_matrix().scale_real(2.0) + &ComplexMatrix::identity(n),
            )
            .unwrap();
            let b = PsdMatrix::from_matrix(random_psd(n, 50 + seed).as_matrix().scale_real(0.3)).unwrap();
            let p = FormPair::new(a, b, 0.75, 1.5).unwrap();
            let r = inf_power_diff(&p).unwrap();
            let o = sphere_brute_oracle(&p, 3000, 100, seed);
            assert!(o >= r.value.lo - 1e-9, "{o} {:?}", r.value);
            assert!((o - r.value.hi).abs() < 1e-3, "{o} {:?}", r.value);
            assert!((p.objective(&r.witness) - r.value.hi).abs() <= 1e-9);
        }
    }

    #[test]
    fn polygonal_joint_range() {
        // commuting diagonal pair: the joint range is a polygon with flat faces
        let a = psd(&[1.0, 2.0, 4.0]);
        let b = psd(&[0.1, 0.5, 0.2]);
        let p = FormPair::new(a, b, 0.5, 2.0).unwrap();
        let r = inf_power_diff(&p).unwrap();
        let o = sphere_brute_oracle(&p, 2000, 200, 1);
        assert!(o >= r.value.lo - 1e-9);
        assert!((o - r.value.hi).abs() < 1e-3, "{o} {:?}", r.value);
    }

    #[test]
    fn oracle_finds_matched_trace_zero() {
        let p = FormPair::new(psd(&[0.0, 1.0]), psd(&[1.0, 0.0]), 1.0, 1.0).unwrap();
        assert!(sphere_brute_oracle(&p, 10_000, 50, 3) <= 1e-8);
    }

    #[test]
    fn linear_form_infimum() {
        let r = inf_form_diff(&psd(&[1.0, 5.0]), &psd(&[3.0, 1.0])).unwrap();
        assert!(r.value.contains(-2.0));
    }
}
