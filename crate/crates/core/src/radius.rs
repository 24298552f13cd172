//! Numerical radius `w(T) = max_θ λmax(Re(e^{iθ}T))` with a certified
//! enclosure, and sampled boundary points of the numerical range.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::interval::{EnclosureMethod, Interval};
use crate::matcore::{hermitian_eigen, operator_norm, ComplexMatrix, MatError, C64};

pub const INITIAL_ANGLES: usize = 64;
pub const MAX_ROUNDS: usize = 24;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RadiusError {
    #[error("width target {0} must be positive and finite")]
    InvalidTarget(f64),
    #[error("numerical radius enclosure [{}, {}] did not reach the width target", .0.lo, .0.hi)]
    WidthNotReached(Interval),
    #[error("too few boundary points requested: {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// `1e−8·max(1, ‖T‖)`.
pub fn default_width_target(t: &ComplexMatrix) -> f64 {
    1e-8 * operator_norm(t).max(1.0)
}

/// `Re(e^{iθ} T)`.
fn rotated_real_part(t: &ComplexMatrix, theta: f64) -> ComplexMatrix {
    let n = t.n();
    let z = C64::from_polar(1.0, theta);
    ComplexMatrix::from_fn(n, |i, j| 0.5 * (z * t[(i, j)] + (z * t[(j, i)]).conj()))
}

#[derive(Debug, Clone, Copy)]
struct Support {
    theta: f64,
    value: f64,
    point: C64,
}

/// One eigensolve gives the support data at `θ` and at `θ + π`.
fn support_pair(t: &ComplexMatrix, theta: f64) -> Result<(Support, Support), MatError> {
    let (vals, vecs) = hermitian_eigen(&rotated_real_part(t, theta))?;
    let n = t.n();
    let top = vecs.column(n - 1);
    let bottom = vecs.column(0);
    Ok((
        Support {
            theta,
            value: vals[n - 1],
            point: t.quad_form(&top),
        },
        Support {
            theta: theta + PI,
            value: -vals[0],
            point: t.quad_form(&bottom),
        },
    ))
}

/// Upper bound for `max |z|` over the boundary arc between two support
/// points, or equivalently for the support function on the angular gap.
fn gap_bound(a: &Support, b: &Support, norm: f64, margin: f64) -> f64 {
    let delta = b.theta - a.theta;
    let tent = 0.5 * (a.value + b.value + norm * delta) + margin;
    // Intersection of the supporting lines, in coordinates rotated by θ_a:
    // x' = h1 and cos(δ)x' − sin(δ)y' = h2.
    let h1 = a.value + margin;
    let h2 = b.value + margin;
    let vertex = if delta > 0.0 && delta < 0.5 * PI {
        let half = (0.5 * delta).sin();
        let y = ((h1 - h2) - 2.0 * h1 * half * half) / delta.sin();
        h1.hypot(y)
    } else {
        f64::INFINITY
    };
    let poly = vertex.max(a.point.norm()).max(b.point.norm()) + margin;
    tent.min(poly)
}

/// Full numerical-radius computation with the maximizing angles retained.
#[derive(Debug, Clone)]
pub struct RadiusReport {
    pub value: Interval,
    /// Every evaluated angle whose support value is within `1e−12·max(1,w)`
    /// of the best one.
    pub maximizers: Vec<f64>,
}

pub fn numerical_radius(t: &ComplexMatrix, width_target: f64) -> Result<Interval, RadiusError> {
    numerical_radius_report(t, width_target).map(|r| r.value)
}

pub fn numerical_radius_report(
    t: &ComplexMatrix,
    width_target: f64,
) -> Result<RadiusReport, RadiusError> {
    if !(width_target > 0.0 && width_target.is_finite()) {
        return Err(RadiusError::InvalidTarget(width_target));
    }
    let n = t.n();
    let norm = operator_norm(t);
    if norm == 0.0 {
        return Ok(RadiusReport {
            value: Interval::point(0.0),
            maximizers: vec![0.0],
        });
    }
    let margin = 8.0 * (n as f64) * f64::EPSILON * norm;

    // Half-circle grid; each solve also yields the antipodal angle.
    let half = INITIAL_ANGLES / 2;
    let mut upper: Vec<Support> = Vec::with_capacity(half);
    let mut lower: Vec<Support> = Vec::with_capacity(half);
    for k in 0..half {
        let (a, b) = support_pair(t, PI * k as f64 / half as f64)?;
        upper.push(a);
        lower.push(b);
    }
    let mut sup: Vec<Support> = upper.into_iter().chain(lower).collect();

    let mut rounds = 0;
    loop {
        let lo = sup
            .iter()
            .map(|s| s.point.norm())
            .fold(0.0f64, f64::max)
            .max(sup.iter().map(|s| s.value - margin).fold(0.0f64, f64::max));
        let m = sup.len();
        let bounds: Vec<f64> = (0..m)
            .map(|i| {
                let a = sup[i];
                let mut b = sup[(i + 1) % m];
                if i + 1 == m {
                    b.theta += 2.0 * PI;
                }
                gap_bound(&a, &b, norm, margin)
            })
            .collect();
        let hi = bounds.iter().copied().fold(lo, f64::max);
        if hi - lo <= width_target || rounds >= MAX_ROUNDS {
            let best = sup.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
            let tie = 1e-12 * best.abs().max(1.0);
            let mut maximizers: Vec<f64> = sup
                .iter()
                .filter(|s| s.value >= best - tie)
                .map(|s| s.theta)
                .collect();
            maximizers.sort_by(f64::total_cmp);
            let value = Interval::new(lo, hi.max(lo), EnclosureMethod::GridLipschitz);
            if hi - lo <= width_target {
                return Ok(RadiusReport { value, maximizers });
            }
            return Err(RadiusError::WidthNotReached(value));
        }
        rounds += 1;
        let threshold = lo + 0.5 * width_target;
        let mut refined = Vec::with_capacity(m * 2);
        for i in 0..m {
            refined.push(sup[i]);
            if bounds[i] > threshold {
                let a = sup[i].theta;
                let b = if i + 1 == m { sup[0].theta + 2.0 * PI } else { sup[i + 1].theta };
                let mid = 0.5 * (a + b);
                refined.push(support_top(t, mid)?);
            }
        }
        sup = refined;
    }
}

fn support_top(t: &ComplexMatrix, theta: f64) -> Result<Support, MatError> {
    let (vals, vecs) = hermitian_eigen(&rotated_real_part(t, theta))?;
    let n = t.n();
    Ok(Support {
        theta,
        value: vals[n - 1],
        point: t.quad_form(&vecs.column(n - 1)),
    })
}

/// Support points `⟨T x_k, x_k⟩` of the numerical range for
/// `θ_k = 2πk/count`, `x_k` a top eigenvector of `Re(e^{iθ_k} T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeBoundary {
    pub points: Vec<(f64, f64)>,
    pub angles: Vec<f64>,
}

impl RangeBoundary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,re,im\n");
        for (theta, (re, im)) in self.angles.iter().zip(&self.points) {
            let _ = writeln!(out, "{theta:.16e},{re:.16e},{im:.16e}");
        }
        out
    }
}

pub fn range_boundary(t: &ComplexMatrix, count: usize) -> Result<RangeBoundary, RadiusError> {
    if count < 3 {
        return Err(RadiusError::TooFewPoints(count));
    }
    let mut points = Vec::with_capacity(count);
    let mut angles = Vec::with_capacity(count);
    for k in 0..count {
        let theta = 2.0 * PI * k as f64 / count as f64;
        let s = support_top(t, theta)?;
        points.push((s.point.re, s.point.im));
        angles.push(theta);
    }
    Ok(RangeBoundary { points, angles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::test_support::random_matrix;
    use crate::matcore::normalized;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn j2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        normalized(&v).unwrap()
    }

    #[test]
    fn identity_radius_is_one() {
        let w = numerical_radius(&ComplexMatrix::identity(3), 1e-10).unwrap();
        assert!(w.contains(1.0) && w.width() <= 1e-9, "{w:?}");
    }

    #[test]
    fn shift_radius_matches_sampling() {
        let t = j2();
        let w = numerical_radius(&t, 1e-10).unwrap();
        assert!(w.contains(0.5), "{w:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let best = (0..100_000)
            .map(|_| t.quad_form(&random_unit(&mut rng, 2)).norm())
            .fold(0.0, f64::max);
        assert!(best <= w.hi && best > 0.49);
    }

    #[test]
    fn normal_radius_is_spectral() {
        let t = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let w = numerical_radius(&t, 1e-10).unwrap();
        assert!(w.contains(1.0));
    }

    #[test]
    fn homogeneity() {
        for seed in 0..10 {
            let t = random_matrix(4, 300 + seed);
            let c = C64::new(0.3 * seed as f64 - 1.0, 0.7);
            let w = numerical_radius(&t, 1e-10).unwrap();
            let wc = numerical_radius(&t.scale(c), 1e-10).unwrap();
            let scaled = w.scale(c.norm());
            assert!(scaled.overlaps(&wc, 1e-12), "{scaled:?} {wc:?}");
        }
    }

    #[test]
    fn adjoint_invariance_and_sandwich() {
        for seed in 0..10 {
            let t = random_matrix(5, 400 + seed);
            let w = numerical_radius(&t, 1e-10).unwrap();
            let ws = numerical_radius(&t.adjoint(), 1e-10).unwrap();
            assert!(w.overlaps(&ws, 1e-12));
            let nt = operator_norm(&t);
            assert!(0.5 * nt - 1e-8 <= w.hi && w.lo <= nt + 1e-8);
        }
    }

    #[test]
    fn hermitian_radius_is_norm() {
        let t = random_matrix(4, 9).hermitian_part();
        let w = numerical_radius(&t, 1e-10).unwrap();
        assert!(w.contains_with(operator_norm(&t), 1e-8));
    }

    #[test]
    fn report_keeps_tied_maximizers() {
        // identity: every angle 0 attains 1; its antipode does not
        let r = numerical_radius_report(&ComplexMatrix::identity(2), 1e-10).unwrap();
        assert!(r.maximizers.contains(&0.0));
        // J2 has a circular range: many angles tie
        let r = numerical_radius_report(&j2(), 1e-10).unwrap();
        assert!(r.maximizers.len() > 10);
    }

    #[test]
    fn invalid_target_rejected() {
        assert!(matches!(
            numerical_radius(&j2(), 0.0),
            Err(RadiusError::InvalidTarget(_))
        ));
    }

    #[test]
    fn boundary_examples() {
        let b = range_boundary(&ComplexMatrix::identity(2), 4).unwrap();
        assert!(b.points.iter().all(|&(re, im)| (re - 1.0).abs() < 1e-14 && im.abs() < 1e-14));

        let b = range_boundary(&j2(), 360).unwrap();
        assert!(b.points.iter().all(|&(re, im)| (re.hypot(im) - 0.5).abs() < 1e-8));

        let b = range_boundary(&ComplexMatrix::diag_real(&[0.0, 1.0]), 16).unwrap();
        assert!(b
            .points
            .iter()
            .all(|&(re, im)| im.abs() < 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&re)));
        assert!(matches!(range_boundary(&j2(), 2), Err(RadiusError::TooFewPoints(2))));
    }

    #[test]
    fn csv_format() {
        let b = range_boundary(&ComplexMatrix::identity(1), 3).unwrap();
        let csv = b.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,re,im"));
        assert_eq!(lines.count(), 3);
        assert!(csv.contains("1.0000000000000000e0"));
    }

    #[test]
    fn hull_contains_random_range_points() {
        let t = random_matrix(3, 11);
        let b = range_boundary(&t, 720).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let x = random_unit(&mut rng, 3);
            let z = t.quad_form(&x);
            // z must lie inside every supporting half-plane of the samples
            for (theta, &(re, im)) in b.angles.iter().zip(&b.points) {
                let rot = C64::from_polar(1.0, *theta);
                let h = (rot * C64::new(re, im)).re;
                assert!((rot * z).re <= h + 1e-7);
            }
        }
    }
}
