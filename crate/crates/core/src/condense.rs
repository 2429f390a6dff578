//! Exact data condensation for least-squares fits of lines and of
//! piecewise-linear curves with known candidate knots.
//!
//! [`linear_condense`] replaces any weighted point set `P` by at most two
//! synthetic points `P'` such that for every line `L`
//! `SE(L, P) = SE(L, P') + SE(best_fit_line(P), P)`, with the x-range of
//! `P'` inside that of `P`. [`condense_around_knots`] applies it between
//! each pair of adjacent knots, which preserves the squared error of every
//! curve whose knots are drawn from those knots, up to a constant.

use crate::error::{Error, Result};
use crate::exec;
use crate::points::WeightedPoint;

/// `y = m * x + b`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub m: f64,
    pub b: f64,
}

impl Line {
    pub const ZERO: Line = Line { m: 0.0, b: 0.0 };

    pub fn new(m: f64, b: f64) -> Self {
        Self { m, b }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.m * x + self.b
    }
}

/// Synthetic points plus the curve-independent part of the squared error.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CondensedSet {
    pub points: Vec<WeightedPoint>,
    pub constant: f64,
}

/// `sum w * (f(x) - y)^2`; zero for an empty set.
pub fn squared_error(f: impl Fn(f64) -> f64, points: &[WeightedPoint]) -> f64 {
    points.iter().map(|p| p.w * (f(p.x) - p.y).powi(2)).sum()
}

/// Centered weighted moments of a non-empty point set.
struct Moments {
    total_w: f64,
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    sxy: f64,
    min_x: f64,
    max_x: f64,
}

impl Moments {
    fn of(points: &[WeightedPoint]) -> Option<Self> {
        if points.is_empty() {
            return None;
        }
        let mut total_w = 0.0;
        let (mut sx, mut sy) = (0.0, 0.0);
        let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            total_w += p.w;
            sx += p.w * p.x;
            sy += p.w * p.y;
            min_x = min_x.min(p.x);
            max_x = max_x.max(p.x);
        }
        let (mean_x, mean_y) = (sx / total_w, sy / total_w);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for p in points {
            let dx = p.x - mean_x;
            sxx += p.w * dx * dx;
            sxy += p.w * dx * (p.y - mean_y);
        }
        Some(Self { total_w, mean_x, mean_y, sxx, sxy, min_x, max_x })
    }

    /// All x effectively equal: the best fit line is horizontal.
    fn x_degenerate(&self) -> bool {
        let scale = self.min_x.abs().max(self.max_x.abs());
        let (lo, hi) = (self.min_x - self.mean_x, self.max_x - self.mean_x);
        hi - lo <= 1e-12 * scale || !(lo < 0.0 && hi > 0.0) || self.sxx <= 0.0
    }

    fn slope(&self) -> f64 {
        if self.x_degenerate() {
            0.0
        } else {
            self.sxy / self.sxx
        }
    }
}

/// Weighted least-squares line. An empty set gives `y = 0`; a set whose
/// x-values are all equal gives the horizontal line through the weighted
/// mean of y.
pub fn best_fit_line(points: &[WeightedPoint]) -> Line {
    match Moments::of(points) {
        None => Line::ZERO,
        Some(mo) => {
            let m = mo.slope();
            Line::new(m, mo.mean_y - m * mo.mean_x)
        }
    }
}

/// Condenses a point set to at most two points; see the module docs.
pub fn linear_condense(points: &[WeightedPoint]) -> CondensedSet {
    let Some(mo) = Moments::of(points) else {
        return CondensedSet::default();
    };
    let m = mo.slope();
    // residual about the best fit line, computed directly rather than as
    // syy - m * sxy to avoid cancellation on near-linear data
    let constant = points
        .iter()
        .map(|p| {
            let r = (p.y - mo.mean_y) - m * (p.x - mo.mean_x);
            p.w * r * r
        })
        .sum();

    if mo.x_degenerate() {
        return CondensedSet {
            points: vec![WeightedPoint::new(mo.mean_x.clamp(mo.min_x, mo.max_x), mo.mean_y, mo.total_w)],
            constant,
        };
    }

    // Centered frame: mean at the origin, best fit line skewed to y = 0.
    let lo = mo.min_x - mo.mean_x;
    let hi = mo.max_x - mo.mean_x;
    let sd = (mo.sxx / mo.total_w).sqrt();
    let x1 = -sd * (-lo / hi).sqrt();
    let x2 = sd * (hi / -lo).sqrt();
    let w1 = mo.total_w * hi / (hi - lo);
    let w2 = mo.total_w * -lo / (hi - lo);

    let place = |dx: f64, w: f64| {
        // containment holds exactly in theory; clamp away rounding drift
        let x = (mo.mean_x + dx).clamp(mo.min_x, mo.max_x);
        WeightedPoint::new(x, mo.mean_y + m * (x - mo.mean_x), w)
    };
    CondensedSet {
        points: vec![place(x1, w1), place(x2, w2)],
        constant,
    }
}

pub(crate) fn validate_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::InvalidKnots(format!(
            "need at least 2 knots, got {}",
            knots.len()
        )));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidKnots("knots must be finite".into()));
    }
    if let Some(w) = knots.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidKnots(format!(
            "knots must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Index of the knot interval holding `x`: `[K[i], K[i+1])`, with the
/// last interval closed. `x` must already be clamped to the knot range.
#[inline]
pub(crate) fn interval_of(knots: &[f64], x: f64) -> usize {
    let i = knots.partition_point(|&k| k <= x);
    i.saturating_sub(1).min(knots.len() - 2)
}

/// Clamps points into `[K[0], K[last]]`, partitions them by adjacent
/// knots and condenses each partition. Empty partitions contribute no
/// points.
pub fn condense_around_knots(points: &[WeightedPoint], knots: &[f64]) -> Result<CondensedSet> {
    condense_around_knots_with(points, knots, exec::PARALLEL_AVAILABLE)
}

/// [`condense_around_knots`] with explicit control over parallelism.
pub fn condense_around_knots_with(
    points: &[WeightedPoint],
    knots: &[f64],
    parallel: bool,
) -> Result<CondensedSet> {
    validate_knots(knots)?;
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    let mut buckets: Vec<Vec<WeightedPoint>> = vec![Vec::new(); knots.len() - 1];
    for p in points {
        let x = p.x.clamp(first, last);
        buckets[interval_of(knots, x)].push(WeightedPoint::new(x, p.y, p.w));
    }
    let parts = exec::map_slice(&buckets, parallel, |b| linear_condense(b));
    let mut out = CondensedSet {
        points: Vec::with_capacity(2 * parts.len()),
        constant: 0.0,
    };
    for part in parts {
        out.points.extend(part.points);
        out.constant += part.constant;
    }
    Ok(out)
}
