//! Least-squares y-knots for fixed x-knots, optionally with slope bounds.
//!
//! A curve with knots `t_0 < ... < t_{K-1}` (in transformed space) is
//! linear in its y-knots: a point at `x` in `[t_j, t_{j+1}]` contributes
//! `(1 - s)` to knot `j` and `s` to knot `j + 1`, `s = (x - t_j) / (t_{j+1} - t_j)`.
//! The normal equations are therefore tridiagonal.

use nalgebra::{DMatrix, DVector};

use crate::condense::validate_knots;
use crate::error::{Error, Result};
use crate::points::WeightedPoint;
use crate::transform::Transform;

const RIDGE: f64 = 1e-9;
const REFINE_STEPS: usize = 3;
const KKT_TOL: f64 = 1e-10;

/// Bounds on the slope of every segment, in transformed x-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeBounds {
    pub min_slope: f64,
    pub max_slope: f64,
}

impl Default for SlopeBounds {
    fn default() -> Self {
        Self::UNBOUNDED
    }
}

impl SlopeBounds {
    pub const UNBOUNDED: SlopeBounds = SlopeBounds {
        min_slope: f64::NEG_INFINITY,
        max_slope: f64::INFINITY,
    };

    pub fn new(min_slope: f64, max_slope: f64) -> Result<Self> {
        if min_slope.is_nan() || max_slope.is_nan() || min_slope > max_slope {
            return Err(Error::InvalidBounds { min: min_slope, max: max_slope });
        }
        Ok(Self { min_slope, max_slope })
    }

    pub fn non_decreasing() -> Self {
        Self { min_slope: 0.0, max_slope: f64::INFINITY }
    }

    pub fn non_increasing() -> Self {
        Self { min_slope: f64::NEG_INFINITY, max_slope: 0.0 }
    }

    pub fn is_unbounded(&self) -> bool {
        self.min_slope == f64::NEG_INFINITY && self.max_slope == f64::INFINITY
    }

    /// Intersects with another set of bounds.
    pub fn intersect(&self, other: &SlopeBounds) -> Result<Self> {
        Self::new(
            self.min_slope.max(other.min_slope),
            self.max_slope.min(other.max_slope),
        )
    }

    fn delta_range(&self, gap: f64) -> (f64, f64) {
        let scale = |s: f64| if s == 0.0 { 0.0 } else { s * gap };
        (scale(self.min_slope), scale(self.max_slope))
    }
}

/// Segment index and interpolation fraction of `x` (clamped to the knots).
#[inline]
pub(crate) fn locate(tknots: &[f64], x: f64) -> (usize, f64) {
    let last = tknots.len() - 1;
    if x <= tknots[0] {
        return (0, 0.0);
    }
    if x >= tknots[last] {
        return (last - 1, 1.0);
    }
    let j = tknots.partition_point(|&k| k <= x) - 1;
    (j, (x - tknots[j]) / (tknots[j + 1] - tknots[j]))
}

/// Value of the curve `(tknots, ys)` at `x`, clamped outside the knots.
#[inline]
pub(crate) fn interpolate(tknots: &[f64], ys: &[f64], x: f64) -> f64 {
    if ys.len() == 1 {
        return ys[0];
    }
    let (j, s) = locate(tknots, x);
    if s == 0.0 {
        ys[j]
    } else if s == 1.0 {
        ys[j + 1]
    } else {
        ys[j] + s * (ys[j + 1] - ys[j])
    }
}

/// Squared error of the curve `(tknots, ys)` over points in transformed space.
pub(crate) fn curve_se(points: &[WeightedPoint], tknots: &[f64], ys: &[f64]) -> f64 {
    points
        .iter()
        .map(|p| p.w * (interpolate(tknots, ys, p.x) - p.y).powi(2))
        .sum()
}

/// Tridiagonal normal equations `G y = r`.
struct NormalEquations {
    diag: Vec<f64>,
    off: Vec<f64>,
    rhs: Vec<f64>,
}

impl NormalEquations {
    fn build(points: &[WeightedPoint], tknots: &[f64]) -> Self {
        let k = tknots.len();
        let mut eq = Self {
            diag: vec![0.0; k],
            off: vec![0.0; k.saturating_sub(1)],
            rhs: vec![0.0; k],
        };
        if k == 1 {
            for p in points {
                eq.diag[0] += p.w;
                eq.rhs[0] += p.w * p.y;
            }
            return eq;
        }
        for p in points {
            let (j, s) = locate(tknots, p.x);
            let (a, b) = (1.0 - s, s);
            eq.diag[j] += p.w * a * a;
            eq.diag[j + 1] += p.w * b * b;
            eq.off[j] += p.w * a * b;
            eq.rhs[j] += p.w * a * p.y;
            eq.rhs[j + 1] += p.w * b * p.y;
        }
        eq
    }

    fn ridge(&self) -> f64 {
        let trace: f64 = self.diag.iter().sum();
        if trace > 0.0 {
            RIDGE * trace / self.diag.len() as f64
        } else {
            RIDGE
        }
    }

    /// Tridiagonal LDL^T; `None` when a pivot collapses.
    fn solve_with(&self, ridge: f64) -> Option<Vec<f64>> {
        let k = self.diag.len();
        let max_diag = self.diag.iter().cloned().fold(0.0, f64::max) + ridge;
        let tiny = 1e-13 * max_diag;
        let mut d = vec![0.0; k];
        let mut l = vec![0.0; k.saturating_sub(1)];
        let mut z = vec![0.0; k];
        d[0] = self.diag[0] + ridge;
        if d[0].is_nan() || d[0] <= tiny {
            return None;
        }
        z[0] = self.rhs[0];
        for i in 1..k {
            l[i - 1] = self.off[i - 1] / d[i - 1];
            d[i] = self.diag[i] + ridge - l[i - 1] * self.off[i - 1];
            if d[i].is_nan() || d[i] <= tiny {
                return None;
            }
            z[i] = self.rhs[i] - l[i - 1] * z[i - 1];
        }
        let mut y = vec![0.0; k];
        y[k - 1] = z[k - 1] / d[k - 1];
        for i in (0..k - 1).rev() {
            y[i] = z[i] / d[i] - l[i] * y[i + 1];
        }
        Some(y)
    }

    fn solve(&self) -> Vec<f64> {
        if let Some(y) = self.solve_with(0.0) {
            return y;
        }
        let ridge = self.ridge();
        let mut y = self
            .solve_with(ridge)
            .expect("ridge-regularized tridiagonal system is positive definite");
        // Iterative refinement removes the ridge bias on supported knots;
        // null-space components stay where the ridge put them.
        for _ in 0..REFINE_STEPS {
            let residual: Vec<f64> = self.rhs.iter().zip(self.mul(&y)).map(|(r, gy)| r - gy).collect();
            let step = NormalEquations { diag: self.diag.clone(), off: self.off.clone(), rhs: residual }
                .solve_with(ridge)
                .expect("same matrix as above");
            for (v, d) in y.iter_mut().zip(step) {
                *v += d;
            }
        }
        y
    }

    fn mul(&self, y: &[f64]) -> Vec<f64> {
        let k = y.len();
        (0..k)
            .map(|i| {
                let mut v = self.diag[i] * y[i];
                if i > 0 {
                    v += self.off[i - 1] * y[i - 1];
                }
                if i + 1 < k {
                    v += self.off[i] * y[i + 1];
                }
                v
            })
            .collect()
    }

    fn dense(&self) -> DMatrix<f64> {
        let k = self.diag.len();
        let mut g = DMatrix::zeros(k, k);
        for i in 0..k {
            g[(i, i)] = self.diag[i];
            if i + 1 < k {
                g[(i, i + 1)] = self.off[i];
                g[(i + 1, i)] = self.off[i];
            }
        }
        g
    }
}

fn check_inputs(points: &[WeightedPoint], tknots: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no points to solve against".into()));
    }
    if tknots.len() == 1 {
        return Ok(());
    }
    validate_knots(tknots)
}

/// Optimal y-knots for knots already in transformed space. A single knot
/// yields the weighted mean.
pub fn solve_transformed(points: &[WeightedPoint], tknots: &[f64]) -> Result<Vec<f64>> {
    check_inputs(points, tknots)?;
    Ok(NormalEquations::build(points, tknots).solve())
}

fn transform_inputs(
    points: &[WeightedPoint],
    x_knots: &[f64],
    fx: Transform,
) -> Result<(Vec<WeightedPoint>, Vec<f64>)> {
    crate::condense::validate_knots(x_knots)?;
    let tknots = x_knots.iter().map(|&x| fx.apply(x)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = (x_knots[0], x_knots[x_knots.len() - 1]);
    let tpoints = points
        .iter()
        .map(|p| {
            let x = fx.apply_unchecked(p.x.clamp(lo, hi));
            WeightedPoint::new(x, p.y, p.w)
        })
        .collect();
    Ok((tpoints, tknots))
}

/// Optimal y-knots for the given x-knots in original space. Points outside
/// the knot range are clamped first.
pub fn solve_y_knots(points: &[WeightedPoint], x_knots: &[f64], fx: Transform) -> Result<Vec<f64>> {
    if x_knots.is_empty() {
        return Err(Error::InvalidKnots("no knots".into()));
    }
    let (tpoints, tknots) = transform_inputs(points, x_knots, fx)?;
    solve_transformed(&tpoints, &tknots)
}

/// Slope-bounded variant of [`solve_y_knots`].
pub fn solve_y_knots_bounded(
    points: &[WeightedPoint],
    x_knots: &[f64],
    fx: Transform,
    bounds: SlopeBounds,
) -> Result<Vec<f64>> {
    if x_knots.is_empty() {
        return Err(Error::InvalidKnots("no knots".into()));
    }
    let (tpoints, tknots) = transform_inputs(points, x_knots, fx)?;
    solve_bounded_transformed(&tpoints, &tknots, bounds)
}

/// Bounded solve in transformed space.
///
/// The unknowns are the first y-knot and the deltas between adjacent
/// y-knots; each delta is boxed by the slope bounds times the segment
/// width. The box-constrained quadratic is solved with a primal
/// active-set method.
pub fn solve_bounded_transformed(
    points: &[WeightedPoint],
    tknots: &[f64],
    bounds: SlopeBounds,
) -> Result<Vec<f64>> {
    check_inputs(points, tknots)?;
    let bounds = SlopeBounds::new(bounds.min_slope, bounds.max_slope)?;
    let eq = NormalEquations::build(points, tknots);
    let unconstrained = eq.solve();
    let k = tknots.len();
    if k == 1 || bounds.is_unbounded() {
        return Ok(unconstrained);
    }

    let mut lo = vec![f64::NEG_INFINITY; k];
    let mut hi = vec![f64::INFINITY; k];
    for i in 1..k {
        let (a, b) = bounds.delta_range(tknots[i] - tknots[i - 1]);
        lo[i] = a;
        hi[i] = b;
    }
    let deltas: Vec<f64> = std::iter::once(unconstrained[0])
        .chain(unconstrained.windows(2).map(|w| w[1] - w[0]))
        .collect();
    if (1..k).all(|i| lo[i] <= deltas[i] && deltas[i] <= hi[i]) {
        return Ok(unconstrained);
    }

    // y = L beta with L lower-triangular ones: Q = L^T G L, c = L^T r.
    let g = eq.dense();
    let lower = DMatrix::from_fn(k, k, |i, j| if j <= i { 1.0 } else { 0.0 });
    let q = lower.transpose() * &g * &lower;
    let c = lower.transpose() * DVector::from_vec(eq.rhs.clone());
    let beta = box_qp(&q, &c, &lo, &hi, deltas);

    let mut ys = Vec::with_capacity(k);
    let mut acc = 0.0;
    for (i, b) in beta.iter().enumerate() {
        acc = if i == 0 { *b } else { acc + b };
        ys.push(acc);
    }
    Ok(ys)
}

/// Minimizes `0.5 x'Qx - c'x` subject to `lo <= x <= hi` from the
/// projection of `start`. Returns a feasible point; KKT-stationary unless
/// the iteration cap is hit.
fn box_qp(q: &DMatrix<f64>, c: &DVector<f64>, lo: &[f64], hi: &[f64], start: Vec<f64>) -> Vec<f64> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Free,
        AtLower,
        AtUpper,
    }

    let n = start.len();
    let mut x = start;
    let mut state = vec![State::Free; n];
    for i in 0..n {
        if x[i] <= lo[i] {
            x[i] = lo[i];
            state[i] = State::AtLower;
        } else if x[i] >= hi[i] {
            x[i] = hi[i];
            state[i] = State::AtUpper;
        }
    }

    let trace: f64 = (0..n).map(|i| q[(i, i)]).sum();
    let ridge = RIDGE * trace.max(f64::MIN_POSITIVE) / n as f64;
    let tol = KKT_TOL * (1.0 + c.amax());

    for _ in 0..10 * n {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == State::Free).collect();
        let target = solve_free(q, c, &x, &free, ridge);

        // largest step toward the subproblem optimum that stays feasible
        let mut alpha = 1.0;
        let mut blocking = None;
        for (fi, &i) in free.iter().enumerate() {
            let d = target[fi] - x[i];
            if d < 0.0 && lo[i].is_finite() {
                let a = (lo[i] - x[i]) / d;
                if a < alpha {
                    alpha = a;
                    blocking = Some((i, State::AtLower));
                }
            } else if d > 0.0 && hi[i].is_finite() {
                let a = (hi[i] - x[i]) / d;
                if a < alpha {
                    alpha = a;
                    blocking = Some((i, State::AtUpper));
                }
            }
        }
        let alpha = alpha.max(0.0);
        for (fi, &i) in free.iter().enumerate() {
            x[i] += alpha * (target[fi] - x[i]);
        }
        if let Some((i, s)) = blocking {
            x[i] = if s == State::AtLower { lo[i] } else { hi[i] };
            state[i] = s;
            continue;
        }

        // subproblem optimum reached; release the worst KKT violator
        let grad = q * DVector::from_column_slice(&x) - c;
        let mut worst = None;
        let mut worst_v = tol;
        for i in 0..n {
            let v = match state[i] {
                State::Free => continue,
                State::AtLower => -grad[i],
                State::AtUpper => grad[i],
            };
            if v > worst_v {
                worst_v = v;
                worst = Some(i);
            }
        }
        match worst {
            Some(i) => state[i] = State::Free,
            None => break,
        }
    }
    x
}

/// Optimum over the free variables with the others held fixed.
fn solve_free(q: &DMatrix<f64>, c: &DVector<f64>, x: &[f64], free: &[usize], ridge: f64) -> Vec<f64> {
    if free.is_empty() {
        return Vec::new();
    }
    let m = free.len();
    let a = DMatrix::from_fn(m, m, |r, s| q[(free[r], free[s])]);
    let b = DVector::from_fn(m, |r, _| {
        let i = free[r];
        let fixed: f64 = (0..x.len())
            .filter(|j| !free.contains(j))
            .map(|j| q[(i, j)] * x[j])
            .sum();
        c[i] - fixed
    });
    let max_diag = (0..m).map(|r| a[(r, r)]).fold(0.0, f64::max);
    if let Some(ch) = a.clone().cholesky() {
        let l = ch.l_dirty();
        let tiny = 1e-13 * max_diag;
        if (0..m).all(|r| l[(r, r)] * l[(r, r)] > tiny) {
            return ch.solve(&b).iter().copied().collect();
        }
    }
    let mut reg = a.clone();
    for r in 0..m {
        reg[(r, r)] += ridge;
    }
    let ch = reg.cholesky().expect("ridge-regularized subproblem is positive definite");
    let mut sol = ch.solve(&b);
    // refine toward the unregularized optimum; see NormalEquations::solve
    for _ in 0..REFINE_STEPS {
        let residual = &b - &a * &sol;
        sol += ch.solve(&residual);
    }
    sol.iter().copied().collect()
}
