//! End-to-end curve fitting: downsample, pick candidate knots, choose an
//! x-transform, condense, then greedily search knot subsets.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::condense::{condense_around_knots_with, CondensedSet};
use crate::correlation::weighted_pearson;
use crate::curve::PWLCurve;
use crate::error::{Error, Result};
use crate::exec;
use crate::isotonic::{infer_mono_direction, Direction};
use crate::points::WeightedPoint;
use crate::solver::{curve_se, solve_bounded_transformed, solve_transformed, SlopeBounds};
use crate::transform::Transform;

/// Maximum number of times the candidate sampling rate is doubled while
/// looking for enough distinct candidates.
pub const MAX_RESAMPLE_DOUBLINGS: u32 = 6;

/// Monotonicity policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mono {
    /// Infer the direction from isotonic fits and constrain to it.
    #[default]
    Auto,
    None,
    Increasing,
    Decreasing,
}

impl FromStr for Mono {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Mono::Auto),
            "none" => Ok(Mono::None),
            "up" | "increasing" => Ok(Mono::Increasing),
            "down" | "decreasing" => Ok(Mono::Decreasing),
            _ => Err(Error::InvalidConfig(format!("unknown mono policy `{s}`"))),
        }
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mono::Auto => "auto",
            Mono::None => "none",
            Mono::Increasing => "increasing",
            Mono::Decreasing => "decreasing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FxPolicy {
    #[default]
    Auto,
    Fixed(Transform),
}

impl FromStr for FxPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(FxPolicy::Auto)
        } else {
            s.parse().map(FxPolicy::Fixed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub num_segments: usize,
    pub mono: Mono,
    /// Number of candidate x-knots.
    pub num_samples: usize,
    pub downsample_to: usize,
    /// Cap on stage-2 refinement cycles of the greedy search.
    pub max_refine_iterations: usize,
    pub fx: FxPolicy,
    pub slope_bounds: SlopeBounds,
    pub seed: u64,
    /// Minimum gain in |pearson r| for an automatic transform to be used.
    pub transform_threshold: f64,
    /// Run inner loops on the rayon pool (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            num_segments: 5,
            mono: Mono::Auto,
            num_samples: 100,
            downsample_to: 1_000_000,
            max_refine_iterations: 10,
            fx: FxPolicy::Auto,
            slope_bounds: SlopeBounds::UNBOUNDED,
            seed: 0,
            transform_threshold: 0.05,
            parallel: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_segments == 0 {
            return bad("num_segments must be positive".into());
        }
        if self.num_samples < self.num_segments + 1 {
            return bad(format!(
                "num_samples ({}) must be at least num_segments + 1 ({})",
                self.num_samples,
                self.num_segments + 1
            ));
        }
        if self.downsample_to < self.num_samples {
            return bad(format!(
                "downsample_to ({}) must be at least num_samples ({})",
                self.downsample_to, self.num_samples
            ));
        }
        if self.transform_threshold.is_nan() || self.transform_threshold < 0.0 {
            return bad("transform_threshold must be non-negative".into());
        }
        SlopeBounds::new(self.slope_bounds.min_slope, self.slope_bounds.max_slope)?;
        Ok(())
    }
}

/// Uniform random subset of `max_n` points, in input order. Returns the
/// input unchanged when it is already small enough.
pub fn downsample(points: &[WeightedPoint], max_n: usize, seed: u64) -> Vec<WeightedPoint> {
    if points.len() <= max_n.max(1) {
        return points.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, points.len(), max_n.max(1)).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| points[i]).collect()
}

/// Sorted, distinct candidate x-knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateKnots(Vec<f64>);

impl CandidateKnots {
    pub fn new(xs: Vec<f64>) -> Result<Self> {
        crate::condense::validate_knots(&xs)?;
        Ok(Self(xs))
    }

    pub fn xs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Candidate knots spaced equally by cumulative weight.
pub fn sample_candidate_knots(points: &[WeightedPoint], num_samples: usize) -> Result<CandidateKnots> {
    let mut sorted = points.to_vec();
    exec::sort_points(&mut sorted, false);
    candidates_from_sorted(&sorted, num_samples)
}

fn distinct_xs(sorted: &[WeightedPoint]) -> Vec<f64> {
    let mut xs: Vec<f64> = sorted.iter().map(|p| p.x).collect();
    xs.dedup();
    xs
}

pub(crate) fn candidates_from_sorted(sorted: &[WeightedPoint], num_samples: usize) -> Result<CandidateKnots> {
    let num_samples = num_samples.max(2);
    let distinct = sorted.windows(2).filter(|w| w[0].x != w[1].x).count() + usize::from(!sorted.is_empty());
    if distinct < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 distinct x-values, got {distinct}"
        )));
    }
    if distinct <= num_samples {
        return CandidateKnots::new(distinct_xs(sorted));
    }

    let mut cum = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    for p in sorted {
        acc += p.w;
        cum.push(acc);
    }
    let total = acc;
    let last = sorted.len() - 1;
    let quantiles = |count: usize| -> Vec<f64> {
        let mut xs: Vec<f64> = (0..count)
            .map(|k| {
                let target = total * k as f64 / (count - 1) as f64;
                let i = cum.partition_point(|&c| c < target).min(last);
                sorted[i].x
            })
            .collect();
        xs.dedup();
        xs
    };

    // Each doubling refines the previous quantile grid, so the coarser
    // result is a subset of the finer one.
    let mut coarse = Vec::new();
    let mut found = Vec::new();
    for doubling in 0..=MAX_RESAMPLE_DOUBLINGS {
        let count = (num_samples - 1) * (1usize << doubling) + 1;
        coarse = std::mem::replace(&mut found, quantiles(count));
        if found.len() >= num_samples {
            break;
        }
    }
    if found.len() > num_samples {
        found = thin(&coarse, &found, num_samples);
    }
    CandidateKnots::new(found)
}

/// Keeps all of `coarse` and fills the remaining slots with values from
/// `fine` spread evenly by index. Both inputs are sorted and deduplicated.
fn thin(coarse: &[f64], fine: &[f64], target: usize) -> Vec<f64> {
    let extra: Vec<f64> = fine.iter().copied().filter(|x| coarse.binary_search_by(|c| c.total_cmp(x)).is_err()).collect();
    let slots = target.saturating_sub(coarse.len());
    let mut out = coarse.to_vec();
    if slots > 0 && !extra.is_empty() {
        let n = extra.len();
        out.extend((0..slots).map(|k| extra[(2 * k + 1) * n / (2 * slots)]));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// The transform that would be tried for data whose smallest x is `min_x`.
pub fn candidate_transform(min_x: f64) -> Transform {
    if min_x > 0.0 {
        Transform::Log
    } else if min_x >= 0.0 {
        Transform::Log1p
    } else {
        Transform::Symlog1p
    }
}

/// Picks the range-appropriate transform if it raises `|pearson(fx(x), y)|`
/// over the identity by more than `threshold`, otherwise the identity.
pub fn select_transform(points: &[WeightedPoint], threshold: f64) -> Transform {
    if points.len() < 2 {
        return Transform::Identity;
    }
    let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let candidate = candidate_transform(min_x);
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let ws: Vec<f64> = points.iter().map(|p| p.w).collect();
    let txs: Vec<f64> = xs.iter().map(|&x| candidate.apply_unchecked(x)).collect();
    let base = weighted_pearson(&xs, &ys, &ws).abs();
    let moved = weighted_pearson(&txs, &ys, &ws).abs();
    if moved - base > threshold {
        candidate
    } else {
        Transform::Identity
    }
}

/// Settings for [`greedy_fit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub num_segments: usize,
    pub max_refine_iterations: usize,
    pub bounds: SlopeBounds,
    pub parallel: bool,
}

impl SearchOptions {
    pub fn from_config(config: &FitConfig) -> Self {
        Self {
            num_segments: config.num_segments,
            max_refine_iterations: config.max_refine_iterations,
            bounds: config.slope_bounds,
            parallel: config.parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyFit {
    /// Indices into the candidate list, ascending.
    pub knot_indices: Vec<usize>,
    pub x_knots: Vec<f64>,
    pub y_knots: Vec<f64>,
    /// Squared error over the points passed in.
    pub se: f64,
    /// SE after each knot added in stage 1.
    pub growth_history: Vec<f64>,
    /// SE at the start of stage 2 and after each accepted swap.
    pub refine_history: Vec<f64>,
    pub refine_cycles: usize,
    /// Stage 2 ended with a full cycle that changed nothing.
    pub converged: bool,
}

struct Trial {
    knots: Vec<usize>,
    ys: Vec<f64>,
    se: f64,
}

/// Greedy knot search over `candidates` (same coordinate space as
/// `points`). Stage 1 grows from the lowest candidate by adding the best
/// remaining candidate; stage 2 repeatedly removes each knot and re-adds
/// the best remaining candidate until a cycle changes nothing.
pub fn greedy_fit(points: &[WeightedPoint], candidates: &[f64], options: &SearchOptions) -> Result<GreedyFit> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no points to fit".into()));
    }
    crate::condense::validate_knots(candidates)?;
    if options.num_segments == 0 {
        return Err(Error::InvalidConfig("num_segments must be positive".into()));
    }
    let bounds = SlopeBounds::new(options.bounds.min_slope, options.bounds.max_slope)?;
    let target = (options.num_segments + 1).min(candidates.len());

    let evaluate = |knots: Vec<usize>| -> Result<Trial> {
        let tk: Vec<f64> = knots.iter().map(|&i| candidates[i]).collect();
        let ys = if bounds.is_unbounded() {
            solve_transformed(points, &tk)?
        } else {
            solve_bounded_transformed(points, &tk, bounds)?
        };
        let se = curve_se(points, &tk, &ys);
        Ok(Trial { knots, ys, se })
    };
    // best of `base + {c}` over candidates not in `base`; ties to lowest c
    let best_addition = |base: &[usize], skip: Option<usize>| -> Result<Option<Trial>> {
        let options_left: Vec<usize> = (0..candidates.len())
            .filter(|c| !base.contains(c) && Some(*c) != skip)
            .collect();
        let trials = exec::map_slice(&options_left, options.parallel, |&c| {
            let mut knots = base.to_vec();
            let pos = knots.partition_point(|&k| k < c);
            knots.insert(pos, c);
            evaluate(knots)
        });
        let mut best: Option<Trial> = None;
        for t in trials {
            let t = t?;
            if best.as_ref().is_none_or(|b| t.se < b.se) {
                best = Some(t);
            }
        }
        Ok(best)
    };

    let mut current = evaluate(vec![0])?;
    let mut growth_history = vec![current.se];
    while current.knots.len() < target {
        match best_addition(&current.knots, None)? {
            Some(t) => current = t,
            None => break,
        }
        growth_history.push(current.se);
    }

    let mut refine_history = vec![current.se];
    let mut cycles = 0;
    let mut converged = false;
    while cycles < options.max_refine_iterations {
        cycles += 1;
        let mut changed = false;
        let snapshot = current.knots.clone();
        for knot in snapshot {
            let Some(pos) = current.knots.iter().position(|&k| k == knot) else {
                continue;
            };
            let mut base = current.knots.clone();
            base.remove(pos);
            if let Some(t) = best_addition(&base, Some(knot))? {
                if t.se < current.se {
                    current = t;
                    changed = true;
                    refine_history.push(current.se);
                }
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    Ok(GreedyFit {
        x_knots: current.knots.iter().map(|&i| candidates[i]).collect(),
        knot_indices: current.knots,
        y_knots: current.ys,
        se: current.se,
        growth_history,
        refine_history,
        refine_cycles: cycles,
        converged,
    })
}

/// Everything [`fit_pwl_report`] learned along the way.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub curve: PWLCurve,
    pub fx: Transform,
    /// Direction chosen when `mono` was `Auto`.
    pub inferred_direction: Option<Direction>,
    pub bounds: SlopeBounds,
    /// Candidate knots in original x-space.
    pub candidates: Vec<f64>,
    pub points_used: usize,
    pub condensed: CondensedSet,
    pub search: GreedyFit,
    pub warnings: Vec<String>,
}

impl FitReport {
    /// Squared error over the (downsampled) input implied by condensation.
    pub fn total_se(&self) -> f64 {
        self.search.se + self.condensed.constant
    }
}

/// Fits a piecewise-linear curve to weighted points.
pub fn fit_pwl(points: &[WeightedPoint], config: &FitConfig) -> Result<PWLCurve> {
    fit_pwl_report(points, config).map(|r| r.curve)
}

pub fn fit_pwl_report(points: &[WeightedPoint], config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    if points.is_empty() {
        return Err(Error::InsufficientData("no points".into()));
    }
    let mut sample = downsample(points, config.downsample_to, config.seed);
    exec::sort_points(&mut sample, config.parallel);
    let candidates = candidates_from_sorted(&sample, config.num_samples)?;

    let fx = match config.fx {
        FxPolicy::Auto => select_transform(&sample, config.transform_threshold),
        FxPolicy::Fixed(t) => {
            // sorted, so the first point has the smallest x
            t.apply(sample[0].x)?;
            t
        }
    };

    // transformed candidates; drop any that collide after the transform
    let mut xs = Vec::with_capacity(candidates.len());
    let mut txs: Vec<f64> = Vec::with_capacity(candidates.len());
    for &x in candidates.xs() {
        let t = fx.apply_unchecked(x);
        if txs.last().is_none_or(|&prev| t > prev) {
            xs.push(x);
            txs.push(t);
        }
    }
    if txs.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than 2 distinct candidate knots after transform".into(),
        ));
    }
    let tpoints: Vec<WeightedPoint> = sample
        .iter()
        .map(|p| WeightedPoint::new(fx.apply_unchecked(p.x), p.y, p.w))
        .collect();
    let condensed = condense_around_knots_with(&tpoints, &txs, config.parallel)?;

    let mut inferred_direction = None;
    let bounds = match config.mono {
        Mono::None => config.slope_bounds,
        Mono::Increasing => config.slope_bounds.intersect(&SlopeBounds::non_decreasing())?,
        Mono::Decreasing => config.slope_bounds.intersect(&SlopeBounds::non_increasing())?,
        Mono::Auto => {
            let dir = infer_mono_direction(&condensed.points);
            inferred_direction = Some(dir);
            let mono = match dir {
                Direction::Increasing => SlopeBounds::non_decreasing(),
                Direction::Decreasing => SlopeBounds::non_increasing(),
            };
            config.slope_bounds.intersect(&mono)?
        }
    };

    let mut warnings = Vec::new();
    if txs.len() < config.num_segments + 1 {
        let msg = format!(
            "only {} distinct candidate knots; fitting {} segments instead of {}",
            txs.len(),
            txs.len() - 1,
            config.num_segments
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let options = SearchOptions { bounds, ..SearchOptions::from_config(config) };
    let search = greedy_fit(&condensed.points, &txs, &options)?;
    let knots = search.knot_indices.iter().map(|&i| xs[i]).zip(search.y_knots.iter().copied());
    let curve = PWLCurve::new("", knots, fx)?;

    Ok(FitReport {
        curve,
        fx,
        inferred_direction,
        bounds,
        candidates: xs,
        points_used: sample.len(),
        condensed,
        search,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condense::squared_error;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn wp(x: f64, y: f64) -> WeightedPoint {
        WeightedPoint::new(x, y, 1.0)
    }

    fn grid(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Vec<WeightedPoint> {
        (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                wp(x, f(x))
            })
            .collect()
    }

    fn full_se(curve: &PWLCurve, pts: &[WeightedPoint]) -> f64 {
        squared_error(|x| curve.eval(x).unwrap(), pts)
    }

    fn unbounded() -> FitConfig {
        FitConfig { mono: Mono::None, ..FitConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        let bad = [
            FitConfig { num_segments: 0, ..FitConfig::default() },
            FitConfig { num_samples: 5, ..FitConfig::default() },
            FitConfig { downsample_to: 50, ..FitConfig::default() },
            FitConfig { slope_bounds: SlopeBounds { min_slope: 1.0, max_slope: 0.0 }, ..FitConfig::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
            assert!(fit_pwl(&grid(10, 0.0, 1.0, |x| x), &c).is_err());
        }
    }

    #[test]
    fn mono_and_fx_parse() {
        assert_eq!("up".parse::<Mono>().unwrap(), Mono::Increasing);
        assert_eq!("down".parse::<Mono>().unwrap(), Mono::Decreasing);
        assert_eq!("auto".parse::<Mono>().unwrap(), Mono::Auto);
        assert!("sideways".parse::<Mono>().is_err());
        assert_eq!("log1p".parse::<FxPolicy>().unwrap(), FxPolicy::Fixed(Transform::Log1p));
        assert_eq!("auto".parse::<FxPolicy>().unwrap(), FxPolicy::Auto);
    }

    #[test]
    fn downsample_small_is_identity() {
        let pts = grid(500, 0.0, 1.0, |x| x);
        assert_eq!(downsample(&pts, 1_000_000, 3), pts);
    }

    #[test]
    fn downsample_large_is_seeded_subset() {
        let pts: Vec<_> = (0..2_000_000).map(|i| wp(i as f64, 0.0)).collect();
        let a = downsample(&pts, 1_000_000, 42);
        assert_eq!(a.len(), 1_000_000);
        // input x is the index, so ascending x proves an order-preserving subset
        assert!(a.windows(2).all(|w| w[0].x < w[1].x));
        assert!(a.iter().all(|p| p.x >= 0.0 && p.x < 2e6 && p.x.fract() == 0.0));
        assert_eq!(a, downsample(&pts, 1_000_000, 42));
        assert_ne!(a, downsample(&pts, 1_000_000, 43));
    }

    #[test]
    fn candidates_by_cumulative_weight() {
        let pts: Vec<_> = (0..=10).map(|i| wp(i as f64, 0.0)).collect();
        let c = sample_candidate_knots(&pts, 3).unwrap();
        // 11 points: 0.5 of the weight is reached at x = 5
        assert_eq!(c.xs(), &[0.0, 5.0, 10.0]);
    }

    #[test]
    fn candidates_exhaust_few_distinct() {
        let pts: Vec<_> = (0..1000).map(|i| wp((i % 4) as f64 * 1.5, 0.0)).collect();
        assert_eq!(sample_candidate_knots(&pts, 100).unwrap().xs(), &[0.0, 1.5, 3.0, 4.5]);
    }

    #[test]
    fn candidates_with_heavy_repeats() {
        // 55% of the mass sits on 0 and 1
        let mut pts = Vec::new();
        for i in 0..10_000 {
            let x = match i % 100 {
                0..=29 => 0.0,
                30..=54 => 1.0,
                k => 2.0 + (k as f64) * 3.7 + (i / 100) as f64 * 0.01,
            };
            pts.push(wp(x, 0.0));
        }
        let c = sample_candidate_knots(&pts, 100).unwrap();
        assert_eq!(c.len(), 100);
        assert_eq!(c.xs().iter().filter(|&&x| x == 0.0).count(), 1);
        assert_eq!(c.xs().iter().filter(|&&x| x == 1.0).count(), 1);
        assert!(c.xs().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn candidates_need_two_distinct() {
        let pts = vec![wp(3.0, 1.0), wp(3.0, 2.0)];
        assert!(matches!(sample_candidate_knots(&pts, 10), Err(Error::InsufficientData(_))));
        assert!(matches!(fit_pwl(&pts, &FitConfig::default()), Err(Error::InsufficientData(_))));
        assert!(fit_pwl(&[], &FitConfig::default()).is_err());
    }

    #[test]
    fn candidates_weighting_shifts_quantiles() {
        let pts = vec![
            WeightedPoint::new(0.0, 0.0, 1.0),
            WeightedPoint::new(1.0, 0.0, 1.0),
            WeightedPoint::new(2.0, 0.0, 100.0),
            WeightedPoint::new(3.0, 0.0, 1.0),
            WeightedPoint::new(4.0, 0.0, 1.0),
            WeightedPoint::new(5.0, 0.0, 1.0),
        ];
        // the median by weight is 2, not 2.5
        let c = sample_candidate_knots(&pts, 3).unwrap();
        assert_eq!(c.xs(), &[0.0, 2.0, 5.0]);
    }

    #[test]
    fn transform_selection() {
        let log_data = grid(1000, 1.0, 1e4, f64::ln);
        let xs: Vec<f64> = log_data.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = log_data.iter().map(|p| p.y).collect();
        let ws = vec![1.0; xs.len()];
        assert!(weighted_pearson(&xs, &ys, &ws) < 0.95);
        assert_eq!(select_transform(&log_data, 0.05), Transform::Log);

        assert_eq!(select_transform(&grid(100, 0.0, 10.0, |x| 3.0 * x + 1.0), 0.05), Transform::Identity);
        assert_eq!(candidate_transform(0.0), Transform::Log1p);
        assert_eq!(candidate_transform(-3.0), Transform::Symlog1p);
        assert_eq!(candidate_transform(0.5), Transform::Log);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let heavy: Vec<_> = (0..2000).map(|_| {
            let u: f64 = rng.random_range(-1.0..1.0);
            let x = u.signum() * (u.abs() * 12.0).exp();
            wp(x, x.signum() * x.abs().ln_1p())
        }).collect();
        assert_eq!(select_transform(&heavy, 0.05), Transform::Symlog1p);
    }

    /// Best SE over every knot subset of the given size, solving on the
    /// full points; the oracle for the greedy search.
    fn exhaustive(pts: &[WeightedPoint], cands: &[f64], knots: usize) -> f64 {
        fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, left - 1, cur, out);
                cur.pop();
            }
        }
        let mut subsets = vec![];
        rec(0, cands.len(), knots, &mut vec![], &mut subsets);
        subsets
            .into_iter()
            .map(|s| {
                let tk: Vec<f64> = s.iter().map(|&i| cands[i]).collect();
                let ys = solve_transformed(pts, &tk).unwrap();
                curve_se(pts, &tk, &ys)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn search(segments: usize) -> SearchOptions {
        SearchOptions {
            num_segments: segments,
            max_refine_iterations: 10,
            bounds: SlopeBounds::UNBOUNDED,
            parallel: false,
        }
    }

    #[test]
    fn greedy_recovers_two_segment_curve() {
        let truth = |x: f64| if x < 4.0 { 2.0 * x } else { 8.0 - 0.5 * (x - 4.0) };
        let pts = grid(101, 0.0, 10.0, truth);
        let cands: Vec<f64> = (0..=10).map(f64::from).collect();
        let fit = greedy_fit(&pts, &cands, &search(2)).unwrap();
        let scale: f64 = pts.iter().map(|p| p.y * p.y).sum();
        assert!(fit.se <= 1e-10 * scale, "{}", fit.se);
        assert!(exhaustive(&pts, &cands, 3) <= fit.se + 1e-12);
        assert_eq!(fit.x_knots, vec![0.0, 4.0, 10.0]);
    }

    #[test]
    fn one_segment_on_a_line_uses_endpoints() {
        let pts = grid(50, -2.0, 3.0, |x| 0.5 * x - 1.0);
        let cands = sample_candidate_knots(&pts, 10).unwrap();
        let fit = greedy_fit(&pts, cands.xs(), &search(1)).unwrap();
        assert_eq!(fit.x_knots, vec![-2.0, 3.0]);
        assert!((fit.y_knots[0] - -2.0).abs() < 1e-12 && (fit.y_knots[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn greedy_never_beats_exhaustive_and_is_locally_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.3).unwrap();
        for _ in 0..20 {
            let pts: Vec<_> = (0..120).map(|_| {
                let x: f64 = rng.random_range(0.0..10.0);
                wp(x, (x * 0.8).sin() * 3.0 + noise.sample(&mut rng))
            }).collect();
            let cands = sample_candidate_knots(&pts, 8).unwrap();
            let fit = greedy_fit(&pts, cands.xs(), &search(2)).unwrap();
            let best = exhaustive(&pts, cands.xs(), 3);
            assert!(fit.se >= best - 1e-9 * (1.0 + best));
            assert!(fit.refine_history.windows(2).all(|w| w[1] <= w[0]));
            assert!(fit.refine_cycles <= 10);
            if fit.converged {
                // no single replacement improves
                for (pos, _) in fit.knot_indices.iter().enumerate() {
                    for c in 0..cands.len() {
                        if fit.knot_indices.contains(&c) {
                            continue;
                        }
                        let mut ks = fit.knot_indices.clone();
                        ks[pos] = c;
                        ks.sort_unstable();
                        let tk: Vec<f64> = ks.iter().map(|&i| cands.xs()[i]).collect();
                        let ys = solve_transformed(&pts, &tk).unwrap();
                        assert!(curve_se(&pts, &tk, &ys) >= fit.se - 1e-9 * (1.0 + fit.se));
                    }
                }
            }
        }
    }

    #[test]
    fn constant_data_gives_flat_two_knot_curve() {
        let pts: Vec<_> = (0..40).map(|i| WeightedPoint::new(i as f64, 2.5, 1.0 + (i % 3) as f64)).collect();
        let c = fit_pwl(&pts, &FitConfig { num_segments: 1, ..unbounded() }).unwrap();
        assert_eq!(c.points().len(), 2);
        assert!(c.y_knots().all(|y| (y - 2.5).abs() < 1e-12));
    }

    #[test]
    fn auto_mono_follows_true_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let noise = Normal::new(0.0, 0.05).unwrap();
        for sign in [1.0, -1.0] {
            let pts: Vec<_> = (0..10_000).map(|_| {
                let x: f64 = rng.random_range(0.0..5.0);
                wp(x, sign * (x.powi(3) / 25.0 + 0.3 * x.sin()) + noise.sample(&mut rng))
            }).collect();
            let report = fit_pwl_report(&pts, &FitConfig::default()).unwrap();
            let ys: Vec<f64> = report.curve.y_knots().collect();
            if sign > 0.0 {
                assert_eq!(report.inferred_direction, Some(Direction::Increasing));
                assert!(ys.windows(2).all(|w| w[0] <= w[1]), "{ys:?}");
            } else {
                assert_eq!(report.inferred_direction, Some(Direction::Decreasing));
                assert!(ys.windows(2).all(|w| w[0] >= w[1]), "{ys:?}");
            }
        }
    }

    #[test]
    fn explicit_mono_increasing() {
        let pts = grid(300, 0.0, 6.0, |x| (x * 2.0).sin() + 0.2 * x);
        let c = fit_pwl(&pts, &FitConfig { mono: Mono::Increasing, ..FitConfig::default() }).unwrap();
        assert!(c.y_knots().collect::<Vec<_>>().windows(2).all(|w| w[0] <= w[1]));
        let c = fit_pwl(&pts, &FitConfig { mono: Mono::Decreasing, ..FitConfig::default() }).unwrap();
        assert!(c.y_knots().collect::<Vec<_>>().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn refit_of_own_samples_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<_> = (0..3000).map(|_| {
            let x: f64 = rng.random_range(0.0..20.0);
            wp(x, (x * 0.4).cos() * 4.0 + x * 0.1)
        }).collect();
        let config = FitConfig { fx: FxPolicy::Fixed(Transform::Identity), ..unbounded() };
        let first = fit_pwl(&pts, &config).unwrap();
        let resampled: Vec<_> = pts.iter().map(|p| wp(p.x, first.eval(p.x).unwrap())).collect();
        let second = fit_pwl(&resampled, &config).unwrap();
        let scale: f64 = resampled.iter().map(|p| p.y * p.y).sum();
        assert!(full_se(&second, &resampled) <= 1e-8 * scale);
    }

    #[test]
    fn condensed_error_matches_full_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<_> = (0..5000).map(|_| {
            let x: f64 = rng.random_range(1.0..100.0);
            WeightedPoint::new(x, x.ln() * 2.0 + rng.random_range(-0.5..0.5), rng.random_range(0.5..2.0))
        }).collect();
        let report = fit_pwl_report(&pts, &unbounded()).unwrap();
        let full = full_se(&report.curve, &pts);
        assert!((full - report.total_se()).abs() <= 1e-8 * full, "{full} vs {}", report.total_se());
    }

    #[test]
    fn segment_budget_and_low_cardinality_warning() {
        let pts: Vec<_> = (0..200).map(|i| wp((i % 3) as f64, (i % 3) as f64 * 2.0)).collect();
        let report = fit_pwl_report(&pts, &unbounded()).unwrap();
        assert_eq!(report.curve.num_segments(), 2);
        assert_eq!(report.warnings.len(), 1);

        let pts = grid(500, 0.0, 1.0, |x| (x * 9.0).sin());
        let c = fit_pwl(&pts, &FitConfig { num_segments: 4, ..unbounded() }).unwrap();
        assert_eq!(c.num_segments(), 4);
    }

    #[test]
    fn fixed_transform_domain_is_checked() {
        let pts = grid(50, -1.0, 1.0, |x| x);
        let config = FitConfig { fx: FxPolicy::Fixed(Transform::Log), ..unbounded() };
        assert!(matches!(fit_pwl(&pts, &config), Err(Error::Domain { .. })));
    }

    #[test]
    fn deterministic_and_mode_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<_> = (0..20_000).map(|_| {
            let x: f64 = rng.random_range(-50.0..50.0);
            WeightedPoint::new(x, x.abs().sqrt() + rng.random_range(-0.2..0.2), rng.random_range(0.1..1.0))
        }).collect();
        let config = FitConfig { downsample_to: 5000, num_samples: 60, seed: 7, ..FitConfig::default() };
        let a = fit_pwl(&pts, &config).unwrap();
        let b = fit_pwl(&pts, &config).unwrap();
        let c = fit_pwl(&pts, &FitConfig { parallel: false, ..config.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
