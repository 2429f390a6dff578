//! Piecewise-linear and enumerated curves.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::transform::Transform;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub x: f64,
    pub y: f64,
}

impl ControlPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for ControlPoint {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// A curve through an ordered list of control points.
///
/// Between control points the output is linearly interpolated in the
/// transformed x-space; outside the knot range it is held at the nearest
/// end value.
#[derive(Debug, Clone, PartialEq)]
pub struct PWLCurve {
    name: String,
    points: Vec<ControlPoint>,
    fx: Transform,
    // knot x-values in transformed space, cached for evaluation
    tx: Vec<f64>,
}

impl PWLCurve {
    pub fn new(
        name: impl Into<String>,
        points: impl IntoIterator<Item = impl Into<ControlPoint>>,
        fx: Transform,
    ) -> Result<Self> {
        let name = name.into();
        let points: Vec<ControlPoint> = points.into_iter().map(Into::into).collect();
        if points.len() < 2 {
            return Err(Error::InvalidCurve(format!(
                "`{name}` needs at least 2 control points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "`{name}` control point {i} is not finite"
                )));
            }
            if !fx.admits(p.x) {
                return Err(Error::Domain { transform: fx, x: p.x });
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[0].x >= w[1].x) {
            return Err(Error::InvalidCurve(format!(
                "`{name}` x-knots must be strictly increasing ({} then {})",
                w[0].x, w[1].x
            )));
        }
        let tx = points.iter().map(|p| fx.apply_unchecked(p.x)).collect();
        Ok(Self { name, points, fx, tx })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn points(&self) -> &[ControlPoint] {
        &self.points
    }

    pub fn fx(&self) -> Transform {
        self.fx
    }

    pub fn num_segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn x_knots(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.x)
    }

    pub fn y_knots(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.y)
    }

    /// Evaluates the curve. Only NaN input is rejected: values outside
    /// the knot range are clamped before the transform is applied.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain { transform: self.fx, x });
        }
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if x <= first.x {
            return Ok(first.y);
        }
        if x >= last.x {
            return Ok(last.y);
        }
        // first knot strictly greater than x; 1 <= hi <= K-1 here
        let hi = self.points.partition_point(|p| p.x <= x);
        let lo = hi - 1;
        let (y0, y1) = (self.points[lo].y, self.points[hi].y);
        let t = (self.fx.apply(x)? - self.tx[lo]) / (self.tx[hi] - self.tx[lo]);
        Ok(y0 + t * (y1 - y0))
    }
}

/// Category key for [`EnumCurve`]. Totally ordered; `-0.0` is folded into `0.0`.
#[derive(Debug, Clone, Copy)]
pub struct Category(f64);

impl Category {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::InvalidCurve("category key is NaN".into()));
        }
        Ok(Self(if value == 0.0 { 0.0 } else { value }))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Category {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Category {}

impl PartialOrd for Category {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Category {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Direct mapping from category to output. Unseen categories map to `default`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumCurve {
    name: String,
    mapping: BTreeMap<Category, f64>,
    default: f64,
}

impl EnumCurve {
    pub fn new(
        name: impl Into<String>,
        entries: impl IntoIterator<Item = (f64, f64)>,
        default: f64,
    ) -> Result<Self> {
        let name = name.into();
        let mut mapping = BTreeMap::new();
        for (k, v) in entries {
            let key = Category::new(k)?;
            if !v.is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "`{name}` maps {key} to a non-finite value"
                )));
            }
            if mapping.insert(key, v).is_some() {
                return Err(Error::InvalidCurve(format!(
                    "`{name}` has duplicate key {key}"
                )));
            }
        }
        if !default.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "`{name}` default is not finite"
            )));
        }
        Ok(Self { name, mapping, default })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn mapping(&self) -> &BTreeMap<Category, f64> {
        &self.mapping
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn eval(&self, key: f64) -> f64 {
        Category::new(key)
            .ok()
            .and_then(|k| self.mapping.get(&k).copied())
            .unwrap_or(self.default)
    }
}
