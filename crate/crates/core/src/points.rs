use std::ops::Deref;

use crate::error::{Error, Result};

/// An `(x, y, weight)` sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl WeightedPoint {
    pub const fn new(x: f64, y: f64, w: f64) -> Self {
        Self { x, y, w }
    }
}

impl From<(f64, f64, f64)> for WeightedPoint {
    fn from((x, y, w): (f64, f64, f64)) -> Self {
        Self { x, y, w }
    }
}

impl From<(f64, f64)> for WeightedPoint {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y, w: 1.0 }
    }
}

/// A validated collection of weighted points: finite coordinates and
/// strictly positive, finite weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet(Vec<WeightedPoint>);

impl PointSet {
    pub fn new(points: Vec<WeightedPoint>) -> Result<Self> {
        for (index, p) in points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidPoint { index, reason: "non-finite coordinate" });
            }
            if !(p.w > 0.0 && p.w.is_finite()) {
                return Err(Error::InvalidPoint { index, reason: "weight must be positive and finite" });
            }
        }
        Ok(Self(points))
    }

    pub fn from_xy(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidConfig(format!(
                "x and y lengths differ ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        Self::new(xs.iter().zip(ys).map(|(&x, &y)| WeightedPoint::new(x, y, 1.0)).collect())
    }

    pub fn total_weight(&self) -> f64 {
        self.0.iter().map(|p| p.w).sum()
    }

    pub fn into_inner(self) -> Vec<WeightedPoint> {
        self.0
    }
}

impl Deref for PointSet {
    type Target = [WeightedPoint];

    fn deref(&self) -> &[WeightedPoint] {
        &self.0
    }
}

impl TryFrom<Vec<WeightedPoint>> for PointSet {
    type Error = Error;

    fn try_from(points: Vec<WeightedPoint>) -> Result<Self> {
        Self::new(points)
    }
}

impl FromIterator<WeightedPoint> for Result<PointSet> {
    fn from_iter<I: IntoIterator<Item = WeightedPoint>>(iter: I) -> Self {
        PointSet::new(iter.into_iter().collect())
    }
}
