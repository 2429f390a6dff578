//! Weighted isotonic regression (pool adjacent violators) and monotone
//! direction inference.

use crate::points::WeightedPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Step-function fit: `values[i]` applies to the points with x == `xs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub se: f64,
}

#[derive(Clone, Copy)]
struct Block {
    w: f64,
    wy: f64,
    len: usize,
}

impl Block {
    fn mean(&self) -> f64 {
        self.wy / self.w
    }
}

/// Weighted isotonic regression of y on x. Points sharing an x are pooled
/// first, since a function of x must give them one value.
pub fn isotonic_regression(points: &[WeightedPoint], direction: Direction) -> IsotonicFit {
    let sign = match direction {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    };
    let mut sorted: Vec<WeightedPoint> = points.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));

    let mut xs = Vec::new();
    let mut groups: Vec<Block> = Vec::new();
    for p in &sorted {
        if xs.last() == Some(&p.x) {
            let g = groups.last_mut().unwrap();
            g.w += p.w;
            g.wy += p.w * sign * p.y;
        } else {
            xs.push(p.x);
            groups.push(Block { w: p.w, wy: p.w * sign * p.y, len: 1 });
        }
    }

    let mut stack: Vec<Block> = Vec::with_capacity(groups.len());
    for g in groups {
        let mut cur = g;
        while let Some(top) = stack.last() {
            if top.mean() < cur.mean() {
                break;
            }
            let top = stack.pop().unwrap();
            cur = Block { w: top.w + cur.w, wy: top.wy + cur.wy, len: top.len + cur.len };
        }
        stack.push(cur);
    }

    let mut values = Vec::with_capacity(xs.len());
    for b in &stack {
        values.extend(std::iter::repeat_n(sign * b.mean(), b.len));
    }
    let se = sorted
        .iter()
        .map(|p| {
            let i = xs.partition_point(|&x| x < p.x);
            p.w * (values[i] - p.y).powi(2)
        })
        .sum();
    IsotonicFit { xs, values, se }
}

/// Minimal squared error over monotone functions of the given direction.
pub fn isotonic_fit(points: &[WeightedPoint], direction: Direction) -> f64 {
    isotonic_regression(points, direction).se
}

/// Direction whose isotonic fit has the lower squared error; ties go to
/// [`Direction::Increasing`].
pub fn infer_mono_direction(points: &[WeightedPoint]) -> Direction {
    let up = isotonic_fit(points, Direction::Increasing);
    let down = isotonic_fit(points, Direction::Decreasing);
    if down < up {
        Direction::Decreasing
    } else {
        Direction::Increasing
    }
}
