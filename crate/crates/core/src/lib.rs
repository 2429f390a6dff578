//! Piecewise-linear curve fitting and distillation of additive models into
//! small, readable curve models.
//!
//! The fitting pipeline ([`fit_pwl`]) chooses candidate knots by weighted
//! quantiles, condenses the data exactly around those candidates so every
//! least-squares solve is independent of the input size, and searches knot
//! subsets greedily. [`distill_model`] applies it per feature of an additive
//! teacher, and [`codegen`] renders the result as curve literals such as
//!
//! ```text
//! PWLCurve("age", [(18, 3.13), (21, 0.5914), (46, -0.7206)], fx="log")
//! ```
//!
//! With the default `parallel` feature, candidate evaluation, partition
//! condensation and per-feature fits run on the rayon pool. Results are
//! identical with or without it.

pub mod codegen;
pub mod condense;
pub mod correlation;
pub mod curve;
pub mod distill;
mod error;
pub mod exec;
pub mod fitter;
pub mod isotonic;
pub mod model;
pub mod points;
pub mod solver;
pub mod transform;

pub use codegen::{emit_curve_literal, emit_model_literal, parse_curve_literal, parse_model_literal};
pub use condense::{
    best_fit_line, condense_around_knots, linear_condense, squared_error, CondensedSet, Line,
};
pub use correlation::weighted_pearson;
pub use curve::{Category, ControlPoint, EnumCurve, PWLCurve};
pub use distill::{
    attribute_failures, distill_categorical_feature, distill_model, distill_numeric_feature,
    AttributionReport, AttributionRow, EvalColumn, EvalSet, FeatureKind, FeatureSamples,
    TeacherSampleTable,
};
pub use error::{Error, Result};
pub use fitter::{
    downsample, fit_pwl, fit_pwl_report, greedy_fit, sample_candidate_knots, select_transform,
    CandidateKnots, FitConfig, FitReport, FxPolicy, GreedyFit, Mono, SearchOptions,
};
pub use isotonic::{infer_mono_direction, isotonic_fit, isotonic_regression, Direction};
pub use model::{Component, CurveModel};
pub use points::{PointSet, WeightedPoint};
pub use solver::{solve_y_knots, solve_y_knots_bounded, SlopeBounds};
pub use transform::Transform;
