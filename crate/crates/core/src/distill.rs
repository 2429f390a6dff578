//! Localized distillation: each univariate component of an additive
//! teacher is approximated on its own, from samples of that component.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::curve::{Category, EnumCurve, PWLCurve};
use crate::error::{Error, Result};
use crate::exec;
use crate::fitter::{fit_pwl, FitConfig};
use crate::model::{Component, CurveModel};
use crate::points::{PointSet, WeightedPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numerical,
    Categorical,
}

/// Samples `(x, f(x), weight)` of one teacher component.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSamples {
    pub name: String,
    pub kind: FeatureKind,
    pub samples: PointSet,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TeacherSampleTable {
    features: Vec<FeatureSamples>,
}

#[derive(Deserialize, Serialize)]
struct TableDto {
    features: Vec<FeatureDto>,
}

#[derive(Deserialize, Serialize)]
struct FeatureDto {
    name: String,
    kind: FeatureKind,
    samples: Vec<Vec<f64>>,
}

impl TeacherSampleTable {
    pub fn new(features: Vec<FeatureSamples>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::DuplicateFeature(f.name.clone()));
            }
        }
        Ok(Self { features })
    }

    pub fn features(&self) -> &[FeatureSamples] {
        &self.features
    }

    /// Parses `{"features": [{"name", "kind", "samples": [[x, y, weight?], ...]}]}`.
    /// A missing weight defaults to 1.
    pub fn from_json(text: &str) -> Result<Self> {
        let dto: TableDto = serde_json::from_str(text)?;
        let features = dto
            .features
            .into_iter()
            .map(|f| {
                let points = f
                    .samples
                    .iter()
                    .enumerate()
                    .map(|(index, s)| match s.as_slice() {
                        [x, y] => Ok(WeightedPoint::new(*x, *y, 1.0)),
                        [x, y, w] => Ok(WeightedPoint::new(*x, *y, *w)),
                        _ => Err(Error::InvalidPoint {
                            index,
                            reason: "sample must be [x, y] or [x, y, weight]",
                        }),
                    })
                    .collect::<Result<Vec<_>>>()
                    .and_then(PointSet::new)
                    .map_err(|e| Error::Features(vec![(f.name.clone(), e)]))?;
                Ok(FeatureSamples { name: f.name, kind: f.kind, samples: points })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(features)
    }

    pub fn to_json(&self) -> Result<String> {
        let dto = TableDto {
            features: self
                .features
                .iter()
                .map(|f| FeatureDto {
                    name: f.name.clone(),
                    kind: f.kind,
                    samples: f.samples.iter().map(|p| vec![p.x, p.y, p.w]).collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&dto)?)
    }
}

/// Stable per-feature seed, independent of feature order and threading.
pub fn feature_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name, then a splitmix64 finalizer
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn distill_numeric_feature(samples: &[WeightedPoint], config: &FitConfig) -> Result<PWLCurve> {
    fit_pwl(samples, config)
}

/// Maps each category to the weighted mean of its outputs. Unseen
/// categories fall back to the overall weighted mean.
pub fn distill_categorical_feature(samples: &[WeightedPoint]) -> Result<EnumCurve> {
    let mut sums: BTreeMap<Category, (f64, f64)> = BTreeMap::new();
    let (mut total_w, mut total_wy) = (0.0, 0.0);
    for p in samples {
        let e = sums.entry(Category::new(p.x)?).or_insert((0.0, 0.0));
        e.0 += p.w;
        e.1 += p.w * p.y;
        total_w += p.w;
        total_wy += p.w * p.y;
    }
    let default = if total_w > 0.0 { total_wy / total_w } else { 0.0 };
    EnumCurve::new(
        "",
        sums.into_iter().map(|(k, (w, wy))| (k.value(), wy / w)),
        default,
    )
}

fn distill_feature(feature: &FeatureSamples, config: &FitConfig) -> Result<Component> {
    Ok(match feature.kind {
        FeatureKind::Numerical => {
            let config = FitConfig {
                seed: feature_seed(config.seed, &feature.name),
                ..config.clone()
            };
            distill_numeric_feature(&feature.samples, &config)?
                .with_name(&feature.name)
                .into()
        }
        FeatureKind::Categorical => distill_categorical_feature(&feature.samples)?
            .with_name(&feature.name)
            .into(),
    })
}

/// Distills every feature independently (in parallel when configured)
/// into a zero-bias curve model. Failures are collected per feature.
pub fn distill_model(teacher: &TeacherSampleTable, config: &FitConfig) -> Result<CurveModel> {
    config.validate()?;
    let results = exec::map_slice(&teacher.features, config.parallel, |f| distill_feature(f, config));
    let mut components = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (feature, r) in teacher.features.iter().zip(results) {
        match r {
            Ok(c) => components.push(c),
            Err(e) => failures.push((feature.name.clone(), e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Features(failures));
    }
    CurveModel::new(components, 0.0)
}

/// One feature's column in an evaluation set: the feature value and the
/// teacher component's output for each example.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalColumn {
    pub name: String,
    pub values: Vec<f64>,
    pub teacher: Vec<f64>,
}

/// Per-example feature values and teacher component outputs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalSet {
    columns: Vec<EvalColumn>,
    rows: usize,
}

impl EvalSet {
    pub fn new(columns: Vec<EvalColumn>) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.values.len());
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateFeature(c.name.clone()));
            }
            if c.values.len() != rows || c.teacher.len() != rows {
                return Err(Error::InvalidConfig(format!(
                    "column `{}` has {} values and {} teacher outputs, expected {rows}",
                    c.name,
                    c.values.len(),
                    c.teacher.len()
                )));
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column(&self, name: &str) -> Option<&EvalColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Teacher score per example: the sum of all component outputs.
    pub fn teacher_scores(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.columns.iter().map(|c| c.teacher[r]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributionRow {
    pub feature: String,
    pub delta: f64,
}

/// Features ordered from worst to best distillation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AttributionReport {
    pub rows: Vec<AttributionRow>,
}

impl AttributionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,delta\n");
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", csv_field(&r.feature), r.delta));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// For each feature, scores a hybrid that is the teacher with only that
/// component swapped for its distilled curve, and reports the MSE against
/// the teacher. Sorted by delta, largest first; ties keep table order.
pub fn attribute_failures(
    teacher: &TeacherSampleTable,
    eval: &EvalSet,
    config: &FitConfig,
) -> Result<AttributionReport> {
    for f in teacher.features() {
        if eval.column(&f.name).is_none() {
            return Err(Error::MissingFeature(f.name.clone()));
        }
    }
    if eval.rows() == 0 {
        return Err(Error::InsufficientData("evaluation set has no rows".into()));
    }
    let model = distill_model(teacher, config)?;
    let mut rows = Vec::with_capacity(model.components().len());
    for component in model.components() {
        let col = eval.column(component.name()).expect("checked above");
        // hybrid - teacher = curve(x) - teacher component(x); the other
        // components cancel exactly
        let mut sum = 0.0;
        for (x, t) in col.values.iter().zip(&col.teacher) {
            let d = component.eval(*x)? - t;
            sum += d * d;
        }
        rows.push(AttributionRow {
            feature: component.name().to_string(),
            delta: sum / eval.rows() as f64,
        });
    }
    rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    Ok(AttributionReport { rows })
}
