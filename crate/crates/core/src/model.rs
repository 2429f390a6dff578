//! Additive curve models and their JSON form.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::curve::{EnumCurve, PWLCurve};
use crate::error::{Error, Result};
use crate::transform::Transform;

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Pwl(PWLCurve),
    Enum(EnumCurve),
}

impl Component {
    pub fn name(&self) -> &str {
        match self {
            Component::Pwl(c) => c.name(),
            Component::Enum(c) => c.name(),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Component::Pwl(c) => c.eval(x),
            Component::Enum(c) => Ok(c.eval(x)),
        }
    }
}

impl From<PWLCurve> for Component {
    fn from(c: PWLCurve) -> Self {
        Component::Pwl(c)
    }
}

impl From<EnumCurve> for Component {
    fn from(c: EnumCurve) -> Self {
        Component::Enum(c)
    }
}

/// `bias + sum_i f_i(x_i)` over named feature curves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveModel {
    components: Vec<Component>,
    bias: f64,
}

impl CurveModel {
    pub fn new(components: Vec<Component>, bias: f64) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &components {
            if !seen.insert(c.name()) {
                return Err(Error::DuplicateFeature(c.name().to_string()));
            }
        }
        if !bias.is_finite() {
            return Err(Error::InvalidCurve("model bias is not finite".into()));
        }
        Ok(Self { components, bias })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name() == name)
    }

    /// Evaluates the model on a feature-name to value map. Extra features
    /// are ignored; a missing one is an error.
    pub fn eval(&self, features: &HashMap<String, f64>) -> Result<f64> {
        self.eval_with(|name| features.get(name).copied())
    }

    pub fn eval_with(&self, mut lookup: impl FnMut(&str) -> Option<f64>) -> Result<f64> {
        let mut total = self.bias;
        for c in &self.components {
            let x = lookup(c.name()).ok_or_else(|| Error::MissingFeature(c.name().to_string()))?;
            total += c.eval(x)?;
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDto::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: ModelDto = serde_json::from_str(text)?;
        dto.try_into()
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct ModelDto {
    bias: f64,
    components: Vec<ComponentDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub(crate) enum ComponentDto {
    Pwl {
        name: String,
        points: Vec<[f64; 2]>,
        fx: Transform,
    },
    Enum {
        name: String,
        #[serde(serialize_with = "ordered_mapping", deserialize_with = "numeric_keys")]
        mapping: Vec<(f64, f64)>,
        #[serde(default)]
        default: f64,
    },
}

// JSON object keys are strings; emit them in numeric key order.
fn ordered_mapping<S: Serializer>(entries: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(entries.len()))?;
    for (k, v) in entries {
        map.serialize_entry(&k.to_string(), v)?;
    }
    map.end()
}

fn numeric_keys<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
    let raw = BTreeMap::<String, f64>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<f64>()
                .map(|key| (key, v))
                .map_err(|_| serde::de::Error::custom(format!("mapping key `{k}` is not a number")))
        })
        .collect()
}

impl From<&Component> for ComponentDto {
    fn from(c: &Component) -> Self {
        match c {
            Component::Pwl(c) => ComponentDto::Pwl {
                name: c.name().to_string(),
                points: c.points().iter().map(|p| [p.x, p.y]).collect(),
                fx: c.fx(),
            },
            Component::Enum(c) => ComponentDto::Enum {
                name: c.name().to_string(),
                mapping: c.mapping().iter().map(|(k, v)| (k.value(), *v)).collect(),
                default: c.default_value(),
            },
        }
    }
}

impl TryFrom<ComponentDto> for Component {
    type Error = Error;

    fn try_from(dto: ComponentDto) -> Result<Self> {
        Ok(match dto {
            ComponentDto::Pwl { name, points, fx } => {
                PWLCurve::new(name, points.into_iter().map(|[x, y]| (x, y)), fx)?.into()
            }
            ComponentDto::Enum { name, mapping, default } => {
                EnumCurve::new(name, mapping, default)?.into()
            }
        })
    }
}

impl From<&CurveModel> for ModelDto {
    fn from(m: &CurveModel) -> Self {
        ModelDto {
            bias: m.bias,
            components: m.components.iter().map(ComponentDto::from).collect(),
        }
    }
}

impl TryFrom<ModelDto> for CurveModel {
    type Error = Error;

    fn try_from(dto: ModelDto) -> Result<Self> {
        let components = dto
            .components
            .into_iter()
            .map(Component::try_from)
            .collect::<Result<Vec<_>>>()?;
        CurveModel::new(components, dto.bias)
    }
}

/// JSON for a single component, as written by `pwlfit fit --emit json`.
pub fn component_to_json(c: &Component) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ComponentDto::from(c))?)
}

pub fn component_from_json(text: &str) -> Result<Component> {
    let dto: ComponentDto = serde_json::from_str(text)?;
    dto.try_into()
}
