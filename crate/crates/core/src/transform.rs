//! Strictly increasing input transforms applied to x before interpolation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An x-transform. Every variant is strictly increasing on its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Identity,
    /// Natural log, defined for `x > 0`.
    Log,
    /// `ln(1 + x)`, defined for `x > -1`.
    Log1p,
    /// `sgn(x) * ln(1 + |x|)`, defined everywhere.
    Symlog1p,
}

impl Transform {
    pub const ALL: [Transform; 4] = [
        Transform::Identity,
        Transform::Log,
        Transform::Log1p,
        Transform::Symlog1p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Log => "log",
            Transform::Log1p => "log1p",
            Transform::Symlog1p => "symlog1p",
        }
    }

    /// Whether `x` lies in the admissible domain. NaN is never admissible.
    pub fn admits(self, x: f64) -> bool {
        match self {
            Transform::Identity | Transform::Symlog1p => !x.is_nan(),
            Transform::Log => x > 0.0,
            Transform::Log1p => x > -1.0,
        }
    }

    pub fn apply(self, x: f64) -> Result<f64> {
        if self.admits(x) {
            Ok(self.apply_unchecked(x))
        } else {
            Err(Error::Domain { transform: self, x })
        }
    }

    /// Applies the transform without a domain check. Out-of-domain input
    /// yields NaN or an infinity.
    #[inline]
    pub fn apply_unchecked(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Log => x.ln(),
            Transform::Log1p => x.ln_1p(),
            Transform::Symlog1p => x.signum() * x.abs().ln_1p(),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Transform::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTransform(s.to_string()))
    }
}
