//! Inducing maps: bijections of the integers.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

type IndexFn = Arc<dyn Fn(i64) -> i64 + Send + Sync>;

/// A bijection of ℤ given by a forward rule and its claimed inverse.
///
/// Consistency can only be checked pointwise, so every step taken through
/// [`InducingMap::iterate`] verifies `inverse(forward(n)) == n` (or the
/// mirror identity for backward steps) on the points actually visited.
#[derive(Clone)]
pub struct GeneralMap {
    rules_ref: String,
    forward: IndexFn,
    inverse: IndexFn,
}

impl GeneralMap {
    pub fn new<F, G>(rules_ref: impl Into<String>, forward: F, inverse: G) -> Self
    where
        F: Fn(i64) -> i64 + Send + Sync + 'static,
        G: Fn(i64) -> i64 + Send + Sync + 'static,
    {
        Self {
            rules_ref: rules_ref.into(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
        }
    }

    /// Resolves one of the built-in named rules:
    ///
    /// * `negate`: `n ↦ −n`
    /// * `swap_pairs`: `2k ↔ 2k+1`
    /// * `swap_pairs_then_shift:<r>`: swap pairs, then add `r`
    pub fn from_ref(rules_ref: &str) -> Result<Self> {
        match rules_ref {
            "negate" => Ok(Self::new(rules_ref, |n: i64| -n, |n: i64| -n)),
            "swap_pairs" => Ok(Self::new(rules_ref, swap_pair, swap_pair)),
            _ => {
                if let Some(r) = rules_ref.strip_prefix("swap_pairs_then_shift:") {
                    let r: i64 = r
                        .trim()
                        .parse()
                        .map_err(|_| Error::UnknownMapRule(rules_ref.to_string()))?;
                    Ok(Self::new(
                        rules_ref,
                        move |n| swap_pair(n) + r,
                        move |n| swap_pair(n - r),
                    ))
                } else {
                    Err(Error::UnknownMapRule(rules_ref.to_string()))
                }
            }
        }
    }

    pub fn rules_ref(&self) -> &str {
        &self.rules_ref
    }

    fn step_forward(&self, n: i64) -> Result<i64> {
        let m = (self.forward)(n);
        let back = (self.inverse)(m);
        if back != n {
            return Err(Error::InconsistentMap {
                map: self.rules_ref.clone(),
                n,
                got: back,
            });
        }
        Ok(m)
    }

    fn step_backward(&self, n: i64) -> Result<i64> {
        let m = (self.inverse)(n);
        let back = (self.forward)(m);
        if back != n {
            return Err(Error::InconsistentMap {
                map: self.rules_ref.clone(),
                n,
                got: back,
            });
        }
        Ok(m)
    }
}

fn swap_pair(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        n + 1
    } else {
        n - 1
    }
}

impl fmt::Debug for GeneralMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralMap")
            .field("rules_ref", &self.rules_ref)
            .finish()
    }
}

/// Two general maps are equal when they name the same rule.
impl PartialEq for GeneralMap {
    fn eq(&self, other: &Self) -> bool {
        self.rules_ref == other.rules_ref
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InducingMap {
    /// `f(n) = n + step`, `step ≠ 0`.
    Translation(i64),
    General(GeneralMap),
}

impl InducingMap {
    pub fn translation(step: i64) -> Result<Self> {
        if step == 0 {
            return Err(Error::ZeroStep);
        }
        Ok(Self::Translation(step))
    }

    pub fn translation_step(&self) -> Option<i64> {
        match self {
            Self::Translation(r) => Some(*r),
            Self::General(_) => None,
        }
    }

    /// `f^k(n)`; negative `k` iterates the inverse.
    pub fn iterate(&self, n: i64, k: i64) -> Result<i64> {
        match self {
            Self::Translation(r) => r
                .checked_mul(k)
                .and_then(|d| n.checked_add(d))
                .ok_or(Error::IndexOverflow),
            Self::General(g) => {
                let mut cur = n;
                if k >= 0 {
                    for _ in 0..k {
                        cur = g.step_forward(cur)?;
                    }
                } else {
                    for _ in 0..k.unsigned_abs() {
                        cur = g.step_backward(cur)?;
                    }
                }
                Ok(cur)
            }
        }
    }

    pub fn forward(&self, n: i64) -> Result<i64> {
        self.iterate(n, 1)
    }

    pub fn backward(&self, n: i64) -> Result<i64> {
        self.iterate(n, -1)
    }
}

/// `f^k(n)` for the given map.
pub fn evaluate_map(map: &InducingMap, n: i64, k: i64) -> Result<i64> {
    map.iterate(n, k)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MapRepr {
    Translation { step: i64 },
    General { rules_ref: String },
}

impl Serialize for InducingMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Self::Translation(r) => MapRepr::Translation { step: *r },
            Self::General(g) => MapRepr::General {
                rules_ref: g.rules_ref.clone(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for InducingMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match MapRepr::deserialize(deserializer)? {
            MapRepr::Translation { step } => Self::translation(step).map_err(D::Error::custom),
            MapRepr::General { rules_ref } => GeneralMap::from_ref(&rules_ref)
                .map(Self::General)
                .map_err(D::Error::custom),
        }
    }
}
