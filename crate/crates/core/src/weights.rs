//! Weight rules `n ↦ w_n` with closed-form products along arithmetic progressions.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::SignedLogScalar;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// `w_n = λ` if `n > cutoff`, else `1/λ`.
    TwoLevel { lambda: f64, cutoff: i64 },
    /// Explicit entries over a default. With `decay = Some(q)` the weights
    /// off the table are `default · (1 + |n|)^(−q)`, a zero-limit tail.
    Table {
        entries: BTreeMap<i64, f64>,
        default: f64,
        decay: Option<f64>,
    },
    /// `w_n = values[n mod len]`.
    Periodic { values: Vec<f64> },
}

/// A bounded, nonzero weight sequence with cached `sup |w|` and `inf |w|`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRule {
    kind: WeightKind,
    sup_abs: f64,
    inf_abs: f64,
}

fn check_weight(w: f64, what: &str) -> Result<()> {
    if w == 0.0 || !w.is_finite() {
        return Err(Error::InvalidWeights(format!(
            "{what} must be finite and nonzero, got {w}"
        )));
    }
    Ok(())
}

impl WeightRule {
    pub fn new(kind: WeightKind) -> Result<Self> {
        let (sup_abs, inf_abs) = match &kind {
            WeightKind::TwoLevel { lambda, .. } => {
                check_weight(*lambda, "lambda")?;
                let a = lambda.abs();
                check_weight(1.0 / a, "1/lambda")?;
                (a.max(1.0 / a), a.min(1.0 / a))
            }
            WeightKind::Table {
                entries,
                default,
                decay,
            } => {
                check_weight(*default, "default weight")?;
                for (&n, &w) in entries {
                    check_weight(w, &format!("table weight at {n}"))?;
                }
                let mut sup = default.abs();
                let mut inf = default.abs();
                for w in entries.values() {
                    sup = sup.max(w.abs());
                    inf = inf.min(w.abs());
                }
                if let Some(q) = decay {
                    if !(q.is_finite() && *q > 0.0) {
                        return Err(Error::InvalidWeights(format!(
                            "decay exponent must be positive, got {q}"
                        )));
                    }
                    inf = 0.0;
                }
                (sup, inf)
            }
            WeightKind::Periodic { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidWeights("empty period".into()));
                }
                for (i, &w) in values.iter().enumerate() {
                    check_weight(w, &format!("periodic weight {i}"))?;
                }
                let sup = values.iter().fold(0.0f64, |m, w| m.max(w.abs()));
                let inf = values.iter().fold(f64::INFINITY, |m, w| m.min(w.abs()));
                (sup, inf)
            }
        };
        Ok(Self {
            kind,
            sup_abs,
            inf_abs,
        })
    }

    pub fn two_level(lambda: f64, cutoff: i64) -> Result<Self> {
        Self::new(WeightKind::TwoLevel { lambda, cutoff })
    }

    pub fn constant(w: f64) -> Result<Self> {
        Self::new(WeightKind::Periodic { values: vec![w] })
    }

    pub fn periodic(values: Vec<f64>) -> Result<Self> {
        Self::new(WeightKind::Periodic { values })
    }

    pub fn table(entries: BTreeMap<i64, f64>, default: f64) -> Result<Self> {
        Self::new(WeightKind::Table {
            entries,
            default,
            decay: None,
        })
    }

    pub fn decaying_table(entries: BTreeMap<i64, f64>, default: f64, exponent: f64) -> Result<Self> {
        Self::new(WeightKind::Table {
            entries,
            default,
            decay: Some(exponent),
        })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    pub fn inf_abs(&self) -> f64 {
        self.inf_abs
    }

    pub fn weight(&self, n: i64) -> f64 {
        match &self.kind {
            WeightKind::TwoLevel { lambda, cutoff } => {
                if n > *cutoff {
                    *lambda
                } else {
                    1.0 / lambda
                }
            }
            WeightKind::Table {
                entries,
                default,
                decay,
            } => match entries.get(&n) {
                Some(w) => *w,
                None => match decay {
                    Some(q) => default * (1.0 + n.unsigned_abs() as f64).powf(-q),
                    None => *default,
                },
            },
            WeightKind::Periodic { values } => values[periodic_slot(n, values.len())],
        }
    }

    /// `w_n` in signed-log form. Two-level weights use `±ln|λ|` exactly so
    /// that the two levels cancel in log-space.
    pub fn log_weight(&self, n: i64) -> SignedLogScalar {
        match &self.kind {
            WeightKind::TwoLevel { lambda, cutoff } => {
                let sign = if *lambda > 0.0 { 1 } else { -1 };
                let l = lambda.abs().ln();
                SignedLogScalar::from_parts(sign, if n > *cutoff { l } else { -l })
            }
            _ => SignedLogScalar::from_f64(self.weight(n)),
        }
    }

    /// `Π_{v=0}^{count−1} w_{start + v·stride}`.
    ///
    /// Two-level, periodic and plain table rules are evaluated in closed form
    /// (cost independent of `count`); decaying tables fall back to a
    /// term-by-term product.
    pub fn progression_product(&self, start: i64, stride: i64, count: u64) -> SignedLogScalar {
        if count == 0 {
            return SignedLogScalar::ONE;
        }
        match &self.kind {
            WeightKind::TwoLevel { lambda, cutoff } => {
                let high = count_above(start, stride, count, *cutoff);
                let low = count - high;
                let sign = if *lambda < 0.0 && count % 2 == 1 { -1 } else { 1 };
                let diff = high as f64 - low as f64;
                SignedLogScalar::from_parts(sign, diff * lambda.abs().ln())
            }
            WeightKind::Periodic { values } if stride != 0 => {
                let len = values.len() as i64;
                let g = gcd(stride.unsigned_abs(), len as u64) as i64;
                let cycle = (len / g) as u64;
                let full = count / cycle;
                let rem = count % cycle;
                let cycle_term = |v: u64| {
                    let idx = start as i128 + v as i128 * stride as i128;
                    values[idx.rem_euclid(len as i128) as usize]
                };
                let mut cycle_log = 0.0;
                let mut cycle_neg = 0u64;
                let mut rem_log = 0.0;
                let mut rem_neg = 0u64;
                for v in 0..cycle {
                    let w = cycle_term(v);
                    cycle_log += w.abs().ln();
                    cycle_neg += u64::from(w < 0.0);
                    if v < rem {
                        rem_log += w.abs().ln();
                        rem_neg += u64::from(w < 0.0);
                    }
                }
                let neg = full * cycle_neg + rem_neg;
                let sign = if neg % 2 == 1 { -1 } else { 1 };
                SignedLogScalar::from_parts(sign, full as f64 * cycle_log + rem_log)
            }
            WeightKind::Table {
                entries,
                default,
                decay: None,
            } if stride != 0 => {
                let mut hits = 0u64;
                let mut log = 0.0;
                let mut neg = 0u64;
                for (&idx, &w) in entries {
                    let offset = idx as i128 - start as i128;
                    if offset % stride as i128 != 0 {
                        continue;
                    }
                    let v = offset / stride as i128;
                    if v >= 0 && (v as u128) < count as u128 {
                        hits += 1;
                        log += w.abs().ln();
                        neg += u64::from(w < 0.0);
                    }
                }
                let rest = count - hits;
                log += rest as f64 * default.abs().ln();
                if *default < 0.0 {
                    neg += rest;
                }
                SignedLogScalar::from_parts(if neg % 2 == 1 { -1 } else { 1 }, log)
            }
            _ => {
                let mut acc = SignedLogScalar::ONE;
                for v in 0..count {
                    let idx = start as i128 + v as i128 * stride as i128;
                    acc = acc * self.log_weight(idx as i64);
                }
                acc
            }
        }
    }

    /// The rule `n ↦ 1 / w_{n+shift}`.
    pub fn reciprocal_shifted(&self, shift: i64) -> Result<Self> {
        let kind = match &self.kind {
            WeightKind::TwoLevel { lambda, cutoff } => WeightKind::TwoLevel {
                lambda: 1.0 / lambda,
                cutoff: cutoff - shift,
            },
            WeightKind::Periodic { values } => {
                let len = values.len() as i64;
                WeightKind::Periodic {
                    values: (0..len)
                        .map(|i| 1.0 / values[(i + shift).rem_euclid(len) as usize])
                        .collect(),
                }
            }
            WeightKind::Table {
                entries,
                default,
                decay,
            } => {
                if decay.is_some() {
                    return Err(Error::InvalidWeights(
                        "decaying table has no bounded reciprocal".into(),
                    ));
                }
                WeightKind::Table {
                    entries: entries.iter().map(|(&n, &w)| (n - shift, 1.0 / w)).collect(),
                    default: 1.0 / default,
                    decay: None,
                }
            }
        };
        Self::new(kind)
    }
}

fn periodic_slot(n: i64, len: usize) -> usize {
    n.rem_euclid(len as i64) as usize
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `#{v ∈ [0, count) : start + v·stride > cutoff}`.
fn count_above(start: i64, stride: i64, count: u64, cutoff: i64) -> u64 {
    let (start, stride, cutoff, count) = (start as i128, stride as i128, cutoff as i128, count as i128);
    let above = if stride == 0 {
        if start > cutoff {
            count
        } else {
            0
        }
    } else if stride > 0 {
        // first v with start + v·stride > cutoff
        let first = (cutoff - start).div_euclid(stride) + 1;
        count - first.clamp(0, count)
    } else {
        // v < (start − cutoff) / |stride|
        let s = -stride;
        let num = start - cutoff;
        let bound = if num <= 0 { 0 } else { (num + s - 1) / s };
        bound.clamp(0, count)
    };
    above as u64
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
enum WeightRepr {
    TwoLevel {
        lambda: f64,
        cutoff: i64,
    },
    Table {
        entries: Vec<(i64, f64)>,
        default: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<f64>,
    },
    Periodic {
        values: Vec<f64>,
    },
}

impl Serialize for WeightRule {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match &self.kind {
            WeightKind::TwoLevel { lambda, cutoff } => WeightRepr::TwoLevel {
                lambda: *lambda,
                cutoff: *cutoff,
            },
            WeightKind::Table {
                entries,
                default,
                decay,
            } => WeightRepr::Table {
                entries: entries.iter().map(|(&n, &w)| (n, w)).collect(),
                default: *default,
                decay: *decay,
            },
            WeightKind::Periodic { values } => WeightRepr::Periodic {
                values: values.clone(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightRule {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let kind = match WeightRepr::deserialize(deserializer)? {
            WeightRepr::TwoLevel { lambda, cutoff } => WeightKind::TwoLevel { lambda, cutoff },
            WeightRepr::Table {
                entries,
                default,
                decay,
            } => WeightKind::Table {
                entries: entries.into_iter().collect(),
                default,
                decay,
            },
            WeightRepr::Periodic { values } => WeightKind::Periodic { values },
        };
        Self::new(kind).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(rule: &WeightRule, start: i64, stride: i64, count: u64) -> f64 {
        (0..count)
            .map(|v| rule.weight(start + v as i64 * stride))
            .product()
    }

    #[test]
    fn two_level_values() {
        let w = WeightRule::two_level(3.0, 0).unwrap();
        assert_eq!(w.weight(1), 3.0);
        assert_eq!(w.weight(0), 1.0 / 3.0);
        assert_eq!(w.sup_abs(), 3.0);
        assert!((w.inf_abs() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn rejects_zero_weights() {
        assert!(WeightRule::two_level(0.0, 0).is_err());
        assert!(WeightRule::periodic(vec![1.0, 0.0]).is_err());
        assert!(WeightRule::periodic(vec![]).is_err());
        assert!(WeightRule::table(BTreeMap::from([(3, 0.0)]), 1.0).is_err());
        assert!(WeightRule::decaying_table(BTreeMap::new(), 1.0, -1.0).is_err());
    }

    #[test]
    fn decaying_table_has_zero_infimum() {
        let entries: BTreeMap<i64, f64> = (1..=10).map(|k| (k, 1.0 / k as f64)).collect();
        let finite = WeightRule::table(entries.clone(), 1.0).unwrap();
        assert!(finite.inf_abs() > 0.0);
        let tail = WeightRule::decaying_table(entries, 1.0, 1.0).unwrap();
        assert_eq!(tail.inf_abs(), 0.0);
        assert_eq!(tail.sup_abs(), 1.0);
        assert_eq!(tail.weight(-3), 0.25);
        assert!(tail.reciprocal_shifted(1).is_err());
    }

    #[test]
    fn reciprocal_shift_of_two_level() {
        let w = WeightRule::two_level(2.0, 0).unwrap();
        let v = w.reciprocal_shifted(1).unwrap();
        for n in -10..10 {
            assert!((v.weight(n) - 1.0 / w.weight(n + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn json_form() {
        let w = WeightRule::two_level(2.0, -1).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"kind":"two_level","params":{"lambda":2.0,"cutoff":-1}}"#);
        let back: WeightRule = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
        let t: WeightRule = serde_json::from_str(
            r#"{"kind":"table","params":{"entries":[[0,0.5]],"default":1.0}}"#,
        )
        .unwrap();
        assert_eq!(t.weight(0), 0.5);
        assert!(serde_json::from_str::<WeightRule>(
            r#"{"kind":"periodic","params":{"values":[0.0]}}"#
        )
        .is_err());
    }

    fn rule_strategy() -> impl Strategy<Value = WeightRule> {
        prop_oneof![
            (prop_oneof![-3.0..-1.1f64, 0.3..3.0f64], -10i64..10)
                .prop_map(|(l, c)| WeightRule::two_level(l, c).unwrap()),
            prop::collection::vec(prop_oneof![-2.0..-0.5f64, 0.5..2.0f64], 1..5)
                .prop_map(|v| WeightRule::periodic(v).unwrap()),
            (
                prop::collection::btree_map(-15i64..15, prop_oneof![-2.0..-0.5f64, 0.5..2.0f64], 0..6),
                prop_oneof![-1.5..-0.5f64, 0.5..1.5f64]
            )
                .prop_map(|(e, d)| WeightRule::table(e, d).unwrap()),
            (0.5..1.5f64, 0.5..2.0f64)
                .prop_map(|(d, q)| WeightRule::decaying_table(BTreeMap::new(), d, q).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn closed_form_matches_naive_product(
            rule in rule_strategy(),
            start in -30i64..30,
            stride in prop_oneof![-5i64..=-1, 1i64..=5],
            count in 0u64..40,
        ) {
            let fast = rule.progression_product(start, stride, count).to_f64();
            let slow = naive(&rule, start, stride, count);
            prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-300), "{fast} vs {slow}");
        }
    }
}
