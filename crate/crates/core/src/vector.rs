use std::collections::BTreeMap;
use std::fmt;

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// Relative per-coefficient tolerance used by [`SupportedVector::approx_eq`].
pub const VECTOR_REL_TOL: f64 = 1e-12;
/// Absolute floor below which two coefficients always compare equal.
pub const VECTOR_ABS_TOL: f64 = 1e-300;

/// A finitely supported bilateral sequence `x = Σ x_j e_j`.
///
/// Zero coefficients are never stored, so `support_len` is the size of the
/// true support. Serializes as an index-sorted array of `[index, coeff]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SupportedVector {
    entries: BTreeMap<i64, f64>,
}

impl SupportedVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The canonical basis vector `e_j`.
    pub fn basis(j: i64) -> Self {
        let mut v = Self::zero();
        v.entries.insert(j, 1.0);
        v
    }

    /// Builds a vector from `(index, coeff)` pairs; repeated indices are summed.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let mut v = Self::zero();
        for (j, c) in pairs {
            v.add_at(j, c);
        }
        v
    }

    pub fn get(&self, j: i64) -> f64 {
        self.entries.get(&j).copied().unwrap_or(0.0)
    }

    /// Overwrites the coefficient at `j`; writing `0` removes the entry.
    pub fn set(&mut self, j: i64, c: f64) {
        if c == 0.0 {
            self.entries.remove(&j);
        } else {
            self.entries.insert(j, c);
        }
    }

    pub fn add_at(&mut self, j: i64, c: f64) {
        let sum = self.get(j) + c;
        self.set(j, sum);
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.entries.iter().map(|(&j, &c)| (j, c))
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `max |j|` over the support, `None` for the zero vector.
    pub fn radius(&self) -> Option<u64> {
        self.entries.keys().map(|j| j.unsigned_abs()).max()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `(Σ |x_j|^p)^(1/p)`, computed after scaling by the largest magnitude.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        if scale.is_infinite() {
            return f64::INFINITY;
        }
        let sum: f64 = self.entries.values().map(|c| (c.abs() / scale).powf(p)).sum();
        scale * sum.powf(1.0 / p)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pairs(self.iter().map(|(j, c)| (j, c * factor)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, c) in other.iter() {
            out.add_at(j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, c) in other.iter() {
            out.add_at(j, -c);
        }
        out
    }

    /// `‖self − other‖_p`.
    pub fn distance(&self, other: &Self, p: f64) -> f64 {
        self.sub(other).lp_norm(p)
    }

    /// Support-wise equality with relative tolerance `rel` per coefficient.
    pub fn approx_eq_with(&self, other: &Self, rel: f64) -> bool {
        let keys: std::collections::BTreeSet<i64> = self.support().chain(other.support()).collect();
        keys.into_iter().all(|j| {
            let (a, b) = (self.get(j), other.get(j));
            let diff = (a - b).abs();
            diff <= VECTOR_ABS_TOL || diff <= rel * a.abs().max(b.abs())
        })
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.approx_eq_with(other, VECTOR_REL_TOL)
    }

    pub fn to_pairs(&self) -> Vec<(i64, f64)> {
        self.iter().collect()
    }
}

impl FromIterator<(i64, f64)> for SupportedVector {
    fn from_iter<I: IntoIterator<Item = (i64, f64)>>(iter: I) -> Self {
        Self::from_pairs(iter)
    }
}

impl Serialize for SupportedVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_pairs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SupportedVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(i64, f64)>::deserialize(deserializer)?;
        Ok(Self::from_pairs(pairs))
    }
}

impl fmt::Display for SupportedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}·e_{j}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_are_never_stored() {
        let mut v = SupportedVector::from_pairs([(0, 1.0), (3, 0.0), (0, -1.0)]);
        assert!(v.is_zero());
        v.set(2, 5.0);
        v.set(2, 0.0);
        assert_eq!(v.support_len(), 0);
    }

    #[test]
    fn norms() {
        let v = SupportedVector::from_pairs([(-1, 3.0), (4, -4.0)]);
        assert_eq!(v.lp_norm(1.0), 7.0);
        assert!((v.lp_norm(2.0) - 5.0).abs() < 1e-15);
        let tiny = v.scaled(1e-300);
        assert!((tiny.lp_norm(2.0) / 5e-300 - 1.0).abs() < 1e-14);
        assert_eq!(SupportedVector::zero().lp_norm(3.0), 0.0);
    }

    #[test]
    fn json_is_sorted_pairs() {
        let v = SupportedVector::from_pairs([(5, 0.5), (-2, 1.0)]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[[-2,1.0],[5,0.5]]");
        let back: SupportedVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn approx_eq_uses_relative_tolerance() {
        let a = SupportedVector::from_pairs([(0, 1.0e10)]);
        let b = SupportedVector::from_pairs([(0, 1.0e10 * (1.0 + 1e-13))]);
        let c = SupportedVector::from_pairs([(0, 1.0e10 * (1.0 + 1e-11))]);
        assert!(a.approx_eq(&b));
        assert!(!a.approx_eq(&c));
        assert!(!a.approx_eq(&SupportedVector::zero()));
    }
}
