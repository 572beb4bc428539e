//! Bilateral weighted pseudo-shifts `T_{f,w}` acting on finitely supported vectors.
//!
//! `T_{f,w}(Σ x_j e_j) = Σ w_{f(j)} x_{f(j)} e_j`, equivalently
//! `T e_k = w_k e_{f^{-1}(k)}`. Powers are applied through the closed form
//!
//! ```text
//! T^n e_m = (Π_{v=0}^{n-1} w_{f^{-v}(m)}) e_{f^{-n}(m)}
//! ```
//!
//! with the product carried as a [`SignedLogScalar`]. For translation maps the
//! product runs along an arithmetic progression and is evaluated by
//! [`WeightRule::progression_product`], so large `n` costs nothing extra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::InducingMap;
use crate::scalar::SignedLogScalar;
use crate::vector::SupportedVector;
use crate::weights::WeightRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoShift {
    pub name: String,
    pub map: InducingMap,
    pub weights: WeightRule,
}

impl PseudoShift {
    pub fn new(name: impl Into<String>, map: InducingMap, weights: WeightRule) -> Self {
        Self {
            name: name.into(),
            map,
            weights,
        }
    }

    /// Weighted translation `f(n) = n + step`.
    pub fn translation(name: impl Into<String>, step: i64, weights: WeightRule) -> Result<Self> {
        Ok(Self::new(name, InducingMap::translation(step)?, weights))
    }

    /// Invertible iff `inf |w| > 0`; weights are bounded by construction.
    pub fn invertible(&self) -> bool {
        self.weights.inf_abs() > 0.0
    }

    pub fn weight(&self, n: i64) -> f64 {
        self.weights.weight(n)
    }

    /// `sup |w|`, which bounds the operator norm on every `ℓ^p`.
    pub fn norm_bound(&self) -> f64 {
        self.weights.sup_abs()
    }

    fn require_invertible(&self) -> Result<()> {
        if self.invertible() {
            Ok(())
        } else {
            Err(Error::NotInvertible(self.name.clone()))
        }
    }

    pub fn apply(&self, x: &SupportedVector) -> Result<SupportedVector> {
        let mut out = SupportedVector::zero();
        for (k, c) in x.iter() {
            out.add_at(self.map.backward(k)?, self.weights.weight(k) * c);
        }
        Ok(out)
    }

    /// `T^{-1} e_j = (1 / w_{f(j)}) e_{f(j)}`.
    pub fn apply_inverse(&self, x: &SupportedVector) -> Result<SupportedVector> {
        self.require_invertible()?;
        let mut out = SupportedVector::zero();
        for (j, c) in x.iter() {
            let target = self.map.forward(j)?;
            out.add_at(target, c / self.weights.weight(target));
        }
        Ok(out)
    }

    /// `W_{m,n} = Π_{v=1}^{n} w_{f^v(m)}`; the empty product for `n = 0`.
    pub fn forward_product(&self, m: i64, n: u64) -> Result<SignedLogScalar> {
        match self.map.translation_step() {
            Some(r) => {
                let start = m.checked_add(r).ok_or(Error::IndexOverflow)?;
                Ok(self.weights.progression_product(start, r, n))
            }
            None => {
                let mut acc = SignedLogScalar::ONE;
                let mut cur = m;
                for _ in 0..n {
                    cur = self.map.forward(cur)?;
                    acc = acc * self.weights.log_weight(cur);
                }
                Ok(acc)
            }
        }
    }

    /// The scalar `c` with `T^n e_m = c · e_{f^{-n}(m)}`, i.e.
    /// `Π_{v=0}^{n-1} w_{f^{-v}(m)}`.
    pub fn backward_coefficient(&self, m: i64, n: u64) -> Result<SignedLogScalar> {
        match self.map.translation_step() {
            Some(r) => Ok(self.weights.progression_product(m, -r, n)),
            None => {
                let mut acc = SignedLogScalar::ONE;
                let mut cur = m;
                for v in 0..n {
                    if v > 0 {
                        cur = self.map.backward(cur)?;
                    }
                    acc = acc * self.weights.log_weight(cur);
                }
                Ok(acc)
            }
        }
    }

    /// `T^n x`, negative `n` meaning powers of the inverse.
    ///
    /// Coefficients that underflow `f64` are dropped; ones that overflow
    /// become infinite.
    pub fn apply_power(&self, x: &SupportedVector, n: i64) -> Result<SupportedVector> {
        if n == 0 {
            return Ok(x.clone());
        }
        let k = n.unsigned_abs();
        let mut out = SupportedVector::zero();
        if n > 0 {
            for (m, c) in x.iter() {
                let coeff = self.backward_coefficient(m, k)?.scale(c);
                out.add_at(self.map.iterate(m, -n)?, coeff.to_f64());
            }
        } else {
            self.require_invertible()?;
            for (m, c) in x.iter() {
                let coeff = SignedLogScalar::from_f64(c) / self.forward_product(m, k)?;
                out.add_at(self.map.iterate(m, k as i64)?, coeff.to_f64());
            }
        }
        Ok(out)
    }

    /// The explicit inverse pseudo-shift `T_{g,v}` with `g(n) = n − r` and
    /// `v_n = 1 / w_{n+r}`, available for translation maps.
    pub fn inverse(&self) -> Result<Self> {
        self.require_invertible()?;
        let r = self
            .map
            .translation_step()
            .ok_or_else(|| Error::InverseUnsupported(self.name.clone()))?;
        Ok(Self {
            name: inverse_name(&self.name),
            map: InducingMap::translation(-r)?,
            weights: self.weights.reciprocal_shifted(r)?,
        })
    }
}

fn inverse_name(name: &str) -> String {
    match name.strip_suffix("^-1") {
        Some(base) => base.to_string(),
        None => format!("{name}^-1"),
    }
}
