//! The invertible translation family with two-level weights.
//!
//! `T_i` translates by `p_i` and carries weights `λ_i` above the cutoff
//! `l_i` and `1/λ_i` at or below it. With `2p_s < p_t` and
//! `1 < |λ_s| < |λ_t|` for `s < t` the tuple is disjoint hypercyclic, and so
//! is the tuple of inverses.

use serde::{Deserialize, Serialize};

use crate::criterion::index_sets;
use crate::criterion::cross_ratio;
use crate::error::{Error, Result};
use crate::scalar::SignedLogScalar;
use crate::shift::PseudoShift;
use crate::weights::WeightRule;

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    #[serde(rename = "N")]
    pub n_ops: usize,
    pub steps: Vec<i64>,
    pub lambdas: Vec<f64>,
    pub cutoffs: Vec<i64>,
    #[serde(default = "default_p")]
    pub p: f64,
}

/// `γ = max |λ_s|/|λ_{s+1}|`, `α = min |λ_s|`, `β = max |λ_s|`, `L = max |l_s|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub big_l: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdCase {
    /// pairs with `ℓ > i`
    EllGtI,
    /// pairs with `i > ℓ`
    IGtEll,
}

impl ThresholdCase {
    pub fn covers(&self, i: usize, ell: usize) -> bool {
        match self {
            Self::EllGtI => ell > i,
            Self::IGtEll => i > ell,
        }
    }
}

impl FamilyParams {
    pub fn new(steps: Vec<i64>, lambdas: Vec<f64>, cutoffs: Vec<i64>) -> Result<Self> {
        let params = Self {
            n_ops: steps.len(),
            steps,
            lambdas,
            cutoffs,
            p: default_p(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_ops;
        if n < 2 {
            return Err(Error::Family(format!("N must be at least 2, got {n}")));
        }
        if self.steps.len() != n || self.lambdas.len() != n || self.cutoffs.len() != n {
            return Err(Error::Family(format!(
                "N = {n} but got {} steps, {} lambdas, {} cutoffs",
                self.steps.len(),
                self.lambdas.len(),
                self.cutoffs.len()
            )));
        }
        if !(self.p.is_finite() && self.p >= 1.0) {
            return Err(Error::Family(format!("p must lie in [1, ∞), got {}", self.p)));
        }
        if let Some((s, &step)) = self.steps.iter().enumerate().find(|(_, &p)| p <= 0) {
            return Err(Error::Family(format!(
                "steps must be positive integers: p_{} = {step}",
                s + 1
            )));
        }
        if let Some((s, &l)) = self.lambdas.iter().enumerate().find(|(_, l)| !l.is_finite()) {
            return Err(Error::Family(format!("λ_{} = {l} is not finite", s + 1)));
        }
        for s in 0..n {
            for t in s + 1..n {
                let (ps, pt) = (self.steps[s], self.steps[t]);
                if 2 * ps >= pt {
                    return Err(Error::Family(format!(
                        "2p_s < p_t violated for s = {}, t = {}: 2·{ps} = {} ≥ {pt}",
                        s + 1,
                        t + 1,
                        2 * ps
                    )));
                }
            }
        }
        if let Some((s, &l)) = self.lambdas.iter().enumerate().find(|(_, l)| l.abs() <= 1.0) {
            return Err(Error::Family(format!(
                "1 < |λ_s| violated for s = {}: |{l}| ≤ 1",
                s + 1
            )));
        }
        for s in 0..n - 1 {
            let (a, b) = (self.lambdas[s].abs(), self.lambdas[s + 1].abs());
            if a >= b {
                return Err(Error::Family(format!(
                    "|λ_s| < |λ_t| violated for s = {}, t = {}: {a} ≥ {b}",
                    s + 1,
                    s + 2
                )));
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> DerivedConstants {
        let abs: Vec<f64> = self.lambdas.iter().map(|l| l.abs()).collect();
        DerivedConstants {
            gamma: abs.windows(2).map(|w| w[0] / w[1]).fold(0.0, f64::max),
            alpha: abs.iter().copied().fold(f64::INFINITY, f64::min),
            beta: abs.iter().copied().fold(0.0, f64::max),
            big_l: self.cutoffs.iter().map(|l| l.abs()).max().unwrap_or(0),
        }
    }

    /// Parameters of the family `R T_i^{-1} R`, where `R e_n = e_{−n}`.
    ///
    /// The inverse of the member `(p, λ, l)` translates by `−p` with weights
    /// `1/λ` above `l − p`; reflecting the index turns it back into a member
    /// with the same `p` and `λ` and cutoff `p − l − 1`. Reflection preserves
    /// `[M]` and its complement, so every cross-ratio of the inverse family
    /// equals one of these parameters' cross-ratios.
    pub fn inverse_conjugate(&self) -> Self {
        Self {
            cutoffs: self
                .steps
                .iter()
                .zip(&self.cutoffs)
                .map(|(p, l)| p - l - 1)
                .collect(),
            ..self.clone()
        }
    }
}

pub fn make_family(params: &FamilyParams) -> Result<Vec<PseudoShift>> {
    params.validate()?;
    params
        .steps
        .iter()
        .zip(&params.lambdas)
        .zip(&params.cutoffs)
        .enumerate()
        .map(|(i, ((&step, &lambda), &cutoff))| {
            PseudoShift::translation(
                format!("T{}", i + 1),
                step,
                WeightRule::two_level(lambda, cutoff)?,
            )
        })
        .collect()
}

/// `T_i^{-1} = T_{g_i, v^(i)}` with `g_i(n) = n − p_i`, `v^(i)_n = 1/w^(i)_{n+p_i}`.
pub fn inverse_family(shifts: &[PseudoShift]) -> Result<Vec<PseudoShift>> {
    shifts.iter().map(PseudoShift::inverse).collect()
}

/// The least integer `k ≥ 1` strictly above
///
/// * `(ln ε − ln β^{2(M+L)/p_1}) / ln γ` for [`ThresholdCase::EllGtI`]
/// * `(−ln ε + ln β^{(4M+4L)/p_1}) / ln α` for [`ThresholdCase::IGtEll`]
///
/// The second expression counts the sub-cutoff indices on a pullback path
/// as a real number; the integer count can fall short of it by one, so for
/// some step patterns the ratio at this `k` still exceeds `ε` (steps (2, 5)
/// with λ ≈ (2.23, 2.46), `ε = 0.1`, `M = 0` is one). See
/// [`threshold_k_lattice`] for a value that accounts for the rounding.
pub fn threshold_k(params: &FamilyParams, epsilon: f64, radius: u32, case: ThresholdCase) -> Result<u64> {
    threshold(params, epsilon, radius, case, 0.0)
}

/// As [`threshold_k`], with the `β` exponent of the `i > ℓ` expression
/// raised by 2 to cover the integer rounding of the index count. The
/// `ℓ > i` case is unchanged.
pub fn threshold_k_lattice(params: &FamilyParams, epsilon: f64, radius: u32, case: ThresholdCase) -> Result<u64> {
    threshold(params, epsilon, radius, case, 2.0)
}

fn threshold(params: &FamilyParams, epsilon: f64, radius: u32, case: ThresholdCase, rounding: f64) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {epsilon}")));
    }
    params.validate()?;
    let c = params.constants();
    let p1 = params.steps[0] as f64;
    let spread = f64::from(radius) + c.big_l as f64;
    let expr = match case {
        ThresholdCase::EllGtI => (epsilon.ln() - 2.0 * spread / p1 * c.beta.ln()) / c.gamma.ln(),
        ThresholdCase::IGtEll => (-epsilon.ln() + (4.0 * spread / p1 + rounding) * c.beta.ln()) / c.alpha.ln(),
    };
    let k = expr.floor() + 1.0;
    Ok(if k < 1.0 { 1 } else { k as u64 })
}

/// Largest `|W^(i)_{f_i^{-k}(j),k} / W^(ℓ)_{f_ℓ^{-k}(j),k}|` over
/// `j ∈ f_ℓ^k([M]) ∩ f_i^k(ℤ∖[M])` and all pairs covered by `case`.
/// `None` when every such set is empty.
pub fn max_cross_ratio(
    shifts: &[PseudoShift],
    radius: u32,
    k: u64,
    case: ThresholdCase,
) -> Result<Option<SignedLogScalar>> {
    let sets = index_sets(shifts, i64::from(radius), k)?;
    let mut worst: Option<SignedLogScalar> = None;
    for pair in sets.pairs.iter().filter(|s| case.covers(s.i, s.ell)) {
        for entry in &pair.outside {
            let r = cross_ratio(shifts, pair.ell, pair.i, entry, k)?.abs();
            if worst.map_or(true, |w| r.cmp_abs(&w).is_gt()) {
                worst = Some(r);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub radius: u32,
    pub ell_gt_i: u64,
    pub i_gt_ell: u64,
    pub i_gt_ell_lattice: u64,
}

pub fn threshold_table(params: &FamilyParams, epsilons: &[f64], radii: &[u32]) -> Result<Vec<ThresholdRow>> {
    let mut rows = Vec::new();
    for &epsilon in epsilons {
        for &radius in radii {
            rows.push(ThresholdRow {
                epsilon,
                radius,
                ell_gt_i: threshold_k(params, epsilon, radius, ThresholdCase::EllGtI)?,
                i_gt_ell: threshold_k(params, epsilon, radius, ThresholdCase::IGtEll)?,
                i_gt_ell_lattice: threshold_k_lattice(params, epsilon, radius, ThresholdCase::IGtEll)?,
            });
        }
    }
    Ok(rows)
}
