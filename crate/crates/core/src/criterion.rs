//! Correction vectors with verified bounds, and the blow-up/collapse witness search.
//!
//! Given targets `x_i = Σ_{m∈[M]} a^(i)_m e_m` and a time `n`, the correction
//! vector places `a^(i)_m / W^(i)_{m,n}` at `f_i^n(m)` so that `T_i^n` carries
//! it back onto `x_i`. Cross terms are controlled by the ratios
//! `W^(i)_{f_i^{-n}(j),n} / W^(ℓ)_{f_ℓ^{-n}(j),n}` over the index sets
//! `f_ℓ^n([M]) ∩ f_i^n([M])` and `f_ℓ^n([M]) ∩ f_i^n(ℤ∖[M])`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rel_close;
use crate::scalar::SignedLogScalar;
use crate::shift::PseudoShift;
use crate::vector::SupportedVector;

/// Relative tolerance used when re-verifying certificate values.
pub const VERIFY_REL_TOL: f64 = 1e-9;
/// Zero target coefficients are replaced by `ZERO_PERTURBATION · max |a|`.
pub const ZERO_PERTURBATION: f64 = 1e-8;
/// Absolute rounding allowance per unit of `‖x_i‖_1` when a measured
/// residual is compared with its bound: reconstructing `a` as `(a/W)·W`
/// leaves a few ulps even where the exact residual vanishes.
pub const ROUNDING_SLACK: f64 = 1e-13;

/// `measured ≤ bound` up to rounding: `1e-12` relative on the bound plus
/// `ROUNDING_SLACK · scale`.
pub fn within_bound(measured: f64, bound: f64, scale: f64) -> bool {
    measured <= bound * (1.0 + 1e-12) + ROUNDING_SLACK * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub operator: usize,
    pub index: i64,
    pub original: f64,
    pub replacement: f64,
}

/// Targets `x_1, …, x_N`, each with a full nonzero coefficient block on `[M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFamily {
    radius: i64,
    coeffs: Vec<Vec<f64>>,
    perturbations: Vec<Perturbation>,
}

impl TargetFamily {
    /// `coeffs[i][m + M]` is `a^(i)_m`. Exact zeros are perturbed and recorded.
    pub fn new(radius: u32, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let radius = i64::from(radius);
        let width = (2 * radius + 1) as usize;
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("target family needs N ≥ 1".into()));
        }
        if let Some(row) = coeffs.iter().find(|row| row.len() != width) {
            return Err(Error::InvalidParameter(format!(
                "target block has {} coefficients, expected 2M+1 = {width}",
                row.len()
            )));
        }
        if coeffs.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("target coefficients must be finite".into()));
        }
        let max_abs = coeffs.iter().flatten().fold(0.0f64, |m, a| m.max(a.abs()));
        let delta = if max_abs > 0.0 {
            ZERO_PERTURBATION * max_abs
        } else {
            ZERO_PERTURBATION
        };
        let mut coeffs = coeffs;
        let mut perturbations = Vec::new();
        for (i, row) in coeffs.iter_mut().enumerate() {
            for (slot, a) in row.iter_mut().enumerate() {
                if *a == 0.0 {
                    perturbations.push(Perturbation {
                        operator: i,
                        index: slot as i64 - radius,
                        original: 0.0,
                        replacement: delta,
                    });
                    *a = delta;
                }
            }
        }
        Ok(Self {
            radius,
            coeffs,
            perturbations,
        })
    }

    /// Reads each block off `vectors[i]` on `[−radius, radius]`.
    pub fn from_vectors(radius: u32, vectors: &[SupportedVector]) -> Result<Self> {
        let r = i64::from(radius);
        if let Some(v) = vectors.iter().find(|v| v.radius().unwrap_or(0) > radius as u64) {
            return Err(Error::InvalidParameter(format!(
                "target {v} has support outside [-{radius}, {radius}]"
            )));
        }
        Self::new(
            radius,
            vectors
                .iter()
                .map(|v| (-r..=r).map(|m| v.get(m)).collect())
                .collect(),
        )
    }

    /// The same target for each of `n_ops` operators, radius from its support.
    pub fn diagonal(target: &SupportedVector, n_ops: usize) -> Result<Self> {
        let radius = target.radius().unwrap_or(0);
        let radius = u32::try_from(radius)
            .map_err(|_| Error::InvalidParameter("target radius too large".into()))?;
        Self::from_vectors(radius, &vec![target.clone(); n_ops])
    }

    pub fn n_ops(&self) -> usize {
        self.coeffs.len()
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// `a^(i)_m` for `m ∈ [M]`.
    pub fn coeff(&self, i: usize, m: i64) -> f64 {
        self.coeffs[i][(m + self.radius) as usize]
    }

    pub fn in_block(&self, m: i64) -> bool {
        m.abs() <= self.radius
    }

    pub fn target(&self, i: usize) -> SupportedVector {
        (-self.radius..=self.radius)
            .map(|m| (m, self.coeff(i, m)))
            .collect()
    }

    pub fn targets(&self) -> Vec<SupportedVector> {
        (0..self.n_ops()).map(|i| self.target(i)).collect()
    }

    pub fn perturbations(&self) -> &[Perturbation] {
        &self.perturbations
    }

    /// `Γ = max_i ‖x_i‖_p`.
    pub fn gamma(&self, p: f64) -> f64 {
        (0..self.n_ops())
            .map(|i| self.target(i).lp_norm(p))
            .fold(0.0, f64::max)
    }

    /// `(2M+1)·N·Γ`.
    pub fn scale(&self, p: f64) -> f64 {
        (2 * self.radius + 1) as f64 * self.n_ops() as f64 * self.gamma(p)
    }
}

/// One `j` in an index set, with its pullbacks `source = f_ℓ^{-n}(j) ∈ [M]`
/// and `pullback = f_i^{-n}(j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub j: i64,
    pub source: i64,
    pub pullback: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSets {
    pub ell: usize,
    pub i: usize,
    /// `f_ℓ^n([M]) ∩ f_i^n([M])`
    pub overlap: Vec<IndexEntry>,
    /// `f_ℓ^n([M]) ∩ f_i^n(ℤ∖[M])`
    pub outside: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSets {
    pub n: u64,
    pub radius: i64,
    pub pairs: Vec<PairSets>,
}

impl IndexSets {
    pub fn pair(&self, ell: usize, i: usize) -> Option<&PairSets> {
        self.pairs.iter().find(|s| s.ell == ell && s.i == i)
    }
}

/// Both index sets for every ordered pair `ℓ ≠ i`, by membership tests on
/// `f_i^{-n}(j)`.
pub fn index_sets(shifts: &[PseudoShift], radius: i64, n: u64) -> Result<IndexSets> {
    let steps = n as i64;
    let images: Vec<Vec<(i64, i64)>> = shifts
        .iter()
        .map(|s| {
            (-radius..=radius)
                .map(|m| Ok((m, s.map.iterate(m, steps)?)))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for ell in 0..shifts.len() {
        for i in 0..shifts.len() {
            if i == ell {
                continue;
            }
            let mut overlap = Vec::new();
            let mut outside = Vec::new();
            for &(source, j) in &images[ell] {
                let pullback = shifts[i].map.iterate(j, -steps)?;
                let entry = IndexEntry {
                    j,
                    source,
                    pullback,
                };
                if pullback.abs() <= radius {
                    overlap.push(entry);
                } else {
                    outside.push(entry);
                }
            }
            pairs.push(PairSets {
                ell,
                i,
                overlap,
                outside,
            });
        }
    }
    Ok(IndexSets { n, radius, pairs })
}

/// `W^(i)_{f_i^{-n}(j),n} / W^(ℓ)_{f_ℓ^{-n}(j),n}` for one index entry.
pub fn cross_ratio(
    shifts: &[PseudoShift],
    ell: usize,
    i: usize,
    entry: &IndexEntry,
    n: u64,
) -> Result<SignedLogScalar> {
    Ok(shifts[i].forward_product(entry.pullback, n)? / shifts[ell].forward_product(entry.source, n)?)
}

/// `|W-ratio − a^(i)_{pullback} / a^(ℓ)_{source}|`, leaving log-space only
/// for the subtraction (ratios beyond `e^700` become `+inf`).
pub fn ratio_gap(
    shifts: &[PseudoShift],
    targets: &TargetFamily,
    ell: usize,
    i: usize,
    entry: &IndexEntry,
    n: u64,
) -> Result<f64> {
    let ratio = cross_ratio(shifts, ell, i, entry, n)?.to_f64_clamped();
    let scalar = targets.coeff(i, entry.pullback) / targets.coeff(ell, entry.source);
    Ok((ratio - scalar).abs())
}

fn check_arity(shifts: &[PseudoShift], targets: &TargetFamily) -> Result<()> {
    if shifts.len() != targets.n_ops() {
        return Err(Error::InvalidParameter(format!(
            "{} operators but {} targets",
            shifts.len(),
            targets.n_ops()
        )));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must lie in [1, ∞), got {p}")));
    }
    Ok(())
}

/// The correction vector
/// `z = Σ_i Σ_{m∈[M]} (a^(i)_m / W^(i)_{m,n}) e_{f_i^n(m)}`,
/// where an index `j` already claimed by a lower-numbered operator keeps
/// that operator's coefficient. The colliding operator then sees the claimed
/// coefficient pulled back, which is the error the overlap-gap bound measures.
pub fn build_correction(
    shifts: &[PseudoShift],
    targets: &TargetFamily,
    n: u64,
) -> Result<SupportedVector> {
    check_arity(shifts, targets)?;
    let r = targets.radius();
    let mut z = SupportedVector::zero();
    let mut claimed: HashSet<i64> = HashSet::new();
    for (i, shift) in shifts.iter().enumerate() {
        let mut block = Vec::with_capacity((2 * r + 1) as usize);
        for m in -r..=r {
            let j = shift.map.iterate(m, n as i64)?;
            if claimed.contains(&j) {
                continue;
            }
            let coeff = SignedLogScalar::from_f64(targets.coeff(i, m)) / shift.forward_product(m, n)?;
            z.add_at(j, coeff.to_f64());
            block.push(j);
        }
        claimed.extend(block);
    }
    Ok(z)
}

/// The three families of bounds on a correction vector at time `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaBounds {
    /// `(2M+1)NΓ · max{1/|W^(ℓ)_{m,n}| : ℓ, m ∈ [M]}`
    pub z_bound: f64,
    /// `residual_bounds[i]` bounds `‖T_i^n z − x_i‖_p`.
    pub residual_bounds: Vec<f64>,
}

pub fn lemma_bounds(
    shifts: &[PseudoShift],
    targets: &TargetFamily,
    p: f64,
    n: u64,
) -> Result<LemmaBounds> {
    check_arity(shifts, targets)?;
    check_p(p)?;
    let scale = targets.scale(p);
    let r = targets.radius();
    let mut min_log = f64::INFINITY;
    for shift in shifts {
        for m in -r..=r {
            min_log = min_log.min(shift.forward_product(m, n)?.log_abs());
        }
    }
    let z_bound = SignedLogScalar::from_parts(1, -min_log).scale(scale).to_f64();

    let sets = index_sets(shifts, r, n)?;
    let mut residual_bounds = Vec::with_capacity(shifts.len());
    for i in 0..shifts.len() {
        let mut outside_max = SignedLogScalar::ZERO;
        let mut gap_max = 0.0f64;
        for ell in (0..shifts.len()).filter(|&l| l != i) {
            let pair = sets.pair(ell, i).expect("pair present");
            for entry in &pair.outside {
                let ratio = cross_ratio(shifts, ell, i, entry, n)?.abs();
                if ratio.cmp_abs(&outside_max).is_gt() {
                    outside_max = ratio;
                }
            }
            if ell < i {
                for entry in &pair.overlap {
                    gap_max = gap_max.max(ratio_gap(shifts, targets, ell, i, entry, n)?);
                }
            }
        }
        let outside_term = outside_max.scale(scale).to_f64();
        residual_bounds.push(scale * gap_max + outside_term);
    }
    Ok(LemmaBounds {
        z_bound,
        residual_bounds,
    })
}

/// Which of the four witness conditions hold at one candidate time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub n: u64,
    /// `|W^(i)_{m,n}| > (2M+1)NΓ/ε` for all `i`, `m ∈ [M]`
    pub blow_up: bool,
    /// every correction coefficient `a^(i)_m / W^(i)_{m,n}` is a normal `f64`
    pub representable: bool,
    /// cross-ratios `< ε/(2(2M+1)NΓ)` on every `f_ℓ^n([M]) ∩ f_i^n(ℤ∖[M])`
    pub cross: bool,
    /// ratio gaps `< ε/(2(2M+1)NΓ)` on every `f_ℓ^n([M]) ∩ f_i^n([M])`
    pub gap: bool,
    /// `‖T_i^n y‖_p < ε` for every supplied `y`
    pub collapse: bool,
}

impl CandidateReport {
    pub fn passed(&self) -> bool {
        self.blow_up && self.representable && self.cross && self.gap && self.collapse
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureTally {
    pub blow_up: u64,
    pub representable: u64,
    pub cross: u64,
    pub gap: u64,
    pub collapse: u64,
}

impl FailureTally {
    fn record(&mut self, report: &CandidateReport) {
        self.blow_up += u64::from(!report.blow_up);
        self.representable += u64::from(!report.representable);
        self.cross += u64::from(!report.cross);
        self.gap += u64::from(!report.gap);
        self.collapse += u64::from(!report.collapse);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoWitness {
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k_min: u64,
    pub n_max: u64,
    pub tally: FailureTally,
    pub candidates: Vec<CandidateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub n: u64,
    pub z: SupportedVector,
    pub residuals: Vec<f64>,
    pub bounds: Vec<f64>,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k_min: u64,
    #[serde(rename = "M")]
    pub radius: u32,
    pub perturbations: Vec<Perturbation>,
    /// `collapse_residuals[y][i] = ‖T_i^n y‖_p`
    pub collapse_residuals: Vec<Vec<f64>>,
    pub p: f64,
    pub targets: Vec<SupportedVector>,
    pub y_vectors: Vec<SupportedVector>,
    pub z_norm: f64,
    pub z_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WitnessOutcome {
    Found(WitnessCertificate),
    NoWitness(NoWitness),
}

impl WitnessOutcome {
    pub fn certificate(&self) -> Option<&WitnessCertificate> {
        match self {
            Self::Found(c) => Some(c),
            Self::NoWitness(_) => None,
        }
    }
}

/// Evaluates the witness conditions at single times for fixed data.
pub struct WitnessSearch<'a> {
    shifts: &'a [PseudoShift],
    targets: &'a TargetFamily,
    y_vectors: &'a [SupportedVector],
    p: f64,
    epsilon: f64,
    blow_up_log: f64,
    split_threshold: f64,
}

impl<'a> WitnessSearch<'a> {
    pub fn new(
        shifts: &'a [PseudoShift],
        targets: &'a TargetFamily,
        p: f64,
        epsilon: f64,
        y_vectors: &'a [SupportedVector],
    ) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("ε must be positive, got {epsilon}")));
        }
        check_p(p)?;
        check_arity(shifts, targets)?;
        let scale = targets.scale(p);
        Ok(Self {
            shifts,
            targets,
            y_vectors,
            p,
            epsilon,
            blow_up_log: (scale / epsilon).ln(),
            split_threshold: epsilon / (2.0 * scale),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// With `exhaustive = false` evaluation stops at the first failed
    /// condition and the remaining flags are reported as failed.
    pub fn evaluate(&self, n: u64, exhaustive: bool) -> Result<CandidateReport> {
        let mut report = CandidateReport {
            n,
            blow_up: false,
            representable: false,
            cross: false,
            gap: false,
            collapse: false,
        };
        report.blow_up = self.blow_up_holds(n)?;
        if !report.blow_up && !exhaustive {
            return Ok(report);
        }
        report.representable = self.representable(n)?;
        if !report.representable && !exhaustive {
            return Ok(report);
        }
        let sets = index_sets(self.shifts, self.targets.radius(), n)?;
        report.cross = self.cross_holds(&sets)?;
        if !report.cross && !exhaustive {
            return Ok(report);
        }
        report.gap = self.gap_holds(&sets)?;
        if !report.gap && !exhaustive {
            return Ok(report);
        }
        report.collapse = self.collapse_holds(n)?;
        Ok(report)
    }

    fn blow_up_holds(&self, n: u64) -> Result<bool> {
        let r = self.targets.radius();
        for shift in self.shifts {
            for m in -r..=r {
                let w = shift.forward_product(m, n)?;
                if !(w.log_abs() > self.blow_up_log) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn representable(&self, n: u64) -> Result<bool> {
        let floor = f64::MIN_POSITIVE.ln();
        let r = self.targets.radius();
        for (i, shift) in self.shifts.iter().enumerate() {
            for m in -r..=r {
                let c = SignedLogScalar::from_f64(self.targets.coeff(i, m)) / shift.forward_product(m, n)?;
                if !(c.log_abs() > floor) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn cross_holds(&self, sets: &IndexSets) -> Result<bool> {
        for pair in &sets.pairs {
            for entry in &pair.outside {
                let ratio = cross_ratio(self.shifts, pair.ell, pair.i, entry, sets.n)?;
                if !ratio.abs_lt(self.split_threshold) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn gap_holds(&self, sets: &IndexSets) -> Result<bool> {
        for pair in &sets.pairs {
            for entry in &pair.overlap {
                let gap = ratio_gap(self.shifts, self.targets, pair.ell, pair.i, entry, sets.n)?;
                if !(gap < self.split_threshold) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn collapse_holds(&self, n: u64) -> Result<bool> {
        for y in self.y_vectors {
            for shift in self.shifts {
                let image = shift.apply_power(y, n as i64)?;
                if image.max_abs() >= self.epsilon || !(image.lp_norm(self.p) < self.epsilon) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Builds `z` at time `n` and measures everything a certificate claims.
    pub fn certify(&self, n: u64, k_min: u64) -> Result<WitnessCertificate> {
        let z = build_correction(self.shifts, self.targets, n)?;
        let bounds = lemma_bounds(self.shifts, self.targets, self.p, n)?;
        let residuals = measure_residuals(self.shifts, &self.targets.targets(), &z, n, self.p)?;
        let collapse_residuals = measure_collapse(self.shifts, self.y_vectors, n, self.p)?;
        Ok(WitnessCertificate {
            n,
            z_norm: z.lp_norm(self.p),
            z,
            residuals,
            bounds: bounds.residual_bounds,
            epsilon: self.epsilon,
            k_min,
            radius: self.targets.radius() as u32,
            perturbations: self.targets.perturbations().to_vec(),
            collapse_residuals,
            p: self.p,
            targets: self.targets.targets(),
            y_vectors: self.y_vectors.to_vec(),
            z_bound: bounds.z_bound,
        })
    }
}

fn measure_residuals(
    shifts: &[PseudoShift],
    targets: &[SupportedVector],
    z: &SupportedVector,
    n: u64,
    p: f64,
) -> Result<Vec<f64>> {
    shifts
        .iter()
        .zip(targets)
        .map(|(s, x)| Ok(s.apply_power(z, n as i64)?.distance(x, p)))
        .collect()
}

fn measure_collapse(
    shifts: &[PseudoShift],
    y_vectors: &[SupportedVector],
    n: u64,
    p: f64,
) -> Result<Vec<Vec<f64>>> {
    y_vectors
        .iter()
        .map(|y| {
            shifts
                .iter()
                .map(|s| Ok(s.apply_power(y, n as i64)?.lp_norm(p)))
                .collect()
        })
        .collect()
}

/// Ascending scan over `n ∈ [K, n_max]`; the first time at which all four
/// conditions hold yields a certificate.
pub fn find_witness(
    shifts: &[PseudoShift],
    targets: &TargetFamily,
    p: f64,
    epsilon: f64,
    k_min: u64,
    n_max: u64,
    y_vectors: &[SupportedVector],
) -> Result<WitnessOutcome> {
    let search = WitnessSearch::new(shifts, targets, p, epsilon, y_vectors)?;
    if n_max < k_min {
        return Err(Error::InvalidParameter(format!(
            "n_max = {n_max} is below K = {k_min}"
        )));
    }
    let mut tally = FailureTally::default();
    let mut candidates = Vec::new();
    for n in k_min.max(1)..=n_max {
        let report = search.evaluate(n, true)?;
        if report.passed() {
            return Ok(WitnessOutcome::Found(search.certify(n, k_min)?));
        }
        tally.record(&report);
        candidates.push(report);
    }
    Ok(WitnessOutcome::NoWitness(NoWitness {
        epsilon,
        k_min,
        n_max,
        tally,
        candidates,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub claimed: f64,
    pub recomputed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub(crate) fn push(&mut self, name: impl Into<String>, claimed: f64, recomputed: f64, pass: bool) {
        self.checks.push(Check {
            name: name.into(),
            claimed,
            recomputed,
            pass,
        });
    }

    pub(crate) fn matches(&mut self, name: impl Into<String>, claimed: f64, recomputed: f64) {
        let pass = rel_close(claimed, recomputed, VERIFY_REL_TOL);
        self.push(name, claimed, recomputed, pass);
    }

    pub(crate) fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Recomputes every residual and bound of a certificate from scratch.
pub fn verify_certificate(
    shifts: &[PseudoShift],
    cert: &WitnessCertificate,
    p: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    report.push("p", cert.p, p, cert.p == p);
    report.push("n >= K", cert.n as f64, cert.k_min as f64, cert.n >= cert.k_min);
    if shifts.len() != cert.targets.len() || cert.residuals.len() != shifts.len() || cert.bounds.len() != shifts.len() {
        report.push("operator count", cert.targets.len() as f64, shifts.len() as f64, false);
        return Ok(report.finish());
    }
    let targets = TargetFamily::from_vectors(cert.radius, &cert.targets)?;
    let bounds = lemma_bounds(shifts, &targets, p, cert.n)?;
    let residuals = measure_residuals(shifts, &cert.targets, &cert.z, cert.n, p)?;
    let z_norm = cert.z.lp_norm(p);

    report.matches("z norm", cert.z_norm, z_norm);
    report.matches("z bound", cert.z_bound, bounds.z_bound);
    report.push("z norm <= z bound", z_norm, bounds.z_bound, within_bound(z_norm, bounds.z_bound, 0.0));
    report.push("z norm < epsilon", z_norm, cert.epsilon, z_norm < cert.epsilon);
    for i in 0..shifts.len() {
        report.matches(format!("residual[{i}]"), cert.residuals[i], residuals[i]);
        report.matches(format!("bound[{i}]"), cert.bounds[i], bounds.residual_bounds[i]);
        report.push(
            format!("residual[{i}] <= bound[{i}]"),
            residuals[i],
            bounds.residual_bounds[i],
            within_bound(residuals[i], bounds.residual_bounds[i], cert.targets[i].lp_norm(1.0)),
        );
        report.push(
            format!("residual[{i}] < epsilon"),
            residuals[i],
            cert.epsilon,
            residuals[i] < cert.epsilon,
        );
    }
    let collapse = measure_collapse(shifts, &cert.y_vectors, cert.n, p)?;
    if collapse.len() != cert.collapse_residuals.len() {
        report.push(
            "collapse residual count",
            cert.collapse_residuals.len() as f64,
            collapse.len() as f64,
            false,
        );
    } else {
        for (y, (claimed_row, row)) in cert.collapse_residuals.iter().zip(&collapse).enumerate() {
            for (i, &value) in row.iter().enumerate() {
                let claimed = claimed_row.get(i).copied().unwrap_or(f64::NAN);
                report.matches(format!("collapse[{y}][{i}]"), claimed, value);
                report.push(
                    format!("collapse[{y}][{i}] < epsilon"),
                    value,
                    cert.epsilon,
                    value < cert.epsilon,
                );
            }
        }
    }
    Ok(report.finish())
}
