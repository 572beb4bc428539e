//! Greedy assembly of an approximate disjoint hypercyclic vector.
//!
//! Step `k` picks the smallest time `n_k > n_{k−1}` at which a correction
//! `z_k` sends every operator onto the same target while the running sum is
//! collapsed, and adds `z_k` to the vector. With `ε_k = 2^{−k} ε_0`:
//!
//! * the witness at step `k` is searched at tolerance `ε_k / 2`, so the visit
//!   right after step `k` is within `ε_k`;
//! * every later correction must satisfy `‖T_i^{n_j} z_k‖_p < ε_k` for all
//!   earlier visits `j`, so the final vector still visits within `2ε_j`.
//!
//! The second condition is measured exactly on the finitely supported `z_k`
//! rather than through `‖T^n‖ ≤ (sup|w|)^n`. The operator-norm budget forces
//! `n_k` to grow geometrically, and the correction coefficients
//! `a / W_{m,n_k}` underflow `f64` within a few steps.

use serde::{Deserialize, Serialize};

use crate::criterion::{find_witness, TargetFamily, VerificationReport, WitnessOutcome, WitnessSearch};
use crate::error::{Error, Result};
use crate::rel_close;
use crate::shift::PseudoShift;
use crate::vector::SupportedVector;

/// Tolerance for recomputed schedule values.
pub const SCHEDULE_REL_TOL: f64 = 1e-9;

/// Vectors supported in `[−M_max, M_max]` with coefficients in
/// `grid·{±1, ±2, …}` and no zero inside their radius, in a fixed order.
///
/// Vectors are grouped into shells by `max(radius + 1, max|c|/grid)`; within a
/// shell they are ordered by radius, then by `max|c|`, then lexicographically
/// from index `−r` upward with values ordered `1, −1, 2, −2, …`.
pub fn enumerate_targets(m_max: u32, grid: f64, count: usize) -> Result<Vec<SupportedVector>> {
    if !(grid.is_finite() && grid > 0.0) {
        return Err(Error::InvalidParameter(format!("grid must be positive, got {grid}")));
    }
    let mut out = Vec::with_capacity(count);
    let mut shell: u64 = 1;
    while out.len() < count {
        for radius in 0..=u64::from(m_max).min(shell - 1) {
            for c_max in 1..=shell {
                if (radius + 1).max(c_max) != shell {
                    continue;
                }
                push_patterns(radius as i64, c_max, grid, count, &mut out);
                if out.len() >= count {
                    return Ok(out);
                }
            }
        }
        shell += 1;
    }
    Ok(out)
}

fn push_patterns(radius: i64, c_max: u64, grid: f64, count: usize, out: &mut Vec<SupportedVector>) {
    let width = (2 * radius + 1) as usize;
    let alphabet: Vec<f64> = (1..=c_max)
        .flat_map(|c| [c as f64, -(c as f64)])
        .collect();
    let mut digits = vec![0usize; width];
    loop {
        let has_max = digits.iter().any(|&d| d / 2 + 1 == c_max as usize);
        if has_max {
            out.push(
                digits
                    .iter()
                    .enumerate()
                    .map(|(slot, &d)| (slot as i64 - radius, alphabet[d] * grid))
                    .collect(),
            );
            if out.len() >= count {
                return;
            }
        }
        // odometer, last index fastest
        let mut pos = width;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < alphabet.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub k: usize,
    pub target: SupportedVector,
    pub n: u64,
    pub epsilon: f64,
    pub z: SupportedVector,
    /// `‖T_i^{n_k} x − target_k‖_p` for the certificate's vector `x`.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCertificate {
    pub operators: Vec<PseudoShift>,
    pub p: f64,
    pub epsilon0: f64,
    pub steps: Vec<ScheduleStep>,
    pub x: SupportedVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BuildOutcome {
    Complete(ScheduleCertificate),
    /// No admissible time was found at step `step` (1-based); `partial`
    /// holds the steps completed before it.
    Failed {
        step: usize,
        reason: String,
        partial: ScheduleCertificate,
    },
}

impl BuildOutcome {
    pub fn certificate(&self) -> &ScheduleCertificate {
        match self {
            Self::Complete(c) => c,
            Self::Failed { partial, .. } => partial,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, Self::Complete(_))
    }
}

/// `ε_k = 2^{−k} ε_0`.
pub fn step_tolerance(epsilon0: f64, k: usize) -> f64 {
    epsilon0 * 0.5f64.powi(k as i32)
}

fn visit_residuals(shifts: &[PseudoShift], x: &SupportedVector, target: &SupportedVector, n: u64, p: f64) -> Result<Vec<f64>> {
    shifts
        .iter()
        .map(|s| Ok(s.apply_power(x, n as i64)?.distance(target, p)))
        .collect()
}

fn finalize(
    shifts: &[PseudoShift],
    p: f64,
    epsilon0: f64,
    mut steps: Vec<ScheduleStep>,
    x: SupportedVector,
) -> Result<ScheduleCertificate> {
    for step in &mut steps {
        step.residuals = visit_residuals(shifts, &x, &step.target, step.n, p)?;
    }
    Ok(ScheduleCertificate {
        operators: shifts.to_vec(),
        p,
        epsilon0,
        steps,
        x,
    })
}

pub fn build_dhc_vector(
    shifts: &[PseudoShift],
    targets: &[SupportedVector],
    epsilon0: f64,
    p: f64,
    n_max_per_step: u64,
) -> Result<BuildOutcome> {
    if !(epsilon0.is_finite() && epsilon0 > 0.0) {
        return Err(Error::InvalidParameter(format!("ε_0 must be positive, got {epsilon0}")));
    }
    if shifts.is_empty() {
        return Err(Error::InvalidParameter("no operators supplied".into()));
    }
    if n_max_per_step == 0 {
        return Err(Error::InvalidParameter("n_max_per_step must be positive".into()));
    }
    if let Some(t) = targets.iter().find(|t| t.is_zero()) {
        return Err(Error::InvalidParameter(format!("target {t} is zero")));
    }
    if targets.is_empty() {
        return Ok(BuildOutcome::Complete(finalize(
            shifts,
            p,
            epsilon0,
            Vec::new(),
            SupportedVector::zero(),
        )?));
    }

    let probe = TargetFamily::diagonal(&SupportedVector::basis(0), shifts.len())?;
    if let WitnessOutcome::NoWitness(nw) = find_witness(shifts, &probe, p, epsilon0, 1, n_max_per_step, &[])? {
        return Ok(BuildOutcome::Failed {
            step: 1,
            reason: format!(
                "probe e_0 has no witness for n ≤ {n_max_per_step} (failures: blow-up {}, representable {}, cross {}, gap {}, collapse {})",
                nw.tally.blow_up, nw.tally.representable, nw.tally.cross, nw.tally.gap, nw.tally.collapse
            ),
            partial: finalize(shifts, p, epsilon0, Vec::new(), SupportedVector::zero())?,
        });
    }

    let mut x = SupportedVector::zero();
    let mut steps: Vec<ScheduleStep> = Vec::with_capacity(targets.len());
    let mut n_prev = 0u64;
    for (idx, target) in targets.iter().enumerate() {
        let k = idx + 1;
        let eps_k = step_tolerance(epsilon0, k);
        let family = TargetFamily::diagonal(target, shifts.len())?;
        let y = [x.clone()];
        let search = WitnessSearch::new(shifts, &family, p, eps_k / 2.0, if x.is_zero() { &[] } else { &y })?;
        let mut accepted = None;
        for n in n_prev + 1..=n_prev + n_max_per_step {
            if !search.evaluate(n, false)?.passed() {
                continue;
            }
            let cert = search.certify(n, n_prev + 1)?;
            if within_budget(shifts, &steps, &cert.z, eps_k, p)? {
                accepted = Some(cert);
                break;
            }
        }
        let Some(cert) = accepted else {
            return Ok(BuildOutcome::Failed {
                step: k,
                reason: format!(
                    "no admissible time in ({n_prev}, {}] at ε_k = {eps_k}",
                    n_prev + n_max_per_step
                ),
                partial: finalize(shifts, p, epsilon0, steps, x)?,
            });
        };
        x = x.add(&cert.z);
        n_prev = cert.n;
        steps.push(ScheduleStep {
            k,
            target: target.clone(),
            n: cert.n,
            epsilon: eps_k,
            z: cert.z,
            residuals: Vec::new(),
        });
    }
    Ok(BuildOutcome::Complete(finalize(shifts, p, epsilon0, steps, x)?))
}

/// `‖T_i^{n_j} z‖_p < ε_k` for every earlier visit `j` and operator `i`.
fn within_budget(
    shifts: &[PseudoShift],
    earlier: &[ScheduleStep],
    z: &SupportedVector,
    eps_k: f64,
    p: f64,
) -> Result<bool> {
    for step in earlier {
        for s in shifts {
            if !(s.apply_power(z, step.n as i64)?.lp_norm(p) < eps_k) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Recomputes every visit of the final vector and the schedule's structure.
pub fn verify_schedule(shifts: &[PseudoShift], cert: &ScheduleCertificate) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let p = cert.p;
    let supplied = serde_json::to_value(shifts).ok();
    let recorded = serde_json::to_value(&cert.operators).ok();
    report.push(
        "operators match",
        cert.operators.len() as f64,
        shifts.len() as f64,
        supplied.is_some() && supplied == recorded,
    );

    let mut sum = SupportedVector::zero();
    for (idx, step) in cert.steps.iter().enumerate() {
        let k = step.k;
        report.push(format!("step[{idx}].k"), k as f64, (idx + 1) as f64, k == idx + 1);
        let eps_k = step_tolerance(cert.epsilon0, k);
        report.matches(format!("epsilon[{k}]"), step.epsilon, eps_k);
        if idx > 0 {
            let prev = &cert.steps[idx - 1];
            report.push(
                format!("n[{k}] > n[{}]", k - 1),
                step.n as f64,
                prev.n as f64,
                step.n > prev.n,
            );
            report.push(
                format!("epsilon[{k}] < epsilon[{}]", k - 1),
                step.epsilon,
                prev.epsilon,
                step.epsilon < prev.epsilon,
            );
        }
        let z_norm = step.z.lp_norm(p);
        report.push(format!("|z[{k}]| < epsilon[{k}]"), z_norm, eps_k, z_norm < eps_k);
        for earlier in &cert.steps[..idx] {
            for (i, s) in shifts.iter().enumerate() {
                let push = s.apply_power(&step.z, earlier.n as i64)?.lp_norm(p);
                report.push(
                    format!("|T{i}^n[{}] z[{k}]| < epsilon[{k}]", earlier.k),
                    push,
                    eps_k,
                    push < eps_k,
                );
            }
        }
        let residuals = visit_residuals(shifts, &cert.x, &step.target, step.n, p)?;
        for (i, &r) in residuals.iter().enumerate() {
            let claimed = step.residuals.get(i).copied().unwrap_or(f64::NAN);
            report.matches(format!("visit[{k}][{i}]"), claimed, r);
            report.push(format!("visit[{k}][{i}] <= 2 epsilon"), r, 2.0 * eps_k, r <= 2.0 * eps_k);
        }
        sum = sum.add(&step.z);
    }
    let consistent = cert
        .x
        .support()
        .chain(sum.support())
        .all(|j| rel_close(cert.x.get(j), sum.get(j), SCHEDULE_REL_TOL));
    report.push("x = sum z", cert.x.lp_norm(p), sum.lp_norm(p), consistent);
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightRule;

    #[test]
    fn enumeration_order() {
        let t = enumerate_targets(0, 1.0, 2).unwrap();
        assert_eq!(t, vec![SupportedVector::basis(0), SupportedVector::basis(0).scaled(-1.0)]);
        assert!(enumerate_targets(3, 1.0, 0).unwrap().is_empty());
        assert!(enumerate_targets(1, 0.0, 3).is_err());

        let t = enumerate_targets(1, 0.5, 8).unwrap();
        assert_eq!(t[2], SupportedVector::from_pairs([(0, 1.0)]));
        assert_eq!(t[4], SupportedVector::from_pairs([(-1, 0.5), (0, 0.5), (1, 0.5)]));
        assert_eq!(t[5], SupportedVector::from_pairs([(-1, 0.5), (0, 0.5), (1, -0.5)]));
        assert_eq!(t[7], SupportedVector::from_pairs([(-1, 0.5), (0, -0.5), (1, -0.5)]));
    }

    #[test]
    fn enumeration_has_full_support_and_no_repeats() {
        let t = enumerate_targets(2, 1.0, 400).unwrap();
        assert_eq!(t.len(), 400);
        for v in &t {
            let r = v.radius().unwrap() as i64;
            assert_eq!(v.support_len() as i64, 2 * r + 1);
            assert!(r <= 2);
        }
        for (a, b) in t.iter().zip(t.iter().skip(1)) {
            assert_ne!(a, b);
        }
        let mut sorted: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 400);
    }

    #[test]
    fn empty_target_list() {
        let shifts = vec![
            PseudoShift::translation("T1", 1, WeightRule::two_level(2.0, 0).unwrap()).unwrap(),
            PseudoShift::translation("T2", 3, WeightRule::two_level(3.0, 0).unwrap()).unwrap(),
        ];
        let out = build_dhc_vector(&shifts, &[], 0.1, 2.0, 100).unwrap();
        let cert = out.certificate();
        assert!(out.is_complete());
        assert!(cert.x.is_zero());
        assert!(cert.steps.is_empty());
        assert!(verify_schedule(&shifts, cert).unwrap().passed);
    }

    #[test]
    fn failing_probe_stops_at_step_one() {
        let t = PseudoShift::translation("T", 1, WeightRule::constant(1.0).unwrap()).unwrap();
        let shifts = vec![t.clone(), t];
        let targets = enumerate_targets(0, 1.0, 2).unwrap();
        match build_dhc_vector(&shifts, &targets, 0.1, 2.0, 50).unwrap() {
            BuildOutcome::Failed { step, partial, .. } => {
                assert_eq!(step, 1);
                assert!(partial.steps.is_empty());
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
