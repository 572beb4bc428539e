//! Joint orbits, return sets and the finite upper-Banach-density surrogate.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::PseudoShift;
use crate::vector::SupportedVector;

/// Default cap on the total number of stored coefficients in a full orbit.
pub const DEFAULT_SUPPORT_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OrbitMode {
    /// Keep every snapshot `T_i^n x`; snapshots are produced by repeated
    /// application, so `record[n+1] = T_i(record[n])`.
    Full,
    /// Keep `‖T_i^n x‖_p` and `‖T_i^n x − target‖_p`, each computed from the
    /// closed form of `T_i^n`.
    Stats { target: SupportedVector, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrbitData {
    Snapshots(Vec<SupportedVector>),
    Stats { norms: Vec<f64>, distances: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub n: u64,
    pub data: OrbitData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub mode: OrbitMode,
    pub operators: Vec<String>,
    pub records: Vec<OrbitRecord>,
}

pub fn orbit(shifts: &[PseudoShift], x: &SupportedVector, n_max: u64, mode: OrbitMode) -> Result<Orbit> {
    orbit_with_cap(shifts, x, n_max, mode, DEFAULT_SUPPORT_CAP)
}

pub fn orbit_with_cap(
    shifts: &[PseudoShift],
    x: &SupportedVector,
    n_max: u64,
    mode: OrbitMode,
    support_cap: usize,
) -> Result<Orbit> {
    let mut records = Vec::with_capacity(n_max as usize + 1);
    match &mode {
        OrbitMode::Full => {
            let mut current: Vec<SupportedVector> = vec![x.clone(); shifts.len()];
            let mut total = 0usize;
            for n in 0..=n_max {
                if n > 0 {
                    current = shifts
                        .iter()
                        .zip(&current)
                        .map(|(s, v)| s.apply(v))
                        .collect::<Result<_>>()?;
                }
                total += current.iter().map(SupportedVector::support_len).sum::<usize>();
                if total > support_cap {
                    return Err(Error::MemoryGuard {
                        total,
                        cap: support_cap,
                    });
                }
                records.push(OrbitRecord {
                    n,
                    data: OrbitData::Snapshots(current.clone()),
                });
            }
        }
        OrbitMode::Stats { target, p } => {
            for n in 0..=n_max {
                let mut norms = Vec::with_capacity(shifts.len());
                let mut distances = Vec::with_capacity(shifts.len());
                for s in shifts {
                    let image = s.apply_power(x, n as i64)?;
                    norms.push(image.lp_norm(*p));
                    distances.push(image.distance(target, *p));
                }
                records.push(OrbitRecord {
                    n,
                    data: OrbitData::Stats { norms, distances },
                });
            }
        }
    }
    Ok(Orbit {
        mode,
        operators: shifts.iter().map(|s| s.name.clone()).collect(),
        records,
    })
}

/// Times at which every operator's orbit lies in the open `δ`-ball around
/// `target`.
pub fn return_set(orbit: &Orbit, target: &SupportedVector, delta: f64, p: f64) -> Result<BTreeSet<u64>> {
    if let OrbitMode::Stats { target: t, p: q } = &orbit.mode {
        if t != target || *q != p {
            return Err(Error::ModeMismatch);
        }
    }
    let mut out = BTreeSet::new();
    for record in &orbit.records {
        let inside = match &record.data {
            OrbitData::Snapshots(snaps) => snaps.iter().all(|v| v.distance(target, p) < delta),
            OrbitData::Stats { distances, .. } => distances.iter().all(|&d| d < delta),
        };
        if inside {
            out.insert(record.n);
        }
    }
    Ok(out)
}

/// CSV with columns `n`, then `norm_<op>` and `dist_<op>` per operator.
pub fn orbit_csv(orbit: &Orbit) -> Result<String> {
    let mut out = String::from("n");
    for name in &orbit.operators {
        write!(out, ",norm_{name},dist_{name}").expect("write to string");
    }
    out.push('\n');
    for record in &orbit.records {
        let OrbitData::Stats { norms, distances } = &record.data else {
            return Err(Error::ModeMismatch);
        };
        write!(out, "{}", record.n).expect("write to string");
        for (norm, dist) in norms.iter().zip(distances) {
            write!(out, ",{norm:?},{dist:?}").expect("write to string");
        }
        out.push('\n');
    }
    Ok(out)
}

/// `max_{0 ≤ m ≤ m_max} #(A ∩ [m+1, m+N]) / N` with its window parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    #[serde(rename = "N")]
    pub window: u64,
    pub m_max: u64,
    pub value: f64,
    pub set_size: usize,
}

pub fn upper_banach_density(set: &BTreeSet<u64>, window: u64, m_max: u64) -> Result<DensityEstimate> {
    if window == 0 {
        return Err(Error::InvalidParameter("window length must be at least 1".into()));
    }
    let sorted: Vec<u64> = set.iter().copied().collect();
    let count_upto = |v: u64| sorted.partition_point(|&a| a <= v);
    let mut best = 0usize;
    for m in 0..=m_max {
        let hi = m.saturating_add(window);
        let count = count_upto(hi) - count_upto(m);
        best = best.max(count);
        if best as u64 == window {
            break;
        }
    }
    Ok(DensityEstimate {
        window,
        m_max,
        value: best as f64 / window as f64,
        set_size: set.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightRule;

    fn brute_density(set: &BTreeSet<u64>, window: u64, m_max: u64) -> f64 {
        (0..=m_max)
            .map(|m| (m + 1..=m + window).filter(|a| set.contains(a)).count())
            .max()
            .unwrap_or(0) as f64
            / window as f64
    }

    #[test]
    fn pure_shift_orbit() {
        let t = PseudoShift::translation("S", 1, WeightRule::constant(1.0).unwrap()).unwrap();
        let o = orbit(&[t], &SupportedVector::basis(0), 3, OrbitMode::Full).unwrap();
        let snaps: Vec<SupportedVector> = o
            .records
            .iter()
            .map(|r| match &r.data {
                OrbitData::Snapshots(s) => s[0].clone(),
                _ => unreachable!(),
            })
            .collect();
        let expected: Vec<SupportedVector> = (0..=3).map(|k| SupportedVector::basis(-k)).collect();
        assert_eq!(snaps, expected);
    }

    #[test]
    fn two_level_member_orbit() {
        let t = PseudoShift::translation("T1", 1, WeightRule::two_level(2.0, 0).unwrap()).unwrap();
        let o = orbit(std::slice::from_ref(&t), &SupportedVector::basis(0), 2, OrbitMode::Full).unwrap();
        let expected = [
            SupportedVector::basis(0),
            SupportedVector::from_pairs([(-1, 0.5)]),
            SupportedVector::from_pairs([(-2, 0.25)]),
        ];
        for (r, e) in o.records.iter().zip(&expected) {
            let OrbitData::Snapshots(s) = &r.data else { unreachable!() };
            assert!(s[0].approx_eq(e));
        }
        let single = orbit(&[t], &SupportedVector::basis(4), 0, OrbitMode::Full).unwrap();
        assert_eq!(single.records.len(), 1);
    }

    #[test]
    fn memory_guard_trips() {
        let t = PseudoShift::translation("S", 1, WeightRule::constant(1.0).unwrap()).unwrap();
        let x: SupportedVector = (0..10).map(|j| (j, 1.0)).collect();
        let err = orbit_with_cap(&[t], &x, 5, OrbitMode::Full, 30).unwrap_err();
        assert!(matches!(err, Error::MemoryGuard { .. }));
    }

    #[test]
    fn return_set_edges() {
        let t = PseudoShift::translation("T", 1, WeightRule::two_level(2.0, 0).unwrap()).unwrap();
        let x = SupportedVector::from_pairs([(0, 1.0), (3, -0.5)]);
        let target = SupportedVector::zero();
        let mode = OrbitMode::Stats { target: target.clone(), p: 2.0 };
        let o = orbit(std::slice::from_ref(&t), &x, 10, mode).unwrap();
        let huge = x.lp_norm(2.0) * t.norm_bound().powi(10) * 1.01;
        assert_eq!(return_set(&o, &target, huge, 2.0).unwrap().len(), 11);
        assert!(return_set(&o, &target, 0.0, 2.0).unwrap().is_empty());
        assert!(matches!(
            return_set(&o, &SupportedVector::basis(0), 1.0, 2.0),
            Err(Error::ModeMismatch)
        ));
        let full = orbit(&[t], &x, 10, OrbitMode::Full).unwrap();
        assert_eq!(return_set(&full, &target, 0.7, 2.0).unwrap(), return_set(&o, &target, 0.7, 2.0).unwrap());
        assert!(orbit_csv(&full).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = PseudoShift::translation("T1", 1, WeightRule::constant(2.0).unwrap()).unwrap();
        let mode = OrbitMode::Stats { target: SupportedVector::zero(), p: 1.0 };
        let o = orbit(&[t], &SupportedVector::basis(0), 1, mode).unwrap();
        assert_eq!(orbit_csv(&o).unwrap(), "n,norm_T1,dist_T1\n0,1.0,1.0\n1,2.0,2.0\n");
    }

    #[test]
    fn density_examples() {
        let evens: BTreeSet<u64> = (0..=10_000).step_by(2).collect();
        assert_eq!(upper_banach_density(&evens, 100, 5000).unwrap().value, 0.5);
        let squares: BTreeSet<u64> = (1..=100u64).map(|k| k * k).collect();
        let est = upper_banach_density(&squares, 100, 9000).unwrap();
        assert_eq!(est.value, brute_density(&squares, 100, 9000));
        assert_eq!(est.value, 0.1);
        let empty = BTreeSet::new();
        assert_eq!(upper_banach_density(&empty, 10, 100).unwrap().value, 0.0);
        assert!(upper_banach_density(&empty, 0, 100).is_err());
    }

    #[test]
    fn density_json() {
        let e = upper_banach_density(&BTreeSet::from([1, 2]), 4, 3).unwrap();
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"N":4,"m_max":3,"value":0.5,"set_size":2}"#
        );
    }
}
