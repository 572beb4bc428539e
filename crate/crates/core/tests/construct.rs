mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use pseudoshift::construct::{
    build_dhc_vector, enumerate_targets, verify_schedule, BuildOutcome, ScheduleCertificate,
};
use pseudoshift::dynamics::{orbit, return_set, OrbitMode};
use pseudoshift::family::{make_family, FamilyParams};
use pseudoshift::{PseudoShift, SupportedVector};

use common::family_params;

fn base() -> Vec<PseudoShift> {
    make_family(&FamilyParams::new(vec![1, 3], vec![2.0, 3.0], vec![0, 0]).unwrap()).unwrap()
}

fn check_certificate(shifts: &[PseudoShift], cert: &ScheduleCertificate) -> Result<(), TestCaseError> {
    let p = cert.p;
    let report = verify_schedule(shifts, cert).unwrap();
    prop_assert!(report.passed, "{:?}", report.failures().collect::<Vec<_>>());

    for (j, step) in cert.steps.iter().enumerate() {
        for s in shifts {
            let visit = s.apply_power(&cert.x, step.n as i64).unwrap().distance(&step.target, p);
            let partial = cert.steps[..=j].iter().fold(SupportedVector::zero(), |acc, e| acc.add(&e.z));
            let own = s.apply_power(&partial, step.n as i64).unwrap().distance(&step.target, p);
            let later: f64 = cert.steps[j + 1..]
                .iter()
                .map(|later| s.apply_power(&later.z, step.n as i64).unwrap().lp_norm(p))
                .sum();
            prop_assert!(own <= step.epsilon, "visit {j} before later corrections: {own}");
            prop_assert!(visit <= own + later + 1e-12 * (1.0 + own + later));
            prop_assert!(visit <= 2.0 * step.epsilon);
        }
    }

    let mut allowed = BTreeSet::new();
    for step in &cert.steps {
        let r = step.target.radius().unwrap() as i64;
        for s in shifts {
            for m in -r..=r {
                allowed.insert(s.map.iterate(m, step.n as i64).unwrap());
            }
        }
    }
    prop_assert!(cert.x.support().all(|j| allowed.contains(&j)));

    let z_sum: f64 = cert.steps.iter().map(|s| s.z.lp_norm(p)).sum();
    prop_assert!(cert.x.lp_norm(p) <= z_sum * (1.0 + 1e-12));
    prop_assert!(z_sum <= 2.0 * cert.epsilon0);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn schedules_satisfy_invariants(
        params in family_params(2..=3),
        m_max in 0u32..=1,
        grid in 0.25f64..2.0,
        count in 1usize..=5,
        eps0 in 0.02f64..0.5,
        p in prop_oneof![Just(1.0), Just(2.0)],
    ) {
        let shifts = make_family(&params).unwrap();
        let targets = enumerate_targets(m_max, grid, count).unwrap();
        let outcome = build_dhc_vector(&shifts, &targets, eps0, p, 1500).unwrap();
        // some instances need times whose corrections underflow f64; they
        // stop with a partial certificate that must still verify
        check_certificate(&shifts, outcome.certificate())?;
        match &outcome {
            BuildOutcome::Complete(c) => prop_assert_eq!(c.steps.len(), count),
            BuildOutcome::Failed { step, partial, .. } => prop_assert_eq!(partial.steps.len(), step - 1),
        }
    }
}

#[test]
fn base_schedule_and_return_sets() {
    let shifts = base();
    let targets = enumerate_targets(1, 1.0, 8).unwrap();
    let outcome = build_dhc_vector(&shifts, &targets, 0.1, 2.0, 2000).unwrap();
    let BuildOutcome::Complete(cert) = &outcome else {
        panic!("{outcome:?}");
    };
    assert_eq!(cert.steps.len(), 8);
    check_certificate(&shifts, cert).unwrap();
    for step in &cert.steps {
        let mode = OrbitMode::Stats { target: step.target.clone(), p: 2.0 };
        let orb = orbit(&shifts, &cert.x, step.n, mode).unwrap();
        let hits = return_set(&orb, &step.target, 3.0 * step.epsilon, 2.0).unwrap();
        assert!(hits.contains(&step.n));
    }
    let again = build_dhc_vector(&shifts, &targets, 0.1, 2.0, 2000).unwrap();
    assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&outcome).unwrap());
}

#[test]
fn tampering_is_detected() {
    let shifts = base();
    let targets = enumerate_targets(1, 1.0, 4).unwrap();
    let cert = build_dhc_vector(&shifts, &targets, 0.1, 2.0, 2000).unwrap().certificate().clone();

    let mut dropped = cert.clone();
    dropped.x = dropped.x.sub(&dropped.steps[2].z);
    let report = verify_schedule(&shifts, &dropped).unwrap();
    assert!(!report.passed);
    assert!(report.checks.iter().any(|c| c.name == "visit[3][0] <= 2 epsilon" && !c.pass));
    assert!(report.checks.iter().any(|c| c.name == "visit[1][0] <= 2 epsilon" && c.pass));

    let mut shuffled = cert.clone();
    let (a, b) = (shuffled.steps[1].n, shuffled.steps[2].n);
    shuffled.steps[1].n = b;
    shuffled.steps[2].n = a;
    let report = verify_schedule(&shifts, &shuffled).unwrap();
    assert!(report.checks.iter().any(|c| c.name == "n[3] > n[2]" && !c.pass));

    let text = serde_json::to_string(&cert).unwrap();
    let back: ScheduleCertificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    assert!(verify_schedule(&shifts, &back).unwrap().passed);
}
