mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use pseudoshift::criterion::{find_witness, verify_certificate, TargetFamily, WitnessOutcome};
use pseudoshift::family::{
    inverse_family, make_family, max_cross_ratio, threshold_k, threshold_k_lattice, FamilyParams, ThresholdCase,
};
use pseudoshift::{PseudoShift, SupportedVector};

use common::family_params;

const EPSILONS: [f64; 3] = [0.1, 0.01, 0.001];
const CASES: [ThresholdCase; 2] = [ThresholdCase::EllGtI, ThresholdCase::IGtEll];

fn thresholds_hold(shifts: &[PseudoShift], params: &FamilyParams) -> Result<(), TestCaseError> {
    for eps in EPSILONS {
        for radius in 0..=2u32 {
            for case in CASES {
                let k = match case {
                    ThresholdCase::EllGtI => threshold_k(params, eps, radius, case).unwrap(),
                    ThresholdCase::IGtEll => threshold_k_lattice(params, eps, radius, case).unwrap(),
                };
                for kk in k..k + 10 {
                    if let Some(w) = max_cross_ratio(shifts, radius, kk, case).unwrap() {
                        prop_assert!(w.abs_lt(eps), "ratio {} at k = {kk} ≥ {k}, ε = {eps}, M = {radius}, {case:?}", w.to_f64());
                    }
                }
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn thresholds_bound_cross_ratios(params in family_params(2..=4)) {
        let shifts = make_family(&params).unwrap();
        thresholds_hold(&shifts, &params)?;
        thresholds_hold(&inverse_family(&shifts).unwrap(), &params.inverse_conjugate())?;
    }

    #[test]
    fn members_are_invertible(params in family_params(2..=4)) {
        let shifts = make_family(&params).unwrap();
        for (s, lambda) in shifts.iter().chain(&inverse_family(&shifts).unwrap()).zip(params.lambdas.iter().cycle()) {
            let expected = lambda.abs().min(1.0 / lambda.abs());
            prop_assert!(s.invertible());
            prop_assert!((s.weights.inf_abs() - expected).abs() <= 1e-15 * expected);
        }
    }

    #[test]
    fn witness_within_threshold_budget(params in family_params(2..=3), radius in 0u32..=2, eps_idx in 0usize..2) {
        let eps = [0.1, 0.01][eps_idx];
        let shifts = make_family(&params).unwrap();
        let k = CASES.iter().map(|&c| threshold_k(&params, eps, radius, c).unwrap()).max().unwrap();
        let n_max = 10 * k + 2 * u64::from(radius) + 1;
        let targets = TargetFamily::new(radius, vec![vec![1.0; 2 * radius as usize + 1]; shifts.len()]).unwrap();
        let outcome = find_witness(&shifts, &targets, params.p, eps, 1, n_max, &[]).unwrap();
        let WitnessOutcome::Found(cert) = outcome else {
            return Err(TestCaseError::fail(format!("no witness within n_max = {n_max}")));
        };
        prop_assert!(verify_certificate(&shifts, &cert, params.p).unwrap().passed);
    }
}

#[test]
fn unrounded_index_count_can_undershoot() {
    let params = FamilyParams::new(vec![2, 5], vec![2.2339600543195104, 2.4573560597514614], vec![0, 0]).unwrap();
    let shifts = make_family(&params).unwrap();
    let case = ThresholdCase::IGtEll;
    let k = threshold_k(&params, 0.1, 0, case).unwrap();
    assert_eq!(k, 3);
    let worst = max_cross_ratio(&shifts, 0, k, case).unwrap().unwrap();
    // λ_2 / λ_1^3: one more index above the cutoff than the real-valued count allows
    let expected = params.lambdas[1] / params.lambdas[0].powi(3);
    assert!((worst.to_f64() - expected).abs() < 1e-12);
    assert!(!worst.abs_lt(0.1));
    let k_lat = threshold_k_lattice(&params, 0.1, 0, case).unwrap();
    assert!(k_lat > k);
    assert!(max_cross_ratio(&shifts, 0, k_lat, case).unwrap().unwrap().abs_lt(0.1));
}

#[test]
fn block_images_separate_after_2m() {
    let params = FamilyParams::new(vec![1, 3, 7], vec![2.0, 3.0, 4.0], vec![0, 1, -2]).unwrap();
    let shifts = make_family(&params).unwrap();
    for radius in 0..=3i64 {
        for k in 2 * radius + 1..=2 * radius + 100 {
            let images: Vec<HashSet<i64>> = shifts
                .iter()
                .map(|s| (-radius..=radius).map(|m| s.map.iterate(m, k).unwrap()).collect())
                .collect();
            for a in 0..images.len() {
                for b in a + 1..images.len() {
                    assert!(images[a].is_disjoint(&images[b]), "M = {radius}, k = {k}");
                }
            }
        }
    }
}

#[test]
fn inverse_family_undoes_family() {
    let params = FamilyParams::new(vec![1, 3], vec![2.0, -3.0], vec![2, -1]).unwrap();
    let shifts = make_family(&params).unwrap();
    let inverse = inverse_family(&shifts).unwrap();
    let x = SupportedVector::from_pairs([(-4, 1.0), (0, -2.5), (3, 0.75)]);
    for (t, inv) in shifts.iter().zip(&inverse) {
        for n in [1, 5, 17] {
            let back = inv.apply_power(&t.apply_power(&x, n).unwrap(), n).unwrap();
            assert!(common::close(&back, &x, 1e-12));
        }
    }
}

#[test]
fn validation_names_the_violated_inequality() {
    let steps = FamilyParams::new(vec![2, 3], vec![2.0, 3.0], vec![0, 0]).unwrap_err();
    assert!(steps.to_string().contains("2p_s < p_t"));
    let lambdas = FamilyParams::new(vec![1, 3], vec![3.0, 2.0], vec![0, 0]).unwrap_err();
    assert!(lambdas.to_string().contains("|λ_s| < |λ_t|"));
    assert!(FamilyParams::new(vec![1, 3], vec![1.0, 2.0], vec![0, 0]).is_err());
}
