#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;

use pseudoshift::family::FamilyParams;
use pseudoshift::{GeneralMap, InducingMap, PseudoShift, SupportedVector, WeightRule};

pub fn weights() -> impl Strategy<Value = WeightRule> {
    let sign = prop_oneof![4 => Just(1.0), 1 => Just(-1.0)];
    prop_oneof![
        (1.1f64..4.0, sign, -5i64..=5).prop_map(|(l, s, c)| WeightRule::two_level(s * l, c).unwrap()),
        prop::collection::vec(0.3f64..3.0, 1..=4).prop_map(|v| WeightRule::periodic(v).unwrap()),
        (prop::collection::btree_map(-20i64..=20, 0.2f64..5.0, 0..6), 0.5f64..2.0)
            .prop_map(|(e, d): (BTreeMap<i64, f64>, f64)| WeightRule::table(e, d).unwrap()),
    ]
}

pub fn map() -> impl Strategy<Value = InducingMap> {
    prop_oneof![
        3 => prop_oneof![-3i64..=-1, 1i64..=3].prop_map(|s| InducingMap::translation(s).unwrap()),
        1 => prop_oneof![
            Just("negate".to_string()),
            Just("swap_pairs".to_string()),
            (-3i64..=3).prop_map(|r| format!("swap_pairs_then_shift:{r}")),
        ]
        .prop_map(|r| InducingMap::General(GeneralMap::from_ref(&r).unwrap())),
    ]
}

pub fn shift() -> impl Strategy<Value = PseudoShift> {
    (map(), weights()).prop_map(|(m, w)| PseudoShift::new("T", m, w))
}

pub fn translation_shift() -> impl Strategy<Value = PseudoShift> {
    (prop_oneof![-3i64..=-1, 1i64..=3], weights())
        .prop_map(|(s, w)| PseudoShift::translation("T", s, w).unwrap())
}

pub fn vector(radius: i64, max_len: usize) -> impl Strategy<Value = SupportedVector> {
    prop::collection::vec((-radius..=radius, prop_oneof![-2.0f64..-0.01, 0.01f64..2.0]), 0..=max_len)
        .prop_map(SupportedVector::from_pairs)
}

/// Translation family parameters with `2p_s < p_{s+1}` and `1 < |λ_s| < |λ_{s+1}|`.
pub fn family_params(n_ops: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = FamilyParams> {
    n_ops.prop_flat_map(|n| {
        (
            1i64..=2,
            prop::collection::vec(1i64..=2, n - 1),
            1.2f64..2.5,
            prop::collection::vec(1.1f64..1.8, n - 1),
            prop::collection::vec(-2i64..=2, n),
        )
            .prop_map(|(p1, gaps, l1, ratios, cutoffs)| {
                let mut steps = vec![p1];
                let mut lambdas = vec![l1];
                for (g, r) in gaps.iter().zip(&ratios) {
                    steps.push(2 * steps.last().unwrap() + g);
                    lambdas.push(lambdas.last().unwrap() * r);
                }
                FamilyParams::new(steps, lambdas, cutoffs).unwrap()
            })
    })
}

pub fn close(a: &SupportedVector, b: &SupportedVector, rel: f64) -> bool {
    let idx: std::collections::BTreeSet<i64> = a.support().chain(b.support()).collect();
    idx.into_iter().all(|j| pseudoshift::rel_close(a.get(j), b.get(j), rel))
}
