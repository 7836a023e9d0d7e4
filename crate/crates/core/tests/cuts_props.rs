mod common;

use ccp_core::cuts::{separate_mixing, validate_cut, MixingCut, MIN_VIOLATION};
use ccp_core::preprocess::{quantile_bounds, strengthened_matrix};
use ccp_core::CcpInstance;
use common::{qr, random_instance, Q, SMALL};
use proptest::prelude::*;

/// Every budget-feasible indicator vector with its smallest admissible `v` satisfies the cut.
fn holds_everywhere(inst: &CcpInstance, cut: &MixingCut) -> bool {
    let n = inst.num_scenarios();
    let eps = qr(inst.epsilon());
    (0u32..(1 << n)).all(|mask| {
        let used: Q = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| qr(inst.probs()[i])).sum();
        if used > eps {
            return true;
        }
        let z: Vec<f64> = (0..n).map(|i| (mask >> i & 1) as f64).collect();
        let v = (0..n)
            .filter(|&i| mask >> i & 1 == 0)
            .map(|i| inst.scenario(i)[cut.row])
            .fold(0.0, f64::max);
        let lhs = v + cut.sequence.iter().zip(&cut.coefs).map(|(&i, c)| c * z[i]).sum::<f64>();
        lhs >= cut.rhs - 1e-9
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn separated_cuts_are_valid(seed in any::<u64>(), zs in prop::collection::vec(0.0f64..=1.0, 12), vs in prop::collection::vec(0.0f64..=1.0, 4)) {
        let inst = random_instance(seed, SMALL);
        let qb = quantile_bounds(&inst);
        let bar = strengthened_matrix(&inst, &qb);
        let (n, m) = (inst.num_scenarios(), inst.num_rows());
        let z = &zs[..n];
        // v between the quantile bound and the largest scenario value
        let v: Vec<f64> = (0..m)
            .map(|k| {
                let top = (0..n).map(|i| inst.scenario(i)[k]).fold(0.0, f64::max);
                qb.lower[k] + vs[k] * (top - qb.lower[k]).max(0.0)
            })
            .collect();
        let cuts = separate_mixing(&bar, &qb.lower, &v, z, 2 * m);
        prop_assert!(cuts.len() <= 2 * m);
        for c in &cuts {
            prop_assert!(c.sequence.len() >= 2);
            prop_assert!(c.violation > MIN_VIOLATION);
            prop_assert!((c.rhs - c.lhs(v[c.row], z) - c.violation).abs() < 1e-9);
            // values strictly decrease along the sequence and indicators strictly decrease
            for w in c.sequence.windows(2) {
                prop_assert!(bar.get(w[0], c.row) > bar.get(w[1], c.row));
                prop_assert!(z[w[0]] > z[w[1]]);
            }
            prop_assert!(holds_everywhere(&inst, c));
            prop_assert_eq!(validate_cut(&inst, c), Ok(true));
        }
        let rows: Vec<usize> = cuts.iter().map(|c| c.row).collect();
        let mut uniq = rows.clone();
        uniq.sort_unstable();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), rows.len());
    }

    #[test]
    fn integral_points_are_never_cut(seed in any::<u64>(), mask in any::<u32>()) {
        let inst = random_instance(seed, SMALL);
        let qb = quantile_bounds(&inst);
        let bar = strengthened_matrix(&inst, &qb);
        let (n, m) = (inst.num_scenarios(), inst.num_rows());
        let z: Vec<f64> = (0..n).map(|i| (mask >> i & 1) as f64).collect();
        let used: Q = (0..n).filter(|&i| z[i] > 0.5).map(|i| qr(inst.probs()[i])).sum();
        prop_assume!(used <= qr(inst.epsilon()));
        let v: Vec<f64> = (0..m)
            .map(|k| (0..n).filter(|&i| z[i] < 0.5).map(|i| inst.scenario(i)[k]).fold(qb.lower[k], f64::max))
            .collect();
        prop_assert!(separate_mixing(&bar, &qb.lower, &v, &z, 2 * m).is_empty());
    }
}
