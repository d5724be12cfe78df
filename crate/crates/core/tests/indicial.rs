use conic_core::acceptance::oracles::closed_form_roots;
use conic_core::indicial::{root_table, IndicialOperator};
use proptest::prelude::*;

fn close(got: &[f64], want: &[f64]) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-10 * (1.0 + b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tables_match_closed_forms(beta in -0.95f64..-0.05, lo in -5.0f64..0.0, width in 0.5f64..6.0) {
        let window = (lo, lo + width);
        let cases = [
            (IndicialOperator::ScalarLaplacian, closed_form_roots(beta, &[], true, window)),
            (IndicialOperator::P, closed_form_roots(beta, &[-1.0, 1.0], false, window)),
            (IndicialOperator::L, closed_form_roots(beta, &[-2.0, 2.0], true, window)),
        ];
        for (op, want) in cases {
            let table = root_table(op, beta, window);
            // Roots within 1e-12 of an edge may land on either side.
            let edge = |v: &f64| (v - window.0).abs() > 1e-9 && (v - window.1).abs() > 1e-9;
            let got: Vec<f64> = table.values().into_iter().filter(edge).collect();
            let want: Vec<f64> = want.into_iter().filter(edge).collect();
            prop_assert!(close(&got, &want), "{:?} beta {}: {:?} vs {:?}", op, beta, got, want);
            prop_assert!(table.max_residual() < 1e-10);
        }
    }

    #[test]
    fn scalar_roots_are_symmetric(beta in -0.95f64..-0.05, half in 0.5f64..5.0) {
        let values = root_table(IndicialOperator::ScalarLaplacian, beta, (-half, half)).values();
        let mirrored: Vec<f64> = values.iter().rev().map(|v| -v).collect();
        prop_assert!(close(&values, &mirrored));
    }
}

#[test]
fn zero_is_a_double_scalar_root() {
    let table = root_table(IndicialOperator::ScalarLaplacian, -0.5, (-0.5, 0.5));
    assert_eq!(table.values(), vec![0.0]);
    assert_eq!(table.multiplicity_at(0.0), 2);
}
