use std::f64::consts::PI;

use conic_core::geometry::{
    chi_beta, classify, dimension_report, gauss_bonnet_pair, sph_to_euc_projection, ConeAngleVector, ConicSurfaceSpec, GeometryTag,
};
use num_rational::Rational64;
use proptest::prelude::*;

fn betas(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.99f64..-0.01, 0..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn tag_follows_the_sign_of_chi(genus in 0u32..4, b in betas(7)) {
        let spec = ConicSurfaceSpec::unplaced(genus, b).unwrap();
        let class = classify(&spec);
        let chi = chi_beta(&spec);
        match class.tag {
            GeometryTag::Hyperbolic => prop_assert!(chi < 0.0),
            GeometryTag::Euclidean => prop_assert!(chi.abs() <= 1e-12),
            _ => prop_assert!(chi > 0.0 && genus == 0),
        }
        prop_assert_eq!(class.violated_index.is_some(), class.tag == GeometryTag::OutsideTroyanov);
    }

    #[test]
    fn gauss_bonnet_pair_integrates(genus in 0u32..4, b in betas(7), area in 0.1f64..10.0) {
        let spec = ConicSurfaceSpec::unplaced(genus, b).unwrap();
        let k = gauss_bonnet_pair(&spec, area);
        let chi = chi_beta(&spec);
        prop_assert!((k * area - 2.0 * PI * chi).abs() <= 1e-12 * (1.0 + chi.abs()) || chi.abs() <= 1e-12);
    }

    #[test]
    fn dimensions_depend_only_on_genus_and_count(genus in 0u32..4, a in betas(6), seed in any::<u64>()) {
        let k = a.len();
        let b: Vec<f64> = (0..k).map(|i| -0.01 - 0.98 * (((seed >> (i % 64)) & 0xff) as f64 / 255.0)).collect();
        let ra = dimension_report(&ConicSurfaceSpec::unplaced(genus, a).unwrap());
        let rb = dimension_report(&ConicSurfaceSpec::unplaced(genus, b).unwrap());
        prop_assert_eq!(&ra, &rb);
        prop_assert_eq!(ra.dim_slice, ra.dim_teich_conic + 1);
        prop_assert_eq!(ra.dim_teich_conic - ra.dim_fiber, k as i64);
    }

    #[test]
    fn projection_lands_on_the_euclidean_simplex(b in prop::collection::vec(-0.6f64..-0.05, 3..7)) {
        let angles = ConeAngleVector::new(b.clone()).unwrap();
        let spec = ConicSurfaceSpec::new(0, angles.clone(), None).unwrap();
        if classify(&spec).tag == GeometryTag::Spherical {
            let (lambda, euc) = sph_to_euc_projection(&angles).unwrap();
            prop_assert!(lambda > 0.0 && lambda < 1.0);
            prop_assert!((euc.sum() + 2.0).abs() < 1e-12);
        } else {
            prop_assert!(sph_to_euc_projection(&angles).is_err());
        }
    }

    #[test]
    fn exact_and_float_classification_agree_off_the_boundary(nums in prop::collection::vec(1i64..100, 1..6)) {
        let total: i64 = nums.iter().sum();
        prop_assume!(total != 200 && nums.iter().all(|&n| 2 * n != total));
        let q: Vec<Rational64> = nums.iter().map(|&n| Rational64::new(-n, 100)).collect();
        let f: Vec<f64> = nums.iter().map(|&n| -(n as f64) / 100.0).collect();
        let exact = classify(&ConicSurfaceSpec::new(0, ConeAngleVector::from_rationals(q).unwrap(), None).unwrap());
        let float = classify(&ConicSurfaceSpec::unplaced(0, f).unwrap());
        prop_assert_eq!(exact.tag, float.tag);
    }
}

#[test]
fn exact_euclidean_boundary() {
    let q = ConeAngleVector::from_rationals(vec![Rational64::new(-2, 3); 3]).unwrap();
    let spec = ConicSurfaceSpec::new(0, q, None).unwrap();
    assert_eq!(classify(&spec).tag, GeometryTag::Euclidean);
    assert_eq!(gauss_bonnet_pair(&spec, 1.0), 0.0);
}
