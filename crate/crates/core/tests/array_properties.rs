use cbf_core::array::{
    array_factor, beam_pattern, composite_pattern, pattern_variance, steering_vector, AngleGrid,
    ArrayGeometry, WeightVector,
};
use cbf_core::search::golay_construct;
use cbf_core::Complex64;
use proptest::prelude::*;

fn phases(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, len)
}

proptest! {
    #[test]
    fn steering_and_weights_are_unit_modulus(
        ns in 1usize..12,
        m in 0usize..3,
        theta in -std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2,
        spacing in 0.1f64..2.0,
        ph in phases(12),
    ) {
        let g = ArrayGeometry::ula(3 * ns, 3, spacing).unwrap();
        let sv = steering_vector(&g, m, theta).unwrap();
        prop_assert_eq!(sv.entries.len(), ns);
        for e in &sv.entries {
            prop_assert!((e.norm() - 1.0).abs() < 1e-12);
        }
        let w = WeightVector::from_phases(ph[..ns].to_vec());
        for e in w.entries() {
            prop_assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_on_uniform_psi_grid(ns in 1usize..17, m in 0usize..2, ph in phases(16)) {
        let g = ArrayGeometry::ula(2 * ns, 2, 0.5).unwrap();
        let grid = AngleGrid::uniform_psi(512).unwrap();
        let p = beam_pattern(&WeightVector::from_phases(ph[..ns].to_vec()), &g, m, &grid).unwrap();
        let mean = p.power().iter().sum::<f64>() / grid.len() as f64;
        prop_assert!((mean - 1.0).abs() < 1e-6, "mean power {}", mean);
    }

    #[test]
    fn global_phase_leaves_magnitude_unchanged(ns in 1usize..10, alpha in -10.0f64..10.0, ph in phases(10)) {
        let g = ArrayGeometry::ula(ns, 1, 0.5).unwrap();
        let grid = AngleGrid::uniform_theta(128).unwrap();
        let w = WeightVector::from_phases(ph[..ns].to_vec());
        let a = beam_pattern(&w, &g, 0, &grid).unwrap();
        let b = beam_pattern(&w.rotated(alpha), &g, 0, &grid).unwrap();
        for (x, y) in a.gains.iter().zip(&b.gains) {
            prop_assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn array_factor_is_linear(
        ns in 1usize..8,
        re in prop::collection::vec(-2.0f64..2.0, 16),
        im in prop::collection::vec(-2.0f64..2.0, 16),
    ) {
        let g = ArrayGeometry::ula(2 * ns, 2, 0.5).unwrap();
        let grid = AngleGrid::uniform_theta(64).unwrap();
        let a: Vec<Complex64> = (0..ns).map(|i| Complex64::new(re[i], im[i])).collect();
        let b: Vec<Complex64> = (0..ns).map(|i| Complex64::new(re[8 + i], im[8 + i])).collect();
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let fa = array_factor(&a, &g, 1, &grid).unwrap();
        let fb = array_factor(&b, &g, 1, &grid).unwrap();
        let fs = array_factor(&sum, &g, 1, &grid).unwrap();
        for i in 0..grid.len() {
            prop_assert!((fs[i] - fa[i] - fb[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn composite_power_is_mean_of_members(ns in 1usize..8, ph in phases(24)) {
        let g = ArrayGeometry::ula(3 * ns, 3, 0.5).unwrap();
        let grid = AngleGrid::uniform_theta(100).unwrap();
        let pats: Vec<_> = (0..3)
            .map(|m| beam_pattern(&WeightVector::from_phases(ph[8 * m..8 * m + ns].to_vec()), &g, m, &grid).unwrap())
            .collect();
        let comp = composite_pattern(pats.clone()).unwrap();
        for i in 0..grid.len() {
            let mean = pats.iter().map(|p| p.gains[i].norm_sqr()).sum::<f64>() / 3.0;
            prop_assert!((comp.amplitude[i].powi(2) - mean).abs() < 1e-12);
        }
        prop_assert!(comp.variance >= 0.0);
    }
}

#[test]
fn zero_variance_is_measure_invariant() {
    for len in [1, 2, 4, 8, 16, 32] {
        let g = ArrayGeometry::ula(2 * len, 2, 0.5).unwrap();
        let (a, b) = golay_construct(len).unwrap();
        for grid in [
            AngleGrid::uniform_theta(777).unwrap(),
            AngleGrid::uniform_psi(600).unwrap(),
        ] {
            let comp = composite_pattern(vec![
                beam_pattern(&a, &g, 0, &grid).unwrap(),
                beam_pattern(&b, &g, 1, &grid).unwrap(),
            ])
            .unwrap();
            let v = pattern_variance(&comp, &grid).unwrap();
            assert!(v < 1e-10, "len {len} variance {v}");
        }
    }
}

#[test]
fn non_flat_variance_depends_on_measure() {
    let g = ArrayGeometry::ula(4, 1, 0.5).unwrap();
    let w = WeightVector::uniform(4);
    let theta = AngleGrid::uniform_theta(512).unwrap();
    let psi = AngleGrid::uniform_psi(512).unwrap();
    let vt = pattern_variance(&beam_pattern(&w, &g, 0, &theta).unwrap(), &theta).unwrap();
    let vp = pattern_variance(&beam_pattern(&w, &g, 0, &psi).unwrap(), &psi).unwrap();
    assert!(vt > 0.0 && vp > 0.0);
    assert!((vt - vp).abs() > 1e-3);
}
