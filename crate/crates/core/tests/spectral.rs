use std::f64::consts::PI;

use fracbern::spectral::*;
use fracbern::FractionalParams;
use proptest::prelude::*;

/// Real grid function from a seed vector of sample values.
fn real_grid(dim: usize, box_len: f64, n: usize, samples: &[f64]) -> GridFunction {
    let values = (0..n.pow(dim as u32)).map(|i| Complex64::new(samples[i % samples.len()], 0.0)).collect();
    GridFunction::new(dim, box_len, n, values, true).unwrap()
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_property(s in samples(), alpha in 0.2f64..2.0, t1 in 0.0f64..0.05, t2 in 0.0f64..0.05) {
        let f = real_grid(1, 1.0, 64, &s);
        let two_steps = apply_multiplier(&apply_multiplier(&f, &SpectralMultiplier::semigroup(alpha, t1)),
            &SpectralMultiplier::semigroup(alpha, t2));
        let one_step = apply_multiplier(&f, &SpectralMultiplier::semigroup(alpha, t1 + t2));
        prop_assert!(max_abs_diff(&two_steps, &one_step) < 1e-13);
        prop_assert!(two_steps.is_real());
    }

    #[test]
    fn plancherel(s in samples(), box_len in 0.5f64..5.0) {
        let f = real_grid(2, box_len, 8, &s);
        let c = f.coefficients();
        let spectral: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() * f.volume();
        let physical = lebesgue_norm(&f, 2.0).unwrap().powi(2);
        prop_assert!((spectral - physical).abs() < 1e-12 * physical.max(1e-300));
    }

    #[test]
    fn littlewood_paley_pieces_add_up(s in samples(), j in 0u32..3) {
        let f = real_grid(1, 4.0, 64, &s);
        let n = 2f64.powi(j as i32);
        let low = lp_project(&f, n, Projection::Low).unwrap();
        let high = lp_project(&f, n, Projection::High).unwrap();
        prop_assert!(max_abs_diff(&low.add(&high).unwrap(), &f) < 1e-13);
        if j > 0 {
            let coarse = lp_project(&f, n / 2.0, Projection::Low).unwrap();
            let band = lp_project(&f, n, Projection::Band).unwrap();
            prop_assert!(max_abs_diff(&coarse.add(&band).unwrap(), &low) < 1e-13);
        }
    }

    #[test]
    fn band_projection_lives_on_its_annulus(s in samples(), j in 0u32..3) {
        let f = real_grid(1, 4.0, 64, &s);
        let n = 2f64.powi(j as i32);
        let g = lp_project(&f, n, Projection::Band).unwrap();
        let annulus = FrequencyAnnulus::band(n);
        for (idx, c) in g.coefficients().iter().enumerate() {
            if !annulus.contains(g.frequency_norm(idx)) {
                prop_assert_eq!(c.norm(), 0.0);
            }
        }
    }

    #[test]
    fn maximal_function_dominates_and_matches_direct_averages(s in samples(), center in 0usize..64) {
        let f = real_grid(1, 2.0, 64, &s);
        let m = maximal_function(&f);
        for (mv, v) in m.values().iter().zip(f.values()) {
            prop_assert!(mv.re >= v.norm() - 1e-14);
        }
        let direct = maximal_radii(&f).into_iter().map(|r| ball_average(&f, center, r)).fold(f.values()[center].norm(), f64::max);
        prop_assert!((m.values()[center].re - direct).abs() < 1e-12);
    }

    #[test]
    fn serialization_round_trips(s in samples(), dim in 1usize..3, real in any::<bool>()) {
        let mut f = real_grid(dim, 3.0, 8, &s);
        if !real {
            f = f.zip_with(&f, |a, _| Complex64::new(a.re, 0.5 * a.re), false).unwrap();
        }
        let back = GridFunction::from_bytes(&f.to_bytes()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn bernstein_pairing_is_positive_on_band_limited_data(s in samples(), alpha in 0.3f64..2.0, q in 1.2f64..6.0) {
        let f = real_grid(1, 4.0, 64, &s);
        let params = FractionalParams::new(alpha, 1, 1.0).unwrap();
        let g = lp_project(&f, 2.0, Projection::Band).unwrap();
        prop_assume!(g.sup_norm() > 1e-6);
        prop_assert!(bernstein_pairing(&f, 2.0, &params, q).unwrap() > 0.0);
    }

    #[test]
    fn signed_power_is_odd_and_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0, q in 1.0f64..5.0) {
        prop_assert_eq!(signed_power(-a, q), -signed_power(a, q));
        if a < b {
            prop_assert!(signed_power(a, q) <= signed_power(b, q));
        }
    }
}

#[test]
fn fractional_laplacian_scales_a_single_mode() {
    for &alpha in &[0.5, 1.0, 1.7, 2.0] {
        for &(dim, box_len) in &[(1usize, 1.0), (2, 2.0)] {
            let k = 3.0;
            let f = GridFunction::from_real_fn(dim, box_len, 32, |x| (2.0 * PI * k * x[0] / box_len).cos()).unwrap();
            let g = apply_multiplier(&f, &SpectralMultiplier::fractional_laplacian(alpha));
            let lambda = (2.0 * PI * k / box_len).powf(alpha);
            assert!(max_abs_diff(&g, &f.scale(lambda)) < 1e-11 * lambda);
        }
    }
}

#[test]
fn pairing_at_q_two_is_the_energy() {
    // ∫ (|∇|^α f) f = Σ (2π|k|)^α |c_k|² on the unit circle
    let f = GridFunction::from_real_fn(1, 1.0, 64, |x| (2.0 * PI * x[0]).sin() + 0.5 * (6.0 * PI * x[0]).cos()).unwrap();
    let h = apply_multiplier(&f, &SpectralMultiplier::fractional_laplacian(1.5));
    let energy = 2.0 * (0.25 * (2.0 * PI).powf(1.5) + 0.0625 * (6.0 * PI).powf(1.5));
    assert!((weighted_pairing(&h, &f, 2.0).unwrap() - energy).abs() < 1e-10 * energy);
}

#[test]
fn projections_reject_scales_near_nyquist() {
    let f = GridFunction::zeros(1, 1.0, 32).unwrap();
    assert!(lp_project(&f, 8.0, Projection::Band).is_ok());
    assert!(matches!(lp_project(&f, 16.0, Projection::Band), Err(fracbern::Error::BeyondNyquist { .. })));
    assert!(lp_project(&f, 3.0, Projection::Band).is_err());
}

#[test]
fn littlewood_paley_symbol_is_radial() {
    let m = SpectralMultiplier::littlewood_paley(2.0, Projection::Band);
    assert!(m.is_radial_on(3, &[1.3, 2.5, 3.0], 1e-12));
    let skew = SpectralMultiplier::new("skew", |xi: &[f64]| Complex64::new(xi[0].abs(), 0.0));
    assert!(!skew.is_radial_on(2, &[1.0], 1e-12));
    let bump = make_bump(BumpKind::LpPhi);
    assert_eq!(bump.band(0.4), 0.0);
    assert_eq!(bump.band(1.0), 1.0);
    assert_eq!(smooth_step(0.5), 0.5);
}
