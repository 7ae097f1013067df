use std::f64::consts::PI;

use fracbern::positivity::*;
use fracbern::spectral::{make_bump, BumpKind};
use fracbern::FractionalParams;

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn spec(alpha: f64, dim: usize, eps: f64) -> PerturbedKernelSpec {
    PerturbedKernelSpec::new(FractionalParams::new(alpha, dim, 1.0).unwrap(), eps).unwrap()
}

#[test]
fn perturbation_matches_direct_cosine_transform() {
    let phi1 = make_bump(BumpKind::PerturbPhi1);
    for &(alpha, eps, t) in &[(0.5, 0.3, 1.0), (1.5, 0.05, 0.25)] {
        let s = spec(alpha, 1, eps);
        for &r in &[0.0, 0.7, 3.0, 11.5] {
            let amp = |u: f64| (-t * u.powf(alpha)).exp() * ((-eps * t * phi1.eval(u / (2.0 * PI))).exp() - 1.0);
            // u = v² removes the algebraic cusp of u^α at the origin
            let exact = simpson(|v| 2.0 * v * amp(v * v) * (v * v * r).cos(), 0.0, (2.0 * PI / 3.0).sqrt(), 4000) / PI;
            let v = eval_f_eps(&s, t, r, 1e-12).unwrap();
            assert!((v.value - exact).abs() < 1e-11, "alpha={alpha} r={r}: {} vs {exact}", v.value);
        }
    }
}

#[test]
fn kernel_at_origin_is_the_symbol_integral() {
    let phi1 = make_bump(BumpKind::PerturbPhi1);
    let (alpha, eps, t) = (1.0, 0.4, 0.5);
    let s = spec(alpha, 1, eps);
    // e^{-tu} tail beyond u = 80 is below 1e-17
    let exact = simpson(|u| (-t * (u.powf(alpha) + eps * phi1.eval(u / (2.0 * PI)))).exp(), 0.0, 80.0, 80_000) / PI;
    let v = eval_k_eps(&s, t, 0.0, 1e-11).unwrap();
    assert!((v.value - exact).abs() < 1e-10, "{} vs {exact}", v.value);
}

#[test]
fn certificate_accepts_zero_and_rejects_large_perturbations() {
    let grids = CertificateGrids { t: vec![0.5, 1.0], r_abs_max: 32.0, ..CertificateGrids::default() };
    let zero = certify_positivity(&spec(1.0, 1, 0.0), &grids).unwrap();
    assert!(zero.is_positive());
    assert!(zero.min_relative_margin > 0.99);
    let big = certify_positivity(&spec(1.0, 1, 1.0), &grids).unwrap();
    assert!(!big.is_positive());
    assert!(!big.worst.is_empty());
    // the worst offender really is a point where k_ε is small relative to p
    let w = big.worst[0];
    assert!(w.margin < zero.min_margin);
}

#[test]
fn certified_kernel_has_mass_exp_minus_eps_t() {
    let s = spec(0.5, 1, 0.2);
    let grids = CertificateGrids { t: vec![1.0], ..CertificateGrids::default() };
    assert!(certify_positivity(&s, &grids).unwrap().is_positive());
    let m = k_eps_l1(&s, 1.0, 1e-6).unwrap();
    assert!((m.value - (-0.2f64).exp()).abs() < 2e-6, "{} ± {:e}", m.value, m.err);
}

#[test]
fn band_kernel_mass_exceeds_one_at_time_zero() {
    // ‖𝓕⁻¹ψ‖₁ on the line by a direct double quadrature
    let phi = make_bump(BumpKind::LpPhi);
    let g = |x: f64| 2.0 * simpson(|xi| phi.band(xi) * (2.0 * PI * xi * x).cos(), 0.5, 2.0, 600);
    let direct = 2.0 * simpson(|x| g(x).abs(), 0.0, 24.0, 24_000);
    let est = banded_kernel_l1(1.0, 1, 0.0, 1e-7).unwrap();
    assert!((est.value - direct).abs() < 1e-5, "{} vs {direct}", est.value);
    assert!(est.value - est.err > 1.0);
    let later = banded_kernel_l1(1.0, 1, 1.0, 1e-7).unwrap();
    assert!(later.value < 0.1);
}
