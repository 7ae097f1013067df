use fracbern::kernel::{
    check_two_sided_bound, eval_closed_form, eval_radial_numeric, far_field, l1_mass, ProbeGrid,
};
use fracbern::FractionalParams;
use std::f64::consts::PI;

fn params(alpha: f64, dim: usize, t: f64) -> FractionalParams {
    FractionalParams::new(alpha, dim, t).unwrap()
}

/// Convergent small-radius series, valid for 1 < α ≤ 2.
fn small_radius_series(alpha: f64, dim: usize, r: f64) -> f64 {
    let d = dim as f64;
    let pref = 1.0 / (2f64.powf(d - 1.0) * PI.powf(d / 2.0) * alpha);
    let mut sum = 0.0;
    for m in 0..120 {
        let mf = m as f64;
        let log_mag = 2.0 * mf * (r / 2.0).ln() + libm::lgamma((2.0 * mf + d) / alpha)
            - libm::lgamma(mf + 1.0)
            - libm::lgamma(mf + d / 2.0);
        let term = if r == 0.0 && m > 0 { 0.0 } else if m == 0 {
            (libm::lgamma(d / alpha) - libm::lgamma(d / 2.0)).exp()
        } else {
            log_mag.exp()
        };
        sum += if m % 2 == 0 { term } else { -term };
    }
    pref * sum
}

#[test]
fn numeric_matches_closed_forms() {
    for &alpha in &[1.0, 2.0] {
        for dim in 1..=3 {
            for &t in &[0.05, 0.3, 1.0, 4.0] {
                for &r in &[0.0, 0.01, 0.3, 1.0, 2.5, 7.0, 30.0] {
                    let p = params(alpha, dim, t);
                    let exact = eval_closed_form(&p, r).unwrap();
                    let v = eval_radial_numeric(&p, r, 1e-10).unwrap();
                    assert!(
                        (v.value - exact).abs() < 1e-9,
                        "alpha={alpha} d={dim} t={t} r={r}: {} vs {exact}",
                        v.value
                    );
                    assert!(v.abs_err <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn numeric_matches_small_radius_series() {
    for &alpha in &[1.25, 1.5, 1.8] {
        for dim in 1..=3 {
            for &r in &[0.0, 0.2, 0.7, 1.5] {
                let v = eval_radial_numeric(&params(alpha, dim, 1.0), r, 1e-11).unwrap();
                let s = small_radius_series(alpha, dim, r);
                assert!((v.value - s).abs() < 1e-10, "alpha={alpha} d={dim} r={r}: {} vs {s}", v.value);
            }
        }
    }
    // p(1,0) = Γ(1 + 1/α)/π in one dimension
    let v = eval_radial_numeric(&params(1.5, 1, 1.0), 0.0, 1e-12).unwrap();
    assert!((v.value - libm::tgamma(5.0 / 3.0) / PI).abs() < 1e-11);
}

#[test]
fn numeric_matches_far_field_series() {
    let mut checked = 0;
    for &alpha in &[0.5, 0.8, 1.3] {
        for dim in 1..=3 {
            for &r in &[40.0, 300.0, 5000.0] {
                let p = params(alpha, dim, 1.0);
                let ff = far_field(&p, r).unwrap();
                if ff.err > 1e-6 * ff.value.abs() {
                    continue;
                }
                let v = eval_radial_numeric(&p, r, 1e-6 * ff.value).unwrap();
                assert!(
                    (v.value - ff.value).abs() < 3e-6 * ff.value,
                    "alpha={alpha} d={dim} r={r}: {} vs {}",
                    v.value,
                    ff.value
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 15, "only {checked} far-field probes were in range");
}

#[test]
fn mass_is_one() {
    for &alpha in &[0.5, 1.0, 1.5, 2.0] {
        for dim in 1..=2 {
            for &t in &[0.1, 1.0] {
                let m = l1_mass(&params(alpha, dim, t), 1e-6).unwrap();
                eprintln!("alpha={alpha} d={dim} t={t}: {} ± {:e}", m.value, m.err);
                assert!((m.value - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn poisson_ratio_extremes() {
    let grid = ProbeGrid::standard(&[1.0]);
    let rep = check_two_sided_bound(&[params(1.0, 1, 1.0)], &grid).unwrap();
    assert!((rep.ratio_min - 1.0 / PI).abs() < 1e-4);
    assert!((rep.ratio_max - 2.0 / PI).abs() < 1e-4);
    let rep = check_two_sided_bound(&[params(0.5, 1, 1.0), params(1.5, 1, 1.0), params(1.5, 2, 1.0)], &ProbeGrid::standard(&[0.5, 1.5])).unwrap();
    eprintln!("{rep:?}");
    assert!(rep.certified_min > 0.0 && rep.certified_max.is_finite());
}
