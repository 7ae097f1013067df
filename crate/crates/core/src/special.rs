//! Special functions used by the radial transforms and lattice sums.

use std::f64::consts::PI;

/// Radial profile of the Fourier transform of the unit sphere measure,
/// normalized to 1 at the origin: `cos z` (d=1), `J₀(z)` (d=2), `sin z / z` (d=3).
#[inline]
pub fn sphere_wave(dim: usize, z: f64) -> f64 {
    match dim {
        1 => z.cos(),
        2 => libm::j0(z),
        3 => {
            if z.abs() < 1e-4 {
                let z2 = z * z;
                1.0 - z2 / 6.0 + z2 * z2 / 120.0
            } else {
                z.sin() / z
            }
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// The `k`-th positive zero (k ≥ 1) of [`sphere_wave`].
pub fn sphere_wave_zero(dim: usize, k: usize) -> f64 {
    debug_assert!(k >= 1);
    let kf = k as f64;
    match dim {
        1 => (kf - 0.5) * PI,
        2 => bessel_j0_zero(k),
        3 => kf * PI,
        _ => unreachable!("dimension checked by caller"),
    }
}

/// `k`-th positive zero of `J₀`: McMahon's expansion refined by Newton steps.
pub fn bessel_j0_zero(k: usize) -> f64 {
    let beta = (k as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut x = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120_928.0 / (15.0 * b8.powi(5));
    for _ in 0..4 {
        let j1 = libm::j1(x);
        if j1 == 0.0 {
            break;
        }
        let step = libm::j0(x) / j1;
        x += step;
        if step.abs() < 1e-15 * x {
            break;
        }
    }
    x
}

/// Hurwitz zeta `ζ(s, a) = Σ_{j≥0} (a + j)^{-s}` for `s > 1`, `a > 0`,
/// by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta requires s > 1, a > 0");
    // B_{2k}/(2k)!
    const B2K_OVER_FACT: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let m = 12usize;
    let mut sum = 0.0;
    for j in 0..m {
        sum += (a + j as f64).powf(-s);
    }
    let x = a + m as f64;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) times x^{-s-2k+1}
    let mut poch = s;
    let mut xp = x.powf(-s - 1.0);
    for (k, c) in B2K_OVER_FACT.iter().enumerate() {
        let term = c * poch * xp;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let kk = (k + 1) as f64;
        poch *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
        xp /= x * x;
    }
    sum
}
