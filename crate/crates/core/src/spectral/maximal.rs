//! Discrete centered Hardy–Littlewood maximal function on the periodic grid.

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use super::grid::{fft_nd, GridFunction};
use crate::params::MAX_DIM;

/// Ball radii `L·2^{-j}`, `j = 1..log₂n − 1`.
pub fn maximal_radii(f: &GridFunction) -> Vec<f64> {
    let levels = f.n().trailing_zeros() as i32;
    (1..levels).map(|j| f.box_len() * 2f64.powi(-j)).collect()
}

/// Indicator of the periodic ball `{x : |x|_per ≤ radius}` and its cardinality.
fn ball_indicator(f: &GridFunction, radius: f64) -> (Vec<Complex64>, usize) {
    let n = f.n();
    let h = f.box_len() / n as f64;
    let mut count = 0;
    let ind = (0..f.len())
        .map(|idx| {
            let mut rem = idx;
            let mut dist2 = 0.0;
            for _ in 0..f.dim() {
                let j = rem % n;
                rem /= n;
                let k = j.min(n - j) as f64 * h;
                dist2 += k * k;
            }
            if dist2 <= radius * radius * (1.0 + 1e-12) {
                count += 1;
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
        .collect();
    (ind, count)
}

/// `(Mf)(x_j) = max(|f(x_j)|, max_ρ avg_{B(x_j, ρ)} |f|)` over [`maximal_radii`].
pub fn maximal_function(f: &GridFunction) -> GridFunction {
    let (dim, n) = (f.dim(), f.n());
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut spectrum: Vec<Complex64> = abs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut spectrum, dim, n, FftDirection::Forward);
    let mut best = abs.clone();
    for radius in maximal_radii(f) {
        let (mut ind, count) = ball_indicator(f, radius);
        fft_nd(&mut ind, dim, n, FftDirection::Forward);
        let scale = 1.0 / (count as f64 * f.len() as f64);
        for (a, b) in ind.iter_mut().zip(&spectrum) {
            *a *= b * scale;
        }
        fft_nd(&mut ind, dim, n, FftDirection::Inverse);
        for (m, v) in best.iter_mut().zip(&ind) {
            *m = m.max(v.re);
        }
    }
    let values = best.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    GridFunction::new(dim, f.box_len(), n, values, true).expect("shape copied from a valid grid")
}

/// Direct ball average of `|f|` around sample `center`, used as a reference.
pub fn ball_average(f: &GridFunction, center: usize, radius: f64) -> f64 {
    let n = f.n();
    let h = f.box_len() / n as f64;
    let mut c = [0usize; MAX_DIM];
    let mut rem = center;
    for axis in (0..f.dim()).rev() {
        c[axis] = rem % n;
        rem /= n;
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (idx, v) in f.values().iter().enumerate() {
        let mut rem = idx;
        let mut dist2 = 0.0;
        for axis in (0..f.dim()).rev() {
            let j = rem % n;
            rem /= n;
            let diff = (j + n - c[axis]) % n;
            let k = diff.min(n - diff) as f64 * h;
            dist2 += k * k;
        }
        if dist2 <= radius * radius * (1.0 + 1e-12) {
            sum += v.norm();
            count += 1;
        }
    }
    sum / count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_fixed() {
        let f = GridFunction::from_real_fn(2, 1.0, 16, |_| -3.0).unwrap();
        let m = maximal_function(&f);
        assert!(m.values().iter().all(|v| (v.re - 3.0).abs() < 1e-12));
    }

    #[test]
    fn fft_averages_match_direct_sums() {
        let f = GridFunction::from_real_fn(2, 1.0, 16, |x| (x[0] * 7.0).sin() + x[1]).unwrap();
        let m = maximal_function(&f);
        for center in [0, 17, 100, 255] {
            let direct = maximal_radii(&f)
                .into_iter()
                .map(|r| ball_average(&f, center, r))
                .fold(f.values()[center].norm(), f64::max);
            assert!((m.values()[center].re - direct).abs() < 1e-12);
        }
    }
}
