//! Adaptive Gauss–Kronrod quadrature and Wynn's epsilon extrapolation.

/// Value of a definite integral together with an estimate of its absolute error.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            err: self.err + rhs.err,
        }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        self.value += rhs.value;
        self.err += rhs.err;
    }
}

impl Estimate {
    pub fn scaled(self, s: f64) -> Estimate {
        Estimate {
            value: self.value * s,
            err: self.err * s.abs(),
        }
    }
}

// 21-point Kronrod abscissae (non-negative half, descending) and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_976_396_893,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights, paired with XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One application of the 21-point Gauss–Kronrod rule on `[a, b]`.
///
/// The error estimate follows the usual QUADPACK scaling of `|K21 − G10|`.
pub fn gk21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    Estimate { value, err }
}

/// Result of [`adaptive`]: the estimate and whether the target was met.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub estimate: Estimate,
    pub converged: bool,
    pub intervals: usize,
}

/// Globally adaptive bisection of `[a, b]` driven by the 21-point rule,
/// refining the worst interval until the summed error drops below `tol`.
pub fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Adaptive {
    let first = gk21(f, a, b);
    let mut parts: Vec<(f64, f64, Estimate)> = vec![(a, b, first)];
    let mut total = first;
    while total.err > tol && parts.len() < max_intervals {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.err.total_cmp(&y.1 .2.err))
            .expect("nonempty");
        let (lo, hi, est) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval collapsed to adjacent floats
            parts.push((lo, hi, est));
            break;
        }
        let left = gk21(f, lo, mid);
        let right = gk21(f, mid, hi);
        parts.push((lo, mid, left));
        parts.push((mid, hi, right));
        total = parts.iter().fold(Estimate::default(), |acc, p| acc + p.2);
    }
    // re-sum in interval order so the result does not depend on refinement history
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let estimate = parts.iter().fold(Estimate::default(), |acc, p| acc + p.2);
    Adaptive {
        converged: estimate.err <= tol,
        estimate,
        intervals: parts.len(),
    }
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Returns the best extrapolated limit and a crude error estimate taken
/// from the spread of the last diagonal entries.
pub fn wynn_epsilon(partial: &[f64]) -> Option<(f64, f64)> {
    let n = partial.len();
    if n < 3 {
        return None;
    }
    // eps[k] holds column k of the table for the current anti-diagonal sweep
    let mut prev2: Vec<f64> = vec![0.0; n + 1];
    let mut prev: Vec<f64> = partial.to_vec();
    let mut best: Vec<f64> = Vec::new();
    let mut col = 1;
    let mut even_cols: Vec<Vec<f64>> = vec![partial.to_vec()];
    while prev.len() > 1 {
        let mut next = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let diff = prev[i + 1] - prev[i];
            let base = if col == 1 { 0.0 } else { prev2[i + 1] };
            if diff == 0.0 || !diff.is_finite() {
                next.push(f64::INFINITY);
            } else {
                next.push(base + 1.0 / diff);
            }
        }
        prev2 = prev;
        prev = next;
        if col % 2 == 0 {
            if prev.iter().any(|v| !v.is_finite()) {
                break;
            }
            even_cols.push(prev.clone());
        }
        col += 1;
    }
    for c in &even_cols {
        if let Some(&last) = c.last() {
            best.push(last);
        }
    }
    // the deepest even column is usually the most accurate; estimate error
    // from its distance to the previous column
    let m = best.len();
    if m == 1 {
        let v = best[0];
        let e = (partial[n - 1] - partial[n - 2]).abs();
        return Some((v, e));
    }
    let v = best[m - 1];
    let e = (best[m - 1] - best[m - 2]).abs();
    Some((v, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        assert!((s - 2.0).abs() < 1e-14);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gk21_exact_for_polynomials() {
        // Kronrod part is exact to degree 31, Gauss part to degree 19
        for deg in 0..=31 {
            let f = |x: f64| x.powi(deg);
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let est = gk21(&f, -1.0, 1.0);
            assert!((est.value - exact).abs() < 1e-14, "degree {deg}");
        }
        for deg in (0..=19).step_by(2) {
            let mut g = 0.0;
            for j in 0..5 {
                g += 2.0 * WG[j] * XGK[2 * j + 1].powi(deg);
            }
            assert!((g - 2.0 / (deg as f64 + 1.0)).abs() < 1e-14, "gauss degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_cusp() {
        let f = |x: f64| x.sqrt();
        let r = adaptive(&f, 0.0, 1.0, 1e-13, 500);
        assert!(r.converged);
        assert!((r.estimate.value - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // log 2 = 1 - 1/2 + 1/3 - ...
        let mut partial = Vec::new();
        let mut s = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            partial.push(s);
        }
        let (v, _) = wynn_epsilon(&partial).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12, "{v}");
    }
}
