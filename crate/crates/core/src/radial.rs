//! Radial inverse Fourier transforms in dimensions 1–3.
//!
//! For a radial symbol `A(2π|ξ|)` the inverse transform at radius `r` is
//!
//! ```text
//!   c_d ∫₀^∞ A(u) u^{d-1} j_d(u r) du,      c_d = |S^{d-1}| / (2π)^d,
//! ```
//!
//! with `j_d` the normalized spherical wave (`cos`, `J₀`, `sinc`). The
//! integral is split into cycles between consecutive zeros of `j_d(u r)`,
//! each cycle is integrated with adaptive Gauss–Kronrod, and long alternating
//! cycle sequences are summed with Wynn's epsilon algorithm.

use crate::error::{Error, Result};
use crate::params::sphere_area;
use crate::quad::{adaptive, wynn_epsilon, Estimate};
use crate::special::{sphere_wave, sphere_wave_zero};

/// Cycle counts above this switch from direct summation to extrapolation.
const DIRECT_CYCLES: usize = 3000;
/// Hard cap on the number of cycles in the extrapolated regime.
const MAX_CYCLES: usize = 200_000;
const MIN_EXTRAPOLATION_CYCLES: usize = 12;
const WYNN_WINDOW: usize = 40;

/// Integration range of the frequency amplitude.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Extent {
    /// Amplitude vanishes outside `[lo, hi]`.
    Compact { lo: f64, hi: f64 },
    /// Amplitude is integrated on `[0, cutoff]`; `tail` bounds the absolute
    /// contribution of `[cutoff, ∞)` to the (unnormalized) integral.
    Decaying { cutoff: f64, tail: f64 },
}

pub(crate) fn normalization(dim: usize) -> f64 {
    sphere_area(dim) / (2.0 * std::f64::consts::PI).powi(dim as i32)
}

/// Breakpoints of the first-level partition of `[lo, hi]`: zeros of the
/// oscillatory factor, caller knots, and a width cap that grows with `u`.
fn breakpoints(dim: usize, r: f64, lo: f64, hi: f64, knots: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(knots.iter().copied().filter(|&k| k > lo && k < hi));
    if r > 0.0 {
        let mut k = 1;
        loop {
            let u = sphere_wave_zero(dim, k) / r;
            if u >= hi {
                break;
            }
            if u > lo {
                pts.push(u);
            }
            k += 1;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        out.push(a);
        // keep panels no wider than max(0.5, a/2) so amplitude structure is resolved
        let mut x = a;
        loop {
            let cap = (0.5 * x).max(0.5);
            if b - x <= cap * 1.0001 {
                break;
            }
            x += cap;
            out.push(x);
        }
    }
    out.push(*pts.last().expect("nonempty"));
    out
}

fn integrate_panels<F: Fn(f64) -> f64>(f: &F, pts: &[f64], tol: f64) -> Estimate {
    let n = (pts.len() - 1).max(1);
    let per_panel = 0.5 * tol / n as f64;
    let mut total = Estimate::default();
    for (i, w) in pts.windows(2).enumerate() {
        // the panel touching the origin may carry an algebraic cusp
        let limit = if i == 0 { 400 } else { 40 };
        total += adaptive(f, w[0], w[1], per_panel, limit).estimate;
    }
    total
}

/// Evaluate `c_d ∫ A(u) u^{d-1} j_d(u r) du` to absolute error `tol`.
pub(crate) fn radial_transform<A>(
    dim: usize,
    r: f64,
    amp: A,
    extent: Extent,
    knots: &[f64],
    tol: f64,
) -> Result<Estimate>
where
    A: Fn(f64) -> f64,
{
    let cd = normalization(dim);
    let inner_tol = tol / cd;
    let power = (dim - 1) as i32;
    let integrand = |u: f64| amp(u) * u.powi(power) * sphere_wave(dim, u * r);

    let (lo, hi, tail) = match extent {
        Extent::Compact { lo, hi } => (lo, hi, 0.0),
        Extent::Decaying { cutoff, tail } => (0.0, cutoff, tail),
    };
    let cycles = (hi - lo) * r / std::f64::consts::PI;
    let accelerate = matches!(extent, Extent::Decaying { .. }) && cycles > DIRECT_CYCLES as f64;

    let est = if !accelerate {
        let pts = breakpoints(dim, r, lo, hi, knots);
        let mut est = integrate_panels(&integrand, &pts, 0.5 * inner_tol);
        est.err += tail;
        est
    } else {
        extrapolated(dim, r, &integrand, hi, knots, inner_tol)?
    };

    let out = est.scaled(cd);
    if !(out.err <= tol) {
        return Err(Error::QuadratureBudget {
            tol,
            estimate: out.err,
            context: format!("radial transform d={dim} r={r}"),
        });
    }
    Ok(out)
}

fn extrapolated<F: Fn(f64) -> f64>(
    dim: usize,
    r: f64,
    integrand: &F,
    hi: f64,
    knots: &[f64],
    tol: f64,
) -> Result<Estimate> {
    // cycle k covers [z_{k-1}/r, z_k/r] with z_0 = 0
    let mut partial = Vec::new();
    let mut quad_err = 0.0;
    let mut sum = 0.0;
    let mut lo = 0.0;
    let mut last_extrap: Option<f64> = None;
    let mut stable = 0;
    let mut best = (f64::NAN, f64::INFINITY);
    for k in 1..=MAX_CYCLES {
        let z = (sphere_wave_zero(dim, k) / r).min(hi);
        let pts = breakpoints(dim, 0.0, lo, z, knots);
        let cyc = integrate_panels(integrand, &pts, 0.05 * tol);
        sum += cyc.value;
        quad_err += cyc.err;
        partial.push(sum);
        lo = z;
        if z >= hi {
            return Ok(Estimate {
                value: sum,
                err: quad_err,
            });
        }
        if partial.len() >= MIN_EXTRAPOLATION_CYCLES {
            let start = partial.len().saturating_sub(WYNN_WINDOW);
            if let Some((v, e)) = wynn_epsilon(&partial[start..]) {
                let drift = last_extrap.map_or(f64::INFINITY, |p| (v - p).abs());
                let err = e.max(drift);
                if err < best.1 {
                    best = (v, err);
                }
                if err + quad_err < 0.5 * tol {
                    stable += 1;
                    if stable >= 2 {
                        return Ok(Estimate {
                            value: v,
                            err: err + quad_err,
                        });
                    }
                } else {
                    stable = 0;
                }
                last_extrap = Some(v);
            }
        }
    }
    Err(Error::QuadratureBudget {
        tol,
        estimate: best.1 + quad_err,
        context: format!("extrapolated radial transform d={dim} r={r} after {MAX_CYCLES} cycles"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_symbol_in_one_dimension() {
        // (1/π) ∫ e^{-u²} cos(u r) du = e^{-r²/4} / (2√π)
        for &r in &[0.0, 0.5, 3.0, 10.0] {
            let est = radial_transform(
                1,
                r,
                |u: f64| (-u * u).exp(),
                Extent::Decaying { cutoff: 7.0, tail: 1e-22 },
                &[],
                1e-14,
            )
            .unwrap();
            let exact = (-r * r / 4.0).exp() / (2.0 * PI.sqrt());
            assert!((est.value - exact).abs() < 1e-14, "r={r}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn breakpoints_cover_range_in_order() {
        let pts = breakpoints(2, 3.0, 0.0, 20.0, &[1.234]);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 20.0);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.contains(&1.234));
    }
}
