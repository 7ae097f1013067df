//! The whole-space fractional heat kernel `p(t,x) = 𝓕⁻¹(e^{-t(2π|ξ|)^α})(x)`.
//!
//! Numerical evaluation reduces to `t = 1` through the scaling identity
//! `p(t,x) = t^{-d/α} p(1, t^{-1/α}x)` and then runs the radial
//! oscillatory quadrature of [`crate::radial`]. Every value carries an
//! absolute error estimate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{sphere_area, FractionalParams};
use crate::quad::{adaptive, Estimate};
use crate::radial::{normalization, radial_transform, Extent};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialKernelValue {
    pub r: f64,
    pub value: f64,
    pub abs_err: f64,
}

impl RadialKernelValue {
    /// Certified lower end of the value interval.
    pub fn lower(&self) -> f64 {
        self.value - self.abs_err
    }

    pub fn upper(&self) -> f64 {
        self.value + self.abs_err
    }
}

/// Exact kernel for the Gaussian (α = 2) and Poisson (α = 1) cases.
pub fn eval_closed_form(params: &FractionalParams, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::InvalidParams(format!("radius must be nonnegative, got {r}")));
    }
    let d = params.dim as f64;
    let t = params.t;
    if params.alpha == 2.0 {
        Ok((4.0 * PI * t).powf(-d / 2.0) * (-r * r / (4.0 * t)).exp())
    } else if params.alpha == 1.0 {
        let c = libm::tgamma((d + 1.0) / 2.0) * PI.powf(-(d + 1.0) / 2.0);
        Ok(c * t / (t * t + r * r).powf((d + 1.0) / 2.0))
    } else {
        Err(Error::Unsupported(format!(
            "closed form exists only for alpha in {{1, 2}}, got {}",
            params.alpha
        )))
    }
}

/// Bound on `∫_U^∞ e^{-u^α} u^{d-1} du = Γ(d/α, U^α)/α`.
fn symbol_tail_bound(alpha: f64, dim: usize, cutoff: f64) -> f64 {
    let a = dim as f64 / alpha;
    let x = cutoff.powf(alpha);
    let base = x.powf(a - 1.0) * (-x).exp() / alpha;
    if a <= 1.0 {
        base
    } else if x > 2.0 * (a - 1.0) {
        base * x / (x - (a - 1.0))
    } else {
        f64::INFINITY
    }
}

/// Smallest cutoff `U` for which the symbol tail beyond `U` is below `eps`.
fn symbol_cutoff(alpha: f64, dim: usize, eps: f64) -> (f64, f64) {
    let mut u = 1.0;
    loop {
        let b = symbol_tail_bound(alpha, dim, u);
        if b < eps || u > 1e12 {
            return (u, b);
        }
        u *= 1.1;
    }
}

/// Evaluate `p(t, r)` by radial quadrature to absolute error `tol`.
///
/// When rounding in the oscillatory sum keeps the quadrature from reaching
/// `tol` at large radius, the far-field expansion is used instead if its own
/// error estimate meets the tolerance.
pub fn eval_radial_numeric(
    params: &FractionalParams,
    r: f64,
    tol: f64,
) -> Result<RadialKernelValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("radius must be nonnegative, got {r}")));
    }
    params.require_dim_supported()?;
    let alpha = params.alpha;
    let dim = params.dim;
    let scale = params.t.powf(-(dim as f64) / alpha);
    let r1 = r * params.t.powf(-1.0 / alpha);
    let tol1 = tol / scale;

    let cd = normalization(dim);
    let (cutoff, tail) = symbol_cutoff(alpha, dim, 0.05 * tol1 / cd);
    let quad = radial_transform(
        dim,
        r1,
        |u: f64| (-u.powf(alpha)).exp(),
        Extent::Decaying { cutoff, tail },
        &[],
        tol1,
    );
    // far out, cancellation puts a floor under the quadrature error; the
    // far-field series is then both cheaper and more accurate
    let quad = match quad {
        Err(Error::QuadratureBudget { .. }) if r1 > 0.0 => {
            match far_field(&FractionalParams { alpha, dim, t: 1.0 }, r1) {
                Some(ff) if ff.err <= tol1 => Ok(ff),
                _ => quad,
            }
        }
        other => other,
    };
    let est = quad.map_err(|e| match e {
        Error::QuadratureBudget { estimate, context, .. } => Error::QuadratureBudget {
            tol,
            estimate: estimate * scale,
            context: format!("kernel alpha={alpha} d={dim} t={} r={r}: {context}", params.t),
        },
        other => other,
    })?;
    Ok(RadialKernelValue {
        r,
        value: est.value * scale,
        abs_err: est.err * scale,
    })
}

/// Coefficients `(a_k, s_k)` of the large-`|x|` expansion
/// `p(t,x) ~ Σ_k a_k t^k |x|^{-s_k}`, `s_k = kα + d`.
///
/// The series converges for α < 1 and is asymptotic for 1 ≤ α < 2;
/// all coefficients vanish for α = 2.
pub fn far_field_coefficients(alpha: f64, dim: usize, terms: usize) -> Vec<(f64, f64)> {
    let d = dim as f64;
    (1..=terms)
        .map(|k| {
            let kf = k as f64;
            let half = kf * alpha / 2.0;
            let s = (half * PI).sin();
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let log_mag = kf * alpha * 2f64.ln() - (d / 2.0 + 1.0) * PI.ln()
                - libm::lgamma(kf + 1.0)
                + libm::lgamma(kf * alpha / 2.0 + 1.0)
                + libm::lgamma((kf * alpha + d) / 2.0);
            let a = if (half - half.round()).abs() < 1e-12 { 0.0 } else { sign * s * log_mag.exp() };
            (a, kf * alpha + d)
        })
        .collect()
}

const FAR_FIELD_TERMS: usize = 60;

/// Sum a sequence of nonzero-or-zero terms as an asymptotic series:
/// stop at the smallest term, report that term as the error.
pub(crate) fn sum_asymptotic(terms: impl Iterator<Item = f64>) -> Estimate {
    let mut sum = 0.0;
    let mut last_mag = f64::INFINITY;
    for term in terms {
        if term == 0.0 {
            continue;
        }
        let mag = term.abs();
        if mag > last_mag {
            return Estimate { value: sum, err: last_mag };
        }
        sum += term;
        last_mag = mag;
        if mag <= 1e-17 * sum.abs() {
            return Estimate { value: sum, err: mag };
        }
    }
    Estimate { value: sum, err: last_mag }
}

/// Far-field expansion of `p(t, r)`; `None` for the Gaussian.
pub fn far_field(params: &FractionalParams, r: f64) -> Option<Estimate> {
    if params.alpha >= 2.0 || r <= 0.0 {
        return None;
    }
    let coeffs = far_field_coefficients(params.alpha, params.dim, FAR_FIELD_TERMS);
    let t = params.t;
    Some(sum_asymptotic(
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &(a, s))| a * t.powi(i as i32 + 1) * r.powf(-s)),
    ))
}

/// `∫_{|x|>R} p(t,x) dx` from the far-field expansion, for α < 2.
fn far_field_mass(params: &FractionalParams, radius: f64) -> Option<Estimate> {
    if params.alpha >= 2.0 {
        return None;
    }
    let area = sphere_area(params.dim);
    let coeffs = far_field_coefficients(params.alpha, params.dim, FAR_FIELD_TERMS);
    let t = params.t;
    let d = params.dim as f64;
    let est = sum_asymptotic(coeffs.iter().enumerate().map(|(i, &(a, s))| {
        let kalpha = s - d;
        area * a * t.powi(i as i32 + 1) * radius.powf(-kalpha) / kalpha
    }));
    Some(est)
}

/// Mass of the kernel outside the ball of radius `R`.
pub(crate) fn outer_mass(params: &FractionalParams, radius: f64) -> Option<Estimate> {
    if params.alpha < 2.0 {
        return far_field_mass(params, radius);
    }
    // Gaussian: P(|X| > R) ≤ bound via the radial density at R
    let d = params.dim as f64;
    let s = radius / (4.0 * params.t).sqrt();
    let bound = (-s * s).exp() * (s.powf(d - 2.0) + s.powf(d)) * 2.0;
    Some(Estimate { value: 0.0, err: bound })
}

/// Integrate `|x| ↦ ω_d r^{d-1} f(r)` over `[0, R]` with geometric panels.
/// `f` returns a value with its own absolute error; the node errors are
/// folded into the result through `inner_err_bound`.
pub(crate) fn radial_mass<F>(
    f: F,
    length_scale: f64,
    radius: f64,
    dim: usize,
    tol: f64,
) -> Result<Estimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let area = sphere_area(dim);
    let power = (dim - 1) as i32;
    let mut edges = vec![0.0];
    let mut x = 0.25 * length_scale;
    while x < radius {
        edges.push(x);
        x *= 2.0;
    }
    edges.push(radius);
    let panel_tol = tol / edges.len() as f64;
    let parts: Vec<Result<Estimate>> = edges
        .par_windows(2)
        .map(|w| {
            let failure = std::sync::Mutex::new(None);
            let g = |r: f64| match f(r) {
                Ok(v) => area * r.powi(power) * v,
                Err(e) => {
                    failure.lock().expect("poisoned").get_or_insert(e);
                    f64::NAN
                }
            };
            let res = adaptive(&g, w[0], w[1], panel_tol, 200);
            if let Some(e) = failure.into_inner().expect("poisoned") {
                return Err(e);
            }
            if !res.converged {
                return Err(Error::QuadratureBudget {
                    tol: panel_tol,
                    estimate: res.estimate.err,
                    context: format!("radial mass on [{}, {}]", w[0], w[1]),
                });
            }
            Ok(res.estimate)
        })
        .collect();
    let mut total = Estimate::default();
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// `∫_{ℝ^d} p(t,x) dx`, computed from the radial quadrature plus a far-field
/// extrapolation of the tail. The result must be within `tol` of 1.
pub fn l1_mass(params: &FractionalParams, tol: f64) -> Result<Estimate> {
    params.require_dim_supported()?;
    let scale = params.t.powf(1.0 / params.alpha);
    // radius where the tail extrapolation is accurate enough
    let mut radius = 4.0 * scale;
    let tail = loop {
        match outer_mass(params, radius) {
            Some(est) if est.err < 0.05 * tol && est.err.is_finite() => break est,
            _ => {}
        }
        radius *= 2.0;
        if radius > 1e7 * scale {
            return Err(Error::QuadratureBudget {
                tol,
                estimate: f64::INFINITY,
                context: "kernel tail extrapolation did not converge".into(),
            });
        }
    };
    let area = sphere_area(params.dim);
    let dim = params.dim;
    // inner tolerance ~ η tol / (ω_d (s+r)^d) keeps ∫ inner_err r^{d-1} dr ≲ η tol log(R/s)
    let eta = 0.01;
    let inner_tol = |r: f64| eta * tol * scale / (area * (scale + r).powi(dim as i32));
    let body = radial_mass(
        |r| eval_radial_numeric(params, r, inner_tol(r)).map(|v| v.value),
        scale,
        radius,
        dim,
        0.5 * tol,
    )?;
    let inner = eta * tol * (1.0 + radius / scale).ln();
    let total = Estimate {
        value: body.value + tail.value,
        err: body.err + tail.err + inner,
    };
    if (total.value - 1.0).abs() > tol + total.err {
        return Err(Error::Certificate(format!(
            "kernel mass {} differs from 1 by more than {tol:e}",
            total.value
        )));
    }
    Ok(total)
}

/// A point of a two-sided-bound probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub alpha: f64,
    pub dim: usize,
    pub t: f64,
    pub r: f64,
}

/// `(t, r)` grid for [`check_two_sided_bound`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
}

impl ProbeGrid {
    /// `t` log-spaced over `[t_min, t_max]`, `r` = 0 plus log-spaced radii up to `r_max`.
    pub fn log_spaced(t_min: f64, t_max: f64, nt: usize, r_max: f64, nr: usize) -> Self {
        let t = geomspace(t_min, t_max, nt);
        let mut r = vec![0.0];
        r.extend(geomspace(r_max * 1e-5, r_max, nr));
        Self { t, r }
    }

    /// The standard probe: `t ∈ [0.1, 1]`, `r ∈ [0, 50]`, with the diagonal
    /// `r = t^{1/α}` included for every probed exponent.
    pub fn standard(alphas: &[f64]) -> Self {
        let mut grid = Self::log_spaced(0.1, 1.0, 7, 50.0, 160);
        for &a in alphas {
            for &t in &grid.t.clone() {
                grid.r.push(t.powf(1.0 / a));
            }
        }
        grid.r.sort_by(f64::total_cmp);
        grid.r.dedup();
        grid
    }
}

pub(crate) fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `max(ratio_max, 1/ratio_min)`.
    pub c1_hat: f64,
    pub worst_point: ProbePoint,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub argmin: ProbePoint,
    pub argmax: ProbePoint,
    /// Extremes of the interval-certified ratio (error subtracted / added).
    pub certified_min: f64,
    pub certified_max: f64,
}

/// Power-law envelope `t / (t^{1/α} + r)^{d+α}`.
pub fn power_envelope(alpha: f64, dim: usize, t: f64, r: f64) -> f64 {
    t / (t.powf(1.0 / alpha) + r).powf(dim as f64 + alpha)
}

/// Measure `ρ(t,r) = p(t,r)(t^{1/α}+r)^{d+α}/t` over the grid for every
/// `(α, d)` in `params`.
pub fn check_two_sided_bound(params: &[FractionalParams], grid: &ProbeGrid) -> Result<BoundReport> {
    if params.is_empty() || grid.t.is_empty() || grid.r.is_empty() {
        return Err(Error::InvalidParams("empty probe grid".into()));
    }
    for p in params {
        p.require_subgaussian("the two-sided power-law kernel bound")?;
        p.require_dim_supported()?;
    }
    let points: Vec<ProbePoint> = params
        .iter()
        .flat_map(|p| {
            grid.t.iter().flat_map(move |&t| {
                grid.r.iter().map(move |&r| ProbePoint { alpha: p.alpha, dim: p.dim, t, r })
            })
        })
        .collect();
    let ratios: Vec<Result<(f64, f64, f64)>> = points
        .par_iter()
        .map(|pt| {
            let fp = FractionalParams::new(pt.alpha, pt.dim, pt.t)?;
            let env = power_envelope(pt.alpha, pt.dim, pt.t, pt.r);
            let v = eval_radial_numeric(&fp, pt.r, 1e-7 * env)?;
            Ok((v.value / env, v.lower() / env, v.upper() / env))
        })
        .collect();
    let mut rmin = (f64::INFINITY, 0usize);
    let mut rmax = (f64::NEG_INFINITY, 0usize);
    let mut cmin = f64::INFINITY;
    let mut cmax = f64::NEG_INFINITY;
    for (i, r) in ratios.into_iter().enumerate() {
        let (v, lo, hi) = r?;
        if v < rmin.0 {
            rmin = (v, i);
        }
        if v > rmax.0 {
            rmax = (v, i);
        }
        cmin = cmin.min(lo);
        cmax = cmax.max(hi);
    }
    if !(cmin > 0.0) {
        return Err(Error::Certificate(format!(
            "kernel ratio lower bound {cmin} is not positive"
        )));
    }
    let (c1_hat, worst) = if rmax.0 >= 1.0 / rmin.0 { (rmax.0, rmax.1) } else { (1.0 / rmin.0, rmin.1) };
    Ok(BoundReport {
        c1_hat: c1_hat.max(1.0),
        worst_point: points[worst],
        ratio_min: rmin.0,
        ratio_max: rmax.0,
        argmin: points[rmin.1],
        argmax: points[rmax.1],
        certified_min: cmin,
        certified_max: cmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, dim: usize, t: f64) -> FractionalParams {
        FractionalParams::new(alpha, dim, t).unwrap()
    }

    #[test]
    fn closed_form_origin_values() {
        assert!((eval_closed_form(&params(2.0, 1, 1.0), 0.0).unwrap() - 0.282_094_791_773_878_1).abs() < 1e-15);
        assert!((eval_closed_form(&params(1.0, 1, 1.0), 0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((eval_closed_form(&params(1.0, 2, 1.0), 0.0).unwrap() - 0.5 / PI).abs() < 1e-15);
        assert!(eval_closed_form(&params(1.5, 1, 1.0), 0.0).is_err());
    }

    #[test]
    fn far_field_matches_poisson_kernel() {
        // 1/(π(1+r²)) = (1/π)(r^{-2} - r^{-4} + ...)
        let c = far_field_coefficients(1.0, 1, 4);
        assert!((c[0].0 - 1.0 / PI).abs() < 1e-15 && c[0].1 == 2.0);
        assert_eq!(c[1].0, 0.0);
        assert!((c[2].0 + 1.0 / PI).abs() < 1e-14 && c[2].1 == 4.0);
        for dim in 1..=3 {
            let p = params(1.0, dim, 1.0);
            let r = 12.0;
            let ff = far_field(&p, r).unwrap();
            let exact = eval_closed_form(&p, r).unwrap();
            assert!((ff.value - exact).abs() < 1e-12 * exact, "d={dim}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = params(1.0, 1, 1.0);
        assert!(eval_radial_numeric(&p, 1.0, 0.0).is_err());
        assert!(eval_radial_numeric(&p, -1.0, 1e-8).is_err());
        assert!(eval_radial_numeric(&params(1.0, 4, 1.0), 1.0, 1e-8).is_err());
        let g = ProbeGrid::log_spaced(0.5, 1.0, 2, 1.0, 3);
        assert!(check_two_sided_bound(&[params(2.0, 1, 1.0)], &g).is_err());
    }
}
