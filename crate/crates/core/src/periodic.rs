//! Heat kernels and semigroup estimates on the unit torus `𝕋^d = ℝ^d/ℤ^d`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_radial_numeric, far_field, far_field_coefficients, power_envelope, sum_asymptotic};
use crate::params::{FractionalParams, MAX_DIM};
use crate::quad::{adaptive, Estimate};
use crate::special::hurwitz_zeta;
use crate::spectral::{apply_multiplier, lebesgue_norm, smooth_step, GridFunction, SpectralMultiplier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    FourierSeries,
    PoissonSummation,
}

/// Time at which [`PeriodicKernelSpec::auto`] switches from lattice sums of
/// the whole-space kernel to the Fourier series.
pub const SWITCH_TIME: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicKernelSpec {
    pub params: FractionalParams,
    /// Lattice truncation `|n|_∞ ≤ K`.
    pub trunc_radius: usize,
    pub method: SumMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicValue {
    pub value: f64,
    /// Truncation plus evaluation error.
    pub abs_err: f64,
    pub trunc_radius: usize,
    pub method: SumMethod,
}

const MAX_FOURIER_TERMS: f64 = 1e7;

/// Rigorous bound on `Σ_{|n|_∞ > K} e^{-t(2π|n|)^α}`.
pub fn fourier_tail_bound(alpha: f64, dim: usize, t: f64, k: usize) -> f64 {
    let mut sum = 0.0;
    let mut m = k + 1;
    loop {
        let mf = m as f64;
        let shell = 2.0 * dim as f64 * (2.0 * mf + 1.0).powi(dim as i32 - 1);
        let term = shell * (-t * (2.0 * PI * mf).powf(alpha)).exp();
        sum += term;
        // terms decrease geometrically once the exponent dominates the shell growth
        let next = 2.0 * dim as f64 * (2.0 * mf + 3.0).powi(dim as i32 - 1)
            * (-t * (2.0 * PI * (mf + 1.0)).powf(alpha)).exp();
        if next < term && next < 1e-18 * sum.max(1e-300) {
            let ratio = next / term;
            return sum + next / (1.0 - ratio);
        }
        if sum == 0.0 && term == 0.0 {
            return 0.0;
        }
        m += 1;
        if m > k + 100_000_000 {
            return f64::INFINITY;
        }
    }
}

/// Rigorous bound on `Σ_{|n|_∞ > K} (4πt)^{-d/2} e^{-|x+n|²/4t}` for `x ∈ [-1/2, 1/2]^d`.
fn gaussian_lattice_tail_bound(dim: usize, t: f64, k: usize) -> f64 {
    let d = dim as f64;
    let mut sum = 0.0;
    let mut m = k + 1;
    loop {
        let mf = m as f64;
        let dist = mf - 0.5;
        let term = 2.0 * d * (2.0 * mf + 1.0).powi(dim as i32 - 1) * (4.0 * PI * t).powf(-d / 2.0)
            * (-dist * dist / (4.0 * t)).exp();
        sum += term;
        if term <= 1e-18 * sum.max(1e-300) || (term == 0.0 && dist * dist > 4.0 * t) {
            return 2.0 * sum;
        }
        m += 1;
    }
}

impl PeriodicKernelSpec {
    pub fn new(params: FractionalParams, trunc_radius: usize, method: SumMethod) -> Result<Self> {
        params.require_dim_supported()?;
        if trunc_radius < 1 {
            return Err(Error::InvalidParams("lattice truncation K must be at least 1".into()));
        }
        Ok(Self { params, trunc_radius, method })
    }

    /// Smallest `K` whose truncation error at time `t` is below `tol`.
    pub fn for_tolerance(params: FractionalParams, method: SumMethod, t: f64, tol: f64) -> Result<Self> {
        params.require_dim_supported()?;
        if !(t > 0.0) || !(tol > 0.0) {
            return Err(Error::InvalidParams(format!("need t > 0 and tol > 0, got t={t}, tol={tol}")));
        }
        let (alpha, dim) = (params.alpha, params.dim);
        let k = match method {
            SumMethod::FourierSeries => {
                let mut k = 1usize;
                while fourier_tail_bound(alpha, dim, t, k) > 0.5 * tol {
                    k = (k as f64 * 1.25).ceil() as usize;
                    if ((2 * k + 1) as f64).powi(dim as i32) > MAX_FOURIER_TERMS {
                        return Err(Error::QuadratureBudget {
                            tol,
                            estimate: fourier_tail_bound(alpha, dim, t, k),
                            context: format!(
                                "Fourier series at t={t} needs more than {MAX_FOURIER_TERMS:e} terms; use Poisson summation"
                            ),
                        });
                    }
                }
                k
            }
            SumMethod::PoissonSummation => {
                let base = (8.0 * t.powf(1.0 / alpha)).ceil().max(2.0) as usize;
                if alpha == 2.0 {
                    let mut k = base;
                    while gaussian_lattice_tail_bound(dim, t, k) > 0.25 * tol {
                        k += 1;
                    }
                    k
                } else {
                    base
                }
            }
        };
        Self::new(params, k, method)
    }

    /// Series for `t ≥ 0.5`, lattice sums below.
    pub fn auto(params: FractionalParams, t: f64, tol: f64) -> Result<Self> {
        let method = if t >= SWITCH_TIME { SumMethod::FourierSeries } else { SumMethod::PoissonSummation };
        Self::for_tolerance(params, method, t, tol)
    }
}

/// Representative of `x` in `[-1/2, 1/2)^d`.
fn centered(x: &[f64]) -> [f64; MAX_DIM] {
    let mut out = [0.0; MAX_DIM];
    for (o, &v) in out.iter_mut().zip(x) {
        *o = v - (v + 0.5).floor();
    }
    out
}

fn lattice_box(dim: usize, k: usize) -> impl Iterator<Item = [i64; MAX_DIM]> {
    let side = 2 * k + 1;
    let total = side.pow(dim as u32);
    (0..total).map(move |mut idx| {
        let mut n = [0i64; MAX_DIM];
        for slot in n.iter_mut().take(dim) {
            *slot = (idx % side) as i64 - k as i64;
            idx /= side;
        }
        n
    })
}

fn shell(dim: usize, m: usize) -> impl Iterator<Item = [i64; MAX_DIM]> {
    lattice_box(dim, m).filter(move |n| n[..dim].iter().any(|v| v.unsigned_abs() as usize == m))
}

fn fourier_series(spec: &PeriodicKernelSpec, t: f64, x: &[f64; MAX_DIM]) -> Estimate {
    let (alpha, dim, k) = (spec.params.alpha, spec.params.dim, spec.trunc_radius);
    let value: f64 = if dim == 1 {
        1.0 + 2.0
            * (1..=k)
                .map(|n| {
                    let nf = n as f64;
                    (-t * (2.0 * PI * nf).powf(alpha)).exp() * (2.0 * PI * nf * x[0]).cos()
                })
                .sum::<f64>()
    } else {
        lattice_box(dim, k)
            .map(|n| {
                let norm = n[..dim].iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                let phase: f64 = n[..dim].iter().zip(x).map(|(&v, &y)| v as f64 * y).sum();
                (-t * (2.0 * PI * norm).powf(alpha)).exp() * (2.0 * PI * phase).cos()
            })
            .sum()
    };
    let terms = ((2 * k + 1) as f64).powi(dim as i32);
    Estimate { value, err: fourier_tail_bound(alpha, dim, t, k) + terms * 4.0 * f64::EPSILON }
}

/// `p(t, r)` for one lattice translate: the far-field series where it is
/// accurate, radial quadrature otherwise.
fn translate_value(params: &FractionalParams, r: f64, tol: f64) -> Result<Estimate> {
    if let Some(ff) = far_field(params, r) {
        if ff.err <= tol {
            return Ok(ff);
        }
    }
    let v = eval_radial_numeric(params, r, tol)?;
    Ok(Estimate { value: v.value, err: v.abs_err })
}

/// `∫_{[-1,1]^{d-1}} (1 + |v|²)^{-s/2} dv`.
fn face_integral(dim: usize, s: f64) -> f64 {
    match dim {
        1 => 1.0,
        2 => 2.0 * adaptive(&|u: f64| (1.0 + u * u).powf(-s / 2.0), 0.0, 1.0, 1e-14, 200).estimate.value,
        _ => {
            let inner = |u: f64| adaptive(&|v: f64| (1.0 + u * u + v * v).powf(-s / 2.0), 0.0, 1.0, 1e-14, 200).estimate.value;
            4.0 * adaptive(&inner, 0.0, 1.0, 1e-13, 200).estimate.value
        }
    }
}

/// Far-field estimate of `Σ_{|n|_∞ > K} p(t, x+n)` for α < 2.
fn lattice_tail(params: &FractionalParams, x: &[f64; MAX_DIM], k: usize) -> Estimate {
    let (alpha, dim, t) = (params.alpha, params.dim, params.t);
    let coeffs = far_field_coefficients(alpha, dim, 60);
    if dim == 1 {
        let a = k as f64 + 1.0;
        return sum_asymptotic(coeffs.iter().enumerate().map(|(i, &(c, s))| {
            c * t.powi(i as i32 + 1) * (hurwitz_zeta(s, a + x[0]) + hurwitz_zeta(s, a - x[0]))
        }));
    }
    // explicit shells out to K2, then the continuum beyond the box |y|_∞ = K2 + 1/2
    let k2 = (4 * k).max(k + 8);
    let mut shells = Estimate::default();
    for m in k + 1..=k2 {
        for n in shell(dim, m) {
            let r = n[..dim].iter().zip(x).map(|(&v, &y)| (v as f64 + y).powi(2)).sum::<f64>().sqrt();
            if let Some(ff) = far_field(params, r) {
                shells += ff;
            }
        }
    }
    let a = k2 as f64 + 0.5;
    let d = dim as f64;
    let continuum = sum_asymptotic(coeffs.iter().enumerate().map(|(i, &(c, s))| {
        c * t.powi(i as i32 + 1) * 2.0 * d * a.powf(d - s) / (s - d) * face_integral(dim, s)
    }));
    let s1 = coeffs[0].1;
    Estimate {
        value: shells.value + continuum.value,
        err: shells.err + continuum.err + continuum.value.abs() * (s1 * s1 + d) / (a * a),
    }
}

fn poisson_summation(spec: &PeriodicKernelSpec, t: f64, x: &[f64; MAX_DIM], tol: f64) -> Result<Estimate> {
    let params = spec.params.at_time(t)?;
    let (dim, k) = (params.dim, spec.trunc_radius);
    let terms: Vec<[i64; MAX_DIM]> = lattice_box(dim, k).collect();
    let term_tol = 0.25 * tol / terms.len() as f64;
    let parts: Vec<Result<Estimate>> = terms
        .par_iter()
        .map(|n| {
            let r = n[..dim].iter().zip(x).map(|(&v, &y)| (v as f64 + y).powi(2)).sum::<f64>().sqrt();
            translate_value(&params, r, term_tol)
        })
        .collect();
    let mut direct = Estimate::default();
    for p in parts {
        direct += p?;
    }
    let tail = if params.alpha == 2.0 {
        Estimate { value: 0.0, err: gaussian_lattice_tail_bound(dim, t, k) }
    } else {
        lattice_tail(&params, x, k)
    };
    Ok(direct + tail)
}

/// `k^per(t, x) = Σ_n e^{-t(2π|n|)^α} e^{2πi n·x} = Σ_n p(t, x + n)`.
///
/// In lattice-sum mode `tol` sets the accuracy of the individual kernel
/// evaluations; the truncation error is whatever the chosen `K` leaves.
pub fn periodic_kernel(spec: &PeriodicKernelSpec, t: f64, x: &[f64], tol: f64) -> Result<PeriodicValue> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("time must be positive, got {t}")));
    }
    if x.len() != spec.params.dim {
        return Err(Error::InvalidParams(format!("point has {} coordinates, expected {}", x.len(), spec.params.dim)));
    }
    let xc = centered(x);
    let est = match spec.method {
        SumMethod::FourierSeries => fourier_series(spec, t, &xc),
        SumMethod::PoissonSummation => poisson_summation(spec, t, &xc, tol)?,
    };
    Ok(PeriodicValue { value: est.value, abs_err: est.err, trunc_radius: spec.trunc_radius, method: spec.method })
}

/// Direct sum over the translates `|n|_∞ ≤ K` at relative accuracy 1e-6 per
/// translate, together with its certified lower bound.
fn direct_translates(params: &FractionalParams, xc: &[f64; MAX_DIM], k: usize) -> Result<(Estimate, f64)> {
    let dim = params.dim;
    let terms: Vec<[i64; MAX_DIM]> = lattice_box(dim, k).collect();
    let parts: Vec<Result<Estimate>> = terms
        .par_iter()
        .map(|n| {
            let r = n[..dim].iter().zip(xc).map(|(&v, &y)| (v as f64 + y).powi(2)).sum::<f64>().sqrt();
            translate_value(params, r, 1e-6 * power_envelope(params.alpha, dim, params.t, r))
        })
        .collect();
    let mut direct = Estimate::default();
    let mut lower = 0.0;
    for p in parts {
        let v = p?;
        lower += (v.value - v.err).max(0.0);
        direct += v;
    }
    Ok((direct, lower))
}

/// Certified lower bound on `k^per(t,x)`: lattice translates are positive,
/// so dropping all but `|n|_∞ ≤ K` and subtracting quadrature error is safe.
pub fn periodic_kernel_lower_bound(params: &FractionalParams, t: f64, x: &[f64], k: usize) -> Result<f64> {
    let params = params.at_time(t)?;
    Ok(direct_translates(&params, &centered(x), k)?.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub params: FractionalParams,
    /// `min k^per(t,x)/t` over the grid.
    pub c3_hat: f64,
    /// The same minimum computed from certified lower bounds.
    pub c3_certified: f64,
    pub argmin_t: f64,
    pub argmin_x: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Per-axis coordinates; the probe set is their `d`-fold product.
    pub x_grid: Vec<f64>,
}

/// Default probes: `t = 2^{-k}`, `k = 0..6`, and `x` per axis on `[0, 1/2]`
/// in steps of `1/16` (the kernel is even in each coordinate).
pub fn default_c3_grids() -> (Vec<f64>, Vec<f64>) {
    ((0..=6).map(|k| 2f64.powi(-k)).collect(), (0..=8).map(|i| i as f64 / 16.0).collect())
}

pub fn estimate_c3(params: &FractionalParams, t_grid: &[f64], x_grid: &[f64]) -> Result<LowerBoundReport> {
    params.require_subgaussian("the linear-in-t periodic lower bound")?;
    params.require_dim_supported()?;
    if t_grid.is_empty() || x_grid.is_empty() {
        return Err(Error::InvalidParams("empty c3 grid".into()));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidParams(format!("c3 times must lie in (0, 1], got {t}")));
    }
    let dim = params.dim;
    let mut probes = Vec::new();
    for &t in t_grid {
        for idx in 0..x_grid.len().pow(dim as u32) {
            let mut rem = idx;
            let mut x = vec![0.0; dim];
            for v in x.iter_mut() {
                *v = x_grid[rem % x_grid.len()];
                rem /= x_grid.len();
            }
            probes.push((t, x));
        }
    }
    let results: Vec<Result<(f64, f64)>> = probes
        .par_iter()
        .map(|(t, x)| {
            let k = (8.0 * t.powf(1.0 / params.alpha)).ceil().max(3.0) as usize;
            let at_t = params.at_time(*t)?;
            let xc = centered(x);
            let (direct, lower) = direct_translates(&at_t, &xc, k)?;
            let full = direct.value + lattice_tail(&at_t, &xc, k).value;
            Ok((full / t, lower / t))
        })
        .collect();
    let mut best = (f64::INFINITY, 0usize);
    let mut certified = f64::INFINITY;
    for (i, r) in results.into_iter().enumerate() {
        let (v, lo) = r?;
        if v < best.0 {
            best = (v, i);
        }
        certified = certified.min(lo);
    }
    if !(certified > 0.0) {
        let (t, x) = &probes[best.1];
        return Err(Error::Certificate(format!(
            "periodic kernel lower bound not positive near t={t}, x={x:?}; tolerances too loose"
        )));
    }
    let (t, x) = probes[best.1].clone();
    Ok(LowerBoundReport {
        params: *params,
        c3_hat: best.0,
        c3_certified: certified,
        argmin_t: t,
        argmin_x: x,
        t_grid: t_grid.to_vec(),
        x_grid: x_grid.to_vec(),
    })
}

/// `t = 2^{-k}`, `k = 0..10`.
pub fn default_rate_times() -> Vec<f64> {
    (0..=10).map(|k| 2f64.powi(-k)).collect()
}

pub fn require_mean_zero(f: &GridFunction) -> Result<()> {
    let mean = f.mean().norm();
    let l2 = lebesgue_norm(f, 2.0)? / f.volume().sqrt();
    if mean >= 1e-12 * l2 || l2 == 0.0 {
        return Err(Error::NotMeanZero(mean));
    }
    Ok(())
}

/// Norm ratios below this are dominated by FFT rounding and carry no rate
/// information.
pub const RATIO_FLOOR: f64 = 1e-10;

/// `min_t −log(‖e^{-t|∇|^α} f‖_q / ‖f‖_q) / t` over the times in `t_grid`
/// whose ratio stays above [`RATIO_FLOOR`].
pub fn periodic_decay_rate(f: &GridFunction, alpha: f64, q: f64, t_grid: &[f64]) -> Result<f64> {
    FractionalParams::new(alpha, f.dim(), 1.0)?;
    require_mean_zero(f)?;
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParams("decay times must be positive and nonempty".into()));
    }
    let base = lebesgue_norm(f, q)?;
    let mut rate = f64::INFINITY;
    for &t in t_grid {
        let g = apply_multiplier(f, &SpectralMultiplier::semigroup(alpha, t));
        let ratio = lebesgue_norm(&g, q)? / base;
        if ratio >= RATIO_FLOOR {
            rate = rate.min(-ratio.ln() / t);
        }
    }
    if rate.is_infinite() {
        return Err(Error::InvalidParams("every decay time drives the norm ratio below the rounding floor".into()));
    }
    Ok(rate)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub delta0: f64,
    pub samples: usize,
    /// `(t, ‖e^{tΔ}f‖_∞ / ‖f‖_∞)`.
    pub rows: Vec<(f64, f64)>,
    /// Fit `log(1 − ratio) ≈ intercept − c0/t` over the smallest decade of `t`.
    pub fitted_c0: f64,
    pub fit_intercept: f64,
}

/// Smooth mean-zero `f` on `𝕋¹`: `f ≡ 1` on `|x − 1/2| ≤ δ₀`, a compensating
/// negative plateau bump centred at `0`, and `‖f‖_∞ = 1`.
pub fn plateau_test_function(delta0: f64, samples: usize) -> Result<GridFunction> {
    if !(delta0 > 0.0 && delta0 < 0.25) {
        return Err(Error::InvalidParams(format!("delta0 must lie in (0, 1/4), got {delta0}")));
    }
    let width = (0.5 * delta0).min(0.5 * (0.25 - delta0));
    let rho = 0.5 - delta0 - 2.0 * width;
    let plateau = |dist: f64, radius: f64| smooth_step((radius + width - dist) / width);
    let x0 = 0.5;
    let pos = GridFunction::from_real_fn(1, 1.0, samples, |x| plateau((x[0] - x0).abs(), delta0))?;
    let neg = GridFunction::from_real_fn(1, 1.0, samples, |x| {
        let d = (x[0] - x0 - 0.5).abs();
        plateau(d.min(1.0 - d), rho)
    })?;
    let beta = pos.mean().re / neg.mean().re;
    if !(beta < 1.0) {
        return Err(Error::Construction(format!(
            "delta0={delta0} leaves no room for a compensating bump (mass ratio {beta})"
        )));
    }
    let f = pos.sub(&neg.scale(beta))?;
    let shift = f.mean().re;
    f.zip_with(&f, |a, _| a - shift, true)
}

/// Sup-norm contraction ratios of the periodic heat flow on the plateau
/// function of [`plateau_test_function`].
pub fn heat_sup_counterexample(delta0: f64, t_grid: &[f64], samples: usize) -> Result<CounterexampleReport> {
    if t_grid.len() < 2 || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParams("need at least two positive times".into()));
    }
    let f = plateau_test_function(delta0, samples)?;
    let sup = lebesgue_norm(&f, f64::INFINITY)?;
    let rows: Vec<(f64, f64)> = t_grid
        .iter()
        .map(|&t| {
            let g = apply_multiplier(&f, &SpectralMultiplier::semigroup(2.0, t));
            (t, g.sup_norm() / sup)
        })
        .collect();
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(t, r)| *t <= 10.0 * t_min && *r < 1.0)
        .map(|&(t, r)| (1.0 / t, (1.0 - r).ln()))
        .collect();
    let (slope, intercept) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        (slope, my - slope * mx)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(CounterexampleReport { delta0, samples, rows, fitted_c0: -slope, fit_intercept: intercept })
}
