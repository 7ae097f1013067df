//! The perturbed kernel `k_ε = 𝓕⁻¹(e^{-t((2π|ξ|)^α + εφ₁(ξ))})`, its
//! interval-certified positivity, and the `L¹` norm of band-localized
//! heat kernels.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{eval_radial_numeric, far_field_coefficients, geomspace, outer_mass, radial_mass, RadialKernelValue};
use crate::params::{sphere_area, FractionalParams};
use crate::quad::{adaptive, Estimate};
use crate::radial::{radial_transform, Extent};
use crate::spectral::{make_bump, BumpKind, BumpProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedKernelSpec {
    pub params: FractionalParams,
    pub eps: f64,
    pub phi1: BumpProfile,
}

impl PerturbedKernelSpec {
    pub fn new(params: FractionalParams, eps: f64) -> Result<Self> {
        params.require_subgaussian("the perturbed kernel")?;
        params.require_dim_supported()?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParams(format!("eps must be nonnegative, got {eps}")));
        }
        Ok(Self { params, eps, phi1: make_bump(BumpKind::PerturbPhi1) })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.params, eps)
    }

    /// `φ_ε(ξ)` at `|ξ| = xi`.
    pub fn symbol(&self, xi: f64) -> f64 {
        self.params.symbol(xi) + self.eps * self.phi1.eval(xi)
    }
}

fn require_unit_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParams(format!("perturbed kernel time must be in (0, 1], got {t}")));
    }
    Ok(())
}

/// `F_ε(t,r) = 𝓕⁻¹(e^{-t(2π|ξ|)^α}(e^{-εtφ₁(ξ)} − 1))` at `|x| = r`.
pub fn eval_f_eps(spec: &PerturbedKernelSpec, t: f64, r: f64, tol: f64) -> Result<RadialKernelValue> {
    require_unit_time(t)?;
    if !(tol > 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("need tol > 0 and r ≥ 0, got tol={tol}, r={r}")));
    }
    if spec.eps == 0.0 {
        return Ok(RadialKernelValue { r, value: 0.0, abs_err: 0.0 });
    }
    let alpha = spec.params.alpha;
    let (eps, phi1) = (spec.eps, spec.phi1);
    let amp = |u: f64| (-t * u.powf(alpha)).exp() * (-eps * t * phi1.eval(u / (2.0 * PI))).exp_m1();
    let hi = 2.0 * PI * phi1.outer_radius;
    let knot = 2.0 * PI * phi1.inner_radius;
    let est = radial_transform(spec.params.dim, r, amp, Extent::Compact { lo: 0.0, hi }, &[knot], tol)?;
    Ok(RadialKernelValue { r, value: est.value, abs_err: est.err })
}

/// `k_ε(t,r) = p(t,r) + F_ε(t,r)`, each part evaluated to `tol/2`.
pub fn eval_k_eps(spec: &PerturbedKernelSpec, t: f64, r: f64, tol: f64) -> Result<RadialKernelValue> {
    let f = eval_f_eps(spec, t, r, 0.5 * tol)?;
    let p = eval_radial_numeric(&spec.params.at_time(t)?, r, 0.5 * tol)?;
    Ok(RadialKernelValue { r, value: p.value + f.value, abs_err: p.abs_err + f.abs_err })
}

/// Probe grids for a positivity certificate.
///
/// Each time gets the radii `r_unit · t^{1/α}`, which follow the kernel's own
/// length scale, merged with a uniform grid of spacing `r_step` on
/// `[0, r_abs_max]`, which resolves the fixed-scale oscillation of `F_ε`
/// (its spectrum lives in `|ξ| ≤ 1/3`). The certified radius `R_max` is the
/// largest radius of the merged grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateGrids {
    pub t: Vec<f64>,
    pub r_unit: Vec<f64>,
    pub r_step: f64,
    pub r_abs_max: f64,
    /// Relative accuracy requested for every kernel evaluation.
    pub rel_tol: f64,
    /// Required relative margin `(p − |F_ε|)/p` at grid points. It absorbs
    /// the variation of `F_ε` between neighbouring radii.
    pub sampling_margin: f64,
}

impl Default for CertificateGrids {
    fn default() -> Self {
        let mut r_unit = vec![0.0];
        r_unit.extend(geomspace(1e-3, 50.0, 48));
        Self {
            t: (0..=6).map(|k| 2f64.powi(-k)).collect(),
            r_unit,
            r_step: 0.1,
            r_abs_max: 64.0,
            rel_tol: 1e-6,
            sampling_margin: 0.02,
        }
    }
}

impl CertificateGrids {
    fn validate(&self) -> Result<()> {
        if self.t.is_empty() || self.r_unit.is_empty() {
            return Err(Error::InvalidParams("empty certificate grid".into()));
        }
        if let Some(&t) = self.t.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidParams(format!("certificate times must lie in (0, 1], got {t}")));
        }
        if !(self.r_step > 0.0 && self.r_abs_max >= 0.0 && self.r_abs_max / self.r_step <= 1e6) {
            return Err(Error::InvalidParams(format!(
                "uniform radius grid needs r_step > 0 and r_abs_max ≥ 0, got {} and {}",
                self.r_step, self.r_abs_max
            )));
        }
        if !(self.sampling_margin >= 0.0 && self.sampling_margin < 1.0) {
            return Err(Error::InvalidParams(format!("sampling_margin must be in [0, 1), got {}", self.sampling_margin)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 0.1) {
            return Err(Error::InvalidParams(format!("rel_tol must be in (0, 0.1), got {}", self.rel_tol)));
        }
        Ok(())
    }

    /// Merged probe radii at time `t`, sorted.
    pub fn radii(&self, alpha: f64, t: f64) -> Vec<f64> {
        let s = t.powf(1.0 / alpha);
        let steps = (self.r_abs_max / self.r_step).round() as usize;
        let mut r: Vec<f64> = self.r_unit.iter().map(|&u| u * s).collect();
        r.extend((0..=steps).map(|i| i as f64 * self.r_step));
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub f_eps: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub params: FractionalParams,
    pub eps: f64,
    pub t_grid: Vec<f64>,
    /// Radii in units of `t^{1/α}`.
    pub r_grid: Vec<f64>,
    pub r_step: f64,
    pub r_abs_max: f64,
    /// `min (p − |F_ε| − errors)` over the grid.
    pub min_margin: f64,
    /// `min (p − |F_ε| − errors) / p` over the grid.
    pub min_relative_margin: f64,
    /// `min (1 − ε G(r) r^{d+α}/a₁)` over the uniform radii, the `t → 0⁺`
    /// limit of `k_ε/p`, where `G = 𝓕⁻¹φ₁` and `a₁ |x|^{-d-α}` is the small-time
    /// profile `p(t,x)/t`.
    pub small_time_margin: f64,
    /// Measured `max |F_ε| / (ε p(2t,·))`, including points beyond `R_max`.
    pub envelope_constant: f64,
    /// Measured `max p(2t,·)/p(t,·)`.
    pub doubling_constant: f64,
    pub tail_bound_ok: bool,
    pub sampling_margin: f64,
    /// Points with the smallest relative margin, worst first.
    pub worst: Vec<Offender>,
    pub bump: BumpProfile,
}

impl PositivityCertificate {
    pub fn is_positive(&self) -> bool {
        self.min_margin > 0.0
            && self.min_relative_margin >= self.sampling_margin
            && self.small_time_margin >= self.sampling_margin
            && self.tail_bound_ok
    }
}

/// Kernel values shared by every ε tested on one grid.
struct Baseline {
    points: Vec<(f64, f64)>,
    p: Vec<RadialKernelValue>,
    p2: Vec<RadialKernelValue>,
    interior: usize,
    /// `(r, G(r) r^{d+α}/a₁)` with its error, for the small-time limit.
    small_time: Vec<(f64, f64, f64)>,
}

fn baseline(params: &FractionalParams, grids: &CertificateGrids) -> Result<Baseline> {
    let mut points = Vec::new();
    let mut outer = Vec::new();
    for &t in &grids.t {
        let radii = grids.radii(params.alpha, t);
        let rmax = radii.last().copied().unwrap_or(0.0).max(1.0);
        points.extend(radii.iter().map(|&r| (t, r)));
        // envelope probes beyond R_max: uniform on (R_max, 2R_max], then sparse
        let steps = (rmax / grids.r_step).ceil() as usize;
        outer.extend((1..=steps).map(|i| (t, rmax + i as f64 * grids.r_step)));
        outer.extend([4.0, 8.0].iter().map(|&m| (t, m * rmax)));
    }
    let interior = points.len();
    points.extend(outer);
    let evals: Vec<Result<(RadialKernelValue, RadialKernelValue)>> = points
        .par_iter()
        .map(|&(t, r)| {
            let p = eval_radial_numeric(&params.at_time(t)?, r, 0.1 * grids.rel_tol * env(params, t, r))?;
            let p2 = eval_radial_numeric(&params.at_time(2.0 * t)?, r, 0.1 * grids.rel_tol * env(params, 2.0 * t, r))?;
            Ok((p, p2))
        })
        .collect();
    let (mut p, mut p2) = (Vec::new(), Vec::new());
    for e in evals {
        let (a, b) = e?;
        p.push(a);
        p2.push(b);
    }
    let small_time = small_time_profile(params, grids)?;
    Ok(Baseline { points, p, p2, interior, small_time })
}

fn small_time_profile(params: &FractionalParams, grids: &CertificateGrids) -> Result<Vec<(f64, f64, f64)>> {
    let (alpha, dim) = (params.alpha, params.dim);
    let a1 = far_field_coefficients(alpha, dim, 1)[0].0;
    let phi1 = make_bump(BumpKind::PerturbPhi1);
    let hi = 2.0 * PI * phi1.outer_radius;
    let knot = 2.0 * PI * phi1.inner_radius;
    let steps = (2.0 * grids.r_abs_max.max(1.0) / grids.r_step).ceil() as usize;
    (1..=steps)
        .into_par_iter()
        .map(|i| {
            let r = i as f64 * grids.r_step;
            let w = r.powf(dim as f64 + alpha) / a1;
            let g = radial_transform(
                dim,
                r,
                |u: f64| phi1.eval(u / (2.0 * PI)),
                Extent::Compact { lo: 0.0, hi },
                &[knot],
                grids.rel_tol / w,
            )?;
            Ok((r, g.value * w, g.err * w))
        })
        .collect()
}

fn env(params: &FractionalParams, t: f64, r: f64) -> f64 {
    crate::kernel::power_envelope(params.alpha, params.dim, t, r)
}

fn certify_with(spec: &PerturbedKernelSpec, grids: &CertificateGrids, base: &Baseline) -> Result<PositivityCertificate> {
    let f_vals: Vec<Result<RadialKernelValue>> = base
        .points
        .par_iter()
        .zip(&base.p)
        .map(|(&(t, r), p)| eval_f_eps(spec, t, r, grids.rel_tol * p.value))
        .collect();
    let mut min_margin = f64::INFINITY;
    let mut min_rel = f64::INFINITY;
    let mut envelope: f64 = 0.0;
    let mut doubling: f64 = 0.0;
    let mut offenders = Vec::with_capacity(base.interior);
    for (i, f) in f_vals.into_iter().enumerate() {
        let f = f?;
        let (t, r) = base.points[i];
        let (p, p2) = (base.p[i], base.p2[i]);
        if spec.eps > 0.0 {
            envelope = envelope.max((f.value.abs() + f.abs_err) / (spec.eps * p2.lower()));
        }
        doubling = doubling.max(p2.upper() / p.lower());
        if i < base.interior {
            let margin = p.value - f.value.abs() - p.abs_err - f.abs_err;
            min_margin = min_margin.min(margin);
            min_rel = min_rel.min(margin / p.value);
            offenders.push(Offender { t, r, p: p.value, f_eps: f.value, margin });
        }
    }
    offenders.sort_by(|a, b| (a.margin / a.p).total_cmp(&(b.margin / b.p)));
    offenders.truncate(5);
    let tail_bound_ok = spec.eps == 0.0 || envelope * spec.eps * doubling.max(2.0) < 1.0;
    let small_time_margin = base
        .small_time
        .iter()
        .map(|&(_, g, err)| 1.0 - spec.eps * (g + err))
        .fold(1.0, f64::min);
    Ok(PositivityCertificate {
        params: spec.params,
        eps: spec.eps,
        t_grid: grids.t.clone(),
        r_grid: grids.r_unit.clone(),
        r_step: grids.r_step,
        r_abs_max: grids.r_abs_max,
        min_margin,
        min_relative_margin: min_rel,
        envelope_constant: envelope,
        doubling_constant: doubling,
        tail_bound_ok,
        sampling_margin: grids.sampling_margin,
        small_time_margin,
        worst: offenders,
        bump: spec.phi1,
    })
}

/// Certify `p − |F_ε| > 0` on the grid and, through the measured envelope,
/// beyond `R_max`.
pub fn certify_positivity(spec: &PerturbedKernelSpec, grids: &CertificateGrids) -> Result<PositivityCertificate> {
    grids.validate()?;
    let base = baseline(&spec.params, grids)?;
    certify_with(spec, grids, &base)
}

pub const EPS_BRACKET_HI: f64 = 1.0;
pub const EPS_BISECTION_STEPS: usize = 20;

/// Largest certified ε found by bisection on `[0, 1]`, with its certificate.
/// Returns `eps_star = 0` together with the ε = 0 certificate when no tested
/// positive ε certifies.
pub fn find_eps_star(params: &FractionalParams, grids: &CertificateGrids) -> Result<(f64, PositivityCertificate)> {
    let spec = PerturbedKernelSpec::new(params.at_time(1.0)?, EPS_BRACKET_HI)?;
    grids.validate()?;
    let base = baseline(&spec.params, grids)?;
    let top = certify_with(&spec, grids, &base)?;
    if top.is_positive() {
        return Ok((EPS_BRACKET_HI, top));
    }
    let (mut lo, mut hi) = (0.0, EPS_BRACKET_HI);
    let mut best: Option<PositivityCertificate> = None;
    for _ in 0..EPS_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let cert = certify_with(&spec.with_eps(mid)?, grids, &base)?;
        log::debug!("eps={mid:e} margin={:e} tail_ok={}", cert.min_margin, cert.tail_bound_ok);
        if cert.is_positive() {
            lo = mid;
            best = Some(cert);
        } else {
            hi = mid;
        }
    }
    match best {
        Some(cert) => Ok((lo, cert)),
        None => {
            log::warn!(
                "no positive eps certified for alpha={} d={}; check quadrature tolerances",
                params.alpha,
                params.dim
            );
            Ok((0.0, certify_with(&spec.with_eps(0.0)?, grids, &base)?))
        }
    }
}

/// `‖k_ε(t,·)‖₁` by radial quadrature. Beyond the body radius the kernel is
/// `e^{-εt} p(t,·)` up to a rapidly decaying remainder, so the tail uses the
/// far-field mass of `p`; the remainder is bounded by the size of that
/// difference at the body radius.
pub fn k_eps_l1(spec: &PerturbedKernelSpec, t: f64, tol: f64) -> Result<Estimate> {
    require_unit_time(t)?;
    let params = spec.params.at_time(t)?;
    let scale = t.powf(1.0 / params.alpha);
    let damp = (-spec.eps * t).exp();
    let area = sphere_area(params.dim);
    let dim = params.dim;
    // size of the smooth remainder F_ε − (e^{-εt} − 1) p over [R/2, R]
    let remainder = |radius: f64| -> Result<f64> {
        let mut worst: f64 = 0.0;
        let point_tol = 1e-3 * tol / (area * radius.powi(dim as i32));
        for m in [0.5, 0.625, 0.75, 0.875, 1.0] {
            let r = m * radius;
            let f = eval_f_eps(spec, t, r, point_tol)?;
            let p = eval_radial_numeric(&params, r, point_tol)?;
            worst = worst.max((f.value - (damp - 1.0) * p.value).abs() + f.abs_err + p.abs_err);
        }
        Ok(area * radius.powi(dim as i32) * worst)
    };
    let mut radius = (4.0 * scale).max(32.0);
    let (tail, remainder) = loop {
        if let Some(est) = outer_mass(&params, radius) {
            if est.err < 0.05 * tol {
                let rem = if spec.eps == 0.0 { 0.0 } else { remainder(radius)? };
                if rem < 0.05 * tol {
                    break (est, rem);
                }
            }
        }
        radius *= 1.5;
        if radius > 1e5 {
            return Err(Error::QuadratureBudget {
                tol,
                estimate: f64::INFINITY,
                context: "perturbed kernel tail did not converge".into(),
            });
        }
    };
    let eta = 0.01;
    let inner_tol = |r: f64| eta * tol * scale / (area * (scale + r).powi(dim as i32));
    let body = radial_mass(
        |r| eval_k_eps(spec, t, r, inner_tol(r)).map(|v| v.value.abs()),
        scale,
        radius,
        dim,
        0.5 * tol,
    )?;
    let inner = eta * tol * (1.0 + radius / scale).ln();
    Ok(Estimate {
        value: body.value + damp * tail.value,
        err: body.err + damp * tail.err + inner + remainder,
    })
}

/// `g(t,x) = 𝓕⁻¹(ψ(ξ) e^{-t(2π|ξ|)^α})(x)` with `ψ(ξ) = φ(ξ) − φ(2ξ)`.
pub fn eval_banded_kernel(alpha: f64, dim: usize, t: f64, r: f64, tol: f64) -> Result<RadialKernelValue> {
    let phi = make_bump(BumpKind::LpPhi);
    let amp = |u: f64| phi.band(u / (2.0 * PI)) * (-t * u.powf(alpha)).exp();
    let (lo, hi) = (PI * phi.inner_radius, 2.0 * PI * phi.outer_radius);
    let est = radial_transform(dim, r, amp, Extent::Compact { lo, hi }, &[2.0 * PI * phi.inner_radius], tol)?;
    Ok(RadialKernelValue { r, value: est.value, abs_err: est.err })
}

/// `‖g(t,·)‖₁`. The value is a certified lower bound once its error is
/// subtracted: the radial integral of `|g|` is truncated at a finite radius,
/// which can only lose mass.
pub fn banded_kernel_l1(alpha: f64, dim: usize, t: f64, tol: f64) -> Result<Estimate> {
    FractionalParams::new(alpha, dim, 1.0)?.require_dim_supported()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams(format!("time must be nonnegative, got {t}")));
    }
    let area = sphere_area(dim);
    let power = (dim - 1) as i32;
    let point_tol = 1e-4 * tol;
    let g = |r: f64| eval_banded_kernel(alpha, dim, t, r, point_tol).map(|v| v.value);
    let h = 0.125;
    let chunk = 8.0;
    let mut total = Estimate::default();
    let mut start = 0.0;
    loop {
        // sign changes of g on a fine grid, refined by bisection
        let steps = (chunk / h) as usize;
        let samples: Vec<f64> = (0..=steps)
            .into_par_iter()
            .map(|i| g(start + i as f64 * h))
            .collect::<Result<_>>()?;
        let mut edges = vec![start];
        for i in 0..steps {
            let (a, b) = (samples[i], samples[i + 1]);
            if a.signum() != b.signum() && a != 0.0 && b != 0.0 {
                let (mut lo, mut hi) = (start + i as f64 * h, start + (i + 1) as f64 * h);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid)?.signum() == a.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                edges.push(0.5 * (lo + hi));
            }
        }
        edges.push(start + chunk);
        let pieces: Vec<Result<Estimate>> = edges
            .par_windows(2)
            .map(|w| {
                let failure = std::sync::Mutex::new(None);
                let f = |r: f64| match g(r) {
                    Ok(v) => area * r.powi(power) * v.abs(),
                    Err(e) => {
                        failure.lock().expect("poisoned").get_or_insert(e);
                        f64::NAN
                    }
                };
                let res = adaptive(&f, w[0], w[1], 0.25 * tol / (edges.len() as f64), 100);
                if let Some(e) = failure.into_inner().expect("poisoned") {
                    return Err(e);
                }
                let mut est = res.estimate;
                est.err += area * w[1].powi(power) * point_tol * (w[1] - w[0]);
                Ok(est)
            })
            .collect();
        let mut piece_sum = Estimate::default();
        for p in pieces {
            piece_sum += p?;
        }
        total += piece_sum;
        start += chunk;
        if piece_sum.value < 1e-3 * tol || start > 4096.0 {
            break;
        }
    }
    Ok(total)
}
