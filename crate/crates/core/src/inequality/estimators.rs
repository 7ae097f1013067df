//! Ensemble estimators for decay, Bernstein, Poincaré and maximal constants.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{member_coefficients, EnsembleSpec};
use crate::error::{Error, Result};
use crate::params::FractionalParams;
use crate::periodic::{require_mean_zero, RATIO_FLOOR};
use crate::spectral::{
    apply_multiplier, lebesgue_norm, lp_project, maximal_function, weighted_pairing, Complex64, GridFunction,
    Projection, SpectralMultiplier,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    DecayC,
    BernsteinC,
    PoincareC,
    MaximalC,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::DecayC => "decay_c",
            Quantity::BernsteinC => "bernstein_c",
            Quantity::PoincareC => "poincare_c",
            Quantity::MaximalC => "maximal_C",
        }
    }
}

/// The ensemble member (and time, where relevant) attaining the estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub member: usize,
    pub t: Option<f64>,
    /// Whether local refinement improved on the raw ensemble value.
    pub refined: bool,
}

impl Witness {
    pub fn label(&self) -> String {
        let mut s = format!("member={}", self.member);
        if let Some(t) = self.t {
            s.push_str(&format!(";t={t:e}"));
        }
        if self.refined {
            s.push_str(";refined");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub quantity: Quantity,
    pub alpha: f64,
    pub dim: usize,
    /// `f64::INFINITY` stands for the max-norm.
    pub q: f64,
    pub n_scale: Option<f64>,
    pub value: f64,
    /// Value over the raw ensemble, before refinement.
    pub ensemble_value: f64,
    pub witness: Witness,
    pub ensemble: EnsembleSpec,
}

/// Local refinement of the extremal member: coordinate-wise perturbations of
/// its spectral coefficients, keeping every change that lowers the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub rounds: usize,
    /// Initial perturbation size relative to the RMS coefficient; halved
    /// after every round.
    pub step: f64,
}

impl Default for Refinement {
    fn default() -> Self {
        Self { rounds: 1, step: 0.5 }
    }
}

/// `t = 2^{-k}`, `k = 0..12`.
pub fn default_decay_times() -> Vec<f64> {
    (0..=12).map(|k| 2f64.powi(-k)).collect()
}

type Objective<'a> = dyn Fn(&GridFunction) -> Result<Option<(f64, Option<f64>)>> + Sync + 'a;

struct Extremum {
    value: f64,
    ensemble_value: f64,
    witness: Witness,
}

fn minimize(ensemble: &EnsembleSpec, objective: &Objective<'_>, refinement: Refinement) -> Result<Extremum> {
    ensemble.validate()?;
    let values: Vec<Result<Option<(f64, Option<f64>)>>> = (0..ensemble.n_samples)
        .into_par_iter()
        .map(|i| objective(&ensemble.synthesize(&member_coefficients(ensemble, i))?))
        .collect();
    let mut best: Option<(f64, Option<f64>, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match v? {
            Some((value, t)) => {
                if best.is_none_or(|b| value < b.0) {
                    best = Some((value, t, i));
                }
            }
            None => log::warn!("ensemble member {i} is degenerate after projection; skipped"),
        }
    }
    let (raw, raw_t, member) =
        best.ok_or_else(|| Error::InvalidParams("every ensemble member is degenerate".into()))?;

    let mut coeffs = member_coefficients(ensemble, member);
    let (mut value, mut t) = (raw, raw_t);
    let rms = (coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / coeffs.len() as f64).sqrt();
    let mut step = refinement.step * rms;
    for _ in 0..refinement.rounds {
        for i in 0..coeffs.len() {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
                let mut trial = coeffs.clone();
                trial[i] += dir * step;
                if let Some((v, tt)) = objective(&ensemble.synthesize(&trial)?)? {
                    if v < value {
                        value = v;
                        t = tt;
                        coeffs = trial;
                    }
                }
            }
        }
        step *= 0.5;
    }
    Ok(Extremum { value, ensemble_value: raw, witness: Witness { member, t, refined: value < raw } })
}

fn check_params(params: &FractionalParams, ensemble: &EnsembleSpec) -> Result<()> {
    if params.dim != ensemble.dim {
        return Err(Error::InvalidParams(format!(
            "params dimension {} does not match ensemble dimension {}",
            params.dim, ensemble.dim
        )));
    }
    Ok(())
}

fn check_pairing_exponent(q: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParams(format!("pairing exponent must lie in (1, ∞), got {q}")));
    }
    Ok(())
}

/// Measured decay rate of one function: `min_t −log(‖e^{-t|∇|^α} g‖_q/‖g‖_q)/(t N^α)`,
/// ignoring times whose ratio falls below [`RATIO_FLOOR`].
pub fn decay_rate(g: &GridFunction, alpha: f64, q: f64, n_scale: f64, t_grid: &[f64]) -> Result<Option<(f64, Option<f64>)>> {
    let base = lebesgue_norm(g, q)?;
    if base == 0.0 {
        return Ok(None);
    }
    let mut best: Option<(f64, Option<f64>)> = None;
    for &t in t_grid {
        let evolved = apply_multiplier(g, &SpectralMultiplier::semigroup(alpha, t));
        let ratio = lebesgue_norm(&evolved, q)? / base;
        if ratio < RATIO_FLOOR {
            continue;
        }
        let rate = -ratio.ln() / (t * n_scale.powf(alpha));
        if best.is_none_or(|b| rate < b.0) {
            best = Some((rate, Some(t)));
        }
    }
    Ok(best)
}

pub fn estimate_decay_constant(
    params: &FractionalParams,
    q: f64,
    n_scale: f64,
    ensemble: &EnsembleSpec,
    t_grid: &[f64],
) -> Result<ConstantEstimate> {
    estimate_decay_constant_with(params, q, n_scale, ensemble, t_grid, Refinement::default())
}

/// `ĉ = min −log(‖e^{-t|∇|^α}P_N f‖_q/‖P_N f‖_q)/(t N^α)` over the ensemble and `t_grid`.
pub fn estimate_decay_constant_with(
    params: &FractionalParams,
    q: f64,
    n_scale: f64,
    ensemble: &EnsembleSpec,
    t_grid: &[f64],
    refinement: Refinement,
) -> Result<ConstantEstimate> {
    check_params(params, ensemble)?;
    if !(q >= 1.0) {
        return Err(Error::InvalidParams(format!("decay exponent must be ≥ 1, got {q}")));
    }
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParams("decay times must be positive and nonempty".into()));
    }
    let alpha = params.alpha;
    let objective = |f: &GridFunction| -> Result<Option<(f64, Option<f64>)>> {
        let g = lp_project(f, n_scale, Projection::Band)?;
        decay_rate(&g, alpha, q, n_scale, t_grid)
    };
    let ext = minimize(ensemble, &objective, refinement)?;
    Ok(ConstantEstimate {
        quantity: Quantity::DecayC,
        alpha,
        dim: params.dim,
        q,
        n_scale: Some(n_scale),
        value: ext.value,
        ensemble_value: ext.ensemble_value,
        witness: ext.witness,
        ensemble: *ensemble,
    })
}

/// `∫ (|∇|^α P f) |P f|^{q-2} P f / (N^α ‖P f‖_q^q)` for the projection `P`.
pub fn bernstein_ratio(f: &GridFunction, alpha: f64, q: f64, n_scale: f64, projection: Projection) -> Result<Option<f64>> {
    let g = lp_project(f, n_scale, projection)?;
    let norm_q = lebesgue_norm(&g, q)?;
    if norm_q == 0.0 {
        return Ok(None);
    }
    let h = apply_multiplier(&g, &SpectralMultiplier::fractional_laplacian(alpha));
    Ok(Some(weighted_pairing(&h, &g, q)? / (n_scale.powf(alpha) * norm_q.powf(q))))
}

pub fn estimate_bernstein_constant(
    params: &FractionalParams,
    q: f64,
    n_scale: f64,
    ensemble: &EnsembleSpec,
) -> Result<ConstantEstimate> {
    estimate_bernstein_constant_with(params, q, n_scale, ensemble, Projection::Band, Refinement::default())
}

/// Bernstein constant with `P_N` replaced by any Littlewood–Paley projection.
pub fn estimate_bernstein_constant_with(
    params: &FractionalParams,
    q: f64,
    n_scale: f64,
    ensemble: &EnsembleSpec,
    projection: Projection,
    refinement: Refinement,
) -> Result<ConstantEstimate> {
    check_params(params, ensemble)?;
    check_pairing_exponent(q)?;
    let alpha = params.alpha;
    let objective = |f: &GridFunction| -> Result<Option<(f64, Option<f64>)>> {
        Ok(bernstein_ratio(f, alpha, q, n_scale, projection)?.map(|v| (v, None)))
    };
    let ext = minimize(ensemble, &objective, refinement)?;
    Ok(ConstantEstimate {
        quantity: Quantity::BernsteinC,
        alpha,
        dim: params.dim,
        q,
        n_scale: Some(n_scale),
        value: ext.value,
        ensemble_value: ext.ensemble_value,
        witness: ext.witness,
        ensemble: *ensemble,
    })
}

/// `∫ (|∇|^α f)|f|^{q-2} f / ‖f‖_q^q` for mean-zero `f`.
pub fn poincare_ratio(f: &GridFunction, alpha: f64, q: f64) -> Result<Option<f64>> {
    require_mean_zero(f)?;
    let norm_q = lebesgue_norm(f, q)?;
    if norm_q == 0.0 {
        return Ok(None);
    }
    let h = apply_multiplier(f, &SpectralMultiplier::fractional_laplacian(alpha));
    Ok(Some(weighted_pairing(&h, f, q)? / norm_q.powf(q)))
}

pub fn estimate_poincare_constant(params: &FractionalParams, q: f64, ensemble: &EnsembleSpec) -> Result<ConstantEstimate> {
    estimate_poincare_constant_with(params, q, ensemble, Refinement::default())
}

pub fn estimate_poincare_constant_with(
    params: &FractionalParams,
    q: f64,
    ensemble: &EnsembleSpec,
    refinement: Refinement,
) -> Result<ConstantEstimate> {
    check_params(params, ensemble)?;
    check_pairing_exponent(q)?;
    let alpha = params.alpha;
    let objective =
        |f: &GridFunction| -> Result<Option<(f64, Option<f64>)>> { Ok(poincare_ratio(f, alpha, q)?.map(|v| (v, None))) };
    let ext = minimize(ensemble, &objective, refinement)?;
    Ok(ConstantEstimate {
        quantity: Quantity::PoincareC,
        alpha,
        dim: params.dim,
        q,
        n_scale: None,
        value: ext.value,
        ensemble_value: ext.ensemble_value,
        witness: ext.witness,
        ensemble: *ensemble,
    })
}

/// `max_{x,t} |e^{-t|∇|^α} f|(x) / (Mf)(x)` for one function, skipping `0/0`.
pub fn maximal_ratio(f: &GridFunction, alpha: f64, t_grid: &[f64]) -> Option<(f64, Option<f64>)> {
    let m = maximal_function(f);
    let mut best: Option<(f64, Option<f64>)> = None;
    for &t in t_grid {
        let u = apply_multiplier(f, &SpectralMultiplier::semigroup(alpha, t));
        for (v, mv) in u.values().iter().zip(m.values()) {
            if mv.re > 0.0 {
                let r = v.norm() / mv.re;
                if best.is_none_or(|b| r > b.0) {
                    best = Some((r, Some(t)));
                }
            }
        }
    }
    best
}

/// `Ĉ = max` of [`maximal_ratio`] over the ensemble.
pub fn maximal_domination_constant(
    params: &FractionalParams,
    ensemble: &EnsembleSpec,
    t_grid: &[f64],
) -> Result<ConstantEstimate> {
    check_params(params, ensemble)?;
    ensemble.validate()?;
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidParams("maximal times must be nonnegative and nonempty".into()));
    }
    let alpha = params.alpha;
    let values: Vec<Result<Option<(f64, Option<f64>)>>> = (0..ensemble.n_samples)
        .into_par_iter()
        .map(|i| Ok(maximal_ratio(&ensemble.synthesize(&member_coefficients(ensemble, i))?, alpha, t_grid)))
        .collect();
    let mut best: Option<(f64, Option<f64>, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if let Some((value, t)) = v? {
            if best.is_none_or(|b| value > b.0) {
                best = Some((value, t, i));
            }
        }
    }
    let (value, t, member) = best.ok_or_else(|| Error::InvalidParams("every ensemble member vanishes".into()))?;
    Ok(ConstantEstimate {
        quantity: Quantity::MaximalC,
        alpha,
        dim: params.dim,
        q: f64::INFINITY,
        n_scale: None,
        value,
        ensemble_value: value,
        witness: Witness { member, t, refined: false },
        ensemble: *ensemble,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub pairing: f64,
    /// Extrapolated `F'(0)`.
    pub derivative: f64,
    /// `|F'(0) + q·pairing|` after extrapolation.
    pub residual: f64,
    /// `(h, |(F(h) − F(0))/h + q·pairing|)` for each raw step.
    pub raw: Vec<(f64, f64)>,
}

/// Steps `τ·{10⁻², 5·10⁻³, 2.5·10⁻³}` with `τ = (2π·2N)^{-α}`, the inverse
/// of the largest symbol value on the band.
pub fn default_fd_steps(alpha: f64, n_scale: f64) -> Vec<f64> {
    let tau = (2.0 * PI * 2.0 * n_scale).powf(-alpha);
    [1e-2, 5e-3, 2.5e-3].iter().map(|h| h * tau).collect()
}

/// Compare the one-sided derivative of `F(t) = ‖e^{-t|∇|^α} P_N f‖_q^q` at 0
/// with `−q` times the Bernstein pairing, extrapolating over `h_seq`.
pub fn check_derivative_identity(
    f: &GridFunction,
    n_scale: f64,
    params: &FractionalParams,
    q: f64,
    h_seq: &[f64],
) -> Result<DerivativeCheck> {
    check_pairing_exponent(q)?;
    if h_seq.is_empty() || h_seq.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidParams("finite-difference steps must be positive".into()));
    }
    let g = lp_project(f, n_scale, Projection::Band)?;
    let h_op = apply_multiplier(&g, &SpectralMultiplier::fractional_laplacian(params.alpha));
    let pairing = weighted_pairing(&h_op, &g, q)?;
    let big_f = |t: f64| -> Result<f64> {
        let u = if t == 0.0 { g.clone() } else { apply_multiplier(&g, &SpectralMultiplier::semigroup(params.alpha, t)) };
        Ok(lebesgue_norm(&u, q)?.powf(q))
    };
    let f0 = big_f(0.0)?;
    let diffs: Vec<f64> = h_seq.iter().map(|&h| Ok((big_f(h)? - f0) / h)).collect::<Result<_>>()?;
    let raw = h_seq.iter().zip(&diffs).map(|(&h, &d)| (h, (d + q * pairing).abs())).collect();
    // Neville extrapolation to h = 0 of the polynomial through the differences
    let mut table = diffs;
    for m in 1..h_seq.len() {
        table = (0..table.len() - 1)
            .map(|j| (h_seq[j] * table[j + 1] - h_seq[j + m] * table[j]) / (h_seq[j] - h_seq[j + m]))
            .collect();
    }
    let derivative = table[0];
    Ok(DerivativeCheck { pairing, derivative, residual: (derivative + q * pairing).abs(), raw })
}
