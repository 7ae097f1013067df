//! Least-squares fits of a constant's dependence on the exponent `q`.

use serde::{Deserialize, Serialize};

use super::estimators::ConstantEstimate;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileModel {
    ConstantInQ,
    QMinus1OverQ2,
}

impl ProfileModel {
    /// Shape `g(q)` such that the model is `κ·g(q)`; the `q = ∞` limit of
    /// `(q−1)/q²` is 0.
    pub fn shape(&self, q: f64) -> f64 {
        match self {
            ProfileModel::ConstantInQ => 1.0,
            ProfileModel::QMinus1OverQ2 if q.is_infinite() => 0.0,
            ProfileModel::QMinus1OverQ2 => (q - 1.0) / (q * q),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileModel::ConstantInQ => "constant_in_q",
            ProfileModel::QMinus1OverQ2 => "q_minus_1_over_q2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFit {
    pub model: ProfileModel,
    pub kappa: f64,
    /// `max_q |value − κ g(q)| / value`.
    pub residual: f64,
}

/// Fit `value(q) ≈ κ g(q)` by least squares on `(q, value)` pairs.
pub fn fit_profile_points(points: &[(f64, f64)], model: ProfileModel) -> Result<ProfileFit> {
    let mut qs: Vec<f64> = points.iter().map(|p| p.0).collect();
    qs.sort_by(f64::total_cmp);
    qs.dedup();
    if qs.len() < 4 {
        return Err(Error::InvalidParams(format!("profile fit needs at least 4 distinct q values, got {}", qs.len())));
    }
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(q, v)| {
        let g = model.shape(q);
        (n + g * v, d + g * g)
    });
    if den == 0.0 {
        return Err(Error::InvalidParams("profile shape vanishes on every q".into()));
    }
    let kappa = num / den;
    let residual = points
        .iter()
        .map(|&(q, v)| (v - kappa * model.shape(q)).abs() / v.abs())
        .fold(0.0, f64::max);
    Ok(ProfileFit { model, kappa, residual })
}

pub fn fit_q_profile(estimates: &[ConstantEstimate], model: ProfileModel) -> Result<ProfileFit> {
    let points: Vec<(f64, f64)> = estimates.iter().map(|e| (e.q, e.value)).collect();
    fit_profile_points(&points, model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_synthetic_profile() {
        let pts: Vec<(f64, f64)> = [1.25, 1.5, 2.0, 4.0, 8.0].iter().map(|&q| (q, 0.7 * (q - 1.0) / (q * q))).collect();
        let fit = fit_profile_points(&pts, ProfileModel::QMinus1OverQ2).unwrap();
        assert!((fit.kappa - 0.7).abs() < 1e-14);
        assert!(fit.residual < 1e-14);
        let flat = fit_profile_points(&pts, ProfileModel::ConstantInQ).unwrap();
        assert!(flat.residual > fit.residual);
    }

    #[test]
    fn too_few_exponents() {
        let pts = [(2.0, 1.0), (2.0, 1.1), (3.0, 1.0)];
        assert!(fit_profile_points(&pts, ProfileModel::ConstantInQ).is_err());
    }
}
