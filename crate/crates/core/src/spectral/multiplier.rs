//! Radial Fourier multipliers and the operations built from them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bump::{make_bump, BumpKind};
use super::grid::GridFunction;
use crate::error::{Error, Result};
use crate::params::FractionalParams;

type Symbol = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A Fourier multiplier `f̂(ξ) ↦ m(ξ) f̂(ξ)`.
#[derive(Clone)]
pub struct SpectralMultiplier {
    label: String,
    symbol: Arc<Symbol>,
    real: bool,
}

impl fmt::Debug for SpectralMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralMultiplier").field("label", &self.label).field("real", &self.real).finish()
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl SpectralMultiplier {
    pub fn new(label: impl Into<String>, symbol: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), symbol: Arc::new(symbol), real: false }
    }

    /// Real radial multiplier `m(ξ) = g(|ξ|)`.
    pub fn radial(label: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            symbol: Arc::new(move |xi: &[f64]| Complex64::new(g(norm(xi)), 0.0)),
            real: true,
        }
    }

    /// `|∇|^α`, symbol `(2π|ξ|)^α`.
    pub fn fractional_laplacian(alpha: f64) -> Self {
        Self::radial(format!("|D|^{alpha}"), move |r| (2.0 * PI * r).powf(alpha))
    }

    /// `e^{-t|∇|^α}`.
    pub fn semigroup(alpha: f64, t: f64) -> Self {
        Self::radial(format!("exp(-{t}|D|^{alpha})"), move |r| (-t * (2.0 * PI * r).powf(alpha)).exp())
    }

    /// `φ_ε(ξ) = (2π|ξ|)^α + ε φ₁(ξ)`.
    pub fn perturbed_symbol(alpha: f64, eps: f64) -> Self {
        let phi1 = make_bump(BumpKind::PerturbPhi1);
        Self::radial(format!("|D|^{alpha}+{eps}phi1"), move |r| (2.0 * PI * r).powf(alpha) + eps * phi1.eval(r))
    }

    /// Littlewood–Paley cut-off at scale `n_scale`.
    pub fn littlewood_paley(n_scale: f64, kind: Projection) -> Self {
        let phi = make_bump(BumpKind::LpPhi);
        let label = format!("P_{n_scale}[{kind:?}]");
        match kind {
            Projection::Band => Self::radial(label, move |r| phi.band(r / n_scale)),
            Projection::Low => Self::radial(label, move |r| phi.eval(r / n_scale)),
            Projection::High => Self::radial(label, move |r| 1.0 - phi.eval(r / n_scale)),
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        let (a, b) = (self.symbol.clone(), other.symbol.clone());
        Self {
            label: format!("{}*{}", self.label, other.label),
            symbol: Arc::new(move |xi: &[f64]| a(xi) * b(xi)),
            real: self.real && other.real,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.symbol)(xi)
    }

    /// Whether the symbol takes only real values.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Compare the symbol at `|ξ| = r` along each coordinate axis and the
    /// diagonal, for every radius in `radii`.
    pub fn is_radial_on(&self, dim: usize, radii: &[f64], rel_tol: f64) -> bool {
        radii.iter().all(|&r| {
            let mut reference = vec![0.0; dim];
            reference[0] = r;
            let m0 = self.eval(&reference);
            let diag = vec![r / (dim as f64).sqrt(); dim];
            let mut probes = vec![diag];
            for axis in 0..dim {
                let mut v = vec![0.0; dim];
                v[axis] = -r;
                probes.push(v);
            }
            probes.iter().all(|xi| (self.eval(xi) - m0).norm() <= rel_tol * m0.norm().max(1e-300))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Band,
    Low,
    High,
}

/// Frequency annulus `A₁ ≤ |ξ| ≤ A₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyAnnulus {
    pub a1: f64,
    pub a2: f64,
}

impl FrequencyAnnulus {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > a1 && a2.is_finite()) {
            return Err(Error::InvalidParams(format!("annulus needs 0 < A1 < A2, got [{a1}, {a2}]")));
        }
        Ok(Self { a1, a2 })
    }

    /// The support annulus `[N/2, 2N]` of the band projection at scale `N`.
    pub fn band(n_scale: f64) -> Self {
        Self { a1: n_scale / 2.0, a2: 2.0 * n_scale }
    }

    pub fn contains(&self, r: f64) -> bool {
        self.a1 <= r && r <= self.a2
    }
}

fn require_dyadic(n_scale: f64) -> Result<()> {
    if !(n_scale > 0.0) || n_scale.log2().fract() != 0.0 {
        return Err(Error::InvalidParams(format!("scale N must be a power of two, got {n_scale}")));
    }
    Ok(())
}

pub fn apply_multiplier(f: &GridFunction, m: &SpectralMultiplier) -> GridFunction {
    f.map_spectrum(|xi| m.eval(xi), m.is_real())
}

/// Littlewood–Paley projection at the dyadic scale `n_scale`.
pub fn lp_project(f: &GridFunction, n_scale: f64, kind: Projection) -> Result<GridFunction> {
    require_dyadic(n_scale)?;
    let limit = f.nyquist() / 2.0;
    if n_scale > limit {
        return Err(Error::BeyondNyquist { requested: n_scale, limit });
    }
    Ok(apply_multiplier(f, &SpectralMultiplier::littlewood_paley(n_scale, kind)))
}

/// `q`-norm by Riemann sum; `q = ∞` gives the sample maximum.
pub fn lebesgue_norm(f: &GridFunction, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParams(format!("Lebesgue exponent must be ≥ 1, got {q}")));
    }
    if q.is_infinite() {
        return Ok(f.sup_norm());
    }
    let sum: f64 = if q == 2.0 {
        f.values().iter().map(|v| v.norm_sqr()).sum()
    } else {
        f.values().iter().map(|v| v.norm().powf(q)).sum()
    };
    Ok((sum * f.cell_volume()).powf(1.0 / q))
}

/// `s ↦ |s|^{q-2} s`, with the value 0 at `s = 0`.
pub fn signed_power(s: f64, q: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(q - 1.0)
    }
}

/// `∫ h |g|^{q-2} g` for real samples.
pub fn weighted_pairing(h: &GridFunction, g: &GridFunction, q: f64) -> Result<f64> {
    h.require_same_grid(g)?;
    let sum: f64 = h.values().iter().zip(g.values()).map(|(a, b)| a.re * signed_power(b.re, q)).sum();
    Ok(sum * g.cell_volume())
}

/// `∫ (P_N |∇|^α f) |P_N f|^{q-2} P_N f`.
pub fn bernstein_pairing(f: &GridFunction, n_scale: f64, params: &FractionalParams, q: f64) -> Result<f64> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParams(format!("pairing exponent must be in (1, ∞), got {q}")));
    }
    if !f.is_real() {
        return Err(Error::InvalidParams("pairing requires a real-valued function".into()));
    }
    if params.dim != f.dim() {
        return Err(Error::InvalidParams(format!("params dimension {} does not match grid {}", params.dim, f.dim())));
    }
    let g = lp_project(f, n_scale, Projection::Band)?;
    let h = apply_multiplier(&g, &SpectralMultiplier::fractional_laplacian(params.alpha));
    weighted_pairing(&h, &g, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(n: usize) -> GridFunction {
        GridFunction::from_real_fn(1, 1.0, n, |x| (2.0 * PI * x[0]).sin()).unwrap()
    }

    #[test]
    fn norms_of_sine() {
        let f = sine(64);
        assert!((lebesgue_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((lebesgue_norm(&f, 4.0).unwrap() - 0.375f64.powf(0.25)).abs() < 1e-14);
        assert!((lebesgue_norm(&f, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!(lebesgue_norm(&f, 0.5).is_err());
    }

    #[test]
    fn signed_power_at_zero() {
        assert_eq!(signed_power(0.0, 1.2), 0.0);
        assert_eq!(signed_power(-2.0, 3.0), -4.0);
    }

    #[test]
    fn projection_rejects_bad_scales() {
        let f = sine(64);
        assert!(lp_project(&f, 3.0, Projection::Band).is_err());
        assert!(matches!(lp_project(&f, 32.0, Projection::Band), Err(Error::BeyondNyquist { .. })));
        assert!(lp_project(&f, 16.0, Projection::Band).is_ok());
    }

    #[test]
    fn symbols_are_radial() {
        for m in [
            SpectralMultiplier::fractional_laplacian(1.3),
            SpectralMultiplier::littlewood_paley(2.0, Projection::Band),
            SpectralMultiplier::perturbed_symbol(0.5, 0.2),
        ] {
            assert!(m.is_radial_on(3, &[0.1, 0.3, 1.0, 3.0], 1e-12), "{}", m.label());
        }
        let skew = SpectralMultiplier::new("skew", |xi| Complex64::new(xi[0], 0.0));
        assert!(!skew.is_radial_on(2, &[1.0], 1e-12));
    }
}
