//! Reproducible ensembles of band-limited grid functions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MAX_DIM;
use crate::spectral::{Complex64, FrequencyAnnulus, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub annulus: FrequencyAnnulus,
    pub n_samples: usize,
    pub seed: u64,
    pub dim: usize,
    pub box_len: f64,
    /// Samples per axis.
    pub n: usize,
}

/// A wavevector of the annulus together with its DFT index and that of `−k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Mode {
    pub index: usize,
    pub mirror: usize,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        FrequencyAnnulus::new(self.annulus.a1, self.annulus.a2)?;
        GridFunction::zeros(self.dim, self.box_len, self.n)?;
        let nyquist = self.n as f64 / (2.0 * self.box_len);
        if self.annulus.a2 >= nyquist {
            return Err(Error::BeyondNyquist { requested: self.annulus.a2, limit: nyquist });
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParams("ensemble needs at least one member".into()));
        }
        if self.modes().is_empty() {
            return Err(Error::InvalidParams(format!(
                "annulus [{}, {}] contains no lattice frequency for box length {}",
                self.annulus.a1, self.annulus.a2, self.box_len
            )));
        }
        Ok(())
    }

    /// Representatives `k` (first nonzero component positive) of the lattice
    /// frequencies `k/L` in the annulus, in lexicographic order of `k`. The
    /// order does not depend on `n`, so refining the grid resamples the same
    /// functions.
    pub(crate) fn modes(&self) -> Vec<Mode> {
        let kmax = (self.annulus.a2 * self.box_len).floor() as i64;
        let side = (2 * kmax + 1) as usize;
        let n = self.n as i64;
        let mut out = Vec::new();
        for idx in 0..side.pow(self.dim as u32) {
            let mut rem = idx;
            let mut k = [0i64; MAX_DIM];
            for slot in k.iter_mut().take(self.dim) {
                *slot = (rem % side) as i64 - kmax;
                rem /= side;
            }
            let k = &k[..self.dim];
            let leading = k.iter().copied().find(|&v| v != 0).unwrap_or(0);
            if leading <= 0 {
                continue;
            }
            let norm = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt() / self.box_len;
            if !self.annulus.contains(norm) {
                continue;
            }
            let flat = |sign: i64| {
                k.iter().fold(0usize, |acc, &v| acc * self.n + (sign * v).rem_euclid(n) as usize)
            };
            out.push(Mode { index: flat(1), mirror: flat(-1) });
        }
        out
    }

    /// Number of lattice frequencies (counting `±k`) in the annulus.
    pub fn mode_count(&self) -> usize {
        2 * self.modes().len()
    }

    pub(crate) fn synthesize(&self, coeffs: &[Complex64]) -> Result<GridFunction> {
        let modes = self.modes();
        let mut spectrum = vec![Complex64::default(); self.n.pow(self.dim as u32)];
        for (m, &c) in modes.iter().zip(coeffs) {
            spectrum[m.index] = c;
            spectrum[m.mirror] = c.conj();
        }
        GridFunction::from_coefficients(self.dim, self.box_len, self.n, spectrum, true)
    }

    /// Same functions on a grid with `n` samples per axis.
    pub fn with_resolution(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

/// Independent complex normal coefficients (`E|c|² = 1`) for member `index`,
/// one per representative mode.
pub(crate) fn member_coefficients(spec: &EnsembleSpec, index: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..spec.modes().len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(scale * re, scale * im)
        })
        .collect()
}

/// Member `index` of the ensemble: a real function whose spectrum is
/// supported exactly on the annulus.
pub fn sample_band_limited(spec: &EnsembleSpec, index: usize) -> Result<GridFunction> {
    spec.validate()?;
    if index >= spec.n_samples {
        return Err(Error::InvalidParams(format!("member {index} out of range for {} samples", spec.n_samples)));
    }
    spec.synthesize(&member_coefficients(spec, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> EnsembleSpec {
        EnsembleSpec {
            annulus: FrequencyAnnulus::new(2.0, 5.0).unwrap(),
            n_samples: 4,
            seed: 11,
            dim: 2,
            box_len: 1.0,
            n: 16,
        }
    }

    #[test]
    fn modes_are_half_of_the_annulus() {
        let s = spec();
        let total = (-5i32..=5)
            .flat_map(|a| (-5i32..=5).map(move |b| (a, b)))
            .filter(|&(a, b)| {
                let r = ((a * a + b * b) as f64).sqrt();
                (2.0..=5.0).contains(&r)
            })
            .count();
        assert_eq!(s.mode_count(), total);
    }

    #[test]
    fn streams_differ_between_members() {
        let s = spec();
        assert_ne!(member_coefficients(&s, 0), member_coefficients(&s, 1));
        assert_eq!(member_coefficients(&s, 2), member_coefficients(&s, 2));
    }

    #[test]
    fn rejects_annulus_at_nyquist() {
        let mut s = spec();
        s.annulus = FrequencyAnnulus::new(2.0, 8.0).unwrap();
        assert!(s.validate().is_err());
        s.annulus = FrequencyAnnulus::new(0.2, 0.4).unwrap();
        assert!(s.validate().is_err());
    }
}
