//! Sampled functions on the periodic box `[0, L)^d`.

use std::io::{Read, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlannerScalar};

use crate::error::{Error, Result};
use crate::params::MAX_DIM;

/// Samples of a function on a uniform periodic grid with `n` points per axis,
/// stored in row-major order (last axis fastest).
///
/// Spectral coefficients follow `f(x) = Σ_k c_k e^{2πi k·x/L}`, with `c_k`
/// the unnormalized DFT divided by `n^d`. Functions produced by a spectral
/// operation remember the exact coefficients they were synthesized from, so
/// coefficients zeroed by a multiplier read back as exact zeros.
#[derive(Clone, Debug)]
pub struct GridFunction {
    dim: usize,
    box_len: f64,
    n: usize,
    values: Vec<Complex64>,
    is_real: bool,
    spectrum: Option<Arc<Vec<Complex64>>>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.box_len == other.box_len
            && self.n == other.n
            && self.is_real == other.is_real
            && self.values == other.values
    }
}

fn check_shape(dim: usize, box_len: f64, n: usize) -> Result<usize> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidParams(format!("grid dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    if !(box_len > 0.0 && box_len.is_finite()) {
        return Err(Error::InvalidParams(format!("box length must be positive, got {box_len}")));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParams(format!("samples per axis must be a power of two ≥ 2, got {n}")));
    }
    n.checked_pow(dim as u32)
        .filter(|&len| len <= 1 << 28)
        .ok_or_else(|| Error::InvalidParams(format!("grid {n}^{dim} is too large")))
}

/// Signed wavenumber of DFT index `j` on an `n`-point axis.
pub(crate) fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

pub(crate) fn fft_nd(values: &mut [Complex64], dim: usize, n: usize, direction: FftDirection) {
    let mut planner = FftPlannerScalar::new();
    let fft = planner.plan_fft(n, direction);
    let mut line = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let total = values.len();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = values[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    values[base + i * stride] = *v;
                }
            }
        }
    }
}

/// Replace `c_k` by `(c_k + conj(c_{-k}))/2`, the spectrum of the real part.
fn hermitian_part(c: &mut [Complex64], dim: usize, n: usize) {
    let src = c.to_vec();
    for (idx, v) in c.iter_mut().enumerate() {
        let mut rem = idx;
        let mut mirror = 0;
        let mut weight = 1;
        for _ in 0..dim {
            let j = rem % n;
            mirror += ((n - j) % n) * weight;
            weight *= n;
            rem /= n;
        }
        *v = 0.5 * (src[idx] + src[mirror].conj());
    }
}

impl GridFunction {
    pub fn new(dim: usize, box_len: f64, n: usize, values: Vec<Complex64>, is_real: bool) -> Result<Self> {
        let len = check_shape(dim, box_len, n)?;
        if values.len() != len {
            return Err(Error::InvalidParams(format!(
                "expected {len} samples for a {n}^{dim} grid, got {}",
                values.len()
            )));
        }
        let mut g = Self { dim, box_len, n, values, is_real, spectrum: None };
        if is_real {
            g.drop_imaginary();
        }
        Ok(g)
    }

    pub fn zeros(dim: usize, box_len: f64, n: usize) -> Result<Self> {
        let len = check_shape(dim, box_len, n)?;
        Ok(Self {
            dim,
            box_len,
            n,
            values: vec![Complex64::default(); len],
            is_real: true,
            spectrum: None,
        })
    }

    /// Sample a real function at the grid points.
    pub fn from_real_fn(dim: usize, box_len: f64, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::zeros(dim, box_len, n)?;
        let mut x = [0.0; MAX_DIM];
        for idx in 0..g.values.len() {
            g.fill_point(idx, &mut x);
            g.values[idx] = Complex64::new(f(&x[..dim]), 0.0);
        }
        Ok(g)
    }

    pub fn from_complex_fn(
        dim: usize,
        box_len: f64,
        n: usize,
        f: impl Fn(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let mut g = Self::zeros(dim, box_len, n)?;
        g.is_real = false;
        let mut x = [0.0; MAX_DIM];
        for idx in 0..g.values.len() {
            g.fill_point(idx, &mut x);
            g.values[idx] = f(&x[..dim]);
        }
        Ok(g)
    }

    /// Build from spectral coefficients `c_k` in DFT index order.
    pub fn from_coefficients(
        dim: usize,
        box_len: f64,
        n: usize,
        mut coeffs: Vec<Complex64>,
        is_real: bool,
    ) -> Result<Self> {
        let len = check_shape(dim, box_len, n)?;
        if coeffs.len() != len {
            return Err(Error::InvalidParams(format!("expected {len} coefficients, got {}", coeffs.len())));
        }
        if is_real {
            hermitian_part(&mut coeffs, dim, n);
        }
        let spectrum = Arc::new(coeffs.clone());
        fft_nd(&mut coeffs, dim, n, FftDirection::Inverse);
        let mut g = Self::new(dim, box_len, n, coeffs, is_real)?;
        g.spectrum = Some(spectrum);
        Ok(g)
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        if let Some(c) = &self.spectrum {
            return c.as_ref().clone();
        }
        let mut c = self.values.clone();
        fft_nd(&mut c, self.dim, self.n, FftDirection::Forward);
        let scale = 1.0 / self.values.len() as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        c
    }

    /// Multiply the spectrum by `symbol(ξ)`, `ξ = k/L`. The result stays real
    /// when the input is real and `symbol_is_real` holds.
    pub fn map_spectrum(&self, symbol: impl Fn(&[f64]) -> Complex64, symbol_is_real: bool) -> Self {
        let mut c = self.coefficients();
        let mut xi = [0.0; MAX_DIM];
        for (idx, v) in c.iter_mut().enumerate() {
            self.fill_frequency(idx, &mut xi);
            *v *= symbol(&xi[..self.dim]);
        }
        let is_real = self.is_real && symbol_is_real;
        if is_real {
            hermitian_part(&mut c, self.dim, self.n);
        }
        let spectrum = Arc::new(c.clone());
        fft_nd(&mut c, self.dim, self.n, FftDirection::Inverse);
        let mut out = Self {
            dim: self.dim,
            box_len: self.box_len,
            n: self.n,
            values: c,
            is_real,
            spectrum: Some(spectrum),
        };
        if out.is_real {
            out.drop_imaginary();
        }
        out
    }

    fn drop_imaginary(&mut self) {
        self.values.iter_mut().for_each(|v| v.im = 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Real parts of the samples.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        (self.box_len / self.n as f64).powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(self.dim as i32)
    }

    /// Largest representable frequency magnitude per axis, `n / (2L)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.box_len)
    }

    /// Coordinates of sample `idx`.
    pub fn fill_point(&self, idx: usize, out: &mut [f64; MAX_DIM]) {
        let h = self.box_len / self.n as f64;
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
    }

    /// Frequency `k/L` of DFT index `idx`.
    pub fn fill_frequency(&self, idx: usize, out: &mut [f64; MAX_DIM]) {
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = wavenumber(rem % self.n, self.n) as f64 / self.box_len;
            rem /= self.n;
        }
    }

    pub fn frequency_norm(&self, idx: usize) -> f64 {
        let mut xi = [0.0; MAX_DIM];
        self.fill_frequency(idx, &mut xi);
        xi[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Box average `L^{-d} ∫ f`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.spectrum = self.spectrum.as_ref().map(|c| Arc::new(c.iter().map(|v| v * s).collect()));
        out
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64, is_real: bool) -> Result<Self> {
        self.require_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.dim, self.box_len, self.n, values, is_real)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b, self.is_real && other.is_real)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b, self.is_real && other.is_real)
    }

    pub fn require_same_grid(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.n != other.n || self.box_len != other.box_len {
            return Err(Error::InvalidParams(format!(
                "grid mismatch: ({}, {}, {}) vs ({}, {}, {})",
                self.dim, self.box_len, self.n, other.dim, other.box_len, other.n
            )));
        }
        Ok(())
    }

    /// Little-endian binary layout: `dim: u64, L: f64, n: u64, is_real: u8`,
    /// then `n^d` pairs `(re: f64, im: f64)`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&self.box_len.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&[u8::from(self.is_real)])?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        let mut read_u64 = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let dim = u64::from_le_bytes(read_u64(&mut r)?) as usize;
        let box_len = f64::from_le_bytes(read_u64(&mut r)?);
        let n = u64::from_le_bytes(read_u64(&mut r)?) as usize;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let is_real = match flag[0] {
            0 => false,
            1 => true,
            other => return Err(Error::Format(format!("invalid is_real flag {other}"))),
        };
        let len = check_shape(dim, box_len, n).map_err(|e| Error::Format(e.to_string()))?;
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            let re = f64::from_le_bytes(read_u64(&mut r)?);
            let im = f64::from_le_bytes(read_u64(&mut r)?);
            values.push(Complex64::new(re, im));
        }
        Ok(Self { dim, box_len, n, values, is_real, spectrum: None })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(25 + 16 * self.values.len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let g = Self::read_from(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Format(format!("{} trailing bytes after grid data", cursor.len())));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_has_single_coefficient() {
        let g = GridFunction::from_complex_fn(2, 1.0, 8, |x| {
            Complex64::from_polar(1.0, 2.0 * PI * (3.0 * x[0] - 2.0 * x[1]))
        })
        .unwrap();
        let c = g.coefficients();
        for (idx, v) in c.iter().enumerate() {
            let mut xi = [0.0; MAX_DIM];
            g.fill_frequency(idx, &mut xi);
            let expected = if xi[0] == 3.0 && xi[1] == -2.0 { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-14, "{xi:?}");
        }
    }

    #[test]
    fn round_trip_through_coefficients() {
        let g = GridFunction::from_real_fn(3, 2.0, 4, |x| x[0] - x[1] * x[2]).unwrap();
        let back = GridFunction::from_coefficients(3, 2.0, 4, g.coefficients(), true).unwrap();
        for (a, b) in g.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridFunction::zeros(1, 1.0, 12).is_err());
        assert!(GridFunction::zeros(4, 1.0, 4).is_err());
        assert!(GridFunction::zeros(1, -1.0, 4).is_err());
        assert!(GridFunction::new(1, 1.0, 4, vec![Complex64::default(); 3], true).is_err());
    }

    #[test]
    fn bytes_round_trip() {
        let g = GridFunction::from_complex_fn(2, 0.5, 4, |x| Complex64::new(x[0], -x[1])).unwrap();
        let bytes = g.to_bytes();
        assert_eq!(bytes.len(), 25 + 16 * 16);
        assert_eq!(&bytes[..8], &2u64.to_le_bytes());
        assert_eq!(GridFunction::from_bytes(&bytes).unwrap(), g);
        assert!(GridFunction::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }
}
