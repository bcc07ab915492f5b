//! Periodic Fourier-collocation grid with matrix-free spectral operators.
//!
//! All operators are Fourier multipliers with Hermitian-symmetric symbols, so
//! they map real vectors to real vectors and extend complex-linearly. Two real
//! vectors are therefore transformed together as `u + i v` with one complex FFT.
//!
//! Nyquist convention: the first-derivative symbol `i kappa` is zeroed at
//! `m = -N/2`, while the second-derivative symbol `-kappa^2` keeps it. Hence
//! `diff2 != diff1 . diff1` on that single mode. The Helmholtz inverse uses the
//! `diff1 . diff1` convention.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};

#[derive(Clone)]
pub struct SpectralGrid {
    l_i: f64,
    l_s: f64,
    n: usize,
    nodes: Vec<f64>,
    /// `kappa_m` in FFT storage order.
    kappa: Vec<f64>,
    /// Same as `kappa` with the Nyquist entry zeroed.
    kappa_odd: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("l_i", &self.l_i)
            .field("l_s", &self.l_s)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.l_i == other.l_i && self.l_s == other.l_s && self.n == other.n
    }
}

impl SpectralGrid {
    pub fn new(l_i: f64, l_s: f64, n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::BadGrid(format!("N must be even and >= 8, got {n}")));
        }
        if !(l_s > l_i) || !l_i.is_finite() || !l_s.is_finite() {
            return Err(Error::BadGrid(format!("empty interval ({l_i}, {l_s})")));
        }
        let l = l_s - l_i;
        let dx = l / n as f64;
        let nodes = (0..n).map(|j| l_i + j as f64 * dx).collect();
        let kappa: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / l
            })
            .collect();
        let mut kappa_odd = kappa.clone();
        kappa_odd[n / 2] = 0.0;
        let mut planner = FftPlanner::new();
        Ok(Self {
            l_i,
            l_s,
            n,
            nodes,
            kappa,
            kappa_odd,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_i(&self) -> f64 {
        self.l_i
    }

    pub fn l_s(&self) -> f64 {
        self.l_s
    }

    pub fn length(&self) -> f64 {
        self.l_s - self.l_i
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.kappa
    }

    /// Wavenumbers of the first-derivative symbol (Nyquist entry zero).
    pub fn odd_wavenumbers(&self) -> &[f64] {
        &self.kappa_odd
    }

    /// Unnormalized forward DFT of `u + i v`.
    pub fn forward_complex(&self, u: &[f64], v: &[f64]) -> Result<Vec<Complex64>> {
        check_len(self.n, u.len())?;
        check_len(self.n, v.len())?;
        let mut buf: Vec<Complex64> = u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b)).collect();
        self.forward.process(&mut buf);
        Ok(buf)
    }

    /// Separate spectra of two real vectors from one complex transform.
    pub fn forward_pair(&self, u: &[f64], v: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let z = self.forward_complex(u, v)?;
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n];
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let zc = z[(n - k) % n].conj();
            a[k] = (z[k] + zc) * 0.5;
            b[k] = (z[k] - zc) * Complex64::new(0.0, -0.5);
        }
        Ok((a, b))
    }

    /// Inverse of two Hermitian-symmetric spectra, returned as real vectors.
    pub fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.n, a.len())?;
        check_len(self.n, b.len())?;
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
        self.inverse.process(&mut buf);
        let s = 1.0 / self.n as f64;
        Ok((
            buf.iter().map(|z| z.re * s).collect(),
            buf.iter().map(|z| z.im * s).collect(),
        ))
    }

    /// Applies the multiplier `symbol(j)` (FFT index `j`) to `u` and `v`.
    /// The symbol must satisfy `symbol(N - j) = conj(symbol(j))`.
    pub fn apply_pair<F>(&self, u: &[f64], v: &[f64], symbol: F) -> Result<(Vec<f64>, Vec<f64>)>
    where
        F: Fn(usize) -> Complex64,
    {
        let mut z = self.forward_complex(u, v)?;
        for (j, zj) in z.iter_mut().enumerate() {
            *zj *= symbol(j);
        }
        self.inverse.process(&mut z);
        let s = 1.0 / self.n as f64;
        Ok((
            z.iter().map(|c| c.re * s).collect(),
            z.iter().map(|c| c.im * s).collect(),
        ))
    }

    fn apply<F>(&self, v: &[f64], symbol: F) -> Result<Vec<f64>>
    where
        F: Fn(usize) -> Complex64,
    {
        check_len(self.n, v.len())?;
        let zeros = vec![0.0; self.n];
        Ok(self.apply_pair(v, &zeros, symbol)?.0)
    }

    pub fn diff1_symbol(&self, j: usize) -> Complex64 {
        Complex64::new(0.0, self.kappa_odd[j])
    }

    pub fn diff2_symbol(&self, j: usize) -> Complex64 {
        Complex64::new(-self.kappa[j] * self.kappa[j], 0.0)
    }

    pub fn helmholtz_symbol(&self, b: f64, j: usize) -> Complex64 {
        let k = self.kappa_odd[j];
        Complex64::new(1.0 / (1.0 + b * k * k), 0.0)
    }

    /// First derivative (antisymmetric, annihilates constants).
    pub fn diff1(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply(v, |j| self.diff1_symbol(j))
    }

    pub fn diff1_pair(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.apply_pair(u, v, |j| self.diff1_symbol(j))
    }

    /// Second derivative (symmetric, keeps the Nyquist mode).
    pub fn diff2(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply(v, |j| self.diff2_symbol(j))
    }

    pub fn diff2_pair(&self, u: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.apply_pair(u, v, |j| self.diff2_symbol(j))
    }

    /// Solves `(I - b diff1^2) w = v`.
    pub fn helmholtz_inverse(&self, b: f64, v: &[f64]) -> Result<Vec<f64>> {
        if !(b >= 0.0) {
            return Err(Error::BadParams(format!("Helmholtz coefficient must be >= 0, got {b}")));
        }
        self.apply(v, |j| self.helmholtz_symbol(b, j))
    }

    /// Periodic trapezoidal rule `(l/N) sum v`.
    pub fn quadrature(&self, v: &[f64]) -> Result<f64> {
        check_len(self.n, v.len())?;
        Ok(self.dx() * v.iter().sum::<f64>())
    }
}

pub fn make_grid(l_i: f64, l_s: f64, n: usize) -> Result<SpectralGrid> {
    SpectralGrid::new(l_i, l_s, n)
}

/// Euclidean inner product.
pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}
