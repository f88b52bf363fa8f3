//! Uniform periodic grid with FFT-based differentiation and quadrature.
//!
//! Nodes are `x_j = center - L/2 + j L/n`. Wavenumbers follow the usual DFT
//! ordering `k_j = 2π s_j / L` with signed index `s_j = j` for `j < n/2` and
//! `s_j = j - n` otherwise, so the Nyquist mode sits at `j = n/2` with
//! `s = -n/2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sum::Neumaier;

/// Which modes survive a dealiasing truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Keep `|s| <= n/3` (quadratic products).
    TwoThirds,
    /// Keep `|s| <= n/4` (cubic products).
    Half,
}

pub struct Grid {
    n: usize,
    length: f64,
    center: f64,
    dx: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).field("length", &self.length).field("center", &self.center).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.length.to_bits() == other.length.to_bits()
            && self.center.to_bits() == other.center.to_bits()
    }
}

impl Grid {
    pub fn new(n: usize, length: f64, center: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidPointCount(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidLength(length));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter { name: "center", reason: format!("must be finite, got {center}") });
        }
        let dx = length / n as f64;
        let start = center - 0.5 * length;
        let nodes = (0..n).map(|j| start + j as f64 * length / n as f64).collect();
        let base = 2.0 * PI / length;
        let wavenumbers = (0..n).map(|j| base * signed_index(j, n) as f64).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            length,
            center,
            dx,
            nodes,
            wavenumbers,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    /// Convenience for the common `Arc<Grid>` ownership pattern.
    pub fn shared(n: usize, length: f64, center: f64) -> Result<Arc<Self>> {
        Self::new(n, length, center).map(Arc::new)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Left edge of the box (the first node).
    pub fn lower(&self) -> f64 {
        self.center - 0.5 * self.length
    }

    /// Right edge of the box (periodic image of the first node).
    pub fn upper(&self) -> f64 {
        self.center + 0.5 * self.length
    }

    pub fn signed_index(&self, j: usize) -> i64 {
        signed_index(j, self.n)
    }

    /// Wavenumber with the Nyquist mode zeroed, used for odd-order symbols.
    #[inline]
    pub fn odd_wavenumber(&self, j: usize) -> f64 {
        if j == self.n / 2 {
            0.0
        } else {
            self.wavenumbers[j]
        }
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::GridMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    /// Unnormalized forward DFT in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Normalized inverse DFT in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let scale = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn forward_complex(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_to_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse_in_place(&mut spec);
        spec.into_iter().map(|z| z.re).collect()
    }

    pub fn inverse_to_complex(&self, mut spec: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse_in_place(&mut spec);
        spec
    }

    /// Zero every mode outside the kept band.
    pub fn truncate(&self, spec: &mut [Complex64], rule: Truncation) {
        let keep = match rule {
            Truncation::TwoThirds => self.n / 3,
            Truncation::Half => self.n / 4,
        } as i64;
        for (j, z) in spec.iter_mut().enumerate() {
            if self.signed_index(j).abs() > keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Multiply spectral coefficients by `(ik)^order`.
    pub fn apply_derivative_symbol(&self, spec: &mut [Complex64], order: u32) -> Result<()> {
        let i = Complex64::new(0.0, 1.0);
        match order {
            1 | 3 => {
                for (j, z) in spec.iter_mut().enumerate() {
                    let k = self.odd_wavenumber(j);
                    *z *= i.powu(order) * k.powi(order as i32);
                }
            }
            2 => {
                for (z, &k) in spec.iter_mut().zip(&self.wavenumbers) {
                    *z *= -k * k;
                }
            }
            _ => return Err(Error::InvalidDerivativeOrder(order)),
        }
        Ok(())
    }

    pub fn derivative(&self, f: &[f64], order: u32) -> Result<Vec<f64>> {
        self.check_len(f.len())?;
        let mut spec = self.forward_real(f);
        self.apply_derivative_symbol(&mut spec, order)?;
        Ok(self.inverse_to_real(spec))
    }

    pub fn derivative_complex(&self, f: &[Complex64], order: u32) -> Result<Vec<Complex64>> {
        self.check_len(f.len())?;
        let mut spec = self.forward_complex(f);
        self.apply_derivative_symbol(&mut spec, order)?;
        Ok(self.inverse_to_complex(spec))
    }

    /// Periodic trapezoid rule `dx * Σ f_j`, compensated.
    pub fn quadrature(&self, f: &[f64]) -> f64 {
        let mut acc = Neumaier::new();
        for &x in f {
            acc.add(x);
        }
        self.dx * acc.value()
    }

    pub fn quadrature_complex(&self, f: &[Complex64]) -> Complex64 {
        let mut re = Neumaier::new();
        let mut im = Neumaier::new();
        for z in f {
            re.add(z.re);
            im.add(z.im);
        }
        Complex64::new(self.dx * re.value(), self.dx * im.value())
    }

    /// Quadrature of `f(x_j)` for a pointwise integrand evaluated on the nodes.
    pub fn integrate_with<F: FnMut(usize, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut acc = Neumaier::new();
        for (j, &x) in self.nodes.iter().enumerate() {
            acc.add(f(j, x));
        }
        self.dx * acc.value()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn sample_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
