//! Uniform periodic grid in the turning angle and its discrete calculus.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{FlowError, Result};

/// Smallest admissible number of nodes.
pub const MIN_NODES: usize = 128;

/// Uniform grid `theta_i = -pi + 2 pi i / n` on the circle of turning angles.
///
/// `n` is a multiple of four, so `0`, `±pi/2` and `pi` are nodes.
#[derive(Clone, Debug)]
pub struct ThetaGrid {
    n: usize,
    dtheta: f64,
    sin: Arc<[f64]>,
    cos: Arc<[f64]>,
}

impl PartialEq for ThetaGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl ThetaGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES || n % 4 != 0 {
            return Err(FlowError::Usage(format!(
                "grid needs n >= {MIN_NODES} with n divisible by 4, got n = {n}"
            )));
        }
        let dtheta = 2.0 * PI / n as f64;
        let theta: Vec<f64> = (0..n).map(|i| node_angle(i, n)).collect();
        let sin = theta.iter().map(|t| t.sin()).collect::<Vec<_>>();
        let cos = theta.iter().map(|t| t.cos()).collect::<Vec<_>>();
        Ok(Self {
            n,
            dtheta,
            sin: sin.into(),
            cos: cos.into(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dtheta(&self) -> f64 {
        self.dtheta
    }

    #[inline]
    pub fn theta(&self, i: usize) -> f64 {
        node_angle(i, self.n)
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.theta(i)).collect()
    }

    #[inline]
    pub fn sin(&self) -> &[f64] {
        &self.sin
    }

    #[inline]
    pub fn cos(&self) -> &[f64] {
        &self.cos
    }

    /// Node at `theta = 0` (bottom of the curve, outward normal `-e2`).
    pub fn idx_zero(&self) -> usize {
        self.n / 2
    }

    /// Node at `theta = pi/2` (rightmost point).
    pub fn idx_half_pi(&self) -> usize {
        3 * self.n / 4
    }

    /// Node at `theta = -pi/2` (leftmost point).
    pub fn idx_minus_half_pi(&self) -> usize {
        self.n / 4
    }

    /// Node at `theta = pi` (top of the curve).
    pub fn idx_pi(&self) -> usize {
        0
    }

    /// Node index of the mirror image under `theta -> -theta`.
    pub fn mirror_y_axis(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// Node index of the mirror image under `theta -> pi - theta`.
    pub fn mirror_x_axis(&self, i: usize) -> usize {
        (self.n / 2 + self.n - i) % self.n
    }

    /// Samples of `f` at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n).map(|i| f(self.theta(i))).collect()
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n {
            return Err(FlowError::Usage(format!(
                "expected {} samples, got {}",
                self.n,
                values.len()
            )));
        }
        Ok(())
    }

    /// Centered first difference with periodic wraparound.
    pub fn d1(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        let mut out = vec![0.0; self.n];
        d1_into(values, self.dtheta, &mut out);
        Ok(out)
    }

    /// Centered second difference with periodic wraparound.
    pub fn d2(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        let mut out = vec![0.0; self.n];
        d2_into(values, self.dtheta, &mut out);
        Ok(out)
    }

    /// Periodic trapezoid rule over one full turn.
    pub fn quad(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values)?;
        Ok(self.quad_unchecked(values))
    }

    #[inline]
    pub(crate) fn quad_unchecked(&self, values: &[f64]) -> f64 {
        self.dtheta * values.iter().sum::<f64>()
    }

    /// Cosine and sine coefficients of mode `k`:
    /// `(1/pi) quad(v cos k theta)`, `(1/pi) quad(v sin k theta)`.
    pub fn fourier_mode(&self, values: &[f64], k: usize) -> Result<(f64, f64)> {
        self.check_len(values)?;
        if k == 1 {
            return Ok(self.mode1_unchecked(values));
        }
        let (mut a, mut b) = (0.0, 0.0);
        for (i, v) in values.iter().enumerate() {
            // k*theta reduced through the integer index to keep the phase exact
            let phase = 2.0 * PI * ((k * i) % self.n) as f64 / self.n as f64 - PI * k as f64;
            a += v * phase.cos();
            b += v * phase.sin();
        }
        Ok((a * self.dtheta / PI, b * self.dtheta / PI))
    }

    #[inline]
    pub(crate) fn mode1_unchecked(&self, values: &[f64]) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for ((v, c), s) in values.iter().zip(self.cos.iter()).zip(self.sin.iter()) {
            a += v * c;
            b += v * s;
        }
        (a * self.dtheta / PI, b * self.dtheta / PI)
    }
}

#[inline]
fn node_angle(i: usize, n: usize) -> f64 {
    PI * (2 * i as i64 - n as i64) as f64 / n as f64
}

pub(crate) fn d1_into(v: &[f64], dtheta: f64, out: &mut [f64]) {
    let n = v.len();
    let s = 0.5 / dtheta;
    for i in 0..n {
        let next = v[(i + 1) % n];
        let prev = v[(i + n - 1) % n];
        out[i] = (next - prev) * s;
    }
}

pub(crate) fn d2_into(v: &[f64], dtheta: f64, out: &mut [f64]) {
    let n = v.len();
    let s = 1.0 / (dtheta * dtheta);
    out[0] = (v[1] - 2.0 * v[0] + v[n - 1]) * s;
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * s;
    }
    out[n - 1] = (v[0] - 2.0 * v[n - 1] + v[n - 2]) * s;
}

/// Radius of curvature `r = d2(h) + h` with the standard periodic stencil.
pub(crate) fn radius_into(h: &[f64], dtheta: f64, out: &mut [f64]) {
    d2_into(h, dtheta, out);
    for (o, v) in out.iter_mut().zip(h) {
        *o += v;
    }
}

/// Eigenvalue of [`radius_into`] on the Fourier mode of wavenumber `k`.
pub(crate) fn radius_symbol(k: usize, dtheta: f64) -> f64 {
    let s = (0.5 * k as f64 * dtheta).sin();
    1.0 - 4.0 * s * s / (dtheta * dtheta)
}
