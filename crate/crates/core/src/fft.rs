//! Square 2D FFTs built from rustfft row transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Cached forward/inverse plans for an `n × n` transform.
///
/// The forward transform is unnormalized (`Σ x·e^{-2πi jk/n}`); the inverse
/// carries the `1/n²` factor so `inverse(forward(x)) == x`.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&*self.forward, data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.backward(data);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Inverse transform without the `1/n²` factor.
    pub fn backward(&self, data: &mut [Complex64]) {
        self.run(&*self.inverse, data);
    }

    /// Forward transform left in transposed layout.
    pub fn forward_transposed(&self, data: &mut [Complex64]) {
        self.run_transposed(&*self.forward, data);
    }

    /// Unnormalized inverse transform left in transposed layout.
    pub fn backward_transposed(&self, data: &mut [Complex64]) {
        self.run_transposed(&*self.inverse, data);
    }

    fn run(&self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        self.run_transposed(plan, data);
        transpose(data, self.n);
    }

    fn run_transposed(&self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n * self.n, "buffer does not match plan");
        plan.process(data);
        transpose(data, self.n);
        plan.process(data);
    }
}

/// In-place transpose of a square row-major buffer.
pub fn transpose(data: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Swaps quadrants so index `n/2` moves to 0 (its own inverse for even `n`).
pub fn fftshift(data: &mut [Complex64], n: usize) {
    let h = n / 2;
    for iy in 0..h {
        for ix in 0..n {
            let a = iy * n + ix;
            let b = (iy + h) * n + (ix + h) % n;
            data.swap(a, b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_dc() {
        let n = 8;
        let fft = Fft2::new(n);
        let orig: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        let sum: Complex64 = orig.iter().sum();
        assert!((data[0] - sum).norm() < 1e-12);
        fft.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn separable_mode() {
        // e^{2πi(2x + 3y)/n} lands in bin (kx=2, ky=3).
        let n = 16;
        let mut data: Vec<Complex64> = (0..n * n)
            .map(|i| {
                let (x, y) = ((i % n) as f64, (i / n) as f64);
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (2.0 * x + 3.0 * y) / n as f64)
            })
            .collect();
        Fft2::new(n).forward(&mut data);
        assert!((data[3 * n + 2].re - (n * n) as f64).abs() < 1e-9);
    }

    #[test]
    fn transposed_layout_matches_transpose() {
        let n = 16;
        let fft = Fft2::new(n);
        let orig: Vec<Complex64> = (0..n * n).map(|i| Complex64::new((i as f64).cos(), 0.5)).collect();
        let mut a = orig.clone();
        fft.forward(&mut a);
        transpose(&mut a, n);
        let mut b = orig;
        fft.forward_transposed(&mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn blocked_transpose() {
        let n = 40;
        let mut d: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        transpose(&mut d, n);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[i * n + j].re, (j * n + i) as f64);
            }
        }
    }

    #[test]
    fn shift_is_involution() {
        let n = 8;
        let orig: Vec<Complex64> = (0..n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let mut d = orig.clone();
        fftshift(&mut d, n);
        assert_eq!(d[0].re, (4 * n + 4) as f64);
        fftshift(&mut d, n);
        assert_eq!(d, orig);
    }
}
