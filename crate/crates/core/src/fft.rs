//! Centered discrete Fourier transforms on flat row-major buffers.
//!
//! With coordinates `x_n = (n - N/2) h` and frequencies `ξ_k = (k - N/2) 2π/(N h)`
//! the forward transform is `U[k] = Σ_n u[n] e^{-i x_n ξ_k}` and the inverse is
//! `u[n] = N^{-1} Σ_k U[k] e^{i x_n ξ_k}`. Both reduce to a plain FFT with
//! `(-1)^n` modulations, because `x_n ξ_k = 2π (n - N/2)(k - N/2) / N`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct CenteredDft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    half_sign: f64,
}

impl std::fmt::Debug for CenteredDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CenteredDft").field("n", &self.n).finish()
    }
}

fn alt(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl CenteredDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        CenteredDft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            half_sign: alt(n / 2),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn transform_line(&self, line: &mut [Complex64], inverse: bool) {
        for (i, v) in line.iter_mut().enumerate() {
            *v *= alt(i);
        }
        if inverse {
            self.inverse.process(line);
        } else {
            self.forward.process(line);
        }
        let scale = if inverse { self.half_sign / self.n as f64 } else { self.half_sign };
        for (k, v) in line.iter_mut().enumerate() {
            *v *= alt(k) * scale;
        }
    }

    /// Transforms `data` (shape `n^dim`, row-major) along the given axes in place.
    pub fn apply_axes(&self, data: &mut [Complex64], dim: usize, axes: &[usize], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n.pow(dim as u32));
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for &axis in axes {
            let stride = n.pow((dim - 1 - axis) as u32);
            let outer = data.len() / (stride * n);
            for o in 0..outer {
                let base = o * stride * n;
                for s in 0..stride {
                    let start = base + s;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[start + j * stride];
                    }
                    self.transform_line(&mut line, inverse);
                    for (j, v) in line.iter().enumerate() {
                        data[start + j * stride] = *v;
                    }
                }
            }
        }
    }

    pub fn forward_all(&self, data: &mut [Complex64], dim: usize) {
        let axes: Vec<usize> = (0..dim).collect();
        self.apply_axes(data, dim, &axes, false);
    }

    pub fn inverse_all(&self, data: &mut [Complex64], dim: usize) {
        let axes: Vec<usize> = (0..dim).collect();
        self.apply_axes(data, dim, &axes, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct(u: &[Complex64]) -> Vec<Complex64> {
        let n = u.len();
        let h = 0.7;
        let dxi = 2.0 * PI / (n as f64 * h);
        (0..n)
            .map(|k| {
                let xi = (k as f64 - (n / 2) as f64) * dxi;
                u.iter()
                    .enumerate()
                    .map(|(m, v)| {
                        let x = (m as f64 - (n / 2) as f64) * h;
                        v * Complex64::from_polar(1.0, -x * xi)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum_and_inverts() {
        for &n in &[4usize, 6, 10, 16] {
            let u: Vec<Complex64> =
                (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
            let dft = CenteredDft::new(n);
            let mut v = u.clone();
            dft.apply_axes(&mut v, 1, &[0], false);
            let d = direct(&u);
            for (a, b) in v.iter().zip(&d) {
                assert!((a - b).norm() < 1e-12);
            }
            dft.apply_axes(&mut v, 1, &[0], true);
            for (a, b) in v.iter().zip(&u) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn axis_transform_matches_per_row() {
        let n = 6;
        let data: Vec<Complex64> =
            (0..n * n).map(|i| Complex64::new((i as f64 * 0.17).cos(), (i as f64 * 0.41).sin())).collect();
        let dft = CenteredDft::new(n);
        let mut along1 = data.clone();
        dft.apply_axes(&mut along1, 2, &[1], false);
        for r in 0..n {
            let row = &data[r * n..(r + 1) * n];
            let d = direct(row);
            for c in 0..n {
                assert!((along1[r * n + c] - d[c]).norm() < 1e-12);
            }
        }
        let mut along0 = data.clone();
        dft.apply_axes(&mut along0, 2, &[0], false);
        for c in 0..n {
            let col: Vec<Complex64> = (0..n).map(|r| data[r * n + c]).collect();
            let d = direct(&col);
            for r in 0..n {
                assert!((along0[r * n + c] - d[r]).norm() < 1e-12);
            }
        }
    }
}
