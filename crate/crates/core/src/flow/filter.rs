use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Per-ring angular band limit on the disk grid: ring `i` keeps Fourier
/// modes `|m| ≤ 2i + 1`, so `m/r_i ≤ 2/Δr` and the angular stiffness never
/// exceeds the radial one.
pub struct PoleFilter {
    ntheta: usize,
    keep: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PoleFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoleFilter")
            .field("ntheta", &self.ntheta)
            .field("rings", &self.keep.len())
            .finish()
    }
}

impl PoleFilter {
    pub fn new(nr: usize, ntheta: usize) -> Self {
        let mut planner = FftPlanner::new();
        let half = ntheta / 2;
        let keep = (0..nr).map(|i| 2 * i + 1).take_while(|&m| m < half).collect();
        Self {
            ntheta,
            keep,
            forward: planner.plan_fft_forward(ntheta),
            inverse: planner.plan_fft_inverse(ntheta),
        }
    }

    /// Number of inner rings that are band-limited.
    pub fn filtered_rings(&self) -> usize {
        self.keep.len()
    }

    /// Filters a ring-major nodal array in place.
    pub fn apply(&self, v: &mut [f64]) {
        let nt = self.ntheta;
        let mut buf = vec![Complex::new(0.0, 0.0); nt];
        let scale = 1.0 / nt as f64;
        for (i, &m_max) in self.keep.iter().enumerate() {
            let ring = &mut v[i * nt..(i + 1) * nt];
            for (b, &x) in buf.iter_mut().zip(ring.iter()) {
                *b = Complex::new(x, 0.0);
            }
            self.forward.process(&mut buf);
            for (m, b) in buf.iter_mut().enumerate() {
                if m.min(nt - m) > m_max {
                    *b = Complex::new(0.0, 0.0);
                }
            }
            self.inverse.process(&mut buf);
            for (x, b) in ring.iter_mut().zip(&buf) {
                *x = b.re * scale;
            }
        }
    }
}
