//! Periodic cubic grid descriptor and cached 3-d FFTs.
//!
//! Conventions used everywhere in this crate:
//! * wavevectors are `k = 2*pi*m/L` with integer `m` in `(-n/2, n/2]`,
//! * the forward transform carries the `1/n^3` factor, the inverse none,
//! * Parseval: `||f||_{L2}^2 = L^3 * sum_k |f_hat(k)|^2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusGrid {
    n: usize,
    length: f64,
}

impl TorusGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("n = {n}, need n >= 4")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("box length = {length}")));
        }
        Ok(TorusGrid { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Smallest nonzero wavenumber, `2*pi/L`.
    pub fn k_min(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Integer mode index for storage index `i`, in `(-n/2, n/2]`.
    pub fn mode(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage index of the negated mode.
    pub fn neg_index(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.n - i
        }
    }

    pub fn wavevector(&self, idx: (usize, usize, usize)) -> [f64; 3] {
        let f = self.k_min();
        [
            f * self.mode(idx.0) as f64,
            f * self.mode(idx.1) as f64,
            f * self.mode(idx.2) as f64,
        ]
    }

    /// Wavevector for sign-carrying (odd) Fourier multipliers such as
    /// gradients, curls, and directional projectors. The Nyquist coefficient
    /// m = n/2 is shared between +n/2 and -n/2 on a real field, so any odd
    /// multiplier must treat it as zero to keep the spectrum Hermitian.
    pub fn wavevector_deriv(&self, idx: (usize, usize, usize)) -> [f64; 3] {
        let f = self.k_min();
        let half = (self.n / 2) as i64;
        let id = [idx.0, idx.1, idx.2];
        std::array::from_fn(|c| {
            let m = self.mode(id[c]);
            if self.n % 2 == 0 && m == half {
                0.0
            } else {
                f * m as f64
            }
        })
    }

    pub fn wavenumber(&self, idx: (usize, usize, usize)) -> f64 {
        let k = self.wavevector(idx);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: (usize, usize, usize)) -> [f64; 3] {
        let h = self.spacing();
        [idx.0 as f64 * h, idx.1 as f64 * h, idx.2 as f64 * h]
    }

    pub fn same_as(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place 3-d FFT over all three axes. The forward direction divides by
/// `n^3`; the inverse applies no factor, so `inverse(forward(x)) = x`.
pub fn fft3(data: &mut Array3<Complex64>, inverse: bool) {
    let n = data.shape()[0];
    debug_assert_eq!(data.shape(), [n, n, n]);
    let fft = plan(n, inverse);
    let mut lane_buf = vec![Complex64::default(); n];
    for axis in 0..3 {
        for mut lane in data.lanes_mut(Axis(axis)) {
            for (b, v) in lane_buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process(&mut lane_buf);
            for (v, b) in lane.iter_mut().zip(lane_buf.iter()) {
                *v = *b;
            }
        }
    }
    if !inverse {
        let scale = 1.0 / (n * n * n) as f64;
        data.mapv_inplace(|c| c * scale);
    }
}
