//! Exact spectral Maxwell evolution and helicity classification of states.
//!
//! A state is carried by its transverse zero-mean potentials {A, E}. The mode
//! function a(k) is recovered from A_hat(k) = a(k) + conj(a(-k)) and
//! E_hat(k) = i|k| (a(k) - conj(a(-k))); evolution advances a(k) by the exact
//! phase e^{-i|k| dt}, so there is no time-stepping error at all.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    inverse_transform, l2_inner, l2_norm, spectral_transform, SpectralField, VectorField,
};
use crate::grid::TorusGrid;
use crate::helicity::{fractional_curl_power, helicity_project_spec};

#[derive(Clone, Debug)]
pub struct MaxwellState {
    a: VectorField,
    e: VectorField,
    t: f64,
}

fn check_state_field(f: &VectorField, what: &str) -> Result<()> {
    let spec = spectral_transform(f);
    let scale = spec.parseval_norm_sq().sqrt();
    if scale == 0.0 {
        return Ok(());
    }
    if spec.mean_mode_norm() > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!("{what} has nonzero mean")));
    }
    let long = spec.longitudinal_project();
    if long.parseval_norm_sq().sqrt() > 1e-10 * scale * f.grid().length().powf(1.5) {
        return Err(Error::InvalidArgument(format!(
            "{what} has longitudinal content"
        )));
    }
    Ok(())
}

impl MaxwellState {
    pub fn new(a: VectorField, e: VectorField, t: f64) -> Result<Self> {
        a.grid().same_as(&e.grid())?;
        check_state_field(&a, "A")?;
        check_state_field(&e, "E")?;
        Ok(MaxwellState { a, e, t })
    }

    pub fn grid(&self) -> TorusGrid {
        self.a.grid()
    }

    pub fn a(&self) -> &VectorField {
        &self.a
    }

    pub fn e(&self) -> &VectorField {
        &self.e
    }

    pub fn b(&self) -> VectorField {
        crate::field::curl(&self.a)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Mode function a(k) of the plane-wave decomposition.
    pub fn mode_function(&self) -> SpectralField {
        let a_hat = spectral_transform(&self.a);
        let e_hat = spectral_transform(&self.e);
        mode_function_from_spectra(&a_hat, &e_hat)
    }

    /// Rebuild {A, E} from a mode function (inverse of `mode_function`).
    pub fn from_mode_function(modes: &SpectralField, t: f64) -> Result<Self> {
        let (a_hat, e_hat) = spectra_from_mode_function(modes);
        let a = inverse_transform(&a_hat);
        let e = inverse_transform(&e_hat);
        MaxwellState::new(a, e, t)
    }

    pub fn energy(&self) -> f64 {
        let b = self.b();
        l2_inner(&b, &b).unwrap() + l2_inner(&self.e, &self.e).unwrap()
    }
}

fn mode_function_from_spectra(a_hat: &SpectralField, e_hat: &SpectralField) -> SpectralField {
    let grid = a_hat.grid();
    a_hat.map_modes(|idx, alpha| {
        let kn = grid.wavenumber(idx);
        if kn == 0.0 {
            return [Complex64::default(); 3];
        }
        let e = e_hat.at(idx);
        let ik = Complex64::new(0.0, kn);
        std::array::from_fn(|c| 0.5 * (alpha[c] + e[c] / ik))
    })
}

fn spectra_from_mode_function(modes: &SpectralField) -> (SpectralField, SpectralField) {
    let grid = modes.grid();
    let n = grid.n();
    let mut a_hat = SpectralField::zeros(grid);
    let mut e_hat = SpectralField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let idx = (i, j, l);
                let kn = grid.wavenumber(idx);
                if kn == 0.0 {
                    continue;
                }
                let neg = (grid.neg_index(i), grid.neg_index(j), grid.neg_index(l));
                let a = modes.at(idx);
                let am = modes.at(neg);
                let ik = Complex64::new(0.0, kn);
                a_hat.set(idx, std::array::from_fn(|c| a[c] + am[c].conj()));
                e_hat.set(idx, std::array::from_fn(|c| ik * (a[c] - am[c].conj())));
            }
        }
    }
    (a_hat, e_hat)
}

/// Real plane-wave potential `a e^{i(k.x - |k|t)} + conj` together with its
/// electric field `E = -dA/dt`, as a MaxwellState.
pub fn plane_wave(
    grid: TorusGrid,
    m: [i64; 3],
    amp: [Complex64; 3],
    t: f64,
) -> Result<MaxwellState> {
    let n = grid.n() as i64;
    for v in m {
        if v <= -n / 2 || v > n / 2 {
            return Err(Error::InvalidArgument(format!(
                "mode {m:?} outside (-n/2, n/2] for n = {n}"
            )));
        }
    }
    let idx = (
        m[0].rem_euclid(n) as usize,
        m[1].rem_euclid(n) as usize,
        m[2].rem_euclid(n) as usize,
    );
    let k = grid.wavevector(idx);
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if kn == 0.0 {
        return Err(Error::InvalidArgument("plane wave needs k != 0".into()));
    }
    let amp_norm: f64 = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let dot: Complex64 = (0..3).map(|c| amp[c] * k[c]).sum();
    if dot.norm() > 1e-12 * amp_norm * kn {
        return Err(Error::InvalidArgument("amplitude not transverse to k".into()));
    }
    let phase = Complex64::new(0.0, -kn * t).exp();
    let mut modes = SpectralField::zeros(grid);
    let cur = modes.at(idx);
    modes.set(idx, std::array::from_fn(|c| cur[c] + amp[c] * phase));
    MaxwellState::from_mode_function(&modes, t)
}

/// Exact evolution by dt (any sign, any size).
pub fn maxwell_evolve(state: &MaxwellState, dt: f64) -> MaxwellState {
    let grid = state.grid();
    let modes = state.mode_function();
    let advanced = modes.map_modes(|idx, a| {
        let kn = grid.wavenumber(idx);
        let ph = Complex64::new(0.0, -kn * dt).exp();
        std::array::from_fn(|c| a[c] * ph)
    });
    MaxwellState::from_mode_function(&advanced, state.t + dt).expect("evolution preserves validity")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HelicityClass {
    Positive,
    Negative,
    Mixed,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub class: HelicityClass,
    /// Relative opposite-sign content that would have to vanish for the state
    /// to be pure *negative* helicity (i.e. P_+ content of A and E).
    pub residual_plus: f64,
    /// P_- content of A and E; must vanish for pure positive helicity.
    pub residual_minus: f64,
    pub t: f64,
}

pub fn helicity_classify(state: &MaxwellState, tol: f64) -> Classification {
    let a_hat = spectral_transform(&state.a);
    let e_hat = spectral_transform(&state.e);
    let scale =
        (a_hat.parseval_norm_sq() + e_hat.parseval_norm_sq()).sqrt();
    if scale == 0.0 {
        return Classification {
            class: HelicityClass::Degenerate,
            residual_plus: 0.0,
            residual_minus: 0.0,
            t: state.t,
        };
    }
    let content = |sign: i32| -> f64 {
        (helicity_project_spec(&a_hat, sign).parseval_norm_sq()
            + helicity_project_spec(&e_hat, sign).parseval_norm_sq())
        .sqrt()
            / scale
    };
    let residual_plus = content(1);
    let residual_minus = content(-1);
    let class = match (residual_minus < tol, residual_plus < tol) {
        (true, true) => HelicityClass::Degenerate,
        (true, false) => HelicityClass::Positive,
        (false, true) => HelicityClass::Negative,
        (false, false) => HelicityClass::Mixed,
    };
    Classification {
        class,
        residual_plus,
        residual_minus,
        t: state.t,
    }
}

/// The complex structure j{A, E} = {|C|^{-1} E, -|C| A}.
pub fn complex_structure(state: &MaxwellState) -> MaxwellState {
    let new_a = fractional_curl_power(&state.e, -1.0).expect("state is zero-mean");
    let new_e = fractional_curl_power(&state.a, 1.0)
        .expect("state is zero-mean")
        .scaled(-1.0);
    MaxwellState::new(new_a, new_e, state.t).expect("j preserves validity")
}

/// omega<X1, X2> = <u1, v2> - <u2, v1>.
pub fn symplectic_form(
    x1: (&VectorField, &VectorField),
    x2: (&VectorField, &VectorField),
) -> Result<f64> {
    Ok(l2_inner(x1.0, x2.1)? - l2_inner(x2.0, x1.1)?)
}

/// Relative residuals of dB/dt + curl E = 0 and dE/dt - curl B = 0, with the
/// time derivatives taken exactly through the mode representation.
pub fn maxwell_residual(state: &MaxwellState) -> (f64, f64) {
    let grid = state.grid();
    let modes = state.mode_function();
    // d/dt of the mode function is -i|k| a(k)
    let dmodes = modes.map_modes(|idx, a| {
        let kn = grid.wavenumber(idx);
        std::array::from_fn(|c| Complex64::new(0.0, -kn) * a[c])
    });
    let (da_hat, de_hat) = spectra_from_mode_function(&dmodes);
    let a_hat = spectral_transform(&state.a);
    let e_hat = spectral_transform(&state.e);
    // dB/dt + curl E = curl(dA/dt + E)
    let mut sum = da_hat.clone();
    sum.add_scaled(&e_hat, 1.0);
    let res_b = sum.curl().parseval_norm_sq().sqrt();
    // dE/dt - curl B = dE/dt - curl curl A
    let mut res_e_spec = de_hat.clone();
    res_e_spec.add_scaled(&a_hat.curl().curl(), -1.0);
    let res_e = res_e_spec.parseval_norm_sq().sqrt();
    let scale = grid.k_min()
        * (a_hat.parseval_norm_sq() + e_hat.parseval_norm_sq())
            .sqrt()
            .max(1e-300);
    (res_b / scale, res_e / scale)
}

/// L2 norm helper re-exported for experiment reporting.
pub fn field_norm(f: &VectorField) -> f64 {
    l2_norm(f)
}
