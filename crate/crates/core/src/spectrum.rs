//! Discrete Fourier transform of a correlation series.
//!
//! The transform is evaluated directly, `X_j = Σ_k w_k C_k e^{+iω_j t_k}`,
//! so that `C(t) = e^{-iEt}` peaks at `ω = E`. Frequencies are
//! `ω_j = 2πj/(n·dt)` for `j = -n/2 .. n/2`, returned in ascending order.
//! Intensities are `|X_j| / Σ w_k`, so an on-bin pure tone has height one.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result, C64};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => alloc::vec![1.0; n],
            Window::Hann if n < 2 => alloc::vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

/// Sample spacing of a uniform grid, or `NonuniformGrid`.
pub fn uniform_step(times: impl ExactSizeIterator<Item = f64> + Clone) -> Result<f64> {
    let n = times.len();
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 samples".into()));
    }
    let mut it = times.clone();
    let t0 = it.next().unwrap_or(0.0);
    let t_last = times.clone().last().unwrap_or(0.0);
    let dt = (t_last - t0) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::NonuniformGrid);
    }
    let tol = 1e-9 * dt.max(t_last.abs());
    for (k, t) in times.enumerate() {
        if (t - (t0 + dt * k as f64)).abs() > tol {
            return Err(Error::NonuniformGrid);
        }
    }
    Ok(dt)
}

/// `(ω, intensity)` pairs for a uniformly sampled correlation series.
pub fn spectrum(correlation: &[(f64, C64)], window: Window) -> Result<Vec<(f64, f64)>> {
    let n = correlation.len();
    let dt = uniform_step(correlation.iter().map(|p| p.0))?;
    let t0 = correlation[0].0;
    let w = window.weights(n);
    let norm: f64 = w.iter().sum();
    let weighted: Vec<C64> = correlation.iter().zip(&w).map(|(&(_, c), &wk)| c * wk).collect();
    // e^{+2πi m/n}; the phase j·k is reduced mod n
    let twiddle: Vec<C64> = (0..n).map(|m| C64::new(0.0, 2.0 * PI * m as f64 / n as f64).exp()).collect();
    let half = (n / 2) as i64;
    let bin = 2.0 * PI / (n as f64 * dt);
    Ok((-half..n as i64 - half)
        .map(|j| {
            let jm = j.rem_euclid(n as i64) as usize;
            let mut acc = C64::new(0.0, 0.0);
            for (k, c) in weighted.iter().enumerate() {
                acc += c * twiddle[(jm * k) % n];
            }
            let omega = bin * j as f64;
            // shift for a grid that does not start at t = 0
            let acc = acc * C64::new(0.0, omega * t0).exp();
            (omega, acc.norm() / norm)
        })
        .collect())
}

/// Width of one frequency bin.
pub fn bin_width(n: usize, dt: f64) -> f64 {
    2.0 * PI / (n as f64 * dt)
}

/// Local maxima at or above `rel_threshold` times the global maximum.
pub fn peaks(spec: &[(f64, f64)], rel_threshold: f64) -> Vec<(f64, f64)> {
    let top = spec.iter().fold(0.0f64, |a, p| a.max(p.1));
    (0..spec.len())
        .filter(|&i| {
            let y = spec[i].1;
            let left = if i > 0 { spec[i - 1].1 } else { f64::NEG_INFINITY };
            let right = spec.get(i + 1).map_or(f64::NEG_INFINITY, |p| p.1);
            y >= rel_threshold * top && y > left && y >= right
        })
        .map(|i| spec[i])
        .collect()
}
