//! Scheduling functions for the merging Hamiltonian.
//!
//! `f` switches the inter-fragment interaction on over `[0, s0]` and stays at
//! one afterwards. `g` ramps the trap up over `[0, s0]` and releases it again
//! over `[s0, s1]`. Both are built from a monotone [`Profile`] on `[0, 1]`.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Monotone map `[0, 1] -> [0, 1]` with `p(0) = 0`, `p(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Linear,
    /// `3u² - 2u³`.
    Smoothstep,
    /// Uniform samples on `[0, 1]`, linearly interpolated.
    Tabulated(Vec<f64>),
}

impl Profile {
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSchedule("tabulated profile needs at least 2 samples".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 1.0 {
            return Err(Error::InvalidSchedule("tabulated profile must run from 0 to 1".into()));
        }
        if values.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidSchedule("tabulated profile must be nondecreasing".into()));
        }
        Ok(Profile::Tabulated(values))
    }

    /// Interaction profile following the Coulomb strength of an approaching
    /// pair: the clamped ratio `reference / z(u)`, shifted and rescaled so it
    /// starts at 0 and ends at 1.
    pub fn coulomb_mimicking(reference_distance: f64, z_traj: &[f64]) -> Result<Self> {
        let ratios = coulomb_ratios(reference_distance, z_traj)?;
        let first = ratios[0];
        let last = ratios[ratios.len() - 1];
        if !(last > first) {
            return Err(Error::InvalidSchedule(
                "trajectory does not approach the reference distance".into(),
            ));
        }
        let mut values: Vec<f64> = ratios.iter().map(|r| (r - first) / (last - first)).collect();
        let n = values.len();
        values[0] = 0.0;
        values[n - 1] = 1.0;
        Self::tabulated(values)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Profile::Linear => u,
            Profile::Smoothstep => u * u * (3.0 - 2.0 * u),
            Profile::Tabulated(v) => {
                let x = u * (v.len() - 1) as f64;
                let k = (x.floor() as usize).min(v.len() - 2);
                let t = x - k as f64;
                v[k] + t * (v[k + 1] - v[k])
            }
        }
    }
}

fn coulomb_ratios(reference_distance: f64, z_traj: &[f64]) -> Result<Vec<f64>> {
    if z_traj.is_empty() {
        return Err(Error::InvalidSchedule("empty trajectory".into()));
    }
    if !(reference_distance > 0.0) {
        return Err(Error::NonpositiveDistance(reference_distance));
    }
    z_traj
        .iter()
        .map(|&z| {
            if z > 0.0 && z.is_finite() {
                Ok((reference_distance / z).clamp(0.0, 1.0))
            } else {
                Err(Error::NonpositiveDistance(z))
            }
        })
        .collect()
}

/// Interaction strength that mimics a Coulomb approach: with trap centers a
/// fixed `reference_distance` apart, `f = reference / z(s)` reproduces the
/// interaction of a pair at separation `z(s)`. Samples of `z_traj` are taken
/// uniformly on `[0, s0]`; the result pairs each `s` with `f(s)` clamped to
/// `[0, 1]`.
pub fn coulomb_mimicking_f(s0: f64, reference_distance: f64, z_traj: &[f64]) -> Result<Vec<(f64, f64)>> {
    let ratios = coulomb_ratios(reference_distance, z_traj)?;
    let n = ratios.len();
    Ok(ratios
        .into_iter()
        .enumerate()
        .map(|(k, f)| {
            let s = if n == 1 { s0 } else { s0 * k as f64 / (n - 1) as f64 };
            (s, f)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    s0: f64,
    s1: f64,
    f_profile: Profile,
    g_profile: Profile,
}

impl Schedule {
    pub fn new(s0: f64, s1: f64, f_profile: Profile, g_profile: Profile) -> Result<Self> {
        if !(s0 > 0.0 && s1 > s0 && s1.is_finite()) {
            return Err(Error::InvalidSchedule(format!("need 0 < s0 < s1, got s0={s0}, s1={s1}")));
        }
        if let Profile::Tabulated(v) = &f_profile {
            Profile::tabulated(v.clone())?;
        }
        if let Profile::Tabulated(v) = &g_profile {
            Profile::tabulated(v.clone())?;
        }
        Ok(Self { s0, s1, f_profile, g_profile })
    }

    pub fn linear(s0: f64, s1: f64) -> Result<Self> {
        Self::new(s0, s1, Profile::Linear, Profile::Linear)
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn f_profile(&self) -> &Profile {
        &self.f_profile
    }

    pub fn g_profile(&self) -> &Profile {
        &self.g_profile
    }

    pub fn check(&self, s: f64) -> Result<()> {
        if (0.0..=self.s1).contains(&s) {
            Ok(())
        } else {
            Err(Error::ScheduleOutOfRange { s, s1: self.s1 })
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        if s >= self.s0 {
            1.0
        } else if s <= 0.0 {
            0.0
        } else {
            self.f_profile.eval(s / self.s0)
        }
    }

    pub fn g(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= self.s1 {
            0.0
        } else if s <= self.s0 {
            self.g_profile.eval(s / self.s0)
        } else {
            self.g_profile.eval((self.s1 - s) / (self.s1 - self.s0))
        }
    }

    /// Central-difference derivatives `(f'(s), g'(s))`.
    pub fn derivatives(&self, s: f64) -> (f64, f64) {
        let h = 1e-6 * self.s1;
        let lo = (s - h).max(0.0);
        let hi = (s + h).min(self.s1);
        let span = hi - lo;
        ((self.f(hi) - self.f(lo)) / span, (self.g(hi) - self.g(lo)) / span)
    }

    /// Effective nuclear speed at `s`, `max(|dz/df · f'|, |dz/dg · g'|)`,
    /// given how the internuclear distance responds to each schedule.
    pub fn speed(&self, s: f64, dz_df: f64, dz_dg: f64) -> f64 {
        let (df, dg) = self.derivatives(s);
        (dz_df * df).abs().max((dz_dg * dg).abs())
    }
}
