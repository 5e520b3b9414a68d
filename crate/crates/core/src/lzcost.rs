//! Closed-form calculators: the Landau-Zener estimate of merge failure and
//! the block-encoding cost model.
//!
//! Everything is in atomic units (ħ = 1), so a trap frequency doubles as an
//! energy. Big-O constants of the cost model are fixed to one; the values
//! are "scaling units", useful for ratios only.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::units::{to_atomic, Unit};
use crate::{Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Isotropic-trap merge parameters, atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LZParams {
    /// Reduced mass `m₁m₂/(m₁+m₂)`.
    pub mu: f64,
    /// Trap frequency.
    pub omega: f64,
    /// Bound-state threshold frequency.
    pub omega_a: f64,
    /// Speed of the approach.
    pub v: f64,
}

impl LZParams {
    pub fn new(mu: f64, omega: f64, omega_a: f64, v: f64) -> Result<Self> {
        for (name, x) in [("mu", mu), ("omega", omega), ("omega_a", omega_a), ("v", v)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {x}")));
            }
        }
        Ok(Self { mu, omega, omega_a, v })
    }

    /// From lab units: masses in `mass_unit`, frequencies in `freq_unit`,
    /// speed in `speed_unit`.
    pub fn from_units(
        (m1, m2, mass_unit): (f64, f64, Unit),
        (omega, omega_a, freq_unit): (f64, f64, Unit),
        (v, speed_unit): (f64, Unit),
    ) -> Result<Self> {
        use crate::units::{Dimension, Unit as U};
        let expect = |u: U, d: Dimension| {
            if u.dimension() == d {
                Ok(())
            } else {
                Err(Error::UnsupportedUnit(format!("{u:?} is not a unit of {d:?}")))
            }
        };
        expect(mass_unit, Dimension::Mass)?;
        expect(freq_unit, Dimension::Energy)?;
        expect(speed_unit, Dimension::Velocity)?;
        let (m1, m2) = (to_atomic(m1, mass_unit), to_atomic(m2, mass_unit));
        Self::new(
            m1 * m2 / (m1 + m2),
            to_atomic(omega, freq_unit),
            to_atomic(omega_a, freq_unit),
            to_atomic(v, speed_unit),
        )
    }

    /// Rb–Cs: 87 u and 133 u, ω = 150 kHz, ω_a = 110 kHz, `v` in m/s.
    pub fn rb_cs(v_m_per_s: f64) -> Result<Self> {
        Self::from_units(
            (87.0, 133.0, Unit::Dalton),
            (150.0, 110.0, Unit::KiloHertz),
            (v_m_per_s, Unit::MetersPerSecond),
        )
    }

    pub fn with_v(self, v: f64) -> Result<Self> {
        Self::new(self.mu, self.omega, self.omega_a, v)
    }

    /// Relative binding energy `Ẽ_a = ω_a/ω`.
    pub fn relative_binding(&self) -> f64 {
        self.omega_a / self.omega
    }

    /// Harmonic length `β = (1/(μω))^{1/2}`.
    pub fn harmonic_length(&self) -> f64 {
        (1.0 / (self.mu * self.omega)).sqrt()
    }
}

/// `ω_eff² = (2/√π) ω_a^{1/2} ω^{3/2} exp(−(3 + ω_a/ω)/2)`.
pub fn omega_eff_sq(p: &LZParams) -> f64 {
    2.0 / PI.sqrt() * p.omega_a.sqrt() * p.omega.powf(1.5) * (-0.5 * (3.0 + p.omega_a / p.omega)).exp()
}

/// Contact point of the avoided crossing, `z* = β (3 + ω_a/ω)^{1/2}`.
pub fn contact_point(p: &LZParams) -> f64 {
    p.harmonic_length() * (3.0 + p.omega_a / p.omega).sqrt()
}

/// `∂E_mol = μ^{1/2} ω (3ω + ω_a)^{1/2}`.
pub fn d_e_mol(p: &LZParams) -> f64 {
    p.mu.sqrt() * p.omega * (3.0 * p.omega + p.omega_a).sqrt()
}

/// The separated-atom surface is taken flat.
pub fn d_e_atom(_p: &LZParams) -> f64 {
    0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LZResult {
    pub p_lz: f64,
    /// Main-text bound, in terms of `Ẽ_a`.
    pub p_lz_bound: f64,
    pub p_suc: f64,
    /// Whether `Ẽ_a ≥ 1`, where the bound is claimed.
    pub in_regime: bool,
}

/// `p_LZ = exp(−2π ω_eff² / (|∂E_mol − ∂E_atom| v))`.
pub fn p_landau_zener(p: &LZParams) -> LZResult {
    let p_lz = (-2.0 * PI * omega_eff_sq(p) / ((d_e_mol(p) - d_e_atom(p)).abs() * p.v)).exp();
    LZResult { p_lz, p_lz_bound: p_lz_bound(p), p_suc: 1.0 - p_lz, in_regime: p.relative_binding() >= 1.0 }
}

/// `exp(−4 (π/μ)^{1/2} (ω Ẽ/(3 + Ẽ))^{1/2} e^{−Ẽ/2 − 3/2} / v)`.
pub fn p_lz_bound(p: &LZParams) -> f64 {
    let e = p.relative_binding();
    let arg = 4.0 * (PI / p.mu).sqrt() * (p.omega * e / (3.0 + e)).sqrt() * (-0.5 * e - 1.5).exp() / p.v;
    (-arg).exp()
}

/// `n` values per decade from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || per_decade == 0 {
        return Err(Error::InvalidParameter("need 0 < lo < hi and per_decade >= 1".into()));
    }
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    Ok((0..=n).map(|k| lo * 10f64.powf(decades * k as f64 / n.max(1) as f64)).collect())
}

/// `p_LZ` along a list of speeds.
pub fn sweep_velocity(base: &LZParams, speeds: &[f64]) -> Result<Vec<(f64, LZResult)>> {
    speeds.iter().map(|&v| Ok((v, p_landau_zener(&base.with_v(v)?)))).collect()
}

/// Inputs of the block-encoding cost model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub n_el: usize,
    pub n_nuc: usize,
    /// Grid points `N`.
    pub n_grid: f64,
    /// Box volume `|Ω|`.
    pub box_volume: f64,
    /// Volume the trap acts on, `|Ω_trap| ≤ |Ω|`.
    pub trap_volume: f64,
    pub omega_max: f64,
    pub m_max: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("n_grid", self.n_grid),
            ("box_volume", self.box_volume),
            ("trap_volume", self.trap_volume),
            ("omega_max", self.omega_max),
            ("m_max", self.m_max),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {x}")));
            }
        }
        if self.n_el == 0 || self.n_nuc == 0 {
            return Err(Error::InvalidParameter("need at least one electron and one nucleus".into()));
        }
        if self.trap_volume > self.box_volume {
            return Err(Error::InvalidParameter("trap volume exceeds the box".into()));
        }
        Ok(())
    }
}

/// Sub-normalization factors, constants fixed to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFactors {
    /// `N_el N^{2/3} / |Ω|^{2/3}`.
    pub alpha_t: f64,
    /// `N_el² N^{1/3} / |Ω|^{1/3}`.
    pub alpha_v: f64,
    /// `N_el² N^{1/3} / |Ω|^{1/3}`.
    pub alpha_u: f64,
    /// `ω_max² N_nuc |Ω_trap|^{2/3}`.
    pub alpha_trap: f64,
    /// `N_nuc m_max ω_max² |Ω_trap|^{2/3}`, keeping the mass.
    pub alpha_trap_bound: f64,
}

pub fn alpha_factors(p: &CostParams) -> Result<AlphaFactors> {
    p.validate()?;
    let (ne, nn) = (p.n_el as f64, p.n_nuc as f64);
    let trap_extent = p.trap_volume.powf(2.0 / 3.0);
    Ok(AlphaFactors {
        alpha_t: ne * (p.n_grid / p.box_volume).powf(2.0 / 3.0),
        alpha_v: ne * ne * (p.n_grid / p.box_volume).powf(1.0 / 3.0),
        alpha_u: ne * ne * (p.n_grid / p.box_volume).powf(1.0 / 3.0),
        alpha_trap: p.omega_max * p.omega_max * nn * trap_extent,
        alpha_trap_bound: nn * p.m_max * p.omega_max * p.omega_max * trap_extent,
    })
}

/// `α_trap` with the trap frequency tied to system size, `ω_max = c·N_nuc`;
/// grows as `N_nuc³ |Ω_trap|^{2/3}`.
pub fn alpha_trap_scaled(p: &CostParams, omega_per_nucleus: f64) -> Result<f64> {
    let scaled = CostParams { omega_max: omega_per_nucleus * p.n_nuc as f64, ..*p };
    Ok(alpha_factors(&scaled)?.alpha_trap)
}

/// Structured LCU estimate for block-encoding the trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcuEstimate {
    /// Branches prepared by PREP: one per nucleus and axis.
    pub prep_branches: usize,
    /// SEL work registers `g`, `R`, `R_0`, `(R − R_0)²` and the product,
    /// each `bits` wide.
    pub sel_ancillas: usize,
    /// Block-encoding repetitions, proportional to `α_trap`.
    pub repetitions: f64,
    /// Schedule-oracle queries (compute and uncompute `O_g`) per repetition.
    pub schedule_oracle_calls_per_query: usize,
    pub schedule_oracle_calls: f64,
}

pub fn lcu_query_model(p: &CostParams, bits: usize, axes: usize) -> Result<LcuEstimate> {
    if bits == 0 || !(1..=3).contains(&axes) {
        return Err(Error::InvalidParameter(format!("need bits >= 1 and 1..=3 axes (bits={bits}, axes={axes})")));
    }
    let alpha = alpha_factors(p)?.alpha_trap;
    Ok(LcuEstimate {
        prep_branches: axes * p.n_nuc,
        sel_ancillas: 5 * bits,
        repetitions: alpha,
        schedule_oracle_calls_per_query: 2,
        schedule_oracle_calls: 2.0 * alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn omega_eff_at_equal_frequencies() {
        let p = LZParams::new(1.0, 0.3, 0.3, 1.0).unwrap();
        let want = 2.0 / PI.sqrt() * 0.09 * (-2.0f64).exp();
        assert!(close(omega_eff_sq(&p), want, 1e-14));
    }

    #[test]
    fn omega_eff_homogeneous_of_degree_two() {
        let p = LZParams::new(1.0, 0.3, 0.7, 1.0).unwrap();
        let q = LZParams::new(1.0, 0.9, 2.1, 1.0).unwrap();
        assert!(close(omega_eff_sq(&q), 9.0 * omega_eff_sq(&p), 1e-13));
    }

    #[test]
    fn omega_eff_proportional_form() {
        // ω_eff² / (ω² Ẽ^{1/2} e^{−Ẽ}) is the same constant for every ω at
        // fixed Ẽ, and varies as e^{Ẽ/2} across Ẽ
        let ratio = |w: f64, e: f64| {
            let p = LZParams::new(1.0, w, e * w, 1.0).unwrap();
            omega_eff_sq(&p) / (w * w * e.sqrt() * (-e).exp())
        };
        assert!(close(ratio(0.1, 2.0), ratio(7.0, 2.0), 1e-13));
        assert!(close(ratio(1.0, 3.0) / ratio(1.0, 1.0), 1f64.exp(), 1e-13));
    }

    #[test]
    fn energy_gradient_limits_and_cross_check() {
        let p = LZParams::new(4.0, 0.5, 1e-300, 1.0).unwrap();
        assert!(close(d_e_mol(&p), 3f64.sqrt() * 2.0 * 0.5f64.powf(1.5), 1e-14));
        let p = LZParams::new(4.0, 0.5, 0.8, 1.0).unwrap();
        let q = LZParams { mu: 8.0, ..p };
        assert!(close(d_e_mol(&q), 2f64.sqrt() * d_e_mol(&p), 1e-14));
        let via_contact = p.mu * p.omega * p.omega * contact_point(&p);
        assert!(close(via_contact, d_e_mol(&p), 1e-12));
    }

    #[test]
    fn limits_in_speed() {
        let p = LZParams::rb_cs(1.0).unwrap();
        assert!(p_landau_zener(&p.with_v(1e-12).unwrap()).p_lz < 1e-100);
        assert!(p_landau_zener(&p.with_v(1e12).unwrap()).p_lz > 1.0 - 1e-9);
    }

    #[test]
    fn rb_cs_inputs() {
        let p = LZParams::rb_cs(1.0).unwrap();
        assert!(close(p.mu, 87.0 * 133.0 / 220.0 * 1822.888486209, 1e-12));
        assert!(close(p.omega, 150e3 / 6.579683920502e15, 1e-12));
        assert!(close(p.relative_binding(), 110.0 / 150.0, 1e-14));
    }

    #[test]
    fn bound_equals_full_form_algebraically() {
        for (mu, w, wa, v) in [(1e5, 2e-11, 1.5e-11, 1e-8), (3.0, 0.2, 0.9, 0.05)] {
            let p = LZParams::new(mu, w, wa, v).unwrap();
            let r = p_landau_zener(&p);
            assert!(close(r.p_lz_bound, r.p_lz, 1e-12));
        }
    }

    #[test]
    fn unit_inputs_agree_with_atomic_inputs() {
        let lab = LZParams::rb_cs(0.02).unwrap();
        let au = LZParams::new(lab.mu, lab.omega, lab.omega_a, lab.v).unwrap();
        let kcal = LZParams::from_units(
            (87.0, 133.0, Unit::Dalton),
            (
                crate::units::unit_convert(150.0, Unit::KiloHertz, Unit::KcalPerMol).unwrap(),
                crate::units::unit_convert(110.0, Unit::KiloHertz, Unit::KcalPerMol).unwrap(),
                Unit::KcalPerMol,
            ),
            (0.02, Unit::MetersPerSecond),
        )
        .unwrap();
        assert!(close(p_landau_zener(&kcal).p_lz, p_landau_zener(&lab).p_lz, 1e-9));
        assert!(close(p_landau_zener(&lab).p_lz, p_landau_zener(&au).p_lz, 1e-9));
        assert!(LZParams::from_units((1.0, 1.0, Unit::Bohr), (1.0, 1.0, Unit::Hartree), (1.0, Unit::AuVelocity)).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_speed(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let p = LZParams::new(2.0, 0.4, 0.5, 1.0).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let pl = p_landau_zener(&p.with_v(10f64.powf(lo)).unwrap()).p_lz;
            let ph = p_landau_zener(&p.with_v(10f64.powf(hi)).unwrap()).p_lz;
            prop_assert!(pl < ph);
        }
    }

    fn cost() -> CostParams {
        CostParams { n_el: 2, n_nuc: 2, n_grid: 1e6, box_volume: 1e3, trap_volume: 1e2, omega_max: 0.01, m_max: 1836.0 }
    }

    #[test]
    fn alpha_exponents() {
        let a = alpha_factors(&cost()).unwrap();
        let b = alpha_factors(&CostParams { n_grid: 2e6, ..cost() }).unwrap();
        assert!(close(b.alpha_t / a.alpha_t, 2f64.powf(2.0 / 3.0), 1e-12));
        assert!(close(b.alpha_v / a.alpha_v, 2f64.powf(1.0 / 3.0), 1e-12));
        assert!(close(b.alpha_u / a.alpha_u, 2f64.powf(1.0 / 3.0), 1e-12));
        let c = alpha_factors(&CostParams { omega_max: 0.02, ..cost() }).unwrap();
        assert!(close(c.alpha_trap / a.alpha_trap, 4.0, 1e-12));
        let s1 = alpha_trap_scaled(&cost(), 0.005).unwrap();
        let s2 = alpha_trap_scaled(&CostParams { n_nuc: 4, ..cost() }, 0.005).unwrap();
        assert!(close(s2 / s1, 8.0, 1e-12));
        assert!(alpha_factors(&CostParams { trap_volume: 2e3, ..cost() }).is_err());
    }

    #[test]
    fn lcu_counts() {
        let e = lcu_query_model(&cost(), 16, 3).unwrap();
        assert_eq!(e.prep_branches, 6);
        assert_eq!(lcu_query_model(&cost(), 32, 3).unwrap().sel_ancillas, 2 * e.sel_ancillas);
        let f = lcu_query_model(&CostParams { omega_max: 0.03, ..cost() }, 16, 3).unwrap();
        let ratio = alpha_factors(&CostParams { omega_max: 0.03, ..cost() }).unwrap().alpha_trap
            / alpha_factors(&cost()).unwrap().alpha_trap;
        assert!(close(f.repetitions / e.repetitions, ratio, 1e-14));
        assert!(lcu_query_model(&cost(), 0, 3).is_err());
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-6, 1e2, 10).unwrap();
        assert_eq!(v.len(), 81);
        assert!(close(v[0], 1e-6, 1e-14) && close(v[80], 1e2, 1e-12));
    }
}
