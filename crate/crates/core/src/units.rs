//! Unit conversion at the boundary between lab units and atomic units.
//!
//! Frequencies quoted in kHz are cyclic (ν, with E = hν); energies in
//! Hartree double as angular frequencies since ħ = 1. Constants are
//! CODATA 2018.

use alloc::format;

use crate::{Error, Result};

/// Hartree energy expressed as a cyclic frequency E_h / h, in Hz.
pub const HARTREE_IN_HZ: f64 = 6.579_683_920_502e15;
/// Hartree energy in wavenumbers (cm⁻¹).
pub const HARTREE_IN_WAVENUMBER: f64 = 219_474.631_363_2;
/// Hartree energy in kcal/mol (thermochemical calorie).
pub const HARTREE_IN_KCAL_PER_MOL: f64 = 627.509_474_063_1;
/// Bohr radius in picometres.
pub const BOHR_IN_PM: f64 = 52.917_721_090_3;
/// Unified atomic mass unit in electron masses.
pub const DALTON_IN_ELECTRON_MASSES: f64 = 1_822.888_486_209;
/// Atomic unit of velocity in m/s.
pub const AU_VELOCITY_IN_M_PER_S: f64 = 2.187_691_263_64e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Length,
    Mass,
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    /// Atomic unit of energy / angular frequency.
    Hartree,
    /// Cyclic frequency in kHz.
    KiloHertz,
    /// Wavenumber, cm⁻¹.
    Wavenumber,
    KcalPerMol,
    Bohr,
    Picometer,
    /// Unified atomic mass unit.
    Dalton,
    ElectronMass,
    AuVelocity,
    MetersPerSecond,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Hartree | Unit::KiloHertz | Unit::Wavenumber | Unit::KcalPerMol => {
                Dimension::Energy
            }
            Unit::Bohr | Unit::Picometer => Dimension::Length,
            Unit::Dalton | Unit::ElectronMass => Dimension::Mass,
            Unit::AuVelocity | Unit::MetersPerSecond => Dimension::Velocity,
        }
    }

    /// The atomic unit of a dimension.
    pub fn atomic(dimension: Dimension) -> Unit {
        match dimension {
            Dimension::Energy => Unit::Hartree,
            Dimension::Length => Unit::Bohr,
            Dimension::Mass => Unit::ElectronMass,
            Dimension::Velocity => Unit::AuVelocity,
        }
    }

    /// Size of one of this unit expressed in the atomic unit of its dimension.
    fn in_atomic(self) -> f64 {
        match self {
            Unit::Hartree | Unit::Bohr | Unit::ElectronMass | Unit::AuVelocity => 1.0,
            Unit::KiloHertz => 1e3 / HARTREE_IN_HZ,
            Unit::Wavenumber => 1.0 / HARTREE_IN_WAVENUMBER,
            Unit::KcalPerMol => 1.0 / HARTREE_IN_KCAL_PER_MOL,
            Unit::Picometer => 1.0 / BOHR_IN_PM,
            Unit::Dalton => DALTON_IN_ELECTRON_MASSES,
            Unit::MetersPerSecond => 1.0 / AU_VELOCITY_IN_M_PER_S,
        }
    }

    /// Parse a unit name. `"a.u."`/`"au"` needs a dimension to resolve.
    pub fn parse(name: &str, dimension: Option<Dimension>) -> Result<Unit> {
        let unit = match name.trim() {
            "hartree" | "Eh" => Unit::Hartree,
            "kHz" | "khz" => Unit::KiloHertz,
            "cm-1" | "cm^-1" | "1/cm" | "cm⁻¹" => Unit::Wavenumber,
            "kcal/mol" => Unit::KcalPerMol,
            "bohr" | "Bohr" | "a0" => Unit::Bohr,
            "pm" => Unit::Picometer,
            "u" | "Da" | "amu" => Unit::Dalton,
            "me" | "m_e" => Unit::ElectronMass,
            "m/s" => Unit::MetersPerSecond,
            "a.u." | "au" => match dimension {
                Some(d) => Unit::atomic(d),
                None => {
                    return Err(Error::UnsupportedUnit(format!(
                        "'{name}' is ambiguous without a dimension"
                    )))
                }
            },
            other => return Err(Error::UnsupportedUnit(format!("unknown unit '{other}'"))),
        };
        if let Some(d) = dimension {
            if unit.dimension() != d {
                return Err(Error::UnsupportedUnit(format!(
                    "'{name}' is not a unit of {d:?}"
                )));
            }
        }
        Ok(unit)
    }
}

/// Convert `value` between two units of the same dimension.
pub fn unit_convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::UnsupportedUnit(format!(
            "cannot convert {from:?} ({:?}) to {to:?} ({:?})",
            from.dimension(),
            to.dimension()
        )));
    }
    Ok(value * from.in_atomic() / to.in_atomic())
}

/// Convert to the atomic unit of the value's dimension.
pub fn to_atomic(value: f64, from: Unit) -> f64 {
    value * from.in_atomic()
}

/// A length tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length {
    pub value: f64,
    pub unit: Unit,
}

impl Length {
    pub fn bohr(value: f64) -> Self {
        Self { value, unit: Unit::Bohr }
    }

    pub fn picometers(value: f64) -> Self {
        Self { value, unit: Unit::Picometer }
    }

    pub fn in_bohr(self) -> Result<f64> {
        unit_convert(self.value, self.unit, Unit::Bohr)
    }
}
