//! Internal natural units and laboratory conversions.
//!
//! Internally ħ = m = 1 and lengths are measured in `length_unit` (1 µm by
//! default). The derived time unit is `m·L²/ħ` (≈ 1.37 ms for Rb-87) and the
//! energy unit `ħ/time_unit` (≈ 5.58 nK·k_B). Temperatures are always carried
//! as energies `k_B·T`.

use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // only needed when std is absent from the build
use num_traits::Float;
use thiserror::Error;

pub const HBAR: f64 = 1.054572e-34;
pub const K_B: f64 = 1.380649e-23;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const MASS_RB87: f64 = 1.44316e-25;
pub const MASS_RB85: f64 = 1.40999e-25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitsError {
    #[error("unknown unit `{0}`")]
    UnknownUnit(alloc::string::String),
    #[error("cannot parse `{0}` as a number with a unit suffix")]
    Parse(alloc::string::String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: Dimension, right: Dimension },
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("unit system constants must be positive and finite")]
    InvalidConstants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Length,
    Time,
    Energy,
    Velocity,
    /// Converted to internal energy through `k_B·T`.
    Temperature,
    /// Angular frequency.
    Frequency,
    /// Potential energy per length (trap slopes).
    Gradient,
    Acceleration,
    Dimensionless,
}

impl Dimension {
    /// Energy and temperature are interchangeable wherever an energy is expected.
    pub fn accepts(self, given: Dimension) -> bool {
        self == given
            || matches!((self, given), (Dimension::Energy, Dimension::Temperature) | (Dimension::Temperature, Dimension::Energy))
    }

    pub fn example_unit(self) -> &'static str {
        match self {
            Dimension::Length => "µm",
            Dimension::Time => "ms",
            Dimension::Energy | Dimension::Temperature => "nK",
            Dimension::Velocity => "mm/s",
            Dimension::Frequency => "Hz",
            Dimension::Gradient => "nK/µm",
            Dimension::Acceleration => "m/s^2",
            Dimension::Dimensionless => "(none)",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Energy => "energy",
            Dimension::Velocity => "velocity",
            Dimension::Temperature => "temperature",
            Dimension::Frequency => "frequency",
            Dimension::Gradient => "gradient",
            Dimension::Acceleration => "acceleration",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

/// A value in SI base units (kelvin for temperatures, rad/s for frequencies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dimension,
}

impl Quantity {
    pub const fn new(value: f64, dim: Dimension) -> Self {
        Self { value, dim }
    }

    pub const fn micrometres(v: f64) -> Self {
        Self::new(v * 1e-6, Dimension::Length)
    }

    pub const fn nanokelvin(v: f64) -> Self {
        Self::new(v * 1e-9, Dimension::Temperature)
    }

    pub const fn milliseconds(v: f64) -> Self {
        Self::new(v * 1e-3, Dimension::Time)
    }

    pub fn checked_add(self, rhs: Quantity) -> Result<Quantity, UnitsError> {
        if self.dim != rhs.dim {
            return Err(UnitsError::DimensionMismatch { left: self.dim, right: rhs.dim });
        }
        Ok(Quantity::new(self.value + rhs.value, self.dim))
    }

    pub fn checked_sub(self, rhs: Quantity) -> Result<Quantity, UnitsError> {
        self.checked_add(Quantity::new(-rhs.value, rhs.dim))
    }

    pub fn scale(self, factor: f64) -> Quantity {
        Quantity::new(self.value * factor, self.dim)
    }
}

/// `(suffix, dimension, factor to SI)`
const SUFFIXES: &[(&str, Dimension, f64)] = &[
    ("m", Dimension::Length, 1.0),
    ("cm", Dimension::Length, 1e-2),
    ("mm", Dimension::Length, 1e-3),
    ("um", Dimension::Length, 1e-6),
    ("µm", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("s", Dimension::Time, 1.0),
    ("ms", Dimension::Time, 1e-3),
    ("us", Dimension::Time, 1e-6),
    ("µs", Dimension::Time, 1e-6),
    ("ns", Dimension::Time, 1e-9),
    ("J", Dimension::Energy, 1.0),
    ("K", Dimension::Temperature, 1.0),
    ("mK", Dimension::Temperature, 1e-3),
    ("uK", Dimension::Temperature, 1e-6),
    ("µK", Dimension::Temperature, 1e-6),
    ("nK", Dimension::Temperature, 1e-9),
    ("m/s", Dimension::Velocity, 1.0),
    ("cm/s", Dimension::Velocity, 1e-2),
    ("mm/s", Dimension::Velocity, 1e-3),
    ("um/s", Dimension::Velocity, 1e-6),
    ("µm/s", Dimension::Velocity, 1e-6),
    ("rad/s", Dimension::Frequency, 1.0),
    ("Hz", Dimension::Frequency, 2.0 * PI),
    ("kHz", Dimension::Frequency, 2.0e3 * PI),
    ("1/s", Dimension::Frequency, 1.0),
    ("1/ms", Dimension::Frequency, 1e3),
    // gradients are stored as J/m
    ("nK/um", Dimension::Gradient, 1e-9 * K_B / 1e-6),
    ("nK/µm", Dimension::Gradient, 1e-9 * K_B / 1e-6),
    ("uK/cm", Dimension::Gradient, 1e-6 * K_B / 1e-2),
    ("µK/cm", Dimension::Gradient, 1e-6 * K_B / 1e-2),
    ("G/cm", Dimension::Gradient, BOHR_MAGNETON * 1e-4 / 1e-2),
    ("m/s^2", Dimension::Acceleration, 1.0),
    ("m/s2", Dimension::Acceleration, 1.0),
];

impl FromStr for Quantity {
    type Err = UnitsError;

    /// Parses `"<number> <unit>"`; a bare number is dimensionless.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+'
                    || ((c == 'e' || c == 'E') && i > 0 && s[i + c.len_utf8()..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
            })
            .map(|(i, _)| i)
            .unwrap_or(s.len());
        let (num, unit) = s.split_at(split);
        let value: f64 = num.trim().parse().map_err(|_| UnitsError::Parse(s.into()))?;
        let unit = unit.trim();
        if unit.is_empty() {
            return Ok(Quantity::new(value, Dimension::Dimensionless));
        }
        SUFFIXES
            .iter()
            .find(|(u, _, _)| *u == unit)
            .map(|&(_, dim, f)| Quantity::new(value * f, dim))
            .ok_or_else(|| UnitsError::UnknownUnit(unit.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub length_unit: f64,
    pub mass: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { length_unit: 1e-6, mass: MASS_RB87, hbar: HBAR, k_b: K_B }
    }
}

impl UnitSystem {
    pub fn new(length_unit: f64, mass: f64) -> Result<Self, UnitsError> {
        let u = Self { length_unit, mass, ..Self::default() };
        if !(length_unit.is_finite() && length_unit > 0.0 && mass.is_finite() && mass > 0.0) {
            return Err(UnitsError::InvalidConstants);
        }
        Ok(u)
    }

    pub fn rb85() -> Self {
        Self { mass: MASS_RB85, ..Self::default() }
    }

    /// `m·L²/ħ`, seconds.
    pub fn time_unit(&self) -> f64 {
        self.mass * self.length_unit * self.length_unit / self.hbar
    }

    /// `ħ/time_unit`, joules.
    pub fn energy_unit(&self) -> f64 {
        self.hbar / self.time_unit()
    }

    pub fn velocity_unit(&self) -> f64 {
        self.length_unit / self.time_unit()
    }

    pub fn to_internal(&self, q: Quantity) -> f64 {
        let v = q.value;
        match q.dim {
            Dimension::Length => v / self.length_unit,
            Dimension::Time => v / self.time_unit(),
            Dimension::Energy => v / self.energy_unit(),
            Dimension::Temperature => self.k_b * v / self.energy_unit(),
            Dimension::Velocity => v / self.velocity_unit(),
            Dimension::Frequency => v * self.time_unit(),
            Dimension::Gradient => v * self.length_unit / self.energy_unit(),
            Dimension::Acceleration => v * self.time_unit() * self.time_unit() / self.length_unit,
            Dimension::Dimensionless => v,
        }
    }

    /// Inverse of [`UnitSystem::to_internal`]; SI value for `dim`.
    pub fn from_internal(&self, v: f64, dim: Dimension) -> Quantity {
        let si = match dim {
            Dimension::Length => v * self.length_unit,
            Dimension::Time => v * self.time_unit(),
            Dimension::Energy => v * self.energy_unit(),
            Dimension::Temperature => v * self.energy_unit() / self.k_b,
            Dimension::Velocity => v * self.velocity_unit(),
            Dimension::Frequency => v / self.time_unit(),
            Dimension::Gradient => v * self.energy_unit() / self.length_unit,
            Dimension::Acceleration => v * self.length_unit / (self.time_unit() * self.time_unit()),
            Dimension::Dimensionless => v,
        };
        Quantity::new(si, dim)
    }

    /// Internal energy → nanokelvin.
    pub fn energy_to_nk(&self, e: f64) -> f64 {
        self.from_internal(e, Dimension::Temperature).value * 1e9
    }

    pub fn nk_to_energy(&self, t_nk: f64) -> f64 {
        self.to_internal(Quantity::nanokelvin(t_nk))
    }

    /// Energy gradient (J/m) produced by a magnetic field gradient (G/cm) on a
    /// state with magnetic moment `moment` (J/T).
    pub fn zeeman_gradient(field_gradient_g_per_cm: f64, moment: f64) -> Quantity {
        Quantity::new(moment * field_gradient_g_per_cm * 1e-4 / 1e-2, Dimension::Gradient)
    }

    /// De Broglie wavelength in internal length units.
    pub fn thermal_de_broglie(&self, temperature_k: f64, convention: DeBroglie) -> Result<f64, UnitsError> {
        if !(temperature_k > 0.0) {
            return Err(UnitsError::NonPositiveTemperature(temperature_k));
        }
        let h = 2.0 * PI * self.hbar;
        let kt = self.k_b * temperature_k;
        let lambda = match convention {
            DeBroglie::HOverMvRms => h / (self.mass * (kt / self.mass).sqrt()),
            DeBroglie::ThermalStandard => h / (2.0 * PI * self.mass * kt).sqrt(),
        };
        Ok(lambda / self.length_unit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeBroglie {
    /// `h / (m·v_rms)` with `v_rms = √(k_B T / m)` (one dimension).
    HOverMvRms,
    /// `h / √(2π m k_B T)`.
    ThermalStandard,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> UnitSystem {
        UnitSystem::default()
    }

    #[test]
    fn unit_length_is_one() {
        assert_eq!(u().to_internal(Quantity::micrometres(1.0)), 1.0);
    }

    #[test]
    fn energy_unit_close_to_5_58_nk() {
        // ħ²/(m L²)/k_B evaluated by hand from the constant table
        let e_nk = HBAR * HBAR / (MASS_RB87 * 1e-12) / K_B * 1e9;
        assert!((e_nk - 5.5815).abs() < 1e-3, "{e_nk}");
        assert!((u().to_internal(Quantity::nanokelvin(5.58)) - 1.0).abs() < 1e-3);
        let v300 = u().to_internal(Quantity::nanokelvin(300.0));
        assert!((v300 - 300.0 / e_nk).abs() < 1e-9);
        assert!((v300 - 53.75).abs() < 0.05);
    }

    #[test]
    fn time_unit_is_milliseconds() {
        assert!((u().time_unit() * 1e3 - 1.3685).abs() < 1e-3);
        assert!(u().time_unit() > 0.0 && u().energy_unit() > 0.0);
    }

    #[test]
    fn round_trip_every_dimension() {
        let dims = [
            Dimension::Length,
            Dimension::Time,
            Dimension::Energy,
            Dimension::Velocity,
            Dimension::Temperature,
            Dimension::Frequency,
            Dimension::Gradient,
            Dimension::Acceleration,
            Dimension::Dimensionless,
        ];
        for (i, d) in dims.into_iter().enumerate() {
            let q = Quantity::new(1.234e-3 * (i as f64 + 1.0), d);
            let back = u().from_internal(u().to_internal(q), d);
            assert!(((back.value - q.value) / q.value).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn parses_suffixes() {
        let q: Quantity = "300 nK".parse().unwrap();
        assert_eq!(q.dim, Dimension::Temperature);
        assert!((q.value - 3e-7).abs() < 1e-20);
        let q: Quantity = "-20µm".parse().unwrap();
        assert!((q.value + 2e-5).abs() < 1e-18);
        let q: Quantity = "1.5e-3 m".parse().unwrap();
        assert_eq!(q.dim, Dimension::Length);
        assert!((q.value - 1.5e-3).abs() < 1e-18);
        assert_eq!("20".parse::<Quantity>().unwrap().dim, Dimension::Dimensionless);
        assert!(matches!("3 furlongs".parse::<Quantity>(), Err(UnitsError::UnknownUnit(_))));
        assert!(matches!("abc nK".parse::<Quantity>(), Err(UnitsError::Parse(_))));
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = Quantity::micrometres(1.0);
        let b = Quantity::nanokelvin(1.0);
        assert!(matches!(a.checked_add(b), Err(UnitsError::DimensionMismatch { .. })));
        assert!(a.checked_add(a).is_ok());
    }

    #[test]
    fn de_broglie_values() {
        let l700 = u().thermal_de_broglie(700e-9, DeBroglie::HOverMvRms).unwrap();
        // h / sqrt(m k T) by hand
        let oracle = 2.0 * PI * HBAR / (MASS_RB87 * K_B * 700e-9).sqrt() / 1e-6;
        assert!((l700 - oracle).abs() < 1e-12);
        assert!((l700 - 0.56).abs() < 0.01);
        let l13 = u().thermal_de_broglie(13e-9, DeBroglie::HOverMvRms).unwrap();
        assert!((l13 - 4.1).abs() < 0.05, "{l13}");
        let std13 = u().thermal_de_broglie(13e-9, DeBroglie::ThermalStandard).unwrap();
        assert!((std13 - l13 / (2.0 * PI).sqrt()).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for t in [1e-9, 1e-6, 1e-3, 1.0, 1e3] {
            let l = u().thermal_de_broglie(t, DeBroglie::ThermalStandard).unwrap();
            assert!(l < prev && l > 0.0);
            prev = l;
        }
        assert!(u().thermal_de_broglie(0.0, DeBroglie::HOverMvRms).is_err());
        assert!(u().thermal_de_broglie(-1.0, DeBroglie::ThermalStandard).is_err());
    }

    #[test]
    fn quadrupole_gradient_matches_quoted_slope() {
        let g = UnitSystem::zeeman_gradient(5.0, BOHR_MAGNETON);
        let uk_per_cm = g.value / K_B * 1e6 * 1e-2;
        assert!((uk_per_cm - 336.0).abs() < 1.0, "{uk_per_cm}");
        assert!((uk_per_cm - 300.0).abs() / 300.0 < 0.15);
        let parsed: Quantity = "5 G/cm".parse().unwrap();
        assert!((parsed.value - g.value).abs() < 1e-40);
    }

    #[test]
    fn rb85_is_lighter() {
        assert!(UnitSystem::rb85().time_unit() < u().time_unit());
    }
}
