//! Physical quantities, constants and liquid-water properties.
//!
//! Relative humidity is always stored as the vapor-pressure ratio `p/p0`;
//! percent only appears at I/O boundaries.

use crate::error::{Error, Result};

/// Molar gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314462618;
/// Relative permittivity of liquid water at room temperature.
pub const KAPPA_WATER: f64 = 80.0;
/// Relative permittivity of air.
pub const KAPPA_AIR: f64 = 1.0;
/// Offset between the Celsius and Kelvin scales.
pub const CELSIUS_OFFSET: f64 = 273.15;

/// Liquid water molar volume, m^3/mol.
pub const WATER_MOLAR_VOLUME: f64 = 1.805e-5;

fn finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidQuantity {
            what,
            value,
            reason: "not finite",
        })
    }
}

/// Relative humidity as a fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RelHumidity(f64);

impl RelHumidity {
    pub const DRY: RelHumidity = RelHumidity(0.0);
    pub const SATURATED: RelHumidity = RelHumidity(1.0);

    pub fn new(fraction: f64) -> Result<Self> {
        let x = finite("relative humidity", fraction)?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange {
                what: "relative humidity",
                value: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(RelHumidity(x))
    }

    pub fn from_percent(percent: f64) -> Result<Self> {
        let p = finite("relative humidity percent", percent)?;
        if !(0.0..=100.0).contains(&p) {
            return Err(Error::OutOfRange {
                what: "relative humidity percent",
                value: p,
                lo: 0.0,
                hi: 100.0,
            });
        }
        Ok(RelHumidity(p / 100.0))
    }

    pub fn fraction(self) -> f64 {
        self.0
    }

    pub fn percent(self) -> f64 {
        self.0 * 100.0
    }
}

/// Absolute temperature.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub fn from_kelvin(kelvin: f64) -> Result<Self> {
        let k = finite("temperature", kelvin)?;
        if k <= 0.0 {
            return Err(Error::InvalidQuantity {
                what: "temperature",
                value: k,
                reason: "must be above absolute zero",
            });
        }
        Ok(Temperature(k))
    }

    pub fn from_celsius(celsius: f64) -> Result<Self> {
        Self::from_kelvin(finite("temperature", celsius)? + CELSIUS_OFFSET)
    }

    pub fn kelvin(self) -> f64 {
        self.0
    }

    pub fn celsius(self) -> f64 {
        self.0 - CELSIUS_OFFSET
    }

    /// `R * T` in J/mol.
    pub fn thermal_energy(self) -> f64 {
        GAS_CONSTANT * self.0
    }
}

/// Capacitance in picofarads.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Capacitance(f64);

impl Capacitance {
    pub fn from_pf(picofarads: f64) -> Result<Self> {
        let c = finite("capacitance", picofarads)?;
        if c < 0.0 {
            return Err(Error::InvalidQuantity {
                what: "capacitance",
                value: c,
                reason: "must be non-negative",
            });
        }
        Ok(Capacitance(c))
    }

    pub fn pf(self) -> f64 {
        self.0
    }
}

/// Liquid water properties entering the Kelvin equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterProperties {
    /// N/m
    pub surface_tension: f64,
    /// m^3/mol
    pub molar_volume: f64,
}

impl WaterProperties {
    pub fn new(surface_tension: f64, molar_volume: f64) -> Result<Self> {
        let g = finite("surface tension", surface_tension)?;
        let v = finite("molar volume", molar_volume)?;
        if g <= 0.0 {
            return Err(Error::InvalidQuantity {
                what: "surface tension",
                value: g,
                reason: "must be positive",
            });
        }
        if v <= 0.0 {
            return Err(Error::InvalidQuantity {
                what: "molar volume",
                value: v,
                reason: "must be positive",
            });
        }
        Ok(WaterProperties {
            surface_tension: g,
            molar_volume: v,
        })
    }
}

/// Water properties at `t`, valid from 0 to 100 degC.
///
/// Surface tension follows the linear fit `(75.64 - 0.1414 t_C) mN/m`; the
/// molar volume is held constant.
pub fn water_properties(t: Temperature) -> Result<WaterProperties> {
    let k = t.kelvin();
    if !(CELSIUS_OFFSET..=CELSIUS_OFFSET + 100.0).contains(&k) {
        return Err(Error::OutOfRange {
            what: "temperature (K) for water properties",
            value: k,
            lo: CELSIUS_OFFSET,
            hi: CELSIUS_OFFSET + 100.0,
        });
    }
    let t_c = t.celsius();
    WaterProperties::new((75.64 - 0.1414 * t_c) * 1e-3, WATER_MOLAR_VOLUME)
}

/// Saturation vapor pressure over liquid water in Pa (Magnus form).
pub(crate) fn saturation_pressure(t: Temperature) -> f64 {
    let c = t.celsius();
    610.94 * (17.625 * c / (c + 243.04)).exp()
}
