//! Physics model, digital twin and calibration toolkit for capacitive
//! humidity sensors built on porous anodic alumina.
//!
//! The model chain runs from a log-normal pore size distribution through
//! BET film growth and Kelvin capillary condensation (with contact-angle
//! hysteresis tracked per pore) to a logarithmic permittivity mixing rule
//! and the sensor capacitance. [`twin`] adds temperature, wall diffusion,
//! chemisorption drift and the heater; [`calibration`] fits it all to data.

pub mod calibration;
pub mod cli;
pub mod config;
pub mod dielectric;
pub mod error;
pub mod hysteresis;
pub mod io;
pub mod pore;
pub mod quantities;
pub mod sorption;
pub mod twin;

pub use error::{Error, Result};
pub use quantities::{Capacitance, RelHumidity, Temperature};
