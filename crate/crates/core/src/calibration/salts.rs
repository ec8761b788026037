//! Saturated-salt fixed points.

use std::path::Path;

use crate::calibration::sensor::{CalibrationDataset, CalibrationPoint, DatasetMetadata};
use crate::error::{Error, Result};
use crate::hysteresis::Branch;
use crate::quantities::{Capacitance, RelHumidity, Temperature};

/// Salt solutions are equilibrated at 25 °C.
const SALT_TEMPERATURE_C: f64 = 25.0;

/// Parses a salt table of `[salt.<name>]` sections, each holding
/// `rh_percent`, `capacitance_pf` and optionally `branch`.
///
/// Points come back sorted by salt name.
pub fn load_fixed_points(text: &str) -> Result<CalibrationDataset> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    let mut points = Vec::new();
    for (key, value) in &doc {
        if key != "salt" {
            return Err(Error::Config(format!("unexpected top-level key `{key}`")));
        }
        let salts = value
            .as_table()
            .ok_or_else(|| Error::Config("`salt` must hold one section per salt".into()))?;
        for (name, entry) in salts {
            points.push(parse_salt(name, entry)?);
        }
    }
    Ok(CalibrationDataset {
        points,
        metadata: DatasetMetadata {
            frequency_hz: None,
            source: "saturated salt fixed points".into(),
        },
    })
}

pub fn load_fixed_points_path(path: &Path) -> Result<CalibrationDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_fixed_points(&text)
}

fn parse_salt(name: &str, entry: &toml::Value) -> Result<CalibrationPoint> {
    let table = entry
        .as_table()
        .ok_or_else(|| Error::Config(format!("salt `{name}` must be a section")))?;
    let number = |field: &str| -> Result<f64> {
        match table.get(field) {
            Some(toml::Value::Float(v)) => Ok(*v),
            Some(toml::Value::Integer(v)) => Ok(*v as f64),
            Some(_) => Err(Error::Config(format!("salt `{name}`: `{field}` must be a number"))),
            None => Err(Error::Config(format!("salt `{name}`: missing `{field}`"))),
        }
    };
    for field in table.keys() {
        if !matches!(field.as_str(), "rh_percent" | "capacitance_pf" | "branch") {
            return Err(Error::Config(format!("salt `{name}`: unknown field `{field}`")));
        }
    }
    let rh = number("rh_percent")?;
    if !(rh > 0.0 && rh < 100.0) {
        return Err(Error::Config(format!(
            "salt `{name}`: rh_percent = {rh} must lie in (0, 100)"
        )));
    }
    let c = Capacitance::from_pf(number("capacitance_pf")?)
        .map_err(|e| Error::Config(format!("salt `{name}`: {e}")))?;
    let branch = match table.get("branch") {
        None => Branch::Unknown,
        Some(toml::Value::String(s)) => Branch::parse(s).ok_or_else(|| {
            Error::Config(format!("salt `{name}`: branch `{s}` is not asc, desc or unk"))
        })?,
        Some(_) => return Err(Error::Config(format!("salt `{name}`: branch must be a string"))),
    };
    Ok(CalibrationPoint {
        x: RelHumidity::from_percent(rh)?,
        c,
        branch,
        t: Temperature::from_celsius(SALT_TEMPERATURE_C)?,
    })
}
