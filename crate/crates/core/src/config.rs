//! Run configuration: flat dotted keys over the sensor parameters plus
//! subcommand options.
//!
//! Files are TOML; nested sections flatten into dotted keys, so
//! `[diel]\nc0_pf = 250` and `diel.c0_pf = 250` are equivalent. Later
//! assignments override earlier ones, which gives flag > file > default when
//! `--set` values are applied after the file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pore::LogNormalMode;
use crate::sorption::ContactAngles;
use crate::twin::SensorParams;

const MODES: [&str; 2] = ["micro", "meso"];

/// Numeric keys mapped onto [`SensorParams`].
pub const SENSOR_KEYS: &[&str] = &[
    "porosity",
    "dist.micro.weight",
    "dist.micro.median_nm",
    "dist.micro.sigma_log",
    "dist.meso.weight",
    "dist.meso.median_nm",
    "dist.meso.sigma_log",
    "angles.advancing_deg",
    "angles.receding_deg",
    "bet.v_m",
    "bet.e1_minus_el",
    "bet.t_mono_nm",
    "diel.kappa_solid",
    "diel.c0_pf",
    "thermal.widening_amplitude",
    "thermal.widening_activation",
    "thermal.tau_in_s",
    "thermal.tau_out_s",
    "thermal.time_constant_s",
    "thermal.segment_resistance_ohm",
    "thermal.segment_thermal_resistance",
    "thermal.segment_max_power_w",
    "drift.rate",
    "drift.max_offset_pf",
    "drift.bake_temp_c",
    "drift.bake_time_s",
];

/// Subcommand options and whether they hold text.
const OPTION_KEYS: &[(&str, bool)] = &[
    ("loop.samples", false),
    ("loop.temp_c", false),
    ("maintenance.bake_interval_h", false),
    ("calibrate.mask", true),
];

const ALIASES: &[(&str, &str)] = &[("diel.porosity", "porosity"), ("dist.porosity", "porosity")];

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, ConfigValue>,
}

fn canonical(key: &str) -> Result<&'static str> {
    let key = ALIASES
        .iter()
        .find(|(alias, _)| *alias == key)
        .map(|(_, k)| *k)
        .unwrap_or(key);
    SENSOR_KEYS
        .iter()
        .copied()
        .chain(OPTION_KEYS.iter().map(|(k, _)| *k))
        .find(|k| *k == key)
        .ok_or_else(|| Error::Config(format!("unknown configuration key `{key}`")))
}

fn is_text(key: &str) -> bool {
    OPTION_KEYS.iter().any(|(k, text)| *k == key && *text)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat);
        let mut cfg = RunConfig::default();
        for (key, value) in flat {
            let value = match value {
                toml::Value::Float(v) => ConfigValue::Number(v),
                toml::Value::Integer(v) => ConfigValue::Number(v as f64),
                toml::Value::String(s) => ConfigValue::Text(s),
                other => {
                    return Err(Error::Config(format!(
                        "`{key}` has unsupported value `{other}`"
                    )))
                }
            };
            cfg.insert(&key, value)?;
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("`{assignment}` is not of the form key=value")))?;
        let (key, raw) = (key.trim(), raw.trim());
        let value = match raw.parse::<f64>() {
            Ok(v) => ConfigValue::Number(v),
            Err(_) => ConfigValue::Text(raw.trim_matches('"').to_string()),
        };
        self.insert(key, value)
    }

    fn insert(&mut self, key: &str, value: ConfigValue) -> Result<()> {
        let key = canonical(key)?;
        match (&value, is_text(key)) {
            (ConfigValue::Number(v), false) if v.is_finite() => {}
            (ConfigValue::Text(_), true) => {}
            (ConfigValue::Number(_), true) => {
                self.values
                    .insert(key.to_string(), ConfigValue::Text(format_number(&value)));
                return Ok(());
            }
            _ => {
                return Err(Error::Config(format!(
                    "`{key}` expects a finite number, got {value:?}"
                )))
            }
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(ConfigValue::Number(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(ConfigValue::Text(s)) => Some(s),
            _ => None,
        }
    }

    /// Non-negative integer option.
    pub fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.number(key) {
            None => Ok(None),
            Some(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => Ok(Some(v as usize)),
            Some(v) => Err(Error::Config(format!("`{key}` must be a non-negative integer, got {v}"))),
        }
    }

    /// Default parameters with every sensor key of this configuration applied.
    pub fn sensor_params(&self) -> Result<SensorParams> {
        self.apply(SensorParams::default())
    }

    pub fn apply(&self, mut p: SensorParams) -> Result<SensorParams> {
        let mut modes = p.dist.modes().to_vec();
        let mut advancing = p.angles.advancing_deg();
        let mut receding = p.angles.receding_deg();
        let mut porosity = p.diel.porosity;
        let mut modes_touched = false;
        for (key, value) in &self.values {
            let ConfigValue::Number(v) = *value else { continue };
            if !SENSOR_KEYS.contains(&key.as_str()) {
                continue;
            }
            let th = &mut p.thermal;
            match key.as_str() {
                "porosity" => porosity = v,
                "angles.advancing_deg" => advancing = v,
                "angles.receding_deg" => receding = v,
                "bet.v_m" => p.bet.v_m = v,
                "bet.e1_minus_el" => p.bet.e1_minus_el = v,
                "bet.t_mono_nm" => p.bet.t_mono_nm = v,
                "diel.kappa_solid" => p.diel.kappa_solid = v,
                "diel.c0_pf" => p.diel.c0_pf = v,
                "thermal.widening_amplitude" => th.widening_amplitude = v,
                "thermal.widening_activation" => th.widening_activation = v,
                "thermal.tau_in_s" => th.tau_in_s = v,
                "thermal.tau_out_s" => th.tau_out_s = v,
                "thermal.time_constant_s" => th.time_constant_s = v,
                "thermal.segment_resistance_ohm" => th.heater.iter_mut().for_each(|s| s.resistance_ohm = v),
                "thermal.segment_thermal_resistance" => {
                    th.heater.iter_mut().for_each(|s| s.thermal_resistance = v)
                }
                "thermal.segment_max_power_w" => th.heater.iter_mut().for_each(|s| s.max_power_w = v),
                "drift.rate" => p.drift.rate_per_s = v,
                "drift.max_offset_pf" => p.drift.max_offset_pf = v,
                "drift.bake_temp_c" => p.drift.bake_temp_c = v,
                "drift.bake_time_s" => p.drift.bake_time_s = v,
                dist_key => {
                    let mut parts = dist_key.split('.').skip(1);
                    let (mode, field) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
                    let i = MODES.iter().position(|m| *m == mode).expect("registered key");
                    if i >= modes.len() {
                        modes.resize(i + 1, LogNormalMode { weight: 0.0, ..modes[0] });
                    }
                    modes_touched = true;
                    match field {
                        "weight" => modes[i].weight = v,
                        "median_nm" => modes[i].median_radius_nm = v,
                        _ => modes[i].sigma_log = v,
                    }
                }
            }
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        if modes_touched {
            p.dist = p.dist.with_modes(modes).map_err(wrap)?;
        }
        p.angles = ContactAngles::new(advancing, receding).map_err(wrap)?;
        p.set_porosity(porosity).map_err(wrap)?;
        p.validate().map_err(wrap)?;
        Ok(p)
    }
}

fn format_number(v: &ConfigValue) -> String {
    match v {
        ConfigValue::Number(n) => n.to_string(),
        ConfigValue::Text(s) => s.clone(),
    }
}

/// Value of every sensor key, in registry order.
pub fn sensor_values(p: &SensorParams) -> Vec<(&'static str, f64)> {
    let modes = p.dist.modes();
    let seg = p.thermal.heater[0];
    let mut out = vec![("porosity", p.diel.porosity)];
    for (i, name) in MODES.iter().enumerate() {
        if let Some(m) = modes.get(i) {
            let keys: [&'static str; 3] = match *name {
                "micro" => ["dist.micro.weight", "dist.micro.median_nm", "dist.micro.sigma_log"],
                _ => ["dist.meso.weight", "dist.meso.median_nm", "dist.meso.sigma_log"],
            };
            out.push((keys[0], m.weight));
            out.push((keys[1], m.median_radius_nm));
            out.push((keys[2], m.sigma_log));
        }
    }
    out.extend([
        ("angles.advancing_deg", p.angles.advancing_deg()),
        ("angles.receding_deg", p.angles.receding_deg()),
        ("bet.v_m", p.bet.v_m),
        ("bet.e1_minus_el", p.bet.e1_minus_el),
        ("bet.t_mono_nm", p.bet.t_mono_nm),
        ("diel.kappa_solid", p.diel.kappa_solid),
        ("diel.c0_pf", p.diel.c0_pf),
        ("thermal.widening_amplitude", p.thermal.widening_amplitude),
        ("thermal.widening_activation", p.thermal.widening_activation),
        ("thermal.tau_in_s", p.thermal.tau_in_s),
        ("thermal.tau_out_s", p.thermal.tau_out_s),
        ("thermal.time_constant_s", p.thermal.time_constant_s),
        ("thermal.segment_resistance_ohm", seg.resistance_ohm),
        ("thermal.segment_thermal_resistance", seg.thermal_resistance),
        ("thermal.segment_max_power_w", seg.max_power_w),
        ("drift.rate", p.drift.rate_per_s),
        ("drift.max_offset_pf", p.drift.max_offset_pf),
        ("drift.bake_temp_c", p.drift.bake_temp_c),
        ("drift.bake_time_s", p.drift.bake_time_s),
    ]);
    out
}

/// Serializes parameters as a `key = value` file readable by [`RunConfig`].
pub fn params_to_string(p: &SensorParams) -> String {
    sensor_values(p)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v:?}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys_agree() {
        let a = RunConfig::from_toml_str("[diel]\nc0_pf = 300\n").unwrap();
        let b = RunConfig::from_toml_str("diel.c0_pf = 300.0\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sensor_params().unwrap().diel.c0_pf, 300.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::from_toml_str("diel.c1_pf = 3\n"),
            Err(Error::Config(_))
        ));
        let mut c = RunConfig::default();
        assert!(c.set("bogus=1").is_err());
        assert!(c.set("no-equals").is_err());
        assert!(c.set("diel.c0_pf=abc").is_err());
    }

    #[test]
    fn later_assignment_wins() {
        let mut c = RunConfig::from_toml_str("porosity = 0.25\n").unwrap();
        assert_eq!(c.sensor_params().unwrap().dist.porosity(), 0.25);
        c.set("diel.porosity=0.4").unwrap();
        let p = c.sensor_params().unwrap();
        assert_eq!(p.diel.porosity, 0.4);
        assert_eq!(p.dist.porosity(), 0.4);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let c = RunConfig::from_toml_str("angles.receding_deg = 80\n").unwrap();
        assert!(matches!(c.sensor_params(), Err(Error::Config(_))));
        let c = RunConfig::from_toml_str("dist.micro.weight = 0.7\n").unwrap();
        assert!(matches!(c.sensor_params(), Err(Error::Config(_))));
    }

    #[test]
    fn parameter_file_round_trips() {
        let mut p = SensorParams::default();
        p.diel.c0_pf = 123.456789012345;
        p.angles = ContactAngles::new(65.0, 30.0).unwrap();
        let back = RunConfig::from_toml_str(&params_to_string(&p))
            .unwrap()
            .sensor_params()
            .unwrap();
        assert_eq!(back, p);
    }
}
