//! `key = value` text-config parsing for plant and standard parameters.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored.
//! Unknown keys are rejected so typos never silently fall back to defaults.

use std::collections::BTreeMap;

use crate::plant::{PlantParams, StandardParams};
use crate::{Error, Result};

/// Parses `key = value` text into an ordered map. Duplicate keys are
/// rejected.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("duplicate key `{key}`")));
        }
    }
    Ok(map)
}

fn take_f64(map: &mut BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.remove(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not a number"))),
    }
}

fn reject_leftover(map: &BTreeMap<String, String>, context: &str) -> Result<()> {
    if let Some(key) = map.keys().next() {
        return Err(Error::Config(format!("unknown {context} key `{key}`")));
    }
    Ok(())
}

/// Loads plant parameters from parsed config entries prefixed `plant.`,
/// falling back to the reference station for missing keys.
pub fn plant_params_from_kv(map: &BTreeMap<String, String>) -> Result<PlantParams> {
    let mut own: BTreeMap<String, String> = map
        .iter()
        .filter_map(|(k, v)| {
            k.strip_prefix("plant.")
                .map(|rest| (rest.to_string(), v.clone()))
        })
        .collect();
    let d = PlantParams::reference();
    let params = PlantParams {
        c: take_f64(&mut own, "c", d.c)?,
        ua_hx: take_f64(&mut own, "ua_hx", d.ua_hx)?,
        ua_building: take_f64(&mut own, "ua_building", d.ua_building)?,
        ua_pipe: take_f64(&mut own, "ua_pipe", d.ua_pipe)?,
        t_indoor: take_f64(&mut own, "t_indoor", d.t_indoor)?,
        noise_sigma_temp: take_f64(&mut own, "noise_sigma_temp", d.noise_sigma_temp)?,
        noise_sigma_flow: take_f64(&mut own, "noise_sigma_flow", d.noise_sigma_flow)?,
        pump_poly: [
            take_f64(&mut own, "pump_a2", d.pump_poly[0])?,
            take_f64(&mut own, "pump_a1", d.pump_poly[1])?,
            take_f64(&mut own, "pump_a0", d.pump_poly[2])?,
        ],
    };
    reject_leftover(&own, "plant")?;
    if params.c <= 0.0 || params.ua_hx <= 0.0 {
        return Err(Error::Config("c and ua_hx must be positive".into()));
    }
    Ok(params)
}

/// Loads standard-demand parameters from entries prefixed `standard.`.
pub fn standard_params_from_kv(map: &BTreeMap<String, String>) -> Result<StandardParams> {
    let mut own: BTreeMap<String, String> = map
        .iter()
        .filter_map(|(k, v)| {
            k.strip_prefix("standard.")
                .map(|rest| (rest.to_string(), v.clone()))
        })
        .collect();
    let d = StandardParams::national();
    let params = StandardParams {
        k_loss: take_f64(&mut own, "k_loss", d.k_loss)?,
        area: take_f64(&mut own, "area", d.area)?,
        t_required: take_f64(&mut own, "t_required", d.t_required)?,
        t_design: take_f64(&mut own, "t_design", d.t_design)?,
        duration: take_f64(&mut own, "duration", d.duration)?,
    };
    reject_leftover(&own, "standard")?;
    if params.t_required <= params.t_design {
        return Err(Error::Config(
            "t_required must exceed t_design".into(),
        ));
    }
    Ok(params)
}
