//! Synthetic hourly outdoor-temperature series.
//!
//! A heating-season profile: a linear warming trend across the span, a daily
//! sinusoid with its minimum before dawn, and seeded AR(1) weather noise.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Season start for all generated series.
pub fn season_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2018, 1, 15)
        .unwrap()
        .and_hms_opt(0, 0, 0)
        .unwrap()
}

pub const T_OUT_MIN: f64 = -35.0;
pub const T_OUT_MAX: f64 = 18.0;

const TREND_START: f64 = -18.0;
const TREND_END: f64 = 5.0;
const DAILY_AMPLITUDE: f64 = 4.0;
/// Hour of day at which the daily cycle bottoms out.
const COLDEST_HOUR: f64 = 5.0;
const AR1_SIGMA: f64 = 1.5;
const AR1_RHO: f64 = 0.9;

/// Hourly outdoor temperatures with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSeries {
    pub start: NaiveDateTime,
    /// One value per hour from `start`.
    pub t_out: Vec<f64>,
}

impl WeatherSeries {
    pub fn len(&self) -> usize {
        self.t_out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_out.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::hours(i as i64)
    }

    /// Position of the last knot, in hours from `start`.
    pub fn last_hour(&self) -> f64 {
        (self.t_out.len() - 1) as f64
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("timestamp,t_out\n");
        for (i, v) in self.t_out.iter().enumerate() {
            out.push_str(&format!(
                "{},{v}\n",
                self.timestamp(i).format("%Y-%m-%dT%H:%M:%S")
            ));
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty weather csv".into()))?;
        if header.trim() != "timestamp,t_out" {
            return Err(Error::Schema(format!("unexpected weather header `{header}`")));
        }
        let mut start = None;
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (ts, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("weather row {}: missing comma", i + 1)))?;
            let ts = NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S")
                .map_err(|e| Error::Parse(format!("weather row {}: {e}", i + 1)))?;
            if start.is_none() {
                start = Some(ts);
            }
            values.push(
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("weather row {}: bad value", i + 1)))?,
            );
        }
        Ok(WeatherSeries {
            start: start.ok_or_else(|| Error::Parse("weather csv has no rows".into()))?,
            t_out: values,
        })
    }
}

fn trend(hour: usize, total_hours: usize) -> f64 {
    let span = (total_hours - 1).max(1) as f64;
    TREND_START + (TREND_END - TREND_START) * hour as f64 / span
}

fn daily(hour: usize) -> f64 {
    let phase = 2.0 * std::f64::consts::PI * (hour as f64 - COLDEST_HOUR) / 24.0;
    -DAILY_AMPLITUDE * phase.cos()
}

/// Generates `days` of hourly temperatures with the given noise level.
pub fn gen_weather_custom(days: usize, seed: u64, noise_sigma: f64) -> Result<WeatherSeries> {
    if days == 0 {
        return Err(Error::InvalidInput("need at least one day".into()));
    }
    let total = days * 24;
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut ar = 0.0_f64;
    let mut t_out = Vec::with_capacity(total);
    for h in 0..total {
        let z: f64 = StandardNormal.sample(&mut rng);
        ar = AR1_RHO * ar + noise_sigma * z;
        let v = (trend(h, total) + daily(h) + ar).clamp(T_OUT_MIN, T_OUT_MAX);
        t_out.push(v);
    }
    Ok(WeatherSeries {
        start: season_start(),
        t_out,
    })
}

/// Generates `days` of hourly temperatures with the default noise level.
pub fn gen_weather(days: usize, seed: u64) -> Result<WeatherSeries> {
    gen_weather_custom(days, seed, AR1_SIGMA)
}
