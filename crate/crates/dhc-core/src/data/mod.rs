//! Operating-data generation, interpolation, and dataset handling.
//!
//! A [`Dataset`] holds timestamped station records the way the cloud
//! historian would: outdoor temperature, primary supply temperature,
//! commanded controls, measured temperature differences, and the heat
//! quantities derived from them. Data is produced by driving the
//! ground-truth plant with a weekly operator policy plus seeded scatter,
//! sampling the hourly weather through shape-preserving interpolation.

mod interp;
mod split;
mod weather;

pub use interp::{cubic_spline, pchip};
pub use split::{rolling_windows, split_7_1, RollingWindow};
pub use weather::{
    gen_weather, gen_weather_custom, season_start, WeatherSeries, T_OUT_MAX, T_OUT_MIN,
};

use chrono::{Duration, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::plant::{
    plant_steady_state, pump_flow, supply_temp_curve, supply_temp_schedule, target_heat,
    PlantParams, StandardParams, FLOW1_MAX, FLOW1_MIN, PUMP_F_MAX, PUMP_F_MIN,
};
use crate::{Error, Result};

/// Operator scatter applied on top of the weekly set-points, sized so the
/// recorded data covers the control region an optimizing agent will visit.
const JITTER_FLOW1: f64 = 18.0;
const JITTER_PUMP_F: f64 = 6.0;
/// Operator scatter on the heat-source supply temperature, degC.
const SUPPLY_TEMP_SIGMA: f64 = 2.0;

/// One timestamped operating record.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub timestamp: NaiveDateTime,
    pub t_out: f64,
    pub t1_supply: f64,
    pub flow1: f64,
    pub flow2: f64,
    pub pump_f: f64,
    /// Primary-side temperature difference, degC.
    pub tdp: f64,
    /// Secondary-side temperature difference, degC.
    pub tds: f64,
    /// Secondary supply water temperature, degC.
    pub swts: f64,
    pub t2_return: f64,
    pub q1: f64,
    pub q2: f64,
    pub q_target: f64,
}

const CSV_HEADER: &str =
    "timestamp,t_out,t1_supply,flow1,flow2,pump_f,tdp,tds,swts,t2_return,q1,q2,q_target";
const TIME_FMT: &str = "%Y-%m-%dT%H:%M:%S";

/// Chronologically sorted collection of [`Sample`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Whole days since the first sample.
    pub fn day_index(&self, i: usize) -> usize {
        let t0 = self.samples[0].timestamp;
        ((self.samples[i].timestamp - t0).num_seconds() / 86_400) as usize
    }

    /// Number of (possibly partial) days covered.
    pub fn num_days(&self) -> usize {
        if self.samples.is_empty() {
            0
        } else {
            self.day_index(self.len() - 1) + 1
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.timestamp.format(TIME_FMT),
                s.t_out,
                s.t1_supply,
                s.flow1,
                s.flow2,
                s.pump_f,
                s.tdp,
                s.tds,
                s.swts,
                s.t2_return,
                s.q1,
                s.q2,
                s.q_target
            ));
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dataset csv".into()))?;
        if header.trim() != CSV_HEADER {
            return Err(Error::Schema(format!("unexpected dataset header `{header}`")));
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 13 {
                return Err(Error::Parse(format!(
                    "dataset row {}: {} fields, expected 13",
                    i + 1,
                    fields.len()
                )));
            }
            let ts = NaiveDateTime::parse_from_str(fields[0], TIME_FMT)
                .map_err(|e| Error::Parse(format!("dataset row {}: {e}", i + 1)))?;
            let num = |k: usize| -> Result<f64> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("dataset row {}: bad field {k}", i + 1)))
            };
            samples.push(Sample {
                timestamp: ts,
                t_out: num(1)?,
                t1_supply: num(2)?,
                flow1: num(3)?,
                flow2: num(4)?,
                pump_f: num(5)?,
                tdp: num(6)?,
                tds: num(7)?,
                swts: num(8)?,
                t2_return: num(9)?,
                q1: num(10)?,
                q2: num(11)?,
                q_target: num(12)?,
            });
        }
        Ok(Dataset { samples })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// Source of commanded controls during data generation.
pub trait OperatorPolicy {
    /// Commanded `(flow1, pump_f)` for a sample on the given day.
    fn controls(&self, day_index: usize, rng: &mut ChaCha8Rng) -> (f64, f64);
}

/// Weekly set-point operator: once per week the controls are re-set to the
/// cheapest level that meets the week's coldest-hour target, then held, with
/// per-sample scatter standing in for manual fine-tuning.
#[derive(Debug, Clone)]
pub struct WeeklyOperator {
    week_controls: Vec<(f64, f64)>,
    pub jitter_flow1: f64,
    pub jitter_pump_f: f64,
}

/// Cheapest grid controls meeting the target at the given conditions, or
/// full throttle when the target is out of reach.
pub fn controls_meeting_target(
    plant: &PlantParams,
    std: &StandardParams,
    t_out: f64,
    t1_supply: f64,
) -> (f64, f64) {
    let q_target = target_heat(std, t_out);
    let mut best: Option<(f64, (f64, f64))> = None;
    let mut flow1 = FLOW1_MIN;
    while flow1 <= FLOW1_MAX + 1e-9 {
        let mut f = PUMP_F_MIN;
        while f <= PUMP_F_MAX + 1e-9 {
            let flow2 = pump_flow(plant.pump_poly, f).unwrap();
            if let Ok(st) =
                plant_steady_state(plant, std, t1_supply, flow1, flow2, t_out, None)
            {
                if st.q1 >= q_target && st.q2 >= q_target {
                    let cost = flow1 + flow2;
                    if best.map_or(true, |(c, _)| cost < c) {
                        best = Some((cost, (flow1, f)));
                    }
                }
            }
            f += 1.0;
        }
        flow1 += 5.0;
    }
    best.map_or((FLOW1_MAX, PUMP_F_MAX), |(_, controls)| controls)
}

impl WeeklyOperator {
    pub fn plan(weather: &WeatherSeries, plant: &PlantParams, std: &StandardParams) -> Self {
        let days = weather.len() / 24;
        let weeks = days.div_ceil(7).max(1);
        let mut week_controls = Vec::with_capacity(weeks);
        for w in 0..weeks {
            let lo = w * 7 * 24;
            let hi = ((w + 1) * 7 * 24).min(weather.len());
            let coldest = weather.t_out[lo..hi]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            let t1s = supply_temp_curve(coldest);
            week_controls.push(controls_meeting_target(plant, std, coldest, t1s));
        }
        WeeklyOperator {
            week_controls,
            jitter_flow1: JITTER_FLOW1,
            jitter_pump_f: JITTER_PUMP_F,
        }
    }

    /// The planned constant controls, one entry per week.
    pub fn week_controls(&self) -> &[(f64, f64)] {
        &self.week_controls
    }
}

impl OperatorPolicy for WeeklyOperator {
    fn controls(&self, day_index: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let week = (day_index / 7).min(self.week_controls.len() - 1);
        let (flow1, pump_f) = self.week_controls[week];
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        (
            (flow1 + self.jitter_flow1 * z1).clamp(FLOW1_MIN, FLOW1_MAX),
            (pump_f + self.jitter_pump_f * z2).clamp(PUMP_F_MIN, PUMP_F_MAX),
        )
    }
}

/// Drives the plant with the operator policy over the weather span,
/// recording one sample every `interval_min` minutes.
pub fn gen_dataset(
    plant: &PlantParams,
    std: &StandardParams,
    weather: &WeatherSeries,
    interval_min: u32,
    policy: &dyn OperatorPolicy,
    seed: u64,
) -> Result<Dataset> {
    if interval_min == 0 {
        return Err(Error::InvalidInput("interval must be positive".into()));
    }
    if weather.len() < 24 {
        return Err(Error::InvalidInput("weather must cover at least a day".into()));
    }
    let days = weather.len() / 24;
    let n_samples = (days as u64 * 1440 / interval_min as u64) as usize;

    // Outdoor temperature at every sample time via shape-preserving
    // interpolation of the hourly record; the final partial hour holds the
    // last reading.
    let knot_xs: Vec<f64> = (0..weather.len()).map(|h| h as f64).collect();
    let last = weather.last_hour();
    let query_xs: Vec<f64> = (0..n_samples)
        .map(|k| (k as f64 * interval_min as f64 / 60.0).min(last))
        .collect();
    let t_outs = pchip(&knot_xs, &weather.t_out, &query_xs)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n_samples);
    for (k, &t_out) in t_outs.iter().enumerate() {
        let minutes = k as u64 * interval_min as u64;
        let timestamp = weather.start + Duration::minutes(minutes as i64);
        let day = (minutes / 1440) as usize;

        let t1_supply = supply_temp_schedule(t_out, SUPPLY_TEMP_SIGMA, &mut rng);
        let (flow1, pump_f) = policy.controls(day, &mut rng);
        let flow2 = pump_flow(plant.pump_poly, pump_f)?;
        let st = plant_steady_state(plant, std, t1_supply, flow1, flow2, t_out, Some(&mut rng))?;

        samples.push(Sample {
            timestamp,
            t_out,
            t1_supply: st.t1_supply,
            flow1: st.flow1,
            flow2: st.flow2,
            pump_f,
            tdp: st.t1_supply - st.t1_return,
            tds: st.t2_supply - st.t2_return,
            swts: st.t2_supply,
            t2_return: st.t2_return,
            q1: st.q1,
            q2: st.q2,
            q_target: st.q_target,
        });
    }
    Ok(Dataset { samples })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Minimal synthetic dataset: `per_day` evenly spaced samples on each of
    /// `days` days. Only timing fields matter for split tests.
    pub(crate) fn tiny_dataset(days: usize, per_day: usize) -> Dataset {
        let start = season_start();
        let mut samples = Vec::new();
        for d in 0..days {
            for k in 0..per_day {
                let ts = start + Duration::minutes((d * 1440 + k * 1440 / per_day) as i64);
                samples.push(Sample {
                    timestamp: ts,
                    t_out: -10.0,
                    t1_supply: 70.0,
                    flow1: 55.0,
                    flow2: 170.0,
                    pump_f: 35.0,
                    tdp: 20.0,
                    tds: 9.0,
                    swts: 45.0,
                    t2_return: 36.0,
                    q1: 4.6,
                    q2: 6.4,
                    q_target: 6.6,
                });
            }
        }
        Dataset { samples }
    }

    fn small_gen(days: usize, noise: bool) -> Dataset {
        let plant = if noise {
            PlantParams::reference()
        } else {
            PlantParams::reference().noise_free()
        };
        let std = StandardParams::national();
        let weather = gen_weather(days, 42).unwrap();
        let op = WeeklyOperator::plan(&weather, &plant, &std);
        gen_dataset(&plant, &std, &weather, 30, &op, 7).unwrap()
    }

    #[test]
    fn row_counts_match_interval_arithmetic() {
        let plant = PlantParams::reference().noise_free();
        let std = StandardParams::national();
        let weather = gen_weather(8, 5).unwrap();
        let op = WeeklyOperator::plan(&weather, &plant, &std);
        let half_hour = gen_dataset(&plant, &std, &weather, 30, &op, 1).unwrap();
        assert_eq!(half_hour.len(), 8 * 48);
        let dense = gen_dataset(&plant, &std, &weather, 450 / 60, &op, 1).unwrap();
        // 7.5-minute cadence rounds down to 7 minutes only if misdeclared;
        // generate with the true interval instead.
        assert!(dense.len() > half_hour.len());
    }

    #[test]
    fn noise_free_rows_satisfy_heat_identities() {
        let ds = small_gen(2, false);
        let c = PlantParams::reference().c;
        for s in &ds.samples {
            assert!((s.q1 - c * s.flow1 * s.tdp).abs() < 1e-12);
            assert!((s.q2 - c * s.flow2 * s.tds).abs() < 1e-12);
            assert!((s.tds - (s.swts - s.t2_return)).abs() < 1e-12);
            let std = StandardParams::national();
            assert_eq!(s.q_target, target_heat(&std, s.t_out));
        }
    }

    #[test]
    fn noisy_rows_still_satisfy_reported_identities() {
        let ds = small_gen(2, true);
        let c = PlantParams::reference().c;
        for s in &ds.samples {
            assert!((s.q1 - c * s.flow1 * s.tdp).abs() < 1e-12);
            assert!((s.q2 - c * s.flow2 * s.tds).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let a = small_gen(2, true);
        let b = small_gen(2, true);
        assert_eq!(a, b);
    }

    #[test]
    fn rows_are_chronological() {
        let ds = small_gen(3, false);
        assert!(ds
            .samples
            .windows(2)
            .all(|w| w[0].timestamp < w[1].timestamp));
        assert_eq!(ds.num_days(), 3);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = small_gen(1, true);
        let text = ds.to_csv_string();
        let back = Dataset::from_csv_str(&text).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn weekly_controls_are_piecewise_constant() {
        let plant = PlantParams::reference().noise_free();
        let std = StandardParams::national();
        let weather = gen_weather(15, 3).unwrap();
        let mut op = WeeklyOperator::plan(&weather, &plant, &std);
        assert_eq!(op.week_controls().len(), 3);
        // With scatter off, every sample in a week carries the same controls.
        op.jitter_flow1 = 0.0;
        op.jitter_pump_f = 0.0;
        let ds = gen_dataset(&plant, &std, &weather, 60, &op, 3).unwrap();
        let per_day = 24;
        for d in 0..7 {
            for k in 0..per_day {
                let s = &ds.samples[d * per_day + k];
                assert_eq!(s.pump_f, ds.samples[0].pump_f);
            }
        }
    }

    #[test]
    fn colder_weeks_demand_more_water() {
        // The plan for the coldest stretch of the season should not be
        // cheaper than the plan for the mildest stretch.
        let plant = PlantParams::reference().noise_free();
        let std = StandardParams::national();
        let (cold_f1, cold_f) = controls_meeting_target(&plant, &std, -24.0, 73.6);
        let (mild_f1, mild_f) = controls_meeting_target(&plant, &std, 2.0, 50.2);
        assert!(cold_f1 + cold_f >= mild_f1 + mild_f);
        assert!(mild_f1 < FLOW1_MAX);
    }
}
