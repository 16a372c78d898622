//! Ground-truth physics of a two-loop heat-exchange station.
//!
//! The station couples a primary loop (heat source side) to a secondary loop
//! (consumer side) through a counter-flow heat exchanger modelled with the
//! effectiveness-NTU method. The secondary loop feeds an aggregate building
//! load through a lossy supply pipe. Units follow the station convention:
//! flows in t/h, temperatures in degC, heat in GJ/h, conductances in
//! GJ/(h*degC).
//!
//! The module also provides the national-standard target heat quantity and
//! the circulating-pump flow polynomial.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Valve-limited primary-side flow range, t/h.
pub const FLOW1_MIN: f64 = 10.0;
pub const FLOW1_MAX: f64 = 100.0;
/// Circulating-pump frequency range, Hz.
pub const PUMP_F_MIN: f64 = 20.0;
pub const PUMP_F_MAX: f64 = 50.0;

/// Physical parameters of the station and its measurement noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantParams {
    /// Specific heat of water, GJ/(t*degC).
    pub c: f64,
    /// Heat-exchanger conductance, GJ/(h*degC).
    pub ua_hx: f64,
    /// Aggregate building loss conductance, GJ/(h*degC).
    pub ua_building: f64,
    /// Secondary supply-pipe loss conductance, GJ/(h*degC).
    pub ua_pipe: f64,
    /// Indoor design temperature, degC.
    pub t_indoor: f64,
    /// Std dev of reported temperature noise, degC.
    pub noise_sigma_temp: f64,
    /// Std dev of reported flow noise, t/h.
    pub noise_sigma_flow: f64,
    /// Circulating-pump flow polynomial (a2, a1, a0): flow = a2 f^2 + a1 f + a0.
    pub pump_poly: [f64; 3],
}

impl PlantParams {
    /// Reference desk-scale station, sized so that steady-state heat at
    /// design conditions lands near the national-standard target.
    pub fn reference() -> Self {
        PlantParams {
            c: 4.186e-3,
            ua_hx: 0.9,
            ua_building: 0.22,
            ua_pipe: 0.015,
            t_indoor: 18.0,
            noise_sigma_temp: 0.3,
            noise_sigma_flow: 1.0,
            pump_poly: [0.1492, -5.177, 168.2],
        }
    }

    /// Same station with measurement noise disabled.
    pub fn noise_free(mut self) -> Self {
        self.noise_sigma_temp = 0.0;
        self.noise_sigma_flow = 0.0;
        self
    }
}

/// National-standard heating demand parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardParams {
    /// Building heat-loss index, W/m^2.
    pub k_loss: f64,
    /// Heated area, m^2.
    pub area: f64,
    /// Required indoor temperature, degC.
    pub t_required: f64,
    /// Design outdoor temperature, degC.
    pub t_design: f64,
    /// Accounting period, s.
    pub duration: f64,
}

impl StandardParams {
    /// The test station's published constants.
    pub fn national() -> Self {
        StandardParams {
            k_loss: 42.9,
            area: 6.2e4,
            t_required: 18.0,
            t_design: -22.4,
            duration: 3600.0,
        }
    }
}

/// Reported station state at one steady operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantState {
    pub t1_supply: f64,
    pub t1_return: f64,
    /// Secondary supply temperature as delivered to the buildings
    /// (after pipe loss), degC.
    pub t2_supply: f64,
    pub t2_return: f64,
    pub flow1: f64,
    pub flow2: f64,
    /// Heat drawn from the primary side, GJ/h.
    pub q1: f64,
    /// Heat delivered on the secondary side, GJ/h.
    pub q2: f64,
    /// National-standard demand at `t_out`, GJ/h.
    pub q_target: f64,
    pub t_out: f64,
}

/// National-standard target heat quantity, GJ/h. Clamps to zero once the
/// outdoor temperature reaches the required indoor temperature.
pub fn target_heat(std: &StandardParams, t_out: f64) -> f64 {
    let t_out = t_out.min(std.t_required);
    let ratio = (std.t_required - t_out) / (std.t_required - std.t_design);
    std.k_loss * std.area * ratio * std.duration / 1e9
}

/// Transferred heat quantity Q = c * F * TD, GJ/h.
pub fn heat_quantity(c: f64, flow: f64, td: f64) -> Result<f64> {
    if flow < 0.0 {
        return Err(Error::InvalidInput(format!("negative flow {flow}")));
    }
    Ok(c * flow * td)
}

/// Circulating-pump flow at frequency `f`, t/h.
pub fn pump_flow(poly: [f64; 3], f: f64) -> Result<f64> {
    if !(PUMP_F_MIN..=PUMP_F_MAX).contains(&f) {
        return Err(Error::OutOfRange(format!(
            "pump frequency {f} outside [{PUMP_F_MIN}, {PUMP_F_MAX}]"
        )));
    }
    Ok(poly[0] * f * f + poly[1] * f + poly[2])
}

/// Counter-flow exchanger effectiveness for the given side flows.
pub fn hx_effectiveness(params: &PlantParams, flow1: f64, flow2: f64) -> Result<f64> {
    if flow1 <= 0.0 || flow2 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "flows must be positive, got {flow1}, {flow2}"
        )));
    }
    let c1 = params.c * flow1;
    let c2 = params.c * flow2;
    let (cmin, cmax) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
    let ntu = params.ua_hx / cmin;
    let cr = cmin / cmax;
    if (1.0 - cr).abs() < 1e-9 {
        Ok(ntu / (1.0 + ntu))
    } else {
        let e = (-ntu * (1.0 - cr)).exp();
        Ok((1.0 - e) / (1.0 - cr * e))
    }
}

/// Heat-balance residual at secondary return temperature `t2r`, plus the
/// intermediate quantities at that point.
struct Balance {
    residual: f64,
    q_ex: f64,
    t2_supply_delivered: f64,
    q_pipe: f64,
}

fn balance_at(
    params: &PlantParams,
    eff: f64,
    cmin: f64,
    c2: f64,
    t1_supply: f64,
    t_out: f64,
    t2r: f64,
) -> Balance {
    let q_ex = eff * cmin * (t1_supply - t2r);
    let t2s = t2r + q_ex / c2;
    let q_pipe = params.ua_pipe * (t2s - t_out);
    let t2s_del = t2s - q_pipe / c2;
    let q_building = params.ua_building * ((t2s_del + t2r) / 2.0 - params.t_indoor);
    Balance {
        residual: q_ex - q_building - q_pipe,
        q_ex,
        t2_supply_delivered: t2s_del,
        q_pipe,
    }
}

const SOLVE_TOL: f64 = 1e-9;
const SOLVE_MAX_ITER: usize = 200;

/// Secant iteration on the heat-balance residual. The residual is affine in
/// `t2r` for this plant, so convergence is immediate, but the iteration is
/// kept general and bounded.
fn solve_t2_return(
    params: &PlantParams,
    eff: f64,
    cmin: f64,
    c2: f64,
    t1_supply: f64,
    t_out: f64,
    initial_guess: f64,
) -> Result<f64> {
    let mut x0 = initial_guess;
    let mut x1 = initial_guess + 1.0;
    let mut f0 = balance_at(params, eff, cmin, c2, t1_supply, t_out, x0).residual;
    for _ in 0..SOLVE_MAX_ITER {
        let f1 = balance_at(params, eff, cmin, c2, t1_supply, t_out, x1).residual;
        if f1 == 0.0 {
            return Ok(x1);
        }
        let denom = f1 - f0;
        if denom == 0.0 {
            // Flat residual: every point is a fixed point only when already
            // at balance.
            if f1.abs() < 1e-12 {
                return Ok(x1);
            }
            return Err(Error::Convergence("flat heat-balance residual".into()));
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if (x2 - x1).abs() < SOLVE_TOL {
            return Ok(x2);
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
    }
    Err(Error::Convergence(format!(
        "no fixed point within {SOLVE_MAX_ITER} iterations"
    )))
}

#[inline]
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Solves the station's steady state for the given supply temperature,
/// side flows and outdoor temperature.
///
/// With a noise generator supplied, Gaussian measurement noise is applied to
/// the reported temperatures and flows (not to the internal balance) and the
/// reported heat quantities are recomputed from those noisy readings, the
/// way the station's heat meters would. Temperature differences that turn
/// negative under noise are clamped to zero.
pub fn plant_steady_state(
    params: &PlantParams,
    std: &StandardParams,
    t1_supply: f64,
    flow1: f64,
    flow2: f64,
    t_out: f64,
    noise: Option<&mut ChaCha8Rng>,
) -> Result<PlantState> {
    if flow1 <= 0.0 || flow2 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "flows must be positive, got {flow1}, {flow2}"
        )));
    }
    if t1_supply <= t_out {
        return Err(Error::InvalidInput(format!(
            "supply temperature {t1_supply} not above outdoor {t_out}"
        )));
    }
    let c1 = params.c * flow1;
    let c2 = params.c * flow2;
    let cmin = c1.min(c2);
    let eff = hx_effectiveness(params, flow1, flow2)?;

    let guess = (t1_supply + params.t_indoor) / 2.0;
    let t2r = solve_t2_return(params, eff, cmin, c2, t1_supply, t_out, guess)?;
    let bal = balance_at(params, eff, cmin, c2, t1_supply, t_out, t2r);
    let t1_return = t1_supply - bal.q_ex / c1;
    let t2_supply = bal.t2_supply_delivered;

    let (mut t1s_r, mut t1r_r) = (t1_supply, t1_return);
    let (mut t2s_r, mut t2r_r) = (t2_supply, t2r);
    let (mut f1_r, mut f2_r) = (flow1, flow2);
    if let Some(rng) = noise {
        let st = params.noise_sigma_temp;
        let sf = params.noise_sigma_flow;
        t1s_r += st * normal(rng);
        t1r_r += st * normal(rng);
        t2s_r += st * normal(rng);
        t2r_r += st * normal(rng);
        f1_r = (f1_r + sf * normal(rng)).max(0.1);
        f2_r = (f2_r + sf * normal(rng)).max(0.1);
        // A heat meter never reports a negative temperature difference.
        t1r_r = t1r_r.min(t1s_r);
        t2r_r = t2r_r.min(t2s_r);
    }
    let q1 = heat_quantity(params.c, f1_r, t1s_r - t1r_r)?;
    let q2 = heat_quantity(params.c, f2_r, t2s_r - t2r_r)?;

    Ok(PlantState {
        t1_supply: t1s_r,
        t1_return: t1r_r,
        t2_supply: t2s_r,
        t2_return: t2r_r,
        flow1: f1_r,
        flow2: f2_r,
        q1,
        q2,
        q_target: target_heat(std, t_out),
        t_out,
    })
}

/// Operator heat curve: primary supply temperature as a function of outdoor
/// temperature, clamped to the source's working band.
pub fn supply_temp_curve(t_out: f64) -> f64 {
    (70.0 - 0.9 * (t_out + 20.0)).clamp(45.0, 95.0)
}

/// Heat curve plus seeded operator scatter, clamped to the working band.
pub fn supply_temp_schedule(t_out: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    (supply_temp_curve(t_out) + sigma * normal(rng)).clamp(45.0, 95.0)
}
