//! Reinforcement-learning environment over a dataset of operating records.
//!
//! Each episode walks a contiguous block of dataset rows. The observation is
//! the row's exogenous state (outdoor temperature, primary supply
//! temperature, target heat quantity); the action maps to the two flow
//! controls; the backend — either the chained surrogate models or the plant
//! itself — produces the resulting heat quantities and with them the reward.
//! Transitions are exogenous: the next observation comes from the dataset
//! regardless of the action taken.

use crate::data::Dataset;
use crate::plant::{
    plant_steady_state, pump_flow, PlantParams, StandardParams, FLOW1_MAX, FLOW1_MIN, PUMP_F_MAX,
    PUMP_F_MIN,
};
use crate::surrogate::{predict_q, SurrogateSet};
use crate::{Error, Result};

/// Exogenous state exposed to the agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t_out: f64,
    pub t1_supply: f64,
    pub q_target: f64,
}

/// Two-dimensional control action, both coordinates in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub a0: f64,
    pub a1: f64,
}

/// Which heat quantities the reward penalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardKind {
    Q1,
    Q2,
    Q1Q2,
}

impl RewardKind {
    pub fn name(self) -> &'static str {
        match self {
            RewardKind::Q1 => "q1",
            RewardKind::Q2 => "q2",
            RewardKind::Q1Q2 => "q1q2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "q1" => Ok(RewardKind::Q1),
            "q2" => Ok(RewardKind::Q2),
            "q1q2" => Ok(RewardKind::Q1Q2),
            other => Err(Error::Parse(format!("unknown reward kind `{other}`"))),
        }
    }
}

/// What produces (q1, q2) for a control setting.
#[derive(Debug, Clone)]
pub enum Backend {
    Surrogate(Box<SurrogateSet>),
    PlantOracle {
        plant: PlantParams,
        std: StandardParams,
    },
}

#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub reward_kind: RewardKind,
    pub episode_len: usize,
    pub normalize_obs: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            reward_kind: RewardKind::Q1Q2,
            episode_len: 500,
            normalize_obs: true,
        }
    }
}

/// Observation normalization statistics, frozen from a training dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl ObsStats {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let n = ds.len().max(1) as f64;
        let mut mean = [0.0; 3];
        for s in &ds.samples {
            mean[0] += s.t_out;
            mean[1] += s.t1_supply;
            mean[2] += s.q_target;
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = [0.0; 3];
        for s in &ds.samples {
            var[0] += (s.t_out - mean[0]).powi(2);
            var[1] += (s.t1_supply - mean[1]).powi(2);
            var[2] += (s.q_target - mean[2]).powi(2);
        }
        let mut std = [0.0; 3];
        for (o, v) in std.iter_mut().zip(var.iter()) {
            let s = (v / n).sqrt();
            *o = if s > 1e-12 { s } else { 1.0 };
        }
        ObsStats { mean, std }
    }

    pub fn normalize(&self, obs: &Observation) -> [f64; 3] {
        [
            (obs.t_out - self.mean[0]) / self.std[0],
            (obs.t1_supply - self.mean[1]) / self.std[1],
            (obs.q_target - self.mean[2]) / self.std[2],
        ]
    }
}

/// Per-step diagnostic record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub q1: f64,
    pub q2: f64,
    pub flow1: f64,
    pub flow2: f64,
    pub pump_f: f64,
    /// The supplied action fell outside [-1, 1] and was clipped.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Maps a (clipped) action onto the control ranges:
/// `flow1 = 55 + 45*a0`, `pump_f = 35 + 15*a1`.
pub fn action_to_controls(a: &Action) -> (f64, f64, bool) {
    let clipped = !(-1.0..=1.0).contains(&a.a0) || !(-1.0..=1.0).contains(&a.a1);
    let a0 = a.a0.clamp(-1.0, 1.0);
    let a1 = a.a1.clamp(-1.0, 1.0);
    (55.0 + 45.0 * a0, 35.0 + 15.0 * a1, clipped)
}

/// Negative absolute deviation of the relevant heat quantities from target.
pub fn reward(kind: RewardKind, q1: f64, q2: f64, q_target: f64) -> f64 {
    match kind {
        RewardKind::Q1 => -(q1 - q_target).abs(),
        RewardKind::Q2 => -(q2 - q_target).abs(),
        RewardKind::Q1Q2 => -((q1 - q_target).abs() + (q2 - q_target).abs()) / 2.0,
    }
}

/// Episode-based environment over one dataset.
#[derive(Debug, Clone)]
pub struct Env {
    dataset: Dataset,
    backend: Backend,
    config: EnvConfig,
    obs_stats: Option<ObsStats>,
    cursor: usize,
    steps_taken: usize,
    active: bool,
}

impl Env {
    /// Builds an environment; normalization statistics, when enabled, are
    /// computed from the wrapped dataset.
    pub fn new(dataset: Dataset, backend: Backend, config: EnvConfig) -> Result<Self> {
        let stats = config
            .normalize_obs
            .then(|| ObsStats::from_dataset(&dataset));
        Self::with_stats(dataset, backend, config, stats)
    }

    /// Builds an environment with externally supplied normalization
    /// statistics (evaluation splits reuse the training split's stats).
    pub fn with_stats(
        dataset: Dataset,
        backend: Backend,
        config: EnvConfig,
        obs_stats: Option<ObsStats>,
    ) -> Result<Self> {
        if config.episode_len == 0 {
            return Err(Error::InvalidInput("episode length must be positive".into()));
        }
        if dataset.len() < config.episode_len {
            return Err(Error::InvalidInput(format!(
                "dataset has {} rows, episodes need {}",
                dataset.len(),
                config.episode_len
            )));
        }
        Ok(Env {
            dataset,
            backend,
            config,
            obs_stats,
            cursor: 0,
            steps_taken: 0,
            active: false,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn episode_len(&self) -> usize {
        self.config.episode_len
    }

    pub fn reward_kind(&self) -> RewardKind {
        self.config.reward_kind
    }

    pub fn obs_stats(&self) -> Option<ObsStats> {
        self.obs_stats
    }

    /// Largest admissible `episode_start`.
    pub fn max_episode_start(&self) -> usize {
        self.dataset.len() - self.config.episode_len
    }

    pub fn observation_at(&self, index: usize) -> Observation {
        let s = &self.dataset.samples[index];
        Observation {
            t_out: s.t_out,
            t1_supply: s.t1_supply,
            q_target: s.q_target,
        }
    }

    /// Network-facing view of an observation, z-scored when configured.
    pub fn obs_vec(&self, obs: &Observation) -> [f64; 3] {
        match &self.obs_stats {
            Some(stats) => stats.normalize(obs),
            None => [obs.t_out, obs.t1_supply, obs.q_target],
        }
    }

    /// Starts an episode at the given dataset row.
    pub fn reset(&mut self, episode_start: usize) -> Result<Observation> {
        if episode_start + self.config.episode_len > self.dataset.len() {
            return Err(Error::Index(format!(
                "episode start {episode_start} overflows dataset of {} rows",
                self.dataset.len()
            )));
        }
        self.cursor = episode_start;
        self.steps_taken = 0;
        self.active = true;
        Ok(self.observation_at(self.cursor))
    }

    /// Computes heat quantities for the given controls at a dataset row.
    pub fn heat_for_controls(&self, index: usize, flow1: f64, pump_f: f64) -> Result<(f64, f64, f64)> {
        let row = &self.dataset.samples[index];
        match &self.backend {
            Backend::Surrogate(set) => {
                let p = predict_q(set, row.t1_supply, row.t_out, flow1, pump_f)?;
                Ok((p.q1, p.q2, p.flow2))
            }
            Backend::PlantOracle { plant, std } => {
                let flow2 = pump_flow(plant.pump_poly, pump_f)?;
                let st =
                    plant_steady_state(plant, std, row.t1_supply, flow1, flow2, row.t_out, None)?;
                Ok((st.q1, st.q2, flow2))
            }
        }
    }

    /// Applies an action at the current row and advances the cursor.
    pub fn step(&mut self, action: &Action) -> Result<StepResult> {
        if !self.active {
            return Err(Error::Protocol("step called on a finished episode".into()));
        }
        let (flow1, pump_f, clipped) = action_to_controls(action);
        let (q1, q2, flow2) = self.heat_for_controls(self.cursor, flow1, pump_f)?;
        let q_target = self.dataset.samples[self.cursor].q_target;
        let r = reward(self.config.reward_kind, q1, q2, q_target);

        self.cursor += 1;
        self.steps_taken += 1;
        let done = self.steps_taken >= self.config.episode_len;
        if done {
            self.active = false;
        }
        let next_index = self.cursor.min(self.dataset.len() - 1);
        Ok(StepResult {
            next_obs: self.observation_at(next_index),
            reward: r,
            done,
            info: StepInfo {
                q1,
                q2,
                flow1,
                flow2,
                pump_f,
                clipped,
            },
        })
    }
}
