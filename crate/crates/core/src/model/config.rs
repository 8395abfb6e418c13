use std::fmt::Write as _;

use super::task::Time;
use super::ModelError;

/// Power curve used for per-slot base-station power draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyModel {
    /// `P_S + (P_max - P_S) * (U / U_max)^3`
    #[default]
    Cubic,
    /// The additive form as typeset in the source model:
    /// `P_S + (P_max - P_S) + (U / U_max)^3`. Kept for audits only.
    Literal,
}

impl EnergyModel {
    pub fn name(self) -> &'static str {
        match self {
            EnergyModel::Cubic => "cubic",
            EnergyModel::Literal => "literal",
        }
    }
}

/// How a utilisation level translates into reservation length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DurationModel {
    /// Eq. 1 as printed: `p' = ceil(u * (d - s))`, so `u^min` runs for `p`
    /// slots and `u^max` holds the whole window.
    Literal,
    /// Constant work: `p' = ceil(p / u)`, so `u^max` runs for `p` slots and
    /// `u^min` stretches over the whole window.
    #[default]
    Elastic,
}

impl DurationModel {
    pub fn name(self) -> &'static str {
        match self {
            DurationModel::Literal => "literal",
            DurationModel::Elastic => "elastic",
        }
    }
}

/// Every tunable constant of the simulated infrastructure.
#[derive(Debug, Clone, PartialEq)]
pub struct VecsConfig {
    /// Batch length.
    pub t_beta: Time,
    /// Scheduling and migration delay before a task may start.
    pub delta_latency: Time,
    /// Cores per base station (`U^max`).
    pub bs_capacity: f64,
    /// Local-mode admission bound in cores (`U^T`).
    pub u_threshold: f64,
    /// Global-mode load cap as a fraction of `bs_capacity`.
    pub u_hat_max: f64,
    /// Global-mode offload radius; also the local-mode TOR range.
    pub d_hat_max: f64,
    /// Favourable utilisations, descending.
    pub u_fav: Vec<f64>,
    pub pen_hard: f64,
    pub pen_soft: f64,
    pub delta_pen: f64,
    pub p_static: f64,
    pub p_max: f64,
    pub grid_size: i64,
    /// Simulation horizon. Zero means "up to the latest deadline".
    pub horizon: Time,
    /// Largest share of one core a single task may use.
    pub u_max_per_task: f64,
    pub lambda_e: f64,
    pub lambda_dis: f64,
    pub energy_model: EnergyModel,
    /// Reservation length model used by the engine.
    pub duration_model: DurationModel,
    /// Pipeline latency of the centralized cloud.
    pub cloud_latency: Time,
    /// Simulated message propagation speed, grid units per time unit.
    pub msg_speed: f64,
    /// Step of the local-mode utilisation scan.
    pub local_step: f64,
}

impl Default for VecsConfig {
    fn default() -> Self {
        let bs_capacity = 64.0;
        let t_beta = 3;
        VecsConfig {
            t_beta,
            delta_latency: 1,
            bs_capacity,
            u_threshold: 0.5 * bs_capacity,
            u_hat_max: 0.9,
            d_hat_max: 20.0,
            u_fav: vec![0.8, 0.7, 0.6],
            pen_hard: 100.0,
            pen_soft: 1.0,
            delta_pen: 0.3,
            p_static: 0.2,
            p_max: 2000.0,
            grid_size: 100,
            horizon: 0,
            u_max_per_task: 1.0,
            lambda_e: 0.325,
            lambda_dis: 0.65,
            energy_model: EnergyModel::Cubic,
            duration_model: DurationModel::Elastic,
            cloud_latency: 2 * t_beta,
            msg_speed: 100.0,
            local_step: 0.05,
        }
    }
}

/// Field names accepted in key-value config text, in output order.
pub const CONFIG_KEYS: &[&str] = &[
    "t_beta",
    "delta_latency",
    "bs_capacity",
    "u_threshold",
    "u_hat_max",
    "d_hat_max",
    "u_fav",
    "pen_hard",
    "pen_soft",
    "delta_pen",
    "p_static",
    "p_max",
    "grid_size",
    "horizon",
    "u_max_per_task",
    "lambda_e",
    "lambda_dis",
    "energy_model",
    "duration_model",
    "cloud_latency",
    "msg_speed",
    "local_step",
];

const PEN_RATIO: f64 = 100.0;

impl VecsConfig {
    pub fn penalty(&self, hard: bool) -> f64 {
        if hard {
            self.pen_hard
        } else {
            self.pen_soft
        }
    }

    /// Global-mode load cap in cores.
    pub fn global_cap(&self) -> f64 {
        self.u_hat_max * self.bs_capacity
    }

    /// First batch boundary at or after `t`.
    pub fn next_boundary(&self, t: Time) -> Time {
        t.div_ceil(self.t_beta) * self.t_beta
    }

    // `!(x > 0.0)` style checks also reject NaN, which is the point.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.t_beta == 0 {
            return bad("t_beta must be positive".into());
        }
        if self.delta_latency > self.t_beta {
            return bad(format!(
                "delta_latency {} exceeds t_beta {}",
                self.delta_latency, self.t_beta
            ));
        }
        if !(self.bs_capacity > 0.0) {
            return bad("bs_capacity must be positive".into());
        }
        if !(self.u_threshold >= 0.0 && self.u_threshold <= self.bs_capacity) {
            return bad(format!(
                "u_threshold {} outside [0, bs_capacity]",
                self.u_threshold
            ));
        }
        if !(self.u_hat_max > 0.0 && self.u_hat_max <= 1.0) {
            return bad(format!("u_hat_max {} outside (0, 1]", self.u_hat_max));
        }
        if !(self.d_hat_max >= 0.0) {
            return bad("d_hat_max must be non-negative".into());
        }
        if self.u_fav.is_empty() {
            return bad("u_fav must not be empty".into());
        }
        if self
            .u_fav
            .iter()
            .any(|&u| !(u > 0.0 && u <= self.u_max_per_task))
        {
            return bad("u_fav values must lie in (0, u_max_per_task]".into());
        }
        if self.u_fav.windows(2).any(|w| w[0] < w[1]) {
            return bad("u_fav must be sorted in descending order".into());
        }
        if !(self.pen_soft > 0.0) || ((self.pen_hard / self.pen_soft) - PEN_RATIO).abs() > 1e-9 {
            return bad(format!(
                "pen_hard / pen_soft must be {PEN_RATIO}, got {} / {}",
                self.pen_hard, self.pen_soft
            ));
        }
        if !(0.0..=1.0).contains(&self.delta_pen) {
            return bad("delta_pen must lie in [0, 1]".into());
        }
        if !(self.p_static >= 0.0 && self.p_max >= self.p_static) {
            return bad("need 0 <= p_static <= p_max".into());
        }
        if self.grid_size <= 0 {
            return bad("grid_size must be positive".into());
        }
        if (self.u_max_per_task - 1.0).abs() > 1e-12 {
            return bad("u_max_per_task is fixed at 1".into());
        }
        if self.lambda_e < 0.0 || self.lambda_dis < 0.0 {
            return bad("price weights must be non-negative".into());
        }
        if !(self.msg_speed > 0.0) {
            return bad("msg_speed must be positive".into());
        }
        if !(self.local_step > 0.0 && self.local_step <= 1.0) {
            return bad("local_step must lie in (0, 1]".into());
        }
        Ok(())
    }

    /// Applies one `key = value` assignment. Hyphens in keys are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ModelError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let num = |v: &str| -> Result<f64, ModelError> {
            v.parse::<f64>()
                .map_err(|_| ModelError::InvalidConfig(format!("`{key}`: not a number: `{v}`")))
        };
        let int = |v: &str| -> Result<u64, ModelError> {
            v.parse::<u64>()
                .map_err(|_| ModelError::InvalidConfig(format!("`{key}`: not an integer: `{v}`")))
        };
        match key.as_str() {
            "t_beta" => self.t_beta = int(value)?,
            "delta_latency" => self.delta_latency = int(value)?,
            "bs_capacity" => self.bs_capacity = num(value)?,
            "u_threshold" => self.u_threshold = num(value)?,
            "u_hat_max" => self.u_hat_max = num(value)?,
            "d_hat_max" => self.d_hat_max = num(value)?,
            "u_fav" => {
                self.u_fav = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "pen_hard" => self.pen_hard = num(value)?,
            "pen_soft" => self.pen_soft = num(value)?,
            "delta_pen" => self.delta_pen = num(value)?,
            "p_static" => self.p_static = num(value)?,
            "p_max" => self.p_max = num(value)?,
            "grid_size" => self.grid_size = int(value)? as i64,
            "horizon" => self.horizon = int(value)?,
            "u_max_per_task" => self.u_max_per_task = num(value)?,
            "lambda_e" => self.lambda_e = num(value)?,
            "lambda_dis" => self.lambda_dis = num(value)?,
            "energy_model" => {
                self.energy_model = match value {
                    "cubic" => EnergyModel::Cubic,
                    "literal" => EnergyModel::Literal,
                    other => {
                        return Err(ModelError::InvalidConfig(format!(
                            "unknown energy_model `{other}`"
                        )))
                    }
                }
            }
            "duration_model" => {
                self.duration_model = match value {
                    "literal" => DurationModel::Literal,
                    "elastic" => DurationModel::Elastic,
                    other => {
                        return Err(ModelError::InvalidConfig(format!(
                            "unknown duration_model `{other}`"
                        )))
                    }
                }
            }
            "cloud_latency" => self.cloud_latency = int(value)?,
            "msg_speed" => self.msg_speed = num(value)?,
            "local_step" => self.local_step = num(value)?,
            _ => {
                return Err(ModelError::InvalidConfig(format!(
                    "unknown config key `{key}`"
                )))
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "t_beta" => self.t_beta.to_string(),
            "delta_latency" => self.delta_latency.to_string(),
            "bs_capacity" => self.bs_capacity.to_string(),
            "u_threshold" => self.u_threshold.to_string(),
            "u_hat_max" => self.u_hat_max.to_string(),
            "d_hat_max" => self.d_hat_max.to_string(),
            "u_fav" => self
                .u_fav
                .iter()
                .map(|u| u.to_string())
                .collect::<Vec<_>>()
                .join(","),
            "pen_hard" => self.pen_hard.to_string(),
            "pen_soft" => self.pen_soft.to_string(),
            "delta_pen" => self.delta_pen.to_string(),
            "p_static" => self.p_static.to_string(),
            "p_max" => self.p_max.to_string(),
            "grid_size" => self.grid_size.to_string(),
            "horizon" => self.horizon.to_string(),
            "u_max_per_task" => self.u_max_per_task.to_string(),
            "lambda_e" => self.lambda_e.to_string(),
            "lambda_dis" => self.lambda_dis.to_string(),
            "energy_model" => self.energy_model.name().to_string(),
            "duration_model" => self.duration_model.name().to_string(),
            "cloud_latency" => self.cloud_latency.to_string(),
            "msg_speed" => self.msg_speed.to_string(),
            "local_step" => self.local_step.to_string(),
            _ => unreachable!("unknown config key {key}"),
        }
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// unspecified keys keep their defaults.
    pub fn from_kv_text(text: &str) -> Result<Self, ModelError> {
        let mut cfg = VecsConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ModelError::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Writes every field as `key=value`, one per line, in [`CONFIG_KEYS`] order.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key));
        }
        out
    }
}
