//! Dynamic sharpness curriculum.
//!
//! The sharpness `k(t)` used by the reward operator ramps from `k_min` to
//! `k_max` over a run of `T` steps through a centered, smoothed sigmoid:
//!
//! ```text
//! k(t) = k_min + (k_max - k_min) · σ(s·(t/T - center))
//! ```
//!
//! Low initial sharpness keeps gradients alive for far-off predictions;
//! high terminal sharpness restores reward contrast for near-misses. A
//! linear ramp is available as an ablation shape, and `k_min == k_max`
//! expresses a fixed-sharpness run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interpolation shape between `k_min` and `k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleShape {
    /// Centered smoothed sigmoid (the default curriculum).
    #[default]
    Sigmoid,
    /// Straight line from `k_min` at `t = 0` to `k_max` at `t = T`.
    Linear,
}

/// Parameters of the sharpness curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessSchedule {
    k_min: f64,
    k_max: f64,
    steepness: f64,
    center: f64,
    total_steps: usize,
    shape: ScheduleShape,
}

/// Numerically stable logistic `1/(1+exp(-x))`.
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let t = x.exp();
        t / (1.0 + t)
    }
}

impl SharpnessSchedule {
    /// Sigmoid-shaped schedule. Validates `0 < k_min <= k_max`,
    /// `steepness > 0`, `center` in `(0, 1)` and `total_steps >= 1`.
    pub fn new(
        k_min: f64,
        k_max: f64,
        steepness: f64,
        center: f64,
        total_steps: usize,
    ) -> Result<Self> {
        Self::with_shape(k_min, k_max, steepness, center, total_steps, ScheduleShape::Sigmoid)
    }

    pub fn with_shape(
        k_min: f64,
        k_max: f64,
        steepness: f64,
        center: f64,
        total_steps: usize,
        shape: ScheduleShape,
    ) -> Result<Self> {
        if !k_min.is_finite() || k_min <= 0.0 {
            return Err(Error::field("k_min", format!("must be positive, got {k_min}")));
        }
        if !k_max.is_finite() || k_max <= 0.0 {
            return Err(Error::field("k_max", format!("must be positive, got {k_max}")));
        }
        if k_min > k_max {
            return Err(Error::field(
                "k_min",
                format!("k_min ({k_min}) must not exceed k_max ({k_max})"),
            ));
        }
        if !steepness.is_finite() || steepness <= 0.0 {
            return Err(Error::field(
                "schedule_steepness",
                format!("must be positive, got {steepness}"),
            ));
        }
        if !center.is_finite() || center <= 0.0 || center >= 1.0 {
            return Err(Error::field(
                "schedule_center",
                format!("must lie strictly inside (0, 1), got {center}"),
            ));
        }
        if total_steps == 0 {
            return Err(Error::field("total_steps", "must be at least 1"));
        }
        Ok(Self {
            k_min,
            k_max,
            steepness,
            center,
            total_steps,
            shape,
        })
    }

    /// Fixed sharpness for all steps (`k_min == k_max == k`).
    pub fn fixed(k: f64, total_steps: usize) -> Result<Self> {
        Self::new(k, k, 10.0, 0.5, total_steps)
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn steepness(&self) -> f64 {
        self.steepness
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn shape(&self) -> ScheduleShape {
        self.shape
    }
}

/// Sharpness at integer step `t` of the schedule. `t` must lie in `[0, T]`.
pub fn schedule_k(sched: &SharpnessSchedule, t: usize) -> Result<f64> {
    if t > sched.total_steps {
        return Err(Error::domain(format!(
            "step {t} outside schedule range [0, {}]",
            sched.total_steps
        )));
    }
    let progress = t as f64 / sched.total_steps as f64;
    let span = sched.k_max - sched.k_min;
    Ok(match sched.shape {
        ScheduleShape::Sigmoid => {
            sched.k_min + span * logistic(sched.steepness * (progress - sched.center))
        }
        ScheduleShape::Linear => sched.k_min + span * progress,
    })
}
