//! Linear warmup / linear decay learning-rate schedule.

use crate::scalar::Scalar;
use crate::{CoreError, Result};

/// Linear schedule: ramp from 0 to `base_lr` over the warmup steps, then
/// decay linearly to 0 at `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig<T> {
    pub base_lr: T,
    pub total_steps: u64,
    /// Fraction of `total_steps` spent warming up, in `[0, 1)`.
    pub warmup_fraction: f64,
}

impl<T: Scalar> ScheduleConfig<T> {
    pub fn new(base_lr: T, total_steps: u64, warmup_fraction: f64) -> Result<Self> {
        let cfg = Self {
            base_lr,
            total_steps,
            warmup_fraction,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(CoreError::Config("schedule needs total_steps >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(CoreError::Config(format!(
                "warmup_fraction must be in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.warmup_fraction > 0.0
            && self.warmup_fraction * self.total_steps as f64 < 1.0
        {
            return Err(CoreError::Config(format!(
                "warmup_fraction {} of {} steps covers less than one step",
                self.warmup_fraction, self.total_steps
            )));
        }
        Ok(())
    }

    /// Warmup length in steps: `floor(warmup_fraction * total_steps)`.
    pub fn warmup_steps(&self) -> u64 {
        (self.warmup_fraction * self.total_steps as f64).floor() as u64
    }
}

/// Scheduled learning rate at step `t` (valid for `0 <= t <= total_steps`).
///
/// `lr(t) = base_lr * (t+1)/w` during warmup, then a linear interpolation
/// from `base_lr` at step `w` down to 0 at `total_steps`.
pub fn lr_at<T: Scalar>(sched: &ScheduleConfig<T>, t: u64) -> Result<T> {
    if t > sched.total_steps {
        return Err(CoreError::Config(format!(
            "schedule step {t} out of range 0..={}",
            sched.total_steps
        )));
    }
    let w = sched.warmup_steps();
    let factor = if t < w {
        (t + 1) as f64 / w as f64
    } else {
        (sched.total_steps - t) as f64 / (sched.total_steps - w) as f64
    };
    Ok(sched.base_lr * T::from_f64_const(factor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> ScheduleConfig<f64> {
        ScheduleConfig::new(1e-3, 1000, 0.1).unwrap()
    }

    #[test]
    fn warmup_end_full_decay_and_midpoint() {
        assert!((lr_at(&sched(), 99).unwrap() - 1e-3).abs() < 1e-18);
        assert_eq!(lr_at(&sched(), 1000).unwrap(), 0.0);
        assert!((lr_at(&sched(), 550).unwrap() - 5e-4).abs() < 1e-18);
    }

    #[test]
    fn ramp_is_linear_and_continuous_at_the_joint() {
        let s = sched();
        assert!((lr_at(&s, 0).unwrap() - 1e-5).abs() < 1e-18);
        assert!((lr_at(&s, 49).unwrap() - 5e-4).abs() < 1e-18);
        assert!((lr_at(&s, 100).unwrap() - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn out_of_range_step_is_an_error() {
        assert!(lr_at(&sched(), 1001).is_err());
    }

    #[test]
    fn zero_warmup_is_pure_decay() {
        let s = ScheduleConfig::new(2.0, 10, 0.0).unwrap();
        assert_eq!(lr_at(&s, 0).unwrap(), 2.0);
        assert_eq!(lr_at(&s, 5).unwrap(), 1.0);
        assert_eq!(lr_at(&s, 10).unwrap(), 0.0);
    }

    #[test]
    fn validation_rejects_bad_fractions() {
        assert!(ScheduleConfig::new(1.0, 5, 0.1).is_err()); // covers < 1 step
        assert!(ScheduleConfig::new(1.0, 5, 1.0).is_err());
        assert!(ScheduleConfig::new(1.0, 0, 0.0).is_err());
    }
}
