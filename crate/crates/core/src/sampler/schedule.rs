use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_STEPS: usize = 40;
pub const DEFAULT_SIGMA_MIN: f64 = 0.002;
pub const DEFAULT_SIGMA_MAX: f64 = 80.0;
pub const DEFAULT_RHO: f64 = 7.0;

/// Decreasing noise levels `t_0 > … > t_{N−1} > t_N = 0` with `σ(t) = t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSchedule {
    times: Vec<f64>,
    rho: Option<f64>,
}

impl TimeSchedule {
    /// Karras-style warped schedule with `n` score evaluations.
    pub fn edm(n: usize, sigma_min: f64, sigma_max: f64, rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 steps, got {n}")));
        }
        if !(sigma_min > 0.0 && sigma_min < sigma_max) || !sigma_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}"
            )));
        }
        if !(rho >= 1.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho = {rho} must be ≥ 1")));
        }
        let lo = sigma_min.powf(1.0 / rho);
        let hi = sigma_max.powf(1.0 / rho);
        let mut times: Vec<f64> = (0..n)
            .map(|i| (hi + (i as f64 / (n - 1) as f64) * (lo - hi)).powf(rho))
            .collect();
        times[0] = sigma_max;
        times[n - 1] = sigma_min;
        times.push(0.0);
        let s = Self { times, rho: Some(rho) };
        s.validate()?;
        Ok(s)
    }

    pub fn default_edm() -> Self {
        Self::edm(DEFAULT_STEPS, DEFAULT_SIGMA_MIN, DEFAULT_SIGMA_MAX, DEFAULT_RHO).expect("valid defaults")
    }

    /// Arbitrary schedule; the last entry must be exactly zero.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        let s = Self { times, rho: None };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.times;
        if t.len() < 3 {
            return Err(Error::InvalidParameter("schedule needs at least two positive times".into()));
        }
        if *t.last().unwrap() != 0.0 {
            return Err(Error::InvalidParameter("schedule must end at t = 0".into()));
        }
        if t[..t.len() - 1].iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("schedule times must be positive and finite".into()));
        }
        if t.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::InvalidParameter("schedule must be strictly decreasing".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of update steps `N`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn sigma_max(&self) -> f64 {
        self.times[0]
    }

    pub fn sigma_min(&self) -> f64 {
        self.times[self.times.len() - 2]
    }

    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    /// `min_i (t_i − t_{i+1}) / t_i` over the steps that stay above zero.
    pub fn min_relative_step(&self) -> f64 {
        let n = self.steps();
        (0..n - 1)
            .map(|i| (self.times[i] - self.times[i + 1]) / self.times[i])
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_schedule_hits_endpoints() {
        let s = TimeSchedule::edm(2, 0.002, 80.0, 7.0).unwrap();
        assert_eq!(s.times(), &[80.0, 0.002, 0.0]);
    }

    #[test]
    fn linear_schedule() {
        let s = TimeSchedule::edm(3, 1.0, 3.0, 1.0).unwrap();
        assert_eq!(s.times(), &[3.0, 2.0, 1.0, 0.0]);
        assert_eq!(s.steps(), 3);
        assert!((s.min_relative_step() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eighteen_step_fixture() {
        // independently evaluated from the closed-form warp
        let expect = [
            80.0,
            57.58598472124816,
            40.78557379650796,
            28.374584604156837,
            19.35245298032522,
            12.910082380757316,
            8.400935309099822,
            5.3151945217963785,
            3.256821519765538,
            1.9233398370400498,
            1.0881706365452795,
            0.5853481231945423,
            0.29644228447915727,
            0.13951646873101647,
            0.05994731123547157,
            0.02293451837233337,
            0.007528019962784071,
            0.002,
        ];
        let s = TimeSchedule::edm(18, 0.002, 80.0, 7.0).unwrap();
        for (a, b) in s.times().iter().zip(expect) {
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
        assert_eq!(s.times()[18], 0.0);
    }

    #[test]
    fn rejects_invalid_bounds() {
        assert!(TimeSchedule::edm(1, 0.002, 80.0, 7.0).is_err());
        assert!(TimeSchedule::edm(10, 80.0, 0.002, 7.0).is_err());
        assert!(TimeSchedule::edm(10, 0.0, 1.0, 7.0).is_err());
        assert!(TimeSchedule::edm(10, 0.1, 1.0, 0.5).is_err());
        assert!(TimeSchedule::from_times(vec![1.0, 1.0, 0.0]).is_err());
        assert!(TimeSchedule::from_times(vec![2.0, 1.0, 0.1]).is_err());
    }
}
