//! Core data model: càdlàg sample paths of jump local martingales and the
//! declarative specifications of the supported models.
//!
//! A path is stored as a hybrid of a uniform grid for the continuous part
//! (Brownian models) and an exact event list for jumps (Poisson models).
//! Pure-jump models carry an empty grid; exact jump times are needed so that
//! the jump products of the stochastic exponential are exact. All types are
//! immutable after construction and safe to share across threads.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::RngStream;

/// Distribution of jump magnitudes for the compound Poisson martingale.
/// Only laws with nonnegative support are representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    /// Every jump has the same fixed size. Reduces the compound model to a
    /// scaled compensated Poisson process.
    Deterministic { size: f64 },
    /// Exponential law with the given mean.
    Exponential { mean: f64 },
}

impl JumpLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::Deterministic { size } => size,
            JumpLaw::Exponential { mean } => mean,
        }
    }

    /// E[J^2]; drives the predictable quadratic variation of the compound model.
    pub fn second_moment(&self) -> f64 {
        match *self {
            JumpLaw::Deterministic { size } => size * size,
            JumpLaw::Exponential { mean } => 2.0 * mean * mean,
        }
    }

    fn validate(&self) -> Result<()> {
        let m = self.mean();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Config(format!(
                "jump law must have positive finite mean, got {m}"
            )));
        }
        Ok(())
    }
}

/// Time span over which a model is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Simulate on [0, T].
    Fixed(f64),
    /// Run until the model's built-in stopping time. Only the stopped scaled
    /// compensated Poisson model has one, so only that model may use this.
    UntilStop,
}

/// Declarative description of a supported martingale model together with its
/// analytic compensator data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// Scaled Brownian motion `M_t = sigma * B_t`.
    Brownian { volatility: f64, horizon: f64 },
    /// Compensated Poisson process `M_t = a * (N_t - intensity * t)` with
    /// unit jumps of size `a` at Poisson(intensity) times.
    CompensatedPoisson {
        intensity: f64,
        jump_size: f64,
        horizon: f64,
    },
    /// Compound Poisson martingale: i.i.d. nonnegative jumps at
    /// Poisson(intensity) times, compensated by the drift
    /// `-intensity * E[J] * t`.
    CompoundPoissonMartingale {
        intensity: f64,
        jump_law: JumpLaw,
        horizon: f64,
    },
    /// `M_t = a * (N_t^{T_b} - t ∧ T_b)` for a standard Poisson process `N`
    /// stopped at the first passage `T_b = inf{t : N_t - (1+b)t = -1}`,
    /// which is almost surely finite for b > 0.
    StoppedScaledCpp { a: f64, b: f64 },
    /// The constant zero martingale. A trivial reference model used for
    /// calibration and sanity checks.
    Zero { horizon: f64 },
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Config(format!(
            "{name} must be strictly positive and finite, got {v}"
        )));
    }
    Ok(())
}

impl ModelSpec {
    pub fn brownian(volatility: f64, horizon: f64) -> Result<Self> {
        check_positive("volatility", volatility)?;
        check_positive("horizon", horizon)?;
        Ok(ModelSpec::Brownian { volatility, horizon })
    }

    pub fn compensated_poisson(intensity: f64, jump_size: f64, horizon: f64) -> Result<Self> {
        check_positive("intensity", intensity)?;
        check_positive("jump_size", jump_size)?;
        check_positive("horizon", horizon)?;
        Ok(ModelSpec::CompensatedPoisson {
            intensity,
            jump_size,
            horizon,
        })
    }

    pub fn compound_poisson_martingale(
        intensity: f64,
        jump_law: JumpLaw,
        horizon: f64,
    ) -> Result<Self> {
        check_positive("intensity", intensity)?;
        jump_law.validate()?;
        check_positive("horizon", horizon)?;
        Ok(ModelSpec::CompoundPoissonMartingale {
            intensity,
            jump_law,
            horizon,
        })
    }

    pub fn stopped_scaled_cpp(a: f64, b: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        Ok(ModelSpec::StoppedScaledCpp { a, b })
    }

    pub fn zero(horizon: f64) -> Result<Self> {
        check_positive("horizon", horizon)?;
        Ok(ModelSpec::Zero { horizon })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::Brownian { .. } => "brownian",
            ModelSpec::CompensatedPoisson { .. } => "compensated_poisson",
            ModelSpec::CompoundPoissonMartingale { .. } => "compound_poisson_martingale",
            ModelSpec::StoppedScaledCpp { .. } => "stopped_scaled_cpp",
            ModelSpec::Zero { .. } => "zero",
        }
    }

    pub fn horizon(&self) -> Horizon {
        match *self {
            ModelSpec::Brownian { horizon, .. }
            | ModelSpec::CompensatedPoisson { horizon, .. }
            | ModelSpec::CompoundPoissonMartingale { horizon, .. }
            | ModelSpec::Zero { horizon } => Horizon::Fixed(horizon),
            ModelSpec::StoppedScaledCpp { .. } => Horizon::UntilStop,
        }
    }

    /// Compensator slope rho: the purely discontinuous part of M carries the
    /// drift `-rho * (t ∧ stop)`.
    pub fn drift_rate(&self) -> f64 {
        match *self {
            ModelSpec::Brownian { .. } | ModelSpec::Zero { .. } => 0.0,
            ModelSpec::CompensatedPoisson {
                intensity,
                jump_size,
                ..
            } => intensity * jump_size,
            ModelSpec::CompoundPoissonMartingale {
                intensity,
                jump_law,
                ..
            } => intensity * jump_law.mean(),
            ModelSpec::StoppedScaledCpp { a, .. } => a,
        }
    }

    /// `[M^c]_t = qv_cont_rate * t` (zero for pure-jump models).
    pub fn qv_cont_rate(&self) -> f64 {
        match *self {
            ModelSpec::Brownian { volatility, .. } => volatility * volatility,
            _ => 0.0,
        }
    }

    /// `<M>_t = pqv_rate * (t ∧ stop)`, the analytic predictable quadratic
    /// variation of each supported model.
    pub fn pqv_rate(&self) -> f64 {
        match *self {
            ModelSpec::Brownian { volatility, .. } => volatility * volatility,
            ModelSpec::CompensatedPoisson {
                intensity,
                jump_size,
                ..
            } => jump_size * jump_size * intensity,
            ModelSpec::CompoundPoissonMartingale {
                intensity,
                jump_law,
                ..
            } => intensity * jump_law.second_moment(),
            ModelSpec::StoppedScaledCpp { a, .. } => a * a,
            ModelSpec::Zero { .. } => 0.0,
        }
    }

    pub fn is_pure_jump(&self) -> bool {
        self.qv_cont_rate() == 0.0
    }
}

/// One jump of the purely discontinuous part: `size = ΔM_time >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub time: f64,
    pub size: f64,
}

/// One realized càdlàg trajectory of a model.
///
/// The value at time t is the interpolated continuous part, plus the model's
/// compensator drift, plus the sum of jump sizes at times <= t.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub model: ModelSpec,
    /// Strictly increasing, starting at 0. Empty for pure-jump models.
    pub grid_times: Vec<f64>,
    /// Values of `M^c` on the grid, same length as `grid_times`.
    pub continuous_values: Vec<f64>,
    /// Strictly increasing in time.
    pub jumps: Vec<JumpEvent>,
    /// Terminal stopping time (e.g. the first passage T_b), when the model
    /// has one.
    pub stop_time: Option<f64>,
    /// Replication identifier: the stream that generated this path.
    pub seed_tag: RngStream,
}

impl SamplePath {
    /// Validating constructor; every generator goes through here.
    pub fn new(
        model: ModelSpec,
        grid_times: Vec<f64>,
        continuous_values: Vec<f64>,
        jumps: Vec<JumpEvent>,
        stop_time: Option<f64>,
        seed_tag: RngStream,
    ) -> Result<Self> {
        if grid_times.len() != continuous_values.len() {
            return Err(Error::Config(
                "grid_times and continuous_values must have equal length".into(),
            ));
        }
        if let Some(&t0) = grid_times.first() {
            if t0 != 0.0 {
                return Err(Error::Config("grid must start at t = 0".into()));
            }
            if continuous_values[0] != 0.0 {
                return Err(Error::Config("initial value must be zero".into()));
            }
            if grid_times.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config("grid times must be strictly increasing".into()));
            }
        }
        let mut prev = 0.0;
        for (i, j) in jumps.iter().enumerate() {
            if !(j.time > prev) {
                return Err(Error::Config(format!(
                    "jump times must be strictly increasing and positive (index {i})"
                )));
            }
            if !(j.size >= 0.0 && j.size.is_finite()) {
                return Err(Error::Config(format!(
                    "jump sizes must be nonnegative, got {} at t = {}",
                    j.size, j.time
                )));
            }
            prev = j.time;
        }
        if let Some(stop) = stop_time {
            check_positive("stop_time", stop)?;
            if jumps.last().is_some_and(|j| j.time > stop) {
                return Err(Error::Config("jump after the stopping time".into()));
            }
        }
        Ok(SamplePath {
            model,
            grid_times,
            continuous_values,
            jumps,
            stop_time,
            seed_tag,
        })
    }

    /// Last time the path is defined at: the stopping time if present,
    /// otherwise the fixed horizon.
    pub fn terminal_time(&self) -> f64 {
        if let Some(stop) = self.stop_time {
            return stop;
        }
        match self.model.horizon() {
            Horizon::Fixed(h) => h,
            Horizon::UntilStop => self.stop_time.unwrap_or(0.0),
        }
    }

    /// Maps a query time into the path domain. `t = +inf` is accepted as "at
    /// the stopping time" for stopped paths.
    pub(crate) fn resolve_time(&self, t: f64) -> Result<f64> {
        let terminal = self.terminal_time();
        if t.is_infinite() && t > 0.0 {
            if self.stop_time.is_some() {
                return Ok(terminal);
            }
            return Err(Error::Domain(
                "t = +inf is only defined for stopped paths".into(),
            ));
        }
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
        }
        if t > terminal {
            return Err(Error::Domain(format!(
                "t = {t} beyond path domain [0, {terminal}]"
            )));
        }
        Ok(t)
    }

    fn continuous_at(&self, t: f64) -> f64 {
        if self.grid_times.is_empty() {
            return 0.0;
        }
        let n = self.grid_times.len();
        let idx = self.grid_times.partition_point(|&g| g <= t);
        if idx == 0 {
            return self.continuous_values[0];
        }
        if idx == n {
            return self.continuous_values[n - 1];
        }
        // Linear interpolation between grid points (plotting-grade; the
        // calculus routines only query grid points and jump times).
        let (t0, t1) = (self.grid_times[idx - 1], self.grid_times[idx]);
        let (v0, v1) = (self.continuous_values[idx - 1], self.continuous_values[idx]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Number of jumps at times <= t.
    pub fn jump_count_upto(&self, t: f64) -> usize {
        self.jumps.partition_point(|j| j.time <= t)
    }

    /// Sum of squared jump sizes at times <= t.
    pub fn jump_sq_sum_upto(&self, t: f64) -> f64 {
        self.jumps[..self.jump_count_upto(t)]
            .iter()
            .map(|j| j.size * j.size)
            .sum()
    }

    fn jump_sum_upto(&self, t: f64) -> f64 {
        self.jumps[..self.jump_count_upto(t)]
            .iter()
            .map(|j| j.size)
            .sum()
    }

    /// `M_t`; right-continuous in t, `evaluate(0) = 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let t = self.resolve_time(t)?;
        let drift = -self.model.drift_rate() * t;
        Ok(self.continuous_at(t) + drift + self.jump_sum_upto(t))
    }

    /// `M` at the stopping time / horizon.
    pub fn terminal_value(&self) -> f64 {
        self.evaluate(self.terminal_time())
            .expect("terminal time is in domain")
    }

    /// Debug/plot dump: `t,value,is_jump` rows, events before grid points at
    /// equal times. Pure-jump paths get synthetic rows at t = 0 and at the
    /// terminal time so the drift segments are visible.
    pub fn dump_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,value,is_jump")?;
        let mut rows: Vec<(f64, bool)> = Vec::new();
        if self.grid_times.is_empty() {
            rows.push((0.0, false));
            for j in &self.jumps {
                rows.push((j.time, true));
            }
            let terminal = self.terminal_time();
            if self.jumps.last().is_none_or(|j| j.time < terminal) {
                rows.push((terminal, false));
            }
        } else {
            let mut gi = 0;
            let mut ji = 0;
            while gi < self.grid_times.len() || ji < self.jumps.len() {
                let take_jump = match (self.jumps.get(ji), self.grid_times.get(gi)) {
                    (Some(j), Some(&g)) => j.time <= g,
                    (Some(_), None) => true,
                    _ => false,
                };
                if take_jump {
                    rows.push((self.jumps[ji].time, true));
                    ji += 1;
                } else {
                    rows.push((self.grid_times[gi], false));
                    gi += 1;
                }
            }
        }
        for (t, is_jump) in rows {
            let v = self.evaluate(t).expect("dump time in domain");
            writeln!(w, "{t},{v},{}", u8::from(is_jump))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag() -> RngStream {
        RngStream::new(1, 0)
    }

    #[test]
    fn constructors_reject_nonpositive_parameters() {
        assert!(matches!(ModelSpec::brownian(0.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(ModelSpec::brownian(1.0, -1.0), Err(Error::Config(_))));
        assert!(matches!(
            ModelSpec::compensated_poisson(-1.0, 1.0, 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ModelSpec::stopped_scaled_cpp(0.5, 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ModelSpec::compound_poisson_martingale(
                1.0,
                JumpLaw::Exponential { mean: -1.0 },
                1.0
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn path_rejects_negative_jump_sizes() {
        let model = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
        let err = SamplePath::new(
            model,
            vec![],
            vec![],
            vec![JumpEvent {
                time: 0.5,
                size: -0.1,
            }],
            None,
            tag(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn path_rejects_unsorted_jumps_and_jump_at_zero() {
        let model = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
        let mk = |times: &[f64]| {
            SamplePath::new(
                model,
                vec![],
                vec![],
                times
                    .iter()
                    .map(|&t| JumpEvent { time: t, size: 1.0 })
                    .collect(),
                None,
                tag(),
            )
        };
        assert!(mk(&[0.4, 0.3]).is_err());
        assert!(mk(&[0.0, 0.3]).is_err());
        assert!(mk(&[0.3, 0.4]).is_ok());
    }

    #[test]
    fn evaluate_at_zero_is_zero() {
        let model = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
        let path = SamplePath::new(
            model,
            vec![],
            vec![],
            vec![JumpEvent {
                time: 0.4,
                size: 1.0,
            }],
            None,
            tag(),
        )
        .unwrap();
        assert_eq!(path.evaluate(0.0).unwrap(), 0.0);
    }

    #[test]
    fn compensated_poisson_direct_sum() {
        // jumps at 0.4 and 0.9, intensity 1, a = 1: M_1 = N_1 - 1 = 1
        let model = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
        let path = SamplePath::new(
            model,
            vec![],
            vec![],
            vec![
                JumpEvent {
                    time: 0.4,
                    size: 1.0,
                },
                JumpEvent {
                    time: 0.9,
                    size: 1.0,
                },
            ],
            None,
            tag(),
        )
        .unwrap();
        assert!((path.evaluate(1.0).unwrap() - 1.0).abs() < 1e-15);
        // right-continuity: jump at 0.4 is included at t = 0.4
        assert!((path.evaluate(0.4).unwrap() - (1.0 - 0.4)).abs() < 1e-15);
        // just before the jump only the drift is there
        assert!((path.evaluate(0.3999).unwrap() + 0.3999).abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_times_beyond_domain() {
        let model = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
        let path = SamplePath::new(model, vec![], vec![], vec![], None, tag()).unwrap();
        assert!(matches!(path.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(path.evaluate(-0.1), Err(Error::Domain(_))));
        assert!(matches!(path.evaluate(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn infinity_resolves_to_stop_time_for_stopped_paths() {
        let model = ModelSpec::stopped_scaled_cpp(0.5, 0.4).unwrap();
        let stop = 1.0 / 1.4;
        let path = SamplePath::new(model, vec![], vec![], vec![], Some(stop), tag()).unwrap();
        // zero jumps: M at T_b = a(0 - T_b) = -0.5 * T_b = 0.5 * (0.4 * T_b - 1)
        let expect = 0.5 * (0.4 * stop - 1.0);
        assert!((path.evaluate(f64::INFINITY).unwrap() - expect).abs() < 1e-15);
        assert!((path.terminal_value() - expect).abs() < 1e-15);
    }

    #[test]
    fn dump_csv_merged_order() {
        let model = ModelSpec::compensated_poisson(1.0, 1.0, 1.0).unwrap();
        let path = SamplePath::new(
            model,
            vec![],
            vec![],
            vec![JumpEvent {
                time: 0.25,
                size: 1.0,
            }],
            None,
            tag(),
        )
        .unwrap();
        let mut buf = Vec::new();
        path.dump_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,value,is_jump");
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[2], "0.25,0.75,1");
        assert_eq!(lines[3], "1,0,0");
    }
}
