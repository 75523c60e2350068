//! Deterministic, seeded path generation for the supported models.
//!
//! Every replication owns a counter-based RNG stream keyed by
//! `(root_seed, replicate_index)`, so replications can run fully in parallel
//! and still reproduce bit-for-bit regardless of thread count. Poisson-type
//! models are simulated exactly event by event; only the Brownian model uses
//! a grid.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{JumpEvent, JumpLaw, ModelSpec, SamplePath};

/// Safety cap on events per replication, guarding against parameter misuse
/// (e.g. a stopped model with b close to zero).
pub const DEFAULT_EVENT_CAP: u64 = 1_000_000_000;

/// Default Brownian grid step as a fraction of the horizon. Keeps the
/// discretization error of exponential-moment tests below their Monte Carlo
/// error.
pub const DEFAULT_BROWNIAN_STEP_FRACTION: f64 = 1.0 / 1024.0;

/// Identifier of one replication's random stream.
///
/// Streams for distinct replicate indices are independent ChaCha8 streams of
/// the same seed; identical `(root_seed, replicate_index)` reproduces the
/// identical stream no matter how work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub root_seed: u64,
    pub replicate_index: u64,
}

impl RngStream {
    pub fn new(root_seed: u64, replicate_index: u64) -> Self {
        RngStream {
            root_seed,
            replicate_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.replicate_index);
        rng
    }
}

/// Uniform draw on the open interval (0, 1); never returns 0 or 1.
fn uniform_open01(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Exponential(rate) by inverse CDF on the open unit interval; avoids log(0)
/// and zero-length inter-arrival times.
fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -uniform_open01(rng).ln() / rate
}

pub fn default_brownian_step(horizon: f64) -> f64 {
    horizon * DEFAULT_BROWNIAN_STEP_FRACTION
}

/// Brownian path on a uniform grid: cumulative sums of independent Gaussian
/// increments with variance `sigma^2 * step`.
pub fn gen_brownian(spec: &ModelSpec, step: f64, stream: RngStream) -> Result<SamplePath> {
    let (sigma, horizon) = match *spec {
        ModelSpec::Brownian { volatility, horizon } => (volatility, horizon),
        _ => {
            return Err(Error::Config(format!(
                "gen_brownian requires a brownian spec, got {}",
                spec.kind_name()
            )))
        }
    };
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("step must be positive, got {step}")));
    }
    let n = (horizon / step).round();
    if n < 1.0 || (n * step - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::Config(format!(
            "step {step} does not divide horizon {horizon}"
        )));
    }
    let n = n as usize;
    let mut rng = stream.rng();
    let normal = Normal::new(0.0, sigma * step.sqrt()).expect("positive std");
    let mut grid_times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    grid_times.push(0.0);
    values.push(0.0);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += normal.sample(&mut rng);
        grid_times.push(if i == n { horizon } else { i as f64 * step });
        values.push(acc);
    }
    SamplePath::new(*spec, grid_times, values, vec![], None, stream)
}

/// Exact Poisson event times on [0, horizon]: cumulative sums of
/// exponential(intensity) inter-arrivals, truncated at the horizon.
/// Events carry unit size; callers rescale.
pub fn gen_poisson_events(
    intensity: f64,
    horizon: f64,
    stream: RngStream,
) -> Result<Vec<JumpEvent>> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::Config(format!(
            "intensity must be positive, got {intensity}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let mut rng = stream.rng();
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp_sample(&mut rng, intensity);
        if t > horizon {
            break;
        }
        events.push(JumpEvent { time: t, size: 1.0 });
        if events.len() as u64 > DEFAULT_EVENT_CAP {
            return Err(Error::EventCapExceeded {
                cap: DEFAULT_EVENT_CAP,
            });
        }
    }
    Ok(events)
}

/// Compensated Poisson path: unit jumps rescaled to `jump_size`, drift
/// `-jump_size * intensity * t` supplied analytically by the model.
pub fn gen_compensated_poisson(spec: &ModelSpec, stream: RngStream) -> Result<SamplePath> {
    let (intensity, jump_size, horizon) = match *spec {
        ModelSpec::CompensatedPoisson {
            intensity,
            jump_size,
            horizon,
        } => (intensity, jump_size, horizon),
        _ => {
            return Err(Error::Config(format!(
                "gen_compensated_poisson requires a compensated_poisson spec, got {}",
                spec.kind_name()
            )))
        }
    };
    let jumps = gen_poisson_events(intensity, horizon, stream)?
        .into_iter()
        .map(|e| JumpEvent {
            time: e.time,
            size: jump_size,
        })
        .collect();
    SamplePath::new(*spec, vec![], vec![], jumps, None, stream)
}

/// Compound Poisson martingale path: i.i.d. jumps from the model's law at
/// Poisson(intensity) times; the martingale drift is analytic.
pub fn gen_compound_poisson_martingale(
    spec: &ModelSpec,
    stream: RngStream,
) -> Result<SamplePath> {
    let (intensity, law, horizon) = match *spec {
        ModelSpec::CompoundPoissonMartingale {
            intensity,
            jump_law,
            horizon,
        } => (intensity, jump_law, horizon),
        _ => {
            return Err(Error::Config(format!(
                "gen_compound_poisson_martingale requires a compound_poisson_martingale spec, got {}",
                spec.kind_name()
            )))
        }
    };
    let mut rng = stream.rng();
    let mut jumps = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp_sample(&mut rng, intensity);
        if t > horizon {
            break;
        }
        let size = match law {
            JumpLaw::Deterministic { size } => size,
            JumpLaw::Exponential { mean } => -mean * uniform_open01(&mut rng).ln(),
        };
        jumps.push(JumpEvent { time: t, size });
        if jumps.len() as u64 > DEFAULT_EVENT_CAP {
            return Err(Error::EventCapExceeded {
                cap: DEFAULT_EVENT_CAP,
            });
        }
    }
    SamplePath::new(*spec, vec![], vec![], jumps, None, stream)
}

/// Stopped scaled compensated Poisson path, simulated exactly.
///
/// After k arrivals the level process `k - (1+b)t` reaches -1 at the
/// candidate time `(k+1)/(1+b)`; the stopping time is the first candidate
/// that occurs before the next arrival, so the hitting identity
/// `N_{T_b} - (1+b) T_b = -1` holds exactly on every replication.
pub fn gen_stopped_scaled_cpp(spec: &ModelSpec, stream: RngStream) -> Result<SamplePath> {
    gen_stopped_scaled_cpp_with_cap(spec, stream, DEFAULT_EVENT_CAP)
}

pub fn gen_stopped_scaled_cpp_with_cap(
    spec: &ModelSpec,
    stream: RngStream,
    event_cap: u64,
) -> Result<SamplePath> {
    let (a, b) = match *spec {
        ModelSpec::StoppedScaledCpp { a, b } => (a, b),
        _ => {
            return Err(Error::Config(format!(
                "gen_stopped_scaled_cpp requires a stopped_scaled_cpp spec, got {}",
                spec.kind_name()
            )))
        }
    };
    let mut rng = stream.rng();
    let mut jumps = Vec::new();
    let mut arrivals: u64 = 0;
    let mut t_arr = 0.0;
    let stop_time = loop {
        let candidate = (arrivals as f64 + 1.0) / (1.0 + b);
        let next_arr = t_arr + exp_sample(&mut rng, 1.0);
        if next_arr > candidate {
            break candidate;
        }
        t_arr = next_arr;
        arrivals += 1;
        jumps.push(JumpEvent { time: t_arr, size: a });
        if arrivals > event_cap {
            return Err(Error::EventCapExceeded { cap: event_cap });
        }
    };
    SamplePath::new(*spec, vec![], vec![], jumps, Some(stop_time), stream)
}

/// Zero-martingale path (no randomness consumed).
pub fn gen_zero(spec: &ModelSpec, stream: RngStream) -> Result<SamplePath> {
    match *spec {
        ModelSpec::Zero { .. } => SamplePath::new(*spec, vec![], vec![], vec![], None, stream),
        _ => Err(Error::Config(format!(
            "gen_zero requires a zero spec, got {}",
            spec.kind_name()
        ))),
    }
}

/// Generate one replication of any model with its default discretization.
pub fn gen_path(spec: &ModelSpec, stream: RngStream) -> Result<SamplePath> {
    gen_path_with_step(spec, stream, None)
}

/// Like [`gen_path`] but with an explicit Brownian grid step.
pub fn gen_path_with_step(
    spec: &ModelSpec,
    stream: RngStream,
    brownian_step: Option<f64>,
) -> Result<SamplePath> {
    match spec {
        ModelSpec::Brownian { horizon, .. } => {
            let step = brownian_step.unwrap_or_else(|| default_brownian_step(*horizon));
            gen_brownian(spec, step, stream)
        }
        ModelSpec::CompensatedPoisson { .. } => gen_compensated_poisson(spec, stream),
        ModelSpec::CompoundPoissonMartingale { .. } => {
            gen_compound_poisson_martingale(spec, stream)
        }
        ModelSpec::StoppedScaledCpp { .. } => gen_stopped_scaled_cpp(spec, stream),
        ModelSpec::Zero { .. } => gen_zero(spec, stream),
    }
}
