//! Labeled background-activity noise.
//!
//! Every pixel runs an independent Bernoulli trial per time step with
//! probability `rate * time_step`. Instead of drawing one uniform per trial
//! the generator jumps directly to the next success: the gap between
//! successes of a Bernoulli sequence is geometrically distributed, so the
//! output has exactly the law of the per-trial loop while costing one draw
//! per emitted event.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, see [`RNG_ALGORITHM`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use thiserror::Error;

use crate::events::{Event, EventStream, Geometry};

/// Name of the generator recorded in run manifests.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64";

/// Default Bernoulli step: 100 µs.
pub const DEFAULT_TIME_STEP_US: u64 = 100;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("noise rate must be a finite non-negative number, got {0}")]
    BadRate(f64),
    #[error("per-step probability {0} exceeds 1 (rate x step too large)")]
    ProbabilityAboveOne(f64),
    #[error("time step must be positive")]
    ZeroStep,
    #[error("duration {duration_us} us is shorter than one step of {time_step_us} us")]
    DurationTooShort { duration_us: u64, time_step_us: u64 },
    #[error("sensor geometry must be non-zero")]
    EmptyGeometry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub geometry: Geometry,
    /// Mean events per second per pixel.
    pub rate_hz: f64,
    pub duration_us: u64,
    pub time_step_us: u64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(geometry: Geometry, rate_hz: f64, duration_us: u64, seed: u64) -> Self {
        NoiseConfig {
            geometry,
            rate_hz,
            duration_us,
            time_step_us: DEFAULT_TIME_STEP_US,
            seed,
        }
    }

    pub fn with_time_step(mut self, time_step_us: u64) -> Self {
        self.time_step_us = time_step_us;
        self
    }

    /// Per-pixel, per-step event probability.
    pub fn step_probability(&self) -> f64 {
        self.rate_hz * self.time_step_us as f64 * 1e-6
    }

    pub fn steps(&self) -> u64 {
        self.duration_us / self.time_step_us.max(1)
    }

    /// Number of Bernoulli trials the configuration describes.
    pub fn trials(&self) -> u64 {
        self.geometry.pixels() as u64 * self.steps()
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !self.rate_hz.is_finite() || self.rate_hz < 0.0 {
            return Err(NoiseError::BadRate(self.rate_hz));
        }
        if self.time_step_us == 0 {
            return Err(NoiseError::ZeroStep);
        }
        if self.geometry.width == 0 || self.geometry.height == 0 {
            return Err(NoiseError::EmptyGeometry);
        }
        if self.duration_us < self.time_step_us {
            return Err(NoiseError::DurationTooShort {
                duration_us: self.duration_us,
                time_step_us: self.time_step_us,
            });
        }
        let p = self.step_probability();
        if p > 1.0 {
            return Err(NoiseError::ProbabilityAboveOne(p));
        }
        Ok(())
    }
}

/// Generates a labeled noise stream (polarities 2 and 3 only). Within one
/// step events appear in row-major pixel order at the step start time.
pub fn generate_noise(cfg: &NoiseConfig) -> Result<EventStream, NoiseError> {
    cfg.validate()?;
    let p = cfg.step_probability();
    let geometry = cfg.geometry;
    let mut events = Vec::new();
    if p > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let gaps = Geometric::new(p).expect("probability validated");
        let pixels = geometry.pixels() as u64;
        let width = geometry.width as u64;
        let trials = cfg.trials();
        events.reserve((trials as f64 * p * 1.01) as usize + 16);
        let mut index = 0u64;
        loop {
            index = match index.checked_add(gaps.sample(&mut rng)) {
                Some(i) if i < trials => i,
                _ => break,
            };
            let step = index / pixels;
            let pixel = index % pixels;
            let polarity = if rng.random_bool(0.5) { 3 } else { 2 };
            events.push(Event::new(
                step * cfg.time_step_us,
                (pixel % width) as u16,
                (pixel / width) as u16,
                polarity,
            ));
            index += 1;
        }
    }
    Ok(EventStream::new(geometry, events).expect("generator emits sorted in-range events"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const VGA: Geometry = Geometry::new(640, 480);

    #[test]
    fn zero_rate_is_empty() {
        let s = generate_noise(&NoiseConfig::new(VGA, 0.0, 1_000_000, 1)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn one_hz_count_within_three_sigma() {
        // n = 640*480*10_000 trials, p = 1e-4: mean 307200, sd ~ sqrt(n p (1-p)).
        let cfg = NoiseConfig::new(VGA, 1.0, 1_000_000, 42);
        let n = cfg.trials() as f64;
        let p = cfg.step_probability();
        let mean = n * p;
        assert!((mean - 307_200.0).abs() < 1e-6);
        let sd = (n * p * (1.0 - p)).sqrt();
        let s = generate_noise(&cfg).unwrap();
        let diff = (s.len() as f64 - mean).abs();
        assert!(diff <= 3.0 * sd, "count {} vs mean {mean} (3 sd = {})", s.len(), 3.0 * sd);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = NoiseConfig::new(Geometry::new(64, 48), 5.0, 200_000, 9);
        assert_eq!(generate_noise(&cfg).unwrap(), generate_noise(&cfg).unwrap());
        let other = NoiseConfig { seed: 10, ..cfg.clone() };
        assert_ne!(generate_noise(&cfg).unwrap(), generate_noise(&other).unwrap());
    }

    #[test]
    fn labels_and_placement() {
        let cfg = NoiseConfig::new(Geometry::new(32, 32), 50.0, 100_000, 3);
        let s = generate_noise(&cfg).unwrap();
        assert!(!s.is_empty());
        assert!(s.events().iter().all(|e| e.p == 2 || e.p == 3));
        assert!(s.events().iter().all(|e| e.t % cfg.time_step_us == 0 && e.t < cfg.duration_us));
        // row-major within a step, no pixel twice per step
        for w in s.events().windows(2) {
            if w[0].t == w[1].t {
                assert!((w[0].y, w[0].x) < (w[1].y, w[1].x));
            }
        }
        let threes = s.events().iter().filter(|e| e.p == 3).count() as f64;
        let frac = threes / s.len() as f64;
        let sd = (0.25 / s.len() as f64).sqrt();
        assert!((frac - 0.5).abs() < 4.0 * sd, "polarity split {frac}");
    }

    #[test]
    fn per_pixel_rate_converges() {
        // Pool counts over all pixels and compare the per-pixel mean with the
        // configured rate; the chi-square dispersion statistic should sit near
        // its degrees of freedom for independent Bernoulli counts.
        let g = Geometry::new(40, 30);
        let cfg = NoiseConfig::new(g, 20.0, 2_000_000, 5);
        let s = generate_noise(&cfg).unwrap();
        let mut counts = vec![0u64; g.pixels()];
        for e in s.events() {
            counts[e.y as usize * g.width as usize + e.x as usize] += 1;
        }
        let expected = cfg.steps() as f64 * cfg.step_probability();
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        let rate = mean / (cfg.duration_us as f64 * 1e-6);
        assert!((rate - 20.0).abs() < 0.5, "empirical rate {rate}");
        let var = expected * (1.0 - cfg.step_probability());
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / var).sum();
        let dof = counts.len() as f64;
        assert!((chi2 - dof).abs() < 5.0 * (2.0 * dof).sqrt(), "chi2 {chi2} dof {dof}");
    }

    #[test]
    fn full_probability_fires_everywhere() {
        let cfg = NoiseConfig::new(Geometry::new(3, 2), 10_000.0, 300, 1);
        let s = generate_noise(&cfg).unwrap();
        assert_eq!(s.len(), 6 * 3);
    }

    #[test]
    fn config_errors() {
        let base = NoiseConfig::new(VGA, 1.0, 1_000_000, 1);
        assert!(matches!(
            generate_noise(&NoiseConfig { rate_hz: 20_000.0, ..base.clone() }),
            Err(NoiseError::ProbabilityAboveOne(_))
        ));
        assert_eq!(
            generate_noise(&NoiseConfig { rate_hz: -1.0, ..base.clone() }).unwrap_err(),
            NoiseError::BadRate(-1.0)
        );
        assert_eq!(
            generate_noise(&base.clone().with_time_step(0)).unwrap_err(),
            NoiseError::ZeroStep
        );
        assert!(matches!(
            generate_noise(&NoiseConfig { duration_us: 50, ..base }),
            Err(NoiseError::DurationTooShort { .. })
        ));
    }
}
