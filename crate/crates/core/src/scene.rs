//! Synthetic moving-bar scene used as a labeled benchmark.
//!
//! Vertical bars sweep horizontally across the sensor and wrap around. Every
//! time an edge crosses a pixel column, each pixel the bar covers in that
//! column emits `events_per_edge` events with a small uniform time jitter.
//! Leading edges emit ON (p = 1), trailing edges OFF (p = 0).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::events::{merge_streams, Event, EventError, EventStream, Geometry};
use crate::noise::{generate_noise, NoiseConfig, NoiseError};

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    /// Covered rows, `y_start..y_end`.
    pub y_start: u16,
    pub y_end: u16,
    /// Horizontal extent in pixels.
    pub width: f64,
    /// Pixels per second, positive moves right.
    pub speed: f64,
    /// Leading edge position at t = 0.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingBarScene {
    pub geometry: Geometry,
    pub bars: Vec<Bar>,
    pub duration_us: u64,
    pub events_per_edge: u32,
    pub jitter_us: u64,
    pub seed: u64,
}

impl MovingBarScene {
    /// Three bars of different height, width and speed on a 128x128 sensor.
    pub fn standard(duration_us: u64, seed: u64) -> Self {
        MovingBarScene {
            geometry: Geometry::new(128, 128),
            bars: vec![
                Bar { y_start: 8, y_end: 56, width: 12.0, speed: 150.0, phase: 10.0 },
                Bar { y_start: 48, y_end: 96, width: 20.0, speed: -220.0, phase: 90.0 },
                Bar { y_start: 90, y_end: 124, width: 8.0, speed: 300.0, phase: 50.0 },
            ],
            duration_us,
            events_per_edge: 1,
            jitter_us: 500,
            seed,
        }
    }

    /// Clean signal events, sorted by time.
    pub fn generate(&self) -> EventStream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let w = self.geometry.width as i64;
        let mut events = Vec::new();
        for bar in &self.bars {
            if bar.speed == 0.0 {
                continue;
            }
            let y_end = bar.y_end.min(self.geometry.height);
            // (edge offset behind the leading edge, polarity)
            for (offset, p) in [(0.0, 1u8), (bar.width, 0u8)] {
                let start = bar.phase - offset;
                let us_per_px = 1e6 / bar.speed.abs();
                // first integer position the edge reaches
                let mut n = if bar.speed > 0.0 { start.floor() + 1.0 } else { start.ceil() - 1.0 };
                loop {
                    let t = ((n - start).abs() * us_per_px).round() as u64;
                    if t >= self.duration_us {
                        break;
                    }
                    let col = (n as i64).rem_euclid(w);
                    // a right-moving edge at integer n enters column n; moving left it enters n - 1
                    let col = if bar.speed > 0.0 { col } else { (col - 1).rem_euclid(w) } as u16;
                    for y in bar.y_start..y_end {
                        for _ in 0..self.events_per_edge {
                            let jitter = if self.jitter_us > 0 { rng.random_range(0..self.jitter_us) } else { 0 };
                            events.push(Event::new(t + jitter, col, y, p));
                        }
                    }
                    n += bar.speed.signum();
                }
            }
        }
        events.retain(|e| e.t < self.duration_us);
        events.sort_by_key(|e| (e.t, e.y, e.x, e.p));
        EventStream::new(self.geometry, events).expect("scene events are in range and sorted")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Events(#[from] EventError),
}

/// Scene signal mixed with generated noise at `rate_hz` per pixel.
pub fn noisy_scene(scene: &MovingBarScene, rate_hz: f64, noise_seed: u64) -> Result<EventStream, SceneError> {
    let clean = scene.generate();
    let noise = generate_noise(&NoiseConfig::new(scene.geometry, rate_hz, scene.duration_us, noise_seed))?;
    Ok(merge_streams(&clean, &noise)?)
}
