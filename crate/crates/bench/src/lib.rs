//! Workloads shared by the benchmarks.

use evfilt_core::scene::{noisy_scene, MovingBarScene};
use evfilt_core::{generate_noise, EventStream, Geometry, NoiseConfig};

/// Moving bars plus 1 Hz/px noise on a 128x128 sensor (about 70k events).
pub fn scene_stream() -> EventStream {
    noisy_scene(&MovingBarScene::standard(1_000_000, 7), 1.0, 11).expect("fixed scene parameters are valid")
}

/// Uniform noise on a 346x260 sensor, about `events` long.
pub fn noise_stream(events: usize, seed: u64) -> EventStream {
    let g = Geometry::new(346, 260);
    let rate = events as f64 / g.pixels() as f64;
    generate_noise(&NoiseConfig::new(g, rate, 1_000_000, seed)).expect("rate below one event per step")
}
