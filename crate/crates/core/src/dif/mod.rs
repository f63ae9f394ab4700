//! Reference (floating-point) DIF and BIF filters.
//!
//! The sensor is split into `scale x scale` subareas. Each area keeps an IIR
//! estimate of its recent timestamp and of the interval between its events.
//! An event is scored against the four areas whose centers bracket it, the
//! score is compared with the filter length, and only then is the event
//! folded into its own area.

mod exact;
mod grid;
mod interp;

use std::fmt;
use std::str::FromStr;

pub use exact::{bif_decide_division_free, dif_decide_division_free, BifTrace, DifTrace, ExactContext};
pub use grid::{AreaGrid, AreaLayout, NeighborContext, Slots, MIN_INTERVAL_US};
pub use interp::{bif_score, dif_score, ScoreError};

use crate::events::{Event, EventStream, Geometry};
use crate::filter::{run_filter, EventFilter, FilterError, ScoredEvent};

/// Parameters shared by the reference and the fixed-point filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FilterConfig {
    /// Subarea side in pixels: 8, 16 or 32.
    pub scale: u32,
    /// Update factor `u = 2^-update_shift`.
    pub update_shift: u32,
    /// `F_L`, µs. Events pass when their score is strictly below it.
    pub filter_length_us: u64,
    /// Period of the inactive-area update, µs; 0 disables it.
    pub global_update_period_us: u64,
    pub init_interval_us: u64,
    pub init_timestamp_us: u64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            scale: 16,
            update_shift: 2,
            filter_length_us: 200,
            global_update_period_us: 20_000,
            init_interval_us: 20_000,
            init_timestamp_us: 0,
        }
    }
}

impl FilterConfig {
    pub fn update_factor(&self) -> f64 {
        (-(self.update_shift as f64)).exp2()
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if !matches!(self.scale, 8 | 16 | 32) {
            return Err(FilterError::Config(format!(
                "scale must be 8, 16 or 32, got {}",
                self.scale
            )));
        }
        if self.update_shift > 30 {
            return Err(FilterError::Config(format!(
                "update shift {} is out of range",
                self.update_shift
            )));
        }
        if self.filter_length_us == 0 {
            return Err(FilterError::Config("filter length must be positive".into()));
        }
        if self.init_interval_us == 0 {
            return Err(FilterError::Config("initial interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Dif,
    Bif,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dif" => Ok(Algorithm::Dif),
            "bif" => Ok(Algorithm::Bif),
            other => Err(format!("unknown interpolation {other:?}")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Dif => "dif",
            Algorithm::Bif => "bif",
        })
    }
}

/// Tracks period boundaries for the inactive-area update. Several boundaries
/// skipped by one inter-event gap collapse into a single update at the
/// latest of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalUpdateClock {
    period: u64,
    epoch: u64,
}

impl GlobalUpdateClock {
    pub fn new(period_us: u64) -> Self {
        GlobalUpdateClock {
            period: period_us,
            epoch: 0,
        }
    }

    /// Returns the update time if an event at `t` crosses a boundary.
    #[inline]
    pub fn due(&mut self, t: u64) -> Option<u64> {
        if self.period == 0 {
            return None;
        }
        let epoch = t / self.period;
        if epoch > self.epoch {
            self.epoch = epoch;
            Some(epoch * self.period)
        } else {
            None
        }
    }
}

/// Streaming reference filter.
#[derive(Debug, Clone)]
pub struct DifFilter {
    cfg: FilterConfig,
    algo: Algorithm,
    geometry: Geometry,
    grid: AreaGrid,
    u: f64,
    clock: GlobalUpdateClock,
}

impl DifFilter {
    pub fn new(geometry: Geometry, cfg: FilterConfig, algo: Algorithm) -> Result<Self, FilterError> {
        cfg.validate()?;
        Ok(DifFilter {
            cfg,
            algo,
            geometry,
            grid: AreaGrid::new(
                geometry,
                cfg.scale,
                cfg.init_timestamp_us as f64,
                cfg.init_interval_us as f64,
            ),
            u: cfg.update_factor(),
            clock: GlobalUpdateClock::new(cfg.global_update_period_us),
        })
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &AreaGrid {
        &self.grid
    }

    /// Score of `event` against the current state, without updating anything.
    #[inline]
    pub fn score(&self, event: &Event) -> f64 {
        let ctx = self.grid.neighbor_context(event.x, event.y);
        match self.algo {
            Algorithm::Dif => interp::dif_score_unchecked(&ctx, event.t as f64),
            Algorithm::Bif => interp::bif_score_unchecked(&ctx, event.t as f64),
        }
    }
}

impl EventFilter for DifFilter {
    #[inline]
    fn process(&mut self, event: &Event) -> ScoredEvent {
        if let Some(now) = self.clock.due(event.t) {
            self.grid.global_update(now as f64, self.u);
        }
        let slots = self.grid.layout().slots(event.x, event.y);
        let ctx = self.grid.context_for(&slots);
        let t = event.t as f64;
        let score = match self.algo {
            Algorithm::Dif => interp::dif_score_unchecked(&ctx, t),
            Algorithm::Bif => interp::bif_score_unchecked(&ctx, t),
        };
        self.grid.update_area(slots.own, t, self.u);
        ScoredEvent {
            event: *event,
            score,
            pass: score < self.cfg.filter_length_us as f64,
        }
    }

    fn accepts(&self, event: &Event) -> bool {
        self.geometry.contains(event.x, event.y)
    }
}

/// Filters a whole stream with a fresh state.
pub fn filter_stream(
    stream: &EventStream,
    cfg: &FilterConfig,
    algo: Algorithm,
) -> Result<Vec<ScoredEvent>, FilterError> {
    let mut filter = DifFilter::new(stream.geometry(), *cfg, algo)?;
    run_filter(&mut filter, stream.events())
}
