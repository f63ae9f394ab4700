//! Common surface of every streaming filter.

use thiserror::Error;

use crate::events::{Event, EventStream};

/// Per-event filter output. `score` is the quantity thresholded by the
/// filter length; smaller means better supported by recent activity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEvent {
    pub event: Event,
    pub score: f64,
    pub pass: bool,
}

impl ScoredEvent {
    pub fn is_signal(&self) -> bool {
        self.event.is_signal()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("event {index}: timestamp {t} precedes previous timestamp {prev}")]
    Unsorted { index: usize, t: u64, prev: u64 },
    #[error("event {index}: coordinate ({x}, {y}) outside the filter's sensor")]
    OutOfRange { index: usize, x: u16, y: u16 },
    #[error("invalid filter configuration: {0}")]
    Config(String),
}

/// A stateful, label-blind, single-pass event filter.
pub trait EventFilter {
    /// Scores `event` against the current state, then folds it into the state.
    fn process(&mut self, event: &Event) -> ScoredEvent;

    /// True if `event` lies inside the sensor the filter was built for.
    fn accepts(&self, event: &Event) -> bool;
}

/// Runs `filter` over `events`, checking order and bounds as it goes.
pub fn run_filter<F: EventFilter + ?Sized>(
    filter: &mut F,
    events: &[Event],
) -> Result<Vec<ScoredEvent>, FilterError> {
    let mut out = Vec::with_capacity(events.len());
    let mut prev = 0u64;
    for (index, e) in events.iter().enumerate() {
        if e.t < prev {
            return Err(FilterError::Unsorted {
                index,
                t: e.t,
                prev,
            });
        }
        if !filter.accepts(e) {
            return Err(FilterError::OutOfRange {
                index,
                x: e.x,
                y: e.y,
            });
        }
        prev = e.t;
        out.push(filter.process(e));
    }
    Ok(out)
}

/// Events that passed, as a new stream with the same geometry.
pub fn passed_stream(stream: &EventStream, scored: &[ScoredEvent]) -> EventStream {
    let events = scored.iter().filter(|s| s.pass).map(|s| s.event).collect();
    EventStream::new(stream.geometry(), events).expect("subsequence of a valid stream")
}
