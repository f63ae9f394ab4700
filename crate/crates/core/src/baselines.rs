//! Per-pixel timestamp-map baselines: nearest neighbour (NNb) and the
//! spatiotemporal correlation filter STCF(N).
//!
//! Both look at the 8-connected neighborhood, excluding the event's own
//! pixel. Pixels outside the sensor count as never having fired (timestamp
//! 0), the same as cold pixels, which keeps STCF(1) identical to NNb
//! everywhere including borders.

use crate::events::{Event, EventStream, Geometry};
use crate::filter::{run_filter, EventFilter, FilterError, ScoredEvent};

/// Last event time per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelTimestampMap {
    geometry: Geometry,
    last: Vec<u64>,
}

impl PixelTimestampMap {
    pub fn new(geometry: Geometry) -> Self {
        PixelTimestampMap {
            geometry,
            last: vec![0; geometry.pixels()],
        }
    }

    #[inline]
    pub fn get(&self, x: u16, y: u16) -> u64 {
        self.last[y as usize * self.geometry.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u16, y: u16, t: u64) {
        self.last[y as usize * self.geometry.width as usize + x as usize] = t;
    }

    /// Timestamps of the eight neighbors; off-sensor pixels read as 0.
    #[inline]
    pub fn neighbors(&self, x: u16, y: u16) -> [u64; 8] {
        let mut out = [0u64; 8];
        let (w, h) = (self.geometry.width as i32, self.geometry.height as i32);
        let mut k = 0;
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    out[k] = self.last[(ny * w + nx) as usize];
                }
                k += 1;
            }
        }
        out
    }
}

/// Passes an event if some neighbor fired less than `window_us` ago.
/// Score: time since the most recent neighbor event.
#[derive(Debug, Clone)]
pub struct NnbFilter {
    map: PixelTimestampMap,
    window_us: u64,
}

impl NnbFilter {
    pub fn new(geometry: Geometry, window_us: u64) -> Self {
        NnbFilter {
            map: PixelTimestampMap::new(geometry),
            window_us,
        }
    }
}

impl EventFilter for NnbFilter {
    #[inline]
    fn process(&mut self, e: &Event) -> ScoredEvent {
        let newest = self.map.neighbors(e.x, e.y).into_iter().max().unwrap_or(0);
        let score = e.t.saturating_sub(newest) as f64;
        self.map.set(e.x, e.y, e.t);
        ScoredEvent {
            event: *e,
            score,
            pass: score < self.window_us as f64,
        }
    }

    fn accepts(&self, e: &Event) -> bool {
        self.map.geometry.contains(e.x, e.y)
    }
}

/// Passes an event if at least `n` distinct neighbors fired within the
/// window. Score: age of the `n`-th most recent neighbor.
#[derive(Debug, Clone)]
pub struct StcfFilter {
    map: PixelTimestampMap,
    n: usize,
    window_us: u64,
}

impl StcfFilter {
    pub fn new(geometry: Geometry, n: usize, window_us: u64) -> Result<Self, FilterError> {
        if !(1..=8).contains(&n) {
            return Err(FilterError::Config(format!("STCF support N must be in 1..=8, got {n}")));
        }
        Ok(StcfFilter {
            map: PixelTimestampMap::new(geometry),
            n,
            window_us,
        })
    }
}

impl EventFilter for StcfFilter {
    #[inline]
    fn process(&mut self, e: &Event) -> ScoredEvent {
        let mut ts = self.map.neighbors(e.x, e.y);
        // descending: index n-1 is the n-th most recent neighbor
        ts.sort_unstable_by(|a, b| b.cmp(a));
        let score = e.t.saturating_sub(ts[self.n - 1]) as f64;
        self.map.set(e.x, e.y, e.t);
        ScoredEvent {
            event: *e,
            score,
            pass: score < self.window_us as f64,
        }
    }

    fn accepts(&self, e: &Event) -> bool {
        self.map.geometry.contains(e.x, e.y)
    }
}

pub fn nnb_filter(stream: &EventStream, window_us: u64) -> Result<Vec<ScoredEvent>, FilterError> {
    let mut f = NnbFilter::new(stream.geometry(), window_us);
    run_filter(&mut f, stream.events())
}

pub fn stcf_filter(
    stream: &EventStream,
    n: usize,
    window_us: u64,
) -> Result<Vec<ScoredEvent>, FilterError> {
    let mut f = StcfFilter::new(stream.geometry(), n, window_us)?;
    run_filter(&mut f, stream.events())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: Geometry = Geometry::new(32, 24);

    fn s(events: &[(u64, u16, u16)]) -> EventStream {
        EventStream::new(G, events.iter().map(|&(t, x, y)| Event::new(t, x, y, 0)).collect()).unwrap()
    }

    #[test]
    fn nnb_basics() {
        let out = nnb_filter(&s(&[(5_000, 10, 10)]), 200).unwrap();
        assert_eq!(out[0].score, 5_000.0);
        assert!(!out[0].pass);

        let pair = s(&[(5_000, 10, 10), (5_050, 11, 10)]);
        let out = nnb_filter(&pair, 200).unwrap();
        assert_eq!(out[1].score, 50.0);
        assert!(out[1].pass);
        assert!(!nnb_filter(&pair, 20).unwrap()[1].pass);
    }

    #[test]
    fn nnb_ignores_own_pixel() {
        let out = nnb_filter(&s(&[(5_000, 10, 10), (5_010, 10, 10)]), 200).unwrap();
        assert!(!out[1].pass);
        assert_eq!(out[1].score, 5_010.0);
    }

    #[test]
    fn stcf_support_shortfall() {
        let events = s(&[(5_000, 10, 10), (5_050, 11, 10)]);
        let out = stcf_filter(&events, 2, 200).unwrap();
        assert!(!out[1].pass);
        let events = s(&[(5_000, 10, 10), (5_020, 12, 10), (5_050, 11, 10)]);
        let out = stcf_filter(&events, 2, 200).unwrap();
        assert!(out[2].pass);
        assert_eq!(out[2].score, 50.0);
    }

    #[test]
    fn stcf_range() {
        assert!(StcfFilter::new(G, 0, 10).is_err());
        assert!(StcfFilter::new(G, 9, 10).is_err());
        assert!(StcfFilter::new(G, 8, 10).is_ok());
    }

    fn arb_events() -> impl Strategy<Value = EventStream> {
        proptest::collection::vec((0u64..300, 0u16..32, 0u16..24), 0..400).prop_map(|raw| {
            let mut t = 0;
            let ev = raw
                .into_iter()
                .map(|(dt, x, y)| {
                    t += dt;
                    Event::new(t, x, y, 0)
                })
                .collect();
            EventStream::new(G, ev).unwrap()
        })
    }

    proptest! {
        #[test]
        fn stcf1_equals_nnb(stream in arb_events(), window in 1u64..2000) {
            let a = nnb_filter(&stream, window).unwrap();
            let b = stcf_filter(&stream, 1, window).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn stcf_pass_sets_shrink_with_n(stream in arb_events(), window in 1u64..2000) {
            let runs: Vec<_> = (1..=8).map(|n| stcf_filter(&stream, n, window).unwrap()).collect();
            for w in runs.windows(2) {
                for (lo, hi) in w[0].iter().zip(&w[1]) {
                    prop_assert!(!hi.pass || lo.pass);
                    prop_assert!(hi.score >= lo.score);
                }
            }
        }
    }
}
