//! Subarea layout, the real-valued area state and neighbor lookup.

use crate::events::Geometry;

/// Partition of the sensor into square subareas of side `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AreaLayout {
    scale: u32,
    shift: u32,
    cols: u32,
    rows: u32,
}

/// Which areas an event reads and how far it sits from their centers.
///
/// Slot order is `[11, 12, 21, 22]`: row index first (1 = the upper of the
/// two bracketing rows), column second (1 = the left column). Distances are
/// in half-pixel units so they stay integral: `hx[0]` is twice the
/// horizontal distance to column 1's center, `hx[1]` to column 2's, and
/// `hx[0] + hx[1] == 2 * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slots {
    pub areas: [usize; 4],
    /// Area the event belongs to (and updates).
    pub own: usize,
    /// Position of `own` within `areas`.
    pub own_slot: usize,
    pub hx: [u32; 2],
    pub hy: [u32; 2],
    /// Offset of the event inside its own area.
    pub off_x: u32,
    pub off_y: u32,
}

impl AreaLayout {
    /// `scale` must be a power of two.
    pub fn new(geometry: Geometry, scale: u32) -> Self {
        assert!(scale.is_power_of_two(), "scale must be a power of two");
        AreaLayout {
            scale,
            shift: scale.trailing_zeros(),
            cols: (geometry.width as u32).div_ceil(scale),
            rows: (geometry.height as u32).div_ceil(scale),
        }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn areas(&self) -> usize {
        self.cols as usize * self.rows as usize
    }

    /// Index of the area owning pixel `(x, y)`.
    #[inline]
    pub fn area_of(&self, x: u16, y: u16) -> usize {
        let col = (x as u32) >> self.shift;
        let row = (y as u32) >> self.shift;
        (row * self.cols + col) as usize
    }

    /// Center of column (or row) `index`, in half pixels: `2*index*scale + scale - 1`.
    pub fn center_half(&self, index: i64) -> i64 {
        2 * index * self.scale as i64 + self.scale as i64 - 1
    }

    #[inline]
    fn axis(&self, coord: u16, count: u32) -> ([u32; 2], [u32; 2], usize, u32) {
        let scale = self.scale;
        let own = (coord as u32) >> self.shift;
        let off = (coord as u32) & (scale - 1);
        // Center sits at (scale - 1) / 2; an offset left of it brackets with
        // the previous area, otherwise with the next one.
        let (first, second, half, own_sel) = if 2 * off + 1 < scale {
            (own as i64 - 1, own as i64, [2 * off + scale + 1, scale - 1 - 2 * off], 1)
        } else {
            (own as i64, own as i64 + 1, [2 * off + 1 - scale, 3 * scale - 2 * off - 1], 0)
        };
        let last = count as i64 - 1;
        let idx = [first.clamp(0, last) as u32, second.clamp(0, last) as u32];
        (idx, half, own_sel, off)
    }

    /// Neighbor slots for pixel `(x, y)`. Out-of-range neighbors are clamped
    /// to the border area, which duplicates its state into the missing slots.
    #[inline]
    pub fn slots(&self, x: u16, y: u16) -> Slots {
        let (cols, hx, col_sel, off_x) = self.axis(x, self.cols);
        let (rows, hy, row_sel, off_y) = self.axis(y, self.rows);
        let at = |r: u32, c: u32| (r * self.cols + c) as usize;
        let areas = [
            at(rows[0], cols[0]),
            at(rows[0], cols[1]),
            at(rows[1], cols[0]),
            at(rows[1], cols[1]),
        ];
        let own_slot = row_sel * 2 + col_sel;
        Slots {
            areas,
            own: areas[own_slot],
            own_slot,
            hx,
            hy,
            off_x,
            off_y,
        }
    }
}

/// Everything an interpolation needs about the four neighbors of an event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborContext {
    pub areas: [usize; 4],
    /// Filtered area timestamps `T_ij`, µs.
    pub ts: [f64; 4],
    /// Estimated inter-event intervals `I_ij`, µs.
    pub iv: [f64; 4],
    /// Horizontal distances to the column-1 and column-2 centers, pixels.
    pub dx: [f64; 2],
    /// Vertical distances to the row-1 and row-2 centers, pixels.
    pub dy: [f64; 2],
    /// Euclidean distances to the four centers.
    pub d: [f64; 4],
}

impl NeighborContext {
    /// Builds a context from raw values, deriving the Euclidean distances.
    pub fn from_parts(ts: [f64; 4], iv: [f64; 4], dx: [f64; 2], dy: [f64; 2]) -> Self {
        NeighborContext {
            areas: [0; 4],
            ts,
            iv,
            dx,
            dy,
            d: euclid(dx, dy),
        }
    }
}

pub(crate) fn euclid(dx: [f64; 2], dy: [f64; 2]) -> [f64; 4] {
    [
        dx[0].hypot(dy[0]),
        dx[1].hypot(dy[0]),
        dx[0].hypot(dy[1]),
        dx[1].hypot(dy[1]),
    ]
}

/// Smallest interval the reference path stores; keeps frequency weights finite
/// when several events share a timestamp under `update_shift = 0`.
pub const MIN_INTERVAL_US: f64 = 1e-9;

/// Real-valued state of every subarea.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaGrid {
    layout: AreaLayout,
    ts: Vec<f64>,
    iv: Vec<f64>,
    active: Vec<bool>,
    /// Per-offset Euclidean distances, indexed `off_y * scale + off_x`.
    dist: Vec<[f64; 4]>,
}

impl AreaGrid {
    pub fn new(geometry: Geometry, scale: u32, init_timestamp: f64, init_interval: f64) -> Self {
        let layout = AreaLayout::new(geometry, scale);
        let n = layout.areas();
        let mut dist = Vec::with_capacity((scale * scale) as usize);
        for off_y in 0..scale {
            for off_x in 0..scale {
                let s = layout.slots(off_x as u16, off_y as u16);
                dist.push(euclid(half_to_px(s.hx), half_to_px(s.hy)));
            }
        }
        AreaGrid {
            layout,
            ts: vec![init_timestamp; n],
            iv: vec![init_interval.max(MIN_INTERVAL_US); n],
            active: vec![false; n],
            dist,
        }
    }

    pub fn layout(&self) -> &AreaLayout {
        &self.layout
    }

    pub fn timestamp(&self, area: usize) -> f64 {
        self.ts[area]
    }

    pub fn interval(&self, area: usize) -> f64 {
        self.iv[area]
    }

    pub fn is_active(&self, area: usize) -> bool {
        self.active[area]
    }

    pub fn set_area(&mut self, area: usize, ts: f64, iv: f64) {
        self.ts[area] = ts;
        self.iv[area] = iv.max(MIN_INTERVAL_US);
    }

    /// Reads the neighbor context of pixel `(x, y)` from the current state.
    #[inline]
    pub fn neighbor_context(&self, x: u16, y: u16) -> NeighborContext {
        let s = self.layout.slots(x, y);
        self.context_for(&s)
    }

    #[inline]
    pub(crate) fn context_for(&self, s: &Slots) -> NeighborContext {
        let a = s.areas;
        let scale = self.layout.scale;
        NeighborContext {
            areas: a,
            ts: [self.ts[a[0]], self.ts[a[1]], self.ts[a[2]], self.ts[a[3]]],
            iv: [self.iv[a[0]], self.iv[a[1]], self.iv[a[2]], self.iv[a[3]]],
            dx: half_to_px(s.hx),
            dy: half_to_px(s.hy),
            d: self.dist[(s.off_y * scale + s.off_x) as usize],
        }
    }

    /// Folds an event at time `t` into `area`:
    /// `ts' = ts(1-u) + t*u`, `iv' = iv(1-u) + (t - ts)*u`, using the old `ts`.
    #[inline]
    pub fn update_area(&mut self, area: usize, t: f64, u: f64) {
        let ts = self.ts[area];
        self.ts[area] = ts * (1.0 - u) + t * u;
        self.iv[area] = (self.iv[area] * (1.0 - u) + (t - ts) * u).max(MIN_INTERVAL_US);
        self.active[area] = true;
    }

    /// Pseudo-event at `now` for every area that saw no event since the last
    /// global update; clears all activity flags.
    pub fn global_update(&mut self, now: f64, u: f64) {
        for area in 0..self.ts.len() {
            if self.active[area] {
                self.active[area] = false;
            } else {
                let ts = self.ts[area];
                self.ts[area] = ts * (1.0 - u) + now * u;
                self.iv[area] = (self.iv[area] * (1.0 - u) + (now - ts) * u).max(MIN_INTERVAL_US);
            }
        }
    }
}

#[inline]
fn half_to_px(h: [u32; 2]) -> [f64; 2] {
    [h[0] as f64 * 0.5, h[1] as f64 * 0.5]
}
