//! Bit-accurate integer model of the FPGA DIF datapath.
//!
//! Differences from the reference filter, all deliberate:
//! * distances come from a table quantized to `2^-dist_frac_bits` pixels;
//! * `K = I * d` drops `trunc_bits` low bits and is clamped to `[1, 2^k_sat_bits - 1]`;
//! * the `D` products are factored through `K_d1 = K12 K21`, `K_d2 = K11 K22`
//!   (six multiplications instead of eight);
//! * timestamp differences are wrapped to `dt_bits` two's-complement;
//! * area state is integer and updated with arithmetic shifts.
//!
//! The hardware only emits the pass bit. The model also exposes the exact
//! rational score `dT_c / D_sum` so a single run supports a threshold sweep.

mod pipeline;

pub use pipeline::{
    pipeline_simulate, throughput_csv, throughput_report, PipelineConfig, PipelineStats,
    PipelineTiming, DEFAULT_OVERHEAD_CYCLES, HAZARD_WINDOW, LATENCY_CYCLES,
};

use crate::dif::{AreaLayout, FilterConfig, GlobalUpdateClock, Slots};
use crate::events::{Event, EventStream, Geometry};
use crate::filter::{run_filter, EventFilter, FilterError, ScoredEvent};

/// Word widths of the fixed-point datapath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HwParams {
    /// Low bits dropped from each `K` product.
    pub trunc_bits: u32,
    /// Width `K` saturates to.
    pub k_sat_bits: u32,
    /// Width of the timestamp differences.
    pub dt_bits: u32,
    /// Fractional bits of the distance table.
    pub dist_frac_bits: u32,
    /// Width of stored area timestamps.
    pub ts_bits: u32,
    /// Width of stored area intervals.
    pub iv_bits: u32,
}

impl Default for HwParams {
    fn default() -> Self {
        HwParams {
            trunc_bits: 8,
            k_sat_bits: 12,
            dt_bits: 24,
            dist_frac_bits: 2,
            ts_bits: 32,
            iv_bits: 24,
        }
    }
}

impl HwParams {
    /// Checks the widths the hardware was built and evaluated with.
    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |what: String| Err(FilterError::Config(what));
        if !(7..=10).contains(&self.trunc_bits) {
            return bad(format!("trunc_bits must be in 7..=10, got {}", self.trunc_bits));
        }
        if !(11..=13).contains(&self.k_sat_bits) {
            return bad(format!("k_sat_bits must be 11, 12 or 13, got {}", self.k_sat_bits));
        }
        if self.dt_bits != 24 {
            return bad(format!("dt_bits must be 24, got {}", self.dt_bits));
        }
        if self.dist_frac_bits != 2 {
            return bad(format!("dist_frac_bits must be 2, got {}", self.dist_frac_bits));
        }
        self.validate_model()
    }

    /// Looser bounds under which the integer model stays overflow-free.
    /// Used for precision studies outside the hardware configuration.
    pub fn validate_model(&self) -> Result<(), FilterError> {
        let bad = |what: &str| Err(FilterError::Config(what.to_string()));
        if self.trunc_bits > 24 {
            return bad("trunc_bits must be at most 24");
        }
        if !(1..=30).contains(&self.k_sat_bits) {
            return bad("k_sat_bits must be in 1..=30");
        }
        if !(2..=28).contains(&self.dt_bits) {
            return bad("dt_bits must be in 2..=28");
        }
        if self.dist_frac_bits > 8 {
            return bad("dist_frac_bits must be at most 8");
        }
        if !(self.dt_bits..=48).contains(&self.ts_bits) {
            return bad("ts_bits must be in dt_bits..=48");
        }
        if !(1..=32).contains(&self.iv_bits) {
            return bad("iv_bits must be in 1..=32");
        }
        Ok(())
    }

    pub fn k_max(&self) -> u64 {
        (1u64 << self.k_sat_bits) - 1
    }

    pub fn iv_max(&self) -> u64 {
        (1u64 << self.iv_bits) - 1
    }

    fn ts_mask(&self) -> u64 {
        (1u64 << self.ts_bits) - 1
    }
}

/// Quantized distances from every in-area offset to the four bracketing centers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceLut {
    scale: u32,
    frac_bits: u32,
    table: Vec<[u32; 4]>,
}

/// `round(sqrt(hx^2 + hy^2) / 2 * 2^frac_bits)` for half-pixel offsets, at least 1.
pub fn quantize_distance(hx: u32, hy: u32, frac_bits: u32) -> u32 {
    let n = (hx as u64 * hx as u64 + hy as u64 * hy as u64) as f64;
    let q = (n.sqrt() * (1u64 << frac_bits) as f64 * 0.5).round() as u32;
    q.max(1)
}

impl DistanceLut {
    pub fn new(scale: u32, frac_bits: u32) -> Self {
        assert!(scale.is_power_of_two(), "scale must be a power of two");
        // Offsets inside one area do not depend on the sensor size; any
        // sensor with a 3x3 area neighborhood yields the same distances.
        let layout = AreaLayout::new(Geometry::new((3 * scale) as u16, (3 * scale) as u16), scale);
        let mut table = Vec::with_capacity((scale * scale) as usize);
        for off_y in 0..scale {
            for off_x in 0..scale {
                let s = layout.slots((scale + off_x) as u16, (scale + off_y) as u16);
                table.push([
                    quantize_distance(s.hx[0], s.hy[0], frac_bits),
                    quantize_distance(s.hx[1], s.hy[0], frac_bits),
                    quantize_distance(s.hx[0], s.hy[1], frac_bits),
                    quantize_distance(s.hx[1], s.hy[1], frac_bits),
                ]);
            }
        }
        DistanceLut {
            scale,
            frac_bits,
            table,
        }
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    /// Quantized distances `[d11, d12, d21, d22]` for an in-area offset.
    #[inline]
    pub fn get(&self, off_x: u32, off_y: u32) -> [u32; 4] {
        self.table[(off_y * self.scale + off_x) as usize]
    }
}

/// `K = clamp((I * d_q) >> trunc_bits, 1, 2^k_sat_bits - 1)`.
#[inline]
pub fn hw_k(interval: u64, d_q: u32, p: &HwParams) -> u64 {
    ((interval * d_q as u64) >> p.trunc_bits).clamp(1, p.k_max())
}

/// Two's-complement truncation of `value` to `bits`.
#[inline]
pub fn wrap_signed(value: i64, bits: u32) -> i64 {
    let shift = 64 - bits;
    (value << shift) >> shift
}

/// `Ts - T` modulo `2^dt_bits`, sign-extended.
#[inline]
pub fn hw_delta(ts_e: u64, t_area: u64, p: &HwParams) -> i64 {
    wrap_signed(ts_e.wrapping_sub(t_area) as i64, p.dt_bits)
}

/// Shift-based area update against the pre-update timestamp:
/// `ts' = ts + ((Ts - ts) >> o)`, `iv' = iv + (((Ts - ts) - iv) >> o)`.
/// Shifts are arithmetic (floor); `iv'` saturates to `[0, 2^iv_bits - 1]`.
#[inline]
pub fn hw_update_area(ts: u64, iv: u64, ts_e: u64, shift: u32, p: &HwParams) -> (u64, u64) {
    let diff = wrap_signed(ts_e.wrapping_sub(ts) as i64, p.ts_bits);
    let ts_new = (ts as i64).wrapping_add(diff >> shift) as u64 & p.ts_mask();
    let iv_new = (iv as i64 + ((diff - iv as i64) >> shift)).clamp(0, p.iv_max() as i64) as u64;
    (ts_new, iv_new)
}

/// Intermediates of one integer decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HwTrace {
    pub k: [u64; 4],
    pub k_d: [i128; 2],
    pub d: [i128; 4],
    pub d_sum: i128,
    pub f_c: i128,
    pub dt_c: i128,
    /// Multiplications performed for this decision.
    pub multiplications: u32,
}

/// Integer DIF comparison `F_L * D_sum > sum(dT_ij * D_ij)` with the
/// factored `D` products.
pub fn hw_decide(dt: &[i64; 4], k: &[u64; 4], filter_length: u64) -> (bool, HwTrace) {
    let mut count = 0u32;
    let mut mul = |a: i128, b: i128| {
        count += 1;
        a * b
    };
    let [k11, k12, k21, k22] = k.map(|v| v as i128);
    let kd1 = mul(k12, k21);
    let kd2 = mul(k11, k22);
    let d = [mul(kd1, k22), mul(kd2, k21), mul(kd2, k12), mul(kd1, k11)];
    let d_sum = (d[0] + d[1]) + (d[2] + d[3]);
    let f_c = mul(filter_length as i128, d_sum);
    let dt_c = (mul(dt[0] as i128, d[0]) + mul(dt[1] as i128, d[1]))
        + (mul(dt[2] as i128, d[2]) + mul(dt[3] as i128, d[3]));
    let r = f_c > dt_c;
    (
        r,
        HwTrace {
            k: *k,
            k_d: [kd1, kd2],
            d,
            d_sum,
            f_c,
            dt_c,
            multiplications: count,
        },
    )
}

/// Exact rational score `num / den` (`dT_c / D_sum`, `den > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HwScore {
    pub num: i128,
    pub den: i128,
}

impl HwScore {
    /// Same comparison the datapath makes: `F_L * den > num`.
    #[inline]
    pub fn passes(&self, filter_length: u64) -> bool {
        filter_length as i128 * self.den > self.num
    }

    /// Nearest-below-safe float value: thresholding it at any integer gives
    /// the same answer as [`HwScore::passes`].
    pub fn value(&self) -> f64 {
        let q = self.num.div_euclid(self.den);
        let r = self.num.rem_euclid(self.den);
        let whole = q as f64;
        if r == 0 {
            return whole;
        }
        let v = whole + r as f64 / self.den as f64;
        let ceiling = (q + 1) as f64;
        if v >= ceiling {
            ceiling.next_down()
        } else {
            v
        }
    }
}

/// Result of one event on the integer datapath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwOutcome {
    pub event: Event,
    pub pass: bool,
    pub score: HwScore,
    pub trace: HwTrace,
}

impl HwOutcome {
    pub fn scored(&self) -> ScoredEvent {
        ScoredEvent {
            event: self.event,
            score: self.score.value(),
            pass: self.pass,
        }
    }
}

/// The stateless part of the datapath: given the four area reads, decide and
/// compute the new state of the event's own area.
#[derive(Debug, Clone)]
pub(crate) struct Datapath {
    pub params: HwParams,
    pub shift: u32,
    pub filter_length: u64,
    pub layout: AreaLayout,
    pub lut: DistanceLut,
}

impl Datapath {
    fn new(geometry: Geometry, cfg: &FilterConfig, params: HwParams) -> Self {
        Datapath {
            params,
            shift: cfg.update_shift,
            filter_length: cfg.filter_length_us,
            layout: AreaLayout::new(geometry, cfg.scale),
            lut: DistanceLut::new(cfg.scale, params.dist_frac_bits),
        }
    }

    /// Narrows an event timestamp to the stored width.
    #[inline]
    pub fn narrow(&self, t: u64) -> u64 {
        t & self.params.ts_mask()
    }

    #[inline]
    pub fn eval(&self, event: &Event, slots: &Slots, reads: &[(u64, u64); 4]) -> (HwOutcome, (u64, u64)) {
        let p = &self.params;
        let ts_e = self.narrow(event.t);
        let dq = self.lut.get(slots.off_x, slots.off_y);
        let dt: [i64; 4] = std::array::from_fn(|i| hw_delta(ts_e, reads[i].0, p));
        let k: [u64; 4] = std::array::from_fn(|i| hw_k(reads[i].1, dq[i], p));
        let (pass, trace) = hw_decide(&dt, &k, self.filter_length);
        let (ts, iv) = reads[slots.own_slot];
        let update = hw_update_area(ts, iv, ts_e, self.shift, p);
        let outcome = HwOutcome {
            event: *event,
            pass,
            score: HwScore {
                num: trace.dt_c,
                den: trace.d_sum,
            },
            trace,
        };
        (outcome, update)
    }
}

/// Integer area memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HwGrid {
    pub(crate) ts: Vec<u64>,
    pub(crate) iv: Vec<u64>,
    pub(crate) active: Vec<bool>,
}

impl HwGrid {
    pub(crate) fn new(areas: usize, cfg: &FilterConfig, p: &HwParams) -> Self {
        HwGrid {
            ts: vec![cfg.init_timestamp_us & p.ts_mask(); areas],
            iv: vec![cfg.init_interval_us.min(p.iv_max()); areas],
            active: vec![false; areas],
        }
    }

    pub fn timestamp(&self, area: usize) -> u64 {
        self.ts[area]
    }

    pub fn interval(&self, area: usize) -> u64 {
        self.iv[area]
    }

    pub fn is_active(&self, area: usize) -> bool {
        self.active[area]
    }

    #[inline]
    pub(crate) fn read(&self, areas: &[usize; 4]) -> [(u64, u64); 4] {
        areas.map(|a| (self.ts[a], self.iv[a]))
    }

    /// Pseudo-event at `now` (already narrowed) for inactive areas; clears flags.
    pub(crate) fn global_update(&mut self, now: u64, shift: u32, p: &HwParams) {
        for area in 0..self.ts.len() {
            if self.active[area] {
                self.active[area] = false;
            } else {
                let (ts, iv) = hw_update_area(self.ts[area], self.iv[area], now, shift, p);
                self.ts[area] = ts;
                self.iv[area] = iv;
            }
        }
    }
}

/// Sequential (one event at a time, no pipeline hazards) integer filter.
#[derive(Debug, Clone)]
pub struct HwDifFilter {
    datapath: Datapath,
    geometry: Geometry,
    grid: HwGrid,
    clock: GlobalUpdateClock,
}

impl HwDifFilter {
    pub fn new(geometry: Geometry, cfg: FilterConfig, params: HwParams) -> Result<Self, FilterError> {
        cfg.validate()?;
        params.validate_model()?;
        if cfg.filter_length_us >= 1 << 32 {
            return Err(FilterError::Config("filter length must fit in 32 bits".into()));
        }
        let datapath = Datapath::new(geometry, &cfg, params);
        let grid = HwGrid::new(datapath.layout.areas(), &cfg, &params);
        Ok(HwDifFilter {
            datapath,
            geometry,
            grid,
            clock: GlobalUpdateClock::new(cfg.global_update_period_us),
        })
    }

    pub fn grid(&self) -> &HwGrid {
        &self.grid
    }

    pub fn params(&self) -> &HwParams {
        &self.datapath.params
    }

    /// Processes one event and returns the full datapath outcome.
    #[inline]
    pub fn process_detailed(&mut self, event: &Event) -> HwOutcome {
        let dp = &self.datapath;
        if let Some(now) = self.clock.due(event.t) {
            self.grid.global_update(dp.narrow(now), dp.shift, &dp.params);
        }
        let slots = dp.layout.slots(event.x, event.y);
        let reads = self.grid.read(&slots.areas);
        let (outcome, (ts, iv)) = dp.eval(event, &slots, &reads);
        self.grid.ts[slots.own] = ts;
        self.grid.iv[slots.own] = iv;
        self.grid.active[slots.own] = true;
        outcome
    }
}

impl EventFilter for HwDifFilter {
    #[inline]
    fn process(&mut self, event: &Event) -> ScoredEvent {
        self.process_detailed(event).scored()
    }

    fn accepts(&self, event: &Event) -> bool {
        self.geometry.contains(event.x, event.y)
    }
}

/// Filters a stream on the integer datapath.
pub fn hw_filter_stream(
    stream: &EventStream,
    cfg: &FilterConfig,
    params: &HwParams,
) -> Result<Vec<HwOutcome>, FilterError> {
    let mut filter = HwDifFilter::new(stream.geometry(), *cfg, *params)?;
    let mut out = Vec::with_capacity(stream.len());
    let mut prev = 0;
    for (index, e) in stream.events().iter().enumerate() {
        if e.t < prev {
            return Err(FilterError::Unsorted {
                index,
                t: e.t,
                prev,
            });
        }
        prev = e.t;
        out.push(filter.process_detailed(e));
    }
    Ok(out)
}

/// [`hw_filter_stream`] reduced to per-event float scores.
pub fn hw_filter_scored(
    stream: &EventStream,
    cfg: &FilterConfig,
    params: &HwParams,
) -> Result<Vec<ScoredEvent>, FilterError> {
    let mut filter = HwDifFilter::new(stream.geometry(), *cfg, *params)?;
    run_filter(&mut filter, stream.events())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> HwParams {
        HwParams::default()
    }

    #[test]
    fn lut_values() {
        assert_eq!(quantize_distance(1, 1, 2), 3); // 0.707 -> 0.75
        assert_eq!(quantize_distance(6, 8, 2), 20); // 3-4-5
        assert_eq!(quantize_distance(31, 31, 2), 88); // 21.92 -> 22.0
        let lut = DistanceLut::new(16, 2);
        // offset 7 is left of the 7.5 center: own area is column/row 2
        assert_eq!(lut.get(7, 7)[3], 3);
        assert_eq!(lut.get(7, 7)[0], 88);
        assert_eq!(lut.get(8, 8)[0], 3);
        for scale in [8, 16, 32] {
            let lut = DistanceLut::new(scale, 2);
            assert!(lut.table.iter().flatten().all(|&d| d >= 1));
        }
    }

    #[test]
    fn lut_matches_integer_rounding() {
        // q is the quantized distance iff (2q-1)^2 <= 16 n < (2q+1)^2 with n = (hx^2+hy^2)/4 * ... ;
        // in half-pixel units: d*4 = 2 sqrt(N), so (2q-1)^2 <= 16 N < (2q+1)^2.
        for hx in (1..64u64).step_by(2) {
            for hy in (1..64u64).step_by(2) {
                let n = hx * hx + hy * hy;
                let q = quantize_distance(hx as u32, hy as u32, 2) as u64;
                assert!((2 * q - 1).pow(2) <= 16 * n && 16 * n < (2 * q + 1).pow(2), "{hx} {hy}");
            }
        }
    }

    #[test]
    fn k_truncation_and_saturation() {
        assert_eq!(hw_k(1000, 9, &p()), 35);
        assert_eq!(hw_k(0, 9, &p()), 1);
        assert_eq!(hw_k((1 << 24) - 1, 88, &p()), 4095);
        let p11 = HwParams { k_sat_bits: 11, ..p() };
        let p13 = HwParams { k_sat_bits: 13, ..p() };
        assert_eq!(hw_k((1 << 24) - 1, 88, &p11), 2047);
        assert_eq!(hw_k((1 << 24) - 1, 88, &p13), 8191);
    }

    #[test]
    fn k_is_monotone() {
        let mut last = 0;
        for iv in (0..300_000u64).step_by(997) {
            let k = hw_k(iv, 17, &p());
            assert!(k >= last && (1..=4095).contains(&k));
            last = k;
        }
    }

    #[test]
    fn decide_cases() {
        let (r, t) = hw_decide(&[0; 4], &[7, 9, 11, 13], 200);
        assert!(r);
        assert_eq!(t.dt_c, 0);
        assert_eq!(t.multiplications, 11);

        let (r, t) = hw_decide(&[100, 100, 300, 300], &[50; 4], 200);
        assert!(!r);
        assert_eq!(t.f_c, t.dt_c);

        let (r, t) = hw_decide(&[10, 20, 30, 39], &[1; 4], 25);
        assert_eq!(t.d, [1; 4]);
        assert_eq!(t.dt_c, 99);
        assert_eq!(t.f_c, 100);
        assert!(r);
        assert!(!hw_decide(&[10, 20, 30, 40], &[1; 4], 25).0);
    }

    #[test]
    fn factored_products_match_direct_ones() {
        let k = [4095u64, 17, 1, 2048];
        let (_, t) = hw_decide(&[0; 4], &k, 1);
        let k = k.map(|v| v as i128);
        assert_eq!(t.d[0], k[1] * k[2] * k[3]);
        assert_eq!(t.d[1], k[0] * k[2] * k[3]);
        assert_eq!(t.d[2], k[0] * k[1] * k[3]);
        assert_eq!(t.d[3], k[0] * k[1] * k[2]);
        assert!(t.d.iter().all(|&d| d < 1 << 36));
    }

    #[test]
    fn shift_update() {
        assert_eq!(hw_update_area(1000, 400, 2000, 2, &p()).0, 1250);
        assert_eq!(hw_update_area(1000, 400, 2000, 2, &p()).1, 400 + 150);
        // fixed point for an event at the stored timestamp
        assert_eq!(hw_update_area(1000, 400, 1000, 2, &p()), (1000, 300));
        // dead band: (Ts - ts) - iv = 3 moves nothing
        assert_eq!(hw_update_area(1000, 97, 1100, 2, &p()).1, 97);
        // saturation
        let pv = HwParams { iv_bits: 10, ..p() };
        assert_eq!(hw_update_area(0, 1000, 1 << 20, 0, &pv).1, 1023);
        assert_eq!(hw_update_area(500, 3, 500, 0, &p()).1, 0);
    }

    #[test]
    fn wrapped_differences() {
        assert_eq!(wrap_signed(1 << 23, 24), -(1 << 23));
        assert_eq!(wrap_signed((1 << 23) - 1, 24), (1 << 23) - 1);
        assert_eq!(hw_delta(5, 10, &p()), -5);
        assert_eq!(hw_delta(1 << 24, 0, &p()), 0);
        assert_eq!(hw_delta(1_000_000, 0, &p()), 1_000_000);
        // stored timestamps wrap at 32 bits
        assert_eq!(hw_update_area(u32::MAX as u64 - 1, 0, 6, 0, &p()).0, 6);
    }

    #[test]
    fn score_value_respects_integer_thresholds() {
        let s = HwScore { num: 200 * 7, den: 7 };
        assert_eq!(s.value(), 200.0);
        assert!(!s.passes(200) && s.passes(201));
        let den = (1i128 << 90) + 1;
        let s = HwScore { num: 200 * den - 1, den };
        assert!(s.value() < 200.0);
        assert!(s.passes(200));
        let s = HwScore { num: -3, den: 2 };
        assert_eq!(s.value(), -1.5);
    }

    #[test]
    fn params_validation() {
        assert!(p().validate().is_ok());
        assert!(HwParams { trunc_bits: 6, ..p() }.validate().is_err());
        assert!(HwParams { k_sat_bits: 14, ..p() }.validate().is_err());
        assert!(HwParams { trunc_bits: 0, k_sat_bits: 30, ..p() }.validate_model().is_ok());
        assert!(HwParams { k_sat_bits: 31, ..p() }.validate_model().is_err());
    }

    #[test]
    fn cold_start_rejects() {
        let g = Geometry::new(64, 48);
        let s = EventStream::new(g, vec![Event::new(1_000_000, 20, 20, 1)]).unwrap();
        let cfg = FilterConfig::default();
        let out = hw_filter_stream(&s, &cfg, &p()).unwrap();
        assert!(!out[0].pass);
        assert_eq!(out[0].score.value(), 750_000.0);
    }
}
