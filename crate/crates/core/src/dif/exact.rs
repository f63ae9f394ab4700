//! Division-free decisions in exact integer arithmetic.
//!
//! Multiplying the comparison `F_L > Ts - T` through by the (positive)
//! interpolation denominators turns it into one integer comparison
//! `F_c > dT_c`. Products reach well past 128 bits for 24-bit intervals, so
//! everything here runs on [`BigInt`].

use num_bigint::BigInt;

use super::grid::NeighborContext;

/// Integer inputs of a division-free decision.
///
/// Distances only need a common unit: `dist` is typically in quarter pixels
/// (the quantized distance table), `hx`/`hy` in half pixels. Every weight is
/// homogeneous in its distance factor, so the unit cancels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactContext {
    /// `Ts - T_ij` per slot `[11, 12, 21, 22]`.
    pub dt: [i64; 4],
    pub iv: [u64; 4],
    pub dist: [u64; 4],
    pub hx: [u64; 2],
    pub hy: [u64; 2],
}

impl ExactContext {
    /// Rounds a real-valued context to integers: timestamps and intervals to
    /// the nearest microsecond (intervals at least 1), distances to
    /// `2^-frac_bits` pixels (at least one unit), offsets to half pixels.
    pub fn quantize(ctx: &NeighborContext, ts_e: u64, frac_bits: u32) -> Self {
        let unit = (1u64 << frac_bits) as f64;
        let dt = |k: usize| ts_e as i64 - ctx.ts[k].round() as i64;
        let iv = |k: usize| (ctx.iv[k].round() as u64).max(1);
        let dist = |k: usize| ((ctx.d[k] * unit).round() as u64).max(1);
        ExactContext {
            dt: [dt(0), dt(1), dt(2), dt(3)],
            iv: [iv(0), iv(1), iv(2), iv(3)],
            dist: [dist(0), dist(1), dist(2), dist(3)],
            hx: [(ctx.dx[0] * 2.0).round() as u64, (ctx.dx[1] * 2.0).round() as u64],
            hy: [(ctx.dy[0] * 2.0).round() as u64, (ctx.dy[1] * 2.0).round() as u64],
        }
    }
}

/// Intermediates of the DIF decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifTrace {
    /// `I_ij d_ij`, the reciprocals of the weights `C_ij`.
    pub c_inv: [BigInt; 4],
    /// `D_ij`: product of the three other slots' `I d`.
    pub d: [BigInt; 4],
    pub d_sum: BigInt,
    pub f_c: BigInt,
    pub dt_c: BigInt,
    pub r: bool,
}

/// Intermediates of the BIF decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BifTrace {
    pub b11: BigInt,
    pub b12: BigInt,
    pub b21: BigInt,
    pub b22: BigInt,
    pub s_top: BigInt,
    pub s_bot: BigInt,
    pub b_top: BigInt,
    pub b_bot: BigInt,
    pub s_all: BigInt,
    pub f_c: BigInt,
    pub dt_c: BigInt,
    pub r: bool,
}

/// DIF pass decision without division: `F_L * D_sum > sum(dT_ij * D_ij)`.
pub fn dif_decide_division_free(ctx: &ExactContext, filter_length: u64) -> (bool, DifTrace) {
    let k: [BigInt; 4] = std::array::from_fn(|i| BigInt::from(ctx.iv[i]) * ctx.dist[i]);
    let d = [
        &k[1] * &k[2] * &k[3],
        &k[0] * &k[2] * &k[3],
        &k[0] * &k[1] * &k[3],
        &k[0] * &k[1] * &k[2],
    ];
    let d_sum = (&d[0] + &d[1]) + (&d[2] + &d[3]);
    let f_c = &d_sum * filter_length;
    let dt_c = (&d[0] * ctx.dt[0] + &d[1] * ctx.dt[1]) + (&d[2] * ctx.dt[2] + &d[3] * ctx.dt[3]);
    let r = f_c > dt_c;
    (
        r,
        DifTrace {
            c_inv: k,
            d,
            d_sum,
            f_c,
            dt_c,
            r,
        },
    )
}

/// BIF pass decision without division:
/// `F_L S_all S_top S_bot > (dT11 B11 + dT12 B12) S_bot B_top + (dT21 B21 + dT22 B22) S_top B_bot`.
pub fn bif_decide_division_free(ctx: &ExactContext, filter_length: u64) -> (bool, BifTrace) {
    let iv: [BigInt; 4] = ctx.iv.map(BigInt::from);
    let [dx1, dx2] = ctx.hx;
    let [dy1, dy2] = ctx.hy;
    let b11 = &iv[1] * dx2;
    let b12 = &iv[0] * dx1;
    let b21 = &iv[3] * dx2;
    let b22 = &iv[2] * dx1;
    let s_top = &b11 + &b12;
    let s_bot = &b21 + &b22;
    let b_top = &iv[2] * &iv[3] * dy2;
    let b_bot = &iv[0] * &iv[1] * dy1;
    let s_all = &b_top + &b_bot;
    let f_c = &s_all * &s_top * &s_bot * filter_length;
    let dt_c = (&b11 * ctx.dt[0] + &b12 * ctx.dt[1]) * &s_bot * &b_top
        + (&b21 * ctx.dt[2] + &b22 * ctx.dt[3]) * &s_top * &b_bot;
    let r = f_c > dt_c;
    (
        r,
        BifTrace {
            b11,
            b12,
            b21,
            b22,
            s_top,
            s_bot,
            b_top,
            b_bot,
            s_all,
            f_c,
            dt_c,
            r,
        },
    )
}
