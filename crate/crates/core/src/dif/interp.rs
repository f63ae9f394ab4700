//! Real-valued DIF and BIF scores (`Ts - T`).
//!
//! Both work on timestamp differences `dT_ij = Ts - T_ij` and return the
//! weighted mean of those differences. The mean is accumulated relative to
//! `dT_11`, so four identical differences come back bit-exact.

use thiserror::Error;

use super::grid::NeighborContext;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("slot {slot}: interval {value} is not a positive finite number")]
    Interval { slot: usize, value: f64 },
    #[error("slot {slot}: distance {value} is not a positive finite number")]
    Distance { slot: usize, value: f64 },
}

fn check(ctx: &NeighborContext) -> Result<(), ScoreError> {
    for slot in 0..4 {
        let iv = ctx.iv[slot];
        if !(iv > 0.0 && iv.is_finite()) {
            return Err(ScoreError::Interval { slot, value: iv });
        }
        let d = ctx.d[slot];
        if !(d > 0.0 && d.is_finite()) {
            return Err(ScoreError::Distance { slot, value: d });
        }
    }
    for (slot, &v) in ctx.dx.iter().chain(&ctx.dy).enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ScoreError::Distance { slot, value: v });
        }
    }
    Ok(())
}

#[inline]
fn deltas(ctx: &NeighborContext, ts_e: f64) -> [f64; 4] {
    [
        ts_e - ctx.ts[0],
        ts_e - ctx.ts[1],
        ts_e - ctx.ts[2],
        ts_e - ctx.ts[3],
    ]
}

/// Weighted mean of two values, exact when they are equal.
#[inline]
fn blend2(a: f64, wa: f64, b: f64, wb: f64) -> f64 {
    a + wb * (b - a) / (wa + wb)
}

/// Distance-and-frequency weighted score: weights `C_ij = 1 / (I_ij d_ij)`.
pub fn dif_score(ctx: &NeighborContext, ts_e: f64) -> Result<f64, ScoreError> {
    check(ctx)?;
    Ok(dif_score_unchecked(ctx, ts_e))
}

#[inline]
pub(crate) fn dif_score_unchecked(ctx: &NeighborContext, ts_e: f64) -> f64 {
    let dt = deltas(ctx, ts_e);
    let c = [
        1.0 / (ctx.iv[0] * ctx.d[0]),
        1.0 / (ctx.iv[1] * ctx.d[1]),
        1.0 / (ctx.iv[2] * ctx.d[2]),
        1.0 / (ctx.iv[3] * ctx.d[3]),
    ];
    let base = dt[0];
    let num = c[1] * (dt[1] - base) + c[2] * (dt[2] - base) + c[3] * (dt[3] - base);
    base + num / (c[0] + c[1] + c[2] + c[3])
}

/// Separable (horizontal, then vertical) frequency-weighted interpolation.
pub fn bif_score(ctx: &NeighborContext, ts_e: f64) -> Result<f64, ScoreError> {
    check(ctx)?;
    Ok(bif_score_unchecked(ctx, ts_e))
}

#[inline]
pub(crate) fn bif_score_unchecked(ctx: &NeighborContext, ts_e: f64) -> f64 {
    let dt = deltas(ctx, ts_e);
    let iv = &ctx.iv;
    let [dx1, dx2] = ctx.dx;
    let [dy1, dy2] = ctx.dy;
    // dT_1 = (dT11 I12 dx2 + dT12 I11 dx1) / (I12 dx2 + I11 dx1), same for row 2
    let top = blend2(dt[0], iv[1] * dx2, dt[1], iv[0] * dx1);
    let bot = blend2(dt[2], iv[3] * dx2, dt[3], iv[2] * dx1);
    blend2(top, iv[2] * iv[3] * dy2, bot, iv[0] * iv[1] * dy1)
}
