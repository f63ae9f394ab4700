//! Shared oracles for the integration tests.

#![allow(dead_code)]

use evfilt_core::dif::ExactContext;
use evfilt_core::hw::quantize_distance;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Frequency-and-distance weighted mean of the timestamp differences,
/// `sum(C dT) / sum(C)` with `C = 1 / (I d)`, in exact rationals.
pub fn dif_score_rational(ctx: &ExactContext) -> BigRational {
    let c: Vec<BigRational> = (0..4)
        .map(|i| q(1) / q(BigInt::from(ctx.iv[i]) * ctx.dist[i]))
        .collect();
    let num: BigRational = (0..4).map(|i| &c[i] * q(ctx.dt[i])).sum();
    let den: BigRational = c.iter().sum();
    num / den
}

/// Horizontal then vertical interpolation, weights as in the separable filter.
pub fn bif_score_rational(ctx: &ExactContext) -> BigRational {
    let iv: Vec<BigRational> = ctx.iv.iter().map(|&v| q(v)).collect();
    let dt: Vec<BigRational> = ctx.dt.iter().map(|&v| q(v)).collect();
    let (dx1, dx2) = (q(ctx.hx[0]), q(ctx.hx[1]));
    let (dy1, dy2) = (q(ctx.hy[0]), q(ctx.hy[1]));
    let row = |a: &BigRational, wa: BigRational, b: &BigRational, wb: BigRational| {
        (a * &wa + b * &wb) / (wa + wb)
    };
    let top = row(&dt[0], &iv[1] * &dx2, &dt[1], &iv[0] * &dx1);
    let bot = row(&dt[2], &iv[3] * &dx2, &dt[3], &iv[2] * &dx1);
    row(&top, &iv[2] * &iv[3] * &dy2, &bot, &iv[0] * &iv[1] * &dy1)
}

pub fn passes(score: &BigRational, filter_length: u64) -> bool {
    *score < q(filter_length)
}

/// Random neighbor context: intervals in `[1, 2^24)`, half-pixel offsets of
/// a real pixel position, table-quantized distances. About half the cases put
/// every difference near `filter_length` so decisions sit on the boundary.
pub fn random_context(rng: &mut ChaCha8Rng, filter_length: u64) -> ExactContext {
    let scale = [8u32, 16, 32][rng.random_range(0..3)];
    let off_x = rng.random_range(0..scale);
    let off_y = rng.random_range(0..scale);
    let half = |off: u32| {
        let h0 = if 2 * off + 1 < scale { 2 * off + scale + 1 } else { 2 * off + 1 - scale };
        [h0, 2 * scale - h0]
    };
    let (hx, hy) = (half(off_x), half(off_y));
    let dist = [
        quantize_distance(hx[0], hy[0], 2),
        quantize_distance(hx[1], hy[0], 2),
        quantize_distance(hx[0], hy[1], 2),
        quantize_distance(hx[1], hy[1], 2),
    ];
    let iv = std::array::from_fn(|_| match rng.random_range(0..4) {
        0 => rng.random_range(1..64),
        1 => rng.random_range(1..1u64 << 24),
        _ => rng.random_range(1..200_000),
    });
    let f = filter_length as i64;
    let dt = std::array::from_fn(|_| match rng.random_range(0..3) {
        0 => rng.random_range(-(1i64 << 23)..(1 << 23)),
        1 => f + rng.random_range(-3..=3),
        _ => rng.random_range(0..4 * f),
    });
    ExactContext {
        dt,
        iv,
        dist: dist.map(u64::from),
        hx: hx.map(u64::from),
        hy: hy.map(u64::from),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
