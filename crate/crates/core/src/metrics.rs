//! Threshold sweeps over filter scores.
//!
//! An event passes a threshold `theta` when `score < theta`. Genuine events
//! (polarity 0/1) are the positive class. Sweeping `theta` over every distinct
//! score plus the two infinities gives one ROC (and PR) point per distinct
//! score; tied scores move both rates at once, which the trapezoid credits
//! with half the area, as for random ordering.

use std::cmp::Ordering;

use thiserror::Error;

use crate::events::EventStream;
use crate::filter::ScoredEvent;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("need both classes, got {signal} signal and {noise} noise events")]
    SingleClass { signal: usize, noise: usize },
    #[error("score of event {index} is not finite")]
    NonFiniteScore { index: usize },
    #[error("stability needs at least two AUROC values")]
    TooFewValues,
    #[error("window length must be positive")]
    ZeroWindow,
}

/// ROC points `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auroc: f64,
}

/// PR points `(recall, precision)`, starting at `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<(f64, f64)>,
    pub auprc: f64,
}

struct Sweep {
    /// Cumulative `(passed_signal, passed_noise)` after each distinct score, ascending.
    steps: Vec<(usize, usize)>,
    signal: usize,
    noise: usize,
}

fn sweep(scored: &[(f64, bool)]) -> Result<Sweep, MetricsError> {
    if let Some(index) = scored.iter().position(|(s, _)| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore { index });
    }
    let signal = scored.iter().filter(|(_, pos)| *pos).count();
    let noise = scored.len() - signal;
    if signal == 0 || noise == 0 {
        return Err(MetricsError::SingleClass { signal, noise });
    }
    let mut sorted = scored.to_vec();
    sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut steps = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (i, &(score, pos)) in sorted.iter().enumerate() {
        if pos {
            tp += 1;
        } else {
            fp += 1;
        }
        let group_ends = sorted
            .get(i + 1)
            .is_none_or(|next| next.0.total_cmp(&score) != Ordering::Equal);
        if group_ends {
            steps.push((tp, fp));
        }
    }
    Ok(Sweep { steps, signal, noise })
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum()
}

fn labeled(scored: &[ScoredEvent]) -> Vec<(f64, bool)> {
    scored.iter().map(|s| (s.score, s.is_signal())).collect()
}

/// ROC from `(score, is_signal)` pairs.
pub fn roc_from_labeled(scored: &[(f64, bool)]) -> Result<RocCurve, MetricsError> {
    let Sweep { steps, signal, noise } = sweep(scored)?;
    let mut points = Vec::with_capacity(steps.len() + 1);
    points.push((0.0, 0.0));
    points.extend(
        steps
            .iter()
            .map(|&(tp, fp)| (fp as f64 / noise as f64, tp as f64 / signal as f64)),
    );
    let auroc = trapezoid(&points);
    Ok(RocCurve { points, auroc })
}

pub fn roc_from_scores(scored: &[ScoredEvent]) -> Result<RocCurve, MetricsError> {
    roc_from_labeled(&labeled(scored))
}

/// Precision-recall curve from `(score, is_signal)` pairs.
pub fn pr_from_labeled(scored: &[(f64, bool)]) -> Result<PrCurve, MetricsError> {
    let Sweep { steps, signal, .. } = sweep(scored)?;
    let mut points = Vec::with_capacity(steps.len() + 1);
    points.push((0.0, 1.0));
    points.extend(
        steps
            .iter()
            .map(|&(tp, fp)| (tp as f64 / signal as f64, tp as f64 / (tp + fp) as f64)),
    );
    let auprc = trapezoid(&points);
    Ok(PrCurve { points, auprc })
}

pub fn auprc_from_scores(scored: &[ScoredEvent]) -> Result<PrCurve, MetricsError> {
    pr_from_labeled(&labeled(scored))
}

/// Drops events before `skip_us` (warm-up exclusion).
pub fn skip_warmup(scored: &[ScoredEvent], skip_us: u64) -> Vec<ScoredEvent> {
    scored.iter().filter(|s| s.event.t >= skip_us).copied().collect()
}

/// Fraction of pixels without any event, per `window_us` window, summarized as
/// `(mean, median)`. Windows run from time 0 through the last event.
pub fn sparsity(stream: &EventStream, window_us: u64) -> Result<(f64, f64), MetricsError> {
    if window_us == 0 {
        return Err(MetricsError::ZeroWindow);
    }
    let Some(end) = stream.end_time() else {
        return Ok((1.0, 1.0));
    };
    let g = stream.geometry();
    let pixels = g.pixels();
    let windows = (end / window_us + 1) as usize;
    let mut seen_in = vec![u64::MAX; pixels];
    let mut occupied = vec![0usize; windows];
    for e in stream.events() {
        let w = e.t / window_us;
        let px = e.y as usize * g.width as usize + e.x as usize;
        if seen_in[px] != w {
            seen_in[px] = w;
            occupied[w as usize] += 1;
        }
    }
    let mut values: Vec<f64> = occupied
        .iter()
        .map(|&o| 1.0 - o as f64 / pixels as f64)
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_unstable_by(f64::total_cmp);
    let mid = values.len() / 2;
    let median = if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) * 0.5
    };
    Ok((mean, median))
}

/// Relative AUROC spread across noise levels, in percent of the best value.
pub fn stability(aurocs: &[f64]) -> Result<f64, MetricsError> {
    if aurocs.len() < 2 {
        return Err(MetricsError::TooFewValues);
    }
    let max = aurocs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = aurocs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((max - min) / max * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, Geometry};

    fn pairs(signal: &[f64], noise: &[f64]) -> Vec<(f64, bool)> {
        signal
            .iter()
            .map(|&s| (s, true))
            .chain(noise.iter().map(|&s| (s, false)))
            .collect()
    }

    #[test]
    fn separable() {
        let p = pairs(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(roc_from_labeled(&p).unwrap().auroc, 1.0);
        assert_eq!(pr_from_labeled(&p).unwrap().auprc, 1.0);
    }

    #[test]
    fn uninformative() {
        let p = pairs(&[5.0; 3], &[5.0; 7]);
        let roc = roc_from_labeled(&p).unwrap();
        assert_eq!(roc.auroc, 0.5);
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        // single sweep point at prevalence; the (0, 1) anchor adds the rest
        let pr = pr_from_labeled(&p).unwrap();
        assert!((pr.auprc - (1.0 + 0.3) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn hand_case() {
        // thresholds: pass {1}, {1,2}, {1,2,3}, all
        // ROC: (0,0) (0,.5) (.5,.5) (.5,1) (1,1) -> 0.75
        let p = pairs(&[1.0, 3.0], &[2.0, 4.0]);
        let roc = roc_from_labeled(&p).unwrap();
        assert_eq!(roc.points, vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]);
        assert_eq!(roc.auroc, 0.75);
        // PR: (0,1) (.5,1) (.5,.5) (1,2/3) (1,.5) -> 0.5 + 0.25 * (0.5 + 2/3)
        let pr = pr_from_labeled(&p).unwrap();
        assert!((pr.auprc - (0.5 + 0.25 * (0.5 + 2.0 / 3.0))).abs() < 1e-15);
    }

    #[test]
    fn single_class_and_non_finite() {
        assert_eq!(
            roc_from_labeled(&pairs(&[1.0], &[])).unwrap_err(),
            MetricsError::SingleClass { signal: 1, noise: 0 }
        );
        assert_eq!(
            roc_from_labeled(&pairs(&[1.0, f64::NAN], &[1.0])).unwrap_err(),
            MetricsError::NonFiniteScore { index: 1 }
        );
    }

    #[test]
    fn flipped_labels_complement() {
        let p = pairs(&[1.0, 3.0, 3.0, 7.0, 2.5], &[2.0, 3.0, 4.0, 9.0]);
        let flipped: Vec<_> = p.iter().map(|&(s, l)| (s, !l)).collect();
        let a = roc_from_labeled(&p).unwrap().auroc;
        let b = roc_from_labeled(&flipped).unwrap().auroc;
        assert!((a + b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sparsity_cases() {
        let g = Geometry::new(2, 2);
        let empty = EventStream::empty(g).unwrap();
        assert_eq!(sparsity(&empty, 20_000).unwrap(), (1.0, 1.0));
        let events = (0..5).map(|w| Event::new(w * 20_000 + 7, 1, 0, 0)).collect();
        let one = EventStream::new(g, events).unwrap();
        assert_eq!(sparsity(&one, 20_000).unwrap(), (0.75, 0.75));
        // a skipped window counts as fully sparse
        let events = vec![Event::new(0, 0, 0, 0), Event::new(1, 1, 1, 0), Event::new(40_000, 0, 0, 0)];
        let gap = EventStream::new(g, events).unwrap();
        let (mean, median) = sparsity(&gap, 20_000).unwrap();
        assert!((mean - (0.5 + 1.0 + 0.75) / 3.0).abs() < 1e-15);
        assert_eq!(median, 0.75);
        assert_eq!(sparsity(&gap, 0), Err(MetricsError::ZeroWindow));
    }

    #[test]
    fn stability_cases() {
        assert_eq!(stability(&[0.9, 0.9, 0.9]).unwrap(), 0.0);
        assert!((stability(&[0.90, 0.891]).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(stability(&[0.9]), Err(MetricsError::TooFewValues));
    }

    fn arb_pairs() -> impl proptest::strategy::Strategy<Value = Vec<(f64, bool)>> {
        use proptest::prelude::*;
        proptest::collection::vec((0u32..40, any::<bool>()), 2..200)
            .prop_map(|v| v.into_iter().map(|(s, l)| (s as f64, l)).collect::<Vec<_>>())
            .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
    }

    /// Random-tie-breaking rank statistic.
    fn mann_whitney(p: &[(f64, bool)]) -> f64 {
        let (mut wins, mut n) = (0.0, 0.0);
        for a in p.iter().filter(|x| x.1) {
            for b in p.iter().filter(|x| !x.1) {
                wins += if a.0 < b.0 { 1.0 } else if a.0 == b.0 { 0.5 } else { 0.0 };
                n += 1.0;
            }
        }
        wins / n
    }

    proptest::proptest! {
        #[test]
        fn auroc_is_rank_statistic(p in arb_pairs()) {
            let a = roc_from_labeled(&p).unwrap().auroc;
            proptest::prop_assert!((a - mann_whitney(&p)).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_monotone_maps(p in arb_pairs()) {
            let mapped: Vec<_> = p.iter().map(|&(s, l)| ((s * 0.37).exp() + 3.0, l)).collect();
            proptest::prop_assert_eq!(roc_from_labeled(&p).unwrap().auroc, roc_from_labeled(&mapped).unwrap().auroc);
            proptest::prop_assert_eq!(pr_from_labeled(&p).unwrap().auprc, pr_from_labeled(&mapped).unwrap().auprc);
        }

        #[test]
        fn curves_are_monotone(p in arb_pairs()) {
            let roc = roc_from_labeled(&p).unwrap();
            proptest::prop_assert_eq!(*roc.points.last().unwrap(), (1.0, 1.0));
            for w in roc.points.windows(2) {
                proptest::prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
            let pr = pr_from_labeled(&p).unwrap();
            proptest::prop_assert!(pr.points.windows(2).all(|w| w[1].0 >= w[0].0));
            proptest::prop_assert!((0.0..=1.0).contains(&pr.auprc));
        }
    }
}
