//! Edit latency measurement.

use std::time::{Duration, Instant};

use pcg_core::fixtures::random_delta;
use pcg_core::{evaluate, Bindings, EvalError, EvalSession, Graph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyStats {
    pub samples: usize,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[Duration], q: f64) -> Duration {
    if sorted.is_empty() {
        return Duration::ZERO;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn stats(mut samples: Vec<Duration>) -> LatencyStats {
    samples.sort();
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    LatencyStats {
        samples: samples.len(),
        median_ms: ms(percentile(&samples, 0.5)),
        p99_ms: ms(percentile(&samples, 0.99)),
        max_ms: ms(samples.last().copied().unwrap_or_default()),
    }
}

/// Times `reevaluate` over `count` random single-parameter deltas.
pub fn edit_latency(graph: &Graph, count: usize, seed: u64) -> Result<LatencyStats, EvalError> {
    let mut session = EvalSession::new(graph.clone(), &Bindings::new())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(count);
    if graph.params.is_empty() {
        return Ok(stats(samples));
    }
    while samples.len() < count {
        let delta = random_delta(&mut rng, graph, 1);
        if delta.is_empty() {
            continue;
        }
        let started = Instant::now();
        session.reevaluate(&delta)?;
        samples.push(started.elapsed());
    }
    Ok(stats(samples))
}

/// Times full evaluation from scratch at the defaults.
pub fn fresh_latency(graph: &Graph, runs: usize) -> Result<LatencyStats, EvalError> {
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let started = Instant::now();
        evaluate(graph, &Bindings::new())?;
        samples.push(started.elapsed());
    }
    Ok(stats(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank() {
        let d: Vec<Duration> = (1..=100).map(Duration::from_millis).collect();
        assert_eq!(percentile(&d, 0.5), Duration::from_millis(50));
        assert_eq!(percentile(&d, 0.99), Duration::from_millis(99));
        assert_eq!(percentile(&d[..1], 0.99), Duration::from_millis(1));
        assert_eq!(percentile(&[], 0.5), Duration::ZERO);
    }
}
