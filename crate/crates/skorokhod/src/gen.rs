//! Deterministic random generators for piecewise data, used by the
//! randomized invariant suites and the demo tooling.

use crate::piecewise::{CadlagFunction, CadlagNode, Homeomorphism, TimeChange};
use crate::turbo::Turbofunction;

/// SplitMix64: tiny, seedable, reproducible across platforms.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

fn sorted_interior_times(rng: &mut Rng, count: usize) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..count).map(|_| rng.range(0.05, 0.95)).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    ts
}

/// Random step function with at most `max_segments` constant pieces,
/// values in [-1, 1].
pub fn random_step(rng: &mut Rng, max_segments: usize) -> CadlagFunction {
    let segments = 1 + rng.below(max_segments.max(1));
    let breaks = sorted_interior_times(rng, segments - 1);
    let values: Vec<f64> = (0..breaks.len() + 1).map(|_| rng.range(-1.0, 1.0)).collect();
    CadlagFunction::step(&breaks, &values).expect("generated step data is valid")
}

/// Random step function with node times restricted to multiples of `1/grid`.
pub fn random_step_on_grid(rng: &mut Rng, max_segments: usize, grid: usize) -> CadlagFunction {
    let segments = 1 + rng.below(max_segments.max(1));
    let mut breaks: Vec<f64> = Vec::new();
    for _ in 0..segments - 1 {
        let k = 1 + rng.below(grid - 1);
        breaks.push(k as f64 / grid as f64);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let values: Vec<f64> = (0..breaks.len() + 1).map(|_| rng.range(-1.0, 1.0)).collect();
    CadlagFunction::step(&breaks, &values).expect("generated step data is valid")
}

/// Random piecewise-linear càdlàg function with occasional jumps.
pub fn random_pl(rng: &mut Rng, max_nodes: usize) -> CadlagFunction {
    let interior = rng.below(max_nodes.max(1));
    let mut times = sorted_interior_times(rng, interior);
    times.insert(0, 0.0);
    times.push(1.0);
    let mut nodes = Vec::with_capacity(times.len());
    let mut prev = rng.range(-1.0, 1.0);
    for (i, &t) in times.iter().enumerate() {
        let left = prev;
        let right = if i > 0 && rng.next_f64() < 0.3 {
            rng.range(-1.0, 1.0) // jump
        } else {
            left
        };
        nodes.push(CadlagNode::new(t, left, right));
        prev = rng.range(-1.0, 1.0);
    }
    CadlagFunction::new(nodes).expect("generated node data is valid")
}

/// Random continuous non-decreasing time change, possibly with flat pieces.
pub fn random_timechange(rng: &mut Rng, max_nodes: usize) -> TimeChange {
    let interior = rng.below(max_nodes.max(1));
    let mut times = sorted_interior_times(rng, interior);
    times.insert(0, 0.0);
    times.push(1.0);
    // non-decreasing values via normalized increments, some of them zero
    let mut incr: Vec<f64> = Vec::with_capacity(times.len() - 1);
    for _ in 0..times.len() - 1 {
        incr.push(if rng.next_f64() < 0.3 { 0.0 } else { rng.range(0.1, 1.0) });
    }
    let total: f64 = incr.iter().sum();
    let mut nodes = vec![(0.0, 0.0)];
    let mut acc = 0.0;
    for (i, &d) in incr.iter().enumerate() {
        acc += if total > 0.0 { d / total } else { 0.0 };
        nodes.push((times[i + 1], acc.min(1.0)));
    }
    nodes.last_mut().unwrap().1 = 1.0;
    TimeChange::new(nodes).expect("generated time change is valid")
}

/// Random piecewise-linear homeomorphism of [0, 1].
pub fn random_homeo(rng: &mut Rng, max_nodes: usize) -> Homeomorphism {
    let interior = rng.below(max_nodes.max(1));
    let xs = sorted_interior_times(rng, interior);
    let mut ys: Vec<f64> = (0..xs.len()).map(|_| rng.range(0.02, 0.98)).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let n = xs.len().min(ys.len());
    let mut nodes = vec![(0.0, 0.0)];
    nodes.extend(xs[..n].iter().zip(&ys[..n]).map(|(&x, &y)| (x, y)));
    nodes.push((1.0, 1.0));
    Homeomorphism::new(nodes).expect("generated homeomorphism is valid")
}

/// Random turbofunction pairing a random PL graph with a random time change.
pub fn random_turbo(rng: &mut Rng, max_nodes: usize) -> Turbofunction {
    let f = random_pl(rng, max_nodes);
    let sigma = random_timechange(rng, max_nodes);
    Turbofunction::new(f, sigma)
}
