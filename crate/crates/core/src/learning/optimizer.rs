//! AdaGrad with lazy L1 proximal truncation.
//!
//! Each coordinate keeps a squared-gradient accumulator; its step size is
//! `eta / (delta + sqrt(accumulated))`. The L1 penalty is applied as a
//! soft-threshold after every gradient step, but lazily: a coordinate that
//! goes untouched for `k` steps is shrunk `k` times (at its current rate)
//! the next time it is read or updated, so sparse updates stay cheap while
//! idle weights still decay toward zero.

use crate::features::FeatureVector;

#[derive(Debug, Clone)]
pub struct AdaGradL1 {
    eta: f64,
    delta: f64,
    l1: f64,
    weights: Vec<f64>,
    accum: Vec<f64>,
    /// Step at which each coordinate last had its shrinkage applied.
    touched: Vec<u64>,
    step: u64,
}

impl AdaGradL1 {
    pub fn new(dim: usize, eta: f64, delta: f64, l1: f64) -> AdaGradL1 {
        AdaGradL1 {
            eta,
            delta,
            l1,
            weights: vec![0.0; dim],
            accum: vec![0.0; dim],
            touched: vec![0; dim],
            step: 0,
        }
    }

    fn rate(&self, i: usize) -> f64 {
        self.eta / (self.delta + self.accum[i].sqrt())
    }

    /// Applies the shrinkage a coordinate accumulated while untouched.
    fn catch_up(&mut self, i: usize) {
        let pending = self.step - self.touched[i];
        self.touched[i] = self.step;
        if pending == 0 || self.l1 == 0.0 || self.weights[i] == 0.0 {
            return;
        }
        let shrink = pending as f64 * self.rate(i) * self.l1;
        let w = self.weights[i];
        self.weights[i] = w.signum() * (w.abs() - shrink).max(0.0);
    }

    /// Current score of a feature vector, with pending shrinkage settled
    /// on every coordinate it reads.
    pub fn score(&mut self, fv: &FeatureVector) -> f64 {
        fv.pairs()
            .iter()
            .map(|&(i, v)| {
                self.catch_up(i as usize);
                self.weights[i as usize] * v
            })
            .sum()
    }

    /// One subgradient step: `weights[i] -= rate(i) * g` for every `(i, g)`
    /// pair, followed by one soft-threshold at the same rate. Pairs must
    /// not repeat a coordinate.
    pub fn apply_gradient(&mut self, gradient: &[(u32, f64)]) {
        for &(i, _) in gradient {
            self.catch_up(i as usize);
        }
        self.step += 1;
        for &(i, g) in gradient {
            let i = i as usize;
            self.accum[i] += g * g;
            let rate = self.rate(i);
            let moved = self.weights[i] - rate * g;
            self.weights[i] = moved.signum() * (moved.abs() - rate * self.l1).max(0.0);
            self.touched[i] = self.step;
        }
    }

    /// Settles all pending shrinkage and returns the final weights.
    pub fn finish(mut self) -> Vec<f64> {
        for i in 0..self.weights.len() {
            self.catch_up(i);
        }
        self.weights
    }
}
