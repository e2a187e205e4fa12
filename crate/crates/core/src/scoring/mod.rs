//! Pass scoring: a hand-weighted linear baseline and the learned MLP.

mod mlp;
mod weights;

pub use mlp::{Dense, Gradients, QScorer};
pub use weights::{decode_weights, encode_weights, read_weights, weights_to_text, write_weights, WEIGHTS_MAGIC};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureVector, FEATURE_DIM};
use crate::search::Cacop;

/// Anything that maps a pass description to a value.
pub trait Scorer: Sync {
    fn score(&self, x: &FeatureVector) -> f64;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, x: &FeatureVector) -> f64 {
        (**self).score(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub weights: [f64; FEATURE_DIM],
}

impl Default for LinearScorer {
    /// Hand-tuned baseline: quick, open, close to goal, straight, safe.
    fn default() -> Self {
        Self {
            weights: [-1.0, 1.5, -2.0, -0.5, 1.0],
        }
    }
}

impl LinearScorer {
    pub fn new(weights: [f64; FEATURE_DIM]) -> Self {
        Self { weights }
    }
}

impl Scorer for LinearScorer {
    fn score(&self, x: &FeatureVector) -> f64 {
        self.weights.iter().zip(x.0.iter()).map(|(w, v)| w * v).sum()
    }
}

/// Scores every pass zero; every choice ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroScorer;

impl Scorer for ZeroScorer {
    fn score(&self, _: &FeatureVector) -> f64 {
        0.0
    }
}

/// Highest-scoring pass; ties go to the lowest `(action_index, receiver_id)`.
/// NaN scores never win.
pub fn select_best<'a, S: Scorer + ?Sized>(scorer: &S, cacops: &'a [Cacop]) -> Option<&'a Cacop> {
    let mut best: Option<(&Cacop, f64)> = None;
    for c in cacops {
        let s = scorer.score(&c.features);
        if s.is_nan() {
            continue;
        }
        best = match best {
            None => Some((c, s)),
            Some((b, bs)) if s > bs || (s == bs && c.key() < b.key()) => Some((c, s)),
            keep => keep,
        };
    }
    best.map(|(c, _)| c)
}

/// How the leader picks a pass from the feasible set.
///
/// Exploration only ever draws from the feasible set.
#[derive(Clone, Copy)]
pub enum Policy<'a> {
    Greedy(&'a dyn Scorer),
    EpsilonGreedy { scorer: &'a dyn Scorer, epsilon: f64 },
    Random,
}

impl Policy<'_> {
    pub fn choose<'c, R: Rng + ?Sized>(&self, cacops: &'c [Cacop], rng: &mut R) -> Option<&'c Cacop> {
        if cacops.is_empty() {
            return None;
        }
        match *self {
            Policy::Greedy(s) => select_best(s, cacops),
            Policy::EpsilonGreedy { scorer, epsilon } => {
                if rng.random::<f64>() < epsilon {
                    cacops.get(rng.random_range(0..cacops.len()))
                } else {
                    select_best(scorer, cacops)
                }
            }
            Policy::Random => cacops.get(rng.random_range(0..cacops.len())),
        }
    }
}
