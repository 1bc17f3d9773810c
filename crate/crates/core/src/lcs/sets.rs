use rand::Rng;

use crate::real::Real;

use super::classifier::ClassifierId;
use super::population::{roulette, Population};

/// Matching classifiers and the action each computed for the state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchSet {
    pub members: Vec<(ClassifierId, usize)>,
}

impl MatchSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn advocates(&self, action: usize) -> impl Iterator<Item = ClassifierId> + '_ {
        self.members.iter().filter(move |m| m.1 == action).map(|m| m.0)
    }

    /// Actions in `0..actions` with no advocate.
    pub fn missing_actions(&self, actions: usize) -> Vec<usize> {
        let mut seen = vec![false; actions];
        for &(_, a) in &self.members {
            seen[a] = true;
        }
        (0..actions).filter(|&a| !seen[a]).collect()
    }

    pub fn action_set(&self, action: usize) -> ActionSet {
        ActionSet { action, members: self.advocates(action).collect() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionSet {
    pub action: usize,
    pub members: Vec<ClassifierId>,
}

impl ActionSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Fitness-weighted prediction per action; `None` where no classifier
/// advocates the action.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionArray<R> {
    pub entries: Vec<Option<R>>,
}

impl<R: Real> PredictionArray<R> {
    /// Built from `(action, fitness, prediction)` triples.
    pub fn from_votes(actions: usize, votes: impl IntoIterator<Item = (usize, R, R)>) -> Self {
        let mut num = vec![R::zero(); actions];
        let mut den = vec![R::zero(); actions];
        let mut plain = vec![R::zero(); actions];
        let mut count = vec![0usize; actions];
        for (a, f, p) in votes {
            num[a] += f * p;
            den[a] += f;
            plain[a] += p;
            count[a] += 1;
        }
        let entries = (0..actions)
            .map(|a| {
                if count[a] == 0 {
                    None
                } else if den[a] > R::zero() {
                    Some(num[a] / den[a])
                } else {
                    // every advocate's fitness underflowed: plain mean
                    Some(plain[a] / R::lit(count[a] as f64))
                }
            })
            .collect();
        PredictionArray { entries }
    }

    pub fn max(&self) -> Option<R> {
        self.entries.iter().flatten().copied().reduce(|a, b| if b > a { b } else { a })
    }

    /// Highest entry, lowest index on ties.
    pub fn best_action(&self) -> Option<usize> {
        let mut best: Option<(usize, R)> = None;
        for (a, e) in self.entries.iter().enumerate() {
            if let Some(v) = *e {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((a, v));
                }
            }
        }
        best.map(|(a, _)| a)
    }
}

/// Builds the prediction array for `mset` on `state`.
pub fn build_prediction_array<R: Real>(
    pop: &Population<R>,
    mset: &MatchSet,
    state: &[R],
    x0: R,
    actions: usize,
) -> PredictionArray<R> {
    PredictionArray::from_votes(
        actions,
        mset.members.iter().filter_map(|&(id, a)| {
            let cl = pop.get(id)?;
            let p = cl.prediction(x0, state).expect("state length checked at matching");
            Some((a, cl.fitness, p))
        }),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectMode {
    /// Roulette over entries shifted so the smallest gets weight zero.
    Explore,
    /// Greedy, lowest index on ties.
    Exploit,
}

pub fn select_action<R: Real, G: Rng + ?Sized>(pa: &PredictionArray<R>, mode: SelectMode, rng: &mut G) -> Option<usize> {
    match mode {
        SelectMode::Exploit => pa.best_action(),
        SelectMode::Explore => {
            let present: Vec<(usize, R)> = pa.entries.iter().enumerate().filter_map(|(a, e)| e.map(|v| (a, v))).collect();
            if present.is_empty() {
                return None;
            }
            let min = present.iter().map(|p| p.1).fold(R::infinity(), R::min);
            let weights: Vec<R> = present.iter().map(|p| p.1 - min).collect();
            Some(present[roulette(&weights, rng)].0)
        }
    }
}
