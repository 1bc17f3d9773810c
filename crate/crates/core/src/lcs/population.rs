use std::collections::HashMap;

use rand::Rng;

use crate::neuronet::connectivity_stats;
use crate::real::{uniform, Real};

use super::classifier::{Classifier, ClassifierId};
use super::params::XcsfParams;

/// Macroclassifiers with O(1) lookup by id. Removal swaps the last member
/// into the hole, so member order is not stable.
#[derive(Clone, Debug, Default)]
pub struct Population<R> {
    members: Vec<Classifier<R>>,
    index: HashMap<ClassifierId, usize>,
    next_id: ClassifierId,
    micro: usize,
}

/// What [`Population::macro_merge`] did with the child.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Merge {
    Inserted(ClassifierId),
    /// An identical genome absorbed the child.
    Absorbed(ClassifierId),
}

impl Merge {
    pub fn id(self) -> ClassifierId {
        match self {
            Merge::Inserted(id) | Merge::Absorbed(id) => id,
        }
    }
}

impl<R: Real> Population<R> {
    pub fn new() -> Self {
        Population { members: Vec::new(), index: HashMap::new(), next_id: 0, micro: 0 }
    }

    /// Macroclassifier count.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sum of numerosities.
    pub fn micro(&self) -> usize {
        self.micro
    }

    pub fn next_id(&self) -> ClassifierId {
        self.next_id
    }

    pub(crate) fn set_next_id(&mut self, id: ClassifierId) {
        self.next_id = id;
    }

    pub fn alloc_id(&mut self) -> ClassifierId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn get(&self, id: ClassifierId) -> Option<&Classifier<R>> {
        self.index.get(&id).map(|&i| &self.members[i])
    }

    pub fn get_mut(&mut self, id: ClassifierId) -> Option<&mut Classifier<R>> {
        self.index.get(&id).map(|&i| &mut self.members[i])
    }

    pub fn contains(&self, id: ClassifierId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Classifier<R>> {
        self.members.iter()
    }

    pub fn members_mut(&mut self) -> &mut [Classifier<R>] {
        &mut self.members
    }

    /// Adds `cl` as its own macroclassifier. Ids must be unique.
    pub fn insert(&mut self, cl: Classifier<R>) -> ClassifierId {
        let id = cl.id;
        assert!(!self.index.contains_key(&id), "duplicate classifier id {id}");
        self.next_id = self.next_id.max(id + 1);
        self.micro += cl.numerosity as usize;
        self.index.insert(id, self.members.len());
        self.members.push(cl);
        id
    }

    /// Folds `child` into a bit-identical genome if one exists, otherwise
    /// inserts it.
    pub fn macro_merge(&mut self, child: Classifier<R>) -> Merge {
        let fp = child.fingerprint();
        if let Some(twin) = self.members.iter_mut().find(|m| m.fingerprint() == fp && m.genome == child.genome) {
            twin.numerosity += child.numerosity;
            self.micro += child.numerosity as usize;
            return Merge::Absorbed(twin.id);
        }
        Merge::Inserted(self.insert(child))
    }

    pub fn remove(&mut self, id: ClassifierId) -> Option<Classifier<R>> {
        let i = self.index.remove(&id)?;
        let cl = self.members.swap_remove(i);
        if let Some(moved) = self.members.get(i) {
            self.index.insert(moved.id, i);
        }
        self.micro -= cl.numerosity as usize;
        Some(cl)
    }

    /// Average fitness per microclassifier.
    pub fn mean_fitness(&self) -> R {
        if self.micro == 0 {
            return R::zero();
        }
        let total: R = self.members.iter().map(|c| c.fitness).sum();
        total / R::lit(self.micro as f64)
    }

    /// Deletion vote of every member, in member order.
    pub fn deletion_votes(&self, params: &XcsfParams<R>) -> Vec<R> {
        let mean = self.mean_fitness();
        let tiny = R::min_positive_value();
        self.members
            .iter()
            .map(|c| {
                let num = R::lit(c.numerosity as f64);
                let vote = c.as_size * num;
                let per_micro = c.fitness / num;
                if c.experience > params.theta_del && per_micro < params.delta * mean {
                    vote * mean / per_micro.max(tiny)
                } else {
                    vote
                }
            })
            .collect()
    }

    /// Roulette-deletes one microclassifier. Returns the id and whether
    /// the macroclassifier disappeared.
    pub fn delete_one<G: Rng + ?Sized>(&mut self, params: &XcsfParams<R>, rng: &mut G) -> Option<(ClassifierId, bool)> {
        if self.members.is_empty() {
            return None;
        }
        let votes = self.deletion_votes(params);
        let i = roulette(&votes, rng);
        let cl = &mut self.members[i];
        let id = cl.id;
        if cl.numerosity > 1 {
            cl.numerosity -= 1;
            self.micro -= 1;
            Some((id, false))
        } else {
            self.remove(id);
            Some((id, true))
        }
    }

    /// Deletes until the microclassifier count is within the cap. Returns
    /// the ids of macroclassifiers that vanished.
    pub fn enforce_cap<G: Rng + ?Sized>(&mut self, params: &XcsfParams<R>, rng: &mut G) -> Vec<ClassifierId> {
        let mut gone = Vec::new();
        while self.micro > params.max_micro {
            match self.delete_one(params, rng) {
                Some((id, true)) => gone.push(id),
                Some(_) => {}
                None => break,
            }
        }
        gone
    }

    pub fn stats(&self) -> PopulationStats<R> {
        let mut s = PopulationStats { macro_count: self.len(), micro_count: self.micro, ..Default::default() };
        if self.members.is_empty() {
            return s;
        }
        let micro = R::lit(self.micro as f64);
        let macro_n = R::lit(self.members.len() as f64);
        for c in &self.members {
            let num = R::lit(c.numerosity as f64);
            let sa = c.self_adapt.as_array();
            for k in 0..4 {
                s.adapt_micro[k] += sa[k] * num / micro;
                s.adapt_macro[k] += sa[k] / macro_n;
            }
            let conn = connectivity_stats(&c.genome);
            s.connected_hidden += R::lit(conn.connected_hidden as f64) * num / micro;
            s.enabled_fraction += conn.enabled_fraction * num / micro;
            s.hidden_nodes += R::lit(c.genome.hidden_count() as f64) * num / micro;
        }
        s
    }
}

/// Population-wide averages. `_micro` fields weight each macroclassifier
/// by numerosity; `_macro` fields weight them equally.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PopulationStats<R> {
    pub macro_count: usize,
    pub micro_count: usize,
    /// `[mu, psi, omega, tau]`.
    pub adapt_micro: [R; 4],
    pub adapt_macro: [R; 4],
    pub connected_hidden: R,
    pub enabled_fraction: R,
    pub hidden_nodes: R,
}

/// Index drawn with probability proportional to `weights`. Falls back to
/// a uniform draw when the weights sum to zero or are not finite.
pub fn roulette<R: Real, G: Rng + ?Sized>(weights: &[R], rng: &mut G) -> usize {
    debug_assert!(!weights.is_empty());
    let total: R = weights.iter().copied().filter(|w| *w > R::zero()).sum();
    if !(total > R::zero()) || !total.is_finite() {
        return rng.random_range(0..weights.len());
    }
    let target = uniform(rng, R::zero(), total);
    let mut acc = R::zero();
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > R::zero() {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}
