use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::envs::ActionCodebook;
use crate::neuronet::{input_signature, random_genome, GenomeInit, LifParams, NetError, Representation};
use crate::real::Real;

use super::classifier::{Classifier, ClassifierId, StatePolicy};
use super::ga;
use super::params::{SelfAdaptive, XcsfParams};
use super::population::{Merge, Population};
use super::sets::{build_prediction_array, ActionSet, MatchSet, PredictionArray};
use super::update::update_action_set;
use super::LcsError;

/// Below this many members uncached matching runs serially.
const PAR_MATCH_MIN: usize = 256;

/// Distinct input signatures remembered before caching stops growing.
const MAX_SIGNATURES: usize = 4096;

/// An XCSF learner bound to one environment's input size and codebook.
#[derive(Clone, Debug)]
pub struct Xcsf<R> {
    pub pop: Population<R>,
    pub params: XcsfParams<R>,
    /// Changing this after matching has begun requires
    /// [`Xcsf::clear_match_caches`].
    pub lif: LifParams<R>,
    pub representation: Representation,
    pub genome_init: GenomeInit<R>,
    /// Upper bounds for the rates drawn at covering.
    pub adapt_init: SelfAdaptive<R>,
    pub input_count: usize,
    pub codebook: ActionCodebook,
    pub state_policy: StatePolicy,
    /// GA clock.
    pub time: u64,
    state_resets: u64,
    signatures: HashMap<Vec<u64>, usize>,
}

impl<R: Real> Xcsf<R> {
    pub fn new(
        params: XcsfParams<R>,
        lif: LifParams<R>,
        representation: Representation,
        input_count: usize,
        codebook: ActionCodebook,
    ) -> Self {
        Xcsf {
            pop: Population::new(),
            params,
            lif,
            representation,
            genome_init: GenomeInit::default(),
            adapt_init: SelfAdaptive::splat(R::one()),
            input_count,
            codebook,
            state_policy: StatePolicy::ResetEachActivation,
            time: 0,
            state_resets: 0,
            signatures: HashMap::new(),
        }
    }

    pub fn actions(&self) -> usize {
        self.codebook.action_count()
    }

    /// Returns every membrane to the bootstrap potential.
    pub fn reset_states(&mut self) {
        let lif = self.lif;
        for cl in self.pop.members_mut() {
            cl.state.reset(&lif);
        }
        self.state_resets += 1;
    }

    /// How many times [`Self::reset_states`] has run.
    pub fn state_resets(&self) -> u64 {
        self.state_resets
    }

    fn check_input(&self, state: &[R]) -> Result<(), NetError> {
        if state.len() != self.input_count {
            return Err(NetError::DimensionMismatch { expected: self.input_count, found: state.len() });
        }
        Ok(())
    }

    pub fn clear_match_caches(&mut self) {
        self.signatures.clear();
        for cl in self.pop.members_mut() {
            cl.clear_match_cache();
        }
    }

    /// Cache slot for `state`'s input spike trains, when the outcome of a
    /// spiking match is a pure function of them.
    fn signature_slot(&mut self, state: &[R]) -> Option<usize> {
        if self.state_policy != StatePolicy::ResetEachActivation || self.representation != Representation::Spiking {
            return None;
        }
        let sig = input_signature(state, &self.lif)?;
        let next = self.signatures.len();
        match self.signatures.get(&sig) {
            Some(&slot) => Some(slot),
            None if next < MAX_SIGNATURES => {
                self.signatures.insert(sig, next);
                Some(next)
            }
            None => None,
        }
    }

    /// Matches the whole population against `state` without covering.
    pub fn match_population(&mut self, state: &[R]) -> Result<MatchSet, LcsError> {
        self.check_input(state)?;
        let (lif, policy, cb) = (self.lif, self.state_policy, self.codebook);
        if let Some(slot) = self.signature_slot(state) {
            let mut mset = MatchSet::default();
            for cl in self.pop.members_mut() {
                if let Some(a) = cl.match_cached(slot, state, &lif, &cb)? {
                    mset.members.push((cl.id, a));
                }
            }
            return Ok(mset);
        }
        let members = self.pop.members_mut();
        let outcomes: Vec<Result<Option<usize>, NetError>> = if members.len() >= PAR_MATCH_MIN {
            members.par_iter_mut().with_min_len(64).map(|c| c.match_action(state, &lif, policy, &cb)).collect()
        } else {
            members.iter_mut().map(|c| c.match_action(state, &lif, policy, &cb)).collect()
        };
        let mut mset = MatchSet::default();
        for (cl, out) in self.pop.iter().zip(outcomes) {
            if let Some(a) = out? {
                mset.members.push((cl.id, a));
            }
        }
        Ok(mset)
    }

    /// Matches `state` and covers every action that lacks an advocate.
    pub fn match_set<G: Rng + ?Sized>(&mut self, state: &[R], rng: &mut G) -> Result<MatchSet, LcsError> {
        let mut mset = self.match_population(state)?;
        self.cover(&mut mset, state, rng)?;
        Ok(mset)
    }

    fn cover<G: Rng + ?Sized>(&mut self, mset: &mut MatchSet, state: &[R], rng: &mut G) -> Result<(), LcsError> {
        let n = self.actions();
        let mut missing = mset.missing_actions(n);
        let mut attempts = 0usize;
        while let Some(&first) = missing.first() {
            if attempts >= self.params.cover_attempts {
                return Err(LcsError::CoverFailure { action: first, attempts });
            }
            attempts += 1;
            let genome = random_genome(self.representation, self.input_count, &self.genome_init, rng);
            let sa = SelfAdaptive::random(&self.adapt_init, self.params.adapt_floor, rng);
            let mut cl = Classifier::new(0, genome, sa, self.time, &self.params, &self.lif);
            let Some(a) = cl.match_action(state, &self.lif, self.state_policy, &self.codebook)? else {
                continue;
            };
            if !missing.contains(&a) {
                continue;
            }
            cl.id = self.pop.alloc_id();
            let id = self.pop.macro_merge(cl).id();
            if !mset.members.iter().any(|m| m.0 == id) {
                mset.members.push((id, a));
            }
            self.pop.enforce_cap(&self.params, rng);
            let pop = &self.pop;
            mset.members.retain(|m| pop.contains(m.0));
            missing = mset.missing_actions(n);
            attempts = 0;
        }
        Ok(())
    }

    /// Re-activates only `ids` on `state`; dead ids are skipped.
    pub fn rematch(&mut self, ids: &[ClassifierId], state: &[R]) -> Result<Vec<(ClassifierId, Option<usize>)>, LcsError> {
        self.check_input(state)?;
        let (lif, policy, cb) = (self.lif, self.state_policy, self.codebook);
        let mut out = Vec::with_capacity(ids.len());
        for &id in ids {
            if let Some(cl) = self.pop.get_mut(id) {
                out.push((id, cl.match_action(state, &lif, policy, &cb)?));
            }
        }
        Ok(out)
    }

    pub fn prediction_array(&self, mset: &MatchSet, state: &[R]) -> PredictionArray<R> {
        build_prediction_array(&self.pop, mset, state, self.params.x0, self.actions())
    }

    pub fn update(&mut self, aset: &ActionSet, payoff: R, state: &[R]) -> Result<(), LcsError> {
        update_action_set(&mut self.pop, aset, payoff, state, &self.params)?;
        Ok(())
    }

    pub fn run_ga<G: Rng + ?Sized>(&mut self, aset: &ActionSet, rng: &mut G) -> Vec<Merge> {
        ga::run_ga(&mut self.pop, aset, self.time, &self.params, &self.lif, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::ActionCodebook;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agent(rep: Representation) -> Xcsf<f64> {
        Xcsf::new(XcsfParams::default(), LifParams::default(), rep, 2, ActionCodebook::grid())
    }

    #[test]
    fn covering_spans_all_actions() {
        for rep in [Representation::Spiking, Representation::Mlp] {
            let mut a = agent(rep);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let m = a.match_set(&[0.3, 0.6], &mut rng).unwrap();
            assert!(m.missing_actions(4).is_empty());
            assert!(a.pop.len() >= 4);
        }
    }

    #[test]
    fn covering_replays_with_same_seed() {
        let run = || {
            let mut a = agent(Representation::Spiking);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            a.match_set(&[0.1, 0.9], &mut rng).unwrap();
            a.pop.iter().map(|c| c.genome.to_string()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn impossible_cover_is_an_error() {
        // a codebook whose first action cannot be produced
        let cb = ActionCodebook::new([1, 1, 1, 1], 2);
        let mut a = Xcsf::new(XcsfParams { cover_attempts: 50, ..Default::default() }, LifParams::default(), Representation::Spiking, 2, cb);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(a.match_set(&[0.5, 0.5], &mut rng), Err(LcsError::CoverFailure { action: 0, attempts: 50 })));
    }

    #[test]
    fn wrong_state_length_is_reported() {
        let mut a = agent(Representation::Spiking);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(a.match_set(&[0.5], &mut rng), Err(LcsError::Net(NetError::DimensionMismatch { .. }))));
    }

    #[test]
    fn cached_matching_equals_direct_activation() {
        let mut a = agent(Representation::Spiking);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            a.match_set(&[rng.random(), rng.random()], &mut rng).unwrap();
        }
        let lif = a.lif;
        let cb = a.codebook;
        for _ in 0..2000 {
            let s = [rng.random::<f64>(), rng.random::<f64>()];
            let cached = a.match_population(&s).unwrap();
            let mut direct = MatchSet::default();
            for cl in a.pop.members_mut() {
                if let Some(act) = cl.match_action(&s, &lif, StatePolicy::ResetEachActivation, &cb).unwrap() {
                    direct.members.push((cl.id, act));
                }
            }
            assert_eq!(cached, direct);
        }
        assert!(a.signatures.len() <= 25);
    }

    #[test]
    fn matching_is_a_pure_function_under_reset() {
        let mut a = agent(Representation::Spiking);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            a.match_set(&[rng.random(), rng.random()], &mut rng).unwrap();
        }
        let s = [0.42, 0.17];
        let first = a.match_population(&s).unwrap();
        let second = a.match_population(&s).unwrap();
        assert_eq!(first, second);
    }
}
