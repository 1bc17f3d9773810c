use std::hash::{Hash, Hasher};

use crate::envs::ActionCodebook;
use crate::neuronet::{Genome, LifParams, NetError, NetState};
use crate::real::Real;

use super::params::{SelfAdaptive, XcsfParams};

pub type ClassifierId = u64;

/// How network state is treated between activations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatePolicy {
    /// Membranes return to the bootstrap potential before each activation.
    ResetEachActivation,
    /// Membranes carry over; the caller resets them once per trial.
    Persist,
}

#[derive(Clone, Debug)]
pub struct Classifier<R> {
    pub id: ClassifierId,
    pub genome: Genome<R>,
    /// `[w0, w1..wn]`; `w0` pairs with the constant input.
    pub pred_weights: Vec<R>,
    pub error: R,
    pub fitness: R,
    pub numerosity: u32,
    pub experience: u64,
    pub as_size: R,
    pub ga_timestamp: u64,
    pub self_adapt: SelfAdaptive<R>,
    pub state: NetState<R>,
    fingerprint: u64,
    /// Match outcomes by input-signature slot; see [`Classifier::match_cached`].
    match_cache: Vec<u8>,
}

const CACHE_UNKNOWN: u8 = 0;
const CACHE_NO_MATCH: u8 = 1;

impl<R: Real> Classifier<R> {
    pub fn new(
        id: ClassifierId,
        genome: Genome<R>,
        self_adapt: SelfAdaptive<R>,
        time: u64,
        params: &XcsfParams<R>,
        lif: &LifParams<R>,
    ) -> Self {
        let inputs = genome.input_count();
        let state = genome.fresh_state(lif);
        let fingerprint = fingerprint(&genome);
        Classifier {
            id,
            genome,
            pred_weights: vec![R::zero(); inputs + 1],
            error: params.init_error,
            fitness: params.init_fitness,
            numerosity: 1,
            experience: 0,
            as_size: R::one(),
            ga_timestamp: time,
            self_adapt,
            state,
            fingerprint,
            match_cache: Vec::new(),
        }
    }

    /// Hash of the genome used to find merge candidates quickly.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Call after editing `genome` in place.
    pub fn refresh_genome(&mut self, lif: &LifParams<R>) {
        self.fingerprint = fingerprint(&self.genome);
        self.state = self.genome.fresh_state(lif);
        self.match_cache.clear();
    }

    pub fn clear_match_cache(&mut self) {
        self.match_cache.clear();
    }

    pub fn prediction(&self, x0: R, state: &[R]) -> Result<R, NetError> {
        compute_prediction(&self.pred_weights, x0, state)
    }

    /// The advocated action for `input`, or `None` when the don't-match
    /// output is high.
    pub fn match_action(
        &mut self,
        input: &[R],
        lif: &LifParams<R>,
        policy: StatePolicy,
        codebook: &ActionCodebook,
    ) -> Result<Option<usize>, NetError> {
        if policy == StatePolicy::ResetEachActivation {
            self.state.reset(lif);
        }
        let act = self.genome.activate(input, &mut self.state, lif)?;
        Ok((!act.dont_match).then(|| codebook.decode(act.out0, act.out1)))
    }
}

impl<R: Real> Classifier<R> {
    /// [`Self::match_action`] under [`StatePolicy::ResetEachActivation`],
    /// memoised by `slot`. Callers must give equal slots only to inputs
    /// whose spike trains agree (see `input_signature`), and must not
    /// change the LIF parameters without clearing the cache.
    pub fn match_cached(
        &mut self,
        slot: usize,
        input: &[R],
        lif: &LifParams<R>,
        codebook: &ActionCodebook,
    ) -> Result<Option<usize>, NetError> {
        if let Some(&v) = self.match_cache.get(slot) {
            match v {
                CACHE_UNKNOWN => {}
                CACHE_NO_MATCH => return Ok(None),
                a => return Ok(Some(a as usize - 2)),
            }
        }
        let out = self.match_action(input, lif, StatePolicy::ResetEachActivation, codebook)?;
        if codebook.action_count() <= u8::MAX as usize - 2 {
            if self.match_cache.len() <= slot {
                self.match_cache.resize(slot + 1, CACHE_UNKNOWN);
            }
            self.match_cache[slot] = out.map_or(CACHE_NO_MATCH, |a| a as u8 + 2);
        }
        Ok(out)
    }
}

/// `w0 * x0 + sum(w_i * state_i)`.
pub fn compute_prediction<R: Real>(weights: &[R], x0: R, state: &[R]) -> Result<R, NetError> {
    if weights.len() != state.len() + 1 {
        return Err(NetError::DimensionMismatch { expected: weights.len() - 1, found: state.len() });
    }
    let mut p = weights[0] * x0;
    for (w, s) in weights[1..].iter().zip(state) {
        p += *w * *s;
    }
    Ok(p)
}

pub(crate) fn fingerprint<R: Real>(genome: &Genome<R>) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    genome.representation().hash(&mut h);
    genome.input_count().hash(&mut h);
    if let Genome::Spiking(g) = genome {
        for k in g.hidden() {
            k.hash(&mut h);
        }
    } else {
        genome.hidden_count().hash(&mut h);
    }
    for l in genome.links() {
        l.enabled.hash(&mut h);
        l.weight.as_f64().to_bits().hash(&mut h);
    }
    h.finish()
}
