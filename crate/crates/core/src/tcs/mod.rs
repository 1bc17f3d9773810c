//! Temporal classifier system control: one action set stays in charge
//! across many discrete moves until it is dropped.

mod trial;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::lcs::{roulette, select_action, ClassifierId, LcsError, PredictionArray, TrialMode, Xcsf};
use crate::real::Real;

pub use trial::{run_tcs_trial, TraceEvent, TraceKind};

/// What `t_total` in the reward discount counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PayoffClock {
    /// Match sets formed so far in the trial.
    Formations,
    /// Discrete moves so far in the trial.
    Moves,
}

impl fmt::Display for PayoffClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayoffClock::Formations => "formations",
            PayoffClock::Moves => "moves",
        })
    }
}

impl FromStr for PayoffClock {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "formations" => Ok(PayoffClock::Formations),
            "moves" => Ok(PayoffClock::Moves),
            _ => Err(format!("expected formations or moves, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TcsParams<R> {
    /// Discount on the external reward per unit of `t_total`.
    pub phi: R,
    /// Discount on the successor prediction per move held.
    pub rho: R,
    /// Moves an action set may hold control.
    pub timeout: u32,
    pub clock: PayoffClock,
}

impl<R: Real> Default for TcsParams<R> {
    fn default() -> Self {
        TcsParams { phi: R::lit(0.45), rho: R::lit(0.005), timeout: 20, clock: PayoffClock::Formations }
    }
}

impl<R: Real> TcsParams<R> {
    /// Defaults with the longer timeout used for fine grids and mountain-car.
    pub fn long() -> Self {
        TcsParams { timeout: 200, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.phi >= R::zero() && self.phi.is_finite()) {
            return Err(format!("tcs_phi must be finite and >= 0, got {}", self.phi));
        }
        if !(self.rho >= R::zero() && self.rho.is_finite()) {
            return Err(format!("tcs_rho must be finite and >= 0, got {}", self.rho));
        }
        if self.timeout == 0 {
            return Err("tcs_timeout must be at least 1".into());
        }
        Ok(())
    }
}

/// `exp(-phi * t_total) * r + exp(-rho * t_internal) * max_p`.
pub fn tcs_payoff<R: Real>(r: R, max_p: R, t_total: u32, t_internal: u32, params: &TcsParams<R>) -> R {
    let tt = R::lit(t_total as f64);
    let ti = R::lit(t_internal as f64);
    (-params.phi * tt).exp() * r + (-params.rho * ti).exp() * max_p
}

/// The action set currently in control.
#[derive(Clone, Debug, PartialEq)]
pub struct EngagedActionSet<R> {
    pub members: Vec<ClassifierId>,
    pub action: usize,
    /// Observation the set was formed on; reinforcement is applied there.
    pub formation_state: Vec<R>,
    /// Index of the formation within the trial, from 1.
    pub formation: u32,
    /// Moves made since formation.
    pub steps_held: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue(usize),
    Drop,
}

/// A reconsideration's decision plus how the set split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reconsideration {
    pub decision: Decision,
    /// Members that still matched.
    pub continuing: usize,
    /// Members that stopped matching.
    pub dropping: usize,
    /// Continuing members removed for advocating a losing action.
    pub outvoted: usize,
}

/// Feeds `state` to the engaged set and decides whether it keeps control.
///
/// On `Continue` the set is pruned to the members that matched and
/// advocate the returned action. On `Drop` it holds exactly the members
/// that should be reinforced.
pub fn tcs_reconsider<R: Real, G: Rng + ?Sized>(
    agent: &mut Xcsf<R>,
    engaged: &mut EngagedActionSet<R>,
    state: &[R],
    mode: TrialMode,
    timeout: u32,
    rng: &mut G,
) -> Result<Reconsideration, LcsError> {
    let mut out = Reconsideration { decision: Decision::Drop, continuing: 0, dropping: 0, outvoted: 0 };
    if engaged.steps_held >= timeout {
        return Ok(out);
    }
    let outcomes = agent.rematch(&engaged.members, state)?;
    let matched: Vec<(ClassifierId, usize)> = outcomes.iter().filter_map(|&(id, a)| a.map(|a| (id, a))).collect();
    let unmatched: Vec<ClassifierId> = outcomes.iter().filter(|o| o.1.is_none()).map(|o| o.0).collect();
    out.continuing = matched.len();
    out.dropping = unmatched.len();
    if matched.is_empty() {
        engaged.members = outcomes.iter().map(|o| o.0).collect();
        return Ok(out);
    }
    if !unmatched.is_empty() {
        let x0 = agent.params.x0;
        let pool: Vec<ClassifierId> = matched.iter().map(|m| m.0).chain(unmatched.iter().copied()).collect();
        let weights: Vec<R> = pool
            .iter()
            .map(|&id| {
                let cl = agent.pop.get(id).expect("rematch only reports live members");
                let p = cl.prediction(x0, state).expect("state length checked at rematch");
                cl.fitness * p.max(R::zero())
            })
            .collect();
        if roulette(&weights, rng) >= matched.len() {
            engaged.members = unmatched;
            return Ok(out);
        }
    }

    let mut action = engaged.action;
    if matched.iter().any(|m| m.1 != action) {
        let x0 = agent.params.x0;
        let pa = PredictionArray::from_votes(
            agent.actions(),
            matched.iter().map(|&(id, a)| {
                let cl = agent.pop.get(id).expect("live member");
                (a, cl.fitness, cl.prediction(x0, state).expect("state length checked at rematch"))
            }),
        );
        action = select_action(&pa, mode.select_mode(), rng).expect("at least one continuing member");
    }
    engaged.members = matched.iter().filter(|m| m.1 == action).map(|m| m.0).collect();
    out.outvoted = matched.len() - engaged.members.len();
    engaged.action = action;
    out.decision = Decision::Continue(action);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::ActionCodebook;
    use crate::lcs::{Classifier, SelfAdaptive, StatePolicy, XcsfParams};
    use crate::neuronet::{Genome, LifParams, Link, MlpGenome, Representation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn payoff_examples() {
        let p = TcsParams::<f64>::default();
        assert!((tcs_payoff(1000.0, 0.0, 1, 1, &p) - 637.628_151_621_773_3).abs() < 1e-9);
        assert!((tcs_payoff(0.0, 500.0, 20, 20, &p) - 452.418_709_017_979_8).abs() < 1e-9);
    }

    #[test]
    fn payoff_is_monotone() {
        let p = TcsParams::<f64>::default();
        for t in 0..50 {
            assert!(tcs_payoff(1000.0, 0.0, t + 1, 0, &p) < tcs_payoff(1000.0, 0.0, t, 0, &p));
            assert!(tcs_payoff(0.0, 300.0, 60, t + 1, &p) < tcs_payoff(0.0, 300.0, 60, t, &p));
        }
    }

    #[test]
    fn validate_rejects_bad_values() {
        assert!(TcsParams::<f64>::default().validate().is_ok());
        assert!(TcsParams::<f64> { timeout: 0, ..Default::default() }.validate().is_err());
        assert!(TcsParams::<f64> { phi: -1.0, ..Default::default() }.validate().unwrap_err().contains("tcs_phi"));
    }

    // Two hidden nodes, h0 = logistic(x) and h1 = logistic(-x). The action
    // outputs follow h0 with fixed signs. The don't-match output is either
    // always low or high exactly when x > 0.
    fn scripted(out0: bool, out1: bool, drops_when_positive: bool) -> Genome<f64> {
        let mut g = MlpGenome::empty(1, 2);
        *g.link_mut(0, 1).unwrap() = Link::on(1.0);
        *g.link_mut(0, 2).unwrap() = Link::on(-1.0);
        let w = |high: bool| if high { 1.0 } else { -1.0 };
        *g.link_mut(1, 3).unwrap() = Link::on(w(out0));
        *g.link_mut(1, 4).unwrap() = Link::on(w(out1));
        if drops_when_positive {
            *g.link_mut(1, 5).unwrap() = Link::on(1.0);
            *g.link_mut(2, 5).unwrap() = Link::on(-1.0);
        } else {
            *g.link_mut(1, 5).unwrap() = Link::on(-1.0);
        }
        Genome::Mlp(g)
    }

    fn agent_with(genomes: Vec<Genome<f64>>) -> Xcsf<f64> {
        let params = XcsfParams::default();
        let lif = LifParams::default();
        let mut a = Xcsf::new(params.clone(), lif, Representation::Mlp, 1, ActionCodebook::grid());
        a.state_policy = StatePolicy::Persist;
        for g in genomes {
            let id = a.pop.alloc_id();
            let mut cl = Classifier::new(id, g, SelfAdaptive::splat(0.5), 0, &params, &lif);
            cl.fitness = 0.5;
            cl.pred_weights = vec![100.0, 0.0];
            a.pop.insert(cl);
        }
        a
    }

    fn engaged(a: &Xcsf<f64>, action: usize) -> EngagedActionSet<f64> {
        EngagedActionSet {
            members: a.pop.iter().map(|c| c.id).collect(),
            action,
            formation_state: vec![0.0],
            formation: 1,
            steps_held: 1,
        }
    }

    #[test]
    fn all_match_same_action_continues() {
        let mut a = agent_with(vec![scripted(true, true, false), scripted(true, true, false)]);
        let mut e = engaged(&a, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // input 0.5: don't-match = logistic(-0.5) low for both
        let r = tcs_reconsider(&mut a, &mut e, &[0.5], TrialMode::Explore, 20, &mut rng).unwrap();
        let north = a.codebook.decode(true, true);
        assert_eq!(r.decision, Decision::Continue(north));
        assert_eq!(e.members.len(), 2);
    }

    #[test]
    fn none_matching_drops_everyone() {
        let mut a = agent_with(vec![scripted(true, true, true), scripted(true, true, true)]);
        let north = a.codebook.decode(true, true);
        let mut e = engaged(&a, north);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = tcs_reconsider(&mut a, &mut e, &[0.5], TrialMode::Explore, 20, &mut rng).unwrap();
        assert_eq!(r.decision, Decision::Drop);
        assert_eq!(e.members.len(), 2);
    }

    #[test]
    fn timeout_drops_even_when_matching() {
        let mut a = agent_with(vec![scripted(true, true, false)]);
        let north = a.codebook.decode(true, true);
        let mut e = engaged(&a, north);
        e.steps_held = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = tcs_reconsider(&mut a, &mut e, &[0.5], TrialMode::Explore, 20, &mut rng).unwrap();
        assert_eq!(r.decision, Decision::Drop);
    }

    #[test]
    fn continue_frequency_follows_weights() {
        let mut base = agent_with(vec![scripted(true, true, false), scripted(true, true, true)]);
        let ids: Vec<_> = base.pop.iter().map(|c| c.id).collect();
        base.pop.get_mut(ids[0]).unwrap().fitness = 0.99;
        base.pop.get_mut(ids[1]).unwrap().fitness = 0.01;
        let north = base.codebook.decode(true, true);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 10_000;
        let mut cont = 0;
        for _ in 0..n {
            let mut a = base.clone();
            let mut e = engaged(&a, north);
            let r = tcs_reconsider(&mut a, &mut e, &[0.5], TrialMode::Explore, 20, &mut rng).unwrap();
            match r.decision {
                Decision::Continue(_) => {
                    assert_eq!(e.members, vec![ids[0]]);
                    cont += 1;
                }
                Decision::Drop => assert_eq!(e.members, vec![ids[1]]),
            }
        }
        let f = cont as f64 / n as f64;
        assert!((f - 0.99).abs() < 0.005, "continue frequency {f}");
    }

    #[test]
    fn heterogeneous_actions_keep_only_the_winner() {
        let mut a = agent_with(vec![scripted(true, true, false), scripted(true, false, false)]);
        let ids: Vec<_> = a.pop.iter().map(|c| c.id).collect();
        a.pop.get_mut(ids[1]).unwrap().pred_weights = vec![400.0, 0.0];
        let north = a.codebook.decode(true, true);
        let east = a.codebook.decode(true, false);
        let mut e = engaged(&a, north);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = tcs_reconsider(&mut a, &mut e, &[0.5], TrialMode::Exploit, 20, &mut rng).unwrap();
        assert_eq!(r.decision, Decision::Continue(east));
        assert_eq!(e.members, vec![ids[1]]);
        assert_eq!(r.outvoted, 1);
    }

    /// A corridor on `[0, 1]`; the codebook's North moves right by 0.1.
    struct Corridor {
        x: f64,
    }

    impl crate::envs::Environment<f64> for Corridor {
        fn input_count(&self) -> usize {
            1
        }
        fn codebook(&self) -> ActionCodebook {
            ActionCodebook::grid()
        }
        fn reset(&mut self, _: crate::envs::Start, _: &mut dyn rand::RngCore) {
            self.x = 0.05;
        }
        fn perceive(&self, _: &mut dyn rand::RngCore) -> Vec<f64> {
            vec![self.x]
        }
        fn step(&mut self, action: usize) -> crate::envs::Transition<f64> {
            if action == ActionCodebook::grid().decode(true, true) {
                self.x += 0.1;
            }
            let done = self.x > 0.9;
            crate::envs::Transition { reward: if done { 1000.0 } else { 0.0 }, done }
        }
        fn move_cap(&self) -> u32 {
            50
        }
        fn true_state(&self) -> Vec<f64> {
            vec![self.x]
        }
    }

    #[test]
    fn set_that_always_matches_reaches_goal_in_one_formation() {
        let mut a = agent_with(vec![scripted(true, true, false)]);
        let mut env = Corridor { x: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = TcsParams::long();
        let r = run_tcs_trial(&mut a, &mut env, crate::envs::Start::Random, TrialMode::Exploit, &p, &mut rng, None).unwrap();
        assert!(r.reached_goal);
        assert_eq!(r.formations, 1);
        assert_eq!(r.moves, 9);
    }
}
