use rand::Rng;

use crate::envs::{Environment, Start};
use crate::real::Real;

use super::agent::Xcsf;
use super::classifier::StatePolicy;
use super::params::GaClock;
use super::sets::{select_action, ActionSet, SelectMode};
use super::LcsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialMode {
    /// Roulette action selection, reinforcement and GA.
    Explore,
    /// Greedy selection with reinforcement but no GA.
    Exploit,
    /// Greedy selection, no reinforcement and no GA.
    Probe,
}

impl TrialMode {
    pub fn learns(self) -> bool {
        self != TrialMode::Probe
    }

    pub fn evolves(self) -> bool {
        self == TrialMode::Explore
    }

    pub fn select_mode(self) -> SelectMode {
        match self {
            TrialMode::Explore => SelectMode::Explore,
            _ => SelectMode::Exploit,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialResult {
    /// Discrete environment moves.
    pub moves: u32,
    /// Match sets formed.
    pub formations: u32,
    pub reached_goal: bool,
}

/// Advances the GA clock at the start of a learning trial.
pub(crate) fn tick_trial<R: Real>(agent: &mut Xcsf<R>, mode: TrialMode) {
    if mode.learns() && agent.params.ga_clock == GaClock::Trials {
        agent.time += 1;
    }
}

/// Advances the GA clock at a match-set formation.
pub(crate) fn tick_step<R: Real>(agent: &mut Xcsf<R>, mode: TrialMode) {
    if mode.learns() && agent.params.ga_clock == GaClock::Steps {
        agent.time += 1;
    }
}

/// Advances the GA clock after a discrete move.
pub(crate) fn tick_move<R: Real>(agent: &mut Xcsf<R>, mode: TrialMode) {
    if mode.learns() && agent.params.ga_clock == GaClock::Moves {
        agent.time += 1;
    }
}

/// One multi-step episode: a new match set every move, the previous
/// action set reinforced with `r + gamma * max(PA)` and the final one
/// with the goal reward.
pub fn run_mdp_trial<R, E, G>(
    agent: &mut Xcsf<R>,
    env: &mut E,
    start: Start,
    mode: TrialMode,
    rng: &mut G,
) -> Result<TrialResult, LcsError>
where
    R: Real,
    E: Environment<R> + ?Sized,
    G: Rng,
{
    env.reset(start, rng);
    if agent.state_policy == StatePolicy::Persist {
        agent.reset_states();
    }
    tick_trial(agent, mode);
    let gamma = agent.params.gamma;
    let mut prev: Option<(ActionSet, R, Vec<R>)> = None;
    let mut res = TrialResult::default();
    while res.moves < env.move_cap() {
        let s = env.perceive(rng);
        tick_step(agent, mode);
        tick_move(agent, mode);
        let mset = agent.match_set(&s, rng)?;
        res.formations += 1;
        let pa = agent.prediction_array(&mset, &s);
        let action = select_action(&pa, mode.select_mode(), rng).expect("covering leaves every action advocated");
        let aset = mset.action_set(action);
        if let (true, Some((last, r, last_s))) = (mode.learns(), prev.take()) {
            let payoff = r + gamma * pa.max().expect("non-empty prediction array");
            agent.update(&last, payoff, &last_s)?;
            if mode.evolves() {
                agent.run_ga(&last, rng);
            }
        }
        let t = env.step(action);
        res.moves += 1;
        if t.done {
            res.reached_goal = true;
            if mode.learns() {
                agent.update(&aset, t.reward, &s)?;
                if mode.evolves() {
                    agent.run_ga(&aset, rng);
                }
            }
            break;
        }
        prev = Some((aset, t.reward, s));
    }
    Ok(res)
}
