use std::fmt;

use rand::Rng;

use crate::envs::{Environment, Start};
use crate::lcs::{select_action, tick_move, tick_step, tick_trial, ActionSet, LcsError, TrialMode, TrialResult, Xcsf};
use crate::real::Real;

use super::{tcs_payoff, tcs_reconsider, Decision, EngagedActionSet, PayoffClock, TcsParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    /// A new match set took control.
    Formation,
    Continue,
    Drop,
    Goal,
    /// The move cap ended the trial.
    Cap,
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceKind::Formation => "form",
            TraceKind::Continue => "continue",
            TraceKind::Drop => "drop",
            TraceKind::Goal => "goal",
            TraceKind::Cap => "cap",
        })
    }
}

/// One line of a TCS decision log.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent<R> {
    pub kind: TraceKind,
    pub formation: u32,
    pub moves: u32,
    /// Noise-free environment state.
    pub state: Vec<R>,
    pub action: usize,
    /// Members of [A] after the decision.
    pub set_size: usize,
    pub continuing: usize,
    pub dropping: usize,
}

impl<R: Real> TraceEvent<R> {
    pub const HEADER: &'static str = "kind\tformation\tmoves\tstate\taction\tset_size\tcontinuing\tdropping";
}

impl<R: Real> fmt::Display for TraceEvent<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let state: Vec<String> = self.state.iter().map(|v| v.to_string()).collect();
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.kind,
            self.formation,
            self.moves,
            state.join(","),
            self.action,
            self.set_size,
            self.continuing,
            self.dropping
        )
    }
}

fn record<R: Real, E: Environment<R> + ?Sized>(
    trace: &mut Option<&mut Vec<TraceEvent<R>>>,
    env: &E,
    kind: TraceKind,
    res: &TrialResult,
    engaged: &EngagedActionSet<R>,
    split: (usize, usize),
) {
    if let Some(t) = trace.as_deref_mut() {
        t.push(TraceEvent {
            kind,
            formation: res.formations,
            moves: res.moves,
            state: env.true_state(),
            action: engaged.action,
            set_size: engaged.members.len(),
            continuing: split.0,
            dropping: split.1,
        });
    }
}

/// One temporal episode. Membranes are reset once at the start; after
/// that an action set keeps control, re-matching only its own members on
/// every new observation, until it is dropped or the goal is reached.
///
/// A dropped set is reinforced on the observation it was formed on, with
/// the successor match set's best prediction discounted by how long it
/// held control. The goal set receives the reward discounted by trial
/// length. Both then see a GA in explore trials.
pub fn run_tcs_trial<R, E, G>(
    agent: &mut Xcsf<R>,
    env: &mut E,
    start: Start,
    mode: TrialMode,
    params: &TcsParams<R>,
    rng: &mut G,
    mut trace: Option<&mut Vec<TraceEvent<R>>>,
) -> Result<TrialResult, LcsError>
where
    R: Real,
    E: Environment<R> + ?Sized,
    G: Rng,
{
    env.reset(start, rng);
    agent.reset_states();
    tick_trial(agent, mode);
    let mut res = TrialResult::default();
    let cap = env.move_cap();
    let t_total = |r: &TrialResult| match params.clock {
        PayoffClock::Formations => r.formations,
        PayoffClock::Moves => r.moves,
    };
    let mut s = env.perceive(rng);
    let mut dropped: Option<EngagedActionSet<R>> = None;

    while res.moves < cap {
        tick_step(agent, mode);
        let mset = agent.match_set(&s, rng)?;
        res.formations += 1;
        let pa = agent.prediction_array(&mset, &s);
        let action = select_action(&pa, mode.select_mode(), rng).expect("covering leaves every action advocated");
        if let Some(d) = dropped.take() {
            if mode.learns() {
                let max_p = pa.max().expect("non-empty prediction array");
                let payoff = tcs_payoff(R::zero(), max_p, t_total(&res), d.steps_held, params);
                let aset = ActionSet { action: d.action, members: d.members };
                agent.update(&aset, payoff, &d.formation_state)?;
                if mode.evolves() {
                    agent.run_ga(&aset, rng);
                }
            }
        }
        let mut engaged = EngagedActionSet {
            members: mset.action_set(action).members,
            action,
            formation_state: s,
            formation: res.formations,
            steps_held: 0,
        };
        record(&mut trace, env, TraceKind::Formation, &res, &engaged, (engaged.members.len(), 0));

        loop {
            let t = env.step(engaged.action);
            res.moves += 1;
            tick_move(agent, mode);
            engaged.steps_held += 1;
            if t.done {
                res.reached_goal = true;
                record(&mut trace, env, TraceKind::Goal, &res, &engaged, (0, 0));
                if mode.learns() {
                    let payoff = tcs_payoff(t.reward, R::zero(), t_total(&res), engaged.steps_held, params);
                    let aset = ActionSet { action: engaged.action, members: engaged.members };
                    agent.update(&aset, payoff, &engaged.formation_state)?;
                    if mode.evolves() {
                        agent.run_ga(&aset, rng);
                    }
                }
                return Ok(res);
            }
            if res.moves >= cap {
                record(&mut trace, env, TraceKind::Cap, &res, &engaged, (0, 0));
                return Ok(res);
            }
            s = env.perceive(rng);
            let rec = tcs_reconsider(agent, &mut engaged, &s, mode, params.timeout, rng)?;
            match rec.decision {
                Decision::Continue(_) => {
                    record(&mut trace, env, TraceKind::Continue, &res, &engaged, (rec.continuing, rec.dropping));
                }
                Decision::Drop => {
                    record(&mut trace, env, TraceKind::Drop, &res, &engaged, (rec.continuing, rec.dropping));
                    dropped = Some(engaged);
                    break;
                }
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{ActionCodebook, GridWorld, MountainCar};
    use crate::lcs::{StatePolicy, XcsfParams};
    use crate::neuronet::{LifParams, Representation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tcs_agent(rep: Representation, inputs: usize, cb: ActionCodebook, n: usize) -> Xcsf<f64> {
        let params = XcsfParams { max_micro: n, ..Default::default() };
        let mut a = Xcsf::new(params, LifParams::default(), rep, inputs, cb);
        a.state_policy = StatePolicy::Persist;
        a
    }

    #[test]
    fn one_reset_per_trial() {
        let mut a = tcs_agent(Representation::Spiking, 2, ActionCodebook::grid(), 400);
        let mut env = GridWorld::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = TcsParams::default();
        for k in 1..=20 {
            let mut trace = Vec::new();
            let r = run_tcs_trial(&mut a, &mut env, Start::Random, TrialMode::Explore, &p, &mut rng, Some(&mut trace)).unwrap();
            assert_eq!(a.state_resets(), k);
            assert!(r.formations >= 1 && r.formations <= r.moves);
            assert_eq!(trace.iter().filter(|e| e.kind == TraceKind::Formation).count() as u32, r.formations);
            // no set holds control past the timeout
            let mut held = 0;
            for e in &trace {
                match e.kind {
                    TraceKind::Formation => held = 0,
                    _ => held += 1,
                }
                assert!(held <= p.timeout);
            }
        }
    }

    #[test]
    fn replays_with_same_seed() {
        let run = || {
            let mut a = tcs_agent(Representation::Spiking, 2, ActionCodebook::mountain_car(), 300);
            let mut env = MountainCar::default();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let p = TcsParams::long();
            (0..5)
                .map(|_| run_tcs_trial(&mut a, &mut env, Start::Random, TrialMode::Explore, &p, &mut rng, None).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn probes_leave_the_population_alone() {
        let mut a = tcs_agent(Representation::Mlp, 2, ActionCodebook::grid(), 400);
        let mut env = GridWorld::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = TcsParams::default();
        for _ in 0..10 {
            run_tcs_trial(&mut a, &mut env, Start::Random, TrialMode::Explore, &p, &mut rng, None).unwrap();
        }
        let before: Vec<_> = a.pop.iter().map(|c| (c.id, c.experience, c.fitness.to_bits())).collect();
        run_tcs_trial(&mut a, &mut env, Start::Probe, TrialMode::Probe, &p, &mut rng, None).unwrap();
        let after: Vec<_> = a.pop.iter().map(|c| (c.id, c.experience, c.fitness.to_bits())).collect();
        // covering may add members, but nobody learns
        for b in &before {
            assert!(after.contains(b));
        }
    }

    #[test]
    fn trace_lines_have_every_field() {
        let mut a = tcs_agent(Representation::Spiking, 2, ActionCodebook::grid(), 200);
        let mut env = GridWorld::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut trace = Vec::new();
        run_tcs_trial(&mut a, &mut env, Start::Probe, TrialMode::Explore, &TcsParams::default(), &mut rng, Some(&mut trace))
            .unwrap();
        let cols = TraceEvent::<f64>::HEADER.split('\t').count();
        for e in &trace {
            assert_eq!(e.to_string().split('\t').count(), cols);
        }
        assert_eq!(trace[0].kind, TraceKind::Formation);
        assert!(matches!(trace.last().unwrap().kind, TraceKind::Goal | TraceKind::Cap));
    }
}
