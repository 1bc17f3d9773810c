//! Tabular Q-learning over a fixed uniform discretisation of `[0, 1]^d`.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::envs::{Environment, Start};
use crate::lcs::{TrialMode, TrialResult};
use crate::real::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("state index {index} out of range for {states} states")]
    StateOutOfRange { index: usize, states: usize },
    #[error("action {action} out of range for {actions} actions")]
    ActionOutOfRange { action: usize, actions: usize },
    #[error("observation has {found} components, table expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Cells per axis for `step`: one per multiple of `step` in `[0, 1]`.
pub fn cells_per_axis<R: Real>(step: R) -> usize {
    (R::one() / step).round().to_usize().expect("positive step") + 1
}

/// `floor(cont / step)`, with the top edge folded into the last cell.
pub fn discretise<R: Real>(cont: R, step: R) -> usize {
    let top = cells_per_axis(step) - 1;
    let v = (cont * (R::one() / step)).floor();
    if !(v > R::zero()) {
        return 0;
    }
    v.to_usize().unwrap_or(top).min(top)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QTable<R> {
    values: Vec<R>,
    cells: usize,
    dims: usize,
    actions: usize,
    pub step: R,
    pub gamma: R,
    pub learn_rate: R,
}

impl<R: Real> QTable<R> {
    pub fn new(step: R, dims: usize, actions: usize) -> Self {
        let cells = cells_per_axis(step);
        QTable {
            values: vec![R::zero(); cells.pow(dims as u32) * actions],
            cells,
            dims,
            actions,
            step,
            gamma: R::lit(0.99),
            learn_rate: R::lit(0.2),
        }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn states(&self) -> usize {
        self.values.len() / self.actions
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    /// Row-major state index of an observation, first component fastest.
    pub fn state_index(&self, obs: &[R]) -> Result<usize, BaselineError> {
        if obs.len() != self.dims {
            return Err(BaselineError::DimensionMismatch { expected: self.dims, found: obs.len() });
        }
        Ok(obs.iter().rev().fold(0, |acc, &v| acc * self.cells + discretise(v, self.step)))
    }

    fn slot(&self, s: usize, a: usize) -> Result<usize, BaselineError> {
        if s >= self.states() {
            return Err(BaselineError::StateOutOfRange { index: s, states: self.states() });
        }
        if a >= self.actions {
            return Err(BaselineError::ActionOutOfRange { action: a, actions: self.actions });
        }
        Ok(s * self.actions + a)
    }

    pub fn q(&self, s: usize, a: usize) -> Result<R, BaselineError> {
        Ok(self.values[self.slot(s, a)?])
    }

    fn row(&self, s: usize) -> &[R] {
        &self.values[s * self.actions..(s + 1) * self.actions]
    }

    pub fn max_q(&self, s: usize) -> Result<R, BaselineError> {
        self.slot(s, 0)?;
        Ok(self.row(s).iter().copied().fold(R::neg_infinity(), R::max))
    }

    /// One Q-learning backup; `next = None` marks a terminal transition.
    pub fn update(&mut self, s: usize, a: usize, r: R, next: Option<usize>) -> Result<(), BaselineError> {
        let i = self.slot(s, a)?;
        let future = match next {
            Some(n) => self.gamma * self.max_q(n)?,
            None => R::zero(),
        };
        let q = self.values[i];
        self.values[i] = q + self.learn_rate * (r + future - q);
        Ok(())
    }

    /// Highest value, lowest index on ties.
    pub fn greedy(&self, s: usize) -> Result<usize, BaselineError> {
        self.slot(s, 0)?;
        let row = self.row(s);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        Ok(best)
    }

    /// Greedy when exploiting, uniform when exploring.
    pub fn select<G: Rng + ?Sized>(&self, s: usize, mode: TrialMode, rng: &mut G) -> Result<usize, BaselineError> {
        match mode {
            TrialMode::Explore => {
                self.slot(s, 0)?;
                Ok(rng.random_range(0..self.actions))
            }
            _ => self.greedy(s),
        }
    }

    /// Tab-separated dump: one line per state and action, cell
    /// coordinates first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "state");
        for d in 0..self.dims {
            let _ = write!(out, "\tc{d}");
        }
        let _ = writeln!(out, "\taction\tq");
        for s in 0..self.states() {
            for a in 0..self.actions {
                let _ = write!(out, "{s}");
                let mut rest = s;
                for _ in 0..self.dims {
                    let _ = write!(out, "\t{}", rest % self.cells);
                    rest /= self.cells;
                }
                let _ = writeln!(out, "\t{a}\t{}", self.values[s * self.actions + a]);
            }
        }
        out
    }
}

/// One episode. Explore and exploit trials both learn; probes only act.
pub fn run_q_trial<R, E, G>(
    table: &mut QTable<R>,
    env: &mut E,
    start: Start,
    mode: TrialMode,
    rng: &mut G,
) -> Result<TrialResult, BaselineError>
where
    R: Real,
    E: Environment<R> + ?Sized,
    G: Rng,
{
    env.reset(start, rng);
    let mut res = TrialResult::default();
    let mut s = table.state_index(&env.perceive(rng))?;
    while res.moves < env.move_cap() {
        let a = table.select(s, mode, rng)?;
        let t = env.step(a);
        res.moves += 1;
        res.formations += 1;
        if t.done {
            res.reached_goal = true;
            if mode.learns() {
                table.update(s, a, t.reward, None)?;
            }
            break;
        }
        let next = table.state_index(&env.perceive(rng))?;
        if mode.learns() {
            table.update(s, a, t.reward, Some(next))?;
        }
        s = next;
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::GridWorld;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn discretise_examples() {
        assert_eq!(discretise(0.52, 0.05), 10);
        assert_eq!(discretise(0.0, 0.05), 0);
        assert_eq!(discretise(1.0, 0.05), 20);
        assert_eq!(discretise(1.0, 0.005), 200);
        assert_eq!(cells_per_axis(0.05), 21);
        assert_eq!(cells_per_axis(0.005), 201);
    }

    #[test]
    fn table_dimensions() {
        assert_eq!(QTable::<f64>::new(0.05, 2, 4).states(), 21 * 21);
        assert_eq!(QTable::<f64>::new(0.005, 2, 4).states(), 201 * 201);
    }

    #[test]
    fn one_goal_backup() {
        let mut t = QTable::<f64>::new(0.05, 2, 4);
        t.update(7, 1, 1000.0, None).unwrap();
        assert_eq!(t.q(7, 1).unwrap(), 200.0);
    }

    #[test]
    fn zero_reward_keeps_zero_table() {
        let mut t = QTable::<f64>::new(0.05, 2, 4);
        for s in 0..t.states() {
            t.update(s, s % 4, 0.0, Some((s + 1) % t.states())).unwrap();
        }
        assert!(t.dump().lines().skip(1).all(|l| l.ends_with("\t0")));
    }

    #[test]
    fn out_of_range_is_an_error() {
        let mut t = QTable::<f64>::new(0.05, 2, 4);
        assert!(matches!(t.update(441, 0, 0.0, None), Err(BaselineError::StateOutOfRange { .. })));
        assert!(matches!(t.q(0, 4), Err(BaselineError::ActionOutOfRange { .. })));
        assert!(t.state_index(&[0.1]).is_err());
    }

    #[test]
    fn greedy_ties_go_low() {
        let mut t = QTable::<f64>::new(0.05, 2, 4);
        assert_eq!(t.greedy(3).unwrap(), 0);
        t.update(3, 2, 10.0, None).unwrap();
        t.update(3, 3, 10.0, None).unwrap();
        assert_eq!(t.greedy(3).unwrap(), 2);
    }

    #[test]
    fn values_stay_bounded() {
        let mut t = QTable::<f64>::new(0.05, 2, 4);
        let mut env = GridWorld::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..300 {
            run_q_trial(&mut t, &mut env, Start::Random, TrialMode::Explore, &mut rng).unwrap();
        }
        let hi = 1000.0 / (1.0 - t.gamma);
        for s in 0..t.states() {
            for a in 0..4 {
                let q = t.q(s, a).unwrap();
                assert!((0.0..=hi).contains(&q));
            }
        }
    }
}
