//! Benchmark environments and the codebooks that turn two output bits into
//! an environment action.

mod grid;
mod mountain_car;

use rand::RngCore;

use crate::real::Real;

pub use grid::{optimal_moves, GridAction, GridWorld, NoiseModel};
pub use mountain_car::{McarAction, McarScaling, MountainCar};

/// Maps the `(out0, out1)` high/low pair to an action index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionCodebook {
    /// Indexed by `2 * out0 + out1`, so `[LL, LH, HL, HH]`.
    table: [usize; 4],
    actions: usize,
}

impl ActionCodebook {
    /// `table` is indexed `[LL, LH, HL, HH]`.
    pub fn new(table: [usize; 4], actions: usize) -> Self {
        assert!(table.iter().all(|&a| a < actions), "codebook entry out of range");
        ActionCodebook { table, actions }
    }

    /// (H,H)=N, (H,L)=E, (L,H)=S, (L,L)=W.
    pub fn grid() -> Self {
        use GridAction::*;
        ActionCodebook::new([West as usize, South as usize, East as usize, North as usize], 4)
    }

    /// (H,H)=forward, (L,L)=backward, mixed=none.
    pub fn mountain_car() -> Self {
        use McarAction::*;
        ActionCodebook::new([Backward as usize, Coast as usize, Coast as usize, Forward as usize], 3)
    }

    #[inline]
    pub fn decode(&self, out0: bool, out1: bool) -> usize {
        self.table[(out0 as usize) << 1 | out1 as usize]
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }
}

/// Where a trial starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    Random,
    /// Fixed evaluation start, where the environment defines one.
    Probe,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition<R> {
    pub reward: R,
    pub done: bool,
}

/// An episodic task with a fixed-length real observation.
pub trait Environment<R: Real> {
    fn input_count(&self) -> usize;

    fn codebook(&self) -> ActionCodebook;

    fn reset(&mut self, start: Start, rng: &mut dyn RngCore);

    /// Current observation as seen by the agent, noise included.
    fn perceive(&self, rng: &mut dyn RngCore) -> Vec<R>;

    fn step(&mut self, action: usize) -> Transition<R>;

    /// Discrete moves after which a trial is abandoned.
    fn move_cap(&self) -> u32;

    fn supports_probe(&self) -> bool {
        false
    }

    /// Noise-free state, for traces.
    fn true_state(&self) -> Vec<R>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codebooks_are_total() {
        for cb in [ActionCodebook::grid(), ActionCodebook::mountain_car()] {
            for o0 in [false, true] {
                for o1 in [false, true] {
                    assert!(cb.decode(o0, o1) < cb.action_count());
                }
            }
        }
        let g = ActionCodebook::grid();
        assert_eq!(g.decode(true, true), GridAction::North as usize);
        assert_eq!(g.decode(true, false), GridAction::East as usize);
        assert_eq!(g.decode(false, true), GridAction::South as usize);
        assert_eq!(g.decode(false, false), GridAction::West as usize);
        let m = ActionCodebook::mountain_car();
        assert_eq!(m.decode(true, true), McarAction::Forward as usize);
        assert_eq!(m.decode(false, false), McarAction::Backward as usize);
        assert_eq!(m.decode(true, false), McarAction::Coast as usize);
        assert_eq!(m.decode(false, true), McarAction::Coast as usize);
    }
}
