use rand::{Rng, RngCore};

use crate::real::{uniform, Real};

use super::{ActionCodebook, Environment, Start, Transition};

/// Compass moves. North increases `y`, East increases `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridAction {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [GridAction::North, GridAction::East, GridAction::South, GridAction::West];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// How sensor noise scales with position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseModel {
    /// `v * (1 + u)`, `u ~ U[-n, n]`.
    Multiplicative,
    /// `v + u`, `u ~ U[-n, n]`.
    Additive,
}

/// Obstacle-free unit square with the goal in the top-right corner where
/// `x + y` exceeds `goal`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridWorld<R> {
    pub step_size: R,
    pub noise: R,
    pub noise_model: NoiseModel,
    pub goal: R,
    pub reward: R,
    pub move_cap: u32,
    pub probe_start: (R, R),
    position: (R, R),
}

impl<R: Real> GridWorld<R> {
    pub fn new(step_size: R) -> Self {
        GridWorld {
            step_size,
            noise: R::lit(0.05),
            noise_model: NoiseModel::Multiplicative,
            goal: R::lit(1.90),
            reward: R::lit(1000.0),
            move_cap: default_move_cap(step_size.as_f64()),
            probe_start: (R::lit(0.25), R::lit(0.25)),
            position: (R::lit(0.25), R::lit(0.25)),
        }
    }

    pub fn position(&self) -> (R, R) {
        self.position
    }

    pub fn set_position(&mut self, position: (R, R)) {
        self.position = position;
    }

    /// Goal predicate. A tolerance of `sqrt(eps)` keeps positions that sit
    /// exactly on the boundary in exact arithmetic out of the goal when
    /// accumulated rounding nudges them over.
    pub fn is_goal(&self, (x, y): (R, R)) -> bool {
        x + y > self.goal + R::goal_tolerance()
    }

    /// Uniform start outside the goal region.
    pub fn sample_start<G: Rng + ?Sized>(&self, rng: &mut G) -> (R, R) {
        loop {
            let p = (uniform(rng, R::zero(), R::one()), uniform(rng, R::zero(), R::one()));
            if !self.is_goal(p) {
                return p;
            }
        }
    }

    /// Noisy reading of `position`, clamped to the unit square.
    pub fn perceive_at<G: Rng + ?Sized>(&self, (x, y): (R, R), rng: &mut G) -> [R; 2] {
        let mut sense = |v: R| {
            let u = uniform(rng, -self.noise, self.noise);
            let reading = match self.noise_model {
                NoiseModel::Multiplicative => v * (R::one() + u),
                NoiseModel::Additive => v + u,
            };
            reading.max(R::zero()).min(R::one())
        };
        let sx = sense(x);
        let sy = sense(y);
        [sx, sy]
    }

    /// Deterministic move; noise never touches the true position.
    pub fn transition(&self, (x, y): (R, R), action: GridAction) -> ((R, R), Transition<R>) {
        let s = self.step_size;
        let clamp = |v: R| v.max(R::zero()).min(R::one());
        let next = match action {
            GridAction::North => (x, clamp(y + s)),
            GridAction::East => (clamp(x + s), y),
            GridAction::South => (x, clamp(y - s)),
            GridAction::West => (clamp(x - s), y),
        };
        let done = self.is_goal(next);
        let reward = if done { self.reward } else { R::zero() };
        (next, Transition { reward, done })
    }
}

/// 200 moves at the coarse step; finer steps get 400 coarse-step
/// equivalents (4000 at 0.005).
pub fn default_move_cap(step_size: f64) -> u32 {
    if step_size >= 0.05 - 1e-12 {
        200
    } else {
        (400.0 * 0.05 / step_size).round() as u32
    }
}

/// Fewest moves from `(x, y)` to the goal, accounting for boundary clamps.
/// Only North and East moves are useful in the obstacle-free square, so
/// the answer is the smallest `k` for which some split `kx + ky = k` pushes
/// `x + y` over the goal line.
pub fn optimal_moves<R: Real>(world: &GridWorld<R>, (x, y): (R, R)) -> u32 {
    let s = world.step_size.as_f64();
    let (x, y) = (x.as_f64(), y.as_f64());
    let goal = world.goal.as_f64();
    let tol = R::goal_tolerance().as_f64();
    if x + y > goal + tol {
        return 0;
    }
    let max_k = (2.0 / s).ceil() as u32 + 2;
    for k in 1..=max_k {
        for kx in 0..=k {
            let nx = (x + kx as f64 * s).min(1.0);
            let ny = (y + (k - kx) as f64 * s).min(1.0);
            if nx + ny > goal + tol {
                return k;
            }
        }
    }
    unreachable!("goal line below the top-right corner is always reachable")
}

impl<R: Real> Environment<R> for GridWorld<R> {
    fn input_count(&self) -> usize {
        2
    }

    fn codebook(&self) -> ActionCodebook {
        ActionCodebook::grid()
    }

    fn reset(&mut self, start: Start, rng: &mut dyn RngCore) {
        self.position = match start {
            Start::Random => self.sample_start(rng),
            Start::Probe => self.probe_start,
        };
    }

    fn perceive(&self, rng: &mut dyn RngCore) -> Vec<R> {
        self.perceive_at(self.position, rng).to_vec()
    }

    fn step(&mut self, action: usize) -> Transition<R> {
        let a = GridAction::from_index(action).expect("grid action index");
        let (next, t) = self.transition(self.position, a);
        self.position = next;
        t
    }

    fn move_cap(&self) -> u32 {
        self.move_cap
    }

    fn supports_probe(&self) -> bool {
        true
    }

    fn true_state(&self) -> Vec<R> {
        vec![self.position.0, self.position.1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn goal_move_from_edge() {
        let w = GridWorld::new(0.05);
        let (p, t) = w.transition((0.95, 0.98), GridAction::East);
        assert_eq!(p, (1.0, 0.98));
        assert!(t.done);
        assert_eq!(t.reward, 1000.0);
    }

    #[test]
    fn wall_clamps() {
        let w = GridWorld::new(0.05);
        let (p, t) = w.transition((0.0, 0.5), GridAction::West);
        assert_eq!(p, (0.0, 0.5));
        assert!(!t.done);
        assert_eq!(t.reward, 0.0);
        let (p, _) = w.transition((0.3, 0.98), GridAction::North);
        assert_eq!(p, (0.3, 1.0));
    }

    #[test]
    fn resets_avoid_goal() {
        let w = GridWorld::<f64>::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100_000 {
            let (x, y) = w.sample_start(&mut rng);
            assert!(x + y <= 1.90);
        }
    }

    #[test]
    fn probe_reset_is_fixed() {
        let mut w = GridWorld::<f64>::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        Environment::reset(&mut w, Start::Probe, &mut rng);
        assert_eq!(w.position(), (0.25, 0.25));
    }

    #[test]
    fn noise_is_multiplicative() {
        let w = GridWorld::<f64>::new(0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            assert_eq!(w.perceive_at((0.0, 0.0), &mut rng), [0.0, 0.0]);
            let [x, y] = w.perceive_at((1.0, 1.0), &mut rng);
            assert!((0.95..=1.0).contains(&x) && (0.95..=1.0).contains(&y));
        }
    }

    #[test]
    fn move_caps() {
        assert_eq!(default_move_cap(0.05), 200);
        assert_eq!(default_move_cap(0.005), 4000);
    }

    #[test]
    fn probe_optimum() {
        let w = GridWorld::<f64>::new(0.05);
        assert_eq!(optimal_moves(&w, (0.25, 0.25)), 29);
        let w = GridWorld::<f64>::new(0.005);
        assert_eq!(optimal_moves(&w, (0.25, 0.25)), 281);
    }
}
