use rand::RngCore;

use crate::real::{uniform, Real};

use super::{ActionCodebook, Environment, Start, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McarAction {
    Forward = 0,
    Backward = 1,
    /// No throttle.
    Coast = 2,
}

impl McarAction {
    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(McarAction::Forward),
            1 => Some(McarAction::Backward),
            2 => Some(McarAction::Coast),
            _ => None,
        }
    }

    fn throttle<R: Real>(self) -> R {
        match self {
            McarAction::Forward => R::one(),
            McarAction::Backward => -R::one(),
            McarAction::Coast => R::zero(),
        }
    }
}

/// How observations are rescaled before they reach the networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum McarScaling {
    /// Each range onto `[0, 1]`; rest velocity reads 0.5.
    Unit,
    /// Each range onto `[-1, 1]`; rest velocity reads 0, so leftward motion
    /// is a negative current that input neurons ignore.
    Symmetric,
}

pub const POSITION_MIN: f64 = -1.2;
pub const POSITION_MAX: f64 = 0.6;
pub const VELOCITY_MAX: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;

/// Under-powered car in a valley with the classic dynamics:
///
/// ```text
/// v' = clamp(v + FORCE * throttle - GRAVITY * cos(3p), ±0.07)
/// p' = clamp(p + v', [-1.2, 0.6]); v' = 0 if p' hit the left wall
/// ```
///
/// Observations are rescaled per component, see [`McarScaling`].
#[derive(Clone, Debug, PartialEq)]
pub struct MountainCar<R> {
    pub reward: R,
    pub move_cap: u32,
    pub scaling: McarScaling,
    position: R,
    velocity: R,
}

impl<R: Real> Default for MountainCar<R> {
    fn default() -> Self {
        MountainCar { reward: R::lit(1000.0), move_cap: 1000, scaling: McarScaling::Symmetric, position: R::lit(-0.5), velocity: R::zero() }
    }
}

impl<R: Real> MountainCar<R> {
    pub fn state(&self) -> (R, R) {
        (self.position, self.velocity)
    }

    pub fn set_state(&mut self, position: R, velocity: R) {
        self.position = position;
        self.velocity = velocity;
    }

    pub fn is_goal(position: R) -> bool {
        position > R::lit(GOAL_POSITION)
    }

    /// One integration step from `(position, velocity)`.
    pub fn dynamics(position: R, velocity: R, action: McarAction) -> (R, R) {
        let vmax = R::lit(VELOCITY_MAX);
        let pmin = R::lit(POSITION_MIN);
        let three = R::lit(3.0);
        let mut v = velocity + R::lit(FORCE) * action.throttle() - R::lit(GRAVITY) * (three * position).cos();
        v = v.max(-vmax).min(vmax);
        let mut p = position + v;
        p = p.max(pmin).min(R::lit(POSITION_MAX));
        if p == pmin && v < R::zero() {
            v = R::zero();
        }
        (p, v)
    }

    /// Position and velocity mapped by `scaling`.
    pub fn normalise(scaling: McarScaling, position: R, velocity: R) -> [R; 2] {
        let pmin = R::lit(POSITION_MIN);
        let span = R::lit(POSITION_MAX - POSITION_MIN);
        let vmax = R::lit(VELOCITY_MAX);
        let unit = [(position - pmin) / span, (velocity + vmax) / (vmax + vmax)];
        match scaling {
            McarScaling::Unit => unit,
            McarScaling::Symmetric => unit.map(|u| u + u - R::one()),
        }
    }
}

impl<R: Real> Environment<R> for MountainCar<R> {
    fn input_count(&self) -> usize {
        2
    }

    fn codebook(&self) -> ActionCodebook {
        ActionCodebook::mountain_car()
    }

    /// Uniform position outside the goal and uniform velocity over the full
    /// range. There is no fixed probe start; `Start::Probe` samples too.
    fn reset(&mut self, _start: Start, rng: &mut dyn RngCore) {
        self.position = uniform(rng, R::lit(POSITION_MIN), R::lit(GOAL_POSITION));
        self.velocity = uniform(rng, R::lit(-VELOCITY_MAX), R::lit(VELOCITY_MAX));
    }

    fn perceive(&self, _rng: &mut dyn RngCore) -> Vec<R> {
        Self::normalise(self.scaling, self.position, self.velocity).to_vec()
    }

    fn step(&mut self, action: usize) -> Transition<R> {
        let a = McarAction::from_index(action).expect("mountain-car action index");
        let (p, v) = Self::dynamics(self.position, self.velocity, a);
        self.position = p;
        self.velocity = v;
        let done = Self::is_goal(p);
        Transition { reward: if done { self.reward } else { R::zero() }, done }
    }

    fn move_cap(&self) -> u32 {
        self.move_cap
    }

    fn true_state(&self) -> Vec<R> {
        vec![self.position, self.velocity]
    }
}
