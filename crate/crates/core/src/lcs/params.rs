use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::neuronet::WeightMutation;
use crate::real::{uniform, Real};

/// When the GA clock advances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaClock {
    /// Once per learning trial.
    Trials,
    /// Once per match-set formation.
    Steps,
    /// Once per discrete environment move. Equal to `Steps` outside
    /// temporal control.
    Moves,
}

impl std::fmt::Display for GaClock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GaClock::Trials => "trials",
            GaClock::Steps => "steps",
            GaClock::Moves => "moves",
        })
    }
}

impl std::str::FromStr for GaClock {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "trials" => Ok(GaClock::Trials),
            "steps" => Ok(GaClock::Steps),
            "moves" => Ok(GaClock::Moves),
            _ => Err(format!("expected trials, steps or moves, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XcsfParams<R> {
    /// Microclassifier cap.
    pub max_micro: usize,
    pub beta: R,
    pub epsilon0: R,
    pub theta_ga: R,
    pub theta_del: u64,
    /// Constant input paired with the bias weight.
    pub x0: R,
    /// Prediction learning rate.
    pub eta: R,
    pub gamma: R,
    pub alpha: R,
    pub nu: R,
    pub delta: R,
    pub init_fitness: R,
    pub init_error: R,
    /// Offspring start with this fraction of their parent's fitness.
    pub offspring_fitness: R,
    /// Random networks tried per missing action before covering gives up.
    pub cover_attempts: usize,
    pub weight_mutation: WeightMutation<R>,
    /// Lower clip for self-adaptive rates.
    pub adapt_floor: R,
    pub ga_clock: GaClock,
}

impl<R: Real> Default for XcsfParams<R> {
    fn default() -> Self {
        XcsfParams {
            max_micro: 20_000,
            beta: R::lit(0.2),
            epsilon0: R::lit(0.005),
            theta_ga: R::lit(50.0),
            theta_del: 50,
            x0: R::one(),
            eta: R::lit(0.2),
            gamma: R::lit(0.95),
            alpha: R::lit(0.1),
            nu: R::lit(5.0),
            delta: R::lit(0.1),
            init_fitness: R::lit(0.01),
            init_error: R::zero(),
            offspring_fitness: R::lit(0.1),
            cover_attempts: 1000,
            weight_mutation: WeightMutation::Redraw,
            adapt_floor: R::lit(1e-6),
            ga_clock: GaClock::Trials,
        }
    }
}

impl<R: Real> XcsfParams<R> {
    /// Checks ranges; the error names the offending field.
    pub fn validate(&self) -> Result<(), String> {
        let unit = |v: R, name: &str| {
            if v > R::zero() && v <= R::one() {
                Ok(())
            } else {
                Err(format!("{name} = {v} must lie in (0, 1]"))
            }
        };
        if self.max_micro == 0 {
            return Err("max_micro must be at least 1".into());
        }
        unit(self.beta, "beta")?;
        unit(self.eta, "eta")?;
        unit(self.alpha, "alpha")?;
        unit(self.delta, "delta")?;
        unit(self.init_fitness, "init_fitness")?;
        unit(self.offspring_fitness, "offspring_fitness")?;
        unit(self.adapt_floor, "adapt_floor")?;
        if !(self.gamma >= R::zero() && self.gamma <= R::one()) {
            return Err(format!("gamma = {} must lie in [0, 1]", self.gamma));
        }
        if !(self.epsilon0 > R::zero()) {
            return Err(format!("epsilon0 = {} must be positive", self.epsilon0));
        }
        if !(self.nu > R::zero()) {
            return Err(format!("nu = {} must be positive", self.nu));
        }
        if !(self.theta_ga >= R::zero()) {
            return Err(format!("theta_ga = {} must be non-negative", self.theta_ga));
        }
        if !(self.init_error >= R::zero()) {
            return Err(format!("init_error = {} must be non-negative", self.init_error));
        }
        if !(self.x0.is_finite()) {
            return Err("x0 must be finite".into());
        }
        if self.cover_attempts == 0 {
            return Err("cover_attempts must be at least 1".into());
        }
        if let WeightMutation::Gaussian { sigma } = self.weight_mutation {
            if !(sigma > R::zero()) {
                return Err(format!("mutation sigma = {sigma} must be positive"));
            }
        }
        Ok(())
    }
}

/// Per-classifier mutation rates, each in `[floor, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelfAdaptive<R> {
    /// Per-weight mutation probability.
    pub mu: R,
    /// Constructivism event probability.
    pub psi: R,
    /// Share of constructivism events that add a node.
    pub omega: R,
    /// Per-slot connection flip probability.
    pub tau: R,
}

impl<R: Real> SelfAdaptive<R> {
    pub fn splat(v: R) -> Self {
        SelfAdaptive { mu: v, psi: v, omega: v, tau: v }
    }

    pub fn as_array(&self) -> [R; 4] {
        [self.mu, self.psi, self.omega, self.tau]
    }

    pub fn from_array([mu, psi, omega, tau]: [R; 4]) -> Self {
        SelfAdaptive { mu, psi, omega, tau }
    }

    /// Uniform draw in `(0, upper]` per rate, clipped below at `floor`.
    pub fn random<G: Rng + ?Sized>(upper: &Self, floor: R, rng: &mut G) -> Self {
        let draw = |hi: R, rng: &mut G| {
            // 1 - U[0,1) lies in (0, 1]
            let u = R::one() - uniform(rng, R::zero(), R::one());
            (u * hi).max(floor).min(R::one())
        };
        SelfAdaptive {
            mu: draw(upper.mu, rng),
            psi: draw(upper.psi, rng),
            omega: draw(upper.omega, rng),
            tau: draw(upper.tau, rng),
        }
    }

    /// Each rate times `exp(N(0,1))`, clipped to `[floor, 1]`.
    pub fn adapt<G: Rng + ?Sized>(&self, floor: R, rng: &mut G) -> Self {
        let mut z = [0.0; 4];
        for v in &mut z {
            *v = StandardNormal.sample(rng);
        }
        self.adapt_with(z, floor)
    }

    /// [`Self::adapt`] with the Gaussian draws supplied.
    pub fn adapt_with(&self, draws: [f64; 4], floor: R) -> Self {
        let mut out = self.as_array();
        for (v, z) in out.iter_mut().zip(draws) {
            *v = (*v * R::lit(z.exp())).max(floor).min(R::one());
        }
        Self::from_array(out)
    }

    pub fn within(&self, floor: R) -> bool {
        self.as_array().iter().all(|&v| v >= floor && v <= R::one())
    }
}
