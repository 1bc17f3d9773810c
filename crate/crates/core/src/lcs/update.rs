use crate::neuronet::NetError;
use crate::real::Real;

use super::population::Population;
use super::sets::ActionSet;
use super::params::XcsfParams;

/// Moyenne adaptive modifiée: plain averaging while `exp < 1/beta`.
fn mam<R: Real>(current: R, target: R, exp: u64, beta: R) -> R {
    let e = R::lit(exp as f64);
    if e * beta < R::one() {
        current + (target - current) / e
    } else {
        current + beta * (target - current)
    }
}

/// One reinforcement step for every live member of `aset` towards
/// `payoff` on `state`.
///
/// Predictions follow the normalised delta rule with `x = (x0, state)`;
/// error moves towards the post-update residual; fitness moves towards the
/// numerosity-weighted relative accuracy, computed in log space so tiny
/// accuracies do not underflow to a zero sum.
pub fn update_action_set<R: Real>(
    pop: &mut Population<R>,
    aset: &ActionSet,
    payoff: R,
    state: &[R],
    params: &XcsfParams<R>,
) -> Result<(), NetError> {
    let live: Vec<_> = aset.members.iter().copied().filter(|&id| pop.contains(id)).collect();
    if live.is_empty() {
        return Ok(());
    }
    let set_size: R = live.iter().map(|&id| R::lit(pop.get(id).unwrap().numerosity as f64)).sum();
    let x0 = params.x0;
    let norm = x0 * x0 + state.iter().map(|&s| s * s).sum::<R>();

    for &id in &live {
        let cl = pop.get_mut(id).unwrap();
        cl.experience += 1;
        let p = cl.prediction(x0, state)?;
        if norm > R::zero() {
            let step = params.eta * (payoff - p) / norm;
            cl.pred_weights[0] += step * x0;
            for (w, &s) in cl.pred_weights[1..].iter_mut().zip(state) {
                *w += step * s;
            }
        }
        let post = cl.prediction(x0, state)?;
        cl.error = mam(cl.error, (payoff - post).abs(), cl.experience, params.beta).max(R::zero());
        cl.as_size = mam(cl.as_size, set_size, cl.experience, params.beta);
    }

    let log_alpha = params.alpha.ln();
    let log_acc: Vec<R> = live
        .iter()
        .map(|&id| {
            let cl = pop.get(id).unwrap();
            let kappa = if cl.error < params.epsilon0 {
                R::zero()
            } else {
                log_alpha - params.nu * (cl.error / params.epsilon0).ln()
            };
            kappa + R::lit(cl.numerosity as f64).ln()
        })
        .collect();
    let peak = log_acc.iter().copied().fold(R::neg_infinity(), R::max);
    let lse = peak + log_acc.iter().map(|&l| (l - peak).exp()).sum::<R>().ln();
    for (&id, &l) in live.iter().zip(&log_acc) {
        let cl = pop.get_mut(id).unwrap();
        let rel = (l - lse).exp();
        cl.fitness += params.beta * (rel - cl.fitness);
        cl.fitness = cl.fitness.max(R::zero()).min(R::one());
    }
    Ok(())
}
