use rand::Rng;

use crate::neuronet::{connection_selection_event, constructivism_event, mutate_weights, LifParams};
use crate::real::Real;

use super::classifier::Classifier;
use super::population::{roulette, Merge, Population};
use super::sets::ActionSet;
use super::params::XcsfParams;

/// Numerosity-weighted mean age of `aset` since its last GA exceeds
/// `theta_ga`.
pub fn ga_due<R: Real>(pop: &Population<R>, aset: &ActionSet, time: u64, theta_ga: R) -> bool {
    let mut age = R::zero();
    let mut num = R::zero();
    for cl in aset.members.iter().filter_map(|&id| pop.get(id)) {
        let n = R::lit(cl.numerosity as f64);
        age += R::lit(time.saturating_sub(cl.ga_timestamp) as f64) * n;
        num += n;
    }
    num > R::zero() && age / num > theta_ga
}

/// The offspring of one parent: self-adapt, then weights, then topology,
/// then connections. No crossover.
pub fn breed<R: Real, G: Rng + ?Sized>(
    parent: &Classifier<R>,
    id: u64,
    time: u64,
    params: &XcsfParams<R>,
    lif: &LifParams<R>,
    rng: &mut G,
) -> Classifier<R> {
    let sa = parent.self_adapt.adapt(params.adapt_floor, rng);
    let mut genome = parent.genome.clone();
    mutate_weights(&mut genome, sa.mu, params.weight_mutation, rng);
    constructivism_event(&mut genome, sa.psi, sa.omega, rng);
    connection_selection_event(&mut genome, sa.tau, rng);
    let mut child = Classifier::new(id, genome, sa, time, params, lif);
    child.pred_weights = parent.pred_weights.clone();
    child.error = parent.error;
    child.fitness = parent.fitness * params.offspring_fitness;
    child.as_size = parent.as_size;
    child
}

/// Runs the GA on `aset` if it is due. Two parents are drawn by fitness
/// roulette, each yields one child, children are merged into the
/// population and the cap is restored. Returns the merge outcomes, empty
/// when the GA did not fire.
pub fn run_ga<R: Real, G: Rng + ?Sized>(
    pop: &mut Population<R>,
    aset: &ActionSet,
    time: u64,
    params: &XcsfParams<R>,
    lif: &LifParams<R>,
    rng: &mut G,
) -> Vec<Merge> {
    if !ga_due(pop, aset, time, params.theta_ga) {
        return Vec::new();
    }
    let live: Vec<_> = aset.members.iter().copied().filter(|&id| pop.contains(id)).collect();
    for &id in &live {
        pop.get_mut(id).unwrap().ga_timestamp = time;
    }
    let fitness: Vec<R> = live.iter().map(|&id| pop.get(id).unwrap().fitness).collect();
    let parents = [live[roulette(&fitness, rng)], live[roulette(&fitness, rng)]];
    let mut children = Vec::with_capacity(2);
    for pid in parents {
        let id = pop.alloc_id();
        children.push(breed(pop.get(pid).unwrap(), id, time, params, lif, rng));
    }
    let merges = children.into_iter().map(|c| pop.macro_merge(c)).collect();
    pop.enforce_cap(params, rng);
    merges
}
