//! Genome construction and the weight/topology operators used by the GA.
//!
//! Operators mutate in place; callers clone the parent first.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::real::{uniform, Real};

use super::genome::{Genome, Link, MlpGenome, NodeKind, Representation, SpikingGenome, OUTPUTS};

/// How an enabled weight changes when selected for mutation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightMutation<R> {
    /// Redraw uniformly over the representation's weight range.
    Redraw,
    /// Add `N(0, sigma)` and clamp to the weight range.
    Gaussian { sigma: R },
}

impl<R> Default for WeightMutation<R> {
    fn default() -> Self {
        WeightMutation::Redraw
    }
}

/// Shape of freshly generated networks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenomeInit<R> {
    pub hidden_nodes: usize,
    /// Probability that each legal slot starts enabled.
    pub enable_prob: R,
}

impl<R: Real> Default for GenomeInit<R> {
    fn default() -> Self {
        GenomeInit { hidden_nodes: 1, enable_prob: R::one() }
    }
}

/// Probability that a slot created by a node addition starts enabled.
pub const NEW_NODE_ENABLE_PROB: f64 = 0.5;

fn random_kind<G: Rng + ?Sized>(rng: &mut G) -> NodeKind {
    if rng.random_bool(0.5) {
        NodeKind::Excitatory
    } else {
        NodeKind::Inhibitory
    }
}

fn random_link<R: Real, G: Rng + ?Sized>(rng: &mut G, rep: Representation, enable_prob: R) -> Link<R> {
    let (lo, hi) = rep.weight_range::<R>();
    let draw: f64 = rng.random();
    if R::lit(draw) < enable_prob {
        Link::on(uniform(rng, lo, hi))
    } else {
        Link::off()
    }
}

/// A new network over `input_count` inputs. With the default init this is
/// one hidden node and every legal slot enabled.
pub fn random_genome<R: Real, G: Rng + ?Sized>(
    rep: Representation,
    input_count: usize,
    init: &GenomeInit<R>,
    rng: &mut G,
) -> Genome<R> {
    let hidden = init.hidden_nodes.max(1);
    match rep {
        Representation::Spiking => {
            let kinds = (0..hidden).map(|_| random_kind(rng)).collect();
            let mut g = SpikingGenome::empty(input_count, kinds);
            for l in g.links_mut() {
                *l = random_link(rng, rep, init.enable_prob);
            }
            Genome::Spiking(g)
        }
        Representation::Mlp => {
            let mut g = MlpGenome::empty(input_count, hidden);
            for l in g.links_mut() {
                *l = random_link(rng, rep, init.enable_prob);
            }
            Genome::Mlp(g)
        }
    }
}

/// Perturbs each enabled weight with probability `mu`. Returns how many
/// weights were touched.
pub fn mutate_weights<R: Real, G: Rng + ?Sized>(
    genome: &mut Genome<R>,
    mu: R,
    law: WeightMutation<R>,
    rng: &mut G,
) -> usize {
    let (lo, hi) = genome.representation().weight_range::<R>();
    let mu = mu.as_f64();
    let mut touched = 0;
    for link in genome.links_mut().filter(|l| l.enabled) {
        if rng.random::<f64>() >= mu {
            continue;
        }
        touched += 1;
        link.weight = match law {
            WeightMutation::Redraw => uniform(rng, lo, hi),
            WeightMutation::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (link.weight + sigma * R::lit(z)).max(lo).min(hi)
            }
        };
    }
    touched
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstructivismOutcome {
    Skipped,
    Added,
    Removed(usize),
    /// Removal drew a genome already at the one-node floor.
    RemovalBlocked,
}

/// With probability `psi` adds a hidden node (probability `omega`) or
/// removes a uniformly chosen one. New spiking nodes are excitatory with
/// probability one half; their slots are enabled with probability
/// [`NEW_NODE_ENABLE_PROB`].
pub fn constructivism_event<R: Real, G: Rng + ?Sized>(
    genome: &mut Genome<R>,
    psi: R,
    omega: R,
    rng: &mut G,
) -> ConstructivismOutcome {
    if rng.random::<f64>() >= psi.as_f64() {
        return ConstructivismOutcome::Skipped;
    }
    let rep = genome.representation();
    let p = R::lit(NEW_NODE_ENABLE_PROB);
    if rng.random::<f64>() < omega.as_f64() {
        match genome {
            Genome::Spiking(g) => {
                let kind = random_kind(rng);
                g.push_hidden(kind, || random_link(rng, rep, p));
            }
            Genome::Mlp(g) => g.push_hidden(|| random_link(rng, rep, p)),
        }
        ConstructivismOutcome::Added
    } else {
        let h = genome.hidden_count();
        if h <= 1 {
            return ConstructivismOutcome::RemovalBlocked;
        }
        let k = rng.random_range(0..h);
        match genome {
            Genome::Spiking(g) => g.remove_hidden(k),
            Genome::Mlp(g) => g.remove_hidden(k),
        }
        ConstructivismOutcome::Removed(k)
    }
}

/// Flips each slot's enabled flag with probability `tau`. Newly enabled
/// slots get a fresh uniform weight; newly disabled ones are zeroed.
pub fn connection_selection_event<R: Real, G: Rng + ?Sized>(
    genome: &mut Genome<R>,
    tau: R,
    rng: &mut G,
) -> usize {
    let (lo, hi) = genome.representation().weight_range::<R>();
    let tau = tau.as_f64();
    let mut flipped = 0;
    for link in genome.links_mut() {
        if rng.random::<f64>() >= tau {
            continue;
        }
        flipped += 1;
        *link = if link.enabled { Link::off() } else { Link::on(uniform(rng, lo, hi)) };
    }
    flipped
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectivityStats<R> {
    /// Hidden nodes with at least one enabled incoming and one enabled
    /// outgoing slot.
    pub connected_hidden: usize,
    /// Enabled slots over legal slots.
    pub enabled_fraction: R,
}

pub fn connectivity_stats<R: Real>(genome: &Genome<R>) -> ConnectivityStats<R> {
    let mut total = 0usize;
    let mut enabled = 0usize;
    for l in genome.links() {
        total += 1;
        enabled += l.enabled as usize;
    }
    let connected_hidden = match genome {
        Genome::Spiking(g) => {
            let h = g.hidden_count();
            (0..h)
                .filter(|&t| {
                    let incoming = (0..g.input_count()).any(|s| g.input_hidden(s, t).enabled)
                        || (0..h).any(|s| g.hidden_hidden(s, t).enabled);
                    let outgoing = (0..h).any(|d| g.hidden_hidden(t, d).enabled)
                        || (0..OUTPUTS).any(|o| g.hidden_output(t, o).enabled);
                    incoming && outgoing
                })
                .count()
        }
        Genome::Mlp(g) => (0..g.hidden_count())
            .filter(|&t| {
                (0..g.input_count()).any(|s| g.input_hidden(s, t).enabled)
                    && (0..OUTPUTS).any(|o| g.hidden_output(t, o).enabled)
            })
            .count(),
    };
    let enabled_fraction = if total == 0 {
        R::zero()
    } else {
        R::lit(enabled as f64 / total as f64)
    };
    ConnectivityStats { connected_hidden, enabled_fraction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn snn(input_count: usize, r: &mut ChaCha8Rng) -> Genome<f64> {
        random_genome(Representation::Spiking, input_count, &GenomeInit::default(), r)
    }

    #[test]
    fn fresh_spiking_genome_is_fully_connected() {
        let mut r = rng(1);
        let g = snn(2, &mut r);
        let Genome::Spiking(s) = &g else { panic!() };
        assert_eq!(s.input_count(), 2);
        assert_eq!(s.hidden_count(), 1);
        // 2 input->hidden, 1 self-link, 3 hidden->output
        assert_eq!(g.connections().count(), 6);
        assert!(g.connections().all(|(_, _, l)| l.enabled));
        g.validate().unwrap();
        assert_eq!(connectivity_stats(&g).enabled_fraction, 1.0);
        assert_eq!(connectivity_stats(&g).connected_hidden, 1);
    }

    #[test]
    fn excitatory_fraction_is_one_half() {
        let mut r = rng(2);
        let n = 10_000;
        let exc = (0..n)
            .filter(|_| match snn(2, &mut r) {
                Genome::Spiking(s) => s.hidden()[0] == NodeKind::Excitatory,
                _ => unreachable!(),
            })
            .count();
        let frac = exc as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn mlp_weights_in_range() {
        let mut r = rng(3);
        for _ in 0..10_000 {
            let g = random_genome::<f64, _>(Representation::Mlp, 2, &GenomeInit::default(), &mut r);
            assert!(g.connections().all(|(_, _, l)| (-1.0..=1.0).contains(&l.weight)));
        }
    }

    #[test]
    fn mutation_rate_extremes() {
        let mut r = rng(4);
        let g = snn(3, &mut r);
        let mut h = g.clone();
        assert_eq!(mutate_weights(&mut h, 1e-12, WeightMutation::Redraw, &mut r), 0);
        assert_eq!(h, g);
        let touched = mutate_weights(&mut h, 1.0, WeightMutation::Redraw, &mut r);
        assert_eq!(touched, g.connections().count());
        assert!(g.connections().zip(h.connections()).all(|(a, b)| a.2.weight != b.2.weight));
    }

    #[test]
    fn mutation_skips_disabled_slots() {
        let mut r = rng(5);
        let mut g = snn(2, &mut r);
        connection_selection_event(&mut g, 1.0, &mut r);
        assert!(g.connections().all(|(_, _, l)| !l.enabled));
        let before = g.clone();
        assert_eq!(mutate_weights(&mut g, 1.0, WeightMutation::Redraw, &mut r), 0);
        assert_eq!(g, before);
    }

    #[test]
    fn gaussian_mutation_clamps() {
        let mut r = rng(6);
        let mut g = snn(2, &mut r);
        for _ in 0..1_000 {
            mutate_weights(&mut g, 1.0, WeightMutation::Gaussian { sigma: 5.0 }, &mut r);
            g.validate().unwrap();
        }
    }

    #[test]
    fn constructivism_floor_and_growth() {
        let mut r = rng(7);
        let g = snn(2, &mut r);
        let mut h = g.clone();
        assert_eq!(
            constructivism_event(&mut h, 1.0, 1e-12, &mut r),
            ConstructivismOutcome::RemovalBlocked
        );
        assert_eq!(h, g);
        assert_eq!(constructivism_event(&mut h, 1.0, 1.0, &mut r), ConstructivismOutcome::Added);
        assert_eq!(h.hidden_count(), 2);
        h.validate().unwrap();
        assert!(matches!(
            constructivism_event(&mut h, 1.0, 1e-12, &mut r),
            ConstructivismOutcome::Removed(_)
        ));
        assert_eq!(h.hidden_count(), 1);
        h.validate().unwrap();
    }

    #[test]
    fn new_node_links_enabled_half_the_time() {
        let mut r = rng(8);
        let mut enabled = 0usize;
        let mut total = 0usize;
        for _ in 0..10_000 {
            let Genome::Spiking(mut s) = snn(2, &mut r) else { unreachable!() };
            s.push_hidden(NodeKind::Excitatory, || random_link(&mut r, Representation::Spiking, 0.5));
            // slots touching the new node (index 1): 2 inputs, 1 from old
            // hidden, 1 to old hidden, self, 3 outputs
            let new_links = [
                s.input_hidden(0, 1),
                s.input_hidden(1, 1),
                s.hidden_hidden(0, 1),
                s.hidden_hidden(1, 0),
                s.hidden_hidden(1, 1),
                s.hidden_output(1, 0),
                s.hidden_output(1, 1),
                s.hidden_output(1, 2),
            ];
            total += new_links.len();
            enabled += new_links.iter().filter(|l| l.enabled).count();
        }
        let frac = enabled as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn constructivism_added_links_are_half_enabled() {
        let mut r = rng(9);
        let mut enabled = 0usize;
        let mut total = 0usize;
        for _ in 0..10_000 {
            let mut g = snn(2, &mut r);
            constructivism_event(&mut g, 1.0, 1.0, &mut r);
            let Genome::Spiking(s) = &g else { unreachable!() };
            for l in [s.input_hidden(0, 1), s.input_hidden(1, 1), s.hidden_output(1, 0), s.hidden_output(1, 1), s.hidden_output(1, 2)] {
                total += 1;
                enabled += l.enabled as usize;
            }
        }
        let frac = enabled as f64 / total as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    #[test]
    fn selection_is_an_involution_on_flags() {
        let mut r = rng(10);
        let g = snn(3, &mut r);
        let mut h = g.clone();
        assert_eq!(connection_selection_event(&mut h, 1.0, &mut r), 7);
        assert!(g.connections().zip(h.connections()).all(|(a, b)| a.2.enabled != b.2.enabled));
        connection_selection_event(&mut h, 1.0, &mut r);
        assert!(g.connections().zip(h.connections()).all(|(a, b)| a.2.enabled == b.2.enabled));
        let mut k = g.clone();
        assert_eq!(connection_selection_event(&mut k, 1e-12, &mut r), 0);
        assert_eq!(k, g);
    }

    #[test]
    fn stats_for_disabled_and_half_wired() {
        let mut r = rng(11);
        let mut g = snn(2, &mut r);
        connection_selection_event(&mut g, 1.0, &mut r);
        let s = connectivity_stats(&g);
        assert_eq!((s.connected_hidden, s.enabled_fraction), (0, 0.0));

        let Genome::Spiking(sp) = &mut g else { unreachable!() };
        *sp.link_mut(0, 2).unwrap() = Link::on(0.5);
        *sp.link_mut(1, 2).unwrap() = Link::on(0.5);
        assert_eq!(connectivity_stats(&g).connected_hidden, 0);
        let Genome::Spiking(sp) = &mut g else { unreachable!() };
        *sp.link_mut(2, 3).unwrap() = Link::on(0.5);
        assert_eq!(connectivity_stats(&g).connected_hidden, 1);
    }
}
