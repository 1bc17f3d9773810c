//! Leaky integrate-and-fire dynamics.
//!
//! Every node, inputs included, follows
//!
//! ```text
//! m' = max(0, m + (I + a - b*m))
//! if m' > threshold { spike; m' = c }
//! ```
//!
//! where `I` is the external value for input nodes and, for every other
//! node, the sum of `weight * sign(source)` over enabled links whose source
//! spiked on the previous step. All nodes update from the same previous
//! spike vector.

use crate::real::Real;

use super::genome::{NodeKind, SpikingGenome, OUTPUTS};
use super::NetError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LifParams<R> {
    /// Constant drive added every step.
    pub a: R,
    /// Leak coefficient.
    pub b: R,
    /// Reset potential after a spike.
    pub c: R,
    /// Potential every node starts from after a state reset.
    pub c_ini: R,
    pub threshold: R,
    /// Simulation steps per activation.
    pub window: usize,
}

impl<R: Real> Default for LifParams<R> {
    fn default() -> Self {
        LifParams {
            a: R::lit(0.3),
            b: R::lit(0.05),
            c: R::zero(),
            c_ini: R::lit(0.5),
            threshold: R::one(),
            window: 5,
        }
    }
}

impl<R: Real> LifParams<R> {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.window == 0 {
            return Err(NetError::InvalidParams("window must be at least 1"));
        }
        if !(self.c_ini > self.c) {
            return Err(NetError::InvalidParams("c_ini must exceed c"));
        }
        if !(self.a > R::zero()) {
            return Err(NetError::InvalidParams("a must be positive"));
        }
        Ok(())
    }
}

/// Membrane potentials and last-step spikes for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetState<R> {
    pub membranes: Vec<R>,
    pub spikes: Vec<bool>,
    currents: Vec<R>,
}

impl<R: Real> NetState<R> {
    /// All membranes at `c_ini`, no spikes.
    pub fn fresh(nodes: usize, params: &LifParams<R>) -> Self {
        NetState {
            membranes: vec![params.c_ini; nodes],
            spikes: vec![false; nodes],
            currents: vec![R::zero(); nodes],
        }
    }

    /// Returns the state to its trial-start configuration.
    pub fn reset(&mut self, params: &LifParams<R>) {
        self.membranes.fill(params.c_ini);
        self.spikes.fill(false);
    }

    /// Resizes for a genome with `nodes` nodes and resets.
    pub fn reset_to(&mut self, nodes: usize, params: &LifParams<R>) {
        self.membranes.resize(nodes, params.c_ini);
        self.spikes.resize(nodes, false);
        self.currents.resize(nodes, R::zero());
        self.reset(params);
    }

    pub fn len(&self) -> usize {
        self.membranes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membranes.is_empty()
    }
}

/// High/low reading of the three output neurons. `true` means high.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TernaryActivation {
    pub out0: bool,
    pub out1: bool,
    pub dont_match: bool,
}

impl TernaryActivation {
    pub fn new(out0: bool, out1: bool, dont_match: bool) -> Self {
        TernaryActivation { out0, out1, dont_match }
    }

    /// An output is high when it spiked in more than half of the window.
    pub fn from_spike_counts(counts: [usize; OUTPUTS], window: usize) -> Self {
        let high = |n: usize| 2 * n > window;
        TernaryActivation::new(high(counts[0]), high(counts[1]), high(counts[2]))
    }
}

/// Advances `state` by one synchronous step.
pub fn lif_step<R: Real>(
    state: &mut NetState<R>,
    genome: &SpikingGenome<R>,
    input: &[R],
    params: &LifParams<R>,
) -> Result<(), NetError> {
    check_dims(state, genome, input)?;
    step(state, genome, input, params);
    Ok(())
}

fn check_dims<R: Real>(state: &mut NetState<R>, genome: &SpikingGenome<R>, input: &[R]) -> Result<(), NetError> {
    let ni = genome.input_count;
    if genome.hidden.is_empty() {
        return Err(NetError::NoHiddenNodes);
    }
    if input.len() != ni {
        return Err(NetError::DimensionMismatch { expected: ni, found: input.len() });
    }
    let n = genome.node_count();
    if state.membranes.len() != n || state.spikes.len() != n {
        return Err(NetError::DimensionMismatch { expected: n, found: state.membranes.len() });
    }
    state.currents.resize(n, R::zero());
    Ok(())
}

/// One step with dimensions already checked. Disabled slots hold weight
/// zero, so links are summed without testing their flag.
#[inline]
fn step<R: Real>(state: &mut NetState<R>, genome: &SpikingGenome<R>, input: &[R], params: &LifParams<R>) {
    let ni = genome.input_count;
    let nh = genome.hidden.len();
    let n = ni + nh + OUTPUTS;
    let spikes = &mut state.spikes[..n];
    let membranes = &mut state.membranes[..n];
    let currents = &mut state.currents[..n];

    let (cur_in, rest) = currents.split_at_mut(ni);
    cur_in.copy_from_slice(input);
    rest.fill(R::zero());
    let (cur_hidden, cur_out) = rest.split_at_mut(nh);

    // Spike flags become 0/1 multipliers: the branches they would drive
    // are unpredictable and dominate the cost of these tiny networks.
    for (src, row) in genome.input_hidden.chunks_exact(nh).enumerate() {
        let on = R::lit(spikes[src] as u8 as f64);
        for (c, link) in cur_hidden.iter_mut().zip(row) {
            *c += on * link.weight;
        }
    }
    let hh = genome.hidden_hidden.chunks_exact(nh);
    let ho = genome.hidden_output.chunks_exact(OUTPUTS);
    for (src, ((kind, hrow), orow)) in genome.hidden.iter().zip(hh).zip(ho).enumerate() {
        let on = R::lit(spikes[ni + src] as u8 as f64);
        let gain = match kind {
            NodeKind::Excitatory => on,
            NodeKind::Inhibitory => -on,
        };
        for (c, link) in cur_hidden.iter_mut().zip(hrow) {
            *c += gain * link.weight;
        }
        for (c, link) in cur_out.iter_mut().zip(orow) {
            *c += gain * link.weight;
        }
    }

    for ((m, fired), &i) in membranes.iter_mut().zip(spikes.iter_mut()).zip(currents.iter()) {
        let mut next = *m + (i + params.a - params.b * *m);
        if next < R::zero() {
            next = R::zero();
        }
        *fired = next > params.threshold;
        if *fired {
            next = params.c;
        }
        *m = next;
    }
}

/// Holds `input` constant for `params.window` steps and classifies each
/// output's spike train. Membranes carry over in `state`.
pub fn snn_activate<R: Real>(
    genome: &SpikingGenome<R>,
    input: &[R],
    state: &mut NetState<R>,
    params: &LifParams<R>,
) -> Result<TernaryActivation, NetError> {
    check_dims(state, genome, input)?;
    let first_output = genome.input_count + genome.hidden.len();
    let mut counts = [0usize; OUTPUTS];
    for _ in 0..params.window {
        step(state, genome, input, params);
        for (c, &fired) in counts.iter_mut().zip(&state.spikes[first_output..first_output + OUTPUTS]) {
            *c += fired as usize;
        }
    }
    Ok(TernaryActivation::from_spike_counts(counts, params.window))
}

/// Spike train of an input node held at `current` for one window from the
/// bootstrap potential; bit `k` is set when the node fires at step `k`.
/// `None` when the window does not fit in 64 bits.
///
/// Input nodes have no incoming links, so from a reset state a network's
/// outputs depend on its inputs only through these trains.
pub fn input_spike_train<R: Real>(current: R, params: &LifParams<R>) -> Option<u64> {
    if params.window > 64 {
        return None;
    }
    let mut m = params.c_ini;
    let mut bits = 0u64;
    for k in 0..params.window {
        // same expression as the network update, for bit-identical spikes
        let mut next = m + (current + params.a - params.b * m);
        if next < R::zero() {
            next = R::zero();
        }
        if next > params.threshold {
            next = params.c;
            bits |= 1 << k;
        }
        m = next;
    }
    Some(bits)
}

/// [`input_spike_train`] of every input.
pub fn input_signature<R: Real>(input: &[R], params: &LifParams<R>) -> Option<Vec<u64>> {
    input.iter().map(|&i| input_spike_train(i, params)).collect()
}
