use crate::real::Real;

use super::NetError;

/// Number of output neurons on every classifier network: two action bits
/// followed by the don't-match neuron.
pub const OUTPUTS: usize = 3;

/// Polarity of a spiking node. Weights are never negative; an inhibitory
/// source flips the sign of the current it delivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Excitatory,
    Inhibitory,
}

impl NodeKind {
    #[inline]
    pub fn sign<R: Real>(self) -> R {
        match self {
            NodeKind::Excitatory => R::one(),
            NodeKind::Inhibitory => -R::one(),
        }
    }

    pub(crate) fn symbol(self) -> char {
        match self {
            NodeKind::Excitatory => 'E',
            NodeKind::Inhibitory => 'I',
        }
    }
}

/// One legal connection slot. A disabled slot always stores weight zero so
/// that two genomes with the same behaviour compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link<R> {
    pub weight: R,
    pub enabled: bool,
}

impl<R: Real> Link<R> {
    pub fn on(weight: R) -> Self {
        Link { weight, enabled: true }
    }

    pub fn off() -> Self {
        Link { weight: R::zero(), enabled: false }
    }
}

/// Which network family a classifier uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    Spiking,
    Mlp,
}

impl Representation {
    /// Closed interval connection weights must lie in.
    pub fn weight_range<R: Real>(self) -> (R, R) {
        match self {
            Representation::Spiking => (R::zero(), R::one()),
            Representation::Mlp => (-R::one(), R::one()),
        }
    }
}

/// Spiking network: `input_count` input nodes, a single hidden layer whose
/// nodes may connect to each other (including themselves), and three
/// output nodes.
///
/// Node ids used by the text form and the legality checks are positional:
/// inputs `0..I`, hidden `I..I+H`, outputs `I+H..I+H+3`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikingGenome<R> {
    pub(crate) input_count: usize,
    pub(crate) hidden: Vec<NodeKind>,
    /// `[input * H + hidden]`
    pub(crate) input_hidden: Vec<Link<R>>,
    /// `[source * H + target]`
    pub(crate) hidden_hidden: Vec<Link<R>>,
    /// `[hidden * OUTPUTS + output]`
    pub(crate) hidden_output: Vec<Link<R>>,
}

impl<R: Real> SpikingGenome<R> {
    /// Builds a genome with every legal slot disabled.
    pub fn empty(input_count: usize, hidden: Vec<NodeKind>) -> Self {
        let h = hidden.len();
        SpikingGenome {
            input_count,
            input_hidden: vec![Link::off(); input_count * h],
            hidden_hidden: vec![Link::off(); h * h],
            hidden_output: vec![Link::off(); h * OUTPUTS],
            hidden,
        }
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn hidden(&self) -> &[NodeKind] {
        &self.hidden
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden.len()
    }

    pub fn node_count(&self) -> usize {
        self.input_count + self.hidden.len() + OUTPUTS
    }

    pub fn input_hidden(&self, input: usize, hidden: usize) -> Link<R> {
        self.input_hidden[input * self.hidden.len() + hidden]
    }

    pub fn hidden_hidden(&self, source: usize, target: usize) -> Link<R> {
        self.hidden_hidden[source * self.hidden.len() + target]
    }

    pub fn hidden_output(&self, hidden: usize, output: usize) -> Link<R> {
        self.hidden_output[hidden * OUTPUTS + output]
    }

    /// Kind of the node with positional id `id`. Inputs and outputs are
    /// always excitatory.
    pub fn kind_of(&self, id: usize) -> NodeKind {
        let i = self.input_count;
        if id >= i && id < i + self.hidden.len() {
            self.hidden[id - i]
        } else {
            NodeKind::Excitatory
        }
    }

    /// Mutable access to the slot joining two positional node ids, or `None`
    /// when that link is illegal for this topology.
    pub fn link_mut(&mut self, source: usize, target: usize) -> Option<&mut Link<R>> {
        let i = self.input_count;
        let h = self.hidden.len();
        let n = i + h + OUTPUTS;
        if source >= n || target >= n {
            return None;
        }
        let src_hidden = source >= i && source < i + h;
        let dst_hidden = target >= i && target < i + h;
        let dst_output = target >= i + h;
        if source < i && dst_hidden {
            Some(&mut self.input_hidden[source * h + (target - i)])
        } else if src_hidden && dst_hidden {
            Some(&mut self.hidden_hidden[(source - i) * h + (target - i)])
        } else if src_hidden && dst_output {
            Some(&mut self.hidden_output[(source - i) * OUTPUTS + (target - i - h)])
        } else {
            None
        }
    }

    /// All legal slots as `(source id, target id, link)`.
    pub fn connections(&self) -> impl Iterator<Item = (usize, usize, Link<R>)> + '_ {
        let i = self.input_count;
        let h = self.hidden.len();
        let ih = (0..i).flat_map(move |s| (0..h).map(move |t| (s, i + t, self.input_hidden(s, t))));
        let hh = (0..h).flat_map(move |s| (0..h).map(move |t| (i + s, i + t, self.hidden_hidden(s, t))));
        let ho = (0..h)
            .flat_map(move |s| (0..OUTPUTS).map(move |o| (i + s, i + h + o, self.hidden_output(s, o))));
        ih.chain(hh).chain(ho)
    }

    pub(crate) fn links(&self) -> impl Iterator<Item = &Link<R>> {
        self.input_hidden.iter().chain(&self.hidden_hidden).chain(&self.hidden_output)
    }

    pub(crate) fn links_mut(&mut self) -> impl Iterator<Item = &mut Link<R>> {
        self.input_hidden
            .iter_mut()
            .chain(self.hidden_hidden.iter_mut())
            .chain(self.hidden_output.iter_mut())
    }

    /// Appends a hidden node whose incident slots are produced by `link`.
    /// The slots are generated in the order: input links, links from
    /// existing hidden nodes, links to existing hidden nodes, self-link,
    /// output links.
    pub(crate) fn push_hidden(&mut self, kind: NodeKind, mut link: impl FnMut() -> Link<R>) {
        let i = self.input_count;
        let h = self.hidden.len();
        let nh = h + 1;

        let mut ih = Vec::with_capacity(i * nh);
        for s in 0..i {
            ih.extend_from_slice(&self.input_hidden[s * h..(s + 1) * h]);
            ih.push(link());
        }

        let mut hh = vec![Link::off(); nh * nh];
        for s in 0..h {
            for t in 0..h {
                hh[s * nh + t] = self.hidden_hidden[s * h + t];
            }
        }
        for s in 0..h {
            hh[s * nh + h] = link();
        }
        for t in 0..h {
            hh[h * nh + t] = link();
        }
        hh[h * nh + h] = link();

        for _ in 0..OUTPUTS {
            let l = link();
            self.hidden_output.push(l);
        }
        self.input_hidden = ih;
        self.hidden_hidden = hh;
        self.hidden.push(kind);
    }

    /// Removes hidden node `k` and every slot touching it.
    pub(crate) fn remove_hidden(&mut self, k: usize) {
        let i = self.input_count;
        let h = self.hidden.len();
        let nh = h - 1;
        let mut ih = Vec::with_capacity(i * nh);
        for s in 0..i {
            for t in (0..h).filter(|&t| t != k) {
                ih.push(self.input_hidden[s * h + t]);
            }
        }
        let mut hh = Vec::with_capacity(nh * nh);
        for s in (0..h).filter(|&s| s != k) {
            for t in (0..h).filter(|&t| t != k) {
                hh.push(self.hidden_hidden[s * h + t]);
            }
        }
        self.hidden_output.drain(k * OUTPUTS..(k + 1) * OUTPUTS);
        self.input_hidden = ih;
        self.hidden_hidden = hh;
        self.hidden.remove(k);
    }

    /// Checks the structural invariants: at least one hidden node, slot
    /// vectors sized for the node counts, weights inside `[0, 1]`, disabled
    /// slots zeroed.
    pub fn validate(&self) -> Result<(), NetError> {
        let i = self.input_count;
        let h = self.hidden.len();
        if h == 0 {
            return Err(NetError::NoHiddenNodes);
        }
        check_len(self.input_hidden.len(), i * h)?;
        check_len(self.hidden_hidden.len(), h * h)?;
        check_len(self.hidden_output.len(), h * OUTPUTS)?;
        check_links(self.connections(), Representation::Spiking)
    }
}

/// Feed-forward network with one hidden layer and no intra-layer or
/// recurrent links. Node ids follow the same positional scheme as
/// [`SpikingGenome`].
#[derive(Clone, Debug, PartialEq)]
pub struct MlpGenome<R> {
    pub(crate) input_count: usize,
    pub(crate) hidden_count: usize,
    /// `[input * H + hidden]`
    pub(crate) input_hidden: Vec<Link<R>>,
    /// `[hidden * OUTPUTS + output]`
    pub(crate) hidden_output: Vec<Link<R>>,
}

impl<R: Real> MlpGenome<R> {
    pub fn empty(input_count: usize, hidden_count: usize) -> Self {
        MlpGenome {
            input_count,
            hidden_count,
            input_hidden: vec![Link::off(); input_count * hidden_count],
            hidden_output: vec![Link::off(); hidden_count * OUTPUTS],
        }
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_count
    }

    pub fn input_hidden(&self, input: usize, hidden: usize) -> Link<R> {
        self.input_hidden[input * self.hidden_count + hidden]
    }

    pub fn hidden_output(&self, hidden: usize, output: usize) -> Link<R> {
        self.hidden_output[hidden * OUTPUTS + output]
    }

    pub fn link_mut(&mut self, source: usize, target: usize) -> Option<&mut Link<R>> {
        let i = self.input_count;
        let h = self.hidden_count;
        if source < i && target >= i && target < i + h {
            Some(&mut self.input_hidden[source * h + (target - i)])
        } else if source >= i && source < i + h && target >= i + h && target < i + h + OUTPUTS {
            Some(&mut self.hidden_output[(source - i) * OUTPUTS + (target - i - h)])
        } else {
            None
        }
    }

    pub fn connections(&self) -> impl Iterator<Item = (usize, usize, Link<R>)> + '_ {
        let i = self.input_count;
        let h = self.hidden_count;
        let ih = (0..i).flat_map(move |s| (0..h).map(move |t| (s, i + t, self.input_hidden(s, t))));
        let ho = (0..h)
            .flat_map(move |s| (0..OUTPUTS).map(move |o| (i + s, i + h + o, self.hidden_output(s, o))));
        ih.chain(ho)
    }

    pub(crate) fn links(&self) -> impl Iterator<Item = &Link<R>> {
        self.input_hidden.iter().chain(&self.hidden_output)
    }

    pub(crate) fn links_mut(&mut self) -> impl Iterator<Item = &mut Link<R>> {
        self.input_hidden.iter_mut().chain(self.hidden_output.iter_mut())
    }

    pub(crate) fn push_hidden(&mut self, mut link: impl FnMut() -> Link<R>) {
        let i = self.input_count;
        let h = self.hidden_count;
        let mut ih = Vec::with_capacity(i * (h + 1));
        for s in 0..i {
            ih.extend_from_slice(&self.input_hidden[s * h..(s + 1) * h]);
            ih.push(link());
        }
        for _ in 0..OUTPUTS {
            let l = link();
            self.hidden_output.push(l);
        }
        self.input_hidden = ih;
        self.hidden_count += 1;
    }

    pub(crate) fn remove_hidden(&mut self, k: usize) {
        let i = self.input_count;
        let h = self.hidden_count;
        let mut ih = Vec::with_capacity(i * (h - 1));
        for s in 0..i {
            for t in (0..h).filter(|&t| t != k) {
                ih.push(self.input_hidden[s * h + t]);
            }
        }
        self.hidden_output.drain(k * OUTPUTS..(k + 1) * OUTPUTS);
        self.input_hidden = ih;
        self.hidden_count -= 1;
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let i = self.input_count;
        let h = self.hidden_count;
        if h == 0 {
            return Err(NetError::NoHiddenNodes);
        }
        check_len(self.input_hidden.len(), i * h)?;
        check_len(self.hidden_output.len(), h * OUTPUTS)?;
        check_links(self.connections(), Representation::Mlp)
    }
}

fn check_len(found: usize, expected: usize) -> Result<(), NetError> {
    if found == expected {
        Ok(())
    } else {
        Err(NetError::DimensionMismatch { expected, found })
    }
}

fn check_links<R: Real>(
    links: impl Iterator<Item = (usize, usize, Link<R>)>,
    rep: Representation,
) -> Result<(), NetError> {
    let (lo, hi) = rep.weight_range::<R>();
    for (source, target, link) in links {
        let w = link.weight;
        if !w.is_finite() || w < lo || w > hi {
            return Err(NetError::WeightOutOfRange { from: source, to: target, weight: w.as_f64() });
        }
        if !link.enabled && w != R::zero() {
            return Err(NetError::StaleDisabledWeight { from: source, to: target });
        }
    }
    Ok(())
}

/// A classifier's network, either spiking or MLP.
#[derive(Clone, Debug, PartialEq)]
pub enum Genome<R> {
    Spiking(SpikingGenome<R>),
    Mlp(MlpGenome<R>),
}

impl<R: Real> Genome<R> {
    pub fn representation(&self) -> Representation {
        match self {
            Genome::Spiking(_) => Representation::Spiking,
            Genome::Mlp(_) => Representation::Mlp,
        }
    }

    pub fn input_count(&self) -> usize {
        match self {
            Genome::Spiking(g) => g.input_count,
            Genome::Mlp(g) => g.input_count,
        }
    }

    pub fn hidden_count(&self) -> usize {
        match self {
            Genome::Spiking(g) => g.hidden.len(),
            Genome::Mlp(g) => g.hidden_count,
        }
    }

    /// Number of nodes whose membrane is simulated. Zero for MLPs, which
    /// carry no state between activations.
    pub fn state_size(&self) -> usize {
        match self {
            Genome::Spiking(g) => g.node_count(),
            Genome::Mlp(_) => 0,
        }
    }

    pub fn connections(&self) -> Box<dyn Iterator<Item = (usize, usize, Link<R>)> + '_> {
        match self {
            Genome::Spiking(g) => Box::new(g.connections()),
            Genome::Mlp(g) => Box::new(g.connections()),
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        match self {
            Genome::Spiking(g) => g.validate(),
            Genome::Mlp(g) => g.validate(),
        }
    }

    pub(crate) fn links_mut(&mut self) -> Box<dyn Iterator<Item = &mut Link<R>> + '_> {
        match self {
            Genome::Spiking(g) => Box::new(g.links_mut()),
            Genome::Mlp(g) => Box::new(g.links_mut()),
        }
    }

    pub(crate) fn links(&self) -> Box<dyn Iterator<Item = &Link<R>> + '_> {
        match self {
            Genome::Spiking(g) => Box::new(g.links()),
            Genome::Mlp(g) => Box::new(g.links()),
        }
    }
}

impl<R: Real> From<SpikingGenome<R>> for Genome<R> {
    fn from(g: SpikingGenome<R>) -> Self {
        Genome::Spiking(g)
    }
}

impl<R: Real> From<MlpGenome<R>> for Genome<R> {
    fn from(g: MlpGenome<R>) -> Self {
        Genome::Mlp(g)
    }
}
