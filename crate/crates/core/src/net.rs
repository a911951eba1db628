//! Feedforward networks of rectifier linear units and binary step units.
//!
//! A [`Network`] is a layered DAG: layer 0 is the external input vector,
//! hidden layers hold [`Neuron`]s, and a linear readout combines node
//! outputs. Connections may skip layers; [`Network::to_strict`] rewrites a
//! net so that every edge joins adjacent layers.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// The two activation functions the constructions use.
///
/// `Step` is threshold-inclusive: the unit fires 1 at pre-activation 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Step,
}

impl Activation {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Step => {
                if v >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Reference to a node: layer 0 is the external input, layer `l >= 1` the
/// `l`-th hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeRef {
    pub layer: usize,
    pub index: usize,
}

impl NodeRef {
    pub fn new(layer: usize, index: usize) -> Self {
        NodeRef { layer, index }
    }

    /// Reference to input coordinate `i`.
    pub fn input(i: usize) -> Self {
        NodeRef { layer: 0, index: i }
    }
}

/// A single computational unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Neuron {
    pub activation: Activation,
    /// (source, weight) pairs; sources must live in strictly earlier layers.
    pub inputs: Vec<(NodeRef, f64)>,
    pub bias: f64,
    /// Set by builders when the construction guarantees the output is >= 0
    /// on the declared domain. Never inferred.
    pub nonneg: bool,
}

impl Neuron {
    pub fn relu(inputs: Vec<(NodeRef, f64)>, bias: f64, nonneg: bool) -> Self {
        Neuron {
            activation: Activation::Relu,
            inputs,
            bias,
            nonneg,
        }
    }

    pub fn step(inputs: Vec<(NodeRef, f64)>, bias: f64) -> Self {
        Neuron {
            activation: Activation::Step,
            inputs,
            bias,
            // step outputs live in {0, 1}
            nonneg: true,
        }
    }
}

/// Affine combination of node outputs; used for readouts, decoder inputs
/// and mid-network probes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine {
    pub terms: Vec<(NodeRef, f64)>,
    pub bias: f64,
}

impl Affine {
    pub fn new(terms: Vec<(NodeRef, f64)>, bias: f64) -> Self {
        Affine { terms, bias }
    }

    pub fn from_node(r: NodeRef) -> Self {
        Affine {
            terms: vec![(r, 1.0)],
            bias: 0.0,
        }
    }

    /// Multiply all weights and the bias by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Affine {
            terms: self.terms.iter().map(|&(r, w)| (r, w * s)).collect(),
            bias: self.bias * s,
        }
    }

    /// Evaluate against node values produced by [`Network::forward`].
    pub fn eval(&self, values: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for &(r, w) in &self.terms {
            acc += w * values[r.layer][r.index];
        }
        acc + self.bias
    }
}

/// Neuron tally of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub depth: usize,
    pub relu: usize,
    pub step: usize,
    pub total: usize,
}

/// Layered feedforward network with a linear readout.
///
/// The readout is affine rather than activation-wrapped: the polynomial
/// readouts the builders produce take signed values.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub input_dim: usize,
    pub layers: Vec<Vec<Neuron>>,
    pub readout: Affine,
    /// Semantic names ("bit_0", "g_3", ...) for nodes of interest.
    pub tags: BTreeMap<String, NodeRef>,
}

impl Network {
    /// Forward-propagate and return every node value, `values[0]` being the
    /// input itself. Pre-activations accumulate the weighted inputs in
    /// stored order and add the bias last; the bit decoder's exactness
    /// argument depends on this order.
    pub fn forward(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        values.push(x.to_vec());
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.len());
            for neuron in layer {
                let mut acc = 0.0;
                for &(r, w) in &neuron.inputs {
                    acc += w * values[r.layer][r.index];
                }
                acc += neuron.bias;
                out.push(neuron.activation.apply(acc));
            }
            values.push(out);
        }
        values
    }

    /// Readout value at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// As [`eval`](Self::eval) but skipping the dimension check.
    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let values = self.forward(x);
        self.readout.eval(&values)
    }

    /// Value of a tagged node at `x`.
    pub fn eval_tag(&self, tag: &str, x: &[f64]) -> Option<f64> {
        let r = *self.tags.get(tag)?;
        let values = self.forward(x);
        Some(values[r.layer][r.index])
    }

    pub fn count(&self) -> Counts {
        let mut relu = 0;
        let mut step = 0;
        for layer in &self.layers {
            for n in layer {
                match n.activation {
                    Activation::Relu => relu += 1,
                    Activation::Step => step += 1,
                }
            }
        }
        Counts {
            depth: self.layers.len(),
            relu,
            step,
            total: relu + step,
        }
    }

    fn layer_size(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.layers[layer - 1].len()
        }
    }

    /// Check the structural invariants; deserialized nets go through this.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Invalid("input_dim must be positive".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::Invalid("network needs at least one hidden layer".into()));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.is_empty() {
                return Err(Error::Invalid(format!("hidden layer {} is empty", i + 1)));
            }
            let at = i + 1;
            for neuron in layer {
                if !neuron.bias.is_finite() {
                    return Err(Error::Invalid("non-finite bias".into()));
                }
                for &(r, w) in &neuron.inputs {
                    if !w.is_finite() {
                        return Err(Error::Invalid("non-finite weight".into()));
                    }
                    if r.layer >= at {
                        return Err(Error::DanglingRef {
                            layer: r.layer,
                            index: r.index,
                            at,
                            reason: "source must lie in a strictly earlier layer",
                        });
                    }
                    if r.index >= self.layer_size(r.layer) {
                        return Err(Error::DanglingRef {
                            layer: r.layer,
                            index: r.index,
                            at,
                            reason: "index out of range",
                        });
                    }
                }
            }
        }
        let last = self.layers.len() + 1;
        for &(r, w) in &self.readout.terms {
            if !w.is_finite() {
                return Err(Error::Invalid("non-finite readout weight".into()));
            }
            if r.layer > self.layers.len() || r.index >= self.layer_size(r.layer) {
                return Err(Error::DanglingRef {
                    layer: r.layer,
                    index: r.index,
                    at: last,
                    reason: "readout references a missing node",
                });
            }
        }
        if !self.readout.bias.is_finite() {
            return Err(Error::Invalid("non-finite readout bias".into()));
        }
        for (name, &r) in &self.tags {
            if r.layer == 0 || r.layer > self.layers.len() || r.index >= self.layer_size(r.layer) {
                return Err(Error::Invalid(format!("tag `{name}` references a missing node")));
            }
        }
        Ok(())
    }

    fn is_strict(&self) -> bool {
        for (i, layer) in self.layers.iter().enumerate() {
            let at = i + 1;
            for neuron in layer {
                if neuron.inputs.iter().any(|&(r, _)| r.layer + 1 != at) {
                    return false;
                }
            }
        }
        let last = self.layers.len();
        self.readout.terms.iter().all(|&(r, _)| r.layer == last)
    }

    /// Rewrite the network so that every connection joins adjacent layers.
    ///
    /// Skipped values are carried forward layer by layer: one relu per layer
    /// when the source neuron is flagged `nonneg`, otherwise the pair
    /// `(relu(v), relu(-v))` recombined with weights `(+1, -1)`. Input
    /// coordinates are carried as pairs, so the strict form agrees with the
    /// original exactly at every point, in or out of the domain. Networks
    /// that are already strict are returned unchanged.
    pub fn to_strict(&self) -> Network {
        if self.is_strict() {
            return self.clone();
        }
        let depth = self.layers.len();

        // Last layer that consumes each value; the readout counts as depth+1.
        let mut last_needed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut note = |r: NodeRef, at: usize| {
            let e = last_needed.entry((r.layer, r.index)).or_insert(at);
            if *e < at {
                *e = at;
            }
        };
        for (i, layer) in self.layers.iter().enumerate() {
            for neuron in layer {
                for &(r, _) in &neuron.inputs {
                    note(r, i + 1);
                }
            }
        }
        for &(r, _) in &self.readout.terms {
            note(r, depth + 1);
        }

        // How a carried value is represented at the frontier layer.
        #[derive(Clone, Copy)]
        enum Carried {
            Single(usize),
            Pair(usize, usize),
        }

        let mut new_layers: Vec<Vec<Neuron>> = Vec::with_capacity(depth);
        // carried[(layer, index)] -> representation inside new layer `l`
        // while building layer `l + 1`.
        let mut carried: BTreeMap<(usize, usize), Carried> = BTreeMap::new();

        // Rewire one original input reference against the previous layer.
        let rewire = |r: NodeRef,
                      w: f64,
                      at: usize,
                      carried: &BTreeMap<(usize, usize), Carried>,
                      out: &mut Vec<(NodeRef, f64)>| {
            if r.layer + 1 == at {
                out.push((NodeRef::new(r.layer, r.index), w));
            } else {
                match carried[&(r.layer, r.index)] {
                    Carried::Single(j) => out.push((NodeRef::new(at - 1, j), w)),
                    Carried::Pair(p, n) => {
                        out.push((NodeRef::new(at - 1, p), w));
                        out.push((NodeRef::new(at - 1, n), -w));
                    }
                }
            }
        };

        for l in 1..=depth {
            // Originals first so existing NodeRefs (and tags) keep their
            // coordinates.
            let mut layer: Vec<Neuron> = Vec::new();
            for neuron in &self.layers[l - 1] {
                let mut inputs = Vec::with_capacity(neuron.inputs.len());
                for &(r, w) in &neuron.inputs {
                    rewire(r, w, l, &carried, &mut inputs);
                }
                layer.push(Neuron {
                    activation: neuron.activation,
                    inputs,
                    bias: neuron.bias,
                    nonneg: neuron.nonneg,
                });
            }

            // Carry every value needed beyond the next layer.
            let mut next_carried: BTreeMap<(usize, usize), Carried> = BTreeMap::new();
            for (&(src_layer, src_index), &until) in &last_needed {
                if src_layer >= l || until <= l {
                    continue;
                }
                let src = NodeRef::new(src_layer, src_index);
                let carry_from: Carried = if src_layer + 1 == l {
                    // first hop: read the source directly
                    let nonneg = src_layer > 0 && self.layers[src_layer - 1][src_index].nonneg;
                    if nonneg {
                        layer.push(Neuron::relu(vec![(src, 1.0)], 0.0, true));
                        Carried::Single(layer.len() - 1)
                    } else {
                        layer.push(Neuron::relu(vec![(src, 1.0)], 0.0, true));
                        let p = layer.len() - 1;
                        layer.push(Neuron::relu(vec![(src, -1.0)], 0.0, true));
                        Carried::Pair(p, layer.len() - 1)
                    }
                } else {
                    match carried[&(src_layer, src_index)] {
                        Carried::Single(j) => {
                            layer.push(Neuron::relu(
                                vec![(NodeRef::new(l - 1, j), 1.0)],
                                0.0,
                                true,
                            ));
                            Carried::Single(layer.len() - 1)
                        }
                        Carried::Pair(p, n) => {
                            layer.push(Neuron::relu(
                                vec![(NodeRef::new(l - 1, p), 1.0)],
                                0.0,
                                true,
                            ));
                            let np = layer.len() - 1;
                            layer.push(Neuron::relu(
                                vec![(NodeRef::new(l - 1, n), 1.0)],
                                0.0,
                                true,
                            ));
                            Carried::Pair(np, layer.len() - 1)
                        }
                    }
                };
                next_carried.insert((src_layer, src_index), carry_from);
            }
            carried = next_carried;
            new_layers.push(layer);
        }

        let mut terms = Vec::with_capacity(self.readout.terms.len());
        for &(r, w) in &self.readout.terms {
            rewire(r, w, depth + 1, &carried, &mut terms);
        }

        Network {
            input_dim: self.input_dim,
            layers: new_layers,
            readout: Affine::new(terms, self.readout.bias),
            tags: self.tags.clone(),
        }
    }
}

/// Incremental constructor used by the builders. Layers are 1-based to
/// match [`NodeRef`]; pushing into a not-yet-existing layer creates the
/// intermediate ones, which must be filled before `finish`.
#[derive(Debug)]
pub struct NetBuilder {
    input_dim: usize,
    layers: Vec<Vec<Neuron>>,
    tags: BTreeMap<String, NodeRef>,
}

impl NetBuilder {
    pub fn new(input_dim: usize) -> Self {
        NetBuilder {
            input_dim,
            layers: Vec::new(),
            tags: BTreeMap::new(),
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Add a neuron to 1-based `layer`, growing the layer list as needed.
    pub fn push_at(&mut self, layer: usize, neuron: Neuron) -> NodeRef {
        assert!(layer >= 1, "hidden layers are 1-based");
        for &(r, _) in &neuron.inputs {
            assert!(r.layer < layer, "neuron input must come from an earlier layer");
        }
        while self.layers.len() < layer {
            self.layers.push(Vec::new());
        }
        let slot = &mut self.layers[layer - 1];
        slot.push(neuron);
        NodeRef::new(layer, slot.len() - 1)
    }

    pub fn tag(&mut self, name: impl Into<String>, r: NodeRef) {
        self.tags.insert(name.into(), r);
    }

    pub fn finish(self, readout: Affine) -> Network {
        let net = Network {
            input_dim: self.input_dim,
            layers: self.layers,
            readout,
            tags: self.tags,
        };
        if let Err(e) = net.validate() {
            panic!("builder produced an invalid network: {e}");
        }
        net
    }
}
