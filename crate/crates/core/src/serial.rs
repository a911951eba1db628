//! JSON-shaped text serialization of networks.
//!
//! Weights travel as decimal doubles in shortest round-trip form, so
//! `deserialize(serialize(net))` reproduces every weight bit for bit.

use crate::error::{Error, Result};
use crate::net::{Activation, Affine, Network, Neuron, NodeRef};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct WireRef {
    layer: usize,
    index: usize,
}

#[derive(Serialize, Deserialize)]
struct WireEdge {
    layer: usize,
    index: usize,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct WireNeuron {
    act: WireAct,
    inputs: Vec<WireEdge>,
    bias: f64,
    nonneg: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum WireAct {
    Relu,
    Step,
}

#[derive(Serialize, Deserialize)]
struct WireReadout {
    terms: Vec<WireEdge>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
struct WireNetwork {
    version: u32,
    input_dim: usize,
    layers: Vec<Vec<WireNeuron>>,
    readout: WireReadout,
    tags: BTreeMap<String, WireRef>,
}

fn edges(terms: &[(NodeRef, f64)]) -> Vec<WireEdge> {
    terms
        .iter()
        .map(|&(r, w)| WireEdge {
            layer: r.layer,
            index: r.index,
            weight: w,
        })
        .collect()
}

fn terms(edges: Vec<WireEdge>) -> Vec<(NodeRef, f64)> {
    edges
        .into_iter()
        .map(|e| (NodeRef::new(e.layer, e.index), e.weight))
        .collect()
}

pub fn serialize(net: &Network) -> String {
    let wire = WireNetwork {
        version: VERSION,
        input_dim: net.input_dim,
        layers: net
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|n| WireNeuron {
                        act: match n.activation {
                            Activation::Relu => WireAct::Relu,
                            Activation::Step => WireAct::Step,
                        },
                        inputs: edges(&n.inputs),
                        bias: n.bias,
                        nonneg: n.nonneg,
                    })
                    .collect()
            })
            .collect(),
        readout: WireReadout {
            terms: edges(&net.readout.terms),
            bias: net.readout.bias,
        },
        tags: net
            .tags
            .iter()
            .map(|(k, r)| {
                (
                    k.clone(),
                    WireRef {
                        layer: r.layer,
                        index: r.index,
                    },
                )
            })
            .collect(),
    };
    serde_json::to_string(&wire).expect("network serialization cannot fail")
}

pub fn deserialize(text: &str) -> Result<Network> {
    let wire: WireNetwork =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if wire.version != VERSION {
        return Err(Error::UnknownVersion(wire.version));
    }
    let net = Network {
        input_dim: wire.input_dim,
        layers: wire
            .layers
            .into_iter()
            .map(|layer| {
                layer
                    .into_iter()
                    .map(|n| Neuron {
                        activation: match n.act {
                            WireAct::Relu => Activation::Relu,
                            WireAct::Step => Activation::Step,
                        },
                        inputs: terms(n.inputs),
                        bias: n.bias,
                        nonneg: n.nonneg,
                    })
                    .collect()
            })
            .collect(),
        readout: Affine::new(terms(wire.readout.terms), wire.readout.bias),
        tags: wire
            .tags
            .into_iter()
            .map(|(k, r)| (k, NodeRef::new(r.layer, r.index)))
            .collect(),
    };
    net.validate()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetBuilder;

    fn sample_net() -> Network {
        let mut b = NetBuilder::new(1);
        let s = b.push_at(1, Neuron::step(vec![(NodeRef::input(0), 1.0)], -0.5));
        let r = b.push_at(
            2,
            Neuron::relu(vec![(s, 2.0), (NodeRef::input(0), 0.125)], -2.0, true),
        );
        b.tag("bit_0", s);
        b.finish(Affine::new(vec![(r, 1.0)], 0.25))
    }

    #[test]
    fn round_trip_is_identity() {
        let net = sample_net();
        let text = serialize(&net);
        let back = deserialize(&text).unwrap();
        assert_eq!(back, net);
        // and the text itself is stable
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn round_trip_preserves_weight_bits() {
        let mut net = sample_net();
        net.layers[1][0].inputs[1].1 = 0.1 + 0.2; // a value with an awkward tail
        net.readout.bias = f64::MIN_POSITIVE;
        let back = deserialize(&serialize(&net)).unwrap();
        assert_eq!(
            back.layers[1][0].inputs[1].1.to_bits(),
            net.layers[1][0].inputs[1].1.to_bits()
        );
        assert_eq!(back.readout.bias.to_bits(), net.readout.bias.to_bits());
    }

    #[test]
    fn forward_reference_rejected() {
        let text = r#"{"version":1,"input_dim":1,
            "layers":[[{"act":"relu","inputs":[{"layer":2,"index":0,"weight":1.0}],"bias":0.0,"nonneg":false}],
                      [{"act":"relu","inputs":[{"layer":0,"index":0,"weight":1.0}],"bias":0.0,"nonneg":false}]],
            "readout":{"terms":[{"layer":2,"index":0,"weight":1.0}],"bias":0.0},"tags":{}}"#;
        assert!(matches!(deserialize(text), Err(Error::DanglingRef { .. })));
    }

    #[test]
    fn unknown_activation_rejected() {
        let text = r#"{"version":1,"input_dim":1,
            "layers":[[{"act":"tanh","inputs":[{"layer":0,"index":0,"weight":1.0}],"bias":0.0,"nonneg":false}]],
            "readout":{"terms":[{"layer":1,"index":0,"weight":1.0}],"bias":0.0},"tags":{}}"#;
        match deserialize(text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("tanh"), "message: {msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_version_rejected() {
        let text = serialize(&sample_net()).replace("\"version\":1", "\"version\":9");
        assert!(matches!(deserialize(&text), Err(Error::UnknownVersion(9))));
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(matches!(deserialize("not json"), Err(Error::Parse(_))));
    }
}
