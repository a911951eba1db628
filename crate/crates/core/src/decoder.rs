//! Binary-expansion decoder: a chain of step units that emits the bits of a
//! scalar in `[0,1]`, plus the plain-arithmetic truncation oracle.
//!
//! Bit `i` is `step(r_i - 2^{-i})` with `r_0 = x` and
//! `r_{i+1} = r_i - bit_i / 2^i`; the residual is never materialized as a
//! node, it rides along as skip connections into each later step unit. The
//! step threshold is inclusive, so dyadic inputs take their terminating
//! expansion (0.5 decodes as 0.1000..., never 0.0111...).

use crate::error::{Error, Result};
use crate::net::{Affine, NetBuilder, Network, NodeRef};
use crate::net::Neuron;
use crate::util::pow2;

/// Handle to the bit nodes a decoder added to a builder.
#[derive(Debug, Clone)]
pub struct DecoderFragment {
    /// `bits[j]` carries the bit of weight `2^{-(first_bit + j)}`.
    pub bits: Vec<NodeRef>,
    pub first_bit: u32,
    /// Index of the last bit; for the standard decoder this is the `n` of an
    /// `n`-bit truncation with bits `0..=n`.
    pub bit_count: u32,
}

impl DecoderFragment {
    /// Affine form of the truncated value `sum_i bit_i / 2^i`.
    pub fn truncation(&self) -> Affine {
        let terms = self
            .bits
            .iter()
            .enumerate()
            .map(|(j, &r)| (r, pow2(-((self.first_bit + j as u32) as i32))))
            .collect();
        Affine::new(terms, 0.0)
    }
}

/// Wire a decoder for bits `first_bit..=last_bit` of the affine value
/// `input`, one step unit per bit, bit `i` landing on layer
/// `start_layer + (i - first_bit)`.
///
/// Input terms come first in each unit's input list and the threshold rides
/// in the bias, added last; bit-exactness against [`decode_bits`] depends on
/// that ordering.
pub fn attach_decoder(
    b: &mut NetBuilder,
    input: &Affine,
    first_bit: u32,
    last_bit: u32,
    start_layer: usize,
    tag_prefix: Option<&str>,
) -> DecoderFragment {
    assert!(first_bit <= last_bit);
    let mut bits: Vec<NodeRef> = Vec::with_capacity((last_bit - first_bit + 1) as usize);
    for i in first_bit..=last_bit {
        let mut inputs = input.terms.clone();
        for (j, &bit) in bits.iter().enumerate() {
            inputs.push((bit, -pow2(-((first_bit + j as u32) as i32))));
        }
        let bias = input.bias - pow2(-(i as i32));
        let layer = start_layer + (i - first_bit) as usize;
        let r = b.push_at(layer, Neuron::step(inputs, bias));
        if let Some(prefix) = tag_prefix {
            b.tag(format!("{prefix}{i}"), r);
        }
        bits.push(r);
    }
    DecoderFragment {
        bits,
        first_bit,
        bit_count: last_bit,
    }
}

/// Standalone decoder network for bits `0..=n`: tags `bit_0..bit_n`, readout
/// equal to the truncated value.
pub fn build_decoder(n: u32) -> (Network, DecoderFragment) {
    let mut b = NetBuilder::new(1);
    let input = Affine::from_node(NodeRef::input(0));
    let frag = attach_decoder(&mut b, &input, 0, n, 1, Some("bit_"));
    let net = b.finish(frag.truncation());
    (net, frag)
}

/// Reference bit sequence for `x`, same arithmetic as the network.
pub fn decode_bits(x: f64, n: u32) -> Vec<u8> {
    decode_bits_range(x, 0, n)
}

/// Bits `first..=last` of `x` by the residual recurrence.
pub fn decode_bits_range(x: f64, first: u32, last: u32) -> Vec<u8> {
    let mut r = x;
    let mut bits = Vec::with_capacity((last - first + 1) as usize);
    for i in first..=last {
        let p = pow2(-(i as i32));
        if r >= p {
            bits.push(1u8);
            r -= p;
        } else {
            bits.push(0u8);
        }
    }
    bits
}

/// `floor(x * 2^n) / 2^n`; `truncate(1, n) = 1` since the expansion of 1
/// starts with the integer bit.
pub fn truncate(x: f64, n: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainViolation(x));
    }
    Ok(truncate_unchecked(x, n))
}

pub(crate) fn truncate_unchecked(x: f64, n: u32) -> f64 {
    let s = pow2(n as i32);
    (x * s).floor() / s
}

/// Truncation over bits `1..=n` only (no integer bit); saturates at
/// `1 - 2^{-n}` for `x = 1`. The multivariate decoders use this form.
pub(crate) fn truncate_low_unchecked(x: f64, n: u32) -> f64 {
    let s = pow2(n as i32);
    ((x * s).floor()).min(s - 1.0) / s
}
