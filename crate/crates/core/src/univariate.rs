//! Univariate constructions: the bit-multiplication gadget, the square
//! network, monomial ladders, polynomial readouts and the smooth-function
//! builder on top of Chebyshev interpolation.

use crate::cheb;
use crate::decoder::{self, DecoderFragment};
use crate::error::{Error, Result};
use crate::net::{Affine, Counts, NetBuilder, Network, Neuron, NodeRef};
use crate::report::{self, BuildReport};
use crate::target::ApproxTarget;
use crate::util::{ceil_log2_ratio, pow2};

/// Trailing readout coefficients are dropped only while their total l1
/// mass stays below this fraction of the requested tolerance; the dropped
/// mass is added to the reported bound.
pub(crate) const TRIM_BUDGET: f64 = 1e-3;

/// One relu computing `b * y` for a bit `b` and a value `y` in `[0, 2]`:
/// `max(0, 2(b - 1) + y)`. The `y <= 2` precondition is the builder's
/// obligation.
pub fn bit_gate(bit: NodeRef, value: NodeRef) -> Neuron {
    Neuron::relu(vec![(bit, 2.0), (value, 1.0)], -2.0, true)
}

/// The gadget identity in plain arithmetic; exact in f64 for `b` in {0, 1}
/// and `y` in `[0, 2]` because `2(b-1)` cancels before `y` is added.
pub fn gate_value(bit: f64, y: f64) -> f64 {
    (2.0 * (bit - 1.0) + y).max(0.0)
}

pub(crate) struct Ladder {
    /// Materialized `g_1..g_p` nodes, `g_m = truncation^m`.
    pub g: Vec<NodeRef>,
    pub next_layer: usize,
}

/// Stack `stages` gadget iterations over the decoder bits: stage `m` holds
/// one gadget relu per bit computing `bit_j * g_{m-1} / 2^j`, and a
/// follow-up relu materializes their sum as the node `g_m`.
pub(crate) fn attach_ladder(
    b: &mut NetBuilder,
    frag: &DecoderFragment,
    stages: u32,
    start_layer: usize,
    tag_g: Option<&str>,
) -> Ladder {
    let mut g: Vec<NodeRef> = Vec::with_capacity(stages as usize);
    let mut layer = start_layer;
    for m in 1..=stages {
        let mut gadgets = Vec::with_capacity(frag.bits.len());
        for (j, &bit) in frag.bits.iter().enumerate() {
            let w = pow2(-((frag.first_bit + j as u32) as i32));
            let neuron = if m == 1 {
                // g_0 == 1, so y = 1/2^j folds into the bias
                Neuron::relu(vec![(bit, 2.0)], w - 2.0, true)
            } else {
                Neuron::relu(vec![(bit, 2.0), (g[m as usize - 2], w)], -2.0, true)
            };
            gadgets.push(b.push_at(layer, neuron));
        }
        let sum = gadgets.iter().map(|&r| (r, 1.0)).collect();
        let gm = b.push_at(layer + 1, Neuron::relu(sum, 0.0, true));
        if let Some(prefix) = tag_g {
            b.tag(format!("{prefix}{m}"), gm);
        }
        g.push(gm);
        layer += 2;
    }
    Ladder {
        g,
        next_layer: layer,
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    Ok(())
}

/// Square approximator: an `n`-bit decoder followed by a single layer of
/// `n + 1` gadget relus whose sum is `truncate(x, n)^2`, with
/// `n = ceil(log2(1/eps)) + 1` and sup error at most `1/2^{n-1} <= eps`.
pub fn build_square(eps: f64) -> Result<(Network, BuildReport)> {
    check_eps(eps)?;
    let n = ceil_log2_ratio(1.0, eps) + 1;
    let (net, report) = square_net(n, eps)?;
    Ok((net, report))
}

fn square_net(n: u32, eps: f64) -> Result<(Network, BuildReport)> {
    let mut b = NetBuilder::new(1);
    let frag = decoder::attach_decoder(
        &mut b,
        &Affine::from_node(NodeRef::input(0)),
        0,
        n,
        1,
        Some("bit_"),
    );
    let gadget_layer = n as usize + 2;
    let mut gadgets = Vec::with_capacity(frag.bits.len());
    for i in 0..=n {
        // y = truncation / 2^i expanded over the bits; the bit's own gate
        // weight and its y share merge into one edge
        let mut inputs = vec![(frag.bits[i as usize], 2.0 + pow2(-2 * i as i32))];
        for j in 0..=n {
            if j != i {
                inputs.push((frag.bits[j as usize], pow2(-((i + j) as i32))));
            }
        }
        gadgets.push(b.push_at(gadget_layer, Neuron::relu(inputs, -2.0, true)));
    }
    let readout = Affine::new(gadgets.iter().map(|&r| (r, 1.0)).collect(), 0.0);
    let net = b.finish(readout);

    let bound = pow2(1 - n as i32);
    let xs = report::verification_grid_1d(n);
    let measured = report::measure_1d(&net, |x| x * x, &xs);
    let report = BuildReport {
        builder: "square".into(),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(n),
        degree: None,
        expected: Counts {
            depth: n as usize + 2,
            relu: n as usize + 1,
            step: n as usize + 1,
            total: 2 * (n as usize + 1),
        },
        bound,
        measured,
        grid: format!("dyadic-enriched {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report))
}

/// Monomial ladder: tagged nodes `g_1..g_p` with
/// `g_m(x) = truncate(x, n)^m`; the readout is `g_p`.
pub fn build_monomials(p: u32, n: u32) -> Result<Network> {
    if p < 1 {
        return Err(Error::BadParam("ladder needs at least one stage".into()));
    }
    let mut b = NetBuilder::new(1);
    let frag = decoder::attach_decoder(
        &mut b,
        &Affine::from_node(NodeRef::input(0)),
        0,
        n,
        1,
        Some("bit_"),
    );
    let ladder = attach_ladder(&mut b, &frag, p, n as usize + 2, Some("g_"));
    let top = *ladder.g.last().expect("at least one stage");
    Ok(b.finish(Affine::from_node(top)))
}

/// Polynomial approximator for `f = sum a_i x^i` with the degree-`p`
/// coefficient condition `sum_{i>=1} |a_i| <= 1`; bit count
/// `n = ceil(log2(p/eps)) + 1`, sup error at most `p / 2^{n-1}`.
pub fn build_polynomial(a: &[f64], eps: f64) -> Result<(Network, BuildReport)> {
    check_eps(eps)?;
    if a.len() < 2 {
        return Err(Error::BadParam(
            "polynomial needs degree at least 1".into(),
        ));
    }
    let p = (a.len() - 1) as u32;
    let l1: f64 = a[1..].iter().map(|c| c.abs()).sum();
    if l1 > 1.0 + 1e-12 {
        return Err(Error::L1Violation {
            what: "polynomial coefficients a_1..a_p",
            sum: l1,
            expected: 1.0,
        });
    }
    let n = ceil_log2_ratio(p as f64, eps) + 1;

    let mut b = NetBuilder::new(1);
    let frag = decoder::attach_decoder(
        &mut b,
        &Affine::from_node(NodeRef::input(0)),
        0,
        n,
        1,
        Some("bit_"),
    );
    let ladder = attach_ladder(&mut b, &frag, p, n as usize + 2, Some("g_"));
    let terms = ladder
        .g
        .iter()
        .enumerate()
        .map(|(i, &g)| (g, a[i + 1]))
        .collect();
    let net = b.finish(Affine::new(terms, a[0]));

    let bound = p as f64 * pow2(1 - n as i32);
    let truth = |x: f64| {
        let mut acc = 0.0;
        for &c in a.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    let xs = report::verification_grid_1d(n);
    let measured = report::measure_1d(&net, truth, &xs);
    let report = BuildReport {
        builder: "polynomial".into(),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(n),
        degree: Some(p),
        expected: ladder_counts(n, p),
        bound,
        measured,
        grid: format!("dyadic-enriched {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report))
}

pub(crate) fn ladder_counts(n: u32, stages: u32) -> Counts {
    let steps = n as usize + 1;
    let relu = stages as usize * (n as usize + 2);
    Counts {
        depth: steps + 2 * stages as usize,
        relu,
        step: steps,
        total: steps + relu,
    }
}

/// Everything `attach_smooth` wires into a builder for one smooth piece.
pub(crate) struct SmoothPiece {
    pub readout: Affine,
    /// Interpolation degree == decoder bit count.
    pub degree: u32,
    /// Ladder stages kept after coefficient trimming.
    pub stages: u32,
    /// Certified sup-error bound of the piece.
    pub theory: f64,
    pub next_layer: usize,
}

/// Pick the interpolation degree for approximating `target` to `eps`:
/// `N = ceil(log2(2/eps))` when the certified bound
/// `|f'| 2^{-N} + |f^{(N+1)}| / (2^N (N+1)!)` already fits, escalating past
/// the formula (up to the conditioning cap) when allowed, for honest
/// profiles that exceed `n!` at low orders.
pub(crate) fn plan_smooth(target: &ApproxTarget, eps: f64, escalate: bool) -> Result<(usize, f64)> {
    check_eps(eps)?;
    if !target.certified() {
        return Err(Error::Uncertified(target.name.clone()));
    }
    let mut degree = ceil_log2_ratio(2.0, eps).max(1) as usize;
    let theory_at = |n: usize| {
        let d1 = target.deriv_bound(1).unwrap();
        let rem = cheb::remainder_bound(n, target.deriv_bound(n + 1).unwrap());
        d1 * pow2(-(n as i32)) + rem
    };
    let mut theory = theory_at(degree);
    while theory > eps {
        if !escalate {
            return Err(Error::ProfileInsufficient {
                target: target.name.clone(),
                bound: theory,
                eps,
            });
        }
        if degree >= cheb::DEGREE_CAP {
            return Err(Error::DegreeCap {
                requested: degree + 1,
                cap: cheb::DEGREE_CAP,
            });
        }
        degree += 1;
        theory = theory_at(degree);
    }
    Ok((degree, theory))
}

/// Largest trailing-coefficient trim whose dropped l1 mass stays within
/// `allowed_drop`: returns `(p_eff, dropped)` where stages `p_eff+1..` are
/// dropped. Keeps cancelling coefficient pairs together, since they exceed
/// any harmless budget individually.
pub(crate) fn trim_plan(coeffs: &[f64], allowed_drop: f64) -> (usize, f64) {
    let mut tail = 0.0f64;
    let mut p_eff = coeffs.len() - 1;
    while p_eff >= 1 {
        let with_this = tail + coeffs[p_eff].abs();
        if with_this > allowed_drop {
            break;
        }
        tail = with_this;
        p_eff -= 1;
    }
    (p_eff, tail)
}

/// Wire decoder (bits `0..=bits`) + ladder + readout over the scalar
/// `input` for the already-trimmed coefficients `coeffs`
/// (`coeffs.len() - 1` ladder stages).
pub(crate) fn wire_ladder_readout(
    b: &mut NetBuilder,
    input: &Affine,
    coeffs: &[f64],
    bits: u32,
    start_layer: usize,
    tag: bool,
) -> SmoothPiece {
    let stages = (coeffs.len() - 1) as u32;
    let frag = decoder::attach_decoder(b, input, 0, bits, start_layer, tag.then_some("bit_"));
    let (g, next_layer) = if stages > 0 {
        let ladder = attach_ladder(
            b,
            &frag,
            stages,
            start_layer + bits as usize + 1,
            tag.then_some("g_"),
        );
        (ladder.g, ladder.next_layer)
    } else {
        (Vec::new(), start_layer + bits as usize + 1)
    };
    let terms = g
        .iter()
        .enumerate()
        .map(|(i, &node)| (node, coeffs[i + 1]))
        .collect();
    SmoothPiece {
        readout: Affine::new(terms, coeffs[0]),
        degree: bits,
        stages,
        theory: f64::NAN,
        next_layer,
    }
}

/// Chebyshev-interpolate `target` to tolerance `eps` and wire decoder +
/// monomial ladder + coefficient readout for it, reading the scalar
/// `input`.
pub(crate) fn attach_smooth(
    b: &mut NetBuilder,
    input: &Affine,
    target: &ApproxTarget,
    eps: f64,
    start_layer: usize,
    tag: bool,
    escalate: bool,
) -> Result<SmoothPiece> {
    let (degree, theory) = plan_smooth(target, eps, escalate)?;
    let poly = cheb::interpolate(|t| target.eval1(t), degree)?;
    let (p_eff, dropped) = trim_plan(&poly.coeffs, eps * TRIM_BUDGET);
    let mut piece = wire_ladder_readout(
        b,
        input,
        &poly.coeffs[..=p_eff],
        degree as u32,
        start_layer,
        tag,
    );
    piece.theory = theory + dropped;
    Ok(piece)
}

/// Smooth-function approximator: interpolation degree and bit count
/// `N = ceil(log2(2/eps))`, ladder up to the last meaningful coefficient,
/// sup error at most `eps` for targets whose profile certifies the bound.
pub fn build_smooth(target: &ApproxTarget, eps: f64) -> Result<(Network, BuildReport)> {
    if target.dim != 1 {
        return Err(Error::BadParam(format!(
            "build_smooth expects a univariate target, `{}` has dim {}",
            target.name, target.dim
        )));
    }
    let mut b = NetBuilder::new(1);
    let piece = attach_smooth(
        &mut b,
        &Affine::from_node(NodeRef::input(0)),
        target,
        eps,
        1,
        true,
        false,
    )?;
    let net = b.finish(piece.readout.clone());

    let xs = report::verification_grid_1d(piece.degree);
    let measured = report::measure_1d(&net, |x| target.eval1(x), &xs);
    let report = BuildReport {
        builder: format!("smooth:{}", target.name),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(piece.degree),
        degree: Some(piece.degree),
        expected: ladder_counts(piece.degree, piece.stages),
        bound: piece.theory.min(eps),
        measured,
        grid: format!("dyadic-enriched {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report))
}
