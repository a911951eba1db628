//! Multivariate constructions: products of l1-normalized linear forms,
//! general multivariate polynomials over a shared coordinate decoder, and
//! polynomial-then-univariate cascades.
//!
//! Coordinate decoders here emit bits `1..=n` (no integer bit), so `d`
//! decoders cost exactly `d * n` step units; the truncation saturates at
//! `1 - 2^-n` for inputs equal to 1, which stays inside the `2^-n`
//! per-coordinate error the bounds use.

use crate::combinators::CompositionPlan;
use crate::decoder::{self, truncate_low_unchecked, DecoderFragment};
use crate::error::{Error, Result};
use crate::net::{Affine, Counts, NetBuilder, Network, Neuron, NodeRef};
use crate::report::{self, BuildReport};
use crate::univariate;
use crate::util::{ceil_log2_ratio, pow2};

/// Configurable ceiling on enumerated/accepted monomial terms.
pub const TERM_CAP: usize = 1_000_000;

/// Exponent vector of one monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    /// `|alpha| = sum alpha_j`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

/// Rows `w_1..w_p`, each with unit l1 norm.
#[derive(Debug, Clone)]
pub struct LinearFormSet {
    rows: Vec<Vec<f64>>,
}

impl LinearFormSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::BadParam("need at least one nonempty row".into()));
        }
        let d = rows[0].len();
        for row in &rows {
            if row.len() != d {
                return Err(Error::BadParam("rows must share a dimension".into()));
            }
            let l1: f64 = row.iter().map(|w| w.abs()).sum();
            if (l1 - 1.0).abs() > 1e-12 {
                return Err(Error::L1Violation {
                    what: "linear form row",
                    sum: l1,
                    expected: 1.0,
                });
            }
        }
        Ok(LinearFormSet { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn count(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `prod_i (w_i . x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>())
            .product()
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// All exponent vectors with `|alpha| <= p` in lexicographic order; the
/// count is exactly `C(p + d, d)`.
pub fn enumerate_multi_indices(d: usize, p: u32) -> Result<Vec<MultiIndex>> {
    enumerate_multi_indices_capped(d, p, TERM_CAP)
}

pub fn enumerate_multi_indices_capped(
    d: usize,
    p: u32,
    cap: usize,
) -> Result<Vec<MultiIndex>> {
    if d == 0 {
        return Err(Error::BadParam("dimension must be positive".into()));
    }
    let count = binomial(p as u64 + d as u64, d as u64);
    if count > cap as u128 {
        return Err(Error::TermCap {
            count: count.min(usize::MAX as u128) as usize,
            cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = vec![0u32; d];
    loop {
        out.push(MultiIndex(current.clone()));
        // next vector in lexicographic order with |alpha| <= p
        let mut pos = d;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            current[pos] += 1;
            if current.iter().sum::<u32>() <= p {
                break;
            }
            current[pos] = 0;
        }
    }
}

/// Decoders for every coordinate: bits `1..=n` of `x^(k)` on layers
/// `1..=n`, `d * n` step units in total.
fn attach_coordinate_decoders(b: &mut NetBuilder, d: usize, n: u32) -> Vec<DecoderFragment> {
    (0..d)
        .map(|k| {
            decoder::attach_decoder(
                b,
                &Affine::from_node(NodeRef::input(k)),
                1,
                n,
                1,
                Some(&format!("x{k}_bit_")),
            )
        })
        .collect()
}

/// Product of linear forms `prod_i (w_i . x)`: `d` parallel decoders with
/// `n = ceil(log2(pd/eps))` bits, then one gadget stage per factor with
/// `d*n` relus each; sup error at most `pd / 2^n`.
pub fn build_linear_product(
    forms: &LinearFormSet,
    eps: f64,
    seed: u64,
) -> Result<(Network, BuildReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let d = forms.dim();
    let p = forms.count();
    let n = ceil_log2_ratio(p as f64 * d as f64, eps).max(1);

    let mut b = NetBuilder::new(d);
    let decoders = attach_coordinate_decoders(&mut b, d, n);

    // stage l gadgets indexed (coordinate k, bit r); g_l folds the row
    // weights in at consumption time
    let mut prev_stage: Vec<Vec<NodeRef>> = Vec::new(); // [k][r]
    let mut stage_probes: Vec<Affine> = Vec::with_capacity(p);
    for l in 1..=p {
        let layer = n as usize + l;
        let mut stage: Vec<Vec<NodeRef>> = Vec::with_capacity(d);
        for (k, frag) in decoders.iter().enumerate() {
            let mut per_coord = Vec::with_capacity(n as usize);
            for (j, &bit) in frag.bits.iter().enumerate() {
                let r = (j + 1) as i32; // bits start at 1
                let neuron = if l == 1 {
                    Neuron::relu(vec![(bit, 2.0)], pow2(-r) - 2.0, true)
                } else {
                    let mut inputs = vec![(bit, 2.0)];
                    for (k2, coords) in prev_stage.iter().enumerate() {
                        let w = forms.rows[l - 2][k2];
                        for &g in coords {
                            inputs.push((g, w * pow2(-r)));
                        }
                    }
                    Neuron::relu(inputs, -2.0, true)
                };
                per_coord.push(b.push_at(layer, neuron));
            }
            let _ = k;
            stage.push(per_coord);
        }
        // g_l as an affine probe for range verification
        let mut terms = Vec::with_capacity(d * n as usize);
        for (k2, coords) in stage.iter().enumerate() {
            for &g in coords {
                terms.push((g, forms.rows[l - 1][k2]));
            }
        }
        stage_probes.push(Affine::new(terms, 0.0));
        prev_stage = stage;
    }
    let readout = stage_probes.last().expect("p >= 1").clone();
    let net = b.finish(readout);

    let pts = report::verification_grid_nd(d, 100_000, seed);
    let mut measured = 0.0f64;
    for x in &pts {
        let values = net.forward(x);
        for (l, probe) in stage_probes.iter().enumerate() {
            let g = probe.eval(&values);
            // stages feeding another gadget layer must stay in [0,1]; the
            // final product only obeys |g_p| <= 1
            let ok = if l + 1 < p {
                (-1e-9..=1.0 + 1e-9).contains(&g)
            } else {
                g.abs() <= 1.0 + 1e-9
            };
            if !ok {
                return Err(Error::RangeViolation {
                    what: format!("stage value g_{}", l + 1),
                    value: g,
                    point: x.clone(),
                });
            }
        }
        let d_err = (net.readout.eval(&values) - forms.eval(x)).abs();
        if d_err > measured {
            measured = d_err;
        }
    }

    let bound = p as f64 * d as f64 * pow2(-(n as i32));
    let expected = Counts {
        depth: n as usize + p,
        relu: p * d * n as usize,
        step: d * n as usize,
        total: p * d * n as usize + d * n as usize,
    };
    let report = BuildReport {
        builder: format!("linear_product[p{p}d{d}]"),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(n),
        degree: Some(p as u32),
        expected,
        bound,
        measured,
        grid: format!("random d{d} {} pts", pts.len()),
        seed: Some(seed),
    }
    .accept()?;
    Ok((net, report))
}

/// One monomial ladder over the shared decoders: `|alpha|` stages of `n`
/// gadgets, each stage multiplying by one picked coordinate's truncation.
/// Returns the affine form of the monomial value.
fn attach_monomial_ladder(
    b: &mut NetBuilder,
    decoders: &[DecoderFragment],
    alpha: &MultiIndex,
    n: u32,
    start_layer: usize,
) -> Affine {
    let picks: Vec<usize> = alpha
        .0
        .iter()
        .enumerate()
        .flat_map(|(k, &a)| std::iter::repeat(k).take(a as usize))
        .collect();
    debug_assert!(!picks.is_empty());
    let mut prev: Option<Vec<NodeRef>> = None;
    for (j, &k) in picks.iter().enumerate() {
        let layer = start_layer + j;
        let mut stage = Vec::with_capacity(n as usize);
        for (bi, &bit) in decoders[k].bits.iter().enumerate() {
            let r = (bi + 1) as i32;
            let neuron = match &prev {
                None => Neuron::relu(vec![(bit, 2.0)], pow2(-r) - 2.0, true),
                Some(gs) => {
                    let mut inputs = vec![(bit, 2.0)];
                    for &g in gs {
                        inputs.push((g, pow2(-r)));
                    }
                    Neuron::relu(inputs, -2.0, true)
                }
            };
            stage.push(b.push_at(layer, neuron));
        }
        prev = Some(stage);
    }
    Affine::new(
        prev.expect("nonzero degree")
            .into_iter()
            .map(|g| (g, 1.0))
            .collect(),
        0.0,
    )
}

type MultinomialSpec = [(MultiIndex, f64)];

fn multinomial_truth(terms: &MultinomialSpec, x: &[f64]) -> f64 {
    terms.iter().map(|(a, c)| c * a.eval(x)).sum()
}

struct MultinomialPiece {
    readout: Affine,
    bits: u32,
    degree: u32,
    next_layer: usize,
}

fn attach_multinomial(
    b: &mut NetBuilder,
    terms: &MultinomialSpec,
    d: usize,
    eps: f64,
) -> Result<MultinomialPiece> {
    if terms.is_empty() {
        return Err(Error::BadParam("multinomial needs at least one term".into()));
    }
    if terms.len() > TERM_CAP {
        return Err(Error::TermCap {
            count: terms.len(),
            cap: TERM_CAP,
        });
    }
    for (alpha, _) in terms {
        if alpha.0.len() != d {
            return Err(Error::BadParam(format!(
                "multi-index {:?} does not match dimension {d}",
                alpha.0
            )));
        }
    }
    let l1: f64 = terms.iter().map(|(_, c)| c.abs()).sum();
    if l1 > 1.0 + 1e-12 {
        return Err(Error::L1Violation {
            what: "multinomial coefficients C_alpha",
            sum: l1,
            expected: 1.0,
        });
    }
    let p = terms.iter().map(|(a, _)| a.total()).max().unwrap_or(0);
    let p_eff = p.max(1);
    let n = ceil_log2_ratio(p_eff as f64 * d as f64, eps).max(1);

    let decoders = attach_coordinate_decoders(b, d, n);
    let mut readout = Affine::new(Vec::new(), 0.0);
    for (alpha, coeff) in terms {
        if alpha.total() == 0 {
            readout.bias += coeff;
            continue;
        }
        let ladder = attach_monomial_ladder(b, &decoders, alpha, n, n as usize + 1);
        for (g, w) in ladder.terms {
            readout.terms.push((g, w * coeff));
        }
    }
    Ok(MultinomialPiece {
        readout,
        bits: n,
        degree: p,
        next_layer: n as usize + p as usize + 1,
    })
}

/// Multivariate polynomial `sum C_alpha x^alpha` with `sum |C_alpha| <= 1`:
/// every monomial is a product of coordinate-picking linear forms over one
/// shared set of decoders, so the step count is `d * n` regardless of the
/// number of terms.
pub fn build_multinomial(
    terms: &MultinomialSpec,
    d: usize,
    eps: f64,
    seed: u64,
) -> Result<(Network, BuildReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let mut b = NetBuilder::new(d);
    let piece = attach_multinomial(&mut b, terms, d, eps)?;
    let net = b.finish(piece.readout.clone());

    let pts = report::verification_grid_nd(d, 100_000, seed);
    let (measured, _) = crate::grid::sup_error(&net, |x| multinomial_truth(terms, x), &pts);

    let n = piece.bits;
    let stage_total: usize = terms.iter().map(|(a, _)| a.total() as usize).sum();
    let expected = Counts {
        depth: n as usize + piece.degree.max(1) as usize,
        relu: n as usize * stage_total,
        step: d * n as usize,
        total: n as usize * stage_total + d * n as usize,
    };
    // depth shrinks when every term is constant
    let expected = if stage_total == 0 {
        Counts {
            depth: n as usize,
            ..expected
        }
    } else {
        expected
    };
    let bound = piece.degree.max(1) as f64 * d as f64 * pow2(-(n as i32));
    let report = BuildReport {
        builder: format!("multinomial[{}]", terms.len()),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(n),
        degree: Some(piece.degree),
        expected,
        bound,
        measured,
        grid: format!("random d{d} {} pts", pts.len()),
        seed: Some(seed),
    }
    .accept()?;
    Ok((net, report))
}

/// Composition `h_1 ∘ ... ∘ h_k ∘ l(x)` of a multivariate polynomial with a
/// univariate chain, on the cascade tolerance schedule. With an empty chain
/// this is exactly [`build_multinomial`].
pub fn build_poly_then_chain(
    terms: &MultinomialSpec,
    d: usize,
    chain: &CompositionPlan,
    eps: f64,
    seed: u64,
) -> Result<(Network, BuildReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let k = chain.stages.len();
    if k == 0 {
        return build_multinomial(terms, d, eps, seed);
    }
    let pts = report::verification_grid_nd(d, 100_000, seed);
    // the polynomial must land in [0,1] for the chain's decoders
    for x in &pts {
        let v = multinomial_truth(terms, x);
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::RangeViolation {
                what: "polynomial stage range".into(),
                value: v,
                point: x.clone(),
            });
        }
    }

    let lips: Vec<f64> = chain
        .stages
        .iter()
        .map(|h| h.deriv_bound(1).unwrap_or(f64::INFINITY).max(0.0))
        .collect();
    // A stage's errors pass through everything applied after it, i.e. the
    // stages outer to it: prefix[j] bounds the Lipschitz constant of
    // h_1 ∘ ... ∘ h_j. The polynomial sits under the whole chain.
    let mut prefix = vec![1.0f64; k + 1];
    for j in 1..=k {
        prefix[j] = (prefix[j - 1] * lips[j - 1]).max(prefix[j - 1]);
    }
    let mut bound = 0.0f64;

    let mut b = NetBuilder::new(d);
    let lip_poly = prefix[k].max(1.0);
    let tol_poly = eps / (3.0 * lip_poly);
    let piece = attach_multinomial(&mut b, terms, d, tol_poly)?;
    let poly_theory =
        piece.degree.max(1) as f64 * d as f64 * pow2(-(piece.bits as i32));
    let mut input = piece.readout.scaled(1.0 / (1.0 + tol_poly));
    bound += lip_poly * (poly_theory + tol_poly);
    let mut layer = piece.next_layer;
    let mut max_bits = piece.bits;

    for m in (1..=k).rev() {
        let h = &chain.stages[m - 1];
        let lip_eff = prefix[m - 1].max(1.0);
        let tol = eps / (3f64.powi((k - m + 2) as i32) * lip_eff);
        let stage = univariate::attach_smooth(&mut b, &input, h, tol, layer, false, false)
            .map_err(|e| Error::StageFailed {
                index: m,
                source: Box::new(e),
            })?;
        input = stage.readout.scaled(1.0 / (1.0 + tol));
        bound += lip_eff * (stage.theory + tol);
        layer = stage.next_layer;
        max_bits = max_bits.max(stage.degree);
    }

    let net = b.finish(input);
    let truth = |x: &[f64]| {
        let mut v = multinomial_truth(terms, x);
        for h in chain.stages.iter().rev() {
            v = h.eval1(v);
        }
        v
    };
    let (measured, _) = crate::grid::sup_error(&net, truth, &pts);
    let counts = net.count();
    let report = BuildReport {
        builder: format!("poly_chain[{}+{k}]", terms.len()),
        epsilon: Some(eps),
        counts,
        strict_total: net.to_strict().count().total,
        bits: Some(max_bits),
        degree: Some(piece.degree),
        expected: counts,
        bound: bound.min(eps),
        measured,
        grid: format!("random d{d} {} pts", pts.len()),
        seed: Some(seed),
    }
    .accept()?;
    Ok((net, report))
}

/// Truncated-coordinate oracle used by the verification tests:
/// f applied to `(truncate_low(x_1, n), ..., truncate_low(x_d, n))`.
pub fn truncated_coords(x: &[f64], n: u32) -> Vec<f64> {
    x.iter().map(|&v| truncate_low_unchecked(v, n)).collect()
}
