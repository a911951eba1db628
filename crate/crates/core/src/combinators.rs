//! Networks for sums, products and compositions of certified univariate
//! targets, plus the ridge and Gaussian specials.

use crate::cheb;
use crate::decoder;
use crate::error::{Error, Result};
use crate::net::{Affine, Counts, NetBuilder, Network, Neuron, NodeRef};
use crate::report::{self, BuildReport};
use crate::target::{self, ApproxTarget};
use crate::univariate::{self, ladder_counts};
use crate::util::{factorial, pow2};

/// Ordered stage list for a cascade `f = h_1 ∘ h_2 ∘ ... ∘ h_k`
/// (`stages[0]` outermost, applied last). Every stage must map `[0,1]`
/// into `[0,1]` and carry a derivative-bound profile.
#[derive(Debug, Clone)]
pub struct CompositionPlan {
    pub stages: Vec<ApproxTarget>,
}

impl CompositionPlan {
    pub fn new(stages: Vec<ApproxTarget>) -> Self {
        CompositionPlan { stages }
    }

    /// True composite value at `x`, innermost stage first.
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = x;
        for h in self.stages.iter().rev() {
            v = h.eval1(v);
        }
        v
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsOutOfRange(eps));
    }
    Ok(())
}

/// Linear combination `sum beta_i h_i` with `||beta||_1 = 1`: one shared
/// decoder and one monomial ladder of degree `ceil(log2(2/eps))`, only the
/// readout depends on the number of component functions.
pub fn combine_sum(
    targets: &[ApproxTarget],
    beta: &[f64],
    eps: f64,
) -> Result<(Network, BuildReport)> {
    check_eps(eps)?;
    if targets.is_empty() || targets.len() != beta.len() {
        return Err(Error::BadParam(
            "combine_sum needs one weight per target".into(),
        ));
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    if (l1 - 1.0).abs() > 1e-12 {
        return Err(Error::L1Violation {
            what: "combination weights beta",
            sum: l1,
            expected: 1.0,
        });
    }

    // Same degree for every component; certificates are per-target.
    let mut degree = 0usize;
    let mut theory = 0.0f64;
    for (i, t) in targets.iter().enumerate() {
        let (d, th) = univariate::plan_smooth(t, eps, false)?;
        if i == 0 {
            degree = d;
        }
        debug_assert_eq!(d, degree, "formula degree depends only on eps");
        theory += beta[i].abs() * th;
    }

    let mut combined = vec![0.0f64; degree + 1];
    for (i, t) in targets.iter().enumerate() {
        let poly = cheb::interpolate(|x| t.eval1(x), degree)?;
        for (j, c) in poly.coeffs.iter().enumerate() {
            combined[j] += beta[i] * c;
        }
    }

    let mut b = NetBuilder::new(1);
    let (p_eff, dropped) = univariate::trim_plan(&combined, eps * univariate::TRIM_BUDGET);
    let piece = univariate::wire_ladder_readout(
        &mut b,
        &Affine::from_node(NodeRef::input(0)),
        &combined[..=p_eff],
        degree as u32,
        1,
        true,
    );
    let net = b.finish(piece.readout.clone());

    let truth = |x: f64| -> f64 {
        targets
            .iter()
            .zip(beta)
            .map(|(t, &w)| w * t.eval1(x))
            .sum()
    };
    let xs = report::verification_grid_1d(piece.degree);
    let measured = report::measure_1d(&net, truth, &xs);
    let report = BuildReport {
        builder: format!("sum[{}]", targets.len()),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(piece.degree),
        degree: Some(piece.degree),
        expected: ladder_counts(piece.degree, piece.stages),
        bound: (theory + dropped).min(eps),
        measured,
        grid: format!("dyadic-enriched {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report))
}

/// Degree required by the product remainder analysis: the smallest `N`
/// with `N >= k log2 N + 2k + log2(2/eps)`, which makes the interpolation
/// remainder bound `2^(2k + k log2 N - N)` at most `eps/2`.
fn product_minimal_degree(k: usize, eps: f64) -> usize {
    let rhs = |n: usize| k as f64 * (n as f64).log2() + 2.0 * k as f64 + (2.0 / eps).log2();
    let mut n = 1usize;
    while (n as f64) < rhs(n) {
        n += 1;
    }
    n
}

/// Closed-form sufficient degree `ceil(4k log2 4k + 4k + 2 log2(2/eps))`.
fn product_formula_degree(k: usize, eps: f64) -> usize {
    let kf = k as f64;
    (4.0 * kf * (4.0 * kf).log2() + 4.0 * kf + 2.0 * (2.0 / eps).log2()).ceil() as usize
}

/// Pointwise product `prod h_i` via a single interpolation of the product
/// followed by the polynomial builder. The closed-form degree is used when
/// it fits under the conditioning cap; otherwise the minimal degree
/// satisfying the remainder inequality stands in, and the build is
/// rejected when even that exceeds the cap.
pub fn combine_product(targets: &[ApproxTarget], eps: f64) -> Result<(Network, BuildReport)> {
    check_eps(eps)?;
    if targets.is_empty() {
        return Err(Error::BadParam("product of zero functions".into()));
    }
    let k = targets.len();
    let formula = product_formula_degree(k, eps);
    let degree = if formula <= cheb::DEGREE_CAP {
        formula
    } else {
        let minimal = product_minimal_degree(k, eps);
        if minimal > cheb::DEGREE_CAP {
            return Err(Error::DegreeCap {
                requested: formula,
                cap: cheb::DEGREE_CAP,
            });
        }
        minimal
    };

    // Hypothesis: every factor certified with |h^(n)| <= n! up to N+1.
    for t in targets {
        if !t.certified() {
            return Err(Error::Uncertified(t.name.clone()));
        }
        for n in 1..=degree + 1 {
            let claimed = t.deriv_bound(n).unwrap();
            if claimed > factorial(n) {
                return Err(Error::ProfileInsufficient {
                    target: t.name.clone(),
                    bound: claimed,
                    eps,
                });
            }
        }
    }

    // Remainder pre-check at the chosen degree.
    let remainder = pow2_f(2.0 * k as f64 + k as f64 * (degree as f64).log2() - degree as f64);
    debug_assert!(remainder <= eps / 2.0 + 1e-12);

    let product = |x: f64| targets.iter().map(|t| t.eval1(x)).product::<f64>();
    let poly = cheb::interpolate(product, degree)?;
    let (p_eff, dropped) = univariate::trim_plan(&poly.coeffs, eps * univariate::TRIM_BUDGET);
    let coeffs = &poly.coeffs[..=p_eff];

    // Interpolation noise at high degree can push the coefficient l1 mass
    // past 1 even though it cancels in evaluation, so the polynomial-ladder
    // bit count comes from the actual mass: sum |c_i| * i * 2^-n <= eps/2.
    let mass: f64 = coeffs[1..].iter().map(|c| c.abs()).sum();
    let stages = p_eff.max(1) as u32;
    let bits =
        crate::util::ceil_log2_ratio(2.0 * mass.max(1e-300) * stages as f64, eps).max(1);
    let truncation_bound = mass * stages as f64 * pow2(-(bits as i32));

    let mut b = NetBuilder::new(1);
    let piece = univariate::wire_ladder_readout(
        &mut b,
        &Affine::from_node(NodeRef::input(0)),
        coeffs,
        bits,
        1,
        true,
    );
    let net = b.finish(piece.readout.clone());

    let xs = report::verification_grid_1d(bits);
    let measured = report::measure_1d(&net, product, &xs);
    let report = BuildReport {
        builder: format!("product[{k}]"),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(bits),
        degree: Some(degree as u32),
        expected: ladder_counts(bits, piece.stages),
        bound: (remainder + dropped + truncation_bound).min(eps),
        measured,
        grid: format!("dyadic-enriched {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report))
}

fn pow2_f(e: f64) -> f64 {
    e.exp2()
}

/// One stage of a built cascade, for budget audits.
#[derive(Debug, Clone)]
pub struct StageProbe {
    pub name: String,
    /// Scaled output of the stage inside the final network.
    pub output: Affine,
    /// Tolerance the stage was built to.
    pub tol: f64,
    /// Lipschitz bound of everything downstream of this stage.
    pub downstream_lip: f64,
}

/// Cascade `h_1 ∘ ... ∘ h_k` built innermost first. Stage `m` (1-based,
/// outermost first) is built to tolerance `eps / (3^(k-m+1) * L)` where `L`
/// is the Lipschitz bound of the stages downstream of it, and its output is
/// scaled by `1/(1 + tol)` before feeding the next decoder, which pins the
/// stage values inside `[0,1]`.
pub fn compose(plan: &CompositionPlan, eps: f64) -> Result<(Network, BuildReport)> {
    let (net, report, _) = compose_with_probes(plan, eps)?;
    Ok((net, report))
}

pub fn compose_with_probes(
    plan: &CompositionPlan,
    eps: f64,
) -> Result<(Network, BuildReport, Vec<StageProbe>)> {
    check_eps(eps)?;
    let k = plan.stages.len();
    if k == 0 {
        return Err(Error::BadParam("composition of zero stages".into()));
    }
    // spot-verify the declared [0,1] -> [0,1] ranges
    for (m, h) in plan.stages.iter().enumerate() {
        if h.dim != 1 {
            return Err(Error::BadParam(format!(
                "stage {} (`{}`) is not univariate",
                m + 1,
                h.name
            )));
        }
        for i in 0..=4096 {
            let x = i as f64 / 4096.0;
            let v = h.eval1(x);
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::RangeViolation {
                    what: format!("stage {} (`{}`) output", m + 1, h.name),
                    value: v,
                    point: vec![x],
                });
            }
        }
    }

    // Downstream Lipschitz products: errors of stage m pass through
    // h_1..h_{m-1}.
    let lips: Vec<f64> = plan
        .stages
        .iter()
        .map(|h| h.deriv_bound(1).unwrap_or(f64::INFINITY).max(0.0))
        .collect();
    let mut downstream = vec![1.0f64; k];
    for m in 1..k {
        downstream[m] = (downstream[m - 1] * lips[m - 1]).max(downstream[m - 1]);
    }

    let mut b = NetBuilder::new(1);
    let mut input = Affine::from_node(NodeRef::input(0));
    let mut layer = 1usize;
    let mut probes: Vec<StageProbe> = Vec::with_capacity(k);
    let mut bound = 0.0f64;
    let mut max_bits = 0u32;

    // innermost stage first: paper index m = k down to 1
    for m in (1..=k).rev() {
        let h = &plan.stages[m - 1];
        let lip = downstream[m - 1].max(1.0);
        let tol = eps / (3f64.powi((k - m + 1) as i32) * lip);
        let piece = univariate::attach_smooth(&mut b, &input, h, tol, layer, false, false)
            .map_err(|e| Error::StageFailed {
                index: m,
                source: Box::new(e),
            })?;
        let scaled = piece.readout.scaled(1.0 / (1.0 + tol));
        bound += downstream[m - 1] * (piece.theory + tol);
        max_bits = max_bits.max(piece.degree);
        probes.push(StageProbe {
            name: h.name.clone(),
            output: scaled.clone(),
            tol,
            downstream_lip: downstream[m - 1],
        });
        input = scaled;
        layer = piece.next_layer;
    }

    let net = b.finish(input.clone());
    let xs = report::verification_grid_1d(max_bits);
    let measured = report::measure_1d(&net, |x| plan.eval(x), &xs);
    let counts = net.count();
    let report = BuildReport {
        builder: format!("compose[{k}]"),
        epsilon: Some(eps),
        counts,
        strict_total: net.to_strict().count().total,
        bits: Some(max_bits),
        degree: None,
        expected: counts,
        bound: bound.min(eps),
        measured,
        grid: format!("dyadic-enriched {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report, probes))
}

/// Ridge function `g(a^T x)` for nonnegative `a` with `||a||_1 = 1`: the
/// decoder reads the affine pre-combination directly, so the network is
/// exactly the univariate build with `d` entering only the first weights.
pub fn build_ridge(
    a: &[f64],
    g: &ApproxTarget,
    eps: f64,
    seed: u64,
) -> Result<(Network, BuildReport)> {
    check_eps(eps)?;
    let d = a.len();
    if d == 0 {
        return Err(Error::BadParam("ridge direction is empty".into()));
    }
    if a.iter().any(|&w| w < 0.0) {
        return Err(Error::BadParam(
            "ridge direction must be nonnegative".into(),
        ));
    }
    let l1: f64 = a.iter().sum();
    if (l1 - 1.0).abs() > 1e-12 {
        return Err(Error::L1Violation {
            what: "ridge direction a",
            sum: l1,
            expected: 1.0,
        });
    }

    let mut b = NetBuilder::new(d);
    let input = Affine::new(
        a.iter()
            .enumerate()
            .map(|(i, &w)| (NodeRef::input(i), w))
            .collect(),
        0.0,
    );
    let piece = univariate::attach_smooth(&mut b, &input, g, eps, 1, true, false)?;
    let net = b.finish(piece.readout.clone());

    let pts = report::verification_grid_nd(d, 100_000, seed);
    let truth = |x: &[f64]| {
        let t: f64 = x.iter().zip(a).map(|(xi, ai)| xi * ai).sum();
        g.eval1(t)
    };
    let (measured, _) = crate::grid::sup_error(&net, truth, &pts);
    let report = BuildReport {
        builder: format!("ridge:{}", g.name),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(piece.degree),
        degree: Some(piece.degree),
        expected: ladder_counts(piece.degree, piece.stages),
        bound: piece.theory.min(eps),
        measured,
        grid: format!("random d{d} {} pts", pts.len()),
        seed: Some(seed),
    }
    .accept()?;
    Ok((net, report))
}

/// Gaussian `exp(-||x||^2 / 2)` on `[0,1]^d`: `d` parallel square
/// approximators within `eps/d` each feed `u = sum g_i / (2d)` into an
/// approximator of `u -> exp(-d u)` built to `eps/2`.
pub fn build_gaussian(d: usize, eps: f64, seed: u64) -> Result<(Network, BuildReport)> {
    check_eps(eps)?;
    if d == 0 {
        return Err(Error::BadParam("gaussian needs dimension >= 1".into()));
    }
    let n_sq = crate::util::ceil_log2_ratio(d as f64, eps) + 1;

    let mut b = NetBuilder::new(d);
    let mut all_gadgets: Vec<NodeRef> = Vec::with_capacity(d * (n_sq as usize + 1));
    for coord in 0..d {
        let frag = decoder::attach_decoder(
            &mut b,
            &Affine::from_node(NodeRef::input(coord)),
            0,
            n_sq,
            1,
            None,
        );
        let gadget_layer = n_sq as usize + 2;
        for i in 0..=n_sq {
            let mut inputs = vec![(frag.bits[i as usize], 2.0 + pow2(-2 * i as i32))];
            for j in 0..=n_sq {
                if j != i {
                    inputs.push((frag.bits[j as usize], pow2(-((i + j) as i32))));
                }
            }
            all_gadgets.push(b.push_at(gadget_layer, Neuron::relu(inputs, -2.0, true)));
        }
    }
    // u = sum of squares / 2d, a single nonneg node
    let u_weight = 1.0 / (2.0 * d as f64);
    let u = b.push_at(
        n_sq as usize + 3,
        Neuron::relu(
            all_gadgets.iter().map(|&g| (g, u_weight)).collect(),
            0.0,
            true,
        ),
    );
    b.tag("u", u);

    let outer_target = target::exp_decay(d as f64);
    let piece = univariate::attach_smooth(
        &mut b,
        &Affine::from_node(u),
        &outer_target,
        eps / 2.0,
        n_sq as usize + 4,
        false,
        true,
    )?;
    let net = b.finish(piece.readout.clone());

    let squares_bound = d as f64 * pow2(1 - n_sq as i32) / 2.0;
    let bound = squares_bound + piece.theory;
    let pts = report::verification_grid_nd(d, 100_000, seed);
    let truth = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp();
    let (measured, _) = crate::grid::sup_error(&net, truth, &pts);

    let n_out = piece.degree;
    let expected = Counts {
        depth: n_sq as usize + 3 + (n_out as usize + 1) + 2 * piece.stages as usize,
        relu: d * (n_sq as usize + 1) + 1 + piece.stages as usize * (n_out as usize + 2),
        step: d * (n_sq as usize + 1) + (n_out as usize + 1),
        total: 0,
    };
    let expected = Counts {
        total: expected.relu + expected.step,
        ..expected
    };
    let report = BuildReport {
        builder: format!("gaussian:d{d}"),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: Some(n_sq),
        degree: Some(n_out),
        expected,
        bound: bound.min(eps),
        measured,
        grid: format!("random d{d} {} pts", pts.len()),
        seed: Some(seed),
    }
    .accept()?;
    Ok((net, report))
}
