//! Lower-bound machinery: break-point detection for piecewise-linear
//! network functions, the strong-convexity size bounds, a depth-1
//! piecewise-linear baseline, and the deep-vs-shallow gap experiment.

use crate::error::{Error, Result};
use crate::net::{Affine, Counts, NetBuilder, Network, Neuron, NodeRef};
use crate::report::{self, BuildReport};
use crate::target::ApproxTarget;
use crate::univariate;
use crate::util::{log2_exactish, pow2};

/// Absolute value-jump tolerance of the detector.
pub const JUMP_TOL: f64 = 1e-7;
/// Relative slope-difference tolerance of the detector.
pub const KINK_TOL: f64 = 1e-5;
/// Midpoint-linearity tolerance used during bisection.
const AFFINE_TOL: f64 = 1e-10;
/// Knot cap of the shallow baseline search.
pub const KNOT_CAP: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakKind {
    /// The function value itself jumps.
    Jump,
    /// Only the slope changes.
    Kink,
}

/// Result of a 1-D break-point scan.
#[derive(Debug, Clone)]
pub struct PieceScan {
    /// Strictly increasing break locations with their kinds.
    pub points: Vec<(f64, BreakKind)>,
    pub resolution: u32,
    pub jump_tol: f64,
    pub kink_tol: f64,
}

impl PieceScan {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn jumps(&self) -> usize {
        self.points
            .iter()
            .filter(|(_, k)| *k == BreakKind::Jump)
            .count()
    }
}

fn not_affine(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64) -> bool {
    let fm = f((a + b) / 2.0);
    let dev = (fm - (fa + fb) / 2.0).abs();
    dev > AFFINE_TOL * fa.abs().max(fb.abs()).max(1.0)
}

/// Localize one break inside `(a, b)` by bisecting on the half that fails
/// the midpoint-linearity test.
fn localize(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..40 {
        let m = (a + b) / 2.0;
        let fm = f(m);
        if not_affine(f, a, m, fa, fm) {
            b = m;
            fb = fm;
        } else if not_affine(f, m, b, fm, fb) {
            a = m;
            fa = fm;
        } else {
            // the break sits at the shared midpoint (or below tolerance)
            return m;
        }
    }
    (a + b) / 2.0
}

/// Scan `[0,1]` at `2^resolution` intervals for points where the network
/// function or its slope is discontinuous, bisect each flagged bracket to
/// localize, and classify by straddled evaluation. Uses the default
/// tolerances [`JUMP_TOL`] and [`KINK_TOL`].
pub fn count_breakpoints_1d(net: &Network, resolution: u32) -> Result<PieceScan> {
    scan_breakpoints(net, resolution, JUMP_TOL, KINK_TOL)
}

/// [`count_breakpoints_1d`] with explicit detector tolerances: `jump_tol`
/// is absolute on the value discontinuity, `kink_tol` relative on the
/// slope difference.
pub fn scan_breakpoints(
    net: &Network,
    resolution: u32,
    jump_tol: f64,
    kink_tol: f64,
) -> Result<PieceScan> {
    if net.input_dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: net.input_dim,
        });
    }
    let f = |x: f64| net.eval_unchecked(&[x]);
    let cells = 1usize << resolution;
    let h = pow2(-(resolution as i32));
    let values: Vec<f64> = (0..=cells).map(|i| f(i as f64 * h)).collect();
    let slopes: Vec<f64> = (0..cells)
        .map(|i| (values[i + 1] - values[i]) / h)
        .collect();

    // flag intervals that may contain a break
    let mut suspicious = vec![false; cells];
    for i in 1..cells {
        let ds = (slopes[i] - slopes[i - 1]).abs();
        if ds > kink_tol * slopes[i].abs().max(slopes[i - 1].abs()).max(1.0) {
            suspicious[i - 1] = true;
            suspicious[i] = true;
        }
    }
    for i in 0..cells {
        let neighbor = if i > 0 { slopes[i - 1].abs() } else { 0.0 }
            .max(if i + 1 < cells { slopes[i + 1].abs() } else { 0.0 });
        if (values[i + 1] - values[i]).abs() > jump_tol + h * neighbor {
            suspicious[i] = true;
        }
    }

    // localize one break per group of consecutive flagged intervals
    let mut points: Vec<(f64, BreakKind)> = Vec::new();
    let mut i = 0usize;
    while i < cells {
        if !suspicious[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < cells && suspicious[i] {
            i += 1;
        }
        let a = start as f64 * h;
        let b = (i as f64 * h).min(1.0);
        let z = localize(&f, a, b);
        if z <= 0.0 || z >= 1.0 {
            continue;
        }
        let delta = 1e-9;
        let lo = f((z - delta).max(0.0));
        let hi = f((z + delta).min(1.0));
        let kind = if (hi - lo).abs() > jump_tol {
            BreakKind::Jump
        } else {
            BreakKind::Kink
        };
        if let Some(&(last, _)) = points.last() {
            if z - last < h {
                continue;
            }
        }
        points.push((z, kind));
    }

    Ok(PieceScan {
        points,
        resolution,
        jump_tol,
        kink_tol,
    })
}

/// Maximum number of break points a network of size `n` and depth `l` can
/// produce: `(n/l)^l`, in log-domain for large values.
pub fn telgarsky_capacity(n: usize, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::BadParam("capacity needs depth >= 1".into()));
    }
    if n < l {
        return Err(Error::BadParam(format!(
            "size {n} smaller than depth {l}"
        )));
    }
    let ratio = n as f64 / l as f64;
    let log = l as f64 * ratio.ln();
    if log > 700.0 {
        return Ok(f64::INFINITY);
    }
    Ok(ratio.powi(l as i32))
}

#[derive(Debug, Clone, Copy)]
pub struct BreakRequirement {
    pub count: u64,
    /// Set when `6 sqrt(rho eps / mu) > 1`: the four-point argument no
    /// longer fits inside `[0,1]` and the bound is only the trivial one.
    pub vacuous: bool,
}

/// Minimum break points any `eps`-approximation of a `mu`-strongly-convex
/// function must have: `ceil(sqrt(mu/(rho eps)) / 4)` for any `rho > 1`.
pub fn required_breakpoints(mu: f64, eps: f64, rho: f64) -> Result<BreakRequirement> {
    if !(mu > 0.0 && eps > 0.0) {
        return Err(Error::BadParam("mu and eps must be positive".into()));
    }
    if rho <= 1.0 {
        return Err(Error::BadParam(format!("rho must exceed 1, got {rho}")));
    }
    let count = (0.25 * (mu / (rho * eps)).sqrt()).ceil() as u64;
    let vacuous = 6.0 * (rho * eps / mu).sqrt() > 1.0;
    Ok(BreakRequirement { count, vacuous })
}

#[derive(Debug, Clone, Copy)]
pub struct SizeBound {
    pub value: f64,
    /// Set when `eps >= mu/16`, where the bound degenerates to nothing.
    pub vacuous: bool,
}

/// Size lower bound for `eps`-approximation of a `mu`-strongly-convex
/// function: `log2(mu/(16 eps))` depth-free, or `L (mu/(16 eps))^(1/2L)`
/// at fixed depth `L`.
pub fn size_lower_bound(mu: f64, eps: f64, depth: Option<u32>) -> SizeBound {
    assert!(mu > 0.0 && eps > 0.0);
    let x = mu / (16.0 * eps);
    if x <= 1.0 {
        return SizeBound {
            value: 0.0,
            vacuous: true,
        };
    }
    let value = match depth {
        None => log2_exactish(x),
        Some(l) => {
            assert!(l >= 1, "depth must be at least 1");
            l as f64 * x.powf(1.0 / (2.0 * l as f64))
        }
    };
    SizeBound {
        value,
        vacuous: false,
    }
}

/// Depth-1 relu network carrying the levelled piecewise-linear fit of `f`
/// at `K + 1` equispaced knots, `K` minimal (doubling then bisection) for
/// sup error at most `eps`. For strongly convex targets the chord error
/// peaks at segment midpoints and the levelling offset halves it.
pub fn build_shallow_baseline(
    target: &ApproxTarget,
    eps: f64,
) -> Result<(Network, BuildReport)> {
    if target.dim != 1 {
        return Err(Error::BadParam("baseline expects a univariate target".into()));
    }
    if target.mu.is_none() {
        return Err(Error::BadParam(format!(
            "target `{}` does not declare strong convexity",
            target.name
        )));
    }
    if eps <= 0.0 {
        return Err(Error::EpsOutOfRange(eps));
    }

    let raw_err = |k: usize| -> f64 {
        let mut worst = 0.0f64;
        for j in 0..k {
            let a = j as f64 / k as f64;
            let b = (j + 1) as f64 / k as f64;
            let fa = target.eval1(a);
            let fb = target.eval1(b);
            for s in 0..=64 {
                let x = a + (b - a) * s as f64 / 64.0;
                let chord = fa + (fb - fa) * (s as f64 / 64.0);
                worst = worst.max((chord - target.eval1(x)).abs());
            }
        }
        worst
    };
    let levelled = |k: usize| raw_err(k) / 2.0;

    let mut k = 1usize;
    while levelled(k) > eps {
        k *= 2;
        if k > KNOT_CAP {
            return Err(Error::KnotCap { cap: KNOT_CAP });
        }
    }
    if k > 1 {
        let mut lo = k / 2; // fails
        let mut hi = k; // succeeds
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if levelled(mid) <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        k = hi;
    }

    let shift = raw_err(k) / 2.0;
    let mut b = NetBuilder::new(1);
    let mut slopes = Vec::with_capacity(k);
    for j in 0..k {
        let a = j as f64 / k as f64;
        let bb = (j + 1) as f64 / k as f64;
        slopes.push((target.eval1(bb) - target.eval1(a)) / (bb - a));
    }
    let mut terms = Vec::with_capacity(k);
    for j in 0..k {
        let knot = j as f64 / k as f64;
        let node = b.push_at(1, Neuron::relu(vec![(NodeRef::input(0), 1.0)], -knot, true));
        let w = if j == 0 {
            slopes[0]
        } else {
            slopes[j] - slopes[j - 1]
        };
        terms.push((node, w));
    }
    let net = b.finish(Affine::new(terms, target.eval1(0.0) - shift));

    let mut xs = crate::grid::uniform_1d(report::VERIFY_UNIFORM).expect("nonzero");
    for j in 0..k {
        xs.push(j as f64 / k as f64);
        xs.push((j as f64 + 0.5) / k as f64);
    }
    xs.push(1.0);
    let measured = report::measure_1d(&net, |x| target.eval1(x), &xs);
    let expected = Counts {
        depth: 1,
        relu: k,
        step: 0,
        total: k,
    };
    let report = BuildReport {
        builder: format!("shallow:{}", target.name),
        epsilon: Some(eps),
        counts: net.count(),
        strict_total: net.to_strict().count().total,
        bits: None,
        degree: None,
        expected,
        bound: eps,
        measured,
        grid: format!("uniform+knots {} pts", xs.len()),
        seed: None,
    }
    .accept()?;
    Ok((net, report))
}

/// One epsilon of the gap experiment.
#[derive(Debug, Clone)]
pub struct GapRow {
    pub epsilon: f64,
    pub deep_total: usize,
    pub deep_depth: usize,
    pub deep_measured: f64,
    pub shallow_total: usize,
    pub shallow_depth: usize,
    pub shallow_measured: f64,
    pub deep_breaks: usize,
    pub required_breaks: u64,
    pub breaks_vacuous: bool,
    pub bound_vacuous: bool,
    /// deep size stays within a single fitted multiple of log2^2(1/eps)
    pub verdict_a: bool,
    /// shallow size respects the depth-1 lower bound
    pub verdict_b: bool,
    /// deep break points reach the strong-convexity requirement
    pub verdict_c: bool,
    /// deep size respects the depth-free lower bound
    pub verdict_d: bool,
}

impl GapRow {
    pub fn all_pass(&self) -> bool {
        self.verdict_a && self.verdict_b && self.verdict_c && self.verdict_d
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    /// Fitted constant: max over the sweep of `N_d / log2^2(1/eps)`.
    pub fitted_c: f64,
    pub all_pass: bool,
}

/// For verdict (a) the ratio `N_d / log2^2(1/eps)` may not grow past this
/// multiple of its value at the coarsest epsilon; growth would mean the
/// deep size is not polylogarithmic.
const RATIO_SPREAD_CAP: f64 = 4.0;

/// Build deep and shallow approximators across `eps_list`, count the deep
/// nets' break points, and check the four consistency verdicts against the
/// lower-bound machinery.
pub fn gap_experiment(
    target: &ApproxTarget,
    eps_list: &[f64],
    resolution: u32,
) -> Result<GapReport> {
    if eps_list.is_empty() {
        return Err(Error::BadParam("empty epsilon list".into()));
    }
    let mu = target.mu.ok_or_else(|| {
        Error::BadParam(format!(
            "target `{}` does not declare strong convexity",
            target.name
        ))
    })?;

    struct Partial {
        eps: f64,
        deep: BuildReport,
        shallow: BuildReport,
        breaks: usize,
    }
    let mut partials = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let wrap = |e: Error| Error::SweepEntry {
            eps,
            source: Box::new(e),
        };
        let (deep_net, deep) = univariate::build_smooth(target, eps).map_err(wrap)?;
        let (_, shallow) = build_shallow_baseline(target, eps).map_err(wrap)?;
        let breaks = count_breakpoints_1d(&deep_net, resolution)
            .map_err(wrap)?
            .count();
        partials.push(Partial {
            eps,
            deep,
            shallow,
            breaks,
        });
    }

    let ratio = |p: &Partial| {
        let x = (1.0 / p.eps).log2().powi(2);
        p.deep.counts.total as f64 / x
    };
    let max_ratio = partials.iter().map(&ratio).fold(0.0f64, f64::max);
    // a deep size that is genuinely polylog keeps the ratio from growing
    // along the sweep; the coarsest epsilon anchors the fitted constant
    let first_ratio = ratio(&partials[0]);

    let mut rows = Vec::with_capacity(partials.len());
    for p in &partials {
        let req = required_breakpoints(mu, p.eps, 2.0)?;
        let depth_free = size_lower_bound(mu, p.eps, None);
        let shallow_bound = size_lower_bound(mu, p.eps, Some(1));
        let row = GapRow {
            epsilon: p.eps,
            deep_total: p.deep.counts.total,
            deep_depth: p.deep.counts.depth,
            deep_measured: p.deep.measured,
            shallow_total: p.shallow.counts.total,
            shallow_depth: p.shallow.counts.depth,
            shallow_measured: p.shallow.measured,
            deep_breaks: p.breaks,
            required_breaks: req.count,
            breaks_vacuous: req.vacuous,
            bound_vacuous: depth_free.vacuous,
            verdict_a: ratio(p) <= RATIO_SPREAD_CAP * first_ratio,
            verdict_b: p.shallow.counts.total as f64 >= shallow_bound.value - 1e-9,
            // binding whenever the deep net actually meets eps
            verdict_c: p.deep.measured > p.eps || p.breaks as u64 >= req.count,
            verdict_d: p.deep.counts.total as f64 >= depth_free.value - 1e-9,
        };
        rows.push(row);
    }
    let all_pass = rows.iter().all(GapRow::all_pass);
    Ok(GapReport {
        rows,
        fitted_c: max_ratio,
        all_pass,
    })
}
