//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines for passing criteria too.

use deepapprox::analysis::{
    build_shallow_baseline, count_breakpoints_1d, gap_experiment, required_breakpoints,
    size_lower_bound, telgarsky_capacity,
};
use deepapprox::combinators::{
    build_gaussian, build_ridge, combine_product, combine_sum, compose_with_probes,
    CompositionPlan,
};
use deepapprox::multivariate::{
    build_linear_product, build_multinomial, enumerate_multi_indices, LinearFormSet, MultiIndex,
};
use deepapprox::univariate::{build_polynomial, build_smooth, build_square, gate_value};
use deepapprox::{grid, serial, target, Network};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pow2(i: i32) -> f64 {
    2f64.powi(i)
}

fn conclude(name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("{name}: PASS");
    } else {
        println!("{name}: FAIL — {}", failures.join("; "));
        panic!("{name} failed: {}", failures.join("; "));
    }
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

#[test]
fn criterion_01_square_error_and_counts() {
    let mut failures = Vec::new();
    let mut ns = Vec::new();
    let mut steps = Vec::new();
    let mut relus = Vec::new();
    for k in 2..=20 {
        let eps = pow2(-k);
        match build_square(eps) {
            Ok((_, report)) => {
                let n = report.bits.unwrap();
                // n = ceil(log2(1/eps)) + 1, checked by its defining
                // inequalities: 2^(n-1) >= 1/eps > 2^(n-2)
                if !(pow2(n as i32 - 1) * eps >= 1.0 && pow2(n as i32 - 2) * eps < 1.0) {
                    failures.push(format!("eps=2^-{k}: bit count {n} off the formula"));
                }
                let bound = pow2(1 - n as i32);
                if report.measured > bound {
                    failures.push(format!("eps=2^-{k}: measured {} > 1/2^(n-1) {bound}", report.measured));
                }
                if bound > eps {
                    failures.push(format!("eps=2^-{k}: bound {bound} > eps"));
                }
                ns.push(n as f64);
                steps.push(report.counts.step as f64);
                relus.push(report.counts.relu as f64);
            }
            Err(e) => failures.push(format!("eps=2^-{k}: build failed: {e}")),
        }
    }
    // per-bit constants of the construction are 1 step and 1 relu
    let step_slope = fit_slope(&ns, &steps);
    let relu_slope = fit_slope(&ns, &relus);
    if (step_slope - 1.0).abs() > 0.1 {
        failures.push(format!("step slope {step_slope} off the per-bit constant 1"));
    }
    if (relu_slope - 1.0).abs() > 0.1 {
        failures.push(format!("relu slope {relu_slope} off the per-bit constant 1"));
    }
    conclude("criterion 1 (square construction)", failures);
}

#[test]
fn criterion_02_polynomial_error_and_counts() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut ratios = Vec::new();
    for &p in &[2usize, 4, 8] {
        for &k in &[4i32, 8] {
            let eps = pow2(-k);
            let mut a: Vec<f64> = (0..=p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm: f64 = a[1..].iter().map(|c| c.abs()).sum();
            for c in &mut a[1..] {
                *c /= norm;
            }
            match build_polynomial(&a, eps) {
                Ok((_, report)) => {
                    let n = report.bits.unwrap();
                    // n = ceil(log2(p/eps)) + 1 by its defining inequalities
                    if !(pow2(n as i32 - 1) * eps >= p as f64
                        && pow2(n as i32 - 2) * eps < p as f64)
                    {
                        failures.push(format!("p={p} eps=2^-{k}: bit count {n} off the formula"));
                    }
                    let bound = p as f64 * pow2(1 - n as i32);
                    if report.measured > bound {
                        failures.push(format!(
                            "p={p} eps=2^-{k}: measured {} > p/2^(n-1) {bound}",
                            report.measured
                        ));
                    }
                    ratios.push(report.counts.relu as f64 / (p as f64 * n as f64));
                }
                Err(e) => failures.push(format!("p={p} eps=2^-{k}: {e}")),
            }
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    for r in &ratios {
        if (r - mean).abs() / mean > 0.10 {
            failures.push(format!("relu/(p*n) ratio {r} deviates >10% from {mean}"));
        }
    }
    conclude("criterion 2 (polynomial construction)", failures);
}

#[test]
fn criterion_03_smooth_and_cheb_reproduction() {
    let mut failures = Vec::new();
    let target = target::exp_shifted();
    for k in 4..=16 {
        let eps = pow2(-k);
        match build_smooth(&target, eps) {
            Ok((_, report)) => {
                if report.measured > eps {
                    failures.push(format!("eps=2^-{k}: measured {} > eps", report.measured));
                }
            }
            Err(e) => failures.push(format!("eps=2^-{k}: {e}")),
        }
    }
    // Chebyshev polynomial reproduction, degree <= 15: the interpolant
    // reproduces the polynomial to 1e-9 over [0,1]. (Coefficient-wise
    // recovery at this tolerance is impossible past degree ~10: the
    // samples->coefficients map amplifies the half-ulp sample rounding by
    // ~5e10 at degree 15.)
    let mut rng = ChaCha8Rng::seed_from_u64(97);
    for case in 0..20 {
        let degree = rng.gen_range(1..=15usize);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eval = |x: f64| {
            let mut acc = 0.0;
            for &c in coeffs.iter().rev() {
                acc = acc * x + c;
            }
            acc
        };
        let p = deepapprox::cheb::interpolate(eval, degree).unwrap();
        let mut sup = 0.0f64;
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            sup = sup.max((p.eval(x) - eval(x)).abs());
        }
        if sup > 1e-9 {
            failures.push(format!("case {case} (degree {degree}): recovery off by {sup}"));
        }
    }
    conclude("criterion 3 (smooth functions / reproduction)", failures);
}

#[test]
fn criterion_04_gadget_identity() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ys: Vec<f64> = (0..10_000).map(|_| rng.gen_range(0.0..=2.0)).collect();
    ys.extend([0.0, 2.0, 1.0, f64::MIN_POSITIVE, 2.0 - f64::EPSILON]);
    for &b in &[0.0, 1.0] {
        for &y in &ys {
            let got = gate_value(b, y);
            let want = b * y;
            if got != want {
                failures.push(format!("b={b} y={y}: {got} != {want}"));
            }
        }
    }
    conclude("criterion 4 (gadget identity, zero tolerance)", failures);
}

#[test]
fn criterion_05_sum_product_compose() {
    let eps = pow2(-5);
    let mut failures = Vec::new();

    // sum: k = 1 degenerates to the single-target build
    match (
        combine_sum(&[target::exp_shifted()], &[1.0], eps),
        build_smooth(&target::exp_shifted(), eps),
    ) {
        (Ok((sum_net, _)), Ok((smooth_net, _))) => {
            if sum_net != smooth_net {
                failures.push("k=1 sum differs from build_smooth".into());
            }
        }
        (a, b) => failures.push(format!("k=1 sum builds failed: {:?} {:?}", a.err(), b.err())),
    }
    // sum: 0.5 x + 0.5 x^2, size independent of k
    match combine_sum(&[target::identity(), target::square()], &[0.5, 0.5], eps) {
        Ok((_, report)) => {
            if report.measured > eps {
                failures.push(format!("sum measured {} > eps", report.measured));
            }
            let mix = target::poly_target("mix", &[0.0, 0.5, 0.5]);
            let (_, single) = build_smooth(&mix, eps).unwrap();
            if report.counts != single.counts {
                failures.push("sum size depends on k".into());
            }
        }
        Err(e) => failures.push(format!("sum build failed: {e}")),
    }

    // product: k = 1 and k = 2
    match combine_product(&[target::exp_shifted()], eps) {
        Ok((_, report)) => {
            if report.measured > eps {
                failures.push(format!("product k=1 measured {} > eps", report.measured));
            }
        }
        Err(e) => failures.push(format!("product k=1 failed: {e}")),
    }
    match combine_product(&[target::identity(), target::identity()], eps) {
        Ok((net, report)) => {
            if report.measured > eps {
                failures.push(format!("product k=2 measured {} > eps", report.measured));
            }
            let v = net.eval(&[0.6]).unwrap();
            if (v - 0.36).abs() > eps {
                failures.push(format!("product k=2 value {v} vs 0.36"));
            }
        }
        Err(e) => failures.push(format!("product k=2 failed: {e}")),
    }

    // compose: k = 1 and k = 2 with clamped stages
    match compose_with_probes(&CompositionPlan::new(vec![target::square()]), eps) {
        Ok((_, report, _)) => {
            if report.measured > eps {
                failures.push(format!("compose k=1 measured {} > eps", report.measured));
            }
        }
        Err(e) => failures.push(format!("compose k=1 failed: {e}")),
    }
    let plan = CompositionPlan::new(vec![target::square(), target::square()]);
    match compose_with_probes(&plan, eps) {
        Ok((net, report, probes)) => {
            if report.measured > eps {
                failures.push(format!("compose k=2 measured {} > eps", report.measured));
            }
            for i in 0..=4000 {
                let x = i as f64 / 4000.0;
                let values = net.forward(&[x]);
                for p in &probes {
                    let v = p.output.eval(&values);
                    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                        failures.push(format!("stage {} left [0,1] at x={x}: {v}", p.name));
                    }
                }
            }
        }
        Err(e) => failures.push(format!("compose k=2 failed: {e}")),
    }
    conclude("criterion 5 (sum / product / compose)", failures);
}

#[test]
fn criterion_06_multivariate() {
    let eps = pow2(-5);
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(23);

    for &d in &[2usize, 3] {
        for &p in &[2usize, 3] {
            // nonnegative rows keep every stage value inside [0,1]
            let rows: Vec<Vec<f64>> = (0..p)
                .map(|_| {
                    let raw: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
                    let s: f64 = raw.iter().sum();
                    raw.into_iter().map(|w| w / s).collect()
                })
                .collect();
            let forms = LinearFormSet::new(rows).unwrap();
            match build_linear_product(&forms, eps, 7) {
                Ok((_, report)) => {
                    if report.measured > eps {
                        failures.push(format!(
                            "linear product d={d} p={p}: measured {} > eps",
                            report.measured
                        ));
                    }
                }
                // a range rejection would also mean the g_l check failed
                Err(e) => failures.push(format!("linear product d={d} p={p}: {e}")),
            }

            let idx = enumerate_multi_indices(d, p as u32).unwrap();
            let c = 1.0 / idx.len() as f64;
            let terms: Vec<(MultiIndex, f64)> = idx.into_iter().map(|a| (a, c)).collect();
            match build_multinomial(&terms, d, eps, 7) {
                Ok((_, report)) => {
                    if report.measured > eps {
                        failures.push(format!(
                            "multinomial d={d} p={p}: measured {} > eps",
                            report.measured
                        ));
                    }
                    if report.counts.step != d * report.bits.unwrap() as usize {
                        failures.push(format!("multinomial d={d} p={p}: decoders not shared"));
                    }
                }
                Err(e) => failures.push(format!("multinomial d={d} p={p}: {e}")),
            }
        }
    }

    // enumeration count matches C(p+d, d) against brute force
    for d in 1..=8usize {
        for p in 0..=8u32 {
            let got = enumerate_multi_indices(d, p).unwrap().len();
            let mut brute = 0usize;
            let mut stack = vec![(0usize, 0u32)];
            while let Some((coord, used)) = stack.pop() {
                if coord == d {
                    brute += 1;
                    continue;
                }
                for a in 0..=(p - used) {
                    stack.push((coord + 1, used + a));
                }
            }
            if got != brute {
                failures.push(format!("enumerate d={d} p={p}: {got} vs brute {brute}"));
            }
        }
    }
    conclude("criterion 6 (multivariate constructions)", failures);
}

#[test]
fn criterion_07_gaussian_and_ridge() {
    let eps = pow2(-5);
    let mut failures = Vec::new();
    for d in 1..=3usize {
        match build_gaussian(d, eps, 7) {
            Ok((_, report)) => {
                if report.measured > eps {
                    failures.push(format!("gaussian d={d}: measured {} > eps", report.measured));
                }
            }
            Err(e) => failures.push(format!("gaussian d={d}: {e}")),
        }
    }
    let third = 1.0 / 3.0;
    let a = [third, third, 1.0 - 2.0 * third];
    match build_ridge(&a, &target::exp_shifted(), eps, 7) {
        Ok((_, report)) => {
            if report.measured > eps {
                failures.push(format!("ridge: measured {} > eps", report.measured));
            }
        }
        Err(e) => failures.push(format!("ridge: {e}")),
    }
    conclude("criterion 7 (gaussian / ridge)", failures);
}

#[test]
fn criterion_08_lower_bounds() {
    let mut failures = Vec::new();

    // (a) exact depth-free bound
    let a = size_lower_bound(1.0, 1.0 / (16.0 * pow2(10)), None);
    if a.value != 10.0 {
        failures.push(format!("depth-free bound {} != 10", a.value));
    }

    // (b) + (d): every deep net for x^2 respects the bounds
    for k in 4..=12 {
        let eps = pow2(-k);
        let (net, report) = build_smooth(&target::square(), eps).unwrap();
        let bound = size_lower_bound(2.0, eps, None);
        if !bound.vacuous && (report.counts.total as f64) < bound.value {
            failures.push(format!(
                "eps=2^-{k}: deep size {} below log2(mu/16eps) {}",
                report.counts.total, bound.value
            ));
        }
        // (d) detected break points within the capacity bound
        let scan = count_breakpoints_1d(&net, 16).unwrap();
        let cap = telgarsky_capacity(report.counts.total, report.counts.depth).unwrap();
        if scan.count() as f64 > cap {
            failures.push(format!("eps=2^-{k}: {} breaks exceed capacity {cap}", scan.count()));
        }
    }

    // (c) the n=5 square net: 31 breaks, at least the required number
    let (net, report) = build_square(pow2(-4)).unwrap();
    assert_eq!(report.bits, Some(5));
    let scan = count_breakpoints_1d(&net, 20).unwrap();
    if scan.count() != 31 {
        failures.push(format!("square n=5: {} breaks, expected 31", scan.count()));
    }
    let req = required_breakpoints(2.0, report.measured, 2.0).unwrap();
    if (scan.count() as u64) < req.count {
        failures.push(format!("square n=5: {} breaks < required {}", scan.count(), req.count));
    }
    let cap = telgarsky_capacity(report.counts.total, report.counts.depth).unwrap();
    if scan.count() as f64 > cap {
        failures.push(format!("square n=5: breaks exceed capacity {cap}"));
    }

    // (d) also on square nets across the sweep and a shallow baseline
    for k in [3, 6, 9, 12] {
        let (net, report) = build_square(pow2(-k)).unwrap();
        let scan = count_breakpoints_1d(&net, 16).unwrap();
        let cap = telgarsky_capacity(report.counts.total, report.counts.depth).unwrap();
        if scan.count() as f64 > cap {
            failures.push(format!("square eps=2^-{k}: breaks exceed capacity"));
        }
    }
    let (net, report) = build_shallow_baseline(&target::square(), pow2(-9)).unwrap();
    let scan = count_breakpoints_1d(&net, 16).unwrap();
    let cap = telgarsky_capacity(report.counts.total, report.counts.depth).unwrap();
    if scan.count() as f64 > cap {
        failures.push("baseline: breaks exceed capacity".into());
    }

    conclude("criterion 8 (lower bounds / break points)", failures);
}

#[test]
fn criterion_09_gap_experiment() {
    let mut failures = Vec::new();
    let eps_list: Vec<f64> = (4..=12).map(|k| pow2(-k)).collect();
    let report = match gap_experiment(&target::square(), &eps_list, 16) {
        Ok(r) => r,
        Err(e) => {
            conclude("criterion 9 (gap experiment)", vec![format!("run failed: {e}")]);
            return;
        }
    };
    for row in &report.rows {
        if !row.all_pass() {
            failures.push(format!(
                "eps={}: verdicts a={} b={} c={} d={}",
                row.epsilon, row.verdict_a, row.verdict_b, row.verdict_c, row.verdict_d
            ));
        }
        // shallow K within a factor 2 of the curvature oracle
        let oracle = (1.0 / (8.0 * row.epsilon).sqrt()).ceil();
        let k = row.shallow_total as f64;
        if k < oracle / 2.0 || k > oracle * 2.0 {
            failures.push(format!("eps={}: K={k} vs oracle {oracle}", row.epsilon));
        }
    }
    // single fitted c across the sweep
    for row in &report.rows {
        let x = (1.0 / row.epsilon).log2().powi(2);
        if row.deep_total as f64 > report.fitted_c * x + 1e-9 {
            failures.push(format!("eps={}: deep size above fitted c", row.epsilon));
        }
    }
    // desk-scale instantiation of N_d = O(L_s^2 log^2 N_s)
    for row in report.rows.iter().rev().take(3) {
        let cap = 4.0 * (row.shallow_total as f64).log2().powi(2);
        if row.deep_total as f64 > cap {
            failures.push(format!(
                "eps={}: N_d={} > 4 log2^2(N_s)={cap}",
                row.epsilon, row.deep_total
            ));
        }
    }
    conclude("criterion 9 (gap experiment)", failures);
}

#[test]
fn criterion_10_infrastructure() {
    let mut failures = Vec::new();

    // serialization round trip
    let (square, _) = build_square(pow2(-6)).unwrap();
    let text = serial::serialize(&square);
    match serial::deserialize(&text) {
        Ok(back) => {
            if back != square {
                failures.push("round trip not identity".into());
            }
            if serial::serialize(&back) != text {
                failures.push("re-serialization not byte-identical".into());
            }
        }
        Err(e) => failures.push(format!("deserialize failed: {e}")),
    }

    // to_strict agreement on 1000 seeded points per net
    let nets: Vec<(&str, Network)> = vec![
        ("square", square.clone()),
        (
            "polynomial",
            build_polynomial(&[0.2, 0.5, 0.5], pow2(-6)).unwrap().0,
        ),
        ("smooth", build_smooth(&target::exp_shifted(), pow2(-8)).unwrap().0),
        ("gaussian", build_gaussian(2, pow2(-4), 7).unwrap().0),
        (
            "linear_product",
            build_linear_product(
                &LinearFormSet::new(vec![vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap(),
                pow2(-4),
                7,
            )
            .unwrap()
            .0,
        ),
    ];
    for (name, net) in &nets {
        let strict = net.to_strict();
        let spec = grid::GridSpec::Random {
            dim: net.input_dim,
            points: 1000,
            seed: 13,
        };
        for x in spec.points().unwrap() {
            let d = (net.eval_unchecked(&x) - strict.eval_unchecked(&x)).abs();
            if d > 1e-12 {
                failures.push(format!("{name}: strict drift {d} at {x:?}"));
                break;
            }
        }
    }

    // determinism: identical builds serialize identically, grids repeat
    let (square2, _) = build_square(pow2(-6)).unwrap();
    if serial::serialize(&square2) != text {
        failures.push("rebuild not byte-identical".into());
    }
    let spec = grid::GridSpec::Random {
        dim: 2,
        points: 64,
        seed: 99,
    };
    let (g1, g2) = (spec.points().unwrap(), spec.points().unwrap());
    if g1 != g2 {
        failures.push("seeded grid not reproducible".into());
    }

    conclude("criterion 10 (infrastructure)", failures);
}
