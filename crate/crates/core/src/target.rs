//! Approximation targets: an evaluator plus the declared analytic
//! certificates the builders need (derivative bounds, strong convexity).

use std::fmt;
use std::sync::Arc;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type BoundFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A target function on `[0,1]^dim` with its declared profile.
///
/// The derivative-bound profile claims `sup |f^(n)| <= profile(n)`; it is a
/// declaration carried by the target, never inferred from the evaluator.
#[derive(Clone)]
pub struct ApproxTarget {
    pub name: String,
    pub dim: usize,
    eval: EvalFn,
    profile: Option<BoundFn>,
    /// Strong-convexity parameter, when the target certifies one.
    pub mu: Option<f64>,
}

impl fmt::Debug for ApproxTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApproxTarget")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("certified", &self.profile.is_some())
            .field("mu", &self.mu)
            .finish()
    }
}

impl ApproxTarget {
    pub fn new_1d(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ApproxTarget {
            name: name.into(),
            dim: 1,
            eval: Arc::new(move |x: &[f64]| eval(x[0])),
            profile: None,
            mu: None,
        }
    }

    pub fn with_profile(
        mut self,
        bound: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.profile = Some(Arc::new(bound));
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        assert!(mu > 0.0, "strong convexity parameter must be positive");
        self.mu = Some(mu);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn eval1(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim, 1);
        (self.eval)(&[x])
    }

    pub fn certified(&self) -> bool {
        self.profile.is_some()
    }

    /// Claimed bound on `sup |f^(n)|`, if the target is certified.
    pub fn deriv_bound(&self, order: usize) -> Option<f64> {
        self.profile.as_ref().map(|p| p(order))
    }
}

/// 1-D polynomial target with the exact derivative-bound profile
/// `sup |f^(n)| <= sum_{i>=n} |a_i| i!/(i-n)!` on `[0,1]`.
pub fn poly_target(name: impl Into<String>, coeffs: &[f64]) -> ApproxTarget {
    let a = coeffs.to_vec();
    let a_profile = a.clone();
    let mut t = ApproxTarget::new_1d(name, move |x| {
        let mut acc = 0.0;
        for &c in a.iter().rev() {
            acc = acc * x + c;
        }
        acc
    });
    t = t.with_profile(move |n| {
        let mut bound = 0.0;
        for (i, &c) in a_profile.iter().enumerate() {
            if i >= n {
                let mut falling = 1.0;
                for k in 0..n {
                    falling *= (i - k) as f64;
                }
                bound += c.abs() * falling;
            }
        }
        bound
    });
    t
}

/// Named targets exposed to the CLI and the experiment harness.
pub fn by_name(name: &str) -> Option<ApproxTarget> {
    match name {
        "square" => Some(square()),
        "identity" => Some(identity()),
        "exp_shifted" => Some(exp_shifted()),
        "sine_unit" => Some(sine_unit()),
        _ => None,
    }
}

/// `x^2`: strongly convex with mu = 2; derivatives (2x, 2, 0, ...).
pub fn square() -> ApproxTarget {
    poly_target("square", &[0.0, 0.0, 1.0]).with_mu(2.0)
}

/// `x`.
pub fn identity() -> ApproxTarget {
    poly_target("identity", &[0.0, 1.0])
}

/// `e^{x-1}`: every derivative bounded by 1 on `[0,1]`.
pub fn exp_shifted() -> ApproxTarget {
    ApproxTarget::new_1d("exp_shifted", |x| (x - 1.0).exp()).with_profile(|_| 1.0)
}

/// `(1 + sin x)/2`, a certified `[0,1] -> [0,1]` stage function.
pub fn sine_unit() -> ApproxTarget {
    ApproxTarget::new_1d("sine_unit", |x| (1.0 + x.sin()) / 2.0).with_profile(|n| {
        if n == 0 {
            1.0
        } else {
            0.5
        }
    })
}

/// `e^{-rate * x}` on `[0,1]` with the honest profile `rate^n`; the
/// Gaussian builder's outer stage.
pub fn exp_decay(rate: f64) -> ApproxTarget {
    assert!(rate > 0.0);
    let mut t = ApproxTarget::new_1d(format!("exp_decay_{rate}"), move |x| (-rate * x).exp());
    t = t.with_profile(move |n| rate.powi(n as i32));
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_profile_matches_hand_computation() {
        // f = 0.5x + 0.5x^2: f' = 0.5 + x (sup 1.5), f'' = 1, f''' = 0
        let t = poly_target("t", &[0.0, 0.5, 0.5]);
        assert_eq!(t.deriv_bound(1), Some(1.5));
        assert_eq!(t.deriv_bound(2), Some(1.0));
        assert_eq!(t.deriv_bound(3), Some(0.0));
        assert_eq!(t.eval1(0.5), 0.375);
    }

    #[test]
    fn square_certificate() {
        let t = square();
        assert_eq!(t.mu, Some(2.0));
        assert_eq!(t.deriv_bound(1), Some(2.0));
        assert_eq!(t.deriv_bound(2), Some(2.0));
        assert_eq!(t.deriv_bound(5), Some(0.0));
    }

    #[test]
    fn registry_resolves() {
        for n in ["square", "identity", "exp_shifted", "sine_unit"] {
            assert!(by_name(n).is_some(), "{n} missing");
        }
        assert!(by_name("nope").is_none());
    }
}
