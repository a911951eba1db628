//! Chebyshev-node Lagrange interpolation with monomial-coefficient
//! extraction, the polynomial front-end for the smooth-function builders.
//!
//! Interpolation happens on `[0,1]` at the affinely mapped nodes
//! `(z_i + 1)/2`; the builders keep derivative bookkeeping on the
//! function's native domain and the classical `[-1,1]` remainder bound only
//! gets safer under the contraction.

use crate::error::{Error, Result};
use crate::util::{factorial, ln_factorial, pow2};
use std::f64::consts::PI;

/// Degrees past this make the monomial basis too ill-conditioned for f64;
/// see [`interpolate_capped`].
pub const DEGREE_CAP: usize = 40;

/// Chebyshev nodes of degree `n`: `z_i = cos((i + 1/2) pi / (n + 1))`,
/// strictly decreasing, plus their images on `[0,1]`.
#[derive(Debug, Clone)]
pub struct ChebGrid {
    pub degree: usize,
    /// nodes on `[-1, 1]`
    pub nodes: Vec<f64>,
    /// `(z_i + 1) / 2` on `[0, 1]`
    pub mapped: Vec<f64>,
}

pub fn cheb_points(degree: usize) -> ChebGrid {
    let count = degree + 1;
    let mut nodes = Vec::with_capacity(count);
    let mut mapped = Vec::with_capacity(count);
    for i in 0..count {
        let z = ((i as f64 + 0.5) * PI / count as f64).cos();
        nodes.push(z);
        mapped.push((z + 1.0) / 2.0);
    }
    ChebGrid {
        degree,
        nodes,
        mapped,
    }
}

/// Polynomial in the monomial basis: `P(x) = sum c_n x^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialPoly {
    pub coeffs: Vec<f64>,
}

impl MonomialPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

/// Interpolate `f` at the mapped Chebyshev nodes of `degree` and expand to
/// monomial coefficients. Degree is capped at [`DEGREE_CAP`].
pub fn interpolate<F: Fn(f64) -> f64>(f: F, degree: usize) -> Result<MonomialPoly> {
    interpolate_capped(f, degree, DEGREE_CAP)
}

/// As [`interpolate`] with an explicit conditioning cap for callers that
/// accept the accuracy degradation past the default.
pub fn interpolate_capped<F: Fn(f64) -> f64>(
    f: F,
    degree: usize,
    cap: usize,
) -> Result<MonomialPoly> {
    if degree > cap {
        return Err(Error::DegreeCap {
            requested: degree,
            cap,
        });
    }
    let grid = cheb_points(degree);
    let samples: Vec<f64> = grid.mapped.iter().map(|&t| f(t)).collect();
    Ok(newton_monomial(&grid.mapped, &samples))
}

/// Divided-difference table expanded from Newton form into monomials.
fn newton_monomial(nodes: &[f64], samples: &[f64]) -> MonomialPoly {
    let n = nodes.len();
    let mut dd = samples.to_vec();
    for k in 1..n {
        for i in (k..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - k]);
        }
    }
    // c accumulates the monomial coefficients, basis holds the coefficients
    // of prod_{j<k} (x - t_j)
    let mut coeffs = vec![0.0; n];
    let mut basis = vec![0.0; n];
    basis[0] = 1.0;
    let mut deg = 0usize;
    coeffs[0] = dd[0];
    for k in 1..n {
        let t = nodes[k - 1];
        let mut next = vec![0.0; n];
        for j in 0..=deg {
            next[j + 1] += basis[j];
            next[j] -= t * basis[j];
        }
        basis = next;
        deg += 1;
        for j in 0..=deg {
            coeffs[j] += dd[k] * basis[j];
        }
    }
    MonomialPoly { coeffs }
}

/// Barycentric Lagrange evaluation from samples at the mapped nodes; exact
/// at the nodes themselves.
pub fn lagrange_eval(grid: &ChebGrid, samples: &[f64], x: f64) -> f64 {
    assert_eq!(samples.len(), grid.mapped.len(), "one sample per node");
    let count = grid.degree + 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..count {
        let t = grid.mapped[i];
        if x == t {
            return samples[i];
        }
        // Chebyshev-Gauss barycentric weights up to a common factor.
        let w = if i % 2 == 0 { 1.0 } else { -1.0 }
            * ((2 * i + 1) as f64 * PI / (2.0 * count as f64)).sin();
        let q = w / (x - t);
        num += q * samples[i];
        den += q;
    }
    num / den
}

/// Lagrange remainder bound `deriv_bound / (2^degree (degree+1)!)`.
pub fn remainder_bound(degree: usize, deriv_bound: f64) -> f64 {
    assert!(deriv_bound >= 0.0, "derivative bound must be nonnegative");
    if deriv_bound == 0.0 {
        return 0.0;
    }
    let fact = factorial(degree + 1);
    if fact.is_finite() {
        deriv_bound / pow2(degree as i32) / fact
    } else {
        // log-domain fallback for degrees whose factorial overflows
        (deriv_bound.ln() - degree as f64 * std::f64::consts::LN_2 - ln_factorial(degree + 1))
            .exp()
    }
}
