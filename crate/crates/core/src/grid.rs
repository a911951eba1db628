//! Evaluation grids for sup-norm verification sweeps.

use crate::error::{Error, Result};
use crate::net::Network;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Offset used when straddling dyadic points: the constructions jump at
/// `k/2^m`, so the extremal error sits immediately next to them.
pub const DYADIC_DELTA: f64 = 1e-9;

/// Description of a point set on `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `points` equispaced values on `[0,1]` (inclusive endpoints).
    Uniform1d { points: usize },
    /// Uniform grid united with `{k/2^level, k/2^level ± delta}`.
    DyadicEnriched {
        uniform: usize,
        level: u32,
        delta: f64,
    },
    /// Seeded uniform sample of `points` vectors in `[0,1]^dim`.
    Random { dim: usize, points: usize, seed: u64 },
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        match self {
            GridSpec::Uniform1d { .. } | GridSpec::DyadicEnriched { .. } => 1,
            GridSpec::Random { dim, .. } => *dim,
        }
    }

    /// Short human-readable description for report rows.
    pub fn describe(&self) -> String {
        match self {
            GridSpec::Uniform1d { points } => format!("uniform:{points}"),
            GridSpec::DyadicEnriched {
                uniform,
                level,
                delta,
            } => format!("dyadic:{uniform}+2^{level}±{delta:e}"),
            GridSpec::Random { dim, points, seed } => {
                format!("random:d{dim}x{points}@seed{seed}")
            }
        }
    }

    /// Materialize the point list, in grid order.
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        match *self {
            GridSpec::Uniform1d { points } => {
                Ok(uniform_1d(points)?.into_iter().map(|x| vec![x]).collect())
            }
            GridSpec::DyadicEnriched {
                uniform,
                level,
                delta,
            } => {
                let mut xs = uniform_1d(uniform)?;
                xs.extend(dyadic_points(level, delta));
                Ok(xs.into_iter().map(|x| vec![x]).collect())
            }
            GridSpec::Random { dim, points, seed } => {
                if points == 0 {
                    return Err(Error::EmptyGrid);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(points);
                for _ in 0..points {
                    out.push((0..dim).map(|_| rng.gen::<f64>()).collect());
                }
                Ok(out)
            }
        }
    }
}

pub fn uniform_1d(points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::EmptyGrid);
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| i as f64 / last).collect())
}

/// `{k/2^level - delta, k/2^level, k/2^level + delta}` clipped to `[0,1]`.
pub fn dyadic_points(level: u32, delta: f64) -> Vec<f64> {
    let scale = 2f64.powi(level as i32);
    let count = 1usize << level;
    let mut out = Vec::with_capacity(3 * (count + 1));
    for k in 0..=count {
        let p = k as f64 / scale;
        for x in [p - delta, p, p + delta] {
            if (0.0..=1.0).contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

/// Evaluate `net` over `spec`, returning `(point, value)` in grid order.
pub fn eval_grid(net: &Network, spec: &GridSpec) -> Result<Vec<(Vec<f64>, f64)>> {
    if spec.dim() != net.input_dim {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim,
            got: spec.dim(),
        });
    }
    let pts = spec.points()?;
    Ok(pts
        .into_iter()
        .map(|p| {
            let v = net.eval_unchecked(&p);
            (p, v)
        })
        .collect())
}

/// Largest absolute deviation between `net` and `truth` over the grid,
/// together with the witnessing point.
pub fn sup_error<F>(net: &Network, truth: F, points: &[Vec<f64>]) -> (f64, Vec<f64>)
where
    F: Fn(&[f64]) -> f64,
{
    let mut worst = 0.0;
    let mut at = points.first().cloned().unwrap_or_default();
    for p in points {
        let d = (net.eval_unchecked(p) - truth(p)).abs();
        if d > worst {
            worst = d;
            at = p.clone();
        }
    }
    (worst, at)
}
