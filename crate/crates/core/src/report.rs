//! Build reports: size bookkeeping plus the measured-vs-bound verdict every
//! accepted build must satisfy.

use crate::error::{Error, Result};
use crate::grid;
use crate::net::{Counts, Network};
use crate::util::pow2;

/// Absolute slack added to every theoretical bound to absorb f64 rounding.
pub const BOUND_SLACK: f64 = 1e-12;

/// Uniform point count of the 1-D verification grid.
pub const VERIFY_UNIFORM: usize = 100_000;

/// Dyadic enrichment level is capped so grids stay ~1e5 points.
pub const VERIFY_DYADIC_CAP: u32 = 15;

/// Default seed for seeded verification grids.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone)]
pub struct BuildReport {
    /// Which construction produced the network.
    pub builder: String,
    /// Requested tolerance, when the builder takes one.
    pub epsilon: Option<f64>,
    pub counts: Counts,
    /// Total size of the strict (adjacent-layer) form.
    pub strict_total: usize,
    /// Bit count `n` of the decoder(s), when applicable.
    pub bits: Option<u32>,
    /// Polynomial degree / number of ladder stages, when applicable.
    pub degree: Option<u32>,
    /// Expected counts from the builder's closed-form size formula.
    pub expected: Counts,
    /// Theoretical sup-error bound the construction guarantees.
    pub bound: f64,
    /// Measured sup error over the verification grid.
    pub measured: f64,
    /// Description of the grid used for `measured`.
    pub grid: String,
    pub seed: Option<u64>,
}

impl BuildReport {
    /// Builders call this once measurements are in; a build whose measured
    /// error exceeds its own bound is a defect, not a report row.
    pub fn accept(self) -> Result<Self> {
        if self.counts != self.expected {
            return Err(Error::Invalid(format!(
                "realized counts {:?} drifted from the recorded formula {:?} ({})",
                self.counts, self.expected, self.builder
            )));
        }
        if self.measured > self.bound + BOUND_SLACK {
            return Err(Error::BoundViolation {
                measured: self.measured,
                bound: self.bound,
            });
        }
        Ok(self)
    }
}

/// 1-D verification grid: `VERIFY_UNIFORM` equispaced points united with
/// straddled dyadics `k/2^level ± 1e-9`. The construction's error is
/// extremal adjacent to its dyadic jumps, so uniform sampling alone
/// under-measures. Levels above `VERIFY_DYADIC_CAP` are subsampled by
/// capping (each retained dyadic still straddles a jump of the finer net).
pub fn verification_grid_1d(bits: u32) -> Vec<f64> {
    let level = (bits + 1).min(VERIFY_DYADIC_CAP);
    let mut xs = grid::uniform_1d(VERIFY_UNIFORM).expect("nonzero grid");
    xs.extend(grid::dyadic_points(level, grid::DYADIC_DELTA));
    xs
}

/// Seeded d-dimensional grid: uniform sample plus the all-dyadic corners
/// `{0, 1/2, 1}^d` for small `d`.
pub fn verification_grid_nd(dim: usize, points: usize, seed: u64) -> Vec<Vec<f64>> {
    let spec = grid::GridSpec::Random {
        dim,
        points,
        seed,
    };
    let mut pts = spec.points().expect("nonzero grid");
    if dim <= 5 {
        let mut corner = vec![0usize; dim];
        loop {
            pts.push(corner.iter().map(|&c| c as f64 * 0.5).collect());
            let mut i = 0;
            loop {
                if i == dim {
                    return pts;
                }
                corner[i] += 1;
                if corner[i] <= 2 {
                    break;
                }
                corner[i] = 0;
                i += 1;
            }
        }
    }
    pts
}

/// Measure the sup error of `net` against `truth` on a 1-D grid.
pub fn measure_1d<F: Fn(f64) -> f64>(net: &Network, truth: F, xs: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for &x in xs {
        let d = (net.eval_unchecked(&[x]) - truth(x)).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Theoretical truncation step `2^{-n}` for an `n`-bit decoder.
pub fn truncation_step(bits: u32) -> f64 {
    pow2(-(bits as i32))
}
