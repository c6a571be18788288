//! Greedy construction of the 1D approximate support `T` and the size-bound
//! diagnostic `alpha_of`.
//!
//! `T` is a subset of the candidate locations: starting from the smallest,
//! the greedy rule repeatedly jumps to the smallest candidate strictly
//! beyond the current point's covering radius `eps/(1+eps) * costhat`.
//! Every candidate is then covered by some member of `T`, which (through
//! the Lipschitz argument on `costhat`) puts every traversal median within
//! `eps * cost(m_Q, Q)` of `T`.

use crate::costhat::{build_profile_1d, CostProfile1D};
use crate::error::{Error, Result};
use crate::model::{Location, UncertainPointSet};

/// One support point with its cached cost and covering radius.
#[derive(Debug, Clone)]
pub struct SupportPoint {
    pub location: Location,
    pub costhat: f64,
    /// Covering radius `eps/(1+eps) * costhat`.
    pub radius: f64,
}

/// Which construction produced a support set.
#[derive(Debug, Clone, PartialEq)]
pub enum Construction {
    Greedy1d,
    Lattice2d {
        /// Certified lower bound on `min costhat` used to size the lattice.
        rho: f64,
        /// Lattice spacing.
        beta: f64,
    },
    Sampled,
}

/// The approximate support `T`: ordered points with cached `costhat` values
/// and covering radii.
#[derive(Debug, Clone)]
pub struct SupportSet {
    pub points: Vec<SupportPoint>,
    pub epsilon: f64,
    pub construction: Construction,
}

impl SupportSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Half of the covering radius; the deletion radius used while covering
    /// the 2D lattice.
    pub fn half_radius(&self, i: usize) -> f64 {
        self.points[i].radius / 2.0
    }

    /// 1D support values in increasing order.
    pub fn values_1d(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.location.value()).collect()
    }
}

/// Greedy 1D support for error parameter `eps > 0`. `O(nk log nk)`
/// including the sort and the cost profile.
pub fn build_support_1d(pset: &UncertainPointSet, eps: f64) -> Result<SupportSet> {
    let profile = build_profile_1d(pset)?;
    build_support_1d_with_profile(pset, eps, &profile)
}

/// Same as [`build_support_1d`] but reusing an already-built profile.
pub fn build_support_1d_with_profile(
    pset: &UncertainPointSet,
    eps: f64,
    profile: &CostProfile1D,
) -> Result<SupportSet> {
    pset.require_dim(1)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", eps)));
    }
    let mut values: Vec<f64> = pset.all_locations().map(|(_, _, l)| l.value()).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let factor = eps / (1.0 + eps);
    let mut points = Vec::new();
    let mut idx = 0usize;
    while idx < values.len() {
        let x = values[idx];
        let ch = profile
            .value_at_breakpoint(x)
            .expect("every candidate location is a profile breakpoint");
        let radius = factor * ch;
        points.push(SupportPoint { location: Location::scalar(x), costhat: ch, radius });
        // Smallest candidate strictly beyond the covering radius. When the
        // radius is zero this admits the immediately next distinct value.
        let threshold = x + radius;
        idx += values[idx..].partition_point(|&v| v <= threshold);
    }

    Ok(SupportSet { points, epsilon: eps, construction: Construction::Greedy1d })
}

/// Smallest `alpha` for which `min costhat >= L / (alpha * k)` holds on
/// this instance, with `L` the extent of `P_all`. Infinite when the minimum
/// is zero (coincident degenerate instances). The greedy support then
/// satisfies `|T| <= alpha * k * (1+eps)/eps` whenever `alpha` is finite.
pub fn alpha_of(pset: &UncertainPointSet) -> Result<f64> {
    pset.require_dim(1)?;
    let profile = build_profile_1d(pset)?;
    let (_, min_ch) = profile.min();
    let bp = profile.breakpoints();
    let extent = bp[bp.len() - 1] - bp[0];
    if min_ch <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(extent / (pset.k_locations() as f64 * min_ch))
}
