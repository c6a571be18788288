//! The conservative cost proxy `costhat(x) = (1/n) * sum_i min_j ||x - p_ij||`.
//!
//! `costhat` lower-bounds `cost(x, Q)` for every traversal `Q` and is
//! 1-Lipschitz; both facts carry the covering guarantees of the support
//! constructions. In 1D it is piecewise linear, and [`CostProfile1D`]
//! precomputes it once in `O(nk log nk)` for `O(log nk)` evaluation.
//!
//! All arithmetic here is double precision; exactness is only required of
//! weights, never of costs.

use crate::error::{Error, Result};
use crate::model::{Location, UncertainPointSet};

/// Direct evaluation in any dimension: `O(nk)`.
pub fn costhat_eval(x: &Location, pset: &UncertainPointSet) -> Result<f64> {
    if x.dim() != pset.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: query {} vs instance {}",
            x.dim(),
            pset.dim()
        )));
    }
    let mut total = 0.0;
    for p in pset.points() {
        let nearest = p
            .locations
            .iter()
            .map(|l| x.distance(l))
            .fold(f64::INFINITY, f64::min);
        total += nearest;
    }
    Ok(total / pset.n_points() as f64)
}

/// Piecewise-linear representation of `costhat` for a 1D instance.
///
/// Breakpoints are the candidate locations plus the midpoints between
/// consecutive distinct locations within each uncertain point (where that
/// point's nearest candidate switches). Between consecutive breakpoints the
/// slope is an integer multiple of `1/n`; left of the first breakpoint the
/// slope is exactly `-1`, right of the last it is `+1`.
#[derive(Debug, Clone)]
pub struct CostProfile1D {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    /// Slope on segment `(breakpoints[s], breakpoints[s+1])` in units of
    /// `1/n`; length `breakpoints.len() - 1`.
    slope_units: Vec<i64>,
    n: usize,
}

impl CostProfile1D {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slope_units(&self) -> &[i64] {
        &self.slope_units
    }

    /// Evaluate at an arbitrary coordinate by segment interpolation. The
    /// result is clamped at zero: rounding in the sweep may drift a few ulp
    /// below it where the true value vanishes.
    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        if x <= bp[0] {
            return self.values[0] + (bp[0] - x);
        }
        if x >= bp[bp.len() - 1] {
            return self.values[bp.len() - 1] + (x - bp[bp.len() - 1]);
        }
        // partition_point returns the first index with bp > x, so seg >= 1.
        let seg = bp.partition_point(|&b| b <= x) - 1;
        if bp[seg] == x {
            return self.values[seg];
        }
        (self.values[seg] + self.slope_units[seg] as f64 / self.n as f64 * (x - bp[seg])).max(0.0)
    }

    /// Exact minimum over the breakpoint span (the slope is constant
    /// between breakpoints and `+/-1` outside, so the minimum is attained
    /// at a breakpoint). Returns `(coordinate, value)`.
    pub fn min(&self) -> (f64, f64) {
        let mut best = (self.breakpoints[0], self.values[0]);
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if *v < best.1 {
                best = (*b, *v);
            }
        }
        best
    }

    /// Value of `costhat` at an existing breakpoint, by binary search.
    pub fn value_at_breakpoint(&self, x: f64) -> Option<f64> {
        let i = self.breakpoints.partition_point(|&b| b < x);
        if i < self.breakpoints.len() && self.breakpoints[i] == x {
            Some(self.values[i])
        } else {
            None
        }
    }
}

/// Build the 1D profile: one global sort of all critical points, then a
/// single sweep that tracks the summed slope of the per-point lower
/// envelopes.
pub fn build_profile_1d(pset: &UncertainPointSet) -> Result<CostProfile1D> {
    pset.require_dim(1)?;
    let n = pset.n_points();

    // Events: crossing a candidate location flips that point's envelope
    // slope from -1 to +1 (delta +2); crossing a midpoint between two
    // consecutive distinct candidates flips it back (delta -2).
    let mut events: Vec<(f64, i64)> = Vec::with_capacity(pset.n_points() * (2 * pset.k_locations() - 1));
    for p in pset.points() {
        let mut vals: Vec<f64> = p.locations.iter().map(|l| l.value()).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in 0..vals.len() {
            events.push((vals[w], 2));
            if w + 1 < vals.len() {
                events.push(((vals[w] + vals[w + 1]) / 2.0, -2));
            }
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut breakpoints: Vec<f64> = Vec::with_capacity(events.len());
    let mut deltas: Vec<i64> = Vec::with_capacity(events.len());
    for (x, d) in events {
        if breakpoints.last() == Some(&x) {
            *deltas.last_mut().unwrap() += d;
        } else {
            breakpoints.push(x);
            deltas.push(d);
        }
    }

    // Left of every candidate all envelopes have slope -1.
    let mut units: i64 = -(n as i64);
    let first = Location::scalar(breakpoints[0]);
    let mut value = costhat_eval(&first, pset)?;
    let mut values = Vec::with_capacity(breakpoints.len());
    let mut slope_units = Vec::with_capacity(breakpoints.len().saturating_sub(1));
    values.push(value);
    let mut comp = 0.0f64; // Neumaier compensation for the running value
    for s in 1..breakpoints.len() {
        units += deltas[s - 1];
        slope_units.push(units);
        let step = units as f64 / n as f64 * (breakpoints[s] - breakpoints[s - 1]);
        let t = value + step;
        comp += if value.abs() >= step.abs() { (value - t) + step } else { (step - t) + value };
        value = t;
        values.push((value + comp).max(0.0));
    }

    Ok(CostProfile1D { breakpoints, values, slope_units, n })
}

/// Result of a `costhat` minimization.
#[derive(Debug, Clone)]
pub struct MinCosthat {
    pub value: f64,
    /// A witness attaining (1D, exact) or approximating (2D, grid) the
    /// minimum.
    pub location: Location,
    /// True when the value is the exact minimum; false for grid scans,
    /// whose value is only an upper bound on the true minimum.
    pub exact: bool,
}

/// Minimum of `costhat`: exact over the breakpoint span in 1D, grid
/// approximate over the bounding box in 2D (`grid` is the per-axis
/// resolution; ignored in 1D).
pub fn min_costhat(pset: &UncertainPointSet, grid: usize) -> Result<MinCosthat> {
    match pset.dim() {
        1 => {
            let profile = build_profile_1d(pset)?;
            let (x, v) = profile.min();
            Ok(MinCosthat { value: v, location: Location::scalar(x), exact: true })
        }
        2 => min_costhat_grid_2d(pset, grid),
        d => Err(Error::InvalidInput(format!("min_costhat supports d in {{1,2}}, got {}", d))),
    }
}

/// Grid scan over the bounding box of `P_all`. Diagnostic only: certified
/// bounds come from `support2d::rho_lower_bound` and
/// `support2d::rho_grid_certified`.
pub fn min_costhat_grid_2d(pset: &UncertainPointSet, grid: usize) -> Result<MinCosthat> {
    pset.require_dim(2)?;
    if grid < 2 {
        return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
    }
    let (lo, hi) = bounding_box(pset);
    let scan = grid_scan_min(pset, lo, hi, grid);
    Ok(MinCosthat { value: scan.0, location: Location::xy(scan.1, scan.2), exact: false })
}

pub(crate) fn bounding_box(pset: &UncertainPointSet) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for (_, _, l) in pset.all_locations() {
        for a in 0..2 {
            lo[a] = lo[a].min(l.coords()[a]);
            hi[a] = hi[a].max(l.coords()[a]);
        }
    }
    (lo, hi)
}

/// Minimum of `costhat` over an inclusive `grid x grid` lattice of the box
/// `[lo, hi]`; returns `(value, x, y)`. Grid nodes include the box edges.
pub(crate) fn grid_scan_min(
    pset: &UncertainPointSet,
    lo: [f64; 2],
    hi: [f64; 2],
    grid: usize,
) -> (f64, f64, f64) {
    use rayon::prelude::*;
    let n = pset.n_points() as f64;
    let dx = if grid > 1 { (hi[0] - lo[0]) / (grid - 1) as f64 } else { 0.0 };
    let dy = if grid > 1 { (hi[1] - lo[1]) / (grid - 1) as f64 } else { 0.0 };
    // Flatten locations per uncertain point for a tight inner loop.
    let pts: Vec<Vec<(f64, f64)>> = pset
        .points()
        .iter()
        .map(|p| p.locations.iter().map(|l| (l.x(), l.y())).collect())
        .collect();
    (0..grid)
        .into_par_iter()
        .map(|iy| {
            let y = lo[1] + dy * iy as f64;
            let mut row_best = (f64::INFINITY, 0.0, 0.0);
            for ix in 0..grid {
                let x = lo[0] + dx * ix as f64;
                let mut total = 0.0;
                for locs in &pts {
                    let mut nearest = f64::INFINITY;
                    for &(px, py) in locs {
                        let d2 = (px - x) * (px - x) + (py - y) * (py - y);
                        if d2 < nearest {
                            nearest = d2;
                        }
                    }
                    total += nearest.sqrt();
                }
                let v = total / n;
                if v < row_best.0 {
                    row_best = (v, x, y);
                }
            }
            row_best
        })
        .reduce(
            || (f64::INFINITY, 0.0, 0.0),
            |a, b| if a.0 <= b.0 { a } else { b },
        )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{cost, rng_from_seed, sample_traversal};
    use rand::Rng;

    fn inst_1d(values: &[Vec<f64>]) -> UncertainPointSet {
        UncertainPointSet::from_values_1d(values).unwrap()
    }

    #[test]
    fn eval_zero_at_shared_location() {
        let pset = inst_1d(&[vec![4.0, 4.0], vec![4.0, 4.0]]);
        assert_eq!(costhat_eval(&Location::scalar(4.0), &pset).unwrap(), 0.0);
    }

    #[test]
    fn eval_takes_nearest_candidate() {
        // n=1, k=2, {0, 10}, x=4: min(4, 6) = 4
        let pset = inst_1d(&[vec![0.0, 10.0]]);
        assert_eq!(costhat_eval(&Location::scalar(4.0), &pset).unwrap(), 4.0);
    }

    #[test]
    fn eval_lower_bounds_cost_of_any_traversal() {
        let mut rng = rng_from_seed(11);
        for _ in 0..30 {
            let n = rng.gen_range(1..6);
            let k = rng.gen_range(1..4);
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            let pset = inst_1d(&vals);
            let t = sample_traversal(&pset, &mut rng);
            let q = pset.realize(&t).unwrap();
            let x = Location::scalar(rng.gen_range(-6.0..6.0));
            let ch = costhat_eval(&x, &pset).unwrap();
            let c = cost(&x, &q).unwrap();
            assert!(ch <= c + 1e-12, "costhat {} above cost {}", ch, c);
        }
    }

    #[test]
    fn profile_single_location_is_v_shape() {
        let pset = inst_1d(&[vec![5.0]]);
        let profile = build_profile_1d(&pset).unwrap();
        assert_eq!(profile.breakpoints(), &[5.0]);
        assert_eq!(profile.values(), &[0.0]);
        assert_eq!(profile.eval(3.0), 2.0);
        assert_eq!(profile.eval(9.0), 4.0);
    }

    #[test]
    fn profile_lower_envelope_switch_at_midpoint() {
        let pset = inst_1d(&[vec![0.0, 10.0]]);
        let profile = build_profile_1d(&pset).unwrap();
        assert_eq!(profile.breakpoints(), &[0.0, 5.0, 10.0]);
        assert_eq!(profile.values(), &[0.0, 5.0, 0.0]);
    }

    #[test]
    fn profile_matches_direct_eval() {
        let pset = inst_1d(&[vec![0.0, 10.0], vec![2.0, 8.0]]);
        let profile = build_profile_1d(&pset).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..100 {
            let x = rng.gen_range(-2.0..12.0);
            let direct = costhat_eval(&Location::scalar(x), &pset).unwrap();
            assert!((profile.eval(x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn profile_matches_direct_eval_random_instances() {
        let mut rng = rng_from_seed(17);
        for _ in 0..10 {
            let n = rng.gen_range(1..8);
            let k = rng.gen_range(1..5);
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(-100.0..100.0)).collect())
                .collect();
            let pset = inst_1d(&vals);
            let profile = build_profile_1d(&pset).unwrap();
            assert!(profile.breakpoints().len() <= n * (2 * k - 1));
            for &u in profile.slope_units() {
                assert!(u.unsigned_abs() as usize <= n);
            }
            for _ in 0..1000 {
                let x = rng.gen_range(-120.0..120.0);
                let direct = costhat_eval(&Location::scalar(x), &pset).unwrap();
                assert!(
                    (profile.eval(x) - direct).abs() < 1e-10,
                    "profile {} vs direct {} at {}",
                    profile.eval(x),
                    direct,
                    x
                );
            }
        }
    }

    #[test]
    fn profile_with_duplicate_locations() {
        // Duplicates within a point coalesce; costhat is still correct.
        let pset = inst_1d(&[vec![1.0, 1.0, 3.0]]);
        let profile = build_profile_1d(&pset).unwrap();
        assert_eq!(profile.breakpoints(), &[1.0, 2.0, 3.0]);
        assert_eq!(profile.eval(1.5), 0.5);
    }

    #[test]
    fn min_single_point_is_zero() {
        let pset = inst_1d(&[vec![7.0, 9.0]]);
        let m = min_costhat(&pset, 0).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(m.exact);
    }

    #[test]
    fn min_two_deterministic_points() {
        // (|x| + |10 - x|) / 2 has minimum 5 on [0, 10].
        let pset = inst_1d(&[vec![0.0], vec![10.0]]);
        let m = min_costhat(&pset, 0).unwrap();
        assert_eq!(m.value, 5.0);
    }

    #[test]
    fn grid_min_2d_upper_bounds_any_value() {
        let pset = UncertainPointSet::new(vec![
            crate::model::UncertainPoint { locations: vec![Location::xy(0.0, 0.0)] },
            crate::model::UncertainPoint { locations: vec![Location::xy(10.0, 0.0)] },
        ])
        .unwrap();
        let m = min_costhat(&pset, 64).unwrap();
        assert!(!m.exact);
        // True minimum is 5.0 along the segment; the grid hits it since the
        // segment is axis-aligned.
        assert!((m.value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn costhat_is_lipschitz() {
        let mut rng = rng_from_seed(23);
        for _ in 0..50 {
            let n = rng.gen_range(1..6);
            let k = rng.gen_range(1..4);
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .collect();
            let pset = inst_1d(&vals);
            let x = rng.gen_range(-8.0..8.0);
            let y = rng.gen_range(-8.0..8.0);
            let cx = costhat_eval(&Location::scalar(x), &pset).unwrap();
            let cy = costhat_eval(&Location::scalar(y), &pset).unwrap();
            assert!((cx - cy).abs() <= (x - y).abs() + 1e-12);
        }
    }
}
