//! Brute-force ground truth: enumerate every traversal, compute each median
//! exactly (1D) or to Weiszfeld accuracy (2D), and derive exact point
//! weights, binned support masses, and coverage audits.
//!
//! This module exists only for validation at desk scale; the cap guards
//! against accidental `k^n` blowups and is checked in log space before any
//! multiplication can overflow.

use num_bigint::BigUint;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::l1median::{l1_median, DEFAULT_MAX_ITER};
use crate::model::{cost, median_of_traversal, Location, MedianDistribution, Traversal, UncertainPointSet};
use crate::support1d::SupportSet;
use crate::weights_exact::PointWeights;
use crate::weights_mc::assign_to_support;

/// Default enumeration cap.
pub const DEFAULT_CAP: u64 = 20_000;

/// `k^n` when it does not exceed `cap`, else a resource-limit error. The
/// guard runs in log space so the product itself cannot overflow first.
pub fn traversal_count_capped(n: usize, k: usize, cap: u64) -> Result<u64> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("need n >= 1 and k >= 1".into()));
    }
    let log_count = n as f64 * (k as f64).ln();
    if log_count > (cap as f64).ln() * (1.0 + 1e-12) + 1e-9 {
        return Err(Error::ResourceLimit(format!(
            "k^n = {}^{} exceeds the enumeration cap {}",
            k, n, cap
        )));
    }
    let mut count: u64 = 1;
    for _ in 0..n {
        count = count
            .checked_mul(k as u64)
            .ok_or_else(|| Error::ResourceLimit(format!("k^n = {}^{} overflows u64", k, n)))?;
        if count > cap {
            return Err(Error::ResourceLimit(format!(
                "k^n = {}^{} exceeds the enumeration cap {}",
                k, n, cap
            )));
        }
    }
    Ok(count)
}

/// Visit every traversal as a mixed-radix counter (no recursion, nothing
/// materialized). Returns the traversal count.
pub fn for_each_traversal<F>(pset: &UncertainPointSet, cap: u64, mut visit: F) -> Result<u64>
where
    F: FnMut(&Traversal) -> Result<()>,
{
    let n = pset.n_points();
    let k = pset.k_locations();
    let count = traversal_count_capped(n, k, cap)?;
    let mut t = Traversal { choice: vec![0; n] };
    loop {
        visit(&t)?;
        // increment low digit first
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(count);
            }
            t.choice[pos] += 1;
            if t.choice[pos] < k {
                break;
            }
            t.choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact per-location weights by direct counting of LexKey medians.
pub fn enumerate_point_weights(pset: &UncertainPointSet, cap: u64) -> Result<PointWeights> {
    pset.require_dim(1)?;
    let n = pset.n_points();
    let k = pset.k_locations();
    let mut counts = vec![0u64; n * k];
    for_each_traversal(pset, cap, |t| {
        let m = median_of_traversal(pset, t)?;
        counts[m.point * k + m.loc] += 1;
        Ok(())
    })?;
    PointWeights::from_counts(counts.into_iter().map(BigUint::from).collect(), n, k)
}

/// Binned masses on a support set plus any traversals whose median nothing
/// covered, using the same assignment map as the Monte-Carlo estimator.
#[derive(Debug, Clone)]
pub struct BinnedReport {
    pub distribution: MedianDistribution,
    pub missed: Vec<Traversal>,
}

/// Exact bin masses on `t` (up to `phi` in the 2D medians): every traversal
/// enumerated, every median assigned.
pub fn enumerate_binned(
    pset: &UncertainPointSet,
    t: &SupportSet,
    eps: f64,
    phi: f64,
    cap: u64,
) -> Result<BinnedReport> {
    if t.is_empty() {
        return Err(Error::InvalidInput("empty support".into()));
    }
    let mut bins = vec![0u64; t.len()];
    let mut missed = Vec::new();
    let assign_phi = if pset.dim() == 1 { 0.0 } else { phi };
    let count = for_each_traversal(pset, cap, |trav| {
        let m = if pset.dim() == 1 {
            Location::scalar(median_of_traversal(pset, trav)?.value)
        } else {
            l1_median(&pset.realize(trav)?, phi, DEFAULT_MAX_ITER)?.point
        };
        match assign_to_support(&m, t, eps, assign_phi) {
            Some(i) => bins[i] += 1,
            None => missed.push(trav.clone()),
        }
        Ok(())
    })?;

    let distribution = if missed.is_empty() {
        let denom: num_bigint::BigInt = BigUint::from(count).into();
        MedianDistribution::exact(
            t.points
                .iter()
                .zip(&bins)
                .map(|(sp, &b)| {
                    (sp.location.clone(), BigRational::new(BigUint::from(b).into(), denom.clone()))
                })
                .collect(),
        )?
    } else {
        MedianDistribution::floating(
            t.points
                .iter()
                .zip(&bins)
                .map(|(sp, &b)| (sp.location.clone(), b as f64 / count as f64))
                .collect(),
            missed.len() as f64 / count as f64,
        )?
    };
    Ok(BinnedReport { distribution, missed })
}

/// One coverage violation: a traversal whose median lies farther than
/// `eps * cost(m, Q)` from every support point.
#[derive(Debug, Clone)]
pub struct CoverageFailure {
    pub traversal: Traversal,
    pub median: Location,
    pub cost: f64,
    pub best_distance: f64,
}

/// Outcome of an exhaustive coverage audit.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub traversals: u64,
    pub failures: Vec<CoverageFailure>,
    /// Worst observed `||z - m|| / (eps * cost(m, Q))` over all traversals;
    /// at most 1 when the audit passes.
    pub max_ratio: f64,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verify the end-to-end guarantee: for every traversal `Q`, some support
/// point lies within `eps * cost(m_Q, Q)` of its median.
pub fn coverage_audit(
    pset: &UncertainPointSet,
    t: &SupportSet,
    eps: f64,
    phi: f64,
    cap: u64,
) -> Result<CoverageReport> {
    if t.is_empty() {
        return Err(Error::InvalidInput("empty support".into()));
    }
    let mut failures = Vec::new();
    let mut max_ratio = 0.0f64;
    let traversals = for_each_traversal(pset, cap, |trav| {
        let q = pset.realize(trav)?;
        let m = if pset.dim() == 1 {
            Location::scalar(median_of_traversal(pset, trav)?.value)
        } else {
            l1_median(&q, phi, DEFAULT_MAX_ITER)?.point
        };
        let c = cost(&m, &q)?;
        let best = t
            .points
            .iter()
            .map(|sp| sp.location.distance(&m))
            .fold(f64::INFINITY, f64::min);
        let bound = eps * c;
        let ratio = if bound > 0.0 {
            best / bound
        } else if best == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
        if best > bound * (1.0 + 1e-9) + 1e-300 {
            failures.push(CoverageFailure {
                traversal: trav.clone(),
                median: m,
                cost: c,
                best_distance: best,
            });
        }
        Ok(())
    })?;
    Ok(CoverageReport { traversals, failures, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::nonrobust_example_instance;
    use crate::model::rng_from_seed;
    use crate::support1d::{build_support_1d, Construction, SupportPoint};
    use crate::weights_exact::{aggregate_weights, point_weights_1d};
    use rand::Rng;

    #[test]
    fn count_guard_in_log_space() {
        assert_eq!(traversal_count_capped(3, 2, 20_000).unwrap(), 8);
        assert!(traversal_count_capped(100, 10, 20_000).is_err());
        assert_eq!(traversal_count_capped(5, 1, 20_000).unwrap(), 1);
    }

    #[test]
    fn simplest_split() {
        let pset = UncertainPointSet::from_values_1d(&[vec![0.0, 1.0]]).unwrap();
        let w = enumerate_point_weights(&pset, DEFAULT_CAP).unwrap();
        assert_eq!(*w.count(0, 0), BigUint::from(1u32));
        assert_eq!(*w.count(0, 1), BigUint::from(1u32));
    }

    #[test]
    fn tie_example_masses() {
        let pset = nonrobust_example_instance(2.0).unwrap();
        let w = enumerate_point_weights(&pset, DEFAULT_CAP).unwrap();
        let masses = w.value_masses(&pset);
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(masses, vec![(0.0, half.clone()), (2.0, half)]);
    }

    #[test]
    fn dp_matches_enumeration_random() {
        let mut rng = rng_from_seed(43);
        for _ in 0..10 {
            let n = rng.gen_range(1..6);
            let k = rng.gen_range(1..4);
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(0..6) as f64).collect())
                .collect();
            let pset = UncertainPointSet::from_values_1d(&vals).unwrap();
            let dp = point_weights_1d(&pset).unwrap();
            let oracle = enumerate_point_weights(&pset, DEFAULT_CAP).unwrap();
            assert_eq!(dp.counts(), oracle.counts());
        }
    }

    #[test]
    fn binned_point_mass_for_k1() {
        let pset = UncertainPointSet::from_values_1d(&[vec![1.0], vec![3.0], vec![9.0]]).unwrap();
        let t = build_support_1d(&pset, 0.2).unwrap();
        let report = enumerate_binned(&pset, &t, 0.2, 0.0, DEFAULT_CAP).unwrap();
        assert!(report.missed.is_empty());
        let nonzero: Vec<f64> = report
            .distribution
            .entries
            .iter()
            .filter(|e| e.weight > 0.0)
            .map(|e| e.location.value())
            .collect();
        assert_eq!(nonzero, vec![3.0]);
    }

    #[test]
    fn binned_equals_aggregate_in_1d() {
        let mut rng = rng_from_seed(47);
        for _ in 0..10 {
            let n = rng.gen_range(1..6);
            let k = rng.gen_range(1..4);
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(-4.0..4.0)).collect())
                .collect();
            let pset = UncertainPointSet::from_values_1d(&vals).unwrap();
            let eps = 0.2;
            let t = build_support_1d(&pset, eps).unwrap();
            let w = point_weights_1d(&pset).unwrap();
            let agg = aggregate_weights(&pset, &w, &t).unwrap();
            let binned = enumerate_binned(&pset, &t, eps, 0.0, DEFAULT_CAP).unwrap();
            assert!(binned.missed.is_empty());
            for (a, b) in agg.entries.iter().zip(&binned.distribution.entries) {
                assert_eq!(a.exact, b.exact, "bin mismatch at {:?}", a.location);
            }
        }
    }

    #[test]
    fn audit_trivially_passes_when_support_is_everything() {
        let mut rng = rng_from_seed(51);
        let vals: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect())
            .collect();
        let pset = UncertainPointSet::from_values_1d(&vals).unwrap();
        // T = P_all with zero radii: every median is one of the points.
        let t = SupportSet {
            points: pset
                .all_locations()
                .map(|(_, _, l)| SupportPoint { location: l.clone(), costhat: 0.0, radius: 0.0 })
                .collect(),
            epsilon: 0.1,
            construction: Construction::Greedy1d,
        };
        let report = coverage_audit(&pset, &t, 0.1, 0.0, DEFAULT_CAP).unwrap();
        assert!(report.passed());
        assert_eq!(report.max_ratio, 0.0);
    }

    #[test]
    fn audit_flags_planted_violation() {
        let pset = UncertainPointSet::from_values_1d(&[vec![0.0], vec![100.0]]).unwrap();
        // A support far away from the only median (0 under the lower-middle
        // rule) fails the audit.
        let t = SupportSet {
            points: vec![SupportPoint {
                location: Location::scalar(100.0),
                costhat: 50.0,
                radius: 1.0,
            }],
            epsilon: 0.1,
            construction: Construction::Greedy1d,
        };
        let report = coverage_audit(&pset, &t, 0.1, 0.0, DEFAULT_CAP).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert!(!report.passed());
    }

    #[test]
    fn greedy_support_passes_audit() {
        let mut rng = rng_from_seed(59);
        for _ in 0..10 {
            let n = rng.gen_range(1..6);
            let k = rng.gen_range(1..4);
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(-4.0..4.0)).collect())
                .collect();
            let pset = UncertainPointSet::from_values_1d(&vals).unwrap();
            for &eps in &[0.05, 0.3] {
                let t = build_support_1d(&pset, eps).unwrap();
                let report = coverage_audit(&pset, &t, eps, 0.0, DEFAULT_CAP).unwrap();
                assert!(report.passed(), "audit failed at eps {}", eps);
                assert!(report.max_ratio <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn enumeration_cap_enforced() {
        let vals: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, i as f64 + 0.5]).collect();
        let pset = UncertainPointSet::from_values_1d(&vals).unwrap();
        assert!(matches!(
            enumerate_point_weights(&pset, DEFAULT_CAP),
            Err(Error::ResourceLimit(_))
        ));
    }
}
