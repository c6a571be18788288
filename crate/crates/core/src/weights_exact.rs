//! Exact median-distribution weights in 1D.
//!
//! For a candidate location `c`, every other uncertain point contributes a
//! factor `(l x + r)` where `l` counts its locations strictly below `c` in
//! LexKey order and `r = k - l` counts the rest. The number of traversals
//! whose median is `c` is then the coefficient of `x^(n-1)/2` (odd `n`; for
//! even `n`, `x^(n/2 - 1)`) of the product polynomial: each monomial choice
//! of `l`-terms picks which points land strictly below the candidate.
//!
//! Visiting candidates in increasing LexKey order, at most one factor
//! changes between consecutive candidates, so after one full `O(n^2)`
//! expansion each candidate costs `O(n)`: divide one linear factor out,
//! multiply the replacement in. All coefficients are exact big integers —
//! incremental division in floating point would accumulate unbounded
//! relative error over the `nk` updates, and exactness is what lets the
//! enumeration oracle assert equality instead of closeness.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{median_rank, LexKey, MedianDistribution, UncertainPointSet};
use crate::support1d::SupportSet;

/// Coefficients of the working polynomial `prod (l_i x + r_i)`, lowest
/// degree first; length is always (number of factors) + 1, so the top
/// coefficient may be zero when some `l` vanishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffVector {
    coeffs: Vec<BigUint>,
}

impl CoeffVector {
    /// The empty product.
    pub fn unit() -> Self {
        CoeffVector { coeffs: vec![BigUint::one()] }
    }

    pub fn from_factors(factors: &[(u64, u64)]) -> Self {
        let mut c = CoeffVector::unit();
        for &(l, r) in factors {
            c = c.multiply_factor(l, r);
        }
        c
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: usize) -> BigUint {
        self.coeffs.get(idx).cloned().unwrap_or_else(BigUint::zero)
    }

    pub fn factor_count(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Multiply by `(l x + r)`.
    pub fn multiply_factor(&self, l: u64, r: u64) -> CoeffVector {
        let mut out = vec![BigUint::zero(); self.coeffs.len() + 1];
        for (t, c) in self.coeffs.iter().enumerate() {
            if r != 0 {
                out[t] += c * r;
            }
            if l != 0 {
                out[t + 1] += c * l;
            }
        }
        CoeffVector { coeffs: out }
    }

    /// Exact division by `(l x + r)`. The factor must divide the
    /// polynomial; a nonzero remainder signals a tie-handling bug upstream
    /// and is reported as an internal error.
    pub fn remove_factor(&self, l: u64, r: u64) -> Result<CoeffVector> {
        if l == 0 && r == 0 {
            return Err(Error::InvalidParameter("cannot remove the zero factor".into()));
        }
        if self.coeffs.len() < 2 {
            return Err(Error::Internal("no factor left to remove".into()));
        }
        let p = &self.coeffs;
        let deg = p.len() - 1;
        if l == 0 {
            // p = r * q with deg q = deg - 1; top coefficient must vanish.
            if !p[deg].is_zero() {
                return Err(Error::Internal("constant-factor removal with nonzero top coefficient".into()));
            }
            let mut q = Vec::with_capacity(deg);
            for c in &p[..deg] {
                if !(c % r).is_zero() {
                    return Err(Error::Internal("non-exact polynomial division".into()));
                }
                q.push(c / r);
            }
            return Ok(CoeffVector { coeffs: q });
        }
        // Synthetic division from the top: p[t] = l*q[t-1] + r*q[t].
        let mut q = vec![BigUint::zero(); deg];
        if !(&p[deg] % l).is_zero() {
            return Err(Error::Internal("non-exact polynomial division".into()));
        }
        q[deg - 1] = &p[deg] / l;
        for t in (1..deg).rev() {
            let sub = &q[t] * r;
            if p[t] < sub || !((&p[t] - &sub) % l).is_zero() {
                return Err(Error::Internal("non-exact polynomial division".into()));
            }
            q[t - 1] = (&p[t] - sub) / l;
        }
        if p[0] != &q[0] * r {
            return Err(Error::Internal("non-exact polynomial division (remainder)".into()));
        }
        Ok(CoeffVector { coeffs: q })
    }
}

/// Exact per-location weights: `counts[(i,j)]` traversals out of `k^n` have
/// `p_{i,j}` as their LexKey median.
#[derive(Debug, Clone)]
pub struct PointWeights {
    counts: Vec<BigUint>,
    n: usize,
    k: usize,
}

impl PointWeights {
    /// Assemble from raw traversal counts (layout `i * k + j`); the counts
    /// must sum to `k^n`.
    pub fn from_counts(counts: Vec<BigUint>, n: usize, k: usize) -> Result<Self> {
        if counts.len() != n * k {
            return Err(Error::InvalidInput(format!(
                "expected {} counts, got {}",
                n * k,
                counts.len()
            )));
        }
        let w = PointWeights { counts, n, k };
        if w.total() != w.denominator() {
            return Err(Error::Internal(format!(
                "counts sum to {} instead of k^n = {}",
                w.total(),
                w.denominator()
            )));
        }
        Ok(w)
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn k_locations(&self) -> usize {
        self.k
    }

    pub fn count(&self, i: usize, j: usize) -> &BigUint {
        &self.counts[i * self.k + j]
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// `k^n`, the common denominator.
    pub fn denominator(&self) -> BigUint {
        BigUint::from(self.k).pow(self.n as u32)
    }

    pub fn weight(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.count(i, j).clone().into(), self.denominator().into())
    }

    pub fn weight_f64(&self, i: usize, j: usize) -> f64 {
        self.weight(i, j).to_f64().unwrap_or(0.0)
    }

    /// Total traversal count; equals `k^n` by construction.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Masses aggregated per distinct coordinate value, ascending.
    pub fn value_masses(&self, pset: &UncertainPointSet) -> Vec<(f64, BigRational)> {
        let mut pairs: Vec<(f64, BigUint)> = Vec::new();
        for (i, j, loc) in pset.all_locations() {
            pairs.push((loc.value(), self.count(i, j).clone()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let denom: num_bigint::BigInt = self.denominator().into();
        let mut out: Vec<(f64, BigRational)> = Vec::new();
        for (v, c) in pairs {
            match out.last_mut() {
                Some((lv, lw)) if *lv == v => {
                    *lw += BigRational::new(c.into(), denom.clone());
                }
                _ => out.push((v, BigRational::new(c.into(), denom.clone()))),
            }
        }
        out
    }

    /// The full distribution over `P_all` (zero-weight locations included),
    /// entries in LexKey order.
    pub fn full_distribution(&self, pset: &UncertainPointSet) -> Result<MedianDistribution> {
        let mut keyed: Vec<(LexKey, usize, usize)> = pset
            .all_locations()
            .map(|(i, j, l)| (LexKey { value: l.value(), point: i, loc: j }, i, j))
            .collect();
        keyed.sort_by_key(|e| e.0);
        let denom: num_bigint::BigInt = self.denominator().into();
        let entries = keyed
            .into_iter()
            .map(|(key, i, j)| {
                (
                    crate::model::Location::scalar(key.value),
                    BigRational::new(self.count(i, j).clone().into(), denom.clone()),
                )
            })
            .collect();
        MedianDistribution::exact(entries)
    }
}

/// Per-point sorted LexKeys, shared by the counting routines.
struct SortedPoints {
    per_point: Vec<Vec<LexKey>>,
    k: usize,
}

impl SortedPoints {
    fn new(pset: &UncertainPointSet) -> Result<Self> {
        pset.require_dim(1)?;
        let mut per_point: Vec<Vec<LexKey>> = vec![Vec::new(); pset.n_points()];
        for (i, j, l) in pset.all_locations() {
            per_point[i].push(LexKey { value: l.value(), point: i, loc: j });
        }
        for keys in &mut per_point {
            keys.sort();
        }
        Ok(SortedPoints { per_point, k: pset.k_locations() })
    }

    /// Locations of point `m` strictly below `c` in LexKey order.
    fn below(&self, m: usize, c: &LexKey) -> u64 {
        self.per_point[m].partition_point(|q| q < c) as u64
    }

    fn factor(&self, m: usize, c: &LexKey) -> (u64, u64) {
        let l = self.below(m, c);
        (l, self.k as u64 - l)
    }
}

/// Factors `(l, r)` of every uncertain point other than the candidate's
/// own, in point order. Always satisfies `l + r = k`.
pub fn factor_counts(pset: &UncertainPointSet, candidate: &LexKey) -> Result<Vec<(u64, u64)>> {
    let sorted = SortedPoints::new(pset)?;
    Ok((0..pset.n_points())
        .filter(|&m| m != candidate.point)
        .map(|m| sorted.factor(m, candidate))
        .collect())
}

/// Exact weights for every location of a 1D instance in `O(n^2 k)`: one
/// full expansion for the smallest candidate, then one factor swap per
/// LexKey-consecutive candidate.
pub fn point_weights_1d(pset: &UncertainPointSet) -> Result<PointWeights> {
    let sorted = SortedPoints::new(pset)?;
    let n = pset.n_points();
    let k = pset.k_locations();
    let mut keys = pset.lex_keys_1d()?;
    keys.sort();
    let rank_idx = median_rank(n);

    let mut counts = vec![BigUint::zero(); n * k];
    let first = keys[0];
    let mut factors: Vec<Option<(u64, u64)>> = (0..n)
        .map(|m| if m == first.point { None } else { Some(sorted.factor(m, &first)) })
        .collect();
    let mut poly = CoeffVector::from_factors(
        &factors.iter().filter_map(|f| *f).collect::<Vec<_>>(),
    );
    counts[first.point * k + first.loc] = poly.coeff(rank_idx);

    let mut prev = first;
    for &c in &keys[1..] {
        let a = prev.point;
        let b = c.point;
        if b != a {
            // Between LexKey-consecutive candidates only these two factors
            // can change: the old candidate's point enters the product, the
            // new candidate's point leaves it.
            let fb = factors[b].take().expect("factor present for non-candidate point");
            poly = poly.remove_factor(fb.0, fb.1)?;
            let fa = sorted.factor(a, &c);
            factors[a] = Some(fa);
            poly = poly.multiply_factor(fa.0, fa.1);
        }
        counts[c.point * k + c.loc] = poly.coeff(rank_idx);
        prev = c;
    }

    Ok(PointWeights { counts, n, k })
}

/// Reference implementation: a fresh full expansion per candidate,
/// `O(n^3 k)` total, embarrassingly parallel. Exists to cross-check the
/// incremental factor swaps.
pub fn point_weights_1d_full_dp(pset: &UncertainPointSet) -> Result<PointWeights> {
    use rayon::prelude::*;
    let sorted = SortedPoints::new(pset)?;
    let n = pset.n_points();
    let k = pset.k_locations();
    let keys = pset.lex_keys_1d()?;
    let rank_idx = median_rank(n);
    let counts: Vec<BigUint> = keys
        .par_iter()
        .map(|c| {
            let factors: Vec<(u64, u64)> = (0..n)
                .filter(|&m| m != c.point)
                .map(|m| sorted.factor(m, c))
                .collect();
            CoeffVector::from_factors(&factors).coeff(rank_idx)
        })
        .collect();
    // keys iterates in (i, j) order, matching the counts layout.
    Ok(PointWeights { counts, n, k })
}

/// Map a candidate location onto its support representative: the greedy
/// predecessor `x = max{z in T | z <= p}` unless the successor `y` both
/// covers `p` and is strictly closer. Returns an index into `t`; the
/// returned point always covers `p` when `t` was built on the same
/// instance.
pub fn assign_to_support_1d(p: f64, t: &SupportSet) -> usize {
    let vals = t.values_1d();
    debug_assert!(!vals.is_empty());
    let after = vals.partition_point(|&v| v <= p);
    if after == 0 {
        // p below the smallest support point: cannot happen for supports
        // built on the same instance (min of P_all is in T).
        debug_assert!(false, "candidate below the support minimum");
        return 0;
    }
    let x_idx = after - 1;
    if after < vals.len() {
        let y = vals[after];
        let covered = (y - p).abs() <= t.points[after].radius;
        let closer = (y - p).abs() < (p - vals[x_idx]).abs();
        if covered && closer {
            return after;
        }
    }
    x_idx
}

/// Push the per-location weights onto the support: exact rational masses,
/// summing to one. The support must have been built for this instance; a
/// support that fails to cover some candidate is rejected.
pub fn aggregate_weights(
    pset: &UncertainPointSet,
    weights: &PointWeights,
    t: &SupportSet,
) -> Result<MedianDistribution> {
    pset.require_dim(1)?;
    if t.is_empty() {
        return Err(Error::InvalidInput("empty support".into()));
    }
    let min_candidate = pset
        .all_locations()
        .map(|(_, _, l)| l.value())
        .fold(f64::INFINITY, f64::min);
    if t.points[0].location.value() > min_candidate {
        return Err(Error::InvalidInput(
            "support does not reach the smallest candidate location; \
             it was not built for this instance"
                .into(),
        ));
    }
    let k = pset.k_locations();
    let mut bins = vec![BigUint::zero(); t.len()];
    for (i, j, loc) in pset.all_locations() {
        let idx = assign_to_support_1d(loc.value(), t);
        let z = &t.points[idx];
        if (loc.value() - z.location.value()).abs() > z.radius + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "support does not cover candidate location {} (nearest assigned point {} at \
                 radius {}); it was not built for this instance or epsilon",
                loc.value(),
                z.location.value(),
                z.radius
            )));
        }
        bins[idx] += &weights.counts()[i * k + j];
    }
    let denom: num_bigint::BigInt = weights.denominator().into();
    let entries = t
        .points
        .iter()
        .zip(bins)
        .map(|(sp, b)| (sp.location.clone(), BigRational::new(b.into(), denom.clone())))
        .collect();
    MedianDistribution::exact(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::nonrobust_example_instance;
    use crate::model::rng_from_seed;
    use crate::support1d::build_support_1d;
    use num_traits::Zero;
    use rand::Rng;

    fn inst(values: &[Vec<f64>]) -> UncertainPointSet {
        UncertainPointSet::from_values_1d(values).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn single_point_uniform_weights() {
        let pset = inst(&[vec![4.0, -1.0, 9.0]]);
        let w = point_weights_1d(&pset).unwrap();
        for j in 0..3 {
            assert_eq!(*w.count(0, j), big(1));
        }
        assert_eq!(w.total(), big(3));
    }

    #[test]
    fn tie_example_half_half() {
        // P1 = {0,0}, P2 = {0,D}, P3 = {D,D}: all mass sits on P2's two
        // locations, half on each value.
        let pset = nonrobust_example_instance(7.0).unwrap();
        let w = point_weights_1d(&pset).unwrap();
        assert_eq!(*w.count(0, 0), big(0));
        assert_eq!(*w.count(0, 1), big(0));
        assert_eq!(*w.count(1, 0), big(4));
        assert_eq!(*w.count(1, 1), big(4));
        assert_eq!(*w.count(2, 0), big(0));
        assert_eq!(*w.count(2, 1), big(0));
        let masses = w.value_masses(&pset);
        assert_eq!(masses.len(), 2);
        assert_eq!(masses[0].0, 0.0);
        assert_eq!(masses[0].1, BigRational::new(1.into(), 2.into()));
        assert_eq!(masses[1].0, 7.0);
        assert_eq!(masses[1].1, BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn factor_counts_at_global_minimum() {
        let pset = inst(&[vec![5.0, 6.0], vec![7.0, 8.0], vec![9.0, 10.0]]);
        let c = LexKey { value: 5.0, point: 0, loc: 0 };
        let f = factor_counts(&pset, &c).unwrap();
        assert_eq!(f, vec![(0, 2), (0, 2)]);
    }

    #[test]
    fn factor_counts_tie_example() {
        // Candidate p_{2,1} (0-based (1,0)) of the instability example:
        // both P1 locations are LexKey-below it, both P3 locations above.
        let pset = nonrobust_example_instance(7.0).unwrap();
        let c = LexKey { value: 0.0, point: 1, loc: 0 };
        let f = factor_counts(&pset, &c).unwrap();
        assert_eq!(f, vec![(2, 0), (0, 2)]);
        // (2x + 0)(0x + 2) = 4x: coefficient of x^1 is 4 -> weight 4/8.
        let poly = CoeffVector::from_factors(&f);
        assert_eq!(poly.coeff(1), big(4));
    }

    #[test]
    fn factor_counts_sum_identity() {
        let mut rng = rng_from_seed(5);
        let vals: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let pset = inst(&vals);
        let keys = pset.lex_keys_1d().unwrap();
        for c in &keys {
            let f = factor_counts(&pset, c).unwrap();
            let total: u64 = f.iter().map(|(l, r)| l + r).sum();
            assert_eq!(total, 3 * 3);
        }
    }

    #[test]
    fn coeff_sum_is_k_power() {
        let pset = inst(&[vec![0.0, 1.0, 2.0], vec![0.5, 1.5, 2.5], vec![3.0, 4.0, 5.0]]);
        let c = LexKey { value: 0.0, point: 0, loc: 0 };
        let f = factor_counts(&pset, &c).unwrap();
        let poly = CoeffVector::from_factors(&f);
        let sum: BigUint = poly.coeffs().iter().sum();
        assert_eq!(sum, big(9)); // k^(n-1) = 3^2
    }

    #[test]
    fn remove_factor_hand_division() {
        // (2x+2)(0x+2) = 4x + 4 with padded length 3.
        let poly = CoeffVector::from_factors(&[(2, 2), (0, 2)]);
        assert_eq!(poly.coeffs(), &[big(4), big(4), big(0)]);
        let q = poly.remove_factor(0, 2).unwrap();
        assert_eq!(q.coeffs(), &[big(2), big(2)]);
    }

    #[test]
    fn remove_monomial_factor() {
        let poly = CoeffVector::from_factors(&[(1, 0), (3, 4)]);
        let q = poly.remove_factor(1, 0).unwrap();
        assert_eq!(q.coeffs(), &[big(4), big(3)]);
    }

    #[test]
    fn remove_rejects_zero_factor() {
        let poly = CoeffVector::from_factors(&[(1, 1)]);
        assert!(poly.remove_factor(0, 0).is_err());
    }

    #[test]
    fn remove_detects_non_divisor() {
        let poly = CoeffVector::from_factors(&[(1, 1), (1, 2)]);
        assert!(matches!(poly.remove_factor(1, 3), Err(Error::Internal(_))));
    }

    #[test]
    fn remove_then_multiply_roundtrip() {
        let mut rng = rng_from_seed(13);
        for _ in 0..50 {
            let m = rng.gen_range(1..6);
            let factors: Vec<(u64, u64)> = (0..m)
                .map(|_| {
                    let l = rng.gen_range(0..4);
                    let r = rng.gen_range(0..4);
                    if l == 0 && r == 0 {
                        (1, 0)
                    } else {
                        (l, r)
                    }
                })
                .collect();
            let poly = CoeffVector::from_factors(&factors);
            let pick = rng.gen_range(0..m);
            let (l, r) = factors[pick];
            let removed = poly.remove_factor(l, r).unwrap();
            assert_eq!(removed.multiply_factor(l, r), poly);
        }
    }

    #[test]
    fn incremental_matches_full_dp() {
        let mut rng = rng_from_seed(19);
        for _ in 0..20 {
            let n = rng.gen_range(1..7);
            let k = rng.gen_range(1..4);
            // Values on a coarse grid to force plenty of ties.
            let vals: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..k).map(|_| rng.gen_range(0..5) as f64).collect())
                .collect();
            let pset = inst(&vals);
            let inc = point_weights_1d(&pset).unwrap();
            let full = point_weights_1d_full_dp(&pset).unwrap();
            assert_eq!(inc.counts(), full.counts());
            assert_eq!(inc.total(), inc.denominator());
        }
    }

    #[test]
    fn translation_equivariance() {
        let vals = vec![vec![0.0, 2.0], vec![1.0, 3.0], vec![2.0, 4.0]];
        let pset = inst(&vals);
        let shifted = inst(
            &vals
                .iter()
                .map(|v| v.iter().map(|x| x + 16.0).collect())
                .collect::<Vec<_>>(),
        );
        let w = point_weights_1d(&pset).unwrap();
        let ws = point_weights_1d(&shifted).unwrap();
        assert_eq!(w.counts(), ws.counts());
    }

    #[test]
    fn permutation_invariance_at_value_level() {
        let vals = vec![vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0, 2.0]];
        let pset = inst(&vals);
        let mut perm = vals.clone();
        perm.rotate_left(1);
        let pperm = inst(&perm);
        let m1 = point_weights_1d(&pset).unwrap().value_masses(&pset);
        let m2 = point_weights_1d(&pperm).unwrap().value_masses(&pperm);
        assert_eq!(m1.len(), m2.len());
        for (a, b) in m1.iter().zip(&m2) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn assign_prefers_closer_covering_successor() {
        // T = {0, 10}: with radius(10) large enough, 7 maps to 10; with a
        // small radius it falls back to 0.
        let pset = inst(&[vec![0.0, 10.0], vec![0.0, 10.0], vec![7.0, 10.0]]);
        let t = build_support_1d(&pset, 1.0).unwrap();
        assert_eq!(t.values_1d(), vec![0.0, 7.0, 10.0]);
        // direct rule trace with a hand-built support
        use crate::support1d::{Construction, SupportPoint, SupportSet};
        let mk = |radius10: f64| SupportSet {
            points: vec![
                SupportPoint { location: crate::model::Location::scalar(0.0), costhat: 0.0, radius: 0.0 },
                SupportPoint { location: crate::model::Location::scalar(10.0), costhat: 0.0, radius: radius10 },
            ],
            epsilon: 1.0,
            construction: Construction::Greedy1d,
        };
        assert_eq!(assign_to_support_1d(7.0, &mk(4.0)), 1);
        assert_eq!(assign_to_support_1d(7.0, &mk(1.0)), 0);
        assert_eq!(assign_to_support_1d(10.0, &mk(4.0)), 1);
        assert_eq!(assign_to_support_1d(0.0, &mk(4.0)), 0);
    }

    #[test]
    fn aggregate_single_support_point() {
        let pset = inst(&[vec![2.0, 2.0], vec![2.0, 2.0], vec![2.0, 2.0]]);
        let w = point_weights_1d(&pset).unwrap();
        let t = build_support_1d(&pset, 0.3).unwrap();
        let dist = aggregate_weights(&pset, &w, &t).unwrap();
        assert_eq!(dist.len(), 1);
        assert!(dist.entries[0].exact.as_ref().unwrap().is_one());
    }

    #[test]
    fn aggregate_tie_example_small_eps() {
        let pset = nonrobust_example_instance(5.0).unwrap();
        let w = point_weights_1d(&pset).unwrap();
        let t = build_support_1d(&pset, 0.01).unwrap();
        let dist = aggregate_weights(&pset, &w, &t).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let nonzero: Vec<(f64, BigRational)> = dist
            .entries
            .iter()
            .filter(|e| !e.exact.as_ref().unwrap().is_zero())
            .map(|e| (e.location.value(), e.exact.clone().unwrap()))
            .collect();
        assert_eq!(nonzero, vec![(0.0, half.clone()), (5.0, half)]);
    }
}
