//! Domain types for uncertain point sets, traversals and median
//! distributions, plus the exact cost and 1D-median primitives everything
//! else consumes.
//!
//! Conventions used throughout the crate:
//!
//! * An uncertain point set holds `n` points, each with exactly `k`
//!   candidate locations in `d` dimensions, every candidate equally likely.
//! * A traversal picks one candidate per point (`k^n` traversals total).
//! * The 1D median of an even-sized set is the **lower** middle element,
//!   not the average of the two middles. Many libraries average; we do not.
//! * Ties between equal coordinate values are broken by [`LexKey`]
//!   `(value, point index, location index)`, so every traversal has a
//!   unique median element even when values coincide.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A point in `R^d`. Coordinates are always finite; `-0.0` is canonicalized
/// to `0.0` at construction so that bitwise comparisons behave like numeric
/// ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    coords: Vec<f64>,
}

impl Location {
    pub fn new(coords: Vec<f64>) -> Self {
        // +0.0 forces -0.0 to +0.0 and leaves everything else untouched.
        Location {
            coords: coords.into_iter().map(|c| c + 0.0).collect(),
        }
    }

    pub fn scalar(x: f64) -> Self {
        Location::new(vec![x])
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Location::new(vec![x, y])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The single coordinate of a 1D location.
    pub fn value(&self) -> f64 {
        debug_assert_eq!(self.coords.len(), 1);
        self.coords[0]
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn distance(&self, other: &Location) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Lexicographic comparison on coordinates (total: coordinates are
    /// finite and canonicalized).
    pub fn lex_cmp(&self, other: &Location) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

/// One uncertain point: `k` equally likely candidate locations.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainPoint {
    pub locations: Vec<Location>,
}

/// A set of `n` uncertain points with uniform `k` and dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainPointSet {
    points: Vec<UncertainPoint>,
    dim: usize,
    k: usize,
}

impl UncertainPointSet {
    pub fn new(points: Vec<UncertainPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("need at least one uncertain point".into()));
        }
        let k = points[0].locations.len();
        if k == 0 {
            return Err(Error::InvalidInput("need at least one location per point".into()));
        }
        let dim = points[0].locations[0].dim();
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.locations.len() != k {
                return Err(Error::InvalidInput(format!(
                    "point {} has {} locations, expected k={}",
                    i,
                    p.locations.len(),
                    k
                )));
            }
            for (j, loc) in p.locations.iter().enumerate() {
                if loc.dim() != dim {
                    return Err(Error::InvalidInput(format!(
                        "location ({},{}) has dimension {}, expected {}",
                        i,
                        j,
                        loc.dim(),
                        dim
                    )));
                }
                if !loc.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "location ({},{}) has non-finite coordinates",
                        i, j
                    )));
                }
            }
        }
        Ok(UncertainPointSet { points, dim, k })
    }

    /// Convenience constructor for 1D instances from raw values.
    pub fn from_values_1d(values: &[Vec<f64>]) -> Result<Self> {
        let points = values
            .iter()
            .map(|vs| UncertainPoint {
                locations: vs.iter().map(|&v| Location::scalar(v)).collect(),
            })
            .collect();
        UncertainPointSet::new(points)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn k_locations(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[UncertainPoint] {
        &self.points
    }

    pub fn location(&self, i: usize, j: usize) -> &Location {
        &self.points[i].locations[j]
    }

    /// Iterate over every location of `P_all` with its `(i, j)` identity.
    pub fn all_locations(&self) -> impl Iterator<Item = (usize, usize, &Location)> {
        self.points
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.locations.iter().enumerate().map(move |(j, l)| (i, j, l)))
    }

    /// All `n*k` elements of a 1D instance as lexicographic keys.
    pub fn lex_keys_1d(&self) -> Result<Vec<LexKey>> {
        self.require_dim(1)?;
        Ok(self
            .all_locations()
            .map(|(i, j, l)| LexKey { value: l.value(), point: i, loc: j })
            .collect())
    }

    pub fn require_dim(&self, d: usize) -> Result<()> {
        if self.dim != d {
            return Err(Error::InvalidInput(format!(
                "operation requires dimension {}, instance has dimension {}",
                d, self.dim
            )));
        }
        Ok(())
    }

    /// Materialize the locations a traversal picks.
    pub fn realize(&self, t: &Traversal) -> Result<Vec<Location>> {
        if t.choice.len() != self.n_points() {
            return Err(Error::InvalidInput(format!(
                "traversal length {} != n {}",
                t.choice.len(),
                self.n_points()
            )));
        }
        t.choice
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                if j >= self.k {
                    Err(Error::InvalidInput(format!("traversal choice {} out of range", j)))
                } else {
                    Ok(self.points[i].locations[j].clone())
                }
            })
            .collect()
    }
}

/// One realization of an uncertain point set: a chosen location index per
/// point (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traversal {
    pub choice: Vec<usize>,
}

/// Strict total order over 1D elements of `P_all`: value first, then point
/// index, then location index. Distinct for every element even when values
/// coincide, which makes "the median of a traversal" unique.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexKey {
    pub value: f64,
    pub point: usize,
    pub loc: usize,
}

impl Eq for LexKey {}

impl PartialOrd for LexKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LexKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Values are finite and -0.0 never occurs, so total_cmp agrees with
        // numeric order.
        self.value
            .total_cmp(&other.value)
            .then(self.point.cmp(&other.point))
            .then(self.loc.cmp(&other.loc))
    }
}

/// How the weights of a distribution were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// Exact rationals with denominator `k^n`.
    ExactRational,
    /// Floating weights (Monte-Carlo counts or merged samples).
    Floating,
}

/// One support point of a median distribution.
#[derive(Debug, Clone)]
pub struct DistEntry {
    pub location: Location,
    /// Floating view of the weight; in exact mode this is the rounded value
    /// of `exact`.
    pub weight: f64,
    pub exact: Option<BigRational>,
}

/// A discrete probability distribution over median locations — the
/// principal output of the crate.
#[derive(Debug, Clone)]
pub struct MedianDistribution {
    pub entries: Vec<DistEntry>,
    pub kind: WeightKind,
    /// Monte-Carlo only: fraction of rounds whose median no support point
    /// covered. Zero in exact and sampled modes.
    pub uncovered_mass: f64,
}

impl MedianDistribution {
    pub fn exact(entries: Vec<(Location, BigRational)>) -> Result<Self> {
        let mut total = BigRational::zero();
        let mut out = Vec::with_capacity(entries.len());
        for (location, w) in entries {
            if w < BigRational::zero() {
                return Err(Error::Internal("negative exact weight".into()));
            }
            total += &w;
            out.push(DistEntry {
                location,
                weight: w.to_f64().unwrap_or(0.0),
                exact: Some(w),
            });
        }
        if !total.is_one() {
            return Err(Error::Internal(format!(
                "exact weights sum to {} instead of 1",
                total
            )));
        }
        Ok(MedianDistribution { entries: out, kind: WeightKind::ExactRational, uncovered_mass: 0.0 })
    }

    pub fn floating(entries: Vec<(Location, f64)>, uncovered_mass: f64) -> Result<Self> {
        let mut out = Vec::with_capacity(entries.len());
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (location, w) in entries {
            if !(w >= 0.0) {
                return Err(Error::Internal(format!("negative or NaN weight {}", w)));
            }
            // Neumaier-compensated accumulation.
            let t = sum + w;
            comp += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
            sum = t;
            out.push(DistEntry { location, weight: w, exact: None });
        }
        let total = sum + comp + uncovered_mass;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Internal(format!(
                "floating weights plus uncovered mass sum to {} instead of 1",
                total
            )));
        }
        Ok(MedianDistribution { entries: out, kind: WeightKind::Floating, uncovered_mass })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }
}

/// Mean Euclidean distance from `x` to the members of `q`.
pub fn cost(x: &Location, q: &[Location]) -> Result<f64> {
    if q.is_empty() {
        return Err(Error::InvalidInput("cost of empty point set".into()));
    }
    for p in q {
        if p.dim() != x.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                x.dim(),
                p.dim()
            )));
        }
    }
    Ok(q.iter().map(|p| x.distance(p)).sum::<f64>() / q.len() as f64)
}

/// Rank of the median in a sorted list of `n` elements (0-based): the
/// middle for odd `n`, the lower middle for even `n`.
pub fn median_rank(n: usize) -> usize {
    debug_assert!(n >= 1);
    if n % 2 == 1 {
        (n - 1) / 2
    } else {
        n / 2 - 1
    }
}

/// Median element of a keyed 1D set under the LexKey total order. Returns
/// the element identity, not just the value.
pub fn median_1d_keys(keys: &[LexKey]) -> Result<LexKey> {
    if keys.is_empty() {
        return Err(Error::InvalidInput("median of empty set".into()));
    }
    let mut scratch: Vec<LexKey> = keys.to_vec();
    let rank = median_rank(scratch.len());
    let (_, m, _) = scratch.select_nth_unstable(rank);
    Ok(*m)
}

/// Median of raw values; position in the slice serves as the tie-breaking
/// point index. Returns the value and the full key of the chosen element.
pub fn median_1d(values: &[f64]) -> Result<(f64, LexKey)> {
    let keys: Vec<LexKey> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| LexKey { value: v, point: i, loc: 0 })
        .collect();
    let m = median_1d_keys(&keys)?;
    Ok((m.value, m))
}

/// Median element of a traversal of a 1D instance, carrying the `(i, j)`
/// identity of the chosen location.
pub fn median_of_traversal(pset: &UncertainPointSet, t: &Traversal) -> Result<LexKey> {
    pset.require_dim(1)?;
    if t.choice.len() != pset.n_points() {
        return Err(Error::InvalidInput("traversal length mismatch".into()));
    }
    let keys: Vec<LexKey> = t
        .choice
        .iter()
        .enumerate()
        .map(|(i, &j)| LexKey { value: pset.location(i, j).value(), point: i, loc: j })
        .collect();
    median_1d_keys(&keys)
}

/// The deterministic RNG used everywhere: ChaCha8, seeded, identical output
/// on every platform. Seeds are recorded in all CLI outputs for replay.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    derive_rng(seed, 0)
}

/// Derive an independent RNG stream from `(seed, stream)`. Workers, rounds
/// and trials each get their own stream index so parallel and sequential
/// execution produce identical results.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw one traversal uniformly: each choice independent over `0..k`.
pub fn sample_traversal(pset: &UncertainPointSet, rng: &mut ChaCha8Rng) -> Traversal {
    let k = pset.k_locations();
    Traversal {
        choice: (0..pset.n_points()).map(|_| rng.gen_range(0..k)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_coincident_is_zero() {
        let x = Location::scalar(0.0);
        let q = vec![Location::scalar(0.0), Location::scalar(0.0), Location::scalar(0.0)];
        assert_eq!(cost(&x, &q).unwrap(), 0.0);
    }

    #[test]
    fn cost_symmetric_pair() {
        let x = Location::scalar(0.0);
        let q = vec![Location::scalar(-1.0), Location::scalar(1.0)];
        assert_eq!(cost(&x, &q).unwrap(), 1.0);
    }

    #[test]
    fn cost_2d_hand_arithmetic() {
        // (5 + 0) / 2 = 2.5
        let x = Location::xy(0.0, 0.0);
        let q = vec![Location::xy(3.0, 4.0), Location::xy(0.0, 0.0)];
        assert_eq!(cost(&x, &q).unwrap(), 2.5);
    }

    #[test]
    fn cost_dimension_mismatch() {
        let x = Location::scalar(0.0);
        let q = vec![Location::xy(0.0, 0.0)];
        assert!(matches!(cost(&x, &q), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn median_odd_middle() {
        assert_eq!(median_1d(&[3.0, 1.0, 2.0]).unwrap().0, 2.0);
    }

    #[test]
    fn median_even_lower_middle() {
        assert_eq!(median_1d(&[1.0, 2.0, 3.0, 4.0]).unwrap().0, 2.0);
    }

    #[test]
    fn median_ties_broken_by_index() {
        let (v, key) = median_1d(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(key.point, 1); // the tag-middle element
    }

    #[test]
    fn median_empty_errors() {
        assert!(median_1d(&[]).is_err());
    }

    #[test]
    fn median_minimizes_cost_over_members() {
        // Exhaustive check on small sets: the median element minimizes
        // cost(., Q) among elements of Q.
        let mut rng = rng_from_seed(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..8);
            let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let (m, _) = median_1d(&vals).unwrap();
            let q: Vec<Location> = vals.iter().map(|&v| Location::scalar(v)).collect();
            let median_cost = cost(&Location::scalar(m), &q).unwrap();
            for &v in &vals {
                let c = cost(&Location::scalar(v), &q).unwrap();
                assert!(median_cost <= c + 1e-12, "median not optimal: {} vs {}", median_cost, c);
            }
        }
    }

    #[test]
    fn traversal_k1_is_all_zero() {
        let pset = UncertainPointSet::from_values_1d(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let mut rng = rng_from_seed(99);
        let t = sample_traversal(&pset, &mut rng);
        assert_eq!(t.choice, vec![0, 0, 0]);
    }

    #[test]
    fn traversal_fixed_seed_reproducible() {
        let pset = UncertainPointSet::from_values_1d(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let t1 = sample_traversal(&pset, &mut rng_from_seed(42));
        let t2 = sample_traversal(&pset, &mut rng_from_seed(42));
        assert_eq!(t1, t2);
    }

    #[test]
    fn traversal_frequencies_roughly_uniform() {
        let pset = UncertainPointSet::from_values_1d(&[vec![0.0, 1.0, 2.0, 3.0]]).unwrap();
        let mut rng = rng_from_seed(5);
        let mut counts = [0usize; 4];
        let samples = 10_000;
        for _ in 0..samples {
            let t = sample_traversal(&pset, &mut rng);
            counts[t.choice[0]] += 1;
        }
        for &c in &counts {
            let freq = c as f64 / samples as f64;
            assert!((freq - 0.25).abs() < 0.02, "frequency {} too far from 0.25", freq);
        }
    }

    #[test]
    fn pointset_rejects_ragged_k() {
        let err = UncertainPointSet::from_values_1d(&[vec![0.0, 1.0], vec![2.0]]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pointset_rejects_nonfinite() {
        let err = UncertainPointSet::from_values_1d(&[vec![f64::NAN]]);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn negative_zero_canonicalized() {
        let l = Location::scalar(-0.0);
        assert_eq!(l.value().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn distribution_exact_requires_unit_mass() {
        let half = BigRational::new(1.into(), 2.into());
        let ok = MedianDistribution::exact(vec![
            (Location::scalar(0.0), half.clone()),
            (Location::scalar(1.0), half.clone()),
        ]);
        assert!(ok.is_ok());
        let bad = MedianDistribution::exact(vec![(Location::scalar(0.0), half)]);
        assert!(bad.is_err());
    }
}
