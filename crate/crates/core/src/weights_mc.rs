//! Randomized weight estimation on a given support, in any dimension, plus
//! the sampled-support variant that skips the lattice construction
//! entirely.
//!
//! Each round draws a traversal, computes its (exact in 1D, Weiszfeld
//! otherwise) L1 median, and increments the count of the support point that
//! covers it. With `N = ceil((C/eps^2)(d + ln(1/delta)))` rounds, every
//! estimated weight is within `eps` of the true mass with probability at
//! least `1 - delta` (uniform convergence over balls). Medians that no
//! support point covers are counted separately as `uncovered_mass` rather
//! than snapped to the nearest bin.

use rayon::prelude::*;

use crate::costhat::costhat_eval;
use crate::error::{Error, Result};
use crate::l1median::{l1_median, DEFAULT_MAX_ITER};
use crate::model::{
    derive_rng, median_of_traversal, sample_traversal, Location, MedianDistribution,
    UncertainPointSet,
};
use crate::support1d::{Construction, SupportPoint, SupportSet};

/// Configuration for the randomized weight estimators.
#[derive(Debug, Clone)]
pub struct McConfig {
    /// Target additive weight error.
    pub epsilon: f64,
    /// Failure probability.
    pub delta: f64,
    /// Explicit round count; `None` derives it from the accuracy target.
    pub rounds: Option<usize>,
    /// Hidden constant of the uniform-convergence bound, exposed because
    /// the theory does not pin it down. Default 4.
    pub vc_constant: f64,
    /// Inner L1-median accuracy; must stay below `epsilon`. Ignored in 1D
    /// where medians are exact.
    pub phi: f64,
    pub seed: u64,
    /// Escalate a miss fraction above `miss_threshold` into an error.
    pub strict: bool,
    pub miss_threshold: f64,
}

impl McConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        McConfig {
            epsilon,
            delta,
            rounds: None,
            vc_constant: 4.0,
            phi: epsilon / 10.0,
            seed,
            strict: false,
            miss_threshold: 0.05,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter("delta must lie in (0, 1)".into()));
        }
        if !(self.vc_constant > 0.0) {
            return Err(Error::InvalidParameter("vc constant must be positive".into()));
        }
        if !(self.phi < self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "phi {} must be below epsilon {}",
                self.phi, self.epsilon
            )));
        }
        if dim >= 2 && !(self.phi > 0.0) {
            return Err(Error::InvalidParameter("phi must be positive for d >= 2".into()));
        }
        if let Some(r) = self.rounds {
            if r == 0 {
                return Err(Error::InvalidParameter("rounds must be at least 1".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.miss_threshold) {
            return Err(Error::InvalidParameter("miss threshold must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn effective_rounds(&self, dim: usize) -> Result<usize> {
        match self.rounds {
            Some(r) => Ok(r),
            None => rounds_needed(self.epsilon, self.delta, dim, self.vc_constant),
        }
    }
}

/// Round count for additive error `eps` with failure probability `delta`
/// in dimension `d`: `ceil((c/eps^2) * (d + ln(1/delta)))`.
pub fn rounds_needed(eps: f64, delta: f64, d: usize, c: f64) -> Result<usize> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) || !(c > 0.0) || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "invalid round parameters: eps {}, delta {}, d {}, c {}",
            eps, delta, d, c
        )));
    }
    let n = (c / (eps * eps)) * (d as f64 + (1.0 / delta).ln());
    Ok((n.ceil() as usize).max(1))
}

/// Map a median onto the support: nearest point among those whose relaxed
/// radius `(eps-phi)/(1+eps-phi) * costhat(z)` covers it; distance ties go
/// to the lexicographically smaller coordinates. `None` when nothing
/// covers it.
pub fn assign_to_support(q: &Location, t: &SupportSet, eps: f64, phi: f64) -> Option<usize> {
    let factor = (eps - phi) / (1.0 + eps - phi);
    let mut best: Option<(usize, f64)> = None;
    for (i, sp) in t.points.iter().enumerate() {
        let radius = factor * sp.costhat;
        let d = sp.location.distance(q);
        if d <= radius {
            best = match best {
                None => Some((i, d)),
                Some((bi, bd)) => {
                    if d < bd
                        || (d == bd
                            && sp.location.lex_cmp(&t.points[bi].location) == std::cmp::Ordering::Less)
                    {
                        Some((i, d))
                    } else {
                        Some((bi, bd))
                    }
                }
            };
        }
    }
    best.map(|(i, _)| i)
}

/// The median of one sampled traversal: exact in 1D, Weiszfeld otherwise.
fn round_median(pset: &UncertainPointSet, seed: u64, round: u64, phi: f64) -> Result<Location> {
    let mut rng = derive_rng(seed, round);
    let t = sample_traversal(pset, &mut rng);
    if pset.dim() == 1 {
        let key = median_of_traversal(pset, &t)?;
        Ok(Location::scalar(key.value))
    } else {
        let q = pset.realize(&t)?;
        Ok(l1_median(&q, phi, DEFAULT_MAX_ITER)?.point)
    }
}

/// Estimate the support weights by repeated sampling. Deterministic under a
/// fixed config: rounds derive independent RNG streams and counts merge
/// additively, so parallel and sequential execution agree.
pub fn mc_weights(
    pset: &UncertainPointSet,
    t: &SupportSet,
    cfg: &McConfig,
) -> Result<MedianDistribution> {
    cfg.validate(pset.dim())?;
    if t.is_empty() {
        return Err(Error::InvalidInput("empty support".into()));
    }
    if (cfg.epsilon - t.epsilon).abs() > 1e-12 * cfg.epsilon.max(t.epsilon) {
        return Err(Error::InvalidParameter(format!(
            "support was built for epsilon {}, config requests {}",
            t.epsilon, cfg.epsilon
        )));
    }
    let rounds = cfg.effective_rounds(pset.dim())?;
    let phi = if pset.dim() == 1 { 0.0 } else { cfg.phi };

    let (counts, misses) = (0..rounds as u64)
        .into_par_iter()
        .map(|round| {
            let m = round_median(pset, cfg.seed, round, cfg.phi.max(1e-12))?;
            Ok(assign_to_support(&m, t, cfg.epsilon, phi))
        })
        .try_fold(
            || (vec![0u64; t.len()], 0u64),
            |(mut counts, mut miss), bin: Result<Option<usize>>| -> Result<(Vec<u64>, u64)> {
                match bin? {
                    Some(i) => counts[i] += 1,
                    None => miss += 1,
                }
                Ok((counts, miss))
            },
        )
        .try_reduce(
            || (vec![0u64; t.len()], 0u64),
            |(mut a, am), (b, bm)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok((a, am + bm))
            },
        )?;

    let miss_fraction = misses as f64 / rounds as f64;
    if cfg.strict && miss_fraction > cfg.miss_threshold {
        return Err(Error::AuditFailure(format!(
            "{:.2}% of sampled medians missed every support point (threshold {:.2}%); \
             the support and epsilon likely do not match",
            miss_fraction * 100.0,
            cfg.miss_threshold * 100.0
        )));
    }

    let entries: Vec<(Location, f64)> = t
        .points
        .iter()
        .zip(&counts)
        .map(|(sp, &c)| (sp.location.clone(), c as f64 / rounds as f64))
        .collect();
    MedianDistribution::floating(entries, miss_fraction)
}

/// Merge tolerance for sampled support points: below the Weiszfeld accuracy
/// scale, above double-rounding noise.
pub const SAMPLED_MERGE_TOL: f64 = 1e-9;

/// Skip the support construction entirely: the sampled medians themselves
/// become the support, with empirical frequencies as weights. Bins with
/// true mass below `epsilon` may be absent from the result.
pub fn sampled_support(
    pset: &UncertainPointSet,
    cfg: &McConfig,
) -> Result<(SupportSet, MedianDistribution)> {
    cfg.validate(pset.dim())?;
    let rounds = cfg.effective_rounds(pset.dim())?;

    let medians: Vec<Location> = (0..rounds as u64)
        .into_par_iter()
        .map(|round| round_median(pset, cfg.seed, round, cfg.phi.max(1e-12)))
        .collect::<Result<Vec<_>>>()?;

    // Merge near-duplicates; round order keeps this deterministic.
    let mut reps: Vec<(Location, u64)> = Vec::new();
    'outer: for m in medians {
        for (r, c) in &mut reps {
            if r.distance(&m) <= SAMPLED_MERGE_TOL {
                *c += 1;
                continue 'outer;
            }
        }
        reps.push((m, 1));
    }
    reps.sort_by(|a, b| a.0.lex_cmp(&b.0));

    let factor = cfg.epsilon / (1.0 + cfg.epsilon);
    let mut points = Vec::with_capacity(reps.len());
    let mut entries = Vec::with_capacity(reps.len());
    for (loc, c) in reps {
        let ch = costhat_eval(&loc, pset)?;
        points.push(SupportPoint { location: loc.clone(), costhat: ch, radius: factor * ch });
        entries.push((loc, c as f64 / rounds as f64));
    }
    let support = SupportSet { points, epsilon: cfg.epsilon, construction: Construction::Sampled };
    let dist = MedianDistribution::floating(entries, 0.0)?;
    Ok((support, dist))
}
