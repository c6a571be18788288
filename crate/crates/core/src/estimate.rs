//! Single-point estimates over a 1D median distribution, their stability
//! bound, and the canonical demonstration of why the distribution itself is
//! the better output.

use num_rational::BigRational;
use num_traits::Zero;

use crate::costhat::build_profile_1d;
use crate::error::{Error, Result};
use crate::model::{Location, MedianDistribution, UncertainPointSet, WeightKind};
use crate::support1d::build_support_1d_with_profile;
use crate::weights_exact::{aggregate_weights, point_weights_1d};

/// Weighted median of a 1D distribution: the smallest support point whose
/// cumulative weight (inclusive) reaches one half.
///
/// In exact mode the comparison is exact rational arithmetic, so a
/// half/half split deterministically yields the lower point. In floating
/// mode the cumulative sum is Neumaier-compensated.
pub fn weighted_median_1d(dist: &MedianDistribution) -> Result<Location> {
    if dist.is_empty() {
        return Err(Error::InvalidInput("weighted median of empty support".into()));
    }
    for e in &dist.entries {
        if e.location.dim() != 1 {
            return Err(Error::InvalidInput("weighted median requires dimension 1".into()));
        }
    }
    let mut order: Vec<usize> = (0..dist.entries.len()).collect();
    order.sort_by(|&a, &b| {
        dist.entries[a]
            .location
            .value()
            .total_cmp(&dist.entries[b].location.value())
    });

    match dist.kind {
        WeightKind::ExactRational => {
            let half = BigRational::new(1.into(), 2.into());
            let mut cum = BigRational::zero();
            for &i in &order {
                let w = dist.entries[i]
                    .exact
                    .as_ref()
                    .ok_or_else(|| Error::Internal("exact distribution missing rational weight".into()))?;
                cum += w;
                if cum >= half {
                    return Ok(dist.entries[i].location.clone());
                }
            }
        }
        WeightKind::Floating => {
            let mut sum = 0.0f64;
            let mut comp = 0.0f64;
            for &i in &order {
                let w = dist.entries[i].weight;
                let t = sum + w;
                comp += if sum.abs() >= w.abs() { (sum - t) + w } else { (w - t) + sum };
                sum = t;
                if sum + comp >= 0.5 {
                    return Ok(dist.entries[i].location.clone());
                }
            }
        }
    }
    // Mass sums to one, so the scan always crosses one half.
    Err(Error::Internal("cumulative weight never reached 1/2".into()))
}

/// Both single-point estimates and the stability bound relating them.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Weighted median over the approximate support `(T, w_hat)`.
    pub m_t: f64,
    /// Weighted median over `(P_all, w)`.
    pub m_p: f64,
    pub gap: f64,
    /// `eps * costhat(m_p)`; the gap never exceeds it.
    pub bound: f64,
    pub support_size: usize,
}

/// Compute `m_T`, `m_P` and check `|m_T - m_P| <= eps * costhat(m_P)`.
/// A violation is reported as an error: it cannot happen unless something
/// upstream is broken.
pub fn stability_gap(pset: &UncertainPointSet, eps: f64) -> Result<StabilityReport> {
    pset.require_dim(1)?;
    let profile = build_profile_1d(pset)?;
    let t = build_support_1d_with_profile(pset, eps, &profile)?;
    let w = point_weights_1d(pset)?;
    let dist_t = aggregate_weights(pset, &w, &t)?;
    let dist_p = w.full_distribution(pset)?;
    let m_t = weighted_median_1d(&dist_t)?.value();
    let m_p = weighted_median_1d(&dist_p)?.value();
    let gap = (m_t - m_p).abs();
    let bound = eps * profile.eval(m_p);
    if gap > bound * (1.0 + 1e-9) + 1e-300 {
        return Err(Error::AuditFailure(format!(
            "single-point stability violated: |{} - {}| = {} > {}",
            m_t, m_p, gap, bound
        )));
    }
    Ok(StabilityReport { m_t, m_p, gap, bound, support_size: t.len() })
}

/// The canonical instability instance: three uncertain points straddling
/// the two sites `0` and `delta`, with `P1 = {0, 0}`, `P2 = {0, delta}`,
/// `P3 = {delta, delta}`. The median lands on `0` or `delta` with
/// probability one half each, entirely decided by `P2`.
pub fn nonrobust_example_instance(delta: f64) -> Result<UncertainPointSet> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    UncertainPointSet::from_values_1d(&[
        vec![0.0, 0.0],
        vec![0.0, delta],
        vec![delta, delta],
    ])
}

/// What the instability demo reports: the distribution barely moves under
/// an `eta` perturbation of the weights, while the single-point estimate
/// jumps the full `delta`.
#[derive(Debug, Clone)]
pub struct NonrobustnessReport {
    pub delta: f64,
    pub eta: f64,
    /// Exact value masses of the unperturbed instance: `{0: 1/2, delta: 1/2}`.
    pub base_masses: Vec<(f64, f64)>,
    pub m_p_base: f64,
    pub m_p_perturbed: f64,
    pub flipped: bool,
    /// Total variation distance between base and perturbed distributions.
    pub total_variation: f64,
}

/// Build the canonical instance, shift mass `eta` from site `0` to site
/// `delta`, and report how the weighted median reacts.
pub fn nonrobustness_demo(delta: f64, eta: f64) -> Result<NonrobustnessReport> {
    if !(0.0..0.5).contains(&eta) {
        return Err(Error::InvalidParameter("eta must be in [0, 0.5)".into()));
    }
    let pset = nonrobust_example_instance(delta)?;
    let w = point_weights_1d(&pset)?;
    let dist_p = w.full_distribution(&pset)?;
    let m_p_base = weighted_median_1d(&dist_p)?.value();

    let masses = w.value_masses(&pset);
    let base_masses: Vec<(f64, f64)> = masses
        .iter()
        .map(|(v, m)| (*v, num_traits::ToPrimitive::to_f64(m).unwrap_or(0.0)))
        .collect();

    let perturbed = MedianDistribution::floating(
        vec![
            (Location::scalar(0.0), 0.5 - eta),
            (Location::scalar(delta), 0.5 + eta),
        ],
        0.0,
    )?;
    let m_p_perturbed = weighted_median_1d(&perturbed)?.value();

    Ok(NonrobustnessReport {
        delta,
        eta,
        base_masses,
        m_p_base,
        m_p_perturbed,
        flipped: m_p_perturbed != m_p_base,
        total_variation: eta,
    })
}
