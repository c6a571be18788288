//! Approximate L1 (geometric) median of a concrete point set.
//!
//! In 1D the median is exact. In higher dimensions we run the Weiszfeld
//! reweighting iteration with the standard modification at data-point
//! singularities: when an iterate lands on a data point, the point's own
//! term leaves the update and the subgradient condition decides whether the
//! data point itself is the optimum.

use crate::error::{Error, Result};
use crate::model::{cost, median_1d, Location};

/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Relative cost-decrease stopping factor (multiplied by `phi`).
pub const TOL_FACTOR: f64 = 1e-2;

/// Outcome of an L1-median computation.
#[derive(Debug, Clone)]
pub struct WeiszfeldResult {
    pub point: Location,
    /// `cost(point, Q)`.
    pub cost: f64,
    pub iterations: usize,
    /// False only when the iteration cap was reached without meeting either
    /// stopping criterion; callers decide their own policy then.
    pub converged: bool,
    /// Certified relative accuracy: subgradient residual divided by the
    /// final cost (0 for exact results). Conservative.
    pub phi_achieved: f64,
}

/// Norm of the subgradient residual of `cost(., q)` at `x`, with the
/// standard unit-ball allowance for coincident data points. Zero certifies
/// exact optimality.
pub fn optimality_certificate(x: &Location, q: &[Location]) -> f64 {
    let (residual, multiplicity) = residual_at(x, q);
    (residual - multiplicity as f64).max(0.0) / q.len() as f64
}

/// `(norm of sum of unit vectors toward non-coincident points, number of
/// coincident points)`.
fn residual_at(x: &Location, q: &[Location]) -> (f64, usize) {
    let d = x.dim();
    let mut sum = vec![0.0f64; d];
    let mut coincident = 0usize;
    for p in q {
        let dist = x.distance(p);
        if dist <= coincidence_threshold(x, p) {
            coincident += 1;
            continue;
        }
        for (a, s) in sum.iter_mut().enumerate().take(d) {
            *s += (p.coords()[a] - x.coords()[a]) / dist;
        }
    }
    (norm(&sum), coincident)
}

fn coincidence_threshold(x: &Location, p: &Location) -> f64 {
    let scale = x
        .coords()
        .iter()
        .chain(p.coords())
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(1.0);
    scale * 1e-14
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `phi`-approximate L1 median. Exact in 1D. See [`l1_median_traced`] for
/// the per-iteration cost trace.
pub fn l1_median(q: &[Location], phi: f64, max_iter: usize) -> Result<WeiszfeldResult> {
    l1_median_traced(q, phi, max_iter, None)
}

/// Same as [`l1_median`], optionally recording the cost after every
/// iteration (diagnostics; the sequence is non-increasing).
pub fn l1_median_traced(
    q: &[Location],
    phi: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<WeiszfeldResult> {
    if q.is_empty() {
        return Err(Error::InvalidInput("l1 median of empty set".into()));
    }
    if !(phi > 0.0) {
        return Err(Error::InvalidParameter(format!("phi must be positive, got {}", phi)));
    }
    let d = q[0].dim();
    if q.iter().any(|p| p.dim() != d) {
        return Err(Error::InvalidInput("mixed dimensions in point set".into()));
    }

    if d == 1 {
        let values: Vec<f64> = q.iter().map(|p| p.value()).collect();
        let (v, _) = median_1d(&values)?;
        let point = Location::scalar(v);
        let c = cost(&point, q)?;
        return Ok(WeiszfeldResult { point, cost: c, iterations: 0, converged: true, phi_achieved: 0.0 });
    }

    // Start at the coordinate-wise mean: cheap and inside CH(Q).
    let mut x = {
        let mut m = vec![0.0f64; d];
        for p in q {
            for (a, c) in m.iter_mut().enumerate() {
                *c += p.coords()[a];
            }
        }
        for c in &mut m {
            *c /= q.len() as f64;
        }
        Location::new(m)
    };
    let mut current_cost = cost(&x, q)?;
    if let Some(t) = trace.as_deref_mut() {
        t.push(current_cost);
    }

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let step = weiszfeld_step(&x, q);
        let next = match step {
            StepOutcome::Optimal => {
                converged = true;
                break;
            }
            StepOutcome::Move(next) => next,
        };
        let next_cost = cost(&next, q)?;
        debug_assert!(
            next_cost <= current_cost * (1.0 + 1e-12) + 1e-300,
            "weiszfeld cost increased: {} -> {}",
            current_cost,
            next_cost
        );
        let decrease = current_cost - next_cost;
        x = next;
        let prev_cost = current_cost;
        current_cost = next_cost;
        if let Some(t) = trace.as_deref_mut() {
            t.push(current_cost);
        }
        let cert = optimality_certificate(&x, q);
        if cert <= phi * current_cost {
            converged = true;
            break;
        }
        if decrease < phi * TOL_FACTOR * prev_cost.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let cert = optimality_certificate(&x, q);
    let phi_achieved = if current_cost > 0.0 { cert / current_cost } else { 0.0 };
    Ok(WeiszfeldResult { point: x, cost: current_cost, iterations, converged, phi_achieved })
}

enum StepOutcome {
    /// The current point is certified optimal (subgradient condition).
    Optimal,
    Move(Location),
}

/// One (modified) Weiszfeld step. Coincident data points contribute their
/// multiplicity `eta` to the subgradient allowance; the update pulls the
/// plain reweighted mean of the remaining points toward the current iterate
/// by `eta / ||R||`.
fn weiszfeld_step(x: &Location, q: &[Location]) -> StepOutcome {
    let d = x.dim();
    let mut weighted = vec![0.0f64; d];
    let mut inv_sum = 0.0f64;
    let mut residual = vec![0.0f64; d];
    let mut eta = 0usize;
    for p in q {
        let dist = x.distance(p);
        if dist <= coincidence_threshold(x, p) {
            eta += 1;
            continue;
        }
        let inv = 1.0 / dist;
        inv_sum += inv;
        for a in 0..d {
            weighted[a] += p.coords()[a] * inv;
            residual[a] += (p.coords()[a] - x.coords()[a]) * inv;
        }
    }
    if inv_sum == 0.0 {
        // All points coincide with x.
        return StepOutcome::Optimal;
    }
    let t: Vec<f64> = weighted.iter().map(|w| w / inv_sum).collect();
    if eta == 0 {
        return StepOutcome::Move(Location::new(t));
    }
    let r = norm(&residual);
    if r <= eta as f64 {
        return StepOutcome::Optimal;
    }
    let lambda = eta as f64 / r;
    let moved: Vec<f64> = t
        .iter()
        .zip(x.coords())
        .map(|(ti, xi)| (1.0 - lambda) * ti + lambda * xi)
        .collect();
    StepOutcome::Move(Location::new(moved))
}
