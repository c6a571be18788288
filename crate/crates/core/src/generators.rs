//! Synthetic instance generation under bounded-density location models,
//! and the statistical experiments that validate the cost lower bounds and
//! support size bounds at scale.
//!
//! A 1D family is *C0-bounded over `[0, L]`* when its cdf is continuous
//! with slope at most `C0` (no atoms). The uniform family has `C0 = 1/L`,
//! so `L * C0 = 1`. The 2D families are bounded joint densities supported
//! on a disk.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::costhat::{bounding_box, build_profile_1d, grid_scan_min};
use crate::error::{Error, Result};
use crate::model::{rng_from_seed, Location, UncertainPoint, UncertainPointSet};
use crate::support1d::{alpha_of, build_support_1d_with_profile};
use crate::support2d::{build_lattice, build_support_2d};

/// Mix a trial/stream index into a base seed (splitmix-style), so that
/// per-trial instances are independent yet reproducible.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 1D location family with cdf slope bounded by `C0`.
#[derive(Debug, Clone)]
pub enum C0Family1D {
    Uniform {
        l: f64,
    },
    /// Piecewise-constant density over equal-width segments of `[0, L]`
    /// (piecewise-linear cdf), sampled by closed-form inverse cdf per
    /// segment.
    Capped {
        l: f64,
        /// Densities per segment; they integrate to one over `[0, L]`.
        densities: Vec<f64>,
    },
}

impl C0Family1D {
    pub fn uniform(l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter("L must be positive".into()));
        }
        Ok(C0Family1D::Uniform { l })
    }

    /// Normalize raw nonnegative segment weights into a capped-density
    /// family.
    pub fn capped(l: f64, raw: Vec<f64>) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter("L must be positive".into()));
        }
        if raw.is_empty() || raw.iter().any(|&w| !(w >= 0.0)) || raw.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "segment weights must be nonnegative with positive total".into(),
            ));
        }
        let seg = l / raw.len() as f64;
        let total: f64 = raw.iter().map(|w| w * seg).sum();
        let densities = raw.iter().map(|w| w / total).collect();
        Ok(C0Family1D::Capped { l, densities })
    }

    /// Two-level density with peak exactly `c0` on the first half of the
    /// range; requires `1/L <= c0 <= 2/L`.
    pub fn capped_two_level(l: f64, c0: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter("L must be positive".into()));
        }
        if !(c0 >= 1.0 / l && c0 <= 2.0 / l) {
            return Err(Error::InvalidParameter(format!(
                "two-level family needs c0 in [1/L, 2/L] = [{}, {}], got {}",
                1.0 / l,
                2.0 / l,
                c0
            )));
        }
        Ok(C0Family1D::Capped { l, densities: vec![c0, 2.0 / l - c0] })
    }

    pub fn l(&self) -> f64 {
        match self {
            C0Family1D::Uniform { l } | C0Family1D::Capped { l, .. } => *l,
        }
    }

    /// The cdf slope bound: the maximum density.
    pub fn c0(&self) -> f64 {
        match self {
            C0Family1D::Uniform { l } => 1.0 / l,
            C0Family1D::Capped { densities, .. } => {
                densities.iter().cloned().fold(0.0, f64::max)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            C0Family1D::Uniform { l } => (x / l).clamp(0.0, 1.0),
            C0Family1D::Capped { l, densities } => {
                if x <= 0.0 {
                    return 0.0;
                }
                if x >= *l {
                    return 1.0;
                }
                let seg = l / densities.len() as f64;
                let idx = ((x / seg) as usize).min(densities.len() - 1);
                let below: f64 = densities[..idx].iter().map(|d| d * seg).sum();
                (below + densities[idx] * (x - idx as f64 * seg)).clamp(0.0, 1.0)
            }
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.gen();
        match self {
            C0Family1D::Uniform { l } => u * l,
            C0Family1D::Capped { l, densities } => {
                let seg = l / densities.len() as f64;
                let mut cum = 0.0;
                for (i, &d) in densities.iter().enumerate() {
                    let mass = d * seg;
                    if u <= cum + mass || i == densities.len() - 1 {
                        if d <= 0.0 {
                            // zero-density tail segment: all residual mass
                            // sits at earlier segments; keep scanning
                            cum += mass;
                            continue;
                        }
                        return (i as f64 * seg + (u - cum) / d).clamp(0.0, *l);
                    }
                    cum += mass;
                }
                *l
            }
        }
    }
}

/// A 2D location family with joint density bounded by `C0`, supported on
/// the disk of radius `R` around the origin.
#[derive(Debug, Clone)]
pub struct DiskFamily2D {
    radius: f64,
    kind: DiskKind,
}

#[derive(Debug, Clone)]
enum DiskKind {
    Uniform,
    /// Density `d_inner` on the inner disk of radius `r_inner`, `d_outer`
    /// on the remaining annulus.
    TwoLevel { r_inner: f64, d_inner: f64, d_outer: f64 },
}

impl DiskFamily2D {
    pub fn uniform(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("R must be positive".into()));
        }
        Ok(DiskFamily2D { radius, kind: DiskKind::Uniform })
    }

    /// Concentrate mass at density `c0` on an inner disk, the remainder
    /// uniform on the annulus; `c0 >= 1/(pi R^2)` required.
    pub fn capped(radius: f64, c0: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("R must be positive".into()));
        }
        let uniform_density = 1.0 / (std::f64::consts::PI * radius * radius);
        if !(c0 >= uniform_density) {
            return Err(Error::InvalidParameter(format!(
                "c0 must be at least the uniform density {:.6e}",
                uniform_density
            )));
        }
        let half = radius / 2.0;
        let inner_mass = c0 * std::f64::consts::PI * half * half;
        if inner_mass >= 1.0 {
            // All mass fits in a smaller uniform disk of density exactly c0.
            let r_inner = (1.0 / (std::f64::consts::PI * c0)).sqrt();
            return Ok(DiskFamily2D {
                radius,
                kind: DiskKind::TwoLevel { r_inner, d_inner: c0, d_outer: 0.0 },
            });
        }
        let annulus_area = std::f64::consts::PI * (radius * radius - half * half);
        Ok(DiskFamily2D {
            radius,
            kind: DiskKind::TwoLevel {
                r_inner: half,
                d_inner: c0,
                d_outer: (1.0 - inner_mass) / annulus_area,
            },
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn c0(&self) -> f64 {
        match &self.kind {
            DiskKind::Uniform => 1.0 / (std::f64::consts::PI * self.radius * self.radius),
            DiskKind::TwoLevel { d_inner, d_outer, .. } => d_inner.max(*d_outer),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let (r_lo, r_hi) = match &self.kind {
            DiskKind::Uniform => (0.0, self.radius),
            DiskKind::TwoLevel { r_inner, d_inner, d_outer } => {
                let inner_mass =
                    d_inner * std::f64::consts::PI * r_inner * r_inner;
                if rng.gen::<f64>() < inner_mass || *d_outer <= 0.0 {
                    (0.0, *r_inner)
                } else {
                    (*r_inner, self.radius)
                }
            }
        };
        // Uniform over the annulus [r_lo, r_hi]: square-root radius trick.
        let u: f64 = rng.gen();
        let r = (r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo)).sqrt();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        (r * theta.cos(), r * theta.sin())
    }
}

/// Draw a 1D instance: each uncertain point gets `k` iid draws from the
/// family. Deterministic under the seed.
pub fn gen_instance_1d(
    n: usize,
    k: usize,
    family: &C0Family1D,
    seed: u64,
) -> Result<UncertainPointSet> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and k >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let points = (0..n)
        .map(|_| UncertainPoint {
            locations: (0..k).map(|_| Location::scalar(family.sample(&mut rng))).collect(),
        })
        .collect();
    UncertainPointSet::new(points)
}

/// Draw a 2D instance from a disk family.
pub fn gen_instance_2d(
    n: usize,
    k: usize,
    family: &DiskFamily2D,
    seed: u64,
) -> Result<UncertainPointSet> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and k >= 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let points = (0..n)
        .map(|_| UncertainPoint {
            locations: (0..k)
                .map(|_| {
                    let (x, y) = family.sample(&mut rng);
                    Location::xy(x, y)
                })
                .collect(),
        })
        .collect();
    UncertainPointSet::new(points)
}

/// Configuration of the 1D minimum-cost experiment.
#[derive(Debug, Clone)]
pub struct Experiment1dConfig {
    /// Instance size; 0 picks the smallest admissible value.
    pub n: usize,
    pub k: usize,
    pub family: C0Family1D,
    pub trials: usize,
    pub delta: f64,
    /// Support error parameter for the size-bound records.
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Trial1d {
    pub min_costhat: f64,
    pub passed: bool,
    pub support_size: usize,
    pub alpha: f64,
    pub size_bound_ok: bool,
}

#[derive(Debug, Clone)]
pub struct Experiment1dReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// `1 / (4 C0 (k+1))`.
    pub threshold: f64,
    pub required_n: usize,
    pub pass_count: usize,
    pub pass_rate: f64,
    pub records: Vec<Trial1d>,
}

/// Smallest `n` admissible for the 1D experiment:
/// `n > 8 alpha^2 (k+1)^2 ln(2/delta)` with `alpha = L * C0`.
pub fn required_n_1d(family: &C0Family1D, k: usize, delta: f64) -> usize {
    let alpha = family.l() * family.c0();
    (8.0 * alpha * alpha * ((k + 1) * (k + 1)) as f64 * (2.0 / delta).ln()).floor() as usize + 1
}

/// Generate `trials` instances, compute the exact minimum of `costhat`
/// per trial, and compare against `1/(4 C0 (k+1))`; also record the greedy
/// support size against the measured-alpha bound.
pub fn experiment_min_costhat_1d(cfg: &Experiment1dConfig) -> Result<Experiment1dReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0,1)".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let required_n = required_n_1d(&cfg.family, cfg.k, cfg.delta);
    let n = if cfg.n == 0 { required_n } else { cfg.n };
    if n < required_n {
        return Err(Error::InvalidParameter(format!(
            "n = {} is below the admissible threshold; need n >= {}",
            n, required_n
        )));
    }
    let c0 = cfg.family.c0();
    let threshold = 1.0 / (4.0 * c0 * (cfg.k + 1) as f64);

    let records: Vec<Trial1d> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Trial1d> {
            let pset = gen_instance_1d(n, cfg.k, &cfg.family, mix_seed(cfg.seed, trial))?;
            let profile = build_profile_1d(&pset)?;
            let (_, min_ch) = profile.min();
            let t = build_support_1d_with_profile(&pset, cfg.epsilon, &profile)?;
            let alpha = alpha_of(&pset)?;
            let size_bound_ok = !alpha.is_finite()
                || (t.len() as f64)
                    <= alpha * cfg.k as f64 * (1.0 + cfg.epsilon) / cfg.epsilon;
            Ok(Trial1d {
                min_costhat: min_ch,
                passed: min_ch >= threshold,
                support_size: t.len(),
                alpha,
                size_bound_ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let pass_count = records.iter().filter(|r| r.passed).count();
    Ok(Experiment1dReport {
        n,
        k: cfg.k,
        trials: cfg.trials,
        delta: cfg.delta,
        epsilon: cfg.epsilon,
        threshold,
        required_n,
        pass_count,
        pass_rate: pass_count as f64 / cfg.trials as f64,
        records,
    })
}

/// Committed envelope constant for the 2D support size
/// `|T| <= ENVELOPE * (R^2 C0)^2 * k^2 / eps^2`, calibrated once on the
/// reference seed set and regression-asserted thereafter.
pub const SUPPORT_SIZE_ENVELOPE_2D: f64 = 160.0;

/// Configuration of the 2D minimum-cost experiment.
#[derive(Debug, Clone)]
pub struct Experiment2dConfig {
    /// Instance size; 0 picks the smallest admissible value.
    pub n: usize,
    pub k: usize,
    pub family: DiskFamily2D,
    pub trials: usize,
    pub delta: f64,
    /// Concentration slack; 0 picks `R / (8 pi (k+1))`.
    pub eta: f64,
    /// Per-axis grid resolution of the scan.
    pub grid: usize,
    /// When set, build the lattice support per trial (rho certified from
    /// the same grid scan) and record its size.
    pub support_epsilon: Option<f64>,
    pub lattice_cap: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Trial2d {
    pub grid_min: f64,
    pub passed: bool,
    pub rho: Option<f64>,
    pub support_size: Option<usize>,
    pub size_envelope_ok: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Experiment2dReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub delta: f64,
    pub eta: f64,
    /// `1 / (4 pi R C0 (k+1)) - eta`.
    pub threshold: f64,
    pub required_n: usize,
    pub pass_count: usize,
    pub pass_rate: f64,
    pub records: Vec<Trial2d>,
}

/// Smallest `n` admissible for the 2D experiment: `n > (2R^2/eta^2) ln(2/delta)`.
pub fn required_n_2d(radius: f64, eta: f64, delta: f64) -> usize {
    (2.0 * radius * radius / (eta * eta) * (2.0 / delta).ln()).floor() as usize + 1
}

/// Generate disk instances at concentration scale and check the grid-scan
/// minimum of `costhat` against `1/(4 pi R C0 (k+1)) - eta`.
pub fn experiment_min_costhat_2d(cfg: &Experiment2dConfig) -> Result<Experiment2dReport> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParameter("delta must lie in (0,1)".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    if cfg.grid < 2 {
        return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
    }
    let radius = cfg.family.radius();
    let c0 = cfg.family.c0();
    let eta = if cfg.eta == 0.0 {
        radius / (8.0 * std::f64::consts::PI * (cfg.k + 1) as f64)
    } else {
        cfg.eta
    };
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter("eta must be positive".into()));
    }
    let required_n = required_n_2d(radius, eta, cfg.delta);
    let n = if cfg.n == 0 { required_n } else { cfg.n };
    if n < required_n {
        return Err(Error::InvalidParameter(format!(
            "n = {} is below the admissible threshold; need n >= {}",
            n, required_n
        )));
    }
    let bound = 1.0 / (4.0 * std::f64::consts::PI * radius * c0 * (cfg.k + 1) as f64);
    let threshold = bound - eta;

    let mut records = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let pset = gen_instance_2d(n, cfg.k, &cfg.family, mix_seed(cfg.seed, trial))?;
        let (lo, hi) = bounding_box(&pset);
        let (grid_min, _, _) = grid_scan_min(&pset, lo, hi, cfg.grid);
        let mut rho = None;
        let mut support_size = None;
        let mut size_envelope_ok = None;
        if let Some(eps) = cfg.support_epsilon {
            let dx = (hi[0] - lo[0]) / (cfg.grid - 1) as f64;
            let dy = (hi[1] - lo[1]) / (cfg.grid - 1) as f64;
            let certified = grid_min - 0.5 * (dx * dx + dy * dy).sqrt();
            if certified > 0.0 {
                let lattice = build_lattice(&pset, eps, certified, cfg.lattice_cap)?;
                let t = build_support_2d(&lattice, &pset, eps)?;
                let alpha = (radius * radius * c0) * (radius * radius * c0);
                let envelope =
                    SUPPORT_SIZE_ENVELOPE_2D * alpha * (cfg.k * cfg.k) as f64 / (eps * eps);
                rho = Some(certified);
                support_size = Some(t.len());
                size_envelope_ok = Some((t.len() as f64) <= envelope);
            }
        }
        records.push(Trial2d {
            grid_min,
            passed: grid_min >= threshold,
            rho,
            support_size,
            size_envelope_ok,
        });
    }

    let pass_count = records.iter().filter(|r| r.passed).count();
    Ok(Experiment2dReport {
        n,
        k: cfg.k,
        trials: cfg.trials,
        delta: cfg.delta,
        eta,
        threshold,
        required_n,
        pass_count,
        pass_rate: pass_count as f64 / cfg.trials as f64,
        records,
    })
}
