//! 2D support construction: certified lower bounds on `min costhat`, convex
//! hull, lattice, and the arbitrary-order greedy cover.
//!
//! The pipeline: a certified bound `rho <= min costhat` sizes the lattice
//! spacing `beta = eps/(2*sqrt(2)*(1+eps)) * rho`; the lattice (plus hull
//! boundary samples) puts a candidate within `sqrt(2)*beta` of every point
//! of `CH(P_all)`; greedily covering the lattice at half radii
//! `eps/(2(1+eps)) * costhat(z)` then covers all of `CH(P_all)` at full
//! radii `eps/(1+eps) * costhat(z)` by the triangle inequality.

use crate::costhat::{bounding_box, costhat_eval, grid_scan_min};
use crate::error::{Error, Result};
use crate::model::{Location, UncertainPointSet};
use crate::support1d::{Construction, SupportPoint, SupportSet};

/// Which certified lower bound on `min costhat` to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMode {
    /// `min_j costhat(p_{1,j}) / (n+1)`, from the first uncertain point
    /// only; `O(nk^2)`.
    Fast,
    /// Best of the per-point bounds over all uncertain points and the
    /// half-of-global-minimum bound `min_{i,j} costhat(p_{i,j}) / 2`;
    /// `O(n^2 k^2)`. Never smaller than `Fast`.
    Improved,
}

/// Certified lower bound on `min_x costhat(x)` over the plane.
///
/// Both modes follow from the 1-Lipschitz property: for the minimizer `x*`,
/// the nearest candidate of any single uncertain point is within
/// `n * costhat(x*)`, so its cost is at most `(n+1) * costhat(x*)`; the
/// globally nearest candidate is within `costhat(x*)` itself, so its cost
/// is at most `2 * costhat(x*)`.
pub fn rho_lower_bound(pset: &UncertainPointSet, mode: RhoMode) -> Result<f64> {
    pset.require_dim(2)?;
    let n = pset.n_points() as f64;
    let rho = match mode {
        RhoMode::Fast => {
            let min_first = pset.points()[0]
                .locations
                .iter()
                .map(|l| costhat_eval(l, pset))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            min_first / (n + 1.0)
        }
        RhoMode::Improved => {
            let mut global_min = f64::INFINITY;
            let mut best_per_point = 0.0f64;
            for p in pset.points() {
                let point_min = p
                    .locations
                    .iter()
                    .map(|l| costhat_eval(l, pset))
                    .collect::<Result<Vec<f64>>>()?
                    .into_iter()
                    .fold(f64::INFINITY, f64::min);
                global_min = global_min.min(point_min);
                best_per_point = best_per_point.max(point_min / (n + 1.0));
            }
            best_per_point.max(global_min / 2.0)
        }
    };
    if rho <= 0.0 {
        return Err(Error::DegenerateInstance(
            "costhat lower bound is zero (coincident instance); \
             use the sampled-support Monte-Carlo mode instead of the lattice construction"
                .into(),
        ));
    }
    Ok(rho)
}

/// Grid-certified lower bound: `min costhat` over an inclusive grid of the
/// bounding box, minus the Lipschitz slack of half a cell diagonal. Valid
/// because the global minimizer of `costhat` lies in `CH(P_all)` (projecting
/// onto a convex set does not increase any distance), hence in the box.
/// Much tighter than the analytic modes on large instances.
pub fn rho_grid_certified(pset: &UncertainPointSet, resolution: usize) -> Result<f64> {
    pset.require_dim(2)?;
    if resolution < 2 {
        return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
    }
    let (lo, hi) = bounding_box(pset);
    let (grid_min, _, _) = grid_scan_min(pset, lo, hi, resolution);
    let dx = (hi[0] - lo[0]) / (resolution - 1) as f64;
    let dy = (hi[1] - lo[1]) / (resolution - 1) as f64;
    let slack = 0.5 * (dx * dx + dy * dy).sqrt();
    let bound = grid_min - slack;
    if bound <= 0.0 {
        return Err(Error::DegenerateInstance(format!(
            "grid-certified costhat bound is nonpositive ({:.3e}) at resolution {}; \
             refine the grid or fall back to the sampled-support mode",
            bound, resolution
        )));
    }
    Ok(bound)
}

fn cross(o: &Location, a: &Location, b: &Location) -> f64 {
    (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x())
}

/// Convex hull by monotone chain, counter-clockwise. Collinear inputs yield
/// the two extreme points; a single (possibly repeated) point yields one
/// vertex.
pub fn convex_hull(points: &[Location]) -> Vec<Location> {
    assert!(!points.is_empty(), "hull of empty set");
    let mut pts: Vec<Location> = points.to_vec();
    pts.sort_by(|a, b| a.x().total_cmp(&b.x()).then(a.y().total_cmp(&b.y())));
    pts.dedup_by(|a, b| a.x() == b.x() && a.y() == b.y());
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Location> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Location> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    if upper.is_empty() {
        // All points collinear: lower already ends at the far extreme.
        return vec![lower[0].clone(), lower.last().unwrap().clone()];
    }
    lower.extend(upper);
    lower
}

/// Inclusive point-in-hull test with a small relative tolerance so that
/// boundary points count as inside.
pub fn point_in_hull(hull: &[Location], p: &Location) -> bool {
    let scale = hull
        .iter()
        .flat_map(|v| v.coords())
        .chain(p.coords())
        .fold(1.0f64, |m, &c| m.max(c.abs()));
    let tol = scale * scale * 1e-12;
    match hull.len() {
        0 => false,
        1 => p.distance(&hull[0]) <= scale * 1e-12,
        2 => dist_point_segment(p, &hull[0], &hull[1]) <= scale * 1e-12,
        _ => (0..hull.len()).all(|i| {
            let j = (i + 1) % hull.len();
            cross(&hull[i], &hull[j], p) >= -tol
        }),
    }
}

fn dist_point_segment(p: &Location, a: &Location, b: &Location) -> f64 {
    let abx = b.x() - a.x();
    let aby = b.y() - a.y();
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x() - a.x()) * abx + (p.y() - a.y()) * aby) / len2).clamp(0.0, 1.0);
    let proj = Location::xy(a.x() + t * abx, a.y() + t * aby);
    p.distance(&proj)
}

/// The candidate set `S` for the 2D greedy cover: grid points of spacing
/// `beta` inside `CH(P_all)`, augmented with hull vertices and edge samples
/// (spacing `<= beta`) so that every point of the hull is within
/// `sqrt(2) * beta` of `S` even when the hull is thinner than a grid cell.
#[derive(Debug, Clone)]
pub struct Lattice2D {
    pub beta: f64,
    pub rho: f64,
    pub epsilon: f64,
    /// CCW hull of `P_all`.
    pub hull: Vec<Location>,
    /// All of `S`, sorted row-major (increasing y, then x).
    pub points: Vec<Location>,
    pub grid_count: usize,
    pub boundary_count: usize,
}

/// Default cap on the number of candidate lattice cells.
pub const DEFAULT_LATTICE_CAP: usize = 10_000_000;

pub fn build_lattice(
    pset: &UncertainPointSet,
    eps: f64,
    rho: f64,
    cell_cap: usize,
) -> Result<Lattice2D> {
    pset.require_dim(2)?;
    check_eps_2d(eps)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {}", rho)));
    }
    let beta = eps / (2.0 * std::f64::consts::SQRT_2 * (1.0 + eps)) * rho;
    let all: Vec<Location> = pset.all_locations().map(|(_, _, l)| l.clone()).collect();
    let hull = convex_hull(&all);

    let (lo, hi) = bounding_box(pset);
    let ix_lo = (lo[0] / beta).ceil() as i64;
    let ix_hi = (hi[0] / beta).floor() as i64;
    let iy_lo = (lo[1] / beta).ceil() as i64;
    let iy_hi = (hi[1] / beta).floor() as i64;
    let nx = (ix_hi - ix_lo + 1).max(0) as u128;
    let ny = (iy_hi - iy_lo + 1).max(0) as u128;
    if nx * ny > cell_cap as u128 {
        let area = (hi[0] - lo[0]).max(beta) * (hi[1] - lo[1]).max(beta);
        let beta_needed = (area / cell_cap as f64).sqrt();
        let rho_needed = beta_needed * 2.0 * std::f64::consts::SQRT_2 * (1.0 + eps) / eps;
        return Err(Error::ResourceLimit(format!(
            "lattice needs {} cells, exceeding the cap {}; increase epsilon or supply \
             rho >= {:.6e} (current rho {:.6e})",
            nx * ny,
            cell_cap,
            rho_needed,
            rho
        )));
    }

    let mut points: Vec<Location> = Vec::new();
    for iy in iy_lo..=iy_hi {
        let y = beta * iy as f64;
        for ix in ix_lo..=ix_hi {
            let x = beta * ix as f64;
            let p = Location::xy(x, y);
            if point_in_hull(&hull, &p) {
                points.push(p);
            }
        }
    }
    let grid_count = points.len();

    // Boundary snap: hull vertices plus edge samples at spacing <= beta.
    let mut boundary: Vec<Location> = Vec::new();
    if hull.len() == 1 {
        boundary.push(hull[0].clone());
    } else {
        let m = hull.len();
        for i in 0..m {
            let a = &hull[i];
            let b = &hull[(i + 1) % m];
            if m == 2 && i == 1 {
                // A segment hull has one edge, not two.
                boundary.push(a.clone());
                break;
            }
            let len = a.distance(b);
            let steps = (len / beta).ceil().max(1.0) as usize;
            for s in 0..steps {
                let t = s as f64 / steps as f64;
                boundary.push(Location::xy(
                    a.x() + t * (b.x() - a.x()),
                    a.y() + t * (b.y() - a.y()),
                ));
            }
        }
    }
    let boundary_count = boundary.len();
    points.extend(boundary);
    points.sort_by(|a, b| a.y().total_cmp(&b.y()).then(a.x().total_cmp(&b.x())));
    points.dedup_by(|a, b| a.x() == b.x() && a.y() == b.y());

    Ok(Lattice2D { beta, rho, epsilon: eps, hull, points, grid_count, boundary_count })
}

fn check_eps_2d(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1] for the 2D construction, got {}",
            eps
        )));
    }
    Ok(())
}

/// Greedy cover of the lattice, scanning in row-major order (fixed for
/// reproducibility; the constant-factor guarantee holds for any order).
/// Each chosen point deletes everything within its half radius
/// `eps/(2(1+eps)) * costhat(z)`.
pub fn build_support_2d(
    lattice: &Lattice2D,
    pset: &UncertainPointSet,
    eps: f64,
) -> Result<SupportSet> {
    pset.require_dim(2)?;
    check_eps_2d(eps)?;
    if eps != lattice.epsilon {
        return Err(Error::InvalidParameter(format!(
            "lattice was built for epsilon {}, requested {}",
            lattice.epsilon, eps
        )));
    }
    let s = &lattice.points;
    if s.is_empty() {
        return Err(Error::Internal("empty lattice".into()));
    }

    // Rows of equal y, each sorted by x, for radius queries.
    let mut rows: Vec<(f64, Vec<(f64, usize)>)> = Vec::new();
    for (idx, p) in s.iter().enumerate() {
        match rows.last_mut() {
            Some((y, row)) if *y == p.y() => row.push((p.x(), idx)),
            _ => rows.push((p.y(), vec![(p.x(), idx)])),
        }
    }

    let half_factor = eps / (2.0 * (1.0 + eps));
    let full_factor = eps / (1.0 + eps);
    let mut covered = vec![false; s.len()];
    let mut points: Vec<SupportPoint> = Vec::new();
    for idx in 0..s.len() {
        if covered[idx] {
            continue;
        }
        let z = &s[idx];
        let ch = costhat_eval(z, pset)?;
        let r = half_factor * ch;
        points.push(SupportPoint { location: z.clone(), costhat: ch, radius: full_factor * ch });
        let row_lo = rows.partition_point(|(y, _)| *y < z.y() - r);
        for (y, row) in &rows[row_lo..] {
            if *y > z.y() + r {
                break;
            }
            let dy = *y - z.y();
            let col_lo = row.partition_point(|(x, _)| *x < z.x() - r);
            for &(x, i) in &row[col_lo..] {
                if x > z.x() + r {
                    break;
                }
                let dx = x - z.x();
                if dx * dx + dy * dy <= r * r {
                    covered[i] = true;
                }
            }
        }
        debug_assert!(covered[idx], "chosen point must cover itself");
    }

    Ok(SupportSet {
        points,
        epsilon: eps,
        construction: Construction::Lattice2d { rho: lattice.rho, beta: lattice.beta },
    })
}

/// Full pipeline: certified rho, lattice, greedy cover.
pub fn build_support_2d_auto(
    pset: &UncertainPointSet,
    eps: f64,
    mode: RhoMode,
    cell_cap: usize,
) -> Result<SupportSet> {
    let rho = rho_lower_bound(pset, mode)?;
    let lattice = build_lattice(pset, eps, rho, cell_cap)?;
    build_support_2d(&lattice, pset, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{rng_from_seed, UncertainPoint};
    use rand::Rng;

    fn inst_2d(coords: &[Vec<(f64, f64)>]) -> UncertainPointSet {
        UncertainPointSet::new(
            coords
                .iter()
                .map(|locs| UncertainPoint {
                    locations: locs.iter().map(|&(x, y)| Location::xy(x, y)).collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn random_inst_2d(rng: &mut rand_chacha::ChaCha8Rng, n: usize, k: usize) -> UncertainPointSet {
        inst_2d(
            &(0..n)
                .map(|_| {
                    (0..k)
                        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn rho_degenerate_single_point() {
        // n=1: costhat vanishes at each candidate.
        let pset = inst_2d(&[vec![(0.0, 0.0), (1.0, 0.0)]]);
        assert!(matches!(
            rho_lower_bound(&pset, RhoMode::Fast),
            Err(Error::DegenerateInstance(_))
        ));
    }

    #[test]
    fn rho_hand_arithmetic() {
        // n=2, k=1 at (0,0) and (10,0): costhat at either location is 5.
        let pset = inst_2d(&[vec![(0.0, 0.0)], vec![(10.0, 0.0)]]);
        let fast = rho_lower_bound(&pset, RhoMode::Fast).unwrap();
        let improved = rho_lower_bound(&pset, RhoMode::Improved).unwrap();
        assert!((fast - 5.0 / 3.0).abs() < 1e-12);
        assert!((improved - 2.5).abs() < 1e-12);
        assert!(improved >= fast);
    }

    #[test]
    fn rho_bounds_hold_against_grid_scan() {
        let mut rng = rng_from_seed(77);
        for _ in 0..10 {
            let n = rng.gen_range(2..5);
            let k = rng.gen_range(1..4);
            let pset = random_inst_2d(&mut rng, n, k);
            let grid = crate::costhat::min_costhat(&pset, 128).unwrap();
            for mode in [RhoMode::Fast, RhoMode::Improved] {
                match rho_lower_bound(&pset, mode) {
                    Ok(rho) => assert!(
                        rho <= grid.value + 1e-9,
                        "rho {} exceeds grid upper bound {}",
                        rho,
                        grid.value
                    ),
                    Err(Error::DegenerateInstance(_)) => {}
                    Err(e) => panic!("unexpected error {:?}", e),
                }
            }
            let improved = rho_lower_bound(&pset, RhoMode::Improved);
            let fast = rho_lower_bound(&pset, RhoMode::Fast);
            if let (Ok(i), Ok(f)) = (improved, fast) {
                assert!(i >= f - 1e-15, "improved {} below fast {}", i, f);
            }
        }
    }

    #[test]
    fn rho_grid_certified_is_valid() {
        let mut rng = rng_from_seed(79);
        for _ in 0..5 {
            let n = rng.gen_range(3..6);
            let pset = random_inst_2d(&mut rng, n, 2);
            let certified = match rho_grid_certified(&pset, 96) {
                Ok(r) => r,
                Err(_) => continue,
            };
            // A much finer scan upper-bounds the true minimum; the certified
            // value must stay below it.
            let fine = crate::costhat::min_costhat(&pset, 512).unwrap();
            assert!(certified <= fine.value + 1e-12);
        }
    }

    #[test]
    fn hull_square_with_center() {
        let pts = vec![
            Location::xy(0.0, 0.0),
            Location::xy(1.0, 0.0),
            Location::xy(1.0, 1.0),
            Location::xy(0.0, 1.0),
            Location::xy(0.5, 0.5),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        // CCW orientation: positive signed area.
        let area: f64 = (0..hull.len())
            .map(|i| {
                let j = (i + 1) % hull.len();
                hull[i].x() * hull[j].y() - hull[j].x() * hull[i].y()
            })
            .sum();
        assert!(area > 0.0);
    }

    #[test]
    fn hull_collinear_is_segment() {
        let pts = vec![
            Location::xy(0.0, 0.0),
            Location::xy(1.0, 1.0),
            Location::xy(2.0, 2.0),
            Location::xy(3.0, 3.0),
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 2);
        assert_eq!((hull[0].x(), hull[1].x()), (0.0, 3.0));
    }

    #[test]
    fn hull_single_point() {
        let hull = convex_hull(&[Location::xy(2.0, 3.0), Location::xy(2.0, 3.0)]);
        assert_eq!(hull.len(), 1);
    }

    #[test]
    fn hull_contains_all_inputs() {
        let mut rng = rng_from_seed(83);
        let pts: Vec<Location> = (0..100)
            .map(|_| Location::xy(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
            .collect();
        let hull = convex_hull(&pts);
        for p in &pts {
            assert!(point_in_hull(&hull, p), "input point {:?} outside hull", p);
        }
    }

    #[test]
    fn lattice_unit_square_count() {
        // Hull = unit square, beta = 0.5 -> 3x3 grid points.
        let pset = inst_2d(&[
            vec![(0.0, 0.0)],
            vec![(1.0, 0.0)],
            vec![(1.0, 1.0)],
            vec![(0.0, 1.0)],
        ]);
        // beta = eps/(2*sqrt(2)*(1+eps)) * rho = 0.5 with eps = 1, rho = 2*sqrt(2)*2*0.5
        let rho = 0.5 * 2.0 * std::f64::consts::SQRT_2 * 2.0;
        let lat = build_lattice(&pset, 1.0, rho, DEFAULT_LATTICE_CAP).unwrap();
        assert!((lat.beta - 0.5).abs() < 1e-12);
        assert_eq!(lat.grid_count, 9);
    }

    #[test]
    fn lattice_grid_aligned_degenerate_hull() {
        let beta_target = 0.25;
        let loc = vec![(beta_target * 2.0, beta_target * 3.0)];
        let pset = inst_2d(&[loc.clone(), loc]);
        let rho = beta_target * 2.0 * std::f64::consts::SQRT_2 * 2.0;
        let lat = build_lattice(&pset, 1.0, rho, DEFAULT_LATTICE_CAP).unwrap();
        assert_eq!(lat.points.len(), 1);
        assert_eq!(lat.points[0].x(), 0.5);
        assert_eq!(lat.points[0].y(), 0.75);
    }

    #[test]
    fn lattice_cap_enforced() {
        let pset = inst_2d(&[vec![(0.0, 0.0)], vec![(1.0, 1.0)]]);
        let err = build_lattice(&pset, 0.1, 1e-6, 100);
        assert!(matches!(err, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn lattice_covers_hull_within_sqrt2_beta() {
        let mut rng = rng_from_seed(89);
        for trial in 0..5 {
            // Thin hulls included: squash y.
            let squash = if trial % 2 == 0 { 1.0 } else { 0.01 };
            let pset = inst_2d(
                &(0..4)
                    .map(|_| {
                        (0..2)
                            .map(|_| {
                                (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0) * squash)
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>(),
            );
            let rho = match rho_lower_bound(&pset, RhoMode::Improved) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let lat = build_lattice(&pset, 0.5, rho, DEFAULT_LATTICE_CAP).unwrap();
            let limit = std::f64::consts::SQRT_2 * lat.beta;
            // Random points of the hull via rejection sampling plus hull
            // vertices themselves.
            let (lo, hi) = bounding_box(&pset);
            let mut samples: Vec<Location> = lat.hull.clone();
            let mut tries = 0;
            while samples.len() < 200 && tries < 20_000 {
                tries += 1;
                let p = Location::xy(rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1]));
                if point_in_hull(&lat.hull, &p) {
                    samples.push(p);
                }
            }
            for p in &samples {
                let nearest = lat
                    .points
                    .iter()
                    .map(|s| s.distance(p))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    nearest <= limit * (1.0 + 1e-9),
                    "hull point {:?} at {} from S, limit {}",
                    p,
                    nearest,
                    limit
                );
            }
        }
    }

    #[test]
    fn cover_single_lattice_point() {
        let pset = inst_2d(&[vec![(0.0, 0.0)], vec![(1.0, 0.0)]]);
        let rho = rho_lower_bound(&pset, RhoMode::Improved).unwrap();
        // Force a tiny lattice by shrinking the hull to a segment: the
        // boundary samples stand in for grid points.
        let lat = build_lattice(&pset, 1.0, rho, DEFAULT_LATTICE_CAP).unwrap();
        let t = build_support_2d(&lat, &pset, 1.0).unwrap();
        assert!(!t.is_empty());
        assert!(t.len() <= lat.points.len());
    }

    #[test]
    fn cover_deletes_within_half_radius() {
        // Two candidates close together: one support point suffices.
        let pset = inst_2d(&[vec![(0.0, 0.0)], vec![(4.0, 0.0)], vec![(2.0, 3.0)]]);
        let rho = rho_lower_bound(&pset, RhoMode::Improved).unwrap();
        let lat = build_lattice(&pset, 1.0, rho, DEFAULT_LATTICE_CAP).unwrap();
        let t = build_support_2d(&lat, &pset, 1.0).unwrap();
        // Every lattice point is covered by some support point at half
        // radius; re-scan to confirm.
        for s in &lat.points {
            let covered = t
                .points
                .iter()
                .enumerate()
                .any(|(i, sp)| sp.location.distance(s) <= t.half_radius(i) + 1e-12);
            assert!(covered, "lattice point {:?} left uncovered", s);
        }
    }

    #[test]
    fn cover_separation_invariant() {
        let mut rng = rng_from_seed(97);
        let pset = random_inst_2d(&mut rng, 4, 2);
        if let Ok(t) = build_support_2d_auto(&pset, 0.5, RhoMode::Improved, DEFAULT_LATTICE_CAP) {
            for i in 0..t.len() {
                for j in (i + 1)..t.len() {
                    let d = t.points[i].location.distance(&t.points[j].location);
                    assert!(d > t.half_radius(i), "separation violated: {} <= {}", d, t.half_radius(i));
                }
            }
        }
    }

    #[test]
    fn cover_hull_coverage_chain() {
        let mut rng = rng_from_seed(101);
        let pset = random_inst_2d(&mut rng, 4, 2);
        let eps = 0.5;
        let rho = rho_lower_bound(&pset, RhoMode::Improved).unwrap();
        let lat = build_lattice(&pset, eps, rho, DEFAULT_LATTICE_CAP).unwrap();
        let t = build_support_2d(&lat, &pset, eps).unwrap();
        let (lo, hi) = bounding_box(&pset);
        let mut checked = 0;
        let mut tries = 0;
        while checked < 1000 && tries < 100_000 {
            tries += 1;
            let p = Location::xy(rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1]));
            if !point_in_hull(&lat.hull, &p) {
                continue;
            }
            checked += 1;
            let covered = t
                .points
                .iter()
                .any(|sp| sp.location.distance(&p) <= sp.radius * (1.0 + 1e-9));
            assert!(covered, "hull point {:?} not covered at full radius", p);
        }
        assert!(checked > 0);
    }

    #[test]
    fn cover_deterministic() {
        let mut rng = rng_from_seed(103);
        let pset = random_inst_2d(&mut rng, 3, 2);
        let a = build_support_2d_auto(&pset, 0.4, RhoMode::Improved, DEFAULT_LATTICE_CAP).unwrap();
        let b = build_support_2d_auto(&pset, 0.4, RhoMode::Improved, DEFAULT_LATTICE_CAP).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.location, y.location);
        }
    }

    #[test]
    fn eps_range_enforced_2d() {
        let pset = inst_2d(&[vec![(0.0, 0.0)], vec![(1.0, 0.0)]]);
        assert!(build_support_2d_auto(&pset, 1.5, RhoMode::Fast, DEFAULT_LATTICE_CAP).is_err());
        assert!(build_support_2d_auto(&pset, 0.0, RhoMode::Fast, DEFAULT_LATTICE_CAP).is_err());
    }
}
