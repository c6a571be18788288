//! File formats: instance (JSON or CSV), support set (JSON), distribution
//! (JSON).
//!
//! Floating-point values are serialized in shortest round-trip form, so a
//! write/read cycle reproduces every coordinate bit-exactly. Exact rational
//! weights additionally carry a `num/den` string of arbitrary precision.
//! Every output embeds the effective configuration under `meta`/`config`
//! for replay.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use umedian_core::model::{Location, UncertainPoint, UncertainPointSet};
use umedian_core::support1d::{Construction, SupportPoint, SupportSet};
use umedian_core::{Error, MedianDistribution, WeightKind};

use crate::CliError;

/// Instance file: `points[i][j]` is the j-th candidate location of the
/// i-th uncertain point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub dim: usize,
    pub n: usize,
    pub k: usize,
    pub points: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<InstanceMeta>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl InstanceFile {
    pub fn from_pset(pset: &UncertainPointSet, meta: Option<InstanceMeta>) -> Self {
        InstanceFile {
            dim: pset.dim(),
            n: pset.n_points(),
            k: pset.k_locations(),
            points: pset
                .points()
                .iter()
                .map(|p| p.locations.iter().map(|l| l.coords().to_vec()).collect())
                .collect(),
            meta,
        }
    }

    pub fn to_pset(&self) -> Result<UncertainPointSet, CliError> {
        if self.points.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "instance declares n = {} but carries {} points",
                self.n,
                self.points.len()
            ))
            .into());
        }
        for (i, locs) in self.points.iter().enumerate() {
            if locs.len() != self.k {
                return Err(Error::InvalidInput(format!(
                    "point {} has {} locations, expected k = {}",
                    i,
                    locs.len(),
                    self.k
                ))
                .into());
            }
            for (j, c) in locs.iter().enumerate() {
                if c.len() != self.dim {
                    return Err(Error::InvalidInput(format!(
                        "location ({},{}) has {} coordinates, expected dim = {}",
                        i,
                        j,
                        c.len(),
                        self.dim
                    ))
                    .into());
                }
            }
        }
        let points = self
            .points
            .iter()
            .map(|locs| UncertainPoint {
                locations: locs.iter().map(|c| Location::new(c.clone())).collect(),
            })
            .collect();
        Ok(UncertainPointSet::new(points)?)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().map(|e| e.eq_ignore_ascii_case("csv")).unwrap_or(false)
}

pub fn write_instance(path: &Path, file: &InstanceFile) -> Result<(), CliError> {
    if is_csv(path) {
        fs::write(path, instance_to_csv(file)?)?;
    } else {
        fs::write(path, serde_json::to_string_pretty(file)?)?;
    }
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<(UncertainPointSet, InstanceFile), CliError> {
    let text = fs::read_to_string(path)?;
    let file = if is_csv(path) {
        instance_from_csv(&text)?
    } else {
        serde_json::from_str(&text)?
    };
    let pset = file.to_pset()?;
    Ok((pset, file))
}

/// CSV layout: header `i,j,x` (1D) or `i,j,x,y` (2D); indices 1-based; the
/// grid `i in 1..n x j in 1..k` must be complete with no duplicates.
pub fn instance_to_csv(file: &InstanceFile) -> Result<String, CliError> {
    if file.dim > 2 {
        return Err(Error::InvalidInput("CSV supports dim 1 or 2".into()).into());
    }
    let mut out = String::from(if file.dim == 1 { "i,j,x\n" } else { "i,j,x,y\n" });
    for (i, locs) in file.points.iter().enumerate() {
        for (j, c) in locs.iter().enumerate() {
            out.push_str(&format!("{},{}", i + 1, j + 1));
            for v in c {
                out.push_str(&format!(",{}", v));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn instance_from_csv(text: &str) -> Result<InstanceFile, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty CSV".into()))?
        .trim();
    let dim = match header {
        "i,j,x" => 1,
        "i,j,x,y" => 2,
        other => {
            return Err(Error::InvalidInput(format!(
                "unrecognized CSV header {:?}; expected \"i,j,x\" or \"i,j,x,y\"",
                other
            ))
            .into())
        }
    };
    let mut rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 2 + dim {
            return Err(Error::InvalidInput(format!(
                "CSV row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                2 + dim
            ))
            .into());
        }
        let parse_idx = |s: &str, what: &str| -> Result<usize, CliError> {
            s.parse::<usize>().map_err(|_| {
                CliError::from(Error::InvalidInput(format!(
                    "CSV row {}: bad {} index {:?}",
                    lineno + 2,
                    what,
                    s
                )))
            })
        };
        let i = parse_idx(fields[0], "point")?;
        let j = parse_idx(fields[1], "location")?;
        if i == 0 || j == 0 {
            return Err(Error::InvalidInput(format!(
                "CSV row {}: indices are 1-based",
                lineno + 2
            ))
            .into());
        }
        let coords = fields[2..]
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    CliError::from(Error::InvalidInput(format!(
                        "CSV row {}: bad coordinate {:?}",
                        lineno + 2,
                        s
                    )))
                })
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        rows.push((i - 1, j - 1, coords));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("CSV carries no locations".into()).into());
    }
    let n = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let k = rows.iter().map(|r| r.1).max().unwrap() + 1;
    let mut grid: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; k]; n];
    for (i, j, c) in rows {
        if grid[i][j].replace(c).is_some() {
            return Err(Error::InvalidInput(format!(
                "CSV defines location ({},{}) twice",
                i + 1,
                j + 1
            ))
            .into());
        }
    }
    let mut points = Vec::with_capacity(n);
    for (i, row) in grid.into_iter().enumerate() {
        let mut locs = Vec::with_capacity(k);
        for (j, cell) in row.into_iter().enumerate() {
            locs.push(cell.ok_or_else(|| {
                CliError::from(Error::InvalidInput(format!(
                    "CSV is missing location ({},{}); the i x j grid must be complete",
                    i + 1,
                    j + 1
                )))
            })?);
        }
        points.push(locs);
    }
    Ok(InstanceFile { dim, n, k, points, meta: None })
}

/// Support-set file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportFile {
    pub epsilon: f64,
    pub points: Vec<SupportPointFile>,
    /// `"greedy1d" | "lattice2d" | "sampled"`.
    pub construction: String,
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportPointFile {
    pub loc: Vec<f64>,
    pub costhat: f64,
    pub radius: f64,
}

impl SupportFile {
    pub fn from_support(t: &SupportSet, config: Option<serde_json::Value>) -> Self {
        let (construction, rho, beta) = match &t.construction {
            Construction::Greedy1d => ("greedy1d".to_string(), None, None),
            Construction::Lattice2d { rho, beta } => {
                ("lattice2d".to_string(), Some(*rho), Some(*beta))
            }
            Construction::Sampled => ("sampled".to_string(), None, None),
        };
        SupportFile {
            epsilon: t.epsilon,
            points: t
                .points
                .iter()
                .map(|sp| SupportPointFile {
                    loc: sp.location.coords().to_vec(),
                    costhat: sp.costhat,
                    radius: sp.radius,
                })
                .collect(),
            construction,
            rho,
            beta,
            config,
        }
    }

    pub fn to_support(&self) -> Result<SupportSet, CliError> {
        let construction = match self.construction.as_str() {
            "greedy1d" => Construction::Greedy1d,
            "lattice2d" => Construction::Lattice2d {
                rho: self.rho.unwrap_or(0.0),
                beta: self.beta.unwrap_or(0.0),
            },
            "sampled" => Construction::Sampled,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown construction {:?}",
                    other
                ))
                .into())
            }
        };
        Ok(SupportSet {
            points: self
                .points
                .iter()
                .map(|p| SupportPoint {
                    location: Location::new(p.loc.clone()),
                    costhat: p.costhat,
                    radius: p.radius,
                })
                .collect(),
            epsilon: self.epsilon,
            construction,
        })
    }
}

pub fn write_support(path: &Path, file: &SupportFile) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(file)?)?;
    Ok(())
}

pub fn read_support(path: &Path) -> Result<(SupportSet, SupportFile), CliError> {
    let file: SupportFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let t = file.to_support()?;
    Ok((t, file))
}

/// Distribution file: the principal output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionFile {
    /// `"exact" | "mc" | "sampled"`.
    pub mode: String,
    pub support: Vec<DistEntryFile>,
    pub uncovered_mass: f64,
    pub seed: Option<u64>,
    pub rounds: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistEntryFile {
    pub loc: Vec<f64>,
    pub weight: f64,
    /// Exact mode only: arbitrary-precision `num/den`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_rational: Option<String>,
}

impl DistributionFile {
    pub fn from_distribution(
        dist: &MedianDistribution,
        mode: &str,
        seed: Option<u64>,
        rounds: Option<u64>,
        config: Option<serde_json::Value>,
    ) -> Self {
        DistributionFile {
            mode: mode.to_string(),
            support: dist
                .entries
                .iter()
                .map(|e| DistEntryFile {
                    loc: e.location.coords().to_vec(),
                    weight: e.weight,
                    weight_rational: match dist.kind {
                        WeightKind::ExactRational => e
                            .exact
                            .as_ref()
                            .map(|r| format!("{}/{}", r.numer(), r.denom())),
                        WeightKind::Floating => None,
                    },
                })
                .collect(),
            uncovered_mass: dist.uncovered_mass,
            seed,
            rounds,
            config,
        }
    }
}

pub fn write_distribution(path: &Path, file: &DistributionFile) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(file)?)?;
    Ok(())
}
