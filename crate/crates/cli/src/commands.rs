//! Subcommand implementations. Argument structs double as the clap
//! surface; `main` only parses and dispatches.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;

use umedian_core::estimate::stability_gap;
use umedian_core::generators::{
    experiment_min_costhat_1d, experiment_min_costhat_2d, gen_instance_1d, gen_instance_2d,
    mix_seed, C0Family1D, DiskFamily2D, Experiment1dConfig, Experiment2dConfig,
};
use umedian_core::oracle::{coverage_audit, enumerate_binned, enumerate_point_weights, DEFAULT_CAP};
use umedian_core::support1d::build_support_1d;
use umedian_core::support2d::{build_support_2d_auto, RhoMode, DEFAULT_LATTICE_CAP};
use umedian_core::weights_exact::{aggregate_weights, point_weights_1d};
use umedian_core::weights_mc::{mc_weights, sampled_support, McConfig};
use umedian_core::Error;

use crate::formats::{
    read_instance, read_support, write_distribution, write_instance, write_support,
    DistributionFile, InstanceFile, InstanceMeta, SupportFile,
};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Uniform,
    Capped,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Dimension of the instance (1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    /// Number of uncertain points.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Candidate locations per point.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Location family.
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Range length for 1D families.
    #[arg(long = "L")]
    pub l: Option<f64>,
    /// Disk radius for 2D families.
    #[arg(long = "R")]
    pub r: Option<f64>,
    /// Density cap for the capped families.
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; `.csv` switches to the CSV layout.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let n = args.n as usize;
    let k = args.k as usize;
    let (pset, family_desc) = match args.dim {
        1 => {
            let l = args.l.ok_or_else(|| {
                CliError::from(Error::InvalidParameter("--L is required for --dim 1".into()))
            })?;
            let family = match args.family {
                FamilyKind::Uniform => {
                    if args.c0.is_some() {
                        return Err(Error::InvalidParameter(
                            "--c0 only applies to the capped family".into(),
                        )
                        .into());
                    }
                    C0Family1D::uniform(l)?
                }
                FamilyKind::Capped => {
                    let c0 = args.c0.ok_or_else(|| {
                        CliError::from(Error::InvalidParameter(
                            "--c0 is required for the capped family".into(),
                        ))
                    })?;
                    C0Family1D::capped_two_level(l, c0)?
                }
            };
            let desc = format!(
                "{:?} on [0,{}] with c0 = {}",
                args.family,
                family.l(),
                family.c0()
            );
            (gen_instance_1d(n, k, &family, args.seed)?, desc)
        }
        2 => {
            let r = args.r.ok_or_else(|| {
                CliError::from(Error::InvalidParameter("--R is required for --dim 2".into()))
            })?;
            let family = match args.family {
                FamilyKind::Uniform => {
                    if args.c0.is_some() {
                        return Err(Error::InvalidParameter(
                            "--c0 only applies to the capped family".into(),
                        )
                        .into());
                    }
                    DiskFamily2D::uniform(r)?
                }
                FamilyKind::Capped => {
                    let c0 = args.c0.ok_or_else(|| {
                        CliError::from(Error::InvalidParameter(
                            "--c0 is required for the capped family".into(),
                        ))
                    })?;
                    DiskFamily2D::capped(r, c0)?
                }
            };
            let desc = format!(
                "{:?} on disk R = {} with c0 = {}",
                args.family,
                family.radius(),
                family.c0()
            );
            (gen_instance_2d(n, k, &family, args.seed)?, desc)
        }
        _ => unreachable!("clap range"),
    };
    let file = InstanceFile::from_pset(
        &pset,
        Some(InstanceMeta { seed: Some(args.seed), family: Some(family_desc) }),
    );
    write_instance(&args.out, &file)?;
    println!(
        "wrote instance: dim {}, n {}, k {} -> {}",
        file.dim,
        file.n,
        file.k,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhoModeArg {
    Fast,
    Improved,
}

#[derive(Debug, Args)]
pub struct SupportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Cost lower-bound mode (2D only).
    #[arg(long, value_enum, default_value = "improved")]
    pub rho_mode: RhoModeArg,
    /// Cap on candidate lattice cells (2D only).
    #[arg(long, default_value_t = DEFAULT_LATTICE_CAP)]
    pub lattice_cap: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_support(args: &SupportArgs) -> Result<(), CliError> {
    let (pset, _) = read_instance(&args.input)?;
    let t = match pset.dim() {
        1 => build_support_1d(&pset, args.epsilon)?,
        2 => {
            let mode = match args.rho_mode {
                RhoModeArg::Fast => RhoMode::Fast,
                RhoModeArg::Improved => RhoMode::Improved,
            };
            build_support_2d_auto(&pset, args.epsilon, mode, args.lattice_cap).map_err(|e| {
                match e {
                    Error::DegenerateInstance(msg) => Error::DegenerateInstance(format!(
                        "{}; run `umedian weights --mode sampled` for this instance",
                        msg
                    ))
                    .into(),
                    other => CliError::from(other),
                }
            })?
        }
        d => {
            return Err(Error::InvalidInput(format!(
                "support construction handles dim 1 or 2, instance has dim {}",
                d
            ))
            .into())
        }
    };
    let config = json!({
        "input": args.input.display().to_string(),
        "epsilon": args.epsilon,
        "rho_mode": format!("{:?}", args.rho_mode),
        "lattice_cap": args.lattice_cap,
    });
    let file = SupportFile::from_support(&t, Some(config));
    write_support(&args.out, &file)?;
    println!(
        "wrote support: |T| = {} ({}) -> {}",
        t.len(),
        file.construction,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsMode {
    Exact,
    Mc,
    Sampled,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Support file (required for exact and mc modes).
    #[arg(long)]
    pub support: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: WeightsMode,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Explicit round count; derived from epsilon/delta when absent.
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long, default_value_t = 4.0)]
    pub vc_constant: f64,
    /// Inner L1-median accuracy; defaults to epsilon/10.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Escalate excessive uncovered mass into an error.
    #[arg(long, default_value_t = false)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_weights(args: &WeightsArgs) -> Result<(), CliError> {
    let (pset, _) = read_instance(&args.input)?;
    let config = json!({
        "input": args.input.display().to_string(),
        "support": args.support.as_ref().map(|p| p.display().to_string()),
        "mode": format!("{:?}", args.mode),
        "epsilon": args.epsilon,
        "delta": args.delta,
        "rounds": args.rounds,
        "vc_constant": args.vc_constant,
        "phi": args.phi,
        "seed": args.seed,
        "strict": args.strict,
    });
    let file = match args.mode {
        WeightsMode::Exact => {
            if pset.dim() != 1 {
                return Err(Error::InvalidParameter(
                    "exact weights require dimension 1: in higher dimensions the median set \
                     itself can hold one point per traversal, so exact weights would take at \
                     least k^n time; use --mode mc or --mode sampled"
                        .into(),
                )
                .into());
            }
            let support_path = args.support.as_ref().ok_or_else(|| {
                CliError::from(Error::InvalidParameter("--support is required for exact mode".into()))
            })?;
            let (t, _) = read_support(support_path)?;
            let w = point_weights_1d(&pset)?;
            let dist = aggregate_weights(&pset, &w, &t)?;
            DistributionFile::from_distribution(&dist, "exact", None, None, Some(config))
        }
        WeightsMode::Mc => {
            let support_path = args.support.as_ref().ok_or_else(|| {
                CliError::from(Error::InvalidParameter("--support is required for mc mode".into()))
            })?;
            let (t, _) = read_support(support_path)?;
            let cfg = mc_config(args);
            cfg.validate(pset.dim())?;
            let rounds = cfg.effective_rounds(pset.dim())?;
            let dist = mc_weights(&pset, &t, &cfg)?;
            if dist.uncovered_mass > cfg.miss_threshold {
                eprintln!(
                    "warning: uncovered mass {:.4} exceeds the threshold {:.4}",
                    dist.uncovered_mass, cfg.miss_threshold
                );
            }
            DistributionFile::from_distribution(
                &dist,
                "mc",
                Some(args.seed),
                Some(rounds as u64),
                Some(config),
            )
        }
        WeightsMode::Sampled => {
            let cfg = mc_config(args);
            cfg.validate(pset.dim())?;
            let rounds = cfg.effective_rounds(pset.dim())?;
            let (_, dist) = sampled_support(&pset, &cfg)?;
            DistributionFile::from_distribution(
                &dist,
                "sampled",
                Some(args.seed),
                Some(rounds as u64),
                Some(config),
            )
        }
    };
    write_distribution(&args.out, &file)?;
    println!(
        "wrote distribution: mode {}, {} support points, uncovered mass {} -> {}",
        file.mode,
        file.support.len(),
        file.uncovered_mass,
        args.out.display()
    );
    Ok(())
}

fn mc_config(args: &WeightsArgs) -> McConfig {
    let mut cfg = McConfig::new(args.epsilon, args.delta, args.seed);
    cfg.rounds = args.rounds.map(|r| r as usize);
    cfg.vc_constant = args.vc_constant;
    if let Some(phi) = args.phi {
        cfg.phi = phi;
    }
    cfg.strict = args.strict;
    cfg
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let (pset, _) = read_instance(&args.input)?;
    let report = stability_gap(&pset, args.epsilon)?;
    println!("m_T    = {}", report.m_t);
    println!("m_P    = {}", report.m_p);
    println!("gap    = {}", report.gap);
    println!("bound  = {}  (eps * costhat(m_P))", report.bound);
    println!("|T|    = {}", report.support_size);
    if let Some(out) = &args.out {
        let payload = json!({
            "m_t": report.m_t,
            "m_p": report.m_p,
            "gap": report.gap,
            "bound": report.bound,
            "support_size": report.support_size,
            "config": { "input": args.input.display().to_string(), "epsilon": args.epsilon },
        });
        std::fs::write(out, serde_json::to_string_pretty(&payload)?)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Inner L1-median accuracy for 2D; defaults to epsilon/10.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Enumeration cap on k^n.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: u64,
    /// Audit an existing support instead of building one.
    #[arg(long)]
    pub support: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<(), CliError> {
    let (pset, _) = read_instance(&args.input)?;
    let phi = args.phi.unwrap_or(args.epsilon / 10.0);
    let t = match &args.support {
        Some(path) => read_support(path)?.0,
        None => match pset.dim() {
            1 => build_support_1d(&pset, args.epsilon)?,
            2 => build_support_2d_auto(&pset, args.epsilon, RhoMode::Improved, DEFAULT_LATTICE_CAP)?,
            d => {
                return Err(Error::InvalidInput(format!(
                    "oracle handles dim 1 or 2, instance has dim {}",
                    d
                ))
                .into())
            }
        },
    };

    let mut checks = Vec::new();
    if pset.dim() == 1 {
        let dp = point_weights_1d(&pset)?;
        let oracle = enumerate_point_weights(&pset, args.cap)?;
        let weights_equal = dp.counts() == oracle.counts();
        println!(
            "point weights vs enumeration: {}",
            if weights_equal { "exact match" } else { "MISMATCH" }
        );
        checks.push(("point_weights_exact", weights_equal));

        // The aggregate comparison assumes a support built for this
        // instance; skip it when auditing an arbitrary user-supplied file.
        if args.support.is_none() {
            let agg = aggregate_weights(&pset, &dp, &t)?;
            let binned = enumerate_binned(&pset, &t, args.epsilon, 0.0, args.cap)?;
            let binned_equal = binned.missed.is_empty()
                && agg
                    .entries
                    .iter()
                    .zip(&binned.distribution.entries)
                    .all(|(a, b)| a.exact == b.exact);
            println!(
                "aggregated weights vs enumeration bins: {}",
                if binned_equal { "exact match" } else { "MISMATCH" }
            );
            checks.push(("binned_weights_exact", binned_equal));
        }
    } else {
        let binned = enumerate_binned(&pset, &t, args.epsilon, phi, args.cap)?;
        println!(
            "enumeration bins: {} support points, {} uncovered traversals",
            binned.distribution.len(),
            binned.missed.len()
        );
        checks.push(("binned_no_misses", binned.missed.is_empty()));
    }

    let audit = coverage_audit(&pset, &t, args.epsilon, phi, args.cap)?;
    println!(
        "coverage audit: {} traversals, {} violations, max slack ratio {:.6}",
        audit.traversals,
        audit.failures.len(),
        audit.max_ratio
    );
    checks.push(("coverage", audit.passed()));

    if let Some(out) = &args.out {
        let payload = json!({
            "traversals": audit.traversals,
            "max_slack_ratio": audit.max_ratio,
            "checks": checks.iter().map(|(name, ok)| json!({"name": name, "passed": ok})).collect::<Vec<_>>(),
            "config": {
                "input": args.input.display().to_string(),
                "epsilon": args.epsilon,
                "phi": phi,
                "cap": args.cap,
                "support": args.support.as_ref().map(|p| p.display().to_string()),
            },
        });
        std::fs::write(out, serde_json::to_string_pretty(&payload)?)?;
    }

    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(Error::AuditFailure(format!("oracle check {:?} failed", name)).into());
    }
    println!("oracle: all checks passed");
    Ok(())
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 2)]
    pub k: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Instance size; 0 picks the smallest admissible value.
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    match args.dim {
        1 => bench_1d(args),
        2 => bench_2d(args),
        _ => unreachable!("clap range"),
    }
}

fn bench_1d(args: &BenchArgs) -> Result<(), CliError> {
    let k = args.k as usize;
    let family = C0Family1D::uniform(1.0)?;
    let cfg = Experiment1dConfig {
        n: args.n,
        k,
        family: family.clone(),
        trials: args.trials,
        delta: args.delta,
        epsilon: args.epsilon,
        seed: args.seed,
    };
    let report = experiment_min_costhat_1d(&cfg)?;
    println!(
        "min-costhat experiment: n = {}, k = {}, {} trials, pass rate {:.3} (threshold {:.6})",
        report.n, report.k, report.trials, report.pass_rate, report.threshold
    );

    // Support size vs epsilon on a reference instance.
    let reference = gen_instance_1d(500, k, &family, mix_seed(args.seed, 1_000_001))?;
    let mut sweep = String::from("epsilon,support_size\n");
    for &eps in &[0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0] {
        let t = build_support_1d(&reference, eps)?;
        sweep.push_str(&format!("{},{}\n", eps, t.len()));
    }
    std::fs::write(args.out_dir.join("t_size_vs_eps.csv"), sweep)?;

    // Monte-Carlo max-bin error vs round count on a small exact-checkable
    // instance, averaged over 10 seeds.
    let small = gen_instance_1d(5, k, &family, mix_seed(args.seed, 1_000_002))?;
    let t = build_support_1d(&small, args.epsilon)?;
    let w = point_weights_1d(&small)?;
    let exact = aggregate_weights(&small, &w, &t)?;
    let mut mc_csv = String::from("rounds,mean_max_bin_error\n");
    for &rounds in &[100usize, 200, 400, 800, 1600, 3200, 6400] {
        let mut total = 0.0;
        for rep in 0..10u64 {
            let mut cfg = McConfig::new(args.epsilon, args.delta, mix_seed(args.seed, 2_000_000 + rep));
            cfg.rounds = Some(rounds);
            let mc = mc_weights(&small, &t, &cfg)?;
            let max_err = exact
                .entries
                .iter()
                .zip(&mc.entries)
                .map(|(a, b)| (a.weight - b.weight).abs())
                .fold(0.0f64, f64::max);
            total += max_err;
        }
        mc_csv.push_str(&format!("{},{}\n", rounds, total / 10.0));
    }
    std::fs::write(args.out_dir.join("mc_error_vs_n.csv"), mc_csv)?;

    let mut hist = String::from("trial,min_costhat,passed,support_size,alpha\n");
    for (i, r) in report.records.iter().enumerate() {
        hist.push_str(&format!(
            "{},{},{},{},{}\n",
            i, r.min_costhat, r.passed, r.support_size, r.alpha
        ));
    }
    std::fs::write(args.out_dir.join("min_costhat_trials.csv"), hist)?;

    let payload = json!({
        "experiment": "min_costhat_1d",
        "n": report.n,
        "k": report.k,
        "trials": report.trials,
        "delta": report.delta,
        "epsilon": report.epsilon,
        "threshold": report.threshold,
        "required_n": report.required_n,
        "pass_count": report.pass_count,
        "pass_rate": report.pass_rate,
        "size_bound_ok": report.records.iter().all(|r| r.size_bound_ok),
        "config": { "seed": args.seed },
    });
    std::fs::write(args.out_dir.join("report.json"), serde_json::to_string_pretty(&payload)?)?;
    println!("wrote {}", args.out_dir.join("report.json").display());
    Ok(())
}

fn bench_2d(args: &BenchArgs) -> Result<(), CliError> {
    let k = args.k as usize;
    let cfg = Experiment2dConfig {
        n: args.n,
        k,
        family: DiskFamily2D::uniform(1.0)?,
        trials: args.trials,
        delta: args.delta,
        eta: 0.0, // default R/(8 pi (k+1))
        grid: 64,
        support_epsilon: None,
        lattice_cap: DEFAULT_LATTICE_CAP,
        seed: args.seed,
    };
    let report = experiment_min_costhat_2d(&cfg)?;
    println!(
        "disk min-costhat experiment: n = {}, k = {}, {} trials, pass rate {:.3} (threshold {:.6})",
        report.n, report.k, report.trials, report.pass_rate, report.threshold
    );

    let mut hist = String::from("trial,grid_min,passed\n");
    for (i, r) in report.records.iter().enumerate() {
        hist.push_str(&format!("{},{},{}\n", i, r.grid_min, r.passed));
    }
    std::fs::write(args.out_dir.join("min_costhat_hist.csv"), hist)?;

    let payload = json!({
        "experiment": "min_costhat_2d",
        "n": report.n,
        "k": report.k,
        "trials": report.trials,
        "delta": report.delta,
        "eta": report.eta,
        "threshold": report.threshold,
        "required_n": report.required_n,
        "pass_count": report.pass_count,
        "pass_rate": report.pass_rate,
        "config": { "seed": args.seed },
    });
    std::fs::write(args.out_dir.join("report.json"), serde_json::to_string_pretty(&payload)?)?;
    println!("wrote {}", args.out_dir.join("report.json").display());
    Ok(())
}

/// Shared helper used by tests: path with a given extension?
pub fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().map(|e| e.eq_ignore_ascii_case(ext)).unwrap_or(false)
}
