//! Command-line front end: density and diagram exports, moment and
//! covariance evaluation, reproducible sampling, and the verification suite.
//!
//! Every command reads an optional JSON config (unknown keys rejected) with
//! flag overrides for seed, threads, and output path, and writes CSV for
//! data and JSON for reports. All numbers are serialized with 17 significant
//! digits so identical runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use corners::contour::QuadratureSettings;
use corners::diagrams::LimitShape;
use corners::finite_moments::{joint_moment_finite, ModelParams, MomentSpec};
use corners::formulas::{self, DiffOrdering, LevelHeight, ScaledParams};
use corners::jacobi_roots::{corner_roots, root_interlacing_check};
use corners::sampler::{sample_corners, sample_top_level, GibbsSettings, McmcSettings, RngStream};
use corners::verify;

#[derive(Parser)]
#[command(
    name = "corners",
    about = "Numerical laboratory for the beta-Jacobi corners process",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON config file for the subcommand (unknown keys rejected).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replica and grid parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Skip the Monte Carlo verification criteria.
    #[arg(long, global = true)]
    fast: bool,
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Limit density on a graded grid: CSV (u, density, mass weight).
    Density,
    /// Limiting and finite-size moments: JSON rows.
    Moments,
    /// One covariance formula evaluation: JSON.
    Covariance,
    /// Diagram or limit-shape export: CSV (u, value).
    Diagram,
    /// Corner root systems: CSV (index, root).
    Roots,
    /// Sample dump: CSV (replica, level, index, value).
    Sample,
    /// Run the verification suite; exit 0 on success, 1 on failure.
    Verify,
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Loads the subcommand config, Default when no file is given. Any config
/// problem is a usage error (exit 2).
fn load_config<T: Default + for<'de> Deserialize<'de>>(
    path: &Option<PathBuf>,
) -> Result<T, String> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", p.display()))
        }
    }
}

fn write_artifact(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

// -------------------------------------------------------------------------
// density

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DensityConfig {
    alpha_hat: f64,
    m_hat: f64,
    theta: f64,
    n_hat: f64,
    grid: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            alpha_hat: 1.0,
            m_hat: 2.0,
            theta: 1.0,
            n_hat: 1.0,
            grid: 512,
        }
    }
}

fn cmd_density(cli: &Cli) -> Result<ExitCode, String> {
    let cfg: DensityConfig = load_config(&cli.config)?;
    let p = ScaledParams::new(cfg.alpha_hat, cfg.m_hat, cfg.theta).map_err(|e| e.to_string())?;
    let h = LevelHeight::new(cfg.n_hat).map_err(|e| e.to_string())?;
    let sup = formulas::density_support(&p, h);
    if formulas::DensitySupport::near_degenerate(&p, h) {
        eprintln!(
            "warning: m_hat and n_hat are nearly equal; the density develops a near-pole at \
             the upper support edge and quadratures converge slowly"
        );
    }

    let mut csv = String::from("u,phi_second,half_mass_weight\n");
    let (g1, g2) = (sup.gamma1, sup.gamma2);
    let ds = std::f64::consts::FRAC_PI_2 / cfg.grid.max(1) as f64;
    let mut mass = sup.atom_mass;
    for j in 0..cfg.grid {
        // midpoints of the graded variable
        let s = (j as f64 + 0.5) * ds;
        let u = g1 + (g2 - g1) * s.sin().powi(2);
        let phi2 = formulas::limit_density(u, &p, h).map_err(|e| e.to_string())?;
        // (1/2) phi'' du in the graded variable: the square root absorbs the
        // edge singularities, leaving a smooth midpoint rule.
        let weight = phi2 * ((g2 - u) * (u - g1)).sqrt() * ds;
        mass += weight;
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(u),
            fmt_f64(phi2),
            fmt_f64(weight)
        ));
    }
    write_artifact(&cli.out, &csv)?;

    let meta = serde_json::json!({
        "gamma1": sup.gamma1,
        "gamma2": sup.gamma2,
        "atom_mass": sup.atom_mass,
        "mass_check": mass,
    });
    let meta_text = serde_json::to_string_pretty(&meta).unwrap();
    match &cli.out {
        Some(p) => fs::write(sidecar(p, ".meta.json"), meta_text + "\n")
            .map_err(|e| format!("cannot write metadata: {e}"))?,
        None => eprintln!("{meta_text}"),
    }
    Ok(ExitCode::SUCCESS)
}

// -------------------------------------------------------------------------
// moments

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MomentsConfig {
    alpha_hat: f64,
    m_hat: f64,
    theta: f64,
    n_hat: f64,
    k_max: u32,
    /// Optional finite-size block.
    model: Option<ModelParams>,
    levels: Option<Vec<u32>>,
    powers: Option<Vec<u32>>,
    diff: Option<Vec<bool>>,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        MomentsConfig {
            alpha_hat: 1.0,
            m_hat: 2.0,
            theta: 1.0,
            n_hat: 1.0,
            k_max: 4,
            model: None,
            levels: None,
            powers: None,
            diff: None,
        }
    }
}

fn cmd_moments(cli: &Cli) -> Result<ExitCode, String> {
    let cfg: MomentsConfig = load_config(&cli.config)?;
    let p = ScaledParams::new(cfg.alpha_hat, cfg.m_hat, cfg.theta).map_err(|e| e.to_string())?;
    let h = LevelHeight::new(cfg.n_hat).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for k in 0..=cfg.k_max {
        let v = formulas::first_moment_diff_limit(k, &p, h).map_err(|e| e.to_string())?;
        rows.push(serde_json::json!({
            "kind": "limit_diff_mean",
            "k": k,
            "n_hat": cfg.n_hat,
            "value": v,
        }));
    }
    if let (Some(model), Some(levels), Some(powers)) = (cfg.model, &cfg.levels, &cfg.powers) {
        // deserialized parameters bypass the constructor; re-validate
        let model =
            ModelParams::new(model.alpha, model.m, model.theta).map_err(|e| e.to_string())?;
        let diff = cfg
            .diff
            .clone()
            .unwrap_or_else(|| vec![false; levels.len()]);
        let spec = MomentSpec::new(levels.clone(), powers.clone(), diff.clone())
            .map_err(|e| e.to_string())?;
        let v = joint_moment_finite(&spec, &model, &QuadratureSettings::default())
            .map_err(|e| e.to_string())?;
        rows.push(serde_json::json!({
            "kind": "finite_joint_moment",
            "levels": levels,
            "powers": powers,
            "diff": diff,
            "value": v,
        }));
    }
    let text = serde_json::to_string_pretty(&rows).unwrap() + "\n";
    write_artifact(&cli.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

// -------------------------------------------------------------------------
// covariance

#[derive(Debug, Clone, Copy, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum CovKind {
    SingleLevel,
    DiffSameLevel,
    DiffDistinctLevels,
    DiffVsLevelInner,
    DiffVsLevelOuter,
    Gff1d,
    WeightedAverage,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum WeightFn {
    One,
    OneMinusY,
    Y,
}

impl WeightFn {
    fn eval(self, y: f64) -> f64 {
        match self {
            WeightFn::One => 1.0,
            WeightFn::OneMinusY => 1.0 - y,
            WeightFn::Y => y,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CovarianceConfig {
    alpha_hat: f64,
    m_hat: f64,
    theta: f64,
    kind: CovKind,
    k1: u32,
    k2: u32,
    n_hat_1: f64,
    n_hat_2: f64,
    weight_1: WeightFn,
    weight_2: WeightFn,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig {
            alpha_hat: 1.0,
            m_hat: 2.0,
            theta: 1.0,
            kind: CovKind::DiffSameLevel,
            k1: 1,
            k2: 1,
            n_hat_1: 1.0,
            n_hat_2: 1.0,
            weight_1: WeightFn::OneMinusY,
            weight_2: WeightFn::OneMinusY,
        }
    }
}

fn cmd_covariance(cli: &Cli) -> Result<ExitCode, String> {
    let cfg: CovarianceConfig = load_config(&cli.config)?;
    let p = ScaledParams::new(cfg.alpha_hat, cfg.m_hat, cfg.theta).map_err(|e| e.to_string())?;
    let h1 = LevelHeight::new(cfg.n_hat_1).map_err(|e| e.to_string())?;
    let h2 = LevelHeight::new(cfg.n_hat_2).map_err(|e| e.to_string())?;
    let (k1, k2) = (cfg.k1, cfg.k2);
    let value = match cfg.kind {
        CovKind::SingleLevel => formulas::cov_single_level(k1, k2, h1, h2, &p),
        CovKind::DiffSameLevel => formulas::cov_diff_same_level(k1, k2, h1, &p),
        CovKind::DiffDistinctLevels => formulas::cov_diff_distinct_levels(k1, k2, h1, h2, &p),
        CovKind::DiffVsLevelInner => {
            formulas::cov_diff_vs_level(k1, k2, h1, h2, &p, DiffOrdering::DiffInner)
        }
        CovKind::DiffVsLevelOuter => {
            formulas::cov_diff_vs_level(k1, k2, h1, h2, &p, DiffOrdering::DiffOuter)
        }
        CovKind::Gff1d => formulas::gff_cov_1d(k1, k2, h1, h2, &p),
        CovKind::WeightedAverage => formulas::cov_weighted_average(
            k1,
            k2,
            |y| cfg.weight_1.eval(y),
            |y| cfg.weight_2.eval(y),
            &p,
        ),
    }
    .map_err(|e| e.to_string())?;
    let report = serde_json::json!({
        "kind": cfg.kind,
        "k1": k1,
        "k2": k2,
        "n_hat_1": cfg.n_hat_1,
        "n_hat_2": cfg.n_hat_2,
        "value": value,
    });
    write_artifact(
        &cli.out,
        &(serde_json::to_string_pretty(&report).unwrap() + "\n"),
    )?;
    Ok(ExitCode::SUCCESS)
}

// -------------------------------------------------------------------------
// diagram

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DiagramConfig {
    /// "roots" for the polynomial-root diagram, "limit" for the limit shape.
    source: String,
    // roots source
    m: u32,
    n: u32,
    alpha: f64,
    // limit source
    alpha_hat: f64,
    m_hat: f64,
    theta: f64,
    n_hat: f64,
    grid: usize,
    u_min: f64,
    u_max: f64,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        DiagramConfig {
            source: "roots".into(),
            m: 20,
            n: 10,
            alpha: 10.0,
            alpha_hat: 1.0,
            m_hat: 2.0,
            theta: 1.0,
            n_hat: 1.0,
            grid: 512,
            u_min: -0.1,
            u_max: 1.2,
        }
    }
}

fn cmd_diagram(cli: &Cli) -> Result<ExitCode, String> {
    let cfg: DiagramConfig = load_config(&cli.config)?;
    let mut csv = String::from("u,value\n");
    let eval: Box<dyn Fn(f64) -> f64> = match cfg.source.as_str() {
        "roots" => {
            let (ok, diagram) =
                root_interlacing_check(cfg.m, cfg.n, cfg.alpha).map_err(|e| e.to_string())?;
            if !ok {
                eprintln!("warning: root interlacing check failed at these parameters");
            }
            Box::new(move |u| diagram.value(u))
        }
        "limit" => {
            let p = ScaledParams::new(cfg.alpha_hat, cfg.m_hat, cfg.theta)
                .map_err(|e| e.to_string())?;
            let h = LevelHeight::new(cfg.n_hat).map_err(|e| e.to_string())?;
            let shape = LimitShape::new(&p, h).map_err(|e| e.to_string())?;
            Box::new(move |u| shape.value(u))
        }
        other => {
            return Err(format!(
                "unknown diagram source {other:?} (use roots|limit)"
            ))
        }
    };
    for j in 0..=cfg.grid {
        let u = cfg.u_min + (cfg.u_max - cfg.u_min) * j as f64 / cfg.grid.max(1) as f64;
        csv.push_str(&format!("{},{}\n", fmt_f64(u), fmt_f64(eval(u))));
    }
    write_artifact(&cli.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

// -------------------------------------------------------------------------
// roots

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RootsConfig {
    m: u32,
    n: u32,
    alpha: f64,
}

impl Default for RootsConfig {
    fn default() -> Self {
        RootsConfig {
            m: 20,
            n: 10,
            alpha: 10.0,
        }
    }
}

fn cmd_roots(cli: &Cli) -> Result<ExitCode, String> {
    let cfg: RootsConfig = load_config(&cli.config)?;
    let roots = corner_roots(cfg.m, cfg.n, cfg.alpha).map_err(|e| e.to_string())?;
    let mut csv = String::from("index,root\n");
    for (i, r) in roots.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, fmt_f64(*r)));
    }
    write_artifact(&cli.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

// -------------------------------------------------------------------------
// sample

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SampleConfig {
    model: ModelParams,
    top_level: u32,
    bottom_level: u32,
    replicas: usize,
    seed: u64,
    mcmc: McmcSettings,
    gibbs: GibbsSettings,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            model: ModelParams::new(2.0, 4, 1.0).unwrap(),
            top_level: 4,
            bottom_level: 1,
            replicas: 8,
            seed: 1,
            mcmc: McmcSettings::default(),
            gibbs: GibbsSettings::default(),
        }
    }
}

fn cmd_sample(cli: &Cli) -> Result<ExitCode, String> {
    let mut cfg: SampleConfig = load_config(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    // deserialized parameters bypass the constructor; re-validate
    ModelParams::new(cfg.model.alpha, cfg.model.m, cfg.model.theta).map_err(|e| e.to_string())?;
    let stream = RngStream::new(cfg.seed, 0);
    let rows = corners::parallel::map_indexed(cfg.replicas, |r| {
        let mut rng = stream.substream(r as u64).rng();
        sample_corners(
            cfg.top_level,
            cfg.bottom_level,
            &cfg.model,
            &mut rng,
            &cfg.mcmc,
            &cfg.gibbs,
        )
        .map(|s| (r, s))
    });
    let mut csv = String::from("replica,level,index,value\n");
    for row in rows {
        let (r, s) = row.map_err(|e| e.to_string())?;
        s.validate_interlacing().map_err(|e| e.to_string())?;
        for n in (cfg.bottom_level..=cfg.top_level).rev() {
            let cfg_level = s.level(n).unwrap();
            for (i, v) in cfg_level.values().iter().enumerate() {
                csv.push_str(&format!("{r},{n},{},{}\n", i + 1, fmt_f64(*v)));
            }
        }
    }
    write_artifact(&cli.out, &csv)?;

    // chain diagnostics from one extra top-level draw on a dedicated stream
    let mut rng = stream.substream(cfg.replicas as u64).rng();
    let (_, diag) = sample_top_level(cfg.top_level, &cfg.model, &mut rng, &cfg.mcmc);
    let diag_text = serde_json::to_string_pretty(&diag).unwrap();
    match &cli.out {
        Some(p) => fs::write(sidecar(p, ".diag.json"), diag_text + "\n")
            .map_err(|e| format!("cannot write diagnostics: {e}"))?,
        None => eprintln!("{diag_text}"),
    }
    Ok(ExitCode::SUCCESS)
}

// -------------------------------------------------------------------------
// verify

fn cmd_verify(cli: &Cli) -> Result<ExitCode, String> {
    let mut cfg: verify::VerifyConfig = load_config(&cli.config)?;
    if cli.fast {
        cfg.fast = true;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = verify::run(&cfg);
    let mut stdout = std::io::stdout().lock();
    for c in &report.criteria {
        writeln!(stdout, "{}", c.format_line()).ok();
        for d in &c.details {
            writeln!(stdout, "    {d}").ok();
        }
    }
    let json = serde_json::to_string_pretty(&report).unwrap() + "\n";
    if let Some(p) = &cli.out {
        fs::write(p, &json).map_err(|e| format!("cannot write report: {e}"))?;
    }
    if report.all_passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let result = match cli.cmd {
        Cmd::Density => cmd_density(&cli),
        Cmd::Moments => cmd_moments(&cli),
        Cmd::Covariance => cmd_covariance(&cli),
        Cmd::Diagram => cmd_diagram(&cli),
        Cmd::Roots => cmd_roots(&cli),
        Cmd::Sample => cmd_sample(&cli),
        Cmd::Verify => cmd_verify(&cli),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
