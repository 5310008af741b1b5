//! Monte Carlo estimation of moments, covariances, and joint cumulants over
//! set partitions; the empirical side of every law-of-large-numbers and
//! central-limit comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_moments::{ModelParams, MomentSpec};
use crate::formulas::{self, LevelHeight, ScaledParams};
use crate::parallel;
use crate::sampler::{sample_corners, GibbsSettings, McmcSettings, RngStream};

/// A Monte Carlo estimate with a batch-means standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub autocorrelation_time: f64,
}

/// Number of batches used for batch-means standard errors.
const BATCHES: usize = 32;

fn batch_means(vals: &[f64]) -> McEstimate {
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
    let b = BATCHES.min(n.max(1));
    let per = n / b;
    let bm: Vec<f64> = (0..b)
        .map(|j| vals[j * per..(j + 1) * per].iter().sum::<f64>() / per as f64)
        .collect();
    let bmean = bm.iter().sum::<f64>() / b as f64;
    let bvar = bm.iter().map(|v| (v - bmean).powi(2)).sum::<f64>() / (b as f64 - 1.0).max(1.0);
    let se = (bvar / b as f64).sqrt();
    let act = if var > 0.0 {
        (bvar * per as f64 / var).max(0.0)
    } else {
        1.0
    };
    McEstimate {
        mean,
        std_error: se,
        n_samples: n,
        autocorrelation_time: act,
    }
}

/// Applies a function to each batch and returns (overall value, batch se).
fn batch_statistic<F: Fn(&[usize]) -> f64>(n: usize, stat: F) -> (f64, f64) {
    let all: Vec<usize> = (0..n).collect();
    let overall = stat(&all);
    let b = BATCHES.min(n.max(1));
    let per = n / b;
    let vals: Vec<f64> = (0..b).map(|j| stat(&all[j * per..(j + 1) * per])).collect();
    let mean = vals.iter().sum::<f64>() / b as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0).max(1.0);
    (overall, (var / b as f64).sqrt())
}

/// All unordered set partitions of `{0, .., h-1}`, enumerated through
/// restricted-growth strings.
pub fn set_partitions(h: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if h == 0 {
        return out;
    }
    let mut rgs = vec![0usize; h];
    loop {
        let t = rgs.iter().max().copied().unwrap_or(0) + 1;
        let mut blocks = vec![Vec::new(); t];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(blocks);
        // next restricted-growth string
        let mut i = h;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let cap = rgs[..i].iter().max().copied().unwrap_or(0) + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for v in rgs.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Bell numbers, for checking the partition enumeration.
pub fn bell_number(h: usize) -> u64 {
    // Bell triangle
    let mut row = vec![1u64];
    for _ in 1..h {
        let mut next = vec![*row.last().unwrap()];
        for &v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    if h == 0 {
        1
    } else {
        *row.last().unwrap()
    }
}

/// Joint cumulant of the selected columns through the partition formula:
/// `sum over partitions (-1)^(t-1) (t-1)! prod_blocks E[prod block]`.
/// Indices may repeat, so `subset = [i, i, i]` gives the third cumulant of
/// column `i`.
pub fn joint_cumulant(columns: &[Vec<f64>], subset: &[usize]) -> f64 {
    joint_cumulant_rows(columns, subset, None)
}

fn joint_cumulant_rows(columns: &[Vec<f64>], subset: &[usize], rows: Option<&[usize]>) -> f64 {
    let h = subset.len();
    assert!(h >= 1, "need at least one index");
    let n_rows = columns[0].len();
    let mean_of_block = |block: &[usize]| -> f64 {
        let total: f64 = match rows {
            Some(rs) => rs
                .iter()
                .map(|&r| {
                    block
                        .iter()
                        .map(|&pos| columns[subset[pos]][r])
                        .product::<f64>()
                })
                .sum(),
            None => (0..n_rows)
                .map(|r| {
                    block
                        .iter()
                        .map(|&pos| columns[subset[pos]][r])
                        .product::<f64>()
                })
                .sum(),
        };
        let count = rows.map(|rs| rs.len()).unwrap_or(n_rows);
        total / count as f64
    };
    let mut acc = 0.0;
    for partition in set_partitions(h) {
        let t = partition.len();
        let sign = if (t - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let fact: f64 = (1..t).map(|i| i as f64).product();
        let prod: f64 = partition.iter().map(|b| mean_of_block(b)).product();
        acc += sign * fact * prod;
    }
    acc
}

/// Samples independent replicas and evaluates the product of (optionally
/// differenced) power-sum observables from a joint-moment request.
pub fn mc_moment(
    spec: &MomentSpec,
    params: &ModelParams,
    replicas: usize,
    stream: RngStream,
    mcmc: &McmcSettings,
    gibbs: &GibbsSettings,
) -> Result<McEstimate> {
    let top = *spec.levels().iter().max().unwrap();
    let bottom = spec
        .levels()
        .iter()
        .zip(spec.diff_flags())
        .map(|(&n, &d)| if d && n > 1 { n - 1 } else { n })
        .min()
        .unwrap();
    let vals: Vec<Result<f64>> = parallel::map_indexed(replicas, |r| {
        let mut rng = stream.substream(r as u64).rng();
        let s = sample_corners(top, bottom, params, &mut rng, mcmc, gibbs)?;
        let mut prod = 1.0;
        for ((&n, &k), &d) in spec
            .levels()
            .iter()
            .zip(spec.powers())
            .zip(spec.diff_flags())
        {
            let v = if d { s.p_k_diff(n, k) } else { s.p_k(n, k) }
                .ok_or_else(|| Error::Invalid(format!("level {n} missing from sample")))?;
            prod *= v;
        }
        Ok(prod)
    });
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(batch_means(&vals))
}

/// One comparison line: an empirical estimate against an analytic target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportLine {
    pub statistic: String,
    pub estimate: f64,
    pub target: f64,
    pub se: f64,
    pub z: f64,
    pub flagged: bool,
}

impl ReportLine {
    fn new(statistic: impl Into<String>, estimate: f64, target: f64, se: f64) -> Self {
        let z = if se > 0.0 {
            (estimate - target) / se
        } else {
            f64::INFINITY
        };
        ReportLine {
            statistic: statistic.into(),
            estimate,
            target,
            se,
            z,
            flagged: !(se > 0.0) || !z.is_finite(),
        }
    }
}

/// Configuration of a central-limit comparison run at one scaling size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CltConfig {
    /// Scaling parameter L; the run uses `alpha = alpha_hat L`,
    /// `M = m_hat L`, levels `L` and `L/2`.
    pub l: u32,
    pub alpha_hat: f64,
    pub m_hat: f64,
    pub theta: f64,
    /// Power-sum degree for the difference statistics.
    pub k: u32,
    pub replicas: usize,
    pub seed: u64,
    #[serde(default)]
    pub mcmc: McmcSettings,
    #[serde(default)]
    pub gibbs: GibbsSettings,
    /// Include the weighted-average line (walks every level, more samples of
    /// the conditional chain).
    pub weighted_line: bool,
}

/// Per-replica observables backing all comparison lines.
pub struct CltPool {
    pub diff_top: Vec<f64>,
    pub diff_half: Vec<f64>,
    pub plain_top: Vec<f64>,
    pub weighted: Vec<f64>,
    pub l: u32,
}

/// Draws the replica pool for a comparison run: full stacks from level L
/// down to 1, with the level-difference, plain, and weighted-average
/// observables extracted per replica.
pub fn draw_clt_pool(cfg: &CltConfig) -> Result<CltPool> {
    let l = cfg.l;
    let params = ModelParams::new(
        cfg.alpha_hat * l as f64,
        (cfg.m_hat * l as f64).round() as u32,
        cfg.theta,
    )?;
    let half = l / 2;
    let k = cfg.k;
    let stream = RngStream::new(cfg.seed, 0);
    let rows: Vec<Result<[f64; 4]>> = parallel::map_indexed(cfg.replicas, |r| {
        let mut rng = stream.substream(r as u64).rng();
        let s = sample_corners(l, 1, &params, &mut rng, &cfg.mcmc, &cfg.gibbs)?;
        let diff_top = s.p_k_diff(l, k).unwrap();
        let diff_half = s.p_k_diff(half, k).unwrap();
        let plain_top = s.p_k(l, k).unwrap();
        let weighted: f64 = (1..=l)
            .map(|n| {
                let g = 1.0 - n as f64 / l as f64;
                g * s.p_k_diff(n, k).unwrap()
            })
            .sum();
        Ok([diff_top, diff_half, plain_top, weighted])
    });
    let mut pool = CltPool {
        diff_top: Vec::with_capacity(cfg.replicas),
        diff_half: Vec::with_capacity(cfg.replicas),
        plain_top: Vec::with_capacity(cfg.replicas),
        weighted: Vec::with_capacity(cfg.replicas),
        l,
    };
    for row in rows {
        let [a, b, c, d] = row?;
        pool.diff_top.push(a);
        pool.diff_half.push(b);
        pool.plain_top.push(c);
        pool.weighted.push(d);
    }
    Ok(pool)
}

fn variance_of(rows: &[usize], vals: &[f64]) -> f64 {
    let n = rows.len() as f64;
    let mean: f64 = rows.iter().map(|&r| vals[r]).sum::<f64>() / n;
    rows.iter().map(|&r| (vals[r] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)
}

fn covariance_of(rows: &[usize], a: &[f64], b: &[f64]) -> f64 {
    let n = rows.len() as f64;
    let ma: f64 = rows.iter().map(|&r| a[r]).sum::<f64>() / n;
    let mb: f64 = rows.iter().map(|&r| b[r]).sum::<f64>() / n;
    rows.iter().map(|&r| (a[r] - ma) * (b[r] - mb)).sum::<f64>() / (n - 1.0).max(1.0)
}

/// Runs the empirical-vs-analytic comparison lines at the configured size:
/// scaled variances and covariances of difference statistics against the
/// contour-integral covariances, the weighted-average variance, the
/// independence of difference and plain statistics, and a third cumulant
/// that must vanish at the Gaussian order.
pub fn clt_comparison(cfg: &CltConfig) -> Result<Vec<ReportLine>> {
    let pool = draw_clt_pool(cfg)?;
    let p = ScaledParams::new(cfg.alpha_hat, cfg.m_hat, cfg.theta)?;
    let k = cfg.k;
    let l = cfg.l as f64;
    let n = cfg.replicas;
    let h_top = LevelHeight::new(1.0)?;
    let h_half = LevelHeight::new(cfg.l as f64 / 2.0 / l)?;
    let mut lines = Vec::new();

    // (i) L * Var[diff at top] vs the same-level covariance formula.
    let target_var = formulas::cov_diff_same_level(k, k, h_top, &p)?;
    let (v, se) = batch_statistic(n, |rows| l * variance_of(rows, &pool.diff_top));
    lines.push(ReportLine::new(
        format!("L*Var[P{k} diff at N=L]"),
        v,
        target_var,
        se,
    ));

    // (ii) L^2 * Cov[diff at L/2, diff at L] vs the distinct-heights formula.
    let target_cov = formulas::cov_diff_distinct_levels(k, k, h_half, h_top, &p)?;
    let (cv, cse) = batch_statistic(n, |rows| {
        l * l * covariance_of(rows, &pool.diff_half, &pool.diff_top)
    });
    lines.push(ReportLine::new(
        format!("L^2*Cov[P{k} diff at N=L/2, N=L]"),
        cv,
        target_cov,
        cse,
    ));

    // (iii) Var of the weighted average vs the triangle-integral formula.
    if cfg.weighted_line {
        let g = |y: f64| 1.0 - y;
        let target_w = formulas::cov_weighted_average(k, k, g, g, &p)?;
        let (wv, wse) = batch_statistic(n, |rows| variance_of(rows, &pool.weighted));
        lines.push(ReportLine::new(
            format!("Var[sum g(n/L) P{k} diff], g=1-y"),
            wv,
            target_w,
            wse,
        ));
    }

    // (iv) third cumulant of the sqrt(L)-scaled diff: zero for a Gaussian.
    let scaled: Vec<f64> = pool.diff_top.iter().map(|d| l.sqrt() * d).collect();
    let cols = [scaled];
    let (c3, c3se) = batch_statistic(n, |rows| joint_cumulant_rows(&cols, &[0, 0, 0], Some(rows)));
    lines.push(ReportLine::new(
        format!("third cumulant of sqrt(L) P{k} diff"),
        c3,
        0.0,
        c3se,
    ));

    // (v) independence: correlation between the diff and plain statistics.
    let (corr, corr_se) = {
        let all: Vec<usize> = (0..n).collect();
        let c = covariance_of(&all, &pool.diff_top, &pool.plain_top);
        let va = variance_of(&all, &pool.diff_top);
        let vb = variance_of(&all, &pool.plain_top);
        (c / (va * vb).sqrt(), 1.0 / (n as f64).sqrt())
    };
    lines.push(ReportLine::new(
        format!("Corr[P{k} diff, P{k} plain] at N=L"),
        corr,
        0.0,
        corr_se,
    ));

    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn partition_counts_match_bell_numbers() {
        for h in 1..=6 {
            assert_eq!(set_partitions(h).len() as u64, bell_number(h), "h={h}");
        }
        assert_eq!(bell_number(3), 5);
        assert_eq!(bell_number(4), 15);
        assert_eq!(bell_number(5), 52);
    }

    #[test]
    fn pair_cumulant_is_covariance() {
        let a = vec![1.0, 2.0, 4.0, 3.0, 5.0];
        let b = vec![2.0, 1.0, 3.0, 5.0, 4.0];
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / n;
        let cols = [a, b];
        assert_relative_eq!(joint_cumulant(&cols, &[0, 1]), cov, epsilon = 1e-12);
    }

    #[test]
    fn third_cumulant_of_gaussian_data_vanishes() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(97);
        let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
        let n = 60_000;
        let a: Vec<f64> = (0..n)
            .map(|_| rand_distr::Distribution::sample(&normal, &mut rng))
            .collect();
        let b: Vec<f64> = (0..n)
            .map(|_| rand_distr::Distribution::sample(&normal, &mut rng))
            .collect();
        let c: Vec<f64> = (0..n)
            .map(|_| rand_distr::Distribution::sample(&normal, &mut rng))
            .collect();
        let cols = [a, b, c];
        // independent streams: mixed cumulant vanishes
        let k3 = joint_cumulant(&cols, &[0, 1, 2]);
        assert!(k3.abs() < 3.0 / (n as f64).sqrt() * 3.0, "k3 = {k3}");
        // single stream: third cumulant of a Gaussian vanishes too
        let k3s = joint_cumulant(&cols, &[0, 0, 0]);
        assert!(k3s.abs() < 15.0 / (n as f64).sqrt() * 3.0, "k3s = {k3s}");
    }

    proptest! {
        #[test]
        fn cumulants_are_shift_invariant(
            shift in -50.0f64..50.0,
            seed in 0u64..1000,
        ) {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let n = 64;
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let shifted: Vec<f64> = a.iter().map(|v| v + shift).collect();
            let cols = [a, b, c];
            let cols_shifted = [shifted, cols[1].clone(), cols[2].clone()];
            let k = joint_cumulant(&cols, &[0, 1, 2]);
            let ks = joint_cumulant(&cols_shifted, &[0, 1, 2]);
            prop_assert!((k - ks).abs() < 1e-10 * (1.0 + k.abs()), "{} vs {}", k, ks);
        }
    }

    #[test]
    fn zero_power_moment_has_no_variance() {
        let params = ModelParams::new(1.0, 4, 1.0).unwrap();
        let spec = MomentSpec::plain(3, 0);
        let est = mc_moment(
            &spec,
            &params,
            64,
            RngStream::new(3, 0),
            &Default::default(),
            &Default::default(),
        )
        .unwrap();
        assert_relative_eq!(est.mean, 3.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mc_moment_matches_beta_mean() {
        let params = ModelParams::new(1.0, 2, 1.0).unwrap();
        let spec = MomentSpec::plain(1, 1);
        let est = mc_moment(
            &spec,
            &params,
            3000,
            RngStream::new(29, 0),
            &Default::default(),
            &Default::default(),
        )
        .unwrap();
        let exact = 1.0 / 3.0;
        assert!(
            (est.mean - exact).abs() < 3.0 * est.std_error + 0.005,
            "mean {} vs {exact} se {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn mc_moment_matches_finite_formula_small_case() {
        // E[P_2(x^3)] at M=10, alpha=1, theta=1 against the contour formula.
        let params = ModelParams::new(1.0, 10, 1.0).unwrap();
        let spec = MomentSpec::plain(3, 2);
        let exact = crate::finite_moments::joint_moment_finite(
            &spec,
            &params,
            &crate::contour::QuadratureSettings::default(),
        )
        .unwrap();
        let est = mc_moment(
            &spec,
            &params,
            3000,
            RngStream::new(31, 0),
            &Default::default(),
            &Default::default(),
        )
        .unwrap();
        assert!(
            (est.mean - exact).abs() < 3.0 * est.std_error + 0.01,
            "mean {} vs {exact} se {}",
            est.mean,
            est.std_error
        );
    }
}
