//! End-to-end verification: every analytic identity and Monte Carlo
//! comparison the crate is expected to satisfy, with one pass/fail result
//! per criterion. The same runner backs the `verify` CLI subcommand and the
//! acceptance test suite.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::contour::QuadratureSettings;
use crate::diagrams::LimitShape;
use crate::error::Result;
use crate::finite_moments::{
    dimension_reduction_corollary, dimension_reduction_lhs, dimension_reduction_rhs,
    joint_moment_finite, ModelParams, MomentSpec, RationalFn,
};
use crate::formulas::{self, DiffOrdering, LevelHeight, ScaledParams};
use crate::jacobi_roots::root_interlacing_check;
use crate::parallel;
use crate::sampler::{sample_corners, GibbsSettings, McmcSettings, RngStream};
use crate::stats;

/// Controls for the verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Skip the Monte Carlo criteria (minutes of sampling).
    pub fast: bool,
    /// Replicas per Monte Carlo pool.
    pub replicas: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            fast: false,
            replicas: 4000,
            seed: 20240801,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub seconds: f64,
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn format_line(&self) -> String {
        let status = if self.skipped {
            "skip"
        } else if self.passed {
            "PASS"
        } else {
            "FAIL"
        };
        format!(
            "criterion {:02} [{}] {} ({:.1}s)",
            self.id, status, self.name, self.seconds
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    /// True when every non-skipped criterion passed.
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.skipped || c.passed)
    }
}

struct Check {
    id: u8,
    name: &'static str,
    passed: bool,
    details: Vec<String>,
}

impl Check {
    fn new(id: u8, name: &'static str) -> Self {
        Check {
            id,
            name,
            passed: true,
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, detail: String) {
        if !ok {
            self.passed = false;
        }
        self.details
            .push(format!("[{}] {detail}", if ok { "ok" } else { "FAIL" }));
    }

    fn finish(self, t0: Instant) -> CriterionResult {
        CriterionResult {
            id: self.id,
            name: self.name.to_string(),
            passed: self.passed,
            skipped: false,
            seconds: t0.elapsed().as_secs_f64(),
            details: self.details,
        }
    }
}

fn skipped(id: u8, name: &str) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        passed: true,
        skipped: true,
        seconds: 0.0,
        details: vec!["skipped in fast mode".into()],
    }
}

fn catch(id: u8, name: &'static str, t0: Instant, r: Result<CriterionResult>) -> CriterionResult {
    match r {
        Ok(c) => c,
        Err(e) => CriterionResult {
            id,
            name: name.to_string(),
            passed: false,
            skipped: false,
            seconds: t0.elapsed().as_secs_f64(),
            details: vec![format!("[FAIL] error: {e}")],
        },
    }
}

// -------------------------------------------------------------------------
// analytic criteria

fn criterion_dimension_reduction(seed: u64) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(1, "dimension reduction identity");
    let poles = [0.2, -0.4];
    // The absolute tolerance must sit above the roundoff floor of the
    // four-dimensional tensor sums (a few 1e-12 with cancellation); the
    // redraw filter below keeps |rhs| large enough that the relative target
    // 1e-9 still has headroom.
    let settings = QuadratureSettings::default().with_tols(1e-11, 3e-11);
    let mut rng = RngStream::new(seed, 900).rng();
    let draws_per_n = [(2usize, 8usize), (3, 8), (4, 4)];
    for (n, draws) in draws_per_n {
        for d in 0..draws {
            let fs: Vec<RationalFn> = loop {
                let fs: Vec<RationalFn> = (0..n)
                    .map(|_| RationalFn::random(&poles, &mut rng))
                    .collect();
                let rhs = dimension_reduction_rhs(&fs, &poles, &settings)?;
                if rhs.norm() > 0.1 {
                    break fs;
                }
            };
            let lhs = dimension_reduction_lhs(&fs, &poles, &settings)?;
            let rhs = dimension_reduction_rhs(&fs, &poles, &settings)?;
            let rel = (lhs - rhs).norm() / rhs.norm();
            check.require(
                rel < 1e-9,
                format!("n={n} draw {d}: relative error {rel:.2e}"),
            );
        }
    }
    // corollary cases
    let mut rng = RngStream::new(seed, 901).rng();
    for (n, s) in [(2usize, 1usize), (2, 2), (3, 1), (3, 2)] {
        let (lhs, rhs) = loop {
            let f = RationalFn::random(&poles, &mut rng);
            let gs: Vec<RationalFn> = (0..s)
                .map(|_| RationalFn::random(&poles, &mut rng))
                .collect();
            let (lhs, rhs) = dimension_reduction_corollary(&f, &gs, n, &poles, &settings)?;
            if rhs.norm() > 0.1 {
                break (lhs, rhs);
            }
        };
        let rel = (lhs - rhs).norm() / rhs.norm();
        check.require(
            rel < 1e-9,
            format!("corollary n={n}, s={s}: relative error {rel:.2e}"),
        );
    }
    Ok(check.finish(t0))
}

fn criterion_moment_identity() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(2, "contour moment vs density moment");
    for (a, m, n) in [(1.0, 2.0, 1.0), (1.0, 1.0, 1.0), (1.0, 1.0, 2.0)] {
        let p = ScaledParams::new(a, m, 1.0)?;
        let h = LevelHeight::new(n)?;
        for k in 0..=8u32 {
            let lhs = formulas::first_moment_diff_limit(k, &p, h)?;
            let rhs = formulas::limit_density_moment(k, &p, h)?;
            let err = (lhs - rhs).abs();
            check.require(
                err < 1e-6,
                format!("(a,m,n)=({a},{m},{n}) k={k}: |contour - density| = {err:.2e}"),
            );
        }
    }
    Ok(check.finish(t0))
}

fn criterion_support_endpoints() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(3, "limit density support endpoints");
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let sup = formulas::density_support(&p, LevelHeight::new(1.0)?);
    let e1 = (sup.gamma1 - 0.0669872981).abs();
    let e2 = (sup.gamma2 - 0.93301270189).abs();
    check.require(
        e1 < 1e-8,
        format!("gamma1 = {:.12} (err {e1:.2e})", sup.gamma1),
    );
    check.require(
        e2 < 1e-8,
        format!("gamma2 = {:.12} (err {e2:.2e})", sup.gamma2),
    );
    Ok(check.finish(t0))
}

fn criterion_finite_size_exactness() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(4, "finite-size first moment exactness");
    let params = ModelParams::new(2.0, 5, 1.5)?;
    let spec = MomentSpec::plain(1, 1);
    let v = joint_moment_finite(&spec, &params, &QuadratureSettings::default())?;
    let err = (v - 2.0 / 7.0).abs();
    check.require(
        err < 1e-10,
        format!("E[P_1(x^1)] = {v:.15} vs 2/7 (err {err:.2e})"),
    );
    Ok(check.finish(t0))
}

fn criterion_gff_consistency() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(5, "field pullback covariance consistency");
    let h = LevelHeight::new(1.0)?;
    for (a, m) in [(1.0, 2.0), (1.0, 1.0)] {
        let p = ScaledParams::new(a, m, 1.0)?;
        for k1 in 1..=3u32 {
            for k2 in k1..=3u32 {
                let g = formulas::gff_cov_1d(k1, k2, h, h, &p)?;
                let c = formulas::cov_single_level(k1 + 1, k2 + 1, h, h, &p)?;
                let target = c / (((k1 + 1) * (k2 + 1)) as f64);
                let err = (g - target).abs();
                check.require(
                    err < 1e-8,
                    format!("(a,m)=({a},{m}) k=({k1},{k2}): |gff - scaled| = {err:.2e}"),
                );
            }
        }
    }
    Ok(check.finish(t0))
}

fn criterion_symmetrization() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(6, "difference covariance symmetrization");
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let h = LevelHeight::new(1.0)?;
    for (k1, k2) in [(1u32, 1u32), (1, 2), (2, 1), (2, 2)] {
        let i = formulas::cov_diff_vs_level(k1, k2, h, h, &p, DiffOrdering::DiffInner)?;
        let ii = formulas::cov_diff_vs_level(k1, k2, h, h, &p, DiffOrdering::DiffOuter)?;
        let same = formulas::cov_diff_same_level(k1, k2, h, &p)?;
        let err = ((i - ii) - same).abs();
        check.require(
            err < 1e-8,
            format!("k=({k1},{k2}): |assembled - direct| = {err:.2e}"),
        );
    }
    Ok(check.finish(t0))
}

fn criterion_jacobi_roots() -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(12, "orthogonal polynomial root interlacing and convergence");
    let mut failures = 0usize;
    for m in 1..=30u32 {
        for n in 1..=30u32 {
            for alpha in [1.0, 2.0, 5.0] {
                let (ok, _) = root_interlacing_check(m, n, alpha)?;
                if !ok {
                    failures += 1;
                }
            }
        }
    }
    check.require(
        failures == 0,
        format!("interlacing failures: {failures} of 2700 grid points"),
    );

    // diagram convergence of the root systems to the limit shape
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let shape = LimitShape::new(&p, LevelHeight::new(1.0)?)?;
    let grid: Vec<f64> = (0..=1500).map(|i| -0.1 + 1.3 * i as f64 / 1500.0).collect();
    let mut dists = Vec::new();
    for l in [10u32, 20, 40] {
        let (_, diagram) = root_interlacing_check(2 * l, l, l as f64)?;
        let d = diagram.sup_distance_to(|u| shape.value(u), &grid);
        dists.push(d);
    }
    check.require(
        dists[0] > dists[1] && dists[1] > dists[2],
        format!("sup distances to the limit shape: {dists:?} (must decrease)"),
    );
    Ok(check.finish(t0))
}

// -------------------------------------------------------------------------
// Monte Carlo criteria: one shared pool at L=40, one small pool at L=20

struct Pools {
    /// Per replica at L=40: [P1 diff at 40, P2 diff at 40, P1 diff at 20,
    /// plain P1 at 40, weighted sum of P1 diffs].
    rows40: Vec<[f64; 5]>,
    /// P2 diff at the top level of the L=20 pool.
    d2_20: Vec<f64>,
}

fn draw_pools(cfg: &VerifyConfig) -> Result<Pools> {
    let gibbs = GibbsSettings {
        sweeps: 6,
        grid: 64,
    };
    let mcmc = McmcSettings::default();

    let l = 40u32;
    let params40 = ModelParams::new(40.0, 80, 1.0)?;
    let stream40 = RngStream::new(cfg.seed, 0);
    let rows = parallel::map_indexed(cfg.replicas, |r| -> Result<[f64; 5]> {
        let mut rng = stream40.substream(r as u64).rng();
        let s = sample_corners(l, 1, &params40, &mut rng, &mcmc, &gibbs)?;
        let d1 = s.p_k_diff(40, 1).unwrap();
        let d2 = s.p_k_diff(40, 2).unwrap();
        let d1_half = s.p_k_diff(20, 1).unwrap();
        let plain1 = s.p_k(40, 1).unwrap();
        let weighted: f64 = (1..=l)
            .map(|n| (1.0 - n as f64 / l as f64) * s.p_k_diff(n, 1).unwrap())
            .sum();
        Ok([d1, d2, d1_half, plain1, weighted])
    });
    let rows40: Vec<[f64; 5]> = rows.into_iter().collect::<Result<_>>()?;

    let params20 = ModelParams::new(20.0, 40, 1.0)?;
    let stream20 = RngStream::new(cfg.seed, 1 << 32);
    let vals = parallel::map_indexed(cfg.replicas, |r| -> Result<f64> {
        let mut rng = stream20.substream(r as u64).rng();
        let s = sample_corners(20, 19, &params20, &mut rng, &mcmc, &gibbs)?;
        Ok(s.p_k_diff(20, 2).unwrap())
    });
    let d2_20: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    Ok(Pools { rows40, d2_20 })
}

fn column(rows: &[[f64; 5]], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn mean_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn sample_var(vals: &[f64]) -> f64 {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Batch-means standard error of a statistic of the replica set.
fn batch_se<F: Fn(&[f64]) -> f64>(vals: &[f64], stat: F) -> f64 {
    let b = 32usize;
    let per = vals.len() / b;
    let bs: Vec<f64> = (0..b)
        .map(|j| stat(&vals[j * per..(j + 1) * per]))
        .collect();
    let mean = bs.iter().sum::<f64>() / b as f64;
    let var = bs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    (var / b as f64).sqrt()
}

fn batch_se2<F: Fn(&[f64], &[f64]) -> f64>(a: &[f64], b2: &[f64], stat: F) -> f64 {
    let b = 32usize;
    let per = a.len() / b;
    let bs: Vec<f64> = (0..b)
        .map(|j| stat(&a[j * per..(j + 1) * per], &b2[j * per..(j + 1) * per]))
        .collect();
    let mean = bs.iter().sum::<f64>() / b as f64;
    let var = bs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    (var / b as f64).sqrt()
}

fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (n - 1.0)
}

fn criterion_lln(pools: &Pools) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(
        7,
        "law of large numbers for the second power sum difference",
    );
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let target = formulas::first_moment_diff_limit(2, &p, LevelHeight::new(1.0)?)?;
    let d2 = column(&pools.rows40, 1);
    let (mean, se) = mean_se(&d2);
    let tol = (3.0 * se).max(5.0 / 40.0);
    let err = (mean - target).abs();
    check.require(
        err < tol,
        format!("mean {mean:.5} vs limit {target:.5}, err {err:.4} < tol {tol:.4}"),
    );
    Ok(check.finish(t0))
}

fn criterion_variance_scaling(pools: &Pools) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(8, "variance decays like 1/L");
    let v40 = sample_var(&column(&pools.rows40, 1));
    let v20 = sample_var(&pools.d2_20);
    let ratio = v20 / v40;
    check.require(
        (1.4..=2.8).contains(&ratio),
        format!("Var(L=20)/Var(L=40) = {ratio:.3} (target 2, accepted [1.4, 2.8])"),
    );
    Ok(check.finish(t0))
}

fn criterion_clt_variance(pools: &Pools) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(9, "central limit variance and cross covariance");
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let l = 40.0;
    let d1 = column(&pools.rows40, 0);
    let d1_half = column(&pools.rows40, 2);

    // The same-level covariance value is the (positive) limiting variance of
    // the sqrt(L)-scaled difference.
    let target_var = formulas::cov_diff_same_level(1, 1, LevelHeight::new(1.0)?, &p)?;
    let est_var = l * sample_var(&d1);
    let se_var = batch_se(&d1, |b| l * sample_var(b));
    let zv = (est_var - target_var) / se_var;
    check.require(
        zv.abs() < 3.0,
        format!("L*Var[P1 diff] = {est_var:.5} vs {target_var:.5} (z = {zv:+.2})"),
    );

    let target_cov = formulas::cov_diff_distinct_levels(
        1,
        1,
        LevelHeight::new(0.5)?,
        LevelHeight::new(1.0)?,
        &p,
    )?;
    let est_cov = l * l * sample_cov(&d1_half, &d1);
    let se_cov = batch_se2(&d1_half, &d1, |a, b| l * l * sample_cov(a, b));
    let zc = (est_cov - target_cov) / se_cov;
    check.require(
        zc.abs() < 3.0,
        format!("L^2*Cov[diff@20, diff@40] = {est_cov:.4} vs {target_cov:.4} (z = {zc:+.2})"),
    );
    Ok(check.finish(t0))
}

fn criterion_independence(pools: &Pools) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(10, "difference and plain statistics decorrelate");
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let h = LevelHeight::new(1.0)?;
    let l = 40.0;
    let d1 = column(&pools.rows40, 0);
    let plain = column(&pools.rows40, 3);

    // At finite L the two statistics carry a genuine O(1/sqrt(L))
    // correlation whose constant is the mixed covariance formula; the
    // quantitative content of asymptotic independence is that L * Cov
    // matches that constant, so the correlation itself vanishes in the
    // limit. Gate on the sharp test and report the raw correlation next to
    // its finite-size prediction for context.
    let target = formulas::cov_diff_vs_level(1, 1, h, h, &p, DiffOrdering::DiffInner)?;
    let est = l * sample_cov(&d1, &plain);
    let se = batch_se2(&d1, &plain, |a, b| l * sample_cov(a, b));
    let z = (est - target) / se;
    check.require(
        z.abs() < 3.0,
        format!(
            "L*Cov[diff, plain] = {est:.5} vs mixed-covariance limit {target:.5} (z = {z:+.2})"
        ),
    );

    let corr = sample_cov(&d1, &plain) / (sample_var(&d1) * sample_var(&plain)).sqrt();
    let var_diff = formulas::cov_diff_same_level(1, 1, h, &p)?;
    let var_plain = formulas::cov_single_level(1, 1, h, h, &p)?;
    let corr_pred = target / (l * var_diff * var_plain).sqrt();
    check.details.push(format!(
        "[info] raw corr = {corr:+.4}; finite-size prediction {corr_pred:+.4} decaying like \
         1/sqrt(L); a literal zero test is below desk-scale resolution"
    ));
    Ok(check.finish(t0))
}

fn criterion_third_cumulant(pools: &Pools) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(11, "third cumulant vanishes at the Gaussian order");
    let l: f64 = 40.0;
    let scaled: Vec<f64> = column(&pools.rows40, 0)
        .iter()
        .map(|d| l.sqrt() * d)
        .collect();
    let k3 = |vals: &[f64]| {
        let cols = [vals.to_vec()];
        stats::joint_cumulant(&cols, &[0, 0, 0])
    };
    let est = k3(&scaled);
    let se = batch_se(&scaled, k3);
    let z = est / se;
    check.require(
        z.abs() < 3.0,
        format!(
            "third cumulant of sqrt(L) P1 diff = {est:+.4} (z = {z:+.2}); the decay \
                 rate itself needs larger L than a desk-scale run"
        ),
    );
    Ok(check.finish(t0))
}

fn criterion_weighted_average(pools: &Pools) -> Result<CriterionResult> {
    let t0 = Instant::now();
    let mut check = Check::new(13, "weighted-average covariance");
    let p = ScaledParams::new(1.0, 2.0, 1.0)?;
    let g = |y: f64| 1.0 - y;
    let target = formulas::cov_weighted_average(1, 1, g, g, &p)?;
    let w = column(&pools.rows40, 4);
    let est = sample_var(&w);
    let se = batch_se(&w, sample_var);
    let z = (est - target) / se;
    check.require(
        z.abs() < 3.0,
        format!("Var[weighted diff average] = {est:.5} vs {target:.5} (z = {z:+.2})"),
    );
    Ok(check.finish(t0))
}

/// Runs the full verification and collects the per-criterion results in
/// criterion order.
pub fn run(cfg: &VerifyConfig) -> VerifyReport {
    let mut criteria = Vec::new();
    let t = Instant::now();
    criteria.push(catch(
        1,
        "dimension reduction identity",
        t,
        criterion_dimension_reduction(cfg.seed),
    ));
    let t = Instant::now();
    criteria.push(catch(
        2,
        "contour moment vs density moment",
        t,
        criterion_moment_identity(),
    ));
    let t = Instant::now();
    criteria.push(catch(
        3,
        "limit density support endpoints",
        t,
        criterion_support_endpoints(),
    ));
    let t = Instant::now();
    criteria.push(catch(
        4,
        "finite-size first moment exactness",
        t,
        criterion_finite_size_exactness(),
    ));
    let t = Instant::now();
    criteria.push(catch(
        5,
        "field pullback covariance consistency",
        t,
        criterion_gff_consistency(),
    ));
    let t = Instant::now();
    criteria.push(catch(
        6,
        "difference covariance symmetrization",
        t,
        criterion_symmetrization(),
    ));

    if cfg.fast {
        for (id, name) in [
            (
                7u8,
                "law of large numbers for the second power sum difference",
            ),
            (8, "variance decays like 1/L"),
            (9, "central limit variance and cross covariance"),
            (10, "difference and plain statistics decorrelate"),
            (11, "third cumulant vanishes at the Gaussian order"),
        ] {
            criteria.push(skipped(id, name));
        }
    } else {
        let t = Instant::now();
        match draw_pools(cfg) {
            Ok(pools) => {
                let tp = Instant::now();
                criteria.push(catch(7, "law of large numbers", tp, criterion_lln(&pools)));
                let tp = Instant::now();
                criteria.push(catch(
                    8,
                    "variance scaling",
                    tp,
                    criterion_variance_scaling(&pools),
                ));
                let tp = Instant::now();
                criteria.push(catch(9, "clt variance", tp, criterion_clt_variance(&pools)));
                let tp = Instant::now();
                criteria.push(catch(
                    10,
                    "independence",
                    tp,
                    criterion_independence(&pools),
                ));
                let tp = Instant::now();
                criteria.push(catch(
                    11,
                    "third cumulant",
                    tp,
                    criterion_third_cumulant(&pools),
                ));
                let tp = Instant::now();
                criteria.push(catch(
                    13,
                    "weighted-average covariance",
                    tp,
                    criterion_weighted_average(&pools),
                ));
            }
            Err(e) => {
                for id in [7u8, 8, 9, 10, 11, 13] {
                    criteria.push(CriterionResult {
                        id,
                        name: "monte carlo pool".into(),
                        passed: false,
                        skipped: false,
                        seconds: t.elapsed().as_secs_f64(),
                        details: vec![format!("[FAIL] pool draw failed: {e}")],
                    });
                }
            }
        }
    }

    let t = Instant::now();
    criteria.push(catch(
        12,
        "root interlacing and convergence",
        t,
        criterion_jacobi_roots(),
    ));
    if cfg.fast {
        criteria.push(skipped(13, "weighted-average covariance"));
    }

    criteria.sort_by_key(|c| c.id);
    VerifyReport { criteria }
}
