//! Exact finite-size joint moments of the power-sum observables, and the
//! dimension-reduction identity that collapses a cyclic sum of nested
//! contour integrals into a single one. Both sides of the identity are
//! implemented so each can serve as the other's oracle.

use num_complex::Complex64;
use rand::Rng;

use crate::contour::{self, plan_contours, QuadratureSettings};
use crate::error::{Error, Result};

/// Finite-size process parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub m: u32,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, m: u32, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && theta > 0.0 && m >= 1) {
            return Err(Error::Invalid(format!(
                "model parameters must satisfy alpha > 0, theta > 0, m >= 1; got alpha={alpha}, \
                 m={m}, theta={theta}"
            )));
        }
        Ok(ModelParams { alpha, m, theta })
    }

    /// The excluded point theta * (alpha + M).
    pub fn excluded(&self) -> f64 {
        self.theta * (self.alpha + self.m as f64)
    }
}

/// A joint-moment request: one factor per index, either a plain power sum at
/// the level or the adjacent-level difference of power sums.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MomentSpec {
    levels: Vec<u32>,
    powers: Vec<u32>,
    diff: Vec<bool>,
}

impl MomentSpec {
    pub fn new(levels: Vec<u32>, powers: Vec<u32>, diff: Vec<bool>) -> Result<Self> {
        if levels.len() != powers.len() || levels.len() != diff.len() {
            return Err(Error::Invalid(
                "levels, powers, diff must have equal length".into(),
            ));
        }
        if levels.is_empty() {
            return Err(Error::Invalid("empty moment spec".into()));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid("levels must be nondecreasing".into()));
        }
        if levels.iter().any(|&n| n == 0) {
            return Err(Error::Invalid("levels are positive integers".into()));
        }
        Ok(MomentSpec {
            levels,
            powers,
            diff,
        })
    }

    pub fn plain(level: u32, k: u32) -> Self {
        MomentSpec {
            levels: vec![level],
            powers: vec![k],
            diff: vec![false],
        }
    }

    pub fn difference(level: u32, k: u32) -> Self {
        MomentSpec {
            levels: vec![level],
            powers: vec![k],
            diff: vec![true],
        }
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }
    pub fn powers(&self) -> &[u32] {
        &self.powers
    }
    pub fn diff_flags(&self) -> &[bool] {
        &self.diff
    }

    pub fn total_power(&self) -> u32 {
        self.powers.iter().sum()
    }
}

const POLE_GUARD: f64 = 1e-13;

fn guarded_inv(d: Complex64, what: &'static str) -> Result<Complex64> {
    if d.norm() < POLE_GUARD {
        return Err(Error::PoleHit {
            factor: what,
            magnitude: d.norm(),
        });
    }
    Ok(1.0 / d)
}

/// The chain and exchange factors of the one-group integrand: the part that
/// does not depend on the level.
fn chain_cross(w: &[Complex64], theta: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 1..w.len() {
        acc *= guarded_inv(w[j] - w[j - 1] + 1.0 - theta, "chain w_{j+1}-w_j+1-theta")?;
    }
    for i in 0..w.len() {
        for j in (i + 1)..w.len() {
            let d = w[j] - w[i];
            acc *= d * (d + 1.0 - theta);
            acc *= guarded_inv(d - theta, "cross w_j-w_i-theta")?;
            acc *= guarded_inv(d + 1.0, "cross w_j-w_i+1")?;
        }
    }
    Ok(acc)
}

/// `prod_i (w_i - theta) / (w_i + (n-1) theta)`.
fn level_ratio(w: &[Complex64], theta: f64, n: u32) -> Result<Complex64> {
    let shift = (n as f64 - 1.0) * theta;
    let mut acc = Complex64::new(1.0, 0.0);
    for &wi in w {
        acc *= (wi - theta) * guarded_inv(wi + shift, "w_i + (n-1) theta")?;
    }
    Ok(acc)
}

/// `prod_i (w_i - theta alpha) / (w_i - theta alpha - theta M)`.
fn alpha_ratio(w: &[Complex64], params: &ModelParams) -> Result<Complex64> {
    let ta = params.theta * params.alpha;
    let tam = ta + params.theta * params.m as f64;
    let mut acc = Complex64::new(1.0, 0.0);
    for &wi in w {
        acc *= (wi - ta) * guarded_inv(wi - tam, "w_i - theta(alpha+M)")?;
    }
    Ok(acc)
}

/// The one-group integrand at level `n`, exactly as displayed in the joint
/// moment formula.
pub fn integrand_i(w: &[Complex64], params: &ModelParams, n: u32) -> Result<Complex64> {
    Ok(chain_cross(w, params.theta)? * level_ratio(w, params.theta, n)? * alpha_ratio(w, params)?)
}

/// The cross-group exchange factor.
pub fn integrand_l(w: &[Complex64], w_tilde: &[Complex64], theta: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for &wt in w_tilde {
        for &wj in w {
            let d = wt - wj;
            acc *= d * (d + 1.0 - theta);
            acc *= guarded_inv(d - theta, "L: wt-w-theta")?;
            acc *= guarded_inv(d + 1.0, "L: wt-w+1")?;
        }
    }
    Ok(acc)
}

/// Tensor quadrature cost grows exponentially in the total power, so
/// [`joint_moment_finite`] refuses above this; use
/// [`joint_moment_finite_with_cap`] to override.
pub const DEFAULT_TOTAL_POWER_CAP: u32 = 6;

/// Exact expectation of a product of (optionally differenced) power-sum
/// observables, by nested contour quadrature of the joint moment formula.
/// Difference factors are folded into the integrand as a difference of
/// level ratios, which keeps the integrand small where cancellation occurs.
pub fn joint_moment_finite(
    spec: &MomentSpec,
    params: &ModelParams,
    settings: &QuadratureSettings,
) -> Result<f64> {
    joint_moment_finite_with_cap(spec, params, settings, DEFAULT_TOTAL_POWER_CAP)
}

/// Same computation with an explicit bound on the total power (the number of
/// nested integration variables).
pub fn joint_moment_finite_with_cap(
    spec: &MomentSpec,
    params: &ModelParams,
    settings: &QuadratureSettings,
    total_power_cap: u32,
) -> Result<f64> {
    if spec.total_power() > total_power_cap {
        return Err(Error::Invalid(format!(
            "total power {} exceeds the cap {total_power_cap}; raise it explicitly if the \
             tensor-quadrature cost is acceptable",
            spec.total_power()
        )));
    }
    if params.m <= spec.total_power() {
        return Err(Error::Invalid(format!(
            "requires M > sum of powers; got M = {}, sum = {}",
            params.m,
            spec.total_power()
        )));
    }
    let theta = params.theta;

    // Zero powers are deterministic factors: a plain P_0 equals the level,
    // a differenced P_0 equals 1.
    let mut constant = 1.0;
    let mut groups: Vec<(u32, u32, bool)> = Vec::new(); // (level, power, diff)
    for i in 0..spec.levels.len() {
        if spec.powers[i] == 0 {
            constant *= if spec.diff[i] {
                1.0
            } else {
                spec.levels[i] as f64
            };
        } else {
            groups.push((spec.levels[i], spec.powers[i], spec.diff[i]));
        }
    }
    if groups.is_empty() {
        return Ok(constant);
    }

    let mut enclose = Vec::new();
    for &(n, _, diff) in &groups {
        enclose.push(-theta * (n as f64 - 1.0));
        if diff {
            enclose.push(-theta * (n as f64 - 2.0));
        }
    }
    let offsets: Vec<Complex64> = [0.0, 1.0, theta, 1.0 - theta, 1.0 + theta]
        .iter()
        .flat_map(|&d| [Complex64::new(d, 0.0), Complex64::new(-d, 0.0)])
        .collect();
    let dims: usize = groups.iter().map(|g| g.1 as usize).sum();
    let fam = plan_contours(&enclose, &[params.excluded()], &offsets, dims)?;

    let starts: Vec<usize> = groups
        .iter()
        .scan(0usize, |acc, g| {
            let s = *acc;
            *acc += g.1 as usize;
            Some(s)
        })
        .collect();

    let settings = if dims >= 3 {
        settings.clone().with_initial(16)
    } else {
        settings.clone()
    };
    let integral = contour::integrate_nested(
        |u| {
            let mut acc = Complex64::new(1.0, 0.0);
            for (gi, &(n, k, diff)) in groups.iter().enumerate() {
                let w = &u[starts[gi]..starts[gi] + k as usize];
                let base = match chain_cross(w, theta)
                    .and_then(|cc| alpha_ratio(w, params).map(|ar| cc * ar))
                {
                    Ok(x) => x,
                    Err(_) => return Complex64::new(f64::NAN, f64::NAN),
                };
                let lvl = if diff {
                    let hi = level_ratio(w, theta, n);
                    let lo = level_ratio(w, theta, n - 1);
                    match (hi, lo) {
                        (Ok(a), Ok(b)) => a - b,
                        _ => return Complex64::new(f64::NAN, f64::NAN),
                    }
                } else {
                    match level_ratio(w, theta, n) {
                        Ok(x) => x,
                        Err(_) => return Complex64::new(f64::NAN, f64::NAN),
                    }
                };
                acc *= base * lvl;
            }
            for gi in 0..groups.len() {
                for gj in (gi + 1)..groups.len() {
                    let wi = &u[starts[gi]..starts[gi] + groups[gi].1 as usize];
                    let wj = &u[starts[gj]..starts[gj] + groups[gj].1 as usize];
                    match integrand_l(wi, wj, theta) {
                        Ok(x) => acc *= x,
                        Err(_) => return Complex64::new(f64::NAN, f64::NAN),
                    }
                }
            }
            acc
        },
        &fam,
        &settings,
    )?;
    if !integral.re.is_finite() || !integral.im.is_finite() {
        return Err(Error::PoleHit {
            factor: "joint moment integrand",
            magnitude: 0.0,
        });
    }
    let value = integral * Complex64::new(-theta, 0.0).powi(-(groups.len() as i32));
    let tol = 1e-9 * value.re.abs().max(1.0) + 1e-12;
    if value.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            imag: value.im.abs(),
            tol,
        });
    }
    Ok(constant * value.re)
}

/// A rational test function with declared poles and a low-degree numerator,
/// the function class the dimension-reduction identity is stated for.
#[derive(Debug, Clone)]
pub struct RationalFn {
    /// Numerator coefficients, low degree first.
    pub numer: Vec<Complex64>,
    /// Poles with multiplicities.
    pub poles: Vec<(Complex64, u32)>,
}

impl RationalFn {
    pub fn eval(&self, u: Complex64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        for c in self.numer.iter().rev() {
            num = num * u + c;
        }
        let mut den = Complex64::new(1.0, 0.0);
        for &(p, e) in &self.poles {
            den *= (u - p).powu(e);
        }
        num / den
    }

    /// Random instance with poles only at the declared points and numerator
    /// degree at most two.
    pub fn random<R: Rng>(declared_poles: &[f64], rng: &mut R) -> Self {
        let deg = rng.gen_range(0..=2usize);
        let numer = (0..=deg)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let poles = declared_poles
            .iter()
            .map(|&p| (Complex64::new(p, 0.0), rng.gen_range(1..=2u32)))
            .collect();
        RationalFn { numer, poles }
    }
}

/// Left-hand side of the dimension-reduction identity: the cyclic sum over
/// rotations of `prod f_{sigma(i)}(u_i)` against the chain denominator
/// `(u_2-u_1)...(u_n-u_{n-1})`, over nested contours around the poles.
/// Each `f_j` only ever sees the ring nodes of one dimension at a time, so
/// its values are tabulated per grid level.
pub fn dimension_reduction_lhs(
    fs: &[RationalFn],
    poles: &[f64],
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let n = fs.len();
    if n < 2 {
        return Err(Error::Invalid("cyclic identity needs n >= 2".into()));
    }
    let fam = plan_contours(poles, &[], &[Complex64::new(0.0, 0.0)], n)?;
    let settings = if n >= 3 {
        settings.clone().with_initial(16)
    } else {
        settings.clone()
    };
    contour::integrate_nested_tabulated(
        |nodes, rings| {
            // vals[j][dim][node] = f_j(ring point)
            let vals: Vec<Vec<Vec<Complex64>>> = fs
                .iter()
                .map(|f| {
                    rings
                        .iter()
                        .map(|ring| ring.iter().map(|&v| f.eval(v)).collect())
                        .collect()
                })
                .collect();
            let rings: Vec<Vec<Complex64>> = rings.to_vec();
            let _ = nodes;
            move |idx: &[usize]| {
                let mut chain = Complex64::new(1.0, 0.0);
                for i in 1..n {
                    chain *= rings[i][idx[i]] - rings[i - 1][idx[i - 1]];
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..n {
                    let mut prod = Complex64::new(1.0, 0.0);
                    for (i, &id) in idx.iter().enumerate() {
                        prod *= vals[(i + t) % n][i][id];
                    }
                    acc += prod;
                }
                acc / chain
            }
        },
        &fam,
        &settings,
    )
}

/// Right-hand side: the single integral of the plain product.
pub fn dimension_reduction_rhs(
    fs: &[RationalFn],
    poles: &[f64],
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let fam = plan_contours(poles, &[], &[], 1)?;
    contour::integrate_circle(
        |u| fs.iter().map(|f| f.eval(u)).product(),
        &fam.contours[0],
        settings,
    )
}

/// Both sides of the symmetrized-insertion variant of the identity: `n`
/// nested copies of `f` with `prod_j (sum_i g_j(v_i))` on the left, and
/// `n^{s-1} (2 pi i)^{-1} oint f^n prod_j g_j` on the right.
pub fn dimension_reduction_corollary(
    f: &RationalFn,
    gs: &[RationalFn],
    n: usize,
    poles: &[f64],
    settings: &QuadratureSettings,
) -> Result<(Complex64, Complex64)> {
    if n == 0 {
        return Err(Error::Invalid("n must be positive".into()));
    }
    let rhs_fam = plan_contours(poles, &[], &[], 1)?;
    let rhs = contour::integrate_circle(
        |u| {
            let mut acc = f.eval(u).powu(n as u32);
            for g in gs {
                acc *= g.eval(u);
            }
            acc
        },
        &rhs_fam.contours[0],
        settings,
    )? * (n as f64).powi(gs.len() as i32 - 1);

    let lhs = if n == 1 {
        // Single variable: both sides are the same plain integral.
        contour::integrate_circle(
            |u| {
                let mut acc = f.eval(u);
                for g in gs {
                    acc *= g.eval(u);
                }
                acc
            },
            &rhs_fam.contours[0],
            settings,
        )?
    } else {
        let fam = plan_contours(poles, &[], &[Complex64::new(0.0, 0.0)], n)?;
        let settings = if n >= 3 {
            settings.clone().with_initial(16)
        } else {
            settings.clone()
        };
        contour::integrate_nested_tabulated(
            |_nodes, rings| {
                let f_vals: Vec<Vec<Complex64>> = rings
                    .iter()
                    .map(|ring| ring.iter().map(|&v| f.eval(v)).collect())
                    .collect();
                let g_vals: Vec<Vec<Vec<Complex64>>> = gs
                    .iter()
                    .map(|g| {
                        rings
                            .iter()
                            .map(|ring| ring.iter().map(|&v| g.eval(v)).collect())
                            .collect()
                    })
                    .collect();
                let rings: Vec<Vec<Complex64>> = rings.to_vec();
                move |idx: &[usize]| {
                    let mut chain = Complex64::new(1.0, 0.0);
                    for i in 1..n {
                        chain *= rings[i][idx[i]] - rings[i - 1][idx[i - 1]];
                    }
                    let mut acc = Complex64::new(1.0, 0.0);
                    for (dim, &id) in idx.iter().enumerate() {
                        acc *= f_vals[dim][id];
                    }
                    for gv in &g_vals {
                        let s: Complex64 =
                            idx.iter().enumerate().map(|(dim, &id)| gv[dim][id]).sum();
                        acc *= s;
                    }
                    acc / chain
                }
            },
            &fam,
            &settings,
        )?
    };
    Ok((lhs, rhs))
}
