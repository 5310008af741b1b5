//! Asymptotic closed forms: limiting first-moment differences, the limit
//! density with its support and atom, all limit covariances, and the
//! Gaussian-free-field pullback covariances with the section geometry of the
//! parameter-domain map.
//!
//! Conventions. The recurring integrand kernel is
//! `Phi(v; y) = v/(v+y) * (v-alpha_hat)/(v-alpha_hat-m_hat)`, with contours
//! that enclose `-y` and exclude `alpha_hat + m_hat`. Two-variable integrals
//! are nested (inner radius strictly smaller); when two level heights are
//! involved the variable of the *lower* level is the inner one. All outputs
//! are real numbers; the imaginary residue of the quadrature is checked
//! against 1e-9 and discarded.

use num_complex::Complex64;

use crate::contour::{self, plan_contours, ContourFamily, QuadratureSettings};
use crate::error::{Error, Result};
use crate::quad1d;

/// Limit parameters of the scaling scheme: alpha/L -> alpha_hat,
/// M/L -> m_hat. theta is carried along because covariances scale by 1/theta.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScaledParams {
    pub alpha_hat: f64,
    pub m_hat: f64,
    pub theta: f64,
}

impl ScaledParams {
    pub fn new(alpha_hat: f64, m_hat: f64, theta: f64) -> Result<Self> {
        if !(alpha_hat > 0.0 && m_hat > 0.0 && theta > 0.0) {
            return Err(Error::Invalid(format!(
                "scaled parameters must be positive: alpha_hat={alpha_hat}, m_hat={m_hat}, \
                 theta={theta}"
            )));
        }
        Ok(ScaledParams {
            alpha_hat,
            m_hat,
            theta,
        })
    }

    /// The excluded point alpha_hat + m_hat.
    pub fn excluded(&self) -> f64 {
        self.alpha_hat + self.m_hat
    }
}

/// A scaled level N/L -> n_hat (also used for the continuous height y).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct LevelHeight(pub f64);

impl LevelHeight {
    pub fn new(n_hat: f64) -> Result<Self> {
        if !(n_hat > 0.0) {
            return Err(Error::Invalid(format!(
                "level height {n_hat} must be positive"
            )));
        }
        Ok(LevelHeight(n_hat))
    }
}

/// Support of the limit density: the band `(gamma1, gamma2)` plus a possible
/// atom at `u = 1` whose mass is 0, 1/2, or 1 according to the sign of
/// `m_hat - n_hat`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DensitySupport {
    pub gamma1: f64,
    pub gamma2: f64,
    pub atom_mass: f64,
}

impl DensitySupport {
    /// True when `m_hat` and `n_hat` are close but not equal, which puts an
    /// integrable near-pole just outside the support edge; quadratures get
    /// slow there.
    pub fn near_degenerate(p: &ScaledParams, h: LevelHeight) -> bool {
        let d = (p.m_hat - h.0).abs();
        let scale = p.m_hat.max(h.0);
        d > EQ_TOL * scale && d < 1e-6 * scale
    }
}

/// Relative tolerance under which m_hat and n_hat are treated as equal.
const EQ_TOL: f64 = 1e-12;

const IMAG_TOL: f64 = 1e-9;

fn real_part(z: Complex64) -> Result<f64> {
    let tol = IMAG_TOL * z.re.abs().max(1.0);
    if z.im.abs() > tol {
        return Err(Error::ImaginaryResidue {
            imag: z.im.abs(),
            tol,
        });
    }
    Ok(z.re)
}

/// The integrand kernel `v/(v+y) * (v-alpha_hat)/(v-alpha_hat-m_hat)`.
pub fn moment_kernel(v: Complex64, y: f64, p: &ScaledParams) -> Complex64 {
    v / (v + y) * (v - p.alpha_hat) / (v - p.excluded())
}

/// Plans `n` nested circles that enclose `-level` for every given level and
/// exclude `alpha_hat + m_hat`.
pub fn level_contours(levels: &[f64], p: &ScaledParams, n: usize) -> Result<ContourFamily> {
    let enclose: Vec<f64> = levels.iter().map(|l| -l).collect();
    plan_contours(&enclose, &[p.excluded()], &[Complex64::new(0.0, 0.0)], n)
}

/// Limiting expectation of `P_k(x^N) - P_k(x^{N-1})`:
/// `(2 pi i)^{-1} oint Phi(v; n_hat)^k / (v + n_hat) dv`.
pub fn first_moment_diff_limit(k: u32, p: &ScaledParams, h: LevelHeight) -> Result<f64> {
    let fam = level_contours(&[h.0], p, 1)?;
    let settings = QuadratureSettings::default();
    let v = contour::integrate_circle(
        |v| moment_kernel(v, h.0, p).powu(k) / (v + h.0),
        &fam.contours[0],
        &settings,
    )?;
    real_part(v)
}

/// Edges of the limit-density band and the mass of the atom at 1.
pub fn density_support(p: &ScaledParams, h: LevelHeight) -> DensitySupport {
    let (a, m, n) = (p.alpha_hat, p.m_hat, h.0);
    let s = n + m + a;
    let root_outer = ((a + m) * (a + n)).sqrt();
    let root_inner = (m * n).sqrt();
    let gamma1 = ((root_outer - root_inner) / s).powi(2);
    let gamma2 = ((root_outer + root_inner) / s).powi(2);
    let scale = m.max(n);
    let atom_mass = if (m - n).abs() <= EQ_TOL * scale {
        0.5
    } else if m > n {
        0.0
    } else {
        1.0
    };
    DensitySupport {
        gamma1,
        gamma2,
        atom_mass,
    }
}

/// The rational part of the density, `phi''(u) * pi * sqrt((g2-u)(u-g1))`:
/// `1 + (m_hat - n_hat) / ((n+m+a)(1-u))`, with the exact cancellation at
/// `m_hat = n_hat` taken literally so the `gamma2 = 1` endpoint stays finite.
fn density_shape(u: f64, p: &ScaledParams, h: LevelHeight) -> f64 {
    let (a, m, n) = (p.alpha_hat, p.m_hat, h.0);
    if (m - n).abs() <= EQ_TOL * m.max(n) {
        1.0
    } else {
        1.0 + (m - n) / ((n + m + a) * (1.0 - u))
    }
}

/// The continuous part of the second derivative of the limit shape,
/// `phi''(u)` for `u` strictly inside `(gamma1, gamma2)`.
pub fn limit_density(u: f64, p: &ScaledParams, h: LevelHeight) -> Result<f64> {
    let sup = density_support(p, h);
    if !(u > sup.gamma1 && u < sup.gamma2) {
        return Err(Error::Domain(format!(
            "u = {u} outside the open support ({}, {})",
            sup.gamma1, sup.gamma2
        )));
    }
    if u == 1.0 {
        return Err(Error::Domain("u = 1 is the atom location".into()));
    }
    let shape = density_shape(u, p, h);
    Ok(shape / (std::f64::consts::PI * ((sup.gamma2 - u) * (u - sup.gamma1)).sqrt()))
}

/// `1/2 int_0^1 phi''(u) u^k du` including the atom: the substitution
/// `u = gamma1 + (gamma2-gamma1) sin^2 s` removes the inverse-square-root
/// edges, leaving a smooth integrand in `s`.
pub fn limit_density_moment(k: u32, p: &ScaledParams, h: LevelHeight) -> Result<f64> {
    let sup = density_support(p, h);
    let (g1, g2) = (sup.gamma1, sup.gamma2);
    let integrand = |s: f64| {
        let u = g1 + (g2 - g1) * s.sin().powi(2);
        density_shape(u, p, h) * u.powi(k as i32)
    };
    let band = quad1d::adaptive_gauss(
        &integrand,
        0.0,
        std::f64::consts::FRAC_PI_2,
        32,
        1 << 14,
        1e-11,
        1e-13,
    )? / std::f64::consts::PI;
    Ok(band + sup.atom_mass)
}

/// Which finite-size level index was larger when a difference observable is
/// paired with a plain one; it decides the contour nesting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrdering {
    /// The differenced level is below (or at) the plain one: diff variable inner.
    DiffInner,
    /// The differenced level is above the plain one: diff variable outer.
    DiffOuter,
}

/// One two-variable building block:
/// `(2 pi i)^{-2} oint oint (v_in - v_out)^{-2} F_in(v_in) F_out(v_out)`,
/// with `F = Phi^power / (v + level)^{pole}` per variable.
fn nested_pair(
    p: &ScaledParams,
    inner: (u32, f64, bool),
    outer: (u32, f64, bool),
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let fam = level_contours(&[inner.1, outer.1], p, 2)?;
    let one_side = |v: Complex64, (k, level, pole): (u32, f64, bool)| -> Complex64 {
        let base = moment_kernel(v, level, p).powu(k);
        if pole {
            base / (v + level)
        } else {
            base
        }
    };
    contour::integrate_nested(
        |u| {
            let d = u[0] - u[1];
            one_side(u[0], inner) * one_side(u[1], outer) / (d * d)
        },
        &fam,
        settings,
    )
}

/// Limit covariance of plain observables `P_{k1}(x^{N1})`, `P_{k2}(x^{N2})`,
/// for `n_hat_1 <= n_hat_2`.
pub fn cov_single_level(
    k1: u32,
    k2: u32,
    h1: LevelHeight,
    h2: LevelHeight,
    p: &ScaledParams,
) -> Result<f64> {
    if h1.0 > h2.0 {
        return Err(Error::Invalid(
            "cov_single_level requires n_hat_1 <= n_hat_2".into(),
        ));
    }
    let settings = QuadratureSettings::default();
    let v = nested_pair(p, (k1, h1.0, false), (k2, h2.0, false), &settings)?;
    real_part(v / p.theta)
}

/// Limit of `L * Cov` for two difference observables at the same height:
/// `-theta^{-1} k1 k2/(k1+k2) (2 pi i)^{-1} oint (v+n)^{-2} Phi^{k1+k2} dv`.
/// The minus sign follows the covariance statement of the central limit
/// theorem; the integral itself is negative for valid parameters, so this
/// value is the (positive) limiting variance when `k1 = k2`.
pub fn cov_diff_same_level(k1: u32, k2: u32, h: LevelHeight, p: &ScaledParams) -> Result<f64> {
    let fam = level_contours(&[h.0], p, 1)?;
    let settings = QuadratureSettings::default();
    let v = contour::integrate_circle(
        |v| {
            let d = v + h.0;
            moment_kernel(v, h.0, p).powu(k1 + k2) / (d * d)
        },
        &fam.contours[0],
        &settings,
    )?;
    let pref = -(k1 as f64) * (k2 as f64) / ((k1 + k2) as f64) / p.theta;
    real_part(v * pref)
}

/// Same-height difference covariance with the equal-height indicator:
/// zero when the scaled heights differ.
pub fn diff_cov_with_indicator(
    k1: u32,
    k2: u32,
    h1: LevelHeight,
    h2: LevelHeight,
    p: &ScaledParams,
) -> Result<f64> {
    if (h1.0 - h2.0).abs() > EQ_TOL * h1.0.max(h2.0) {
        return Ok(0.0);
    }
    cov_diff_same_level(k1, k2, h1, p)
}

/// Limit of `L * Cov(P_{k1} diff at N1, plain P_{k2} at N2)`:
/// `-theta^{-1} k1 (2 pi i)^{-2} oint oint (v1-v2)^{-2} (v1+n1)^{-1}
/// Phi_1^{k1} Phi_2^{k2}`, nested per the finite-size ordering.
pub fn cov_diff_vs_level(
    k1: u32,
    k2: u32,
    h1: LevelHeight,
    h2: LevelHeight,
    p: &ScaledParams,
    ordering: DiffOrdering,
) -> Result<f64> {
    let settings = QuadratureSettings::default();
    let v = match ordering {
        DiffOrdering::DiffInner => nested_pair(p, (k1, h1.0, true), (k2, h2.0, false), &settings)?,
        DiffOrdering::DiffOuter => nested_pair(p, (k2, h2.0, false), (k1, h1.0, true), &settings)?,
    };
    real_part(v * (-(k1 as f64) / p.theta))
}

/// Order `L^{-2}` covariance of difference observables at distinct heights
/// `n_hat_1 < n_hat_2`:
/// `theta^{-1} k1 k2 (2 pi i)^{-2} oint oint (v1-v2)^{-2}
/// prod (v_i+n_i)^{-1} Phi_i^{k_i}`.
pub fn cov_diff_distinct_levels(
    k1: u32,
    k2: u32,
    h1: LevelHeight,
    h2: LevelHeight,
    p: &ScaledParams,
) -> Result<f64> {
    if h1.0 >= h2.0 {
        return Err(Error::Invalid(
            "cov_diff_distinct_levels requires n_hat_1 < n_hat_2".into(),
        ));
    }
    let settings = QuadratureSettings::default();
    let v = nested_pair(p, (k1, h1.0, true), (k2, h2.0, true), &settings)?;
    real_part(v * (k1 as f64) * (k2 as f64) / p.theta)
}

/// Contours reused across a y-grid: both variables range over circles that
/// enclose the whole segment `[-1, 0]` of possible pole locations.
fn unit_band_contours(p: &ScaledParams, n: usize) -> Result<ContourFamily> {
    plan_contours(
        &[-1.0, 0.0],
        &[p.excluded()],
        &[Complex64::new(0.0, 0.0)],
        n,
    )
}

/// Adaptive Gauss rule over the triangle `0 <= y1 < y2 <= 1`, doubling a
/// tensor rule (32 points per dimension to start) until the relative change
/// drops below 1e-6.
fn triangle_quadrature<F>(f: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let eval = |n: usize| -> Result<f64> {
        let (x, w) = quad1d::gauss_legendre(n);
        // y2 = b, y1 = a * b with a, b in (0,1); Jacobian b.
        let vals = crate::parallel::map_indexed(n * n, |idx| {
            let (i, j) = (idx / n, idx % n);
            let b = 0.5 * (x[i] + 1.0);
            let a = 0.5 * (x[j] + 1.0);
            f(a * b, b).map(|v| w[i] * w[j] * 0.25 * b * v)
        });
        let mut acc = 0.0;
        for v in vals {
            acc += v?;
        }
        Ok(acc)
    };
    let mut n = 32;
    let mut prev = eval(n)?;
    loop {
        n *= 2;
        let cur = eval(n)?;
        if (cur - prev).abs() <= (1e-6 * cur.abs()).max(1e-9) {
            return Ok(cur);
        }
        if n >= 256 {
            return Err(Error::NonConvergence {
                nodes: n,
                last: Complex64::new(cur, 0.0),
                prev: Complex64::new(prev, 0.0),
            });
        }
        prev = cur;
    }
}

/// Covariance of level-weighted averages of difference observables
/// (the variance formula behind the weighted-average central limit theorem):
/// a symmetrized double integral over `0 <= y1 < y2 <= 1` of nested contour
/// integrals, minus a diagonal single-integral term.
pub fn cov_weighted_average<F1, F2>(
    k1: u32,
    k2: u32,
    g1: F1,
    g2: F2,
    p: &ScaledParams,
) -> Result<f64>
where
    F1: Fn(f64) -> f64 + Sync,
    F2: Fn(f64) -> f64 + Sync,
{
    let fam = unit_band_contours(p, 2)?;
    let settings = QuadratureSettings::default().with_tols(1e-9, 1e-12);
    let cross = triangle_quadrature(|y1, y2| {
        let g11 = g1(y1);
        let g22 = g2(y2);
        let g21 = g2(y1);
        let g12 = g1(y2);
        if g11 == 0.0 && g22 == 0.0 && g21 == 0.0 && g12 == 0.0 {
            return Ok(0.0);
        }
        let v = contour::integrate_nested(
            |u| {
                let (v1, v2) = (u[0], u[1]);
                let d = v1 - v2;
                let q1 = moment_kernel(v1, y1, p);
                let q2 = moment_kernel(v2, y2, p);
                let bracket =
                    g11 * g22 * q1.powu(k1) * q2.powu(k2) + g21 * g12 * q1.powu(k2) * q2.powu(k1);
                bracket / (d * d * (v1 + y1) * (v2 + y2))
            },
            &fam,
            &settings,
        )?;
        real_part(v * (k1 as f64) * (k2 as f64) / p.theta)
    })?;

    let diag_fam = unit_band_contours(p, 1)?;
    let diag_inner = |y: f64| -> Result<f64> {
        let gg = g1(y) * g2(y);
        if gg == 0.0 {
            return Ok(0.0);
        }
        let v = contour::integrate_circle(
            |v| {
                let d = v + y;
                moment_kernel(v, y, p).powu(k1 + k2) / (d * d)
            },
            &diag_fam.contours[0],
            &settings,
        )?;
        real_part(v * gg * (k1 as f64) * (k2 as f64) / ((k1 + k2) as f64) / p.theta)
    };
    let diag = adaptive_gauss_result(&diag_inner, 0.0, 1.0, 32, 512, 1e-8)?;
    Ok(cross - diag)
}

/// Adaptive Gauss doubling for integrands that can fail.
fn adaptive_gauss_result<F>(
    f: &F,
    a: f64,
    b: f64,
    start: usize,
    max: usize,
    rel: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let eval = |n: usize| -> Result<f64> {
        let (x, w) = quad1d::gauss_legendre(n);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let vals = crate::parallel::map_indexed(n, |i| f(mid + half * x[i]).map(|v| w[i] * v));
        let mut acc = 0.0;
        for v in vals {
            acc += v?;
        }
        Ok(acc * half)
    };
    let mut n = start;
    let mut prev = eval(n)?;
    loop {
        n *= 2;
        let cur = eval(n)?;
        if (cur - prev).abs() <= rel * cur.abs().max(1e-12) {
            return Ok(cur);
        }
        if n >= max {
            return Err(Error::NonConvergence {
                nodes: n,
                last: Complex64::new(cur, 0.0),
                prev: Complex64::new(prev, 0.0),
            });
        }
        prev = cur;
    }
}

/// Covariance of the field pairings `int u^k K(u, n_hat) du` at two heights
/// `n_hat_1 <= n_hat_2`:
/// `theta^{-1}/((k1+1)(k2+1)) (2 pi i)^{-2} oint oint (v1-v2)^{-2}
/// Phi_1^{k1+1} Phi_2^{k2+1}`.
pub fn gff_cov_1d(
    k1: u32,
    k2: u32,
    h1: LevelHeight,
    h2: LevelHeight,
    p: &ScaledParams,
) -> Result<f64> {
    if h1.0 > h2.0 {
        return Err(Error::Invalid(
            "gff_cov_1d requires n_hat_1 <= n_hat_2".into(),
        ));
    }
    let settings = QuadratureSettings::default();
    let v = nested_pair(p, (k1 + 1, h1.0, false), (k2 + 1, h2.0, false), &settings)?;
    real_part(v / (p.theta * ((k1 + 1) as f64) * ((k2 + 1) as f64)))
}

/// Covariance of the two-dimensional field pairings
/// `int int u^k g(y) K(u, y) du dy`: the square splits into two triangles
/// with the contour nesting switching across the diagonal (the variable at
/// the smaller height is always inner).
pub fn gff_cov_2d<F1, F2>(k1: u32, k2: u32, g1: F1, g2: F2, p: &ScaledParams) -> Result<f64>
where
    F1: Fn(f64) -> f64 + Sync,
    F2: Fn(f64) -> f64 + Sync,
{
    let fam = unit_band_contours(p, 2)?;
    let settings = QuadratureSettings::default().with_tols(1e-9, 1e-12);
    let pref = 1.0 / (p.theta * ((k1 + 1) as f64) * ((k2 + 1) as f64));
    // Triangle a < b covers both (y1, y2) = (a, b) and (b, a).
    let total = triangle_quadrature(|a, b| {
        let w1 = g1(a) * g2(b); // y1 = a inner with k1
        let w2 = g1(b) * g2(a); // y2 = a inner with k2
        if w1 == 0.0 && w2 == 0.0 {
            return Ok(0.0);
        }
        let v = contour::integrate_nested(
            |u| {
                let (vin, vout) = (u[0], u[1]);
                let d = vin - vout;
                let qa_in = moment_kernel(vin, a, p);
                let qb_out = moment_kernel(vout, b, p);
                (w1 * qa_in.powu(k1 + 1) * qb_out.powu(k2 + 1)
                    + w2 * qa_in.powu(k2 + 1) * qb_out.powu(k1 + 1))
                    / (d * d)
            },
            &fam,
            &settings,
        )?;
        real_part(v * pref)
    })?;
    Ok(total)
}

/// Covariance of the renormalized-derivative pairings obtained by
/// integration by parts in the height direction (requires `g(1) = 0`):
/// two triangle terms plus a subtracted diagonal term.
pub fn gff_deriv_cov_2d<F1, F2>(k1: u32, k2: u32, g1: F1, g2: F2, p: &ScaledParams) -> Result<f64>
where
    F1: Fn(f64) -> f64 + Sync,
    F2: Fn(f64) -> f64 + Sync,
{
    let fam = unit_band_contours(p, 2)?;
    let settings = QuadratureSettings::default().with_tols(1e-9, 1e-12);
    let cross = triangle_quadrature(|y1, y2| {
        // First summand: g1(y2) g2(y1) with powers (k2+1) inner, (k1+1) outer;
        // second: g1(y1) g2(y2) with powers (k1+1) inner, (k2+1) outer.
        let wa = g1(y2) * g2(y1);
        let wb = g1(y1) * g2(y2);
        if wa == 0.0 && wb == 0.0 {
            return Ok(0.0);
        }
        let v = contour::integrate_nested(
            |u| {
                let (v1, v2) = (u[0], u[1]);
                let d = v1 - v2;
                let q1 = moment_kernel(v1, y1, p);
                let q2 = moment_kernel(v2, y2, p);
                (wa * q1.powu(k2 + 1) * q2.powu(k1 + 1) + wb * q1.powu(k1 + 1) * q2.powu(k2 + 1))
                    / (d * d * (v1 + y1) * (v2 + y2))
            },
            &fam,
            &settings,
        )?;
        real_part(v / p.theta)
    })?;

    let diag_fam = unit_band_contours(p, 1)?;
    let kk = (k1 + k2 + 2) as f64;
    let diag_inner = |y: f64| -> Result<f64> {
        let gg = g1(y) * g2(y);
        if gg == 0.0 {
            return Ok(0.0);
        }
        let v = contour::integrate_circle(
            |v| {
                let d = v + y;
                moment_kernel(v, y, p).powu(k1 + k2 + 2) / (d * d)
            },
            &diag_fam.contours[0],
            &settings,
        )?;
        real_part(v * gg / (p.theta * kk))
    };
    let diag = adaptive_gauss_result(&diag_inner, 0.0, 1.0, 32, 512, 1e-8)?;
    Ok(cross - diag)
}

/// Geometry of the section at height `n_hat` of the parameter-domain map:
/// circle center and radius in the target half-plane. At `n_hat = m_hat` the
/// circle degenerates to the vertical line `Re = alpha_hat / 2`, reported as
/// an infinite radius with the line abscissa in the center slot.
pub fn omega_section(h: LevelHeight, p: &ScaledParams) -> (f64, f64) {
    let (a, m, n) = (p.alpha_hat, p.m_hat, h.0);
    if (n - m).abs() <= EQ_TOL * n.max(m) {
        return (a / 2.0, f64::INFINITY);
    }
    let center = n * (a + m) / (n - m);
    let radius = (m * n * (m + a) * (n + a)).sqrt() / (n - m).abs();
    (center, radius)
}

/// The algebraic image map of the section: a point `u` in the half-plane
/// maps to horizontal coordinate `u/(u+n_hat) * (u-alpha_hat)/(u-alpha_hat-m_hat)`.
pub fn section_image(u: Complex64, h: LevelHeight, p: &ScaledParams) -> Complex64 {
    moment_kernel(u, h.0, p)
}
