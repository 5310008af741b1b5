//! Roots of Jacobi orthogonal polynomials on [0, 1], the interlacing of
//! adjacent root systems, and their Kerov diagrams.
//!
//! Roots come from the eigenvalues of the symmetric tridiagonal recurrence
//! matrix (Golub-Welsch), with a Newton polish on the recurrence-evaluated
//! polynomial; the recurrence coefficients are the shifted-Jacobi closed
//! forms, stable to degree a couple hundred.

use nalgebra::DMatrix;

use crate::diagrams::{diagram_from_pair, Diagram, InterlacingPair};
use crate::error::{Error, Result};
use crate::special;

/// Degree and weight exponents of an orthogonal polynomial for
/// `x^p (1-x)^q` on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JacobiSpec {
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

impl JacobiSpec {
    pub fn new(n: usize, p: f64, q: f64) -> Result<Self> {
        if !(p > -1.0 && q > -1.0) {
            return Err(Error::Invalid(format!(
                "weight exponents must exceed -1: p={p}, q={q}"
            )));
        }
        Ok(JacobiSpec { n, p, q })
    }
}

/// Recurrence coefficients of the monic orthogonal polynomials for the
/// standard Jacobi weight `(1-t)^a (1+t)^b` on [-1, 1]:
/// `pi_{k+1} = (t - alpha_k) pi_k - beta_k pi_{k-1}`.
fn monic_recurrence(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let denom = 2.0 * kf + a + b;
        let al = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (denom * (denom + 2.0))
        };
        alpha.push(al);
        let be = if k == 0 {
            0.0 // unused
        } else if k == 1 {
            // the (1 + a + b) factors cancel algebraically at k = 1
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
        } else {
            4.0 * kf * (kf + a) * (kf + b) * (kf + a + b)
                / (denom * denom * (denom + 1.0) * (denom - 1.0))
        };
        beta.push(be);
    }
    (alpha, beta)
}

/// Monic polynomial value and derivative at `t` via the three-term
/// recurrence.
fn monic_eval(alpha: &[f64], beta: &[f64], n: usize, t: f64) -> (f64, f64) {
    let mut pm1 = 0.0;
    let mut p0 = 1.0;
    let mut dm1 = 0.0;
    let mut d0 = 0.0;
    for k in 0..n {
        let p1 = (t - alpha[k]) * p0 - if k == 0 { 0.0 } else { beta[k] * pm1 };
        let d1 = p0 + (t - alpha[k]) * d0 - if k == 0 { 0.0 } else { beta[k] * dm1 };
        pm1 = p0;
        p0 = p1;
        dm1 = d0;
        d0 = d1;
    }
    (p0, d0)
}

/// The `n` roots of the orthogonal polynomial for weight `x^p (1-x)^q` on
/// [0, 1], strictly increasing; eigenvalues of the Jacobi matrix refined by
/// one Newton step.
pub fn jacobi_roots(spec: &JacobiSpec) -> Result<Vec<f64>> {
    if spec.n == 0 {
        return Ok(Vec::new());
    }
    // x = (1+t)/2 maps the weight to (1-t)^q (1+t)^p on [-1,1].
    let (a, b) = (spec.q, spec.p);
    let n = spec.n;
    let (alpha, beta) = monic_recurrence(a, b, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = alpha[k];
        if k + 1 < n {
            let e = beta[k + 1].sqrt();
            m[(k, k + 1)] = e;
            m[(k + 1, k)] = e;
        }
    }
    let eig = m.symmetric_eigen();
    let mut ts: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut roots = Vec::with_capacity(n);
    for t in ts {
        let (pv, dv) = monic_eval(&alpha, &beta, n, t);
        let t1 = if dv != 0.0 { t - pv / dv } else { t };
        // residual: the size of the next hypothetical Newton step
        let (pv1, dv1) = monic_eval(&alpha, &beta, n, t1);
        let residual = if dv1 != 0.0 {
            (pv1 / dv1).abs()
        } else {
            pv1.abs()
        };
        if residual > 1e-10 {
            return Err(Error::IllConditioned { residual });
        }
        roots.push(0.5 * (1.0 + t1));
    }
    Ok(roots)
}

/// Gauss nodes and weights for the weight `x^p (1-x)^q` on [0, 1]
/// (Golub-Welsch: weights from first eigenvector components times the
/// weight's total mass).
pub fn gauss_jacobi_rule(spec: &JacobiSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = (spec.q, spec.p);
    let n = spec.n;
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let (alpha, beta) = monic_recurrence(a, b, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        m[(k, k)] = alpha[k];
        if k + 1 < n {
            let e = beta[k + 1].sqrt();
            m[(k, k + 1)] = e;
            m[(k + 1, k)] = e;
        }
    }
    let eig = m.symmetric_eigen();
    let mu0 = special::ln_beta(spec.p + 1.0, spec.q + 1.0).exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let t = eig.eigenvalues[j];
            let v0 = eig.eigenvectors[(0, j)];
            (0.5 * (1.0 + t), mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(pairs.into_iter().unzip())
}

/// Root system of the corners degeneration at level `n`: the roots of the
/// degree-`min(m, n)` polynomial for weight exponents `(alpha - 1, |m - n|)`,
/// padded with ones up to length `n`.
pub fn corner_roots(m: u32, n: u32, alpha: f64) -> Result<Vec<f64>> {
    let deg = m.min(n) as usize;
    let spec = JacobiSpec::new(deg, alpha - 1.0, (m as f64 - n as f64).abs())?;
    let mut roots = jacobi_roots(&spec)?;
    roots.resize(n as usize, 1.0);
    Ok(roots)
}

/// Checks the interlacing of adjacent corner root systems (ties allowed only
/// at the padded ones) and builds the Kerov diagram of the pair.
pub fn root_interlacing_check(m: u32, n: u32, alpha: f64) -> Result<(bool, Diagram)> {
    if n < 1 {
        return Err(Error::Invalid("level must be at least 1".into()));
    }
    let upper = corner_roots(m, n, alpha)?;
    let lower = if n == 1 {
        Vec::new()
    } else {
        corner_roots(m, n - 1, alpha)?
    };
    let mut ok = true;
    for i in 0..lower.len() {
        let strict_lo = upper[i] < lower[i] || (upper[i] == 1.0 && lower[i] == 1.0);
        let strict_hi = lower[i] < upper[i + 1] || (lower[i] == 1.0 && upper[i + 1] == 1.0);
        let weak = upper[i] <= lower[i] && lower[i] <= upper[i + 1];
        if !(weak && strict_lo && strict_hi) {
            ok = false;
        }
    }
    let pair = InterlacingPair::new(upper, lower)?;
    Ok((ok, diagram_from_pair(&pair)))
}
