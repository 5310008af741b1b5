//! Truncated Laurent-series arithmetic for residue evaluation.
//!
//! The covariance and moment formulas in this crate are contour integrals of
//! rational functions, so their exact values are finite sums of residues.
//! This module provides the algebra needed to compute those residues without
//! quadrature: series in a local parameter `t = v - v0` with a tracked
//! validity window `[val, hi)` of powers. Nesting `Laurent<Laurent<Complex64>>`
//! expands two variables at once, with the inner variable's residue extracted
//! first; that reproduces iterated contour integration over nested circles
//! (`|v_inner| << |v_outer|`), where the inner integral only picks up poles
//! strictly inside the inner circle.
//!
//! The quadrature path in [`crate::contour`] never calls into this module;
//! tests use it as an independent check.

use num_complex::Complex64;

/// Window length used when inverting an exact (polynomial) series.
const INV_WINDOW: usize = 40;

/// Sentinel for "exact to all orders".
const EXACT: i64 = i64::MAX / 4;

/// Coefficient ring: complex numbers, or Laurent series over a smaller ring.
pub trait Coeff: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact zero test. Used only to trim structurally zero leading
    /// coefficients, never to compare nearly-equal floats.
    fn is_zero(&self) -> bool;
    fn from_f64(x: f64) -> Self;
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Laurent series `sum_{k >= val} c[k - val] t^k`, known on powers `[val, hi)`.
#[derive(Debug, Clone)]
pub struct Laurent<T: Coeff> {
    val: i64,
    hi: i64,
    c: Vec<T>,
}

impl<T: Coeff> Laurent<T> {
    fn normalize(mut self) -> Self {
        while let Some(first) = self.c.first() {
            if first.is_zero() {
                self.c.remove(0);
                self.val += 1;
            } else {
                break;
            }
        }
        if self.c.is_empty() {
            self.val = self.hi;
        }
        self
    }

    /// The exact zero series.
    pub fn zero_series() -> Self {
        Laurent {
            val: EXACT,
            hi: EXACT,
            c: Vec::new(),
        }
    }

    /// Exact constant.
    pub fn konst(k: T) -> Self {
        if k.is_zero() {
            return Self::zero_series();
        }
        Laurent {
            val: 0,
            hi: EXACT,
            c: vec![k],
        }
    }

    /// The variable itself, written at a center: `v = offset + t` where
    /// `offset = center_of_expansion_shift`. Exact.
    pub fn var(offset: T) -> Self {
        Laurent {
            val: 0,
            hi: EXACT,
            c: vec![offset, T::one()],
        }
        .normalize()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let val = self.val.min(o.val);
        let hi = self.hi.min(o.hi);
        // Coefficients are only stored up to the populated extent; `hi` can
        // be the exact-sentinel.
        let up = (self.val + self.c.len() as i64).max(o.val + o.c.len() as i64);
        let len = (hi.min(up) - val).max(0) as usize;
        let mut c = vec![T::zero(); len];
        for (i, x) in self.c.iter().enumerate() {
            let k = self.val + i as i64;
            if k < hi && ((k - val) as usize) < len {
                c[(k - val) as usize] = c[(k - val) as usize].add(x);
            }
        }
        for (i, x) in o.c.iter().enumerate() {
            let k = o.val + i as i64;
            if k < hi && ((k - val) as usize) < len {
                c[(k - val) as usize] = c[(k - val) as usize].add(x);
            }
        }
        Laurent { val, hi, c }.normalize()
    }

    pub fn neg(&self) -> Self {
        Laurent {
            val: self.val,
            hi: self.hi,
            c: self.c.iter().map(|x| x.neg()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero_series();
        }
        let val = self.val + o.val;
        let hi = (self.val.saturating_add(o.hi))
            .min(o.val.saturating_add(self.hi))
            .min(EXACT);
        let populated = (self.c.len() + o.c.len()).saturating_sub(1) as i64;
        let len = (hi - val).max(0).min(populated) as usize;
        let mut c = vec![T::zero(); len];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                let k = i + j;
                if k < len {
                    c[k] = c[k].add(&a.mul(b));
                }
            }
        }
        Laurent { val, hi, c }.normalize()
    }

    /// Multiplicative inverse. Panics on the zero series.
    pub fn inv(&self) -> Self {
        let a = self.clone().normalize();
        assert!(!a.is_zero(), "inverse of zero Laurent series");
        let rel = if a.hi >= EXACT {
            INV_WINDOW
        } else {
            (a.hi - a.val) as usize
        };
        let rel = rel.max(1);
        let lead = a.c[0].clone();
        let mut c = vec![T::zero(); rel];
        c[0] = T::one().div(&lead);
        for k in 1..rel {
            let mut acc = T::zero();
            for j in 1..=k {
                let aj = if j < a.c.len() {
                    a.c[j].clone()
                } else {
                    T::zero()
                };
                acc = acc.add(&aj.mul(&c[k - j]));
            }
            c[k] = acc.neg().div(&lead);
        }
        Laurent {
            val: -a.val,
            hi: -a.val + rel as i64,
            c,
        }
        .normalize()
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::konst(T::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficient at absolute power `k`. Panics if `k` is outside the
    /// validity window (enlarge `INV_WINDOW` if that ever triggers).
    pub fn coeff(&self, k: i64) -> T {
        if self.is_zero() {
            return T::zero();
        }
        assert!(
            k < self.hi,
            "requested power {k} beyond series window [{}, {})",
            self.val,
            self.hi
        );
        if k < self.val || ((k - self.val) as usize) >= self.c.len() {
            T::zero()
        } else {
            self.c[(k - self.val) as usize].clone()
        }
    }

    /// Coefficient of `t^{-1}`: the residue at the expansion center.
    pub fn residue(&self) -> T {
        self.coeff(-1)
    }
}

impl<T: Coeff> Coeff for Laurent<T> {
    fn zero() -> Self {
        Laurent::zero_series()
    }
    fn one() -> Self {
        Laurent::konst(T::one())
    }
    fn add(&self, o: &Self) -> Self {
        Laurent::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Laurent::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Laurent::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Laurent::div(self, o)
    }
    fn neg(&self) -> Self {
        Laurent::neg(self)
    }
    fn is_zero(&self) -> bool {
        Laurent::is_zero(self)
    }
    fn from_f64(x: f64) -> Self {
        Laurent::konst(T::from_f64(x))
    }
}

/// Univariate series over `Complex64`.
pub type Series1 = Laurent<Complex64>;
/// Bivariate series: inner variable's parameter is the outer `Laurent` level.
pub type Series2 = Laurent<Laurent<Complex64>>;

/// Representation of the inner integration variable `v_in = a + t_in`,
/// expanded at center `a`, inside a bivariate computation.
pub fn inner_var(a: Complex64) -> Series2 {
    Series2::var(Series1::konst(a))
}

/// Representation of the outer integration variable `v_out = b + t_out`:
/// constant with respect to the inner parameter.
pub fn outer_var(b: Complex64) -> Series2 {
    Series2::konst(Series1::var(b))
}

/// Iterated residue of a two-variable rational expression over nested
/// contours: inner residue at `a`, then outer residue at `b`. The expression
/// is built by the caller from [`inner_var`]`(a)` and [`outer_var`]`(b)`.
pub fn iterated_residue(expr: &Series2) -> Complex64 {
    expr.residue().residue()
}
