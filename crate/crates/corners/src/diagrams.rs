//! Kerov diagrams of interlacing pairs, their atomic signed measures, exact
//! piecewise-linear moments, and the deterministic limit shape.

use crate::error::{Error, Result};
use crate::formulas::{self, LevelHeight, ScaledParams};
use crate::quad1d;

/// An interlacing pair `x_1 <= y_1 <= x_2 <= ... <= y_{n-1} <= x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterlacingPair {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl InterlacingPair {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Invalid("need at least one x".into()));
        }
        if ys.len() + 1 != xs.len() {
            return Err(Error::Invalid(format!(
                "interlacing pair needs |y| = |x| - 1, got {} and {}",
                ys.len(),
                xs.len()
            )));
        }
        for i in 0..ys.len() {
            if !(xs[i] <= ys[i] && ys[i] <= xs[i + 1]) {
                return Err(Error::Invalid(format!(
                    "interlacing violated at slot {i}: x={} y={} x'={}",
                    xs[i],
                    ys[i],
                    xs[i + 1]
                )));
            }
        }
        Ok(InterlacingPair { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }
    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Center of the associated diagram: `sum x_i - sum y_i`.
    pub fn center(&self) -> f64 {
        self.xs.iter().sum::<f64>() - self.ys.iter().sum::<f64>()
    }
}

/// A rectangular diagram stored by its breakpoints. Between breakpoints the
/// function is linear; outside their hull it equals `|u - center|`.
#[derive(Debug, Clone)]
pub struct Diagram {
    /// Sorted `(u, w(u))` with ties merged.
    breakpoints: Vec<(f64, f64)>,
    center: f64,
}

impl Diagram {
    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn value(&self, u: f64) -> f64 {
        let first = self.breakpoints.first().expect("diagram has breakpoints");
        let last = self.breakpoints.last().unwrap();
        if u <= first.0 || u >= last.0 {
            return (u - self.center).abs();
        }
        let idx = self.breakpoints.partition_point(|&(bu, _)| bu <= u);
        let (u0, w0) = self.breakpoints[idx - 1];
        let (u1, w1) = self.breakpoints[idx];
        if u1 == u0 {
            return w0;
        }
        w0 + (w1 - w0) * (u - u0) / (u1 - u0)
    }

    /// Exact `int_0^1 w(u) u^k du` by closed-form integration on each linear
    /// piece.
    pub fn moment(&self, k: u32) -> f64 {
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        cuts.push(self.center.clamp(0.0, 1.0));
        for &(u, _) in &self.breakpoints {
            if u > 0.0 && u < 1.0 {
                cuts.push(u);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (l, r) = (w[0], w[1]);
            if r <= l {
                continue;
            }
            // w(u) = a + b u on [l, r]
            let wl = self.value(l);
            let wr = self.value(r);
            let b = (wr - wl) / (r - l);
            let a = wl - b * l;
            let kp1 = (k + 1) as f64;
            let kp2 = (k + 2) as f64;
            acc += a * (r.powi(k as i32 + 1) - l.powi(k as i32 + 1)) / kp1
                + b * (r.powi(k as i32 + 2) - l.powi(k as i32 + 2)) / kp2;
        }
        acc
    }

    /// Atomic measure `w''/2`: half the slope jump at each breakpoint.
    pub fn slope_jump_measure(&self) -> SignedMeasure {
        let n = self.breakpoints.len();
        let mut atoms = Vec::new();
        for i in 0..n {
            let (u, w) = self.breakpoints[i];
            let slope_left = if i == 0 {
                -1.0
            } else {
                let (up, wp) = self.breakpoints[i - 1];
                (w - wp) / (u - up)
            };
            let slope_right = if i == n - 1 {
                1.0
            } else {
                let (un, wn) = self.breakpoints[i + 1];
                (wn - w) / (un - u)
            };
            let jump = 0.5 * (slope_right - slope_left);
            if jump.abs() > 1e-12 {
                atoms.push((u, jump));
            }
        }
        SignedMeasure { atoms }
    }

    /// Supremum distance to another diagram. Both are piecewise linear, so
    /// the supremum is attained at a breakpoint of either (or a center kink).
    pub fn sup_distance(&self, other: &Diagram) -> f64 {
        let mut pts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .map(|&(u, _)| u)
            .collect();
        pts.push(self.center);
        pts.push(other.center);
        pts.iter()
            .map(|&u| (self.value(u) - other.value(u)).abs())
            .fold(0.0, f64::max)
    }

    /// Supremum distance to an arbitrary continuous shape, over the given
    /// evaluation grid plus this diagram's breakpoints.
    pub fn sup_distance_to<F: Fn(f64) -> f64>(&self, shape: F, grid: &[f64]) -> f64 {
        let mut best: f64 = 0.0;
        for &u in grid {
            best = best.max((self.value(u) - shape(u)).abs());
        }
        for &(u, w) in &self.breakpoints {
            best = best.max((w - shape(u)).abs());
        }
        best
    }
}

/// Atomic signed measure: `+1` atoms at the larger family, `-1` at the
/// smaller; total mass one.
#[derive(Debug, Clone)]
pub struct SignedMeasure {
    /// `(location, weight)`.
    pub atoms: Vec<(f64, f64)>,
}

impl SignedMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).sum()
    }

    /// Merges atoms at equal locations and drops exact cancellations.
    pub fn consolidated(&self) -> SignedMeasure {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (u, w) in atoms {
            match out.last_mut() {
                Some(last) if last.0 == u => last.1 += w,
                _ => out.push((u, w)),
            }
        }
        out.retain(|&(_, w)| w.abs() > 1e-12);
        SignedMeasure { atoms: out }
    }
}

/// Builds the diagram of an interlacing pair: center from the alternating
/// sum, breakpoint heights from the displayed partial sums, linear in
/// between, `|u - center|` outside.
pub fn diagram_from_pair(pair: &InterlacingPair) -> Diagram {
    let xs = pair.xs();
    let ys = pair.ys();
    let n = xs.len();
    let center = pair.center();

    let w_at_x = |i: usize| -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            acc += ys[j] - xs[j];
        }
        for j in (i + 1)..n {
            acc += xs[j] - ys[j - 1];
        }
        acc
    };
    let w_at_y = |i: usize| -> f64 {
        let mut acc = 0.0;
        for j in 0..i {
            acc += ys[j] - xs[j];
        }
        acc += xs[i + 1] - xs[i];
        for j in (i + 2)..n {
            acc += xs[j] - ys[j - 1];
        }
        acc
    };

    let mut breakpoints = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        breakpoints.push((xs[i], w_at_x(i)));
        if i + 1 < n {
            breakpoints.push((ys[i], w_at_y(i)));
        }
    }
    // merge coincident breakpoints (padded ties at 1)
    breakpoints.dedup_by(|a, b| a.0 == b.0 && (a.1 - b.1).abs() < 1e-12);
    Diagram {
        breakpoints,
        center,
    }
}

/// The signed interlacing measure of a pair: `+1` at each x, `-1` at each y.
pub fn signed_measure_from_pair(pair: &InterlacingPair) -> SignedMeasure {
    let mut atoms: Vec<(f64, f64)> = pair.xs().iter().map(|&x| (x, 1.0)).collect();
    atoms.extend(pair.ys().iter().map(|&y| (y, -1.0)));
    SignedMeasure { atoms }
}

/// `sum f(x_i) - sum f(y_i)`.
pub fn measure_linear_statistic<F: Fn(f64) -> f64>(m: &SignedMeasure, f: F) -> f64 {
    m.atoms.iter().map(|&(u, w)| w * f(u)).sum()
}

/// Grid resolution of the cached limit shape.
const SHAPE_GRID: usize = 4096;

/// The deterministic limit shape: the unique diagram whose second derivative
/// is the limit density (continuous band plus a possible atom at one).
/// Values are cached on a sine-graded grid at construction.
#[derive(Debug, Clone)]
pub struct LimitShape {
    support: formulas::DensitySupport,
    center: f64,
    /// `(u, phi(u))` across the band.
    grid: Vec<(f64, f64)>,
    phi_g2: f64,
}

impl LimitShape {
    pub fn new(p: &ScaledParams, h: LevelHeight) -> Result<Self> {
        let support = formulas::density_support(p, h);
        let center = formulas::first_moment_diff_limit(1, p, h)?;
        let (g1, g2) = (support.gamma1, support.gamma2);

        // In the graded variable u = g1 + (g2-g1) sin^2 s the band part of
        // phi'' integrates as (2/pi) psi(u(s)) ds with psi smooth, so two
        // cumulative trapezoid passes give phi' and then phi.
        let n = SHAPE_GRID;
        let ds = std::f64::consts::FRAC_PI_2 / n as f64;
        let psi = |s: f64| -> Result<f64> {
            let u = g1 + (g2 - g1) * s.sin().powi(2);
            let u_in = u.clamp(g1 + 1e-14, g2 - 1e-14);
            let full = formulas::limit_density(u_in, p, h)?;
            let root = ((g2 - u_in) * (u_in - g1)).sqrt();
            Ok(full * std::f64::consts::PI * root)
        };
        let mut psis = Vec::with_capacity(n + 1);
        for i in 0..=n {
            psis.push(psi(i as f64 * ds)?);
        }
        // phi'(u(s)) = -1 + (2/pi) int_0^s psi
        let mut dphi = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        dphi.push(-1.0);
        for i in 1..=n {
            acc += 0.5 * (psis[i - 1] + psis[i]) * ds;
            dphi.push(-1.0 + acc * 2.0 / std::f64::consts::PI);
        }
        // phi by integrating phi' in u
        let u_of = |i: usize| g1 + (g2 - g1) * ((i as f64) * ds).sin().powi(2);
        let mut grid = Vec::with_capacity(n + 1);
        let mut phi = center - g1; // phi(g1) = |g1 - center|
        grid.push((g1, phi));
        for i in 1..=n {
            let (ua, ub) = (u_of(i - 1), u_of(i));
            phi += 0.5 * (dphi[i - 1] + dphi[i]) * (ub - ua);
            grid.push((ub, phi));
        }
        let phi_g2 = phi;
        Ok(LimitShape {
            support,
            center,
            grid,
            phi_g2,
        })
    }

    pub fn support(&self) -> &formulas::DensitySupport {
        &self.support
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn value(&self, u: f64) -> f64 {
        let (g1, g2) = (self.support.gamma1, self.support.gamma2);
        if u <= g1 {
            return self.center - u;
        }
        if u >= g2 {
            // slope 1 - 2 atom_mass between the band edge and the atom at 1,
            // slope +1 beyond.
            let slope = 1.0 - 2.0 * self.support.atom_mass;
            if u <= 1.0 {
                return self.phi_g2 + slope * (u - g2);
            }
            return self.phi_g2 + slope * (1.0 - g2) + (u - 1.0);
        }
        let idx = self.grid.partition_point(|&(gu, _)| gu <= u);
        let idx = idx.clamp(1, self.grid.len() - 1);
        let (u0, w0) = self.grid[idx - 1];
        let (u1, w1) = self.grid[idx];
        if u1 == u0 {
            w0
        } else {
            w0 + (w1 - w0) * (u - u0) / (u1 - u0)
        }
    }

    /// `int_0^1 phi(u) u^k du` through the double integration-by-parts
    /// identity, using the density moments rather than the cached grid.
    pub fn moment(&self, k: u32, p: &ScaledParams, h: LevelHeight) -> Result<f64> {
        let m1 = formulas::limit_density_moment(1, p, h)?;
        let mk2 = formulas::limit_density_moment(k + 2, p, h)?;
        let kp1 = (k + 1) as f64;
        let kp2 = (k + 2) as f64;
        Ok(1.0 / kp2 - m1 / kp1 + 2.0 * mk2 / (kp1 * kp2))
    }

    /// Direct numerical moment of the cached shape, for cross-checks.
    pub fn moment_from_grid(&self, k: u32) -> f64 {
        quad1d::gauss_on(&|u: f64| self.value(u) * u.powi(k as i32), 0.0, 1.0, 512)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_particle_diagram() {
        let pair = InterlacingPair::new(vec![0.4], vec![]).unwrap();
        let d = diagram_from_pair(&pair);
        assert_relative_eq!(d.center(), 0.4);
        assert_relative_eq!(d.value(0.4), 0.0);
        assert_relative_eq!(d.value(0.1), 0.3, epsilon = 1e-14);
        assert_relative_eq!(d.value(0.9), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn worked_two_particle_instance() {
        let pair = InterlacingPair::new(vec![0.0, 1.0], vec![0.5]).unwrap();
        let d = diagram_from_pair(&pair);
        assert_relative_eq!(d.center(), 0.5);
        assert_relative_eq!(d.value(0.0), 0.5);
        assert_relative_eq!(d.value(1.0), 0.5);
        assert_relative_eq!(d.value(0.5), 1.0);
        // slope +1 on (x_i, y_i), -1 on (y_i, x_{i+1})
        assert_relative_eq!(d.value(0.25), 0.75);
        assert_relative_eq!(d.value(0.75), 0.75);
    }

    #[test]
    fn boundary_heights_match_center_distance() {
        let pair = InterlacingPair::new(vec![0.1, 0.35, 0.8], vec![0.2, 0.5]).unwrap();
        let d = diagram_from_pair(&pair);
        let u0 = d.center();
        let xs = pair.xs();
        assert_relative_eq!(d.value(xs[0]), (xs[0] - u0).abs(), epsilon = 1e-12);
        assert_relative_eq!(
            d.value(xs[xs.len() - 1]),
            (xs[xs.len() - 1] - u0).abs(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn signed_measure_mass_one() {
        let pair = InterlacingPair::new(vec![0.1, 0.4, 0.9], vec![0.2, 0.6]).unwrap();
        let m = signed_measure_from_pair(&pair);
        assert_relative_eq!(m.total_mass(), 1.0);
    }

    #[test]
    fn linear_statistics() {
        let pair = InterlacingPair::new(vec![0.1, 0.4, 0.9], vec![0.2, 0.6]).unwrap();
        let m = signed_measure_from_pair(&pair);
        assert_relative_eq!(measure_linear_statistic(&m, |_| 1.0), 1.0);
        assert_relative_eq!(
            measure_linear_statistic(&m, |u| u),
            pair.center(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn absolute_value_moment() {
        // w = |u - 1/2| on [0,1], k = 0 -> 1/4
        let pair = InterlacingPair::new(vec![0.5], vec![]).unwrap();
        let d = diagram_from_pair(&pair);
        assert_relative_eq!(d.moment(0), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn sup_distance_to_self_is_zero() {
        let pair = InterlacingPair::new(vec![0.1, 0.4, 0.9], vec![0.2, 0.6]).unwrap();
        let d = diagram_from_pair(&pair);
        assert_eq!(d.sup_distance(&d), 0.0);
    }

    #[test]
    fn padded_ties_merge() {
        let pair = InterlacingPair::new(vec![0.3, 1.0, 1.0], vec![0.9, 1.0]).unwrap();
        let d = diagram_from_pair(&pair);
        assert!(d.value(1.0).is_finite());
        let m = signed_measure_from_pair(&pair).consolidated();
        assert_relative_eq!(m.total_mass(), 1.0);
    }

    fn arb_pair() -> impl Strategy<Value = InterlacingPair> {
        proptest::collection::vec(0.01f64..0.99, 3..=9).prop_map(|mut v| {
            if v.len() % 2 == 0 {
                v.pop();
            }
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (i, u) in v.into_iter().enumerate() {
                if i % 2 == 0 {
                    xs.push(u);
                } else {
                    ys.push(u);
                }
            }
            InterlacingPair::new(xs, ys).unwrap()
        })
    }

    proptest! {
        #[test]
        fn second_derivative_is_twice_signed_measure(pair in arb_pair()) {
            let d = diagram_from_pair(&pair);
            let jumps = d.slope_jump_measure().consolidated();
            let mu = signed_measure_from_pair(&pair).consolidated();
            prop_assert_eq!(jumps.atoms.len(), mu.atoms.len());
            for (a, b) in jumps.atoms.iter().zip(mu.atoms.iter()) {
                prop_assert!((a.0 - b.0).abs() < 1e-12);
                prop_assert!((a.1 - b.1).abs() < 1e-9, "weights {} vs {}", a.1, b.1);
            }
        }

        #[test]
        fn integration_by_parts_chain(pair in arb_pair(), k in 0u32..5) {
            // int w u^k = 1/(k+2) - int w'' u /(2(k+1))
            //           + int w'' u^{k+2} /((k+1)(k+2))
            let d = diagram_from_pair(&pair);
            let mu = signed_measure_from_pair(&pair);
            let w2_moment =
                |j: u32| 2.0 * measure_linear_statistic(&mu, |u| u.powi(j as i32));
            let kp1 = (k + 1) as f64;
            let kp2 = (k + 2) as f64;
            let rhs = 1.0 / kp2 - w2_moment(1) / (2.0 * kp1) + w2_moment(k + 2) / (kp1 * kp2);
            let lhs = d.moment(k);
            prop_assert!((lhs - rhs).abs() < 1e-10, "lhs {} rhs {}", lhs, rhs);
        }

        #[test]
        fn diagram_is_lipschitz_one(pair in arb_pair()) {
            let d = diagram_from_pair(&pair);
            let mut prev_u = -0.2;
            let mut prev_w = d.value(prev_u);
            for i in 1..=120 {
                let u = -0.2 + 1.4 * i as f64 / 120.0;
                let w = d.value(u);
                prop_assert!((w - prev_w).abs() <= (u - prev_u).abs() + 1e-12);
                prev_u = u;
                prev_w = w;
            }
        }
    }

    #[test]
    fn limit_shape_edges_and_mass() {
        let p = ScaledParams::new(1.0, 2.0, 1.0).unwrap();
        let h = LevelHeight::new(1.0).unwrap();
        let shape = LimitShape::new(&p, h).unwrap();
        // phi(1) + phi(0) = 1
        let total = shape.value(0.0) + shape.value(1.0);
        assert_relative_eq!(total, 1.0, epsilon = 1e-5);
        // slopes +-1 outside the support
        let sup = shape.support();
        let du = 1e-4;
        let left = (shape.value(sup.gamma1 - 0.02) - shape.value(sup.gamma1 - 0.02 - du)) / du;
        assert_relative_eq!(left, -1.0, epsilon = 1e-9);
        let right = (shape.value(1.1 + du) - shape.value(1.1)) / du;
        assert_relative_eq!(right, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn limit_shape_lipschitz_on_fine_grid() {
        let p = ScaledParams::new(1.0, 1.0, 1.0).unwrap();
        let h = LevelHeight::new(1.0).unwrap();
        let shape = LimitShape::new(&p, h).unwrap();
        let n = 3000;
        let mut prev = shape.value(0.0);
        for i in 1..=n {
            let u = i as f64 / n as f64;
            let w = shape.value(u);
            assert!(
                (w - prev).abs() <= 1.0 / n as f64 + 1e-6,
                "Lipschitz violated near u={u}"
            );
            prev = w;
        }
    }

    #[test]
    fn limit_shape_moments_agree_both_routes() {
        let p = ScaledParams::new(1.0, 2.0, 1.0).unwrap();
        let h = LevelHeight::new(1.0).unwrap();
        let shape = LimitShape::new(&p, h).unwrap();
        for k in 0..4 {
            let by_parts = shape.moment(k, &p, h).unwrap();
            let from_grid = shape.moment_from_grid(k);
            assert_relative_eq!(by_parts, from_grid, epsilon = 2e-5);
        }
    }

    #[test]
    fn limit_shape_with_atom_descends_to_corner() {
        // m_hat < n_hat: slope -1 between gamma2 and 1, corner at the atom.
        let p = ScaledParams::new(1.0, 1.0, 1.0).unwrap();
        let h = LevelHeight::new(2.0).unwrap();
        let shape = LimitShape::new(&p, h).unwrap();
        let sup = *shape.support();
        assert_eq!(sup.atom_mass, 1.0);
        let du = 1e-5;
        let mid = 0.5 * (sup.gamma2 + 1.0);
        let slope = (shape.value(mid + du) - shape.value(mid)) / du;
        assert_relative_eq!(slope, -1.0, epsilon = 1e-6);
        let after = (shape.value(1.2 + du) - shape.value(1.2)) / du;
        assert_relative_eq!(after, 1.0, epsilon = 1e-6);
    }
}
