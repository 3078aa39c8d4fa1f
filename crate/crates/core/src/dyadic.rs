//! Dyadic intervals and piecewise-constant (step) functions on dyadic grids.
//!
//! This is the substrate every measure in the crate lives on: a level-`n`
//! step function is a finite table of cell index -> value over the grid of
//! intervals `[k 2^-n, (k+1) 2^-n]`. With the exact backend, evaluation and
//! integration carry no rounding at all.

use crate::error::{Error, Result};
use crate::scalar::{DyadicRat, Scalar};
use std::collections::BTreeMap;

/// The level-`n` dyadic interval `[k 2^-n, (k+1) 2^-n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    level: u32,
    index: i64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: i64) -> Self {
        DyadicInterval { level, index }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn lo(&self) -> DyadicRat {
        DyadicRat::new(self.index, self.level)
    }

    pub fn hi(&self) -> DyadicRat {
        DyadicRat::new(self.index + 1, self.level)
    }

    pub fn length(&self) -> DyadicRat {
        DyadicRat::new(1, self.level)
    }

    /// The two level-`n+1` children; the left one has index `2k`.
    pub fn children(&self) -> (DyadicInterval, DyadicInterval) {
        (
            DyadicInterval::new(self.level + 1, 2 * self.index),
            DyadicInterval::new(self.level + 1, 2 * self.index + 1),
        )
    }
}

/// A signed piecewise-constant function supported on finitely many cells of
/// one dyadic grid level. Missing indices are zero.
///
/// Values are immutable after construction; instances are freely shared
/// across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<S: Scalar> {
    level: u32,
    coeffs: BTreeMap<i64, S>,
}

impl<S: Scalar> StepFunction<S> {
    pub fn new(level: u32, coeffs: BTreeMap<i64, S>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        StepFunction { level, coeffs }
    }

    pub fn zero(level: u32) -> Self {
        StepFunction {
            level,
            coeffs: BTreeMap::new(),
        }
    }

    /// Constant `value` on a single interval.
    pub fn indicator(interval: DyadicInterval, value: S) -> Self {
        let mut coeffs = BTreeMap::new();
        if !value.is_zero() {
            coeffs.insert(interval.index(), value);
        }
        StepFunction {
            level: interval.level(),
            coeffs,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, S> {
        &self.coeffs
    }

    pub fn support_cell_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Value at `t`. At a shared cell boundary the right cell wins, i.e.
    /// cells are treated as `[k 2^-n, (k+1) 2^-n)`.
    pub fn eval(&self, t: &S) -> S {
        let idx = t.floor_scaled(self.level);
        self.coeffs.get(&idx).cloned().unwrap_or_else(S::zero)
    }

    pub fn eval_dyadic(&self, t: DyadicRat) -> S {
        self.eval(&S::from_dyadic(t))
    }

    /// Exact integral over `[a, b]`.
    pub fn integral(&self, a: &S, b: &S) -> Result<S> {
        if a > b {
            return Err(Error::invalid("step_integral", "requires a <= b"));
        }
        let lo_idx = a.floor_scaled(self.level);
        let hi_idx = b.floor_scaled(self.level);
        let mut acc = S::zero();
        for (&k, v) in self.coeffs.range(lo_idx..=hi_idx) {
            let cell_lo = S::from_dyadic(DyadicRat::new(k, self.level));
            let cell_hi = S::from_dyadic(DyadicRat::new(k + 1, self.level));
            let lo = if a > &cell_lo { a.clone() } else { cell_lo };
            let hi = if b < &cell_hi { b.clone() } else { cell_hi };
            if hi > lo {
                acc = acc + v.clone() * (hi - lo);
            }
        }
        Ok(acc)
    }

    pub fn total_integral(&self) -> S {
        let mut acc = S::zero();
        let w = S::from_dyadic(DyadicRat::new(1, self.level));
        for v in self.coeffs.values() {
            acc = acc + v.clone() * w.clone();
        }
        acc
    }

    pub fn sup_abs(&self) -> S {
        let mut best = S::zero();
        for v in self.coeffs.values() {
            let a = v.clone().abs();
            if a > best {
                best = a;
            }
        }
        best
    }

    /// The same function re-indexed on a finer grid. Splitting every cell
    /// into children with the parent's value changes no evaluation and no
    /// integral.
    pub fn refine_to(&self, level: u32) -> StepFunction<S> {
        assert!(level >= self.level, "refinement never coarsens");
        let shift = level - self.level;
        let mut coeffs = BTreeMap::new();
        for (&k, v) in &self.coeffs {
            for j in 0..(1i64 << shift) {
                coeffs.insert((k << shift) + j, v.clone());
            }
        }
        StepFunction { level, coeffs }
    }

    /// `c1 * f + c2 * g` at the common refinement level.
    pub fn combine(c1: &S, f: &StepFunction<S>, c2: &S, g: &StepFunction<S>) -> StepFunction<S> {
        let level = f.level.max(g.level);
        let fr = f.refine_to(level);
        let gr = g.refine_to(level);
        let mut coeffs: BTreeMap<i64, S> = BTreeMap::new();
        for (&k, v) in &fr.coeffs {
            let add = c1.clone() * v.clone();
            let entry = coeffs.entry(k).or_insert_with(S::zero);
            *entry = entry.clone() + add;
        }
        for (&k, v) in &gr.coeffs {
            let add = c2.clone() * v.clone();
            let entry = coeffs.entry(k).or_insert_with(S::zero);
            *entry = entry.clone() + add;
        }
        StepFunction::new(level, coeffs)
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> StepFunction<S> {
        StepFunction {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .map(|(&k, v)| (k, v.clone().abs()))
                .collect(),
        }
    }
}

/// Builds a level-`n` interval; `[k 2^-n, (k+1) 2^-n]` for index `k`.
pub fn make_interval(level: u32, index: i64) -> DyadicInterval {
    DyadicInterval::new(level, index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n.into(), d.into())
    }

    #[test]
    fn interval_endpoints() {
        // (0, 1) -> [1, 2]
        let d = make_interval(0, 1);
        assert_eq!(d.lo(), DyadicRat::from_int(1));
        assert_eq!(d.hi(), DyadicRat::from_int(2));
        // (1, 2) -> [1, 1.5]
        let d = make_interval(1, 2);
        assert_eq!(d.lo().to_f64(), 1.0);
        assert_eq!(d.hi().to_f64(), 1.5);
        // (3, 9) -> [1.125, 1.25]
        let d = make_interval(3, 9);
        assert_eq!(d.lo().to_f64(), 1.125);
        assert_eq!(d.hi().to_f64(), 1.25);
        assert_eq!(d.length().to_f64(), 0.125);
    }

    #[test]
    fn children_cover_parent() {
        let d = make_interval(0, 1); // [1, 2]
        let (l, r) = d.children();
        assert_eq!(l, make_interval(1, 2)); // [1, 1.5]
        assert_eq!(r, make_interval(1, 3)); // [1.5, 2]
        assert_eq!(l.hi(), r.lo());
        let (ll, lr) = l.children();
        assert_eq!(ll.lo().to_f64(), 1.0);
        assert_eq!(ll.hi().to_f64(), 1.25);
        assert_eq!(lr.hi().to_f64(), 1.5);
        assert_eq!(ll.level(), l.level() + 1);
    }

    /// nu_0 = 1[1,2]; sigma_0 for the realization keeping [1, 1.5].
    fn nu0_sigma0() -> (StepFunction<Q>, StepFunction<Q>) {
        let nu0 = StepFunction::indicator(make_interval(0, 1), q(1, 1));
        let nu1 = StepFunction::indicator(make_interval(1, 2), q(2, 1));
        let sigma0 = StepFunction::combine(&q(1, 1), &nu1, &q(-1, 1), &nu0);
        (nu0, sigma0)
    }

    #[test]
    fn eval_with_right_cell_boundary_rule() {
        let (nu0, sigma0) = nu0_sigma0();
        assert_eq!(nu0.eval(&q(13, 10)), q(1, 1)); // t = 1.3
        assert_eq!(nu0.eval(&q(5, 2)), q(0, 1)); // t = 2.5
        assert_eq!(sigma0.eval(&q(17, 10)), q(-1, 1)); // t = 1.7
        // boundary: at 1.5 the right cell's value (-1) wins
        assert_eq!(sigma0.eval(&q(3, 2)), q(-1, 1));
        assert_eq!(sigma0.eval(&q(1, 1)), q(1, 1));
    }

    #[test]
    fn integral_examples() {
        let (nu0, sigma0) = nu0_sigma0();
        assert_eq!(nu0.integral(&q(1, 1), &q(2, 1)).unwrap(), q(1, 1));
        assert_eq!(sigma0.integral(&q(1, 1), &q(2, 1)).unwrap(), q(0, 1));
        assert_eq!(sigma0.integral(&q(1, 1), &q(5, 4)).unwrap(), q(1, 4));
        // reversed bounds are rejected
        assert!(sigma0.integral(&q(2, 1), &q(1, 1)).is_err());
    }

    #[test]
    fn combine_levels_and_identity() {
        let (nu0, _) = nu0_sigma0();
        let nu1 = StepFunction::indicator(make_interval(1, 2), q(2, 1));
        let combined = StepFunction::combine(&q(1, 1), &nu1, &q(-1, 1), &nu0);
        assert_eq!(combined.level(), 1);
        // (1, f, 0, g) is f refined to the max level
        let ident = StepFunction::combine(&q(1, 1), &nu0, &q(0, 1), &nu1);
        assert_eq!(ident, nu0.refine_to(1));
    }

    #[test]
    fn refinement_preserves_everything() {
        let (_, sigma0) = nu0_sigma0();
        let fine = sigma0.refine_to(4);
        for t in [q(1, 1), q(9, 8), q(3, 2), q(31, 16), q(7, 4)] {
            assert_eq!(sigma0.eval(&t), fine.eval(&t));
        }
        assert_eq!(
            sigma0.integral(&q(1, 1), &q(7, 4)).unwrap(),
            fine.integral(&q(1, 1), &q(7, 4)).unwrap()
        );
    }
}
