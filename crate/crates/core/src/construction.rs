//! The random Cantor construction: branching schedules, sampled nested sets,
//! the normalized densities `nu_n`, their martingale increments `sigma_n`,
//! regularity diagnostics and Fourier transforms.
//!
//! Starting from `[1, 2]`, level `n+1` either keeps both children of every
//! surviving level-`n` cell (`a_{n+1} = 2`) or keeps one uniformly chosen
//! child per cell (`a_{n+1} = 1`). The products `beta_n = a_1 ... a_n` are
//! pinned to the window `2^(s n - 1) < beta_n <= 2^(s n)`, which forces
//! `log2 beta_n = floor(s n)`; all schedule arithmetic is done on those
//! integer logs so the window never suffers from rounding in `2^(s n)`.

use crate::dyadic::StepFunction;
use crate::error::{Error, Result};
use crate::rng::keep_left;
use crate::scalar::{DyadicRat, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Largest supported depth; keeps `beta_n` in `u64` and cell indices in
/// `i64` with room to spare.
pub const MAX_LEVEL: usize = 48;

/// The deterministic branching schedule `(a_n, beta_n)` for dimension `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchingSchedule {
    s: f64,
    a: Vec<u8>,
    beta: Vec<u64>,
}

impl BranchingSchedule {
    /// Greedy maximal schedule: double whenever the window allows it, i.e.
    /// `a_{n+1} = 2` iff `2 beta_n <= 2^(s (n+1))`, compared in log2.
    pub fn build(s: f64, n_max: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::invalid(
                "build_schedule",
                format!("s must lie in (0,1), got {s}"),
            ));
        }
        if n_max == 0 || n_max > MAX_LEVEL {
            return Err(Error::invalid(
                "build_schedule",
                format!("n_max must lie in 1..={MAX_LEVEL}, got {n_max}"),
            ));
        }
        let mut a = Vec::with_capacity(n_max);
        let mut beta = Vec::with_capacity(n_max);
        let mut log2_beta: u32 = 0;
        for n in 1..=n_max {
            let double_ok = (log2_beta + 1) as f64 <= s * n as f64;
            if double_ok {
                log2_beta += 1;
                a.push(2);
            } else {
                a.push(1);
            }
            debug_assert!(log2_beta as f64 <= s * n as f64);
            debug_assert!(log2_beta as f64 > s * n as f64 - 1.0);
            beta.push(1u64 << log2_beta);
        }
        Ok(BranchingSchedule { s, a, beta })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n_max(&self) -> usize {
        self.a.len()
    }

    /// `a_n` for `n` in `1..=n_max`.
    pub fn a(&self) -> &[u8] {
        &self.a
    }

    /// `beta_n` for `n` in `1..=n_max`.
    pub fn beta(&self) -> &[u64] {
        &self.beta
    }

    /// `beta_n`, with `beta_0 = 1`.
    pub fn beta_at(&self, n: usize) -> u64 {
        if n == 0 {
            1
        } else {
            self.beta[n - 1]
        }
    }

    /// `log2 beta_n`.
    pub fn log2_beta(&self, n: usize) -> u32 {
        self.beta_at(n).trailing_zeros()
    }

    /// `a_{n}` for `n >= 1`.
    pub fn a_at(&self, n: usize) -> u8 {
        self.a[n - 1]
    }

    /// True when `sigma_n` is not identically zero, i.e. the step from
    /// level `n` to `n+1` keeps a single child per cell.
    pub fn level_is_active(&self, n: usize) -> bool {
        n + 1 <= self.n_max() && self.a_at(n + 1) == 1
    }

    /// Window check `2^(s n - 1) < beta_n <= 2^(s n)` for all levels.
    pub fn window_holds(&self) -> bool {
        (1..=self.n_max()).all(|n| {
            let c = self.log2_beta(n) as f64;
            c <= self.s * n as f64 && c > self.s * n as f64 - 1.0
        })
    }
}

/// Serialization record for a sampled realization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub s: f64,
    pub n_max: usize,
    pub seed: u64,
    pub a: Vec<u8>,
    pub beta: Vec<u64>,
    pub levels: Vec<Vec<u64>>,
}

/// One sampled sequence of nested surviving-cell sets `S_0, ..., S_n_max`.
///
/// `levels[n]` holds the sorted level-`n` cell indices; `S_0 = {1}` is the
/// index of `[1, 2]`. Immutable once sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    schedule: BranchingSchedule,
    seed: u64,
    levels: Vec<Vec<u64>>,
}

impl Realization {
    /// Samples the construction. The keep-left bit of cell `(n, k)` is a
    /// counter-based mix of `(seed, n, k)`, so the result does not depend on
    /// traversal order and is byte-identical for identical inputs.
    pub fn sample(schedule: &BranchingSchedule, seed: u64) -> Self {
        let mut levels: Vec<Vec<u64>> = Vec::with_capacity(schedule.n_max() + 1);
        levels.push(vec![1]);
        for n in 0..schedule.n_max() {
            let next = Self::split_level(&levels[n], schedule.a_at(n + 1), n as u32, seed);
            levels.push(next);
        }
        Realization {
            schedule: schedule.clone(),
            seed,
            levels,
        }
    }

    fn split_level(current: &[u64], a_next: u8, level: u32, seed: u64) -> Vec<u64> {
        let mut next = Vec::with_capacity(current.len() * a_next as usize);
        for &k in current {
            if a_next == 2 {
                next.push(2 * k);
                next.push(2 * k + 1);
            } else if keep_left(seed, level, k) {
                next.push(2 * k);
            } else {
                next.push(2 * k + 1);
            }
        }
        next
    }

    /// A copy whose levels beyond `prefix_level` are resampled with
    /// `new_seed`; levels up to and including `prefix_level` are shared.
    /// This is the conditional-resampling primitive behind the martingale
    /// checks.
    pub fn resampled_suffix(&self, prefix_level: usize, new_seed: u64) -> Realization {
        assert!(prefix_level <= self.schedule.n_max());
        let mut levels: Vec<Vec<u64>> = self.levels[..=prefix_level].to_vec();
        for n in prefix_level..self.schedule.n_max() {
            let next = Self::split_level(&levels[n], self.schedule.a_at(n + 1), n as u32, new_seed);
            levels.push(next);
        }
        Realization {
            schedule: self.schedule.clone(),
            seed: new_seed,
            levels,
        }
    }

    pub fn schedule(&self) -> &BranchingSchedule {
        &self.schedule
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn s(&self) -> f64 {
        self.schedule.s()
    }

    pub fn n_max(&self) -> usize {
        self.schedule.n_max()
    }

    /// Sorted surviving indices at level `n`.
    pub fn level(&self, n: usize) -> &[u64] {
        &self.levels[n]
    }

    pub fn contains(&self, n: usize, index: i64) -> bool {
        index >= 0 && self.levels[n].binary_search(&(index as u64)).is_ok()
    }

    /// The density value `2^n / beta_n` of `nu_n` on surviving cells,
    /// always a nonnegative power of two.
    pub fn nu_value(&self, n: usize) -> DyadicRat {
        let shift = n as u32 - self.schedule.log2_beta(n);
        DyadicRat::from_int(1i64 << shift)
    }

    /// `nu_n = (2^n / beta_n) 1[A_n]` as a step function.
    pub fn nu_level<S: Scalar>(&self, n: usize) -> StepFunction<S> {
        let v = S::from_dyadic(self.nu_value(n));
        let coeffs: BTreeMap<i64, S> = self.levels[n]
            .iter()
            .map(|&k| (k as i64, v.clone()))
            .collect();
        StepFunction::new(n as u32, coeffs)
    }

    /// `sigma_n = nu_{n+1} - nu_n`, a level-`n+1` step function supported
    /// inside `A_n`. Identically zero on keep-both steps.
    pub fn sigma_level<S: Scalar>(&self, n: usize) -> StepFunction<S> {
        assert!(n + 1 <= self.n_max(), "sigma_level needs level n+1");
        let fine: StepFunction<S> = self.nu_level(n + 1);
        let coarse: StepFunction<S> = self.nu_level(n);
        StepFunction::combine(&S::one(), &fine, &(-S::one()), &coarse)
    }

    /// max over dyadic intervals `I` of level <= n of `nu_n(I) / |I|^s`.
    ///
    /// For an interval of level `l` the mass is `(descendant count) / beta_n`,
    /// so the maximum per level is attained at the cell with the most
    /// surviving descendants.
    pub fn ahlfors_ratio(&self, n: usize) -> f64 {
        let beta_n = self.schedule.beta_at(n) as f64;
        let s = self.s();
        let mut best = 0.0f64;
        // descendant counts per surviving ancestor index, coarsened level by level
        let mut counts: BTreeMap<u64, u64> = self.levels[n].iter().map(|&k| (k, 1)).collect();
        for level in (0..=n).rev() {
            let max_count = counts.values().copied().max().unwrap_or(0) as f64;
            let ratio = (max_count / beta_n) * ((level as f64) * s).exp2();
            best = best.max(ratio);
            let mut coarser: BTreeMap<u64, u64> = BTreeMap::new();
            for (k, c) in counts {
                *coarser.entry(k >> 1).or_insert(0) += c;
            }
            counts = coarser;
        }
        best
    }

    /// Exact closed-form Fourier transform of a step function at frequency
    /// `xi`: the sum over cells of `c_k \int e^{-2 pi i xi y} dy`.
    pub fn fourier_of<S: Scalar>(f: &StepFunction<S>, xi: f64) -> Complex64 {
        let level = f.level();
        let width = (-(level as f64)).exp2();
        if xi == 0.0 {
            let total: f64 = f.coeffs().values().map(|v| v.to_f64() * width).sum();
            return Complex64::new(total, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        // int_a^b e^{-2 pi i xi y} dy = e^{-2 pi i xi (a+b)/2} * sin(pi xi w) / (pi xi)
        let sinc = (PI * xi * width).sin() / (PI * xi);
        for (&k, v) in f.coeffs() {
            let mid = (k as f64 + 0.5) * width;
            let phase = Complex64::from_polar(1.0, -2.0 * PI * xi * mid);
            acc += phase * (v.to_f64() * sinc);
        }
        acc
    }

    /// Fourier transform of `nu_n`.
    pub fn fourier_nu(&self, n: usize, xi: f64) -> Complex64 {
        let f: StepFunction<f64> = self.nu_level(n);
        Self::fourier_of(&f, xi)
    }

    pub fn to_record(&self) -> RealizationRecord {
        RealizationRecord {
            s: self.s(),
            n_max: self.n_max(),
            seed: self.seed,
            a: self.schedule.a().to_vec(),
            beta: self.schedule.beta().to_vec(),
            levels: self.levels.clone(),
        }
    }

    /// Rebuilds from a record, validating nesting and cardinality.
    pub fn from_record(rec: &RealizationRecord) -> Result<Self> {
        let schedule = BranchingSchedule::build(rec.s, rec.n_max)?;
        if schedule.a() != rec.a.as_slice() || schedule.beta() != rec.beta.as_slice() {
            return Err(Error::invalid(
                "realization_from_record",
                "schedule in record does not match the greedy schedule for (s, n_max)",
            ));
        }
        let real = Realization {
            schedule,
            seed: rec.seed,
            levels: rec.levels.clone(),
        };
        real.validate()?;
        Ok(real)
    }

    fn validate(&self) -> Result<()> {
        if self.levels.len() != self.n_max() + 1 || self.levels[0] != vec![1] {
            return Err(Error::invalid(
                "realization_validate",
                "levels must start from S_0 = {[1,2]}",
            ));
        }
        for n in 0..self.n_max() {
            let expect = self.schedule.beta_at(n + 1) as usize;
            if self.levels[n + 1].len() != expect {
                return Err(Error::invalid(
                    "realization_validate",
                    format!("|S_{}| != beta_{}", n + 1, n + 1),
                ));
            }
            if !self.levels[n + 1].windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::invalid("realization_validate", "indices not sorted"));
            }
            for &k in &self.levels[n + 1] {
                if self.levels[n].binary_search(&(k >> 1)).is_err() {
                    return Err(Error::invalid(
                        "realization_validate",
                        format!("cell {} at level {} has no surviving parent", k, n + 1),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    #[test]
    fn schedule_examples() {
        let sch = BranchingSchedule::build(0.75, 5).unwrap();
        assert_eq!(sch.a(), &[1, 2, 2, 2, 1]);
        assert_eq!(sch.beta(), &[1, 2, 4, 8, 8]);
        let sch = BranchingSchedule::build(0.5, 5).unwrap();
        assert_eq!(sch.a(), &[1, 2, 1, 2, 1]);
        assert_eq!(sch.beta(), &[1, 2, 2, 4, 4]);
    }

    #[test]
    fn schedule_window_always_holds() {
        for s in [0.51, 0.6, 2.0 / 3.0, 0.75, 0.8, 5.0 / 6.0, 0.9, 0.99] {
            let sch = BranchingSchedule::build(s, 30).unwrap();
            assert!(sch.window_holds(), "window violated at s={s}");
        }
    }

    #[test]
    fn schedule_rejects_bad_s() {
        assert!(BranchingSchedule::build(0.0, 5).is_err());
        assert!(BranchingSchedule::build(1.0, 5).is_err());
        assert!(BranchingSchedule::build(-0.3, 5).is_err());
        assert!(BranchingSchedule::build(0.5, 0).is_err());
    }

    #[test]
    fn realization_cardinality_and_nesting() {
        let sch = BranchingSchedule::build(0.7, 12).unwrap();
        let r = Realization::sample(&sch, 99);
        for n in 0..=12 {
            assert_eq!(r.level(n).len() as u64, sch.beta_at(n));
        }
        // keep-both steps keep exactly the set of all children
        for n in 1..=12 {
            if sch.a_at(n) == 2 {
                let children: Vec<u64> = r.level(n - 1).iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
                assert_eq!(r.level(n), &children[..]);
            }
        }
    }

    #[test]
    fn realization_is_deterministic() {
        let sch = BranchingSchedule::build(0.6, 14).unwrap();
        let a = Realization::sample(&sch, 1234);
        let b = Realization::sample(&sch, 1234);
        assert_eq!(a, b);
        let c = Realization::sample(&sch, 1235);
        assert_ne!(a, c);
    }

    #[test]
    fn resampled_suffix_shares_prefix() {
        let sch = BranchingSchedule::build(0.6, 10).unwrap();
        let r = Realization::sample(&sch, 5);
        let r2 = r.resampled_suffix(4, 77);
        for n in 0..=4 {
            assert_eq!(r.level(n), r2.level(n));
        }
        assert_eq!(r2.level(10).len() as u64, sch.beta_at(10));
    }

    #[test]
    fn nu_mass_and_sup_bound() {
        let sch = BranchingSchedule::build(0.75, 10).unwrap();
        let r = Realization::sample(&sch, 3);
        for n in 0..=10 {
            let nu: StepFunction<Q> = r.nu_level(n);
            assert_eq!(nu.total_integral(), Q::from_integer(1.into()));
            let sup = nu.sup_abs().to_f64();
            let cap = 2.0 * ((n as f64) * (1.0 - 0.75)).exp2();
            assert!(sup <= cap + 1e-12, "sup nu_{n} = {sup} > {cap}");
        }
    }

    #[test]
    fn sigma_values_and_mass() {
        let sch = BranchingSchedule::build(0.5, 8).unwrap();
        let r = Realization::sample(&sch, 11);
        for n in 0..8 {
            let sigma: StepFunction<Q> = r.sigma_level(n);
            assert!(sigma.total_integral().is_zero());
            if sch.a_at(n + 1) == 2 {
                assert_eq!(sigma.support_cell_count(), 0, "sigma_{n} should vanish");
            } else {
                let v = Q::from_dyadic(r.nu_value(n));
                for c in sigma.coeffs().values() {
                    assert!(c == &v || c == &(-v.clone()), "bad sigma value {c:?}");
                }
            }
        }
    }

    #[test]
    fn telescoping_nu() {
        // nu_k = nu_1 + sum_{n=1}^{k-1} sigma_n, exactly after refinement
        let sch = BranchingSchedule::build(0.6, 9).unwrap();
        let r = Realization::sample(&sch, 21);
        let k = 9;
        let mut acc: StepFunction<Q> = r.nu_level(1);
        for n in 1..k {
            let sigma = r.sigma_level::<Q>(n);
            acc = StepFunction::combine(&Q::one(), &acc, &Q::one(), &sigma);
        }
        let nu_k: StepFunction<Q> = r.nu_level(k);
        assert_eq!(acc, nu_k.refine_to(acc.level()));
    }

    #[test]
    fn support_length_bound() {
        let sch = BranchingSchedule::build(0.8, 16).unwrap();
        let r = Realization::sample(&sch, 1);
        for n in 0..=16 {
            let len = r.level(n).len() as f64 * (-(n as f64)).exp2();
            assert!(len <= ((n as f64) * (0.8 - 1.0)).exp2() + 1e-12);
        }
    }

    #[test]
    fn ahlfors_ratio_bounds() {
        for seed in 0..5u64 {
            for s in [0.55, 0.75, 0.9] {
                let sch = BranchingSchedule::build(s, 10).unwrap();
                let r = Realization::sample(&sch, seed);
                for n in [0, 4, 10] {
                    let ratio = r.ahlfors_ratio(n);
                    assert!(ratio <= 3.0, "eq:ar violated: {ratio}");
                    assert!(ratio >= 1.0 - 1e-12, "full interval witnesses >= 1");
                }
            }
        }
        // nu_0 attains the sup at the full interval
        let sch = BranchingSchedule::build(0.75, 3).unwrap();
        let r = Realization::sample(&sch, 0);
        assert!((r.ahlfors_ratio(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fourier_basics() {
        let sch = BranchingSchedule::build(0.75, 6).unwrap();
        let r = Realization::sample(&sch, 9);
        // total mass at xi = 0
        for n in [0, 3, 6] {
            let v = r.fourier_nu(n, 0.0);
            assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-15);
        }
        // sinc zero of the unit interval at xi = 1
        assert!(r.fourier_nu(0, 1.0).norm() < 1e-12);
        // conjugate symmetry
        let f = r.fourier_nu(5, 3.7);
        let g = r.fourier_nu(5, -3.7);
        assert!((f - g.conj()).norm() < 1e-12);
    }

    #[test]
    fn record_roundtrip() {
        let sch = BranchingSchedule::build(0.7, 8).unwrap();
        let r = Realization::sample(&sch, 1729);
        let rec = r.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        let back: RealizationRecord = serde_json::from_str(&json).unwrap();
        let r2 = Realization::from_record(&back).unwrap();
        assert_eq!(r, r2);
    }
}
