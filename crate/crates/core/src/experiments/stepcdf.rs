//! Float-mode cumulative profiles of step functions.
//!
//! A `StepCdf` is the piecewise-linear antiderivative of a piecewise
//! constant function, with direct access to the underlying values and to
//! the value jumps; it backs the dilation-plan functionals and the
//! discretized maximal operator.

use crate::construction::Realization;
use crate::dyadic::StepFunction;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct StepCdf {
    /// Edges `e_0 < ... < e_N`; the function vanishes outside `[e_0, e_N]`.
    edges: Vec<f64>,
    /// Values on `[e_i, e_{i+1})`, length N.
    vals: Vec<f64>,
    /// Antiderivative at the edges, `cum[0] = 0`, length N+1.
    cum: Vec<f64>,
}

impl StepCdf {
    /// From sorted disjoint runs `(lo, hi, value)`; gaps between runs are
    /// zero-valued.
    pub fn from_runs(runs: &[(f64, f64, f64)]) -> StepCdf {
        let mut edges = Vec::with_capacity(2 * runs.len() + 1);
        let mut vals = Vec::with_capacity(2 * runs.len());
        for &(lo, hi, v) in runs {
            debug_assert!(lo < hi);
            match edges.last() {
                None => {
                    edges.push(lo);
                }
                Some(&last) if last < lo => {
                    vals.push(0.0);
                    edges.push(lo);
                }
                _ => {}
            }
            vals.push(v);
            edges.push(hi);
        }
        let mut cum = Vec::with_capacity(edges.len());
        cum.push(0.0);
        for i in 0..vals.len() {
            cum.push(cum[i] + vals[i] * (edges[i + 1] - edges[i]));
        }
        StepCdf { edges, vals, cum }
    }

    pub fn from_step<S: Scalar>(f: &StepFunction<S>) -> StepCdf {
        let w = (-(f.level() as f64)).exp2();
        let runs: Vec<(f64, f64, f64)> = f
            .coeffs()
            .iter()
            .map(|(&k, v)| (k as f64 * w, (k + 1) as f64 * w, v.to_f64()))
            .collect();
        StepCdf::from_runs(&runs)
    }

    /// The increment profile `sigma_n = nu_{n+1} - nu_n` of a realization.
    pub fn sigma(realization: &Realization, n: usize) -> StepCdf {
        let f: StepFunction<f64> = realization.sigma_level(n);
        StepCdf::from_step(&f)
    }

    /// The density profile `nu_n`.
    pub fn nu(realization: &Realization, n: usize) -> StepCdf {
        let f: StepFunction<f64> = realization.nu_level(n);
        StepCdf::from_step(&f)
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Antiderivative at `u` (0 left of the support).
    pub fn cdf(&self, u: f64) -> f64 {
        if self.edges.is_empty() || u <= self.edges[0] {
            return 0.0;
        }
        if u >= *self.edges.last().unwrap() {
            return *self.cum.last().unwrap();
        }
        let i = match self.edges.binary_search_by(|e| e.total_cmp(&u)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.cum[i] + self.vals[i] * (u - self.edges[i])
    }

    /// Value at `u` (right-continuous).
    pub fn value(&self, u: f64) -> f64 {
        if self.edges.is_empty() || u < self.edges[0] || u >= *self.edges.last().unwrap() {
            return 0.0;
        }
        let i = match self.edges.binary_search_by(|e| e.total_cmp(&u)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.vals[i]
    }

    /// Mass on `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.cdf(b) - self.cdf(a)
    }

    /// Edge positions with the value jump there (first edge jumps from 0,
    /// last edge jumps to 0). Only nonzero jumps are yielded.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.edges.len());
        for (i, &e) in self.edges.iter().enumerate() {
            let before = if i == 0 { 0.0 } else { self.vals[i - 1] };
            let after = if i < self.vals.len() { self.vals[i] } else { 0.0 };
            let jump = after - before;
            if jump != 0.0 {
                out.push((e, jump));
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::BranchingSchedule;

    #[test]
    fn cdf_of_simple_runs() {
        let c = StepCdf::from_runs(&[(0.0, 1.0, 2.0), (2.0, 3.0, -1.0)]);
        assert_eq!(c.cdf(0.5), 1.0);
        assert_eq!(c.cdf(1.5), 2.0);
        assert_eq!(c.cdf(2.5), 1.5);
        assert_eq!(c.cdf(10.0), 1.0);
        assert_eq!(c.value(0.5), 2.0);
        assert_eq!(c.value(1.5), 0.0);
        assert_eq!(c.mass(0.5, 2.5), 0.5);
        let jumps = c.jumps();
        assert_eq!(jumps, vec![(0.0, 2.0), (1.0, -2.0), (2.0, -1.0), (3.0, 1.0)]);
    }

    #[test]
    fn sigma_profile_balances() {
        let sch = BranchingSchedule::build(0.6, 8).unwrap();
        let real = Realization::sample(&sch, 3);
        for n in 0..8 {
            let c = StepCdf::sigma(&real, n);
            assert!(c.total().abs() < 1e-12, "sigma mass must vanish");
            if !sch.level_is_active(n) {
                assert!(c.is_empty());
            }
        }
        let nu = StepCdf::nu(&real, 5);
        assert!((nu.total() - 1.0).abs() < 1e-12);
    }
}
