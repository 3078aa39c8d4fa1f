//! The product functional behind the maximal-operator reduction and its
//! adversarial lower bound.
//!
//! For a union of intervals `Omega` carrying a piecewise-constant dilation
//! assignment `r`, the functional is
//!
//! ```text
//! |Omega|^(1-d) * int ( int_Omega sigma_k((z - t)/r(t)) dt )^d dz
//! ```
//!
//! The inner integral `H(z)` is piecewise affine in `z` (its slope jumps
//! exactly where some cell endpoint maps onto a grid edge of `sigma_k`), so
//! the outer integral of the polynomial `H^d` is evaluated in closed form
//! segment by segment. This equals the d-fold box integral over
//! `Omega^d` of the line sweep by Fubini, with the per-cell x-integrals
//! done exactly.

use super::config::{ExperimentConfig, ExperimentReport, LevelStats, Verdict};
use super::sampling::rng_for;
use super::stats::log2_slope_fit;
use super::stepcdf::StepCdf;
use crate::construction::Realization;
use crate::error::{Error, Result};
use crate::scalar::DyadicRat;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

/// One cell of a dilation plan: offsets in `[lo, hi)` share the slope `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanCell {
    pub lo: DyadicRat,
    pub hi: DyadicRat,
    pub r: f64,
}

/// A union of disjoint dyadic intervals in `[-4, 0]` with a
/// piecewise-constant dilation assignment into `[1, 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DilationPlan {
    pub cells: Vec<PlanCell>,
}

impl DilationPlan {
    pub fn new(cells: Vec<PlanCell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::invalid("dilation_plan", "Omega must be nonempty"));
        }
        let lo_bound = DyadicRat::from_int(-4);
        let hi_bound = DyadicRat::from_int(0);
        for w in cells.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::invalid("dilation_plan", "cells must be sorted and disjoint"));
            }
        }
        for c in &cells {
            if c.lo >= c.hi || c.lo < lo_bound || c.hi > hi_bound {
                return Err(Error::invalid("dilation_plan", "cells must be nonempty and inside [-4, 0]"));
            }
            if !(1.0..=2.0).contains(&c.r) {
                return Err(Error::invalid("dilation_plan", "dilations must lie in [1, 2]"));
            }
        }
        Ok(DilationPlan { cells })
    }

    pub fn omega_length(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.hi.to_f64() - c.lo.to_f64())
            .sum()
    }
}

/// `M*_{k,r} 1[Omega](z)`: the inner x-integral of the functional,
/// evaluated directly from the sigma antiderivative.
pub fn mstar_eval(sigma: &StepCdf, plan: &DilationPlan, z: f64) -> f64 {
    plan.cells
        .iter()
        .map(|c| {
            let ua = (z - c.lo.to_f64()) / c.r;
            let ub = (z - c.hi.to_f64()) / c.r;
            c.r * (sigma.cdf(ua) - sigma.cdf(ub))
        })
        .sum()
}

/// Integral over one segment of `(a + slope (z - z0))^d` for `z` in
/// `[z0, z0 + len]`, via the symmetric binomial form (odd powers of the
/// half-swing integrate to zero).
fn integrate_affine_power(h_start: f64, h_end: f64, len: f64, d: usize) -> f64 {
    let c = 0.5 * (h_start + h_end);
    let h = 0.5 * (h_end - h_start);
    let mut acc = 0.0;
    let mut comb = 1.0f64; // C(d, j)
    for j in 0..=d {
        if j % 2 == 0 {
            acc += comb * c.powi((d - j) as i32) * h.powi(j as i32) / (j as f64 + 1.0);
        }
        comb = comb * (d - j) as f64 / (j as f64 + 1.0);
    }
    acc * len
}

/// Slope-change events of `H`, ordered by `z`.
fn slope_events(sigma: &StepCdf, plan: &DilationPlan) -> Vec<(f64, f64)> {
    let jumps = sigma.jumps();
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(2 * plan.cells.len() * jumps.len());
    for c in &plan.cells {
        let (a, b) = (c.lo.to_f64(), c.hi.to_f64());
        for &(t, dj) in &jumps {
            // d/dz of the a-endpoint term is +sigma((z-a)/r); of the b one, -sigma((z-b)/r)
            events.push((a + c.r * t, dj));
            events.push((b + c.r * t, -dj));
        }
    }
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    events
}

/// The normalized d-fold product functional of `sigma_k` over the plan.
/// Signed; exactly zero on keep-both levels.
pub fn phi_functional(realization: &Realization, k: usize, plan: &DilationPlan, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid("phi_functional", "requires d >= 2"));
    }
    if k + 1 > realization.n_max() {
        return Err(Error::invalid("phi_functional", "realization too shallow for sigma_k"));
    }
    let sigma = StepCdf::sigma(realization, k);
    if sigma.is_empty() {
        return Ok(0.0);
    }
    let events = slope_events(&sigma, plan);
    let mut integral = 0.0f64;
    let mut slope = 0.0f64;
    let mut h = 0.0f64;
    let mut i = 0usize;
    while i < events.len() {
        let z = events[i].0;
        while i < events.len() && events[i].0 == z {
            slope += events[i].1;
            i += 1;
        }
        if i >= events.len() {
            break;
        }
        let len = events[i].0 - z;
        if len > 0.0 && (h != 0.0 || slope != 0.0) {
            let h_end = h + slope * len;
            integral += integrate_affine_power(h, h_end, len, d);
            h = h_end;
        }
    }
    debug_assert!(h.abs() < 1e-6, "H must return to zero after the sweep");
    Ok(plan.omega_length().powi(1 - d as i32) * integral)
}

/// The adversary value and its grid-refinement diagnostic.
#[derive(Clone, Debug)]
pub struct AdversaryValue {
    pub value: f64,
    /// Same functional one x-grid level coarser.
    pub coarse_value: f64,
    /// Center of the targeted surviving cell.
    pub cell_center: f64,
}

/// Dilation plan aiming every line through the center of `D^d` for the
/// chosen surviving cell `D`: on `Omega = [-c, 0]` (c the cell center) the
/// exact assignment is `r(t) = (c - t)/c`; it is sampled at cell midpoints
/// of the level-`grid_log2` dyadic grid.
pub fn adversary_plan(realization: &Realization, n: usize, grid_log2: u32) -> DilationPlan {
    let cells_n = realization.level(n);
    let target = cells_n[cells_n.len() / 2];
    // center of [target 2^-n, (target+1) 2^-n]
    let c = DyadicRat::new(2 * target as i64 + 1, n as u32 + 1);
    let g = grid_log2.max(n as u32 + 1);
    let c_f = c.to_f64();
    let lo_idx = -(c.mantissa() << (g - c.log2_denom()));
    let mut cells = Vec::with_capacity(lo_idx.unsigned_abs() as usize);
    for k in lo_idx..0 {
        let lo = DyadicRat::new(k, g);
        let hi = DyadicRat::new(k + 1, g);
        let mid = (lo.to_f64() + hi.to_f64()) / 2.0;
        let r = (1.0 - mid / c_f).clamp(1.0, 2.0);
        cells.push(PlanCell { lo, hi, r });
    }
    DilationPlan::new(cells).expect("adversary plan is valid")
}

/// Evaluates the adversary functional at `x_grid_log2` with a one-level
/// refinement check.
pub fn phi_adversary(
    realization: &Realization,
    n: usize,
    d: usize,
    x_grid_log2: u32,
) -> Result<AdversaryValue> {
    let plan_fine = adversary_plan(realization, n, x_grid_log2);
    let plan_coarse = adversary_plan(realization, n, x_grid_log2.saturating_sub(1).max(n as u32 + 1));
    let value = phi_functional(realization, n, &plan_fine, d)?;
    let coarse_value = phi_functional(realization, n, &plan_coarse, d)?;
    let cells_n = realization.level(n);
    let target = cells_n[cells_n.len() / 2];
    Ok(AdversaryValue {
        value,
        coarse_value,
        cell_center: (target as f64 + 0.5) * (-(n as f64)).exp2(),
    })
}

fn random_plan(rng: &mut ChaCha20Rng, omega_grid_log2: u32, r_grid_log2: u32) -> DilationPlan {
    loop {
        let n_cells = 4i64 << omega_grid_log2; // cells of [-4, 0]
        let mut cells = Vec::new();
        for k in -n_cells..0 {
            if rng.gen_bool(0.5) {
                let r_steps = 1i64 << r_grid_log2;
                let r = 1.0 + rng.gen_range(0..=r_steps) as f64 / r_steps as f64;
                cells.push(PlanCell {
                    lo: DyadicRat::new(k, omega_grid_log2),
                    hi: DyadicRat::new(k + 1, omega_grid_log2),
                    r,
                });
            }
        }
        if !cells.is_empty() {
            return DilationPlan::new(cells).expect("random plan is valid");
        }
    }
}

/// Best (signed) functional value over `budget` candidates: the adversary
/// plan plus seeded random piecewise-constant plans. A lower bound for the
/// supremum over all measurable dilation choices.
pub fn phi_search(
    realization: &Realization,
    k: usize,
    d: usize,
    budget: usize,
    seed: u64,
    x_grid_log2: u32,
) -> Result<f64> {
    if budget < 1 {
        return Err(Error::invalid("phi_search", "requires budget >= 1"));
    }
    let adv = adversary_plan(realization, k, x_grid_log2);
    let mut best = phi_functional(realization, k, &adv, d)?;
    let mut rng = rng_for(seed, 0x5EA2C4);
    for _ in 1..budget {
        let omega_log2 = rng.gen_range(2..=4);
        let plan = random_plan(&mut rng, omega_log2, 6);
        let v = phi_functional(realization, k, &plan, d)?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Scaling experiment for the adversary value: median `|phi|` per level
/// over independent realizations, with a log2 slope fit across the active
/// levels of the requested range.
pub fn phi_scaling_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("phi_experiment", "requires trials >= 1"));
    }
    let (n_lo, n_hi) = cfg
        .n_range
        .ok_or_else(|| Error::invalid("phi_experiment", "requires n_range"))?;
    let probe = crate::construction::BranchingSchedule::build(
        cfg.s,
        (n_hi + 16).min(crate::construction::MAX_LEVEL),
    )?;
    let fit_levels = super::tail::active_levels(&probe, n_lo, n_hi);
    if fit_levels.is_empty() {
        return Err(Error::invalid("phi_experiment", "no active levels in range"));
    }
    let depth = fit_levels.iter().max().unwrap() + 1;
    let schedule = crate::construction::BranchingSchedule::build(cfg.s, depth)?;
    let grid = cfg.x_grid_log2.unwrap_or(8);

    let rows: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let real = Realization::sample(&schedule, cfg.seed.wrapping_add(t as u64));
            fit_levels
                .iter()
                .map(|&n| {
                    phi_adversary(&real, n, cfg.d, grid)
                        .map(|a| a.value.abs())
                        .unwrap_or(0.0)
                })
                .collect()
        })
        .collect();

    let mut per_level = Vec::new();
    let mut medians = Vec::new();
    for (i, &n) in fit_levels.iter().enumerate() {
        let vals = super::stats::sort_abs(&rows.iter().map(|r| r[i]).collect::<Vec<_>>());
        let med = super::stats::quantile(&vals, 0.5);
        medians.push((n, med));
        per_level.push(LevelStats {
            n,
            active: true,
            q50: med,
            q95: super::stats::quantile(&vals, 0.95),
            max_abs: *vals.last().unwrap(),
            threshold: 0.0,
            exceed_x: 0.0,
            exceed_z: 0.0,
        });
    }
    let fit = log2_slope_fit(&medians);

    let mut report = ExperimentReport::new("phi", cfg.clone());
    report.per_level = per_level;
    let expected = cfg.d as f64 - 1.0 - cfg.d as f64 * cfg.s;
    report.constants.insert("expected_slope".into(), expected);
    if let Some(f) = &fit {
        report.verdicts.push(Verdict::new(
            "adversary_slope",
            (f.slope - expected).abs() <= 0.15,
            format!("fitted slope {:.4}, expected {expected:.4} +- 0.15", f.slope),
        ));
    }
    report.fit = fit;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::BranchingSchedule;

    fn realization(s: f64, n_max: usize, seed: u64) -> Realization {
        Realization::sample(&BranchingSchedule::build(s, n_max).unwrap(), seed)
    }

    #[test]
    fn inactive_level_gives_zero() {
        let real = realization(0.6, 8, 5);
        // n = 6 at s = 0.6 is a keep-both step: sigma_6 = 0
        assert!(!real.schedule().level_is_active(6));
        let plan = adversary_plan(&real, 6, 8);
        assert_eq!(phi_functional(&real, 6, &plan, 2).unwrap(), 0.0);
    }

    #[test]
    fn adversary_targets_cell_center() {
        let real = realization(0.6, 8, 5);
        let plan = adversary_plan(&real, 4, 8);
        let cells_n = real.level(4);
        let c = (cells_n[cells_n.len() / 2] as f64 + 0.5) / 16.0;
        // every plan cell maps its midpoint onto the cell center at z = c
        for pc in plan.cells.iter().step_by(7) {
            let mid = (pc.lo.to_f64() + pc.hi.to_f64()) / 2.0;
            let t = (c - mid) / pc.r;
            assert!((t - c).abs() < 1e-12);
        }
        // Omega = [-c, 0]
        assert!((plan.omega_length() - c).abs() < 1e-12);
        assert!(plan.omega_length() >= 1.0);
    }

    #[test]
    fn search_dominates_adversary_and_budget_one_matches() {
        let real = realization(0.6, 10, 11);
        let n = 7; // active at s = 0.6
        let adv = phi_adversary(&real, n, 2, 8).unwrap();
        let best1 = phi_search(&real, n, 2, 1, 123, 8).unwrap();
        assert_eq!(best1, adv.value);
        let best = phi_search(&real, n, 2, 20, 123, 8).unwrap();
        assert!(best >= adv.value);
    }

    #[test]
    fn refinement_is_consistent() {
        let real = realization(0.6, 10, 3);
        let adv = phi_adversary(&real, 7, 2, 9).unwrap();
        // one-level refinement moves the value by little
        let scale = adv.value.abs().max(adv.coarse_value.abs()).max(1e-6);
        assert!(
            (adv.value - adv.coarse_value).abs() / scale < 0.5,
            "refinement jump too large: {} vs {}",
            adv.value,
            adv.coarse_value
        );
    }

    #[test]
    fn affine_power_integration_exact() {
        // int_0^2 (1 + z)^2 dz = 26/3
        let v = integrate_affine_power(1.0, 3.0, 2.0, 2);
        assert!((v - 26.0 / 3.0).abs() < 1e-12);
        // int_0^1 (2 - 3z)^3 dz: antiderivative -(2-3z)^4/12 => (16 - 1)/12
        let v = integrate_affine_power(2.0, -1.0, 1.0, 3);
        assert!((v - 15.0 / 12.0).abs() < 1e-12);
    }
}
