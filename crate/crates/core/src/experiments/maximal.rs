//! Discretized restricted maximal operator and the sharpness experiment.
//!
//! `M^(n) f(x) = max over the r-grid of int |f|(x + r y) dnu_n(y)`, with the
//! y-integral exact per grid point: the integrand is constant on the cells
//! of `A_n`, so each cell contributes an increment of the antiderivative of
//! `|f|`. The r-grid can be augmented with per-x witness dilations
//! `r = 1 - x/x0`, which recenter the dilated measure at `x0`; these drive
//! the unboundedness scan below `p = 1/s`.

use super::config::{ExperimentConfig, ExperimentReport, LevelStats, Verdict};
use super::stats::ols;
use super::stepcdf::StepCdf;
use crate::construction::{BranchingSchedule, Realization};
use crate::dyadic::StepFunction;
use crate::error::{Error, Result};
use crate::scalar::DyadicRat;

pub struct MaximalResult {
    /// Sample points (cell midpoints of the x-grid).
    pub xs: Vec<f64>,
    /// `M^(n) f` at the sample points.
    pub values: Vec<f64>,
    pub f_norm_p: f64,
    pub mf_norm_q: f64,
    /// `||M f||_q / ||f||_p`.
    pub norm_ratio: f64,
}

pub struct MaximalGrid {
    pub x_lo: DyadicRat,
    pub x_hi: DyadicRat,
    pub x_grid_log2: u32,
    pub r_grid_log2: u32,
    /// Augment the r-grid at each x with `r = 1 - x/x0` when it lies in [1, 2].
    pub witness_center: Option<f64>,
}

/// `int |f|(x + r y) dnu_n(y)` for one `(x, r)`, exact.
fn dilated_average(
    realization: &Realization,
    n: usize,
    abs_cdf: &StepCdf,
    supp: (f64, f64),
    x: f64,
    r: f64,
) -> f64 {
    let cells = realization.level(n);
    let v = realization.nu_value(n).to_f64();
    let w = (-(n as f64)).exp2();
    // only cells meeting ((supp - x)/r) contribute
    let y_lo = (supp.0 - x) / r;
    let y_hi = (supp.1 - x) / r;
    let k_lo = (y_lo / w).floor() as i64;
    let k_hi = (y_hi / w).ceil() as i64;
    let start = cells.partition_point(|&c| (c as i64) < k_lo);
    let mut acc = 0.0;
    for &c in &cells[start..] {
        if c as i64 > k_hi {
            break;
        }
        let u_lo = x + r * (c as f64 * w);
        let u_hi = x + r * ((c + 1) as f64 * w);
        acc += v / r * (abs_cdf.cdf(u_hi) - abs_cdf.cdf(u_lo));
    }
    acc
}

/// Applies the level-`n` maximal operator to `f` on the given grids.
pub fn maximal_apply(
    realization: &Realization,
    n: usize,
    f: &StepFunction<f64>,
    grid: &MaximalGrid,
    p: f64,
    q: f64,
) -> Result<MaximalResult> {
    if grid.x_hi <= grid.x_lo {
        return Err(Error::invalid("maximal_apply", "empty x-grid"));
    }
    let spacing = (-(grid.x_grid_log2 as f64)).exp2();
    let x_lo = grid.x_lo.to_f64();
    let count = ((grid.x_hi.to_f64() - x_lo) / spacing).round() as usize;
    if count == 0 {
        return Err(Error::invalid("maximal_apply", "empty x-grid"));
    }
    let r_steps = 1u64 << grid.r_grid_log2;

    let abs_f = f.abs();
    let abs_cdf = StepCdf::from_step(&abs_f);
    let supp = match (abs_f.coeffs().keys().next(), abs_f.coeffs().keys().last()) {
        (Some(&a), Some(&b)) => {
            let w = (-(f.level() as f64)).exp2();
            (a as f64 * w, (b + 1) as f64 * w)
        }
        _ => {
            // f = 0
            return Ok(MaximalResult {
                xs: (0..count).map(|i| x_lo + (i as f64 + 0.5) * spacing).collect(),
                values: vec![0.0; count],
                f_norm_p: 0.0,
                mf_norm_q: 0.0,
                norm_ratio: 0.0,
            });
        }
    };

    let mut xs = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let x = x_lo + (i as f64 + 0.5) * spacing;
        let mut best = 0.0f64;
        for j in 0..=r_steps {
            let r = 1.0 + j as f64 / r_steps as f64;
            best = best.max(dilated_average(realization, n, &abs_cdf, supp, x, r));
        }
        if let Some(x0) = grid.witness_center {
            let r = 1.0 - x / x0;
            if (1.0..=2.0).contains(&r) {
                best = best.max(dilated_average(realization, n, &abs_cdf, supp, x, r));
            }
        }
        xs.push(x);
        values.push(best);
    }

    let f_norm_p = f
        .coeffs()
        .values()
        .map(|c| c.abs().powf(p) * (-(f.level() as f64)).exp2())
        .sum::<f64>()
        .powf(1.0 / p);
    let mf_norm_q = values
        .iter()
        .map(|v| v.powf(q) * spacing)
        .sum::<f64>()
        .powf(1.0 / q);
    let norm_ratio = if f_norm_p > 0.0 { mf_norm_q / f_norm_p } else { 0.0 };
    Ok(MaximalResult {
        xs,
        values,
        f_norm_p,
        mf_norm_q,
        norm_ratio,
    })
}

/// Exact supremum over all `r` in `[1, 2]` of the dilated average of an
/// indicator `1[f_lo, f_hi]` against `nu_n`.
///
/// The average as a function of `r` is piecewise of the form `a + b/r`
/// (window endpoints move linearly in `1/r`), so it is monotone between the
/// dilations where a window endpoint meets a support-cell edge; the sup is
/// attained at one of those breakpoints or at `r = 1, 2`.
pub fn indicator_dilation_sup(
    realization: &Realization,
    n: usize,
    nu_cdf: &StepCdf,
    f_lo: f64,
    f_hi: f64,
    x: f64,
) -> f64 {
    let eval = |r: f64| -> f64 { nu_cdf.mass((f_lo - x) / r, (f_hi - x) / r) };
    let mut best = eval(1.0).max(eval(2.0));
    let w = (-(n as f64)).exp2();
    let cells = realization.level(n);
    // candidate dilations: r = (edge_target - x)/e for each cell edge e
    // reachable with r in [1, 2]
    for target in [f_lo, f_hi] {
        let span = target - x;
        if span <= 0.0 {
            continue;
        }
        // edges e in [span/2, span]
        let k_lo = (span / 2.0 / w).floor() as i64 - 1;
        let k_hi = (span / w).ceil() as i64 + 1;
        let start = cells.partition_point(|&c| (c as i64) < k_lo);
        for &c in &cells[start..] {
            if c as i64 > k_hi {
                break;
            }
            for e in [c as f64 * w, (c + 1) as f64 * w] {
                if e > 0.0 {
                    let r = span / e;
                    if (1.0..=2.0).contains(&r) {
                        best = best.max(eval(r));
                    }
                }
            }
        }
    }
    best
}

/// Indicator of `[x0 - 2 delta, x0 + 2 delta]` as a step function on the
/// level-`(n+1)` grid; `x0` must be a level-`n` cell center and
/// `delta = 2^-j` with `j <= n + 2`.
pub fn bump_indicator(x0: DyadicRat, delta_log2: u32, level: u32) -> Result<StepFunction<f64>> {
    let two_delta = DyadicRat::new(2, delta_log2);
    let lo = x0 - two_delta;
    let hi = x0 + two_delta;
    if level < delta_log2 {
        return Err(Error::invalid(
            "bump_indicator",
            format!("delta = 2^-{delta_log2} is below the grid resolution 2^-{level}"),
        ));
    }
    let k_lo = lo.mantissa() << (level - lo.log2_denom());
    let k_hi = hi.mantissa() << (level - hi.log2_denom());
    let coeffs = (k_lo..k_hi).map(|k| (k, 1.0)).collect();
    Ok(StepFunction::new(level, coeffs))
}

/// The center of a surviving level-`n` cell near the median of `A_n`;
/// a point of the limit set up to resolution `2^-n`.
pub fn support_point(realization: &Realization, n: usize) -> DyadicRat {
    let cells = realization.level(n);
    let idx = cells[cells.len() / 2];
    DyadicRat::new(2 * idx as i64 + 1, n as u32 + 1)
}

/// Sharpness experiment: slope of `log2(||M f_delta||_q / ||f_delta||_p)`
/// against `log2 delta` for the shrinking indicator family centered at a
/// point of the set. The two-sided bounds of the sharpness argument give
/// the asymptotic slope `s - 1/p`.
pub fn sharpness_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg
        .n_range
        .map(|(_, hi)| hi)
        .ok_or_else(|| Error::invalid("sharpness_experiment", "requires n_range"))?;
    let p = cfg.p.ok_or_else(|| Error::invalid("sharpness_experiment", "requires p"))?;
    let q = cfg.q.unwrap_or(p);
    let deltas = cfg
        .delta_log2_list
        .clone()
        .ok_or_else(|| Error::invalid("sharpness_experiment", "requires delta_log2_list"))?;
    for &j in &deltas {
        if j as usize > n {
            return Err(Error::invalid(
                "sharpness_experiment",
                format!("delta = 2^-{j} is below the grid resolution 2^-{n}"),
            ));
        }
    }
    let schedule = BranchingSchedule::build(cfg.s, n)?;
    let realization = Realization::sample(&schedule, cfg.seed);
    let x0 = support_point(&realization, n);
    let x0_f = x0.to_f64();

    let grid = MaximalGrid {
        x_lo: -x0,
        x_hi: DyadicRat::from_int(0),
        x_grid_log2: cfg.x_grid_log2.unwrap_or(7),
        r_grid_log2: cfg.r_grid_log2.unwrap_or(10),
        witness_center: Some(x0_f),
    };

    let nu_cdf = StepCdf::nu(&realization, n);
    let spacing = (-(grid.x_grid_log2 as f64)).exp2();
    // M f_delta is supported in [-3, 1]: x = supp f - r * supp nu
    let (x_min, x_max) = (-3.0, 1.0);
    let count = ((x_max - x_min) / spacing).round() as usize;
    let mut pts = Vec::with_capacity(deltas.len());
    let mut per_level = Vec::new();
    for &j in &deltas {
        let f = bump_indicator(x0, j, n as u32 + 1)?;
        // indicator data admit the exact dilation supremum
        let two_delta = 2.0 * (-(j as f64)).exp2();
        let (f_lo, f_hi) = (x0_f - two_delta, x0_f + two_delta);
        let mut mf_norm_q = 0.0;
        let mut max_val = 0.0f64;
        for i in 0..count {
            let x = x_min + (i as f64 + 0.5) * spacing;
            let v = indicator_dilation_sup(&realization, n, &nu_cdf, f_lo, f_hi, x);
            mf_norm_q += v.powf(q) * spacing;
            max_val = max_val.max(v);
        }
        let mf_norm_q = mf_norm_q.powf(1.0 / q);
        // exact for the indicator family
        let f_norm_p = (4.0 * (-(j as f64)).exp2()).powf(1.0 / p);
        debug_assert!({
            let direct: f64 = f
                .coeffs()
                .values()
                .map(|c| c.abs().powf(p) * (-(f.level() as f64)).exp2())
                .sum::<f64>()
                .powf(1.0 / p);
            (direct - f_norm_p).abs() < 1e-9
        });
        let ratio = mf_norm_q / f_norm_p;
        pts.push((-(j as f64), ratio.log2()));
        per_level.push(LevelStats {
            n: j as usize,
            active: true,
            q50: ratio,
            q95: mf_norm_q,
            max_abs: max_val,
            threshold: 0.0,
            exceed_x: 0.0,
            exceed_z: 0.0,
        });
    }
    let (slope, intercept, residual_rms) = ols(&pts)
        .ok_or_else(|| Error::invalid("sharpness_experiment", "need at least two deltas"))?;

    let expected = cfg.s - 1.0 / p;
    let mut report = ExperimentReport::new("sharpness", cfg.clone());
    report.per_level = per_level;
    report.fit = Some(super::config::SlopeFit {
        slope,
        intercept,
        residual_rms,
        levels: deltas.iter().map(|&j| j as usize).collect(),
    });
    report.constants.insert("expected_slope".into(), expected);
    report.constants.insert("x0".into(), x0_f);
    report.verdicts.push(Verdict::new(
        "sharpness_slope",
        (slope - expected).abs() <= 0.03,
        format!("fitted slope {slope:.5}, expected {expected:.5} +- 0.03"),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::make_interval;

    fn realization(s: f64, n_max: usize, seed: u64) -> Realization {
        Realization::sample(&BranchingSchedule::build(s, n_max).unwrap(), seed)
    }

    fn unit_grid() -> MaximalGrid {
        MaximalGrid {
            x_lo: DyadicRat::from_int(-1),
            x_hi: DyadicRat::from_int(0),
            x_grid_log2: 4,
            r_grid_log2: 4,
            witness_center: None,
        }
    }

    #[test]
    fn constant_one_gives_total_mass() {
        let real = realization(0.75, 8, 2);
        // f = 1 on [0, 4] covers x + r [1, 2] for x in [-1, 0], r in [1, 2]
        let coeffs = (0..4).map(|k| (k, 1.0)).collect();
        let f = StepFunction::new(0, coeffs);
        let res = maximal_apply(&real, 8, &f, &unit_grid(), 1.2, 1.2).unwrap();
        for v in res.values {
            assert!((v - 1.0).abs() < 1e-12, "M 1 = total mass");
        }
    }

    #[test]
    fn zero_function_gives_zero() {
        let real = realization(0.75, 6, 2);
        let f = StepFunction::zero(3);
        let res = maximal_apply(&real, 6, &f, &unit_grid(), 1.2, 1.2).unwrap();
        assert!(res.values.iter().all(|&v| v == 0.0));
        assert_eq!(res.norm_ratio, 0.0);
    }

    #[test]
    fn rejects_empty_grid() {
        let real = realization(0.75, 6, 2);
        let f = StepFunction::indicator(make_interval(0, 1), 1.0);
        let mut g = unit_grid();
        g.x_hi = g.x_lo;
        assert!(maximal_apply(&real, 6, &f, &g, 1.2, 1.2).is_err());
    }

    #[test]
    fn witness_dilation_catches_local_mass() {
        let real = realization(0.75, 10, 4);
        let n = 10;
        let x0 = support_point(&real, n);
        let j = 6u32;
        let f = bump_indicator(x0, j, n as u32 + 1).unwrap();
        let grid = MaximalGrid {
            x_lo: -x0,
            x_hi: DyadicRat::from_int(0),
            x_grid_log2: 5,
            r_grid_log2: 6,
            witness_center: Some(x0.to_f64()),
        };
        let res = maximal_apply(&real, n, &f, &grid, 1.2, 1.2).unwrap();
        // witness bound: M f(x) >= nu_n([x0 - delta, x0 + delta])
        let nu = StepCdf::nu(&real, n);
        let delta = (-(j as f64)).exp2();
        let lower = nu.mass(x0.to_f64() - delta, x0.to_f64() + delta);
        assert!(lower > 0.0);
        for (x, v) in res.xs.iter().zip(&res.values) {
            let r = 1.0 - x / x0.to_f64();
            if (1.0..=2.0).contains(&r) {
                assert!(*v >= lower - 1e-12, "witness bound fails at x={x}");
            }
        }
    }

    #[test]
    fn bump_indicator_is_exact() {
        let x0 = DyadicRat::new(2 * 700 + 1, 10); // center of a level-9 cell
        let f = bump_indicator(x0, 5, 10).unwrap();
        // width 4 delta = 2^-3 => 2^7 cells at level 10
        assert_eq!(f.support_cell_count(), 128);
        assert!(bump_indicator(x0, 11, 10).is_err());
    }
}
