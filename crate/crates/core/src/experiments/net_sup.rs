//! Net-supremum experiment: maximize `|X_n|` over a finite dyadic net of
//! `(x, r)` parameters inside a separation stratum, and measure the
//! empirical Lipschitz constant of the parameter dependence on neighboring
//! net points.

use super::config::{ExperimentConfig, ExperimentReport, LevelStats, Verdict};
use super::sampling::{rng_for, sample_line_in_stratum};
use super::stats::{log2_slope_fit, quantile, sort_abs};
use crate::construction::{BranchingSchedule, Realization};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_separation, line_integral, IntegrandKind, LineIntegral, LineParams, Region,
    SeparationStratum,
};
use crate::scalar::DyadicRat;
use rayon::prelude::*;

pub const NET_BUDGET: u128 = 200_000;

/// Axis-aligned dyadic net around a center point of the stratum. Points
/// whose offsets leave the stratum or the parameter box are dropped.
#[derive(Debug)]
pub struct ParameterNet {
    pub lines: Vec<LineParams>,
    /// Index pairs of axis-neighbors (for continuity defects).
    pub neighbor_pairs: Vec<(usize, usize)>,
}

pub fn build_net(
    center: &LineParams,
    m: u32,
    spacing_log2: u32,
    points_per_axis: usize,
) -> Result<ParameterNet> {
    let d = center.dim();
    let total = (points_per_axis as u128).pow(2 * d as u32);
    if total > NET_BUDGET {
        return Err(Error::NetTooLarge {
            op: "net_sup_experiment",
            requested: total,
            budget: NET_BUDGET,
        });
    }
    let spacing = DyadicRat::new(1, spacing_log2);
    let half = (points_per_axis / 2) as i64;

    let mut lines = Vec::new();
    let mut grid_coords: Vec<Vec<i64>> = Vec::new();
    let mut counter = vec![0i64; 2 * d];
    'outer: loop {
        // offsets then slopes
        let mut x = Vec::with_capacity(d);
        let mut r = Vec::with_capacity(d);
        for i in 0..d {
            let steps = counter[i] - half;
            let mut v = center.x()[i];
            for _ in 0..steps.abs() {
                v = if steps >= 0 { v + spacing } else { v - spacing };
            }
            x.push(v);
        }
        for i in 0..d {
            let steps = counter[d + i] - half;
            let mut v = center.r()[i];
            for _ in 0..steps.abs() {
                v = if steps >= 0 { v + spacing } else { v - spacing };
            }
            r.push(v);
        }
        let in_box = x
            .iter()
            .all(|v| *v >= DyadicRat::from_int(-4) && *v <= DyadicRat::from_int(0))
            && r
                .iter()
                .all(|v| *v >= DyadicRat::from_int(1) && *v <= DyadicRat::from_int(2));
        if in_box && classify_separation(&x) == SeparationStratum::Finite(m) {
            lines.push(LineParams::new(x, r)?);
            grid_coords.push(counter.clone());
        }
        // advance the counter
        let mut pos = 0;
        loop {
            if pos == 2 * d {
                break 'outer;
            }
            counter[pos] += 1;
            if counter[pos] < points_per_axis as i64 {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
    if lines.is_empty() {
        return Err(Error::invalid(
            "net_sup_experiment",
            "net does not intersect the stratum",
        ));
    }

    let mut neighbor_pairs = Vec::new();
    for i in 0..grid_coords.len() {
        for j in (i + 1)..grid_coords.len() {
            let diff: i64 = grid_coords[i]
                .iter()
                .zip(&grid_coords[j])
                .map(|(a, b)| (a - b).abs())
                .sum();
            if diff == 1 {
                neighbor_pairs.push((i, j));
            }
        }
    }
    Ok(ParameterNet {
        lines,
        neighbor_pairs,
    })
}

pub fn net_sup_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("net_sup_experiment", "requires trials >= 1"));
    }
    let m = cfg
        .m
        .ok_or_else(|| Error::invalid("net_sup_experiment", "requires the stratum m"))?;
    let (n_lo, n_hi) = cfg
        .n_range
        .ok_or_else(|| Error::invalid("net_sup_experiment", "requires n_range"))?;
    let spacing_log2 = cfg
        .net_spacing_log2
        .ok_or_else(|| Error::invalid("net_sup_experiment", "requires net_spacing_log2"))?;
    let points = cfg.net_points_per_axis.unwrap_or(3);

    let probe = BranchingSchedule::build(cfg.s, (n_hi + 16).min(crate::construction::MAX_LEVEL))?;
    let levels = super::tail::active_levels(&probe, n_lo, n_hi);
    if levels.is_empty() {
        return Err(Error::invalid("net_sup_experiment", "no active levels in range"));
    }
    let depth = levels.iter().max().unwrap() + 1;
    let schedule = BranchingSchedule::build(cfg.s, depth)?;

    let center = match super::tail::line_from_config(cfg)? {
        Some(line) => line,
        None => sample_line_in_stratum(&mut rng_for(cfg.seed, 0x4E75), cfg.d, m, spacing_log2.min(10))?,
    };
    let net = build_net(&center, m, spacing_log2, points)?;

    // per trial: sup |X_n| over the net and max continuity defect
    let rows: Vec<(Vec<f64>, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let real = Realization::sample(&schedule, cfg.seed.wrapping_add(t as u64));
            let mut sups = Vec::with_capacity(levels.len());
            let mut worst_defect = 0.0f64;
            for &n in &levels {
                let values: Vec<f64> = net
                    .lines
                    .iter()
                    .map(|l| {
                        let v: LineIntegral<f64> =
                            line_integral(&real, n, l, IntegrandKind::Lambda, Region::All)
                                .expect("valid levels");
                        v.h1
                    })
                    .collect();
                sups.push(values.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
                let norm = ((n as f64)
                    * (cfg.d as f64 + cfg.s - cfg.d as f64 * cfg.s))
                    .exp2();
                for &(i, j) in &net.neighbor_pairs {
                    let dist = net.lines[i].l1_distance(&net.lines[j]);
                    if dist > 0.0 {
                        let defect = (values[i] - values[j]).abs() / (norm * dist);
                        worst_defect = worst_defect.max(defect);
                    }
                }
            }
            (sups, worst_defect)
        })
        .collect();

    let mut per_level = Vec::new();
    let mut med_per_level = Vec::new();
    for (i, &n) in levels.iter().enumerate() {
        let sups = sort_abs(&rows.iter().map(|r| r.0[i]).collect::<Vec<_>>());
        let med = quantile(&sups, 0.5);
        med_per_level.push((n, med));
        per_level.push(LevelStats {
            n,
            active: true,
            q50: med,
            q95: quantile(&sups, 0.95),
            max_abs: *sups.last().unwrap(),
            threshold: 0.0,
            exceed_x: 0.0,
            exceed_z: 0.0,
        });
    }
    let c_lip = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);

    let mut report = ExperimentReport::new("net-sup", cfg.clone());
    report.per_level = per_level;
    report.fit = log2_slope_fit(&med_per_level);
    report.constants.insert("c_lip".into(), c_lip);
    report
        .constants
        .insert("net_points".into(), net.lines.len() as f64);
    report.verdicts.push(Verdict::new(
        "net_nonempty",
        !net.lines.is_empty(),
        format!("{} net points in stratum", net.lines.len()),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::tail::tail_experiment;

    fn line(xs: &[f64], rs: &[f64]) -> LineParams {
        let conv = |v: f64| DyadicRat::new((v * 256.0).round() as i64, 8);
        LineParams::new(
            xs.iter().copied().map(conv).collect(),
            rs.iter().copied().map(conv).collect(),
        )
        .unwrap()
    }

    #[test]
    fn net_budget_enforced() {
        let c = line(&[-3.25, -2.5], &[1.75, 1.25]);
        let err = build_net(&c, 3, 8, 40).unwrap_err();
        assert!(matches!(err, Error::NetTooLarge { .. }));
    }

    #[test]
    fn single_point_net_matches_tail_experiment() {
        let mut cfg = ExperimentConfig::new(0.8, 2, 3, 25);
        cfg.m = Some(3);
        cfg.n_range = Some((5, 10));
        cfg.net_spacing_log2 = Some(8);
        cfg.net_points_per_axis = Some(1);
        cfg.line_x = Some(vec![-3.25, -2.5]);
        cfg.line_r = Some(vec![1.75, 1.25]);
        cfg.theta = Some(0.2);
        let net_report = net_sup_experiment(&cfg).unwrap();
        let tail_report = tail_experiment(&cfg).unwrap();
        // same levels, same per-trial values, so identical max statistics
        for (a, b) in net_report
            .per_level
            .iter()
            .zip(tail_report.per_level.iter().filter(|l| l.active))
        {
            assert_eq!(a.n, b.n);
            assert!((a.max_abs - b.max_abs).abs() < 1e-12);
        }
    }

    #[test]
    fn subnet_sup_is_dominated() {
        let c = line(&[-3.25, -2.5], &[1.75, 1.25]);
        let small = build_net(&c, 3, 8, 1).unwrap();
        let big = build_net(&c, 3, 8, 3).unwrap();
        assert!(small.lines.len() <= big.lines.len());
        let sch = BranchingSchedule::build(0.8, 7).unwrap();
        let real = Realization::sample(&sch, 2);
        let sup = |net: &ParameterNet| -> f64 {
            net.lines
                .iter()
                .map(|l| {
                    let v: LineIntegral<f64> =
                        line_integral(&real, 5, l, IntegrandKind::Lambda, Region::All).unwrap();
                    v.h1.abs()
                })
                .fold(0.0, f64::max)
        };
        assert!(sup(&small) <= sup(&big) + 1e-15);
    }
}
