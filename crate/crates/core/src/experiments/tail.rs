//! Monte Carlo tail verification for the line functionals `X_n` and `Z_n`
//! at a fixed line in a separation stratum.
//!
//! Per trial an independent realization is sampled (seed + trial index) and
//! `|X_n|`, `|Z_n|` are recorded for every level in range. The threshold
//! constant `C1` is calibrated once, at the first active level >= m, and
//! then frozen for all higher levels. Levels whose branching step keeps
//! both children carry `sigma_n = 0`, hence `X_n = Z_n = 0` exactly;
//! quantile slope fits run over the active levels.

use super::config::{ExperimentConfig, ExperimentReport, LevelStats, Verdict};
use super::sampling::{rng_for, sample_line_in_stratum};
use super::stats::{log2_slope_fit, quantile, sort_abs};
use crate::analysis::{tail_threshold, RateParam};
use crate::construction::{BranchingSchedule, Realization};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_separation, line_integral, IntegrandKind, LineIntegral, LineParams, Region,
    SeparationStratum,
};
use crate::scalar::DyadicRat;
use rayon::prelude::*;

/// Levels `n` in `[lo, hi]` with `sigma_n != 0`, extended outward to the
/// nearest active levels when the range holds fewer than two (slope fits
/// need at least two points).
pub fn active_levels(schedule: &BranchingSchedule, lo: usize, hi: usize) -> Vec<usize> {
    let all: Vec<usize> = (0..schedule.n_max())
        .filter(|&n| schedule.level_is_active(n))
        .collect();
    let mut inside: Vec<usize> = all.iter().copied().filter(|&n| n >= lo && n <= hi).collect();
    if inside.len() < 2 {
        if let Some(&prev) = all.iter().rev().find(|&&n| n < lo) {
            inside.insert(0, prev);
        }
        if let Some(&next) = all.iter().find(|&&n| n > hi) {
            inside.push(next);
        }
    }
    inside
}

fn dyadic_from_f64(v: f64, op: &'static str) -> Result<DyadicRat> {
    let grid = 1 << 20;
    let scaled = v * grid as f64;
    if scaled.fract() != 0.0 || scaled.abs() > i64::MAX as f64 / 4.0 {
        return Err(Error::invalid(op, format!("coordinate {v} is not on the dyadic grid 2^-20")));
    }
    Ok(DyadicRat::new(scaled as i64, 20))
}

pub fn line_from_config(cfg: &ExperimentConfig) -> Result<Option<LineParams>> {
    match (&cfg.line_x, &cfg.line_r) {
        (Some(x), Some(r)) => {
            let x = x
                .iter()
                .map(|&v| dyadic_from_f64(v, "tail_experiment"))
                .collect::<Result<Vec<_>>>()?;
            let r = r
                .iter()
                .map(|&v| dyadic_from_f64(v, "tail_experiment"))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(LineParams::new(x, r)?))
        }
        (None, None) => Ok(None),
        _ => Err(Error::invalid(
            "tail_experiment",
            "line_x and line_r must be given together",
        )),
    }
}

/// `|X_n|` and `|Z_n|` (H^1 metric) for one realization over given levels.
fn trial_values(
    realization: &Realization,
    line: &LineParams,
    levels: &[usize],
    schedule: &BranchingSchedule,
) -> Vec<(f64, f64)> {
    levels
        .iter()
        .map(|&n| {
            if !schedule.level_is_active(n) {
                return (0.0, 0.0);
            }
            let x: LineIntegral<f64> =
                line_integral(realization, n, line, IntegrandKind::Lambda, Region::All)
                    .expect("levels validated");
            let z: LineIntegral<f64> =
                line_integral(realization, n, line, IntegrandKind::MuDiff, Region::All)
                    .expect("levels validated");
            (x.h1.abs(), z.h1.abs())
        })
        .collect()
}

pub fn tail_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("tail_experiment", "requires trials >= 1"));
    }
    let m = cfg
        .m
        .ok_or_else(|| Error::invalid("tail_experiment", "requires the stratum m"))? as usize;
    let (n_lo, n_hi) = cfg
        .n_range
        .ok_or_else(|| Error::invalid("tail_experiment", "requires n_range"))?;
    if n_lo > n_hi || n_lo < m {
        return Err(Error::invalid(
            "tail_experiment",
            "n_range must be increasing and start at or above m",
        ));
    }

    // probe schedule deep enough to find active levels past n_hi
    let probe = BranchingSchedule::build(cfg.s, (n_hi + 16).min(crate::construction::MAX_LEVEL))?;
    let fit_levels = active_levels(&probe, n_lo, n_hi);
    let data_hi = fit_levels.iter().copied().max().unwrap_or(n_hi).max(n_hi);
    let data_lo = fit_levels.iter().copied().min().unwrap_or(n_lo).min(n_lo);
    let schedule = BranchingSchedule::build(cfg.s, data_hi + 1)?;

    let line = match line_from_config(cfg)? {
        Some(line) => {
            if line.dim() != cfg.d {
                return Err(Error::invalid("tail_experiment", "line dimension != d"));
            }
            if classify_separation(line.x()) != SeparationStratum::Finite(m as u32) {
                return Err(Error::invalid(
                    "tail_experiment",
                    format!("supplied offsets are not in stratum m={m}"),
                ));
            }
            line
        }
        None => sample_line_in_stratum(&mut rng_for(cfg.seed, 0xA11CE), cfg.d, m as u32, 12)?,
    };

    let levels: Vec<usize> = (data_lo..=data_hi).collect();
    let rows: Vec<Vec<(f64, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let real = Realization::sample(&schedule, cfg.seed.wrapping_add(t as u64));
            trial_values(&real, &line, &levels, &schedule)
        })
        .collect();

    // C1 calibration at the first active level >= m, then frozen
    let rate = match (cfg.theta, cfg.xi) {
        (Some(t), _) => RateParam::Theta(t),
        (None, Some(x)) => RateParam::Xi(x),
        (None, None) => {
            let df = cfg.d as f64;
            let cap = (df * cfg.s + 1.0 - df) / 2.0;
            if cap > 0.0 {
                RateParam::Theta(cap / 2.0)
            } else {
                RateParam::Xi(df - 1.0 - df * cfg.s + 0.1)
            }
        }
    };
    let n0 = *fit_levels.first().ok_or_else(|| {
        Error::invalid("tail_experiment", "no active levels reachable for this schedule")
    })?;
    let n0_pos = levels.iter().position(|&n| n == n0).expect("n0 in data range");
    let max_at_n0 = rows
        .iter()
        .map(|row| row[n0_pos].0.max(row[n0_pos].1))
        .fold(0.0f64, f64::max);
    let shape_at_n0 = tail_threshold(m, n0, cfg.d as u32, cfg.s, rate, 1.0)?;
    let c1 = if max_at_n0 > 0.0 {
        max_at_n0 / shape_at_n0
    } else {
        1.0
    };

    // deterministic cap: |X_n| <= sup|sigma_n|^d * |z_window| * speed
    let zw = line.z_window();
    let zw_len = zw.map(|(a, b)| (b - a).to_f64()).unwrap_or(0.0);
    let mut cap_violations = 0usize;

    let mut per_level = Vec::with_capacity(levels.len());
    for (i, &n) in levels.iter().enumerate() {
        let xs = sort_abs(&rows.iter().map(|row| row[i].0).collect::<Vec<_>>());
        let threshold = if n >= m {
            c1 * tail_threshold(m, n, cfg.d as u32, cfg.s, rate, 1.0)?
        } else {
            0.0
        };
        let exceed_x = rows.iter().filter(|row| row[i].0 > threshold).count() as f64
            / cfg.trials as f64;
        let exceed_z = rows.iter().filter(|row| row[i].1 > threshold).count() as f64
            / cfg.trials as f64;
        let active = schedule.level_is_active(n);
        let sup_sigma = if active {
            ((n as f64) - schedule.log2_beta(n) as f64).exp2()
        } else {
            0.0
        };
        let cap = sup_sigma.powi(cfg.d as i32) * zw_len * line.speed();
        cap_violations += rows.iter().filter(|row| row[i].0 > cap + 1e-12).count();
        per_level.push(LevelStats {
            n,
            active,
            q50: quantile(&xs, 0.5),
            q95: quantile(&xs, 0.95),
            max_abs: *xs.last().expect("trials >= 1"),
            threshold,
            exceed_x,
            exceed_z,
        });
    }

    let fit_data: Vec<(usize, f64)> = per_level
        .iter()
        .filter(|ls| fit_levels.contains(&ls.n))
        .map(|ls| (ls.n, ls.q95))
        .collect();
    let fit = log2_slope_fit(&fit_data);

    let mut report = ExperimentReport::new("tails", cfg.clone());
    report.constants.insert("c1".into(), c1);
    report
        .constants
        .insert("line_speed".into(), line.speed());
    report.per_level = per_level;
    report.verdicts.push(Verdict::new(
        "deterministic_cap",
        cap_violations == 0,
        format!("{cap_violations} exceedances of the crude sup-bound cap"),
    ));
    // qualitative exceedance decay on active levels beyond m + 2
    let decayed = report
        .per_level
        .iter()
        .filter(|ls| ls.active && ls.n > m + 2)
        .collect::<Vec<_>>();
    let monotone = decayed.windows(2).all(|w| w[1].exceed_x <= w[0].exceed_x);
    report.verdicts.push(Verdict::new(
        "exceedance_nonincreasing",
        monotone,
        format!(
            "exceedance freq over active levels beyond m+2: {:?}",
            decayed.iter().map(|ls| ls.exceed_x).collect::<Vec<_>>()
        ),
    ));
    report.fit = fit;
    Ok(report)
}
