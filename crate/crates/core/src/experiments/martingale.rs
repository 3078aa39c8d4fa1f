//! Conditional-mean verification of the construction's martingale property:
//! given `A_k`, the expectation of `nu_{k+1}(t)` at a fixed `t` inside
//! `A_k` equals `nu_k(t)`.

use crate::construction::{BranchingSchedule, Realization};
use crate::error::Result;
use crate::rng::mix64;
use crate::scalar::DyadicRat;

#[derive(Clone, Debug)]
pub struct MartingaleCheck {
    pub k: usize,
    pub t: f64,
    /// `nu_k(t)`, the conditional target.
    pub target: f64,
    /// Sample mean of `nu_{k+1}(t)` over resampled extensions.
    pub mean: f64,
    /// Exact standard error of the mean (binomial extension step).
    pub se: f64,
    /// |mean - target| / se; 0 for deterministic keep-both steps.
    pub z_score: f64,
    pub deterministic: bool,
}

/// Runs the check at every level `k` in `1..=k_max`, at `points` interior
/// points of `A_k`, with `trials` independent suffix resamplings sharing
/// the `A_k` prefix.
pub fn martingale_checks(
    s: f64,
    k_max: usize,
    points: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<MartingaleCheck>> {
    let schedule = BranchingSchedule::build(s, k_max + 1)?;
    let prefix = Realization::sample(&schedule, seed);
    let mut out = Vec::new();
    for k in 1..=k_max {
        let cells = prefix.level(k);
        let stride = (cells.len() / points).max(1);
        for &cell in cells.iter().step_by(stride).take(points) {
            // quarter point of the cell: interior of the left child
            let t = DyadicRat::new(4 * cell as i64 + 1, k as u32 + 2);
            let target = prefix.nu_value(k).to_f64();
            let deterministic = schedule.a_at(k + 1) == 2;
            if deterministic {
                // nu_{k+1} = nu_k pointwise; nothing stochastic to average
                out.push(MartingaleCheck {
                    k,
                    t: t.to_f64(),
                    target,
                    mean: target,
                    se: 0.0,
                    z_score: 0.0,
                    deterministic,
                });
                continue;
            }
            let v_next = 2.0 * target; // value of nu_{k+1} on kept children
            let idx_next = 2 * cell as i64; // t lies in the left child
            let mut acc = 0.0;
            for j in 0..trials {
                let ext = prefix.resampled_suffix(k, seed ^ mix64(j as u64 + 1));
                if ext.contains(k + 1, idx_next) {
                    acc += v_next;
                }
            }
            let mean = acc / trials as f64;
            let se = target / (trials as f64).sqrt();
            out.push(MartingaleCheck {
                k,
                t: t.to_f64(),
                target,
                mean,
                se,
                z_score: (mean - target).abs() / se,
                deterministic,
            });
        }
    }
    Ok(out)
}
