//! Empirical soundness suite for the dependency-graph Hoeffding bound.
//!
//! Synthetic families with known structure: variables come in groups of
//! `D + 1` exact copies of one centered draw of range `R`, so the
//! dependency graph is a disjoint union of (D+1)-cliques with max degree
//! `D` and the bound `2 exp(-2 a^2 / ((D+1) N R^2))` applies verbatim.
//! Empirical tail frequencies must never exceed it.

use super::sampling::rng_for;
use crate::analysis::hj_tail_bound;
use crate::error::Result;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseDist {
    /// Uniform on [-R/2, R/2].
    Uniform,
    /// +-R/2 coin flips.
    Rademacher,
    /// (U1 - U2)/2 with U uniform: triangular, range R.
    Triangular,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HjCase {
    pub groups: usize,
    pub group_size: usize,
    pub range: f64,
    pub dist: BaseDist,
    /// Threshold in units of `sqrt((D+1) N R^2)`.
    pub kappa: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HjOutcome {
    pub case: HjCase,
    pub a: f64,
    pub bound: f64,
    pub empirical: f64,
    pub violated: bool,
}

fn draw(dist: BaseDist, range: f64, rng: &mut rand_chacha::ChaCha20Rng) -> f64 {
    let half = range / 2.0;
    match dist {
        BaseDist::Uniform => rng.gen_range(-half..=half),
        BaseDist::Rademacher => {
            if rng.gen_bool(0.5) {
                half
            } else {
                -half
            }
        }
        BaseDist::Triangular => (rng.gen_range(-half..=half) + rng.gen_range(-half..=half)) / 2.0,
    }
}

pub fn run_case(case: &HjCase) -> Result<HjOutcome> {
    let n = (case.groups * case.group_size) as u64;
    let dep_degree = (case.group_size - 1) as u32;
    let a = case.kappa * ((dep_degree as f64 + 1.0) * n as f64 * case.range * case.range).sqrt();
    let bound = hj_tail_bound(a, dep_degree, n, case.range)?;
    let mut rng = rng_for(case.seed, 0x80EFD);
    let mut hits = 0usize;
    for _ in 0..case.trials {
        let mut sum = 0.0;
        for _ in 0..case.groups {
            // group members are copies: the group contributes (D+1) * draw
            sum += case.group_size as f64 * draw(case.dist, case.range, &mut rng);
        }
        if sum.abs() > a {
            hits += 1;
        }
    }
    let empirical = hits as f64 / case.trials as f64;
    Ok(HjOutcome {
        case: case.clone(),
        a,
        bound,
        empirical,
        violated: empirical > bound,
    })
}

/// The standard suite: `count` configurations spanning group counts, clique
/// sizes, ranges, base distributions and thresholds.
pub fn standard_suite(count: usize, trials: usize, seed: u64) -> Vec<HjCase> {
    let mut cases = Vec::with_capacity(count);
    let groups = [5usize, 20, 50];
    let sizes = [1usize, 2, 4];
    let ranges = [0.5f64, 1.0, 2.0];
    let dists = [BaseDist::Uniform, BaseDist::Rademacher, BaseDist::Triangular];
    let kappas = [0.5f64, 0.75, 1.0, 1.25, 1.5];
    let mut i = 0u64;
    'outer: loop {
        for &g in &groups {
            for &gs in &sizes {
                for &r in &ranges {
                    for &dist in &dists {
                        for &kappa in &kappas {
                            if cases.len() >= count {
                                break 'outer;
                            }
                            cases.push(HjCase {
                                groups: g,
                                group_size: gs,
                                range: r,
                                dist,
                                kappa,
                                trials,
                                seed: seed.wrapping_add(i),
                            });
                            i += 1;
                        }
                    }
                }
            }
        }
    }
    cases
}

/// Runs the suite and returns (outcomes, violation count).
pub fn run_suite(cases: &[HjCase]) -> Result<(Vec<HjOutcome>, usize)> {
    let outcomes: Vec<HjOutcome> = cases
        .par_iter()
        .map(|c| run_case(c).expect("valid case"))
        .collect();
    let violations = outcomes.iter().filter(|o| o.violated).count();
    Ok((outcomes, violations))
}
