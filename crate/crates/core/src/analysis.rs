//! Closed-form exponent calculus and deterministic bound evaluators.
//!
//! Everything here is stateless arithmetic: the exponent landscape
//! `s -> (d, theta0, xi0, p0)` of the maximal-operator theorem, the
//! abstract `p0` from decay rates, the interpolation exponent, the
//! Hoeffding inequality for dependency graphs, the deterministic bound on
//! `Y_m`, and the tail thresholds of the two key probabilistic lemmas.
//!
//! Exponential decay rates are expressed in base 2 throughout (`2^(-theta k)`
//! rather than `e^(-theta k)`); the rename only rescales `theta`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The exponent landscape at dimension parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub s: f64,
    /// Even product dimension `d = 2 ceil(1/(2-2s) - 1)`.
    pub d: u32,
    /// `theta0 = (d s + 1 - d)/2 > 0`.
    pub theta0: f64,
    /// `xi0 = d + 1 - (d+2) s >= 0`.
    pub xi0: f64,
    /// Boundedness threshold `p0 = ((2+d) theta0 + d xi0) / ((1+d) theta0 + (d-1) xi0)`.
    pub p0: f64,
    /// The sharpness barrier `1/s`; no boundedness below it.
    pub sharp_lower: f64,
    /// The earlier threshold `(2-s)/s`, defined for `s > 2/3`.
    pub lp_p0: Option<f64>,
}

impl ExponentProfile {
    /// Upper end of the admissible q-range for a given `p > p0`.
    pub fn q_max(&self, p: f64) -> f64 {
        p / (self.p0 - 1.0)
    }
}

/// `p0` from abstract decay rates: `((2+d) theta + d xi) / ((1+d) theta + (d-1) xi)`.
pub fn p0_from_rates(theta: f64, xi: f64, d: u32) -> Result<f64> {
    if theta <= 0.0 {
        return Err(Error::invalid("p0_from_rates", "requires theta > 0"));
    }
    if xi < 0.0 {
        return Err(Error::invalid("p0_from_rates", "requires xi >= 0"));
    }
    if d < 2 || d % 2 != 0 {
        return Err(Error::invalid("p0_from_rates", "requires even d >= 2"));
    }
    let d = d as f64;
    Ok(((2.0 + d) * theta + d * xi) / ((1.0 + d) * theta + (d - 1.0) * xi))
}

/// Full exponent profile for `s` in `(1/2, 1)`.
pub fn exponent_profile(s: f64) -> Result<ExponentProfile> {
    if s <= 0.5 {
        return Err(Error::invalid(
            "exponent_profile",
            format!("no information for s <= 1/2 (got {s})"),
        ));
    }
    if s >= 1.0 {
        return Err(Error::invalid(
            "exponent_profile",
            format!("requires s < 1 (got {s})"),
        ));
    }
    // ceil with a breakpoint guard: at s = 1 - 1/(d+2) the argument is the
    // integer d/2 and float noise must not push it over
    let d = 2 * ((1.0 / (2.0 - 2.0 * s) - 1.0 - 1e-9).ceil() as u32).max(1);
    let df = d as f64;
    let theta0 = (df * s + 1.0 - df) / 2.0;
    let mut xi0 = df + 1.0 - (df + 2.0) * s;
    // d is chosen so that xi0 >= 0; wipe float dust at the sharp points
    if xi0 < 0.0 && xi0 > -1e-8 {
        xi0 = 0.0;
    }
    debug_assert!(theta0 > 0.0, "theta0 must be positive for s in the d-window");
    debug_assert!(xi0 >= 0.0, "xi0 must be nonnegative");
    let p0 = p0_from_rates(theta0, xi0, d)?;
    let lp_p0 = if s > 2.0 / 3.0 {
        Some((2.0 - s) / s)
    } else {
        None
    };
    Ok(ExponentProfile {
        s,
        d,
        theta0,
        xi0,
        p0,
        sharp_lower: 1.0 / s,
        lp_p0,
    })
}

/// Interpolation exponent `q_u = d (d+2) / (2u + d)` for `u` in `[0, 1]`;
/// `u = 0` is the limiting endpoint `d + 2`.
pub fn interpolation_exponent(u: f64, d: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::invalid(
            "interpolation_exponent",
            "requires 0 <= u <= 1",
        ));
    }
    if d < 2 || d % 2 != 0 {
        return Err(Error::invalid(
            "interpolation_exponent",
            "requires even d >= 2",
        ));
    }
    let d = d as f64;
    Ok(d * (d + 2.0) / (2.0 * u + d))
}

/// Hoeffding tail bound for a family of `family_size` zero-mean variables
/// of range `range` whose dependency graph has max degree `dep_degree`:
/// `2 exp(-2 a^2 / ((D+1) N R^2))`. Reported uncapped; callers may clip
/// at 1.
pub fn hj_tail_bound(a: f64, dep_degree: u32, family_size: u64, range: f64) -> Result<f64> {
    if a <= 0.0 {
        return Err(Error::invalid("hj_tail_bound", "requires a > 0"));
    }
    if family_size == 0 {
        return Err(Error::invalid("hj_tail_bound", "requires family_size >= 1"));
    }
    if range <= 0.0 {
        return Err(Error::invalid("hj_tail_bound", "requires range > 0"));
    }
    let denom = (dep_degree as f64 + 1.0) * family_size as f64 * range * range;
    Ok(2.0 * (-2.0 * a * a / denom).exp())
}

/// Deterministic bound on the mu line integrals:
/// `Y_m <= 2^(d+1) sqrt(d) 2^(m (d-1)(1-s))`.
///
/// The constant comes from `H^1(L cap A_m^d) <= sqrt(d) * 2 * 2^(m(s-1))`
/// and `mu_m <= (2 * 2^(m(1-s)))^d`.
pub fn y_bound(m: usize, d: u32, s: f64) -> f64 {
    let df = d as f64;
    (df + 1.0).exp2() * df.sqrt() * ((m as f64) * (df - 1.0) * (1.0 - s)).exp2()
}

/// Rate parameter of the tail thresholds: the supercritical regime decays
/// at `theta`, the subcritical regime grows at `xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RateParam {
    Theta(f64),
    Xi(f64),
}

/// Threshold of the key tail lemmas at stratum `m` and level `n >= m`.
///
/// Theta form (`s > 1 - 1/d`, `0 < theta < (ds+1-d)/2`):
///   `C1 (2^(ms + n(d-1-ds)) + 2^(m(d-1)(1-s)/2) 2^(-theta n))`.
/// Xi form (`s <= 1 - 1/d`, `xi > d-1-ds`):
///   `C1 2^(ms) 2^(n xi)`.
pub fn tail_threshold(
    m: usize,
    n: usize,
    d: u32,
    s: f64,
    rate: RateParam,
    c1: f64,
) -> Result<f64> {
    if n < m {
        return Err(Error::invalid("tail_threshold", "requires n >= m"));
    }
    let df = d as f64;
    let mf = m as f64;
    let nf = n as f64;
    match rate {
        RateParam::Theta(theta) => {
            if s <= 1.0 - 1.0 / df {
                return Err(Error::invalid(
                    "tail_threshold",
                    format!("theta form requires s > 1 - 1/d (s = {s}, d = {d})"),
                ));
            }
            let theta_cap = (df * s + 1.0 - df) / 2.0;
            if !(theta > 0.0 && theta < theta_cap) {
                return Err(Error::invalid(
                    "tail_threshold",
                    format!("theta form requires 0 < theta < (ds+1-d)/2 = {theta_cap} (theta = {theta})"),
                ));
            }
            let diag = (mf * s + nf * (df - 1.0 - df * s)).exp2();
            let stoch = (mf * (df - 1.0) * (1.0 - s) / 2.0).exp2() * (-theta * nf).exp2();
            Ok(c1 * (diag + stoch))
        }
        RateParam::Xi(xi) => {
            if s > 1.0 - 1.0 / df {
                return Err(Error::invalid(
                    "tail_threshold",
                    format!("xi form requires s <= 1 - 1/d (s = {s}, d = {d})"),
                ));
            }
            let xi_floor = df - 1.0 - df * s;
            if xi <= xi_floor {
                return Err(Error::invalid(
                    "tail_threshold",
                    format!("xi form requires xi > d-1-ds = {xi_floor} (xi = {xi})"),
                ));
            }
            Ok(c1 * (mf * s).exp2() * (nf * xi).exp2())
        }
    }
}

/// Profiles along an inclusive grid `start, start+step, ..., <= stop`.
pub fn exponent_grid(start: f64, stop: f64, step: f64) -> Result<Vec<ExponentProfile>> {
    if step <= 0.0 {
        return Err(Error::invalid("exponent_grid", "requires step > 0"));
    }
    let mut out = Vec::new();
    let count = ((stop - start) / step).round() as i64;
    for i in 0..=count.max(0) {
        let s = start + step * i as f64;
        if s > stop + 1e-12 {
            break;
        }
        out.push(exponent_profile(s)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_sharp_cases() {
        let p = exponent_profile(0.75).unwrap();
        assert_eq!(p.d, 2);
        assert!((p.theta0 - 0.25).abs() < 1e-15);
        assert_eq!(p.xi0, 0.0);
        assert!((p.p0 - 4.0 / 3.0).abs() < 1e-15);
        assert!((p.p0 - p.sharp_lower).abs() < 1e-12);

        let p = exponent_profile(5.0 / 6.0).unwrap();
        assert_eq!(p.d, 4);
        assert!((p.theta0 - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(p.xi0, 0.0);
        assert!((p.p0 - 6.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn profile_generic_case() {
        let p = exponent_profile(0.6).unwrap();
        assert_eq!(p.d, 2);
        assert!((p.theta0 - 0.1).abs() < 1e-12);
        assert!((p.xi0 - 0.6).abs() < 1e-12);
        assert!((p.p0 - 16.0 / 9.0).abs() < 1e-12);
        assert!(p.lp_p0.is_none(), "LP curve only exists for s > 2/3");
        assert!(exponent_profile(0.7).unwrap().lp_p0.is_some());
    }

    #[test]
    fn profile_domain() {
        assert!(exponent_profile(0.5).is_err());
        assert!(exponent_profile(0.2).is_err());
        assert!(exponent_profile(1.0).is_err());
    }

    #[test]
    fn profile_d_window() {
        // 1 - 1/d < s <= 1 - 1/(d+2)
        for i in 1..200 {
            let s = 0.5 + 0.0025 * i as f64;
            if s >= 1.0 {
                break;
            }
            let p = exponent_profile(s).unwrap();
            let d = p.d as f64;
            assert!(s > 1.0 - 1.0 / d - 1e-9, "s={s} d={d}");
            assert!(s <= 1.0 - 1.0 / (d + 2.0) + 1e-9, "s={s} d={d}");
            assert!(p.theta0 > 0.0);
            assert!(p.xi0 >= 0.0);
            // consistency with the abstract formula
            let q = p0_from_rates(p.theta0, p.xi0, p.d).unwrap();
            assert_eq!(q, p.p0);
        }
    }

    #[test]
    fn profile_continuity_at_breakpoints() {
        // breakpoints s = 1 - 1/(d+2): profile continuous across them
        for dprime in 2..8u32 {
            let s_star = 1.0 - 1.0 / (2.0 * dprime as f64);
            let eps = 1e-10;
            let left = exponent_profile(s_star - eps).unwrap();
            let right = exponent_profile(s_star + eps).unwrap();
            assert!(
                (left.p0 - right.p0).abs() < 1e-8,
                "p0 jumps at s={s_star}: {} vs {}",
                left.p0,
                right.p0
            );
        }
    }

    #[test]
    fn p0_from_rates_examples() {
        assert!((p0_from_rates(0.25, 0.0, 2).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((p0_from_rates(1.0, 1.0, 2).unwrap() - 1.5).abs() < 1e-15);
        // xi = 0: (2+d)/(1+d) independent of theta
        for theta in [0.1, 0.5, 2.0] {
            assert!((p0_from_rates(theta, 0.0, 4).unwrap() - 6.0 / 5.0).abs() < 1e-15);
        }
        assert!(p0_from_rates(0.0, 1.0, 2).is_err());
        assert!(p0_from_rates(1.0, -0.5, 2).is_err());
        assert!(p0_from_rates(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn interpolation_exponent_examples() {
        assert!((interpolation_exponent(1.0, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!((interpolation_exponent(0.0, 2).unwrap() - 4.0).abs() < 1e-15);
        assert!((interpolation_exponent(0.5, 2).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!(interpolation_exponent(1.5, 2).is_err());
        assert!(interpolation_exponent(0.5, 3).is_err());
    }

    #[test]
    fn hj_bound_examples() {
        let b = hj_tail_bound(1.0, 0, 1, 1.0).unwrap();
        assert!((b - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        let b = hj_tail_bound(10.0, 3, 100, 1.0).unwrap();
        assert!((b - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(b > 1.0, "bound is reported uncapped");
        // monotone: decreasing in a, increasing in D, N, R
        assert!(hj_tail_bound(2.0, 1, 10, 1.0).unwrap() < hj_tail_bound(1.0, 1, 10, 1.0).unwrap());
        assert!(hj_tail_bound(1.0, 2, 10, 1.0).unwrap() > hj_tail_bound(1.0, 1, 10, 1.0).unwrap());
        assert!(hj_tail_bound(1.0, 1, 20, 1.0).unwrap() > hj_tail_bound(1.0, 1, 10, 1.0).unwrap());
        assert!(hj_tail_bound(1.0, 1, 10, 2.0).unwrap() > hj_tail_bound(1.0, 1, 10, 1.0).unwrap());
        assert!(hj_tail_bound(0.0, 0, 1, 1.0).is_err());
    }

    #[test]
    fn y_bound_examples() {
        assert!((y_bound(0, 2, 0.75) - 8.0 * 2f64.sqrt()).abs() < 1e-12);
        // ratio between consecutive m
        let ratio = y_bound(5, 2, 0.75) / y_bound(4, 2, 0.75);
        assert!((ratio - (1.0f64 * 0.25).exp2()).abs() < 1e-12);
    }

    #[test]
    fn tail_threshold_examples() {
        let t = tail_threshold(4, 4, 2, 0.8, RateParam::Theta(0.25), 1.0).unwrap();
        assert!((t - (0.8f64.exp2() + (-0.6f64).exp2())).abs() < 1e-12);
        let t = tail_threshold(2, 4, 2, 0.5, RateParam::Xi(0.1), 1.0).unwrap();
        assert!((t - 1.4f64.exp2()).abs() < 1e-12);
        // linear in C1
        let t2 = tail_threshold(2, 4, 2, 0.5, RateParam::Xi(0.1), 3.5).unwrap();
        assert!((t2 - 3.5 * t).abs() < 1e-12);
        // parameter-range violations are rejected
        assert!(tail_threshold(4, 3, 2, 0.8, RateParam::Theta(0.25), 1.0).is_err());
        assert!(tail_threshold(2, 4, 2, 0.5, RateParam::Theta(0.2), 1.0).is_err());
        assert!(tail_threshold(2, 4, 2, 0.8, RateParam::Xi(0.5), 1.0).is_err());
        assert!(tail_threshold(2, 4, 2, 0.5, RateParam::Xi(0.0), 1.0).is_err());
        let err = tail_threshold(2, 4, 2, 0.8, RateParam::Theta(0.4), 1.0);
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("(ds+1-d)/2"), "names the violated inequality: {msg}");
    }

    #[test]
    fn figure_one_relations_on_grid() {
        for p in exponent_grid(0.505, 0.995, 0.001).unwrap() {
            assert!(p.p0 >= p.sharp_lower - 1e-9, "p0 < 1/s at s={}", p.s);
            if let Some(lp) = p.lp_p0 {
                assert!(p.p0 < lp, "p0 not below the LP curve at s={}", p.s);
            }
        }
    }
}
