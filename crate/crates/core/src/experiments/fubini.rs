//! Exact stratum measures for planar products of dyadic sets.
//!
//! For a union of dyadic intervals `Omega` the area of
//! `Omega^2 ∩ {4 * 2^-m < |u - v| <= 4 * 2^(1-m)}` is computed in closed
//! form (the band indicator is piecewise linear along each cell pair), and
//! compared against the Fubini bound `C |Omega| 2^-m`.

use crate::scalar::DyadicRat;

/// Area of `{(u, v) in I x J : |u - v| <= t}` for intervals `I`, `J`.
fn band_area(i: (f64, f64), j: (f64, f64), t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    // g(u) = |J ∩ [u - t, u + t]|, piecewise linear in u
    let g = |u: f64| -> f64 { (j.1.min(u + t) - j.0.max(u - t)).max(0.0) };
    let mut pts = vec![i.0, i.1];
    for b in [j.0 - t, j.1 - t, j.0 + t, j.1 + t] {
        if b > i.0 && b < i.1 {
            pts.push(b);
        }
    }
    pts.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for w in pts.windows(2) {
        // trapezoid is exact on linear pieces
        acc += 0.5 * (g(w[0]) + g(w[1])) * (w[1] - w[0]);
    }
    acc
}

/// Area of `{(u, v) in Omega^2 : |u - v| <= t}` for disjoint interval cells.
pub fn omega_sq_gap_le(cells: &[(DyadicRat, DyadicRat)], t: f64) -> f64 {
    let fs: Vec<(f64, f64)> = cells.iter().map(|&(a, b)| (a.to_f64(), b.to_f64())).collect();
    let mut acc = 0.0;
    for &ci in &fs {
        for &cj in &fs {
            acc += band_area(ci, cj, t);
        }
    }
    acc
}

/// Exact `|Omega^2 ∩ Gamma_m|`.
pub fn omega_sq_stratum_measure(cells: &[(DyadicRat, DyadicRat)], m: u32) -> f64 {
    let hi = 4.0 * (1.0 - m as f64).exp2();
    let lo = 4.0 * (-(m as f64)).exp2();
    omega_sq_gap_le(cells, hi) - omega_sq_gap_le(cells, lo)
}

pub fn omega_length(cells: &[(DyadicRat, DyadicRat)]) -> f64 {
    cells.iter().map(|&(a, b)| b.to_f64() - a.to_f64()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(m: i64, e: u32) -> DyadicRat {
        DyadicRat::new(m, e)
    }

    #[test]
    fn band_area_square() {
        // unit square, |u - v| <= 1: everything
        assert!((band_area((0.0, 1.0), (0.0, 1.0), 1.0) - 1.0).abs() < 1e-15);
        // |u - v| <= 1/2 on the unit square: 1 - (1/2)^2 = 3/4
        assert!((band_area((0.0, 1.0), (0.0, 1.0), 0.5) - 0.75).abs() < 1e-15);
        // disjoint squares far apart
        assert_eq!(band_area((0.0, 1.0), (3.0, 4.0), 0.5), 0.0);
    }

    #[test]
    fn full_interval_stratum_measure() {
        // Omega = [-4, 0]: |Omega^2 ∩ {gap <= t}| = 16 - (4 - t)^2 for t <= 4
        let cells = vec![(dy(-4, 0), dy(0, 0))];
        for m in 1..6u32 {
            let t_hi = 4.0 * (1.0 - m as f64).exp2();
            let t_lo = 4.0 * (-(m as f64)).exp2();
            let expect = (16.0 - (4.0 - t_hi.min(4.0)).powi(2)) - (16.0 - (4.0 - t_lo).powi(2));
            let got = omega_sq_stratum_measure(&cells, m);
            assert!((got - expect).abs() < 1e-12, "m={m}: {got} vs {expect}");
            // Fubini bound with a modest constant
            assert!(got <= 16.0 * omega_length(&cells) * (-(m as f64)).exp2());
        }
    }
}
