//! Lines through product space, separation strata and exact sweep
//! integration of product densities along lines.
//!
//! A line is parametrized by offsets `x` in `[-4, 0]^d` and slopes `r` in
//! `[1, 2]^d` as `z -> ((z - x_1)/r_1, ..., (z - x_d)/r_d)`. The integrands
//! are d-fold products of the construction's step functions, so along the
//! line they are piecewise constant in `z`; the sweep merges every factor's
//! grid breakpoints, classifies each segment by its midpoint and accumulates
//! segment length times product value. With the exact backend the result is
//! an exact rational.

use crate::construction::Realization;
use crate::error::{Error, Result};
use crate::scalar::{DyadicRat, Scalar};

/// Offsets and slopes of one line `L_{x,r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineParams {
    x: Vec<DyadicRat>,
    r: Vec<DyadicRat>,
}

impl LineParams {
    pub fn new(x: Vec<DyadicRat>, r: Vec<DyadicRat>) -> Result<Self> {
        if x.len() != r.len() || x.len() < 2 {
            return Err(Error::invalid(
                "line_params",
                "x and r must have equal length d >= 2",
            ));
        }
        let neg4 = DyadicRat::from_int(-4);
        let zero = DyadicRat::from_int(0);
        let one = DyadicRat::from_int(1);
        let two = DyadicRat::from_int(2);
        for xi in &x {
            if *xi < neg4 || *xi > zero {
                return Err(Error::invalid("line_params", "offsets must lie in [-4, 0]"));
            }
        }
        for ri in &r {
            if *ri < one || *ri > two {
                return Err(Error::invalid("line_params", "slopes must lie in [1, 2]"));
            }
        }
        Ok(LineParams { x, r })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[DyadicRat] {
        &self.x
    }

    pub fn r(&self) -> &[DyadicRat] {
        &self.r
    }

    /// Metric factor `sqrt(sum r_i^-2)` relating dz-integrals to
    /// H^1-integrals along the line.
    pub fn speed(&self) -> f64 {
        self.r
            .iter()
            .map(|ri| ri.to_f64().powi(-2))
            .sum::<f64>()
            .sqrt()
    }

    /// `z`-interval on which every coordinate lies in `[1, 2]`:
    /// the intersection of `[x_i + r_i, x_i + 2 r_i]`. Always inside
    /// `[-3, 4]`.
    pub fn z_window(&self) -> Option<(DyadicRat, DyadicRat)> {
        let mut lo = DyadicRat::from_int(-3);
        let mut hi = DyadicRat::from_int(4);
        for (xi, ri) in self.x.iter().zip(&self.r) {
            let a = *xi + *ri;
            let b = *xi + *ri + *ri;
            if a > lo {
                lo = a;
            }
            if b < hi {
                hi = b;
            }
        }
        if lo < hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    /// The L1 distance between two parameter points, `|x-x'|_1 + |r-r'|_1`.
    pub fn l1_distance(&self, other: &LineParams) -> f64 {
        let dx: f64 = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .sum();
        let dr: f64 = self
            .r
            .iter()
            .zip(&other.r)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .sum();
        dx + dr
    }
}

/// Separation stratum of an offset tuple: the unique `m` with
/// `4 * 2^-m < min_{i != j} |x_i - x_j| <= 4 * 2^(1-m)`, or `Diagonal`
/// when two offsets coincide exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationStratum {
    Finite(u32),
    Diagonal,
}

/// Classifies an offset tuple by its minimal pairwise gap. Exact: the gap
/// is a dyadic rational and the window comparisons are integer arithmetic.
pub fn classify_separation(x: &[DyadicRat]) -> SeparationStratum {
    let mut min_gap: Option<DyadicRat> = None;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let gap = if x[i] > x[j] { x[i] - x[j] } else { x[j] - x[i] };
            min_gap = Some(match min_gap {
                Some(g) if g < gap => g,
                _ => gap,
            });
        }
    }
    let gap = min_gap.expect("d >= 2");
    if gap == DyadicRat::zero() {
        return SeparationStratum::Diagonal;
    }
    // smallest m >= 1 with gap > 4 * 2^-m; minimality gives the upper bound
    let mut m = 1u32;
    loop {
        let bound = DyadicRat::new(4, m);
        if gap > bound {
            return SeparationStratum::Finite(m);
        }
        m += 1;
        assert!(m < 128, "gap too small to classify");
    }
}

/// Which product density is integrated along the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrandKind {
    /// d-fold product of `sigma_n` (the martingale increments); signed.
    Lambda,
    /// d-fold product of `nu_n`; nonnegative.
    Mu,
    /// `prod nu_{n+1} - prod nu_n`, evaluated per segment.
    MuDiff,
}

/// Restriction of the sweep to the diagonal neighborhood or its complement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    All,
    InsideDelta(DyadicRat),
    OutsideDelta(DyadicRat),
}

impl Region {
    fn delta(&self) -> Option<DyadicRat> {
        match self {
            Region::All => None,
            Region::InsideDelta(d) | Region::OutsideDelta(d) => Some(*d),
        }
    }
}

/// A line integral in both metrics: `dz` is the primitive, `h1` is
/// `speed * dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineIntegral<S> {
    pub dz: S,
    pub h1: f64,
}

/// The `z`-set where some pair of coordinates of the line is closer than
/// `delta`: the union over `i < j` of the solution intervals of
/// `|(z - x_i)/r_i - (z - x_j)/r_j| <= delta`, clipped to `[-3, 4]`.
/// Returned sorted and merged.
pub fn diagonal_zset<S: Scalar>(line: &LineParams, delta: DyadicRat) -> Result<Vec<(S, S)>> {
    if delta <= DyadicRat::zero() {
        return Err(Error::invalid("diagonal_zset", "delta must be positive"));
    }
    let lo_clip = S::from_int(-3);
    let hi_clip = S::from_int(4);
    let delta = S::from_dyadic(delta);
    let mut raw: Vec<(S, S)> = Vec::new();
    let d = line.dim();
    for i in 0..d {
        for j in (i + 1)..d {
            let xi = S::from_dyadic(line.x[i]);
            let xj = S::from_dyadic(line.x[j]);
            let ri = S::from_dyadic(line.r[i]);
            let rj = S::from_dyadic(line.r[j]);
            // gap(z) = a z + b with a = 1/r_i - 1/r_j, b = x_j/r_j - x_i/r_i
            let a = S::one() / ri.clone() - S::one() / rj.clone();
            let b = xj / rj - xi / ri;
            if a.is_zero() {
                if b.clone().abs() <= delta {
                    raw.push((lo_clip.clone(), hi_clip.clone()));
                }
                continue;
            }
            // |a z + b| <= delta  =>  z between (-delta - b)/a and (delta - b)/a
            let mut z1 = (-delta.clone() - b.clone()) / a.clone();
            let mut z2 = (delta.clone() - b) / a;
            if z1 > z2 {
                std::mem::swap(&mut z1, &mut z2);
            }
            if z1 < lo_clip {
                z1 = lo_clip.clone();
            }
            if z2 > hi_clip {
                z2 = hi_clip.clone();
            }
            if z1 < z2 {
                raw.push((z1, z2));
            }
        }
    }
    raw.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("ordered scalars"));
    let mut merged: Vec<(S, S)> = Vec::new();
    for (lo, hi) in raw {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    Ok(merged)
}

/// Merges ascending streams into one ascending deduplicated vector.
fn merge_streams<S: Scalar>(mut streams: Vec<Vec<S>>) -> Vec<S> {
    while streams.len() > 1 {
        let mut next = Vec::with_capacity(streams.len().div_ceil(2));
        let mut iter = streams.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(merge_two(a, b)),
                None => next.push(a),
            }
        }
        streams = next;
    }
    let mut out = streams.pop().unwrap_or_default();
    out.dedup();
    out
}

fn merge_two<S: Scalar>(a: Vec<S>, b: Vec<S>) -> Vec<S> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut ia = a.into_iter().peekable();
    let mut ib = b.into_iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some(x), Some(y)) => {
                if x <= y {
                    out.push(ia.next().unwrap());
                } else {
                    out.push(ib.next().unwrap());
                }
            }
            (Some(_), None) => out.push(ia.next().unwrap()),
            (None, Some(_)) => out.push(ib.next().unwrap()),
            (None, None) => break,
        }
    }
    out
}

fn point_in_intervals<S: Scalar>(intervals: &[(S, S)], z: &S) -> bool {
    // intervals are sorted and disjoint
    let mut lo = 0usize;
    let mut hi = intervals.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if &intervals[mid].1 < z {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo < intervals.len() && &intervals[lo].0 <= z
}

/// Evaluates one factor of the product at grid index `idx` on the mesh
/// level; `values[n]` is `2^n / beta_n` as an integer.
struct FactorEval<'a> {
    realization: &'a Realization,
    n: usize,
}

impl FactorEval<'_> {
    fn nu_int(&self, n: usize) -> i64 {
        let shift = n as u32 - self.realization.schedule().log2_beta(n);
        1i64 << shift
    }

    /// `nu_n` at a point whose level-`mesh` index is `idx`.
    fn nu<S: Scalar>(&self, n: usize, idx_mesh: i64, mesh: u32) -> S {
        let idx = idx_mesh >> (mesh - n as u32);
        if self.realization.contains(n, idx) {
            S::from_int(self.nu_int(n))
        } else {
            S::zero()
        }
    }

    /// `sigma_n` at a point whose level-`mesh` index is `idx`
    /// (mesh >= n+1).
    fn sigma<S: Scalar>(&self, idx_mesh: i64, mesh: u32) -> S {
        let n = self.n;
        let fine: S = self.nu(n + 1, idx_mesh, mesh);
        let coarse: S = self.nu(n, idx_mesh, mesh);
        fine - coarse
    }
}

/// Exact sweep integral of a product density along a line.
///
/// `dz` is `int over the region of prod_i g_i((z - x_i)/r_i) dz` with `g`
/// chosen by `kind`; `h1 = speed * dz`.
pub fn line_integral<S: Scalar>(
    realization: &Realization,
    n: usize,
    line: &LineParams,
    kind: IntegrandKind,
    region: Region,
) -> Result<LineIntegral<S>> {
    let mesh: u32 = match kind {
        IntegrandKind::Mu => n as u32,
        IntegrandKind::Lambda | IntegrandKind::MuDiff => (n + 1) as u32,
    };
    if mesh as usize > realization.n_max() {
        return Err(Error::invalid(
            "line_integral",
            format!(
                "kind needs levels up to {mesh}, realization has {}",
                realization.n_max()
            ),
        ));
    }

    let zero = LineIntegral {
        dz: S::zero(),
        h1: 0.0,
    };
    let Some((zw_lo, zw_hi)) = line.z_window() else {
        return Ok(zero);
    };
    let zw_lo_s = S::from_dyadic(zw_lo);
    let zw_hi_s = S::from_dyadic(zw_hi);

    let delta_intervals: Vec<(S, S)> = match region.delta() {
        Some(d) => diagonal_zset(line, d)?,
        None => Vec::new(),
    };

    let xs: Vec<S> = line.x.iter().map(|v| S::from_dyadic(*v)).collect();
    let rs: Vec<S> = line.r.iter().map(|v| S::from_dyadic(*v)).collect();

    // breakpoint streams: window ends and region borders, then every
    // factor's mapped grid (each already ascending in z)
    let mut streams: Vec<Vec<S>> = Vec::with_capacity(line.dim() + 1);
    let mut extra: Vec<S> = vec![zw_lo_s.clone(), zw_hi_s.clone()];
    for (lo, hi) in &delta_intervals {
        for z in [lo, hi] {
            if z > &zw_lo_s && z < &zw_hi_s {
                extra.push(z.clone());
            }
        }
    }
    extra.sort_by(|a, b| a.partial_cmp(b).expect("ordered scalars"));
    streams.push(extra);
    for (xi_s, ri_s) in xs.iter().zip(&rs) {
        // visible t-range of this factor inside the window
        let t_lo = (zw_lo_s.clone() - xi_s.clone()) / ri_s.clone();
        let t_hi = (zw_hi_s.clone() - xi_s.clone()) / ri_s.clone();
        let k_lo = t_lo.floor_scaled(mesh);
        let k_hi = t_hi.floor_scaled(mesh) + 1;
        let mut stream = Vec::with_capacity((k_hi - k_lo + 1).max(0) as usize);
        for k in k_lo..=k_hi {
            let t = S::from_dyadic(DyadicRat::new(k, mesh));
            let z = xi_s.clone() + ri_s.clone() * t;
            if z > zw_lo_s && z < zw_hi_s {
                stream.push(z);
            }
        }
        streams.push(stream);
    }
    let breaks = merge_streams(streams);

    let factors: Vec<FactorEval> = (0..line.dim())
        .map(|_| FactorEval { realization, n })
        .collect();

    let mut dz = S::zero();
    for w in breaks.windows(2) {
        let (za, zb) = (&w[0], &w[1]);
        let mid = (za.clone() + zb.clone()).half();
        let inside = match region {
            Region::All => false,
            _ => point_in_intervals(&delta_intervals, &mid),
        };
        let wanted = match region {
            Region::All => true,
            Region::InsideDelta(_) => inside,
            Region::OutsideDelta(_) => !inside,
        };
        if !wanted {
            continue;
        }
        let mut prod_main = S::one();
        let mut prod_coarse = S::one(); // only used by MuDiff
        let mut vanished = false;
        for (i, f) in factors.iter().enumerate() {
            let t = (mid.clone() - xs[i].clone()) / rs[i].clone();
            let idx = t.floor_scaled(mesh);
            match kind {
                IntegrandKind::Lambda => {
                    let v: S = f.sigma(idx, mesh);
                    if v.is_zero() {
                        vanished = true;
                        break;
                    }
                    prod_main = prod_main * v;
                }
                IntegrandKind::Mu => {
                    let v: S = f.nu(n, idx, mesh);
                    if v.is_zero() {
                        vanished = true;
                        break;
                    }
                    prod_main = prod_main * v;
                }
                IntegrandKind::MuDiff => {
                    let fine: S = f.nu(n + 1, idx, mesh);
                    let coarse: S = f.nu(n, idx, mesh);
                    if fine.is_zero() && coarse.is_zero() {
                        vanished = true;
                        break;
                    }
                    prod_main = prod_main * fine;
                    prod_coarse = prod_coarse * coarse;
                }
            }
        }
        let value = match kind {
            IntegrandKind::MuDiff => {
                if vanished {
                    S::zero()
                } else {
                    prod_main - prod_coarse
                }
            }
            _ if vanished => S::zero(),
            _ => prod_main,
        };
        if !value.is_zero() {
            dz = dz + (zb.clone() - za.clone()) * value;
        }
    }

    let h1 = line.speed() * dz.to_f64();
    Ok(LineIntegral { dz, h1 })
}

/// Empirical Lipschitz defect of the net argument:
/// `|X_n(L) - X_n(L')| / (2^(n (d + s - d s)) (|x-x'|_1 + |r-r'|_1))`,
/// zero when the lines coincide. Float mode.
pub fn continuity_defect(
    realization: &Realization,
    n: usize,
    line: &LineParams,
    other: &LineParams,
) -> Result<f64> {
    let dist = line.l1_distance(other);
    if dist == 0.0 {
        return Ok(0.0);
    }
    let a: LineIntegral<f64> = line_integral(realization, n, line, IntegrandKind::Lambda, Region::All)?;
    let b: LineIntegral<f64> = line_integral(realization, n, other, IntegrandKind::Lambda, Region::All)?;
    let d = line.dim() as f64;
    let s = realization.s();
    let norm = ((n as f64) * (d + s - d * s)).exp2() * dist;
    Ok((a.h1 - b.h1).abs() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::BranchingSchedule;
    use num_rational::BigRational;

    type Q = BigRational;

    fn dy(num: i64, log2_denom: u32) -> DyadicRat {
        DyadicRat::new(num, log2_denom)
    }

    /// Realization at s = 0.5 whose first split keeps [1, 1.5].
    fn keeps_left_realization(n_max: usize) -> Realization {
        let sch = BranchingSchedule::build(0.5, n_max).unwrap();
        for seed in 0..64 {
            let r = Realization::sample(&sch, seed);
            if r.level(1) == [2] {
                return r;
            }
        }
        panic!("no seed keeps [1, 1.5] among the first 64");
    }

    fn line(xs: &[f64], rs: &[f64]) -> LineParams {
        let conv = |v: f64| {
            let m = (v * 256.0).round() as i64;
            assert_eq!(m as f64 / 256.0, v, "test coordinates must be dyadic");
            dy(m, 8)
        };
        LineParams::new(xs.iter().copied().map(conv).collect(), rs.iter().copied().map(conv).collect())
            .unwrap()
    }

    #[test]
    fn speed_examples() {
        assert!((line(&[-4.0, -4.0], &[1.0, 1.0]).speed() - 2f64.sqrt()).abs() < 1e-15);
        assert!((line(&[-4.0, -4.0], &[2.0, 2.0]).speed() - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let l = line(&[-4.0, -4.0, -4.0, -4.0], &[1.0, 2.0, 2.0, 2.0]);
        assert!((l.speed() - 1.75f64.sqrt()).abs() < 1e-15);
        // speed range [sqrt(d)/2, sqrt(d)]
        let d = 4.0f64;
        assert!(l.speed() >= d.sqrt() / 2.0 - 1e-15 && l.speed() <= d.sqrt() + 1e-15);
    }

    #[test]
    fn stratum_examples() {
        let c = |v: &[f64]| -> Vec<DyadicRat> {
            v.iter().map(|&t| dy((t * 16.0).round() as i64, 4)).collect()
        };
        assert_eq!(
            classify_separation(&c(&[-4.0, -3.5])),
            SeparationStratum::Finite(4)
        );
        assert_eq!(
            classify_separation(&c(&[-1.0, -1.0])),
            SeparationStratum::Diagonal
        );
        assert_eq!(
            classify_separation(&c(&[-1.0, -0.375])),
            SeparationStratum::Finite(3)
        );
        // max gap 4 lands in m = 1
        assert_eq!(
            classify_separation(&c(&[-4.0, 0.0])),
            SeparationStratum::Finite(1)
        );
    }

    #[test]
    fn z_window_examples() {
        let w = line(&[-4.0, -4.0], &[1.0, 1.0]).z_window().unwrap();
        assert_eq!((w.0.to_f64(), w.1.to_f64()), (-3.0, -2.0));
        let w = line(&[-4.0, -3.5], &[1.0, 1.0]).z_window().unwrap();
        assert_eq!((w.0.to_f64(), w.1.to_f64()), (-2.5, -2.0));
        assert!(line(&[-4.0, 0.0], &[1.0, 1.0]).z_window().is_none());
    }

    #[test]
    fn diagonal_zset_examples() {
        // constant gap 0.5 > 0.25: empty
        let l = line(&[-4.0, -3.5], &[1.0, 1.0]);
        let set: Vec<(f64, f64)> = diagonal_zset(&l, dy(1, 2)).unwrap();
        assert!(set.is_empty());
        // exactly on the diagonal: everything
        let l = line(&[-4.0, -4.0], &[1.0, 1.0]);
        let set: Vec<(f64, f64)> = diagonal_zset(&l, dy(1, 10)).unwrap();
        assert_eq!(set, vec![(-3.0, 4.0)]);
        // gap(z) = (z + 4.5)/2 with delta = 0.1: interval outside [-3, 4]
        let l = line(&[-4.0, -3.5], &[1.0, 2.0]);
        let set: Vec<(f64, f64)> = diagonal_zset(&l, dy(102, 10)).unwrap();
        assert!(set.is_empty() || set.iter().all(|(a, b)| a >= b));
        // delta <= 0 rejected
        assert!(diagonal_zset::<f64>(&l, DyadicRat::zero()).is_err());
    }

    #[test]
    fn line_integral_lambda_examples() {
        let r = keeps_left_realization(3);
        // diagonal line: sigma_0^2 = 1 on [1,2] => dz = 1, h1 = sqrt(2)
        let l = line(&[-4.0, -4.0], &[1.0, 1.0]);
        let v: LineIntegral<Q> = line_integral(&r, 0, &l, IntegrandKind::Lambda, Region::All).unwrap();
        assert_eq!(v.dz, Q::from_integer(1.into()));
        assert!((v.h1 - 2f64.sqrt()).abs() < 1e-14);
        // shifted line: overlap z in [-2.5, -2], factors -1 * +1
        let l = line(&[-4.0, -3.5], &[1.0, 1.0]);
        let v: LineIntegral<Q> = line_integral(&r, 0, &l, IntegrandKind::Lambda, Region::All).unwrap();
        assert_eq!(v.dz, Q::new((-1).into(), 2.into()));
        assert!((v.h1 + 2f64.sqrt() / 2.0).abs() < 1e-14);
        // mu on the diagonal line: mu_0 = 1 on [1,2]^2
        let l = line(&[-4.0, -4.0], &[1.0, 1.0]);
        let v: LineIntegral<Q> = line_integral(&r, 0, &l, IntegrandKind::Mu, Region::All).unwrap();
        assert_eq!(v.dz, Q::from_integer(1.into()));
        assert!((v.h1 - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn metric_consistency_and_telescoping() {
        let sch = BranchingSchedule::build(0.6, 8).unwrap();
        let real = Realization::sample(&sch, 33);
        let l = line(&[-3.25, -2.5], &[1.75, 1.25]);
        for n in 0..7 {
            let y_n: LineIntegral<Q> = line_integral(&real, n, &l, IntegrandKind::Mu, Region::All).unwrap();
            let y_n1: LineIntegral<Q> =
                line_integral(&real, n + 1, &l, IntegrandKind::Mu, Region::All).unwrap();
            let z_n: LineIntegral<Q> =
                line_integral(&real, n, &l, IntegrandKind::MuDiff, Region::All).unwrap();
            assert_eq!(y_n1.dz.clone() - y_n.dz.clone(), z_n.dz, "telescoping at n={n}");
            assert_eq!(y_n.h1, l.speed() * y_n.dz.to_f64());
            // mu integrals are nonnegative
            assert!(y_n.dz >= Q::zero());
        }
    }

    #[test]
    fn region_additivity_exact() {
        let sch = BranchingSchedule::build(0.75, 7).unwrap();
        let real = Realization::sample(&sch, 5);
        let l = line(&[-3.0, -2.84375], &[1.0, 1.5]);
        let delta = dy(1, 5);
        for kind in [IntegrandKind::Lambda, IntegrandKind::Mu, IntegrandKind::MuDiff] {
            let all: LineIntegral<Q> = line_integral(&real, 5, &l, kind, Region::All).unwrap();
            let inside: LineIntegral<Q> =
                line_integral(&real, 5, &l, kind, Region::InsideDelta(delta)).unwrap();
            let outside: LineIntegral<Q> =
                line_integral(&real, 5, &l, kind, Region::OutsideDelta(delta)).unwrap();
            assert_eq!(inside.dz.clone() + outside.dz.clone(), all.dz);
        }
    }

    #[test]
    fn continuity_defect_degenerate() {
        let sch = BranchingSchedule::build(0.6, 5).unwrap();
        let real = Realization::sample(&sch, 1);
        let l = line(&[-3.25, -2.5], &[1.75, 1.25]);
        assert_eq!(continuity_defect(&real, 3, &l, &l).unwrap(), 0.0);
        let l2 = line(&[-3.25, -2.53125], &[1.75, 1.25]);
        let d1 = continuity_defect(&real, 3, &l, &l2).unwrap();
        let d2 = continuity_defect(&real, 3, &l2, &l).unwrap();
        assert_eq!(d1, d2);
        assert!(d1.is_finite());
    }
}
