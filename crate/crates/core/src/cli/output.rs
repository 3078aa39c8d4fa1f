//! Output emission: RFC 4180 CSV tables, JSON reports, static SVG plots.

use crate::analysis::ExponentProfile;
use crate::error::Result;
use crate::experiments::ExperimentReport;
use num_rational::BigRational;
use std::fs;
use std::path::{Path, PathBuf};

/// Floats are serialized with 17 significant digits so CSV readers
/// round-trip them bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Exact rationals print as `p/q`.
pub fn fmt_rational(v: &BigRational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn write_report(&self, name: &str, report: &ExperimentReport) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, report.to_json())?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Report tables share one shape: a per-level CSV.
pub fn report_table(report: &ExperimentReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "n", "active", "q50", "q95", "max_abs", "threshold", "exceed_x", "exceed_z",
    ];
    let rows = report
        .per_level
        .iter()
        .map(|ls| {
            vec![
                ls.n.to_string(),
                ls.active.to_string(),
                fmt_f64(ls.q50),
                fmt_f64(ls.q95),
                fmt_f64(ls.max_abs),
                fmt_f64(ls.threshold),
                fmt_f64(ls.exceed_x),
                fmt_f64(ls.exceed_z),
            ]
        })
        .collect();
    (header, rows)
}

/// Figure-style SVG with the three exponent curves: `p0(s)` solid, `1/s`
/// and the earlier `(2-s)/s` threshold dashed. Self-contained SVG 1.1.
pub fn exponents_svg(profiles: &[ExponentProfile]) -> String {
    let w = 720.0;
    let h = 480.0;
    let ml = 60.0;
    let mr = 20.0;
    let mt = 20.0;
    let mb = 45.0;
    let s_min = 0.5;
    let s_max = 1.0;
    let y_min = 1.0;
    let y_max = 2.0f64;
    let sx = |s: f64| ml + (s - s_min) / (s_max - s_min) * (w - ml - mr);
    let sy = |p: f64| h - mb - (p.min(y_max) - y_min) / (y_max - y_min) * (h - mt - mb);

    let polyline = |pts: &[(f64, f64)]| -> String {
        pts.iter()
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let p0: Vec<(f64, f64)> = profiles.iter().map(|p| (p.s, p.p0)).collect();
    let inv: Vec<(f64, f64)> = profiles.iter().map(|p| (p.s, p.sharp_lower)).collect();
    let lp: Vec<(f64, f64)> = profiles
        .iter()
        .filter_map(|p| p.lp_p0.map(|v| (p.s, v)))
        .collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    for i in 0..=5 {
        let s = 0.5 + 0.1 * i as f64;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{s:.1}</text>\n",
            sx(s),
            h - mb + 18.0
        ));
    }
    for i in 0..=4 {
        let p = 1.0 + 0.25 * i as f64;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{p:.2}</text>\n",
            ml - 6.0,
            sy(p) + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">s</text>\n",
        (ml + w - mr) / 2.0,
        h - 8.0
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.8\" points=\"{}\"/>\n",
        polyline(&p0)
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\" points=\"{}\"/>\n",
        polyline(&inv)
    ));
    if !lp.is_empty() {
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.2\" stroke-dasharray=\"2,3\" points=\"{}\"/>\n",
            polyline(&lp)
        ));
    }
    svg.push_str("<text x=\"90\" y=\"40\" font-size=\"13\">solid: p0(s); long dash: 1/s; short dash: (2-s)/s</text>\n");
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::exponent_grid;

    #[test]
    fn float_format_has_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::SQRT_2);
        assert_eq!(s, "1.4142135623730951e0");
        assert_eq!(s.chars().filter(|c| c.is_ascii_digit()).count() - 1, 17);
        let parsed: f64 = s.parse().unwrap();
        assert_eq!(parsed, std::f64::consts::SQRT_2);
    }

    #[test]
    fn rational_format() {
        let q = BigRational::new((-3).into(), 8.into());
        assert_eq!(fmt_rational(&q), "-3/8");
    }

    #[test]
    fn svg_is_self_contained() {
        let profiles = exponent_grid(0.55, 0.95, 0.05).unwrap();
        let svg = exponents_svg(&profiles);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("version=\"1.1\""));
        assert!(!svg.contains("href"), "no external references allowed");
        assert!(!svg.contains("url("));
        assert!(svg.contains("polyline"));
    }
}
