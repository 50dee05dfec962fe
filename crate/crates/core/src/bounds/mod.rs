//! Closed-form resistance and isoperimetric bounds, and the reports that
//! pair them with computed values.

mod benjamini_kozma;
mod cutsets;
mod exponents;
mod theorems;

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GrowthProfile;
use crate::scalar::Scalar;

pub use benjamini_kozma::{
    bk_upper_bound, csc_bound, j_from_boundaries, j_quantity, second_term_bound, BkBound, BkStrategy, BkTarget,
    EXHAUSTIVE_CAP,
};
pub use cutsets::{nash_williams_bound, nash_williams_exact, sphere_cutsets, CutsetFamily};
pub use exponents::{alpha, b, exponent_functions, h, h_star, Exponents};
pub use theorems::{theorem_rhs, Formula, FormulaParams};

/// Relative slack allowed when comparing a computed value with a bound.
pub const REPORT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The bound holds only up to an unknown constant; `ratio` is recorded
    /// but not judged.
    Informational,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Informational => "INFO",
        })
    }
}

/// A computed quantity set against a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<S> {
    pub quantity: String,
    pub computed: S,
    pub bound: S,
    pub side: Side,
    /// computed / bound.
    pub ratio: S,
    pub status: Status,
    pub params: BTreeMap<String, f64>,
}

impl<S: Scalar> BoundReport<S> {
    /// A bound that must hold with constant 1 (up to [`REPORT_SLACK`]).
    pub fn strict(quantity: impl Into<String>, computed: S, bound: S, side: Side) -> Self {
        let slack = S::of(REPORT_SLACK);
        let ok = match side {
            Side::Lower => bound <= computed + computed.abs() * slack,
            Side::Upper => computed <= bound + bound.abs() * slack,
        };
        Self::build(
            quantity,
            computed,
            bound,
            side,
            if ok { Status::Pass } else { Status::Fail },
        )
    }

    /// A bound with an unspecified implied constant.
    pub fn informational(quantity: impl Into<String>, computed: S, bound: S, side: Side) -> Self {
        Self::build(quantity, computed, bound, side, Status::Informational)
    }

    fn build(quantity: impl Into<String>, computed: S, bound: S, side: Side, status: Status) -> Self {
        BoundReport {
            quantity: quantity.into(),
            computed,
            bound,
            side,
            ratio: computed / bound,
            status,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// One row per report. Parameter columns are the union of all parameter
/// names, in sorted order; missing entries are left empty.
pub fn write_reports_csv<S: Scalar, W: Write>(reports: &[BoundReport<S>], out: W) -> Result<()> {
    let names: std::collections::BTreeSet<&str> = reports
        .iter()
        .flat_map(|r| r.params.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["quantity", "computed", "bound", "side", "ratio", "status"];
    header.extend(names.iter().copied());
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.quantity.clone(),
            format!("{:e}", r.computed.to_f64_lossy()),
            format!("{:e}", r.bound.to_f64_lossy()),
            format!("{:?}", r.side).to_lowercase(),
            format!("{:e}", r.ratio.to_f64_lossy()),
            r.status.to_string(),
        ];
        row.extend(
            names
                .iter()
                .map(|n| r.params.get(*n).map(|v| format!("{v}")).unwrap_or_default()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Summary<'a, S> {
    total: usize,
    pass: usize,
    fail: usize,
    informational: usize,
    report: &'a [BoundReport<S>],
}

/// TOML summary with counts followed by every report.
pub fn reports_summary<S: Scalar + Serialize>(reports: &[BoundReport<S>]) -> String {
    let count = |s| reports.iter().filter(|r| r.status == s).count();
    let summary = Summary {
        total: reports.len(),
        pass: count(Status::Pass),
        fail: count(Status::Fail),
        informational: count(Status::Informational),
        report: reports,
    };
    toml::to_string(&summary).expect("reports serialize")
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::BadArguments("slope needs at least two points".into()));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::DomainError("log-log fit needs positive data".into()));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::BadArguments("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// max(a, b)^p ≤ (a + b)^p ≤ 2^p max(a, b)^p for a, b ≥ 0 and p ≥ 0.
pub fn power_sum_sandwich<S: Scalar>(a: S, b: S, p: S) -> bool {
    let m = a.max(b).powf(p);
    let s = (a + b).powf(p);
    let slack = S::one() + S::of(REPORT_SLACK);
    m <= s * slack && s <= S::of(2.0).powf(p) * m * slack
}

/// β(r) ≤ β(4r)/2 for every r with 4r inside the profile and 4r ≤ `diameter`.
/// Returns the radii at which it fails.
pub fn quadrupling_violations(profile: &GrowthProfile, diameter: Option<u32>) -> Vec<u32> {
    let top = profile.radius() / 4;
    let limit = diameter.map_or(top, |d| top.min(d / 4));
    (1..=limit)
        .filter(|&r| {
            let small = profile.beta_at(r).expect("r within profile");
            let big = profile.beta_at(4 * r).expect("4r within profile");
            2 * small > big
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_ball, growth_profile, GraphSpec};

    #[test]
    fn strict_reports() {
        let r = BoundReport::strict("R", 2.0f64, 1.5, Side::Lower);
        assert_eq!(r.status, Status::Pass);
        assert!((r.ratio - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(BoundReport::strict("R", 1.0, 1.5, Side::Lower).status, Status::Fail);
        assert_eq!(
            BoundReport::strict("R", 1.0, 1.0 - 1e-12, Side::Upper).status,
            Status::Pass
        );
        assert_eq!(BoundReport::strict("R", 1.0, 0.9, Side::Upper).status, Status::Fail);
        assert!(BoundReport::informational("R", 10.0, 1.0, Side::Upper).passed());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let reports = vec![
            BoundReport::strict("a", 1.0, 0.5, Side::Lower).with_param("r", 3.0),
            BoundReport::strict("b", 1.0, 2.0, Side::Upper).with_param("p", 2.0),
        ];
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "quantity,computed,bound,side,ratio,status,p,r");
        assert!(lines[1].ends_with("PASS,,3"));
        let summary = reports_summary(&reports);
        let table: toml::Table = summary.parse().unwrap();
        assert_eq!(table["pass"].as_integer(), Some(2));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..10).map(|x| (x as f64, 3.0 * (x as f64).powf(1.5))).collect();
        assert!((log_log_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_err());
    }

    #[test]
    fn power_sum_samples() {
        for (a, b, p) in [(0.0, 0.0, 2.0), (1.0, 3.0, 0.0), (2.5, 0.1, 4.9), (7.0, 7.0, 5.0)] {
            assert!(power_sum_sandwich::<f64>(a, b, p));
        }
    }

    #[test]
    fn quadrupling_on_lattices() {
        for d in 1..=3 {
            let ball = build_ball(&GraphSpec::lattice(d).unwrap(), 12).unwrap();
            assert!(quadrupling_violations(&growth_profile(&ball), None).is_empty());
        }
    }
}
