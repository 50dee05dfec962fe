use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed-form resistance bounds, each evaluated with implied constant 1.
/// `log` is the natural logarithm throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// 1/deg + r²/(deg β(r)) for R_2(x ↔ Γ \ B(x, r)).
    Ball2Lower,
    /// 1/deg + r² log r / β(r).
    Ball2Upper,
    /// 1/deg + r^p/(deg β(r)).
    BallPLower,
    /// deg^{−α(p)} + r^p (log r)^{p−1} / β(r).
    BallPUpper,
    /// deg^{−α(p)} + r^p / β(r), for non-integer p.
    BallPUpperNonInteger,
    /// 1/deg + diam^p/(deg |Γ|) for R_{Γ,p}.
    FinitePLower,
    /// deg^{−α(p)} + diam^p (log |Γ|)^{p−1} / |Γ|.
    FinitePUpper,
    /// r^p / β(r), under β(r) ≤ r^{p−ε}.
    BallSlowGrowth,
    /// diam^p / |Γ|, under diam ≥ |Γ|^{1/(p−ε)}.
    FiniteSlowGrowth,
    /// n²/(deg β(n)) · log(r/n) for R_2(S(x, n) ↔ S(x, r)).
    AnnulusLower,
    /// Smallest applicable case bound for R_{Γ,p}, with q from |Γ| = diam^q.
    FiniteCases,
    /// Smallest applicable case bound for R_p(x ↔ S(x, r+1)), with q from
    /// β(4r) = (4r)^q.
    BallCases,
}

/// Symbols a formula may reference; unset fields raise `MissingParam`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FormulaParams {
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<f64>,
    pub beta_r: Option<f64>,
    pub beta_n: Option<f64>,
    pub beta_4r: Option<f64>,
    pub deg: Option<f64>,
    pub diam: Option<f64>,
    pub order: Option<f64>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingParam(name))
}

/// Exponent of deg in the case bounds: 1 − p/(⌊p⌋ + 1).
fn case_alpha(p: f64) -> f64 {
    1.0 - p / (p.floor() + 1.0)
}

/// Case formulas shared by the finite and ball versions: `scale` is diam or
/// r, `volume` is |Γ| or β(r).
fn case_min(p: f64, q: f64, deg: f64, scale: f64, volume: f64) -> f64 {
    let fp = p.floor();
    let integer = p == fp;
    let log_term = scale.powf(p) * (volume / deg).ln().powf(p - 1.0) / volume;
    let plain = scale.powf(p) / volume;
    let top = deg.powf(-case_alpha(p));
    let mut best = f64::INFINITY;
    if q >= fp + 1.0 {
        best = best.min(top);
    }
    if fp <= q && q < fp + 1.0 {
        best = best.min(top + if integer { log_term } else { plain });
    }
    if q <= p {
        best = best.min(1.0 / deg + log_term);
    }
    if q < fp && !integer {
        best = best.min(plain);
    }
    if q < p {
        best = best.min(plain);
    }
    best
}

pub fn theorem_rhs<S: Scalar>(formula: Formula, params: &FormulaParams) -> Result<S> {
    use Formula::*;
    let v = match formula {
        Ball2Lower | BallPLower => {
            let p = if formula == Ball2Lower {
                2.0
            } else {
                need(params.p, "p")?
            };
            let r = need(params.r, "r")?;
            let deg = need(params.deg, "deg")?;
            let beta = need(params.beta_r, "beta_r")?;
            1.0 / deg + r.powf(p) / (deg * beta)
        }
        Ball2Upper => {
            let r = need(params.r, "r")?;
            1.0 / need(params.deg, "deg")? + r * r * r.ln() / need(params.beta_r, "beta_r")?
        }
        BallPUpper | BallPUpperNonInteger => {
            let p = need(params.p, "p")?;
            let r = need(params.r, "r")?;
            let deg = need(params.deg, "deg")?;
            let beta = need(params.beta_r, "beta_r")?;
            let log = if formula == BallPUpper {
                r.ln().powf(p - 1.0)
            } else {
                1.0
            };
            deg.powf(-crate::bounds::alpha(p)) + r.powf(p) * log / beta
        }
        FinitePLower => {
            let p = need(params.p, "p")?;
            let deg = need(params.deg, "deg")?;
            let diam = need(params.diam, "diam")?;
            1.0 / deg + diam.powf(p) / (deg * need(params.order, "order")?)
        }
        FinitePUpper => {
            let p = need(params.p, "p")?;
            let deg = need(params.deg, "deg")?;
            let diam = need(params.diam, "diam")?;
            let order = need(params.order, "order")?;
            deg.powf(-crate::bounds::alpha(p)) + diam.powf(p) * order.ln().powf(p - 1.0) / order
        }
        BallSlowGrowth => need(params.r, "r")?.powf(need(params.p, "p")?) / need(params.beta_r, "beta_r")?,
        FiniteSlowGrowth => need(params.diam, "diam")?.powf(need(params.p, "p")?) / need(params.order, "order")?,
        AnnulusLower => {
            let n = need(params.n, "n")?;
            let r = need(params.r, "r")?;
            n * n / (need(params.deg, "deg")? * need(params.beta_n, "beta_n")?) * (r / n).ln()
        }
        FiniteCases => {
            let p = need(params.p, "p")?;
            let diam = need(params.diam, "diam")?;
            let order = need(params.order, "order")?;
            let q = order.ln() / diam.ln();
            case_min(p, q, need(params.deg, "deg")?, diam, order)
        }
        BallCases => {
            let p = need(params.p, "p")?;
            let r = need(params.r, "r")?;
            let q = need(params.beta_4r, "beta_4r")?.ln() / (4.0 * r).ln();
            case_min(p, q, need(params.deg, "deg")?, r, need(params.beta_r, "beta_r")?)
        }
    };
    S::from_f64(v).ok_or_else(|| Error::DomainError(format!("{v} not representable")))
}
