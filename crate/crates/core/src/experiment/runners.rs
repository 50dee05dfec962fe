use crate::bounds::{
    bk_upper_bound, log_log_slope, nash_williams_bound, sphere_cutsets, theorem_rhs, BkStrategy, BkTarget, BoundReport,
    Formula, FormulaParams, Side,
};
use crate::error::{Error, Result};
use crate::graph::{
    build_ball_capped, build_cayley_graph_capped, dirichlet_problem, growth_profile, BallGraph, DirichletMode,
    GraphSpec, GrowthProfile, TerminalProblem,
};
use crate::isoperimetry::{
    check_iso_theorems, exact_profile, ratio_spread, verify_csc, IsoTheorem, ProfileMode, VERIFY_CAP,
};
use crate::penergy::{p_resistance, p_resistance_with, SolverConfig};
use crate::walks::{escape_via_resistance, simulate_escape_profile};

use super::{Cell, ExperimentKind, ExperimentManifest, RunOptions, StrategyName, Table};

type Outcome = (Vec<Table>, Vec<BoundReport<f64>>);

pub(super) fn dispatch(m: &ExperimentManifest, opts: &RunOptions) -> Result<Outcome> {
    let cap = opts.size_cap;
    let params = &m.params;
    let sorted = |v: &Option<Vec<u32>>| {
        let mut v = v.clone().unwrap_or_default();
        v.sort_unstable();
        v.dedup();
        v
    };
    let spec = || m.graph.as_ref().expect("validated");
    match m.experiment {
        ExperimentKind::Resistance => resistance(
            spec(),
            params.p.as_deref().expect("validated"),
            &sorted(&params.r),
            params.tol,
            params.strategy,
            cap,
        ),
        ExperimentKind::Escape => escape(
            spec(),
            &sorted(&params.r),
            params.trials.expect("validated"),
            params.seed.unwrap_or(0),
            cap,
        ),
        ExperimentKind::Growth => growth(spec(), sorted(&params.r)[0], cap),
        ExperimentKind::Isoperimetry => isoperimetry(m, cap),
        ExperimentKind::Sandwich => sandwich(spec(), params.p.as_deref().expect("validated"), &sorted(&params.r), cap),
        ExperimentKind::Table1 => table1(params.epsilon.unwrap_or(0.5), cap),
        ExperimentKind::SharpnessNw => {
            let mut ns = params.n.clone().expect("validated");
            ns.sort_unstable();
            ns.dedup();
            sharpness_nw(
                &ns,
                params.d.expect("validated"),
                params.k.unwrap_or(1),
                params.p.as_deref().unwrap_or(&[2.0]),
                cap,
            )
        }
        ExperimentKind::VarConverse => {
            let n = params.n.as_ref().expect("validated")[0];
            var_converse(spec(), n as u32, &sorted(&params.r), cap)
        }
    }
}

fn sorted_ps(ps: &[f64]) -> Vec<f64> {
    let mut v = ps.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn need_radius(r: &[u32]) -> Result<()> {
    if r.contains(&0) {
        return Err(Error::InvalidManifest("radii must be at least 1".into()));
    }
    Ok(())
}

/// Growth profile from a ball large enough that β(R) ≥ `need`, or the whole
/// graph if it is smaller.
fn growth_reaching(spec: &GraphSpec, need: u64, start: u32, cap: u64) -> Result<GrowthProfile> {
    let mut radius = start.max(1);
    loop {
        let ball = build_ball_capped(spec, radius, cap)?;
        let profile = growth_profile(&ball);
        if *profile.beta.last().expect("β(0)") >= need || ball.covers_ambient() {
            return Ok(profile);
        }
        radius *= 2;
    }
}

fn resistance(
    spec: &GraphSpec,
    ps: &[f64],
    rs: &[u32],
    tol: Option<f64>,
    strategy: Option<StrategyName>,
    cap: u64,
) -> Result<Outcome> {
    let r_max = *rs.last().expect("validated");
    let ball = build_ball_capped(spec, r_max + 1, cap)?;
    let mut cfg = SolverConfig::<f64>::default();
    if let Some(tol) = tol {
        cfg.tol = tol;
    }
    let growth = match strategy {
        Some(StrategyName::Growth) => Some(growth_reaching(
            spec,
            2 * ball.inner_ball(r_max).len() as u64,
            r_max + 1,
            cap,
        )?),
        _ => None,
    };
    let mut columns = vec![
        "r",
        "p",
        "resistance",
        "capacity",
        "iterations",
        "residual",
        "identity_defect",
        "nash_williams",
    ];
    if strategy.is_some() {
        columns.push("bk_bound");
    }
    let mut table = Table::new("resistance", &columns);
    let mut reports = Vec::new();
    for &r in rs {
        let problem = dirichlet_problem(&ball, r, DirichletMode::Sphere)?;
        let cutsets = sphere_cutsets(&ball, r + 1)?;
        for &p in &sorted_ps(ps) {
            let flow = p_resistance_with(&problem, p, &cfg)?;
            let nw = nash_williams_bound(&cutsets, p)?;
            let mut row: Vec<Cell> = vec![
                r.into(),
                p.into(),
                flow.resistance.into(),
                flow.capacity.into(),
                flow.potential.iterations.into(),
                flow.potential.residual.into(),
                flow.identity_defect.into(),
                nw.into(),
            ];
            reports.push(
                BoundReport::strict("nash_williams", flow.resistance, nw, Side::Lower)
                    .with_param("r", r as f64)
                    .with_param("p", p),
            );
            if let Some(s) = strategy {
                let strat = match (&growth, s) {
                    (Some(g), _) => BkStrategy::Growth(g),
                    (None, _) => BkStrategy::Exhaustive,
                };
                let bk = bk_upper_bound(BkTarget::Ball { ball: &ball, radius: r }, p, strat)?;
                row.push(bk.value.into());
                reports.push(
                    BoundReport::informational("benjamini_kozma", flow.resistance, bk.value, Side::Upper)
                        .with_param("r", r as f64)
                        .with_param("p", p),
                );
            }
            table.push(row);
        }
    }
    Ok((vec![table], reports))
}

fn escape(spec: &GraphSpec, rs: &[u32], trials: u64, seed: u64, cap: u64) -> Result<Outcome> {
    need_radius(rs)?;
    let r_max = *rs.last().expect("validated");
    let ball = build_ball_capped(spec, r_max, cap)?;
    let estimates = simulate_escape_profile(&ball, r_max, trials, seed)?;
    let hash = spec.hash_hex();
    let mut table = Table::new(
        "escape",
        &["r", "spec_hash", "trials", "p_hat", "stderr", "seed", "identity"],
    );
    let mut reports = Vec::new();
    for &r in rs {
        let est = estimates[r as usize - 1];
        let identity: f64 = escape_via_resistance(&ball, r)?;
        table.push(vec![
            r.into(),
            hash.as_str().into(),
            est.trials.into(),
            est.p_hat.into(),
            est.stderr.into(),
            seed.into(),
            identity.into(),
        ]);
        reports.push(
            BoundReport::strict(
                "escape_deviation",
                (est.p_hat - identity).abs(),
                4.0 * est.stderr + 1e-9,
                Side::Upper,
            )
            .with_param("r", r as f64),
        );
    }
    Ok((vec![table], reports))
}

fn growth(spec: &GraphSpec, r: u32, cap: u64) -> Result<Outcome> {
    let ball = build_ball_capped(spec, r, cap)?;
    let profile = growth_profile(&ball);
    let mut table = Table::new("growth", &["r", "beta", "sigma"]);
    for (i, (b, s)) in profile.beta.iter().zip(&profile.sigma).enumerate() {
        table.push(vec![i.into(), (*b).into(), (*s).into()]);
    }
    Ok((vec![table], Vec::new()))
}

fn theorem_name(t: IsoTheorem) -> String {
    toml::Value::try_from(t)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{t:?}"))
}

fn isoperimetry(m: &ExperimentManifest, cap: u64) -> Result<Outcome> {
    let spec = m.graph.as_ref().expect("validated");
    let params = &m.params;
    match params.r.as_deref() {
        None => {
            if params.theorems.is_some() || params.seed.is_some() {
                return Err(Error::InvalidManifest(
                    "theorems and seed apply only with a radius r".into(),
                ));
            }
            if !spec.is_finite() {
                return Err(Error::InvalidManifest("exact profiles need a finite graph".into()));
            }
            let graph = build_cayley_graph_capped(spec, cap)?;
            let profile = exact_profile(&graph, params.mode.unwrap_or(ProfileMode::AllSets), None)?;
            let mut table = Table::new(
                "profile",
                &[
                    "size",
                    "min_vertex_boundary",
                    "min_edge_boundary",
                    "vertex_witness",
                    "edge_witness",
                ],
            );
            let mask = |w: &[usize]| format!("{:#x}", w.iter().fold(0u64, |m, &v| m | 1 << v));
            for (size, s) in &profile.by_size {
                table.push(vec![
                    (*size).into(),
                    s.vertex.into(),
                    s.edge.into(),
                    mask(&s.vertex_witness).into(),
                    mask(&s.edge_witness).into(),
                ]);
            }
            let reports = if graph.n() <= VERIFY_CAP {
                verify_csc(&graph)?
            } else {
                Vec::new()
            };
            Ok((vec![table], reports))
        }
        Some(rs) => {
            if params.mode.is_some() {
                return Err(Error::InvalidManifest("mode applies only to exact profiles".into()));
            }
            if rs.len() != 1 {
                return Err(Error::InvalidManifest("isoperimetry takes one radius".into()));
            }
            let r = rs[0];
            let ball = build_ball_capped(spec, r + 1, cap)?;
            let theorems = params.theorems.clone().unwrap_or_else(|| {
                vec![
                    IsoTheorem::GrowthIso,
                    IsoTheorem::LinearRelativeIso,
                    IsoTheorem::BallBoundaryConverse,
                ]
            });
            let mut summary = Table::new("iso_summary", &["theorem", "sets", "min_ratio", "max_ratio", "spread"]);
            let mut reports = Vec::new();
            for t in theorems {
                let name = theorem_name(t);
                let mut rep = check_iso_theorems(&ball, r, t, params.seed.unwrap_or(0))?;
                for x in &mut rep {
                    x.quantity = name.clone();
                }
                let lo = rep.iter().map(|x| x.ratio).fold(f64::INFINITY, f64::min);
                let hi = rep.iter().map(|x| x.ratio).fold(0.0, f64::max);
                summary.push(vec![
                    name.as_str().into(),
                    rep.len().into(),
                    lo.into(),
                    hi.into(),
                    ratio_spread(&rep).into(),
                ]);
                reports.extend(rep);
            }
            Ok((vec![summary], reports))
        }
    }
}

fn ball_formulas(p: f64) -> (Formula, Formula) {
    if p == 2.0 {
        (Formula::Ball2Lower, Formula::Ball2Upper)
    } else if p.fract() == 0.0 {
        (Formula::BallPLower, Formula::BallPUpper)
    } else {
        (Formula::BallPLower, Formula::BallPUpperNonInteger)
    }
}

fn sandwich(spec: &GraphSpec, ps: &[f64], rs: &[u32], cap: u64) -> Result<Outcome> {
    need_radius(rs)?;
    let r_max = *rs.last().expect("validated");
    let ball = build_ball_capped(spec, r_max + 1, cap)?;
    let profile = growth_profile(&ball);
    let mut table = Table::new(
        "sandwich",
        &[
            "r",
            "p",
            "lower_rhs",
            "computed",
            "upper_rhs",
            "computed_over_lower",
            "computed_over_upper",
        ],
    );
    let mut slopes = Table::new(
        "sandwich_fit",
        &[
            "p",
            "slope_computed",
            "slope_upper",
            "spread_over_lower",
            "spread_over_upper",
        ],
    );
    let mut reports = Vec::new();
    for &p in &sorted_ps(ps) {
        let (lower_f, upper_f) = ball_formulas(p);
        let mut pts = Vec::new();
        for &r in rs {
            let problem = dirichlet_problem(&ball, r, DirichletMode::Sphere)?;
            let computed = p_resistance::<f64>(&problem, p)?.resistance;
            let fp = FormulaParams {
                p: Some(p),
                r: Some(r as f64),
                beta_r: Some(profile.beta[r as usize] as f64),
                deg: Some(ball.ambient_degree as f64),
                ..Default::default()
            };
            let lower: f64 = theorem_rhs(lower_f, &fp)?;
            let upper: f64 = theorem_rhs(upper_f, &fp)?;
            table.push(vec![
                r.into(),
                p.into(),
                lower.into(),
                computed.into(),
                upper.into(),
                (computed / lower).into(),
                (computed / upper).into(),
            ]);
            reports.push(
                BoundReport::informational("sandwich_lower", computed, lower, Side::Lower)
                    .with_param("r", r as f64)
                    .with_param("p", p),
            );
            reports.push(
                BoundReport::informational("sandwich_upper", computed, upper, Side::Upper)
                    .with_param("r", r as f64)
                    .with_param("p", p),
            );
            pts.push((r as f64, computed, lower, upper));
        }
        if pts.len() >= 2 {
            let spread =
                |v: Vec<f64>| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
            slopes.push(vec![
                p.into(),
                log_log_slope(&pts.iter().map(|x| (x.0, x.1)).collect::<Vec<_>>())?.into(),
                log_log_slope(&pts.iter().map(|x| (x.0, x.3)).collect::<Vec<_>>())?.into(),
                spread(pts.iter().map(|x| x.1 / x.2).collect()).into(),
                spread(pts.iter().map(|x| x.1 / x.3).collect()).into(),
            ]);
        }
    }
    Ok((vec![table, slopes], reports))
}

/// Resistance scale predicted for (ℤ/nℤ)^d ⊕ ℤ/kℤ: n^{p−d}/k, (log n)^{p−1}/k
/// or 1/k as d is below, equal to or above p.
pub(crate) fn predicted_regime(p: f64, d: usize, k: u64, n: u64) -> f64 {
    let (d, k, n) = (d as f64, k as f64, n as f64);
    if d < p {
        n.powf(p - d) / k
    } else if d == p {
        n.ln().powf(p - 1.0) / k
    } else {
        1.0 / k
    }
}

/// Nash-Williams bound and exact R_p(0 ↔ S(0, n/2)) on (ℤ/nℤ)^d ⊕ ℤ/kℤ.
struct SharpPoint {
    sizes: Vec<u64>,
    nash_williams: f64,
    resistance: f64,
}

fn sharp_point(n: u64, d: usize, k: u64, p: f64, cap: u64) -> Result<SharpPoint> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidManifest(format!("n = {n} must be even and at least 4")));
    }
    let half = (n / 2) as u32;
    let spec = GraphSpec::torus_with_full_factor(n, d, k)?;
    let ball: BallGraph = build_ball_capped(&spec, half, cap)?;
    let cutsets = sphere_cutsets(&ball, half)?;
    let nash_williams = nash_williams_bound(&cutsets, p)?;
    let problem = dirichlet_problem(&ball, half - 1, DirichletMode::Sphere)?;
    let resistance = p_resistance::<f64>(&problem, p)?.resistance;
    Ok(SharpPoint {
        sizes: cutsets.sizes,
        nash_williams,
        resistance,
    })
}

/// Row name, p, d and the (n, k) points of one sharpness-table row.
type Row = (&'static str, f64, usize, Vec<(u64, u64)>);

/// The parameter rows of the sharpness table at desk scale.
pub(crate) fn table1_rows(epsilon: f64) -> Vec<Row> {
    let k_of = |n: u64| (n as f64).powf(1.0 - epsilon).ceil() as u64;
    let with_k = |ns: &[u64], fixed: Option<u64>| -> Vec<(u64, u64)> {
        ns.iter().map(|&n| (n, fixed.unwrap_or_else(|| k_of(n)))).collect()
    };
    vec![
        ("p2_d2_k1", 2.0, 2, with_k(&[8, 12, 16], Some(1))),
        ("p2_d3_k1", 2.0, 3, with_k(&[6, 8], Some(1))),
        ("p2_d1_kpow", 2.0, 1, with_k(&[16, 32, 64], None)),
        ("p3_d2_kpow", 3.0, 2, with_k(&[8, 12, 16], None)),
    ]
}

fn table1(epsilon: f64, cap: u64) -> Result<Outcome> {
    let mut table = Table::new(
        "table1",
        &[
            "row",
            "p",
            "d",
            "k",
            "n",
            "nash_williams",
            "resistance",
            "regime",
            "nw_over_regime",
        ],
    );
    let mut summary = Table::new("table1_rows", &["row", "points", "min_ratio", "max_ratio", "spread"]);
    let mut reports = Vec::new();
    for (name, p, d, points) in table1_rows(epsilon) {
        let mut ratios = Vec::new();
        for (n, k) in points {
            let pt = sharp_point(n, d, k, p, cap)?;
            let regime = predicted_regime(p, d, k, n);
            let ratio = pt.nash_williams / regime;
            ratios.push(ratio);
            table.push(vec![
                name.into(),
                p.into(),
                d.into(),
                k.into(),
                n.into(),
                pt.nash_williams.into(),
                pt.resistance.into(),
                regime.into(),
                ratio.into(),
            ]);
            reports.push(
                BoundReport::strict("nash_williams", pt.resistance, pt.nash_williams, Side::Lower)
                    .with_param("n", n as f64)
                    .with_param("d", d as f64)
                    .with_param("k", k as f64)
                    .with_param("p", p),
            );
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        summary.push(vec![
            name.into(),
            ratios.len().into(),
            lo.into(),
            hi.into(),
            (hi / lo).into(),
        ]);
    }
    Ok((vec![table, summary], reports))
}

fn sharpness_nw(ns: &[u64], d: usize, k: u64, ps: &[f64], cap: u64) -> Result<Outcome> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidManifest("need d ≥ 1 and k ≥ 1".into()));
    }
    let mut cuts = Table::new("cutsets", &["n", "i", "size", "k_i_pow"]);
    let mut table = Table::new(
        "sharpness_nw",
        &["n", "p", "nash_williams", "closed_form", "resistance"],
    );
    let mut reports = Vec::new();
    for &n in ns {
        let mut sizes_done = false;
        for &p in &sorted_ps(ps) {
            let pt = sharp_point(n, d, k, p, cap)?;
            if !sizes_done {
                for (i, &s) in pt.sizes.iter().enumerate() {
                    let shape = k as f64 * (i.max(1) as f64).powi(d as i32 - 1);
                    cuts.push(vec![n.into(), i.into(), s.into(), shape.into()]);
                }
                sizes_done = true;
            }
            // (1/k) (Σ_{i=1}^{n/2} i^{(1−d)/(p−1)})^{p−1}
            let sum: f64 = (1..=n / 2).map(|i| (i as f64).powf((1.0 - d as f64) / (p - 1.0))).sum();
            let closed = sum.powf(p - 1.0) / k as f64;
            table.push(vec![
                n.into(),
                p.into(),
                pt.nash_williams.into(),
                closed.into(),
                pt.resistance.into(),
            ]);
            reports.push(
                BoundReport::strict("nash_williams", pt.resistance, pt.nash_williams, Side::Lower)
                    .with_param("n", n as f64)
                    .with_param("p", p),
            );
            reports.push(
                BoundReport::informational("closed_form", pt.nash_williams, closed, Side::Lower)
                    .with_param("n", n as f64)
                    .with_param("p", p),
            );
        }
    }
    Ok((vec![table, cuts], reports))
}

fn var_converse(spec: &GraphSpec, n: u32, rs: &[u32], cap: u64) -> Result<Outcome> {
    if n == 0 || rs.iter().any(|&r| r <= n) {
        return Err(Error::InvalidManifest("need 1 ≤ n < r for every r".into()));
    }
    let r_max = *rs.last().expect("validated");
    let ball = build_ball_capped(spec, r_max, cap)?;
    let profile = growth_profile(&ball);
    let source: Vec<usize> = ball.sphere(n).collect();
    let mut table = Table::new(
        "var_converse",
        &["r", "resistance", "rhs", "ratio", "log_r_over_n", "resistance_over_log"],
    );
    let mut reports = Vec::new();
    for &r in rs {
        let ground: Vec<usize> = ball.sphere(r).collect();
        let problem = TerminalProblem::collapse(&ball.graph, &source, &ground)?;
        let resistance = p_resistance::<f64>(&problem, 2.0)?.resistance;
        let fp = FormulaParams {
            n: Some(n as f64),
            r: Some(r as f64),
            beta_n: Some(profile.beta[n as usize] as f64),
            deg: Some(ball.ambient_degree as f64),
            ..Default::default()
        };
        let rhs: f64 = theorem_rhs(Formula::AnnulusLower, &fp)?;
        let log = (r as f64 / n as f64).ln();
        table.push(vec![
            r.into(),
            resistance.into(),
            rhs.into(),
            (resistance / rhs).into(),
            log.into(),
            (resistance / log).into(),
        ]);
        reports.push(
            BoundReport::informational("annulus_resistance", resistance, rhs, Side::Lower)
                .with_param("n", n as f64)
                .with_param("r", r as f64),
        );
    }
    Ok((vec![table], reports))
}
