//! Reproducible experiments described by TOML manifests.
//!
//! A manifest names one experiment, the graph it runs on (if any), its
//! parameters and where the artifacts go. Parameters an experiment does not
//! read are rejected, as are unknown keys. Every artifact carries the
//! manifest hash and the tool version.

mod emit;
mod runners;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundReport, Status};
use crate::error::{Error, Result};
use crate::graph::{short_hash, GraphSpec, DEFAULT_SIZE_CAP};
use crate::isoperimetry::{IsoTheorem, ProfileMode};

pub use emit::{emit, write_table, Cell, Format, Stamp, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Resistance,
    Escape,
    Growth,
    Isoperimetry,
    Sandwich,
    Table1,
    SharpnessNw,
    VarConverse,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Resistance => "resistance",
            ExperimentKind::Escape => "escape",
            ExperimentKind::Growth => "growth",
            ExperimentKind::Isoperimetry => "isoperimetry",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::Table1 => "table1",
            ExperimentKind::SharpnessNw => "sharpness_nw",
            ExperimentKind::VarConverse => "var_converse",
        }
    }

    fn needs_graph(self) -> bool {
        !matches!(self, ExperimentKind::Table1 | ExperimentKind::SharpnessNw)
    }

    /// (accepted, required) parameter names.
    fn params(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ExperimentKind::Resistance => (&["p", "r", "tol", "strategy"], &["p", "r"]),
            ExperimentKind::Escape => (&["r", "trials", "seed"], &["r", "trials"]),
            ExperimentKind::Growth => (&["r"], &["r"]),
            ExperimentKind::Isoperimetry => (&["r", "mode", "theorems", "seed"], &[]),
            ExperimentKind::Sandwich => (&["p", "r"], &["p", "r"]),
            ExperimentKind::Table1 => (&["epsilon"], &[]),
            ExperimentKind::SharpnessNw => (&["n", "d", "k", "p"], &["n", "d"]),
            ExperimentKind::VarConverse => (&["n", "r"], &["n", "r"]),
        }
    }
}

/// How the Benjamini–Kozma maxima are obtained in `resistance` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Exhaustive,
    Growth,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ProfileMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorems: Option<Vec<IsoTheorem>>,
}

impl Params {
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut add = |set: bool, name| {
            if set {
                out.push(name)
            }
        };
        add(self.p.is_some(), "p");
        add(self.r.is_some(), "r");
        add(self.n.is_some(), "n");
        add(self.d.is_some(), "d");
        add(self.k.is_some(), "k");
        add(self.trials.is_some(), "trials");
        add(self.seed.is_some(), "seed");
        add(self.epsilon.is_some(), "epsilon");
        add(self.tol.is_some(), "tol");
        add(self.strategy.is_some(), "strategy");
        add(self.mode.is_some(), "mode");
        add(self.theorems.is_some(), "theorems");
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Artifact directory; defaults to `out/<experiment>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
}

impl FromStr for ExperimentManifest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let m: ExperimentManifest = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }
}

impl ExperimentManifest {
    pub fn new(experiment: ExperimentKind, graph: Option<GraphSpec>, params: Params) -> Self {
        ExperimentManifest {
            experiment,
            graph,
            params,
            output: OutputSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("manifests serialize")
    }

    /// Hash of the canonical text form, so formatting does not matter.
    pub fn hash_hex(&self) -> String {
        short_hash(self.to_text().as_bytes())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output
            .path
            .clone()
            .unwrap_or_else(|| Path::new("out").join(self.experiment.name()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidManifest(msg));
        let kind = self.experiment;
        match (&self.graph, kind.needs_graph()) {
            (None, true) => return bad(format!("{} needs a [graph] section", kind.name())),
            (Some(_), false) => return bad(format!("{} builds its own graphs; remove [graph]", kind.name())),
            _ => {}
        }
        let (accepted, required) = kind.params();
        for name in self.params.present() {
            if !accepted.contains(&name) {
                return bad(format!("parameter `{name}` is not used by {}", kind.name()));
            }
        }
        let present = self.params.present();
        for name in required {
            if !present.contains(name) {
                return bad(format!("{} requires parameter `{name}`", kind.name()));
            }
        }
        let params = &self.params;
        if params.r.as_ref().is_some_and(Vec::is_empty)
            || params.p.as_ref().is_some_and(Vec::is_empty)
            || params.n.as_ref().is_some_and(Vec::is_empty)
        {
            return bad("parameter lists must be nonempty".into());
        }
        if let Some(ps) = &self.params.p {
            if ps.iter().any(|&p| !(p > 1.0 && p.is_finite())) {
                return bad("every p must be a finite value above 1".into());
            }
        }
        if let Some(e) = self.params.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return bad("epsilon must lie in (0, 1)".into());
            }
        }
        if kind == ExperimentKind::VarConverse && self.params.n.as_ref().map(Vec::len) != Some(1) {
            return bad("var_converse takes exactly one inner radius n".into());
        }
        if kind == ExperimentKind::Growth && self.params.r.as_ref().map(Vec::len) != Some(1) {
            return bad("growth takes exactly one radius".into());
        }
        Ok(())
    }
}

/// Settings that do not change the manifest hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub size_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub stamp: Stamp,
    pub tables: Vec<Table>,
    pub reports: Vec<BoundReport<f64>>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// No report failed. Solver non-convergence surfaces as an error from
    /// [`run`] instead.
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.status != Status::Fail)
    }
}

pub fn run(manifest: &ExperimentManifest, opts: &RunOptions) -> Result<ExperimentOutput> {
    manifest.validate()?;
    let (tables, reports) = runners::dispatch(manifest, opts)?;
    Ok(ExperimentOutput {
        stamp: Stamp {
            experiment: manifest.experiment.name().to_string(),
            manifest_hash: manifest.hash_hex(),
            version: crate::VERSION.to_string(),
        },
        tables,
        reports,
    })
}

/// Runs the manifest and writes its artifacts plus a canonical copy of the
/// manifest into the output directory.
pub fn run_to_dir(manifest: &ExperimentManifest, opts: &RunOptions) -> Result<(ExperimentOutput, Vec<PathBuf>)> {
    let out = run(manifest, opts)?;
    let dir = manifest.output_dir();
    let mut paths = emit(&out.tables, &out.reports, &out.stamp, manifest.output.format, &dir)?;
    let copy = dir.join("manifest.toml");
    std::fs::write(&copy, manifest.to_text())?;
    paths.push(copy);
    Ok((out, paths))
}
