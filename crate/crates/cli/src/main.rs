use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vtresist::experiment::{run_to_dir, ExperimentKind, ExperimentManifest, Format, Params, RunOptions, StrategyName};
use vtresist::graph::{build_ball_capped, build_cayley_graph_capped, GraphSpec, DEFAULT_SIZE_CAP};
use vtresist::isoperimetry::{IsoTheorem, ProfileMode};
use vtresist::{Error, Result};

#[derive(Parser)]
#[command(
    name = "vtresist",
    version,
    about = "Resistance, escape and isoperimetry experiments on Cayley graphs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for experiments that sample (escape, random iso test sets).
    #[arg(long, global = true, env = "VTRESIST_SEED")]
    seed: Option<u64>,
    /// Artifact directory, overriding the manifest.
    #[arg(long, global = true, env = "VTRESIST_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "VTRESIST_FORMAT", value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true, env = "VTRESIST_THREADS")]
    threads: Option<usize>,
    /// Largest graph or ball, in vertices, that may be built.
    #[arg(long, global = true, env = "VTRESIST_SIZE_CAP", default_value_t = DEFAULT_SIZE_CAP)]
    size_cap: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    StructuredText,
    Plotdata,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::StructuredText => Format::StructuredText,
            FormatArg::Plotdata => Format::Plotdata,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph (or a ball of it) and print its size.
    Build {
        spec: PathBuf,
        #[arg(long)]
        radius: Option<u32>,
    },
    /// p-resistance from the centre to S(r+1), with cutset bounds.
    Resist {
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u32>,
        #[arg(long)]
        tol: Option<f64>,
        /// Also evaluate the isoperimetric upper bound.
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
    },
    /// Monte Carlo escape probabilities against the resistance identity.
    Escape {
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<u32>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Ball volumes and sphere sizes up to radius r.
    Growth {
        spec: PathBuf,
        #[arg(long)]
        r: u32,
    },
    /// Check the isoperimetric inequalities on sets inside B(r).
    Iso {
        spec: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long, value_delimiter = ',', value_enum)]
        theorems: Vec<TheoremArg>,
    },
    /// Exact isoperimetric profile of a small finite graph.
    Verify {
        spec: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Reproduce one of the built-in example families.
    Repro {
        #[arg(value_enum)]
        which: Repro,
    },
    /// Run an experiment manifest.
    Run { manifest: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Growth,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    AllSets,
    ConnectedSets,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    GrowthIso,
    RelativeGrowthIso,
    RelativeLowDimIso,
    ExactGrowthCorollary,
    LinearRelativeIso,
    BallBoundaryConverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum Repro {
    Table1,
    Sharpness,
    VarConverse,
}

fn load_spec(path: &Path) -> Result<GraphSpec> {
    std::fs::read_to_string(path)?.parse()
}

fn repro_manifest(which: Repro) -> ExperimentManifest {
    match which {
        Repro::Table1 => ExperimentManifest::new(ExperimentKind::Table1, None, Params::default()),
        Repro::Sharpness => ExperimentManifest::new(
            ExperimentKind::SharpnessNw,
            None,
            Params {
                n: Some(vec![8, 12, 16]),
                d: Some(2),
                p: Some(vec![2.0, 3.0]),
                ..Params::default()
            },
        ),
        Repro::VarConverse => ExperimentManifest::new(
            ExperimentKind::VarConverse,
            Some(GraphSpec::z_times_torus(5, 2).expect("fixed spec")),
            Params {
                n: Some(vec![8]),
                r: Some(vec![16, 32, 64]),
                ..Params::default()
            },
        ),
    }
}

fn manifest_for(command: Command) -> Result<Option<ExperimentManifest>> {
    let m = match command {
        Command::Build { .. } => return Ok(None),
        Command::Resist {
            spec,
            p,
            r,
            tol,
            strategy,
        } => ExperimentManifest::new(
            ExperimentKind::Resistance,
            Some(load_spec(&spec)?),
            Params {
                p: Some(p),
                r: Some(r),
                tol,
                strategy: strategy.map(|s| match s {
                    StrategyArg::Exhaustive => StrategyName::Exhaustive,
                    StrategyArg::Growth => StrategyName::Growth,
                }),
                ..Params::default()
            },
        ),
        Command::Escape { spec, r, trials } => ExperimentManifest::new(
            ExperimentKind::Escape,
            Some(load_spec(&spec)?),
            Params {
                r: Some(r),
                trials: Some(trials),
                ..Params::default()
            },
        ),
        Command::Growth { spec, r } => ExperimentManifest::new(
            ExperimentKind::Growth,
            Some(load_spec(&spec)?),
            Params {
                r: Some(vec![r]),
                ..Params::default()
            },
        ),
        Command::Iso { spec, r, theorems } => {
            let theorems = (!theorems.is_empty()).then(|| {
                theorems
                    .into_iter()
                    .map(|t| match t {
                        TheoremArg::GrowthIso => IsoTheorem::GrowthIso,
                        TheoremArg::RelativeGrowthIso => IsoTheorem::RelativeGrowthIso,
                        TheoremArg::RelativeLowDimIso => IsoTheorem::RelativeLowDimIso,
                        TheoremArg::ExactGrowthCorollary => IsoTheorem::ExactGrowthCorollary,
                        TheoremArg::LinearRelativeIso => IsoTheorem::LinearRelativeIso,
                        TheoremArg::BallBoundaryConverse => IsoTheorem::BallBoundaryConverse,
                    })
                    .collect()
            });
            ExperimentManifest::new(
                ExperimentKind::Isoperimetry,
                Some(load_spec(&spec)?),
                Params {
                    r: Some(vec![r]),
                    theorems,
                    ..Params::default()
                },
            )
        }
        Command::Verify { spec, mode } => ExperimentManifest::new(
            ExperimentKind::Isoperimetry,
            Some(load_spec(&spec)?),
            Params {
                mode: mode.map(|m| match m {
                    ModeArg::AllSets => ProfileMode::AllSets,
                    ModeArg::ConnectedSets => ProfileMode::ConnectedSets,
                }),
                ..Params::default()
            },
        ),
        Command::Repro { which } => repro_manifest(which),
        Command::Run { manifest } => ExperimentManifest::load(&manifest)?,
    };
    Ok(Some(m))
}

/// Flags override the manifest. A seed is only written into experiments that
/// sample, so a seed set in the environment does not invalidate the others.
fn apply_globals(m: &mut ExperimentManifest, g: &Global) {
    let samples = match m.experiment {
        ExperimentKind::Escape => true,
        ExperimentKind::Isoperimetry => m.params.r.is_some(),
        _ => false,
    };
    if let (Some(seed), true) = (g.seed, samples) {
        m.params.seed = Some(seed);
    }
    if let Some(out) = &g.out {
        m.output.path = Some(out.clone());
    }
    if let Some(f) = g.format {
        m.output.format = f.into();
    }
}

fn build(spec: &Path, radius: Option<u32>, cap: u64) -> Result<()> {
    let spec = load_spec(spec)?;
    let mut t = toml::Table::new();
    t.insert("spec_hash".into(), spec.hash_hex().into());
    match radius.or(spec.radius) {
        Some(r) => {
            let ball = build_ball_capped(&spec, r, cap)?;
            t.insert("radius".into(), i64::from(r).into());
            t.insert("vertices".into(), (ball.graph.n() as i64).into());
            t.insert("edges".into(), (ball.graph.edge_count() as i64).into());
            t.insert("degree".into(), (ball.ambient_degree as i64).into());
            t.insert("covers_graph".into(), ball.covers_ambient().into());
        }
        None => {
            let graph = build_cayley_graph_capped(&spec, cap)?;
            t.insert("vertices".into(), (graph.n() as i64).into());
            t.insert("edges".into(), (graph.edge_count() as i64).into());
            t.insert("degree".into(), (graph.degree(0) as i64).into());
        }
    }
    print!("{t}");
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(threads) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::BadArguments(e.to_string()))?;
    }
    if let Command::Build { spec, radius } = &cli.command {
        build(spec, *radius, cli.global.size_cap)?;
        return Ok(true);
    }
    let mut manifest = manifest_for(cli.command)?.expect("non-build command");
    apply_globals(&mut manifest, &cli.global);
    manifest.validate()?;
    let opts = RunOptions {
        size_cap: cli.global.size_cap,
    };
    let (out, paths) = run_to_dir(&manifest, &opts)?;
    for r in &out.reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "{} {} computed={:.6e} bound={:.6e} {}",
            r.status,
            r.quantity,
            r.computed,
            r.bound,
            params.join(" ")
        );
    }
    for p in &paths {
        println!("wrote {}", p.display());
    }
    println!("manifest {} version {}", out.stamp.manifest_hash, out.stamp.version);
    Ok(out.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprint!("{}", e.record());
            ExitCode::from(2)
        }
    }
}
