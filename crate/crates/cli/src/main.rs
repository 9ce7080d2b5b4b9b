//! `fracdim`: discrete s-energy, dimension estimates, bound checks and the
//! reproducible experiments, driven from the command line.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fracdim::bounds::{prescribed_epsilon, verify_concentration, verify_energy_lower_bound, EpsMode};
use fracdim::dimension::{estimate_dimension, EstimateOptions, EstimatorMethod};
use fracdim::energy::{count_close_pairs, s_energy_sweep_with, KernelChoice};
use fracdim::generators::{CantorParams, GeneratorSpec};
use fracdim::geometry::{read_csv, write_csv};
use fracdim::pca::{pca, pca_compare};
use fracdim::repro::{self, Experiment};
use fracdim::{PointFamily, PointSet, RegionSpec};
use serde::Serialize;
use serde_json::json;

use output::{emit_csv, emit_json, write_atomic, ManifestBuilder};

#[derive(Parser, Debug)]
#[command(
    name = "fracdim",
    version,
    about = "Discrete s-energies and dimension estimates of finite point sets"
)]
struct Cli {
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, global = true, env = "FRACDIM_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a point set and write it as CSV.
    Generate(GenerateArgs),
    /// Compute I_s for one or more exponents.
    Energy(EnergyArgs),
    /// Count ordered pairs at distance at most r (self-pairs included).
    PairCount(PairCountArgs),
    /// Estimate the discrete Hausdorff dimension of a family of CSV files.
    EstimateDim(EstimateArgs),
    /// Check a concentration or energy lower bound against a region.
    CheckBound(CheckBoundArgs),
    /// Principal component analysis of one set, or a comparison of two.
    Pca(PcaArgs),
    /// Regenerate the data behind one experiment.
    Repro(ReproArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GeneratorType {
    Cantor,
    CantorProduct,
    Lattice,
    AdversarialLattice,
    Weierstrass,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    /// JSON parameter file, e.g. {"type":"lattice","d":2,"q":10}; replaces the flags below.
    #[arg(long, conflicts_with = "kind")]
    spec: Option<PathBuf>,
    #[arg(long = "type", value_enum, required_unless_present = "spec")]
    kind: Option<GeneratorType>,
    /// Cantor: number of subintervals kept. Adversarial lattice: points added to the plane.
    #[arg(long)]
    m: Option<usize>,
    /// Cantor: number of subintervals per split.
    #[arg(long)]
    n: Option<usize>,
    /// Cantor: level. Adversarial lattice: plane dimension.
    #[arg(long)]
    k: Option<usize>,
    /// Cantor: kept subinterval indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    kept: Option<Vec<usize>>,
    /// Cantor product factors as m:n:k, comma separated.
    #[arg(long, value_delimiter = ',')]
    factors: Option<Vec<String>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Weierstrass: number of series terms.
    #[arg(long)]
    terms: Option<usize>,
    /// Weierstrass: keep raw function values instead of rescaling to [0, 1].
    #[arg(long)]
    no_rescale: bool,
    #[arg(long)]
    out: PathBuf,
    /// Also write a JSON report with the manifest and the point count.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KernelArg {
    Auto,
    Pairwise,
    Product,
}

impl From<KernelArg> for KernelChoice {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Auto => KernelChoice::Auto,
            KernelArg::Pairwise => KernelChoice::Pairwise,
            KernelArg::Product => KernelChoice::Product,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct EnergyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    s: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    kernel: KernelArg,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PairCountArgs {
    #[arg(long)]
    input: PathBuf,
    /// Radii, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<f64>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    IncrementGrowth,
    SlopeThreshold,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    /// Directory of CSV files, one member each; ordered by point count.
    #[arg(long)]
    family: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    s_min: f64,
    /// Defaults to the ambient dimension.
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Growth threshold (defaults: 0 for increment-growth, 0.1 for slope-threshold).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value = "increment-growth")]
    method: MethodArg,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Plot data: slopes and increment exponents against s.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BoundArg {
    Concentration,
    EnergyLower,
}

#[derive(Args, Debug, Serialize)]
struct CheckBoundArgs {
    #[arg(long)]
    input: PathBuf,
    /// Region file: {"kind":"affine_subspace","base":[..],"directions":[[..]],"extent":[[0,1]],"k":1,"c_e":2}.
    #[arg(long)]
    region: PathBuf,
    #[arg(long)]
    s: f64,
    /// Thickening: "exact", "auto" (the largest admissible value) or a number.
    #[arg(long, default_value = "exact")]
    eps: String,
    #[arg(long, value_enum, default_value = "concentration")]
    bound: BoundArg,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PcaArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ReproArgs {
    /// Experiment id, e.g. energy-cantor-s0.5 or dim-table.
    #[arg(long)]
    figure: String,
    #[arg(long)]
    max_level: Option<u32>,
    #[arg(long)]
    json: Option<PathBuf>,
    /// Plot data; defaults to standard output when neither --json nor --csv is given.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Failure classes, mapped to exit codes 1 and 2.
enum Failure {
    Invalid(anyhow::Error),
    Assertion(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

impl From<fracdim::Error> for Failure {
    fn from(e: fracdim::Error) -> Self {
        Failure::Invalid(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Energy(a) => energy(a),
        Command::PairCount(a) => pair_count(a),
        Command::EstimateDim(a) => estimate_dim(a),
        Command::CheckBound(a) => check_bound(a),
        Command::Pca(a) => run_pca(a),
        Command::Repro(a) => run_repro(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_points(manifest: &mut ManifestBuilder, path: &Path) -> Result<PointSet> {
    let bytes = manifest.read_input(path)?;
    Ok(read_csv(bytes.as_slice(), path)?)
}

fn spec_from_flags(a: &GenerateArgs) -> Result<GeneratorSpec> {
    fn need<T: Copy>(v: Option<T>, flag: &str, kind: &str) -> Result<T> {
        v.ok_or_else(|| anyhow!("--type {kind} requires --{flag}"))
    }
    let kind = a.kind.expect("clap enforces --type or --spec");
    Ok(match kind {
        GeneratorType::Cantor => GeneratorSpec::Cantor {
            m: need(a.m, "m", "cantor")?,
            n: need(a.n, "n", "cantor")?,
            k: u32::try_from(need(a.k, "k", "cantor")?)?,
            kept: a.kept.clone(),
        },
        GeneratorType::CantorProduct => {
            let factors = a
                .factors
                .as_ref()
                .ok_or_else(|| anyhow!("--type cantor-product requires --factors"))?;
            GeneratorSpec::CantorProduct {
                factors: factors.iter().map(|f| parse_factor(f)).collect::<Result<_>>()?,
            }
        }
        GeneratorType::Lattice => GeneratorSpec::Lattice {
            d: need(a.d, "d", "lattice")?,
            q: need(a.q, "q", "lattice")?,
        },
        GeneratorType::AdversarialLattice => GeneratorSpec::AdversarialLattice {
            d: need(a.d, "d", "adversarial-lattice")?,
            q: need(a.q, "q", "adversarial-lattice")?,
            k: need(a.k, "k", "adversarial-lattice")?,
            m: need(a.m, "m", "adversarial-lattice")?,
        },
        GeneratorType::Weierstrass => GeneratorSpec::Weierstrass {
            a: need(a.a, "a", "weierstrass")?,
            b: need(a.b, "b", "weierstrass")?,
            seed: need(a.seed, "seed", "weierstrass")?,
            d: need(a.d, "d", "weierstrass")?,
            q: need(a.q, "q", "weierstrass")?,
            terms: a.terms,
            rescale: !a.no_rescale,
        },
    })
}

fn parse_factor(text: &str) -> Result<CantorParams> {
    let parts: Vec<&str> = text.split(':').collect();
    let [m, n, k] = parts.as_slice() else {
        bail!("cantor factor {text:?} must look like m:n:k");
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .with_context(|| format!("bad number {s:?} in factor {text:?}"))
    };
    Ok(CantorParams::new(parse(m)?, parse(n)?, u32::try_from(parse(k)?)?))
}

fn generate(a: GenerateArgs) -> Outcome {
    let mut manifest = ManifestBuilder::new("generate", &a)?;
    let spec = match &a.spec {
        Some(path) => {
            let bytes = manifest.read_input(path)?;
            serde_json::from_slice::<GeneratorSpec>(&bytes)
                .with_context(|| format!("invalid generator spec {}", path.display()))?
        }
        None => spec_from_flags(&a)?,
    };
    let ps = spec.generate()?;
    write_atomic(&a.out, |w| write_csv(&ps, w))?;
    let report = manifest.seed(spec.seed()).finish(json!({
        "generator": spec,
        "n": ps.len(),
        "dim": ps.dim(),
        "content_hash": ps.content_hash(),
    }));
    if let Some(path) = &a.json {
        emit_json(&report, Some(path))?;
    }
    eprintln!(
        "wrote {} points in dimension {} to {}",
        ps.len(),
        ps.dim(),
        a.out.display()
    );
    Ok(())
}

fn energy(a: EnergyArgs) -> Outcome {
    let mut manifest = ManifestBuilder::new("energy", &a)?;
    let ps = load_points(&mut manifest, &a.input)?;
    let results = s_energy_sweep_with(&ps, &a.s, a.kernel.into())?;
    let report = manifest.finish(json!({ "n": ps.len(), "results": results }));
    emit_json(&report, a.json.as_deref())?;
    Ok(())
}

fn pair_count(a: PairCountArgs) -> Outcome {
    let mut manifest = ManifestBuilder::new("pair-count", &a)?;
    let ps = load_points(&mut manifest, &a.input)?;
    let results =
        a.r.iter()
            .map(|&r| Ok(json!({ "r": r, "count": count_close_pairs(&ps, r)? })))
            .collect::<fracdim::Result<Vec<_>>>()?;
    let report = manifest.finish(json!({ "n": ps.len(), "results": results }));
    emit_json(&report, a.json.as_deref())?;
    Ok(())
}

fn load_family(manifest: &mut ManifestBuilder, dir: &Path) -> Result<PointFamily> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("{} contains no .csv files", dir.display());
    }
    let mut members = files
        .iter()
        .map(|p| load_points(manifest, p))
        .collect::<Result<Vec<_>>>()?;
    members.sort_by_key(PointSet::len);
    let label = dir
        .file_name()
        .map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(PointFamily::new(label, members)?)
}

fn estimate_dim(a: EstimateArgs) -> Outcome {
    let mut manifest = ManifestBuilder::new("estimate-dim", &a)?;
    let family = load_family(&mut manifest, &a.family)?;
    let opts = EstimateOptions {
        s_min: a.s_min,
        s_max: a.s_max,
        step: a.step,
        threshold: a.tau,
        method: match a.method {
            MethodArg::IncrementGrowth => EstimatorMethod::IncrementGrowth,
            MethodArg::SlopeThreshold => EstimatorMethod::SlopeThreshold,
        },
    };
    let est = estimate_dimension(&family, &opts)?;
    if let Some(path) = &a.csv {
        let mut rows: Vec<(f64, f64, String)> = est.slopes.iter().map(|f| (f.s, f.slope, "slope".into())).collect();
        rows.extend(
            est.increment_slopes
                .iter()
                .filter_map(|f| f.exponent.map(|e| (f.s, e, "increment_exponent".into()))),
        );
        emit_csv(&rows, path)?;
    }
    eprintln!("{}: dimension {:.4} ({:?})", est.label, est.value, est.boundary);
    emit_json(&manifest.finish(est), a.json.as_deref())?;
    Ok(())
}

fn check_bound(a: CheckBoundArgs) -> Outcome {
    let mut manifest = ManifestBuilder::new("check-bound", &a)?;
    let ps = load_points(&mut manifest, &a.input)?;
    let bytes = manifest.read_input(&a.region)?;
    let region: RegionSpec =
        serde_json::from_slice(&bytes).with_context(|| format!("invalid region file {}", a.region.display()))?;
    let mode: EpsMode = a.eps.parse()?;
    let report = match a.bound {
        BoundArg::Concentration => verify_concentration(&ps, &region, a.s, mode)?,
        BoundArg::EnergyLower => {
            let eps = match mode {
                EpsMode::Exact => 0.0,
                EpsMode::Auto => prescribed_epsilon(a.s, region.k(), region.c_e(), ps.len())?,
                EpsMode::Value(e) => e,
            };
            verify_energy_lower_bound(&ps, &region, a.s, eps)?
        }
    };
    let satisfied = report.satisfied;
    let summary = format!("{:?}: lhs {:e}, rhs {:e}", report.bound, report.lhs, report.rhs);
    emit_json(&manifest.finish(report), a.json.as_deref())?;
    if !satisfied {
        return Err(Failure::Assertion(summary));
    }
    eprintln!("{summary} (holds)");
    Ok(())
}

fn run_pca(a: PcaArgs) -> Outcome {
    let mut manifest = ManifestBuilder::new("pca", &a)?;
    let ps = load_points(&mut manifest, &a.input)?;
    match &a.compare {
        Some(other) => {
            let qs = load_points(&mut manifest, other)?;
            emit_json(&manifest.finish(pca_compare(&ps, &qs)?), a.json.as_deref())?;
        }
        None => emit_json(&manifest.finish(pca(&ps)?), a.json.as_deref())?,
    }
    Ok(())
}

fn run_repro(a: ReproArgs) -> Outcome {
    let manifest = ManifestBuilder::new("repro", &a)?;
    let experiment: Experiment = a.figure.parse()?;
    let report = repro::run(experiment, a.max_level)?;
    let rows: Vec<(f64, f64, String)> = report.rows.iter().map(|r| (r.x, r.y, r.series.clone())).collect();
    if let Some(path) = &a.csv {
        emit_csv(&rows, path)?;
    }
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if a.json.is_none() && a.csv.is_none() {
        output::write_stdout(&output::csv_text(&rows))?;
    }
    if let Some(path) = &a.json {
        emit_json(&manifest.finish(&report), Some(path))?;
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if !failed.is_empty() {
        return Err(Failure::Assertion(failed.join("; ")));
    }
    Ok(())
}
