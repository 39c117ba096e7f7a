//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code: 0 on success, 1 when a computation
//! fails, 2 for usage errors and unreadable or malformed inputs.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::distribution::SamplingDistribution;
use crate::error::Error;
use crate::image::{apply_crop, Image};
use crate::kernels::{transfer_potential_curve, KernelSpec};
use crate::manifest::RunManifest;
use crate::optimize::{optimize_max_avg, optimize_max_min, Objective, OptimizationConfig, DEFAULT_GRID, DEFAULT_LAMBDA};
use crate::range::MagRange;
use crate::rankme::{centroid_similarity, rankme_profile, EmbeddingSet, DEFAULT_EPSILON, DEFAULT_GROUP_TOLERANCE};
use crate::sampler::{
    generate_plan, read_plan_file, write_plan_csv, SamplerConfig, DEFAULT_OUTPUT_SIZE_PX, DEFAULT_SOURCE_SIZE_PX,
};
use crate::signal::{accumulated_signal, SignalSummary, SUMMARY_CSV_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "magsample", version, about = "Magnification sampling toolkit")]
pub struct Cli {
    /// Output path (each subcommand has its own default).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of evaluation / discretization points.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid: usize,

    /// Magnification range `a:b` in mpp [default: 0.25:2]
    #[arg(long, global = true)]
    range: Option<MagRange>,

    /// Similarity kernel: abs, info or custom:<path>.
    #[arg(long, global = true, default_value = "info")]
    kernel: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transfer potential curve of the kernel.
    Kernel,
    /// Accumulated signal profile of one distribution, plus a summary row.
    Signal {
        /// Sampling distribution file (`.msdist`).
        #[arg(long)]
        dist: PathBuf,
    },
    /// Summary rows for several distributions, in the order given.
    Compare {
        /// Two or more `.msdist` files; each row is labeled by file stem.
        #[arg(required = true)]
        dists: Vec<PathBuf>,
    },
    /// Optimized sampling distribution.
    Optimize {
        /// `maxavg` (entropy-regularized) or `maxmin` (worst-case signal).
        #[arg(long)]
        objective: Objective,
        /// Entropy weight (maxavg only).
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
    },
    /// Seeded crop plan for continuous-magnification training.
    Plan(PlanArgs),
    /// Per-magnification RankMe profile of an embedding set.
    Rankme {
        #[command(flatten)]
        input: EmbeddingArgs,
        /// Added to each normalized singular value before the entropy.
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Cosine similarities between per-magnification embedding centroids.
    Similarity {
        #[command(flatten)]
        input: EmbeddingArgs,
    },
    /// Applies one plan entry to a raw source patch.
    CropApply {
        /// Raw `MSIM` source patch.
        #[arg(long)]
        image: PathBuf,
        /// Crop plan CSV written by `plan`.
        #[arg(long)]
        plan: PathBuf,
        /// Plan entry to apply.
        #[arg(long)]
        index: u64,
    },
}

#[derive(Debug, Args)]
struct PlanArgs {
    /// Target-magnification distribution (`.msdist`).
    #[arg(long)]
    dist: PathBuf,
    /// Number of plan entries.
    #[arg(long)]
    n: usize,
    /// RNG seed; equal seeds give byte-identical plans.
    #[arg(long)]
    seed: u64,
    /// Output patch side in pixels.
    #[arg(long, default_value_t = DEFAULT_OUTPUT_SIZE_PX)]
    patch_size: u32,
    /// Side of the stored source patches in pixels.
    #[arg(long, default_value_t = DEFAULT_SOURCE_SIZE_PX)]
    source_size: u32,
    /// Comma-separated mpps at which source patches exist.
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1.0,2.0")]
    standards: Vec<f64>,
}

#[derive(Debug, Args)]
struct EmbeddingArgs {
    /// CSV (`id,mpp,d0,...`) or binary `MSEB` embeddings.
    #[arg(long)]
    embeddings: PathBuf,
    /// Rows whose mpps differ by at most this share a group.
    #[arg(long, default_value_t = DEFAULT_GROUP_TOLERANCE)]
    group_tolerance: f64,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    error: Error,
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn usage(error: Error) -> Failure {
    Failure { code: EXIT_USAGE, error }
}

fn compute(error: Error) -> Failure {
    Failure { code: EXIT_COMPUTE, error }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Kernel => cmd_kernel(cli),
        Command::Signal { dist } => cmd_signal(cli, dist),
        Command::Compare { dists } => cmd_compare(cli, dists),
        Command::Optimize { objective, lambda } => cmd_optimize(cli, *objective, *lambda),
        Command::Plan(args) => cmd_plan(cli, args),
        Command::Rankme { input, epsilon } => cmd_rankme(cli, input, *epsilon),
        Command::Similarity { input } => cmd_similarity(cli, input),
        Command::CropApply { image, plan, index } => cmd_crop_apply(cli, image, plan, *index),
    }
}

impl Cli {
    fn out_or(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }

    fn resolved_range(&self) -> MagRange {
        self.range.unwrap_or_default()
    }

    fn load_kernel(&self, manifest: &mut RunManifest) -> Outcome<KernelSpec> {
        let kernel = KernelSpec::from_selector(&self.kernel).map_err(usage)?;
        if let Some(path) = self.kernel.strip_prefix("custom:") {
            manifest.input("kernel", Path::new(path)).map_err(usage)?;
        }
        manifest.param("kernel", &self.kernel);
        Ok(kernel)
    }

    fn check_grid(&self, minimum: usize) -> Outcome {
        if self.grid < minimum {
            return Err(usage(Error::Parameter(format!(
                "--grid must be at least {minimum}, got {}",
                self.grid
            ))));
        }
        Ok(())
    }

    /// A distribution's own range must match `--range` when that flag is given.
    fn check_dist_range(&self, dist: &SamplingDistribution, path: &Path) -> Outcome {
        match self.range {
            Some(r) if r != *dist.range() => Err(usage(Error::Range(format!(
                "{} is defined on {}, but --range is {r}",
                path.display(),
                dist.range()
            )))),
            _ => Ok(()),
        }
    }
}

fn write_output(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Outcome {
    let io_err = |e| compute(Error::io(path, e));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn finish(manifest: &mut RunManifest, outputs: &[&Path]) -> Outcome {
    let listed: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
    manifest.set("outputs", listed.join(","));
    for out in outputs {
        manifest.write_for(out).map_err(compute)?;
    }
    Ok(())
}

fn load_distribution(path: &Path) -> Outcome<SamplingDistribution> {
    SamplingDistribution::read(path).map_err(usage)
}

fn strategy_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// `signal.csv` → `signal.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.csv")
}

fn cmd_kernel(cli: &Cli) -> Outcome {
    cli.check_grid(2)?;
    let range = cli.resolved_range();
    let mut manifest = RunManifest::new("kernel");
    let kernel = cli.load_kernel(&mut manifest)?;
    kernel.check_covers(&range).map_err(usage)?;
    manifest.param("grid", cli.grid).param("range", range);

    let curve = transfer_potential_curve(&kernel, &range, cli.grid).map_err(compute)?;
    let out = cli.out_or("transfer_potential.csv");
    write_output(&out, |w| curve.write_csv(w))?;
    finish(&mut manifest, &[&out])
}

fn cmd_signal(cli: &Cli, dist_path: &Path) -> Outcome {
    cli.check_grid(2)?;
    let mut manifest = RunManifest::new("signal");
    let kernel = cli.load_kernel(&mut manifest)?;
    let dist = load_distribution(dist_path)?;
    cli.check_dist_range(&dist, dist_path)?;
    kernel.check_covers(dist.range()).map_err(usage)?;
    manifest.input("dist", dist_path).map_err(usage)?;
    manifest.param("grid", cli.grid).param("range", dist.range());

    let profile = accumulated_signal(&dist, &kernel, cli.grid).map_err(compute)?;
    let out = cli.out_or("signal.csv");
    let summary_out = summary_path(&out);
    write_output(&out, |w| profile.write_csv(w))?;
    let row = profile.summary().csv_row(&strategy_label(dist_path));
    write_output(&summary_out, |w| writeln!(w, "{SUMMARY_CSV_HEADER}\n{row}"))?;
    finish(&mut manifest, &[&out, &summary_out])
}

fn cmd_compare(cli: &Cli, dist_paths: &[PathBuf]) -> Outcome {
    if dist_paths.len() < 2 {
        return Err(usage(Error::Parameter(format!(
            "compare needs at least 2 distribution files, got {}",
            dist_paths.len()
        ))));
    }
    cli.check_grid(2)?;
    let mut manifest = RunManifest::new("compare");
    let kernel = cli.load_kernel(&mut manifest)?;
    manifest.param("grid", cli.grid);
    let mut dists = Vec::with_capacity(dist_paths.len());
    for (i, path) in dist_paths.iter().enumerate() {
        let dist = load_distribution(path)?;
        cli.check_dist_range(&dist, path)?;
        kernel.check_covers(dist.range()).map_err(usage)?;
        manifest.input(&format!("dist.{i}"), path).map_err(usage)?;
        dists.push((strategy_label(path), dist));
    }

    let rows = dists
        .iter()
        .map(|(label, dist)| {
            let s: SignalSummary = accumulated_signal(dist, &kernel, cli.grid)?.summary();
            Ok(s.csv_row(label))
        })
        .collect::<crate::Result<Vec<_>>>()
        .map_err(compute)?;
    let out = cli.out_or("compare.csv");
    write_output(&out, |w| {
        writeln!(w, "{SUMMARY_CSV_HEADER}")?;
        rows.iter().try_for_each(|r| writeln!(w, "{r}"))
    })?;
    finish(&mut manifest, &[&out])
}

fn cmd_optimize(cli: &Cli, objective: Objective, lambda: f64) -> Outcome {
    let range = cli.resolved_range();
    let mut manifest = RunManifest::new("optimize");
    let kernel = cli.load_kernel(&mut manifest)?;
    let cfg = match objective {
        Objective::MaxAvgEntropy => OptimizationConfig::max_avg(kernel, lambda),
        Objective::MaxMin => OptimizationConfig::max_min(kernel),
    }
    .with_grid(cli.grid)
    .with_range(range);
    cfg.validate().map_err(usage)?;
    manifest
        .param("objective", objective)
        .param("grid", cli.grid)
        .param("range", range);

    let mut comments = vec![
        format!("objective {objective}"),
        format!("kernel {}", cli.kernel),
        format!("grid {}", cli.grid),
    ];
    let dist = match objective {
        Objective::MaxAvgEntropy => {
            manifest.param("lambda", lambda);
            comments.push(format!("lambda {lambda}"));
            optimize_max_avg(&cfg).map_err(compute)?
        }
        Objective::MaxMin => {
            let sol = optimize_max_min(&cfg).map_err(compute)?;
            comments.push(format!("achieved_t {}", sol.achieved_t));
            manifest.set("result.achieved_t", sol.achieved_t);
            sol.distribution
        }
    };
    let out = cli.out_or(&format!("{objective}.msdist"));
    let text = dist.to_text(&comments);
    write_output(&out, |w| w.write_all(text.as_bytes()))?;
    finish(&mut manifest, &[&out])
}

fn cmd_plan(cli: &Cli, args: &PlanArgs) -> Outcome {
    let mut manifest = RunManifest::new("plan");
    let dist = load_distribution(&args.dist)?;
    cli.check_dist_range(&dist, &args.dist)?;
    manifest.input("dist", &args.dist).map_err(usage)?;
    if args.n == 0 {
        return Err(usage(Error::Parameter("--n must be at least 1".into())));
    }
    let standards: Vec<String> = args.standards.iter().map(f64::to_string).collect();
    manifest
        .seed(args.seed)
        .param("n", args.n)
        .param("patch_size", args.patch_size)
        .param("source_size", args.source_size)
        .param("standards", standards.join(","));
    let cfg = SamplerConfig::new(dist, args.standards.clone(), args.source_size, args.patch_size, args.seed)
        .map_err(usage)?;

    let plan = generate_plan(&cfg, args.n).map_err(compute)?;
    let out = cli.out_or("plan.csv");
    write_output(&out, |w| write_plan_csv(&plan, w))?;
    finish(&mut manifest, &[&out])
}

fn load_embeddings(input: &EmbeddingArgs, manifest: &mut RunManifest) -> Outcome<EmbeddingSet> {
    let set = EmbeddingSet::read_path(&input.embeddings).map_err(usage)?;
    manifest.input("embeddings", &input.embeddings).map_err(usage)?;
    manifest.param("group_tolerance", input.group_tolerance);
    Ok(set)
}

fn cmd_rankme(cli: &Cli, input: &EmbeddingArgs, epsilon: f64) -> Outcome {
    let mut manifest = RunManifest::new("rankme");
    let set = load_embeddings(input, &mut manifest)?;
    manifest.param("epsilon", epsilon);
    let profile = rankme_profile(&set, epsilon, input.group_tolerance).map_err(|e| match e {
        Error::Parameter(_) => usage(e),
        other => compute(other),
    })?;
    let out = cli.out_or("rankme.csv");
    write_output(&out, |w| profile.write_csv(w))?;
    finish(&mut manifest, &[&out])
}

fn cmd_similarity(cli: &Cli, input: &EmbeddingArgs) -> Outcome {
    let mut manifest = RunManifest::new("similarity");
    let set = load_embeddings(input, &mut manifest)?;
    let m = centroid_similarity(&set, input.group_tolerance).map_err(|e| match e {
        Error::Parameter(_) => usage(e),
        other => compute(other),
    })?;
    let out = cli.out_or("similarity.csv");
    write_output(&out, |w| m.write_csv(w))?;
    finish(&mut manifest, &[&out])
}

fn cmd_crop_apply(cli: &Cli, image_path: &Path, plan_path: &Path, index: u64) -> Outcome {
    let mut manifest = RunManifest::new("crop-apply");
    let plan = read_plan_file(plan_path).map_err(usage)?;
    let entry = plan
        .iter()
        .find(|e| e.index == index)
        .ok_or_else(|| usage(Error::Parameter(format!("{} has no entry {index}", plan_path.display()))))?;
    let image = Image::read_raw_file(image_path).map_err(usage)?;
    manifest.input("image", image_path).map_err(usage)?;
    manifest.input("plan", plan_path).map_err(usage)?;
    manifest.param("index", index);

    let cropped = apply_crop(&image, entry).map_err(usage)?;
    let out = cli.out_or("crop.raw");
    write_output(&out, |w| cropped.write_raw(w))?;
    finish(&mut manifest, &[&out])
}
