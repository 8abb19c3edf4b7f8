mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use mpgrad::io::{parse_filtration, parse_measure, parse_points, write_filtration, write_measure, write_points};
use mpgrad::optimizer::{optimize_filtration, optimize_pointcloud, Epoch};
use mpgrad::transport::{Endpoint, Source};
use mpgrad::{
    hilbert_measure, ot_distance, rank_measure, Filtration, GroundMetric, GroundSpace,
    LandscapeEvaluator, SignedMeasure,
};
use serde_json::json;

use config::{LossConfig, Problem, RunConfig};

#[derive(Parser)]
#[command(name = "mpgrad", version, about = "Differentiable multiparameter persistence descriptors")]
struct Cli {
    /// Worker threads for descriptor computations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a descriptor of a filtration.
    Compute(ComputeArgs),
    /// Optimal transport distance between two measure files.
    Distance(DistanceArgs),
    /// Evaluate a landscape at query points.
    Landscape(LandscapeArgs),
    /// Run subgradient descent from a JSON config.
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct FiltrationArgs {
    /// Simplices, one per line, comma-separated vertex ids.
    #[arg(long)]
    complex: PathBuf,
    /// Filtration values, one row per line of the complex file.
    #[arg(long)]
    filtration: PathBuf,
    /// Number of filtration parameters.
    #[arg(long)]
    n: usize,
    /// Homology degree.
    #[arg(long, default_value_t = 0)]
    degree: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DescriptorKind {
    Hilbert,
    Rank,
    Landscape,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: FiltrationArgs,
    #[arg(long, value_enum, default_value = "hilbert")]
    descriptor: DescriptorKind,
    /// Landscape level.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Query points for the landscape.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeArgs {
    #[command(flatten)]
    input: FiltrationArgs,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ground {
    Rn,
    Bars,
}

#[derive(Args)]
struct DistanceArgs {
    a: PathBuf,
    b: PathBuf,
    /// Expected ground space of both files.
    #[arg(long, value_enum)]
    ground: Option<Ground>,
    /// Write the optimal assignment as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Loss as JSON (inline or a file path), replacing the config's loss.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory directory.
    #[arg(long, default_value = "trajectory")]
    out: PathBuf,
}

/// Usage and configuration problems exit with 1, bad data with 2.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(e: anyhow::Error) -> Failure {
    Failure::Usage(e)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(usage),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_filtration(args: &FiltrationArgs) -> Result<Filtration, Failure> {
    let complex = read(&args.complex)?;
    let values = read(&args.filtration)?;
    parse_filtration(&complex, &values, args.n)
        .with_context(|| format!("in {} / {}", args.complex.display(), args.filtration.display()))
        .map_err(Failure::Data)
}

fn summarize(m: &SignedMeasure) -> String {
    let pos: i64 = m.masses().iter().filter(|x| x.1 > 0).map(|x| x.1).sum();
    let neg: i64 = m.masses().iter().filter(|x| x.1 < 0).map(|x| -x.1).sum();
    format!(
        "{} locations, positive mass {pos}, negative mass {neg}, total mass {}",
        m.len(),
        m.total_mass()
    )
}

fn landscape_csv(f: &Filtration, degree: usize, k: usize, points: &Path) -> Result<String, Failure> {
    let z = parse_points(&read(points)?).with_context(|| format!("in {}", points.display()))?;
    if z.dim() != f.parameters() {
        return Err(Failure::Data(anyhow!(
            "query points have {} coordinates, the filtration has {}",
            z.dim(),
            f.parameters()
        )));
    }
    let ev = LandscapeEvaluator::new(f, degree, k).map_err(|e| Failure::Data(e.into()))?;
    let mut out: String = (1..=f.parameters()).map(|i| format!("z_{i},")).collect();
    out.push_str("value\n");
    for p in z.points() {
        let v = ev.evaluate(p).map_err(|e| Failure::Data(e.into()))?;
        let cells: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{},{v}", cells.join(","));
    }
    Ok(out)
}

fn compute(args: ComputeArgs) -> Result<(), Failure> {
    let f = load_filtration(&args.input)?;
    let degree = args.input.degree;
    let measure = match args.descriptor {
        DescriptorKind::Hilbert => hilbert_measure(&f, degree),
        DescriptorKind::Rank => rank_measure(&f, degree).map_err(|e| Failure::Data(e.into()))?,
        DescriptorKind::Landscape => {
            let points = args
                .points
                .as_deref()
                .ok_or_else(|| usage(anyhow!("--descriptor landscape needs --points")))?;
            let csv = landscape_csv(&f, degree, args.k, points)?;
            return emit(args.out.as_deref(), &csv);
        }
    };
    emit(args.out.as_deref(), &write_measure(&measure))?;
    let summary = summarize(&measure);
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn landscape(args: LandscapeArgs) -> Result<(), Failure> {
    let f = load_filtration(&args.input)?;
    let csv = landscape_csv(&f, args.input.degree, args.k, &args.points)?;
    emit(args.out.as_deref(), &csv)
}

fn endpoint(e: &Endpoint) -> String {
    match e {
        Endpoint::Mass { source, index, .. } => {
            let s = match source {
                Source::Mu => "a",
                Source::Nu => "b",
            };
            format!("{s},{index}")
        }
        Endpoint::Diagonal => "diagonal,".into(),
    }
}

fn distance(args: DistanceArgs) -> Result<(), Failure> {
    let load = |p: &Path| -> Result<SignedMeasure, Failure> {
        parse_measure(&read(p)?)
            .with_context(|| format!("in {}", p.display()))
            .map_err(Failure::Data)
    };
    let (a, b) = (load(&args.a)?, load(&args.b)?);
    if let Some(g) = args.ground {
        let want = |m: &SignedMeasure| match (g, m.ground()) {
            (Ground::Rn, GroundSpace::Rn(_)) | (Ground::Bars, GroundSpace::Bars(_)) => true,
            _ => false,
        };
        if !want(&a) || !want(&b) {
            return Err(Failure::Data(anyhow!(
                "measure ground spaces {:?} and {:?} do not match --ground",
                a.ground(),
                b.ground()
            )));
        }
    }
    let metric = GroundMetric::for_space(a.ground());
    let assignment = ot_distance(&a, &b, metric).map_err(|e| Failure::Data(e.into()))?;
    if assignment.is_finite() {
        println!("{}", assignment.cost);
    } else {
        warn!("no finite transport plan: the measures have different total mass or unmatched infinite bars");
        println!("inf");
    }
    if let Some(out) = &args.out {
        let mut csv = String::from("left_measure,left_index,right_measure,right_index,cost\n");
        for (l, r, c) in &assignment.pairs {
            let _ = writeln!(csv, "{},{},{c}", endpoint(l), endpoint(r));
        }
        emit(Some(out), &csv)?;
    }
    Ok(())
}

fn write_epoch<T>(
    dir: &Path,
    epoch: &Epoch<T>,
    csv: String,
    extra: serde_json::Value,
    log: &mut String,
) -> Result<(), Failure> {
    let name = format!("epoch_{:04}.csv", epoch.epoch);
    emit(Some(&dir.join(&name)), &csv)?;
    let mut line = json!({
        "epoch": epoch.epoch,
        "objective": epoch.objective,
        "loss": epoch.loss,
        "iterate": name,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (line.as_object_mut(), extra) {
        obj.extend(more);
    }
    let _ = writeln!(log, "{line}");
    Ok(())
}

fn optimize(args: OptimizeArgs) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(&args.config).map_err(usage)?;
    if let Some(loss) = &args.loss {
        let text = if loss.trim_start().starts_with('{') {
            loss.clone()
        } else {
            read(Path::new(loss))?
        };
        cfg.loss = serde_json::from_str::<LossConfig>(&text)
            .context("invalid --loss")
            .map_err(usage)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let optimizer = cfg.optimizer().map_err(usage)?;
    let problem = cfg.problem().map_err(usage)?;
    let spec = cfg.loss.spec(cfg.parameters().map_err(usage)?).map_err(usage)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))
        .map_err(usage)?;

    let mut log = String::new();
    let summary = match problem {
        Problem::Points { x0, pipeline } => {
            let t = optimize_pointcloud(&x0, &pipeline, &spec, &optimizer)
                .map_err(|e| Failure::Data(e.into()))?;
            for e in &t.epochs {
                let extra = json!({
                    "diameter": e.iterate.diameter(),
                    "max_norm": e.iterate.max_norm(),
                });
                write_epoch(&args.out, e, write_points(&e.iterate), extra, &mut log)?;
            }
            let ratio = t.last().iterate.diameter() / x0.diameter();
            let max_norm = t.epochs.iter().map(|e| e.iterate.max_norm()).fold(0.0, f64::max);
            info!("diameter ratio {ratio}");
            json!({
                "epochs": optimizer.epochs,
                "seed": optimizer.seed,
                "initial_loss": t.initial().loss,
                "final_loss": t.last().loss,
                "diameter_ratio": ratio,
                "max_norm": max_norm,
            })
        }
        Problem::Filtration { complex, filtration, n } => {
            let f0 = load_filtration(&FiltrationArgs {
                complex,
                filtration,
                n,
                degree: 0,
            })?;
            let t = optimize_filtration(&f0, &spec, &optimizer).map_err(|e| Failure::Data(e.into()))?;
            // epoch files list values in this simplex order
            emit(Some(&args.out.join("complex.txt")), &write_filtration(&f0).0)?;
            for e in &t.epochs {
                let (_, values) = write_filtration(&e.iterate);
                write_epoch(&args.out, e, values, json!({}), &mut log)?;
            }
            json!({
                "epochs": optimizer.epochs,
                "seed": optimizer.seed,
                "initial_loss": t.initial().loss,
                "final_loss": t.last().loss,
            })
        }
    };
    emit(Some(&args.out.join("trajectory.jsonl")), &log)?;
    emit(Some(&args.out.join("summary.json")), &format!("{summary:#}\n"))?;
    println!("{summary}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("cannot configure the thread pool")
            .map_err(usage)?;
    }
    match cli.command {
        Command::Compute(a) => compute(a),
        Command::Distance(a) => distance(a),
        Command::Landscape(a) => landscape(a),
        Command::Optimize(a) => optimize(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
