use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dmgraph::builders::DEFAULT_SIMPLEX_BUDGET;
use dmgraph::io::{load_points, points_to_csv, write_output, Summary};
use dmgraph::oracle::{check_theorem, random_instance};
use dmgraph::recon::{baseline, dmpcd, dmpcd_diagram, BaselineParams, DmpcdParams, PipelineOutput};
use dmgraph::{datagen, reconstruct, BuildOptions, Error, Exec, GeneratorConfig, Metric, WeightedPointCloud};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "dmgraph", version, about = "Graph skeletons of point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// DTM weights, sparse weighted Rips, persistence, reconstruction.
    Dmpcd(DmpcdArgs),
    /// Density lower-star filtration on a fixed-radius Rips complex, then reconstruction.
    Baseline(BaselineArgs),
    /// Persistence diagram of the sparse DTM-Rips filtration, without reconstruction.
    Diagram(DiagramArgs),
    /// Writes a synthetic point cloud as CSV.
    Gen(GenArgs),
    /// Checks reconstruction against the brute-force oracle on random small filtrations.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Input {
    /// Point CSV, or a distance matrix with `--metric precomputed`; `-` reads stdin.
    input: PathBuf,
    /// l2, l1 or precomputed.
    #[arg(long, default_value = "l2")]
    metric: Metric,
    /// Abort once a builder would produce more simplices than this.
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_BUDGET)]
    budget: usize,
    /// Run every data-parallel loop on one thread.
    #[arg(long)]
    serial: bool,
}

impl Input {
    fn options(&self) -> BuildOptions {
        BuildOptions {
            simplex_budget: self.budget,
            exec: if self.serial { Exec::Serial } else { Exec::default() },
        }
    }

    fn load(&self) -> dmgraph::Result<WeightedPointCloud> {
        load_points(&self.input, self.metric)
    }
}

#[derive(Args)]
struct Outputs {
    /// Graph JSON destination (`-` for stdout).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Diagram CSV destination (`-` for stdout).
    #[arg(long)]
    diagram: Option<PathBuf>,
}

#[derive(Args)]
struct DmpcdArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Sparsification parameter in (0, 1).
    #[arg(long, default_value_t = 0.99)]
    eps: f64,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    input: Input,
    /// Rips radius: edges with d <= radius.
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Gaussian bandwidth; defaults to the mean kNN distance.
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Args)]
struct DiagramArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 15)]
    k: usize,
    #[arg(long, default_value_t = 0.99)]
    eps: f64,
    /// Diagram CSV destination.
    #[arg(long, short, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Shape {
    #[arg(long)]
    circle: bool,
    #[arg(long)]
    two_circles: bool,
    /// Time-delay embedding of a sampled sinusoid.
    #[arg(long)]
    sine: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    shape: Shape,
    /// Number of points; the series length for `--sine` (default 600).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    background: Option<f64>,
    #[arg(long)]
    nonuniformity: Option<f64>,
    #[arg(long, default_value_t = 200.0)]
    period: f64,
    /// Embedding dimension minus one.
    #[arg(long, default_value_t = 5)]
    m: usize,
    #[arg(long, default_value_t = 50)]
    tau: usize,
    #[arg(long, short, default_value = "-")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    random_instances: usize,
    #[arg(long, default_value_t = 10)]
    max_vertices: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Lib(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 2,
        Error::BudgetExceeded { .. } => 4,
        Error::Internal(_) | Error::State(_) => 5,
        _ => 3,
    }
}

/// Writes the artifacts and prints the summary, on stderr when stdout carries an artifact.
fn finish(cloud: &WeightedPointCloud, out: &PipelineOutput, paths: &Outputs, start: Instant) -> Result<(), Failure> {
    if let Some(p) = &paths.graph {
        write_output(p, &out.graph.to_json()?)?;
    }
    if let Some(p) = &paths.diagram {
        write_output(p, &out.diagram.to_csv())?;
    }
    let (b0, b1) = out.graph.betti();
    let summary = Summary {
        points: cloud.len(),
        simplices: out.filtration.len(),
        b0,
        b1,
        seconds: start.elapsed().as_secs_f64(),
    };
    let to_stdout = [&paths.graph, &paths.diagram]
        .iter()
        .any(|p| p.as_ref().is_some_and(|p| p.as_os_str() == "-"));
    if to_stdout {
        eprintln!("{summary}");
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let start = Instant::now();
    match cli.command {
        Command::Dmpcd(a) => {
            eprintln!("note: weighted Rips scale; zero weights put an edge of length d at d/2");
            let cloud = a.input.load()?;
            let params = DmpcdParams {
                k: a.k,
                epsilon: a.eps,
                delta: a.delta,
            };
            let out = dmpcd(&cloud, params, &a.input.options())?;
            finish(&cloud, &out, &a.out, start)
        }
        Command::Baseline(a) => {
            eprintln!("note: plain Rips scale; an edge enters when d <= radius");
            let cloud = a.input.load()?;
            let params = BaselineParams {
                radius: a.radius,
                k: a.k,
                bandwidth: a.bandwidth,
                delta: a.delta,
            };
            let out = baseline(&cloud, params, &a.input.options())?;
            finish(&cloud, &out, &a.out, start)
        }
        Command::Diagram(a) => {
            eprintln!("note: weighted Rips scale; zero weights put an edge of length d at d/2");
            let cloud = a.input.load()?;
            let (f, d) = dmpcd_diagram(&cloud, a.k, a.eps, &a.input.options())?;
            write_output(&a.out, &d.to_csv())?;
            let (b0, b1) = dmgraph::persistence::betti(&d);
            let summary = Summary {
                points: cloud.len(),
                simplices: f.len(),
                b0,
                b1,
                seconds: start.elapsed().as_secs_f64(),
            };
            if a.out.as_os_str() == "-" {
                eprintln!("{summary}");
            } else {
                println!("{summary}");
            }
            Ok(())
        }
        Command::Gen(a) => {
            let rows = if a.shape.sine {
                let series = datagen::sinusoid(a.n.unwrap_or(600), a.period);
                datagen::time_delay_embed(&series, a.m, a.tau)?
            } else {
                let base = if a.shape.circle {
                    GeneratorConfig::circle(a.seed)
                } else {
                    GeneratorConfig::two_circles(a.seed)
                };
                let cfg = GeneratorConfig {
                    n_points: a.n.unwrap_or(base.n_points),
                    noise_sigma: a.sigma.unwrap_or(base.noise_sigma),
                    background_fraction: a.background.unwrap_or(base.background_fraction),
                    nonuniformity: a.nonuniformity.unwrap_or(base.nonuniformity),
                    ..base
                };
                if a.shape.circle {
                    datagen::gen_circle(&cfg)?
                } else {
                    datagen::gen_two_circles(&cfg)?
                }
            };
            write_output(&a.out, &points_to_csv(&rows))?;
            Ok(())
        }
        Command::Verify(a) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            for i in 0..a.random_instances {
                let (f, delta) = random_instance(&mut rng, a.max_vertices);
                let d = dmgraph::reduce(&f);
                let g = reconstruct(&f, &d, delta)?;
                let report = check_theorem(&f, delta, &g)?;
                if !report.passed() {
                    return Err(Failure::Verify(format!(
                        "instance {i} failed at delta {delta}\n{report}\n{}",
                        f.dump()
                    )));
                }
            }
            println!(
                "verify: {}/{} instances passed in {:.3}s",
                a.random_instances,
                a.random_instances,
                start.elapsed().as_secs_f64()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
