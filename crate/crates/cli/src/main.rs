use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dimenfix::bench::{run_grid, BenchGrid};
use dimenfix::export::{load_projection, save_projection, Report};
use dimenfix::metrics::dataset_knn_accuracy;
use dimenfix::{
    render_panels, render_scatter, run_projection, stress_pipeline, ConstraintPolicy, Dataset,
    Displacement, InitMode, PlotSpec, ProjectionConfig, ScaleRange,
};

/// Force Scheme projections with a pinned or range-limited feature axis.
#[derive(Debug, Parser)]
#[command(name = "dimenfix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Project a CSV dataset and write the coordinates plus a run report.
    Project(ProjectArgs),
    /// Kruskal stress of an existing projection against its dataset.
    Stress(StressArgs),
    /// Run an experiment grid described by a TOML file.
    Bench(BenchArgs),
    /// Render a projection CSV as an SVG scatter plot.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Vanilla,
    Strict,
    Range,
    Gauss,
}

#[derive(Debug, clap::Args)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    dims: u8,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Feature placed on the last axis (every mode except vanilla).
    #[arg(long)]
    feature: Option<String>,
    /// Half-width a of the allowed drift (range and gauss modes).
    #[arg(long = "range", value_name = "A")]
    half_range: Option<f64>,
    /// Confidence level in (0, 1) setting the Gaussian width (gauss mode).
    #[arg(long)]
    ci: Option<f64>,
    /// Measure the Gaussian drift before the proposed move instead of after.
    #[arg(long)]
    pre_move: bool,
    #[arg(long, default_value = "random")]
    init: InitMode,
    #[arg(long, default_value_t = dimenfix::engine::DEFAULT_MAX_ITERATIONS)]
    iters: usize,
    #[arg(long, default_value_t = dimenfix::engine::DEFAULT_LEARNING_RATE)]
    lr: f64,
    /// Decay the learning rate linearly to zero.
    #[arg(long)]
    lr_decay: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    scale: ScaleRange,
    #[command(flatten)]
    label: LabelArgs,
    #[arg(long)]
    out: PathBuf,
    /// Report path; defaults to the output path with a `.report.txt` suffix.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct LabelArgs {
    /// Label column of the input. `class` is used when present unless overridden.
    #[arg(long)]
    label: Option<String>,
    /// Treat every column as a feature.
    #[arg(long, conflicts_with = "label")]
    no_label: bool,
}

#[derive(Debug, clap::Args)]
struct StressArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    projection: PathBuf,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    scale: ScaleRange,
    #[command(flatten)]
    label: LabelArgs,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, clap::Args)]
struct PlotArgs {
    #[arg(long)]
    projection: PathBuf,
    /// Column of the projection CSV used to colour points.
    #[arg(long, value_name = "COLUMN")]
    labels: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Draw a 3-D projection as three pairwise panels.
    #[arg(long)]
    panels: bool,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 480)]
    height: u32,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<dimenfix::Error> for Failure {
    fn from(e: dimenfix::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

const DEFAULT_LABEL: &str = "class";

fn load_dataset(path: &Path, label: &LabelArgs) -> Result<Dataset, Failure> {
    if label.no_label {
        return Ok(Dataset::load_csv(path, None)?);
    }
    match &label.label {
        Some(col) => Ok(Dataset::load_csv(path, Some(col))?),
        None => match Dataset::load_csv(path, Some(DEFAULT_LABEL)) {
            Err(dimenfix::Error::MissingLabelColumn(_)) => Ok(Dataset::load_csv(path, None)?),
            other => Ok(other?),
        },
    }
}

fn build_policy(args: &ProjectArgs) -> Result<ConstraintPolicy, Failure> {
    let need = |flag: &str, v: Option<f64>| {
        v.ok_or_else(|| {
            Failure::Usage(format!("--mode {:?} requires {flag}", args.mode).to_lowercase())
        })
    };
    let policy = match args.mode {
        Mode::Vanilla => ConstraintPolicy::Vanilla,
        Mode::Strict => ConstraintPolicy::Strict,
        Mode::Range => ConstraintPolicy::NormalRange {
            half_range: need("--range", args.half_range)?,
        },
        Mode::Gauss => ConstraintPolicy::GaussianRange {
            half_range: need("--range", args.half_range)?,
            ci: need("--ci", args.ci)?,
            displacement: if args.pre_move {
                Displacement::PreMove
            } else {
                Displacement::PostMove
            },
        },
    };
    let unused = |flag: &str| {
        Failure::Usage(format!("{flag} has no effect with --mode {:?}", args.mode).to_lowercase())
    };
    if args.half_range.is_some() && matches!(args.mode, Mode::Vanilla | Mode::Strict) {
        return Err(unused("--range"));
    }
    if (args.ci.is_some() || args.pre_move) && !matches!(args.mode, Mode::Gauss) {
        return Err(unused(if args.pre_move { "--pre-move" } else { "--ci" }));
    }
    match (policy.fixes_axis(), &args.feature) {
        (true, None) => {
            return Err(Failure::Usage(format!(
                "--mode {} requires --feature",
                policy.mode_name()
            )))
        }
        (false, Some(_)) => {
            return Err(Failure::Usage(
                "--feature is not used by --mode vanilla".into(),
            ))
        }
        _ => {}
    }
    policy
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(policy)
}

fn default_report_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".report.txt");
    out.with_file_name(name)
}

fn cmd_project(args: ProjectArgs) -> CmdResult {
    let policy = build_policy(&args)?;
    let config = ProjectionConfig {
        learning_rate: args.lr,
        max_iterations: args.iters,
        target_dims: args.dims as usize,
        seed: args.seed,
        policy,
        fixed_feature: args.feature.clone(),
        init: args.init,
        scale: args.scale,
        lr_decay: args.lr_decay,
        ..Default::default()
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let data = load_dataset(&args.input, &args.label)?;
    let run = run_projection(&data, &config)?;
    let stress = stress_pipeline(&data, &run.embedding, config.scale)?;
    save_projection(&args.out, &run.embedding, data.labels())?;

    let mut report = Report::new();
    report
        .push("stress", stress.stress)
        .push("n_points", stress.n_points)
        .push("wall_time_total", run.wall_time_total)
        .push("wall_time_init", run.wall_time_init)
        .push("iterations_run", run.iterations_run);
    if data.labels().is_some() {
        report.push(
            "knn1_accuracy",
            dataset_knn_accuracy(&data, &run.embedding, 1)?,
        );
    }
    report
        .push("input", args.input.display())
        .push(
            "label",
            data.labels()
                .map(|_| args.label.label.as_deref().unwrap_or(DEFAULT_LABEL))
                .unwrap_or(""),
        )
        .push("dims", config.target_dims)
        .push("mode", config.policy.mode_name())
        .push("policy", config.policy)
        .push("feature", config.fixed_feature.as_deref().unwrap_or(""))
        .push("init", config.init)
        .push("iters", config.max_iterations)
        .push("lr", config.learning_rate)
        .push("lr_decay", config.lr_decay)
        .push("seed", config.seed)
        .push("scale", config.scale)
        .push("epsilon", config.epsilon)
        .push("out", args.out.display());
    let report_path = args
        .report
        .unwrap_or_else(|| default_report_path(&args.out));
    fs::write(&report_path, report.to_string())
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", report_path.display())))?;
    print!("{report}");
    Ok(())
}

fn cmd_stress(args: StressArgs) -> CmdResult {
    let data = load_dataset(&args.input, &args.label)?;
    let projection = load_projection(&args.projection, None)?;
    let report = stress_pipeline(&data, &projection.embedding, args.scale)?;
    println!("stress={}", report.stress);
    println!("n={}", report.n_points);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let grid = BenchGrid::load(&args.grid)?;
    let report = run_grid(&grid)?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let create = |name: &str| {
        let path = args.out_dir.join(name);
        fs::File::create(&path)
            .map(std::io::BufWriter::new)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
    };
    report.write_rows_csv(create("runs.csv")?)?;
    report.write_summary_csv(create("summary.csv")?)?;
    let table = report.to_table();
    let table_path = args.out_dir.join("summary.txt");
    fs::write(&table_path, &table)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", table_path.display())))?;
    print!("{table}");
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> CmdResult {
    let projection = load_projection(&args.projection, args.labels.as_deref())?;
    let spec = PlotSpec {
        width: f64::from(args.width),
        height: f64::from(args.height),
        ..Default::default()
    };
    let labels = projection.labels.as_deref();
    let svg = match (projection.embedding.dims(), args.panels) {
        (3, true) => render_panels(&projection.embedding, labels, &spec)?,
        (2, false) => render_scatter(&projection.embedding, labels, &spec)?,
        (3, false) => {
            return Err(Failure::Runtime(
                "projection is 3-D; pass --panels to draw pairwise panels".into(),
            ))
        }
        (d, _) => {
            return Err(Failure::Runtime(format!(
                "--panels needs a 3-D projection, got {d} dimensions"
            )))
        }
    };
    fs::write(&args.out, svg)
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Project(a) => cmd_project(a),
        Command::Stress(a) => cmd_stress(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
