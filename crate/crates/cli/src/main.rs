use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tradeprop_cli::{
    evaluate, prepare, render_eval, resolve_seeds, run_gen, run_rank, write_output, GenConfig,
    OutputFormat, PipelineConfig, PipelineError,
};
use tradeprop_core::{Distance, GraphConfig, OperatorKind, SolveMode, SolverConfig};

#[derive(Parser)]
#[command(
    name = "tradeprop",
    version,
    about = "Seed-based ranking of transactions on k-NN graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank non-seed transactions by propagated score.
    Rank(PipelineArgs),
    /// Leave-one-out seed recovery, reported as accuracy at top k.
    Eval(PipelineArgs),
    /// Generate planted-cluster synthetic transactions.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Unnorm,
    Rw,
    Sym,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Sqeuclidean,
    Euclidean,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Iterative,
    Direct,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Args)]
struct PipelineArgs {
    /// Feature file (comma or tab separated).
    #[arg(long)]
    input: PathBuf,
    /// Seed IDs as a comma list, or a file containing them.
    #[arg(long, default_value = "5,53,369")]
    seeds: String,
    #[arg(long, default_value_t = 5)]
    knn: usize,
    #[arg(long, default_value_t = 1.0)]
    bandwidth: f64,
    #[arg(long, value_enum, default_value_t = DistanceArg::Sqeuclidean)]
    distance: DistanceArg,
    /// Z-score feature columns before building the graph.
    #[arg(long)]
    standardize: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Direct)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    max_iters: usize,
    /// Comma-separated k values for accuracy at top k.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,190")]
    topk: Vec<usize>,
    /// Origin of row-number IDs.
    #[arg(long = "id-base", default_value_t = 1)]
    id_base: i64,
    /// First line of the input is a header.
    #[arg(long)]
    header: bool,
    /// First column of the input holds integer transaction IDs.
    #[arg(long = "id-column")]
    id_column: bool,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Also write the k-NN graph as an edge list (0-based node indices).
    #[arg(long = "dump-graph")]
    dump_graph: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "per-cluster", default_value_t = 10)]
    per_cluster: usize,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 100.0)]
    separation: f64,
    #[arg(long = "rng-seed", default_value_t = 0)]
    rng_seed: u64,
    /// Feature file to write.
    #[arg(long)]
    output: PathBuf,
    /// Label file to write; defaults to `<output>.labels`.
    #[arg(long)]
    labels: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig, PipelineError> {
        let methods = match self.method {
            MethodArg::Unnorm => vec![OperatorKind::Unnormalized],
            MethodArg::Rw => vec![OperatorKind::RandomWalk],
            MethodArg::Sym => vec![OperatorKind::SymmetricNormalized],
            MethodArg::All => OperatorKind::ALL.to_vec(),
        };
        Ok(PipelineConfig {
            input: self.input.clone(),
            header: self.header,
            id_column: self.id_column,
            id_base: self.id_base,
            seeds: resolve_seeds(&self.seeds)?,
            graph: GraphConfig {
                k: self.knn,
                bandwidth: self.bandwidth,
                distance: match self.distance {
                    DistanceArg::Sqeuclidean => Distance::SquaredEuclidean,
                    DistanceArg::Euclidean => Distance::Euclidean,
                },
                standardize: self.standardize,
            },
            solver: SolverConfig {
                alpha: self.alpha,
                gamma: self.gamma,
                tolerance: self.tol,
                max_iterations: self.max_iters,
                mode: match self.mode {
                    ModeArg::Iterative => SolveMode::Iterative,
                    ModeArg::Direct => SolveMode::Direct,
                },
            },
            methods,
            top_k: self.topk.clone(),
            format: match self.format {
                FormatArg::Table => OutputFormat::Table,
                FormatArg::Json => OutputFormat::Json,
            },
        })
    }

    fn dump(&self, cfg: &PipelineConfig) -> Result<(), PipelineError> {
        if let Some(path) = &self.dump_graph {
            let p = prepare(cfg)?;
            let mut buf = Vec::new();
            p.graph.write_edge_list(&mut buf).expect("in-memory write");
            write_output(&String::from_utf8_lossy(&buf), Some(path))?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Rank(args) => {
            let cfg = args.config()?;
            args.dump(&cfg)?;
            write_output(&run_rank(&cfg)?, args.output.as_deref())
        }
        Command::Eval(args) => {
            let cfg = args.config()?;
            args.dump(&cfg)?;
            let (p, reports) = evaluate(&cfg)?;
            write_output(&render_eval(&cfg, &p.ids, &reports), args.output.as_deref())
        }
        Command::Gen(args) => {
            let labels = args.labels.clone().unwrap_or_else(|| {
                let mut s = args.output.clone().into_os_string();
                s.push(".labels");
                PathBuf::from(s)
            });
            run_gen(
                &GenConfig {
                    per_cluster: args.per_cluster,
                    clusters: args.clusters,
                    separation: args.separation,
                    rng_seed: args.rng_seed,
                },
                &args.output,
                &labels,
            )
        }
    }
}

fn main() -> ExitCode {
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
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
