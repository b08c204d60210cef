//! End-to-end ranking pipeline behind the `tradeprop` command.
//!
//! Every emitted report starts with the full effective configuration so that
//! the numbers can be regenerated from the report alone.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tradeprop_core::io::{
    parse_seed_list, read_features_path, write_features, NodeIds, ReadOptions,
};
use tradeprop_core::{
    accuracy_at_k, build_knn_graph, gen_synthetic, make_operator, rank_order, run_leave_one_out,
    solve, EvalReport, GraphConfig, InitialRanking, OperatorKind, SeedSet, SimilarityGraph,
    SolverConfig,
};

/// Transaction IDs of the known pump-and-dump seeds in the reference experiment.
pub const DEFAULT_SEEDS: [i64; 3] = [5, 53, 369];
pub const DEFAULT_TOP_K: [usize; 4] = [10, 20, 30, 190];

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Core(#[from] tradeprop_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl PipelineError {
    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Core(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub header: bool,
    pub id_column: bool,
    /// Origin of row-number IDs when there is no ID column.
    pub id_base: i64,
    /// External seed IDs.
    pub seeds: Vec<i64>,
    pub graph: GraphConfig,
    pub solver: SolverConfig,
    pub methods: Vec<OperatorKind>,
    pub top_k: Vec<usize>,
    pub format: OutputFormat,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            header: false,
            id_column: false,
            id_base: 1,
            seeds: DEFAULT_SEEDS.to_vec(),
            graph: GraphConfig::default(),
            solver: SolverConfig::default(),
            methods: OperatorKind::ALL.to_vec(),
            top_k: DEFAULT_TOP_K.to_vec(),
            format: OutputFormat::Table,
        }
    }

    fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parses `--seeds`: an inline ID list, or otherwise a path to a file of IDs.
pub fn resolve_seeds(arg: &str) -> Result<Vec<i64>> {
    match parse_seed_list(arg) {
        Ok(ids) => Ok(ids),
        Err(_) => {
            let path = Path::new(arg);
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(parse_seed_list(&text)?)
        }
    }
}

/// Loaded input: graph, ID mapping and internal seed indices.
pub struct Prepared {
    pub graph: SimilarityGraph,
    pub ids: NodeIds,
    pub seeds: SeedSet,
}

pub fn prepare(cfg: &PipelineConfig) -> Result<Prepared> {
    if !matches!(cfg.id_base, 0 | 1) {
        return Err(tradeprop_core::Error::Validation(format!(
            "id base must be 0 or 1, got {}",
            cfg.id_base
        ))
        .into());
    }
    cfg.solver.validate()?;
    let table = read_features_path(
        &cfg.input,
        ReadOptions {
            header: cfg.header,
            id_column: cfg.id_column,
        },
    )?;
    let n = table.features.rows();
    let ids = match table.ids {
        Some(ids) => NodeIds::Explicit(ids),
        None => NodeIds::Offset {
            base: cfg.id_base,
            n,
        },
    };
    let indices = cfg
        .seeds
        .iter()
        .map(|&id| ids.index_of(id))
        .collect::<tradeprop_core::Result<Vec<_>>>()?;
    let seeds = SeedSet::new(indices, n)?;
    let graph = build_knn_graph(&table.features, &cfg.graph)?;
    Ok(Prepared { graph, ids, seeds })
}

/// Ranks all non-seed transactions with each configured method.
pub fn run_rank(cfg: &PipelineConfig) -> Result<String> {
    let p = prepare(cfg)?;
    let n = p.graph.n();
    let y = InitialRanking::from_seeds(&p.seeds, n);

    let mut out = String::new();
    writeln!(out, "# tradeprop rank").unwrap();
    writeln!(out, "# config: {}", cfg.echo()).unwrap();
    writeln!(out, "method\trank\tid\tscore").unwrap();
    for &method in &cfg.methods {
        let op = make_operator(&p.graph, method)?;
        let f = solve(&op, &y, &cfg.solver)?;
        for (pos, i) in rank_order(&f.scores, p.seeds.indices())
            .into_iter()
            .enumerate()
        {
            writeln!(
                out,
                "{}\t{}\t{}\t{:e}",
                method.short_name(),
                pos + 1,
                p.ids.external(i),
                f.scores[i]
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Leave-one-out reports for each configured method.
pub fn evaluate(cfg: &PipelineConfig) -> Result<(Prepared, Vec<EvalReport>)> {
    let p = prepare(cfg)?;
    let reports = cfg
        .methods
        .iter()
        .map(|&method| {
            let runs = run_leave_one_out(&p.graph, &p.seeds, method, &cfg.solver)?;
            Ok(accuracy_at_k(method, runs, &cfg.top_k)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((p, reports))
}

#[derive(Serialize)]
struct AccuracyRecord {
    method: OperatorKind,
    k: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct RunRecord {
    method: OperatorKind,
    left_out: i64,
    rank_position: usize,
    pool_size: usize,
}

#[derive(Serialize)]
struct EvalDocument<'a> {
    config: &'a PipelineConfig,
    records: Vec<AccuracyRecord>,
    runs: Vec<RunRecord>,
}

/// Renders reports as the accuracy grid (percent, two decimals) or as JSON.
pub fn render_eval(cfg: &PipelineConfig, ids: &NodeIds, reports: &[EvalReport]) -> String {
    match cfg.format {
        OutputFormat::Json => {
            let doc = EvalDocument {
                config: cfg,
                records: reports
                    .iter()
                    .flat_map(|r| {
                        r.accuracy_at_k
                            .iter()
                            .map(|(&k, &accuracy)| AccuracyRecord {
                                method: r.method,
                                k,
                                accuracy,
                            })
                    })
                    .collect(),
                runs: reports
                    .iter()
                    .flat_map(|r| {
                        r.runs.iter().map(|run| RunRecord {
                            method: r.method,
                            left_out: ids.external(run.left_out),
                            rank_position: run.rank_position,
                            pool_size: run.pool_size,
                        })
                    })
                    .collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Table => {
            let mut out = String::new();
            writeln!(out, "# tradeprop eval").unwrap();
            writeln!(out, "# config: {}", cfg.echo()).unwrap();
            let ks: Vec<usize> = reports
                .first()
                .map(|r| r.accuracy_at_k.keys().copied().collect())
                .unwrap_or_default();
            write!(out, "{:<22}", "Accuracy (%) @ top k").unwrap();
            for k in &ks {
                write!(out, "{:>9}", format!("k={k}")).unwrap();
            }
            out.push('\n');
            for r in reports {
                write!(out, "{:<22}", r.method.to_string()).unwrap();
                for v in r.accuracy_at_k.values() {
                    write!(out, "{v:>9.2}").unwrap();
                }
                out.push('\n');
            }
            out.push('\n');
            writeln!(out, "method\tleft_out\trank_position\tpool_size").unwrap();
            for r in reports {
                for run in &r.runs {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}",
                        r.method.short_name(),
                        ids.external(run.left_out),
                        run.rank_position,
                        run.pool_size
                    )
                    .unwrap();
                }
            }
            out
        }
    }
}

pub fn run_eval(cfg: &PipelineConfig) -> Result<String> {
    let (p, reports) = evaluate(cfg)?;
    Ok(render_eval(cfg, &p.ids, &reports))
}

#[derive(Debug, Clone, Serialize)]
pub struct GenConfig {
    pub per_cluster: usize,
    pub clusters: usize,
    pub separation: f64,
    pub rng_seed: u64,
}

/// Writes generated features to `features` and one cluster label per line to `labels`.
pub fn run_gen(cfg: &GenConfig, features: &Path, labels: &Path) -> Result<()> {
    let data = gen_synthetic(cfg.per_cluster, cfg.clusters, cfg.separation, cfg.rng_seed)?;
    let mut buf = Vec::new();
    write_features(&data.features, &mut buf).expect("in-memory write");
    fs::write(features, buf).map_err(io_err(features))?;
    let text: String = data.labels.iter().map(|l| format!("{l}\n")).collect();
    fs::write(labels, text).map_err(io_err(labels))?;
    Ok(())
}

pub fn write_output(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(io_err(path)),
        None => {
            use io::Write;
            io::stdout()
                .write_all(text.as_bytes())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}
