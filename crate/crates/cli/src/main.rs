mod config;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use clevr_graph::diagnostics::Diagnostic;
use clevr_graph::embed::{
    default_onehot_provider, embed, export_bundle, import_bundle, BundleFormat, EmbeddingProvider,
    TableProvider,
};
use clevr_graph::graph::StructuralGraph;
use clevr_graph::grounding::ground;
use clevr_graph::lexicon::Lexicon;
use clevr_graph::pipeline::{run_pipeline, PipelineOptions};
use clevr_graph::projection::{
    default_perplexity, kmeans, pca2, pool, scatter_svg, tsne2, write_csv, PoolMode, PooledVector, TsneConfig,
};
use clevr_graph::scene::{load_scenes, parse_scene};
use clevr_graph::text::{load_questions, TextParser};
use clevr_graph::viz::{render_svg, to_dot, DotStyle};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "clevr-graph",
    version,
    about = "Structural graphs for CLEVR questions and scenes"
)]
struct Cli {
    /// TOML file with default flag values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<String>,
    /// Lexicon TOML file replacing the built-in CLEVR vocabulary.
    #[arg(long, global = true, value_name = "PATH")]
    lexicon: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a question (or a batch file) into text graphs.
    ParseText {
        #[arg(
            long,
            required_unless_present = "questions_file",
            conflicts_with = "questions_file"
        )]
        question: Option<String>,
        /// CLEVR questions JSON or one question per line.
        #[arg(long)]
        questions_file: Option<String>,
        /// Output file, `-` for stdout, or a directory for batch input.
        #[arg(long)]
        out: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Convert one scene of a CLEVR scenes file into a scene graph.
    ParseScene {
        #[arg(long)]
        scenes: String,
        /// Position of the scene in the `scenes` list.
        #[arg(long)]
        index: usize,
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        out: String,
    },
    /// Join a text graph and a scene graph into a joint graph.
    Ground {
        #[arg(long)]
        text_graph: String,
        #[arg(long)]
        scene_graph: String,
        #[arg(long)]
        out: String,
    },
    /// Embed a graph into an (X, A, E) bundle.
    Embed {
        #[arg(long)]
        graph: String,
        /// `onehot` or `table:<vectors-path>`.
        #[arg(long, default_value = "onehot")]
        provider: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        out: String,
    },
    /// Render a graph as DOT or SVG.
    Viz {
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum, default_value_t = StyleArg::Legend)]
        style: StyleArg,
        #[arg(long, value_enum, default_value_t = VizFormat::Dot)]
        format: VizFormat,
        #[arg(long)]
        out: String,
    },
    /// Project a directory of bundles to 2-D.
    Project {
        #[arg(long)]
        bundles: String,
        #[arg(long, value_enum, default_value_t = PoolArg::Mean)]
        pool: PoolArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Tsne)]
        method: MethodArg,
        /// Defaults to min(30, (n-1)/3).
        #[arg(long)]
        perplexity: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run k-means with this many clusters on the pooled vectors.
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        out: String,
        /// Also write an SVG scatter plot here.
        #[arg(long)]
        svg: Option<String>,
    },
    /// parse-text, parse-scene, ground and embed over a question/scene corpus.
    Pipeline {
        #[arg(long)]
        questions: String,
        #[arg(long)]
        scenes: String,
        #[arg(long, default_value = "onehot")]
        provider: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        prune: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory.
        #[arg(long)]
        out: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Bin,
}

impl From<FormatArg> for BundleFormat {
    fn from(f: FormatArg) -> BundleFormat {
        match f {
            FormatArg::Json => BundleFormat::Json,
            FormatArg::Bin => BundleFormat::FlatBinary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Legend,
    Plain,
}

#[derive(Clone, Copy, ValueEnum)]
enum VizFormat {
    Dot,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Mean,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Pca,
    Tsne,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn invalid(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.to_string(),
    }
}

fn internal(message: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_INTERNAL,
        message: message.to_string(),
    }
}

fn read(path: &str) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| invalid(format!("{path}: {e}")))
}

fn write(target: &str, bytes: &[u8]) -> Result<(), Failure> {
    output::write_target(target, bytes).map_err(|e| internal(format!("{target}: {e}")))
}

fn report(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{}", d.to_json_line());
    }
}

fn read_graph(path: &str, lexicon: &Lexicon) -> Result<StructuralGraph, Failure> {
    StructuralGraph::from_json_bytes(&read(path)?, lexicon).map_err(|e| invalid(format!("{path}: {e}")))
}

fn provider_for(spec: &str, lexicon: &Lexicon) -> Result<Box<dyn EmbeddingProvider>, Failure> {
    if spec == "onehot" {
        return Ok(Box::new(default_onehot_provider(lexicon)));
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let text = String::from_utf8(read(path)?).map_err(|e| invalid(format!("{path}: {e}")))?;
        let table = TableProvider::parse(&text).map_err(|e| invalid(format!("{path}: {e}")))?;
        return Ok(Box::new(table));
    }
    Err(Failure {
        code: EXIT_USAGE,
        message: format!("unknown provider `{spec}`; expected `onehot` or `table:<path>`"),
    })
}

fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(internal)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let owned;
    let lexicon = match &cli.lexicon {
        Some(path) => {
            owned = Lexicon::load(path).map_err(|e| invalid(format!("{path}: {e}")))?;
            &owned
        }
        None => Lexicon::clevr(),
    };

    match cli.command {
        Cmd::ParseText {
            question,
            questions_file,
            out,
            jobs,
        } => {
            let parser = TextParser::new(lexicon);
            if let Some(text) = question {
                let parse = parser.parse(&text).map_err(invalid)?;
                write(&out, &parse.graph.to_json_bytes())?;
                report(&parse.diagnostics);
                return Ok(());
            }
            let path = questions_file.expect("clap requires one input");
            let records = load_questions(&read(&path)?).map_err(|e| invalid(format!("{path}: {e}")))?;
            let parses = worker_pool(jobs)?.install(|| {
                records
                    .par_iter()
                    .map(|r| parser.parse(&r.text).map(|p| (r.index, p)))
                    .collect::<Result<Vec<_>, _>>()
            });
            let parses = parses.map_err(invalid)?;
            let files: Vec<(String, Vec<u8>)> = parses
                .iter()
                .map(|(index, p)| (format!("q{index:06}.json"), p.graph.to_json_bytes()))
                .collect();
            output::write_directory(&out, &files).map_err(|e| internal(format!("{out}: {e}")))?;
            for (_, p) in &parses {
                report(&p.diagnostics);
            }
        }
        Cmd::ParseScene {
            scenes,
            index,
            prune,
            out,
        } => {
            let docs =
                load_scenes(&read(&scenes)?, lexicon).map_err(|e| invalid(format!("{scenes}: {e}")))?;
            let doc = docs.get(index).ok_or_else(|| {
                invalid(format!(
                    "{scenes}: index {index} out of range ({} scenes)",
                    docs.len()
                ))
            })?;
            let parse = parse_scene(doc, prune);
            write(&out, &parse.graph.to_json_bytes())?;
            report(&parse.diagnostics);
        }
        Cmd::Ground {
            text_graph,
            scene_graph,
            out,
        } => {
            let gs = read_graph(&text_graph, lexicon)?;
            let gt = read_graph(&scene_graph, lexicon)?;
            let joint = ground(&gs, &gt).map_err(invalid)?;
            write(&out, &joint.graph.to_json_bytes())?;
            report(&joint.diagnostics);
        }
        Cmd::Embed {
            graph,
            provider,
            format,
            directed,
            out,
        } => {
            let provider = provider_for(&provider, lexicon)?;
            let g = read_graph(&graph, lexicon)?;
            let bundle = embed(&g, provider.as_ref(), directed).map_err(invalid)?;
            write(&out, &export_bundle(&bundle, format.into()))?;
        }
        Cmd::Viz {
            graph,
            style,
            format,
            out,
        } => {
            let g = read_graph(&graph, lexicon)?;
            let style = match style {
                StyleArg::Legend => DotStyle::Legend,
                StyleArg::Plain => DotStyle::Plain,
            };
            let dot = to_dot(&g, style);
            match format {
                VizFormat::Dot => write(&out, dot.as_bytes())?,
                VizFormat::Svg => {
                    let svg = render_svg(&dot)
                        .map_err(internal)?
                        .ok_or_else(|| internal("graphviz `dot` is not installed; use --format dot"))?;
                    write(&out, svg.as_bytes())?;
                }
            }
        }
        Cmd::Project {
            bundles,
            pool: pool_mode,
            method,
            perplexity,
            iters,
            seed,
            clusters,
            out,
            svg,
        } => {
            let vectors = load_pooled(&bundles, pool_mode)?;
            let mut result = match method {
                MethodArg::Pca => pca2(&vectors).map_err(invalid)?,
                MethodArg::Tsne => {
                    let config = TsneConfig {
                        perplexity: perplexity.unwrap_or_else(|| default_perplexity(vectors.len())),
                        iterations: iters,
                        seed,
                        ..TsneConfig::default()
                    };
                    tsne2(&vectors, &config).map_err(invalid)?.result
                }
            };
            if let Some(k) = clusters {
                let points: Vec<Vec<f64>> = vectors.iter().map(|v| v.v.clone()).collect();
                result.cluster = Some(kmeans(&points, k, seed).map_err(invalid)?.assignments);
            }
            let csv = write_csv(&result).map_err(internal)?;
            if let Some(path) = svg {
                write(&path, scatter_svg(&result).as_bytes())?;
            }
            write(&out, csv.as_bytes())?;
        }
        Cmd::Pipeline {
            questions,
            scenes,
            provider,
            format,
            directed,
            prune,
            jobs,
            out,
        } => {
            let provider = provider_for(&provider, lexicon)?;
            let records =
                load_questions(&read(&questions)?).map_err(|e| invalid(format!("{questions}: {e}")))?;
            let docs =
                load_scenes(&read(&scenes)?, lexicon).map_err(|e| invalid(format!("{scenes}: {e}")))?;
            let options = PipelineOptions {
                provider: provider.as_ref(),
                format: format.into(),
                directed,
                prune,
                jobs,
            };
            let result = run_pipeline(lexicon, &records, &docs, &options).map_err(invalid)?;
            let files: Vec<(String, Vec<u8>)> = result.files.into_iter().map(|f| (f.path, f.bytes)).collect();
            output::write_directory(&out, &files).map_err(|e| internal(format!("{out}: {e}")))?;
            report(&result.diagnostics);
        }
    }
    Ok(())
}

/// Reads every `.json` and `.bin` bundle in `dir`, sorted by file name.
fn load_pooled(dir: &str, mode: PoolArg) -> Result<Vec<PooledVector>, Failure> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| invalid(format!("{dir}: {e}")))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json") | Some("bin"))
        })
        .collect();
    paths.sort();
    let mode = match mode {
        PoolArg::Mean => PoolMode::Mean,
        PoolArg::Sum => PoolMode::Sum,
    };
    let mut vectors = Vec::with_capacity(paths.len());
    for path in paths {
        let shown = path.display().to_string();
        let bundle = import_bundle(&fs::read(&path).map_err(|e| invalid(format!("{shown}: {e}")))?)
            .map_err(|e| invalid(format!("{shown}: {e}")))?;
        let v = pool(&bundle, mode).map_err(|e| invalid(format!("{shown}: {e}")))?;
        let id = if bundle.source.is_empty() {
            file_stem(&path)
        } else {
            bundle.source.clone()
        };
        vectors.push(PooledVector {
            id,
            group: bundle.group.clone(),
            v,
        });
    }
    Ok(vectors)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn fail(failure: Failure) -> ExitCode {
    let line = serde_json::json!({
        "kind": "error",
        "exit_code": failure.code,
        "message": failure.message,
    });
    eprintln!("{line}");
    ExitCode::from(failure.code)
}

fn main() -> ExitCode {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&args) {
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => return fail(invalid(config::ConfigError::Io(format!("{path}: {e}")))),
        };
        args = match config::merge(args, &text, &Cli::command()) {
            Ok(a) => a,
            Err(e @ config::ConfigError::Unsupported { .. }) => {
                return fail(Failure {
                    code: EXIT_USAGE,
                    message: e.to_string(),
                })
            }
            Err(e) => return fail(invalid(e)),
        };
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if e.kind() == clap::error::ErrorKind::InvalidSubcommand {
                eprintln!("\n{}", Cli::command().render_help());
            }
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}
