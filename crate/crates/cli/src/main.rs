use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pcg_cli::bench;
use pcg_core::geom::export_obj;
use pcg_core::{count_tokens, evaluate, parse_pcg, print_pcg, Bindings, Diagnostic, Graph, Registry, Scalar, ValueType};
use pcg_extract::{extract_path, parse_coord_rot, ExtractionConfig};
use pcg_llm::{
    bundled_corpus, compile_response, grammar_primer, load_corpus, LlmClient, LlmEndpointConfig, LlmMode, Retriever,
    BUNDLED_REPLAY_DIR,
};
use pcg_service::{LlmBackend, SessionManager, Store};
use pcg_transpile::{compactness_report, write_csv, Backend};

#[derive(Parser)]
#[command(name = "pcg", version, about = "Procedural compact graph toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a graph, printing diagnostics.
    Parse { file: PathBuf },
    /// Print the canonical form of a graph.
    Fmt {
        file: PathBuf,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
    /// Count language tokens in a file.
    Tokens { file: PathBuf },
    /// Evaluate a graph to a mesh.
    Eval {
        file: PathBuf,
        /// Parameter binding, `name=value`; repeatable.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        /// Write the mesh as OBJ.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Time this many random single-parameter edits.
        #[arg(long, value_name = "N")]
        bench: Option<usize>,
    },
    /// Turn part-hierarchy JSON files into graphs.
    Extract {
        /// A hierarchy file or a directory of them.
        input: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Axis permutation applied on ingest, e.g. `x-zy`.
        #[arg(long, default_value = "none")]
        coord_rot: String,
    },
    /// Emit a graph for another backend.
    Transpile {
        file: PathBuf,
        #[arg(long, default_value = "blender_python")]
        backend: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Token compactness of every `*.pcg` in a directory, as CSV.
    Report {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a graph from an instruction.
    Generate {
        instruction: String,
        #[arg(long, default_value_t = pcg_llm::DEFAULT_K)]
        k: usize,
        #[command(flatten)]
        llm: LlmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Edit a graph file with an instruction.
    Edit {
        file: PathBuf,
        instruction: String,
        #[command(flatten)]
        llm: LlmArgs,
        /// Rewrite the file in place.
        #[arg(long)]
        write: bool,
    },
    /// Compile rate of recorded responses (`*.txt`) in a directory.
    BenchCompile { dir: PathBuf },
    /// Run the editing service.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "pcg-sessions")]
        data_dir: PathBuf,
        #[command(flatten)]
        llm: LlmArgs,
        /// Environment variable holding a bearer token clients must send.
        #[arg(long, value_name = "VAR")]
        auth_env: Option<String>,
    },
}

#[derive(Args)]
struct LlmArgs {
    /// Base URL of an OpenAI-compatible endpoint.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API token.
    #[arg(long, default_value = "PCG_LLM_TOKEN")]
    token_env: String,
    /// Use recorded responses only.
    #[arg(long, conflicts_with = "record")]
    replay: bool,
    /// Use recorded responses and record new ones.
    #[arg(long)]
    record: bool,
    #[arg(long, default_value = BUNDLED_REPLAY_DIR)]
    replay_dir: PathBuf,
    /// Instruction corpus (JSON Lines) for example retrieval.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
}

impl LlmArgs {
    fn client(&self) -> Result<LlmClient> {
        let mut config = LlmEndpointConfig {
            token_env: self.token_env.clone(),
            timeout: Duration::try_from_secs_f64(self.timeout).context("bad --timeout")?,
            ..LlmEndpointConfig::default()
        };
        if let Some(e) = &self.endpoint {
            config.base_url = e.clone();
        }
        if let Some(m) = &self.model {
            config.model = m.clone();
        }
        let mode = if self.replay {
            LlmMode::Replay
        } else if self.record {
            LlmMode::Record
        } else {
            LlmMode::Live
        };
        Ok(LlmClient::new(config, mode, &self.replay_dir)?)
    }

    fn retriever(&self) -> Result<Retriever> {
        let pairs = match &self.corpus {
            Some(p) => load_corpus(&read(p)?)?,
            None => bundled_corpus(),
        };
        Ok(Retriever::new(pairs)?)
    }

    fn backend(&self) -> Result<LlmBackend> {
        Ok(LlmBackend::new(self.client()?, self.retriever()?))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn report_diagnostics(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = read(path)?;
    parse_pcg(&text).map_err(|diags| {
        report_diagnostics(path, &diags);
        anyhow::anyhow!("{} has {} diagnostic(s)", path.display(), diags.len())
    })
}

fn parse_binding(graph: &Graph, spec: &str) -> Result<(String, Scalar)> {
    let (name, value) = spec.split_once('=').context("bindings look like name=value")?;
    let name = name.trim();
    let param = graph
        .params
        .iter()
        .find(|p| p.name == name)
        .with_context(|| format!("no parameter named `{name}`"))?;
    let value = value.trim();
    let scalar = match param.ty {
        ValueType::Bool => Scalar::Bool(value.parse().context("expected true or false")?),
        ValueType::Int => Scalar::Int(value.parse().context("expected an integer")?),
        _ => Scalar::Float(value.parse().context("expected a number")?),
    };
    Ok((name.to_string(), scalar))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Parse { file } => {
            let g = load_graph(&file)?;
            println!("ok: {} parameter(s), {} node(s)", g.params.len(), g.nodes.len());
        }
        Command::Fmt { file, write } => {
            let text = print_pcg(&load_graph(&file)?);
            if write {
                fs::write(&file, text)?;
            } else {
                print!("{text}");
            }
        }
        Command::Tokens { file } => println!("{}", count_tokens(&read(&file)?)),
        Command::Eval { file, set, out, bench: runs } => {
            let g = load_graph(&file)?;
            let bindings = set
                .iter()
                .map(|s| parse_binding(&g, s))
                .collect::<Result<Bindings>>()?;
            let mesh = evaluate(&g, &bindings)?;
            println!("{} vertices, {} triangles", mesh.vertices.len(), mesh.triangles.len());
            if let Some(path) = out {
                fs::write(&path, export_obj(&mesh))?;
            }
            if let Some(n) = runs {
                let edit = bench::edit_latency(&g, n, 0)?;
                let fresh = bench::fresh_latency(&g, n.clamp(1, 100))?;
                println!(
                    "reevaluate over {} edits: median {:.3} ms, p99 {:.3} ms, max {:.3} ms",
                    edit.samples, edit.median_ms, edit.p99_ms, edit.max_ms
                );
                println!("fresh evaluate: median {:.3} ms, p99 {:.3} ms", fresh.median_ms, fresh.p99_ms);
            }
        }
        Command::Extract { input, out_dir, coord_rot } => {
            let config = ExtractionConfig {
                coord_rotation: parse_coord_rot(&coord_rot).map_err(anyhow::Error::msg)?,
                ..ExtractionConfig::default()
            };
            let mut failed = 0;
            for r in extract_path(&input, &out_dir, &config)? {
                match r {
                    Ok(p) => println!("{}", p.display()),
                    Err(e) => {
                        failed += 1;
                        eprintln!("{e}");
                    }
                }
            }
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Transpile { file, backend, out } => {
            let b = Backend::from_name(&backend).with_context(|| {
                let names: Vec<&str> = Backend::ALL.iter().map(|b| b.name()).collect();
                format!("unknown backend `{backend}`; expected one of {}", names.join(", "))
            })?;
            write_or_print(out.as_deref(), &b.emit(&load_graph(&file)?)?)?;
        }
        Command::Report { dir, out } => {
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "pcg"))
                .collect();
            files.sort();
            let mut reports = Vec::new();
            for f in &files {
                let name = f.file_stem().unwrap_or_default().to_string_lossy();
                reports.push(compactness_report(&name, &load_graph(f)?)?);
            }
            let mut buf = Vec::new();
            write_csv(&mut buf, &reports)?;
            write_or_print(out.as_deref(), &String::from_utf8(buf)?)?;
        }
        Command::Generate { instruction, k, llm, out } => {
            let client = llm.client()?;
            let primer = grammar_primer(Registry::standard());
            match pcg_llm::generate(&client, &llm.retriever()?, &primer, &instruction, k) {
                Ok(g) => {
                    log::info!("model answered in {:.2?}", g.latency);
                    write_or_print(out.as_deref(), &print_pcg(&g.graph))?;
                }
                Err(pcg_llm::GenerateError::Response { error, raw }) => {
                    eprintln!("{error}");
                    if let pcg_llm::ResponseError::Invalid(d) = &error {
                        report_diagnostics(Path::new("<response>"), d);
                    }
                    eprintln!("--- model response ---\n{raw}");
                    return Ok(ExitCode::FAILURE);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Edit { file, instruction, llm, write } => {
            let g = load_graph(&file)?;
            match pcg_llm::edit(&llm.client()?, &g, &instruction) {
                Ok(edited) => {
                    let text = print_pcg(&edited.graph);
                    if write {
                        fs::write(&file, text)?;
                    } else {
                        print!("{text}");
                    }
                }
                Err(pcg_llm::GenerateError::Response { error, raw }) => {
                    eprintln!("{error}\n--- model response ---\n{raw}");
                    return Ok(ExitCode::FAILURE);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::BenchCompile { dir } => {
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "txt"))
                .collect();
            files.sort();
            if files.is_empty() {
                bail!("no *.txt responses in {}", dir.display());
            }
            let mut ok = 0;
            for f in &files {
                match compile_response(&read(f)?) {
                    Ok(_) => {
                        ok += 1;
                        println!("{}\tok", f.display());
                    }
                    Err(e) => println!("{}\tfail\t{e}", f.display()),
                }
            }
            println!("compile rate: {ok}/{} = {:.4}", files.len(), ok as f64 / files.len() as f64);
        }
        Command::Serve { port, host, data_dir, llm, auth_env } => {
            let token = match auth_env {
                Some(var) => Some(std::env::var(&var).with_context(|| format!("{var} is not set"))?),
                None => None,
            };
            let backend = match llm.backend() {
                Ok(b) => Some(b),
                Err(e) => {
                    log::warn!("instruction endpoints disabled: {e}");
                    None
                }
            };
            let manager = SessionManager::load(Store::open(&data_dir)?, backend)?;
            log::info!("loaded {} session(s) from {}", manager.len(), data_dir.display());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port)).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                pcg_service::serve(listener, pcg_service::router(Arc::new(manager), token)).await
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
