use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use chrono::Utc;
use clap::{Parser, Subcommand};
use convo_core::ckt::{load_ckt_specs, CktLibrary};
use convo_core::config::EngineConfig;
use convo_core::dialog::{save_index, Engine};
use convo_core::entity::{load_corpus_dir, SearchIndex};
use convo_core::text::Lexicons;

#[derive(Debug, Parser)]
#[command(name = "engine", version, about = "Conversational dialog engine")]
pub struct Cli {
    /// TOML configuration file. CONVO_DATA_DIR and CONVO_PORT override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve,
    /// Chat with the engine on stdin/stdout.
    Chat {
        #[arg(long, default_value = "local")]
        device: String,
        /// IANA time zone for greetings, e.g. Europe/Rome.
        #[arg(long)]
        timezone: Option<String>,
    },
    /// Entity index maintenance.
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// News corpus maintenance.
    News {
        #[command(subcommand)]
        command: NewsCommand,
    },
    /// Conversational template maintenance.
    Ckt {
        #[command(subcommand)]
        command: CktCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexCommand {
    /// Build the entity index from a directory of corpus files.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to the index file in the data directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum NewsCommand {
    /// Add the articles of a JSON-lines file to the news store.
    Ingest { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum CktCommand {
    /// Parse and check every template in a directory.
    Validate { dir: PathBuf },
}

pub fn load_config(path: Option<&Path>) -> anyhow::Result<EngineConfig> {
    let mut cfg = match path {
        Some(p) => EngineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => EngineConfig::default(),
    };
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let stdout = std::io::stdout();
    match cli.command {
        Command::Serve => serve(cfg),
        Command::Chat { device, timezone } => {
            let engine = Engine::from_config(cfg)?;
            chat(&engine, &device, timezone.as_deref(), std::io::stdin().lock(), stdout.lock())
        }
        Command::Index { command: IndexCommand::Build { corpus, out } } => {
            let out = out.unwrap_or_else(|| cfg.paths.index_file());
            let (entities, keys) = build_index(&cfg, &corpus, &out)?;
            writeln!(stdout.lock(), "indexed {entities} entities under {keys} keys into {}", out.display())?;
            Ok(())
        }
        Command::News { command: NewsCommand::Ingest { file } } => {
            let engine = Engine::from_config(cfg)?;
            let r = engine.ingest_news(&file, Utc::now())?;
            writeln!(
                stdout.lock(),
                "ingested {}, duplicates {}, non-english {}, malformed {}",
                r.ingested, r.duplicates, r.non_english, r.malformed
            )?;
            Ok(())
        }
        Command::Ckt { command: CktCommand::Validate { dir } } => {
            let lib = CktLibrary::new(load_ckt_specs(&dir)?)?;
            let mut out = stdout.lock();
            for spec in lib.specs() {
                writeln!(out, "ok {} ({} dialogs)", spec.topic, spec.dialogs.len())?;
            }
            Ok(())
        }
    }
}

pub fn build_index(cfg: &EngineConfig, corpus: &Path, out: &Path) -> anyhow::Result<(usize, usize)> {
    let lexicons = Lexicons::load(&cfg.paths.lexicons)?;
    let records = load_corpus_dir(corpus, &lexicons)?;
    let index = SearchIndex::build_with(records, &lexicons, cfg.exec)?;
    save_index(&index, out)?;
    Ok((index.len(), index.key_count()))
}

fn serve(cfg: EngineConfig) -> anyhow::Result<()> {
    let addr = format!("{}:{}", cfg.server.host, cfg.server.port);
    let engine = Arc::new(Engine::from_config(cfg)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await.with_context(|| format!("binding {addr}"))?;
        // the bound address matters when the port was 0
        println!("listening on http://{}", listener.local_addr()?);
        std::io::stdout().flush()?;
        crate::http::serve(engine, listener, crate::http::shutdown_signal()).await
    })
}

/// Line-in, line-out chat on one fresh session. `/debug` toggles debug
/// output and `/quit` (or end of input) says goodbye.
pub fn chat(engine: &Engine, device: &str, timezone: Option<&str>, input: impl BufRead, mut out: impl Write) -> anyhow::Result<()> {
    let id = engine.create_session(device, timezone, Utc::now())?;
    let mut debug = false;
    let mut lines = input.lines();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let line = match lines.next() {
            Some(l) => l?,
            None => "/quit".to_string(),
        };
        let text = match line.trim() {
            "" => continue,
            "/debug" => {
                debug = !debug;
                writeln!(out, "debug {}", if debug { "on" } else { "off" })?;
                continue;
            }
            "/quit" => "stop",
            t => t,
        };
        let env = engine.handle_turn(&id, text, Utc::now(), debug)?;
        writeln!(out, "{}", env.text)?;
        if let Some(d) = &env.debug {
            writeln!(out, "{}", serde_json::to_string_pretty(d)?)?;
        }
        if env.ended {
            return Ok(());
        }
    }
}
