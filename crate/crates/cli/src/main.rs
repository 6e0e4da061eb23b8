//! `pmc-bioc`: convert JATS articles to BioC, maintain a local article
//! store and serve it over HTTP.

use std::fmt::Display;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use pmc_bioc::jats::{self, ConversionOptions, JatsSourceInfo};
use pmc_bioc::service::{self, single_document_collection, Service};
use pmc_bioc::store::{SourceSet, Store, StoreError};
use pmc_bioc::translit::{Encoding, TranslitTable};
use pmc_bioc::SerializationFormat;

const DEFAULT_STORE: &str = "bioc-store";
const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Parser)]
#[command(name = "pmc-bioc", version, about = "JATS to BioC conversion, storage and retrieval")]
struct Cli {
    /// Store directory (default: ./bioc-store).
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    /// key=value configuration file with `store`, `bind`, `encoding` and `translit`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert one JATS file to a single-document BioC collection.
    Convert {
        input: PathBuf,
        #[arg(long, default_value = "xml")]
        format: SerializationFormat,
        #[arg(long)]
        encoding: Option<Encoding>,
        /// Write here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Collection date as YYYYMMDD (default: today, UTC).
        #[arg(long)]
        date: Option<String>,
    },
    /// Ingest a .tar.gz archive of JATS files into the store.
    Ingest {
        archive: PathBuf,
        #[arg(long, default_value = "oa")]
        set: SourceSet,
        #[arg(long)]
        encoding: Option<Encoding>,
    },
    /// Print collection counts on one line.
    Stats,
    /// Load a PMID,PMCID CSV into the store's id index.
    ImportIds { csv: PathBuf },
    /// Print a stored document by PMID or PMCID.
    Show {
        id: String,
        #[arg(long, default_value = "xml")]
        format: SerializationFormat,
        #[arg(long)]
        encoding: Option<Encoding>,
    },
    /// Serve the store over HTTP until interrupted.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}

/// Settings after merging the config file and flags.
#[derive(Debug, Default)]
struct CliConfig {
    store_path: Option<PathBuf>,
    bind_address: Option<String>,
    default_encoding: Option<Encoding>,
    translit: Option<PathBuf>,
}

impl CliConfig {
    fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut config = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| format!("{}:{}: {msg}", path.display(), i + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let value = value.trim();
            match key.trim() {
                "store" => config.store_path = Some(value.into()),
                "bind" => config.bind_address = Some(value.into()),
                "encoding" => config.default_encoding = Some(value.parse().map_err(|e: String| err(&e))?),
                "translit" => config.translit = Some(value.into()),
                other => return Err(err(&format!("unknown key {other:?}"))),
            }
        }
        Ok(config)
    }

    fn store_path(&self) -> PathBuf {
        self.store_path.clone().unwrap_or_else(|| DEFAULT_STORE.into())
    }

    fn encoding(&self, flag: Option<Encoding>) -> Encoding {
        flag.or(self.default_encoding).unwrap_or_default()
    }

    fn table(&self) -> Result<TranslitTable, String> {
        match &self.translit {
            Some(path) => TranslitTable::load(path).map_err(|e| format!("{}: {e}", path.display())),
            None => Ok(TranslitTable::default()),
        }
    }

    fn open_store(&self) -> Result<Store, String> {
        let path = self.store_path();
        Store::open(&path).map_err(|e| format!("store {}: {e}", path.display()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("pmc-bioc: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let mut config = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if cli.store.is_some() {
        config.store_path = cli.store;
    }

    match cli.command {
        Command::Convert { input, format, encoding, out, date } => {
            let encoding = config.encoding(encoding);
            let table = config.table()?;
            let body = convert_file(&input, format, encoding, &table, date)?;
            match out {
                Some(path) => std::fs::write(&path, body).map_err(|e| at(&path, e))?,
                None => print!("{body}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ingest { archive, set, encoding } => {
            let store = config.open_store()?;
            let options = ConversionOptions::with_encoding(config.encoding(encoding));
            let report = match store.ingest_archive(&archive, set, &options) {
                Ok(report) => report,
                Err(e @ StoreError::ArchiveUnreadable { .. }) => return Err(e.to_string()),
                Err(e) => return Err(format!("ingest failed: {e}")),
            };
            println!("{report}");
            for (member, reason) in &report.errors {
                eprintln!("failed: {member}: {reason}");
            }
            Ok(if report.failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Stats => {
            println!("{}", config.open_store()?.stats());
            Ok(ExitCode::SUCCESS)
        }
        Command::ImportIds { csv } => {
            let n = config.open_store()?.import_id_map(&csv).map_err(|e| e.to_string())?;
            println!("imported {n} mappings");
            Ok(ExitCode::SUCCESS)
        }
        Command::Show { id, format, encoding } => {
            let store = config.open_store()?;
            let mut doc = store.get_by_id(&id).map_err(|e| e.to_string())?;
            if config.encoding(encoding) == Encoding::Ascii {
                doc = config.table()?.ascii_document(doc, pmc_bioc::model::DEFAULT_SEPARATOR);
            }
            print!("{}", format.serialize(&single_document_collection(doc, service::today())));
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { bind } => {
            let bind = bind
                .or(config.bind_address.clone())
                .unwrap_or_else(|| DEFAULT_BIND.into());
            let addr: SocketAddr = bind.parse().map_err(|e| format!("invalid bind address {bind:?}: {e}"))?;
            let service = Service::with_table(Arc::new(config.open_store()?), config.table()?);
            serve(addr, service)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn convert_file(
    input: &Path,
    format: SerializationFormat,
    encoding: Encoding,
    table: &TranslitTable,
    date: Option<String>,
) -> Result<String, String> {
    let text = std::fs::read_to_string(input).map_err(|e| at(input, e))?;
    let name = input.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let info = JatsSourceInfo::from_jats_or_name(&text, name).map_err(|e| at(input, e))?;
    let options = ConversionOptions::with_encoding(encoding);
    let doc = jats::convert_with_table(&text, &info, &options, table).map_err(|e| at(input, e))?;
    let collection = single_document_collection(doc, date.unwrap_or_else(service::today));
    Ok(format.serialize(&collection))
}

fn serve(addr: SocketAddr, service: Service) -> Result<(), String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| format!("cannot bind {addr}: {e}"))?;
        let local = listener.local_addr().map_err(|e| e.to_string())?;
        eprintln!("listening on http://{local}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        service::serve(listener, Arc::new(service), shutdown)
            .await
            .map_err(|e| e.to_string())
    })
}

fn at(path: &Path, e: impl Display) -> String {
    format!("{}: {e}", path.display())
}
