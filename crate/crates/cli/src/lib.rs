//! Headless driver for workbench projects: `init`, `import`, `run`, `export`
//! and `serve`.
//!
//! Exit codes: 0 success, 1 a command or cell failed, 2 the project could not
//! be loaded.

pub mod html;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mmw_core::model::{OriginDescriptor, OriginMethod, Project, SourceKind};
use mmw_core::notebook::CellOutput;
use mmw_core::{load_project, save_project, SystemClock, Workbench};
use serde_json::json;

pub const DEFAULT_PROJECT: &str = "project.mmw.json";

#[derive(Debug, Parser)]
#[command(name = "mmw", version, about = "Mixed-methods analysis workbench")]
pub struct Cli {
    /// Project file to operate on.
    #[arg(long, global = true, default_value = DEFAULT_PROJECT)]
    pub project: PathBuf,
    /// Print machine-readable status as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an empty project in a directory.
    Init {
        dir: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Add a text document or CSV table to the project.
    Import {
        #[arg(long, value_enum)]
        kind: Kind,
        /// interview, focus_group, survey, log or other.
        #[arg(long, default_value = "other")]
        origin: String,
        #[arg(long)]
        participant: Option<String>,
        /// Source name; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
        file: PathBuf,
    },
    /// Execute every cell, sync the canvas and save.
    Run,
    /// Write a static report or the canonical project file.
    Export {
        #[arg(long, value_enum, default_value = "html")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API on the loopback interface.
    Serve {
        #[arg(long, default_value_t = mmw_service::DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Text,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Html,
    Json,
}

/// Outcome of a command: exit code plus what to print.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<String>,
    pub json: serde_json::Value,
}

impl Outcome {
    fn ok(line: String, json: serde_json::Value) -> Self {
        Self { code: 0, lines: vec![line], json }
    }

    fn fail(code: i32, message: String) -> Self {
        Self { code, json: json!({"status": "error", "message": message}), lines: vec![format!("error: {message}")] }
    }
}

pub fn load(path: &Path) -> Result<Project, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    load_project(&bytes).map_err(|e| format!("cannot load {}: {e}", path.display()))
}

pub fn save(path: &Path, project: &Project) -> Result<(), String> {
    let bytes = save_project(project).map_err(|e| e.to_string())?;
    std::fs::write(path, bytes).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn workbench(path: &Path) -> Result<Workbench, Outcome> {
    let project = load(path).map_err(|m| Outcome::fail(2, m))?;
    Ok(Workbench::new(project, Box::new(SystemClock)))
}

pub fn init(dir: &Path, name: Option<&str>) -> Outcome {
    let path = dir.join(DEFAULT_PROJECT);
    if path.exists() {
        return Outcome::fail(1, format!("{} already exists", path.display()));
    }
    if let Err(e) = std::fs::create_dir_all(dir) {
        return Outcome::fail(1, format!("cannot create {}: {e}", dir.display()));
    }
    let stem = dir.canonicalize().ok().and_then(|d| d.file_name().map(|n| n.to_string_lossy().into_owned()));
    let name = name.map(str::to_owned).or(stem).unwrap_or_else(|| "project".to_owned());
    let wb = Workbench::create("project", &name, Box::new(SystemClock));
    match save(&path, wb.project()) {
        Ok(()) => Outcome::ok(format!("created {}", path.display()), json!({"status": "ok", "path": path})),
        Err(m) => Outcome::fail(1, m),
    }
}

pub fn import(project: &Path, kind: Kind, origin: &str, participant: Option<&str>, name: Option<&str>, file: &Path) -> Outcome {
    let mut wb = match workbench(project) {
        Ok(wb) => wb,
        Err(o) => return o,
    };
    let bytes = match std::fs::read(file) {
        Ok(b) => b,
        Err(e) => return Outcome::fail(1, format!("cannot read {}: {e}", file.display())),
    };
    let name = name
        .map(str::to_owned)
        .or_else(|| file.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "source".to_owned());
    let mut descriptor = OriginDescriptor::new(OriginMethod::parse(origin));
    descriptor.participant = participant.map(str::to_owned);
    let kind = match kind {
        Kind::Text => SourceKind::Text,
        Kind::Table => SourceKind::Table,
    };
    let src = match wb.import_source(kind, &name, &bytes, descriptor) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(1, e.to_string()),
    };
    if let Err(m) = save(project, wb.project()) {
        return Outcome::fail(1, m);
    }
    Outcome::ok(format!("imported {} as {}", name, src.id), json!({"status": "ok", "source_id": src.id}))
}

/// Executes all cells, syncs the canvas and saves. When nothing but the
/// modification time would change, the old time is kept so repeated runs of
/// an unchanged project write identical bytes.
pub fn run_headless(project: &Path) -> Outcome {
    let mut wb = match workbench(project) {
        Ok(wb) => wb,
        Err(o) => return o,
    };
    let before = wb.project().clone();
    let run = wb.execute_all();
    let mut after = wb.into_project();
    let mut probe = after.clone();
    probe.modified_at = before.modified_at;
    if probe == before {
        after = probe;
    }

    let mut lines = Vec::new();
    let mut cells = Vec::new();
    let mut failed = 0;
    for (id, outputs) in &run.cells {
        match outputs.iter().find_map(|o| match o {
            CellOutput::Error { payload, .. } => Some(payload),
            _ => None,
        }) {
            Some(err) => {
                failed += 1;
                lines.push(format!("{id}: error {}: {}", err.code, err.message));
                cells.push(json!({"cell_id": id, "status": "error", "code": err.code, "message": err.message}));
            }
            None => {
                let kinds: Vec<&str> = outputs.iter().map(CellOutput::kind).collect();
                let shown = if kinds.is_empty() { "no output".to_owned() } else { kinds.join(", ") };
                lines.push(format!("{id}: ok ({shown})"));
                cells.push(json!({"cell_id": id, "status": "ok", "outputs": kinds}));
            }
        }
    }
    let stale = after.canvas.blocks.iter().filter(|b| b.stale).count();
    lines.push(format!("{} cells, {failed} failed; {} blocks updated, {stale} stale", run.cells.len(), run.sync.updates.len()));
    if let Err(m) = save(project, &after) {
        return Outcome::fail(1, m);
    }
    Outcome {
        code: if failed > 0 { 1 } else { 0 },
        lines,
        json: json!({
            "status": if failed > 0 { "error" } else { "ok" },
            "cells": cells,
            "updated_blocks": run.sync.updates.len(),
            "stale_blocks": stale,
        }),
    }
}

pub fn export(project: &Path, format: Format, out: &Path) -> Outcome {
    let p = match load(project) {
        Ok(p) => p,
        Err(m) => return Outcome::fail(2, m),
    };
    let bytes = match format {
        Format::Html => html::render(&p).into_bytes(),
        Format::Json => match save_project(&p) {
            Ok(b) => b,
            Err(e) => return Outcome::fail(1, e.to_string()),
        },
    };
    if let Err(e) = std::fs::write(out, bytes) {
        return Outcome::fail(1, format!("cannot write {}: {e}", out.display()));
    }
    Outcome::ok(format!("wrote {}", out.display()), json!({"status": "ok", "path": out}))
}

pub fn serve(project: &Path, port: u16) -> Outcome {
    let wb = match workbench(project) {
        Ok(wb) => wb,
        Err(o) => return o,
    };
    let service = mmw_service::Service::new(wb).persist_to(project);
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => return Outcome::fail(1, e.to_string()),
    };
    eprintln!("serving {} on http://{addr}/api/v1", project.display());
    match rt.block_on(mmw_service::serve(service, addr)) {
        Ok(()) => Outcome::ok("stopped".into(), json!({"status": "ok"})),
        Err(e) => Outcome::fail(1, e.to_string()),
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Init { dir, name } => init(dir, name.as_deref()),
        Command::Import { kind, origin, participant, name, file } => {
            import(&cli.project, *kind, origin, participant.as_deref(), name.as_deref(), file)
        }
        Command::Run => run_headless(&cli.project),
        Command::Export { format, out } => export(&cli.project, *format, out),
        Command::Serve { port } => serve(&cli.project, *port),
    }
}

/// Parses arguments, runs the command, prints its report and returns the exit
/// code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = execute(&cli);
    let mut stdout = std::io::stdout().lock();
    if cli.json {
        let _ = writeln!(stdout, "{}", mmw_core::canonical::to_canonical_string(&outcome.json).unwrap_or_default());
    } else if outcome.code == 0 {
        for l in &outcome.lines {
            let _ = writeln!(stdout, "{l}");
        }
    } else {
        let (last, rest) = outcome.lines.split_last().map_or((None, &[][..]), |(l, r)| (Some(l), r));
        for l in rest {
            let _ = writeln!(stdout, "{l}");
        }
        if let Some(l) = last {
            eprintln!("{l}");
        }
    }
    outcome.code
}
