use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Run metadata stamped on every emitted file.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub tol: f64,
}

impl Meta {
    pub fn csv_comment(&self) -> String {
        format!(
            "# {} {} command={} seed={} tol={}\n",
            self.tool, self.version, self.command, self.seed, self.tol
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a Meta,
    result: &'a T,
}

pub fn json_document<T: Serialize>(meta: &Meta, result: &T) -> String {
    let mut s =
        serde_json::to_string_pretty(&Envelope { meta, result }).expect("serializable report");
    s.push('\n');
    s
}

pub fn meta_line(meta: &Meta) -> String {
    #[derive(Serialize)]
    struct Line<'a> {
        meta: &'a Meta,
    }
    serde_json::to_string(&Line { meta }).expect("serializable meta") + "\n"
}

/// Writes `contents` to `path` via a temporary sibling and a rename, or to
/// stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Input(format!("stdout: {e}")))
        }
        Some(p) => write_atomic(p, contents),
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = temp_sibling(path);
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

/// `dir/stem.suffix` next to `path`, e.g. the summary file of a CSV table.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
