//! On-disk layout: one JSON file per definition and one append-only JSONL
//! event log per instance.
//!
//! ```text
//! <data-dir>/definitions/<name>.json
//! <data-dir>/instances/<id>.events.jsonl
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use wf_core::engine::{EngineEvent, ProcessInstance};
use wf_core::model::ProcessDefinition;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt log for `{id}` at line {line}: {reason}")]
    CorruptLog { id: String, line: usize, reason: String },
    #[error("unreadable definition {path}: {reason}")]
    BadDefinition { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

const LOG_SUFFIX: &str = ".events.jsonl";

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let store = Store { root: root.into() };
        for dir in [store.definitions_dir(), store.instances_dir()] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn definitions_dir(&self) -> PathBuf {
        self.root.join("definitions")
    }

    fn instances_dir(&self) -> PathBuf {
        self.root.join("instances")
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.instances_dir().join(format!("{id}{LOG_SUFFIX}"))
    }

    /// Written to a temporary file and renamed into place.
    pub fn save_definition(&self, def: &ProcessDefinition) -> Result<(), StoreError> {
        let path = self.definitions_dir().join(format!("{}.json", def.name));
        let tmp = path.with_extension("json.tmp");
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(def.to_json().as_bytes()).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        sync_dir(&self.definitions_dir())
    }

    pub fn load_definitions(&self) -> Result<Vec<ProcessDefinition>, StoreError> {
        let mut out = Vec::new();
        for path in sorted_entries(&self.definitions_dir())? {
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let def = ProcessDefinition::parse(&text)
                .map_err(|e| StoreError::BadDefinition { path: path.clone(), reason: e.to_string() })?;
            out.push(def);
        }
        Ok(out)
    }

    /// Instance ids with a log file.
    pub fn instance_ids(&self) -> Result<Vec<String>, StoreError> {
        Ok(sorted_entries(&self.instances_dir())?
            .iter()
            .filter_map(|p| p.file_name()?.to_str()?.strip_suffix(LOG_SUFFIX).map(str::to_owned))
            .collect())
    }

    /// Starts a new log. Fails if one already exists.
    pub fn create_log(&self, id: &str, events: &[EngineEvent]) -> Result<(), StoreError> {
        let path = self.log_path(id);
        let mut f = OpenOptions::new().write(true).create_new(true).open(&path).map_err(io_err(&path))?;
        write_events(&mut f, events).map_err(io_err(&path))?;
        sync_dir(&self.instances_dir())
    }

    /// Appends the events of one action with a single write, then syncs.
    pub fn append(&self, id: &str, events: &[EngineEvent]) -> Result<(), StoreError> {
        let path = self.log_path(id);
        let mut f = OpenOptions::new().append(true).open(&path).map_err(io_err(&path))?;
        let len = f.metadata().map_err(io_err(&path))?.len();
        write_events(&mut f, events).map_err(|e| {
            // Leave no fragment in front of the next append.
            let _ = f.set_len(len);
            StoreError::Io { path: path.clone(), source: e }
        })
    }

    /// Reads and replays a log.
    ///
    /// A final line without its newline is what a crash in the middle of an
    /// append leaves behind. That action was never acknowledged, so the
    /// fragment is cut off. Any other unreadable line is corruption.
    pub fn recover(&self, id: &str) -> Result<(ProcessInstance, Vec<EngineEvent>), StoreError> {
        let path = self.log_path(id);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < bytes.len() {
            let f = OpenOptions::new().write(true).open(&path).map_err(io_err(&path))?;
            f.set_len(complete as u64).map_err(io_err(&path))?;
            f.sync_all().map_err(io_err(&path))?;
        }
        let events = parse_log(id, &bytes[..complete])?;
        let corrupt = |line: usize, reason: String| StoreError::CorruptLog { id: id.to_owned(), line, reason };
        let inst = ProcessInstance::replay(&events).map_err(|e| {
            let line = match &e {
                wf_core::ReplayError::SeqGap { found, .. } => events.iter().position(|ev| ev.seq == *found),
                wf_core::ReplayError::Inapplicable { seq, .. } => events.iter().position(|ev| ev.seq == *seq),
                _ => Some(0),
            };
            corrupt(line.map_or(0, |l| l + 1), e.to_string())
        })?;
        if inst.id() != id {
            return Err(corrupt(1, format!("log names instance `{}`", inst.id())));
        }
        Ok((inst, events))
    }
}

/// Parses complete JSONL content. Line numbers in errors are 1-based.
pub fn parse_log(id: &str, bytes: &[u8]) -> Result<Vec<EngineEvent>, StoreError> {
    let text = std::str::from_utf8(bytes).map_err(|e| StoreError::CorruptLog {
        id: id.to_owned(),
        line: 0,
        reason: e.to_string(),
    })?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| StoreError::CorruptLog {
                id: id.to_owned(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

fn write_events(f: &mut File, events: &[EngineEvent]) -> io::Result<()> {
    let mut buf = Vec::new();
    for ev in events {
        serde_json::to_writer(&mut buf, ev).map_err(io::Error::other)?;
        buf.push(b'\n');
    }
    f.write_all(&buf)?;
    f.sync_data()
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        out.push(entry.map_err(io_err(dir))?.path());
    }
    out.sort();
    Ok(out)
}

fn sync_dir(dir: &Path) -> Result<(), StoreError> {
    File::open(dir).and_then(|d| d.sync_all()).map_err(io_err(dir))
}
