//! Run records kept in memory and, when a data directory is given, in one
//! append-only JSON-lines file per run. The last complete line of a file is
//! the run's current state.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use crate::record::{RunRecord, RunSummary};

type Cell = Arc<Mutex<RunRecord>>;

#[derive(Debug, Default)]
pub struct RunStore {
    dir: Option<PathBuf>,
    runs: RwLock<BTreeMap<String, Cell>>,
}

impl RunStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a store under `dir` and loads every run
    /// in it. Runs that were pending or running when the previous process
    /// stopped are marked failed.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let store = Self {
            dir: Some(dir.clone()),
            runs: RwLock::default(),
        };
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                if let Some(mut record) = last_record(&path)? {
                    if !record.status.is_terminal() {
                        record
                            .fail("interrupted: the service stopped before the run finished")
                            .expect("non-terminal runs can fail");
                        append(&path, &record)?;
                    }
                    store.cell_map().insert(record.run_id.clone(), Arc::new(Mutex::new(record)));
                } else {
                    tracing::warn!(path = %path.display(), "no readable run record");
                }
            }
        }
        Ok(store)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn cell_map(&self) -> std::sync::RwLockWriteGuard<'_, BTreeMap<String, Cell>> {
        self.runs.write().unwrap_or_else(|e| e.into_inner())
    }

    fn cell(&self, run_id: &str) -> Option<Cell> {
        self.runs.read().unwrap_or_else(|e| e.into_inner()).get(run_id).cloned()
    }

    fn persist(&self, record: &RunRecord) -> io::Result<()> {
        match &self.dir {
            Some(dir) => append(&dir.join(format!("{}.jsonl", record.run_id)), record),
            None => Ok(()),
        }
    }

    /// Stores a new run. Fails if the id is taken.
    pub fn insert(&self, record: RunRecord) -> io::Result<()> {
        let mut map = self.cell_map();
        if map.contains_key(&record.run_id) {
            return Err(io::Error::new(
                io::ErrorKind::AlreadyExists,
                format!("run {} already exists", record.run_id),
            ));
        }
        self.persist(&record)?;
        map.insert(record.run_id.clone(), Arc::new(Mutex::new(record)));
        Ok(())
    }

    /// A copy of the run as it is right now.
    pub fn get(&self, run_id: &str) -> Option<RunRecord> {
        let cell = self.cell(run_id)?;
        let record = cell.lock().unwrap_or_else(|e| e.into_inner()).clone();
        Some(record)
    }

    /// Changes a run and appends its new state to disk.
    pub fn update<T>(&self, run_id: &str, f: impl FnOnce(&mut RunRecord) -> T) -> io::Result<Option<T>> {
        let Some(cell) = self.cell(run_id) else {
            return Ok(None);
        };
        let mut record = cell.lock().unwrap_or_else(|e| e.into_inner());
        let out = f(&mut record);
        self.persist(&record)?;
        Ok(Some(out))
    }

    /// Changes a run in memory only. Used for per-generation progress,
    /// which reaches disk with the next persisted update.
    pub fn update_live(&self, run_id: &str, f: impl FnOnce(&mut RunRecord)) -> bool {
        match self.cell(run_id) {
            Some(cell) => {
                f(&mut cell.lock().unwrap_or_else(|e| e.into_inner()));
                true
            }
            None => false,
        }
    }

    pub fn list(&self) -> Vec<RunSummary> {
        let cells: Vec<Cell> = self.runs.read().unwrap_or_else(|e| e.into_inner()).values().cloned().collect();
        let mut out: Vec<RunSummary> = cells
            .iter()
            .map(|c| c.lock().unwrap_or_else(|e| e.into_inner()).summary())
            .collect();
        out.sort_by(|a, b| (a.created_at, &a.run_id).cmp(&(b.created_at, &b.run_id)));
        out
    }

    pub fn len(&self) -> usize {
        self.runs.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn append(path: &Path, record: &RunRecord) -> io::Result<()> {
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(&line)?;
    file.flush()
}

/// The last line that parses; a torn final write is skipped.
fn last_record(path: &Path) -> io::Result<Option<RunRecord>> {
    let mut last = None;
    for line in BufReader::new(fs::File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(record) = serde_json::from_str::<RunRecord>(&line) {
            last = Some(record);
        }
    }
    Ok(last)
}
