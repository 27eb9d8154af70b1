//! Persistent model registry: one JSON file per model under `models/`.
//!
//! Readers take a cheap snapshot (`Arc` of an immutable map); writes are
//! serialized through a single mutex, written to a temp file, renamed into
//! place, and only then published in a fresh snapshot.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use riskweave::api::ApiError;
use riskweave::ModelEnvelope;

pub type Snapshot = Arc<BTreeMap<String, Arc<ModelEnvelope>>>;

pub struct Registry {
    dir: PathBuf,
    snapshot: RwLock<Snapshot>,
    writer: Mutex<()>,
}

fn io_error(context: &str, e: std::io::Error) -> ApiError {
    ApiError::new("StorageError", format!("{context}: {e}"))
}

impl Registry {
    /// Loads every `models/*.json` under `storage_root`, creating the directory if needed.
    pub fn open(storage_root: &Path) -> Result<Self, ApiError> {
        let dir = storage_root.join("models");
        std::fs::create_dir_all(&dir).map_err(|e| io_error("creating model directory", e))?;
        let mut models = BTreeMap::new();
        for entry in std::fs::read_dir(&dir).map_err(|e| io_error("listing models", e))? {
            let path = entry.map_err(|e| io_error("listing models", e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|e| io_error("reading model", e))?;
            let model = ModelEnvelope::from_json(&text)
                .map_err(|e| ApiError::new("InvalidModel", format!("{}: {e}", path.display())))?;
            models.insert(id.to_string(), Arc::new(model));
        }
        Ok(Self {
            dir,
            snapshot: RwLock::new(Arc::new(models)),
            writer: Mutex::new(()),
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        self.snapshot.read().expect("registry lock").clone()
    }

    pub fn get(&self, id: &str) -> Option<Arc<ModelEnvelope>> {
        self.snapshot().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.snapshot().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stamps `created_at`, persists the model under a fresh id and publishes
    /// it. The published copy is re-read from the written text, so it is
    /// exactly what a restarted registry would load.
    pub fn insert(&self, mut model: ModelEnvelope) -> Result<(String, Arc<ModelEnvelope>), ApiError> {
        let _guard = self.writer.lock().expect("registry writer lock");
        let id = uuid::Uuid::new_v4().simple().to_string();
        model.created_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        let text = model.to_json();

        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| io_error("creating temp file", e))?;
        tmp.write_all(text.as_bytes()).map_err(|e| io_error("writing model", e))?;
        tmp.as_file().sync_all().map_err(|e| io_error("syncing model", e))?;
        tmp.persist(self.dir.join(format!("{id}.json")))
            .map_err(|e| io_error("renaming model", e.error))?;

        let stored = Arc::new(ModelEnvelope::from_json(&text)?);
        let mut lock = self.snapshot.write().expect("registry lock");
        let mut next = (**lock).clone();
        next.insert(id.clone(), stored.clone());
        *lock = Arc::new(next);
        Ok((id, stored))
    }
}
