use std::collections::HashMap;
use std::sync::RwLock;

use crate::descriptor::{format_id, FormatDescriptor, FormatId};
use crate::Result;

/// Thread-safe set of known layouts keyed by [`FormatId`].
///
/// Names are informational: two different descriptors may share a name and
/// both stay registered under their own ids.
#[derive(Debug, Default)]
pub struct FormatRegistry {
    formats: RwLock<HashMap<FormatId, FormatDescriptor>>,
}

impl FormatRegistry {
    pub fn new() -> Self {
        FormatRegistry::default()
    }

    /// Idempotent: registering an identical descriptor again returns the same id.
    pub fn register(&self, desc: &FormatDescriptor) -> Result<FormatId> {
        let id = format_id(desc)?;
        let mut formats = self.formats.write().unwrap_or_else(|e| e.into_inner());
        formats.entry(id).or_insert_with(|| desc.clone());
        Ok(id)
    }

    pub fn get(&self, id: FormatId) -> Option<FormatDescriptor> {
        self.formats.read().unwrap_or_else(|e| e.into_inner()).get(&id).cloned()
    }

    /// All ids registered under `name`, sorted.
    pub fn ids_named(&self, name: &str) -> Vec<FormatId> {
        let formats = self.formats.read().unwrap_or_else(|e| e.into_inner());
        let mut ids: Vec<_> = formats.iter().filter(|(_, d)| d.name == name).map(|(id, _)| *id).collect();
        ids.sort();
        ids
    }

    pub fn len(&self) -> usize {
        self.formats.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
