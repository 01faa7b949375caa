//! Name-keyed registries for runtime-selected strategies.

use crate::error::{Result, WamError};

/// Ordered name → value table. `kind` names the strategy family in errors.
pub struct Registry<T> {
    kind: &'static str,
    entries: Vec<(String, T)>,
}

impl<T> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds or replaces `name`.
    pub fn register(&mut self, name: impl Into<String>, value: T) -> &mut Self {
        let name = name.into();
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name, value)),
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| WamError::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().iter().map(|s| s.to_string()).collect(),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }
}
