//! Name-keyed registries of interchangeable strategies.

use std::collections::BTreeMap;
use std::sync::Arc;

/// Something that can be registered under a stable name.
pub trait Named {
    fn name(&self) -> &'static str;
}

/// Strategies of one family, looked up by name at runtime.
pub struct Registry<T: ?Sized + Named> {
    entries: BTreeMap<&'static str, Arc<T>>,
    default: Option<&'static str>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new() -> Self {
        Registry {
            entries: BTreeMap::new(),
            default: None,
        }
    }

    /// Registers a strategy; the first one registered becomes the default.
    pub fn register(&mut self, strategy: Arc<T>) {
        let name = strategy.name();
        self.default.get_or_insert(name);
        self.entries.insert(name, strategy);
    }

    pub fn get(&self, name: &str) -> Option<Arc<T>> {
        self.entries.get(name).cloned()
    }

    pub fn default_strategy(&self) -> Option<Arc<T>> {
        self.default.and_then(|n| self.get(n))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Self::new()
    }
}
