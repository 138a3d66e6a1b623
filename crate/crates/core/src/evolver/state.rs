use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// In-memory working tree: path to file bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingState {
    files: BTreeMap<String, Vec<u8>>,
}

/// Files touched and lines added plus removed between two states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffStats {
    pub files: u64,
    pub lines: u64,
}

/// Prior contents of the paths a patch touched, in first-touch order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Undo {
    prior: Vec<(String, Option<Vec<u8>>)>,
}

/// One file write (`Some`) or deletion (`None`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub edits: Vec<(String, Option<Vec<u8>>)>,
}

impl Patch {
    pub fn write(mut self, path: impl Into<String>, contents: impl Into<Vec<u8>>) -> Self {
        self.edits.push((path.into(), Some(contents.into())));
        self
    }

    pub fn delete(mut self, path: impl Into<String>) -> Self {
        self.edits.push((path.into(), None));
        self
    }
}

impl WorkingState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_file(mut self, path: impl Into<String>, contents: impl Into<Vec<u8>>) -> Self {
        self.write(path, contents);
        self
    }

    pub fn write(&mut self, path: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.insert(path.into(), contents.into());
    }

    pub fn remove(&mut self, path: &str) -> Option<Vec<u8>> {
        self.files.remove(path)
    }

    pub fn read(&self, path: &str) -> Option<&[u8]> {
        self.files.get(path).map(Vec::as_slice)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.files.contains_key(path)
    }

    /// Whether `dir` is a prefix directory of any file.
    pub fn contains_dir(&self, dir: &str) -> bool {
        let prefix = format!("{}/", dir.trim_end_matches('/'));
        self.files.keys().any(|p| p.starts_with(&prefix))
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn files(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.files
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn snapshot(&self) -> WorkingState {
        self.clone()
    }

    pub fn restore(&mut self, snapshot: WorkingState) {
        *self = snapshot;
    }

    pub fn apply(&mut self, patch: &Patch) {
        for (path, contents) in &patch.edits {
            match contents {
                Some(bytes) => self.write(path.clone(), bytes.clone()),
                None => {
                    self.remove(path);
                }
            }
        }
    }

    /// Apply `patch`, remembering the prior contents of every path it touches.
    pub fn apply_undoable(&mut self, patch: &Patch) -> Undo {
        let mut prior: Vec<(String, Option<Vec<u8>>)> = Vec::new();
        for (path, _) in &patch.edits {
            if !prior.iter().any(|(p, _)| p == path) {
                prior.push((path.clone(), self.files.get(path).cloned()));
            }
        }
        self.apply(patch);
        Undo { prior }
    }

    /// Put every path touched since `undo` was taken back as it was.
    pub fn undo(&mut self, undo: Undo) {
        for (path, contents) in undo.prior {
            match contents {
                Some(bytes) => self.files.insert(path, bytes),
                None => self.files.remove(&path),
            };
        }
    }

    /// Same as [`diff_from`](Self::diff_from) against the state `undo` was
    /// taken from, touching only the patched paths.
    pub fn diff_since(&self, undo: &Undo) -> DiffStats {
        let mut stats = DiffStats::default();
        for (path, old) in &undo.prior {
            let new = self.files.get(path);
            if old.as_ref() == new {
                continue;
            }
            stats.files += 1;
            stats.lines += changed_lines(old.as_deref().unwrap_or(&[]), new.map_or(&[][..], Vec::as_slice));
        }
        stats
    }

    /// Line-multiset diff from `before` to `self`.
    pub fn diff_from(&self, before: &WorkingState) -> DiffStats {
        let mut stats = DiffStats::default();
        let paths: std::collections::BTreeSet<&String> = self.files.keys().chain(before.files.keys()).collect();
        for path in paths {
            let old = before.files.get(path.as_str());
            let new = self.files.get(path.as_str());
            if old == new {
                continue;
            }
            stats.files += 1;
            stats.lines += changed_lines(old.map_or(&[][..], Vec::as_slice), new.map_or(&[][..], Vec::as_slice));
        }
        stats
    }
}

fn changed_lines(old: &[u8], new: &[u8]) -> u64 {
    let mut counts: HashMap<&[u8], i64> = HashMap::new();
    for line in old.split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
        *counts.entry(line).or_default() += 1;
    }
    let mut added = 0u64;
    for line in new.split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
        match counts.get_mut(line) {
            Some(c) if *c > 0 => *c -= 1,
            _ => added += 1,
        }
    }
    let removed: i64 = counts.values().filter(|c| **c > 0).sum();
    added + removed as u64
}
