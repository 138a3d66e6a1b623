//! Near-duplicate detection and query matching.
//!
//! Duplicate checks compare token 3-gram shingle sets by exact Jaccard
//! similarity. Candidates come from a prefix-filter index: with threshold
//! `t`, two sets can only reach `t` if they share one of the first
//! `|x| - ceil(t * |x|) + 1` elements under a fixed global order.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::gep::AssetKind;

pub const DEFAULT_DUPLICATE_THRESHOLD: f64 = 0.9;
const SHINGLE_WIDTH: usize = 3;

/// Lowercased whitespace tokens.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Lowercased alphanumeric runs; `_` counts as alphanumeric.
pub fn key_tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn stable_hash<T: Hash + ?Sized>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

/// Sorted, deduplicated shingle hashes. Texts shorter than the shingle width
/// yield a single shingle of all their tokens; empty text yields none.
pub fn shingles(text: &str) -> Vec<u64> {
    let tokens = word_tokens(text);
    let mut out: Vec<u64> = if tokens.is_empty() {
        Vec::new()
    } else if tokens.len() < SHINGLE_WIDTH {
        vec![stable_hash(&tokens[..])]
    } else {
        tokens.windows(SHINGLE_WIDTH).map(stable_hash).collect()
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Jaccard similarity of two sorted, deduplicated slices.
pub fn jaccard_sorted<T: Ord>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Store of asset texts that reports the most similar earlier entry of the
/// same kind at or above its threshold.
pub trait SimilarityIndex: Send + Sync {
    fn threshold(&self) -> f64;
    fn insert(&mut self, key: usize, kind: AssetKind, text: &str);
    /// Highest-similarity match, ties broken by the smallest key.
    fn most_similar(&self, kind: AssetKind, text: &str) -> Option<(usize, f64)>;
}

#[derive(Debug, Clone)]
pub struct ShingleIndex {
    threshold: f64,
    sets: HashMap<usize, (AssetKind, Vec<u64>)>,
    postings: HashMap<(AssetKind, u64), Vec<usize>>,
}

impl ShingleIndex {
    pub fn new(threshold: f64) -> Self {
        Self { threshold, sets: HashMap::new(), postings: HashMap::new() }
    }

    fn prefix_len(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let keep = (self.threshold * n as f64).ceil() as usize;
        (n + 1).saturating_sub(keep).clamp(1, n)
    }
}

impl Default for ShingleIndex {
    fn default() -> Self {
        Self::new(DEFAULT_DUPLICATE_THRESHOLD)
    }
}

impl SimilarityIndex for ShingleIndex {
    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn insert(&mut self, key: usize, kind: AssetKind, text: &str) {
        let set = shingles(text);
        for s in &set[..self.prefix_len(set.len())] {
            self.postings.entry((kind, *s)).or_default().push(key);
        }
        self.sets.insert(key, (kind, set));
    }

    fn most_similar(&self, kind: AssetKind, text: &str) -> Option<(usize, f64)> {
        let set = shingles(text);
        if set.is_empty() {
            return None;
        }
        let mut seen = HashSet::new();
        let mut best: Option<(usize, f64)> = None;
        for s in &set[..self.prefix_len(set.len())] {
            for &key in self.postings.get(&(kind, *s)).into_iter().flatten() {
                if !seen.insert(key) {
                    continue;
                }
                let (_, other) = &self.sets[&key];
                // Jaccard never exceeds the ratio of the smaller set to the larger.
                let (lo, hi) = (set.len().min(other.len()), set.len().max(other.len()));
                if (lo as f64) < self.threshold * hi as f64 {
                    continue;
                }
                let sim = jaccard_sorted(&set, other);
                if sim >= self.threshold && best.map_or(true, |(k, b)| sim > b || (sim == b && key < k)) {
                    best = Some((key, sim));
                }
            }
        }
        best
    }
}

/// Maps text to a fixed-length vector for cosine comparison.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Vec<f64>;
}

/// Signed feature hashing of word unigrams and bigrams, L2-normalized.
#[derive(Debug, Clone, Copy)]
pub struct FeatureHashEmbedder {
    pub dim: usize,
}

impl Default for FeatureHashEmbedder {
    fn default() -> Self {
        Self { dim: 256 }
    }
}

impl Embedder for FeatureHashEmbedder {
    fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dim.max(1)];
        let tokens = word_tokens(text);
        let bigrams = tokens.windows(2).map(|w| format!("{} {}", w[0], w[1]));
        for feature in tokens.iter().cloned().chain(bigrams) {
            let h = stable_hash(&feature);
            let slot = (h % v.len() as u64) as usize;
            v[slot] += if h >> 63 == 0 { 1.0 } else { -1.0 };
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Linear-scan cosine index over an injected embedder.
pub struct EmbeddingIndex<E: Embedder> {
    embedder: E,
    threshold: f64,
    vectors: BTreeMap<usize, (AssetKind, Vec<f64>)>,
}

impl<E: Embedder> EmbeddingIndex<E> {
    pub fn new(embedder: E, threshold: f64) -> Self {
        Self { embedder, threshold, vectors: BTreeMap::new() }
    }
}

impl<E: Embedder> SimilarityIndex for EmbeddingIndex<E> {
    fn threshold(&self) -> f64 {
        self.threshold
    }

    fn insert(&mut self, key: usize, kind: AssetKind, text: &str) {
        let v = self.embedder.embed(text);
        self.vectors.insert(key, (kind, v));
    }

    fn most_similar(&self, kind: AssetKind, text: &str) -> Option<(usize, f64)> {
        let q = self.embedder.embed(text);
        let mut best: Option<(usize, f64)> = None;
        for (&key, (k, v)) in &self.vectors {
            if *k != kind {
                continue;
            }
            let sim = cosine(&q, v);
            if sim >= self.threshold && best.map_or(true, |(_, b)| sim > b) {
                best = Some((key, sim));
            }
        }
        best
    }
}

/// Inverted index from key tokens to groups of entries sharing the same
/// token set, so a query scores each distinct key once. Postings are split
/// by group size: a group of size `s` reaches Jaccard `t` against a query of
/// size `n` only with overlap at least `t(n + s)/(1 + t)`, so only the
/// rarest `n - that + 1` query tokens need probing.
#[derive(Debug, Clone, Default)]
pub struct KeyIndex {
    group_of: BTreeMap<BTreeSet<String>, usize>,
    groups: Vec<(BTreeSet<String>, Vec<usize>)>,
    postings: HashMap<(String, usize), Vec<usize>>,
    sizes: BTreeSet<usize>,
}

impl KeyIndex {
    pub fn insert(&mut self, key: usize, text: &str) {
        let tokens = key_tokens(text);
        if tokens.is_empty() {
            return;
        }
        let group = match self.group_of.get(&tokens) {
            Some(&g) => g,
            None => {
                let g = self.groups.len();
                for t in &tokens {
                    self.postings.entry((t.clone(), tokens.len())).or_default().push(g);
                }
                self.sizes.insert(tokens.len());
                self.group_of.insert(tokens.clone(), g);
                self.groups.push((tokens, Vec::new()));
                g
            }
        };
        self.groups[group].1.push(key);
    }

    /// Every entry whose key similarity to `query` is at least `min_sim`
    /// (and positive), with that similarity. Order is unspecified.
    pub fn matches(&self, query: &str, min_sim: f64) -> Vec<(usize, f64)> {
        let q = key_tokens(query);
        let n = q.len();
        let mut out = Vec::new();
        for &s in &self.sizes {
            let probes = if min_sim > 0.0 {
                let overlap = ((min_sim * (n + s) as f64) / (1.0 + min_sim) - 1e-9).ceil().max(1.0) as usize;
                if overlap > n.min(s) {
                    continue;
                }
                n - overlap + 1
            } else {
                n
            };
            let mut lists: Vec<&Vec<usize>> = q.iter().filter_map(|t| self.postings.get(&(t.clone(), s))).collect();
            lists.sort_by_key(|l| l.len());
            // Tokens absent at this size have empty lists and would sort first.
            let skip = n - lists.len();
            let mut seen = HashSet::new();
            for list in lists.into_iter().take(probes.saturating_sub(skip)) {
                for &g in list {
                    if !seen.insert(g) {
                        continue;
                    }
                    let (tokens, members) = &self.groups[g];
                    let sim = jaccard(&q, tokens);
                    if sim > 0.0 && sim >= min_sim {
                        out.extend(members.iter().map(|&m| (m, sim)));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TEXT: &str = "retry the fetch call with exponential backoff when the socket times out after thirty seconds";

    #[test]
    fn identical_text_is_a_duplicate() {
        let mut idx = ShingleIndex::default();
        idx.insert(0, AssetKind::Capsule, TEXT);
        assert_eq!(idx.most_similar(AssetKind::Capsule, TEXT), Some((0, 1.0)));
        assert_eq!(idx.most_similar(AssetKind::Gene, TEXT), None);
    }

    #[test]
    fn one_word_change_in_short_text_is_not() {
        let mut idx = ShingleIndex::default();
        idx.insert(0, AssetKind::Capsule, TEXT);
        let other = TEXT.replace("thirty", "forty");
        assert_eq!(idx.most_similar(AssetKind::Capsule, &other), None);
    }

    #[test]
    fn empty_text_never_matches() {
        let mut idx = ShingleIndex::default();
        idx.insert(0, AssetKind::Capsule, "");
        assert_eq!(idx.most_similar(AssetKind::Capsule, ""), None);
        assert_eq!(idx.most_similar(AssetKind::Capsule, "   "), None);
    }

    #[test]
    fn short_text_is_one_shingle() {
        assert_eq!(shingles("Fix it").len(), 1);
        assert_eq!(shingles("fix IT"), shingles("Fix it"));
        assert_eq!(shingles("a b c d").len(), 2);
    }

    #[test]
    fn embedding_index_flags_near_copies() {
        let mut idx = EmbeddingIndex::new(FeatureHashEmbedder::default(), 0.9);
        idx.insert(3, AssetKind::Capsule, TEXT);
        let (key, sim) = idx.most_similar(AssetKind::Capsule, TEXT).unwrap();
        assert_eq!(key, 3);
        assert!((sim - 1.0).abs() < 1e-12);
        assert_eq!(idx.most_similar(AssetKind::Capsule, "completely unrelated words here"), None);
    }

    #[test]
    fn key_index_groups_identical_keys() {
        let mut idx = KeyIndex::default();
        idx.insert(0, "TypeError in module_17");
        idx.insert(1, "typeerror IN module_17");
        idx.insert(2, "TypeError in module_18");
        let mut m = idx.matches("TypeError in module_17", 0.6);
        m.sort_by_key(|p| p.0);
        assert_eq!(m, vec![(0, 1.0), (1, 1.0)]);
        assert_eq!(idx.matches("TypeError in module_17", 0.5).len(), 3);
        assert!(idx.matches("", 0.0).is_empty());
    }

    fn brute_force(sets: &[Vec<u64>], q: &[u64], t: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, s) in sets.iter().enumerate() {
            let sim = jaccard_sorted(q, s);
            if sim >= t && best.map_or(true, |(_, b)| sim > b) {
                best = Some((k, sim));
            }
        }
        best
    }

    proptest! {
        #[test]
        fn key_matches_equal_brute_force(
            keys in prop::collection::vec(prop::collection::vec(0u8..8, 0..6), 1..30),
            query in prop::collection::vec(0u8..8, 0..6),
            min_sim in prop::sample::select(vec![0.0, 0.25, 0.5, 0.6, 0.75, 1.0]),
        ) {
            let text = |k: &[u8]| k.iter().map(|t| format!("tok{t}")).collect::<Vec<_>>().join(" ");
            let mut idx = KeyIndex::default();
            for (i, k) in keys.iter().enumerate() {
                idx.insert(i, &text(k));
            }
            let q = key_tokens(&text(&query));
            let mut want: Vec<(usize, f64)> = keys
                .iter()
                .enumerate()
                .map(|(i, k)| (i, jaccard(&q, &key_tokens(&text(k)))))
                .filter(|&(_, sim)| sim > 0.0 && sim >= min_sim)
                .collect();
            let mut got = idx.matches(&text(&query), min_sim);
            got.sort_by_key(|m| m.0);
            want.sort_by_key(|m| m.0);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn prefix_filter_matches_brute_force(
            docs in prop::collection::vec(prop::collection::vec(0u8..6, 0..12), 1..20),
            query in prop::collection::vec(0u8..6, 0..12),
            t in 0.3f64..1.0,
        ) {
            let render = |d: &[u8]| d.iter().map(|w| format!("w{w}")).collect::<Vec<_>>().join(" ");
            let mut idx = ShingleIndex::new(t);
            let mut sets = Vec::new();
            for (k, d) in docs.iter().enumerate() {
                idx.insert(k, AssetKind::Capsule, &render(d));
                sets.push(shingles(&render(d)));
            }
            let q = render(&query);
            let got = idx.most_similar(AssetKind::Capsule, &q).map(|p| p.1);
            let want = if shingles(&q).is_empty() { None } else { brute_force(&sets, &shingles(&q), t).map(|p| p.1) };
            prop_assert_eq!(got, want);
        }
    }
}
