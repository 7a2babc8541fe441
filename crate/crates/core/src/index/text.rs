use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// Lowercased whitespace-separated tokens with punctuation removed.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| !c.is_ascii_punctuation())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

fn counts(text: &str) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for t in tokenize(text) {
        *m.entry(t).or_insert(0.0) += 1.0;
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub id: String,
    pub score: f64,
}

/// Unit-length sparse vector keyed by term.
type Sparse = BTreeMap<String, f64>;

/// TF-IDF index over a fixed document set. Term weights are raw count
/// times `ln((1 + N) / (1 + df)) + 1`; similarity is cosine.
#[derive(Clone, Debug, Default)]
pub struct TextIndex {
    ids: Vec<String>,
    docs: Vec<Sparse>,
    df: HashMap<String, usize>,
}

impl TextIndex {
    pub fn new<I, S, T>(documents: I) -> TextIndex
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut ids = Vec::new();
        let mut raw = Vec::new();
        let mut df: HashMap<String, usize> = HashMap::new();
        for (id, text) in documents {
            let c = counts(text.as_ref());
            for term in c.keys() {
                *df.entry(term.clone()).or_default() += 1;
            }
            ids.push(id.into());
            raw.push(c);
        }
        let mut index = TextIndex {
            ids,
            docs: Vec::new(),
            df,
        };
        index.docs = raw.into_iter().map(|c| index.weigh(c)).collect();
        index
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.ids.len() as f64;
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    fn weigh(&self, counts: BTreeMap<String, f64>) -> Sparse {
        let mut v: Sparse = counts
            .into_iter()
            .map(|(t, c)| {
                let w = c * self.idf(&t);
                (t, w)
            })
            .collect();
        let norm = v.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.values_mut().for_each(|w| *w /= norm);
        }
        v
    }

    /// Normalized TF-IDF vector of arbitrary text under this index's
    /// document frequencies.
    pub fn vectorize(&self, text: &str) -> BTreeMap<String, f64> {
        self.weigh(counts(text))
    }

    /// Cosine similarity of two texts, clamped to `[0, 1]`.
    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        dot(&self.vectorize(a), &self.vectorize(b)).clamp(0.0, 1.0)
    }

    /// Records sharing at least one token with the query, best first; ties
    /// go to the smaller id.
    pub fn retrieve(&self, query: &str, top_k: usize) -> Vec<Scored> {
        let q = self.vectorize(query);
        let mut out: Vec<Scored> = self
            .docs
            .iter()
            .zip(&self.ids)
            .filter_map(|(d, id)| {
                let score = dot(&q, d).clamp(0.0, 1.0);
                (score > 0.0).then(|| Scored {
                    id: id.clone(),
                    score,
                })
            })
            .collect();
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
        out.truncate(top_k);
        out
    }
}

fn dot(a: &Sparse, b: &Sparse) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(t, w)| large.get(t).map(|v| w * v))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_are_lowercased_and_stripped() {
        assert_eq!(tokenize("  Red, wooden CHAIR!  "), ["red", "wooden", "chair"]);
        assert_eq!(tokenize("dark-oak"), ["darkoak"]);
        assert!(tokenize("--- ...").is_empty());
    }

    #[test]
    fn identical_text_scores_one() {
        let idx = TextIndex::new([("a", "red wooden chair"), ("b", "steel office desk")]);
        let r = idx.retrieve("red wooden chair", 5);
        assert_eq!(r[0].id, "a");
        assert!((r[0].score - 1.0).abs() < 1e-9);
        assert!(idx.retrieve("xylophone", 5).is_empty());
    }

    #[test]
    fn ties_break_by_id() {
        let idx = TextIndex::new([("b", "lamp"), ("a", "lamp"), ("c", "lamp")]);
        let ids: Vec<_> = idx.retrieve("lamp", 2).into_iter().map(|s| s.id).collect();
        assert_eq!(ids, ["a", "b"]);
    }
}
