//! Okapi BM25 over instruction text.

use std::collections::HashMap;

use thiserror::Error;

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
}

/// Lowercase alphanumeric runs; everything else separates terms.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Distinct terms in first-appearance order.
pub fn query_terms(query: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in tokenize(query) {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

/// Inverse document frequency, `ln(1 + (N - n + 0.5) / (n + 0.5))`.
pub fn idf(n_docs: usize, doc_freq: usize) -> f64 {
    let n = n_docs as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Contribution of one term occurring `tf` times in a document.
pub fn term_score(idf: f64, tf: f64, doc_len: f64, avg_len: f64, k1: f64, b: f64) -> f64 {
    idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * doc_len / avg_len))
}

#[derive(Debug, Clone)]
pub struct Bm25Index {
    pub k1: f64,
    pub b: f64,
    postings: HashMap<String, Vec<(usize, u32)>>,
    doc_len: Vec<usize>,
    avg_len: f64,
}

impl Bm25Index {
    pub fn build<S: AsRef<str>>(docs: &[S], k1: f64, b: f64) -> Result<Bm25Index, IndexError> {
        if docs.is_empty() {
            return Err(IndexError::EmptyCorpus);
        }
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        let mut doc_len = Vec::with_capacity(docs.len());
        for (d, text) in docs.iter().enumerate() {
            let tokens = tokenize(text.as_ref());
            doc_len.push(tokens.len());
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in tokens {
                *tf.entry(t).or_insert(0) += 1;
            }
            for (t, n) in tf {
                postings.entry(t).or_default().push((d, n));
            }
        }
        let avg_len = doc_len.iter().sum::<usize>() as f64 / docs.len() as f64;
        Ok(Bm25Index {
            k1,
            b,
            postings,
            doc_len,
            avg_len: avg_len.max(f64::MIN_POSITIVE),
        })
    }

    pub fn len(&self) -> usize {
        self.doc_len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_len.is_empty()
    }

    /// Score of every document for `query`.
    pub fn scores(&self, query: &str) -> Vec<f64> {
        let mut acc = vec![0.0; self.len()];
        for term in query_terms(query) {
            let Some(list) = self.postings.get(&term) else {
                continue;
            };
            let w = idf(self.len(), list.len());
            for &(d, tf) in list {
                acc[d] += term_score(w, tf as f64, self.doc_len[d] as f64, self.avg_len, self.k1, self.b);
            }
        }
        acc
    }

    /// Indices of the top `k` documents, best first, ties by corpus order.
    pub fn top_k(&self, query: &str, k: usize) -> Vec<(usize, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.scores(query).into_iter().enumerate().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}
