//! Additively smoothed n-gram categorical model over a token vocabulary.
//!
//! For history `h` (the previous `n - 1` tokens) the conditional is
//! `p(i | h) = (count(h, i) + λ) / (count(h) + λ·|V|)`, which is the
//! smoothed count estimate minimizing next-token cross-entropy on the corpus.
//! Only positions with a full history contribute, both when fitting and when
//! scoring.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::Rng;

use super::vocab::{Token, TokenSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
struct Counts {
    by_token: BTreeMap<Token, u64>,
    total: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    smoothing: f64,
    vocab_size: usize,
    tables: HashMap<Vec<Token>, Counts>,
}

impl NgramModel {
    /// A model with no observations: every conditional is uniform.
    pub fn uniform(order: usize, vocab_size: usize) -> Self {
        NgramModel { order: order.max(1), smoothing: 1.0, vocab_size, tables: HashMap::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Number of distinct histories observed.
    pub fn n_histories(&self) -> usize {
        self.tables.len()
    }

    fn history_key<'a>(&self, history: &'a [Token]) -> &'a [Token] {
        let k = self.order - 1;
        &history[history.len().saturating_sub(k)..]
    }

    /// `p(token | history)`; only the last `order - 1` history tokens matter.
    pub fn prob(&self, history: &[Token], token: Token) -> f64 {
        let key = self.history_key(history);
        let (c, total) = match self.tables.get(key) {
            Some(ct) => (ct.by_token.get(&token).copied().unwrap_or(0), ct.total),
            None => (0, 0),
        };
        (c as f64 + self.smoothing) / (total as f64 + self.smoothing * self.vocab_size as f64)
    }

    /// The full conditional distribution, indexed by token id.
    pub fn distribution(&self, history: &[Token]) -> Vec<f64> {
        let key = self.history_key(history);
        let (counts, total) = match self.tables.get(key) {
            Some(ct) => (Some(&ct.by_token), ct.total),
            None => (None, 0),
        };
        let denom = total as f64 + self.smoothing * self.vocab_size as f64;
        let mut p = vec![self.smoothing / denom; self.vocab_size];
        if let Some(counts) = counts {
            for (t, &c) in counts {
                p[t.0 as usize] = (c as f64 + self.smoothing) / denom;
            }
        }
        p
    }

    /// Mean negative log-likelihood per scored token, in nats.
    pub fn cross_entropy(&self, tokens: &[Token]) -> Result<f64> {
        let n = self.order;
        if tokens.len() < n {
            return Err(Error::Domain(format!("need at least {n} tokens, got {}", tokens.len())));
        }
        let mut total = 0.0;
        let mut count = 0usize;
        for t in (n - 1)..tokens.len() {
            total -= self.prob(&tokens[t + 1 - n..t], tokens[t]).ln();
            count += 1;
        }
        Ok(total / count as f64)
    }

    /// Draws the next value token, ignoring PAD/EOS mass.
    pub fn sample_value<R: Rng>(&self, history: &[Token], rng: &mut R) -> Token {
        let p = self.distribution(history);
        let first = Token::FIRST_VALUE as usize;
        let mass: f64 = p[first..].iter().sum();
        let mut u = rng.random::<f64>() * mass;
        for (i, &pi) in p.iter().enumerate().skip(first) {
            if u < pi {
                return Token(i as u32);
            }
            u -= pi;
        }
        Token((p.len() - 1) as u32)
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "order {}", self.order)?;
        writeln!(w, "smoothing {}", self.smoothing)?;
        writeln!(w, "vocab_size {}", self.vocab_size)?;
        let mut keys: Vec<&Vec<Token>> = self.tables.keys().collect();
        keys.sort();
        for key in keys {
            let hist = if key.is_empty() {
                "-".to_string()
            } else {
                key.iter().map(|t| t.0.to_string()).collect::<Vec<_>>().join(" ")
            };
            for (t, c) in &self.tables[key].by_token {
                writeln!(w, "{hist}\t{}\t{c}", t.0)?;
            }
        }
        Ok(())
    }

    pub fn load<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut header = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing `{name}` line")))??;
            line.strip_prefix(name)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected `{name}`, got `{line}`")))
        };
        let parse_err = |what: &str| Error::Parse(format!("bad {what}"));
        let order: usize = header("order")?.parse().map_err(|_| parse_err("order"))?;
        let smoothing: f64 = header("smoothing")?.parse().map_err(|_| parse_err("smoothing"))?;
        let vocab_size: usize = header("vocab_size")?.parse().map_err(|_| parse_err("vocab_size"))?;
        let mut tables: HashMap<Vec<Token>, Counts> = HashMap::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(h), Some(t), Some(c), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("bad count line `{line}`")));
            };
            let hist: Vec<Token> = if h == "-" {
                Vec::new()
            } else {
                h.split(' ')
                    .map(|x| x.parse().map(Token).map_err(|_| parse_err("history")))
                    .collect::<Result<_>>()?
            };
            if hist.len() + 1 != order {
                return Err(Error::Parse(format!("history `{h}` does not match order {order}")));
            }
            let tok = Token(t.parse().map_err(|_| parse_err("token"))?);
            if tok.0 as usize >= vocab_size {
                return Err(Error::Parse(format!("token {} outside vocabulary", tok.0)));
            }
            let count: u64 = c.parse().map_err(|_| parse_err("count"))?;
            let entry = tables.entry(hist).or_default();
            entry.by_token.insert(tok, count);
            entry.total += count;
        }
        Ok(NgramModel { order, smoothing, vocab_size, tables })
    }
}

/// Count-based fit with additive smoothing `λ`.
pub fn fit_ngram(corpus: &[TokenSeries], order: usize, smoothing: f64, vocab_size: usize) -> Result<NgramModel> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::Fit("empty corpus".into()));
    }
    if order == 0 {
        return Err(Error::Fit("n-gram order must be at least 1".into()));
    }
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(Error::Fit(format!("smoothing {smoothing} must be positive")));
    }
    let mut tables: HashMap<Vec<Token>, Counts> = HashMap::new();
    for series in corpus {
        let toks = &series.tokens;
        if let Some(bad) = toks.iter().find(|t| t.0 as usize >= vocab_size) {
            return Err(Error::Fit(format!("token {} outside vocabulary of {vocab_size}", bad.0)));
        }
        if toks.len() < order {
            continue;
        }
        for t in (order - 1)..toks.len() {
            let entry = tables.entry(toks[t + 1 - order..t].to_vec()).or_default();
            *entry.by_token.entry(toks[t]).or_insert(0) += 1;
            entry.total += 1;
        }
    }
    Ok(NgramModel { order, smoothing, vocab_size, tables })
}
