//! Tokenized probabilistic forecasting.
//!
//! A context is mean-scaled, quantized into a fixed vocabulary and extended
//! token by token by sampling from an n-gram categorical model. Sampled
//! token paths are mapped back to bin centers times the context scale and
//! the point forecast is the per-step median across paths.

mod ngram;
mod vocab;

pub use ngram::{fit_ngram, NgramModel};
pub use vocab::{detokenize, tokenize, tokenize_with_scale, ScaledSeries, Token, TokenSeries, TokenVocab};

use std::io::{BufRead, Write};

use crate::forecast::{Forecast, ForecastRequest, Forecaster};
use crate::{Error, Result};

const FORMAT_HEADER: &str = "cfbench-ngram v1";

#[derive(Debug, Clone, PartialEq)]
pub struct TokenForecasterConfig {
    pub n_bins: usize,
    pub clip: f64,
    pub order: usize,
    pub smoothing: f64,
}

impl Default for TokenForecasterConfig {
    fn default() -> Self {
        TokenForecasterConfig { n_bins: 256, clip: 4.0, order: 4, smoothing: 0.1 }
    }
}

/// Cuts training series into `context + horizon` segments (stride `horizon`),
/// scales each segment by its context part and appends EOS. Series shorter
/// than one segment are used whole, scaled by themselves.
pub fn build_corpus(series: &[Vec<f64>], context: usize, horizon: usize, vocab: &TokenVocab) -> Vec<TokenSeries> {
    let seg = context + horizon;
    let mut corpus = Vec::new();
    for s in series {
        if s.is_empty() {
            continue;
        }
        if s.len() < seg || context == 0 {
            let (toks, _) = tokenize(s, vocab);
            corpus.push(toks.with_eos());
            continue;
        }
        let mut start = 0;
        while start + seg <= s.len() {
            let window = &s[start..start + seg];
            let scale = ScaledSeries::mean_scaled(&window[..context]).scale;
            corpus.push(tokenize_with_scale(window, scale, vocab).with_eos());
            start += horizon.max(1);
        }
    }
    corpus
}

/// Samples `n_samples` token paths of length `horizon` after the tokenized
/// context and decodes them with the context scale.
pub fn sample_forecast(model: &NgramModel, req: &ForecastRequest, vocab: &TokenVocab) -> Result<Forecast> {
    req.validate()?;
    if model.vocab_size() != vocab.size() {
        return Err(Error::Contract(format!(
            "model vocabulary {} does not match tokenizer vocabulary {}",
            model.vocab_size(),
            vocab.size()
        )));
    }
    let (ctx, scale) = tokenize(&req.context, vocab);
    let k = model.order() - 1;
    let mut seed_history = vec![Token::PAD; k.saturating_sub(ctx.len())];
    seed_history.extend_from_slice(&ctx.tokens[ctx.len().saturating_sub(k)..]);

    let mut rng = req.rng();
    let mut samples = Vec::with_capacity(req.n_samples);
    for _ in 0..req.n_samples {
        let mut history = seed_history.clone();
        let mut path = Vec::with_capacity(req.horizon);
        for _ in 0..req.horizon {
            let t = model.sample_value(&history, &mut rng);
            path.push(t);
            history.push(t);
            if history.len() > k {
                history.remove(0);
            }
        }
        samples.push(detokenize(&path, scale, vocab)?);
    }
    Forecast::from_samples(samples)
}

/// Vocabulary plus a fitted n-gram model.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenForecaster {
    vocab: TokenVocab,
    model: NgramModel,
}

impl TokenForecaster {
    pub fn new(vocab: TokenVocab, model: NgramModel) -> Result<Self> {
        if model.vocab_size() != vocab.size() {
            return Err(Error::Contract("model and vocabulary sizes differ".into()));
        }
        Ok(TokenForecaster { vocab, model })
    }

    /// Builds the corpus from raw training series and fits the model.
    pub fn train(series: &[Vec<f64>], context: usize, horizon: usize, cfg: &TokenForecasterConfig) -> Result<Self> {
        let vocab = TokenVocab::new(cfg.n_bins, cfg.clip)?;
        let corpus = build_corpus(series, context, horizon, &vocab);
        let model = fit_ngram(&corpus, cfg.order, cfg.smoothing, vocab.size())?;
        Ok(TokenForecaster { vocab, model })
    }

    pub fn vocab(&self) -> &TokenVocab {
        &self.vocab
    }

    pub fn model(&self) -> &NgramModel {
        &self.model
    }

    /// Versioned text format: header, vocabulary metadata, then the model's
    /// `(history, token, count)` triples.
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{FORMAT_HEADER}")?;
        writeln!(w, "n_bins {}", self.vocab.n_bins())?;
        writeln!(w, "clip {}", self.vocab.clip())?;
        self.model.save(w)
    }

    pub fn load<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim() != FORMAT_HEADER {
            return Err(Error::Parse(format!("unsupported model header `{}`", line.trim())));
        }
        let mut field = |name: &str| -> Result<String> {
            let mut l = String::new();
            r.read_line(&mut l)?;
            l.trim()
                .strip_prefix(name)
                .map(|v| v.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected `{name}`")))
        };
        let n_bins: usize = field("n_bins")?.parse().map_err(|_| Error::Parse("bad n_bins".into()))?;
        let clip: f64 = field("clip")?.parse().map_err(|_| Error::Parse("bad clip".into()))?;
        let vocab = TokenVocab::new(n_bins, clip)?;
        let model = NgramModel::load(r)?;
        TokenForecaster::new(vocab, model)
    }
}

impl Forecaster for TokenForecaster {
    fn name(&self) -> &str {
        "token"
    }

    fn forecast(&self, req: &ForecastRequest) -> Result<Forecast> {
        sample_forecast(&self.model, req, &self.vocab)
    }
}
