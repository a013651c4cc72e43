use serde::{Deserialize, Serialize};

use crate::stats;
use crate::{Error, Result};

/// A vocabulary id. `0` is PAD, `1` is EOS, value bins start at `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Token(pub u32);

impl Token {
    pub const PAD: Token = Token(0);
    pub const EOS: Token = Token(1);
    pub const FIRST_VALUE: u32 = 2;

    pub fn is_special(self) -> bool {
        self.0 < Self::FIRST_VALUE
    }
}

/// An ordered token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSeries {
    pub tokens: Vec<Token>,
}

impl TokenSeries {
    pub fn new(tokens: Vec<Token>) -> Self {
        TokenSeries { tokens }
    }

    pub fn with_eos(mut self) -> Self {
        self.tokens.push(Token::EOS);
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A series divided by its positive scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSeries {
    pub values: Vec<f64>,
    pub scale: f64,
}

impl ScaledSeries {
    /// Mean-absolute scaling; a zero mean magnitude falls back to scale 1.
    pub fn mean_scaled(series: &[f64]) -> ScaledSeries {
        let m = stats::mean(&series.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let scale = if m > 0.0 && m.is_finite() { m } else { 1.0 };
        ScaledSeries { values: series.iter().map(|x| x / scale).collect(), scale }
    }
}

/// Uniform bins over `[-clip, clip]` plus PAD and EOS.
///
/// Bins are left-inclusive `[e_k, e_{k+1})` except the last, which is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenVocab {
    n_bins: usize,
    clip: f64,
    edges: Vec<f64>,
}

impl Default for TokenVocab {
    fn default() -> Self {
        TokenVocab::new(256, 4.0).expect("valid default vocabulary")
    }
}

impl TokenVocab {
    pub fn new(n_bins: usize, clip: f64) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::Config(format!("need at least 2 bins, got {n_bins}")));
        }
        if !(clip > 0.0 && clip.is_finite()) {
            return Err(Error::Config(format!("clip limit {clip} must be positive")));
        }
        if n_bins as u64 + Token::FIRST_VALUE as u64 > u32::MAX as u64 {
            return Err(Error::Config("vocabulary too large".into()));
        }
        let width = 2.0 * clip / n_bins as f64;
        let mut edges: Vec<f64> = (0..n_bins).map(|i| -clip + i as f64 * width).collect();
        edges.push(clip);
        Ok(TokenVocab { n_bins, clip, edges })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Total vocabulary size including the two special tokens.
    pub fn size(&self) -> usize {
        self.n_bins + Token::FIRST_VALUE as usize
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.clip / self.n_bins as f64
    }

    /// Bin of a scaled value after clipping to `[-clip, clip]`.
    pub fn bin_of(&self, scaled: f64) -> usize {
        let x = scaled.clamp(-self.clip, self.clip);
        let k = self.edges.partition_point(|&e| e <= x).saturating_sub(1);
        k.min(self.n_bins - 1)
    }

    pub fn token_of_bin(&self, bin: usize) -> Token {
        Token(bin as u32 + Token::FIRST_VALUE)
    }

    pub fn bin_of_token(&self, token: Token) -> Option<usize> {
        if token.is_special() {
            return None;
        }
        let k = (token.0 - Token::FIRST_VALUE) as usize;
        (k < self.n_bins).then_some(k)
    }

    pub fn center(&self, bin: usize) -> f64 {
        0.5 * (self.edges[bin] + self.edges[bin + 1])
    }

    pub fn is_valid(&self, token: Token) -> bool {
        (token.0 as usize) < self.size()
    }
}

/// Scales by the mean absolute value and quantizes into value tokens.
pub fn tokenize(context: &[f64], vocab: &TokenVocab) -> (TokenSeries, f64) {
    let scaled = ScaledSeries::mean_scaled(context);
    (tokenize_with_scale(&scaled.values, 1.0, vocab), scaled.scale)
}

/// Quantizes `series / scale` with a caller-supplied scale.
pub fn tokenize_with_scale(series: &[f64], scale: f64, vocab: &TokenVocab) -> TokenSeries {
    TokenSeries::new(series.iter().map(|x| vocab.token_of_bin(vocab.bin_of(x / scale))).collect())
}

/// Maps value tokens back to bin centers times `scale`.
pub fn detokenize(tokens: &[Token], scale: f64, vocab: &TokenVocab) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|&t| {
            vocab
                .bin_of_token(t)
                .map(|k| vocab.center(k) * scale)
                .ok_or_else(|| Error::Domain(format!("token {} is not a value token", t.0)))
        })
        .collect()
}
