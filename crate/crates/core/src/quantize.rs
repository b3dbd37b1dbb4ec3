//! Integer frequency tables for ANS.
//!
//! [`QuantizedCategorical::new`] apportions `2^precision` among the symbols
//! by largest remainder, with every symbol getting at least one unit so that
//! any value can always be pushed or popped. Encoder and decoder rely on
//! building identical tables from identical inputs, so the construction is
//! a fixed sequence of f64 operations with index tie-breaking.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::ans::{FreqSpan, Message, MAX_PRECISION};
use crate::error::{Error, Result};

/// Tolerance on `|Σp - 1|` accepted by [`QuantizedCategorical::new`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedCategorical {
    /// Exclusive prefix sums of the frequencies, `n + 1` entries.
    cumfreqs: Vec<u32>,
    precision: u32,
}

impl QuantizedCategorical {
    pub fn new(probs: &[f64], precision: u32) -> Result<Self> {
        let freqs = apportion(probs, precision)?;
        Ok(Self::from_freqs_unchecked(&freqs, precision))
    }

    /// Like [`new`](Self::new) but accepts any non-negative vector with a
    /// positive finite sum and normalizes it first.
    pub fn from_weights(weights: &[f64], precision: u32) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidDistribution(
                "weights do not have a positive finite sum",
            ));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::new(&probs, precision)
    }

    pub fn from_freqs(freqs: &[u32], precision: u32) -> Result<Self> {
        check_precision(precision)?;
        if freqs.is_empty() || freqs.contains(&0) {
            return Err(Error::InvalidDistribution("frequencies must be positive"));
        }
        let total: u64 = freqs.iter().map(|&f| u64::from(f)).sum();
        if total != 1u64 << precision {
            return Err(Error::InvalidDistribution(
                "frequencies must sum to 2^precision",
            ));
        }
        Ok(Self::from_freqs_unchecked(freqs, precision))
    }

    fn from_freqs_unchecked(freqs: &[u32], precision: u32) -> Self {
        let mut cumfreqs = Vec::with_capacity(freqs.len() + 1);
        let mut acc = 0u32;
        cumfreqs.push(0);
        for &f in freqs {
            acc += f;
            cumfreqs.push(acc);
        }
        Self {
            cumfreqs,
            precision,
        }
    }

    pub fn len(&self) -> usize {
        self.cumfreqs.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    fn total(&self) -> u32 {
        1 << self.precision
    }

    pub fn freq(&self, symbol: usize) -> u32 {
        self.cumfreqs[symbol + 1] - self.cumfreqs[symbol]
    }

    pub fn freqs(&self) -> Vec<u32> {
        (0..self.len()).map(|s| self.freq(s)).collect()
    }

    /// Exclusive prefix sums; the last entry is `2^precision`.
    pub fn cumfreqs(&self) -> &[u32] {
        &self.cumfreqs
    }

    /// Quantized probability of `symbol`.
    pub fn prob(&self, symbol: usize) -> f64 {
        f64::from(self.freq(symbol)) / f64::from(self.total())
    }

    pub fn span_of(&self, symbol: usize) -> Result<FreqSpan> {
        if symbol >= self.len() {
            return Err(Error::SymbolOutOfRange {
                symbol,
                size: self.len(),
            });
        }
        FreqSpan::new(self.cumfreqs[symbol], self.freq(symbol), self.precision)
    }

    /// The symbol whose span contains `cum`.
    pub fn symbol_of(&self, cum: u32) -> usize {
        debug_assert!(cum < self.total());
        // First index whose start exceeds cum, minus one. Spans are
        // non-empty so starts are strictly increasing.
        self.cumfreqs[..self.len()].partition_point(|&c| c <= cum) - 1
    }

    pub fn push(&self, message: &mut Message, symbol: usize) -> Result<()> {
        message.push(self.span_of(symbol)?);
        Ok(())
    }

    pub fn pop(&self, message: &mut Message) -> Result<usize> {
        message.pop(self.precision, |cum| {
            let s = self.symbol_of(cum);
            Ok((s, self.span_of(s)?))
        })
    }
}

fn check_precision(precision: u32) -> Result<()> {
    if precision == 0 || precision > MAX_PRECISION {
        Err(Error::InvalidPrecision(precision))
    } else {
        Ok(())
    }
}

/// Largest-remainder apportionment of `p · 2^precision` with a floor of one.
///
/// 1. `f_i = floor(p_i · 2^precision)`; the shortfall is handed out one unit
///    at a time in decreasing order of remainder, lowest index first on ties.
/// 2. Zero entries are raised to one.
/// 3. Any remaining surplus or deficit goes to the largest entry (lowest
///    index on ties). A surplus larger than that entry can absorb while
///    staying at one moves on to the next largest.
pub(crate) fn apportion(probs: &[f64], precision: u32) -> Result<Vec<u32>> {
    check_precision(precision)?;
    let n = probs.len();
    if n == 0 {
        return Err(Error::InvalidDistribution("empty probability vector"));
    }
    if n as u64 > 1u64 << precision {
        return Err(Error::Capacity {
            symbols: n,
            precision,
        });
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidDistribution(
            "entries must be finite and non-negative",
        ));
    }
    let sum: f64 = probs.iter().sum();
    if libm::fabs(sum - 1.0) > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidDistribution("entries must sum to 1"));
    }

    let total = 1u64 << precision;
    let scale = total as f64;
    let mut freqs = Vec::with_capacity(n);
    let mut remainders = Vec::with_capacity(n);
    for &p in probs {
        let ideal = p * scale;
        let floor = libm::floor(ideal);
        freqs.push(floor as u64);
        remainders.push(ideal - floor);
    }

    let assigned: u64 = freqs.iter().sum();
    if assigned < total {
        let shortfall = ((total - assigned) as usize).min(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            remainders[j]
                .partial_cmp(&remainders[i])
                .unwrap_or(Ordering::Equal)
                .then(i.cmp(&j))
        });
        for &i in &order[..shortfall] {
            freqs[i] += 1;
        }
    }

    for f in freqs.iter_mut() {
        if *f == 0 {
            *f = 1;
        }
    }

    let assigned: u64 = freqs.iter().sum();
    if assigned < total {
        let i = argmax(&freqs);
        freqs[i] += total - assigned;
    } else {
        let mut surplus = assigned - total;
        while surplus > 0 {
            let i = argmax_where(&freqs, |f| f > 1);
            let take = surplus.min(freqs[i] - 1);
            freqs[i] -= take;
            surplus -= take;
        }
    }

    Ok(freqs.into_iter().map(|f| f as u32).collect())
}

fn argmax(values: &[u64]) -> usize {
    argmax_where(values, |_| true)
}

/// First index of the largest value among those satisfying `keep`.
fn argmax_where(values: &[u64], keep: impl Fn(u64) -> bool) -> usize {
    let mut best = usize::MAX;
    for (i, &v) in values.iter().enumerate() {
        if keep(v) && (best == usize::MAX || v > values[best]) {
            best = i;
        }
    }
    best
}
