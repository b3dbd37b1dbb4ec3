//! Runners for the two compression-rate experiments: data sampled from a
//! random HMM, and held-out text under an HMM trained with EM. Both produce
//! one [`ExperimentRecord`] per sequence length.

use std::io::Write;
use std::ops::Range;
use std::path::PathBuf;

use iconoclasm::hmm::em_fit;
use iconoclasm::{codec, CodecConfig, Hmm, RateReport, SplitMix64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{load_corpus, Alphabet};
use crate::error::{Error, Result};

/// One CSV row: `T,l_init_bits,l_final_bits,h_bits,ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    #[serde(rename = "T")]
    pub t: usize,
    pub l_init_bits: u64,
    pub l_final_bits: u64,
    pub h_bits: f64,
    pub ratio: f64,
}

impl From<RateReport> for ExperimentRecord {
    fn from(r: RateReport) -> Self {
        Self {
            t: r.t,
            l_init_bits: r.l_init,
            l_final_bits: r.l_final,
            h_bits: r.h_model,
            ratio: r.ratio,
        }
    }
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Lengths `10^2, 10^2.5, ..., 10^5`.
pub fn default_lengths() -> Vec<usize> {
    vec![100, 316, 1000, 3162, 10_000, 31_623, 100_000]
}

/// Random-model experiment: for each seed, draw an HMM with Dirichlet
/// parameters and an exact sample from it, then code prefixes of each length
/// with the interleaved codec.
#[derive(Debug, Clone)]
pub struct PerfectExperiment {
    pub states: usize,
    pub symbols: usize,
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub lengths: Vec<usize>,
    pub config: CodecConfig,
}

impl Default for PerfectExperiment {
    fn default() -> Self {
        Self {
            states: 64,
            symbols: 64,
            alpha: 1.0,
            seeds: vec![0],
            lengths: default_lengths(),
            config: CodecConfig::default(),
        }
    }
}

/// Model and sample for one seed.
pub fn perfect_instance(
    states: usize,
    symbols: usize,
    alpha: f64,
    seed: u64,
    len: usize,
) -> (Hmm, Vec<usize>) {
    let mut rng = SplitMix64::new(seed);
    let hmm = Hmm::sample_params(states, symbols, alpha, rng.next());
    let (xs, _) = hmm.sample_sequence(len, rng.next());
    (hmm, xs)
}

impl PerfectExperiment {
    /// Rows grouped by seed, each group in the order of `lengths`.
    pub fn run(&self) -> Result<Vec<(u64, Vec<ExperimentRecord>)>> {
        if self.lengths.is_empty() || self.lengths.contains(&0) {
            return Err(Error::Input(
                "lengths must be non-empty and positive".into(),
            ));
        }
        let longest = *self.lengths.iter().max().unwrap();
        self.seeds
            .iter()
            .map(|&seed| {
                let (hmm, xs) =
                    perfect_instance(self.states, self.symbols, self.alpha, seed, longest);
                let records = self
                    .lengths
                    .par_iter()
                    .map(|&len| {
                        let (_, report) = codec::encode_iconoclasm(&hmm, &xs[..len], &self.config)?;
                        Ok(report.into())
                    })
                    .collect::<Result<Vec<ExperimentRecord>>>()?;
                Ok((seed, records))
            })
            .collect()
    }
}

/// Held-out text experiment: train on the first `train_chars` characters,
/// then code spans of each test length starting right after the training
/// section.
#[derive(Debug, Clone)]
pub struct TextExperiment {
    pub corpus: PathBuf,
    pub train_chars: usize,
    pub test_lengths: Vec<usize>,
    pub states: usize,
    pub iterations: usize,
    pub seed: u64,
    pub smoothing: f64,
    pub config: CodecConfig,
}

impl TextExperiment {
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        Self {
            corpus: corpus.into(),
            train_chars: 100_000,
            test_lengths: vec![100, 316, 1000, 3162, 10_000, 31_623, 50_000],
            states: 64,
            iterations: 100,
            seed: 0,
            smoothing: 1e-6,
            config: CodecConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TextOutcome {
    pub alphabet: Alphabet,
    pub hmm: Hmm,
    pub log_likelihoods: Vec<f64>,
    pub train_range: Range<usize>,
    pub test_ranges: Vec<Range<usize>>,
    pub records: Vec<ExperimentRecord>,
}

impl TextExperiment {
    pub fn run(&self) -> Result<TextOutcome> {
        let (alphabet, text) = load_corpus(&self.corpus, None)?;
        let longest = self.test_lengths.iter().copied().max().unwrap_or(0);
        if self.test_lengths.is_empty() || self.test_lengths.contains(&0) {
            return Err(Error::Input(
                "test lengths must be non-empty and positive".into(),
            ));
        }
        if self.train_chars + longest > text.len() {
            return Err(Error::Input(format!(
                "corpus has {} characters, need {} for training plus {} for testing",
                text.len(),
                self.train_chars,
                longest
            )));
        }
        let train_range = 0..self.train_chars;
        let fit = em_fit(
            &text[train_range.clone()],
            self.states,
            alphabet.len(),
            self.iterations,
            self.seed,
            self.smoothing,
        )?;
        let test_ranges: Vec<Range<usize>> = self
            .test_lengths
            .iter()
            .map(|&len| self.train_chars..self.train_chars + len)
            .collect();
        let records = test_ranges
            .par_iter()
            .map(|range| {
                let (_, report) =
                    codec::encode_iconoclasm(&fit.hmm, &text[range.clone()], &self.config)?;
                Ok(report.into())
            })
            .collect::<Result<Vec<ExperimentRecord>>>()?;
        Ok(TextOutcome {
            alphabet,
            hmm: fit.hmm,
            log_likelihoods: fit.log_likelihoods,
            train_range,
            test_ranges,
            records,
        })
    }
}
