//! Baum–Welch training with scaled forward-backward messages.

use alloc::vec;
use alloc::vec::Vec;

use super::Hmm;
use crate::error::{Error, Result};

/// Result of [`em_fit`].
#[derive(Debug, Clone)]
pub struct EmFit {
    pub hmm: Hmm,
    /// Corpus log-likelihood in nats under the parameters entering each
    /// iteration (`log_likelihoods[0]` is the initialization).
    pub log_likelihoods: Vec<f64>,
}

/// Expected sufficient statistics from one E-step.
struct Stats {
    log_likelihood: f64,
    first: Vec<f64>,
    transitions: Vec<f64>,
    emissions: Vec<f64>,
}

/// Train a `states`-state HMM on `corpus` for `iterations` EM steps.
///
/// Parameters start from `Hmm::sample_params(states, symbols, 1.0, seed)`.
/// After training, `smoothing` is added to every entry of the initial
/// distribution and of each transition and emission row, which are then
/// renormalized, so that no event keeps probability zero.
pub fn em_fit(
    corpus: &[usize],
    states: usize,
    symbols: usize,
    iterations: usize,
    seed: u64,
    smoothing: f64,
) -> Result<EmFit> {
    if states == 0 || symbols == 0 {
        return Err(Error::InvalidArgument("K and V must be positive"));
    }
    if corpus.len() < 2 {
        return Err(Error::InvalidArgument(
            "training corpus needs at least two symbols",
        ));
    }
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        return Err(Error::InvalidArgument(
            "smoothing must be finite and non-negative",
        ));
    }
    if let Some(&symbol) = corpus.iter().find(|&&x| x >= symbols) {
        return Err(Error::SymbolOutOfRange {
            symbol,
            size: symbols,
        });
    }

    let mut hmm = Hmm::sample_params(states, symbols, 1.0, seed);
    let mut log_likelihoods = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let stats = expectations(&hmm, corpus)?;
        log_likelihoods.push(stats.log_likelihood);
        maximize(&mut hmm, &stats);
    }

    smooth(&mut hmm.initial, states, smoothing);
    smooth(&mut hmm.transition, states, smoothing);
    smooth(&mut hmm.emission, symbols, smoothing);
    Ok(EmFit {
        hmm,
        log_likelihoods,
    })
}

fn expectations(hmm: &Hmm, xs: &[usize]) -> Result<Stats> {
    let k = hmm.states;
    let v = hmm.symbols;
    let len = xs.len();
    let a = &hmm.transition;
    let b = &hmm.emission;

    // Forward: normalized messages and their normalizers.
    let mut alpha = vec![0.0; len * k];
    let mut scale = vec![0.0; len];
    for t in 0..len {
        let (done, rest) = alpha.split_at_mut(t * k);
        let cur = &mut rest[..k];
        if t == 0 {
            cur.copy_from_slice(&hmm.initial);
        } else {
            let prev = &done[(t - 1) * k..];
            for (i, &p) in prev.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (c, &tr) in cur.iter_mut().zip(&a[i * k..(i + 1) * k]) {
                    *c += p * tr;
                }
            }
        }
        let x = xs[t];
        let mut c = 0.0;
        for (i, value) in cur.iter_mut().enumerate() {
            *value *= b[i * v + x];
            c += *value;
        }
        if c.is_nan() || c <= 0.0 {
            return Err(Error::ZeroLikelihood { t: t + 1 });
        }
        cur.iter_mut().for_each(|value| *value /= c);
        scale[t] = c;
    }
    let log_likelihood = scale.iter().map(|c| libm::log(*c)).sum();

    // Backward, accumulating posterior marginals and pair counts on the fly.
    let mut first = vec![0.0; k];
    let mut transitions = vec![0.0; k * k];
    let mut emissions = vec![0.0; k * v];
    let mut beta = vec![1.0; k];
    let mut weighted = vec![0.0; k];
    let mut add_gamma = |t: usize, beta: &[f64], emissions: &mut [f64]| {
        let x = xs[t];
        for i in 0..k {
            let gamma = alpha[t * k + i] * beta[i];
            emissions[i * v + x] += gamma;
            if t == 0 {
                first[i] = gamma;
            }
        }
    };
    add_gamma(len - 1, &beta, &mut emissions);
    for t in (0..len - 1).rev() {
        let x_next = xs[t + 1];
        for j in 0..k {
            weighted[j] = b[j * v + x_next] * beta[j] / scale[t + 1];
        }
        for i in 0..k {
            let row = &a[i * k..(i + 1) * k];
            let alpha_ti = alpha[t * k + i];
            let mut acc = 0.0;
            let pairs = &mut transitions[i * k..(i + 1) * k];
            for j in 0..k {
                let w = row[j] * weighted[j];
                acc += w;
                pairs[j] += alpha_ti * w;
            }
            beta[i] = acc;
        }
        add_gamma(t, &beta, &mut emissions);
    }

    Ok(Stats {
        log_likelihood,
        first,
        transitions,
        emissions,
    })
}

/// Normalize each row of `counts` into `target`; rows with no mass keep
/// their previous values.
fn normalize_rows(target: &mut [f64], counts: &[f64], row_len: usize) {
    for (row, count) in target
        .chunks_exact_mut(row_len)
        .zip(counts.chunks_exact(row_len))
    {
        let total: f64 = count.iter().sum();
        if total > 0.0 {
            for (r, c) in row.iter_mut().zip(count) {
                *r = c / total;
            }
        }
    }
}

fn maximize(hmm: &mut Hmm, stats: &Stats) {
    normalize_rows(&mut hmm.initial, &stats.first, hmm.states);
    normalize_rows(&mut hmm.transition, &stats.transitions, hmm.states);
    normalize_rows(&mut hmm.emission, &stats.emissions, hmm.symbols);
}

fn smooth(values: &mut [f64], row_len: usize, delta: f64) {
    for row in values.chunks_exact_mut(row_len) {
        row.iter_mut().for_each(|p| *p += delta);
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_learns_smoothed_unigram() {
        let corpus = [0, 1, 1, 2, 1, 0, 1, 1];
        let delta = 1e-3;
        let fit = em_fit(&corpus, 1, 4, 1, 5, delta).unwrap();
        let counts = [2.0, 5.0, 1.0, 0.0];
        for (v, c) in counts.iter().enumerate() {
            let expected = (c / 8.0 + delta) / (1.0 + 4.0 * delta);
            assert!((fit.hmm.emission_row(0)[v] - expected).abs() < 1e-12);
        }
        assert_eq!(fit.hmm.initial(), &[1.0]);
        assert_eq!(fit.log_likelihoods.len(), 1);
    }

    #[test]
    fn trace_is_monotone() {
        let truth = Hmm::sample_params(3, 5, 1.0, 21);
        let (x, _) = truth.sample_sequence(500, 22);
        let fit = em_fit(&x, 4, 5, 30, 1, 0.0).unwrap();
        for pair in fit.log_likelihoods.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9 * pair[0].abs(), "{pair:?}");
        }
    }

    #[test]
    fn smoothing_removes_zeros() {
        // Symbol 3 never occurs in training.
        let fit = em_fit(&[0, 1, 2, 0, 1, 2, 0, 1], 2, 4, 10, 0, 1e-6).unwrap();
        assert!(fit.hmm.emission().iter().all(|&p| p > 0.0));
        assert!(fit.hmm.info_content(&[3, 3, 3]).is_ok());
        Hmm::new(
            2,
            4,
            fit.hmm.initial().to_vec(),
            fit.hmm.transition().to_vec(),
            fit.hmm.emission().to_vec(),
        )
        .unwrap();
    }

    #[test]
    fn trace_matches_forward_filter() {
        let truth = Hmm::sample_params(3, 4, 1.0, 2);
        let (x, _) = truth.sample_sequence(200, 3);
        let init = Hmm::sample_params(3, 4, 1.0, 9);
        let fit = em_fit(&x, 3, 4, 1, 9, 0.0).unwrap();
        let expected = init.log_likelihood(&x).unwrap();
        assert!((fit.log_likelihoods[0] - expected).abs() < 1e-9 * expected.abs());
    }

    #[test]
    fn argument_errors() {
        assert!(em_fit(&[0, 1], 0, 2, 1, 0, 0.0).is_err());
        assert!(em_fit(&[0], 2, 2, 1, 0, 0.0).is_err());
        assert!(em_fit(&[], 2, 2, 1, 0, 0.0).is_err());
        assert!(matches!(
            em_fit(&[0, 5], 2, 2, 1, 0, 0.0),
            Err(Error::SymbolOutOfRange { .. })
        ));
    }
}
