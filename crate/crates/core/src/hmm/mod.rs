//! Discrete hidden Markov models.
//!
//! Filtering uses the scaled forward recursion: the filter carries the
//! normalized message `P(z_t | x_1..x_t)` and accumulates `-log2` of the
//! normalizers `P(x_t | x_1..x_{t-1})`, whose sum is the information content
//! of the sequence. The same normalized messages give the exact posterior
//! conditionals used by the bits-back codecs.

mod em;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub use em::{em_fit, EmFit};

/// Tolerance on row sums accepted by [`Hmm::new`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A discrete HMM with `K` hidden states and `V` observation symbols.
///
/// Matrices are row-major: `transition[i * K + j] = P(z_t = j | z_{t-1} = i)`
/// and `emission[i * V + v] = P(x_t = v | z_t = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hmm {
    states: usize,
    symbols: usize,
    initial: Vec<f64>,
    transition: Vec<f64>,
    emission: Vec<f64>,
}

/// Normalized forward message after `t` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    /// Number of observations absorbed. `t = 0` is the prior.
    pub t: usize,
    /// `P(z_t | x_1..x_t)`; for `t = 0` this is the initial distribution.
    pub alpha_bar: Vec<f64>,
    /// `-Σ_{s<=t} log2 P(x_s | x_1..x_{s-1})`, in bits.
    pub h_accum: f64,
}

fn check_stochastic(values: &[f64], row_len: usize, what: &'static str) -> Result<()> {
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidModel(what));
    }
    for row in values.chunks_exact(row_len) {
        let sum: f64 = row.iter().sum();
        if libm::fabs(sum - 1.0) > ROW_SUM_TOLERANCE {
            return Err(Error::InvalidModel(what));
        }
    }
    Ok(())
}

fn normalize_in_place(values: &mut [f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    sum
}

/// Draw from Dirichlet(alpha, ..., alpha) as normalized Gamma variates.
fn dirichlet(rng: &mut SplitMix64, len: usize, gamma: &Gamma<f64>) -> Vec<f64> {
    loop {
        let mut draw: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        // All-zero draws only happen for tiny alpha; redraw.
        if normalize_in_place(&mut draw) > 0.0 {
            return draw;
        }
    }
}

fn sample_categorical(rng: &mut SplitMix64, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the running sum; fall back to the last
    // symbol with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

impl Hmm {
    pub fn new(
        states: usize,
        symbols: usize,
        initial: Vec<f64>,
        transition: Vec<f64>,
        emission: Vec<f64>,
    ) -> Result<Self> {
        if states == 0 || symbols == 0 {
            return Err(Error::InvalidModel(
                "state and symbol counts must be positive",
            ));
        }
        if initial.len() != states
            || transition.len() != states * states
            || emission.len() != states * symbols
        {
            return Err(Error::InvalidModel("parameter shapes do not match K and V"));
        }
        check_stochastic(
            &initial,
            states,
            "initial distribution is not a probability vector",
        )?;
        check_stochastic(
            &transition,
            states,
            "transition rows are not probability vectors",
        )?;
        check_stochastic(
            &emission,
            symbols,
            "emission rows are not probability vectors",
        )?;
        Ok(Self {
            states,
            symbols,
            initial,
            transition,
            emission,
        })
    }

    /// Random parameters with the initial distribution and every row of the
    /// transition and emission matrices drawn i.i.d. from a symmetric
    /// Dirichlet with concentration `alpha`.
    ///
    /// # Panics
    ///
    /// If `states` or `symbols` is zero or `alpha` is not positive.
    pub fn sample_params(states: usize, symbols: usize, alpha: f64, seed: u64) -> Self {
        assert!(states > 0 && symbols > 0, "K and V must be positive");
        let gamma = Gamma::new(alpha, 1.0).expect("alpha must be positive and finite");
        let mut rng = SplitMix64::new(seed);
        let initial = dirichlet(&mut rng, states, &gamma);
        let transition = (0..states)
            .flat_map(|_| dirichlet(&mut rng, states, &gamma))
            .collect();
        let emission = (0..states)
            .flat_map(|_| dirichlet(&mut rng, symbols, &gamma))
            .collect();
        Self {
            states,
            symbols,
            initial,
            transition,
            emission,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn emission(&self) -> &[f64] {
        &self.emission
    }

    pub fn transition_row(&self, from: usize) -> &[f64] {
        &self.transition[from * self.states..(from + 1) * self.states]
    }

    pub fn emission_row(&self, state: usize) -> &[f64] {
        &self.emission[state * self.symbols..(state + 1) * self.symbols]
    }

    fn check_symbol(&self, symbol: usize) -> Result<()> {
        if symbol >= self.symbols {
            return Err(Error::SymbolOutOfRange {
                symbol,
                size: self.symbols,
            });
        }
        Ok(())
    }

    /// Ancestral sample of `(observations, latents)`.
    pub fn sample_sequence(&self, len: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let mut rng = SplitMix64::new(seed);
        let mut xs = Vec::with_capacity(len);
        let mut zs = Vec::with_capacity(len);
        for t in 0..len {
            let z = if t == 0 {
                sample_categorical(&mut rng, &self.initial)
            } else {
                sample_categorical(&mut rng, self.transition_row(zs[t - 1]))
            };
            zs.push(z);
            xs.push(sample_categorical(&mut rng, self.emission_row(z)));
        }
        (xs, zs)
    }

    /// Filter state before any observation.
    pub fn prior_state(&self) -> FilterState {
        FilterState {
            t: 0,
            alpha_bar: self.initial.clone(),
            h_accum: 0.0,
        }
    }

    /// `P(z_{t+1} | x_1..x_t)`: the initial distribution at `t = 0`,
    /// otherwise `alpha_bar^T A`.
    pub fn latent_predictive(&self, fs: &FilterState) -> Vec<f64> {
        if fs.t == 0 {
            return fs.alpha_bar.clone();
        }
        let k = self.states;
        let mut pred = vec![0.0; k];
        for (i, &a) in fs.alpha_bar.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (p, &tr) in pred.iter_mut().zip(self.transition_row(i)) {
                *p += a * tr;
            }
        }
        pred
    }

    /// `P(x_{t+1} = v | x_1..x_t)` for every `v`.
    pub fn predictive(&self, fs: &FilterState) -> Vec<f64> {
        let pred = self.latent_predictive(fs);
        let mut out = vec![0.0; self.symbols];
        for (i, &p) in pred.iter().enumerate() {
            for (o, &e) in out.iter_mut().zip(self.emission_row(i)) {
                *o += p * e;
            }
        }
        out
    }

    pub fn filter_step(&self, fs: &FilterState, x: usize) -> Result<FilterState> {
        self.check_symbol(x)?;
        let mut alpha_bar = self.latent_predictive(fs);
        for (i, a) in alpha_bar.iter_mut().enumerate() {
            *a *= self.emission[i * self.symbols + x];
        }
        let c = normalize_in_place(&mut alpha_bar);
        if c.is_nan() || c <= 0.0 {
            return Err(Error::ZeroLikelihood { t: fs.t + 1 });
        }
        Ok(FilterState {
            t: fs.t + 1,
            alpha_bar,
            h_accum: fs.h_accum - libm::log2(c),
        })
    }

    pub fn filter_init(&self, x: usize) -> Result<FilterState> {
        self.filter_step(&self.prior_state(), x)
    }

    /// Filter states after each of `xs`; entry `t - 1` holds the state at
    /// time `t`.
    pub fn forward(&self, xs: &[usize]) -> Result<Vec<FilterState>> {
        let mut states = Vec::with_capacity(xs.len());
        let mut fs = self.prior_state();
        for &x in xs {
            fs = self.filter_step(&fs, x)?;
            states.push(fs.clone());
        }
        Ok(states)
    }

    /// Information content `log2 1/P(x)` in bits.
    pub fn info_content(&self, xs: &[usize]) -> Result<f64> {
        let mut fs = self.prior_state();
        for &x in xs {
            fs = self.filter_step(&fs, x)?;
        }
        Ok(fs.h_accum)
    }

    /// `ln P(x)` in nats.
    pub fn log_likelihood(&self, xs: &[usize]) -> Result<f64> {
        Ok(-self.info_content(xs)? * core::f64::consts::LN_2)
    }

    /// `P(z_T | x_1..x_T)` given the final filter state.
    pub fn posterior_last(&self, fs: &FilterState) -> Vec<f64> {
        fs.alpha_bar.clone()
    }

    /// `P(z_t | x_1..x_t, z_{t+1} = next)` given the filter state at `t`.
    pub fn posterior_step(&self, fs: &FilterState, next: usize) -> Result<Vec<f64>> {
        if next >= self.states {
            return Err(Error::SymbolOutOfRange {
                symbol: next,
                size: self.states,
            });
        }
        let k = self.states;
        let mut post: Vec<f64> = fs
            .alpha_bar
            .iter()
            .enumerate()
            .map(|(i, &a)| a * self.transition[i * k + next])
            .collect();
        let total = normalize_in_place(&mut post);
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroLikelihood { t: fs.t + 1 });
        }
        Ok(post)
    }
}
