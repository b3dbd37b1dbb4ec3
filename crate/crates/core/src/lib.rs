//! Lossless compression with hidden Markov models by interleaving bits-back
//! steps with the model's timesteps.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`ans`]: a 64-bit-head rANS coder over a LIFO [`Message`] with exactly
//!   invertible `push`/`pop`.
//! - [`quantize`]: deterministic conversion of probability vectors into
//!   integer frequency tables ([`QuantizedCategorical`]).
//! - [`hmm`]: discrete HMMs, scaled forward filtering, exact posterior
//!   conditionals and Baum–Welch training.
//! - [`codec`]: the interleaved bits-back codec, a vanilla ANS baseline and a
//!   whole-sequence bits-back baseline.
//!
//! ```
//! use iconoclasm::{codec, CodecConfig, Hmm};
//!
//! let hmm = Hmm::sample_params(4, 6, 1.0, 7);
//! let (x, _z) = hmm.sample_sequence(50, 11);
//! let cfg = CodecConfig::default();
//! let (message, report) = codec::encode_iconoclasm(&hmm, &x, &cfg).unwrap();
//! let (decoded, restored) = codec::decode_iconoclasm(&hmm, x.len(), message, &cfg).unwrap();
//! assert_eq!(decoded, x);
//! assert_eq!(restored, cfg.initial_message());
//! assert!(report.ratio > 0.0);
//! ```

#![no_std]

extern crate alloc;

pub mod ans;
pub mod codec;
mod error;
pub mod hmm;
pub mod quantize;
pub mod rng;

pub use ans::{FreqSpan, Message};
pub use codec::{CodecConfig, CodecKind, RateReport};
pub use error::{Error, Result};
pub use hmm::{FilterState, Hmm};
pub use quantize::QuantizedCategorical;
pub use rng::SplitMix64;
