//! Lossless codecs for observation sequences under an [`Hmm`].
//!
//! - [`encode_iconoclasm`] interleaves one bits-back step per timestep: the
//!   encoder walks backwards through the sequence, pushing `x_t | z_t`,
//!   popping `z_{t-1}` from the exact posterior conditional given the filter
//!   state at `t - 1` and `z_t`, then pushing `z_t | z_{t-1}`. Only the first
//!   pop (of `z_T`) has to be served by the initial buffer, so the buffer
//!   size does not grow with `T`.
//! - [`encode_vanilla`] pushes each `x_t` with the predictive distribution
//!   `P(x_t | x_1..x_{t-1})`; no latents, no pops.
//! - [`encode_naive_bbans`] pops the whole latent path before pushing
//!   anything, so its initial buffer must hold the entropy of the full
//!   posterior path.
//!
//! Each decoder runs the exact reverse sequence of operations and hands back
//! the base message it started from.

use alloc::vec::Vec;

use crate::ans::{Message, MAX_PRECISION};
use crate::error::{Error, Result};
use crate::hmm::{FilterState, Hmm};
use crate::quantize::QuantizedCategorical;

/// Supported precision range for codec tables.
pub const PRECISION_RANGE: core::ops::RangeInclusive<u32> = 8..=24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodecConfig {
    /// Bits of precision of every quantized table.
    pub precision: u32,
    /// 32-bit words in the initial message tail.
    pub init_words: usize,
    /// Seed for the initial tail words.
    pub init_seed: u64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            precision: 16,
            init_words: 4,
            init_seed: 0,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        if !PRECISION_RANGE.contains(&self.precision) {
            return Err(Error::InvalidPrecision(self.precision));
        }
        debug_assert!(self.precision <= MAX_PRECISION);
        Ok(())
    }

    pub fn initial_message(&self) -> Message {
        Message::init(self.init_words, self.init_seed)
    }

    pub fn with_init_words(self, init_words: usize) -> Self {
        Self { init_words, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecKind {
    Iconoclasm,
    Vanilla,
    NaiveBbAns,
}

impl CodecKind {
    pub const ALL: [CodecKind; 3] = [
        CodecKind::Iconoclasm,
        CodecKind::Vanilla,
        CodecKind::NaiveBbAns,
    ];

    /// Identifier byte used in compressed files.
    pub fn id(self) -> u8 {
        match self {
            CodecKind::Iconoclasm => 0,
            CodecKind::Vanilla => 1,
            CodecKind::NaiveBbAns => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecKind::Iconoclasm => "iconoclasm",
            CodecKind::Vanilla => "vanilla",
            CodecKind::NaiveBbAns => "naive-bbans",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl core::fmt::Display for CodecKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Message lengths for one encoding, against the model's information
/// content of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// Sequence length.
    pub t: usize,
    /// Length of the base message, bits.
    pub l_init: u64,
    /// Length of the final message including the base message, bits.
    pub l_final: u64,
    /// `log2 1/P(x)` under the model, bits.
    pub h_model: f64,
    /// `l_final / h_model`.
    pub ratio: f64,
}

impl RateReport {
    fn new(t: usize, initial: &Message, last: &Message, h_model: f64) -> Self {
        let l_init = initial.length_bits();
        let l_final = last.length_bits();
        let ratio = if h_model > 0.0 {
            l_final as f64 / h_model
        } else {
            f64::INFINITY
        };
        Self {
            t,
            l_init,
            l_final,
            h_model,
            ratio,
        }
    }

    /// Bits added on top of the base message. Can be negative when an
    /// encoding consumed more initial bits than it pushed.
    pub fn net_bits(&self) -> i64 {
        self.l_final as i64 - self.l_init as i64
    }

    /// `net_bits / h_model`.
    pub fn net_ratio(&self) -> f64 {
        self.net_bits() as f64 / self.h_model
    }
}

/// Quantized initial, transition and emission rows, built once per call.
struct Tables {
    initial: QuantizedCategorical,
    transition: Vec<QuantizedCategorical>,
    emission: Vec<QuantizedCategorical>,
    precision: u32,
}

impl Tables {
    fn new(hmm: &Hmm, precision: u32) -> Result<Self> {
        let k = hmm.states();
        Ok(Self {
            initial: QuantizedCategorical::new(hmm.initial(), precision)?,
            transition: (0..k)
                .map(|i| QuantizedCategorical::new(hmm.transition_row(i), precision))
                .collect::<Result<_>>()?,
            emission: (0..k)
                .map(|i| QuantizedCategorical::new(hmm.emission_row(i), precision))
                .collect::<Result<_>>()?,
            precision,
        })
    }

    fn quantize(&self, probs: &[f64]) -> Result<QuantizedCategorical> {
        QuantizedCategorical::new(probs, self.precision)
    }
}

/// Message wrapper recording the shallowest tail depth reached by pops.
struct Tracked<'a> {
    message: &'a mut Message,
    low_water: usize,
}

impl<'a> Tracked<'a> {
    fn new(message: &'a mut Message) -> Self {
        let low_water = message.tail_len();
        Self { message, low_water }
    }

    fn push(&mut self, table: &QuantizedCategorical, symbol: usize) -> Result<()> {
        table.push(self.message, symbol)
    }

    fn pop(&mut self, table: &QuantizedCategorical) -> Result<usize> {
        let symbol = table.pop(self.message)?;
        self.low_water = self.low_water.min(self.message.tail_len());
        Ok(symbol)
    }
}

fn check_input(hmm: &Hmm, xs: &[usize], cfg: &CodecConfig) -> Result<()> {
    cfg.validate()?;
    if xs.is_empty() {
        return Err(Error::InvalidArgument("cannot code an empty sequence"));
    }
    if let Some(&symbol) = xs.iter().find(|&&x| x >= hmm.symbols()) {
        return Err(Error::SymbolOutOfRange {
            symbol,
            size: hmm.symbols(),
        });
    }
    Ok(())
}

fn check_decode(cfg: &CodecConfig, len: usize) -> Result<()> {
    cfg.validate()?;
    if len == 0 {
        return Err(Error::InvalidArgument("cannot decode an empty sequence"));
    }
    Ok(())
}

fn iconoclasm_ops(
    hmm: &Hmm,
    tables: &Tables,
    xs: &[usize],
    filters: &[FilterState],
    m: &mut Tracked<'_>,
) -> Result<()> {
    let len = xs.len();
    let mut z_next = m.pop(&tables.quantize(&hmm.posterior_last(&filters[len - 1]))?)?;
    // Index t here is the 0-based position of x_{t+1}.
    for t in (1..len).rev() {
        m.push(&tables.emission[z_next], xs[t])?;
        let z = m.pop(&tables.quantize(&hmm.posterior_step(&filters[t - 1], z_next)?)?)?;
        m.push(&tables.transition[z], z_next)?;
        z_next = z;
    }
    m.push(&tables.emission[z_next], xs[0])?;
    m.push(&tables.initial, z_next)
}

fn vanilla_ops(
    hmm: &Hmm,
    tables: &Tables,
    xs: &[usize],
    filters: &[FilterState],
    m: &mut Tracked<'_>,
) -> Result<()> {
    let prior = hmm.prior_state();
    for t in (0..xs.len()).rev() {
        let before = if t == 0 { &prior } else { &filters[t - 1] };
        m.push(&tables.quantize(&hmm.predictive(before))?, xs[t])?;
    }
    Ok(())
}

fn naive_ops(
    hmm: &Hmm,
    tables: &Tables,
    xs: &[usize],
    filters: &[FilterState],
    m: &mut Tracked<'_>,
) -> Result<()> {
    let len = xs.len();
    let mut zs = alloc::vec![0; len];
    zs[len - 1] = m.pop(&tables.quantize(&hmm.posterior_last(&filters[len - 1]))?)?;
    for t in (0..len - 1).rev() {
        zs[t] = m.pop(&tables.quantize(&hmm.posterior_step(&filters[t], zs[t + 1])?)?)?;
    }
    for t in (0..len).rev() {
        m.push(&tables.emission[zs[t]], xs[t])?;
    }
    for t in (1..len).rev() {
        m.push(&tables.transition[zs[t - 1]], zs[t])?;
    }
    m.push(&tables.initial, zs[0])
}

type Ops = fn(&Hmm, &Tables, &[usize], &[FilterState], &mut Tracked<'_>) -> Result<()>;

fn ops_for(kind: CodecKind) -> Ops {
    match kind {
        CodecKind::Iconoclasm => iconoclasm_ops,
        CodecKind::Vanilla => vanilla_ops,
        CodecKind::NaiveBbAns => naive_ops,
    }
}

/// Run the encoder ops with a buffer large enough for any input, returning
/// how many words the pops actually consumed.
fn dry_run_depth(
    kind: CodecKind,
    hmm: &Hmm,
    tables: &Tables,
    xs: &[usize],
    filters: &[FilterState],
    cfg: &CodecConfig,
) -> Result<usize> {
    // Each pop at precision p consumes at most p bits.
    let words = (xs.len() * cfg.precision as usize).div_ceil(32) + 2;
    let mut message = Message::init(words, cfg.init_seed);
    let mut tracked = Tracked::new(&mut message);
    ops_for(kind)(hmm, tables, xs, filters, &mut tracked)?;
    Ok(words - tracked.low_water)
}

fn feasible(
    kind: CodecKind,
    hmm: &Hmm,
    tables: &Tables,
    xs: &[usize],
    filters: &[FilterState],
    cfg: &CodecConfig,
) -> Result<bool> {
    let mut message = cfg.initial_message();
    match ops_for(kind)(hmm, tables, xs, filters, &mut Tracked::new(&mut message)) {
        Ok(()) => Ok(true),
        Err(Error::Underflow) => Ok(false),
        Err(e) => Err(e),
    }
}

fn search_init_words(
    kind: CodecKind,
    hmm: &Hmm,
    tables: &Tables,
    xs: &[usize],
    filters: &[FilterState],
    cfg: &CodecConfig,
) -> Result<usize> {
    let estimate = dry_run_depth(kind, hmm, tables, xs, filters, cfg)?;
    let at = |n: usize| feasible(kind, hmm, tables, xs, filters, &cfg.with_init_words(n));
    let mut n = estimate;
    if at(n)? {
        while n > 0 && at(n - 1)? {
            n -= 1;
        }
    } else {
        n += 1;
        while !at(n)? {
            n += 1;
        }
    }
    Ok(n)
}

/// Smallest `init_words` for which `kind` can encode `xs` with
/// `cfg.init_seed` and `cfg.precision`.
///
/// Starts from the depth a dry run with an oversized buffer reaches and
/// scans down (or up) one word at a time, so it returns the first feasible
/// size adjacent to an infeasible one near that estimate.
pub fn minimal_init_words(
    kind: CodecKind,
    hmm: &Hmm,
    xs: &[usize],
    cfg: &CodecConfig,
) -> Result<usize> {
    check_input(hmm, xs, cfg)?;
    let tables = Tables::new(hmm, cfg.precision)?;
    let filters = hmm.forward(xs)?;
    search_init_words(kind, hmm, &tables, xs, &filters, cfg)
}

/// Encode `xs` with `kind`, starting from `cfg.initial_message()`.
pub fn encode(
    kind: CodecKind,
    hmm: &Hmm,
    xs: &[usize],
    cfg: &CodecConfig,
) -> Result<(Message, RateReport)> {
    check_input(hmm, xs, cfg)?;
    let tables = Tables::new(hmm, cfg.precision)?;
    let filters = hmm.forward(xs)?;
    let initial = cfg.initial_message();
    let mut message = initial.clone();
    match ops_for(kind)(hmm, &tables, xs, &filters, &mut Tracked::new(&mut message)) {
        Ok(()) => {}
        Err(Error::Underflow) => {
            return Err(Error::InitBufferExhausted {
                init_words: cfg.init_words,
                required_words: search_init_words(kind, hmm, &tables, xs, &filters, cfg)?,
            })
        }
        Err(e) => return Err(e),
    }
    let h_model = filters[xs.len() - 1].h_accum;
    let report = RateReport::new(xs.len(), &initial, &message, h_model);
    Ok((message, report))
}

/// Decode `len` symbols with `kind`. Returns the sequence and the message
/// left over, which equals `cfg.initial_message()` when the input was
/// produced by [`encode`] with the same model and configuration.
pub fn decode(
    kind: CodecKind,
    hmm: &Hmm,
    len: usize,
    message: Message,
    cfg: &CodecConfig,
) -> Result<(Vec<usize>, Message)> {
    match kind {
        CodecKind::Iconoclasm => decode_iconoclasm(hmm, len, message, cfg),
        CodecKind::Vanilla => decode_vanilla(hmm, len, message, cfg),
        CodecKind::NaiveBbAns => decode_naive_bbans(hmm, len, message, cfg),
    }
}

pub fn encode_iconoclasm(
    hmm: &Hmm,
    xs: &[usize],
    cfg: &CodecConfig,
) -> Result<(Message, RateReport)> {
    encode(CodecKind::Iconoclasm, hmm, xs, cfg)
}

pub fn decode_iconoclasm(
    hmm: &Hmm,
    len: usize,
    mut m: Message,
    cfg: &CodecConfig,
) -> Result<(Vec<usize>, Message)> {
    check_decode(cfg, len)?;
    let tables = Tables::new(hmm, cfg.precision)?;
    let mut xs = Vec::with_capacity(len);

    let mut z_prev = tables.initial.pop(&mut m)?;
    xs.push(tables.emission[z_prev].pop(&mut m)?);
    let mut fs = hmm.filter_init(xs[0])?;
    for _ in 1..len {
        let z = tables.transition[z_prev].pop(&mut m)?;
        tables
            .quantize(&hmm.posterior_step(&fs, z)?)?
            .push(&mut m, z_prev)?;
        let x = tables.emission[z].pop(&mut m)?;
        fs = hmm.filter_step(&fs, x)?;
        xs.push(x);
        z_prev = z;
    }
    tables
        .quantize(&hmm.posterior_last(&fs))?
        .push(&mut m, z_prev)?;
    Ok((xs, m))
}

pub fn encode_vanilla(hmm: &Hmm, xs: &[usize], cfg: &CodecConfig) -> Result<(Message, RateReport)> {
    encode(CodecKind::Vanilla, hmm, xs, cfg)
}

pub fn decode_vanilla(
    hmm: &Hmm,
    len: usize,
    mut m: Message,
    cfg: &CodecConfig,
) -> Result<(Vec<usize>, Message)> {
    check_decode(cfg, len)?;
    let mut xs = Vec::with_capacity(len);
    let mut fs = hmm.prior_state();
    for _ in 0..len {
        let x = QuantizedCategorical::new(&hmm.predictive(&fs), cfg.precision)?.pop(&mut m)?;
        fs = hmm.filter_step(&fs, x)?;
        xs.push(x);
    }
    Ok((xs, m))
}

pub fn encode_naive_bbans(
    hmm: &Hmm,
    xs: &[usize],
    cfg: &CodecConfig,
) -> Result<(Message, RateReport)> {
    encode(CodecKind::NaiveBbAns, hmm, xs, cfg)
}

pub fn decode_naive_bbans(
    hmm: &Hmm,
    len: usize,
    mut m: Message,
    cfg: &CodecConfig,
) -> Result<(Vec<usize>, Message)> {
    check_decode(cfg, len)?;
    let tables = Tables::new(hmm, cfg.precision)?;
    let mut zs = Vec::with_capacity(len);
    zs.push(tables.initial.pop(&mut m)?);
    for t in 1..len {
        let z = tables.transition[zs[t - 1]].pop(&mut m)?;
        zs.push(z);
    }
    let xs = zs
        .iter()
        .map(|&z| tables.emission[z].pop(&mut m))
        .collect::<Result<Vec<_>>>()?;
    let filters = hmm.forward(&xs)?;
    for t in 0..len - 1 {
        tables
            .quantize(&hmm.posterior_step(&filters[t], zs[t + 1])?)?
            .push(&mut m, zs[t])?;
    }
    tables
        .quantize(&hmm.posterior_last(&filters[len - 1]))?
        .push(&mut m, zs[len - 1])?;
    Ok((xs, m))
}
