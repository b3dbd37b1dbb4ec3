//! Range ANS over a LIFO message.
//!
//! A [`Message`] is a 64-bit head plus a stack of 32-bit words. The head is
//! kept in `[2^32, 2^64)`; pushing flushes the low word of the head to the
//! tail before it would overflow, popping refills it from the tail when it
//! drops below `2^32`. `pop` is the exact inverse of `push`, so a message can
//! be used both as a code and as a source of random choices (bits back).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Lower bound of the head after every operation.
pub const HEAD_MIN: u64 = 1 << 32;

/// Highest supported quantization precision.
pub const MAX_PRECISION: u32 = 31;

/// The interval `[start, start + width)` of one symbol in `[0, 2^precision)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FreqSpan {
    start: u32,
    width: u32,
    precision: u32,
}

impl FreqSpan {
    pub fn new(start: u32, width: u32, precision: u32) -> Result<Self> {
        if precision == 0 || precision > MAX_PRECISION {
            return Err(Error::InvalidPrecision(precision));
        }
        let end = u64::from(start) + u64::from(width);
        if width == 0 || end > 1u64 << precision {
            return Err(Error::InvalidSpan {
                start,
                width,
                precision,
            });
        }
        Ok(Self {
            start,
            width,
            precision,
        })
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Information content of the symbol, `precision - log2(width)` bits.
    pub fn bits(&self) -> f64 {
        f64::from(self.precision) - libm::log2(f64::from(self.width))
    }
}

/// LIFO compressed message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    head: u64,
    tail: Vec<u32>,
}

impl Message {
    /// Base message with `head = 2^32` and `init_words` pseudo-random tail
    /// words drawn from [`SplitMix64`] (high half of each output), bottom
    /// word first.
    pub fn init(init_words: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let tail = (0..init_words).map(|_| (rng.next() >> 32) as u32).collect();
        Self {
            head: HEAD_MIN,
            tail,
        }
    }

    pub fn from_parts(head: u64, tail: Vec<u32>) -> Result<Self> {
        if head < HEAD_MIN {
            return Err(Error::Format("head below 2^32"));
        }
        Ok(Self { head, tail })
    }

    pub fn head(&self) -> u64 {
        self.head
    }

    /// Tail words, bottom first.
    pub fn tail(&self) -> &[u32] {
        &self.tail
    }

    pub fn tail_len(&self) -> usize {
        self.tail.len()
    }

    /// Transmitted length: 64 head bits plus 32 bits per tail word.
    pub fn length_bits(&self) -> u64 {
        64 + 32 * self.tail.len() as u64
    }

    /// Information actually stored, `32·tail + log2(head)`. Unlike
    /// [`length_bits`](Self::length_bits) this moves by fractions of a bit
    /// per operation, which makes it the right yardstick for per-op overhead.
    pub fn content_bits(&self) -> f64 {
        32.0 * self.tail.len() as f64 + libm::log2(self.head as f64)
    }

    pub fn push(&mut self, span: FreqSpan) {
        let FreqSpan {
            start,
            width,
            precision,
        } = span;
        // head >= width * 2^(64 - precision), written without overflow.
        while self.head >> (64 - precision) >= u64::from(width) {
            self.tail.push(self.head as u32);
            self.head >>= 32;
        }
        let width = u64::from(width);
        self.head = ((self.head / width) << precision) + self.head % width + u64::from(start);
    }

    /// Peek the cumulative value `head mod 2^precision` that the next pop
    /// at this precision will decode.
    pub fn peek(&self, precision: u32) -> u32 {
        (self.head & ((1u64 << precision) - 1)) as u32
    }

    /// Pop one symbol. `locate` maps the cumulative value in
    /// `[0, 2^precision)` to the symbol and its span; the span must contain
    /// the value and use the same precision.
    ///
    /// On error the message is left untouched.
    pub fn pop<S, F>(&mut self, precision: u32, locate: F) -> Result<S>
    where
        F: FnOnce(u32) -> Result<(S, FreqSpan)>,
    {
        if precision == 0 || precision > MAX_PRECISION {
            return Err(Error::InvalidPrecision(precision));
        }
        let cum = self.peek(precision);
        let (symbol, span) = locate(cum)?;
        if span.precision != precision || cum < span.start || cum - span.start >= span.width {
            return Err(Error::InvalidSpan {
                start: span.start,
                width: span.width,
                precision: span.precision,
            });
        }
        let head = u64::from(span.width) * (self.head >> precision) + u64::from(cum - span.start);
        if head < HEAD_MIN {
            let word = *self.tail.last().ok_or(Error::Underflow)?;
            self.tail.pop();
            self.head = (head << 32) | u64::from(word);
        } else {
            self.head = head;
        }
        Ok(symbol)
    }

    /// Little-endian layout: 8-byte head, 4-byte word count `n`, then `n`
    /// 4-byte words bottom to top.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.tail.len());
        out.extend_from_slice(&self.head.to_le_bytes());
        out.extend_from_slice(&(self.tail.len() as u32).to_le_bytes());
        for word in &self.tail {
            out.extend_from_slice(&word.to_le_bytes());
        }
        out
    }

    /// Inverse of [`to_bytes`](Self::to_bytes). Returns the message and the
    /// number of bytes consumed.
    pub fn from_bytes_prefix(bytes: &[u8]) -> Result<(Self, usize)> {
        if bytes.len() < 12 {
            return Err(Error::Format("truncated message header"));
        }
        let head = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let end = n
            .checked_mul(4)
            .and_then(|len| len.checked_add(12))
            .filter(|&end| end <= bytes.len())
            .ok_or(Error::Format("truncated message tail"))?;
        let tail = bytes[12..end]
            .chunks_exact(4)
            .map(|w| u32::from_le_bytes(w.try_into().unwrap()))
            .collect();
        Ok((Self::from_parts(head, tail)?, end))
    }

    /// Like [`from_bytes_prefix`](Self::from_bytes_prefix) but rejects
    /// trailing bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (message, used) = Self::from_bytes_prefix(bytes)?;
        if used != bytes.len() {
            return Err(Error::Format("trailing bytes after message"));
        }
        Ok(message)
    }
}
