//! Model files.
//!
//! Little-endian layout:
//!
//! | field        | size            |
//! |--------------|-----------------|
//! | magic `ICLM` | 4               |
//! | version      | u32 (= 1)       |
//! | K            | u32             |
//! | V            | u32             |
//! | has alphabet | u8 (0 or 1)     |
//! | alphabet     | V × u32 code points, only if present |
//! | π            | K × f64         |
//! | A            | K·K × f64, row-major |
//! | B            | K·V × f64, row-major |
//! | CRC-32       | u32 over all preceding bytes |

use std::path::Path;

use iconoclasm::Hmm;

use crate::corpus::Alphabet;
use crate::error::{Error, Result};
use crate::wire::{crc32, seal, unseal, Reader};

const MAGIC: &[u8; 4] = b"ICLM";
const VERSION: u32 = 1;

/// An HMM plus, for text models, the alphabet its symbols index.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub hmm: Hmm,
    pub alphabet: Option<Alphabet>,
}

impl ModelFile {
    pub fn new(hmm: Hmm, alphabet: Option<Alphabet>) -> Result<Self> {
        if let Some(a) = &alphabet {
            if a.len() != hmm.symbols() {
                return Err(Error::Input(format!(
                    "alphabet has {} characters but the model has {} symbols",
                    a.len(),
                    hmm.symbols()
                )));
            }
        }
        Ok(Self { hmm, alphabet })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let hmm = &self.hmm;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(hmm.states() as u32).to_le_bytes());
        out.extend_from_slice(&(hmm.symbols() as u32).to_le_bytes());
        match &self.alphabet {
            Some(alphabet) => {
                out.push(1);
                for &c in alphabet.chars() {
                    out.extend_from_slice(&u32::from(c).to_le_bytes());
                }
            }
            None => out.push(0),
        }
        for values in [hmm.initial(), hmm.transition(), hmm.emission()] {
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        seal(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(unseal(bytes)?, "model file");
        r.magic(MAGIC)?;
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported model file version {version}"
            )));
        }
        let k = r.u32()? as usize;
        let v = r.u32()? as usize;
        let alphabet = match r.u8()? {
            0 => None,
            1 => {
                let chars = (0..v)
                    .map(|_| {
                        let code = r.u32()?;
                        char::from_u32(code).ok_or_else(|| {
                            Error::Format(format!("invalid code point {code:#x} in alphabet"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(Alphabet::from_chars(chars)?)
            }
            flag => return Err(Error::Format(format!("invalid alphabet flag {flag}"))),
        };
        let initial = r.f64s(k)?;
        let transition = r.f64s(k.saturating_mul(k))?;
        let emission = r.f64s(k.saturating_mul(v))?;
        r.finish()?;
        let hmm = Hmm::new(k, v, initial, transition, emission)?;
        Self::new(hmm, alphabet)
    }

    /// CRC-32 of the serialized payload; compressed files record it to tie
    /// themselves to a model.
    pub fn checksum(&self) -> u32 {
        let bytes = self.to_bytes();
        crc32(&bytes[..bytes.len() - 4])
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
