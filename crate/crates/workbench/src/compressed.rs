//! Compressed files.
//!
//! Little-endian layout: magic `ICLC`, version u32 (= 1), codec id u8,
//! precision u32, init_words u32, init_seed u64, sequence length u64, model
//! checksum u32, the serialized message (8-byte head, u32 word count, words
//! bottom to top), then a CRC-32 of everything before it.

use std::path::Path;

use iconoclasm::{codec, CodecConfig, CodecKind, Message, RateReport};

use crate::error::{Error, Result};
use crate::model_file::ModelFile;
use crate::wire::{seal, unseal, Reader};

const MAGIC: &[u8; 4] = b"ICLC";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedFile {
    pub codec: CodecKind,
    pub config: CodecConfig,
    pub len: u64,
    pub model_checksum: u32,
    pub message: Message,
}

impl CompressedFile {
    /// Encode `symbols` under `model`.
    pub fn compress(
        model: &ModelFile,
        codec: CodecKind,
        config: CodecConfig,
        symbols: &[usize],
    ) -> Result<(Self, RateReport)> {
        if symbols.is_empty() {
            return Err(Error::Input("nothing to compress: input is empty".into()));
        }
        let (message, report) = codec::encode(codec, &model.hmm, symbols, &config)?;
        let file = Self {
            codec,
            config,
            len: symbols.len() as u64,
            model_checksum: model.checksum(),
            message,
        };
        Ok((file, report))
    }

    /// Decode under `model`, refusing if the file was written with a
    /// different model or the decoder does not land back on the base
    /// message.
    pub fn decompress(&self, model: &ModelFile) -> Result<Vec<usize>> {
        let actual = model.checksum();
        if actual != self.model_checksum {
            return Err(Error::ModelMismatch {
                expected: self.model_checksum,
                actual,
            });
        }
        let len =
            usize::try_from(self.len).map_err(|_| Error::Format("sequence too long".into()))?;
        let (symbols, rest) = codec::decode(
            self.codec,
            &model.hmm,
            len,
            self.message.clone(),
            &self.config,
        )?;
        if rest != self.config.initial_message() {
            return Err(Error::Format(
                "decoder did not restore the base message; file is corrupt or the settings differ"
                    .into(),
            ));
        }
        Ok(symbols)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.codec.id());
        out.extend_from_slice(&self.config.precision.to_le_bytes());
        out.extend_from_slice(&(self.config.init_words as u32).to_le_bytes());
        out.extend_from_slice(&self.config.init_seed.to_le_bytes());
        out.extend_from_slice(&self.len.to_le_bytes());
        out.extend_from_slice(&self.model_checksum.to_le_bytes());
        out.extend_from_slice(&self.message.to_bytes());
        seal(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(unseal(bytes)?, "compressed file");
        r.magic(MAGIC)?;
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported compressed file version {version}"
            )));
        }
        let id = r.u8()?;
        let codec = CodecKind::from_id(id)
            .ok_or_else(|| Error::Format(format!("unknown codec id {id}")))?;
        let config = CodecConfig {
            precision: r.u32()?,
            init_words: r.u32()? as usize,
            init_seed: r.u64()?,
        };
        config.validate()?;
        let len = r.u64()?;
        let model_checksum = r.u32()?;
        let message = Message::from_bytes(r.rest())?;
        Ok(Self {
            codec,
            config,
            len,
            model_checksum,
            message,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use iconoclasm::Hmm;

    fn model(seed: u64) -> ModelFile {
        ModelFile::new(Hmm::sample_params(4, 5, 1.0, seed), None).unwrap()
    }

    #[test]
    fn round_trip_all_codecs() {
        let m = model(1);
        let (xs, _) = m.hmm.sample_sequence(300, 2);
        for kind in CodecKind::ALL {
            let cfg = CodecConfig {
                init_words: 400,
                ..CodecConfig::default()
            };
            let (file, _) = CompressedFile::compress(&m, kind, cfg, &xs).unwrap();
            let parsed = CompressedFile::from_bytes(&file.to_bytes()).unwrap();
            assert_eq!(parsed, file);
            assert_eq!(parsed.decompress(&m).unwrap(), xs);
        }
    }

    #[test]
    fn wrong_model_is_refused() {
        let (xs, _) = model(1).hmm.sample_sequence(50, 2);
        let (file, _) = CompressedFile::compress(
            &model(1),
            CodecKind::Iconoclasm,
            CodecConfig::default(),
            &xs,
        )
        .unwrap();
        assert!(matches!(
            file.decompress(&model(2)),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn corruption_is_detected() {
        let m = model(3);
        let (xs, _) = m.hmm.sample_sequence(80, 2);
        let (file, _) =
            CompressedFile::compress(&m, CodecKind::Vanilla, CodecConfig::default(), &xs).unwrap();
        let bytes = file.to_bytes();
        for i in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[i] ^= 0x10;
            assert!(CompressedFile::from_bytes(&bad).is_err(), "byte {i}");
        }
        assert!(CompressedFile::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(CompressedFile::compress(
            &model(0),
            CodecKind::Iconoclasm,
            CodecConfig::default(),
            &[]
        )
        .is_err());
    }
}
