//! File formats, corpus handling and experiment runners around the
//! [`iconoclasm`] codecs. The `iconoclasm` binary is a thin CLI over this
//! crate.

pub mod compressed;
pub mod corpus;
mod error;
pub mod experiment;
pub mod model_file;
mod wire;

pub use compressed::CompressedFile;
pub use corpus::{load_corpus, Alphabet};
pub use error::{Error, Result};
pub use experiment::{ExperimentRecord, PerfectExperiment, TextExperiment};
pub use model_file::ModelFile;
