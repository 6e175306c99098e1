//! Dataset ingestion, synthetic problem generation and seeded randomness.

mod libsvm;
mod rng;
mod synthetic;

pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm, LabelMap, LibsvmDataset, ParseOptions};
pub use rng::RngStream;
pub use synthetic::{generate_logsumexp, generate_quadratic, generate_start, SyntheticSpec};
