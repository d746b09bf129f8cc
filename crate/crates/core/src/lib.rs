pub mod error;
pub mod features;
pub mod ingest;
pub mod learning;
pub mod modelfile;
pub mod numeric;
pub mod pipeline;
pub mod rating;
pub mod retrieval;
pub mod roles;
pub mod service;
pub mod synth;

pub use error::{Error, Result};
