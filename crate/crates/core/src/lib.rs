pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod features;
pub mod instance;
pub mod kg;
pub mod nlp;
pub mod report;
pub mod stats;
pub mod text;
pub mod verdict;

pub use error::{Error, Result};
