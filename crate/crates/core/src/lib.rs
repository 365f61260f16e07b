//! Bug localization for Android apps: text-retrieval baselines augmented with
//! GUI interaction data from bug reproduction scenarios.

pub mod augment;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod mapping;
pub mod preprocess;
pub mod retrieval;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
