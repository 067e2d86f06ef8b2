//! Scheme files, reports and experiment drivers around [`cfet_core`].

pub mod batch;
pub mod cli;
pub mod error;
pub mod io;
pub mod report;
pub mod sampling;
pub mod search;

pub use error::CfetError;
