//! Sequential empirical processes indexed by threshold-type function
//! families, with two applications: a threshold (SETAR) test for a mean
//! shift and a changepoint test in nonparametric regression.

pub mod cli;
pub mod empproc;
pub mod entropy;
pub mod error;
pub mod io;
pub mod law;
pub mod limits;
mod quad;
pub mod report;
pub mod rng;
pub mod seriesgen;
pub mod setar_test;
pub mod verify;

pub use error::{Error, Result};
