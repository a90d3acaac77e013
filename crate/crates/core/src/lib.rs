//! Benchmark harness for dynamic link prediction on discrete-time dynamic
//! graphs, built around the temporal receptive field `tau`: how many past
//! snapshots a model may read when predicting the next one.

pub mod bench;
pub mod dtdg;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod models;
pub mod sweep;
pub mod synthetic;
pub mod tensor;

pub use dtdg::{chronological_split, Dtdg, Snapshot, SplitSpec, Tau, TemporalWindow};
pub use error::{Error, Result};
