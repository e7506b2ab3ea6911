//! Trace-driven simulator of a hybrid DRAM-PCM main memory.
//!
//! A small DRAM cache sits in front of a large PCM. Both devices are modeled as
//! banks with one row buffer each; the memory controller schedules requests
//! FR-FCFS and migrates whole rows into DRAM according to a placement policy
//! (access-frequency based, or row-buffer-locality aware, each with an optional
//! hill-climbing threshold).

pub mod config;
pub mod controller;
pub mod device;
pub mod engine;
pub mod metrics;
pub mod error;
pub mod experiment;
pub mod policy;
pub mod trace;

pub use error::{Error, Result};
