//! Partially observable worlds with interval-probability transitions and
//! observation noise, plus the event, test and theory machinery an agent uses
//! to learn what is going on in them.

pub mod agent;
pub mod chance;
pub mod error;
pub mod event;
pub mod history;
pub mod interval;
pub mod noise;
pub mod prob;
pub mod run;
pub mod signature;
pub mod theory;
pub mod transform;
pub mod world;
pub mod worldfile;
pub mod worlds;

pub use error::{EventError, FileError, LogError, WorldError};
