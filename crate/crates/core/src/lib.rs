//! Numerical laboratory for bifurcations of planar vector-field families.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! field (families, cut functions, surgeries)
//!   -> flow (integration, sections, return maps)
//!   -> portrait (singular points, cycles, separatrices, skeleton)
//!   -> support (Acc, ELBS, LBS, LBS*, theorem checks)
//!   -> diagram (two-parameter scans, product structure, independence)
//! ```
//!
//! Everything below `io` is pure and deterministic: identical inputs give
//! bitwise-identical outputs, and per-parameter work parallelizes freely.

pub mod diagram;
pub mod error;
pub mod field;
pub mod flow;
pub mod geom;
pub mod io;
pub mod portrait;
pub mod support;

pub use error::CoreError;
pub use field::{ChartDomain, CutFunction, Family, ParamPoint, Region, SplittingData};
pub use flow::{IntegrationSettings, Section, Trajectory};
pub use portrait::PhasePortrait;
pub use support::SupportSet;
