//! An exact-arithmetic laboratory for the shrinking-target behaviour of
//! irrational rotations.
//!
//! Everything is built on continued-fraction convergents: the rotation number
//! is given by a rule for its partial quotients, all real quantities are
//! certified rationals with explicit error bounds, and the circle sets used by
//! the divergence criterion are finite unions of arcs with exact rational
//! endpoints.

pub mod certified;
pub mod cf;
pub mod circle;
pub mod config;
pub mod criterion;
pub mod error;
pub mod measure;
pub mod phi;
pub mod report;
pub mod simulate;

pub use certified::CertifiedReal;
pub use cf::{ConvergentTable, IrrationalSpec};
pub use phi::PhiSpec;
pub use report::{SeriesReport, Trend};
pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
