//! Lacunarity invariants of level-one modular forms mod p.

pub mod arith;
pub mod basis;
pub mod constants;
pub mod counting;
pub mod density;
pub mod error;
pub mod euler;
pub mod expr;
pub mod field;
pub mod hecke;
pub mod hecke_module;
pub mod linalg;
pub mod par;
pub mod series;

pub use basis::GradedForm;
pub use error::{Error, Result};
pub use field::{FpElement, Prime};
pub use hecke_module::{HeckeModule, ModuleConfig};
pub use par::Execution;
pub use series::{QSeries, SparseSeries};
