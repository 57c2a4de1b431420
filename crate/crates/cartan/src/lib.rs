pub mod cli;
pub mod ek;
pub mod error;
pub mod fd;
pub mod foliation;
pub mod linalg;
pub mod metric;
pub mod model;
pub mod monodromy;
pub mod ode;
pub mod quadrature;
pub mod rational;
pub mod verifier;

pub use error::{Error, Result};
pub use fd::FiniteDiff;
pub use model::{builtin_model, AlgebroidElement, CartanModel, ModelParams, StructureGroup};
