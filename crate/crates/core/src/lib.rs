pub mod error;
pub mod eval;
pub mod freiheit;
mod linalg;
pub mod novikov;
pub mod poly;
pub mod tableau;

pub use error::{Error, Result};
