pub mod analysis;
pub mod cli;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod lattice;
pub mod layout;
pub mod linalg;
pub mod parent;
pub mod peps;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::c64;
