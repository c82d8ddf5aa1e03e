pub mod cli;
pub mod error;
pub mod family;
pub mod io;
pub mod krein;
pub mod numerics;
pub mod products;
pub mod random;
pub mod signtype;

pub use error::{Error, Result};
