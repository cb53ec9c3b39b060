pub mod channels;
pub mod darwinism;
pub mod diamond;
pub mod error;
pub mod infotheory;
pub mod linalg;
pub mod quantum;
pub mod selftest;

pub use error::{Error, Result};
