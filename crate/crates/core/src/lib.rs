pub mod cli;
pub mod error;
pub mod level;
pub mod lie;
pub mod linalg;
pub mod quat;
pub mod random;
pub mod scene;
pub mod submersion;
pub mod verify;

pub use error::{Error, Result};
