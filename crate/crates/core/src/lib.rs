//! Detection and resolution of API name mentions in developer-forum threads.

pub mod api_db;
pub mod classifier;
pub mod code;
pub mod context;
pub mod detect;
pub mod error;
pub mod eval;
pub mod filters;
pub mod pipeline;
pub mod text;

pub use error::{Error, Result};
