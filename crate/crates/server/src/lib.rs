//! HTTP service and command-line front end for the knowledge graph core.

pub mod cli;
pub mod config;
pub mod error;
pub mod routes;

pub use config::ServiceConfig;
pub use error::ApiError;
pub use routes::router;
