//! Human-play session server for retrobench.
//!
//! A client connects over WebSocket at `/ws`, sends `ready`, and then
//! receives one frame per tick while its latest button mask drives the
//! game. See [`protocol`] for the message layouts.

pub mod error;
pub mod protocol;
pub mod server;
pub mod session;

pub use error::{Result, ServeError};
pub use server::{router, serve, ServerState};
pub use session::{EpisodeLog, EpisodeStatus, Session, SessionConfig, SessionRecord};
