//! Two-agent dialogue engine with collective acceptance and conceptual pacts.
//!
//! Agents hold beliefs, pacts and intentions over a small modal language,
//! exchange dialogue acts chosen by rational deliberation, and leave a
//! replayable trace.

pub mod acts;
pub mod engine;
pub mod logic;
pub mod mental;
pub mod reference;
pub mod sim;
